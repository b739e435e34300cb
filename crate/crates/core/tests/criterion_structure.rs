use donaldson_core::criterion::{
    appell_moment, appell_moment_ratio, criterion_constant_term, criterion_series, g_ell, h_ell,
    k_series_from_moment, measure_moment_ratio, pn_polynomial, pn_polynomial_for_probe,
    reduce_to_z_polynomial, total_derivative_form, z_series, ZPolynomial,
};
use donaldson_core::modforms::{bracket, bracket_scaled, k_series_at, q_plus, theta, QPlus, ThetaIndex};
use donaldson_core::rat::{rat, Rat};
use donaldson_core::series::QExp;
use donaldson_core::Error;

fn poly(coeffs: &[Rat]) -> ZPolynomial {
    ZPolynomial::new(coeffs.to_vec())
}

fn round_trips(f: &QExp) -> ZPolynomial {
    let p = reduce_to_z_polynomial(f).unwrap();
    let z = z_series(f.trunc() + 16 * (p.degree().unwrap_or(0) as i64 + 1)).unwrap();
    assert!(p.evaluate(&z).agrees_with(f));
    p
}

#[test]
fn reduces_simple_combinations() {
    let z = z_series(8 * 30).unwrap();
    let f = z.mul(&z).add(&QExp::constant(Rat::from(3), z.trunc()));
    assert_eq!(reduce_to_z_polynomial(&f).unwrap(), poly(&[Rat::from(3), Rat::zero(), Rat::one()]));
}

#[test]
fn g_and_h_lie_in_the_ring() {
    let t = 8 * 24;
    assert_eq!(round_trips(&g_ell(0, t).unwrap()), poly(&[Rat::zero(), Rat::one()]));
    assert_eq!(round_trips(&g_ell(1, t).unwrap()), poly(&[Rat::from(64), Rat::zero(), Rat::one()]));
    assert_eq!(round_trips(&h_ell(1, t).unwrap()), poly(&[Rat::from(-128), Rat::zero(), Rat::one()]));
    for l in 0..=4 {
        let g = g_ell(l, t).unwrap();
        let h = h_ell(l, t).unwrap();
        round_trips(&g);
        round_trips(&h);
        round_trips(&g.sub(&h));
    }
}

#[test]
fn odd_support_is_not_in_the_ring() {
    let f = theta(ThetaIndex::Three, 64);
    assert!(matches!(reduce_to_z_polynomial(&f), Err(Error::NotInRing(_))));
}

#[test]
fn criterion_vanishes_for_small_sums() {
    for s in 0..=6 {
        for m in 0..=s {
            assert!(criterion_constant_term(m, s - m).unwrap().is_zero(), "({m}, {})", s - m);
        }
    }
}

#[test]
fn criterion_is_a_total_derivative() {
    let t = 64;
    for n in 0..=6 {
        let p = pn_polynomial_for_probe(n, 0).unwrap();
        for m in 0..=3 {
            let crit = criterion_series(m, n, t).unwrap();
            assert_eq!(total_derivative_form(m, &p, t).unwrap(), crit, "n={n}, m={m}");
        }
    }
}

#[test]
fn first_p_polynomials() {
    assert_eq!(pn_polynomial(0, 0).unwrap(), poly(&[Rat::zero(), rat(1, 32)]));
    assert_eq!(pn_polynomial(1, 2).unwrap(), poly(&[rat(-1, 2)]));
    assert_eq!(pn_polynomial(3, 1).unwrap(), poly(&[Rat::from(-87), Rat::zero(), rat(-11, 16)]));
}

#[test]
fn moments_are_multiples_of_rescaled_k() {
    for t in 0..=3 {
        let trunc = 8 * 120;
        let ratio = measure_moment_ratio(t, trunc).unwrap();
        assert_eq!(ratio, appell_moment_ratio(t));
        assert_eq!(ratio, Rat::from(2).pow(2 * t as i32 + 2));
        assert_eq!(k_series_from_moment(t, trunc), k_series_at(2 * t, 8, trunc));
        let moment = appell_moment(t, trunc);
        assert!(moment.terms().all(|(e, _)| e % 8 == 0 && (e / 8).rem_euclid(4) == 1));
    }
}

#[test]
fn bracket_is_linear_and_commutes_with_rescaling() {
    let f = q_plus(QPlus::Q01, 96);
    let g = theta(ThetaIndex::Three, 96);
    let (a, b) = (rat(3, 5), Rat::from(-2));
    for l in 0..=3 {
        let lhs = bracket(&f.mul_scalar(&a).add(&g.mul_scalar(&b)), l);
        let rhs = bracket(&f, l).mul_scalar(&a).add(&bracket(&g, l).mul_scalar(&b));
        assert_eq!(lhs, rhs);
        let scaled = bracket_scaled(&f.scale_q(8), l, 8);
        assert!(scaled.agrees_with(&bracket(&f, l).scale_q(8)));
    }
    assert_eq!(bracket(&f, 0), f);
}
