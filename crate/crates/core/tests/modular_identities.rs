use donaldson_core::criterion::{
    kq_difference, kq_difference_closed_form, z_derivative_closed_form, z_series,
};
use donaldson_core::modforms::{
    big_theta, eisenstein_e2, estar_at, estar_via_e2, estar_via_odd_divisors, eta3, k_series_at,
    q_plus, q_plus_at, theta, QPlus, ThetaIndex,
};
use donaldson_core::rat::{rat, Rat};
use donaldson_core::series::QExp;

const T: i64 = 256;

fn from_q_powers(terms: &[(i64, i64)], trunc: i64) -> QExp {
    QExp::from_terms(terms.iter().map(|&(e, c)| (8 * e, Rat::from(c))), trunc)
}

fn sigma(n: i64) -> i64 {
    (1..=n).filter(|d| n % d == 0).sum()
}

/// `prod_{n>=1} (1 - q^n)`, multiplied out factor by factor.
fn euler_product(trunc: i64) -> QExp {
    let mut acc = QExp::one(trunc);
    let mut n = 1;
    while 8 * n < trunc {
        let factor = QExp::from_terms([(0, Rat::one()), (8 * n, Rat::from(-1))], trunc);
        acc = acc.mul(&factor);
        n += 1;
    }
    acc
}

#[test]
fn eta_cubed_matches_the_product_formula() {
    let prod = euler_product(T).pow_int(3).unwrap().shift(1);
    assert!(eta3(T).agrees_with(&prod));
    assert_eq!(eta3(T).trunc(), T);
}

#[test]
fn eta_cubed_is_half_the_theta_product() {
    let t2 = theta(ThetaIndex::Two, T);
    let t3 = theta(ThetaIndex::Three, T);
    let t4 = theta(ThetaIndex::Four, T);
    let half = t2.mul(&t3).mul(&t4).mul_scalar(&rat(1, 2));
    assert_eq!(half, eta3(T));
}

#[test]
fn theta4_eighth_power_counts_lattice_points() {
    // coefficient of q^(N/2) is (-1)^N r_8(N) with r_8(N) = 16 sum_{d|N} (-1)^(N+d) d^3
    let f = theta(ThetaIndex::Four, T).pow_int(8).unwrap();
    assert_eq!(f.coefficient(4).unwrap(), Rat::from(-16));
    assert_eq!(f.coefficient(8).unwrap(), Rat::from(112));
    for n in 1..T / 4 {
        let r8: i64 = (1..=n).filter(|d| n % d == 0).map(|d| if (n + d) % 2 == 0 { d * d * d } else { -d * d * d }).sum();
        let expected = if n % 2 == 0 { 16 * r8 } else { -16 * r8 };
        assert_eq!(f.coefficient(4 * n).unwrap(), Rat::from(expected), "N = {n}");
        assert_eq!(f.coefficient(4 * n + 1).unwrap(), Rat::zero());
    }
}

#[test]
fn e2_coefficients() {
    let e2 = eisenstein_e2(T);
    assert_eq!(e2.constant_term().unwrap(), Rat::one());
    for n in 1..T / 8 {
        assert_eq!(e2.coefficient(8 * n).unwrap(), Rat::from(-24 * sigma(n)));
    }
}

#[test]
fn both_estar_routes_agree() {
    assert_eq!(estar_via_odd_divisors(T), estar_via_e2(T));
}

#[test]
fn big_theta_product_is_rescaled_eta_cubed() {
    let prod = big_theta(ThetaIndex::Two, T)
        .mul(&big_theta(ThetaIndex::Three, T))
        .mul(&big_theta(ThetaIndex::Four, T));
    let eta = eta3(T).scale_q(8).truncate(T);
    assert_eq!(prod.truncate(T), eta);
    assert_eq!(eta.coefficient(8).unwrap(), Rat::one());
    assert_eq!(eta.coefficient(72).unwrap(), Rat::from(-3));
}

#[test]
fn big_theta_fourth_powers_give_estar() {
    let t2 = big_theta(ThetaIndex::Two, T).pow_int(4).unwrap();
    let t3 = big_theta(ThetaIndex::Three, T).pow_int(4).unwrap();
    let lhs = t2.mul_scalar(&Rat::from(16)).add(&t3);
    assert_eq!(lhs.truncate(T), estar_at(4, T));
}

#[test]
fn z_derivative_closed_form_holds() {
    let z = z_series(T + 16).unwrap();
    assert_eq!(z.q_derivative().truncate(T), z_derivative_closed_form(T).unwrap());
}

#[test]
fn rescaled_k0_over_eta_cubed() {
    let k0 = k_series_at(0, 8, T);
    let eta = eta3(T).scale_q(8).truncate(T + 8);
    let f = k0.mul(&eta.inverse().unwrap()).mul_scalar(&Rat::from(8));
    let expected = from_q_powers(&[(4, 24), (8, 80), (12, 240), (16, 528)], 8 * 17);
    assert!(f.trunc() >= 8 * 17);
    assert_eq!(f.truncate(8 * 17), expected);
}

#[test]
fn rescaled_q01_expansion() {
    let f = q_plus_at(QPlus::Q01, 8, T).mul_scalar(&Rat::from(8));
    let expected = from_q_powers(&[(0, -1), (4, -2), (8, 4), (12, -8), (16, 10)], 8 * 17);
    assert_eq!(f.truncate(8 * 17), expected);
}

#[test]
fn rescaled_difference_expansion() {
    let f = kq_difference(8 * 17).unwrap().mul_scalar(&Rat::from(8));
    let expected = from_q_powers(&[(0, 1), (4, 26), (8, 76), (12, 248), (16, 518)], 8 * 17);
    assert_eq!(f, expected);
}

#[test]
fn difference_equals_estar_over_theta4() {
    let lhs = kq_difference(T).unwrap();
    let rhs = kq_difference_closed_form(T).unwrap();
    assert_eq!(lhs.trunc(), T);
    assert_eq!(lhs, rhs);
}

#[test]
fn q01_leading_coefficients() {
    let q01 = q_plus(QPlus::Q01, 40);
    let r: Vec<Rat> = (0..5).map(|n| q01.coefficient(4 * n).unwrap()).collect();
    assert_eq!(r, vec![rat(-1, 8), rat(-1, 4), rat(1, 2), Rat::from(-1), rat(5, 4)]);
}
