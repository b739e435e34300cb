//! Constant-term vanishing criterion and the `Gamma_0(8)` machinery around it.
//!
//! The criterion series for `(m, n)` has vanishing constant term exactly when
//! `Phi_{m,2n+1} = D_{m,n}`. Rescaled by `tau -> 8 tau` it becomes a total
//! derivative `(q dZ/dq) (Z/4)^m P_n(Z)` where
//! `Z = E*(4 tau) / (Theta_2 Theta_3)^2` generates the modular functions on
//! `Gamma_0(8)` that are holomorphic away from infinity. This module builds
//! `Z`, the series `G_l` and `H_l`, the Appell-Lerch moments that realise
//! `K_{2t}(8 tau)`, and reduces modular functions to polynomials in `Z`.

use std::fmt;

use crate::error::{Error, Result};
use crate::modforms::{
    big_theta, bracket_scaled, eisenstein_e2, eisenstein_e2_at, estar_at, eta3, gamma_half_ratio,
    k_series, k_series_at, q_plus, q_plus_at, theta, QPlus, ThetaIndex,
};
use crate::rat::{binomial, factorial, Rat};
use crate::series::{with_output_trunc, QExp, Q};

/// Polynomial in `Z` with rational coefficients; `coeffs[i]` multiplies `Z^i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ZPolynomial {
    coeffs: Vec<Rat>,
}

impl ZPolynomial {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(Rat::is_zero) {
            coeffs.pop();
        }
        ZPolynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    /// Horner evaluation at a series.
    pub fn evaluate(&self, z: &QExp) -> QExp {
        let Some((top, rest)) = self.coeffs.split_last() else {
            return QExp::zero(z.trunc());
        };
        // wide enough that the constants never limit the truncation
        let reach = |f: &QExp| (f.trunc() - z.valuation().unwrap_or(z.trunc())).max(1);
        let mut acc = QExp::constant(top.clone(), reach(z));
        for c in rest.iter().rev() {
            let prod = &acc * z;
            let t = reach(&prod).max(prod.trunc());
            acc = &prod + &QExp::constant(c.clone(), t);
        }
        acc
    }
}

/// Renders with variable `x`, highest degree first: `13/16*x^5 + 80153/8*x^3 - 87`.
impl fmt::Display for ZPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            first = false;
            let var = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            match (var.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{mag}")?,
                (false, true) => write!(f, "{var}")?,
                (false, false) => write!(f, "{mag}*{var}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `(Theta_2 Theta_3)^(-1)` at input truncation `t`.
fn big_theta_prod_inv(t: i64) -> Result<QExp> {
    (&big_theta(ThetaIndex::Two, t) * &big_theta(ThetaIndex::Three, t)).inverse()
}

/// `Z = E*(4 tau) / (Theta_2 Theta_3)^2`, leading term `q^(-2)`.
pub fn z_series(trunc: i64) -> Result<QExp> {
    with_output_trunc(trunc, |t| Ok(&estar_at(4, t) * &big_theta_prod_inv(t)?.pow_int(2)?))
}

/// `-2 Theta_4^8 / (Theta_2 Theta_3)^2`, the closed form of `q dZ/dq`.
pub fn z_derivative_closed_form(trunc: i64) -> Result<QExp> {
    with_output_trunc(trunc, |t| {
        let num = big_theta(ThetaIndex::Four, t).pow_int(8)?;
        Ok((&num * &big_theta_prod_inv(t)?.pow_int(2)?).mul_scalar(&Rat::from(-2)))
    })
}

/// `D_u^(2t+1) D_v` at `u = v = 0` of the Appell-Lerch sum
/// `sum_n (-1)^n w^(2n+1) q^((2n+1)^2) / (1 - r^2 w^2 q^(8n+4))`.
///
/// After geometric expansion the sum is a combination of monomials
/// `r^A w^B q^C`, each of which contributes `A^(2t+1) B q^C`; the terms with
/// `A = 0` drop out, leaving
/// `sum_{n>=0, m>=1} (-1)^n 2 (2m)^(2t+1) (2n+1+2m) q^((2n+1)^2 + 4m(2n+1))`.
pub fn appell_moment(t: u32, trunc: i64) -> QExp {
    let mut terms = Vec::new();
    let mut n = 0i64;
    loop {
        let odd = 2 * n + 1;
        // m = 1 gives the smallest exponent for this n
        if Q * (odd * odd + 4 * odd) >= trunc {
            break;
        }
        let mut m = 1i64;
        loop {
            let e = Q * (odd * odd + 4 * m * odd);
            if e >= trunc {
                break;
            }
            let a = Rat::from(2 * m).pow(2 * t as i32 + 1);
            let c = Rat::sign_power(n) * Rat::from(2) * a * Rat::from(odd + 2 * m);
            terms.push((e, c));
            m += 1;
        }
        n += 1;
    }
    QExp::from_terms(terms, trunc)
}

/// The constant `lambda_t = 2^(2t+2)` with `appell_moment(t) = lambda_t K_{2t}(8 tau)`.
pub fn appell_moment_ratio(t: u32) -> Rat {
    Rat::from(2).pow(2 * t as i32 + 2)
}

/// `K_{2t}(8 tau)` obtained from the Appell-Lerch moment, `appell_moment(t) / lambda_t`.
pub fn k_series_from_moment(t: u32, trunc: i64) -> QExp {
    appell_moment(t, trunc).mul_scalar(&appell_moment_ratio(t).recip())
}

/// Divides `appell_moment(t)` by `K_{2t}(8 tau)` and returns the quotient if
/// it is a constant series below `trunc`.
pub fn measure_moment_ratio(t: u32, trunc: i64) -> Result<Rat> {
    let moment = appell_moment(t, trunc);
    let k = k_series_at(2 * t, 8, trunc);
    let quotient = &moment * &k.inverse()?;
    let c = quotient.constant_term()?;
    let rest = &quotient - &QExp::constant(c.clone(), quotient.trunc());
    if let Some((e, _)) = rest.terms().next() {
        return Err(Error::InvalidArgument(format!(
            "moment/K quotient for t={t} is not constant (term at lattice exponent {e})"
        )));
    }
    Ok(c)
}

/// `K_0(8 tau)/eta^3(8 tau) - Q01^+(8 tau)` (holomorphic parts).
pub fn kq_difference(trunc: i64) -> Result<QExp> {
    with_output_trunc(trunc, |t| {
        let k0 = k_series_at(0, 8, t);
        let eta = eta3(t).scale_q(8);
        let q01 = q_plus_at(QPlus::Q01, 8, t);
        Ok(&(&k0 * &eta.inverse()?) - &q01)
    })
}

/// `E*(4 tau) / (8 Theta_4)`.
pub fn kq_difference_closed_form(trunc: i64) -> Result<QExp> {
    with_output_trunc(trunc, |t| {
        let t4 = big_theta(ThetaIndex::Four, t);
        Ok((&estar_at(4, t) * &t4.inverse()?).mul_scalar(&Rat::new(1, 8)))
    })
}

/// True iff [`kq_difference`] equals [`kq_difference_closed_form`] below `trunc`.
pub fn k_completion_relation_check(trunc: i64) -> Result<bool> {
    Ok(kq_difference(trunc)? == kq_difference_closed_form(trunc)?)
}

fn bracket_weight(l: u32, j: u32) -> Rat {
    binomial(l as u64, j as u64) * Rat::from(-12).pow(j as i32) * gamma_half_ratio(j)
        / Rat::from(8).pow(j as i32)
}

fn g_ell_at_input(l: u32, t: i64) -> Result<QExp> {
    let prod_inv = big_theta_prod_inv(t)?;
    let t4 = big_theta(ThetaIndex::Four, t);
    let e2 = eisenstein_e2_at(8, t);
    let q01 = q_plus_at(QPlus::Q01, 8, t);
    let outer = prod_inv.pow_int(2 * l as i64 + 2)?;
    let mut acc = QExp::zero(i64::MAX / 4);
    for j in 0..=l {
        let k = k_series_at(2 * j, 8, t);
        let k_part = (&k * &prod_inv).mul_scalar(&(Rat::from(-4).pow(j as i32) * Rat::from(8)));
        let q_part = (&t4 * &q01.q_derivative_n(j)).mul_scalar(&Rat::from(8));
        let inner = &k_part - &q_part;
        let term = (&(&e2.pow_int((l - j) as i64)? * &outer) * &inner)
            .mul_scalar(&bracket_weight(l, j));
        acc = &acc + &term;
    }
    Ok(acc)
}

/// `G_l = sum_j C(l,j) (-12)^j E2(8 tau)^(l-j) Gamma(3/2) / ((Theta_2 Theta_3)^(2l+2) 8^j Gamma(3/2+j))
///   * [(-4)^j 8 K_{2j}(8 tau) / (Theta_2 Theta_3) - 8 Theta_4 (q d/dq)^j Q01^+(8 tau)]`.
///
/// The derivative acts on the composite `Q01^+(8 tau)`.
pub fn g_ell(l: u32, trunc: i64) -> Result<QExp> {
    with_output_trunc(trunc, |t| g_ell_at_input(l, t))
}

/// `H_l = Theta_4 (Theta_2 Theta_3)^(-2l-2) E_8^l[E*(4 tau) / Theta_4]` where
/// `E_8^l` is the bracket operator at scale 8.
pub fn h_ell(l: u32, trunc: i64) -> Result<QExp> {
    with_output_trunc(trunc, |t| {
        let t4 = big_theta(ThetaIndex::Four, t);
        let base = &estar_at(4, t) * &t4.inverse()?;
        let bracketed = bracket_scaled(&base, l, 8);
        let outer = big_theta_prod_inv(t)?.pow_int(2 * l as i64 + 2)?;
        Ok(&(&t4 * &outer) * &bracketed)
    })
}

fn criterion_at_input(m: u32, n: u32, t: i64) -> Result<QExp> {
    let t2 = theta(ThetaIndex::Two, t);
    let t3 = theta(ThetaIndex::Three, t);
    let t4 = theta(ThetaIndex::Four, t);
    let e2 = eisenstein_e2(t);
    let q01 = q_plus(QPlus::Q01, t);
    let sum4 = &t2.pow_int(4)? + &t3.pow_int(4)?;
    let prod_inv = (&t2 * &t3).inverse()?;
    let common = t4.pow_int(8)?.mul(&sum4.pow_int(m as i64)?).mul(&prod_inv.pow_int(
        2 * m as i64 + 2 * n as i64 + 4,
    )?);
    let (n64, fact_2n1) = (n as i64, factorial(2 * n as u64 + 1));
    let mut acc = QExp::zero(i64::MAX / 4);
    for l in 0..=n {
        let l64 = l as i64;
        let k = k_series(2 * (n - l), t);
        let k_coeff = Rat::sign_power(n64)
            * Rat::from(2).pow((2 * n64 - 3 * l64 + 4) as i32)
            * Rat::from(3).pow(-(l as i32))
            * factorial((n - l) as u64)
            / factorial((2 * n64 - 2 * l64 + 1) as u64);
        for j in 0..=l {
            let outer = Rat::sign_power(j as i64 + 1) * &fact_2n1
                / (factorial((n - l) as u64) * factorial(j as u64) * factorial((l - j) as u64));
            let k_part = sum4.pow_int(j as i64)?.mul(&prod_inv).mul(&k).mul_scalar(&k_coeff);
            let q_coeff = Rat::sign_power(l64)
                * Rat::from(2).pow(2 * j as i32 - n as i32 + 3)
                * Rat::from(3).pow(-((n - j) as i32))
                * gamma_half_ratio(j);
            let q_part = t4
                .mul(&sum4.pow_int((n - l) as i64)?)
                .mul(&q01.q_derivative_n(j))
                .mul_scalar(&q_coeff);
            let term = common
                .mul(&e2.pow_int((l - j) as i64)?)
                .mul(&(&k_part - &q_part))
                .mul_scalar(&outer);
            acc = &acc + &term;
        }
    }
    Ok(acc)
}

/// The criterion series for `(m, n)` on the `q^(1/8)` lattice, exact below
/// `trunc`. Its constant term vanishes iff `Phi_{m,2n+1} = D_{m,n}`.
pub fn criterion_series(m: u32, n: u32, trunc: i64) -> Result<QExp> {
    with_output_trunc(trunc, |t| criterion_at_input(m, n, t + 2 * (m + n) as i64 + 8))
}

/// Constant term of [`criterion_series`].
pub fn criterion_constant_term(m: u32, n: u32) -> Result<Rat> {
    criterion_series(m, n, 1)?.constant_term()
}

/// Writes `f` as a polynomial in `Z` by cancelling poles from the top down.
///
/// `f` must be supported on even powers of `q` and the residual after
/// removing the polar part and the constant term must vanish below
/// `f.trunc()`.
pub fn reduce_to_z_polynomial(f: &QExp) -> Result<ZPolynomial> {
    if f.trunc() <= 0 {
        return Err(Error::NotInRing(format!(
            "truncation {} does not reach the constant term",
            f.trunc()
        )));
    }
    if let Some((e, _)) = f.terms().find(|(e, _)| e.rem_euclid(2 * Q) != 0) {
        return Err(Error::NotInRing(format!(
            "term at lattice exponent {e} is not an even power of q"
        )));
    }
    let top = f.valuation().map_or(0, |v| (-v).max(0) / (2 * Q)) as usize;
    let z = z_series(f.trunc() + 2 * Q * top as i64)?;
    let mut z_powers = vec![QExp::one(z.trunc())];
    for k in 1..=top {
        let next = &z_powers[k - 1] * &z;
        z_powers.push(next);
    }
    let mut coeffs = vec![Rat::zero(); top + 1];
    let mut residual = f.clone();
    while let Some(v) = residual.valuation().filter(|&v| v < 0) {
        let k = (-v / (2 * Q)) as usize;
        let c = residual.coefficient(v)?;
        residual = &residual - &z_powers[k].mul_scalar(&c);
        coeffs[k] = c;
    }
    let c0 = residual.constant_term()?;
    residual = &residual - &QExp::constant(c0.clone(), residual.trunc());
    coeffs[0] = c0;
    if let Some((e, c)) = residual.terms().next() {
        return Err(Error::NotInRing(format!(
            "nonzero residual {c} at lattice exponent {e} (trunc {})",
            residual.trunc()
        )));
    }
    Ok(ZPolynomial::new(coeffs))
}

/// Output truncation, on the `q^(1/8)` lattice, of the quotient reduced by
/// [`pn_polynomial`]; after rescaling this verifies the residual up to `q^40`.
pub const PN_QUOTIENT_TRUNC: i64 = 40;

/// `Z(q^(1/8))` and `(q dZ/dq)(q^(1/8))`, exact below `trunc` on the `q^(1/8)` lattice.
fn z_on_root_lattice(trunc: i64) -> Result<(QExp, QExp)> {
    let z = z_series(Q * trunc)?;
    Ok((z.substitute_root(Q)?, z.q_derivative().substitute_root(Q)?))
}

/// `(q dZ/dq)(q^(1/8)) * (Z(q^(1/8))/4)^m * P(Z(q^(1/8)))` below `trunc`.
pub fn total_derivative_form(m: u32, p: &ZPolynomial, trunc: i64) -> Result<QExp> {
    with_output_trunc(trunc, |t| {
        let (z, dz) = z_on_root_lattice(t)?;
        let quarter = z.mul_scalar(&Rat::new(1, 4));
        Ok(&(&dz * &quarter.pow_int(m as i64)?) * &p.evaluate(&z))
    })
}

/// Quotient of the criterion series by `(q dZ/dq)(Z/4)^m` on the `q^(1/8)` lattice.
fn pn_quotient(n: u32, m: u32) -> Result<QExp> {
    with_output_trunc(PN_QUOTIENT_TRUNC, |t| {
        let crit = criterion_series(m, n, t)?;
        let (z, dz) = z_on_root_lattice(t + 4 * m as i64 + 8)?;
        let quarter = z.mul_scalar(&Rat::new(1, 4));
        let denom = &dz * &quarter.pow_int(m as i64)?;
        Ok(&crit * &denom.inverse()?)
    })
}

/// `P_n` for one value of the probe `m`.
pub fn pn_polynomial_for_probe(n: u32, m: u32) -> Result<ZPolynomial> {
    reduce_to_z_polynomial(&pn_quotient(n, m)?.scale_q(Q))
}

/// The polynomial `P_n` with criterion series `= (q dZ/dq)(Z/4)^m P_n(Z)`
/// under `q -> q^(1/8)`. Computed at `m_probe` and `m_probe + 1`; the two
/// must agree.
pub fn pn_polynomial(n: u32, m_probe: u32) -> Result<ZPolynomial> {
    let first = pn_polynomial_for_probe(n, m_probe)?;
    let second = pn_polynomial_for_probe(n, m_probe + 1)?;
    if first != second {
        return Err(Error::MProbeMismatch { n, first: m_probe, second: m_probe + 1 });
    }
    Ok(first)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn z_leading_term_and_support() {
        let z = z_series(8 * 40).unwrap();
        assert_eq!(z.valuation(), Some(-16));
        assert_eq!(z.leading_coefficient().unwrap(), &Rat::one());
        assert!(z.terms().all(|(e, _)| e.rem_euclid(32) == 16));
        assert_eq!(z.coefficient(16).unwrap(), Rat::from(20));
    }

    #[test]
    fn polynomial_display_and_trim() {
        let p = ZPolynomial::new(vec![rat(-87, 1), Rat::zero(), rat(-11, 16), Rat::zero()]);
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.to_string(), "-11/16*x^2 - 87");
        assert_eq!(ZPolynomial::new(vec![Rat::zero(), Rat::one()]).to_string(), "x");
        assert_eq!(ZPolynomial::default().to_string(), "0");
        assert_eq!(ZPolynomial::default().degree(), None);
    }

    #[test]
    fn reduce_basis_elements() {
        let z = z_series(8 * 30).unwrap();
        assert_eq!(reduce_to_z_polynomial(&z).unwrap(), ZPolynomial::new(vec![Rat::zero(), Rat::one()]));
        let seven = QExp::constant(Rat::from(7), 64);
        assert_eq!(reduce_to_z_polynomial(&seven).unwrap(), ZPolynomial::new(vec![Rat::from(7)]));
    }

    #[test]
    fn reduce_rejects_odd_support() {
        let f = QExp::monomial(Rat::one(), -8, 64);
        assert!(matches!(reduce_to_z_polynomial(&f), Err(Error::NotInRing(_))));
        let g = QExp::monomial(Rat::one(), 16, 64);
        assert!(matches!(reduce_to_z_polynomial(&g), Err(Error::NotInRing(_))));
    }

    #[test]
    fn appell_leading_term() {
        let m = appell_moment(0, 8 * 12);
        assert_eq!(m.valuation(), Some(40));
        assert_eq!(m.leading_coefficient().unwrap(), &Rat::from(12));
    }

    #[test]
    fn kq_constant_term() {
        assert_eq!(kq_difference(8).unwrap().constant_term().unwrap(), rat(1, 8));
        assert_eq!(kq_difference_closed_form(8).unwrap().constant_term().unwrap(), rat(1, 8));
    }

    #[test]
    fn first_criterion_vanishes() {
        assert_eq!(criterion_constant_term(0, 0).unwrap(), Rat::zero());
    }
}
