//! Exact q-expansions of the classical modular objects: Jacobi theta
//! constants, `eta^3`, the Eisenstein series `E2` and `E*`, the u-plane forms
//! `u, h, T, f2`, Hurwitz class numbers and their generating series, the
//! double series `K_t`, and the weight-raising bracket operator.
//!
//! Every constructor takes an output truncation `trunc` in lattice units and
//! returns a series that is exact below it.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Pow;

use crate::error::{Error, Result};
use crate::rat::{binomial, Rat};
use crate::series::{with_output_trunc, QExp, Q};

/// Which of the three non-vanishing theta constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ThetaIndex {
    Two,
    Three,
    Four,
}

impl ThetaIndex {
    pub fn number(self) -> u8 {
        match self {
            ThetaIndex::Two => 2,
            ThetaIndex::Three => 3,
            ThetaIndex::Four => 4,
        }
    }
}

impl TryFrom<u8> for ThetaIndex {
    type Error = Error;

    fn try_from(j: u8) -> Result<Self> {
        match j {
            2 => Ok(ThetaIndex::Two),
            3 => Ok(ThetaIndex::Three),
            4 => Ok(ThetaIndex::Four),
            _ => Err(Error::InvalidArgument(format!("theta index must be 2, 3 or 4, got {j}"))),
        }
    }
}

/// Applies `tau -> k tau` to a series built at the matching smaller truncation.
pub(crate) fn at_scale<F>(k: i64, trunc: i64, build: F) -> QExp
where
    F: FnOnce(i64) -> QExp,
{
    build(Integer::div_ceil(&trunc, &k)).scale_q(k).truncate(trunc)
}

fn pm_one(n: i64) -> Rat {
    Rat::sign_power(n)
}

/// `theta_j(0|tau)`: `theta_2 = sum_{n in Z} q^((2n+1)^2/8)`,
/// `theta_3 = sum q^(n^2/2)`, `theta_4 = sum (-1)^n q^(n^2/2)`.
pub fn theta(j: ThetaIndex, trunc: i64) -> QExp {
    let mut terms = Vec::new();
    match j {
        ThetaIndex::Two => {
            // n and -n-1 give the same odd square
            let mut k = 1i64;
            while k * k < trunc {
                terms.push((k * k, Rat::from(2)));
                k += 2;
            }
        }
        ThetaIndex::Three | ThetaIndex::Four => {
            let mut n = 0i64;
            while 4 * n * n < trunc {
                let sign = if j == ThetaIndex::Four { pm_one(n) } else { Rat::one() };
                let mult = if n == 0 { Rat::one() } else { Rat::from(2) };
                terms.push((4 * n * n, sign * mult));
                n += 1;
            }
        }
    }
    QExp::from_terms(terms, trunc)
}

/// `Theta_j(tau)`: `Theta_2 = sum_{n>=0} q^((2n+1)^2)`, `Theta_3 = sum q^(4n^2)`,
/// `Theta_4 = sum (-1)^n q^(4n^2)`. Equivalently `theta_j(8 tau)`, halved for j = 2.
pub fn big_theta(j: ThetaIndex, trunc: i64) -> QExp {
    let mut terms = Vec::new();
    match j {
        ThetaIndex::Two => {
            let mut k = 1i64;
            while Q * k * k < trunc {
                terms.push((Q * k * k, Rat::one()));
                k += 2;
            }
        }
        ThetaIndex::Three | ThetaIndex::Four => {
            let mut n = 0i64;
            while 4 * Q * n * n < trunc {
                let sign = if j == ThetaIndex::Four { pm_one(n) } else { Rat::one() };
                let mult = if n == 0 { Rat::one() } else { Rat::from(2) };
                terms.push((4 * Q * n * n, sign * mult));
                n += 1;
            }
        }
    }
    QExp::from_terms(terms, trunc)
}

/// `eta^3 = sum_{n>=0} (-1)^n (2n+1) q^((2n+1)^2/8)`.
pub fn eta3(trunc: i64) -> QExp {
    let mut terms = Vec::new();
    let mut n = 0i64;
    while (2 * n + 1) * (2 * n + 1) < trunc {
        terms.push(((2 * n + 1) * (2 * n + 1), pm_one(n) * Rat::from(2 * n + 1)));
        n += 1;
    }
    QExp::from_terms(terms, trunc)
}

/// Sum of the divisors of `n`, or of its odd divisors only.
pub fn divisor_sum(n: u64, odd_only: bool) -> u64 {
    let mut s = 0;
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let e = n / d;
            if !odd_only || d % 2 == 1 {
                s += d;
            }
            if e != d && (!odd_only || e % 2 == 1) {
                s += e;
            }
        }
        d += 1;
    }
    s
}

fn q_power_count(trunc: i64) -> u64 {
    Integer::div_ceil(&trunc, &Q).max(0) as u64
}

/// `E2 = 1 - 24 sum_{n>=1} sigma_1(n) q^n`.
pub fn eisenstein_e2(trunc: i64) -> QExp {
    let terms = (0..q_power_count(trunc)).map(|n| {
        let c = if n == 0 { Rat::one() } else { Rat::from(-24 * divisor_sum(n, false) as i64) };
        (Q * n as i64, c)
    });
    QExp::from_terms(terms, trunc)
}

/// `E2(k tau)`.
pub fn eisenstein_e2_at(k: i64, trunc: i64) -> QExp {
    at_scale(k, trunc, eisenstein_e2)
}

/// `E* = 1 + 24 sum sigma_odd(n) q^n`, summed directly over odd divisors.
pub fn estar_via_odd_divisors(trunc: i64) -> QExp {
    let terms = (0..q_power_count(trunc)).map(|n| {
        let c = if n == 0 { Rat::one() } else { Rat::from(24 * divisor_sum(n, true) as i64) };
        (Q * n as i64, c)
    });
    QExp::from_terms(terms, trunc)
}

/// `E* = -E2(tau) + 2 E2(2 tau)`.
pub fn estar_via_e2(trunc: i64) -> QExp {
    let twice = eisenstein_e2_at(2, trunc).mul_scalar(&Rat::from(2));
    &twice - &eisenstein_e2(trunc)
}

/// The weight 2 form `E*` on `Gamma_0(2)`.
pub fn estar(trunc: i64) -> QExp {
    let direct = estar_via_odd_divisors(trunc);
    debug_assert_eq!(direct, estar_via_e2(trunc));
    direct
}

/// `E*(k tau)`.
pub fn estar_at(k: i64, trunc: i64) -> QExp {
    at_scale(k, trunc, estar)
}

/// The forms entering the u-plane integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QForm {
    /// `(theta_2^4 + theta_3^4) / (2 (theta_2 theta_3)^2)`
    U,
    /// `theta_2 theta_3 / 2`
    H,
    /// `-(E2/h^2 - 8u)/24`. Not used by the invariant formulas.
    T,
    /// `theta_2 theta_3 / (2 theta_4^8)`
    F2,
}

fn qform_at_input(form: QForm, t: i64) -> Result<QExp> {
    let t2 = theta(ThetaIndex::Two, t);
    let t3 = theta(ThetaIndex::Three, t);
    let half = Rat::new(1, 2);
    let prod = &t2 * &t3;
    let h = prod.mul_scalar(&half);
    let u = || -> Result<QExp> {
        let num = &t2.pow_int(4)? + &t3.pow_int(4)?;
        Ok((&num * &prod.pow_int(-2)?).mul_scalar(&half))
    };
    match form {
        QForm::H => Ok(h),
        QForm::U => u(),
        QForm::F2 => {
            let t4_8 = theta(ThetaIndex::Four, t).pow_int(8)?;
            Ok(&h * &t4_8.inverse()?)
        }
        QForm::T => {
            let e2 = eisenstein_e2(t);
            let lhs = &e2 * &h.pow_int(-2)?;
            let rhs = u()?.mul_scalar(&Rat::from(8));
            Ok((&lhs - &rhs).mul_scalar(&Rat::new(-1, 24)))
        }
    }
}

/// One of `u, h, T, f2`, exact below `trunc`.
pub fn qform(form: QForm, trunc: i64) -> Result<QExp> {
    with_output_trunc(trunc, |t| qform_at_input(form, t))
}

fn hurwitz_table() -> &'static RwLock<HashMap<u64, Rat>> {
    static TABLE: OnceLock<RwLock<HashMap<u64, Rat>>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn hurwitz_uncached(n: u64) -> Rat {
    if n == 0 {
        return Rat::new(-1, 12);
    }
    if matches!(n % 4, 1 | 2) {
        return Rat::zero();
    }
    // Reduced forms a x^2 + b xy + c y^2 with b^2 - 4ac = -n:
    // |b| <= a <= c, and b >= 0 whenever |b| = a or a = c.
    let n = n as i64;
    let mut total = Rat::zero();
    let mut a = 1i64;
    while 3 * a * a <= n {
        for b in (-a + 1)..=a {
            let num = b * b + n;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            total += if b == 0 && a == c {
                Rat::new(1, 2)
            } else if b == a && a == c {
                Rat::new(1, 3)
            } else {
                Rat::one()
            };
        }
        a += 1;
    }
    total
}

/// Hurwitz class number `H_N`, with `H_0 = -1/12` and `H_N = 0` for
/// `N = 1, 2 (mod 4)`. Memoized; safe to call from several threads.
pub fn hurwitz(n: u64) -> Rat {
    if let Some(h) = hurwitz_table().read().expect("hurwitz table poisoned").get(&n) {
        return h.clone();
    }
    let h = hurwitz_uncached(n);
    hurwitz_table().write().expect("hurwitz table poisoned").insert(n, h.clone());
    h
}

/// Holomorphic parts of the weight 3/2 Zagier series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QPlus {
    /// `sum_{l>=0} H_{4l} q^(l/2)`
    Q00,
    /// `q^(-1/8) sum_{l>0} H_{4l-1} q^(l/2)`
    Q10,
    /// `Q00(4 tau) - Q10(4 tau) + Q00(tau + 1)/2`
    Q01,
}

fn q00_plus(trunc: i64) -> QExp {
    let terms = (0..).map(|l: i64| 4 * l).take_while(|&e| e < trunc).map(|e| (e, hurwitz(e as u64)));
    QExp::from_terms(terms, trunc)
}

fn q10_plus(trunc: i64) -> QExp {
    let terms =
        (1..).map(|l: i64| 4 * l - 1).take_while(|&e| e < trunc).map(|e| (e, hurwitz(e as u64)));
    QExp::from_terms(terms, trunc)
}

pub fn q_plus(which: QPlus, trunc: i64) -> QExp {
    match which {
        QPlus::Q00 => q00_plus(trunc),
        QPlus::Q10 => q10_plus(trunc),
        QPlus::Q01 => {
            let a = at_scale(4, trunc, q00_plus);
            let b = at_scale(4, trunc, q10_plus);
            let twisted = q00_plus(trunc)
                .half_integer_sign_twist()
                .expect("Q00 lives on the half-integer lattice");
            &(&a - &b) + &twisted.mul_scalar(&Rat::new(1, 2))
        }
    }
}

/// `Q^+(k tau)`.
pub fn q_plus_at(which: QPlus, k: i64, trunc: i64) -> QExp {
    at_scale(k, trunc, |t| q_plus(which, t))
}

/// `K_t = q^(1/8) sum_{beta>=1} sum_{alpha>=beta} (-1)^(alpha+beta) (2 alpha + 1)
/// beta^(t+1) q^((alpha(alpha+1) - beta^2)/2)`.
pub fn k_series(t: u32, trunc: i64) -> QExp {
    let exponent = |alpha: i64, beta: i64| 1 + 4 * (alpha * (alpha + 1) - beta * beta);
    let mut terms = Vec::new();
    let mut beta = 1i64;
    // alpha = beta gives the smallest exponent 1 + 4 beta for each beta
    while exponent(beta, beta) < trunc {
        let weight = Rat::from(Pow::pow(BigInt::from(beta), t + 1));
        let mut alpha = beta;
        while exponent(alpha, beta) < trunc {
            let c = pm_one(alpha + beta) * Rat::from(2 * alpha + 1) * &weight;
            terms.push((exponent(alpha, beta), c));
            alpha += 1;
        }
        beta += 1;
    }
    QExp::from_terms(terms, trunc)
}

/// `K_t(k tau)`.
pub fn k_series_at(t: u32, k: i64, trunc: i64) -> QExp {
    at_scale(k, trunc, |tr| k_series(t, tr))
}

/// `Gamma(3/2) / Gamma(3/2 + j) = 2^j / (3 * 5 * ... * (2j+1))`.
pub fn gamma_half_ratio(j: u32) -> Rat {
    (1..=j as i64).map(|i| Rat::new(2, 2 * i + 1)).product()
}

/// Bracket operator at scale `k`:
/// `sum_j (-1)^j C(l,j) Gamma(3/2)/Gamma(3/2+j) 12^j k^(-j) E2(k tau)^(l-j) (q d/dq)^j f`.
///
/// `k = 1` is the `Gamma_0(4)` operator; `k = 8` is its rescaled form on
/// `Gamma_0(8)` applied to functions of `8 tau`.
pub fn bracket_scaled(f: &QExp, l: u32, k: i64) -> QExp {
    let trunc = f.trunc();
    let e2 = eisenstein_e2_at(k, trunc.max(1));
    let mut e2_powers = vec![QExp::one(trunc.max(1))];
    for i in 1..=l as usize {
        let next = &e2_powers[i - 1] * &e2;
        e2_powers.push(next);
    }
    let mut acc = QExp::zero(trunc);
    let mut deriv = f.clone();
    for j in 0..=l {
        let coeff = Rat::sign_power(j as i64)
            * binomial(l as u64, j as u64)
            * gamma_half_ratio(j)
            * Rat::new(12, k).pow(j as i32);
        let term = (&e2_powers[(l - j) as usize] * &deriv).mul_scalar(&coeff);
        acc = &acc + &term;
        deriv = deriv.q_derivative();
    }
    acc
}

/// The `Gamma_0(4)` bracket operator `E^l[f]`.
pub fn bracket(f: &QExp, l: u32) -> QExp {
    bracket_scaled(f, l, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn c(f: &QExp, e: i64) -> Rat {
        f.coefficient(e).unwrap()
    }

    #[test]
    fn theta_leading_terms() {
        let t2 = theta(ThetaIndex::Two, 64);
        assert_eq!(t2.valuation(), Some(1));
        assert_eq!(c(&t2, 1), Rat::from(2));
        assert_eq!(c(&t2, 9), Rat::from(2));
        assert_eq!(c(&t2, 25), Rat::from(2));
        assert_eq!(c(&t2, 17), Rat::zero());

        let t3 = theta(ThetaIndex::Three, 64);
        assert_eq!(c(&t3, 0), Rat::one());
        assert_eq!(c(&t3, 4), Rat::from(2));
        assert_eq!(c(&t3, 16), Rat::from(2));
        assert_eq!(c(&t3, 8), Rat::zero());

        let t4 = theta(ThetaIndex::Four, 64);
        assert_eq!(c(&t4, 4), Rat::from(-2));
        assert_eq!(c(&t4, 16), Rat::from(2));
        assert_eq!(c(&t4, 36), Rat::from(-2));
    }

    #[test]
    fn theta_index_parse() {
        assert_eq!(ThetaIndex::try_from(3).unwrap(), ThetaIndex::Three);
        assert!(ThetaIndex::try_from(5).is_err());
    }

    #[test]
    fn theta3_plus_theta4() {
        let s = &theta(ThetaIndex::Three, 80) + &theta(ThetaIndex::Four, 80);
        assert_eq!(c(&s, 0), Rat::from(2));
        assert_eq!(c(&s, 4), Rat::zero());
        assert_eq!(c(&s, 16), Rat::from(4));
    }

    #[test]
    fn big_theta_2() {
        let t = big_theta(ThetaIndex::Two, 8 * 30);
        let exps: Vec<i64> = t.terms().map(|(e, _)| e).collect();
        assert_eq!(exps, vec![8, 72, 200]);
    }

    #[test]
    fn eta3_terms() {
        let e = eta3(100);
        assert_eq!(c(&e, 1), Rat::one());
        assert_eq!(c(&e, 9), Rat::from(-3));
        assert_eq!(c(&e, 25), Rat::from(5));
        assert_eq!(c(&e, 49), Rat::from(-7));
    }

    #[test]
    fn e2_coefficients() {
        let e = eisenstein_e2(8 * 6);
        let want = [1, -24, -72, -96, -168, -144];
        for (n, w) in want.iter().enumerate() {
            assert_eq!(c(&e, 8 * n as i64), Rat::from(*w as i64));
        }
        let scaled = eisenstein_e2_at(2, 8 * 6);
        assert_eq!(c(&scaled, 16), Rat::from(-24));
        assert_eq!(c(&scaled, 32), Rat::from(-72));
        assert_eq!(c(&scaled, 8), Rat::zero());
    }

    #[test]
    fn estar_coefficients() {
        let e = estar(8 * 5);
        let want = [1, 24, 24, 96, 24];
        for (n, w) in want.iter().enumerate() {
            assert_eq!(c(&e, 8 * n as i64), Rat::from(*w as i64));
        }
    }

    #[test]
    fn divisor_sums() {
        assert_eq!(divisor_sum(12, false), 28);
        assert_eq!(divisor_sum(12, true), 4);
        assert_eq!(divisor_sum(1, true), 1);
        assert_eq!(divisor_sum(9, false), 13);
    }

    #[test]
    fn qform_leading_terms() {
        let h = qform(QForm::H, 40).unwrap();
        assert_eq!(h.valuation(), Some(1));
        assert_eq!(h.leading_coefficient().unwrap(), &Rat::one());
        assert_eq!(h.trunc(), 40);

        let u = qform(QForm::U, 40).unwrap();
        assert_eq!(u.valuation(), Some(-2));
        assert_eq!(u.leading_coefficient().unwrap(), &rat(1, 8));
        assert_eq!(u.trunc(), 40);

        let f2 = qform(QForm::F2, 40).unwrap();
        assert_eq!(f2.valuation(), Some(1));
        assert_eq!(f2.leading_coefficient().unwrap(), &Rat::one());

        let t = qform(QForm::T, 40).unwrap();
        assert_eq!(t.trunc(), 40);
    }

    #[test]
    fn hurwitz_values() {
        assert_eq!(hurwitz(0), rat(-1, 12));
        assert_eq!(hurwitz(3), rat(1, 3));
        assert_eq!(hurwitz(4), rat(1, 2));
        assert_eq!(hurwitz(5), Rat::zero());
        assert_eq!(hurwitz(6), Rat::zero());
        assert_eq!(hurwitz(12), rat(4, 3));
        assert_eq!(hurwitz(15), Rat::from(2));
        assert_eq!(hurwitz(16), rat(3, 2));
        assert_eq!(hurwitz(23), Rat::from(3));
    }

    #[test]
    fn q_plus_tables() {
        let q00 = q_plus(QPlus::Q00, 24);
        assert_eq!(c(&q00, 0), rat(-1, 12));
        assert_eq!(c(&q00, 4), rat(1, 2));
        assert_eq!(c(&q00, 8), Rat::one());
        let q10 = q_plus(QPlus::Q10, 24);
        assert_eq!(q10.valuation(), Some(3));
        assert_eq!(c(&q10, 3), rat(1, 3));
        assert_eq!(c(&q10, 7), Rat::one());
        let twisted = q00.half_integer_sign_twist().unwrap();
        assert_eq!(c(&twisted, 0), rat(-1, 12));
        assert_eq!(c(&twisted, 4), rat(-1, 2));
    }

    #[test]
    fn k_series_first_terms() {
        let k0 = k_series(0, 16);
        assert_eq!(k0.valuation(), Some(5));
        assert_eq!(c(&k0, 5), Rat::from(3));
        assert_eq!(c(&k0, 9), Rat::from(10));
        assert_eq!(c(&k0, 13), Rat::from(21));
        let k2 = k_series(2, 8);
        assert_eq!(c(&k2, 5), Rat::from(3));
    }

    #[test]
    fn gamma_ratios() {
        assert_eq!(gamma_half_ratio(0), Rat::one());
        assert_eq!(gamma_half_ratio(1), rat(2, 3));
        assert_eq!(gamma_half_ratio(2), rat(4, 15));
        assert_eq!(gamma_half_ratio(3), rat(8, 105));
    }

    #[test]
    fn bracket_degenerate_cases() {
        let q01 = q_plus(QPlus::Q01, 40);
        assert_eq!(bracket(&q01, 0), q01);
        let b1 = bracket(&q01, 1);
        assert_eq!(b1.constant_term().unwrap(), rat(-1, 8));
        assert_eq!(b1.trunc(), 40);
    }
}
