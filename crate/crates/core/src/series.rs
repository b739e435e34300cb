//! Truncated Laurent series in `q^(1/8)` with exact rational coefficients.
//!
//! Every exponent is an integer in units of `q^(1/8)` ("lattice units"):
//! lattice exponent `e` stands for `q^(e/8)`. A [`QExp`] stores every slot from
//! its leading nonzero exponent up to (not including) its truncation order;
//! nothing at or above the truncation is known.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::rat::Rat;

/// Denominator of the exponent lattice.
pub const LATTICE: i64 = 8;

/// Lattice units per power of `q`.
pub const Q: i64 = LATTICE;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QExp {
    // Invariant: coeffs is empty or coeffs[0] != 0, and low + coeffs.len() == trunc.
    low: i64,
    coeffs: Vec<Rat>,
    trunc: i64,
}

impl QExp {
    pub fn zero(trunc: i64) -> Self {
        QExp { low: trunc, coeffs: Vec::new(), trunc }
    }

    pub fn one(trunc: i64) -> Self {
        Self::constant(Rat::one(), trunc)
    }

    pub fn constant(c: Rat, trunc: i64) -> Self {
        Self::monomial(c, 0, trunc)
    }

    /// `c * q^(exp/8)`, or zero if `exp >= trunc`.
    pub fn monomial(c: Rat, exp: i64, trunc: i64) -> Self {
        if c.is_zero() || exp >= trunc {
            return Self::zero(trunc);
        }
        let mut coeffs = vec![Rat::zero(); (trunc - exp) as usize];
        coeffs[0] = c;
        QExp { low: exp, coeffs, trunc }
    }

    /// Sums the given `(lattice exponent, coefficient)` terms; terms at or
    /// above `trunc` are dropped.
    pub fn from_terms<I>(terms: I, trunc: i64) -> Self
    where
        I: IntoIterator<Item = (i64, Rat)>,
    {
        let terms: Vec<(i64, Rat)> = terms
            .into_iter()
            .filter(|(e, c)| *e < trunc && !c.is_zero())
            .collect();
        let Some(low) = terms.iter().map(|(e, _)| *e).min() else {
            return Self::zero(trunc);
        };
        let mut coeffs = vec![Rat::zero(); (trunc - low) as usize];
        for (e, c) in terms {
            coeffs[(e - low) as usize] += c;
        }
        Self::normalized(low, coeffs, trunc)
    }

    /// Builds from a dense slice starting at `low`; the slice is padded or
    /// cut so that it ends exactly at `trunc`.
    pub fn from_dense(low: i64, mut coeffs: Vec<Rat>, trunc: i64) -> Self {
        if low >= trunc {
            return Self::zero(trunc);
        }
        coeffs.resize((trunc - low) as usize, Rat::zero());
        Self::normalized(low, coeffs, trunc)
    }

    fn normalized(low: i64, mut coeffs: Vec<Rat>, trunc: i64) -> Self {
        debug_assert_eq!(low + coeffs.len() as i64, trunc);
        match coeffs.iter().position(|c| !c.is_zero()) {
            None => Self::zero(trunc),
            Some(0) => QExp { low, coeffs, trunc },
            Some(k) => {
                coeffs.drain(..k);
                QExp { low: low + k as i64, coeffs, trunc }
            }
        }
    }

    /// Exponents at or above this value are unknown.
    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    /// Lattice exponent of the leading nonzero coefficient.
    pub fn valuation(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then_some(self.low)
    }

    /// Valuation, or the truncation order for the zero series (a lower bound
    /// on the true valuation in both cases).
    fn order_bound(&self) -> i64 {
        self.low
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading_coefficient(&self) -> Option<&Rat> {
        self.coeffs.first()
    }

    /// Nonzero terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rat)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.low + i as i64, c))
    }

    pub fn coefficient(&self, exp: i64) -> Result<Rat> {
        if exp >= self.trunc {
            return Err(Error::TruncationExceeded { exponent: exp, trunc: self.trunc });
        }
        Ok(self.coeff_unchecked(exp).cloned().unwrap_or_else(Rat::zero))
    }

    fn coeff_unchecked(&self, exp: i64) -> Option<&Rat> {
        if exp < self.low {
            return None;
        }
        self.coeffs.get((exp - self.low) as usize)
    }

    pub fn constant_term(&self) -> Result<Rat> {
        self.coefficient(0)
    }

    /// Lowers the truncation order to `min(self.trunc, trunc)`.
    pub fn truncate(&self, trunc: i64) -> Self {
        if trunc >= self.trunc {
            return self.clone();
        }
        if trunc <= self.low {
            return Self::zero(trunc);
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.truncate((trunc - self.low) as usize);
        Self::normalized(self.low, coeffs, trunc)
    }

    /// True if both series agree on every exponent below the smaller truncation.
    pub fn agrees_with(&self, other: &QExp) -> bool {
        let t = self.trunc.min(other.trunc);
        self.truncate(t) == other.truncate(t)
    }

    pub fn mul_scalar(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(self.trunc);
        }
        QExp {
            low: self.low,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            trunc: self.trunc,
        }
    }

    /// Multiplies by the monomial `q^(shift/8)`.
    pub fn shift(&self, shift: i64) -> Self {
        QExp { low: self.low + shift, coeffs: self.coeffs.clone(), trunc: self.trunc + shift }
    }

    fn add_impl(&self, other: &QExp, negate: bool) -> Self {
        let trunc = self.trunc.min(other.trunc);
        let low = self.low.min(other.low).min(trunc);
        let mut coeffs = vec![Rat::zero(); (trunc - low) as usize];
        for (e, c) in self.terms().take_while(|(e, _)| *e < trunc) {
            coeffs[(e - low) as usize] += c;
        }
        for (e, c) in other.terms().take_while(|(e, _)| *e < trunc) {
            if negate {
                coeffs[(e - low) as usize] -= c;
            } else {
                coeffs[(e - low) as usize] += c;
            }
        }
        Self::normalized(low, coeffs, trunc)
    }

    pub fn add(&self, other: &QExp) -> Self {
        self.add_impl(other, false)
    }

    pub fn sub(&self, other: &QExp) -> Self {
        self.add_impl(other, true)
    }

    pub fn neg(&self) -> Self {
        QExp { low: self.low, coeffs: self.coeffs.iter().map(|c| -c).collect(), trunc: self.trunc }
    }

    /// Cauchy product; the result is known below
    /// `min(f.trunc + g.low, g.trunc + f.low)`.
    pub fn mul(&self, other: &QExp) -> Self {
        let trunc = (self.trunc + other.order_bound()).min(other.trunc + self.order_bound());
        if self.is_zero() || other.is_zero() {
            return Self::zero(trunc);
        }
        let low = self.low + other.low;
        if low >= trunc {
            return Self::zero(trunc);
        }
        let len = (trunc - low) as usize;
        let mut coeffs = vec![Rat::zero(); len];
        let g_nonzero: Vec<(usize, &Rat)> =
            other.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            if a.is_zero() {
                continue;
            }
            for &(j, b) in &g_nonzero {
                if i + j >= len {
                    break;
                }
                coeffs[i + j] += a * b;
            }
        }
        Self::normalized(low, coeffs, trunc)
    }

    /// Exact reciprocal by recursive division. The result has valuation
    /// `-v` and truncation `trunc - 2v` where `v` is the valuation of `self`.
    pub fn inverse(&self) -> Result<Self> {
        let lead = self.leading_coefficient().ok_or(Error::ZeroLeadingCoefficient)?;
        let v = self.low;
        let len = self.coeffs.len();
        let lead_inv = lead.recip();
        let f_nonzero: Vec<(usize, &Rat)> =
            self.coeffs.iter().enumerate().skip(1).filter(|(_, c)| !c.is_zero()).collect();
        let mut g: Vec<Rat> = Vec::with_capacity(len);
        g.push(lead_inv.clone());
        for k in 1..len {
            let mut acc = Rat::zero();
            for &(i, fi) in &f_nonzero {
                if i > k {
                    break;
                }
                let gk = &g[k - i];
                if !gk.is_zero() {
                    acc += fi * gk;
                }
            }
            g.push(-(acc * &lead_inv));
        }
        Ok(QExp { low: -v, coeffs: g, trunc: self.trunc - 2 * v })
    }

    /// Integer power by repeated squaring; `k = 0` gives one at this series'
    /// truncation, negative `k` goes through [`QExp::inverse`].
    pub fn pow_int(&self, k: i64) -> Result<Self> {
        if k == 0 {
            return Ok(Self::one(self.trunc.max(1)));
        }
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc: Option<QExp> = None;
        let mut sq = base;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => sq.clone(),
                    Some(a) => a.mul(&sq),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            sq = sq.mul(&sq);
        }
        Ok(acc.expect("k != 0"))
    }

    /// [`QExp::inverse`], reading only as much of `self` as is needed for the
    /// result to be known below `cap`.
    pub fn inverse_capped(&self, cap: i64) -> Result<Self> {
        let v = self.valuation().ok_or(Error::ZeroLeadingCoefficient)?;
        if cap <= -v {
            return Ok(Self::zero(cap));
        }
        Ok(self.truncate(cap + 2 * v).inverse()?.truncate(cap))
    }

    /// [`QExp::pow_int`], computed only below `cap`.
    pub fn pow_capped(&self, k: i64, cap: i64) -> Result<Self> {
        if k == 0 {
            return Ok(Self::one(self.trunc.max(1)).truncate(cap));
        }
        let Some(v) = self.valuation() else {
            return Ok(self.pow_int(k)?.truncate(cap));
        };
        if cap <= k * v {
            return Ok(Self::zero(cap));
        }
        if k < 0 {
            // the inverse has valuation -v
            let inv = self.inverse_capped(cap + (-k - 1) * v)?;
            return inv.pow_capped(-k, cap);
        }
        Ok(self.truncate(cap - (k - 1) * v).pow_int(k)?.truncate(cap))
    }

    /// Product of several series, reading each factor only as far as the
    /// product below `cap` requires.
    pub fn product_capped(factors: &[&QExp], cap: i64) -> Result<Self> {
        let Some((first, rest)) = factors.split_first() else {
            return Err(Error::InvalidArgument("empty product".into()));
        };
        let Some(vals) = factors.iter().map(|f| f.valuation()).collect::<Option<Vec<i64>>>() else {
            let acc = rest.iter().fold((*first).clone(), |acc, f| acc.mul(f));
            return Ok(acc.truncate(cap));
        };
        let total: i64 = vals.iter().sum();
        if total >= cap {
            return Ok(Self::zero(cap));
        }
        let mut acc = first.truncate(cap - (total - vals[0]));
        for (f, v) in rest.iter().zip(&vals[1..]) {
            acc = acc.mul(&f.truncate(cap - (total - v)));
        }
        Ok(acc.truncate(cap))
    }

    /// The operator `q d/dq`: multiplies the coefficient at `q^(e/8)` by `e/8`.
    pub fn q_derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let e = self.low + i as i64;
                if c.is_zero() || e == 0 {
                    Rat::zero()
                } else {
                    c * Rat::new(e, LATTICE)
                }
            })
            .collect();
        Self::normalized(self.low, coeffs, self.trunc)
    }

    /// `j`-fold application of [`QExp::q_derivative`].
    pub fn q_derivative_n(&self, j: u32) -> Self {
        (0..j).fold(self.clone(), |f, _| f.q_derivative())
    }

    /// Substitution `tau -> k tau`: exponent `e` becomes `k e`.
    pub fn scale_q(&self, k: i64) -> Self {
        assert!(k > 0, "scale factor must be positive");
        if self.is_zero() {
            return Self::zero(self.trunc * k);
        }
        let terms = self.terms().map(|(e, c)| (e * k, c.clone()));
        Self::from_terms(terms, self.trunc * k)
    }

    /// Inverse of [`QExp::scale_q`]: exponent `e` becomes `e / k`. Every nonzero
    /// exponent must be divisible by `k`; the truncation becomes `ceil(trunc / k)`.
    pub fn substitute_root(&self, k: i64) -> Result<Self> {
        assert!(k > 0, "root order must be positive");
        if let Some((e, _)) = self.terms().find(|(e, _)| e.rem_euclid(k) != 0) {
            return Err(Error::ExponentNotDivisible { exponent: e, factor: k });
        }
        let trunc = Integer::div_ceil(&self.trunc, &k);
        Ok(Self::from_terms(self.terms().map(|(e, c)| (e / k, c.clone())), trunc))
    }

    /// Effect of `tau -> tau + 1` on a series in `q^(1/2)`: the coefficient
    /// at `q^(l/2)` picks up `(-1)^l`.
    pub fn half_integer_sign_twist(&self) -> Result<Self> {
        let half = LATTICE / 2;
        if let Some((e, _)) = self.terms().find(|(e, _)| e.rem_euclid(half) != 0) {
            return Err(Error::ExponentNotHalfInteger { exponent: e });
        }
        let terms = self
            .terms()
            .map(|(e, c)| if (e / half).rem_euclid(2) == 0 { (e, c.clone()) } else { (e, -c) });
        Ok(Self::from_terms(terms, self.trunc))
    }

    /// Renders the series as text with a trailing `O(...)` term.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

/// Renders a lattice exponent as a power of `q`: `""` for 0, `q`, `q^2`,
/// `q^(1/8)`, `q^(-3/2)`.
pub fn format_q_power(exp: i64) -> String {
    if exp == 0 {
        return String::new();
    }
    if exp == LATTICE {
        return "q".to_string();
    }
    format!("q^{}", format_exponent(exp))
}

/// A lattice exponent as a reduced fraction: `2`, `(1/8)`, `(-3/2)`.
pub fn format_exponent(exp: i64) -> String {
    let g = exp.gcd(&LATTICE);
    let (n, d) = (exp / g, LATTICE / g);
    if d == 1 {
        if n < 0 {
            format!("({n})")
        } else {
            format!("{n}")
        }
    } else {
        format!("({n}/{d})")
    }
}

/// The exponent as a plain reduced fraction string (`"1/8"`, `"-2"`).
pub fn exponent_fraction(exp: i64) -> String {
    Rat::new(exp, LATTICE).to_string()
}

impl fmt::Display for QExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let qp = format_q_power(e);
            match (qp.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{mag}")?,
                (false, true) => write!(f, "{qp}")?,
                (false, false) => write!(f, "{mag}*{qp}")?,
            }
        }
        let big_o = match format_q_power(self.trunc) {
            s if s.is_empty() => "1".to_string(),
            s => s,
        };
        if first {
            write!(f, "O({big_o})")
        } else {
            write!(f, " + O({big_o})")
        }
    }
}

impl fmt::Debug for QExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QExp[{self}]")
    }
}

impl Add for &QExp {
    type Output = QExp;
    fn add(self, rhs: &QExp) -> QExp {
        QExp::add(self, rhs)
    }
}

impl Sub for &QExp {
    type Output = QExp;
    fn sub(self, rhs: &QExp) -> QExp {
        QExp::sub(self, rhs)
    }
}

impl Mul for &QExp {
    type Output = QExp;
    fn mul(self, rhs: &QExp) -> QExp {
        QExp::mul(self, rhs)
    }
}

impl Neg for &QExp {
    type Output = QExp;
    fn neg(self) -> QExp {
        QExp::neg(self)
    }
}

/// Runs `build` with increasing input truncation until its output is known
/// at least up to `target`, then truncates the output to exactly `target`.
///
/// Truncation loss in every series operation is a fixed offset once leading
/// terms are visible, so this settles after one or two rounds.
pub fn with_output_trunc<F>(target: i64, build: F) -> Result<QExp>
where
    F: Fn(i64) -> Result<QExp>,
{
    let mut input = target.max(1);
    // an identically zero divisor never shows a leading term, so the window stops growing
    let ceiling = 4 * target.max(1) + 64 * Q;
    for _ in 0..16 {
        let out = match build(input) {
            Err(e @ (Error::ZeroLeadingCoefficient | Error::TruncationExceeded { .. })) => {
                if input >= ceiling {
                    return Err(e);
                }
                input = 2 * input + Q;
                continue;
            }
            other => other?,
        };
        if out.trunc() >= target {
            return Ok(out.truncate(target));
        }
        input += (target - out.trunc()).max(1);
    }
    Err(Error::InvalidArgument(format!(
        "could not reach output truncation {target} (input truncation grew to {input})"
    )))
}
