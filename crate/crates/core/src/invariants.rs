//! SU(2) Donaldson invariants of CP^2, computed two independent ways.
//!
//! * [`goettsche_phi`]: the closed theta-function formula for `Phi_{m,2n+1}`.
//! * [`moore_witten_d`]: the cusp coefficients `D_{m,n}` of the u-plane
//!   integral, assembled from the integrand `R_{mnl}` and the bracket
//!   operator applied to `Q01^+`.
//!
//! Both are constant terms of Laurent series. The series are built at an
//! input truncation chosen by [`required_truncation`]; every reported value
//! can be re-derived at twice that truncation as a soundness check.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modforms::{
    bracket, eisenstein_e2, k_series, q_plus, qform, theta, QForm, QPlus, ThetaIndex,
};
use crate::rat::{factorial, Rat};
use crate::series::{with_output_trunc, QExp};

/// Input truncation (lattice units) used for the `(m, n)` invariants.
pub fn required_truncation(m: u32, n: u32) -> i64 {
    8 * (2 * m as i64 + 2 * n as i64 + 8)
}

/// Stand-in for "no cap": every capped operation keeps its natural truncation.
const UNCAPPED: i64 = i64::MAX / 4;

/// Building blocks shared by the terms of one computation. Each factor is
/// read `reach` lattice units beyond its own valuation and no further, which
/// is enough for every coefficient of the final sum below `cap`.
struct ThetaBasis {
    t4: QExp,
    /// `theta_2^4 + theta_3^4`
    sum4: QExp,
    /// `(theta_2 theta_3)^(-1)`
    prod_inv: QExp,
    cap: i64,
    reach: i64,
}

impl ThetaBasis {
    fn new(trunc: i64, cap: i64, reach: i64) -> Result<Self> {
        let t2 = theta(ThetaIndex::Two, trunc);
        let t3 = theta(ThetaIndex::Three, trunc);
        let at = cap.saturating_add(reach);
        Ok(ThetaBasis {
            t4: theta(ThetaIndex::Four, trunc).truncate(at),
            sum4: &t2.pow_capped(4, at)? + &t3.pow_capped(4, at)?,
            prod_inv: (&t2 * &t3).inverse_capped(at - 1)?,
            cap,
            reach,
        })
    }

    /// Cap for a factor of valuation `v`.
    fn at(&self, v: i64) -> i64 {
        self.cap.saturating_add(self.reach + v)
    }
}

fn sum_terms(terms: impl IntoIterator<Item = Result<QExp>>) -> Result<QExp> {
    let mut acc: Option<QExp> = None;
    for t in terms {
        let t = t?;
        acc = Some(match acc {
            None => t,
            Some(a) => &a + &t,
        });
    }
    acc.ok_or_else(|| Error::InvalidArgument("empty sum".into()))
}

/// Rational prefactor of the `(l, j)` term of the closed formula.
fn goettsche_coefficient(n: u32, l: u32, j: u32) -> Rat {
    let (n64, l64) = (n as i64, l as i64);
    Rat::sign_power(n64 + j as i64 + 1)
        * Rat::from(2).pow((2 * n64 - 3 * l64 + 4) as i32)
        * Rat::from(3).pow(-(l as i32))
        * factorial(2 * n as u64 + 1)
        / (factorial((2 * n64 - 2 * l64 + 1) as u64) * factorial(j as u64) * factorial((l - j) as u64))
}

fn goettsche_capped(m: u32, n: u32, trunc: i64, cap: i64) -> Result<QExp> {
    let s = 2 * (m + n) as i64;
    let b = ThetaBasis::new(trunc, cap, s + 8)?;
    let e2 = eisenstein_e2(trunc).truncate(b.at(0));
    let k = (2 * m + 2 * n + 5) as i64;
    // theta_4^8 (theta_2 theta_3)^(-k), valuation -k
    let head = QExp::product_capped(
        &[&b.t4.pow_capped(8, b.at(0))?, &b.prod_inv.pow_capped(k, b.at(-k))?],
        b.at(-k),
    )?;
    let sum4_pows = powers(&b.sum4, (m + n) as usize, b.at(0));
    let e2_pows = powers(&e2, n as usize, b.at(0));
    sum_terms((0..=n).map(|l| {
        let inner = sum_terms((0..=l).map(|j| {
            Ok(QExp::product_capped(
                &[&sum4_pows[(m + j) as usize], &e2_pows[(l - j) as usize]],
                b.at(0),
            )?
            .mul_scalar(&goettsche_coefficient(n, l, j)))
        }))?;
        let k_ser = k_series(2 * (n - l), trunc).truncate(b.at(5));
        QExp::product_capped(&[&head, &inner, &k_ser], cap)
    }))
}

/// `f^0, ..., f^max`, each known below `cap`; `f` must have valuation 0.
fn powers(f: &QExp, max: usize, cap: i64) -> Vec<QExp> {
    let mut out = vec![QExp::one(f.trunc().max(1)).truncate(cap)];
    for i in 1..=max {
        let next = out[i - 1].mul(f).truncate(cap);
        out.push(next);
    }
    out
}

/// The full series whose constant term is `Phi_{m,2n+1}`, built at input
/// truncation `trunc`.
pub fn goettsche_series(m: u32, n: u32, trunc: i64) -> Result<QExp> {
    goettsche_capped(m, n, trunc, UNCAPPED)
}

/// `Phi_{m,2n+1}` at an explicit input truncation.
pub fn goettsche_phi_at(m: u32, n: u32, trunc: i64) -> Result<Rat> {
    goettsche_capped(m, n, trunc, 1)?.constant_term()
}

/// `Phi_{m,2n+1}` from the closed theta-function formula.
pub fn goettsche_phi(m: u32, n: u32) -> Result<Rat> {
    goettsche_phi_at(m, n, required_truncation(m, n))
}

/// Rational prefactor `(-1)^(l+1) (2n+1)!/(l!(n-l)!) 2^(m-3l-1) 3^(-n)` of `R_{mnl}`.
pub fn mw_prefactor(m: u32, n: u32, l: u32) -> Rat {
    Rat::sign_power(l as i64 + 1) * factorial(2 * n as u64 + 1)
        / (factorial(l as u64) * factorial((n - l) as u64))
        * Rat::from(2).pow(m as i32 - 3 * l as i32 - 1)
        * Rat::from(3).pow(-(n as i32))
}

struct UPlaneForms {
    theta4: QExp,
    u: QExp,
    h_inv: QExp,
    f2_inv: QExp,
}

impl UPlaneForms {
    fn new(trunc: i64) -> Result<Self> {
        Ok(UPlaneForms {
            theta4: theta(ThetaIndex::Four, trunc),
            u: qform(QForm::U, trunc)?,
            h_inv: qform(QForm::H, trunc)?.inverse()?,
            f2_inv: qform(QForm::F2, trunc)?.inverse()?,
        })
    }

    fn integrand(&self, m: u32, n: u32, l: u32) -> Result<QExp> {
        Ok(self
            .theta4
            .mul(&self.u.pow_int((m + n - l) as i64)?)
            .mul(&self.h_inv.pow_int(3 + 2 * l as i64)?)
            .mul(&self.f2_inv)
            .mul_scalar(&mw_prefactor(m, n, l)))
    }
}

fn check_l(n: u32, l: u32) -> Result<()> {
    if l > n {
        return Err(Error::InvalidArgument(format!("need 0 <= l <= n, got l={l}, n={n}")));
    }
    Ok(())
}

/// `R_{mnl} = prefactor * theta_4 u^(m+n-l) / (h^(3+2l) f2)`, exact below `trunc`.
pub fn mw_integrand(m: u32, n: u32, l: u32, trunc: i64) -> Result<QExp> {
    check_l(n, l)?;
    with_output_trunc(trunc, |t| UPlaneForms::new(t)?.integrand(m, n, l))
}

fn moore_witten_capped(m: u32, n: u32, trunc: i64, cap: i64) -> Result<QExp> {
    let s = 2 * (m + n) as i64;
    let b = ThetaBasis::new(trunc, cap, s + 12)?;
    let half = Rat::new(1, 2);
    let two = Rat::from(2);
    // u = sum4 / (2 (theta_2 theta_3)^2), 1/h = 2/(theta_2 theta_3), 1/f2 = 2 theta_4^8/(theta_2 theta_3)
    let u = QExp::product_capped(&[&b.sum4, &b.prod_inv.pow_capped(2, b.at(-2))?], b.at(-2))?
        .mul_scalar(&half);
    let h_inv = b.prod_inv.mul_scalar(&two);
    let f2_inv = QExp::product_capped(&[&b.t4.pow_capped(8, b.at(0))?, &b.prod_inv], b.at(-1))?
        .mul_scalar(&two);
    let q01 = q_plus(QPlus::Q01, trunc).truncate(b.at(0));
    sum_terms((0..=n).map(|l| {
        let p = 3 + 2 * l as i64;
        let e = (m + n - l) as i64;
        let forms = [
            b.t4.clone(),
            u.pow_capped(e, b.at(-2 * e))?,
            h_inv.pow_capped(p, b.at(-p))?,
            f2_inv.clone(),
            bracket(&q01, l),
        ];
        let refs: Vec<&QExp> = forms.iter().collect();
        Ok(QExp::product_capped(&refs, cap)?.mul_scalar(&mw_prefactor(m, n, l)))
    }))
}

/// The full series whose constant term is `D_{m,n}`, built at input truncation `trunc`.
pub fn moore_witten_series(m: u32, n: u32, trunc: i64) -> Result<QExp> {
    moore_witten_capped(m, n, trunc, UNCAPPED)
}

pub fn moore_witten_d_at(m: u32, n: u32, trunc: i64) -> Result<Rat> {
    moore_witten_capped(m, n, trunc, 1)?.constant_term()
}

/// `D_{m,n} = sum_l Coeff_{q^0}(R_{mnl} E^l[Q01^+])`.
pub fn moore_witten_d(m: u32, n: u32) -> Result<Rat> {
    moore_witten_d_at(m, n, required_truncation(m, n))
}

/// Evaluates `value_at` at `trunc` and `2 trunc`, failing if they differ.
pub fn doubling_checked<F>(trunc: i64, value_at: F) -> Result<Rat>
where
    F: Fn(i64) -> Result<Rat>,
{
    let first = value_at(trunc)?;
    let second = value_at(2 * trunc)?;
    if first != second {
        return Err(Error::TruncationUnstable {
            trunc,
            first: first.to_string(),
            second: second.to_string(),
        });
    }
    Ok(first)
}

/// One `(m, n)` cell of an [`InvariantTable`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantEntry {
    pub m: u32,
    pub n: u32,
    /// `Some(k)` when `m + n = 2(k-1)`; `None` for the odd zero-check rows.
    pub k: Option<u32>,
    pub phi: Rat,
    pub d: Rat,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantTable {
    pub entries: BTreeMap<(u32, u32), InvariantEntry>,
    /// Largest input truncation used (lattice units).
    pub trunc_used: i64,
    pub max_k: u32,
}

impl InvariantTable {
    pub fn all_equal(&self) -> bool {
        self.entries.values().all(|e| e.equal)
    }

    /// Rows ordered by `(k, m)` with the odd zero-check rows last.
    pub fn rows(&self) -> Vec<&InvariantEntry> {
        let mut rows: Vec<&InvariantEntry> = self.entries.values().collect();
        rows.sort_by_key(|e| (e.k.is_none(), e.m + e.n, e.m));
        rows
    }
}

/// Cells with `m + n = 2(k-1)` for `k <= max_k`, plus every cell with odd
/// `m + n < 2 max_k`.
pub fn table_cells(max_k: u32) -> Vec<(u32, u32)> {
    let max_sum = 2 * max_k.saturating_sub(1) + 1;
    (0..=max_sum).flat_map(|s| (0..=s).map(move |m| (m, s - m))).collect()
}

fn compute_cell(m: u32, n: u32, check: bool) -> Result<InvariantEntry> {
    let trunc = required_truncation(m, n);
    let (phi, d) = if check {
        (
            doubling_checked(trunc, |t| goettsche_phi_at(m, n, t))?,
            doubling_checked(trunc, |t| moore_witten_d_at(m, n, t))?,
        )
    } else {
        (goettsche_phi_at(m, n, trunc)?, moore_witten_d_at(m, n, trunc)?)
    };
    let sum = m + n;
    let k = sum.is_multiple_of(2).then_some(sum / 2 + 1);
    let equal = phi == d;
    Ok(InvariantEntry { m, n, k, phi, d, equal })
}

/// Both invariant families for every cell of [`table_cells`]; with `check`,
/// every value is also recomputed at doubled truncation. Cells are
/// evaluated in parallel on the current rayon pool.
pub fn donaldson_table_with(max_k: u32, check: bool) -> Result<InvariantTable> {
    if max_k == 0 {
        return Err(Error::InvalidArgument("max_k must be at least 1".into()));
    }
    let cells = table_cells(max_k);
    let entries: Vec<InvariantEntry> = cells
        .par_iter()
        .map(|&(m, n)| compute_cell(m, n, check))
        .collect::<Result<_>>()?;
    let trunc_used = cells
        .iter()
        .map(|&(m, n)| required_truncation(m, n) * if check { 2 } else { 1 })
        .max()
        .unwrap_or(0);
    Ok(InvariantTable {
        entries: entries.into_iter().map(|e| ((e.m, e.n), e)).collect(),
        trunc_used,
        max_k,
    })
}

pub fn donaldson_table(max_k: u32) -> Result<InvariantTable> {
    donaldson_table_with(max_k, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn first_row() {
        assert_eq!(goettsche_phi(0, 0).unwrap(), rat(-3, 2));
        assert_eq!(moore_witten_d(0, 0).unwrap(), rat(-3, 2));
    }

    #[test]
    fn odd_cells_vanish() {
        assert_eq!(goettsche_phi(1, 0).unwrap(), Rat::zero());
        assert_eq!(moore_witten_d(0, 1).unwrap(), Rat::zero());
    }

    #[test]
    fn prefactors() {
        assert_eq!(mw_prefactor(0, 0, 0), rat(-1, 2));
        assert_eq!(mw_prefactor(0, 1, 1), rat(1, 8));
    }

    #[test]
    fn integrand_valuation() {
        let r = mw_integrand(0, 0, 0, 32).unwrap();
        assert_eq!(r.valuation(), Some(-4));
        assert_eq!(r.trunc(), 32);
        assert!(mw_integrand(0, 0, 1, 32).is_err());
    }

    #[test]
    fn truncation_policy() {
        assert_eq!(required_truncation(0, 0), 64);
        assert_eq!(required_truncation(2, 0), 96);
    }

    #[test]
    fn too_small_truncation_is_reported() {
        assert!(matches!(goettsche_phi_at(0, 0, 4), Err(Error::TruncationExceeded { .. })));
    }

    #[test]
    fn cells_for_small_tables() {
        assert_eq!(table_cells(1), vec![(0, 0), (0, 1), (1, 0)]);
        assert_eq!(table_cells(2).len(), 1 + 2 + 3 + 4);
    }

    #[test]
    fn single_row_table() {
        let t = donaldson_table(1).unwrap();
        let e = &t.entries[&(0, 0)];
        assert_eq!((e.phi.clone(), e.d.clone(), e.equal), (rat(-3, 2), rat(-3, 2), true));
        assert_eq!(e.k, Some(1));
        assert!(t.all_equal());
        assert!(donaldson_table(0).is_err());
    }
}
