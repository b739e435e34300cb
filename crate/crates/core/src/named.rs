//! Name-addressable constructors for the series used throughout the crate.

use std::fmt;
use std::str::FromStr;

use crate::criterion::z_series;
use crate::error::Result;
use crate::modforms::{
    big_theta, eisenstein_e2, estar, eta3, k_series, q_plus, qform, theta, QForm, QPlus, ThetaIndex,
};
use crate::series::QExp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NamedSeries {
    Theta(ThetaIndex),
    BigTheta(ThetaIndex),
    Eta3,
    E2,
    Estar,
    Form(QForm),
    /// `K_t`
    K(u32),
    QPlus(QPlus),
    Z,
}

const THETAS: [ThetaIndex; 3] = [ThetaIndex::Two, ThetaIndex::Three, ThetaIndex::Four];

impl NamedSeries {
    /// Every fixed name, plus `K0` as the representative of the `K<t>` family.
    pub fn all() -> Vec<NamedSeries> {
        let mut out: Vec<NamedSeries> = THETAS.iter().map(|&j| NamedSeries::Theta(j)).collect();
        out.extend(THETAS.iter().map(|&j| NamedSeries::BigTheta(j)));
        out.extend([NamedSeries::Eta3, NamedSeries::E2, NamedSeries::Estar]);
        out.extend([QForm::U, QForm::H, QForm::T, QForm::F2].map(NamedSeries::Form));
        out.push(NamedSeries::K(0));
        out.extend([QPlus::Q00, QPlus::Q10, QPlus::Q01].map(NamedSeries::QPlus));
        out.push(NamedSeries::Z);
        out
    }

    pub fn name(&self) -> String {
        match self {
            NamedSeries::Theta(j) => format!("theta{}", j.number()),
            NamedSeries::BigTheta(j) => format!("Theta{}", j.number()),
            NamedSeries::Eta3 => "eta3".into(),
            NamedSeries::E2 => "E2".into(),
            NamedSeries::Estar => "Estar".into(),
            NamedSeries::Form(QForm::U) => "u".into(),
            NamedSeries::Form(QForm::H) => "h".into(),
            NamedSeries::Form(QForm::T) => "T".into(),
            NamedSeries::Form(QForm::F2) => "f2".into(),
            NamedSeries::K(t) => format!("K{t}"),
            NamedSeries::QPlus(QPlus::Q00) => "Q00plus".into(),
            NamedSeries::QPlus(QPlus::Q10) => "Q10plus".into(),
            NamedSeries::QPlus(QPlus::Q01) => "Q01plus".into(),
            NamedSeries::Z => "Z".into(),
        }
    }

    /// The series, exact below `trunc`.
    pub fn build(&self, trunc: i64) -> Result<QExp> {
        Ok(match *self {
            NamedSeries::Theta(j) => theta(j, trunc),
            NamedSeries::BigTheta(j) => big_theta(j, trunc),
            NamedSeries::Eta3 => eta3(trunc),
            NamedSeries::E2 => eisenstein_e2(trunc),
            NamedSeries::Estar => estar(trunc),
            NamedSeries::Form(f) => qform(f, trunc)?,
            NamedSeries::K(t) => k_series(t, trunc),
            NamedSeries::QPlus(w) => q_plus(w, trunc),
            NamedSeries::Z => z_series(trunc)?,
        })
    }
}

impl fmt::Display for NamedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown series name `{0}`")]
pub struct UnknownName(pub String);

impl FromStr for NamedSeries {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, UnknownName> {
        if let Some(t) = s.strip_prefix('K') {
            // K0, K2, ... but not K01 or K+1
            if !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit()) && (t == "0" || !t.starts_with('0')) {
                if let Ok(t) = t.parse() {
                    return Ok(NamedSeries::K(t));
                }
            }
        }
        NamedSeries::all()
            .into_iter()
            .filter(|n| !matches!(n, NamedSeries::K(_)))
            .find(|n| n.name() == s)
            .ok_or_else(|| UnknownName(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::Rat;

    #[test]
    fn names_round_trip() {
        for n in NamedSeries::all() {
            assert_eq!(n.name().parse::<NamedSeries>().unwrap(), n);
        }
        assert_eq!("K12".parse::<NamedSeries>().unwrap(), NamedSeries::K(12));
        for bad in ["theta5", "K", "K01", "k0", "Theta1", ""] {
            assert!(bad.parse::<NamedSeries>().is_err(), "{bad}");
        }
    }

    #[test]
    fn builds_at_requested_truncation() {
        for n in NamedSeries::all() {
            let f = n.build(48).unwrap();
            assert_eq!(f.trunc(), 48, "{n}");
        }
        let e2 = NamedSeries::E2.build(16).unwrap();
        assert_eq!(e2.coefficient(8).unwrap(), Rat::from(-24));
    }
}
