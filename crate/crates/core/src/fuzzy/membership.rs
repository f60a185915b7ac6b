use std::fmt;

use serde::{Deserialize, Serialize};

use super::FuzzyError;

/// `exp(-((x - c) / sigma)^2 / 2)`.
#[inline]
pub fn gaussian_mf(x: f64, c: f64, sigma: f64) -> f64 {
    let z = (x - c) / sigma;
    (-0.5 * z * z).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Negative,
    Zero,
    Positive,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Negative, Label::Zero, Label::Positive];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Negative => "negative",
            Label::Zero => "zero",
            Label::Positive => "positive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTerm")]
pub struct GaussianTerm {
    pub label: Label,
    pub c: f64,
    pub sigma: f64,
}

#[derive(Deserialize)]
struct RawTerm {
    label: Label,
    c: f64,
    sigma: f64,
}

impl TryFrom<RawTerm> for GaussianTerm {
    type Error = FuzzyError;

    fn try_from(raw: RawTerm) -> Result<Self, Self::Error> {
        GaussianTerm::new(raw.label, raw.c, raw.sigma)
    }
}

impl GaussianTerm {
    pub fn new(label: Label, c: f64, sigma: f64) -> Result<Self, FuzzyError> {
        if !(sigma.is_finite() && sigma > 0.0) || !c.is_finite() {
            return Err(FuzzyError::InvalidSigma(sigma));
        }
        Ok(Self { label, c, sigma })
    }

    #[inline]
    pub fn membership(&self, x: f64) -> f64 {
        gaussian_mf(x, self.c, self.sigma)
    }
}
