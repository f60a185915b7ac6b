use serde::{Deserialize, Serialize};

use super::{FuzzyError, GaussianTerm, Label};

/// Membership degree of one crisp value in each of the three terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Degrees([f64; 3]);

impl Degrees {
    pub fn get(&self, label: Label) -> f64 {
        self.0[label.index()]
    }

    pub fn negative(&self) -> f64 {
        self.0[0]
    }

    pub fn zero(&self) -> f64 {
        self.0[1]
    }

    pub fn positive(&self) -> f64 {
        self.0[2]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVariable")]
pub struct LinguisticVariable {
    pub name: String,
    pub universe: [f64; 2],
    /// Indexed by [`Label::index`].
    pub terms: [GaussianTerm; 3],
}

#[derive(Deserialize)]
struct RawVariable {
    name: String,
    universe: [f64; 2],
    terms: Vec<GaussianTerm>,
}

impl TryFrom<RawVariable> for LinguisticVariable {
    type Error = FuzzyError;

    fn try_from(raw: RawVariable) -> Result<Self, Self::Error> {
        LinguisticVariable::new(&raw.name, raw.universe, raw.terms)
    }
}

impl LinguisticVariable {
    /// Terms may come in any order but must cover each label exactly once.
    pub fn new(name: &str, universe: [f64; 2], terms: Vec<GaussianTerm>) -> Result<Self, FuzzyError> {
        let [lo, hi] = universe;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(FuzzyError::InvalidUniverse { lo, hi });
        }
        let mut slots: [Option<GaussianTerm>; 3] = [None; 3];
        for t in terms {
            let slot = &mut slots[t.label.index()];
            if slot.is_some() {
                return Err(FuzzyError::BadTerms(name.to_owned()));
            }
            *slot = Some(t);
        }
        let [Some(n), Some(z), Some(p)] = slots else {
            return Err(FuzzyError::BadTerms(name.to_owned()));
        };
        Ok(Self {
            name: name.to_owned(),
            universe,
            terms: [n, z, p],
        })
    }

    pub fn term(&self, label: Label) -> &GaussianTerm {
        &self.terms[label.index()]
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.universe[0] + self.universe[1])
    }

    /// Gaussians extend past the universe, so any finite `x` is accepted.
    pub fn fuzzify(&self, x: f64) -> Degrees {
        Degrees(self.terms.map(|t| t.membership(x)))
    }
}
