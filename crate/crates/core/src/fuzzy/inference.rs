use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{FuzzyError, FuzzyRule, LinguisticVariable};

/// Variables plus rules, validated so that every rule refers to a known
/// variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem")]
pub struct FuzzySystem {
    pub variables: Vec<LinguisticVariable>,
    pub rules: Vec<FuzzyRule>,
}

#[derive(Deserialize)]
struct RawSystem {
    variables: Vec<LinguisticVariable>,
    rules: Vec<FuzzyRule>,
}

impl TryFrom<RawSystem> for FuzzySystem {
    type Error = FuzzyError;

    fn try_from(raw: RawSystem) -> Result<Self, Self::Error> {
        FuzzySystem::new(raw.variables, raw.rules)
    }
}

impl FuzzySystem {
    pub fn new(variables: Vec<LinguisticVariable>, rules: Vec<FuzzyRule>) -> Result<Self, FuzzyError> {
        let mut names = HashSet::new();
        for v in &variables {
            if !names.insert(v.name.as_str()) {
                return Err(FuzzyError::DuplicateVariable(v.name.clone()));
            }
        }
        for r in &rules {
            if r.antecedent.is_empty() {
                return Err(FuzzyError::EmptyAntecedent);
            }
            for clause in r.antecedent.iter().chain(std::iter::once(&r.consequent)) {
                if !names.contains(clause.variable.as_str()) {
                    return Err(FuzzyError::UnknownVariable(clause.variable.clone()));
                }
            }
        }
        Ok(Self { variables, rules })
    }

    pub fn variable(&self, name: &str) -> Result<&LinguisticVariable, FuzzyError> {
        self.variables
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| FuzzyError::UnknownVariable(name.to_owned()))
    }
}

/// Uniform sampling `center + k * step` for `k` in `-half..=half`.
///
/// Building points from an integer offset keeps the grid exactly symmetric
/// about its center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub center: f64,
    pub step: f64,
    pub half: usize,
}

impl Grid {
    /// Grid covering `universe` at spacing `step`, centered on its midpoint.
    pub fn over(universe: [f64; 2], step: f64) -> Result<Self, FuzzyError> {
        if !(step.is_finite() && step > 0.0) {
            return Err(FuzzyError::InvalidStep(step));
        }
        let [lo, hi] = universe;
        let half = ((hi - lo) / (2.0 * step)).round() as usize;
        if half == 0 {
            return Err(FuzzyError::InvalidStep(step));
        }
        Ok(Self {
            center: 0.5 * (lo + hi),
            step,
            half,
        })
    }

    pub fn len(&self) -> usize {
        2 * self.half + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> f64 {
        self.center + (i as f64 - self.half as f64) * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

/// Aggregated output membership sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledMembership {
    pub xs: Vec<f64>,
    pub mu: Vec<f64>,
}

impl SampledMembership {
    pub fn max(&self) -> f64 {
        self.mu.iter().copied().fold(0.0, f64::max)
    }
}

/// Min-max Mamdani inference for one output variable.
///
/// Each rule fires at the min of its antecedent degrees, clips its consequent
/// term at that level, and the clipped sets are combined by pointwise max.
pub fn infer_mamdani(
    system: &FuzzySystem,
    inputs: &[(&str, f64)],
    output: &str,
    grid: &Grid,
) -> Result<SampledMembership, FuzzyError> {
    let out_var = system.variable(output)?;
    let mut clipped = Vec::new();
    for rule in system.rules.iter().filter(|r| r.consequent.variable == output) {
        let mut strength = 1.0f64;
        for clause in &rule.antecedent {
            let var = system.variable(&clause.variable)?;
            let x = inputs
                .iter()
                .find(|(n, _)| *n == clause.variable)
                .map(|(_, x)| *x)
                .ok_or_else(|| FuzzyError::MissingInput(clause.variable.clone()))?;
            strength = strength.min(var.fuzzify(x).get(clause.label));
        }
        clipped.push((strength, out_var.term(rule.consequent.label)));
    }
    let xs: Vec<f64> = grid.points().collect();
    let mu = xs
        .iter()
        .map(|&x| {
            clipped
                .iter()
                .map(|(w, term)| w.min(term.membership(x)))
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(SampledMembership { xs, mu })
}

/// Discrete centroid of a sampled membership.
///
/// The two end samples carry half weight (composite trapezoid), so the result
/// does not drift with the grid step when the membership is still non-zero at
/// the universe bounds. An all-zero membership yields the grid midpoint.
pub fn defuzzify_centroid(sm: &SampledMembership) -> f64 {
    let n = sm.xs.len();
    assert!(n > 0, "centroid of an empty grid");
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, (&x, &mu)) in sm.xs.iter().zip(&sm.mu).enumerate() {
        let w = if i == 0 || i + 1 == n { 0.5 * mu } else { mu };
        num += x * w;
        den += w;
    }
    if den < 1e-12 {
        return 0.5 * (sm.xs[0] + sm.xs[n - 1]);
    }
    num / den
}
