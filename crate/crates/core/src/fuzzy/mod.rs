//! Mamdani fuzzy inference with Gaussian terms, and the head-tracking
//! controller built on it.

mod head;
mod inference;
mod membership;
mod rule;
pub mod tracker;
mod variable;

pub use head::{
    build_head_controller, head_rules, HeadController, HeadControllerConfig, HeadDelta, ParameterSet,
    TermParams, ANGLE_X, ANGLE_Y, FACE_X_LOC, FACE_Y_LOC,
};
pub use inference::{defuzzify_centroid, infer_mamdani, FuzzySystem, Grid, SampledMembership};
pub use membership::{gaussian_mf, GaussianTerm, Label};
pub use rule::{Clause, FuzzyRule};
pub use variable::{Degrees, LinguisticVariable};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FuzzyError {
    #[error("sigma must be finite and > 0, got {0}")]
    InvalidSigma(f64),
    #[error("universe [{lo}, {hi}] is empty or not finite")]
    InvalidUniverse { lo: f64, hi: f64 },
    #[error("variable {0} must have exactly the terms negative, zero and positive")]
    BadTerms(String),
    #[error("duplicate variable {0}")]
    DuplicateVariable(String),
    #[error("rule references unknown variable {0}")]
    UnknownVariable(String),
    #[error("no crisp input for variable {0}")]
    MissingInput(String),
    #[error("rule has an empty antecedent")]
    EmptyAntecedent,
    #[error("grid step must be finite and > 0, got {0}")]
    InvalidStep(f64),
    #[error("invalid controller setting: {0}")]
    InvalidConfig(String),
}
