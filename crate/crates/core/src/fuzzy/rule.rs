use serde::{Deserialize, Serialize};

use super::Label;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clause {
    pub variable: String,
    pub label: Label,
}

impl Clause {
    pub fn new(variable: &str, label: Label) -> Self {
        Self {
            variable: variable.to_owned(),
            label,
        }
    }
}

/// `IF a1 AND a2 ... THEN consequent`. Conjunction is min.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FuzzyRule {
    pub antecedent: Vec<Clause>,
    pub consequent: Clause,
}

impl FuzzyRule {
    pub fn single(input: &str, if_label: Label, output: &str, then_label: Label) -> Self {
        Self {
            antecedent: vec![Clause::new(input, if_label)],
            consequent: Clause::new(output, then_label),
        }
    }
}
