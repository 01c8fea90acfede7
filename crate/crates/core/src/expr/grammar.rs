use serde::{Deserialize, Serialize};

use super::Operator;
use crate::error::{Error, Result};

/// Ephemeral random constants available to tree generation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConstantPool {
    None,
    Integers { min: i64, max: i64 },
    Reals { min: f64, max: f64, decimals: u32 },
}

/// Primitive set and size limit for generated trees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grammar {
    pub variables: Vec<String>,
    pub constants: ConstantPool,
    pub operators: Vec<Operator>,
    pub max_depth: usize,
    /// Chance that a terminal is a constant rather than a variable.
    #[serde(default = "default_constant_probability")]
    pub constant_probability: f64,
}

fn default_constant_probability() -> f64 {
    0.3
}

impl Grammar {
    pub const DEFAULT_MAX_DEPTH: usize = 8;

    pub fn new(variables: impl IntoIterator<Item = impl Into<String>>, constants: ConstantPool) -> Self {
        Grammar {
            variables: variables.into_iter().map(Into::into).collect(),
            constants,
            operators: Operator::ALL.to_vec(),
            max_depth: Self::DEFAULT_MAX_DEPTH,
            constant_probability: default_constant_probability(),
        }
    }

    pub fn with_operators(mut self, operators: impl IntoIterator<Item = Operator>) -> Self {
        self.operators = operators.into_iter().collect();
        self
    }

    pub fn with_max_depth(mut self, max_depth: usize) -> Self {
        self.max_depth = max_depth;
        self
    }

    pub fn with_constant_probability(mut self, p: f64) -> Self {
        self.constant_probability = p;
        self
    }

    pub fn has_constants(&self) -> bool {
        !matches!(self.constants, ConstantPool::None)
    }

    pub fn is_integer(&self) -> bool {
        !matches!(self.constants, ConstantPool::Reals { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if self.variables.is_empty() {
            return Err(Error::Config("grammar terminal set is empty".into()));
        }
        if self.operators.is_empty() {
            return Err(Error::Config("grammar operator set is empty".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::Config("grammar max_depth must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.constant_probability) {
            return Err(Error::Config("constant_probability must lie in [0, 1]".into()));
        }
        match self.constants {
            ConstantPool::Integers { min, max } if min > max => {
                Err(Error::Config(format!("integer constant range {min}..{max} is empty")))
            }
            ConstantPool::Reals { min, max, .. } if !(min <= max) => {
                Err(Error::Config(format!("real constant range {min}..{max} is empty")))
            }
            _ => Ok(()),
        }
    }
}
