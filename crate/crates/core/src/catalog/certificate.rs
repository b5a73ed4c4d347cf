use serde::{Deserialize, Serialize};

use crate::linalg::HermitianMatrix;
use crate::maps::{MapKindTag, PositivityClass};

use super::statement::StatementId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
}

impl Verdict {
    pub fn from_margin(margin: f64, tolerance: f64) -> Self {
        if margin >= -tolerance {
            Verdict::Holds
        } else {
            Verdict::Violated
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
        }
    }
}

/// One side of an evaluated inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Value {
    Scalar(f64),
    Scalars(Vec<f64>),
    Matrix(HermitianMatrix),
}

impl From<HermitianMatrix> for Value {
    fn from(h: HermitianMatrix) -> Self {
        Value::Matrix(h)
    }
}

/// Evaluated record of one statement on one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub statement: StatementId,
    pub seed: u64,
    pub dim: usize,
    pub map_kind: Option<MapKindTag>,
    pub map_class: Option<PositivityClass>,
    pub lhs: Value,
    pub rhs: Value,
    pub margin: f64,
    pub ratio: f64,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub pinv_used: bool,
}

impl Certificate {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    pub fn violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }
}
