use serde::{Deserialize, Serialize};

use crate::linalg::{operator_norm, scaled_tolerance, CMatrix, CVector, HermitianMatrix, DEFAULT_REL_TOL};
use crate::maps::{PartialIsometryPair, UnitalPositiveMap};
use crate::serde_matrix;
use crate::window::SpectralWindow;

use super::statement::{Slot, Statement};
use super::EvalError;

/// Orthonormality tolerance for the vector pair of the scalar Wielandt
/// inequality.
pub const ORTHONORMAL_TOL: f64 = 1e-12;

/// Everything a statement may consume. Each statement declares which slots
/// it requires; unused slots stay `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceBundle {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<HermitianMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<SpectralWindow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<HermitianMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<UnitalPositiveMap>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "serde_matrix::option_vector")]
    pub x: Option<CVector>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "serde_matrix::option_vector")]
    pub y: Option<CVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<PartialIsometryPair>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "serde_matrix::option")]
    pub s: Option<CMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "serde_matrix::option")]
    pub t: Option<CMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
}

impl InstanceBundle {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn with_a(mut self, a: HermitianMatrix, window: SpectralWindow) -> Self {
        self.a = Some(a);
        self.window = Some(window);
        self
    }

    pub fn with_b(mut self, b: HermitianMatrix) -> Self {
        self.b = Some(b);
        self
    }

    pub fn with_map(mut self, map: UnitalPositiveMap) -> Self {
        self.map = Some(map);
        self
    }

    pub fn with_vectors(mut self, x: CVector, y: Option<CVector>) -> Self {
        self.x = Some(x);
        self.y = y;
        self
    }

    pub fn with_pair(mut self, pair: PartialIsometryPair) -> Self {
        self.pair = Some(pair);
        self
    }

    pub fn with_schwarz(mut self, s: CMatrix, t: CMatrix) -> Self {
        self.s = Some(s);
        self.t = Some(t);
        self
    }

    /// Input dimension of the instance.
    pub fn dim(&self) -> usize {
        self.a
            .as_ref()
            .map(HermitianMatrix::dim)
            .or_else(|| self.t.as_ref().map(|t| t.nrows()))
            .or_else(|| self.s.as_ref().map(|s| s.nrows()))
            .or_else(|| self.pair.as_ref().map(PartialIsometryPair::dim))
            .or_else(|| self.map.as_ref().map(UnitalPositiveMap::input_dim))
            .unwrap_or(0)
    }

    fn has(&self, slot: Slot) -> bool {
        match slot {
            Slot::A => self.a.is_some(),
            Slot::Window => self.window.is_some(),
            Slot::B => self.b.is_some(),
            Slot::Map => self.map.is_some(),
            Slot::VectorX => self.x.is_some(),
            Slot::VectorY => self.y.is_some(),
            Slot::Pair => self.pair.is_some(),
            Slot::S => self.s.is_some(),
            Slot::T => self.t.is_some(),
            Slot::Level => self.level.is_some(),
        }
    }

    /// Checks slot presence, map class, dimensions and the window / vector
    /// invariants required by `st`.
    pub fn check(&self, st: &Statement) -> Result<(), EvalError> {
        for &slot in st.slots {
            if !self.has(slot) {
                return Err(EvalError::MissingSlot {
                    statement: st.id,
                    slot,
                });
            }
        }
        let invalid = |msg: String| Err(EvalError::InvalidInstance(msg));

        if let (Some(required), Some(map)) = (st.map_requirement, &self.map) {
            if !map.class().satisfies(required) {
                return Err(EvalError::MapClassTooWeak {
                    statement: st.id,
                    required,
                    actual: map.class(),
                });
            }
        }
        let n = self.dim();
        if n < st.min_dim {
            return invalid(format!("{} needs dimension >= {}, got {n}", st.id, st.min_dim));
        }
        if st.requires(Slot::Map) {
            let map = self.map.as_ref().unwrap();
            if map.input_dim() != n {
                return invalid(format!("map input dimension {} != instance dimension {n}", map.input_dim()));
            }
        }
        if let (Some(a), Some(w)) = (&self.a, &self.window) {
            if st.requires(Slot::Window) {
                let e = a.eig();
                let tol = scaled_tolerance(DEFAULT_REL_TOL, &[w.big_m()]);
                let lo = e.values[0];
                let hi = *e.values.last().unwrap();
                if !(w.contains(lo, tol) && w.contains(hi, tol)) {
                    return invalid(format!(
                        "spectrum [{lo}, {hi}] of A leaves the window [{}, {}]",
                        w.m(),
                        w.big_m()
                    ));
                }
            }
        }
        if st.requires(Slot::B) {
            let b = self.b.as_ref().unwrap();
            if b.dim() != n {
                return invalid(format!("B has dimension {}, expected {n}", b.dim()));
            }
        }
        if st.requires(Slot::VectorX) {
            let x = self.x.as_ref().unwrap();
            if x.len() != n || (x.norm() - 1.0).abs() > ORTHONORMAL_TOL {
                return invalid("x must be a unit vector of the instance dimension".into());
            }
        }
        if st.requires(Slot::VectorY) {
            let (x, y) = (self.x.as_ref().unwrap(), self.y.as_ref().unwrap());
            if y.len() != n || (y.norm() - 1.0).abs() > ORTHONORMAL_TOL || x.dotc(y).norm() > ORTHONORMAL_TOL {
                return invalid("x, y must be orthonormal".into());
            }
        }
        if st.requires(Slot::Pair) && self.pair.as_ref().unwrap().dim() != n {
            return invalid("partial-isometry pair dimension mismatch".into());
        }
        if st.requires(Slot::S) || st.requires(Slot::T) {
            for m in [&self.s, &self.t].into_iter().flatten() {
                if m.nrows() != n || m.ncols() != n {
                    return invalid("S and T must be square of the instance dimension".into());
                }
            }
        }
        if st.requires(Slot::Level) {
            let t = self.level.unwrap();
            if !(t.is_finite() && t >= 0.0) {
                return invalid("level t must be a finite non-negative number".into());
            }
        }
        Ok(())
    }

    /// Scale of the instance, used to normalize perturbations.
    pub fn scale_hint(&self) -> f64 {
        self.a
            .as_ref()
            .map(HermitianMatrix::norm)
            .or_else(|| self.t.as_ref().map(operator_norm))
            .unwrap_or(1.0)
            .max(1e-300)
    }
}
