use serde::{Deserialize, Serialize};

use crate::error::LinalgError;

/// Spectral bounds `0 < m ≤ M` of a positive operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WindowRepr", into = "WindowRepr")]
pub struct SpectralWindow {
    lo: f64,
    hi: f64,
}

#[derive(Serialize, Deserialize)]
struct WindowRepr {
    m: f64,
    #[serde(rename = "M")]
    big_m: f64,
}

impl TryFrom<WindowRepr> for SpectralWindow {
    type Error = LinalgError;
    fn try_from(r: WindowRepr) -> Result<Self, Self::Error> {
        SpectralWindow::new(r.m, r.big_m)
    }
}

impl From<SpectralWindow> for WindowRepr {
    fn from(w: SpectralWindow) -> Self {
        WindowRepr { m: w.lo, big_m: w.hi }
    }
}

impl SpectralWindow {
    pub fn new(m: f64, big_m: f64) -> Result<Self, LinalgError> {
        if !(m.is_finite() && big_m.is_finite() && m > 0.0 && big_m >= m) {
            return Err(LinalgError::InvalidWindow { m, big_m });
        }
        Ok(Self { lo: m, hi: big_m })
    }

    pub fn m(&self) -> f64 {
        self.lo
    }

    pub fn big_m(&self) -> f64 {
        self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    /// `K = (M+m)² / (4Mm)`.
    pub fn kantorovich_constant(&self) -> f64 {
        let (m, big_m) = (self.lo, self.hi);
        (big_m + m) * (big_m + m) / (4.0 * big_m * m)
    }

    /// `c² = ((M−m)/(M+m))²`.
    pub fn wielandt_constant(&self) -> f64 {
        let c = self.wielandt_ratio();
        c * c
    }

    /// `c = (M−m)/(M+m)`.
    pub fn wielandt_ratio(&self) -> f64 {
        (self.hi - self.lo) / (self.hi + self.lo)
    }

    /// `(M+m) / (2√(Mm))`, the square root of the Kantorovich constant.
    pub fn geometric_kantorovich_bound(&self) -> f64 {
        (self.hi + self.lo) / (2.0 * (self.hi * self.lo).sqrt())
    }

    /// `(M+m)² / (2Mm)`, twice the Kantorovich constant.
    pub fn anticommutator_bound(&self) -> f64 {
        2.0 * self.kantorovich_constant()
    }

    /// The window of `A⁻¹` when `A` lives in `self`.
    pub fn inverse(&self) -> SpectralWindow {
        SpectralWindow {
            lo: 1.0 / self.hi,
            hi: 1.0 / self.lo,
        }
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

pub fn kantorovich_constant(w: &SpectralWindow) -> f64 {
    w.kantorovich_constant()
}

pub fn wielandt_constant(w: &SpectralWindow) -> f64 {
    w.wielandt_constant()
}
