//! Seeded random instances: Ginibre and Haar matrices, spectrum-constrained
//! Hermitian matrices, unit vectors and random windows.
//!
//! Everything is driven by `ChaCha8Rng`, so a `u64` seed reproduces the same
//! instance on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::LinalgError;
use crate::linalg::{herm, CMatrix, CVector, HermitianMatrix, C64};
use crate::window::SpectralWindow;

pub type InstanceRng = ChaCha8Rng;

/// Largest dimension the generators will produce.
pub const MAX_DIM: usize = 64;

/// Default probability that a sampled spectrum is forced to touch both ends
/// of its window.
pub const DEFAULT_ENDPOINT_PROB: f64 = 0.5;

/// Scalar field of the sampled matrices. `Real` draws real orthogonal /
/// real symmetric instances, stored in the same complex containers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    #[default]
    Complex,
    Real,
}

pub fn rng_from_seed(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn check_dim(n: usize) -> Result<(), LinalgError> {
    if n == 0 || n > MAX_DIM {
        Err(LinalgError::UnsupportedDimension(n))
    } else {
        Ok(())
    }
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Standard normal entry: complex with `E|z|² = 1`, or real `N(0,1)`.
pub fn normal_entry<R: Rng + ?Sized>(field: Field, rng: &mut R) -> C64 {
    match field {
        Field::Complex => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            C64::new(standard_normal(rng) * s, standard_normal(rng) * s)
        }
        Field::Real => C64::new(standard_normal(rng), 0.0),
    }
}

/// Matrix with i.i.d. standard normal entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, field: Field, rng: &mut R) -> CMatrix {
    // Column-major fill order is part of the reproducibility contract.
    let mut m = CMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = normal_entry(field, rng);
        }
    }
    m
}

/// Haar-distributed unitary (or orthogonal for `Field::Real`): QR of a
/// Ginibre matrix with the phases of `diag(R)` folded back into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, field: Field, rng: &mut R) -> CMatrix {
    let g = ginibre(n, n, field, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        let phase = if norm > 0.0 { d / norm } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, field: Field, rng: &mut R) -> CVector {
    loop {
        let v = CVector::from_fn(n, |_, _| normal_entry(field, rng));
        let norm = v.norm();
        if norm > 1e-8 {
            return v / C64::new(norm, 0.0);
        }
    }
}

/// Two orthonormal vectors (Gram–Schmidt on Gaussian draws). Requires `n ≥ 2`.
pub fn random_orthonormal_pair<R: Rng + ?Sized>(n: usize, field: Field, rng: &mut R) -> (CVector, CVector) {
    assert!(n >= 2, "orthonormal pair needs dimension >= 2");
    let x = random_unit_vector(n, field, rng);
    loop {
        let y = random_unit_vector(n, field, rng);
        let y = orthogonalize(&y, &x);
        let norm = y.norm();
        if norm > 1e-6 {
            return (x, y / C64::new(norm, 0.0));
        }
    }
}

/// `y − ⟨x, y⟩ x` for unit `x`, applied twice for stability.
pub fn orthogonalize(y: &CVector, x: &CVector) -> CVector {
    let mut out = y.clone();
    for _ in 0..2 {
        let proj = x.dotc(&out);
        out -= x * proj;
    }
    out
}

/// Spectrum drawn uniformly from `[m, M]`; with probability `endpoint_prob`
/// (and `n ≥ 2`) two random positions are overwritten by `m` and `M`. For
/// `n = 1` the endpoint draw picks one of the two ends.
pub fn random_spectrum<R: Rng + ?Sized>(
    w: &SpectralWindow,
    n: usize,
    endpoint_prob: f64,
    rng: &mut R,
) -> Vec<f64> {
    let (m, big_m) = (w.m(), w.big_m());
    if w.is_degenerate() {
        return vec![m; n];
    }
    let mut values: Vec<f64> = (0..n).map(|_| rng.random_range(m..=big_m)).collect();
    if rng.random_bool(endpoint_prob.clamp(0.0, 1.0)) {
        if n == 1 {
            values[0] = if rng.random_bool(0.5) { m } else { big_m };
        } else {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            values[i] = m;
            values[j] = big_m;
        }
    }
    values
}

/// `U diag(λ) U*` with Haar `U` and `λ` from [`random_spectrum`].
pub fn random_with_spectrum_rng<R: Rng + ?Sized>(
    w: &SpectralWindow,
    n: usize,
    endpoint_prob: f64,
    field: Field,
    rng: &mut R,
) -> Result<HermitianMatrix, LinalgError> {
    check_dim(n)?;
    if w.is_degenerate() {
        return Ok(HermitianMatrix::scaled_identity(n, w.m()));
    }
    let spectrum = random_spectrum(w, n, endpoint_prob, rng);
    if n == 1 {
        return Ok(HermitianMatrix::from_diagonal(&spectrum));
    }
    let u = haar_unitary(n, field, rng);
    Ok(with_spectrum(&u, &spectrum))
}

/// Spectrum-constrained Hermitian matrix from a seed.
pub fn random_with_spectrum(
    w: &SpectralWindow,
    n: usize,
    seed: u64,
    endpoint_prob: f64,
) -> Result<HermitianMatrix, LinalgError> {
    random_with_spectrum_rng(w, n, endpoint_prob, Field::Complex, &mut rng_from_seed(seed))
}

/// `U diag(λ) U*`.
pub fn with_spectrum(u: &CMatrix, spectrum: &[f64]) -> HermitianMatrix {
    let n = spectrum.len();
    let mut scaled = u.clone();
    for (j, &l) in spectrum.iter().enumerate() {
        for i in 0..n {
            scaled[(i, j)] *= C64::new(l, 0.0);
        }
    }
    herm(&(scaled * u.adjoint()))
}

/// `G G*` with `G` an `n × rank` Ginibre matrix, scaled to unit norm.
pub fn random_psd<R: Rng + ?Sized>(n: usize, rank: usize, field: Field, rng: &mut R) -> HermitianMatrix {
    let g = ginibre(n, rank.max(1), field, rng);
    let p = herm(&(&g * g.adjoint()));
    let norm = p.norm();
    if norm > 0.0 {
        p.scale(1.0 / norm)
    } else {
        p
    }
}

/// Random Hermitian direction with unit operator norm.
pub fn random_hermitian_direction<R: Rng + ?Sized>(n: usize, field: Field, rng: &mut R) -> HermitianMatrix {
    let h = herm(&ginibre(n, n, field, rng));
    let norm = h.norm();
    if norm > 0.0 {
        h.scale(1.0 / norm)
    } else {
        h
    }
}

/// Window with `m = 1` and `M` log-uniform in `[1, max_ratio]`.
pub fn sample_window<R: Rng + ?Sized>(max_ratio: f64, rng: &mut R) -> SpectralWindow {
    let exponent = if max_ratio > 1.0 {
        rng.random_range(0.0..=max_ratio.log10())
    } else {
        0.0
    };
    SpectralWindow::new(1.0, 10f64.powf(exponent)).expect("valid window")
}
