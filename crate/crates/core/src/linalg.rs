//! Dense Hermitian kernels: spectral decomposition, matrix functions, the
//! geometric mean, Löwner-order comparison and 2x2 block assembly.
//!
//! Every matrix function goes through [`eig_h`], and every value that is
//! about to be decomposed is first symmetrized with [`hermitize`], so all
//! results are exactly Hermitian.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::LinalgError;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative factor of the default order tolerance `τ = 1e-9 · max(1, ‖operands‖)`.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Default relative singular-value cutoff for [`pinv`].
pub const DEFAULT_PINV_CUTOFF: f64 = 1e-12;

/// `τ = rel · max(1, norms...)`.
pub fn scaled_tolerance(rel: f64, norms: &[f64]) -> f64 {
    rel * norms.iter().fold(1.0_f64, |acc, &n| acc.max(n))
}

/// A dense complex matrix that is exactly equal to its conjugate transpose.
///
/// The only ways in are [`hermitize`] and the diagonal/identity
/// constructors, so `entries[i][j] == conj(entries[j][i])` holds bit-for-bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "crate::serde_matrix::MatrixRepr", into = "crate::serde_matrix::MatrixRepr")]
pub struct HermitianMatrix(CMatrix);

/// Eigenvalues in ascending order with the matching unitary eigenvector matrix.
#[derive(Clone, Debug)]
pub struct EigenH {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// Outcome of an order or norm comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoewnerVerdict {
    pub holds: bool,
    pub margin: f64,
    pub tolerance: f64,
}

impl LoewnerVerdict {
    pub fn new(margin: f64, tolerance: f64) -> Self {
        Self {
            holds: margin >= -tolerance,
            margin,
            tolerance,
        }
    }
}

/// Returns `(T + T*)/2`.
pub fn hermitize(t: &CMatrix) -> Result<HermitianMatrix, LinalgError> {
    let (rows, cols) = t.shape();
    if rows != cols {
        return Err(LinalgError::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(LinalgError::Empty);
    }
    let half = C64::new(0.5, 0.0);
    let h = CMatrix::from_fn(rows, cols, |i, j| (t[(i, j)] + t[(j, i)].conj()) * half);
    Ok(HermitianMatrix(h))
}

/// Symmetrizes a matrix already known to be square; used internally after
/// products of Hermitian factors.
pub(crate) fn herm(t: &CMatrix) -> HermitianMatrix {
    hermitize(t).expect("square non-empty product")
}

impl HermitianMatrix {
    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        Self(CMatrix::identity(n, n) * C64::new(s, 0.0))
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMatrix::zeros(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(d[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// Builds from real row-major entries (symmetrized).
    pub fn from_real_rows(n: usize, rows: &[f64]) -> Result<Self, LinalgError> {
        if rows.len() != n * n {
            return Err(LinalgError::DimensionMismatch {
                expected: n * n,
                got: rows.len(),
            });
        }
        hermitize(&CMatrix::from_fn(n, n, |i, j| C64::new(rows[i * n + j], 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn eig(&self) -> EigenH {
        eig_h(self)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig().values[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eig().values.last().unwrap()
    }

    /// Operator norm (`max |λ_i|`).
    pub fn norm(&self) -> f64 {
        self.eig().values.iter().fold(0.0_f64, |acc, l| acc.max(l.abs()))
    }

    /// `U diag(f(λ)) U*`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let e = self.eig();
        e.rebuild(e.values.iter().map(|&l| f(l)))
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &other.0)
    }

    pub fn scale(&self, s: f64) -> HermitianMatrix {
        HermitianMatrix(&self.0 * C64::new(s, 0.0))
    }

    /// `self²`, symmetrized.
    pub fn square(&self) -> HermitianMatrix {
        herm(&(&self.0 * &self.0))
    }

    /// `X* self X`, symmetrized.
    pub fn congruence(&self, x: &CMatrix) -> HermitianMatrix {
        herm(&(x.adjoint() * &self.0 * x))
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }
}

impl AsRef<CMatrix> for HermitianMatrix {
    fn as_ref(&self) -> &CMatrix {
        &self.0
    }
}

impl TryFrom<CMatrix> for HermitianMatrix {
    type Error = LinalgError;

    fn try_from(m: CMatrix) -> Result<Self, Self::Error> {
        hermitize(&m)
    }
}

impl EigenH {
    /// `U diag(d) U*` for a new diagonal `d`.
    pub fn rebuild(&self, d: impl IntoIterator<Item = f64>) -> HermitianMatrix {
        let n = self.vectors.nrows();
        let mut scaled = self.vectors.clone();
        for (j, dj) in d.into_iter().enumerate().take(n) {
            let s = C64::new(dj, 0.0);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        herm(&(scaled * self.vectors.adjoint()))
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
pub fn eig_h(h: &HermitianMatrix) -> EigenH {
    let n = h.dim();
    if n == 1 {
        return EigenH {
            values: vec![h.0[(0, 0)].re],
            vectors: CMatrix::identity(1, 1),
        };
    }
    let se = SymmetricEigen::new(h.0.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| se.eigenvectors[(i, order[j])]);
    EigenH { values, vectors }
}

/// Default order tolerance for a single operand.
pub fn default_tolerance(h: &HermitianMatrix) -> f64 {
    scaled_tolerance(DEFAULT_REL_TOL, &[h.norm()])
}

/// Principal square root of a PSD matrix. Eigenvalues in `[-tol, 0)` are
/// clamped to zero; anything more negative is an error.
pub fn sqrt_psd(a: &HermitianMatrix, tol: Option<f64>) -> Result<HermitianMatrix, LinalgError> {
    let e = a.eig();
    let tolerance = tol.unwrap_or_else(|| scaled_tolerance(DEFAULT_REL_TOL, &[spectral_radius(&e)]));
    if e.values[0] < -tolerance {
        return Err(LinalgError::NotPsd {
            min_eigenvalue: e.values[0],
            tolerance,
        });
    }
    Ok(e.rebuild(e.values.iter().map(|&l| l.max(0.0).sqrt())))
}

/// `A^{-1/2}` for positive definite `A`.
pub fn inv_sqrt_pd(a: &HermitianMatrix, tol: Option<f64>) -> Result<HermitianMatrix, LinalgError> {
    let e = checked_pd(a, tol)?;
    Ok(e.rebuild(e.values.iter().map(|&l| 1.0 / l.sqrt())))
}

/// Inverse of a positive definite matrix.
pub fn inv_pd(a: &HermitianMatrix) -> Result<HermitianMatrix, LinalgError> {
    let e = checked_pd(a, None)?;
    Ok(e.rebuild(e.values.iter().map(|&l| 1.0 / l)))
}

fn spectral_radius(e: &EigenH) -> f64 {
    e.values.iter().fold(0.0_f64, |acc, l| acc.max(l.abs()))
}

fn checked_pd(a: &HermitianMatrix, tol: Option<f64>) -> Result<EigenH, LinalgError> {
    let e = a.eig();
    let tolerance = tol.unwrap_or_else(|| scaled_tolerance(DEFAULT_REL_TOL, &[spectral_radius(&e)]));
    if e.values[0] <= tolerance {
        return Err(LinalgError::NotPositiveDefinite {
            min_eigenvalue: e.values[0],
            tolerance,
        });
    }
    Ok(e)
}

/// Moore–Penrose pseudoinverse via the SVD. Singular values at or below
/// `cutoff · σ_max` are treated as zero.
pub fn pinv(t: &CMatrix, cutoff: f64) -> Result<CMatrix, LinalgError> {
    let (rows, cols) = t.shape();
    if rows == 0 || cols == 0 {
        return Err(LinalgError::Empty);
    }
    let svd = svd_checked(t);
    let smax = svd.values.iter().fold(0.0_f64, |a, &s| a.max(s));
    if smax == 0.0 {
        return Ok(CMatrix::zeros(cols, rows));
    }
    let mut out = CMatrix::zeros(cols, rows);
    for (k, &s) in svd.values.iter().enumerate() {
        if s > cutoff * smax {
            out += svd.v_t.row(k).adjoint() * svd.u.column(k).adjoint() * C64::new(1.0 / s, 0.0);
        }
    }
    Ok(out)
}

/// Pseudoinverse of a Hermitian PSD matrix restricted to its support,
/// together with the retained rank.
pub fn pinv_hermitian(h: &HermitianMatrix, cutoff: f64) -> (HermitianMatrix, usize) {
    let e = h.eig();
    let radius = spectral_radius(&e);
    let threshold = cutoff * radius;
    let mut rank = 0;
    let inv = e.rebuild(e.values.iter().map(|&l| {
        if radius > 0.0 && l.abs() > threshold {
            rank += 1;
            1.0 / l
        } else {
            0.0
        }
    }));
    (inv, rank)
}

/// Largest singular value.
pub fn operator_norm(t: &CMatrix) -> f64 {
    if t.is_empty() {
        return 0.0;
    }
    if t.nrows() == 1 || t.ncols() == 1 {
        return t.norm();
    }
    svd_checked(t).values.iter().fold(0.0_f64, |a, &s| a.max(s))
}

/// Thin SVD `T = U diag(values) V_t`.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    pub values: Vec<f64>,
    pub v_t: CMatrix,
}

impl Svd {
    fn residual(&self, t: &CMatrix) -> f64 {
        let mut us = self.u.clone();
        for (j, &s) in self.values.iter().enumerate() {
            us.column_mut(j).scale_mut(s);
        }
        let k = self.values.len();
        let recon = (us * &self.v_t - t).norm();
        let gram = (&self.v_t * self.v_t.adjoint() - CMatrix::identity(k, k)).norm();
        recon / t.norm().max(f64::MIN_POSITIVE) + gram
    }
}

/// SVD with a reconstruction and unitarity check.
///
/// nalgebra's complex SVD occasionally returns wrong factors for nearly
/// diagonal input. Those results are rejected and the factors are taken from
/// the eigendecomposition of the dilation `[[0, T], [T*, 0]]` instead.
pub fn svd_checked(t: &CMatrix) -> Svd {
    let (m, n) = t.shape();
    let k = m.min(n);
    let tol = 1e-13 * (m.max(n) as f64);
    let raw = t.clone().svd(true, true);
    if let (Some(u), Some(v_t)) = (raw.u, raw.v_t) {
        let svd = Svd {
            u,
            values: raw.singular_values.iter().copied().collect(),
            v_t,
        };
        if t.norm() == 0.0 || svd.residual(t) <= tol {
            return svd;
        }
    }
    let mut d = CMatrix::zeros(m + n, m + n);
    d.view_mut((0, m), (m, n)).copy_from(t);
    d.view_mut((m, 0), (n, m)).copy_from(&t.adjoint());
    let e = eig_h(&HermitianMatrix(d));
    let root2 = C64::new(std::f64::consts::SQRT_2, 0.0);
    let mut u = CMatrix::zeros(m, k);
    let mut v_t = CMatrix::zeros(k, n);
    let mut values = Vec::with_capacity(k);
    for j in 0..k {
        let col = e.vectors.column(m + n - 1 - j);
        values.push(e.values[m + n - 1 - j].max(0.0));
        u.column_mut(j).copy_from(&(col.rows(0, m) * root2));
        v_t.row_mut(j).copy_from(&(col.rows(m, n) * root2).adjoint());
    }
    Svd { u, values, v_t }
}

/// `|T| = (T*T)^{1/2}`, from the SVD `T = UΣV*` as `VΣV*` so that small
/// singular values keep full accuracy.
pub fn abs_op(t: &CMatrix) -> Result<HermitianMatrix, LinalgError> {
    let (rows, cols) = t.shape();
    if rows != cols {
        return Err(LinalgError::NotSquare { rows, cols });
    }
    if rows == 1 {
        return Ok(HermitianMatrix::from_diagonal(&[t[(0, 0)].norm()]));
    }
    let svd = svd_checked(t);
    let mut scaled = svd.v_t.adjoint();
    for (j, &s) in svd.values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(s);
    }
    Ok(herm(&(scaled * svd.v_t)))
}

/// `L♯Q⁻¹` from square roots `lh = L^{1/2}` (PSD) and `qh = Q^{1/2}` (PD),
/// computed as `Q^{-1/2} |L^{1/2} Q^{1/2}| Q^{-1/2}`.
///
/// Near the equality case `L ≈ Q` the textbook formula forms a sandwich
/// whose condition number is the square of this one.
pub fn geometric_mean_with_inverse_roots(
    lh: &HermitianMatrix,
    qh: &HermitianMatrix,
) -> Result<HermitianMatrix, LinalgError> {
    same_dim(lh.dim(), qh.dim())?;
    let e = checked_pd(qh, None)?;
    let q_inv = e.rebuild(e.values.iter().map(|&l| 1.0 / l));
    let w = abs_op(&(lh.as_matrix() * qh.as_matrix()))?;
    Ok(w.congruence(q_inv.as_matrix()))
}

/// `L♯Q⁻¹` for PSD `L` and PD `Q`; see [`geometric_mean_with_inverse_roots`].
pub fn geometric_mean_with_inverse(l: &HermitianMatrix, q: &HermitianMatrix) -> Result<HermitianMatrix, LinalgError> {
    let qh = sqrt_psd(q, None)?;
    geometric_mean_with_inverse_roots(&sqrt_psd(l, None)?, &qh)
}

/// Geometric mean `A♯B = A^{1/2}(A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}` of two
/// positive definite matrices.
pub fn geometric_mean(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix, LinalgError> {
    checked_pd(b, None)?;
    geometric_mean_semidefinite(a, b)
}

/// Geometric mean with `A` positive definite and `B` only PSD; this is the
/// continuous extension `lim (A♯(B + εI))`.
pub fn geometric_mean_semidefinite(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
) -> Result<HermitianMatrix, LinalgError> {
    same_dim(a.dim(), b.dim())?;
    let e = checked_pd(a, None)?;
    let a_half = e.rebuild(e.values.iter().map(|&l| l.sqrt()));
    let a_mhalf = e.rebuild(e.values.iter().map(|&l| 1.0 / l.sqrt()));
    let inner = b.congruence(a_mhalf.as_matrix());
    let inner_sqrt = sqrt_psd(&inner, None)?;
    Ok(inner_sqrt.congruence(a_half.as_matrix()))
}

fn same_dim(expected: usize, got: usize) -> Result<(), LinalgError> {
    if expected != got {
        Err(LinalgError::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}

/// Decides `L ⪯ R`: the margin is `λ_min(R − L)`; default tolerance
/// `1e-9 · max(1, ‖L‖, ‖R‖)`.
pub fn loewner_compare(
    l: &HermitianMatrix,
    r: &HermitianMatrix,
    tol: Option<f64>,
) -> Result<LoewnerVerdict, LinalgError> {
    same_dim(l.dim(), r.dim())?;
    let tolerance = tol.unwrap_or_else(|| scaled_tolerance(DEFAULT_REL_TOL, &[l.norm(), r.norm()]));
    let diff = herm(&(r.as_matrix() - l.as_matrix()));
    Ok(LoewnerVerdict::new(diff.min_eigenvalue(), tolerance))
}

/// `[[A, X], [X*, B]]`.
pub fn block2(a: &HermitianMatrix, x: &CMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix, LinalgError> {
    let n = a.dim();
    same_dim(n, b.dim())?;
    let (rows, cols) = x.shape();
    if rows != n || cols != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            got: if rows != n { rows } else { cols },
        });
    }
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a.as_matrix());
    m.view_mut((0, n), (n, n)).copy_from(x);
    m.view_mut((n, 0), (n, n)).copy_from(&x.adjoint());
    m.view_mut((n, n), (n, n)).copy_from(b.as_matrix());
    hermitize(&m)
}

/// Unitary-orbit dominance: in finite dimension a unitary `U` with
/// `U X U* ⪯ Y` exists iff `λ_i↓(X) ≤ λ_i↓(Y)` for every `i`. The margin is
/// `min_i (λ_i↓(Y) − λ_i↓(X))`.
pub fn eigenvalue_dominance(
    x: &HermitianMatrix,
    y: &HermitianMatrix,
    tol: Option<f64>,
) -> Result<LoewnerVerdict, LinalgError> {
    same_dim(x.dim(), y.dim())?;
    let ex = x.eig();
    let ey = y.eig();
    let tolerance =
        tol.unwrap_or_else(|| scaled_tolerance(DEFAULT_REL_TOL, &[spectral_radius(&ex), spectral_radius(&ey)]));
    let margin = ex
        .values
        .iter()
        .rev()
        .zip(ey.values.iter().rev())
        .map(|(lx, ly)| ly - lx)
        .fold(f64::INFINITY, f64::min);
    Ok(LoewnerVerdict::new(margin, tolerance))
}

/// Convenience for building small complex matrices in tests and demos:
/// row-major `(re, im)` pairs.
pub fn cmatrix(n: usize, m: usize, entries: &[(f64, f64)]) -> CMatrix {
    assert_eq!(entries.len(), n * m);
    CMatrix::from_fn(n, m, |i, j| {
        let (re, im) = entries[i * m + j];
        C64::new(re, im)
    })
}

/// Real row-major matrix.
pub fn rmatrix(n: usize, m: usize, entries: &[f64]) -> CMatrix {
    assert_eq!(entries.len(), n * m);
    CMatrix::from_fn(n, m, |i, j| C64::new(entries[i * m + j], 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{ginibre, rng_from_seed, Field};

    fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
        let mut rng = rng_from_seed(seed);
        hermitize(&ginibre(n, n, Field::Complex, &mut rng)).unwrap()
    }

    fn random_pd(n: usize, seed: u64) -> HermitianMatrix {
        let mut rng = rng_from_seed(seed);
        let g = ginibre(n, n, Field::Complex, &mut rng);
        herm(&(g.adjoint() * &g + CMatrix::identity(n, n) * C64::new(0.1, 0.0)))
    }

    fn frob(m: &CMatrix) -> f64 {
        m.norm()
    }

    #[test]
    fn hermitize_examples() {
        let h = cmatrix(2, 2, &[(1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (2.0, 0.0)]);
        assert_eq!(hermitize(&h).unwrap().as_matrix(), &h);
        let t = rmatrix(2, 2, &[0.0, 2.0, 0.0, 0.0]);
        assert_eq!(hermitize(&t).unwrap().as_matrix(), &rmatrix(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let r = hermitize(&ginibre(5, 5, Field::Complex, &mut rng_from_seed(3))).unwrap();
        let m = r.as_matrix();
        for a in 0..5 {
            for b in 0..5 {
                assert_eq!(m[(a, b)], m[(b, a)].conj());
            }
        }
    }

    #[test]
    fn hermitize_rejects_non_square() {
        let t = CMatrix::zeros(2, 3);
        assert_eq!(hermitize(&t), Err(LinalgError::NotSquare { rows: 2, cols: 3 }));
    }

    #[test]
    fn eig_of_diagonal_and_identity() {
        let e = HermitianMatrix::from_diagonal(&[3.0, 1.0]).eig();
        assert_eq!(e.values, vec![1.0, 3.0]);
        for i in 0..2 {
            for j in 0..2 {
                let v = e.vectors[(i, j)].norm();
                assert!(v < 1e-14 || (v - 1.0).abs() < 1e-14);
            }
        }
        let e = HermitianMatrix::identity(4).eig();
        assert!(e.values.iter().all(|&l| (l - 1.0).abs() < 1e-15));
    }

    #[test]
    fn eig_residual_and_unitarity() {
        for (k, n) in [2usize, 5, 16, 32].into_iter().enumerate() {
            let h = random_hermitian(n, 100 + k as u64);
            let e = h.eig();
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            let uu = &e.vectors * e.vectors.adjoint();
            assert!(frob(&(uu - CMatrix::identity(n, n))) <= 1e-12);
            let rebuilt = e.rebuild(e.values.iter().copied());
            assert!(frob(&(rebuilt.as_matrix() - h.as_matrix())) <= 1e-10 * (1.0 + h.norm()));
        }
    }

    #[test]
    fn sqrt_examples() {
        let r = sqrt_psd(&HermitianMatrix::from_diagonal(&[4.0, 9.0]), None).unwrap();
        assert!(frob(&(r.as_matrix() - HermitianMatrix::from_diagonal(&[2.0, 3.0]).as_matrix())) < 1e-14);
        let r = sqrt_psd(&HermitianMatrix::identity(3), None).unwrap();
        assert!(frob(&(r.as_matrix() - CMatrix::identity(3, 3))) < 1e-14);
        let a = random_pd(6, 7);
        let r = sqrt_psd(&a, None).unwrap();
        assert!(r.min_eigenvalue() >= 0.0);
        assert!(operator_norm(&(r.as_matrix() * r.as_matrix() - a.as_matrix())) <= 1e-10 * a.norm());
    }

    #[test]
    fn sqrt_clamps_roundoff_but_rejects_indefinite() {
        let tiny = HermitianMatrix::from_diagonal(&[1.0, -1e-12]);
        let r = sqrt_psd(&tiny, None).unwrap();
        assert!(operator_norm(&(r.as_matrix() - HermitianMatrix::from_diagonal(&[1.0, 0.0]).as_matrix())) < 1e-15);
        assert!(matches!(
            sqrt_psd(&HermitianMatrix::from_diagonal(&[1.0, -1e-3]), None),
            Err(LinalgError::NotPsd { .. })
        ));
    }

    #[test]
    fn inverse_examples() {
        let inv = inv_pd(&HermitianMatrix::from_diagonal(&[2.0, 4.0])).unwrap();
        assert!(frob(&(inv.as_matrix() - HermitianMatrix::from_diagonal(&[0.5, 0.25]).as_matrix())) < 1e-15);
        assert!(matches!(
            inv_pd(&HermitianMatrix::from_diagonal(&[1.0, 0.0])),
            Err(LinalgError::NotPositiveDefinite { .. })
        ));
        let p = pinv(&rmatrix(2, 2, &[3.0, 0.0, 0.0, 0.0]), DEFAULT_PINV_CUTOFF).unwrap();
        assert!(frob(&(p - rmatrix(2, 2, &[1.0 / 3.0, 0.0, 0.0, 0.0]))) < 1e-15);
    }

    #[test]
    fn pinv_full_rank_and_penrose_identities() {
        let mut rng = rng_from_seed(11);
        let t = ginibre(5, 5, Field::Complex, &mut rng);
        let p = pinv(&t, DEFAULT_PINV_CUTOFF).unwrap();
        assert!(operator_norm(&(&t * &p - CMatrix::identity(5, 5))) <= 1e-9);

        // rank 2 in dimension 4
        let g = ginibre(4, 2, Field::Complex, &mut rng);
        let h = ginibre(2, 4, Field::Complex, &mut rng);
        let t = &g * &h;
        let p = pinv(&t, DEFAULT_PINV_CUTOFF).unwrap();
        let s = operator_norm(&t);
        assert!(operator_norm(&(&t * &p * &t - &t)) <= 1e-9 * s);
        assert!(operator_norm(&(&p * &t * &p - &p)) <= 1e-9 * operator_norm(&p));
        let tp = &t * &p;
        let pt = &p * &t;
        assert!(operator_norm(&(tp.adjoint() - &tp)) <= 1e-9);
        assert!(operator_norm(&(pt.adjoint() - &pt)) <= 1e-9);
    }

    #[test]
    fn geometric_mean_examples() {
        let c = random_pd(4, 21);
        let m = geometric_mean(&c, &c).unwrap();
        assert!(operator_norm(&(m.as_matrix() - c.as_matrix())) <= 1e-10 * c.norm());

        let a = HermitianMatrix::from_diagonal(&[1.0, 4.0]);
        let b = HermitianMatrix::from_diagonal(&[4.0, 1.0]);
        let m = geometric_mean(&a, &b).unwrap();
        assert!(operator_norm(&(m.as_matrix() - HermitianMatrix::from_diagonal(&[2.0, 2.0]).as_matrix())) < 1e-14);

        let a = random_pd(5, 31);
        let b = random_pd(5, 32);
        let x = geometric_mean(&a, &b).unwrap();
        let ainv = inv_pd(&a).unwrap();
        let residual = x.as_matrix() * ainv.as_matrix() * x.as_matrix() - b.as_matrix();
        assert!(operator_norm(&residual) <= 1e-9 * b.norm());
        assert!(x.min_eigenvalue() > 0.0);
    }

    #[test]
    fn geometric_mean_rejects_singular() {
        let a = HermitianMatrix::from_diagonal(&[1.0, 0.0]);
        let b = HermitianMatrix::identity(2);
        assert!(matches!(geometric_mean(&a, &b), Err(LinalgError::NotPositiveDefinite { .. })));
        assert!(matches!(geometric_mean(&b, &a), Err(LinalgError::NotPositiveDefinite { .. })));
        // the semidefinite extension accepts a singular second argument
        let m = geometric_mean_semidefinite(&b, &a).unwrap();
        assert!(operator_norm(&(m.as_matrix() - a.as_matrix())) < 1e-14);
    }

    #[test]
    fn abs_examples() {
        let t = rmatrix(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let a = abs_op(&t).unwrap();
        assert!(frob(&(a.as_matrix() - HermitianMatrix::from_diagonal(&[0.0, 1.0]).as_matrix())) < 1e-14);
        let p = random_pd(4, 41);
        assert!(operator_norm(&(abs_op(p.as_matrix()).unwrap().as_matrix() - p.as_matrix())) < 1e-10 * p.norm());

        let t = ginibre(5, 5, Field::Complex, &mut rng_from_seed(42));
        let mut sv: Vec<f64> = t.singular_values().iter().copied().collect();
        sv.sort_by(f64::total_cmp);
        let ev = abs_op(&t).unwrap().eig().values;
        for (s, l) in sv.iter().zip(ev.iter()) {
            assert!((s - l).abs() <= 1e-10);
        }
    }

    #[test]
    fn norm_examples() {
        assert_eq!(operator_norm(&rmatrix(2, 2, &[0.0, 2.0, 0.0, 0.0])), 2.0);
        assert!((operator_norm(&rmatrix(2, 2, &[-3.0, 0.0, 0.0, 1.0])) - 3.0).abs() < 1e-15);
        assert!((HermitianMatrix::from_diagonal(&[-3.0, 1.0]).norm() - 3.0).abs() < 1e-15);
    }

    // Half of the 10^4 unit vectors are uniform, half are local perturbations
    // of the running best with a shrinking radius; uniform draws alone cannot
    // get within 1e-3 of the norm on the complex 4-sphere.
    #[test]
    fn norm_against_vector_sampling() {
        use rand::Rng;
        let mut rng = rng_from_seed(5);
        let unit = |v: CVector| {
            let n = v.norm();
            v / C64::new(n, 0.0)
        };
        for n in 1..=4 {
            let t = ginibre(n, n, Field::Complex, &mut rng);
            let norm = operator_norm(&t);
            let mut best_v = unit(CVector::from_element(n, C64::new(1.0, 0.0)));
            let mut best = (&t * &best_v).norm();
            for k in 0..10_000 {
                let candidate = if k < 5_000 {
                    unit(CVector::from_fn(n, |_, _| {
                        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
                    }))
                } else {
                    let radius = 0.3 * (-((k - 5_000) as f64) / 700.0).exp();
                    let d = CVector::from_fn(n, |_, _| {
                        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
                    });
                    unit(&best_v + d * C64::new(radius, 0.0))
                };
                let val = (&t * &candidate).norm();
                if val > best {
                    best = val;
                    best_v = candidate;
                }
            }
            assert!(best <= norm * (1.0 + 1e-12));
            assert!(norm - best <= 1e-3, "n={n} norm={norm} best={best}");
        }
    }

    #[test]
    fn loewner_examples() {
        let i = HermitianMatrix::identity(2);
        let v = loewner_compare(&i, &i.scale(2.0), None).unwrap();
        assert!(v.holds);
        assert!((v.margin - 1.0).abs() < 1e-15);
        let v = loewner_compare(&i.scale(2.0), &i, None).unwrap();
        assert!(!v.holds);
        assert!((v.margin + 1.0).abs() < 1e-15);
        let r = HermitianMatrix::from_real_rows(2, &[2.0, 1.0, 1.0, 1.0]).unwrap();
        let v = loewner_compare(&i, &r, None).unwrap();
        assert!(!v.holds);
        assert!((v.margin - (1.0 - 5f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!(loewner_compare(&i, &HermitianMatrix::identity(3), None).is_err());
    }

    #[test]
    fn block_examples() {
        let i = HermitianMatrix::identity(3);
        let b = block2(&i, &CMatrix::zeros(3, 3), &i).unwrap();
        assert_eq!(b.as_matrix(), &CMatrix::identity(6, 6));
        assert!(b.min_eigenvalue() >= 0.0);

        let a = random_pd(3, 51);
        let bb = random_pd(3, 52);
        let g = geometric_mean(&a, &bb).unwrap();
        let blk = block2(&a, g.as_matrix(), &bb).unwrap();
        assert!(blk.min_eigenvalue() >= -1e-9 * blk.norm());

        let x = ginibre(3, 3, Field::Complex, &mut rng_from_seed(53));
        let t = operator_norm(&x);
        let up = block2(&i.scale(t + 0.01), &x, &i.scale(t + 0.01)).unwrap();
        let down = block2(&i.scale(t - 0.01), &x, &i.scale(t - 0.01)).unwrap();
        assert!(up.min_eigenvalue() > 0.0);
        assert!(down.min_eigenvalue() < 0.0);
        assert!(block2(&i, &CMatrix::zeros(2, 2), &i).is_err());
    }

    #[test]
    fn dominance_examples() {
        let a = random_pd(3, 61);
        let v = eigenvalue_dominance(&a, &a, None).unwrap();
        assert!(v.holds && v.margin.abs() < 1e-12);
        let i = HermitianMatrix::identity(3);
        let v = eigenvalue_dominance(&i, &i.scale(2.0), None).unwrap();
        assert!(v.holds && (v.margin - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_mean_agrees_with_textbook_formula() {
        let mut rng = rng_from_seed(21);
        for n in [1, 2, 5] {
            let mut pd = || {
                let g = ginibre(n, n, Field::Complex, &mut rng);
                herm(&(&g * g.adjoint())).add(&HermitianMatrix::identity(n))
            };
            let (a, b) = (pd(), pd());
            let direct = geometric_mean(&a, &inv_pd(&b).unwrap()).unwrap();
            let stable = geometric_mean_with_inverse(&a, &b).unwrap();
            assert!(operator_norm(&(direct.as_matrix() - stable.as_matrix())) < 1e-10 * direct.norm());
        }
    }

    #[test]
    fn inverse_mean_equality_case_is_accurate() {
        let w = crate::window::SpectralWindow::new(1.0, 1e3).unwrap();
        for seed in 0..20 {
            let a = crate::random::random_with_spectrum(&w, 6, seed, 1.0).unwrap();
            // A²♯A⁻² = I exactly
            let g = geometric_mean_with_inverse_roots(&a, &a).unwrap();
            assert!(operator_norm(&(g.as_matrix() - CMatrix::identity(6, 6))) < 1e-9);
        }
    }

    #[test]
    fn svd_survives_nearly_diagonal_complex_input() {
        let t = cmatrix(
            2,
            2,
            &[
                (1.425310558715228, 0.0),
                (-2.25599441869261e-15, 1.0694015074818449e-14),
                (-7.76138937636156e-16, -3.679105511282539e-15),
                (12.042221203115067, 0.0),
            ],
        );
        let a = abs_op(&t).unwrap();
        let direct = sqrt_psd(&hermitize(&(t.adjoint() * &t)).unwrap(), None).unwrap();
        assert!(operator_norm(&(a.as_matrix() - direct.as_matrix())) < 1e-12);
        assert!((operator_norm(&t) - 12.042221203115067).abs() < 1e-12);
        let p = pinv(&t, DEFAULT_PINV_CUTOFF).unwrap();
        assert!(operator_norm(&(&p * &t - CMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn dilation_svd_matches_on_rectangular_input() {
        let t = rmatrix(2, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, 3.0]);
        let p = pinv(&t, DEFAULT_PINV_CUTOFF).unwrap();
        assert!(operator_norm(&(&t * &p - CMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn abs_op_small_singular_values() {
        let t = rmatrix(2, 2, &[1.0, 0.0, 0.0, 1e-12]);
        let e = abs_op(&t).unwrap().eig();
        assert!((e.values[0] - 1e-12).abs() < 1e-24);
    }
}
