//! Unital positive linear maps and partial-isometry pairs.
//!
//! The zoo covers every positivity class that appears in the inequalities:
//! Kraus mixtures, pinchings, Schur multipliers, vector states and
//! normalized partial traces are completely positive; composing any of them
//! with the transpose yields a map that is positive but in general not
//! 2-positive.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::LinalgError;
use crate::linalg::{
    herm, hermitize, inv_sqrt_pd, operator_norm, scaled_tolerance, CMatrix, CVector, HermitianMatrix, C64,
};
use crate::random::{
    check_dim, ginibre, haar_unitary, random_psd, random_unit_vector, rng_from_seed, Field,
};
use crate::serde_matrix;

/// Tolerance on `‖Φ(I) − I‖` accepted by the constructors.
pub const UNITALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("dimension mismatch: map expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate Kraus seed: Σ V*V has min eigenvalue {0:e}")]
    DegenerateKraus(f64),
    #[error("map is not unital (residual {0:e})")]
    NotUnital(f64),
    #[error("invalid map: {0}")]
    Invalid(String),
    #[error("{kind} maps are not available in dimension {n}")]
    UnsupportedKind { kind: MapKindTag, n: usize },
    #[error("rank overflow: {rank_x} + {rank_y} > {n}")]
    RankOverflow { n: usize, rank_x: usize, rank_y: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Positivity classes, ordered so that `CompletelyPositive > TwoPositive > Positive`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositivityClass {
    Positive,
    TwoPositive,
    CompletelyPositive,
}

impl PositivityClass {
    /// Whether a map of class `self` may be used where `required` is demanded.
    pub fn satisfies(self, required: PositivityClass) -> bool {
        self >= required
    }
}

impl fmt::Display for PositivityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PositivityClass::Positive => "positive",
            PositivityClass::TwoPositive => "two_positive",
            PositivityClass::CompletelyPositive => "completely_positive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKindTag {
    Kraus,
    Pinching,
    Schur,
    VectorState,
    PartialTrace,
    TransposeCompose,
}

impl MapKindTag {
    pub const ALL: [MapKindTag; 6] = [
        MapKindTag::Kraus,
        MapKindTag::Pinching,
        MapKindTag::Schur,
        MapKindTag::VectorState,
        MapKindTag::PartialTrace,
        MapKindTag::TransposeCompose,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MapKindTag::Kraus => "kraus",
            MapKindTag::Pinching => "pinching",
            MapKindTag::Schur => "schur",
            MapKindTag::VectorState => "vector_state",
            MapKindTag::PartialTrace => "partial_trace",
            MapKindTag::TransposeCompose => "transpose_compose",
        }
    }

    pub fn class(self) -> PositivityClass {
        match self {
            MapKindTag::TransposeCompose => PositivityClass::Positive,
            _ => PositivityClass::CompletelyPositive,
        }
    }

    /// Whether [`random_map`] can build this kind in dimension `n`.
    pub fn available_in(self, n: usize) -> bool {
        match self {
            MapKindTag::PartialTrace => smallest_factor(n).is_some(),
            _ => n >= 1,
        }
    }
}

impl fmt::Display for MapKindTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MapKindTag {
    type Err = MapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MapKindTag::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| MapError::Invalid(format!("unknown map kind `{s}`")))
    }
}

/// Which tensor factor a normalized partial trace removes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TracedFactor {
    First,
    Second,
}

/// Payload of a map. Serialized with a `kind` tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapKind {
    /// `T ↦ Σ V_i* T V_i`, each `V_i` of shape `input × output`.
    Kraus {
        #[serde(with = "serde_matrix::list")]
        operators: Vec<CMatrix>,
    },
    /// Compression onto the diagonal blocks of a partition of the indices.
    Pinching { dim: usize, blocks: Vec<Vec<usize>> },
    /// `T ↦ C ∘ T` with `C` PSD and unit diagonal.
    Schur {
        #[serde(with = "serde_matrix")]
        correlation: CMatrix,
    },
    /// `T ↦ ⟨x, T x⟩` as a 1×1 matrix.
    VectorState {
        #[serde(with = "serde_matrix::vector")]
        vector: CVector,
    },
    /// Partial trace over one factor of `C^left ⊗ C^right`, divided by the
    /// traced dimension.
    PartialTrace { left: usize, right: usize, traced: TracedFactor },
    /// `T ↦ Φ(Tᵀ)`.
    TransposeCompose { inner: Box<UnitalPositiveMap> },
}

/// A validated unital positive linear map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapKind", into = "MapKind")]
pub struct UnitalPositiveMap {
    kind: MapKind,
    input_dim: usize,
    output_dim: usize,
    class: PositivityClass,
}

impl From<UnitalPositiveMap> for MapKind {
    fn from(m: UnitalPositiveMap) -> Self {
        m.kind
    }
}

impl TryFrom<MapKind> for UnitalPositiveMap {
    type Error = MapError;

    fn try_from(kind: MapKind) -> Result<Self, Self::Error> {
        match kind {
            MapKind::Kraus { operators } => UnitalPositiveMap::kraus(operators),
            MapKind::Pinching { dim, blocks } => UnitalPositiveMap::pinching(dim, blocks),
            MapKind::Schur { correlation } => UnitalPositiveMap::schur(correlation),
            MapKind::VectorState { vector } => UnitalPositiveMap::vector_state(vector),
            MapKind::PartialTrace { left, right, traced } => {
                UnitalPositiveMap::partial_trace(left, right, traced)
            }
            MapKind::TransposeCompose { inner } => Ok(UnitalPositiveMap::transpose_compose(*inner)),
        }
    }
}

fn kraus_gram(ops: &[CMatrix]) -> CMatrix {
    let k = ops[0].ncols();
    ops.iter()
        .fold(CMatrix::zeros(k, k), |acc, v| acc + v.adjoint() * v)
}

impl UnitalPositiveMap {
    /// Kraus mixture; the operators must already satisfy `Σ V_i* V_i = I`.
    pub fn kraus(operators: Vec<CMatrix>) -> Result<Self, MapError> {
        let first = operators
            .first()
            .ok_or_else(|| MapError::Invalid("empty Kraus list".into()))?;
        let (n, k) = first.shape();
        if n == 0 || k == 0 {
            return Err(MapError::Invalid("empty Kraus operator".into()));
        }
        if let Some(bad) = operators.iter().find(|v| v.shape() != (n, k)) {
            return Err(MapError::Invalid(format!(
                "Kraus operators must share one shape: {:?} vs {:?}",
                (n, k),
                bad.shape()
            )));
        }
        let residual = operator_norm(&(kraus_gram(&operators) - CMatrix::identity(k, k)));
        if residual > UNITALITY_TOL {
            return Err(MapError::NotUnital(residual));
        }
        Ok(Self {
            kind: MapKind::Kraus { operators },
            input_dim: n,
            output_dim: k,
            class: PositivityClass::CompletelyPositive,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::kraus(vec![CMatrix::identity(n, n)]).expect("identity is unital")
    }

    pub fn pinching(dim: usize, blocks: Vec<Vec<usize>>) -> Result<Self, MapError> {
        let mut seen = vec![false; dim];
        for &i in blocks.iter().flatten() {
            if i >= dim || seen[i] {
                return Err(MapError::Invalid(format!("pinching blocks are not a partition of 0..{dim}")));
            }
            seen[i] = true;
        }
        if dim == 0 || seen.iter().any(|s| !s) || blocks.iter().any(Vec::is_empty) {
            return Err(MapError::Invalid(format!("pinching blocks are not a partition of 0..{dim}")));
        }
        Ok(Self {
            kind: MapKind::Pinching { dim, blocks },
            input_dim: dim,
            output_dim: dim,
            class: PositivityClass::CompletelyPositive,
        })
    }

    pub fn schur(correlation: CMatrix) -> Result<Self, MapError> {
        let c = hermitize(&correlation)?;
        let n = c.dim();
        let asym = operator_norm(&(c.as_matrix() - &correlation));
        if asym > 1e-12 {
            return Err(MapError::Invalid("Schur multiplier is not Hermitian".into()));
        }
        if (0..n).any(|i| (correlation[(i, i)] - C64::new(1.0, 0.0)).norm() > 1e-12) {
            return Err(MapError::Invalid("Schur multiplier must have unit diagonal".into()));
        }
        let lmin = c.min_eigenvalue();
        if lmin < -scaled_tolerance(1e-9, &[c.norm()]) {
            return Err(MapError::Invalid(format!("Schur multiplier is not PSD (λ_min = {lmin:e})")));
        }
        Ok(Self {
            kind: MapKind::Schur { correlation },
            input_dim: n,
            output_dim: n,
            class: PositivityClass::CompletelyPositive,
        })
    }

    pub fn vector_state(vector: CVector) -> Result<Self, MapError> {
        let n = vector.len();
        if n == 0 {
            return Err(MapError::Invalid("empty state vector".into()));
        }
        let residual = (vector.norm() - 1.0).abs();
        if residual > UNITALITY_TOL {
            return Err(MapError::NotUnital(residual));
        }
        Ok(Self {
            kind: MapKind::VectorState { vector },
            input_dim: n,
            output_dim: 1,
            class: PositivityClass::CompletelyPositive,
        })
    }

    pub fn partial_trace(left: usize, right: usize, traced: TracedFactor) -> Result<Self, MapError> {
        if left == 0 || right == 0 {
            return Err(MapError::Invalid("partial trace factors must be positive".into()));
        }
        let output_dim = match traced {
            TracedFactor::First => right,
            TracedFactor::Second => left,
        };
        Ok(Self {
            kind: MapKind::PartialTrace { left, right, traced },
            input_dim: left * right,
            output_dim,
            class: PositivityClass::CompletelyPositive,
        })
    }

    pub fn transpose_compose(inner: UnitalPositiveMap) -> Self {
        let (input_dim, output_dim) = (inner.input_dim, inner.output_dim);
        Self {
            kind: MapKind::TransposeCompose { inner: Box::new(inner) },
            input_dim,
            output_dim,
            class: PositivityClass::Positive,
        }
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn tag(&self) -> MapKindTag {
        match self.kind {
            MapKind::Kraus { .. } => MapKindTag::Kraus,
            MapKind::Pinching { .. } => MapKindTag::Pinching,
            MapKind::Schur { .. } => MapKindTag::Schur,
            MapKind::VectorState { .. } => MapKindTag::VectorState,
            MapKind::PartialTrace { .. } => MapKindTag::PartialTrace,
            MapKind::TransposeCompose { .. } => MapKindTag::TransposeCompose,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn class(&self) -> PositivityClass {
        self.class
    }

    /// Applies the map to an arbitrary square matrix.
    pub fn apply(&self, t: &CMatrix) -> Result<CMatrix, MapError> {
        let n = self.input_dim;
        if t.nrows() != n || t.ncols() != n {
            return Err(MapError::DimensionMismatch {
                expected: n,
                got: if t.nrows() != n { t.nrows() } else { t.ncols() },
            });
        }
        Ok(match &self.kind {
            MapKind::Kraus { operators } => operators
                .iter()
                .fold(CMatrix::zeros(self.output_dim, self.output_dim), |acc, v| {
                    acc + v.adjoint() * t * v
                }),
            MapKind::Pinching { blocks, .. } => {
                let mut label = vec![0usize; n];
                for (b, block) in blocks.iter().enumerate() {
                    for &i in block {
                        label[i] = b;
                    }
                }
                CMatrix::from_fn(n, n, |i, j| {
                    if label[i] == label[j] {
                        t[(i, j)]
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
            }
            MapKind::Schur { correlation } => correlation.component_mul(t),
            MapKind::VectorState { vector } => {
                CMatrix::from_element(1, 1, vector.dotc(&(t * vector)))
            }
            MapKind::PartialTrace { left, right, traced } => {
                let (p, q) = (*left, *right);
                match traced {
                    TracedFactor::First => {
                        let s = C64::new(1.0 / p as f64, 0.0);
                        CMatrix::from_fn(q, q, |j, l| {
                            (0..p).map(|i| t[(i * q + j, i * q + l)]).sum::<C64>() * s
                        })
                    }
                    TracedFactor::Second => {
                        let s = C64::new(1.0 / q as f64, 0.0);
                        CMatrix::from_fn(p, p, |i, k| {
                            (0..q).map(|j| t[(i * q + j, k * q + j)]).sum::<C64>() * s
                        })
                    }
                }
            }
            MapKind::TransposeCompose { inner } => inner.apply(&t.transpose())?,
        })
    }

    /// Applies the map to a Hermitian matrix; the result is re-symmetrized.
    pub fn apply_hermitian(&self, h: &HermitianMatrix) -> Result<HermitianMatrix, MapError> {
        Ok(herm(&self.apply(h.as_matrix())?))
    }

    /// `‖Φ(I) − I‖`.
    pub fn unitality_residual(&self) -> f64 {
        let out = self
            .apply(&CMatrix::identity(self.input_dim, self.input_dim))
            .expect("identity has the input dimension");
        operator_norm(&(out - CMatrix::identity(self.output_dim, self.output_dim)))
    }
}

/// Normalizes an arbitrary Kraus seed: `W_i = V_i S^{-1/2}` with `S = Σ V_i* V_i`.
pub fn unitalize_kraus(raw: Vec<CMatrix>) -> Result<UnitalPositiveMap, MapError> {
    let first = raw.first().ok_or_else(|| MapError::Invalid("empty Kraus list".into()))?;
    let shape = first.shape();
    if raw.iter().any(|v| v.shape() != shape) || shape.0 == 0 || shape.1 == 0 {
        return Err(MapError::Invalid("Kraus operators must share one non-empty shape".into()));
    }
    let s = herm(&kraus_gram(&raw));
    let scale = s.norm();
    let inv_half = inv_sqrt_pd(&s, Some(scaled_tolerance(1e-10, &[scale])))
        .map_err(|_| MapError::DegenerateKraus(s.min_eigenvalue()))?;
    UnitalPositiveMap::kraus(raw.iter().map(|v| v * inv_half.as_matrix()).collect())
}

fn smallest_factor(n: usize) -> Option<usize> {
    (2..n).take_while(|p| p * p <= n).find(|p| n.is_multiple_of(*p))
}

/// Random unital Kraus map on `C^n` with `count` operators.
pub fn random_kraus<R: Rng + ?Sized>(
    n: usize,
    count: usize,
    field: Field,
    rng: &mut R,
) -> Result<UnitalPositiveMap, MapError> {
    let raw = (0..count.max(1)).map(|_| ginibre(n, n, field, rng)).collect();
    unitalize_kraus(raw)
}

/// Random correlation matrix `D^{-1/2} G G* D^{-1/2}`.
pub fn random_correlation<R: Rng + ?Sized>(n: usize, field: Field, rng: &mut R) -> CMatrix {
    let rank = rng.random_range(1..=n);
    let g = ginibre(n, rank, field, rng);
    let gram = &g * g.adjoint();
    let d: Vec<f64> = (0..n).map(|i| gram[(i, i)].re.max(1e-300).sqrt()).collect();
    let mut c = CMatrix::from_fn(n, n, |i, j| gram[(i, j)] / C64::new(d[i] * d[j], 0.0));
    for i in 0..n {
        c[(i, i)] = C64::new(1.0, 0.0);
    }
    herm(&c).into_matrix()
}

/// Builds a random map of the requested kind on `C^n`.
pub fn random_map_rng<R: Rng + ?Sized>(
    kind: MapKindTag,
    n: usize,
    field: Field,
    rng: &mut R,
) -> Result<UnitalPositiveMap, MapError> {
    check_dim(n)?;
    if !kind.available_in(n) {
        return Err(MapError::UnsupportedKind { kind, n });
    }
    match kind {
        MapKindTag::Kraus => {
            let count = rng.random_range(1..=4);
            random_kraus(n, count, field, rng)
        }
        MapKindTag::Pinching => {
            let parts = rng.random_range(1..=n);
            let mut blocks = vec![Vec::new(); parts];
            // every block gets at least one index
            let mut order: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.random_range(0..=i);
                order.swap(i, j);
            }
            for (slot, &i) in order.iter().enumerate() {
                let b = if slot < parts { slot } else { rng.random_range(0..parts) };
                blocks[b].push(i);
            }
            for b in &mut blocks {
                b.sort_unstable();
            }
            UnitalPositiveMap::pinching(n, blocks)
        }
        MapKindTag::Schur => UnitalPositiveMap::schur(random_correlation(n, field, rng)),
        MapKindTag::VectorState => UnitalPositiveMap::vector_state(random_unit_vector(n, field, rng)),
        MapKindTag::PartialTrace => {
            let p = smallest_factor(n).expect("checked availability");
            let traced = if rng.random_bool(0.5) {
                TracedFactor::First
            } else {
                TracedFactor::Second
            };
            UnitalPositiveMap::partial_trace(p, n / p, traced)
        }
        MapKindTag::TransposeCompose => {
            let inner_kinds = [
                MapKindTag::Kraus,
                MapKindTag::Pinching,
                MapKindTag::Schur,
                MapKindTag::VectorState,
            ];
            let inner = inner_kinds[rng.random_range(0..inner_kinds.len())];
            Ok(UnitalPositiveMap::transpose_compose(random_map_rng(inner, n, field, rng)?))
        }
    }
}

pub fn random_map(kind: MapKindTag, n: usize, seed: u64) -> Result<UnitalPositiveMap, MapError> {
    random_map_rng(kind, n, Field::Complex, &mut rng_from_seed(seed))
}

/// Two square partial isometries whose final spaces (ranges) are orthogonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PairRepr", into = "PairRepr")]
pub struct PartialIsometryPair {
    x: CMatrix,
    y: CMatrix,
    rank_x: usize,
    rank_y: usize,
}

#[derive(Serialize, Deserialize)]
struct PairRepr {
    #[serde(with = "serde_matrix")]
    x: CMatrix,
    #[serde(with = "serde_matrix")]
    y: CMatrix,
    rank_x: usize,
    rank_y: usize,
}

impl From<PartialIsometryPair> for PairRepr {
    fn from(p: PartialIsometryPair) -> Self {
        PairRepr {
            x: p.x,
            y: p.y,
            rank_x: p.rank_x,
            rank_y: p.rank_y,
        }
    }
}

impl TryFrom<PairRepr> for PartialIsometryPair {
    type Error = MapError;

    fn try_from(r: PairRepr) -> Result<Self, Self::Error> {
        PartialIsometryPair::new(r.x, r.y, r.rank_x, r.rank_y)
    }
}

/// Invariant tolerance for partial isometries.
pub const ISOMETRY_TOL: f64 = 1e-9;

impl PartialIsometryPair {
    /// Validates `XX*X = X`, `YY*Y = Y`, `(XX*)(YY*) = 0` and the ranks.
    pub fn new(x: CMatrix, y: CMatrix, rank_x: usize, rank_y: usize) -> Result<Self, MapError> {
        let n = x.nrows();
        if x.shape() != (n, n) || y.shape() != (n, n) || n == 0 {
            return Err(MapError::Invalid("partial isometries must be square and of equal size".into()));
        }
        if rank_x + rank_y > n {
            return Err(MapError::RankOverflow { n, rank_x, rank_y });
        }
        let px = &x * x.adjoint();
        let py = &y * y.adjoint();
        let checks = [
            operator_norm(&(&px * &x - &x)),
            operator_norm(&(&py * &y - &y)),
            operator_norm(&(&px * &py)),
            (px.trace().re - rank_x as f64).abs(),
            (py.trace().re - rank_y as f64).abs(),
        ];
        if checks.iter().any(|&c| c > ISOMETRY_TOL) {
            return Err(MapError::Invalid(format!("partial-isometry invariants violated: {checks:?}")));
        }
        Ok(Self { x, y, rank_x, rank_y })
    }

    pub fn x(&self) -> &CMatrix {
        &self.x
    }

    pub fn y(&self) -> &CMatrix {
        &self.y
    }

    pub fn rank_x(&self) -> usize {
        self.rank_x
    }

    pub fn rank_y(&self) -> usize {
        self.rank_y
    }

    pub fn dim(&self) -> usize {
        self.x.nrows()
    }

    /// `(V X U_x, V Y U_y)`: a common rotation of the final spaces and
    /// independent rotations of the initial spaces preserve every invariant.
    pub fn rotated(&self, v: &CMatrix, ux: &CMatrix, uy: &CMatrix) -> Result<Self, MapError> {
        Self::new(v * &self.x * ux, v * &self.y * uy, self.rank_x, self.rank_y)
    }
}

/// `X = W E₁ U₁`, `Y = W E₂ U₂` with Haar `W, U₁, U₂` and disjoint
/// coordinate projections `E₁, E₂`.
pub fn random_partial_isometry_pair_rng<R: Rng + ?Sized>(
    n: usize,
    rank_x: usize,
    rank_y: usize,
    field: Field,
    rng: &mut R,
) -> Result<PartialIsometryPair, MapError> {
    check_dim(n)?;
    if rank_x + rank_y > n {
        return Err(MapError::RankOverflow { n, rank_x, rank_y });
    }
    let w = haar_unitary(n, field, rng);
    let u1 = haar_unitary(n, field, rng);
    let u2 = haar_unitary(n, field, rng);
    let projector = |range: std::ops::Range<usize>| {
        CMatrix::from_fn(n, n, |i, j| {
            if i == j && range.contains(&i) {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    };
    let e1 = projector(0..rank_x);
    let e2 = projector(rank_x..rank_x + rank_y);
    PartialIsometryPair::new(&w * e1 * u1, &w * e2 * u2, rank_x, rank_y)
}

pub fn random_partial_isometry_pair(
    n: usize,
    rank_x: usize,
    rank_y: usize,
    seed: u64,
) -> Result<PartialIsometryPair, MapError> {
    random_partial_isometry_pair_rng(n, rank_x, rank_y, Field::Complex, &mut rng_from_seed(seed))
}

fn is_psd_within(h: &HermitianMatrix) -> bool {
    h.min_eigenvalue() >= -scaled_tolerance(1e-9, &[h.norm()])
}

/// Sampled positivity check: `Φ(P) ⪰ 0` on `trials` random PSD `P`, plus
/// the 2x2 block criterion when the map is declared 2-positive.
pub fn verify_positive_sampled(map: &UnitalPositiveMap, trials: usize, seed: u64) -> bool {
    let mut rng = rng_from_seed(seed);
    let n = map.input_dim();
    for _ in 0..trials {
        let rank = rng.random_range(1..=n);
        let p = random_psd(n, rank, Field::Complex, &mut rng);
        match map.apply_hermitian(&p) {
            Ok(out) if is_psd_within(&out) => {}
            _ => return false,
        }
    }
    if map.class().satisfies(PositivityClass::TwoPositive) {
        return verify_two_positive_sampled(map, trials, seed ^ 0x2b1c_5a3d_7e4f_9061);
    }
    true
}

/// Applies the map blockwise to random PSD `2n × 2n` matrices and checks the
/// image is PSD, regardless of the declared class.
pub fn verify_two_positive_sampled(map: &UnitalPositiveMap, trials: usize, seed: u64) -> bool {
    let mut rng = rng_from_seed(seed);
    let n = map.input_dim();
    let k = map.output_dim();
    for _ in 0..trials {
        let rank = rng.random_range(1..=2 * n);
        let z = random_psd(2 * n, rank, Field::Complex, &mut rng).into_matrix();
        let mut image = CMatrix::zeros(2 * k, 2 * k);
        for bi in 0..2 {
            for bj in 0..2 {
                let block = z.view((bi * n, bj * n), (n, n)).into_owned();
                let out = match map.apply(&block) {
                    Ok(o) => o,
                    Err(_) => return false,
                };
                image.view_mut((bi * k, bj * k), (k, k)).copy_from(&out);
            }
        }
        if !is_psd_within(&herm(&image)) {
            return false;
        }
    }
    true
}

/// A single random unitary (exposed for perturbation moves).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, field: Field, rng: &mut R) -> CMatrix {
    haar_unitary(n, field, rng)
}
