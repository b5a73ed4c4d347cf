use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{statement, EvalError, InstanceBundle, Slot, Statement, StatementId};
use crate::linalg::{operator_norm, CMatrix, HermitianMatrix};
use crate::maps::{random_map_rng, random_partial_isometry_pair_rng, MapKindTag};
use crate::random::{
    ginibre, random_orthonormal_pair, random_psd, random_unit_vector, random_with_spectrum_rng, rng_from_seed,
    sample_window, Field, InstanceRng, DEFAULT_ENDPOINT_PROB, MAX_DIM,
};

/// Inclusive dimension range, written `LO..HI` on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimRange {
    pub lo: usize,
    pub hi: usize,
}

impl DimRange {
    pub fn new(lo: usize, hi: usize) -> Result<Self, String> {
        if lo == 0 || hi > MAX_DIM || lo > hi {
            return Err(format!("dimension range {lo}..{hi} must satisfy 1 <= lo <= hi <= {MAX_DIM}"));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, n: usize) -> bool {
        (self.lo..=self.hi).contains(&n)
    }
}

impl Default for DimRange {
    fn default() -> Self {
        Self { lo: 2, hi: 8 }
    }
}

impl fmt::Display for DimRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl FromStr for DimRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad dimension `{t}`: {e}"));
        match s.split_once("..") {
            Some((lo, hi)) => {
                let hi = hi.strip_prefix('=').unwrap_or(hi);
                Self::new(parse(lo)?, parse(hi)?)
            }
            None => {
                let n = parse(s)?;
                Self::new(n, n)
            }
        }
    }
}

/// How random instances are drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub dims: DimRange,
    /// `M/m` is log-uniform in `[1, max_ratio]` with `m = 1`.
    pub max_ratio: f64,
    pub map_kinds: Vec<MapKindTag>,
    pub field: Field,
    pub endpoint_prob: f64,
    /// Fixed partial-isometry ranks; random in `1..=⌊n/2⌋` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<(usize, usize)>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            dims: DimRange::default(),
            max_ratio: 1e3,
            map_kinds: MapKindTag::ALL.to_vec(),
            field: Field::Complex,
            endpoint_prob: DEFAULT_ENDPOINT_PROB,
            ranks: None,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), String> {
        DimRange::new(self.dims.lo, self.dims.hi)?;
        if !(self.max_ratio.is_finite() && self.max_ratio >= 1.0) {
            return Err(format!("max ratio must be finite and >= 1, got {}", self.max_ratio));
        }
        if !(0.0..=1.0).contains(&self.endpoint_prob) {
            return Err(format!("endpoint probability must lie in [0, 1], got {}", self.endpoint_prob));
        }
        if let Some((rx, ry)) = self.ranks {
            if rx == 0 || ry == 0 {
                return Err("partial-isometry ranks must be positive".into());
            }
        }
        Ok(())
    }

    fn kinds_for(&self, st: &Statement, n: usize) -> Vec<MapKindTag> {
        let required = st.map_requirement.unwrap_or(crate::maps::PositivityClass::Positive);
        self.map_kinds
            .iter()
            .copied()
            .filter(|k| k.class().satisfies(required) && k.available_in(n))
            .collect()
    }

    /// Dimensions in range for which `st` can be instantiated.
    pub fn dims_for(&self, st: &Statement) -> Vec<usize> {
        (self.dims.lo.max(st.min_dim)..=self.dims.hi)
            .filter(|&n| !st.requires(Slot::Map) || !self.kinds_for(st, n).is_empty())
            .filter(|&n| match (st.requires(Slot::Pair), self.ranks) {
                (true, Some((rx, ry))) => rx + ry <= n,
                _ => true,
            })
            .collect()
    }
}

fn log_uniform<R: Rng + ?Sized>(lo: f64, hi: f64, rng: &mut R) -> f64 {
    10f64.powf(rng.random_range(lo.log10()..=hi.log10()))
}

fn power(h: &HermitianMatrix, p: f64) -> HermitianMatrix {
    h.map_spectrum(|l| l.max(0.0).powf(p))
}

/// `A + t‖A‖P` with `P` a random unit-norm PSD matrix of random rank.
fn dominating<R: Rng + ?Sized>(a: &HermitianMatrix, field: Field, rng: &mut R) -> HermitianMatrix {
    let n = a.dim();
    let rank = rng.random_range(1..=n);
    let t = log_uniform(1e-3, 1.0, rng);
    a.add(&random_psd(n, rank, field, rng).scale(t * a.norm()))
}

fn psd_operand<R: Rng + ?Sized>(n: usize, field: Field, rng: &mut R) -> HermitianMatrix {
    let rank = rng.random_range(1..=n);
    let s = log_uniform(0.1, 10.0, rng);
    random_psd(n, rank, field, rng).scale(s)
}

fn schwarz_factor<R: Rng + ?Sized>(n: usize, field: Field, rng: &mut R) -> CMatrix {
    if n >= 2 && rng.random_bool(0.5) {
        let r = rng.random_range(1..n);
        ginibre(n, r, field, rng) * ginibre(r, n, field, rng)
    } else {
        ginibre(n, n, field, rng)
    }
}

/// Draws one instance for statement `id` from `seed`.
///
/// The dimension, window and `A` are drawn first and in the same order for
/// every statement with an `A` slot, so statements sharing those slots see
/// the same operator for the same seed.
pub fn generate_instance(id: StatementId, cfg: &SamplerConfig, seed: u64) -> Result<InstanceBundle, EvalError> {
    let st = statement(id);
    let dims = cfg.dims_for(st);
    if dims.is_empty() {
        return Err(EvalError::InvalidInstance(format!(
            "no dimension in {} admits {id} with the allowed map kinds",
            cfg.dims
        )));
    }
    let mut rng = rng_from_seed(seed);
    let n = dims[rng.random_range(0..dims.len())];
    let field = cfg.field;
    let mut inst = InstanceBundle::new(seed);
    use StatementId::*;
    match id {
        S10 | S11 => {
            inst.a = Some(psd_operand(n, field, &mut rng));
            inst.b = Some(psd_operand(n, field, &mut rng));
        }
        S15 => {
            let x = ginibre(n, n, field, &mut rng);
            let delta = log_uniform(1e-6, 0.5, &mut rng);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            inst.level = Some(operator_norm(&x) * (1.0 + sign * delta));
            inst.t = Some(x);
        }
        S21 | S23 | S24 => {
            inst.map = Some(pick_map(cfg, st, n, &mut rng)?);
            let s = schwarz_factor(n, field, &mut rng);
            let t = ginibre(n, n, field, &mut rng);
            inst = inst.with_schwarz(s, t);
        }
        _ => {
            let w = sample_window(cfg.max_ratio, &mut rng);
            let a = random_with_spectrum_rng(&w, n, cfg.endpoint_prob, field, &mut rng)?;
            inst = inst.with_a(a, w);
            fill_a_statement(id, st, cfg, n, &mut inst, &mut rng)?;
        }
    }
    Ok(inst)
}

fn fill_a_statement(
    id: StatementId,
    st: &Statement,
    cfg: &SamplerConfig,
    n: usize,
    inst: &mut InstanceBundle,
    rng: &mut InstanceRng,
) -> Result<(), EvalError> {
    use StatementId::*;
    let field = cfg.field;
    if st.requires(Slot::Map) {
        inst.map = Some(pick_map(cfg, st, n, rng)?);
    }
    if st.requires(Slot::VectorY) {
        let (x, y) = random_orthonormal_pair(n, field, rng);
        inst.x = Some(x);
        inst.y = Some(y);
    } else if st.requires(Slot::VectorX) {
        inst.x = Some(random_unit_vector(n, field, rng));
    }
    if st.requires(Slot::Pair) {
        let (rx, ry) = match cfg.ranks {
            Some(r) => r,
            None => {
                let half = (n / 2).max(1);
                (rng.random_range(1..=half), rng.random_range(1..=half))
            }
        };
        inst.pair = Some(random_partial_isometry_pair_rng(n, rx, ry, field, rng)?);
    }
    let a = inst.a.clone().expect("A drawn");
    match id {
        S04 => {
            let wb = sample_window(cfg.max_ratio, rng);
            inst.b = Some(random_with_spectrum_rng(&wb, n, cfg.endpoint_prob, field, rng)?);
        }
        S05 | S08 | S25 => inst.b = Some(dominating(&a, field, rng)),
        S26 | S30 => {
            // B = (A^{1/p} + P)^p with P ⪰ 0 and p ≥ 1 keeps A♯B⁻¹ ⪯ I while
            // A ⪯ B fails for most p > 1.
            let p = if id == S30 && rng.random_bool(0.5) {
                1.0
            } else {
                rng.random_range(1.0..=2.0)
            };
            let root = power(&a, 1.0 / p);
            inst.b = Some(power(&dominating(&root, field, rng), p));
        }
        _ => {}
    }
    Ok(())
}

fn pick_map(
    cfg: &SamplerConfig,
    st: &Statement,
    n: usize,
    rng: &mut InstanceRng,
) -> Result<crate::maps::UnitalPositiveMap, EvalError> {
    let kinds = cfg.kinds_for(st, n);
    let kind = kinds[rng.random_range(0..kinds.len())];
    Ok(random_map_rng(kind, n, cfg.field, rng)?)
}
