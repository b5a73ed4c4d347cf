use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{
    evaluate_gamma_family, gamma_ratio_svd_route, verify_counterexample, Certificate, EvalOptions, InstanceBundle,
    StatementId,
};

use super::generate::generate_instance;
use super::refine::{refine, Objective};
use super::sweep::{with_pool, CHUNK, MAX_ATTEMPTS, REFINE_SALT};
use super::{derive_instance_seed, SearchConfig, SearchState};

/// Equal-width ratio bins on `[0, 1)` plus one overflow bin for `≥ 1`.
pub const HISTOGRAM_BINS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Statement is fixed to the conjecture; `budget` is the trial count.
    pub search: SearchConfig,
    /// Checkpoint (and refine the best instance) every this many indices.
    pub checkpoint_every: u64,
}

impl ProbeConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            search: SearchConfig::new(StatementId::S27, trials, seed).with_refinement(200, 0.1),
            checkpoint_every: 1000,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.search.statement != StatementId::S27 {
            return Err("the conjecture probe runs on S27 only".into());
        }
        if self.checkpoint_every == 0 {
            return Err("checkpoint interval must be at least 1".into());
        }
        self.search.validate_allow_empty()
    }
}

#[derive(Clone, Debug, Default)]
pub struct ProbeOptions {
    pub workers: Option<usize>,
    /// Continue from the checkpoint file if it exists.
    pub resume: bool,
    /// Stop after this many indices in this invocation (checkpointing first).
    pub halt_after: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub holds: u64,
    pub violations: u64,
    pub max_ratio: Option<f64>,
    pub min_margin: Option<f64>,
}

impl ChannelStats {
    fn record(&mut self, c: &Certificate) {
        if c.holds() {
            self.holds += 1;
        } else {
            self.violations += 1;
        }
        self.max_ratio = Some(self.max_ratio.map_or(c.ratio, |r| r.max(c.ratio)));
        self.min_margin = Some(self.min_margin.map_or(c.margin, |m| m.min(c.margin)));
    }
}

/// Conjecture ratio distribution for one dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimHistogram {
    pub count: u64,
    pub max_ratio: f64,
    /// `HISTOGRAM_BINS` bins on `[0, 1)` followed by the `≥ 1` bin.
    pub bins: Vec<u64>,
}

impl Default for DimHistogram {
    fn default() -> Self {
        Self {
            count: 0,
            max_ratio: 0.0,
            bins: vec![0; HISTOGRAM_BINS + 1],
        }
    }
}

impl DimHistogram {
    fn record(&mut self, ratio: f64) {
        self.count += 1;
        self.max_ratio = self.max_ratio.max(ratio);
        let bin = if ratio >= 1.0 {
            HISTOGRAM_BINS
        } else {
            ((ratio.max(0.0) * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1)
        };
        self.bins[bin] += 1;
    }
}

/// A verified instance with `‖Γ‖ > c²(1 + τ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjectureViolation {
    pub certificate: Certificate,
    pub instance: InstanceBundle,
    /// `‖Γ‖/c²` recomputed with SVD pseudoinverses.
    pub svd_ratio: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProbeState {
    /// Conjecture channel; its best instance is the refinement seed point.
    pub search: SearchState,
    pub s28: ChannelStats,
    pub s29: ChannelStats,
    pub histogram: BTreeMap<usize, DimHistogram>,
    pub refinements: u64,
    pub violation: Option<ConjectureViolation>,
}

impl ProbeState {
    pub fn max_ratio(&self) -> Option<f64> {
        self.search.best_ratio
    }

    pub fn without_timing(&self) -> Self {
        Self {
            search: self.search.without_timing(),
            ..self.clone()
        }
    }
}

/// On-disk checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config: ProbeConfig,
    pub state: ProbeState,
    pub best_instance: Option<InstanceBundle>,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Self, ProbeError> {
        let text = fs::read_to_string(path).map_err(|e| ProbeError::Io(path.to_path_buf(), e))?;
        serde_json::from_str(&text).map_err(|e| ProbeError::Corrupt(path.to_path_buf(), e.to_string()))
    }

    /// Writes to a sibling temporary file and renames it into place.
    pub fn store(&self, path: &Path) -> Result<(), ProbeError> {
        let io = |e| ProbeError::Io(path.to_path_buf(), e);
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        let json = serde_json::to_string(self).expect("checkpoint serializes");
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(json.as_bytes()).map_err(io)?;
        f.sync_all().map_err(io)?;
        fs::rename(&tmp, path).map_err(io)
    }
}

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("invalid probe configuration: {0}")]
    Config(String),
    #[error("checkpoint {0} is corrupt: {1}")]
    Corrupt(PathBuf, String),
    #[error("checkpoint {0} was written for a different configuration")]
    ConfigMismatch(PathBuf),
    #[error("I/O error on {0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
}

#[derive(Clone, Debug)]
pub struct ProbeOutcome {
    pub config: ProbeConfig,
    pub state: ProbeState,
    /// Stopped early through `halt_after`.
    pub halted: bool,
}

struct ProbeResult {
    index: u64,
    rejects: u64,
    scored: Option<([Certificate; 3], InstanceBundle)>,
}

fn probe_index(cfg: &SearchConfig, index: u64) -> ProbeResult {
    let base = derive_instance_seed(cfg.seed, index);
    let opts = EvalOptions::default();
    let mut rejects = 0;
    for attempt in 0..MAX_ATTEMPTS {
        let seed = if attempt == 0 { base } else { derive_instance_seed(base, attempt) };
        let scored = generate_instance(StatementId::S27, &cfg.sampler, seed)
            .and_then(|inst| evaluate_gamma_family(&inst, &opts).map(|c| (c, inst)));
        match scored {
            Ok(pair) => {
                return ProbeResult {
                    index,
                    rejects,
                    scored: Some(pair),
                }
            }
            Err(_) => rejects += 1,
        }
    }
    ProbeResult {
        index,
        rejects,
        scored: None,
    }
}

/// A conjecture violation must survive the strict re-evaluation and the
/// independent SVD route.
fn confirm(inst: &InstanceBundle) -> Option<ConjectureViolation> {
    let strict = verify_counterexample(StatementId::S27, inst)?;
    let svd_ratio = gamma_ratio_svd_route(inst).ok()?;
    (svd_ratio > 1.0 + strict.tolerance / inst.window?.wielandt_constant()).then_some(ConjectureViolation {
        certificate: strict,
        instance: inst.clone(),
        svd_ratio,
    })
}

/// Long-running sweep of the conjecture with the two conditional bounds as
/// secondary channels.
///
/// The best-ratio instance is refined at every multiple of
/// `checkpoint_every` and at the end; the state is checkpointed at the same
/// points. Both depend only on absolute indices, so a resumed run continues
/// exactly as an uninterrupted one. A verified violation is recorded and the
/// probe carries on.
pub fn probe_conjecture(
    cfg: &ProbeConfig,
    checkpoint: Option<&Path>,
    opts: &ProbeOptions,
) -> Result<ProbeOutcome, ProbeError> {
    cfg.validate().map_err(ProbeError::Config)?;
    let started = Instant::now();
    let mut state = ProbeState::default();
    if let (true, Some(path)) = (opts.resume, checkpoint) {
        if path.exists() {
            let cp = Checkpoint::load(path)?;
            if cp.config != *cfg {
                return Err(ProbeError::ConfigMismatch(path.to_path_buf()));
            }
            state = cp.state;
        }
    }
    let base_clock = state.search.wall_clock_secs;
    let search = &cfg.search;
    let budget = search.budget;
    let stop_at = opts.halt_after.map_or(budget, |h| (state.search.next_index + h).min(budget));
    let objective = Objective::Ratio;
    let mut halted = false;
    with_pool(opts.workers, || -> Result<(), ProbeError> {
        while state.search.next_index < budget {
            if state.search.next_index >= stop_at {
                halted = true;
                break;
            }
            let lo = state.search.next_index;
            let boundary = (lo / cfg.checkpoint_every + 1) * cfg.checkpoint_every;
            let hi = (lo + CHUNK).min(boundary).min(budget).min(stop_at);
            let batch: Vec<ProbeResult> = (lo..hi).into_par_iter().map(|i| probe_index(search, i)).collect();
            for r in batch {
                state.search.next_index = r.index + 1;
                state.search.rejects += r.rejects;
                let Some(([c27, c28, c29], inst)) = r.scored else { continue };
                state.search.record(&c27, &inst, objective);
                state.s28.record(&c28);
                state.s29.record(&c29);
                state.histogram.entry(c27.dim).or_default().record(c27.ratio);
                if c27.violated() && state.violation.is_none() {
                    state.violation = confirm(&inst);
                }
            }
            let at_boundary = hi.is_multiple_of(cfg.checkpoint_every) || hi == budget;
            if at_boundary {
                refine_best(cfg, hi, &mut state);
            }
            if at_boundary || hi == stop_at {
                if let Some(path) = checkpoint {
                    state.search.wall_clock_secs = base_clock + started.elapsed().as_secs_f64();
                    store(cfg, &state, path)?;
                }
            }
        }
        Ok(())
    })?;
    state.search.wall_clock_secs = base_clock + started.elapsed().as_secs_f64();
    Ok(ProbeOutcome {
        config: cfg.clone(),
        state,
        halted,
    })
}

fn store(cfg: &ProbeConfig, state: &ProbeState, path: &Path) -> Result<(), ProbeError> {
    Checkpoint {
        config: cfg.clone(),
        state: state.clone(),
        best_instance: state.search.best_instance.clone(),
    }
    .store(path)
}

fn refine_best(cfg: &ProbeConfig, boundary: u64, state: &mut ProbeState) {
    let search = &cfg.search;
    if search.refine_steps == 0 || search.step_scale == 0.0 {
        return;
    }
    let Some(best) = state.search.best_instance.clone() else { return };
    let seed = derive_instance_seed(search.seed ^ REFINE_SALT, boundary);
    let refined = refine(StatementId::S27, &best, search.refine_steps, search.step_scale, seed);
    state.refinements += 1;
    if let Ok([c27, _, _]) = evaluate_gamma_family(&refined, &EvalOptions::default()) {
        state.search.observe(&c27, &refined, Objective::Ratio);
        if c27.violated() && state.violation.is_none() {
            state.violation = confirm(&refined);
        }
    }
}
