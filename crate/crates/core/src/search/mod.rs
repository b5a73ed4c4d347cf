//! Seeded sweeps, hill-climbing refinement, counterexample hunts and the
//! checkpointed conjecture probe.

mod conjecture;
mod generate;
mod refine;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::catalog::{Certificate, InstanceBundle, StatementId};

pub use conjecture::{
    probe_conjecture, Checkpoint, ChannelStats, ConjectureViolation, DimHistogram, ProbeConfig, ProbeError,
    ProbeOptions, ProbeOutcome, ProbeState, HISTOGRAM_BINS,
};
pub use generate::{generate_instance, DimRange, SamplerConfig};
pub use refine::{refine, refine_detailed, Objective, Refined};
pub use sweep::{evaluate_index, sweep, Counterexample, IndexResult, SweepOptions, SweepOutcome, MAX_ATTEMPTS};

/// Per-instance seed: a splitmix64 finalizer applied to `master ⊕ index`.
/// The finalizer is a bijection, so distinct indices under one master never
/// collide.
pub fn derive_instance_seed(master: u64, index: u64) -> u64 {
    let mut z = (master ^ index).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub statement: StatementId,
    pub sampler: SamplerConfig,
    /// Number of instances to evaluate.
    pub budget: u64,
    pub refine_steps: usize,
    pub step_scale: f64,
    pub seed: u64,
}

impl SearchConfig {
    pub fn new(statement: StatementId, budget: u64, seed: u64) -> Self {
        Self {
            statement,
            sampler: SamplerConfig::default(),
            budget,
            refine_steps: 0,
            step_scale: 0.1,
            seed,
        }
    }

    pub fn with_refinement(mut self, steps: usize, step_scale: f64) -> Self {
        self.refine_steps = steps;
        self.step_scale = step_scale;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.budget == 0 {
            return Err("budget must be at least 1".into());
        }
        self.validate_allow_empty()
    }

    fn validate_allow_empty(&self) -> Result<(), String> {
        self.sampler.validate()?;
        if !(self.step_scale.is_finite() && self.step_scale >= 0.0) {
            return Err(format!("step scale must be finite and non-negative, got {}", self.step_scale));
        }
        Ok(())
    }
}

/// Running aggregate of a sweep.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchState {
    /// Next instance index to draw (the RNG counter).
    pub next_index: u64,
    /// Instances evaluated to a certificate.
    pub evaluated: u64,
    /// Generated instances that could not be scored and were redrawn.
    pub rejects: u64,
    pub holds: u64,
    pub violations: u64,
    pub best_ratio: Option<f64>,
    /// Most negative margin seen; never increases.
    pub best_margin: Option<f64>,
    /// Objective value of `best_instance`.
    pub best_score: Option<f64>,
    pub best_instance: Option<InstanceBundle>,
    pub best_certificate: Option<Certificate>,
    pub wall_clock_secs: f64,
}

impl SearchState {
    /// Folds one scored instance into the aggregate.
    pub fn record(&mut self, cert: &Certificate, inst: &InstanceBundle, objective: Objective) {
        self.evaluated += 1;
        if cert.holds() {
            self.holds += 1;
        } else {
            self.violations += 1;
        }
        self.observe(cert, inst, objective);
    }

    /// Updates the extremes without counting a new instance (refinements).
    pub fn observe(&mut self, cert: &Certificate, inst: &InstanceBundle, objective: Objective) {
        self.best_ratio = Some(self.best_ratio.map_or(cert.ratio, |r| r.max(cert.ratio)));
        self.best_margin = Some(self.best_margin.map_or(cert.margin, |m| m.min(cert.margin)));
        let score = objective.score(cert);
        if self.best_score.is_none_or(|s| score > s) {
            self.best_score = Some(score);
            self.best_instance = Some(inst.clone());
            self.best_certificate = Some(cert.clone());
        }
    }

    /// Attempts, counting rejected draws.
    pub fn trials(&self) -> u64 {
        self.holds + self.violations + self.rejects
    }

    /// Copy with the wall clock zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_clock_secs: 0.0,
            ..self.clone()
        }
    }
}
