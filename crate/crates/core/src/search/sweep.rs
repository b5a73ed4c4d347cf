use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{evaluate, statement, verify_counterexample, Certificate, InstanceBundle, StatementClass};

use super::generate::generate_instance;
use super::refine::{refine_detailed, Objective};
use super::{derive_instance_seed, SearchConfig, SearchState};

/// Draws per instance index before the index is recorded as unscorable.
pub const MAX_ATTEMPTS: u64 = 64;

/// Indices evaluated per parallel batch. Fixed, so batching never depends
/// on the worker count.
pub(crate) const CHUNK: u64 = 256;

/// Salt separating refinement seeds from instance seeds.
pub(crate) const REFINE_SALT: u64 = 0x5EED_0F0F_2E71_4E00;

/// Largest number of theorem violations kept in full.
const MAX_RECORDED_VIOLATIONS: usize = 16;

#[derive(Clone, Debug, Default)]
pub struct SweepOptions {
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Keep every certificate in the outcome.
    pub keep_certificates: bool,
    /// Evaluate the whole budget even after a counterexample is found.
    pub exhaustive: bool,
}

/// A violating instance together with its certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub certificate: Certificate,
    pub instance: InstanceBundle,
    /// Survived re-evaluation at the strict tolerance with margin below
    /// `−10τ`.
    pub reverified: bool,
    /// Found by refinement rather than by the plain sweep.
    pub refined: bool,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub state: SearchState,
    pub certificates: Vec<Certificate>,
    /// First verified counterexample of a statement expected to fail.
    pub counterexample: Option<Counterexample>,
    /// Violations of asserted statements (first few kept in full).
    pub violations: Vec<Counterexample>,
    /// Best instance after refinement, when refinement ran.
    pub refined: Option<Counterexample>,
}

/// Outcome of one instance index.
#[derive(Clone, Debug)]
pub struct IndexResult {
    pub index: u64,
    pub rejects: u64,
    pub scored: Option<(Certificate, InstanceBundle)>,
}

/// Generates and scores instance `index`, redrawing rejected instances from
/// derived seeds.
pub fn evaluate_index(cfg: &SearchConfig, index: u64) -> IndexResult {
    let base = derive_instance_seed(cfg.seed, index);
    let mut rejects = 0;
    for attempt in 0..MAX_ATTEMPTS {
        let seed = if attempt == 0 { base } else { derive_instance_seed(base, attempt) };
        let scored = generate_instance(cfg.statement, &cfg.sampler, seed)
            .and_then(|inst| evaluate(cfg.statement, &inst).map(|c| (c, inst)));
        match scored {
            Ok(pair) => {
                return IndexResult {
                    index,
                    rejects,
                    scored: Some(pair),
                }
            }
            Err(_) => rejects += 1,
        }
    }
    IndexResult {
        index,
        rejects,
        scored: None,
    }
}

pub(crate) fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// Evaluates `cfg.budget` instances.
///
/// Asserted statements record every violation; statements expected to fail
/// stop at the first violation that survives strict re-verification unless
/// `opts.exhaustive` is set. With
/// `refine_steps > 0` the best instance (or the counterexample) is refined
/// afterwards. Results are merged in index order, so the outcome does not
/// depend on the worker count.
pub fn sweep(cfg: &SearchConfig, opts: &SweepOptions) -> SweepOutcome {
    let started = Instant::now();
    let st = statement(cfg.statement);
    let objective = Objective::for_statement(cfg.statement);
    let hunting = st.class == StatementClass::False;
    let mut out = SweepOutcome {
        state: SearchState::default(),
        certificates: Vec::new(),
        counterexample: None,
        violations: Vec::new(),
        refined: None,
    };
    with_pool(opts.workers, || {
        'outer: while out.state.next_index < cfg.budget {
            let lo = out.state.next_index;
            let hi = (lo + CHUNK).min(cfg.budget);
            let batch: Vec<IndexResult> = (lo..hi).into_par_iter().map(|i| evaluate_index(cfg, i)).collect();
            for r in batch {
                out.state.next_index = r.index + 1;
                out.state.rejects += r.rejects;
                let Some((cert, inst)) = r.scored else { continue };
                out.state.record(&cert, &inst, objective);
                if opts.keep_certificates {
                    out.certificates.push(cert.clone());
                }
                if cert.violated() {
                    if hunting {
                        if out.counterexample.is_none() {
                            if let Some(strict) = verify_counterexample(cfg.statement, &inst) {
                                out.counterexample = Some(Counterexample {
                                    certificate: strict,
                                    instance: inst,
                                    reverified: true,
                                    refined: false,
                                });
                                if !opts.exhaustive {
                                    break 'outer;
                                }
                            }
                        }
                    } else if out.violations.len() < MAX_RECORDED_VIOLATIONS {
                        out.violations.push(Counterexample {
                            reverified: verify_counterexample(cfg.statement, &inst).is_some(),
                            certificate: cert,
                            instance: inst,
                            refined: false,
                        });
                    }
                }
            }
        }
    });
    if cfg.refine_steps > 0 && cfg.step_scale > 0.0 {
        refine_phase(cfg, objective, hunting, &mut out);
    }
    out.state.wall_clock_secs = started.elapsed().as_secs_f64();
    out
}

fn refine_phase(cfg: &SearchConfig, objective: Objective, hunting: bool, out: &mut SweepOutcome) {
    let start = match (&out.counterexample, &out.state.best_instance) {
        (Some(cx), _) => cx.instance.clone(),
        (None, Some(best)) => best.clone(),
        (None, None) => return,
    };
    let seed = derive_instance_seed(cfg.seed ^ REFINE_SALT, cfg.budget);
    let r = refine_detailed(cfg.statement, &start, cfg.refine_steps, cfg.step_scale, seed);
    let Some(cert) = r.certificate else { return };
    out.state.observe(&cert, &r.instance, objective);
    let reverified = cert.violated() && verify_counterexample(cfg.statement, &r.instance).is_some();
    let record = Counterexample {
        certificate: cert.clone(),
        instance: r.instance,
        reverified,
        refined: true,
    };
    if hunting && reverified {
        let deeper = out
            .counterexample
            .as_ref()
            .is_none_or(|cx| objective.score(&cert) > objective.score(&cx.certificate));
        if deeper {
            out.counterexample = Some(record.clone());
        }
    } else if !hunting && cert.violated() && out.violations.len() < MAX_RECORDED_VIOLATIONS {
        out.violations.push(record.clone());
    }
    out.refined = Some(record);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::StatementId;

    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = SearchConfig::new(StatementId::S17, 600, 42);
        let opts1 = SweepOptions {
            workers: Some(1),
            keep_certificates: true,
            ..SweepOptions::default()
        };
        let opts4 = SweepOptions {
            workers: Some(4),
            keep_certificates: true,
            ..SweepOptions::default()
        };
        let a = sweep(&cfg, &opts1);
        let b = sweep(&cfg, &opts4);
        assert_eq!(a.certificates, b.certificates);
        assert_eq!(a.state.without_timing(), b.state.without_timing());
    }

    #[test]
    fn best_margin_is_the_running_minimum() {
        let cfg = SearchConfig::new(StatementId::S02, 300, 3);
        let out = sweep(
            &cfg,
            &SweepOptions {
                keep_certificates: true,
                ..SweepOptions::default()
            },
        );
        let min = out.certificates.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
        assert_eq!(out.state.best_margin, Some(min));
        assert_eq!(out.state.trials(), out.state.evaluated + out.state.rejects);
    }

    #[test]
    fn norm_product_hunt_stops_at_first_counterexample() {
        let cfg = SearchConfig::new(StatementId::S14, 100_000, 1);
        let out = sweep(&cfg, &SweepOptions::default());
        let cx = out.counterexample.expect("counterexample");
        assert!(cx.reverified);
        assert!(cx.certificate.margin < -10.0 * 1e-9);
        assert!(out.state.next_index < 1000);
    }

    #[test]
    fn exhaustive_hunt_runs_the_whole_budget() {
        let cfg = SearchConfig::new(StatementId::S14, 300, 1);
        let out = sweep(
            &cfg,
            &SweepOptions {
                exhaustive: true,
                ..SweepOptions::default()
            },
        );
        assert!(out.counterexample.is_some());
        assert_eq!(out.state.next_index, 300);
        assert!(out.state.violations > 1);
    }

    #[test]
    fn operator_kantorovich_has_no_violations() {
        let cfg = SearchConfig::new(StatementId::S12, 2000, 9);
        let out = sweep(&cfg, &SweepOptions::default());
        assert_eq!(out.state.violations, 0);
        assert!(out.state.best_ratio.unwrap() <= 1.0);
    }
}
