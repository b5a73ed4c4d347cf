use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;
use thiserror::Error;

use kantolab_core::catalog::{statement, Certificate, InstanceBundle, StatementClass, StatementId, Value};
use kantolab_core::demo::run_demo;
use kantolab_core::report::{
    sig6, summary_table, CertificateRecord, ConjectureSummary, InstanceRecord, RecordKind, RecordWriter, RunReport,
    StatementSummary,
};
use kantolab_core::search::{
    probe_conjecture, sweep, Counterexample, ProbeConfig, ProbeError, ProbeOptions, SearchConfig, SweepOptions,
};

use crate::exit;
use crate::{ConjectureArgs, DemoArgs, SearchArgs, VerifyArgs};

/// `println!` that tolerates a closed stdout (e.g. piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(io::stdout(), $($arg)*);
    }};
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Corrupt(String),
    #[error("cannot write {0}: {1}")]
    Io(PathBuf, io::Error),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |e| CliError::Io(path.to_path_buf(), e)
}

fn write_report(path: Option<&Path>, report: &RunReport) -> Result<(), CliError> {
    if let Some(p) = path {
        fs::write(p, report.to_json() + "\n").map_err(io_err(p))?;
    }
    Ok(())
}

fn parse_statements(spec: &str) -> Result<Vec<StatementId>, CliError> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(StatementId::ALL.to_vec());
    }
    let ids = spec
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<StatementId>().map_err(|e| CliError::Usage(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    if ids.is_empty() {
        return Err(CliError::Usage("no statements selected".into()));
    }
    Ok(ids)
}

fn record(kind: RecordKind, cx: Counterexample) -> InstanceRecord {
    InstanceRecord {
        kind,
        reverified: cx.reverified,
        refined: cx.refined,
        certificate: cx.certificate,
        instance: cx.instance,
    }
}

fn instance_json(inst: &InstanceBundle) -> String {
    serde_json::to_string(inst).expect("instance serializes")
}

pub fn verify(args: VerifyArgs) -> Result<u8, CliError> {
    let started = Instant::now();
    let ids = parse_statements(&args.statements)?;
    let dims = args.common.dims;
    let opts = SweepOptions {
        workers: args.common.workers.map(|w| w as usize),
        keep_certificates: true,
        exhaustive: true,
    };
    let stdout = io::stdout();
    let (sink, sink_path): (Box<dyn Write>, PathBuf) = match &args.out {
        Some(p) => (Box::new(File::create(p).map_err(io_err(p))?), p.clone()),
        None => (Box::new(stdout.lock()), PathBuf::from("<stdout>")),
    };
    let mut writer = RecordWriter::new(args.format, BufWriter::new(sink));
    let mut report = RunReport::new(
        "verify",
        json!({
            "statements": ids,
            "trials": args.trials,
            "dims": dims.to_string(),
            "seed": args.common.seed,
        }),
    );
    let mut failed = false;
    for id in ids {
        let mut cfg = SearchConfig::new(id, args.trials, args.common.seed);
        cfg.sampler.dims = dims;
        if cfg.sampler.dims_for(statement(id)).is_empty() {
            eprintln!("{id}: no admissible dimension in {dims}, skipped");
            continue;
        }
        let out = sweep(&cfg, &opts);
        for c in &out.certificates {
            writer.write(&CertificateRecord::from(c)).map_err(io_err(&sink_path))?;
        }
        let summary = StatementSummary::from_state(id, &out.state);
        if summary.fails() {
            failed = true;
            for v in out.violations {
                eprintln!(
                    "{id} VIOLATED: margin {} (tolerance {}), instance: {}",
                    v.certificate.margin,
                    v.certificate.tolerance,
                    instance_json(&v.instance)
                );
                report.records.push(record(RecordKind::TheoremViolation, v));
            }
        } else if let Some(cx) = out.counterexample {
            report.records.push(record(RecordKind::Counterexample, cx));
        }
        report.statements.push(summary);
    }
    writer
        .finish()
        .map_err(io_err(&sink_path))?;
    let table = summary_table(&report.statements);
    if args.out.is_some() {
        let _ = write!(io::stdout(), "{table}");
    } else {
        eprint!("{table}");
    }
    report.wall_time_secs = started.elapsed().as_secs_f64();
    write_report(args.report.as_deref(), &report)?;
    Ok(if failed { exit::THEOREM_VIOLATION } else { exit::OK })
}

fn describe(c: &Certificate) -> String {
    format!(
        "{} {}: margin {}, ratio {}, {} (tolerance {:e})",
        c.statement,
        statement(c.statement).label,
        sig6(c.margin),
        sig6(c.ratio),
        c.verdict.as_str(),
        c.tolerance
    )
}

pub fn search(args: SearchArgs) -> Result<u8, CliError> {
    let started = Instant::now();
    let id: StatementId = args.statement.parse().map_err(|e: kantolab_core::EvalError| CliError::Usage(e.to_string()))?;
    let st = statement(id);
    if st.class == StatementClass::Open {
        return Err(CliError::Usage(format!(
            "{id} is an open conjecture; probe it with `kantolab conjecture`"
        )));
    }
    let mut cfg = SearchConfig::new(id, args.budget, args.common.seed).with_refinement(args.refine_steps, args.step_scale);
    cfg.sampler.dims = args.common.dims;
    cfg.validate().map_err(CliError::Usage)?;
    if cfg.sampler.dims_for(st).is_empty() {
        return Err(CliError::Usage(format!("{id} has no admissible dimension in {}", cfg.sampler.dims)));
    }
    let out = sweep(
        &cfg,
        &SweepOptions {
            workers: args.common.workers.map(|w| w as usize),
            ..SweepOptions::default()
        },
    );
    let mut report = RunReport::new("search", serde_json::to_value(&cfg).expect("config serializes"));
    report.statements.push(StatementSummary::from_state(id, &out.state));
    let code = if st.class == StatementClass::False {
        match out.counterexample {
            Some(cx) => {
                say!(
                    "{id}: counterexample found after {} instances{}",
                    out.state.next_index,
                    if cx.refined { " and refinement" } else { "" }
                );
                say!("  {}", describe(&cx.certificate));
                say!("  instance: {}", instance_json(&cx.instance));
                report.records.push(record(RecordKind::Counterexample, cx));
                exit::OK
            }
            None => {
                say!("{id}: no counterexample within {} instances", out.state.next_index);
                exit::BUDGET_EXHAUSTED
            }
        }
    } else {
        let violated = st.class.is_asserted() && !out.violations.is_empty();
        for v in out.violations {
            eprintln!("{id} VIOLATED: {}, instance: {}", describe(&v.certificate), instance_json(&v.instance));
            let kind = if st.class.is_asserted() {
                RecordKind::TheoremViolation
            } else {
                RecordKind::ConjectureViolation
            };
            report.records.push(record(kind, v));
        }
        if let (Some(cert), Some(inst)) = (out.state.best_certificate.clone(), out.state.best_instance.clone()) {
            let refined = out.refined.as_ref().is_some_and(|r| r.instance == inst);
            say!(
                "{id}: max ratio {} over {} instances{}",
                sig6(cert.ratio),
                out.state.evaluated,
                if refined { " (refined)" } else { "" }
            );
            say!("  {}", describe(&cert));
            report.records.push(InstanceRecord {
                kind: RecordKind::Tightness,
                reverified: false,
                refined,
                certificate: cert,
                instance: inst,
            });
        } else {
            say!("{id}: no instance could be scored");
        }
        if violated {
            exit::THEOREM_VIOLATION
        } else {
            exit::OK
        }
    };
    report.wall_time_secs = started.elapsed().as_secs_f64();
    write_report(args.out.as_deref(), &report)?;
    Ok(code)
}

fn probe_error(e: ProbeError) -> CliError {
    match e {
        ProbeError::Config(m) => CliError::Usage(m),
        ProbeError::Corrupt(..) | ProbeError::ConfigMismatch(_) => {
            CliError::Corrupt(format!("{e}; rerun with --fresh to start over"))
        }
        ProbeError::Io(path, err) => CliError::Io(path, err),
    }
}

pub fn conjecture(args: ConjectureArgs) -> Result<u8, CliError> {
    let mut cfg = ProbeConfig::new(args.trials, args.common.seed);
    cfg.checkpoint_every = args.checkpoint_every;
    cfg.search.refine_steps = args.refine_steps;
    cfg.search.sampler.dims = args.common.dims;
    cfg.search.sampler.ranks = args.ranks;
    cfg.validate().map_err(CliError::Usage)?;
    let mut opts = ProbeOptions {
        workers: args.common.workers.map(|w| w as usize),
        resume: args.resume,
        halt_after: args.halt_after,
    };
    let checkpoint = args.checkpoint.as_deref();
    let outcome = match probe_conjecture(&cfg, checkpoint, &opts) {
        Err(ProbeError::Corrupt(..) | ProbeError::ConfigMismatch(_)) if args.fresh => {
            eprintln!("discarding unusable checkpoint, starting fresh");
            opts.resume = false;
            probe_conjecture(&cfg, checkpoint, &opts)
        }
        r => r,
    }
    .map_err(probe_error)?;

    let state = &outcome.state;
    let mut report = RunReport::new("conjecture", serde_json::to_value(&cfg).expect("config serializes"));
    let summary = ConjectureSummary::from_state(state);
    report.statements = vec![
        summary.statement.clone(),
        summary.absolute_channel.clone(),
        summary.symmetric_channel.clone(),
    ];
    if let Some(v) = &state.violation {
        report.records.push(InstanceRecord {
            kind: RecordKind::ConjectureViolation,
            reverified: true,
            refined: false,
            certificate: v.certificate.clone(),
            instance: v.instance.clone(),
        });
    }
    if let (Some(cert), Some(inst)) = (&state.search.best_certificate, &state.search.best_instance) {
        report.records.push(InstanceRecord {
            kind: RecordKind::Tightness,
            reverified: false,
            refined: state.refinements > 0,
            certificate: cert.clone(),
            instance: inst.clone(),
        });
    }
    report.conjecture = Some(summary);
    report.wall_time_secs = state.search.wall_clock_secs;

    let _ = write!(io::stdout(), "{}", summary_table(&report.statements));
    say!("ratio histogram by dimension (bins of width 0.05 on [0,1), last bin >= 1):");
    for (dim, h) in &state.histogram {
        let bins: Vec<String> = h.bins.iter().map(u64::to_string).collect();
        say!("  n={dim:<2} count {:>7}  max {:>10}  [{}]", h.count, sig6(h.max_ratio), bins.join(" "));
    }
    write_report(args.out.as_deref(), &report)?;
    if outcome.halted {
        say!(
            "halted after {} of {} instances; continue with --resume",
            state.search.next_index, cfg.search.budget
        );
        return Ok(exit::OK);
    }
    Ok(match &state.violation {
        Some(v) => {
            say!("CONJECTURE VIOLATION (re-verified, SVD route ratio {})", v.svd_ratio);
            say!("  {}", describe(&v.certificate));
            say!("  instance: {}", instance_json(&v.instance));
            exit::CONJECTURE_VIOLATION
        }
        None => {
            say!("no violation in {} instances", state.search.evaluated);
            exit::OK
        }
    })
}

fn show(v: &Value) -> String {
    match v {
        Value::Scalar(x) => format!("{x}"),
        Value::Scalars(xs) => format!("{xs:?}"),
        Value::Matrix(h) => format!("matrix with spectrum {:?}", h.eig().values.as_slice()),
    }
}

pub fn demo(args: DemoArgs) -> Result<u8, CliError> {
    if !(args.m > 0.0 && args.m <= args.big_m && args.big_m.is_finite()) {
        return Err(CliError::Usage(format!("need 0 < m <= M, got m = {}, M = {}", args.m, args.big_m)));
    }
    let started = Instant::now();
    let d = run_demo(args.name, args.m, args.big_m).map_err(|e| CliError::Usage(e.to_string()))?;
    say!("{}", d.name.as_str());
    say!("{}", d.description);
    say!("instance: {}", instance_json(&d.instance));
    let mut report = RunReport::new(
        "demo",
        json!({"name": d.name.as_str(), "m": args.m, "M": args.big_m}),
    );
    for c in &d.checks {
        let cert = &c.certificate;
        say!("{}", describe(cert));
        say!("    lhs {}  rhs {}", show(&cert.lhs), show(&cert.rhs));
        say!("    expected: {}", c.expectation);
        report.records.push(InstanceRecord {
            kind: if cert.violated() {
                RecordKind::Counterexample
            } else {
                RecordKind::Tightness
            },
            reverified: false,
            refined: false,
            certificate: cert.clone(),
            instance: d.instance.clone(),
        });
    }
    report.wall_time_secs = started.elapsed().as_secs_f64();
    write_report(args.out.as_deref(), &report)?;
    Ok(exit::OK)
}
