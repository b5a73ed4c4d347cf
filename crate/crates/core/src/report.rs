//! Certificate records, output formats and the run summary.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::catalog::{statement, Certificate, InstanceBundle, StatementClass, StatementId, Verdict};
use crate::maps::MapKindTag;
use crate::search::{DimHistogram, ProbeState, SearchState, HISTOGRAM_BINS};

pub const TOOL_NAME: &str = "kantolab";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Flat projection of a [`Certificate`]; one line of the jsonl stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub statement: StatementId,
    pub seed: u64,
    pub dim: usize,
    pub map_kind: Option<MapKindTag>,
    pub margin: f64,
    pub ratio: f64,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub pinv_used: bool,
}

impl From<&Certificate> for CertificateRecord {
    fn from(c: &Certificate) -> Self {
        Self {
            statement: c.statement,
            seed: c.seed,
            dim: c.dim,
            map_kind: c.map_kind,
            margin: c.margin,
            ratio: c.ratio,
            verdict: c.verdict,
            tolerance: c.tolerance,
            pinv_used: c.pinv_used,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Csv,
    Table,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            "table" => Ok(Format::Table),
            other => Err(format!("unknown format `{other}` (expected jsonl, csv or table)")),
        }
    }
}

/// Streams certificate records in one of the output formats.
pub enum RecordWriter<W: Write> {
    Jsonl(W),
    Csv(csv::Writer<W>),
    Table { out: W, header_done: bool },
}

const TABLE_HEADER: [&str; 8] = ["statement", "seed", "dim", "map", "margin", "ratio", "verdict", "pinv"];

impl<W: Write> RecordWriter<W> {
    pub fn new(format: Format, out: W) -> Self {
        match format {
            Format::Jsonl => RecordWriter::Jsonl(out),
            Format::Csv => RecordWriter::Csv(csv::Writer::from_writer(out)),
            Format::Table => RecordWriter::Table {
                out,
                header_done: false,
            },
        }
    }

    pub fn write(&mut self, rec: &CertificateRecord) -> io::Result<()> {
        match self {
            RecordWriter::Jsonl(out) => {
                serde_json::to_writer(&mut *out, rec)?;
                out.write_all(b"\n")
            }
            RecordWriter::Csv(w) => w.serialize(rec).map_err(csv_io),
            RecordWriter::Table { out, header_done } => {
                if !*header_done {
                    writeln!(out, "{}", table_row(&TABLE_HEADER.map(String::from)))?;
                    *header_done = true;
                }
                let cells = [
                    rec.statement.to_string(),
                    format!("{:016x}", rec.seed),
                    rec.dim.to_string(),
                    rec.map_kind.map_or("-", |k| k.name()).to_string(),
                    sig6(rec.margin),
                    sig6(rec.ratio),
                    rec.verdict.as_str().to_string(),
                    if rec.pinv_used { "yes" } else { "no" }.to_string(),
                ];
                writeln!(out, "{}", table_row(&cells))
            }
        }
    }

    /// Flushes and returns the underlying writer.
    pub fn finish(self) -> io::Result<W> {
        let mut out = match self {
            RecordWriter::Jsonl(out) | RecordWriter::Table { out, .. } => out,
            RecordWriter::Csv(w) => w.into_inner().map_err(|e| e.into_error())?,
        };
        out.flush()?;
        Ok(out)
    }
}

fn csv_io(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

fn table_row(cells: &[String]) -> String {
    const WIDTHS: [usize; 8] = [9, 16, 3, 17, 13, 13, 8, 4];
    cells
        .iter()
        .zip(WIDTHS)
        .map(|(c, w)| format!("{c:<w$}"))
        .collect::<Vec<_>>()
        .join("  ")
        .trim_end()
        .to_string()
}

/// Formats `x` with 6 significant digits, `%g` style.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let s = if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let s = format!("{x:.5e}");
        let (mant, e) = s.split_once('e').expect("exponent");
        format!("{}e{e}", trim_zeros(mant.to_string()))
    };
    // rounding can carry into a new digit, e.g. 999999.7
    if s.trim_start_matches('-').split('.').next().is_some_and(|i| i.len() > 6) {
        let s = format!("{x:.5e}");
        let (mant, e) = s.split_once('e').expect("exponent");
        return format!("{}e{e}", trim_zeros(mant.to_string()));
    }
    s
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatementSummary {
    pub statement: StatementId,
    pub class: StatementClass,
    pub label: String,
    pub trials: u64,
    pub rejects: u64,
    pub holds: u64,
    pub violations: u64,
    pub max_ratio: Option<f64>,
    pub min_margin: Option<f64>,
}

impl StatementSummary {
    pub fn from_state(id: StatementId, s: &SearchState) -> Self {
        let st = statement(id);
        Self {
            statement: id,
            class: st.class,
            label: st.label.to_string(),
            trials: s.trials(),
            rejects: s.rejects,
            holds: s.holds,
            violations: s.violations,
            max_ratio: s.best_ratio,
            min_margin: s.best_margin,
        }
    }

    /// Violations of a statement asserted as true.
    pub fn fails(&self) -> bool {
        self.class.is_asserted() && self.violations > 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    /// Expected failure of a statement known to be false.
    Counterexample,
    /// Violation of an asserted statement.
    TheoremViolation,
    /// Verified violation of the open conjecture.
    ConjectureViolation,
    /// Largest ratio reached on an asserted statement.
    Tightness,
}

/// A certificate with the full instance that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub kind: RecordKind,
    pub reverified: bool,
    pub refined: bool,
    pub certificate: Certificate,
    pub instance: InstanceBundle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjectureSummary {
    pub statement: StatementSummary,
    pub absolute_channel: StatementSummary,
    pub symmetric_channel: StatementSummary,
    pub refinements: u64,
    /// Lower edges of the histogram bins; the last bin collects ratios `≥ 1`.
    pub bin_edges: Vec<f64>,
    pub histogram: BTreeMap<usize, DimHistogram>,
    pub violation_svd_ratio: Option<f64>,
}

impl ConjectureSummary {
    pub fn from_state(s: &ProbeState) -> Self {
        let channel = |id: StatementId, c: &crate::search::ChannelStats| {
            let st = statement(id);
            StatementSummary {
                statement: id,
                class: st.class,
                label: st.label.to_string(),
                trials: s.search.trials(),
                rejects: s.search.rejects,
                holds: c.holds,
                violations: c.violations,
                max_ratio: c.max_ratio,
                min_margin: c.min_margin,
            }
        };
        Self {
            statement: StatementSummary::from_state(StatementId::S27, &s.search),
            absolute_channel: channel(StatementId::S28, &s.s28),
            symmetric_channel: channel(StatementId::S29, &s.s29),
            refinements: s.refinements,
            bin_edges: (0..=HISTOGRAM_BINS).map(|i| i as f64 / HISTOGRAM_BINS as f64).collect(),
            histogram: s.histogram.clone(),
            violation_svd_ratio: s.violation.as_ref().map(|v| v.svd_ratio),
        }
    }
}

/// Single-document summary of one CLI invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub statements: Vec<StatementSummary>,
    pub records: Vec<InstanceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjecture: Option<ConjectureSummary>,
    pub wall_time_secs: f64,
}

impl RunReport {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            config,
            statements: Vec::new(),
            records: Vec::new(),
            conjecture: None,
            wall_time_secs: 0.0,
        }
    }

    pub fn without_timing(&self) -> Self {
        Self {
            wall_time_secs: 0.0,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Human-readable summary table.
pub fn summary_table(rows: &[StatementSummary]) -> String {
    let mut out = format!(
        "{:<4}  {:<11}  {:>8}  {:>7}  {:>8}  {:>10}  {:>12}  {:>13}\n",
        "id", "class", "trials", "rejects", "holds", "violations", "max ratio", "min margin"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<4}  {:<11}  {:>8}  {:>7}  {:>8}  {:>10}  {:>12}  {:>13}\n",
            r.statement.to_string(),
            r.class.to_string(),
            r.trials,
            r.rejects,
            r.holds,
            r.violations,
            r.max_ratio.map_or("-".into(), sig6),
            r.min_margin.map_or("-".into(), sig6),
        ));
    }
    out
}
