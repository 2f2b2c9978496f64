//! Run reports: a verdict table for people and a JSON document for tools.
//!
//! The machine form is pretty-printed JSON with keys in declaration order
//! and floats written in shortest round-trip form, so identical runs give
//! identical bytes apart from the `timestamp` line.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::classify::{classify, ClassReport, ClassifyError, ClassifyOptions, Identity, DEFAULT_POINTS, DEFAULT_TOL};
use crate::cli::spec_file::{LoadedSpec, Mode};

pub const TOOL_NAME: &str = "circq";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Machine,
}

/// Command-line overrides; `None` falls back to the spec's `[run]` section
/// and then to the defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub points: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub check_identities: bool,
    pub threads: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { points: None, seed: None, tol: None, check_identities: true, threads: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    /// Seconds since the Unix epoch; excluded from determinism checks.
    pub timestamp: u64,
    pub label: String,
    pub mode: Mode,
    pub check_identities: bool,
    pub classification: ClassReport,
}

pub fn run(loaded: &LoadedSpec, opts: &RunOptions) -> Result<RunReport, ClassifyError> {
    let copts = ClassifyOptions {
        n_points: opts.points.or(loaded.run.points).unwrap_or(DEFAULT_POINTS),
        seed: opts.seed.or(loaded.run.seed).unwrap_or(0),
        tol: opts.tol.or(loaded.run.tol).unwrap_or(DEFAULT_TOL),
        check_identities: opts.check_identities,
        threads: opts.threads,
    };
    let classification = classify(&loaded.spec, &copts)?;
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    Ok(RunReport {
        tool: TOOL_NAME.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp,
        label: loaded.spec.label().to_string(),
        mode: loaded.mode,
        check_identities: opts.check_identities,
        classification,
    })
}

pub fn render(report: &RunReport, format: Format) -> String {
    match format {
        Format::Text => render_text(report),
        Format::Machine => render_machine(report),
    }
}

pub fn render_machine(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report fields are serializable");
    s.push('\n');
    s
}

pub fn parse_machine(text: &str) -> Result<RunReport, serde_json::Error> {
    serde_json::from_str(text)
}

fn sci(v: f64) -> String {
    format!("{v:.2e}")
}

pub fn render_text(report: &RunReport) -> String {
    let c = &report.classification;
    let v = &c.verdicts;
    let mut out = String::new();
    let _ = writeln!(out, "{} {}  spec: {} ({})", report.tool, report.version, report.label, report.mode.as_str());
    let _ = writeln!(out, "points: {}  seed: {}  tol: {}", c.n_points, c.seed, sci(c.tol));
    let _ = writeln!(out);
    let _ = writeln!(out, "class verdicts (max normalized residual: F form / F-bar form)");
    let rows = [
        ("W0", v.w0, c.max.w0, None),
        ("W1", v.w1, c.max.w1, Some(c.max.w1_bar)),
        ("W2", v.w2, c.max.w2, Some(c.max.w2_bar)),
        ("W3", v.w3, c.max.w3, Some(c.max.w3_bar)),
    ];
    for (name, verdict, f, fbar) in rows {
        let bar = fbar.map(sci).unwrap_or_else(|| "-".into());
        let _ = writeln!(out, "  {name}: {:<14} {:>10} / {:>10}", verdict.to_string(), sci(f), bar);
    }
    let _ = writeln!(
        out,
        "  fs: {:<14} {:>10}   (W0 <=> fs {})",
        v.fs.to_string(),
        sci(c.max.fs),
        if v.fs_equivalent { "consistent" } else { "INCONSISTENT" }
    );
    let _ = writeln!(out, "  F / F-bar formulation gap: {}", sci(c.max_formulation_gap));
    let _ = writeln!(out, "  W1 F-bar with +P terms: {}", sci(c.max.w1_bar_as_printed));
    let _ = writeln!(out, "  W3 F-bar with F-bar(z,Qx,Qy) term: {}", sci(c.max.w3_bar_as_printed));
    if let Some(ids) = &c.identity_max {
        let _ = writeln!(out);
        let _ = writeln!(out, "identities (max normalized residual)");
        for (id, value) in &ids.0 {
            let _ = writeln!(out, "  {:<24} {}", id.name(), sci(*value));
        }
        for id in [Identity::CurvatureQInvariant, Identity::CurvaturePInvariant] {
            if ids.get(id).is_none() {
                let _ = writeln!(out, "  {:<24} n/a (nabla Q != 0)", id.name());
            }
        }
    }
    out
}
