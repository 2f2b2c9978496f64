//! Manifold spec files.
//!
//! A spec file is TOML with string-valued expressions:
//!
//! ```toml
//! [manifold]
//! label = "curved"
//! mode = "circulant"        # or "general"
//!
//! [metric]                  # circulant mode: g = circ(A, B, C, B)
//! A = "2 + x1^2"
//! B = "x2/10"
//! C = "1"
//!
//! [domain]                  # optional, each coordinate defaults to [-1, 1]
//! x1 = [-0.5, 0.5]
//!
//! [run]                     # optional
//! points = 50
//! seed = 0
//! tol = 1e-8
//! ```
//!
//! In general mode `[metric]` takes `g11` .. `g44` (diagonal required,
//! off-diagonals default to 0, a single `gij` is mirrored to `gji`) and an
//! optional `[structure]` takes `q11` .. `q44` (unset entries are 0). Without
//! `[structure]` the canonical circulant `Q` is used.

use std::path::Path;

use thiserror::Error;
use toml::{Table, Value};

use crate::circulant::{canonical_q, CirculantMetricSpec};
use crate::expr::{parse, Expr, ParseError};
use crate::geometry::{constant_expr_mat, Domain, DomainError, ExprMat, ManifoldSpec};
use crate::tensor::DIM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Circulant,
    General,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Circulant => "circulant",
            Mode::General => "general",
        }
    }
}

/// `[run]` values; any of them may be overridden on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunSection {
    pub points: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct LoadedSpec {
    pub mode: Mode,
    pub spec: ManifoldSpec,
    pub run: RunSection,
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Syntax(String),
    #[error("{}missing key '{key}' in [{section}]", line_prefix(*.line))]
    MissingKey { section: String, key: String, line: Option<usize> },
    #[error("{}unknown key '{key}' in [{section}]", line_prefix(*.line))]
    UnknownKey { section: String, key: String, line: Option<usize> },
    #[error("{}[{section}] {key}: {message}", line_prefix(*.line))]
    InvalidValue { section: String, key: String, message: String, line: Option<usize> },
    #[error("{}[{section}] {key}: {source}", line_prefix(*.line))]
    Expression { section: String, key: String, source: ParseError, line: Option<usize> },
    #[error("[domain] {0}")]
    Domain(#[from] DomainError),
}

fn line_prefix(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

impl SpecError {
    /// Key the error refers to, when there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            SpecError::MissingKey { key, .. }
            | SpecError::UnknownKey { key, .. }
            | SpecError::InvalidValue { key, .. }
            | SpecError::Expression { key, .. } => Some(key),
            _ => None,
        }
    }
}

const SECTIONS: [&str; 5] = ["manifold", "metric", "structure", "domain", "run"];

struct Doc<'a> {
    text: &'a str,
    table: Table,
}

impl Doc<'_> {
    /// 1-based line of `key = ...` inside `[section]`, or of the section
    /// header when `key` is empty.
    fn line_of(&self, section: &str, key: &str) -> Option<usize> {
        let header = format!("[{section}]");
        let mut in_section = false;
        for (n, raw) in self.text.lines().enumerate() {
            let line = raw.trim();
            if line.starts_with('[') {
                in_section = line.split('#').next().map(str::trim) == Some(header.as_str());
                if in_section && key.is_empty() {
                    return Some(n + 1);
                }
                continue;
            }
            if in_section && !key.is_empty() {
                let lhs = line.split('=').next().unwrap_or("").trim().trim_matches('"');
                if lhs == key && line.contains('=') {
                    return Some(n + 1);
                }
            }
        }
        None
    }

    fn section(&self, name: &str) -> Result<Option<&Table>, SpecError> {
        match self.table.get(name) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(t)),
            Some(_) => Err(SpecError::InvalidValue {
                section: name.into(),
                key: String::new(),
                message: "expected a section".into(),
                line: self.line_of(name, ""),
            }),
        }
    }

    fn required_section(&self, name: &str) -> Result<&Table, SpecError> {
        self.section(name)?.ok_or_else(|| SpecError::MissingKey {
            section: name.into(),
            key: format!("[{name}]"),
            line: None,
        })
    }

    fn invalid(&self, section: &str, key: &str, message: impl Into<String>) -> SpecError {
        SpecError::InvalidValue {
            section: section.into(),
            key: key.into(),
            message: message.into(),
            line: self.line_of(section, key),
        }
    }

    fn check_keys(&self, section: &str, table: &Table, allowed: &dyn Fn(&str) -> bool) -> Result<(), SpecError> {
        match table.keys().find(|k| !allowed(k)) {
            Some(k) => {
                Err(SpecError::UnknownKey { section: section.into(), key: k.clone(), line: self.line_of(section, k) })
            }
            None => Ok(()),
        }
    }

    fn string<'t>(&self, section: &str, table: &'t Table, key: &str) -> Result<Option<&'t str>, SpecError> {
        match table.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(self.invalid(section, key, "expected a string")),
        }
    }

    fn expr(&self, section: &str, table: &Table, key: &str) -> Result<Option<Expr>, SpecError> {
        let Some(text) = self.string(section, table, key)? else {
            return Ok(None);
        };
        parse(text).map(Some).map_err(|source| SpecError::Expression {
            section: section.into(),
            key: key.into(),
            source,
            line: self.line_of(section, key),
        })
    }

    fn required_expr(&self, section: &str, table: &Table, key: &str) -> Result<Expr, SpecError> {
        self.expr(section, table, key)?.ok_or_else(|| SpecError::MissingKey {
            section: section.into(),
            key: key.into(),
            line: self.line_of(section, ""),
        })
    }

    fn number(&self, section: &str, key: &str, v: &Value) -> Result<f64, SpecError> {
        match v {
            Value::Float(f) => Ok(*f),
            Value::Integer(i) => Ok(*i as f64),
            _ => Err(self.invalid(section, key, "expected a number")),
        }
    }
}

fn component_key(prefix: char, i: usize, j: usize) -> String {
    format!("{prefix}{}{}", i + 1, j + 1)
}

fn is_component_key(prefix: char, key: &str) -> bool {
    let b = key.as_bytes();
    b.len() == 3 && b[0] == prefix as u8 && (b'1'..=b'4').contains(&b[1]) && (b'1'..=b'4').contains(&b[2])
}

/// Parses spec file text.
pub fn load_spec_str(text: &str) -> Result<LoadedSpec, SpecError> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| SpecError::Syntax(e.to_string()))?;
    let doc = Doc { text, table };
    doc.check_keys("", &doc.table, &|k| SECTIONS.contains(&k)).map_err(|e| match e {
        SpecError::UnknownKey { key, .. } => {
            let line = doc.line_of(&key, "");
            SpecError::UnknownKey { section: "top level".into(), key, line }
        }
        other => other,
    })?;

    let manifold = doc.required_section("manifold")?;
    doc.check_keys("manifold", manifold, &|k| matches!(k, "label" | "mode"))?;
    let label = doc.string("manifold", manifold, "label")?.unwrap_or("unnamed").to_string();
    let mode = match doc.string("manifold", manifold, "mode")? {
        None => {
            return Err(SpecError::MissingKey {
                section: "manifold".into(),
                key: "mode".into(),
                line: doc.line_of("manifold", ""),
            })
        }
        Some("circulant") => Mode::Circulant,
        Some("general") => Mode::General,
        Some(other) => {
            return Err(doc.invalid(
                "manifold",
                "mode",
                format!("expected \"circulant\" or \"general\", got \"{other}\""),
            ))
        }
    };

    let domain = load_domain(&doc)?;
    let metric = doc.required_section("metric")?;
    let spec = match mode {
        Mode::Circulant => {
            doc.check_keys("metric", metric, &|k| matches!(k, "A" | "B" | "C"))?;
            if doc.section("structure")?.is_some() {
                return Err(doc.invalid("structure", "", "only allowed in general mode"));
            }
            let a = doc.required_expr("metric", metric, "A")?;
            let b = doc.required_expr("metric", metric, "B")?;
            let c = doc.required_expr("metric", metric, "C")?;
            CirculantMetricSpec::new(label, a, b, c, domain).to_manifold_spec()?
        }
        Mode::General => {
            doc.check_keys("metric", metric, &|k| is_component_key('g', k))?;
            let mut g: ExprMat = std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero()));
            let mut given = [[false; DIM]; DIM];
            for i in 0..DIM {
                for j in 0..DIM {
                    if let Some(e) = doc.expr("metric", metric, &component_key('g', i, j))? {
                        g[i][j] = e;
                        given[i][j] = true;
                    }
                }
            }
            for i in 0..DIM {
                if !given[i][i] {
                    return Err(SpecError::MissingKey {
                        section: "metric".into(),
                        key: component_key('g', i, i),
                        line: doc.line_of("metric", ""),
                    });
                }
                for j in 0..DIM {
                    if given[i][j] && !given[j][i] {
                        g[j][i] = g[i][j].clone();
                    }
                }
            }
            let q = match doc.section("structure")? {
                None => constant_expr_mat(&canonical_q()),
                Some(st) => {
                    doc.check_keys("structure", st, &|k| is_component_key('q', k))?;
                    let mut q: ExprMat = std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero()));
                    for (i, row) in q.iter_mut().enumerate() {
                        for (j, entry) in row.iter_mut().enumerate() {
                            if let Some(e) = doc.expr("structure", st, &component_key('q', i, j))? {
                                *entry = e;
                            }
                        }
                    }
                    q
                }
            };
            ManifoldSpec::new(label, g, q, domain)?
        }
    };

    let run = load_run(&doc)?;
    Ok(LoadedSpec { mode, spec, run })
}

fn load_domain(doc: &Doc<'_>) -> Result<Domain, SpecError> {
    let mut domain = Domain::default();
    let Some(table) = doc.section("domain")? else {
        return Ok(domain);
    };
    doc.check_keys("domain", table, &|k| matches!(k, "x1" | "x2" | "x3" | "x4"))?;
    for (axis, interval) in domain.0.iter_mut().enumerate() {
        let key = format!("x{}", axis + 1);
        let Some(v) = table.get(&key) else { continue };
        let bounds = match v {
            Value::Array(a) if a.len() == 2 => a,
            _ => return Err(doc.invalid("domain", &key, "expected [min, max]")),
        };
        let lo = doc.number("domain", &key, &bounds[0])?;
        let hi = doc.number("domain", &key, &bounds[1])?;
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(doc.invalid("domain", &key, format!("empty interval [{lo}, {hi}]")));
        }
        *interval = (lo, hi);
    }
    Ok(domain)
}

fn load_run(doc: &Doc<'_>) -> Result<RunSection, SpecError> {
    let mut run = RunSection::default();
    let Some(table) = doc.section("run")? else {
        return Ok(run);
    };
    doc.check_keys("run", table, &|k| matches!(k, "points" | "seed" | "tol"))?;
    if let Some(v) = table.get("points") {
        match v {
            Value::Integer(n) if *n >= 1 => run.points = Some(*n as usize),
            _ => return Err(doc.invalid("run", "points", "expected a positive integer")),
        }
    }
    if let Some(v) = table.get("seed") {
        match v {
            Value::Integer(n) if *n >= 0 => run.seed = Some(*n as u64),
            _ => return Err(doc.invalid("run", "seed", "expected a non-negative integer")),
        }
    }
    if let Some(v) = table.get("tol") {
        let tol = doc.number("run", "tol", v)?;
        if !(tol.is_finite() && tol > 0.0) {
            return Err(doc.invalid("run", "tol", "expected a positive number"));
        }
        run.tol = Some(tol);
    }
    Ok(run)
}

/// Reads and parses a spec file.
pub fn load_spec(path: impl AsRef<Path>) -> Result<LoadedSpec, SpecError> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| SpecError::Io { path: path.display().to_string(), source })?;
    load_spec_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::frame_at;
    use crate::tensor::{Mat4, Vec4};

    const FLAT: &str = r#"
[manifold]
label = "flat"
mode = "circulant"

[metric]
A = "1"
B = "0"
C = "0"
"#;

    #[test]
    fn minimal_circulant_spec_is_flat() {
        let loaded = load_spec_str(FLAT).unwrap();
        assert_eq!(loaded.mode, Mode::Circulant);
        assert_eq!(loaded.spec.label(), "flat");
        assert_eq!(*loaded.spec.domain(), Domain::default());
        assert_eq!(loaded.run, RunSection::default());
        let f = frame_at(&loaded.spec, &Vec4::zero()).unwrap();
        assert_eq!(f.g, Mat4::identity());
    }

    #[test]
    fn missing_key_is_named() {
        let text = FLAT.replace("C = \"0\"\n", "");
        let err = load_spec_str(&text).unwrap_err();
        assert_eq!(err.key(), Some("C"));
        assert!(err.to_string().contains("'C'"), "{err}");
    }

    #[test]
    fn expression_errors_carry_line_and_key() {
        let text = FLAT.replace("B = \"0\"", "B = \"x7\"");
        let err = load_spec_str(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("line 8:"), "{msg}");
        assert!(msg.contains("[metric] B"), "{msg}");
        assert!(msg.contains("unknown identifier"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = load_spec_str(&FLAT.replace("C = \"0\"", "C = \"0\"\nD = \"1\"")).unwrap_err();
        assert!(matches!(err, SpecError::UnknownKey { ref key, .. } if key == "D"), "{err}");
        let err = load_spec_str(&format!("{FLAT}\n[extra]\nx = 1\n")).unwrap_err();
        assert!(matches!(err, SpecError::UnknownKey { ref key, .. } if key == "extra"), "{err}");
    }

    #[test]
    fn bad_mode_and_domain() {
        assert!(load_spec_str(&FLAT.replace("circulant", "kaehler")).is_err());
        let err = load_spec_str(&format!("{FLAT}\n[domain]\nx2 = [1.0, -1.0]\n")).unwrap_err();
        assert_eq!(err.key(), Some("x2"));
        assert!(load_spec_str(&format!("{FLAT}\n[domain]\nx2 = [1.0]\n")).is_err());
        assert!(load_spec_str(&format!("{FLAT}\n[run]\npoints = 0\n")).is_err());
        assert!(load_spec_str(&format!("{FLAT}\n[run]\ntol = -1\n")).is_err());
        assert!(load_spec_str("[manifold\n").is_err());
    }

    #[test]
    fn curved_spec_with_domain_and_run() {
        let text = r#"
[manifold]
label = "curved"
mode = "circulant"
[metric]
A = "2+x1^2"
B = "x2/10"
C = "1"
[domain]
x1 = [-0.5, 0.5]
x2 = [-0.5, 0.5]
x3 = [-0.5, 0.5]
x4 = [-0.5, 0.5]
[run]
points = 12
seed = 3
tol = 1e-9
"#;
        let loaded = load_spec_str(text).unwrap();
        assert_eq!(*loaded.spec.domain(), Domain::cube(-0.5, 0.5));
        assert_eq!(loaded.run, RunSection { points: Some(12), seed: Some(3), tol: Some(1e-9) });
        let f = frame_at(&loaded.spec, &Vec4([0.5, 0.5, 0.0, 0.0])).unwrap();
        assert_eq!(f.g, Mat4::circulant([2.25, 0.05, 1.0, 0.05]));
    }

    #[test]
    fn general_mode_mirrors_and_defaults() {
        let text = r#"
[manifold]
mode = "general"
[metric]
g11 = "2"
g22 = "2"
g33 = "2"
g44 = "2"
g13 = "1"
g24 = "1"
"#;
        let loaded = load_spec_str(text).unwrap();
        assert_eq!(loaded.mode, Mode::General);
        let f = frame_at(&loaded.spec, &Vec4::zero()).unwrap();
        assert_eq!(f.g, Mat4::circulant([2.0, 0.0, 1.0, 0.0]));
        assert_eq!(f.q, canonical_q());

        let missing_diag = text.replace("g33 = \"2\"\n", "");
        assert_eq!(load_spec_str(&missing_diag).unwrap_err().key(), Some("g33"));
    }

    #[test]
    fn general_mode_with_structure() {
        let text = r#"
[manifold]
mode = "general"
[metric]
g11 = "1"
g22 = "1"
g33 = "1"
g44 = "1"
[structure]
q12 = "1"
q23 = "1"
q34 = "1"
q41 = "1"
"#;
        let loaded = load_spec_str(text).unwrap();
        let f = frame_at(&loaded.spec, &Vec4::zero()).unwrap();
        assert_eq!(f.q, canonical_q());
        assert!(load_spec_str(&format!("{FLAT}\n[structure]\nq11 = \"1\"\n")).is_err());
    }
}
