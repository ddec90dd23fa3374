//! Verdicts, reports, exit codes and artifact files.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use entile_core::Error;
use serde_json::{json, Value};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed scenario, unknown names.
    Usage(String),
    Core(Error),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "io: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// Carries the concrete counterexample.
    Fail(String),
    /// Carries the exhausted budget.
    Inconclusive(String),
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Pass => EXIT_PASS,
            Verdict::Fail(_) => EXIT_FAIL,
            Verdict::Inconclusive(_) => EXIT_INCONCLUSIVE,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail(_) => "fail",
            Verdict::Inconclusive(_) => "inconclusive",
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Verdict::Pass => None,
            Verdict::Fail(r) | Verdict::Inconclusive(r) => Some(r),
        }
    }

    /// The worse of two verdicts: fail over inconclusive over pass.
    pub fn and(self, other: Verdict) -> Verdict {
        match (&self, &other) {
            (Verdict::Fail(_), _) => self,
            (_, Verdict::Fail(_)) => other,
            (Verdict::Inconclusive(_), _) => self,
            (_, Verdict::Inconclusive(_)) => other,
            _ => Verdict::Pass,
        }
    }
}

/// Maps a library error to a verdict, or to a usage error when the input
/// itself was at fault.
pub fn verdict_of(e: Error) -> Result<Verdict, CliError> {
    match e {
        Error::Budget(m) => Ok(Verdict::Inconclusive(m)),
        Error::Refuted(m) | Error::Verification(m) => Ok(Verdict::Fail(m)),
        other => Err(CliError::Core(other)),
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub operation: String,
    pub verdict: Verdict,
    /// Paths relative to the output directory.
    pub artifacts: Vec<String>,
    pub summary: Vec<Value>,
}

impl Report {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "operation": self.operation,
            "verdict": self.verdict.label(),
            "artifacts": self.artifacts,
            "summary": self.summary,
        });
        match &self.verdict {
            Verdict::Fail(r) => v["counterexample"] = json!(r),
            Verdict::Inconclusive(r) => v["exhausted_budget"] = json!(r),
            Verdict::Pass => {}
        }
        v
    }

    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }
}

/// Artifacts collected during a run, written only when an output directory
/// was given.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn json(&mut self, name: &str, v: &Value) {
        let mut text = serde_json::to_string_pretty(v).expect("values always serialize");
        text.push('\n');
        self.files.push((name.to_string(), text.into_bytes()));
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).expect("in-memory write");
        for r in rows {
            w.write_record(r).expect("in-memory write");
        }
        self.files.push((name.to_string(), w.into_inner().expect("in-memory flush")));
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let mut out = Vec::new();
        for (name, bytes) in &self.files {
            let p = dir.join(name);
            fs::write(&p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            out.push(p);
        }
        Ok(out)
    }
}

/// Header of every profile table.
pub const PROFILE_COLUMNS: [&str; 5] = ["n", "|F_n|", "|T_n|", "value_nats", "residual"];

/// Floats printed with twelve decimals so tables are byte-stable; an exact
/// zero prints as `0`.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x:.12}")
    }
}
