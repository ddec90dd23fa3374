//! Library side of the `entile` command line: scenario parsing, the
//! subcommands, the independent certificate checker and the acceptance suite.

use std::path::Path;

pub mod acceptance;
pub mod commands;
mod par;
pub mod report;
pub mod scenario;
pub mod verify;

use report::{CliError, Outputs, Report};
use scenario::{Overrides, Scenario};

/// Loads a scenario, runs `op` (or the operation the file names) and writes
/// the artifacts into `out` when given.
pub fn run_scenario(path: &Path, out: Option<&Path>, op: Option<&str>, ov: &Overrides) -> Result<(Report, Outputs), CliError> {
    let sc = Scenario::load(path, ov)?;
    let named = sc.operation.as_deref().map(commands::normalize_operation);
    let op = match (op.map(commands::normalize_operation), named) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::Usage(format!("scenario is for {b:?}, not {a:?}")));
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => return Err(CliError::Usage("scenario names no operation".into())),
    };
    let (report, outputs) = commands::run_operation(&op, &sc, ov.jobs.max(1))?;
    if let Some(dir) = out {
        outputs.write(dir)?;
    }
    Ok((report, outputs))
}
