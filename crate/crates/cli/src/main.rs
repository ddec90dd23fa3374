use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use entile::acceptance::{self, AcceptanceConfig};
use entile::report::{CliError, EXIT_USAGE};
use entile::run_scenario;
use entile::scenario::Overrides;

#[derive(Parser)]
#[command(name = "entile", version, about = "Monotilings, Følner sequences and entropy of shift actions")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Scenario file (JSON)
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Directory for artifacts
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Node budget for exact-cover and covering searches
    #[arg(long, global = true)]
    budget_nodes: Option<u64>,
    /// Largest index tried when extracting subsequences
    #[arg(long, global = true)]
    horizon: Option<usize>,
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Seed for property-test sampling
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Monotile covers and tiling sequences
    #[command(subcommand)]
    Tile(Tile),
    /// Følner sequences
    #[command(subcommand)]
    Folner(Folner),
    /// Entropy profiles of shift actions
    #[command(subcommand)]
    Entropy(Entropy),
    /// Følner sequences of extensions
    #[command(subcommand)]
    Construct(Construct),
    /// Congruent tiling sequence from an exhaustion
    Congruentize,
    /// Run whatever operation the scenario names
    Run,
    /// Run the bundled acceptance criteria
    Selftest {
        /// Corrupt one input of criterion N; the run must then fail on it
        #[arg(long, value_name = "N")]
        inject_fault: Option<usize>,
        /// Only these criteria (comma separated)
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<usize>>,
        /// Print the table as JSON
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum Tile {
    Check,
    Extract,
    Verify,
}

#[derive(Subcommand)]
enum Folner {
    Defect,
    Cif,
    Build,
}

#[derive(Subcommand)]
enum Entropy {
    Profile,
    Relative,
    Addition,
}

#[derive(Subcommand)]
enum Construct {
    Extension,
    FiniteIndex,
    Diagonal,
    Qsemidirect,
}

fn operation(c: &Command) -> Option<&'static str> {
    Some(match c {
        Command::Tile(Tile::Check) => "tile.check",
        Command::Tile(Tile::Extract) => "tile.extract",
        Command::Tile(Tile::Verify) => "tile.verify",
        Command::Folner(Folner::Defect) => "folner.defect",
        Command::Folner(Folner::Cif) => "folner.cif",
        Command::Folner(Folner::Build) => "folner.build",
        Command::Entropy(Entropy::Profile) => "entropy.profile",
        Command::Entropy(Entropy::Relative) => "entropy.relative",
        Command::Entropy(Entropy::Addition) => "entropy.addition",
        Command::Construct(Construct::Extension) => "construct.extension",
        Command::Construct(Construct::FiniteIndex) => "construct.finite-index",
        Command::Construct(Construct::Diagonal) => "construct.diagonal",
        Command::Construct(Construct::Qsemidirect) => "construct.qsemidirect",
        Command::Congruentize => "congruentize",
        Command::Run | Command::Selftest { .. } => return None,
    })
}

/// Writes to stdout; a closed pipe is not an error worth a panic.
fn emit(s: &str) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn usage(e: CliError) -> ExitCode {
    eprintln!("entile: {e}");
    ExitCode::from(EXIT_USAGE as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let g = cli.global;
    if g.jobs == 0 {
        return usage(CliError::Usage("--jobs must be at least 1".into()));
    }
    if let Command::Selftest { inject_fault, criteria, json } = cli.command {
        let n = acceptance::criterion_count();
        for &c in inject_fault.iter().chain(criteria.iter().flatten()) {
            if c == 0 || c > n {
                return usage(CliError::Usage(format!("no criterion {c}; there are {n}")));
            }
        }
        if g.budget_nodes == Some(0) {
            return usage(CliError::Usage("--budget-nodes must be positive".into()));
        }
        let cfg = AcceptanceConfig {
            seed: g.seed.unwrap_or(acceptance::DEFAULT_SEED),
            budget: g.budget_nodes,
            fault: inject_fault,
            jobs: g.jobs,
            only: criteria,
        };
        let results = acceptance::run_all(&cfg);
        if json {
            emit(&format!("{}\n", serde_json::to_string_pretty(&acceptance::to_json(&results)).unwrap()));
        } else {
            emit(&format!("{}overall: {}\n", acceptance::table(&results), acceptance::overall(&results).label()));
        }
        return ExitCode::from(acceptance::overall(&results).exit_code() as u8);
    }
    let Some(path) = g.scenario.as_deref() else {
        return usage(CliError::Usage("--scenario is required".into()));
    };
    let ov = Overrides { depth: g.depth, budget_nodes: g.budget_nodes, horizon: g.horizon, jobs: g.jobs, seed: g.seed };
    match run_scenario(path, g.out.as_deref(), operation(&cli.command), &ov) {
        Ok((report, _)) => {
            emit(&format!("{}\n", serde_json::to_string_pretty(&report.to_json()).unwrap()));
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => usage(e),
    }
}
