//! Scenario files: one JSON object naming an operation, its inputs and the
//! search budgets.

use std::fs;
use std::path::{Path, PathBuf};

use entile_core::algebra::json::{action_from_json, ctx_from_json, element_from_json, elements_from_json};
use entile_core::finset::{AFinSet, FinSubset};
use entile_core::folner::{build_folner, BuilderSpec, Exhaustion, FolnerSeq};
use entile_core::tiling::DEFAULT_TILE_BUDGET;
use entile_core::{ActionSpec, Element, MonoidCtx};
use serde_json::Value;

use crate::report::CliError;

pub const DEFAULT_TRAJECTORY_CAP: usize = 1_000_000;
pub const DEFAULT_LEVEL_CAP: usize = 100;
pub const DEFAULT_HORIZON: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budgets {
    /// Search nodes for exact-cover and covering searches.
    pub node_budget: u64,
    /// Levels examined by congruentization.
    pub level_cap: usize,
    /// Largest index tried by CIF extraction.
    pub horizon: usize,
    /// Largest trajectory materialized.
    pub trajectory_cap: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            node_budget: DEFAULT_TILE_BUDGET,
            level_cap: DEFAULT_LEVEL_CAP,
            horizon: DEFAULT_HORIZON,
            trajectory_cap: DEFAULT_TRAJECTORY_CAP,
        }
    }
}

impl Budgets {
    /// Every budget set to `b`.
    pub fn uniform(b: u64) -> Self {
        Budgets { node_budget: b, level_cap: b as usize, horizon: b as usize, trajectory_cap: b as usize }
    }
}

/// Command-line values that take precedence over the scenario file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub depth: Option<usize>,
    pub budget_nodes: Option<u64>,
    pub horizon: Option<usize>,
    pub jobs: usize,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub version: String,
    pub operation: Option<String>,
    pub budgets: Budgets,
    pub body: Value,
    /// Directory of the scenario file, for relative references.
    pub base: PathBuf,
    pub depth_override: Option<usize>,
}

fn parse_error(path: &Path, e: serde_json::Error) -> CliError {
    CliError::Usage(format!("{}: parse error at line {} column {}: {e}", path.display(), e.line(), e.column()))
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| parse_error(path, e))
}

fn positive(v: &Value, key: &str) -> Result<Option<u64>, CliError> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(x) => match x.as_u64() {
            Some(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("budget {key:?} must be a positive integer, found {x}"))),
        },
    }
}

impl Scenario {
    pub fn load(path: &Path, ov: &Overrides) -> Result<Self, CliError> {
        let body = read_json(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_value(body, base, ov)
    }

    pub fn from_value(body: Value, base: PathBuf, ov: &Overrides) -> Result<Self, CliError> {
        if !body.is_object() {
            return Err(CliError::Usage("a scenario must be a JSON object".into()));
        }
        let version = match body.get("version") {
            None => "1".to_string(),
            Some(Value::String(s)) => s.clone(),
            Some(v) => return Err(CliError::Usage(format!("version must be a string, found {v}"))),
        };
        if version != "1" {
            return Err(CliError::Usage(format!("unsupported scenario version {version:?}")));
        }
        let operation = body.get("operation").map(|o| {
            o.as_str().map(str::to_string).ok_or_else(|| CliError::Usage("operation must be a string".into()))
        });
        let operation = operation.transpose()?;
        let mut budgets = Budgets::default();
        if let Some(b) = body.get("budgets") {
            if !b.is_object() {
                return Err(CliError::Usage("budgets must be an object".into()));
            }
            for key in b.as_object().unwrap().keys() {
                if !["node_budget", "level_cap", "horizon", "trajectory_cap"].contains(&key.as_str()) {
                    return Err(CliError::Usage(format!("unknown budget {key:?}")));
                }
            }
            if let Some(n) = positive(b, "node_budget")? {
                budgets.node_budget = n;
            }
            if let Some(n) = positive(b, "level_cap")? {
                budgets.level_cap = n as usize;
            }
            if let Some(n) = positive(b, "horizon")? {
                budgets.horizon = n as usize;
            }
            if let Some(n) = positive(b, "trajectory_cap")? {
                budgets.trajectory_cap = n as usize;
            }
        }
        if let Some(n) = ov.budget_nodes {
            if n == 0 {
                return Err(CliError::Usage("--budget-nodes must be positive".into()));
            }
            budgets.node_budget = n;
        }
        if let Some(h) = ov.horizon {
            if h == 0 {
                return Err(CliError::Usage("--horizon must be positive".into()));
            }
            budgets.horizon = h;
        }
        Ok(Scenario { version, operation, budgets, body, base, depth_override: ov.depth })
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.body.get(key).filter(|v| !v.is_null())
    }

    pub fn require(&self, key: &str) -> Result<&Value, CliError> {
        self.get(key).ok_or_else(|| CliError::Usage(format!("scenario needs {key:?}")))
    }

    pub fn depth(&self, default: usize) -> Result<usize, CliError> {
        if let Some(d) = self.depth_override {
            return Ok(d);
        }
        match self.get("depth") {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|d| d as usize)
                .ok_or_else(|| CliError::Usage(format!("depth must be a non-negative integer, found {v}"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.as_u64().map(|d| d as usize).ok_or_else(|| CliError::Usage(format!("{key} must be an integer"))),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.as_bool().ok_or_else(|| CliError::Usage(format!("{key} must be true or false"))),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> Result<&'a str, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.as_str().ok_or_else(|| CliError::Usage(format!("{key} must be a string"))),
        }
    }

    pub fn sequence(&self, key: &str) -> Result<FolnerSeq, CliError> {
        sequence_from_json(self.require(key)?)
    }

    pub fn monoid(&self) -> Result<MonoidCtx, CliError> {
        Ok(ctx_from_json(self.require("monoid")?)?)
    }

    pub fn action(&self) -> Result<ActionSpec, CliError> {
        Ok(action_from_json(self.require("action")?)?)
    }

    pub fn subset(&self, ctx: &MonoidCtx, key: &str) -> Result<FinSubset, CliError> {
        Ok(FinSubset::new(ctx, elements_from_json(ctx, self.require(key)?)?)?)
    }

    pub fn elements_or(&self, ctx: &MonoidCtx, key: &str, default: Vec<Element>) -> Result<Vec<Element>, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => Ok(elements_from_json(ctx, v)?),
        }
    }

    pub fn exhaustion(&self, ctx: &MonoidCtx) -> Result<Exhaustion, CliError> {
        exhaustion_from_json(ctx, self.get("exhaustion"))
    }

    /// A path given in the scenario, resolved against the scenario's directory.
    pub fn path(&self, key: &str) -> Result<PathBuf, CliError> {
        let p = self.require(key)?.as_str().ok_or_else(|| CliError::Usage(format!("{key} must be a path")))?;
        let p = Path::new(p);
        Ok(if p.is_absolute() { p.to_path_buf() } else { self.base.join(p) })
    }
}

pub fn sequence_from_json(v: &Value) -> Result<FolnerSeq, CliError> {
    Ok(build_folner(&BuilderSpec::from_json(v)?)?)
}

/// `"default"`, `"balls"`, `"ball_enumeration"`, `"heights"`, `"integers"`,
/// or `{"listed": [...]}`.
pub fn exhaustion_from_json(ctx: &MonoidCtx, v: Option<&Value>) -> Result<Exhaustion, CliError> {
    let Some(v) = v else { return Ok(Exhaustion::default_for(ctx)?) };
    if let Some(list) = v.get("listed") {
        return Ok(Exhaustion::listed(ctx, elements_from_json(ctx, list)?)?);
    }
    match v.as_str() {
        Some("default") => Ok(Exhaustion::default_for(ctx)?),
        Some("balls") => Ok(Exhaustion::balls(ctx)?),
        Some("ball_enumeration") => Ok(Exhaustion::ball_enumeration(ctx)?),
        Some("heights") => Ok(Exhaustion::heights(ctx)),
        Some("integers") if *ctx == MonoidCtx::int() => Ok(Exhaustion::integers()),
        _ => Err(CliError::Usage(format!("unknown exhaustion {v}"))),
    }
}

/// A finite subset of the action's target; `0` is added when missing only if
/// `add_zero` is set.
pub fn target_set(act: &ActionSpec, v: &Value, add_zero: bool) -> Result<AFinSet, CliError> {
    let t = act.target();
    let arr = v.as_array().ok_or_else(|| CliError::Usage(format!("expected a list of target elements, found {v}")))?;
    let mut elems = arr
        .iter()
        .map(|x| entile_core::algebra::json::target_elem_from_json(t, x))
        .collect::<Result<Vec<_>, _>>()?;
    if add_zero {
        elems.push(t.zero());
    }
    Ok(AFinSet::from_unsorted(t, elems))
}

pub fn element(ctx: &MonoidCtx, v: &Value) -> Result<Element, CliError> {
    Ok(element_from_json(ctx, v)?)
}
