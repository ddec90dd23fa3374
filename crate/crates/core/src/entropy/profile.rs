use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{Pow, Zero};
use serde_json::{json, Value};

use super::subgroup::Induced;
use super::trajectory::{is_subgroup, trajectory_size_with, trajectory_with, DEFAULT_TRAJECTORY_CAP};
use crate::algebra::json::{target_elem_to_json, target_to_json};
use crate::algebra::ActionSpec;
use crate::error::{Error, Result};
use crate::finset::{covering_number, ln_big, AFinSet, FinSubset};
use crate::folner::FolnerSeq;

/// Reduced exponents up to this size are compared with exact powers.
pub const EXACT_EXPONENT_LIMIT: u64 = 10_000;
/// Relative tolerance of the floating comparison used beyond that.
pub const FLOAT_RTOL: f64 = 1e-9;

/// `ln(a)/p ≤ ln(b)/q` for positive integers `a, b`.
///
/// Equivalent to `a^q ≤ b^p`; exponents are first divided by `gcd(p, q)`.
pub fn log_ratio_le(a: &BigUint, p: u64, b: &BigUint, q: u64) -> bool {
    let g = p.gcd(&q).max(1);
    let (p, q) = (p / g, q / g);
    if p <= EXACT_EXPONENT_LIMIT && q <= EXACT_EXPONENT_LIMIT {
        return Pow::pow(a, q as u32) <= Pow::pow(b, p as u32);
    }
    let l = ln_big(a) / p as f64;
    let r = ln_big(b) / q as f64;
    l <= r + FLOAT_RTOL * l.abs().max(r.abs()).max(1.0)
}

/// One level of a profile: `value = ln(count)/|F_n|`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileRow {
    pub n: usize,
    pub f_size: usize,
    pub count: BigUint,
    pub value: f64,
}

impl ProfileRow {
    fn new(n: usize, f_size: usize, count: BigUint) -> Self {
        let value = if f_size == 0 { 0.0 } else { ln_big(&count) / f_size as f64 };
        ProfileRow { n, f_size, count, value }
    }
}

/// `ln|T_{F_n}(α, X)|/|F_n|` along a sequence, or `ℓ(T X, T Y)/|F_n|` for a
/// relative profile.
#[derive(Clone, Debug)]
pub struct EntropyProfile {
    pub action: String,
    pub sequence: String,
    pub x: AFinSet,
    pub y: Option<AFinSet>,
    pub rows: Vec<ProfileRow>,
    /// Set when the rows stop early; carries the budget message.
    pub stopped: Option<String>,
    /// The sequence claims local monotileability, so the rows must not increase.
    pub certified: bool,
}

impl EntropyProfile {
    /// Every consecutive pair compared exactly.
    pub fn non_increasing(&self) -> bool {
        self.first_increase().is_none()
    }

    pub fn first_increase(&self) -> Option<usize> {
        self.rows.windows(2).position(|w| {
            !log_ratio_le(&w[1].count, w[1].f_size as u64, &w[0].count, w[0].f_size as u64)
        })
        .map(|i| self.rows[i + 1].n)
    }

    /// The least value seen, the best upper estimate of `H_alg(α, X)` along a
    /// locally monotileable sequence.
    pub fn best(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.value).reduce(f64::min)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": if self.y.is_some() { "relative_profile" } else { "entropy_profile" },
            "action": self.action,
            "sequence": self.sequence,
            "target": target_to_json(self.x.target()),
            "X": self.x.iter().map(target_elem_to_json).collect::<Vec<_>>(),
            "Y": self.y.as_ref().map(|y| y.iter().map(target_elem_to_json).collect::<Vec<_>>()),
            "rows": self.rows.iter().map(|r| json!({
                "n": r.n, "F": r.f_size, "count": r.count.to_string(), "value_nats": r.value,
            })).collect::<Vec<_>>(),
            "certified": self.certified,
            "non_increasing": self.non_increasing(),
            "best": self.best(),
            "stopped": self.stopped,
        })
    }
}

fn run_rows<F>(seq: &FolnerSeq, depth: usize, mut row: F) -> Result<(Vec<ProfileRow>, Option<String>)>
where
    F: FnMut(&FinSubset) -> Result<BigUint>,
{
    let mut rows = Vec::new();
    for n in 0..=depth {
        let f = match seq.gen(n) {
            Ok(f) => f,
            Err(e) if e.is_budget() => return Ok((rows, Some(e.to_string()))),
            Err(e) => return Err(e),
        };
        match row(&f) {
            Ok(c) => rows.push(ProfileRow::new(n, f.len(), c)),
            Err(e) if e.is_budget() => return Ok((rows, Some(format!("n={n}: {e}")))),
            Err(e) => return Err(e),
        }
    }
    Ok((rows, None))
}

pub fn entropy_profile(act: &ActionSpec, seq: &FolnerSeq, x: &AFinSet, depth: usize) -> Result<EntropyProfile> {
    entropy_profile_with(act, seq, x, depth, DEFAULT_TRAJECTORY_CAP)
}

/// Rows `n = 0..=depth`; a budget failure ends the rows and is recorded in
/// [`EntropyProfile::stopped`].
pub fn entropy_profile_with(
    act: &ActionSpec,
    seq: &FolnerSeq,
    x: &AFinSet,
    depth: usize,
    cap: usize,
) -> Result<EntropyProfile> {
    x.require_zero("X")?;
    if seq.ctx() != act.monoid() {
        return Err(Error::ContextMismatch(format!("sequence in {}, action by {}", seq.ctx(), act.monoid())));
    }
    let (rows, stopped) = run_rows(seq, depth, |f| trajectory_size_with(act, f, x, cap))?;
    Ok(EntropyProfile {
        action: act.to_string(),
        sequence: seq.provenance().builder.clone(),
        x: x.clone(),
        y: None,
        rows,
        stopped,
        certified: seq.flags().locally_monotileable,
    })
}

/// `μ(T_F X, T_F Y)`.
///
/// When `Y` is a subgroup so is `T_F Y`, and by `T_F(X+Y) = T_F X + T_F Y` the
/// covering number is the index `|T_F(X+Y)| / |T_F Y|`. Otherwise both
/// trajectories are materialized and covered by search.
pub fn relative_count(act: &ActionSpec, f: &FinSubset, x: &AFinSet, y: &AFinSet, cap: usize) -> Result<BigUint> {
    if is_subgroup(y) {
        let xy = x.minkowski_sum(y)?;
        let big = trajectory_size_with(act, f, &xy, cap)?;
        let small = trajectory_size_with(act, f, y, cap)?;
        let (q, r) = big.div_rem(&small);
        if !r.is_zero() {
            return Err(Error::Verification("trajectory of a subgroup does not divide".into()));
        }
        return Ok(q);
    }
    let tx = trajectory_with(act, f, x, cap)?;
    let ty = trajectory_with(act, f, y, cap)?;
    Ok(BigUint::from(covering_number(&tx, &ty)?.0))
}

/// Rows `μ(T_{F_n} X, T_{F_n} Y)`; every row is checked against
/// `μ ≤ μ(X, Y)^{|F_n|}`.
pub fn relative_profile(
    act: &ActionSpec,
    seq: &FolnerSeq,
    x: &AFinSet,
    y: &AFinSet,
    depth: usize,
) -> Result<EntropyProfile> {
    x.require_zero("X")?;
    y.require_zero("Y")?;
    let base = BigUint::from(covering_number(x, y)?.0);
    let (rows, stopped) = run_rows(seq, depth, |f| {
        let c = relative_count(act, f, x, y, DEFAULT_TRAJECTORY_CAP)?;
        if c > Pow::pow(&base, f.len() as u32) {
            return Err(Error::Refuted(format!(
                "mu(T X, T Y) = {c} exceeds mu(X, Y)^|F| = {base}^{}",
                f.len()
            )));
        }
        Ok(c)
    })?;
    Ok(EntropyProfile {
        action: act.to_string(),
        sequence: seq.provenance().builder.clone(),
        x: x.clone(),
        y: Some(y.clone()),
        rows,
        stopped,
        certified: seq.flags().locally_monotileable,
    })
}

/// One level of the additivity check.
#[derive(Clone, Debug, PartialEq)]
pub struct AdditionRow {
    pub n: usize,
    pub f_size: usize,
    /// `|T(α, Z+Y)|`.
    pub whole: BigUint,
    /// `|T(α_B, Y)|`.
    pub sub: BigUint,
    /// `|T(α_{A/B}, π X)|`.
    pub quotient: BigUint,
    pub value_whole: f64,
    pub value_sub: f64,
    pub value_quotient: f64,
    /// `value_whole − value_sub − value_quotient`; exactly `0.0` when the
    /// counts multiply.
    pub residual: f64,
    /// `|T(Z+Y)| ≥ |T_B(Y)|·|T_{A/B}(πX)|`, compared exactly.
    pub superadditive: bool,
}

#[derive(Clone, Debug)]
pub struct AdditionCase {
    pub x: AFinSet,
    pub y: AFinSet,
    /// Lift of `π(X)`: `π(Z) = π(X)`, `(Z − Z) ∩ B = {0}`.
    pub z: AFinSet,
    pub pi_x: AFinSet,
    pub y_sub: AFinSet,
    pub rows: Vec<AdditionRow>,
    pub stopped: Option<String>,
}

impl AdditionCase {
    pub fn exact(&self) -> bool {
        self.rows.iter().all(|r| r.residual == 0.0)
    }

    pub fn superadditive(&self) -> bool {
        self.rows.iter().all(|r| r.superadditive)
    }
}

#[derive(Clone, Debug)]
pub struct AdditionReport {
    pub action: String,
    pub subgroup: String,
    pub sequence: String,
    pub cases: Vec<AdditionCase>,
}

impl AdditionReport {
    pub fn to_json(&self) -> Value {
        let set = |s: &AFinSet| s.iter().map(target_elem_to_json).collect::<Vec<_>>();
        json!({
            "kind": "addition_report",
            "action": self.action,
            "subgroup": self.subgroup,
            "sequence": self.sequence,
            "cases": self.cases.iter().map(|c| json!({
                "X": set(&c.x), "Y": set(&c.y), "Z": set(&c.z),
                "pi_X": set(&c.pi_x), "Y_in_B": set(&c.y_sub),
                "rows": c.rows.iter().map(|r| json!({
                    "n": r.n, "F": r.f_size,
                    "T_whole": r.whole.to_string(), "T_sub": r.sub.to_string(), "T_quotient": r.quotient.to_string(),
                    "value_whole": r.value_whole, "value_sub": r.value_sub, "value_quotient": r.value_quotient,
                    "residual": r.residual, "superadditive": r.superadditive,
                })).collect::<Vec<_>>(),
                "stopped": c.stopped,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Values of `α` on `Z + Y`, of `α_B` on `Y` and of `α_{A/B}` on `π(X)` for
/// every pair `(X, Y)`, with the residual per level.
pub fn addition_report(
    ind: &Induced,
    xs: &[AFinSet],
    ys: &[AFinSet],
    seq: &FolnerSeq,
    depth: usize,
) -> Result<AdditionReport> {
    if !seq.flags().locally_monotileable {
        return Err(Error::Invalid("the addition report needs a locally monotileable sequence".into()));
    }
    let mut cases = Vec::new();
    for x in xs {
        x.require_zero("X")?;
        for y in ys {
            y.require_zero("Y")?;
            let y_sub = ind.sub_set(y)?;
            let z = ind.lift(x)?;
            let pi_x = ind.project_set(x)?;
            let zy = z.minkowski_sum(y)?;
            let mut rows = Vec::new();
            let mut stopped = None;
            for n in 0..=depth {
                let f = seq.gen(n)?;
                let counts = (|| -> Result<(BigUint, BigUint, BigUint)> {
                    let whole = trajectory_size_with(&ind.act, &f, &zy, DEFAULT_TRAJECTORY_CAP)?;
                    let sub = trajectory_size_with(&ind.sub, &f, &y_sub, DEFAULT_TRAJECTORY_CAP)?;
                    let quo = trajectory_size_with(&ind.quotient, &f, &pi_x, DEFAULT_TRAJECTORY_CAP)?;
                    Ok((whole, sub, quo))
                })();
                let (whole, sub, quotient) = match counts {
                    Ok(c) => c,
                    Err(e) if e.is_budget() => {
                        stopped = Some(format!("n={n}: {e}"));
                        break;
                    }
                    Err(e) => return Err(e),
                };
                let k = f.len() as f64;
                let prod = &sub * &quotient;
                let residual = if whole == prod { 0.0 } else { (ln_big(&whole) - ln_big(&prod)) / k };
                rows.push(AdditionRow {
                    n,
                    f_size: f.len(),
                    value_whole: ln_big(&whole) / k,
                    value_sub: ln_big(&sub) / k,
                    value_quotient: ln_big(&quotient) / k,
                    residual,
                    superadditive: whole >= prod,
                    whole,
                    sub,
                    quotient,
                });
            }
            cases.push(AdditionCase { x: x.clone(), y: y.clone(), z, pi_x, y_sub, rows, stopped });
        }
    }
    Ok(AdditionReport {
        action: ind.act.to_string(),
        subgroup: ind.spec.name(),
        sequence: seq.provenance().builder.clone(),
        cases,
    })
}

