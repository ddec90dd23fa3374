use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde_json::{json, Value};

use super::dlx::ExactCover;
use crate::algebra::json::{
    ctx_from_json, ctx_to_json, elements_from_json, elements_to_json, rational_from_json, rational_to_string,
};
use crate::algebra::{Element, MonoidCtx};
use crate::error::{Error, Result};
use crate::finset::FinSubset;
use crate::folner::RatProgression;

/// Search-node budget used when none is given.
pub const DEFAULT_TILE_BUDGET: u64 = 10_000_000;

/// `V = ⊔_{c∈C} cT`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileCert {
    pub v: FinSubset,
    pub t: FinSubset,
    pub c: FinSubset,
}

impl TileCert {
    pub fn ctx(&self) -> &MonoidCtx {
        self.v.ctx()
    }

    /// Disjointness, union and `|V| = |C||T|`, all rechecked from scratch.
    pub fn verify(&self) -> Result<()> {
        let ctx = self.v.ctx();
        if self.t.ctx() != ctx || self.c.ctx() != ctx {
            return Err(Error::ContextMismatch("tile certificate mixes monoids".into()));
        }
        if self.t.is_empty() {
            return Err(Error::Verification("empty tile".into()));
        }
        if self.v.len() != self.c.len() * self.t.len() {
            return Err(Error::Verification(format!(
                "|V| = {} but |C||T| = {}·{}",
                self.v.len(),
                self.c.len(),
                self.t.len()
            )));
        }
        let mut seen = HashSet::with_capacity(self.v.len());
        for c in self.c.iter() {
            for t in self.t.iter() {
                let x = ctx.mul_unchecked(c, t);
                if !self.v.contains(&x) {
                    return Err(Error::Verification(format!("{c}·{t} = {x} lies outside V")));
                }
                if !seen.insert(x.clone()) {
                    return Err(Error::Verification(format!("{x} is covered twice")));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": "tile",
            "ctx": ctx_to_json(self.ctx()),
            "V": elements_to_json(self.v.iter()),
            "T": elements_to_json(self.t.iter()),
            "C": elements_to_json(self.c.iter()),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let ctx = ctx_from_json(&v["ctx"])?;
        let set = |key: &str| -> Result<FinSubset> { FinSubset::new(&ctx, elements_from_json(&ctx, &v[key])?) };
        Ok(TileCert { v: set("V")?, t: set("T")?, c: set("C")? })
    }
}

/// The exact-cover formulation of "T tiles V": one row per admissible `c`.
struct TilingProblem {
    cands: Vec<Element>,
    ec: ExactCover,
}

/// All `c` with `cT ⊆ V`, in canonical order. In monoids only elements that
/// actually divide some `v` on the left are produced.
pub fn monotile_candidates(t: &FinSubset, v: &FinSubset) -> Result<Vec<Element>> {
    if t.ctx() != v.ctx() {
        return Err(Error::ContextMismatch(format!("tile over {}, region over {}", t.ctx(), v.ctx())));
    }
    let ctx = v.ctx();
    let Some(t0) = t.iter().next() else { return Ok(Vec::new()) };
    let mut out: Vec<Element> = v
        .iter()
        .filter_map(|x| ctx.left_quotient(x, t0))
        .filter(|c| t.iter().all(|y| v.contains(&ctx.mul_unchecked(c, y))))
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

impl TilingProblem {
    fn build(t: &FinSubset, v: &FinSubset) -> Result<Self> {
        let cands = monotile_candidates(t, v)?;
        let ctx = v.ctx();
        let index: HashMap<&Element, usize> = v.iter().enumerate().map(|(i, x)| (x, i)).collect();
        let mut ec = ExactCover::new(v.len());
        for c in &cands {
            ec.add_row(t.iter().map(|y| index[&ctx.mul_unchecked(c, y)]).collect());
        }
        Ok(TilingProblem { cands, ec })
    }

    fn cert(&self, t: &FinSubset, v: &FinSubset, rows: &[usize]) -> TileCert {
        let c = rows.iter().map(|&r| self.cands[r].clone()).collect();
        TileCert { v: v.clone(), t: t.clone(), c: FinSubset::from_unsorted(v.ctx(), c) }
    }
}

fn precheck(t: &FinSubset, v: &FinSubset) -> Result<bool> {
    if t.ctx() != v.ctx() {
        return Err(Error::ContextMismatch(format!("tile over {}, region over {}", t.ctx(), v.ctx())));
    }
    if t.is_empty() || v.is_empty() {
        return Err(Error::Invalid("tile and region must be non-empty".into()));
    }
    Ok(v.len() % t.len() == 0)
}

/// Decides whether `T` tiles `V` by left translates; `None` means no tiling exists.
pub fn find_monotile_cover(t: &FinSubset, v: &FinSubset) -> Result<Option<TileCert>> {
    find_monotile_cover_with(t, v, None, DEFAULT_TILE_BUDGET)
}

/// As [`find_monotile_cover`], optionally forcing `must ∈ C`.
pub fn find_monotile_cover_with(
    t: &FinSubset,
    v: &FinSubset,
    must: Option<&Element>,
    budget: u64,
) -> Result<Option<TileCert>> {
    if !precheck(t, v)? {
        return Ok(None);
    }
    if t.len() == 1 && must.is_none() {
        let ctx = v.ctx();
        let t0 = &t.elems()[0];
        let c: Option<Vec<Element>> = v.iter().map(|x| ctx.left_quotient(x, t0)).collect();
        return Ok(c.map(|c| TileCert { v: v.clone(), t: t.clone(), c: FinSubset::from_unsorted(ctx, c) }));
    }
    let p = TilingProblem::build(t, v)?;
    let forced = match must {
        Some(m) => match p.cands.binary_search(m) {
            Ok(i) => vec![i],
            Err(_) => return Ok(None),
        },
        None => vec![],
    };
    Ok(p.ec.first_solution(&forced, budget)?.map(|rows| p.cert(t, v, &rows)))
}

/// Every tiling of `V` by translates of `T` (at most `limit`), and whether
/// the enumeration was complete.
pub fn all_monotile_covers(
    t: &FinSubset,
    v: &FinSubset,
    must: Option<&Element>,
    budget: u64,
    limit: usize,
) -> Result<(Vec<TileCert>, bool)> {
    if !precheck(t, v)? {
        return Ok((Vec::new(), true));
    }
    let p = TilingProblem::build(t, v)?;
    let forced = match must {
        Some(m) => match p.cands.binary_search(m) {
            Ok(i) => vec![i],
            Err(_) => return Ok((Vec::new(), true)),
        },
        None => vec![],
    };
    let (sols, exhausted) = p.ec.all_solutions(&forced, budget, limit)?;
    Ok((sols.iter().map(|rows| p.cert(t, v, rows)).collect(), exhausted))
}

/// `X` tiles `Y` via `U` and `Y` tiles `Z` via `W` give `X` tiles `Z` via `WU`.
pub fn compose_certs(a: &TileCert, b: &TileCert) -> Result<TileCert> {
    if a.v != b.t {
        return Err(Error::Invalid("certificate chain mismatch: the first region is not the second tile".into()));
    }
    let ctx = a.ctx();
    let mut c = Vec::with_capacity(a.c.len() * b.c.len());
    for w in b.c.iter() {
        for u in a.c.iter() {
            c.push(ctx.mul_unchecked(w, u));
        }
    }
    let cert = TileCert { v: b.v.clone(), t: a.t.clone(), c: FinSubset::from_unsorted(ctx, c) };
    cert.verify()?;
    Ok(cert)
}

/// A tiling of an arithmetic progression of rationals by translates of another.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgTileCert {
    pub v: RatProgression,
    pub t: RatProgression,
    /// sorted translates
    pub c: Vec<BigRational>,
}

/// Positions of `c + T` inside `V`, in units of `V`'s step: `(offset, r)` with
/// `c + T = {offset + r·i}`.
fn unit_offset(v: &RatProgression, t: &RatProgression, c: &BigRational) -> Option<BigInt> {
    let off = (c + &t.start - &v.start) / &v.step;
    off.is_integer().then(|| off.to_integer())
}

fn unit_ratio(v: &RatProgression, t: &RatProgression) -> Option<u64> {
    if t.len == 1 {
        return Some(1);
    }
    let r = &t.step / &v.step;
    if r.is_integer() { r.to_integer().to_u64() } else { None }
}

impl ProgTileCert {
    /// Checks the cover class by class modulo the tile step, without listing `V`.
    pub fn verify(&self) -> Result<()> {
        let (m, n) = (self.v.len, self.t.len);
        if (self.c.len() as u128) * (n as u128) != m as u128 {
            return Err(Error::Verification(format!("|V| = {m} but |C||T| = {}·{n}", self.c.len())));
        }
        let r = unit_ratio(&self.v, &self.t)
            .ok_or_else(|| Error::Verification("tile step is not a multiple of the region step".into()))?;
        let mut classes: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for c in &self.c {
            let off = unit_offset(&self.v, &self.t, c)
                .ok_or_else(|| Error::Verification(format!("translate {} is off the lattice of V", rational_to_string(c))))?;
            if off.is_negative() {
                return Err(Error::Verification(format!("{} + T starts below V", rational_to_string(c))));
            }
            let off = off.to_u64().ok_or_else(|| Error::Verification("offset overflow".into()))?;
            if off as u128 + (r as u128) * (n as u128 - 1) >= m as u128 {
                return Err(Error::Verification(format!("{} + T ends beyond V", rational_to_string(c))));
            }
            classes.entry(off % r).or_default().push(off / r);
        }
        for rho in 0..r.min(m) {
            let count = (m - rho).div_ceil(r);
            let mut starts = classes.remove(&rho).unwrap_or_default();
            starts.sort_unstable();
            let mut next = 0u64;
            for s in starts {
                if s != next {
                    return Err(Error::Verification(format!(
                        "residue class {rho}: gap or overlap at position {next}"
                    )));
                }
                next += n;
            }
            if next != count {
                return Err(Error::Verification(format!("residue class {rho} covered up to {next} of {count}")));
            }
        }
        if !classes.is_empty() {
            return Err(Error::Verification("translates in an empty residue class".into()));
        }
        Ok(())
    }

    /// Expands to an ordinary certificate over ℚ (small cases only).
    pub fn materialize(&self, cap: u64) -> Result<TileCert> {
        let q = MonoidCtx::rational();
        let set = |p: &RatProgression| -> Result<FinSubset> {
            Ok(FinSubset::from_unsorted(&q, p.elements(cap)?.into_iter().map(Element::Rational).collect()))
        };
        Ok(TileCert {
            v: set(&self.v)?,
            t: set(&self.t)?,
            c: FinSubset::from_unsorted(&q, self.c.iter().cloned().map(Element::Rational).collect()),
        })
    }

    pub fn to_json(&self) -> Value {
        let prog = |p: &RatProgression| {
            json!({"start": rational_to_string(&p.start), "step": rational_to_string(&p.step), "len": p.len.to_string()})
        };
        json!({
            "kind": "progression_tile",
            "V": prog(&self.v),
            "T": prog(&self.t),
            "C": self.c.iter().map(rational_to_string).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let prog = |p: &Value| -> Result<RatProgression> {
            let len = crate::algebra::json::u64_from_json(&p["len"])?;
            RatProgression::new(rational_from_json(&p["start"])?, rational_from_json(&p["step"])?, len)
        };
        let c = v["C"]
            .as_array()
            .ok_or_else(|| Error::Invalid("C must be an array".into()))?
            .iter()
            .map(rational_from_json)
            .collect::<Result<Vec<_>>>()?;
        Ok(ProgTileCert { v: prog(&v["V"])?, t: prog(&v["T"])?, c })
    }
}

/// Decides whether the progression `T` tiles the progression `V` by
/// translates and returns the canonical translate set if so: residue classes
/// modulo the tile step are cut into consecutive runs.
pub fn progression_cover(t: &RatProgression, v: &RatProgression) -> Option<ProgTileCert> {
    let (m, n) = (v.len, t.len);
    if m % n != 0 {
        return None;
    }
    let r = unit_ratio(v, t)?;
    let mut c = Vec::with_capacity((m / n) as usize);
    for rho in 0..r.min(m) {
        let count = (m - rho).div_ceil(r);
        if count % n != 0 {
            return None;
        }
        for j in 0..count / n {
            let off = rho + j * n * r;
            c.push(&v.start + &v.step * BigInt::from(off) - &t.start);
        }
    }
    c.sort();
    let cert = ProgTileCert { v: v.clone(), t: t.clone(), c };
    debug_assert!(cert.verify().is_ok());
    Some(cert)
}

/// `C + φ(A)` for `A` tiling `Y` via `A.c` and `Y' = φ(Y)` tiling `Z` via `B.c`:
/// composes the two rational certificates into one for `φ(A.t)` in `B.v`.
pub fn compose_prog_certs(a: &ProgTileCert, scale: &BigRational, b: &ProgTileCert) -> Result<ProgTileCert> {
    if a.v.scale(scale)? != b.t {
        return Err(Error::Invalid("certificate chain mismatch".into()));
    }
    let mut c = Vec::with_capacity(a.c.len() * b.c.len());
    for w in &b.c {
        for u in &a.c {
            c.push(w + u * scale);
        }
    }
    c.sort();
    let cert = ProgTileCert { v: b.v.clone(), t: a.t.scale(scale)?, c };
    cert.verify()?;
    Ok(cert)
}
