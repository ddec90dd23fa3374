//! Certificate checking that shares no code with the searches: only element
//! arithmetic and exact rationals are used.

use std::collections::{BTreeMap, BTreeSet};

use entile_core::algebra::json::{ctx_from_json, elements_from_json, rational_from_json, u64_from_json};
use entile_core::folner::FolnerSeq;
use entile_core::{Element, MonoidCtx};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde_json::Value;

type Check<T> = Result<T, String>;

fn field<'a>(v: &'a Value, key: &str) -> Check<&'a Value> {
    v.get(key).ok_or_else(|| format!("certificate lacks {key:?}"))
}

fn set(ctx: &MonoidCtx, v: &Value, key: &str) -> Check<Vec<Element>> {
    let elems = elements_from_json(ctx, field(v, key)?).map_err(|e| format!("{key}: {e}"))?;
    let mut seen = BTreeSet::new();
    for e in &elems {
        if !seen.insert(e) {
            return Err(format!("{key} lists {e} twice"));
        }
    }
    Ok(elems)
}

/// A finite certificate: `{cT : c ∈ C}` partitions `V`.
fn check_tile(v: &Value) -> Check<(MonoidCtx, BTreeSet<Element>, BTreeSet<Element>, BTreeSet<Element>)> {
    let ctx = ctx_from_json(field(v, "ctx")?).map_err(|e| e.to_string())?;
    let vs = set(&ctx, v, "V")?;
    let ts = set(&ctx, v, "T")?;
    let cs = set(&ctx, v, "C")?;
    let region: BTreeSet<Element> = vs.into_iter().collect();
    let mut covered = BTreeSet::new();
    for c in &cs {
        for t in &ts {
            let p = ctx.mul(c, t).map_err(|e| e.to_string())?;
            if !region.contains(&p) {
                return Err(format!("{c}·{t} = {p} lies outside V"));
            }
            if !covered.insert(p.clone()) {
                return Err(format!("{p} is covered twice"));
            }
        }
    }
    if covered.len() != region.len() {
        let missing = region.difference(&covered).next().unwrap();
        return Err(format!("{missing} is not covered"));
    }
    Ok((ctx, region, ts.into_iter().collect(), cs.into_iter().collect()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Prog {
    start: BigRational,
    step: BigRational,
    len: u64,
}

impl Prog {
    fn read(v: &Value) -> Check<Prog> {
        let start = rational_from_json(field(v, "start")?).map_err(|e| e.to_string())?;
        let step = rational_from_json(field(v, "step")?).map_err(|e| e.to_string())?;
        let len = u64_from_json(field(v, "len")?).map_err(|e| e.to_string())?;
        if len == 0 || !step.is_positive() {
            return Err("progressions need a positive step and length".into());
        }
        Ok(Prog { start, step, len })
    }

    /// Equal as sets (a one-point progression ignores its step).
    fn same_set(&self, other: &Prog) -> bool {
        self.len == other.len && self.start == other.start && (self.len == 1 || self.step == other.step)
    }

    fn is_origin(&self) -> bool {
        self.len == 1 && self.start.is_zero()
    }
}

/// `{c + T : c ∈ C}` partitions `V`, decided on positions in units of `V`'s step.
fn check_progression(v: &Value) -> Check<(Prog, Prog, Vec<BigRational>)> {
    let region = Prog::read(field(v, "V")?)?;
    let tile = Prog::read(field(v, "T")?)?;
    let cs = field(v, "C")?
        .as_array()
        .ok_or("C must be a list")?
        .iter()
        .map(|c| rational_from_json(c).map_err(|e| e.to_string()))
        .collect::<Check<Vec<_>>>()?;
    if cs.len() as u128 * tile.len as u128 != region.len as u128 {
        return Err(format!("|C|·|T| = {}·{} differs from |V| = {}", cs.len(), tile.len, region.len));
    }
    let stride = if tile.len == 1 {
        BigInt::from(1)
    } else {
        let r = &tile.step / &region.step;
        if !r.is_integer() {
            return Err("the tile step is not a multiple of the region step".into());
        }
        r.to_integer()
    };
    // runs [q, q + |T|) of positions p = ρ + stride·q, per residue ρ
    let mut runs: BTreeMap<BigInt, Vec<BigInt>> = BTreeMap::new();
    let last = BigInt::from(region.len - 1);
    for c in &cs {
        let pos = (c + &tile.start - &region.start) / &region.step;
        if !pos.is_integer() {
            return Err(format!("{c} + T is off the lattice of V"));
        }
        let first = pos.to_integer();
        let end = &first + &stride * BigInt::from(tile.len - 1);
        if first.is_negative() || end > last {
            return Err(format!("{c} + T leaves V"));
        }
        let rho = first.clone() % &stride;
        runs.entry(rho).or_default().push(&first / &stride);
    }
    let n = BigInt::from(tile.len);
    for (rho, mut qs) in runs {
        qs.sort();
        for w in qs.windows(2) {
            if &w[0] + &n > w[1] {
                return Err(format!("translates overlap in residue class {rho}"));
            }
        }
    }
    // no overlap, everything inside and |C||T| = |V|: a partition
    Ok((region, tile, cs))
}

#[derive(Clone, Debug)]
enum Level {
    Finite { ctx: MonoidCtx, v: BTreeSet<Element>, t: BTreeSet<Element>, c: BTreeSet<Element> },
    Prog { v: Prog, t: Prog, c: Vec<BigRational> },
}

fn check_level(v: &Value) -> Check<Level> {
    match v.get("kind").and_then(Value::as_str) {
        Some("tile") => {
            let (ctx, v, t, c) = check_tile(v)?;
            Ok(Level::Finite { ctx, v, t, c })
        }
        Some("progression_tile") => {
            let (v, t, c) = check_progression(v)?;
            Ok(Level::Prog { v, t, c })
        }
        other => Err(format!("unknown level certificate kind {other:?}")),
    }
}

fn check_local(v: &Value, seq: Option<&FolnerSeq>) -> Check<Vec<String>> {
    let ctx = ctx_from_json(field(v, "ctx")?).map_err(|e| e.to_string())?;
    let levels = field(v, "levels")?.as_array().ok_or("levels must be a list")?;
    let mut notes = Vec::new();
    let mut prev: Option<Level> = None;
    let mut all_identity = true;
    for (i, l) in levels.iter().enumerate() {
        let n = field(l, "n")?.as_u64().ok_or("level index must be an integer")? as usize;
        if n != i + 1 {
            return Err(format!("level {n} out of order"));
        }
        let lvl = check_level(field(l, "cert")?).map_err(|e| format!("level {n}: {e}"))?;
        match (&lvl, &prev) {
            (Level::Finite { ctx: c, t, .. }, None) => {
                if *c != ctx || t.len() != 1 || !t.contains(&ctx.identity()) {
                    return Err("level 1 is not tiled from {identity}".into());
                }
            }
            (Level::Prog { t, .. }, None) => {
                if !t.is_origin() {
                    return Err("level 1 is not tiled from {0}".into());
                }
            }
            (Level::Finite { t, .. }, Some(Level::Finite { v, .. })) if t == v => {}
            (Level::Prog { t, .. }, Some(Level::Prog { v, .. })) if t.same_set(v) => {}
            _ => return Err(format!("the tile of level {n} is not the region of level {}", n - 1)),
        }
        if let Some(seq) = seq {
            match &lvl {
                Level::Finite { v, .. } => {
                    let want = seq.gen(n).map_err(|e| e.to_string())?;
                    if want.len() != v.len() || !want.iter().all(|x| v.contains(x)) {
                        return Err(format!("level {n} region differs from F_{n}"));
                    }
                }
                Level::Prog { v, .. } => {
                    let want = seq.progression(n).ok_or(format!("F_{n} has no progression form"))?;
                    let want = Prog { start: want.start, step: want.step, len: want.len };
                    if !want.same_set(v) {
                        return Err(format!("level {n} region differs from F_{n}"));
                    }
                }
            }
        }
        let has_identity = match &lvl {
            Level::Finite { ctx, c, .. } => c.contains(&ctx.identity()),
            Level::Prog { c, .. } => c.iter().any(Zero::is_zero),
        };
        all_identity &= has_identity;
        let size = match &lvl {
            Level::Finite { v, .. } => v.len().to_string(),
            Level::Prog { v, .. } => v.len.to_string(),
        };
        notes.push(format!("level {n}: |F_{n}| = {size} tiled{}", if has_identity { ", identity in K" } else { "" }));
        prev = Some(lvl);
    }
    let claimed = field(v, "congruent")?.as_bool().ok_or("congruent must be a boolean")?;
    if claimed && !all_identity {
        return Err("claims congruence but some K_n misses the identity".into());
    }
    Ok(notes)
}

fn check_congruentized(v: &Value, seq: Option<&FolnerSeq>) -> Check<Vec<String>> {
    let ctx = ctx_from_json(field(v, "ctx")?).map_err(|e| e.to_string())?;
    let enumeration = set(&ctx, v, "enumeration")?;
    let levels = field(v, "levels")?.as_array().ok_or("levels must be a list")?;
    let mut notes = Vec::new();
    let mut prev: Option<BTreeSet<Element>> = None;
    for (n, l) in levels.iter().enumerate() {
        let h: BTreeSet<Element> = set(&ctx, l, "H")?.into_iter().collect();
        let t = entile_core::algebra::json::element_from_json(&ctx, field(l, "t")?).map_err(|e| e.to_string())?;
        let m = field(l, "m")?.as_u64().ok_or("m must be an integer")? as usize;
        let g = enumeration.get(n).ok_or(format!("no enumerated element g_{n}"))?;
        if !h.contains(g) {
            return Err(format!("g_{n} = {g} is not in H_{n}"));
        }
        if let Some(seq) = seq {
            let f = seq.gen(m).map_err(|e| e.to_string())?;
            let moved = f.iter().map(|x| ctx.mul(&t, x)).collect::<Result<BTreeSet<_>, _>>().map_err(|e| e.to_string())?;
            if moved != h {
                return Err(format!("H_{n} is not {t}·F_{m}"));
            }
        }
        match &prev {
            None => {
                if h.len() != 1 || !h.contains(&ctx.identity()) {
                    return Err("H_0 is not {identity}".into());
                }
            }
            Some(below) => {
                let k = set(&ctx, l, "K")?;
                if !k.contains(&ctx.identity()) {
                    return Err(format!("the identity is not in K_{n}"));
                }
                let mut covered = BTreeSet::new();
                for a in &k {
                    for b in below {
                        let p = ctx.mul(a, b).map_err(|e| e.to_string())?;
                        if !h.contains(&p) || !covered.insert(p) {
                            return Err(format!("K_{n}H_{} is not a partition of H_{n}", n - 1));
                        }
                    }
                }
                if covered.len() != h.len() {
                    return Err(format!("K_{n}H_{} does not cover H_{n}", n - 1));
                }
            }
        }
        notes.push(format!("H_{n} = {t}·F_{m}, |H_{n}| = {}", h.len()));
        prev = Some(h);
    }
    Ok(notes)
}

/// Checks one certificate file; returns one line per verified part.
pub fn verify_certificate(v: &Value, seq: Option<&FolnerSeq>) -> Check<Vec<String>> {
    match v.get("kind").and_then(Value::as_str) {
        Some("tile") => {
            let (_, region, tile, c) = check_tile(v)?;
            Ok(vec![format!("|V| = {} = |C|·|T| = {}·{}", region.len(), c.len(), tile.len())])
        }
        Some("progression_tile") => {
            let (region, tile, c) = check_progression(v)?;
            Ok(vec![format!("|V| = {} = |C|·|T| = {}·{}", region.len, c.len(), tile.len)])
        }
        Some("local_tiling") => check_local(v, seq),
        Some("congruentized") => check_congruentized(v, seq),
        Some("bundle") => {
            let mut notes = Vec::new();
            for (i, c) in field(v, "certificates")?.as_array().ok_or("certificates must be a list")?.iter().enumerate() {
                let label = c.get("label").and_then(Value::as_str).map(str::to_string).unwrap_or(format!("#{i}"));
                let inner = verify_certificate(c, None).map_err(|e| format!("{label}: {e}"))?;
                notes.extend(inner.into_iter().map(|x| format!("{label}: {x}")));
            }
            Ok(notes)
        }
        other => Err(format!("unknown certificate kind {other:?}")),
    }
}
