use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::cert::{
    compose_certs, compose_prog_certs, find_monotile_cover_with, progression_cover, ProgTileCert, TileCert,
};
use crate::algebra::json::{ctx_to_json, elements_to_json};
use crate::algebra::{Element, MonoidCtx};
use crate::error::{Error, Result};
use crate::finset::FinSubset;
use crate::folner::FolnerSeq;

/// How `F_{n−1}` tiles `F_n`.
#[derive(Clone, Debug, PartialEq)]
pub enum LevelTiling {
    Finite(TileCert),
    Progression(ProgTileCert),
}

impl LevelTiling {
    pub fn verify(&self) -> Result<()> {
        match self {
            LevelTiling::Finite(c) => c.verify(),
            LevelTiling::Progression(c) => c.verify(),
        }
    }

    /// `K_n`.
    pub fn translates(&self) -> Vec<Element> {
        match self {
            LevelTiling::Finite(c) => c.c.elems().to_vec(),
            LevelTiling::Progression(c) => c.c.iter().cloned().map(Element::Rational).collect(),
        }
    }

    pub fn translate_count(&self) -> usize {
        match self {
            LevelTiling::Finite(c) => c.c.len(),
            LevelTiling::Progression(c) => c.c.len(),
        }
    }

    pub fn contains_identity(&self) -> bool {
        match self {
            LevelTiling::Finite(c) => c.c.contains_identity(),
            LevelTiling::Progression(c) => c.c.iter().any(|x| x.is_zero()),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            LevelTiling::Finite(c) => c.to_json(),
            LevelTiling::Progression(c) => c.to_json(),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        match v["kind"].as_str() {
            Some("tile") => Ok(LevelTiling::Finite(TileCert::from_json(v)?)),
            Some("progression_tile") => Ok(LevelTiling::Progression(ProgTileCert::from_json(v)?)),
            other => Err(Error::Invalid(format!("unknown certificate kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelCert {
    pub n: usize,
    pub tiling: LevelTiling,
    /// Every tiling of this level with the identity among the translates was
    /// ruled out by exhaustive search.
    pub identity_excluded: bool,
}

/// Level-by-level tilings `F_n = ⊔_{k∈K_n} kF_{n−1}` for `1 ≤ n ≤ depth`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTilingCert {
    pub ctx: MonoidCtx,
    pub sequence: Value,
    pub levels: Vec<LevelCert>,
    /// The identity lies in every recorded `K_n`.
    pub congruent: bool,
}

impl LocalTilingCert {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, n: usize) -> Result<&LevelCert> {
        if n == 0 || n > self.levels.len() {
            return Err(Error::Invalid(format!("no level {n} recorded (depth {})", self.levels.len())));
        }
        Ok(&self.levels[n - 1])
    }

    /// Levels that are congruence-free: identity-containing tilings were exhausted.
    pub fn identity_excluded_levels(&self) -> Vec<usize> {
        self.levels.iter().filter(|l| l.identity_excluded).map(|l| l.n).collect()
    }

    /// Rechecks each level certificate, the chaining `T_n = V_{n−1}` and
    /// `|F_n| = ∏_{i≤n} |K_i|`; with `seq`, also that the regions are the
    /// sequence's own sets.
    pub fn verify(&self, seq: Option<&FolnerSeq>) -> Result<()> {
        let mut product = BigUint::one();
        for (i, lvl) in self.levels.iter().enumerate() {
            let n = i + 1;
            if lvl.n != n {
                return Err(Error::Verification(format!("level {} recorded at position {n}", lvl.n)));
            }
            lvl.tiling.verify()?;
            product *= BigUint::from(lvl.tiling.translate_count());
            let size = match &lvl.tiling {
                LevelTiling::Finite(c) => {
                    if n == 1 && !(c.t.len() == 1 && c.t.contains_identity()) {
                        return Err(Error::Verification("F_0 must be the identity".into()));
                    }
                    if n > 1 {
                        let LevelTiling::Finite(prev) = &self.levels[i - 1].tiling else {
                            return Err(Error::Verification("mixed certificate kinds".into()));
                        };
                        if prev.v != c.t {
                            return Err(Error::Verification(format!("level {n} tile is not F_{}", n - 1)));
                        }
                    }
                    if let Some(s) = seq {
                        if *s.gen(n)? != c.v || *s.gen(n - 1)? != c.t {
                            return Err(Error::Verification(format!("level {n} regions differ from the sequence")));
                        }
                    }
                    BigUint::from(c.v.len())
                }
                LevelTiling::Progression(c) => {
                    if n == 1 && !(c.t.len == 1 && c.t.start.is_zero()) {
                        return Err(Error::Verification("F_0 must be {0}".into()));
                    }
                    if n > 1 {
                        let LevelTiling::Progression(prev) = &self.levels[i - 1].tiling else {
                            return Err(Error::Verification("mixed certificate kinds".into()));
                        };
                        if prev.v != c.t {
                            return Err(Error::Verification(format!("level {n} tile is not F_{}", n - 1)));
                        }
                    }
                    if let Some(s) = seq {
                        if s.progression(n).as_ref() != Some(&c.v) || s.progression(n - 1).as_ref() != Some(&c.t) {
                            return Err(Error::Verification(format!("level {n} regions differ from the sequence")));
                        }
                    }
                    BigUint::from(c.v.len)
                }
            };
            if size != product {
                return Err(Error::Verification(format!("|F_{n}| = {size} but the K_i multiply to {product}")));
            }
        }
        let congruent = self.levels.iter().all(|l| l.tiling.contains_identity());
        if congruent != self.congruent {
            return Err(Error::Verification("congruent flag disagrees with the translate sets".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": "local_tiling",
            "ctx": ctx_to_json(&self.ctx),
            "sequence": self.sequence,
            "congruent": self.congruent,
            "levels": self.levels.iter().map(|l| json!({
                "n": l.n,
                "K": elements_to_json(l.tiling.translates().iter()),
                "identity_excluded": l.identity_excluded,
                "cert": l.tiling.to_json(),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let ctx = crate::algebra::json::ctx_from_json(&v["ctx"])?;
        let levels = v["levels"]
            .as_array()
            .ok_or_else(|| Error::Invalid("levels must be an array".into()))?
            .iter()
            .map(|l| {
                Ok(LevelCert {
                    n: l["n"].as_u64().ok_or_else(|| Error::Invalid("level n missing".into()))? as usize,
                    tiling: LevelTiling::from_json(&l["cert"])?,
                    identity_excluded: l["identity_excluded"].as_bool().unwrap_or(false),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LocalTilingCert {
            ctx,
            sequence: v["sequence"].clone(),
            levels,
            congruent: v["congruent"].as_bool().unwrap_or(false),
        })
    }
}

/// Finds `K_1, …, K_depth`. With `prefer_identity`, tilings with the identity
/// among the translates are searched first; a level whose identity-containing
/// tilings are exhausted is marked. A level with no tiling at all refutes the
/// sequence's local monotileability claim.
pub fn extract_tiling_sequence(
    seq: &FolnerSeq,
    depth: usize,
    prefer_identity: bool,
    budget: u64,
) -> Result<LocalTilingCert> {
    let ctx = seq.ctx().clone();
    let id = ctx.identity();
    let mut levels = Vec::with_capacity(depth);
    let symbolic = seq.progression(0).is_some();
    if symbolic {
        let p0 = seq.progression(0).unwrap();
        if !(p0.len == 1 && p0.start.is_zero()) {
            return Err(Error::Invalid("tiling sequences start from F_0 = {0}".into()));
        }
    } else if *seq.gen(0)? != FinSubset::identity(&ctx) {
        return Err(Error::Invalid("tiling sequences start from F_0 = {identity}".into()));
    }
    for n in 1..=depth {
        if symbolic {
            let (t, v) = match (seq.progression(n - 1), seq.progression(n)) {
                (Some(t), Some(v)) => (t, v),
                _ => return Err(Error::Budget(format!("level {n} has no symbolic form"))),
            };
            // a progression tiles a progression in at most one way
            let cert = progression_cover(&t, &v)
                .ok_or_else(|| Error::Refuted(format!("F_{} does not tile F_{n}", n - 1)))?;
            let has_id = cert.c.iter().any(|x| x.is_zero());
            levels.push(LevelCert { n, tiling: LevelTiling::Progression(cert), identity_excluded: !has_id });
            continue;
        }
        let t = seq.gen(n - 1)?;
        let v = seq.gen(n)?;
        let mut identity_excluded = false;
        let mut found = None;
        if prefer_identity {
            found = find_monotile_cover_with(&t, &v, Some(&id), budget)?;
            identity_excluded = found.is_none();
        }
        if found.is_none() {
            found = find_monotile_cover_with(&t, &v, None, budget)?;
        }
        let cert = found.ok_or_else(|| {
            Error::Refuted(format!("F_{} does not tile F_{n}: the sequence is not locally monotileable", n - 1))
        })?;
        levels.push(LevelCert { n, tiling: LevelTiling::Finite(cert), identity_excluded });
    }
    let congruent = levels.iter().all(|l| l.tiling.contains_identity());
    Ok(LocalTilingCert {
        ctx,
        sequence: json!({"builder": seq.provenance().builder, "params": seq.provenance().params}),
        levels,
        congruent,
    })
}

/// A certificate that `F_{n0}` tiles `F_m` via `K_m⋯K_{n0+1}`.
#[derive(Clone, Debug, PartialEq)]
pub enum PrefixCert {
    Finite(TileCert),
    Progression(ProgTileCert),
}

impl PrefixCert {
    pub fn translate_count(&self) -> usize {
        match self {
            PrefixCert::Finite(c) => c.c.len(),
            PrefixCert::Progression(c) => c.c.len(),
        }
    }

    pub fn verify(&self) -> Result<()> {
        match self {
            PrefixCert::Finite(c) => c.verify(),
            PrefixCert::Progression(c) => c.verify(),
        }
    }
}

pub fn prefix_monotile(cert: &LocalTilingCert, n0: usize, m: usize) -> Result<PrefixCert> {
    if n0 >= m {
        return Err(Error::Invalid(format!("need n0 < m, got {n0} and {m}")));
    }
    let first = cert.level(n0 + 1)?;
    let mut acc = match &first.tiling {
        LevelTiling::Finite(c) => PrefixCert::Finite(c.clone()),
        LevelTiling::Progression(c) => PrefixCert::Progression(c.clone()),
    };
    for n in n0 + 2..=m {
        let lvl = cert.level(n)?;
        acc = match (acc, &lvl.tiling) {
            (PrefixCert::Finite(a), LevelTiling::Finite(b)) => PrefixCert::Finite(compose_certs(&a, b)?),
            (PrefixCert::Progression(a), LevelTiling::Progression(b)) => {
                PrefixCert::Progression(compose_prog_certs(&a, &BigRational::one(), b)?)
            }
            _ => return Err(Error::Invalid("mixed certificate kinds".into())),
        };
    }
    acc.verify()?;
    Ok(acc)
}

/// The least `n ≤ max_level` such that some left translate `gX` lies in
/// `F_n`, with the identity preferred and otherwise the least `g`.
pub fn find_translate_into(x: &FinSubset, seq: &FolnerSeq, max_level: usize) -> Result<(Element, usize)> {
    let ctx = seq.ctx();
    if x.ctx() != ctx {
        return Err(Error::ContextMismatch(format!("X over {}, sequence over {}", x.ctx(), ctx)));
    }
    let Some(x0) = x.iter().next() else {
        return Ok((ctx.identity(), 0));
    };
    for n in 0..=max_level {
        let f = seq.gen(n)?;
        if f.len() < x.len() {
            continue;
        }
        if x.is_subset(&f) {
            return Ok((ctx.identity(), n));
        }
        let mut cands: Vec<Element> = f.iter().filter_map(|y| ctx.left_quotient(y, x0)).collect();
        cands.sort();
        if let Some(g) = cands.into_iter().find(|g| x.iter().all(|y| f.contains(&ctx.mul_unchecked(g, y)))) {
            return Ok((g, n));
        }
    }
    Err(Error::Budget(format!("no translate of X fits in F_0..F_{max_level}")))
}

