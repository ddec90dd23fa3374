use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::algebra::json::{element_to_json, elements_to_json};
use crate::algebra::{Element, QuotientSpec};
use crate::error::{Error, Result};
use crate::finset::FinSubset;
use crate::tiling::{LevelCert, LevelTiling, LocalTilingCert, TileCert};

/// The section `σ̃` associated with a tiling sequence of `K`: for
/// `f = k_n ⋯ k_1` with `k_j ∈ K_j`, `σ̃_n(f) = σ(k_n) ⋯ σ(k_1)`.
#[derive(Clone, Debug)]
pub struct SectionTable {
    pub quotient: QuotientSpec,
    /// `levels[n]`: `F_n → G`.
    levels: Vec<BTreeMap<Element, Element>>,
    cert: LocalTilingCert,
}

fn finite_level(cert: &LocalTilingCert, n: usize) -> Result<&TileCert> {
    match &cert.level(n)?.tiling {
        LevelTiling::Finite(c) => Ok(c),
        LevelTiling::Progression(_) => Err(Error::Unsupported("sections over rational quotients".into())),
    }
}

/// Builds `σ̃` on `F_0, …, F_N` for the `N` levels of `cert`.
pub fn associated_section(q: &QuotientSpec, cert: &LocalTilingCert) -> Result<SectionTable> {
    let k_ctx = q.quotient();
    if cert.ctx != k_ctx {
        return Err(Error::ContextMismatch(format!("certificate over {}, quotient is {k_ctx}", cert.ctx)));
    }
    let g = q.group();
    let mut levels = vec![BTreeMap::from([(k_ctx.identity(), g.identity())])];
    for n in 1..=cert.depth() {
        let c = finite_level(cert, n)?;
        let prev = &levels[n - 1];
        if c.t.len() != prev.len() || !c.t.iter().all(|f| prev.contains_key(f)) {
            return Err(Error::Verification(format!("level {n} tile is not F_{}", n - 1)));
        }
        let mut cur = BTreeMap::new();
        for k in c.c.iter() {
            let sk = q.section(k)?;
            for (f, sf) in prev {
                let prod = k_ctx.mul(k, f)?;
                if cur.insert(prod.clone(), g.mul(&sk, sf)?).is_some() {
                    return Err(Error::Verification(format!("{prod} has two factorizations at level {n}")));
                }
            }
        }
        if cur.len() != c.v.len() || !c.v.iter().all(|f| cur.contains_key(f)) {
            return Err(Error::Verification(format!("K_{n}F_{} is not F_{n}", n - 1)));
        }
        levels.push(cur);
    }
    for (n, lvl) in levels.iter().enumerate() {
        for (f, sf) in lvl {
            if q.project(sf)? != *f {
                return Err(Error::Verification(format!("π(σ̃_{n}({f})) ≠ {f}")));
            }
        }
    }
    Ok(SectionTable { quotient: q.clone(), levels, cert: cert.clone() })
}

impl SectionTable {
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn cert(&self) -> &LocalTilingCert {
        &self.cert
    }

    fn table(&self, n: usize) -> Result<&BTreeMap<Element, Element>> {
        self.levels
            .get(n)
            .ok_or_else(|| Error::Invalid(format!("section covers levels 0..={}, not {n}", self.depth())))
    }

    /// `σ̃_n(f)` for `f ∈ F_n`.
    pub fn at(&self, n: usize, f: &Element) -> Result<Element> {
        self.table(n)?
            .get(f)
            .cloned()
            .ok_or_else(|| Error::Invalid(format!("{f} is not in F_{n}")))
    }

    /// `σ̃(f)` read at the first level containing `f`.
    pub fn value(&self, f: &Element) -> Result<Element> {
        self.levels
            .iter()
            .find_map(|l| l.get(f).cloned())
            .ok_or_else(|| Error::Invalid(format!("{f} lies outside F_0 ∪ … ∪ F_{}", self.depth())))
    }

    /// The levels agree wherever they overlap (always so for congruent tilings).
    pub fn consistent(&self) -> bool {
        let mut seen: BTreeMap<&Element, &Element> = BTreeMap::new();
        for l in &self.levels {
            for (f, sf) in l {
                if let Some(old) = seen.insert(f, sf) {
                    if old != sf {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// `σ̃_n(F_n) ⊆ G`.
    pub fn lifted(&self, n: usize) -> Result<FinSubset> {
        Ok(FinSubset::from_unsorted(&self.quotient.group(), self.table(n)?.values().cloned().collect()))
    }

    /// `[k_n, …, k_1]` with `f = k_n ⋯ k_1`, found by peeling the top
    /// translate off level by level.
    pub fn factorization(&self, n: usize, f: &Element) -> Result<Vec<Element>> {
        let k_ctx = self.quotient.quotient();
        self.table(n)?.get(f).ok_or_else(|| Error::Invalid(format!("{f} is not in F_{n}")))?;
        let mut out = Vec::with_capacity(n);
        let mut rest = f.clone();
        for lvl in (1..=n).rev() {
            let c = finite_level(&self.cert, lvl)?;
            let below = &self.levels[lvl - 1];
            let mut hit = None;
            for k in c.c.iter() {
                let r = k_ctx.mul(&k_ctx.inv(k)?, &rest)?;
                if below.contains_key(&r) {
                    if hit.is_some() {
                        return Err(Error::Verification(format!("{rest} factors twice through K_{lvl}")));
                    }
                    hit = Some((k.clone(), r));
                }
            }
            let (k, r) = hit.ok_or_else(|| Error::Verification(format!("{rest} misses K_{lvl}F_{}", lvl - 1)))?;
            out.push(k);
            rest = r;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "quotient": self.quotient.name(),
            "depth": self.depth(),
            "consistent": self.consistent(),
            "levels": self.levels.iter().enumerate().map(|(n, l)| json!({
                "n": n,
                "values": l.iter().map(|(f, sf)| json!([element_to_json(f), element_to_json(sf)])).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// The tiling sequence of `σ̃(F_n)` in `G`: `σ̃(F_n) = ⊔_{k∈K_n} σ(k)σ̃(F_{n−1})`.
pub fn lift_tiling(st: &SectionTable) -> Result<LocalTilingCert> {
    let g = st.quotient.group();
    let mut levels = Vec::with_capacity(st.depth());
    for n in 1..=st.depth() {
        let base = st.cert.level(n)?;
        let k = finite_level(&st.cert, n)?;
        let c = k.c.iter().map(|x| st.quotient.section(x)).collect::<Result<Vec<_>>>()?;
        let cert = TileCert { v: st.lifted(n)?, t: st.lifted(n - 1)?, c: FinSubset::from_unsorted(&g, c) };
        cert.verify()
            .map_err(|e| Error::Verification(format!("lifted level {n} does not tile: {e}")))?;
        levels.push(LevelCert { n, tiling: LevelTiling::Finite(cert), identity_excluded: base.identity_excluded });
    }
    let congruent = levels.iter().all(|l| l.tiling.contains_identity());
    let lifted = LocalTilingCert {
        ctx: g,
        sequence: json!({"builder": "lifted", "params": {"quotient": st.quotient.name(), "base": st.cert.sequence}}),
        levels,
        congruent,
    };
    lifted.verify(None)?;
    Ok(lifted)
}

/// `σ(K_n)` as listed elements, for reports.
pub fn lifted_translates_json(cert: &LocalTilingCert) -> Value {
    Value::Array(cert.levels.iter().map(|l| elements_to_json(&l.tiling.translates())).collect())
}
