use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use super::cert::{TileCert, DEFAULT_TILE_BUDGET};
use super::sequence::{extract_tiling_sequence, prefix_monotile, LevelCert, LevelTiling, LocalTilingCert, PrefixCert};
use crate::algebra::json::{ctx_to_json, element_to_json, elements_to_json};
use crate::algebra::{Element, MonoidCtx};
use crate::error::{Error, Result};
use crate::finset::FinSubset;
use crate::folner::{Exhaustion, Flags, FolnerSeq, Provenance};

/// One level `H_n = t·F_m` of a congruentized sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct CongruentLevel {
    pub n: usize,
    pub t: Element,
    pub m: usize,
    pub h: FinSubset,
    /// `K_n` with `H_n = ⊔_{k∈K_n} kH_{n−1}` (empty at `n = 0`).
    pub k: FinSubset,
    /// Levels `l` tried before one worked.
    pub tried: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Congruentized {
    pub ctx: MonoidCtx,
    pub enumeration: Vec<Element>,
    pub levels: Vec<CongruentLevel>,
}

/// Turns a locally monotileable Følner sequence of a group into a congruent
/// exhaustive one: `H_0 = {1}`, `g_n ∈ H_n`, each `H_n` a translate of some
/// `F_m`, and `H_{n+1} = ⊔_{k∈K_{n+1}} kH_n` with `1 ∈ K_{n+1}`.
/// `budget` bounds the total number of levels `l` examined.
pub fn congruentize(seq: &FolnerSeq, exh: &Exhaustion, depth: usize, budget: usize) -> Result<Congruentized> {
    let ctx = seq.ctx().clone();
    if !ctx.is_group() {
        return Err(Error::Unsupported(format!("congruentization needs a group, {ctx} is not one")));
    }
    if exh.ctx() != &ctx {
        return Err(Error::ContextMismatch(format!("sequence over {ctx}, enumeration over {}", exh.ctx())));
    }
    let g: Vec<Element> = (0..=depth).map(|i| exh.element(i)).collect::<Result<_>>()?;
    if g[0] != ctx.identity() {
        return Err(Error::Invalid("the enumeration must start at the identity".into()));
    }
    let id = ctx.identity();
    let h0 = FinSubset::identity(&ctx);
    if *seq.gen(0)? != h0 {
        return Err(Error::Invalid("F_0 must be the identity".into()));
    }
    let mut levels = vec![CongruentLevel {
        n: 0,
        t: id.clone(),
        m: 0,
        h: h0,
        k: FinSubset::empty(&ctx),
        tried: vec![],
    }];
    let mut tiling = extract_tiling_sequence(seq, 0, false, DEFAULT_TILE_BUDGET)?;
    let mut prefix_cache: HashMap<(usize, usize), TileCert> = HashMap::new();
    let mut attempts = 0usize;
    for n in 0..depth {
        let (t, m, h) = {
            let cur = &levels[n];
            (cur.t.clone(), cur.m, cur.h.clone())
        };
        let gn = &g[n + 1];
        let mut tried = Vec::new();
        let mut l = m;
        let found = loop {
            l += 1;
            attempts += 1;
            if attempts > budget {
                return Err(Error::Budget(format!(
                    "step {} (g = {gn}): budget of {budget} levels exhausted after trying l in {tried:?}",
                    n + 1
                )));
            }
            tried.push(l);
            let fl = seq.gen(l)?;
            // |F_l g ∖ F_l| ≤ |F_l| / |H_n|
            let d = seq.defect_at(l, gn)?;
            if d * BigRational::from_integer(BigInt::from(h.len())) > BigRational::from_integer(1.into()) {
                continue;
            }
            if tiling.depth() < l {
                tiling = extract_tiling_sequence(seq, l, false, DEFAULT_TILE_BUDGET)?;
            }
            let prefix = match prefix_cache.get(&(m, l)) {
                Some(c) => c.clone(),
                None => {
                    let c = match prefix_monotile(&tiling, m, l)? {
                        PrefixCert::Finite(c) => c,
                        PrefixCert::Progression(_) => {
                            return Err(Error::Unsupported("congruentize runs on materialized levels".into()))
                        }
                    };
                    prefix_cache.insert((m, l), c.clone());
                    c
                }
            };
            // D' = D t⁻¹, so that F_l = ⊔_{d'∈D'} d'H_n
            let t_inv = ctx.inv(&t)?;
            let d_prime: Vec<Element> = prefix.c.iter().map(|d| ctx.mul_unchecked(d, &t_inv)).collect();
            let d_prime = FinSubset::from_unsorted(&ctx, d_prime);
            let hg = h.translate_right(gn)?;
            let bar = d_prime.iter().find(|d| hg.iter().all(|x| fl.contains(&ctx.mul_unchecked(d, x))));
            if let Some(bar) = bar {
                break (bar.clone(), fl, d_prime);
            }
        };
        let (bar, fl, d_prime) = found;
        let bar_inv = ctx.inv(&bar)?;
        let h_next = fl.translate(&bar_inv)?;
        let k = d_prime.translate(&bar_inv)?;
        levels.push(CongruentLevel { n: n + 1, t: bar_inv, m: l, h: h_next, k, tried });
    }
    Ok(Congruentized { ctx, enumeration: g, levels })
}

impl Congruentized {
    pub fn h(&self, n: usize) -> &FinSubset {
        &self.levels[n].h
    }

    /// Rechecks conditions (1)–(4) and exhaustion of the enumerated prefix.
    pub fn verify(&self, seq: &FolnerSeq) -> Result<()> {
        let ctx = &self.ctx;
        if self.levels[0].h != FinSubset::identity(ctx) {
            return Err(Error::Verification("H_0 is not {1}".into()));
        }
        for lvl in &self.levels {
            let n = lvl.n;
            if !lvl.h.contains(&self.enumeration[n]) {
                return Err(Error::Verification(format!("g_{n} = {} is not in H_{n}", self.enumeration[n])));
            }
            if seq.gen(lvl.m)?.translate(&lvl.t)? != lvl.h {
                return Err(Error::Verification(format!("H_{n} is not t·F_{}", lvl.m)));
            }
            if n > 0 {
                if !lvl.k.contains_identity() {
                    return Err(Error::Verification(format!("1 is not in K_{n}")));
                }
                TileCert { v: lvl.h.clone(), t: self.levels[n - 1].h.clone(), c: lvl.k.clone() }
                    .verify()
                    .map_err(|e| Error::Verification(format!("level {n}: {e}")))?;
            }
        }
        let last = &self.levels.last().unwrap().h;
        for g in &self.enumeration {
            if !last.contains(g) {
                return Err(Error::Verification(format!("{g} is not covered by the last level")));
            }
        }
        Ok(())
    }

    /// `(H_n)` as a listed sequence claiming Følner, local monotileability,
    /// congruence and exhaustiveness.
    pub fn sequence(&self) -> Result<FolnerSeq> {
        FolnerSeq::listed(
            &self.ctx,
            self.levels.iter().map(|l| l.h.clone()).collect(),
            Flags::new(true, true, true, true),
            Provenance::new("congruentized", json!({"levels": self.levels.len()})),
        )
    }

    /// The tiling certificate `H_n = ⊔ kH_{n−1}` for every recorded level.
    pub fn tiling_cert(&self) -> LocalTilingCert {
        let levels = self.levels[1..]
            .iter()
            .map(|l| LevelCert {
                n: l.n,
                tiling: LevelTiling::Finite(TileCert {
                    v: l.h.clone(),
                    t: self.levels[l.n - 1].h.clone(),
                    c: l.k.clone(),
                }),
                identity_excluded: false,
            })
            .collect();
        LocalTilingCert {
            ctx: self.ctx.clone(),
            sequence: json!({"builder": "congruentized"}),
            levels,
            congruent: true,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": "congruentized",
            "ctx": ctx_to_json(&self.ctx),
            "enumeration": elements_to_json(self.enumeration.iter()),
            "levels": self.levels.iter().map(|l| json!({
                "n": l.n,
                "t": element_to_json(&l.t),
                "m": l.m,
                "H": elements_to_json(l.h.iter()),
                "K": elements_to_json(l.k.iter()),
                "tried": l.tried,
            })).collect::<Vec<_>>(),
        })
    }
}
