use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::extension::{tile_kernel_set, HSet};
use crate::algebra::json::{element_to_json, rational_to_string};
use crate::algebra::{Element, MonoidCtx};
use crate::error::{Error, Result};
use crate::finset::FinSubset;
use crate::folner::{Flags, FolnerSeq, Provenance, RatProgression};
use crate::tiling::{LevelCert, LevelTiling, LocalTilingCert, ProgTileCert, TileCert, DEFAULT_TILE_BUDGET};

/// An abelian group written as an increasing union `G_0 ≤ G_1 ≤ …` with
/// finite cyclic-type quotients, each with the obvious section.
#[derive(Clone, Debug, PartialEq)]
pub enum DiagonalChain {
    /// `ℚ ⊇ ⟨1/d_n⟩` with `d_0 = 1`, `d_{n+1} = r_n d_n`; `G_0 = ℤ` carries
    /// the dyadic intervals `[0, 2^j)`.
    Rational { ratios: Vec<u64> },
    /// `⊕_i` of the (periodic) fibers, `G_n` the elements supported below `n`;
    /// `G_0` is trivial.
    FiniteSum { fibers: Vec<Vec<u64>> },
}

impl DiagonalChain {
    /// `ℚ = ⋃⟨1/n!⟩`, as `⟨1/(n+1)!⟩` for `n = 0, …, links`.
    pub fn factorial(links: usize) -> Self {
        DiagonalChain::Rational { ratios: (2..links as u64 + 2).collect() }
    }

    pub fn links(&self) -> Option<usize> {
        match self {
            DiagonalChain::Rational { ratios } => Some(ratios.len()),
            DiagonalChain::FiniteSum { .. } => None,
        }
    }

    pub fn ctx(&self) -> Result<MonoidCtx> {
        match self {
            DiagonalChain::Rational { .. } => Ok(MonoidCtx::rational()),
            DiagonalChain::FiniteSum { fibers } => MonoidCtx::direct_sum(fibers.clone()),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            DiagonalChain::Rational { ratios } => json!({"chain": "rational", "ratios": ratios}),
            DiagonalChain::FiniteSum { fibers } => json!({"chain": "finite_sum", "fibers": fibers}),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let list = |k: &str| -> Result<&Vec<Value>> {
            v.get(k).and_then(Value::as_array).ok_or_else(|| Error::Invalid(format!("chain needs an array {k:?}")))
        };
        match v.get("chain").and_then(Value::as_str) {
            Some("rational") => Ok(DiagonalChain::Rational {
                ratios: list("ratios")?
                    .iter()
                    .map(crate::algebra::json::u64_from_json)
                    .collect::<Result<_>>()?,
            }),
            Some("factorial") => Ok(DiagonalChain::factorial(
                v.get("links").map(crate::algebra::json::u64_from_json).transpose()?.unwrap_or(4) as usize,
            )),
            Some("finite_sum") => Ok(DiagonalChain::FiniteSum {
                fibers: list("fibers")?
                    .iter()
                    .map(crate::algebra::json::moduli_from_json)
                    .collect::<Result<_>>()?,
            }),
            other => Err(Error::Invalid(format!("unknown chain {other:?}"))),
        }
    }
}

/// `defect(E_{n+1,j}, g) ≤ defect(E_{n,j}, g)` for `g ∈ G_n`, at `j = n + 1`.
#[derive(Clone, Debug)]
pub struct DefectCheck {
    pub g: Element,
    pub n: usize,
    pub upper: BigRational,
    pub lower: BigRational,
}

impl DefectCheck {
    pub fn holds(&self) -> bool {
        self.upper <= self.lower
    }
}

#[derive(Clone, Debug)]
pub struct Diagonal {
    pub chain: DiagonalChain,
    /// `m_{n,j}` for every pair the construction touched.
    pub m: BTreeMap<(usize, usize), usize>,
    /// `E_{n,n}`.
    pub levels: Vec<HSet>,
    /// `E_{n+1,n+1} = ⊔_{a∈A_{n+1}} aE_{n,n}`.
    pub cert: LocalTilingCert,
    pub seq: FolnerSeq,
    pub checks: Vec<DefectCheck>,
}

struct Engine<'a> {
    chain: &'a DiagonalChain,
    ctx: MonoidCtx,
    horizon: usize,
    e: HashMap<(usize, usize), HSet>,
    m: BTreeMap<(usize, usize), usize>,
}

impl Engine<'_> {
    fn denominator(&self, n: usize) -> BigInt {
        match self.chain {
            DiagonalChain::Rational { ratios } => ratios[..n].iter().map(|&r| BigInt::from(r)).product(),
            DiagonalChain::FiniteSum { .. } => BigInt::one(),
        }
    }

    fn identity(&self) -> HSet {
        match self.chain {
            DiagonalChain::Rational { .. } => {
                HSet::Prog(RatProgression { start: BigRational::zero(), step: BigRational::one(), len: 1 })
            }
            DiagonalChain::FiniteSum { .. } => HSet::Finite(Arc::new(FinSubset::identity(&self.ctx))),
        }
    }

    /// `R_n = σ_n(G_{n+1}/G_n)`.
    fn transversal(&self, n: usize) -> Result<Vec<Element>> {
        match self.chain {
            DiagonalChain::Rational { ratios } => {
                let d = self.denominator(n + 1);
                Ok((0..ratios[n]).map(|i| Element::Rational(BigRational::new(BigInt::from(i), d.clone()))).collect())
            }
            DiagonalChain::FiniteSum { .. } => {
                let moduli = self.ctx.fiber_at(n as u64).expect("periodic fibers").to_vec();
                let mut out = vec![vec![]];
                for &mi in &moduli {
                    out = out.into_iter().flat_map(|p: Vec<u64>| (0..mi).map(move |x| [p.clone(), vec![x]].concat())).collect();
                }
                out.into_iter()
                    .map(|r| self.ctx.canonicalize(Element::Sparse(BTreeMap::from([(n as u64, r)]))))
                    .collect()
            }
        }
    }

    /// Test block `H_j ⊆ G_n`.
    fn block(&self, n: usize, j: usize) -> Result<Vec<Element>> {
        match self.chain {
            DiagonalChain::Rational { .. } => {
                let d = self.denominator(n);
                Ok((-(j as i64)..=j as i64).map(|i| Element::Rational(BigRational::new(BigInt::from(i), d.clone()))).collect())
            }
            DiagonalChain::FiniteSum { .. } => {
                let mut g = vec![self.ctx.identity()];
                for i in 0..n {
                    let r = self.transversal(i)?;
                    g = g.iter().flat_map(|x| r.iter().map(move |y| (x, y))).map(|(x, y)| self.ctx.mul(x, y)).collect::<Result<_>>()?;
                }
                Ok(g)
            }
        }
    }

    fn base(&self, j: usize) -> HSet {
        match self.chain {
            DiagonalChain::Rational { .. } => HSet::Prog(RatProgression {
                start: BigRational::zero(),
                step: BigRational::one(),
                len: 1u64 << j,
            }),
            DiagonalChain::FiniteSum { .. } => self.identity(),
        }
    }

    /// `E_{n,j}`.
    fn e(&mut self, n: usize, j: usize) -> Result<HSet> {
        if let Some(x) = self.e.get(&(n, j)) {
            return Ok(x.clone());
        }
        let out = if n == 0 {
            if j >= 62 {
                return Err(Error::Budget(format!("base level {j} is too large")));
            }
            self.base(j)
        } else if j == 0 {
            self.identity()
        } else {
            let m = self.m(n, j)?;
            let lower = self.e(n - 1, m)?;
            self.add_transversal(&lower, n - 1)?
        };
        self.e.insert((n, j), out.clone());
        Ok(out)
    }

    /// `m_{n,j}`: the least index above `max(j, m_{n,j−1})` whose level is
    /// `1/j`-invariant under the test block of `G_{n−1}`.
    fn m(&mut self, n: usize, j: usize) -> Result<usize> {
        if j == 0 {
            return Ok(0);
        }
        if let Some(&x) = self.m.get(&(n, j)) {
            return Ok(x);
        }
        let prev = self.m(n, j - 1)?;
        let bound = BigRational::new(BigInt::one(), BigInt::from(j));
        let block = self.block(n - 1, j)?;
        for cand in prev.max(j) + 1..=self.horizon {
            let e = self.e(n - 1, cand)?;
            let size = BigRational::from_integer(e.len().into());
            let mut ok = true;
            for h in &block {
                if BigRational::from_integer(e.leaving(h)?.into()) / &size >= bound {
                    ok = false;
                    break;
                }
            }
            if ok {
                self.m.insert((n, j), cand);
                return Ok(cand);
            }
        }
        Err(Error::Budget(format!(
            "m_{{{n},{j}}}: no index in ({}, {}] with defect below 1/{j}",
            prev.max(j),
            self.horizon
        )))
    }

    /// `E + R_n`, checked to be a disjoint union.
    fn add_transversal(&self, e: &HSet, n: usize) -> Result<HSet> {
        let r = self.transversal(n)?;
        match e {
            HSet::Prog(p) => {
                let d = BigRational::from_integer(self.denominator(n));
                if !p.start.is_zero() || &p.step * &d != BigRational::one() {
                    return Err(Error::Verification(format!("E is not a progression of step 1/{d}")));
                }
                let step = BigRational::new(BigInt::one(), self.denominator(n + 1));
                Ok(HSet::Prog(RatProgression { start: BigRational::zero(), step, len: p.len * r.len() as u64 }))
            }
            HSet::Finite(f) => {
                let mut out = Vec::with_capacity(f.len() * r.len());
                for x in f.iter() {
                    for y in &r {
                        out.push(self.ctx.mul(x, y)?);
                    }
                }
                let s = FinSubset::from_unsorted(&self.ctx, out);
                if s.len() != f.len() * r.len() {
                    return Err(Error::Verification(format!("E + R_{n} is not a disjoint union")));
                }
                Ok(HSet::Finite(Arc::new(s)))
            }
        }
    }

    fn defect(&self, e: &HSet, g: &Element) -> Result<BigRational> {
        Ok(BigRational::new(e.leaving(g)?.into(), e.len().into()))
    }

    /// `A_{n+1} = R_n + M` with `E_{n,m} = ⊔_{μ∈M} μ + E_{n,n}`, `m = m_{n+1,n+1}`.
    fn level_tiling(&mut self, n: usize) -> Result<LevelTiling> {
        let m = self.m(n + 1, n + 1)?;
        let t = self.e(n, n)?;
        let mid = self.e(n, m)?;
        let v = self.e(n + 1, n + 1)?;
        let inner = tile_kernel_set(&t, &mid, DEFAULT_TILE_BUDGET)?
            .ok_or_else(|| Error::Verification(format!("E_{{{n},{n}}} does not tile E_{{{n},{m}}}")))?;
        let r = self.transversal(n)?;
        let mut a = Vec::with_capacity(r.len() * inner.translate_count());
        for x in &r {
            for y in inner.translates() {
                a.push(self.ctx.mul(x, &y)?);
            }
        }
        let tiling = match (t, v) {
            (HSet::Prog(t), HSet::Prog(v)) => {
                let mut c: Vec<BigRational> = a
                    .into_iter()
                    .map(|x| match x {
                        Element::Rational(r) => r,
                        _ => unreachable!("rational chain"),
                    })
                    .collect();
                c.sort();
                LevelTiling::Progression(ProgTileCert { v, t, c })
            }
            (HSet::Finite(t), HSet::Finite(v)) => LevelTiling::Finite(TileCert {
                v: (*v).clone(),
                t: (*t).clone(),
                c: FinSubset::from_unsorted(&self.ctx, a),
            }),
            _ => unreachable!("one chain, one representation"),
        };
        tiling.verify()?;
        Ok(tiling)
    }
}

/// The diagonal `(E_{n,n})` of the iterated finite-index construction along
/// the chain, with level tilings and the defect comparisons behind its
/// Følner property. `samples` are checked from the first `G_t` containing them.
pub fn diagonal_folner(chain: &DiagonalChain, depth: usize, horizon: usize, samples: &[Element]) -> Result<Diagonal> {
    if let Some(links) = chain.links() {
        if depth > links {
            return Err(Error::Invalid(format!("the chain has {links} links, asked for depth {depth}")));
        }
        if let DiagonalChain::Rational { ratios } = chain {
            if ratios.iter().any(|&r| r < 2) {
                return Err(Error::Invalid("chain ratios must be at least 2".into()));
            }
        }
    }
    let ctx = chain.ctx()?;
    let mut eng = Engine { chain, ctx: ctx.clone(), horizon, e: HashMap::new(), m: BTreeMap::new() };
    let mut levels = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        levels.push(eng.e(n, n)?);
    }
    let mut cert_levels = Vec::with_capacity(depth);
    for n in 0..depth {
        let tiling = eng.level_tiling(n)?;
        cert_levels.push(LevelCert { n: n + 1, tiling, identity_excluded: false });
    }
    let congruent = cert_levels.iter().all(|l| l.tiling.contains_identity());
    let cert = LocalTilingCert {
        ctx: ctx.clone(),
        sequence: json!({"builder": "diagonal", "params": chain.to_json()}),
        levels: cert_levels,
        congruent,
    };
    cert.verify(None)?;

    let mut checks = Vec::new();
    for g in samples {
        ctx.check(g)?;
        let t = (0..=depth)
            .find(|&t| in_chain(chain, g, t))
            .ok_or_else(|| Error::Invalid(format!("{g} is not in G_{depth}")))?;
        for n in t..depth {
            let (hi, lo) = (eng.e(n + 1, n + 1)?, eng.e(n, n + 1)?);
            let upper = eng.defect(&hi, g)?;
            let lower = eng.defect(&lo, g)?;
            checks.push(DefectCheck { g: g.clone(), n, upper, lower });
        }
    }
    if let Some(bad) = checks.iter().find(|c| !c.holds()) {
        return Err(Error::Verification(format!(
            "defect of {} grew from {} to {} at n={}",
            bad.g, bad.lower, bad.upper, bad.n
        )));
    }

    let lv = Arc::new(levels.clone());
    let lv2 = lv.clone();
    let lv3 = lv.clone();
    let c2 = ctx.clone();
    let mut seq = FolnerSeq::from_fn(
        &ctx,
        Flags::new(true, true, congruent, false),
        Provenance::new("diagonal", chain.to_json()),
        move |n| {
            let e = lv.get(n).ok_or_else(|| Error::Budget(format!("diagonal recorded {} levels", lv.len())))?;
            Ok(FinSubset::from_unsorted(&c2, e.elements(crate::folner::DEFAULT_SIZE_CAP as u64)?))
        },
    )
    .with_size(move |n| lv2.get(n).map(HSet::len));
    if matches!(chain, DiagonalChain::Rational { .. }) {
        seq = seq.with_progression(move |n| match lv3.get(n) {
            Some(HSet::Prog(p)) => Some(p.clone()),
            _ => None,
        });
    }
    Ok(Diagonal { chain: chain.clone(), m: eng.m, levels, cert, seq, checks })
}

/// `g ∈ G_t`.
fn in_chain(chain: &DiagonalChain, g: &Element, t: usize) -> bool {
    match (chain, g) {
        (DiagonalChain::Rational { ratios }, Element::Rational(x)) => {
            let d: BigInt = ratios[..t.min(ratios.len())].iter().map(|&r| BigInt::from(r)).product();
            (x * BigRational::from_integer(d)).is_integer()
        }
        (DiagonalChain::FiniteSum { .. }, Element::Sparse(m)) => m.keys().all(|&i| (i as usize) < t),
        _ => false,
    }
}

impl Diagonal {
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn sizes(&self) -> Vec<BigUint> {
        self.levels.iter().map(HSet::len).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": "diagonal",
            "chain": self.chain.to_json(),
            "m": self.m.iter().map(|((n, j), m)| json!({"n": n, "j": j, "m": m})).collect::<Vec<_>>(),
            "levels": self.levels.iter().enumerate().map(|(n, e)| json!({"n": n, "E": e.to_json()})).collect::<Vec<_>>(),
            "certificate": self.cert.to_json(),
            "defect_checks": self.checks.iter().map(|c| json!({
                "g": element_to_json(&c.g),
                "n": c.n,
                "defect_upper": rational_to_string(&c.upper),
                "defect_lower": rational_to_string(&c.lower),
            })).collect::<Vec<_>>(),
        })
    }
}
