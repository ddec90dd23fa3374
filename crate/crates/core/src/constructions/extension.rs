use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use super::section::{associated_section, lift_tiling, SectionTable};
use crate::algebra::json::{elements_to_json, rational_to_string};
use crate::algebra::{Element, MonoidCtx, QuotientSpec};
use crate::error::{Error, Result};
use crate::finset::FinSubset;
use crate::folner::{cif_extract, CifIndices, Exhaustion, Flags, FolnerSeq, Provenance, RatProgression};
use crate::tiling::{
    extract_tiling_sequence, find_monotile_cover_with, prefix_monotile, progression_cover, LevelTiling,
    LocalTilingCert, PrefixCert, TileCert, DEFAULT_TILE_BUDGET,
};

/// A finite subset of the kernel `H`: listed, or symbolic when `H = ℚ`.
#[derive(Clone, Debug, PartialEq)]
pub enum HSet {
    Finite(Arc<FinSubset>),
    Prog(RatProgression),
}

impl HSet {
    /// `E_n`, symbolic when the sequence offers it.
    pub fn level(seq: &FolnerSeq, n: usize) -> Result<HSet> {
        match seq.progression(n) {
            Some(p) => Ok(HSet::Prog(p)),
            None => Ok(HSet::Finite(seq.gen(n)?)),
        }
    }

    pub fn len(&self) -> BigUint {
        match self {
            HSet::Finite(f) => BigUint::from(f.len()),
            HSet::Prog(p) => BigUint::from(p.len),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len().is_zero()
    }

    /// Is this `{1}`?
    pub fn is_identity(&self) -> bool {
        match self {
            HSet::Finite(f) => f.len() == 1 && f.contains_identity(),
            HSet::Prog(p) => p.len == 1 && p.start.is_zero(),
        }
    }

    /// `|{e ∈ E : eh ∉ E}|`.
    pub fn leaving(&self, h: &Element) -> Result<BigUint> {
        match (self, h) {
            (HSet::Prog(p), Element::Rational(x)) => {
                let moved = p.defect(x) * BigRational::from_integer(BigInt::from(p.len));
                Ok(moved.to_integer().to_biguint().expect("a count"))
            }
            (HSet::Prog(_), _) => Err(Error::ContextMismatch(format!("{h} is not rational"))),
            (HSet::Finite(f), _) => {
                let ctx = f.ctx();
                ctx.check(h)?;
                Ok(BigUint::from(f.iter().filter(|e| !f.contains(&ctx.mul_unchecked(e, h))).count()))
            }
        }
    }

    /// `fEf⁻¹ ⊆ H`.
    pub fn conjugate(&self, q: &QuotientSpec, f: &Element) -> Result<HSet> {
        match self {
            HSet::Prog(p) => match (q, f) {
                (QuotientSpec::SecondCoord { q: ratio }, Element::SemiRat(_, k)) => {
                    let k = k.to_i64().ok_or_else(|| Error::Budget(format!("exponent {k} too large")))?;
                    let mut s = BigRational::one();
                    for _ in 0..k.unsigned_abs() {
                        s *= ratio;
                    }
                    if k < 0 {
                        s = s.recip();
                    }
                    Ok(HSet::Prog(p.scale(&s)?))
                }
                _ => Err(Error::Unsupported(format!("symbolic conjugation in {}", q.name()))),
            },
            HSet::Finite(s) => {
                let g = q.group();
                let mut out = Vec::with_capacity(s.len());
                for e in s.iter() {
                    let c = g.conjugate(f, &q.embed(e)?)?;
                    out.push(
                        q.kernel_preimage(&c)?
                            .ok_or_else(|| Error::Verification(format!("{f}·{e}·{f}⁻¹ left the kernel")))?,
                    );
                }
                Ok(HSet::Finite(Arc::new(FinSubset::from_unsorted(&q.kernel(), out))))
            }
        }
    }

    pub fn elements(&self, cap: u64) -> Result<Vec<Element>> {
        match self {
            HSet::Finite(f) => {
                if f.len() as u64 > cap {
                    return Err(Error::Budget(format!("{} elements, cap is {cap}", f.len())));
                }
                Ok(f.elems().to_vec())
            }
            HSet::Prog(p) => Ok(p.elements(cap)?.into_iter().map(Element::Rational).collect()),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            HSet::Finite(f) => json!({"kind": "set", "size": f.len(), "elements": elements_to_json(f.iter())}),
            HSet::Prog(p) => json!({
                "kind": "progression",
                "start": rational_to_string(&p.start),
                "step": rational_to_string(&p.step),
                "len": p.len.to_string(),
            }),
        }
    }
}

/// Some tiling of `v` by translates of `t`, or `None` when there is none.
pub fn tile_kernel_set(t: &HSet, v: &HSet, budget: u64) -> Result<Option<LevelTiling>> {
    match (t, v) {
        (HSet::Prog(t), HSet::Prog(v)) => Ok(progression_cover(t, v).map(LevelTiling::Progression)),
        (HSet::Finite(t), HSet::Finite(v)) => Ok(find_monotile_cover_with(t, v, None, budget)?.map(LevelTiling::Finite)),
        _ => Err(Error::Invalid("mixed symbolic and listed kernel sets".into())),
    }
}

fn tiling_is(tl: &LevelTiling, t: &HSet, v: &HSet) -> bool {
    match (tl, t, v) {
        (LevelTiling::Finite(c), HSet::Finite(t), HSet::Finite(v)) => c.t == **t && c.v == **v,
        (LevelTiling::Progression(c), HSet::Prog(t), HSet::Prog(v)) => c.t == *t && c.v == *v,
        _ => false,
    }
}

fn prefix_to_level(p: PrefixCert) -> LevelTiling {
    match p {
        PrefixCert::Finite(c) => LevelTiling::Finite(c),
        PrefixCert::Progression(c) => LevelTiling::Progression(c),
    }
}

#[derive(Clone, Debug)]
pub struct ExtensionOptions {
    pub depth: usize,
    pub horizon: usize,
    pub tile_budget: u64,
    /// Levels of `F̄` up to this size are also materialized and checked directly.
    pub materialize_cap: usize,
}

impl Default for ExtensionOptions {
    fn default() -> Self {
        ExtensionOptions { depth: 3, horizon: 40, tile_budget: DEFAULT_TILE_BUDGET, materialize_cap: 100_000 }
    }
}

/// `m_n` was pushed past its CIF value so that the level tilings exist.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bump {
    pub n: usize,
    pub cif: usize,
    pub chosen: usize,
}

#[derive(Clone, Debug)]
pub struct ExtensionLevel {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    /// `E_{m_n}`.
    pub e: HSet,
    /// `σ̃(F_{k_n})`.
    pub lifts: FinSubset,
    /// `|E_{m_n}|·|F_{k_n}|`.
    pub size: BigUint,
    /// `H ∩ σ̃(F_{k_n})σ̃(F_{k_n})⁻¹ = {1}`.
    pub disjoint_cosets: bool,
    /// `|E_{m_n}σ̃(F_{k_n})|` counted element by element, when small enough.
    pub counted: Option<BigUint>,
}

/// `F̄_n = E_{m_n}σ̃(F_{k_n})` with everything needed to recheck it.
#[derive(Clone, Debug)]
pub struct ExtensionTrace {
    pub quotient: QuotientSpec,
    pub e: FolnerSeq,
    pub f: FolnerSeq,
    pub exhaustion: Exhaustion,
    /// `π(G_n)`.
    pub projected: Exhaustion,
    pub section: SectionTable,
    pub lifted: LocalTilingCert,
    pub k: CifIndices,
    pub m: CifIndices,
    /// `H_n = σ̃(F_{k_n})G_nσ̃(F_{k_n})⁻¹ ∩ H`.
    pub h: Vec<FinSubset>,
    pub h_exhaustion: Exhaustion,
    pub bumps: Vec<Bump>,
    pub levels: Vec<ExtensionLevel>,
    pub fbar: FolnerSeq,
}

struct Prep {
    q: QuotientSpec,
    projected: Exhaustion,
    k: CifIndices,
    section: SectionTable,
    lifted: LocalTilingCert,
    lifts: Vec<FinSubset>,
    h: Vec<FinSubset>,
    h_exhaustion: Exhaustion,
}

fn check_inputs(e: &FolnerSeq, f: &FolnerSeq, q: &QuotientSpec, exh: &Exhaustion) -> Result<()> {
    q.validate()?;
    if e.ctx() != &q.kernel() {
        return Err(Error::ContextMismatch(format!("E lives in {}, kernel is {}", e.ctx(), q.kernel())));
    }
    if f.ctx() != &q.quotient() {
        return Err(Error::ContextMismatch(format!("F lives in {}, quotient is {}", f.ctx(), q.quotient())));
    }
    if !q.matches_group(exh.ctx()) {
        return Err(Error::ContextMismatch(format!("exhaustion of {}, group is {}", exh.ctx(), q.group())));
    }
    if !e.flags().folner || !f.flags().folner {
        return Err(Error::Invalid("both E and F must claim to be Følner".into()));
    }
    Ok(())
}

fn prepare(e: &FolnerSeq, f: &FolnerSeq, q: &QuotientSpec, exh: &Exhaustion, opts: &ExtensionOptions) -> Result<Prep> {
    check_inputs(e, f, q, exh)?;
    let g = q.group();
    let k_ctx = q.quotient();
    let h_ctx = q.kernel();
    let mut blocks = Vec::with_capacity(opts.depth + 1);
    let mut g_blocks = Vec::with_capacity(opts.depth + 1);
    for n in 0..=opts.depth {
        let gn = exh.gen(n)?;
        let gn = FinSubset::from_unsorted(&g, gn.iter().map(|x| g.canonicalize(x.clone())).collect::<Result<_>>()?);
        blocks.push(FinSubset::from_unsorted(&k_ctx, gn.iter().map(|x| q.project(x)).collect::<Result<_>>()?));
        g_blocks.push(gn);
    }
    let projected = Exhaustion::blocks(&k_ctx, "π(G_n)", blocks)?;
    let k = cif_extract(f, &projected, opts.depth, opts.horizon)?;
    let k_max = *k.k.last().unwrap();
    for &kn in &k.k {
        if !f.gen(kn)?.contains_identity() {
            return Err(Error::Invalid(format!("F_{kn} misses the identity")));
        }
    }
    let f_cert = extract_tiling_sequence(f, k_max, true, opts.tile_budget)?;
    let section = associated_section(q, &f_cert)?;
    let lifted = lift_tiling(&section)?;
    let mut lifts = Vec::with_capacity(opts.depth + 1);
    let mut h = Vec::with_capacity(opts.depth + 1);
    for n in 0..=opts.depth {
        let l = section.lifted(k.k[n])?;
        let by_proj: BTreeMap<Element, &Element> =
            l.iter().map(|y| Ok((q.project(y)?, y))).collect::<Result<_>>()?;
        let mut hn = Vec::new();
        for x in l.iter() {
            for gg in g_blocks[n].iter() {
                let xg = g.mul(x, gg)?;
                // x g y⁻¹ ∈ H exactly when π(y) = π(xg)
                if let Some(y) = by_proj.get(&q.project(&xg)?) {
                    let c = g.mul(&xg, &g.inv(y)?)?;
                    hn.push(q.kernel_preimage(&c)?.expect("same coset"));
                }
            }
        }
        h.push(FinSubset::from_unsorted(&h_ctx, hn));
        lifts.push(l);
    }
    let h_exhaustion = Exhaustion::blocks(&h_ctx, "H_n", h.clone())?;
    Ok(Prep { q: q.clone(), projected, k, section, lifted, lifts, h, h_exhaustion })
}

/// CIF over explicit blocks, with an extra acceptance test per candidate.
fn cif_with<A>(seq: &FolnerSeq, exh: &Exhaustion, depth: usize, horizon: usize, mut accept: A) -> Result<(CifIndices, Vec<Bump>)>
where
    A: FnMut(usize, usize, usize) -> Result<bool>,
{
    let mut k = vec![0];
    let mut worst = vec![BigRational::zero()];
    let mut bumps = Vec::new();
    for n in 1..=depth {
        let bound = BigRational::new(BigInt::one(), BigInt::from(n));
        let block = exh.gen(n)?;
        let mut first_ok = None;
        let mut cand = k[n - 1] + 1;
        loop {
            if cand > horizon {
                let why = if first_ok.is_some() {
                    "no tiling-compatible index".to_string()
                } else {
                    format!("no index with every defect over H_{n} below 1/{n}")
                };
                return Err(Error::Budget(format!("CIF step n={n}: {why} in ({}, {horizon}]", k[n - 1])));
            }
            let mut w = BigRational::zero();
            let mut ok = true;
            for g in block.iter() {
                let d = seq.defect_at(cand, g)?;
                if d >= bound {
                    ok = false;
                    break;
                }
                w = w.max(d);
            }
            if ok {
                first_ok.get_or_insert(cand);
                if accept(n, k[n - 1], cand)? {
                    if first_ok != Some(cand) {
                        bumps.push(Bump { n, cif: first_ok.unwrap(), chosen: cand });
                    }
                    k.push(cand);
                    worst.push(w);
                    break;
                }
            }
            cand += 1;
        }
    }
    Ok((CifIndices { k, worst }, bumps))
}

fn finish(prep: Prep, e: &FolnerSeq, f: &FolnerSeq, exh: &Exhaustion, m: CifIndices, bumps: Vec<Bump>, cap: usize) -> Result<ExtensionTrace> {
    let q = prep.q.clone();
    let mut levels = Vec::with_capacity(m.k.len());
    for (n, (&mn, &kn)) in m.k.iter().zip(&prep.k.k).enumerate() {
        let es = HSet::level(e, mn)?;
        let lifts = prep.lifts[n].clone();
        let size = es.len() * BigUint::from(lifts.len());
        let disjoint_cosets = cosets_disjoint(&q, &lifts)?;
        let counted = if size <= BigUint::from(cap) {
            Some(BigUint::from(product_set(&q, &es, &lifts, cap as u64)?.len()))
        } else {
            None
        };
        levels.push(ExtensionLevel { n, m: mn, k: kn, e: es, lifts, size, disjoint_cosets, counted });
    }
    let fbar = product_seq(&q, &levels, "extension", json!({"quotient": q.name(), "m": m.k, "k": prep.k.k}), Flags::new(true, false, false, false), cap);
    let trace = ExtensionTrace {
        quotient: q,
        e: e.clone(),
        f: f.clone(),
        exhaustion: exh.clone(),
        projected: prep.projected,
        section: prep.section,
        lifted: prep.lifted,
        k: prep.k,
        m,
        h: prep.h,
        h_exhaustion: prep.h_exhaustion,
        bumps,
        levels,
        fbar,
    };
    Ok(trace)
}

/// `H ∩ SS⁻¹ = {1}`: distinct elements of `S` lie in distinct cosets of `H`.
fn cosets_disjoint(q: &QuotientSpec, s: &FinSubset) -> Result<bool> {
    let mut seen = BTreeMap::new();
    for x in s.iter() {
        if seen.insert(q.project(x)?, x).is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `ι(E)·S` listed.
fn product_set(q: &QuotientSpec, e: &HSet, s: &FinSubset, cap: u64) -> Result<FinSubset> {
    let g = q.group();
    let es = e.elements(cap)?;
    let mut out = Vec::with_capacity(es.len() * s.len());
    for x in &es {
        let ix = q.embed(x)?;
        for y in s.iter() {
            out.push(g.mul(&ix, y)?);
        }
    }
    Ok(FinSubset::from_unsorted(&g, out))
}

fn product_seq(q: &QuotientSpec, levels: &[ExtensionLevel], builder: &str, params: Value, flags: Flags, cap: usize) -> FolnerSeq {
    let parts: Arc<Vec<(HSet, FinSubset, BigUint)>> =
        Arc::new(levels.iter().map(|l| (l.e.clone(), l.lifts.clone(), l.size.clone())).collect());
    let p2 = parts.clone();
    let q2 = q.clone();
    let depth = levels.len();
    FolnerSeq::from_fn(&q.group(), flags, Provenance::new(builder, params), move |n| {
        let (e, s, _) = parts
            .get(n)
            .ok_or_else(|| Error::Budget(format!("the construction recorded levels 0..{}", depth - 1)))?;
        product_set(&q2, e, s, cap as u64)
    })
    .with_size(move |n| p2.get(n).map(|p| p.2.clone()))
    .with_size_cap(cap)
}

/// Builds the trace of the extension construction for `1 → H → G → K → 1`.
pub fn extension_folner(
    e: &FolnerSeq,
    f: &FolnerSeq,
    q: &QuotientSpec,
    exh: &Exhaustion,
    opts: &ExtensionOptions,
) -> Result<ExtensionTrace> {
    let prep = prepare(e, f, q, exh, opts)?;
    let (m, bumps) = cif_with(e, &prep.h_exhaustion, opts.depth, opts.horizon, |_, _, _| Ok(true))?;
    finish(prep, e, f, exh, m, bumps, opts.materialize_cap)
}

impl ExtensionTrace {
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// `H_n ⊆ H_{n+1}` for every recorded level.
    pub fn h_increasing(&self) -> bool {
        self.h.windows(2).all(|w| w[0].is_subset(&w[1]))
    }

    /// `|F̄_n s ∖ F̄_n| / |F̄_n|` without listing `F̄_n`: the row `E·x` moves to
    /// `E·h·x'` with `x'` the lift in the coset of `xs`, if any.
    pub fn defect(&self, n: usize, s: &Element) -> Result<BigRational> {
        let lvl = self.levels.get(n).ok_or_else(|| Error::Invalid(format!("no level {n}")))?;
        let q = &self.quotient;
        let g = q.group();
        g.check(s)?;
        let by_proj: BTreeMap<Element, &Element> =
            lvl.lifts.iter().map(|y| Ok((q.project(y)?, y))).collect::<Result<_>>()?;
        let mut leaving = BigUint::zero();
        for x in lvl.lifts.iter() {
            let xs = g.mul(x, s)?;
            match by_proj.get(&q.project(&xs)?) {
                None => leaving += lvl.e.len(),
                Some(y) => {
                    let h = q.kernel_preimage(&g.mul(&xs, &g.inv(y)?)?)?.expect("same coset");
                    leaving += lvl.e.leaving(&h)?;
                }
            }
        }
        Ok(BigRational::new(leaving.into(), lvl.size.clone().into()))
    }

    /// Rechecks both CIF inequalities and every level invariant.
    pub fn verify(&self) -> Result<()> {
        self.k.verify(&self.f, &self.projected)?;
        self.m.verify(&self.e, &self.h_exhaustion)?;
        for lvl in &self.levels {
            let n = lvl.n;
            if lvl.lifts != self.section.lifted(lvl.k)? {
                return Err(Error::Verification(format!("level {n}: lifts are not σ̃(F_{})", lvl.k)));
            }
            if HSet::level(&self.e, lvl.m)? != lvl.e {
                return Err(Error::Verification(format!("level {n}: kernel part is not E_{}", lvl.m)));
            }
            if !cosets_disjoint(&self.quotient, &lvl.lifts)? {
                return Err(Error::Verification(format!("level {n}: H meets σ̃(F)σ̃(F)⁻¹ outside 1")));
            }
            let size = lvl.e.len() * BigUint::from(self.f.gen(lvl.k)?.len());
            if size != lvl.size {
                return Err(Error::Verification(format!("level {n}: |F̄| = {} but |E||F| = {size}", lvl.size)));
            }
            if let Some(c) = &lvl.counted {
                if *c != lvl.size {
                    return Err(Error::Verification(format!("level {n}: counted {c} elements, expected {}", lvl.size)));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let rat = |v: &[BigRational]| v.iter().map(rational_to_string).collect::<Vec<_>>();
        json!({
            "kind": "extension_trace",
            "quotient": self.quotient.name(),
            "exhaustion": self.exhaustion.name(),
            "E": {"builder": self.e.provenance().builder, "params": self.e.provenance().params},
            "F": {"builder": self.f.provenance().builder, "params": self.f.provenance().params},
            "k": self.k.k,
            "k_worst_defect": rat(&self.k.worst),
            "m": self.m.k,
            "m_worst_defect": rat(&self.m.worst),
            "bumps": self.bumps.iter().map(|b| json!({"n": b.n, "cif": b.cif, "chosen": b.chosen})).collect::<Vec<_>>(),
            "H": self.h.iter().map(|h| elements_to_json(h.iter())).collect::<Vec<_>>(),
            "H_increasing": self.h_increasing(),
            "section_consistent": self.section.consistent(),
            "levels": self.levels.iter().map(|l| json!({
                "n": l.n,
                "m": l.m,
                "k": l.k,
                "E": l.e.to_json(),
                "lifts": elements_to_json(l.lifts.iter()),
                "size": l.size.to_string(),
                "disjoint_cosets": l.disjoint_cosets,
                "counted": l.counted.as_ref().map(|c| c.to_string()),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Which hypothesis makes the conjugated kernel sets tile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// Every `fE_{m_{n−1}}f⁻¹` must tile `E_{m_n}`; tilings are searched.
    InnMonotileable,
    /// Every `f ∈ K̄_n` must fix `E_{m_{n−1}}` under conjugation.
    Centralizing,
}

impl Condition {
    pub fn name(&self) -> &'static str {
        match self {
            Condition::InnMonotileable => "inn_monotileable",
            Condition::Centralizing => "centralizing",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    /// `fE f⁻¹ = E`; the tiles come from `E`'s own tiling sequence.
    Fixed,
    /// A tiling of `E_{m_n}` by the conjugate was found.
    Conjugated,
}

/// `E_{m_n} = ⊔_{ē∈Ē_{f,n}} ē·fE_{m_{n−1}}f⁻¹`.
#[derive(Clone, Debug)]
pub struct ConjugateRow {
    pub f: Element,
    pub kind: RowKind,
    pub tiling: LevelTiling,
}

/// `F̄_n = ⊔_{g∈Ḡ_n} gF̄_{n−1}` with `Ḡ_n = ⊔_{f∈K̄_n} Ē_{f,n}f`.
#[derive(Clone, Debug)]
pub struct ExtensionLevelCert {
    pub n: usize,
    /// `σ̃(F_{k_n}) = ⊔_{f∈K̄_n} fσ̃(F_{k_{n−1}})`.
    pub k_bar: TileCert,
    pub rows: Vec<ConjugateRow>,
    /// The same tiling checked on listed sets, when they are small.
    pub direct: Option<TileCert>,
}

#[derive(Clone, Debug)]
pub struct MonotileableExtension {
    pub trace: ExtensionTrace,
    pub condition: Condition,
    pub levels: Vec<ExtensionLevelCert>,
    /// Locally monotileable `F̄`.
    pub fbar: FolnerSeq,
}

/// The extension construction together with tilings of every level.
pub fn extension_monotileable(
    e: &FolnerSeq,
    f: &FolnerSeq,
    q: &QuotientSpec,
    exh: &Exhaustion,
    condition: Condition,
    opts: &ExtensionOptions,
) -> Result<MonotileableExtension> {
    let prep = prepare(e, f, q, exh, opts)?;
    let mut k_bar = Vec::with_capacity(opts.depth);
    for n in 1..=opts.depth {
        match prefix_monotile(&prep.lifted, prep.k.k[n - 1], prep.k.k[n])? {
            PrefixCert::Finite(c) => k_bar.push(c),
            PrefixCert::Progression(_) => unreachable!("lifted certificates are listed"),
        }
    }
    let g = q.group();
    let id = g.identity();
    let mut seen_conj: BTreeMap<(usize, Element), HSet> = BTreeMap::new();
    let (m, bumps) = cif_with(e, &prep.h_exhaustion, opts.depth, opts.horizon, |n, prev, cand| {
        let below = HSet::level(e, prev)?;
        let target = HSet::level(e, cand)?;
        for fe in k_bar[n - 1].c.iter() {
            if *fe == id {
                continue;
            }
            let conj = match seen_conj.get(&(prev, fe.clone())) {
                Some(c) => c.clone(),
                None => {
                    let c = below.conjugate(q, fe)?;
                    seen_conj.insert((prev, fe.clone()), c.clone());
                    c
                }
            };
            if conj == below {
                continue;
            }
            if condition == Condition::Centralizing {
                return Err(Error::Refuted(format!("{fe} moves E_{prev} under conjugation")));
            }
            if tile_kernel_set(&conj, &target, opts.tile_budget)?.is_none() {
                return Ok(false);
            }
        }
        Ok(true)
    })?;
    let trace = finish(prep, e, f, exh, m, bumps, opts.materialize_cap)?;
    let m_max = *trace.m.k.last().unwrap();
    let e_cert = extract_tiling_sequence(e, m_max, true, opts.tile_budget)?;
    let mut levels = Vec::with_capacity(opts.depth);
    for n in 1..=opts.depth {
        let (lo, hi) = (&trace.levels[n - 1], &trace.levels[n]);
        let mut rows = Vec::new();
        for fe in k_bar[n - 1].c.iter() {
            let conj = lo.e.conjugate(q, fe)?;
            let row = if conj == lo.e {
                ConjugateRow {
                    f: fe.clone(),
                    kind: RowKind::Fixed,
                    tiling: prefix_to_level(prefix_monotile(&e_cert, lo.m, hi.m)?),
                }
            } else {
                let tiling = tile_kernel_set(&conj, &hi.e, opts.tile_budget)?
                    .ok_or_else(|| Error::Verification(format!("tiling for {fe} at level {n} vanished")))?;
                ConjugateRow { f: fe.clone(), kind: RowKind::Conjugated, tiling }
            };
            rows.push(row);
        }
        let mut cert = ExtensionLevelCert { n, k_bar: k_bar[n - 1].clone(), rows, direct: None };
        if hi.size <= BigUint::from(opts.materialize_cap) {
            let c = translates_of(q, &cert, opts.materialize_cap as u64)?;
            let direct = TileCert { v: trace.fbar.gen(n)?.as_ref().clone(), t: trace.fbar.gen(n - 1)?.as_ref().clone(), c: FinSubset::from_unsorted(&g, c) };
            cert.direct = Some(direct);
        }
        levels.push(cert);
    }
    let fbar = product_seq(
        q,
        &trace.levels,
        "monotileable_extension",
        json!({"quotient": q.name(), "condition": condition.name(), "m": trace.m.k, "k": trace.k.k}),
        Flags::new(true, true, false, false),
        opts.materialize_cap,
    );
    let out = MonotileableExtension { trace, condition, levels, fbar };
    out.verify()?;
    Ok(out)
}

fn translates_of(q: &QuotientSpec, cert: &ExtensionLevelCert, cap: u64) -> Result<Vec<Element>> {
    let g = q.group();
    let mut out = Vec::new();
    for row in &cert.rows {
        for e in row.tiling.translates() {
            if out.len() as u64 >= cap {
                return Err(Error::Budget(format!("more than {cap} translates")));
            }
            out.push(g.mul(&q.embed(&e)?, &row.f)?);
        }
    }
    Ok(out)
}

impl MonotileableExtension {
    /// `Ḡ_n`.
    pub fn translates(&self, n: usize, cap: u64) -> Result<Vec<Element>> {
        let cert = self.level(n)?;
        let mut t = translates_of(&self.trace.quotient, cert, cap)?;
        t.sort();
        Ok(t)
    }

    /// `|Ḡ_n| = Σ_f |Ē_{f,n}|`.
    pub fn translate_count(&self, n: usize) -> Result<usize> {
        Ok(self.level(n)?.rows.iter().map(|r| r.tiling.translate_count()).sum())
    }

    pub fn level(&self, n: usize) -> Result<&ExtensionLevelCert> {
        if n == 0 || n > self.levels.len() {
            return Err(Error::Invalid(format!("no level {n} recorded")));
        }
        Ok(&self.levels[n - 1])
    }

    /// The ordinary certificate, when every level was materialized.
    pub fn local_cert(&self) -> Option<LocalTilingCert> {
        let mut levels = Vec::with_capacity(self.levels.len());
        for l in &self.levels {
            let c = l.direct.clone()?;
            levels.push(crate::tiling::LevelCert { n: l.n, tiling: LevelTiling::Finite(c), identity_excluded: false });
        }
        let congruent = levels.iter().all(|l| l.tiling.contains_identity());
        Some(LocalTilingCert {
            ctx: self.trace.quotient.group(),
            sequence: json!({"builder": self.fbar.provenance().builder, "params": self.fbar.provenance().params}),
            levels,
            congruent,
        })
    }

    /// Rechecks the trace and, level by level, the decomposition
    /// `F̄_n = ⊔_{f∈K̄_n} ⊔_{ē} ē f F̄_{n−1}`: `K̄_n` tiles the lifted level,
    /// each row tiles `E_{m_n}` by the conjugate of `E_{m_{n−1}}`, and the
    /// cosets of the lifts are disjoint.
    pub fn verify(&self) -> Result<()> {
        let tr = &self.trace;
        tr.verify()?;
        let q = &tr.quotient;
        let first = &tr.levels[0];
        if !(first.e.is_identity() && first.lifts.len() == 1 && first.lifts.contains_identity()) {
            return Err(Error::Verification("F̄_0 must be the identity".into()));
        }
        for cert in &self.levels {
            let n = cert.n;
            let (lo, hi) = (&tr.levels[n - 1], &tr.levels[n]);
            cert.k_bar.verify()?;
            if cert.k_bar.v != hi.lifts || cert.k_bar.t != lo.lifts {
                return Err(Error::Verification(format!("level {n}: K̄ does not tile the lifted levels")));
            }
            let fs: Vec<&Element> = cert.rows.iter().map(|r| &r.f).collect();
            if fs.len() != cert.k_bar.c.len() || !fs.iter().all(|f| cert.k_bar.c.contains(f)) {
                return Err(Error::Verification(format!("level {n}: rows do not match K̄")));
            }
            for row in &cert.rows {
                row.tiling.verify()?;
                let conj = lo.e.conjugate(q, &row.f)?;
                if !tiling_is(&row.tiling, &conj, &hi.e) {
                    return Err(Error::Verification(format!("level {n}: row {} tiles the wrong sets", row.f)));
                }
                if self.condition == Condition::Centralizing && conj != lo.e {
                    return Err(Error::Verification(format!("level {n}: {} does not centralize", row.f)));
                }
            }
            if !hi.disjoint_cosets {
                return Err(Error::Verification(format!("level {n}: lifts share a coset")));
            }
            let count: BigUint = cert.rows.iter().map(|r| BigUint::from(r.tiling.translate_count())).sum();
            if count * &lo.size != hi.size {
                return Err(Error::Verification(format!("level {n}: |Ḡ_n||F̄_{}| ≠ |F̄_{n}|", n - 1)));
            }
            if let Some(d) = &cert.direct {
                d.verify()?;
                let c = translates_of(q, cert, u64::MAX)?;
                if d.c != FinSubset::from_unsorted(&q.group(), c) {
                    return Err(Error::Verification(format!("level {n}: listed translates differ from Ḡ_{n}")));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": "monotileable_extension",
            "condition": self.condition.name(),
            "trace": self.trace.to_json(),
            "levels": self.levels.iter().map(|l| json!({
                "n": l.n,
                "K_bar": elements_to_json(l.k_bar.c.iter()),
                "rows": l.rows.iter().map(|r| json!({
                    "f": crate::algebra::json::element_to_json(&r.f),
                    "kind": match r.kind { RowKind::Fixed => "fixed", RowKind::Conjugated => "conjugated" },
                    "translates": r.tiling.translate_count(),
                    "certificate": r.tiling.to_json(),
                })).collect::<Vec<_>>(),
                "directly_checked": l.direct.is_some(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// `F̄_0 = {1}`, `F̄_n = E_{m_n}R` with `R = σ(K)` for a finite quotient `K`.
pub fn finite_index_folner(
    e: &FolnerSeq,
    q: &QuotientSpec,
    exh: &Exhaustion,
    opts: &ExtensionOptions,
) -> Result<MonotileableExtension> {
    if !q.is_finite_index() {
        return Err(Error::Invalid(format!("{} has infinite index", q.name())));
    }
    let k_ctx = q.quotient();
    let f = whole_group_seq(&k_ctx)?;
    let r: Vec<Element> = k_ctx.elements()?.iter().map(|k| q.section(k)).collect::<Result<_>>()?;
    if !cosets_disjoint(q, &FinSubset::from_unsorted(&q.group(), r.clone()))? || r.len() != k_ctx.elements()?.len() {
        return Err(Error::Invalid("σ(K) is not a transversal".into()));
    }
    extension_monotileable(e, &f, q, exh, Condition::Centralizing, opts)
}

/// `F_0 = {1}`, `F_n = K`.
fn whole_group_seq(k: &MonoidCtx) -> Result<FolnerSeq> {
    let all = FinSubset::from_unsorted(k, k.elements()?);
    let id = FinSubset::identity(k);
    Ok(FolnerSeq::from_fn(k, Flags::new(true, true, true, true), Provenance::new("whole_group", json!({"group": k.to_string()})), move |n| {
        Ok(if n == 0 { id.clone() } else { all.clone() })
    }))
}
