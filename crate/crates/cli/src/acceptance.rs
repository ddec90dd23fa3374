//! The bundled acceptance suite behind `entile selftest`.
//!
//! Every criterion recomputes its expected values with code of its own
//! (brute-force oracles, exact counts, the independent certificate checker)
//! and compares them with the library's answers.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::time::{Duration, Instant};

use entile_core::constructions::{extension_monotileable, Condition, ExtensionOptions, MonotileableExtension};
use entile_core::entropy::{
    addition_report, entropy_profile_with, induced_actions, relative_profile, trajectory_with, ProfileRow, SubgroupSpec,
};
use entile_core::finset::{covering_number_with, minkowski_sum, AFinSet, FinSubset};
use entile_core::folner::{build_folner, ASequence, BuilderSpec, Exhaustion, FolnerSeq};
use entile_core::tiling::{all_monotile_covers, congruentize, extract_tiling_sequence, find_monotile_cover_with, phi_q_level_cert};
use entile_core::{AbelianTarget, ActionSpec, Element, Error, MonoidCtx, QuotientSpec, TargetElem};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::par::par_map;
use crate::report::Verdict;
use crate::scenario::Budgets;
use crate::verify::verify_certificate;

/// Exponents up to this size are compared with exact powers.
const EXACT_LIMIT: u64 = 10_000;
const FLOAT_TOL: f64 = 1e-9;

pub const DEFAULT_SEED: u64 = 20_240_607;

#[derive(Clone, Debug)]
pub struct AcceptanceConfig {
    pub seed: u64,
    /// Every budget set to this value when given.
    pub budget: Option<u64>,
    /// Corrupts one input of the named criterion.
    pub fault: Option<usize>,
    pub jobs: usize,
    /// Criteria to run; all when `None`.
    pub only: Option<Vec<usize>>,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        AcceptanceConfig { seed: DEFAULT_SEED, budget: None, fault: None, jobs: 1, only: None }
    }
}

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub verdict: Verdict,
    pub detail: String,
    pub elapsed: Duration,
    pub limit: Duration,
}

struct Env {
    budgets: Budgets,
    fault: bool,
    seed: u64,
    jobs: usize,
}

type Check = Result<String, Error>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err(Error::Refuted(format!($($arg)+)));
        }
    };
}

struct Criterion {
    id: usize,
    name: &'static str,
    limit_secs: u64,
    run: fn(&Env) -> Check,
}

const CRITERIA: [Criterion; 8] = [
    Criterion { id: 1, name: "addition, exact shift instance", limit_secs: 5, run: c1_addition },
    Criterion { id: 2, name: "profile monotonicity", limit_secs: 60, run: c2_monotone },
    Criterion { id: 3, name: "covering-number calculus", limit_secs: 60, run: c3_ell },
    Criterion { id: 4, name: "tiling solver vs oracle", limit_secs: 60, run: c4_tiling },
    Criterion { id: 5, name: "rational automorphism monotiles", limit_secs: 30, run: c5_phi_q },
    Criterion { id: 6, name: "extension pipeline", limit_secs: 120, run: c6_extension },
    Criterion { id: 7, name: "congruentization", limit_secs: 30, run: c7_congruentize },
    Criterion { id: 8, name: "punctured quadrant", limit_secs: 10, run: c8_punctured },
];

pub fn criterion_count() -> usize {
    CRITERIA.len()
}

pub fn run_all(cfg: &AcceptanceConfig) -> Vec<CriterionResult> {
    let budgets = cfg.budget.map(Budgets::uniform).unwrap_or_default();
    CRITERIA
        .iter()
        .filter(|c| cfg.only.as_ref().is_none_or(|o| o.contains(&c.id)))
        .map(|c| {
            let env = Env { budgets, fault: cfg.fault == Some(c.id), seed: cfg.seed, jobs: cfg.jobs };
            let start = Instant::now();
            let res = (c.run)(&env);
            let elapsed = start.elapsed();
            let limit = Duration::from_secs(c.limit_secs);
            let (mut verdict, detail) = match res {
                Ok(d) => (Verdict::Pass, d),
                Err(e) if e.is_budget() => (Verdict::Inconclusive(e.to_string()), e.to_string()),
                Err(e) => (Verdict::Fail(e.to_string()), e.to_string()),
            };
            if elapsed > limit {
                verdict = verdict.and(Verdict::Fail(format!("took {:.1}s, limit {}s", elapsed.as_secs_f64(), c.limit_secs)));
            }
            CriterionResult { id: c.id, name: c.name, verdict, detail, elapsed, limit }
        })
        .collect()
}

/// The worst verdict of a run.
pub fn overall(results: &[CriterionResult]) -> Verdict {
    results.iter().fold(Verdict::Pass, |acc, r| acc.and(r.verdict.clone()))
}

pub fn table(results: &[CriterionResult]) -> String {
    let mut s = format!("{:<3} {:<34} {:<13} {:>8} {:>6}  {}\n", "#", "criterion", "verdict", "time", "limit", "detail");
    for r in results {
        s.push_str(&format!(
            "{:<3} {:<34} {:<13} {:>7.2}s {:>5}s  {}\n",
            r.id,
            r.name,
            r.verdict.label().to_uppercase(),
            r.elapsed.as_secs_f64(),
            r.limit.as_secs(),
            r.verdict.reason().unwrap_or(&r.detail),
        ));
    }
    s
}

pub fn to_json(results: &[CriterionResult]) -> Value {
    json!({
        "verdict": overall(results).label(),
        "criteria": results.iter().map(|r| json!({
            "id": r.id,
            "name": r.name,
            "verdict": r.verdict.label(),
            "detail": r.detail,
            "elapsed_ms": r.elapsed.as_millis().to_string(),
            "limit_s": r.limit.as_secs(),
        })).collect::<Vec<_>>(),
    })
}

fn recheck(cert: &Value, seq: Option<&FolnerSeq>, what: &str) -> Result<(), Error> {
    verify_certificate(cert, seq).map(|_| ()).map_err(|e| Error::Verification(format!("{what}: {e}")))
}

fn pow_u(base: u64, e: usize) -> BigUint {
    Pow::pow(BigUint::from(base), e as u32)
}

// --- 1 ----------------------------------------------------------------------

fn c1_addition(env: &Env) -> Check {
    let seq = build_folner(&BuilderSpec::Interval { a: ASequence::power(2), on_integers: false })?;
    let act = ActionSpec::shift(MonoidCtx::nat(), &[4])?;
    let t = act.target();
    let id = MonoidCtx::nat().identity();
    let at0 = |vals: &[u64]| -> Result<AFinSet, Error> {
        let mut v = vec![t.zero()];
        for &x in vals {
            v.push(t.basis(&id, &[x])?);
        }
        AFinSet::new(t, v)
    };
    let x = at0(&[1, 2, 3])?;
    let y = if env.fault { at0(&[])? } else { at0(&[2])? };
    let ind = induced_actions(&act, &SubgroupSpec::MultiplesOf(2))?;
    let rep = addition_report(&ind, &[x], &[y], &seq, 5)?;
    let case = &rep.cases[0];
    if let Some(s) = &case.stopped {
        return Err(Error::Budget(s.clone()));
    }
    ensure!(case.rows.len() == 6, "expected rows n = 0..5, got {}", case.rows.len());
    for r in &case.rows[1..] {
        let k = r.f_size;
        ensure!(BigUint::from(k) == seq.size(r.n)?, "|F_{}| = {k}", r.n);
        ensure!(r.whole == pow_u(4, k), "n={}: |T(Z+Y)| = {} is not 4^{k}", r.n, r.whole);
        ensure!(r.sub == pow_u(2, k), "n={}: |T_B(Y)| = {} is not 2^{k}", r.n, r.sub);
        ensure!(r.quotient == pow_u(2, k), "n={}: |T_A/B(πX)| = {} is not 2^{k}", r.n, r.quotient);
        ensure!(r.whole == &r.sub * &r.quotient && r.residual == 0.0, "n={}: residual {}", r.n, r.residual);
    }
    // the counted trajectories agree with listing them
    let zy = case.z.minkowski_sum(&case.y)?;
    for n in 0..=3 {
        let f = seq.gen(n)?;
        let listed = trajectory_with(&ind.act, &f, &zy, env.budgets.trajectory_cap)?;
        ensure!(BigUint::from(listed.len()) == case.rows[n].whole, "n={n}: listed {} elements", listed.len());
    }
    Ok("values log 4 = log 2 + log 2 at n = 1..5, residual 0".into())
}

// --- 2 ----------------------------------------------------------------------

/// `ln(a)/p ≤ ln(b)/q`.
fn ratio_le(a: &BigUint, p: u64, b: &BigUint, q: u64) -> bool {
    let g = gcd(p, q).max(1);
    let (p, q) = (p / g, q / g);
    if p <= EXACT_LIMIT && q <= EXACT_LIMIT {
        return Pow::pow(a, q as u32) <= Pow::pow(b, p as u32);
    }
    let (l, r) = (ln(a) / p as f64, ln(b) / q as f64);
    l <= r + FLOAT_TOL * l.abs().max(r.abs()).max(1.0)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

fn rows_non_increasing(rows: &[ProfileRow]) -> Option<usize> {
    rows.windows(2)
        .position(|w| !ratio_le(&w[1].count, w[1].f_size as u64, &w[0].count, w[0].f_size as u64))
        .map(|i| rows[i + 1].n)
}

fn point(ctx: &MonoidCtx, p: &[i64]) -> Element {
    if p.len() == 1 {
        Element::int(p[0])
    } else {
        let _ = ctx;
        Element::vector(p)
    }
}

/// A random element supported on `positions`.
fn random_on(rng: &mut ChaCha8Rng, t: &AbelianTarget, positions: &[Element]) -> Result<TargetElem, Error> {
    let mut map = BTreeMap::new();
    for p in positions {
        if rng.gen_bool(0.6) {
            map.insert(p.clone(), t.moduli().iter().map(|&m| rng.gen_range(0..m)).collect::<Vec<u64>>());
        }
    }
    t.canonicalize(TargetElem::Sparse(map))
}

struct Pair {
    seq: usize,
    act: ActionSpec,
    x: AFinSet,
    y: AFinSet,
}

fn c2_monotone(env: &Env) -> Check {
    let specs: [(BuilderSpec, Vec<i64>, Vec<Vec<i64>>); 4] = [
        (BuilderSpec::SymmetricDyadic, vec![0], vec![vec![1]]),
        (BuilderSpec::Interval { a: ASequence::factorial(), on_integers: false }, vec![0], vec![vec![1]]),
        (BuilderSpec::Box { dim: 2 }, vec![0, 0], vec![vec![1, 0], vec![0, 1], vec![1, 1]]),
        (BuilderSpec::Punctured, vec![1, 1], vec![vec![1, 0], vec![0, 1]]),
    ];
    let mut seqs = Vec::new();
    for (spec, _, _) in &specs {
        let seq = build_folner(spec)?;
        ensure!(seq.flags().locally_monotileable, "{} does not claim local monotileability", spec.name());
        let cert = extract_tiling_sequence(&seq, 5, true, env.budgets.node_budget)?;
        recheck(&cert.to_json(), Some(&seq), spec.name())?;
        seqs.push(seq);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(env.seed ^ 2);
    let mut pairs = Vec::new();
    for i in 0..50 {
        let which = i % 4;
        let (_, base, dirs) = &specs[which];
        let ctx = seqs[which].ctx();
        let act = ActionSpec::shift(ctx.clone(), &[[2u64, 3][rng.gen_range(0..2)]])?;
        let t = act.target().clone();
        let dir = &dirs[rng.gen_range(0..dirs.len())];
        let width = rng.gen_range(1..=3i64);
        let positions: Vec<Element> = (0..width)
            .map(|j| point(ctx, &base.iter().zip(dir).map(|(b, d)| b + j * d).collect::<Vec<_>>()))
            .filter(|e| ctx.contains(e))
            .collect();
        let mut xs = vec![t.zero()];
        for _ in 1..rng.gen_range(2..=4) {
            xs.push(random_on(&mut rng, &t, &positions)?);
        }
        // Y: the cyclic subgroup generated by one element
        let g = random_on(&mut rng, &t, &positions)?;
        let ys: Vec<TargetElem> = (0..t.moduli()[0] as i64).map(|k| t.scale(&g, k)).collect();
        pairs.push(Pair { seq: which, act, x: AFinSet::from_unsorted(&t, xs), y: AFinSet::from_unsorted(&t, ys) });
    }
    let cap = env.budgets.trajectory_cap;
    let fault = env.fault;
    let results = par_map(env.jobs, &pairs, |p| -> Result<(), Error> {
        let seq = &seqs[p.seq];
        let prof = entropy_profile_with(&p.act, seq, &p.x, 5, cap)?;
        if let Some(s) = &prof.stopped {
            return Err(Error::Budget(s.clone()));
        }
        let rel = relative_profile(&p.act, seq, &p.x, &p.y, 5)?;
        if let Some(s) = &rel.stopped {
            return Err(Error::Budget(s.clone()));
        }
        let mut rows = prof.rows.clone();
        if fault {
            let last = rows.last().unwrap().clone();
            rows.push(ProfileRow { n: last.n + 1, f_size: 1, count: last.count.clone(), value: 0.0 });
        }
        ensure!(prof.rows.len() == 6 && rel.rows.len() == 6, "profiles stop before n = 5");
        if let Some(n) = rows_non_increasing(&rows) {
            return Err(Error::Refuted(format!("profile of X = {} along {} rises at n = {n}", p.x, seq.provenance().builder)));
        }
        if let Some(n) = rows_non_increasing(&rel.rows) {
            return Err(Error::Refuted(format!(
                "relative profile of X = {}, Y = {} along {} rises at n = {n}",
                p.x,
                p.y,
                seq.provenance().builder
            )));
        }
        Ok(())
    });
    for r in results {
        r?;
    }
    Ok("50 pairs, both profiles non-increasing for n ≤ 5".into())
}

// --- 3 ----------------------------------------------------------------------

fn random_set(rng: &mut ChaCha8Rng, t: &AbelianTarget, max: usize) -> AFinSet {
    let m = t.moduli().to_vec();
    let n = rng.gen_range(1..=max);
    let mut v = vec![t.zero()];
    for _ in 1..n {
        v.push(TargetElem::Dense(m.iter().map(|&mi| rng.gen_range(0..mi)).collect()));
    }
    AFinSet::from_unsorted(t, v)
}

fn dense(e: &TargetElem) -> &[u64] {
    match e {
        TargetElem::Dense(v) => v,
        _ => unreachable!("finite targets are dense"),
    }
}

/// The least number of translates, one of them `0 + Y`, covering `X`,
/// by trying subsets of `(X − Y) ∖ {0}` in order of size.
fn brute_mu(x: &AFinSet, y: &AFinSet) -> usize {
    let t = x.target();
    let sub = |a: &[u64], b: &[u64]| -> Vec<u64> { a.iter().zip(b).zip(t.moduli()).map(|((p, q), m)| (p + m - q) % m).collect() };
    let ys: HashSet<Vec<u64>> = y.iter().map(|e| dense(e).to_vec()).collect();
    let mut pool: BTreeSet<Vec<u64>> = BTreeSet::new();
    for a in x.iter() {
        for b in y.iter() {
            pool.insert(sub(dense(a), dense(b)));
        }
    }
    let zero = vec![0; t.moduli().len()];
    pool.remove(&zero);
    let pool: Vec<Vec<u64>> = pool.into_iter().collect();
    let uncovered: Vec<&[u64]> = x.iter().map(dense).filter(|p| !ys.contains(*p)).collect();
    for k in 0..=pool.len() {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            if uncovered.iter().all(|p| idx.iter().any(|&i| ys.contains(&sub(p, &pool[i])))) {
                return k + 1;
            }
            let mut i = k;
            while i > 0 && idx[i - 1] == pool.len() - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    unreachable!("the whole pool covers X")
}

fn c3_ell(env: &Env) -> Check {
    let budget = env.budgets.node_budget;
    let mu = |a: &AFinSet, b: &AFinSet| -> Result<usize, Error> {
        let (n, cert) = covering_number_with(a, b, budget)?;
        cert.verify()?;
        Ok(n)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(env.seed ^ 3);
    let instances = 240;
    for i in 0..instances {
        let m = 2 + (i % 4) as u64;
        let k = 1 + (i / 4) % 3;
        let t = AbelianTarget::finite(&vec![m; k])?;
        let x = random_set(&mut rng, &t, 8);
        let x2 = x.union(&random_set(&mut rng, &t, 4))?;
        let y = random_set(&mut rng, &t, 4);
        let y2 = y.union(&random_set(&mut rng, &t, 3))?;
        let z = random_set(&mut rng, &t, 5);
        let (mxy, mx2y, mxy2) = (mu(&x, &y)?, mu(&x2, &y)?, mu(&x, &y2)?);
        let ctx = format!("instance {i} in (Z/{m})^{k}");
        ensure!(mxy <= mx2y && mxy2 <= mxy, "{ctx}: μ is not monotone");
        ensure!(mxy <= x.len() && x.len() <= mxy * y.len(), "{ctx}: ℓ(X,Y) ≤ ℓ(X) ≤ ℓ(X,Y)+ℓ(Y) fails");
        let sums = mu(&minkowski_sum(&x, &x2)?, &minkowski_sum(&y, &y2)?)?;
        ensure!(sums <= mxy * mu(&x2, &y2)?, "{ctx}: subadditivity on sums fails");
        ensure!(mxy <= mu(&x, &z)? * mu(&z, &y)?, "{ctx}: triangle inequality fails");
        let rows: Vec<Vec<u64>> = (0..k).map(|_| (0..k).map(|_| rng.gen_range(0..m)).collect()).collect();
        let phi = |s: &AFinSet| {
            s.map(&t, |e| {
                let v = dense(e);
                Ok(TargetElem::Dense(rows.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum::<u64>() % m).collect()))
            })
        };
        ensure!(mu(&phi(&x)?, &phi(&y)?)? <= mxy, "{ctx}: endomorphism increases μ");
        // |X + Y| ≥ |π(X)|·|Y| for Y inside B = dA
        let d = if m % 2 == 0 { 2 } else { m };
        let yb = y2.filter(|e| dense(e).iter().all(|a| a % d == 0));
        let classes: BTreeSet<Vec<u64>> = x.iter().map(|e| dense(e).iter().map(|a| a % d).collect()).collect();
        ensure!(minkowski_sum(&x, &yb)?.len() >= classes.len() * yb.len(), "{ctx}: |X+Y| < |π(X)||Y|");
    }
    let mut checked = 0;
    for i in 0..100 {
        let m = [2u64, 3, 4, 5][i % 4];
        let k = 1 + i % 3;
        let t = AbelianTarget::finite(&vec![m; k])?;
        let x = random_set(&mut rng, &t, 10);
        let y = random_set(&mut rng, &t, 4);
        let got = mu(&x, &y)?;
        let want = brute_mu(&x, &y) + usize::from(env.fault && i == 0);
        ensure!(got == want, "μ(X,Y) = {got} but the subset oracle finds {want} for X = {x}, Y = {y}");
        checked += 1;
    }
    Ok(format!("{instances} calculus instances, {checked} oracle comparisons"))
}

// --- 4 ----------------------------------------------------------------------

/// Every choice of `|V|/|T|` admissible translates.
fn oracle_tiles(t: &[Vec<i64>], v: &[Vec<i64>]) -> bool {
    if v.len() % t.len() != 0 {
        return false;
    }
    let vs: HashSet<&Vec<i64>> = v.iter().collect();
    let add = |a: &[i64], b: &[i64]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<i64>>();
    let mut cands: Vec<Vec<i64>> = Vec::new();
    for x in v {
        let c: Vec<i64> = x.iter().zip(&t[0]).map(|(a, b)| a - b).collect();
        if t.iter().all(|y| vs.contains(&add(&c, y))) && !cands.contains(&c) {
            cands.push(c);
        }
    }
    fn choose(cands: &[Vec<i64>], start: usize, left: usize, used: &mut HashSet<Vec<i64>>, t: &[Vec<i64>]) -> bool {
        if left == 0 {
            return true;
        }
        for i in start..cands.len() {
            let cells: Vec<Vec<i64>> = t.iter().map(|y| cands[i].iter().zip(y).map(|(a, b)| a + b).collect()).collect();
            if cells.iter().any(|c| used.contains(c)) {
                continue;
            }
            for c in &cells {
                used.insert(c.clone());
            }
            if choose(cands, i + 1, left - 1, used, t) {
                return true;
            }
            for c in &cells {
                used.remove(c);
            }
        }
        false
    }
    choose(&cands, 0, v.len() / t.len(), &mut HashSet::new(), t)
}

fn random_patch(rng: &mut ChaCha8Rng, dim: usize) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let pt = |rng: &mut ChaCha8Rng, w: i64| (0..dim).map(|_| rng.gen_range(0..w)).collect::<Vec<i64>>();
    let tsize = rng.gen_range(1..=4usize);
    let mut t: Vec<Vec<i64>> = Vec::new();
    while t.len() < tsize {
        let p = pt(rng, 4);
        if !t.contains(&p) {
            t.push(p);
        }
    }
    let mut v: Vec<Vec<i64>> = Vec::new();
    if rng.gen_bool(0.5) {
        for _ in 0..40 {
            let c = pt(rng, 12);
            let placed: Vec<Vec<i64>> = t.iter().map(|y| c.iter().zip(y).map(|(a, b)| a + b).collect()).collect();
            if v.len() + placed.len() <= 12 && placed.iter().all(|p| !v.contains(p)) {
                v.extend(placed);
            }
        }
    } else {
        let size = rng.gen_range(1..=12usize);
        while v.len() < size {
            let p = pt(rng, 12);
            if !v.contains(&p) {
                v.push(p);
            }
        }
    }
    (t, v)
}

fn c4_tiling(env: &Env) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(env.seed ^ 4);
    let patches: Vec<(usize, Vec<Vec<i64>>, Vec<Vec<i64>>)> = (0..500)
        .map(|i| {
            let dim = 1 + i % 2;
            let (t, v) = random_patch(&mut rng, dim);
            (dim, t, v)
        })
        .collect();
    let budget = env.budgets.node_budget;
    let results = par_map(env.jobs, &patches, |(dim, t, v)| -> Result<bool, Error> {
        let ctx = if *dim == 1 { MonoidCtx::int() } else { MonoidCtx::int_vec(2)? };
        let el = |p: &Vec<i64>| point(&ctx, p);
        let ts = FinSubset::new(&ctx, t.iter().map(el).collect())?;
        let vs = FinSubset::new(&ctx, v.iter().map(el).collect())?;
        let got = find_monotile_cover_with(&ts, &vs, None, budget)?;
        let want = oracle_tiles(t, v);
        ensure!(got.is_some() == want, "T = {t:?}, V = {v:?}: solver says {}, oracle says {want}", got.is_some());
        if let Some(c) = &got {
            recheck(&c.to_json(), None, "patch certificate")?;
        }
        Ok(want)
    });
    let mut positives = 0;
    for r in results {
        positives += usize::from(r?);
    }
    // ℤ with symmetric dyadic intervals: K_n = {−2^{n−2}, 2^{n−2}} and no
    // tiling of any level n ≥ 2 has 0 among its translates
    let seq = build_folner(&BuilderSpec::SymmetricDyadic)?;
    let cert = extract_tiling_sequence(&seq, 5, true, budget)?;
    recheck(&cert.to_json(), Some(&seq), "symmetric dyadic tiling")?;
    let zero = Element::int(0);
    for n in 2..=5usize {
        let h = 1i64 << (n - 2);
        let mut want = vec![Element::int(-h), Element::int(h)];
        if env.fault && n == 2 {
            want[0] = zero.clone();
        }
        let got = cert.level(n)?.tiling.translates();
        let show = |v: &[Element]| v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ");
        ensure!(got == want, "K_{n} = {{{}}}, expected {{{}}}", show(&got), show(&want));
        let (with_zero, complete) = all_monotile_covers(&*seq.gen(n - 1)?, &*seq.gen(n)?, Some(&zero), budget, 1)?;
        ensure!(complete, "search for identity-containing tilings of level {n} did not finish");
        ensure!(with_zero.is_empty(), "level {n} has a tiling with 0 among the translates");
    }
    ensure!(!cert.congruent, "certificate claims congruence");
    Ok(format!("500 patches ({positives} tileable), K_2..K_5 as expected, congruent = false"))
}

// --- 5 ----------------------------------------------------------------------

fn c5_phi_q(env: &Env) -> Check {
    let mut total = 0;
    for (a, b) in [(1i64, 1i64), (2, 1), (2, 3)] {
        let q = BigRational::new(BigInt::from(a), BigInt::from(b));
        let seq = build_folner(&BuilderSpec::PhiQ { q: q.clone() })?;
        for n in 0..=3usize {
            let mut cert = phi_q_level_cert(&seq, &q, n)?;
            let want = 2 * b * b * a * a * (n as i64 + 1);
            ensure!(cert.c.len() as i64 == want, "q = {a}/{b}, n = {n}: {} translates, expected {want}", cert.c.len());
            let below = seq.progression(n).ok_or_else(|| Error::Invalid("no progression form".into()))?;
            ensure!(cert.t == below.scale(&q)?, "q = {a}/{b}, n = {n}: the tile is not φ_q(E_{n})");
            ensure!(Some(&cert.v) == seq.progression(n + 1).as_ref(), "q = {a}/{b}, n = {n}: the region is not E_{}", n + 1);
            if env.fault && n == 1 {
                cert.c[0] += BigRational::new(BigInt::one(), BigInt::from(1_000_003));
            }
            recheck(&cert.to_json(), None, &format!("q = {a}/{b}, n = {n}"))?;
            if n <= 1 {
                let listed = cert.materialize(env.budgets.trajectory_cap as u64)?;
                listed.verify()?;
            }
            total += 1;
        }
    }
    Ok(format!("{total} level certificates, translate counts 2b²a²(n+1)"))
}

// --- 6 ----------------------------------------------------------------------

fn check_extension(env: &Env, ext: &mut MonotileableExtension, e: &FolnerSeq, f: &FolnerSeq, samples: &[Element]) -> Result<String, Error> {
    if env.fault {
        ext.trace.levels[1].size += 1u32;
    }
    let tr = &ext.trace;
    let q = &tr.quotient;
    for l in &tr.levels {
        let want = e.size(l.m)? * f.size(l.k)?;
        ensure!(l.size == want, "n = {}: |F̄| = {} but |E_{}||F_{}| = {want}", l.n, l.size, l.m, l.k);
        if let Some(c) = &l.counted {
            ensure!(*c == want, "n = {}: counted {c} elements", l.n);
        }
        // H ∩ σ̃(F)σ̃(F)⁻¹ = {1}: distinct lifts lie in distinct cosets of H
        let cosets: BTreeSet<Element> = l.lifts.iter().map(|x| q.project(x)).collect::<Result<_, _>>()?;
        ensure!(cosets.len() == l.lifts.len(), "n = {}: two lifts share a coset of H", l.n);
    }
    ext.verify()?;
    ensure!(tr.depth() >= 3, "only {} levels recorded", tr.depth());
    for l in &ext.levels {
        recheck(&l.k_bar.to_json(), None, &format!("level {} K̄", l.n))?;
        for r in &l.rows {
            recheck(&r.tiling.to_json(), None, &format!("level {} row {}", l.n, r.f))?;
        }
    }
    if let Some(local) = ext.local_cert() {
        recheck(&local.to_json(), Some(&ext.fbar), "listed levels")?;
    }
    for s in samples {
        let d: Vec<BigRational> = (0..=tr.depth()).map(|n| tr.defect(n, s)).collect::<Result<_, _>>()?;
        ensure!(d.windows(2).all(|w| w[1] < w[0]), "defects along {s} do not strictly decrease: {d:?}");
    }
    Ok(format!("{}: m = {:?}, k = {:?}", q.name(), tr.m.k, tr.k.k))
}

fn c6_extension(env: &Env) -> Check {
    let opts = ExtensionOptions {
        depth: 3,
        horizon: env.budgets.horizon,
        tile_budget: env.budgets.node_budget,
        materialize_cap: ExtensionOptions::default().materialize_cap.min(env.budgets.trajectory_cap),
    };
    let dyadic = build_folner(&BuilderSpec::Interval { a: ASequence::power(2), on_integers: true })?;
    let mut notes = Vec::new();

    let q = QuotientSpec::DropLastCoord { dim: 2 };
    let exh = Exhaustion::default_for(&q.group())?;
    let mut ext = extension_monotileable(&dyadic, &dyadic, &q, &exh, Condition::Centralizing, &opts)?;
    let v = |a, b| Element::vector(&[a, b]);
    notes.push(check_extension(env, &mut ext, &dyadic, &dyadic, &[v(1, 0), v(0, 1), v(1, 1)])?);

    let two = BigRational::from_integer(BigInt::from(2));
    let q = QuotientSpec::SecondCoord { q: two.clone() };
    let e = build_folner(&BuilderSpec::PhiQ { q: two })?;
    let exh = Exhaustion::default_for(&q.group())?;
    let mut ext = extension_monotileable(&e, &dyadic, &q, &exh, Condition::InnMonotileable, &opts)?;
    let samples = [Element::semi(1, 1, 0), Element::semi(0, 1, 1), Element::semi(1, 2, 0)];
    notes.push(check_extension(env, &mut ext, &e, &dyadic, &samples)?);
    Ok(notes.join("; "))
}

// --- 7 ----------------------------------------------------------------------

fn c7_congruentize(env: &Env) -> Check {
    let seq = build_folner(&BuilderSpec::SymmetricDyadic)?;
    let c = congruentize(&seq, &Exhaustion::integers(), 6, env.budgets.level_cap)?;
    let want: Vec<Element> = [0, 1, -1, 2, -2, 3, -3].into_iter().map(Element::int).collect();
    ensure!(c.enumeration == want, "enumeration {:?} is not 0, 1, −1, 2, …", c.enumeration);
    ensure!(c.levels.len() == 7, "{} levels recorded", c.levels.len());
    let mut j = c.to_json();
    if env.fault {
        let k = j["levels"][1]["K"].as_array_mut().expect("K is a list");
        k.retain(|x| x != "0");
    }
    // conditions (1)–(4) with code that shares nothing with the construction
    recheck(&j, Some(&seq), "congruentized sequence")?;
    c.verify(&seq)?;
    let ms: Vec<usize> = c.levels.iter().map(|l| l.m).collect();
    Ok(format!("H_0..H_6 are translates of F_m for m = {ms:?}"))
}

// --- 8 ----------------------------------------------------------------------

fn c8_punctured(env: &Env) -> Check {
    let seq = build_folner(&BuilderSpec::Punctured)?;
    let cert = extract_tiling_sequence(&seq, 5, true, env.budgets.node_budget)?;
    let mut j = cert.to_json();
    if env.fault {
        j["levels"][1]["cert"]["C"][0] = json!(["9", "9"]);
    }
    recheck(&j, Some(&seq), "punctured tiling")?;
    let mut witnesses = Vec::new();
    let mut missing = Vec::new();
    for n in 1..=5usize {
        let f = seq.gen(n)?;
        let mut columns: BTreeMap<BigInt, Vec<BigInt>> = BTreeMap::new();
        for e in f.iter() {
            if let Element::Vector(p) = e {
                columns.entry(p[0].clone()).or_default().push(p[1].clone());
            }
        }
        match columns.iter().find(|(_, vs)| vs.len() >= 2) {
            Some((u, vs)) => witnesses.push(format!("n={n}: ({u},{}),({u},{})", vs[0], vs[1])),
            None => missing.push(format!("n={n}: F_{n} = {{{}}} has no two points over one u", f.elems().iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", "))),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Refuted(format!(
            "levels 1..5 tile; no witness pair at {}; witnesses {}",
            missing.join("; "),
            witnesses.join(" ")
        )));
    }
    Ok(format!("levels 1..5 tile; witnesses {}", witnesses.join(" ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_ratio_comparison() {
        let b = |x: u64| BigUint::from(x);
        assert!(ratio_le(&b(4), 2, &b(2), 1) && ratio_le(&b(2), 1, &b(4), 2));
        assert!(!ratio_le(&b(5), 2, &b(2), 1));
        assert!(ratio_le(&b(2), 20_001, &b(2), 20_000));
        assert!(!ratio_le(&b(3), 20_000, &b(2), 20_001));
        assert!((ln(&(BigUint::one() << 3000u32)) - 3000.0 * std::f64::consts::LN_2).abs() < 1e-6);
    }

    #[test]
    fn oracles_on_small_cases() {
        assert!(oracle_tiles(&[vec![0], vec![1]], &[vec![-1], vec![0], vec![1], vec![2]]));
        assert!(!oracle_tiles(&[vec![0], vec![2]], &[vec![0], vec![1], vec![2]]));
        assert!(!oracle_tiles(&[vec![0], vec![1], vec![3]], &[vec![0], vec![1], vec![2], vec![3], vec![4], vec![5]]));
        let t = AbelianTarget::finite(&[6]).unwrap();
        let s = |xs: &[u64]| AFinSet::from_unsorted(&t, xs.iter().map(|&x| TargetElem::Dense(vec![x])).collect());
        assert_eq!(brute_mu(&s(&[0, 1, 2, 3]), &s(&[0, 1])), 2);
        assert_eq!(brute_mu(&s(&[0, 2, 4]), &s(&[0])), 3);
    }
}
