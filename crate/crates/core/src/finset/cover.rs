use std::collections::{HashMap, HashSet};

use num_bigint::BigUint;

use super::aset::AFinSet;
use super::logval::LogValue;
use crate::algebra::TargetElem;
use crate::error::{Error, Result};

/// Node budget used when the caller does not pass one.
pub const DEFAULT_COVER_BUDGET: u64 = 5_000_000;

/// `X ⊆ ⋃ (aᵢ + Y)` with `a₀ = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverCert {
    pub x: AFinSet,
    pub y: AFinSet,
    pub translates: Vec<TargetElem>,
}

impl CoverCert {
    /// Rechecks the cover by direct set arithmetic.
    pub fn verify(&self) -> Result<()> {
        let t = self.x.target();
        if self.translates.first() != Some(&t.zero()) {
            return Err(Error::Verification("first translate must be 0".into()));
        }
        let ys: HashSet<&TargetElem> = self.y.iter().collect();
        for x in self.x.iter() {
            if !self.translates.iter().any(|a| ys.contains(&t.sub(x, a))) {
                return Err(Error::Verification(format!("{x} is not covered")));
            }
        }
        Ok(())
    }
}

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn and_not(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & !b).collect())
    }
    fn inter_count(&self, o: &Bits) -> usize {
        self.0.iter().zip(&o.0).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }
    fn subset_of(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & !b == 0)
    }
    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            (0..64).filter(move |b| word >> b & 1 == 1).map(move |b| w * 64 + b)
        })
    }
}

struct Search<'a> {
    sets: &'a [Bits],
    covering: &'a [Vec<usize>],
    max_size: usize,
    best: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn dfs(&mut self, uncovered: &Bits, chosen: &mut Vec<usize>) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::Budget(format!(
                "covering search exceeded {} nodes (best so far {})",
                self.budget,
                self.best.len() + 1
            )));
        }
        let left = uncovered.count();
        if left == 0 {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return Ok(());
        }
        if chosen.len() + left.div_ceil(self.max_size) >= self.best.len() {
            return Ok(());
        }
        // branch on the uncovered element with the fewest useful candidates
        let e = uncovered
            .ones()
            .min_by_key(|&e| (self.covering[e].len(), e))
            .unwrap();
        for &c in &self.covering[e] {
            chosen.push(c);
            let rest = uncovered.and_not(&self.sets[c]);
            self.dfs(&rest, chosen)?;
            chosen.pop();
            if chosen.len() + 1 >= self.best.len() {
                break;
            }
        }
        Ok(())
    }
}

/// Exact `μ(X, Y)` with a certificate, using the default node budget.
pub fn covering_number(x: &AFinSet, y: &AFinSet) -> Result<(usize, CoverCert)> {
    covering_number_with(x, y, DEFAULT_COVER_BUDGET)
}

/// Exact `μ(X, Y)`: fewest translates `a₀ = 0, a₁, …` of `Y` covering `X`.
///
/// Candidates are `(X − Y) ∪ {0}`; `0` is always taken. The minimum is found by
/// a greedy bound followed by depth-first branch and bound, branching on the
/// element with the fewest candidates and trying candidates in element order.
pub fn covering_number_with(x: &AFinSet, y: &AFinSet, budget: u64) -> Result<(usize, CoverCert)> {
    x.require_zero("X")?;
    y.require_zero("Y")?;
    if x.target() != y.target() {
        return Err(Error::ContextMismatch("X and Y live in different targets".into()));
    }
    let t = x.target();
    let n = x.len();
    let index: HashMap<&TargetElem, usize> = x.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let cover_of = |a: &TargetElem| -> Bits {
        let mut b = Bits::new(n);
        for yy in y.iter() {
            if let Some(&i) = index.get(&t.add(a, yy)) {
                b.set(i);
            }
        }
        b
    };
    let zero = t.zero();
    let base = cover_of(&zero);
    let mut all = Bits::new(n);
    (0..n).for_each(|i| all.set(i));
    let uncovered = all.and_not(&base);
    let finish = |extra: Vec<TargetElem>| -> (usize, CoverCert) {
        let mut translates = vec![zero.clone()];
        let mut extra = extra;
        extra.sort();
        translates.extend(extra);
        let cert = CoverCert { x: x.clone(), y: y.clone(), translates };
        (cert.translates.len(), cert)
    };
    if uncovered.is_empty() {
        return Ok(finish(Vec::new()));
    }

    // candidates restricted to what is still uncovered, in element order
    let pool = x.difference_set(y)?;
    let mut cands: Vec<(TargetElem, Bits)> = Vec::new();
    let mut seen_sets: HashSet<Vec<u64>> = HashSet::new();
    for a in pool.iter() {
        if *a == zero {
            continue;
        }
        let s = cover_of(a).and(&uncovered);
        if s.is_empty() || !seen_sets.insert(s.0.clone()) {
            continue;
        }
        cands.push((a.clone(), s));
    }
    if cands.len() <= 4000 {
        let keep: Vec<bool> = (0..cands.len())
            .map(|i| {
                !(0..cands.len()).any(|j| {
                    j != i && cands[i].1.subset_of(&cands[j].1) && cands[i].1.count() < cands[j].1.count()
                })
            })
            .collect();
        let mut k = keep.iter();
        cands.retain(|_| *k.next().unwrap());
    }
    let sets: Vec<Bits> = cands.iter().map(|(_, s)| s.clone()).collect();
    let mut covering = vec![Vec::new(); n];
    for (ci, s) in sets.iter().enumerate() {
        for e in s.ones() {
            covering[e].push(ci);
        }
    }
    let max_size = sets.iter().map(Bits::count).max().unwrap_or(1);

    let mut greedy = Vec::new();
    let mut u = uncovered.clone();
    while !u.is_empty() {
        let (ci, _) = sets
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.inter_count(&u)))
            .max_by_key(|&(i, c)| (c, std::cmp::Reverse(i)))
            .unwrap();
        greedy.push(ci);
        u = u.and_not(&sets[ci]);
    }
    let mut search = Search { sets: &sets, covering: &covering, max_size, best: greedy, nodes: 0, budget };
    search.dfs(&uncovered, &mut Vec::new())?;
    let extra = search.best.iter().map(|&c| cands[c].0.clone()).collect();
    Ok(finish(extra))
}

/// `ℓ(X) = ln |X|` for `0 ∈ X`.
pub fn ell(x: &AFinSet) -> Result<LogValue> {
    x.require_zero("X")?;
    Ok(LogValue::of(BigUint::from(x.len())))
}

/// `ℓ(X, Y) = ln μ(X, Y)`.
pub fn ell_rel(x: &AFinSet, y: &AFinSet) -> Result<LogValue> {
    let (m, _) = covering_number(x, y)?;
    Ok(LogValue::of(BigUint::from(m)))
}

/// True iff `(C − C) ∩ (Y − Y + Y − Y) = {0}`.
pub fn strong_disjoint_check(translates: &[TargetElem], y: &AFinSet) -> Result<bool> {
    let t = y.target();
    let c = AFinSet::new(t, translates.to_vec())?;
    c.require_zero("translate set")?;
    let dy = y.difference_set(y)?;
    let dyy = dy.minkowski_sum(&dy)?;
    let zero = t.zero();
    for a in c.iter() {
        for b in c.iter() {
            let d = t.sub(a, b);
            if d != zero && dyy.contains(&d) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
