use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::algebra::{AbelianTarget, ActionSpec, Element, Family, MonoidCtx, TargetElem};
use crate::algebra::Kernel;
use crate::error::{Error, Result};
use crate::finset::{AFinSet, FinSubset};

/// Largest trajectory that is ever materialized.
pub const DEFAULT_TRAJECTORY_CAP: usize = 1_000_000;

/// Fiber groups larger than this are not tabulated by the counter.
const MAX_FIBER_CODES: usize = 256;
/// Subset-construction states allowed per step before giving up.
const MAX_AUTOMATON_STATES: usize = 200_000;

fn check_inputs(act: &ActionSpec, f: &FinSubset, x: &AFinSet) -> Result<()> {
    if f.ctx() != act.monoid() {
        return Err(Error::ContextMismatch(format!("F lives in {}, the action is by {}", f.ctx(), act.monoid())));
    }
    if x.target() != act.target() {
        return Err(Error::ContextMismatch(format!("X lives in {}, the action is on {}", x.target(), act.target())));
    }
    x.require_zero("X")
}

/// `T_F(α, X) = Σ_{s∈F} α(s)(X)`, materialized under the default cap.
pub fn trajectory(act: &ActionSpec, f: &FinSubset, x: &AFinSet) -> Result<AFinSet> {
    trajectory_with(act, f, x, DEFAULT_TRAJECTORY_CAP)
}

pub fn trajectory_with(act: &ActionSpec, f: &FinSubset, x: &AFinSet, cap: usize) -> Result<AFinSet> {
    check_inputs(act, f, x)?;
    materialize(act, f.elems(), x, cap)
}

fn materialize(act: &ActionSpec, f: &[Element], x: &AFinSet, cap: usize) -> Result<AFinSet> {
    let target = act.target();
    let mut acc: HashSet<TargetElem> = HashSet::from([target.zero()]);
    for s in f {
        let img = act.apply_all(s, x.elems())?;
        let mut next = HashSet::with_capacity(acc.len() * 2);
        for a in &acc {
            for b in &img {
                next.insert(target.add(a, b));
                if next.len() > cap {
                    return Err(Error::Budget(format!("trajectory exceeds {cap} elements")));
                }
            }
        }
        acc = next;
    }
    Ok(AFinSet::from_unsorted(target, acc.into_iter().collect()))
}

/// `|T_F(α, X)|`, exactly.
///
/// Shifts are counted without enumerating the trajectory: the translates `sX`
/// split into groups with pairwise disjoint supports, whose trajectories
/// multiply, and a group laid out along a line is counted by a
/// subset-construction automaton over the positions. Anything else is
/// materialized under `cap`.
pub fn trajectory_size(act: &ActionSpec, f: &FinSubset, x: &AFinSet) -> Result<BigUint> {
    trajectory_size_with(act, f, x, DEFAULT_TRAJECTORY_CAP)
}

pub fn trajectory_size_with(act: &ActionSpec, f: &FinSubset, x: &AFinSet, cap: usize) -> Result<BigUint> {
    check_inputs(act, f, x)?;
    if f.is_empty() || x.len() == 1 {
        return Ok(BigUint::one());
    }
    if let Some(arith) = shift_arith(act)? {
        return ShiftCounter::new(act, arith, x, cap).count(f.elems());
    }
    Ok(BigUint::from(materialize(act, f.elems(), x, cap)?.len()))
}

/// Addition in one fiber, optionally followed by reduction to the least
/// representative modulo a fiber subgroup.
#[derive(Clone)]
struct FiberArith {
    moduli: Vec<u64>,
    kernel: Option<Vec<Vec<u64>>>,
}

fn shift_arith(act: &ActionSpec) -> Result<Option<FiberArith>> {
    Ok(match act {
        ActionSpec::Shift { target } => Some(FiberArith { moduli: target.moduli().to_vec(), kernel: None }),
        ActionSpec::Restricted { inner, .. } => shift_arith(inner)?,
        ActionSpec::Quotient { inner, target } => match (shift_arith(inner)?, target) {
            (Some(a), AbelianTarget::Quotient { kernel: Kernel::Fiber(c), .. }) if a.kernel.is_none() => {
                Some(FiberArith { moduli: a.moduli, kernel: Some(c.clone()) })
            }
            _ => None,
        },
        _ => None,
    })
}

impl FiberArith {
    fn size(&self) -> usize {
        self.moduli.iter().map(|&m| m as usize).product()
    }

    fn encode(&self, v: &[u64]) -> u32 {
        v.iter().zip(&self.moduli).fold(0u64, |acc, (x, m)| acc * m + x) as u32
    }

    fn decode(&self, mut c: u32) -> Vec<u64> {
        let mut v = vec![0; self.moduli.len()];
        for i in (0..self.moduli.len()).rev() {
            v[i] = c as u64 % self.moduli[i];
            c /= self.moduli[i] as u32;
        }
        v
    }

    fn reduce(&self, v: Vec<u64>) -> Vec<u64> {
        match &self.kernel {
            None => v,
            Some(c) => c
                .iter()
                .map(|w| v.iter().zip(w).zip(&self.moduli).map(|((a, b), m)| (a + b) % m).collect::<Vec<u64>>())
                .min()
                .expect("kernel contains 0"),
        }
    }

    /// `table[a * g + b] = reduce(a + b)`.
    fn table(&self) -> Vec<u32> {
        let g = self.size();
        let mut t = vec![0; g * g];
        for a in 0..g {
            let va = self.decode(a as u32);
            for b in 0..g {
                let vb = self.decode(b as u32);
                let s: Vec<u64> = va.iter().zip(&vb).zip(&self.moduli).map(|((x, y), m)| (x + y) % m).collect();
                t[a * g + b] = self.encode(&self.reduce(s));
            }
        }
        t
    }
}

/// Coordinates of an element of an additive family.
fn coords(e: &Element) -> Option<Vec<i64>> {
    match e {
        Element::Int(x) => Some(vec![x.to_i64()?]),
        Element::Vector(v) => v.iter().map(|x| x.to_i64()).collect(),
        _ => None,
    }
}

fn is_additive(ctx: &MonoidCtx) -> bool {
    matches!(
        ctx.family(),
        Family::IntAdd | Family::NatAdd | Family::IntVecAdd(_) | Family::NatVecAdd(_) | Family::PuncturedQuadrant
    )
}

/// `w = base + j·d` for an integer `j`.
fn multiple_of(w: &[i64], base: &[i64], d: &[i64]) -> Option<i64> {
    let i = d.iter().position(|&x| x != 0)?;
    let diff = w[i] - base[i];
    if diff % d[i] != 0 {
        return None;
    }
    let j = diff / d[i];
    w.iter().zip(base).zip(d).all(|((w, b), d)| w - b == j * d).then_some(j)
}

fn union_find_root(p: &mut [usize], mut i: usize) -> usize {
    while p[i] != i {
        p[i] = p[p[i]];
        i = p[i];
    }
    i
}

struct ShiftCounter<'a> {
    act: &'a ActionSpec,
    arith: FiberArith,
    x: &'a AFinSet,
    cap: usize,
    support: Vec<Element>,
    /// Per direction, counts for every length up to the longest requested.
    lines: HashMap<Vec<i64>, Vec<BigUint>>,
}

impl<'a> ShiftCounter<'a> {
    fn new(act: &'a ActionSpec, arith: FiberArith, x: &'a AFinSet, cap: usize) -> Self {
        let mut support = BTreeSet::new();
        for e in x.iter() {
            if let TargetElem::Sparse(m) = e {
                support.extend(m.keys().cloned());
            }
        }
        ShiftCounter { act, arith, x, cap, support: support.into_iter().collect(), lines: HashMap::new() }
    }

    fn count(&mut self, f: &[Element]) -> Result<BigUint> {
        let index = self.act.monoid().clone();
        // Group the translates by overlapping supports.
        let mut parent: Vec<usize> = (0..f.len()).collect();
        let mut owner: HashMap<Element, usize> = HashMap::new();
        for (i, s) in f.iter().enumerate() {
            for w in &self.support {
                let p = index.mul_unchecked(s, w);
                match owner.get(&p) {
                    Some(&j) => {
                        let (a, b) = (union_find_root(&mut parent, i), union_find_root(&mut parent, j));
                        if a != b {
                            parent[a.max(b)] = a.min(b);
                        }
                    }
                    None => {
                        owner.insert(p, i);
                    }
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..f.len() {
            let r = union_find_root(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        let mut pending: Vec<(Vec<i64>, usize)> = Vec::new();
        let mut total = BigUint::one();
        for members in groups.values() {
            if members.len() == 1 {
                total *= BigUint::from(self.x.len());
                continue;
            }
            let elems: Vec<Element> = members.iter().map(|&i| f[i].clone()).collect();
            match self.line_shape(&index, &elems) {
                Some(key) => pending.push(key),
                None => total *= BigUint::from(materialize(self.act, &elems, self.x, self.cap)?.len()),
            }
        }
        for (d, len) in pending {
            total *= self.line_count(&d, len)?;
        }
        Ok(total)
    }

    /// `(d, L)` when the group is `c, c+d, …, c+(L−1)d` and the support of
    /// `X` lies on a line parallel to `d`.
    fn line_shape(&self, index: &MonoidCtx, elems: &[Element]) -> Option<(Vec<i64>, usize)> {
        if !is_additive(index) || self.arith.size() > MAX_FIBER_CODES {
            return None;
        }
        let mut pts: Vec<Vec<i64>> = elems.iter().map(coords).collect::<Option<_>>()?;
        pts.sort();
        let d: Vec<i64> = pts[1].iter().zip(&pts[0]).map(|(a, b)| a - b).collect();
        for (k, p) in pts.iter().enumerate() {
            if multiple_of(p, &pts[0], &d) != Some(k as i64) {
                return None;
            }
        }
        let w: Vec<Vec<i64>> = self.support.iter().map(coords).collect::<Option<_>>()?;
        w.iter().all(|p| multiple_of(p, &w[0], &d).is_some()).then_some((d, pts.len()))
    }

    fn line_count(&mut self, d: &[i64], len: usize) -> Result<BigUint> {
        if self.lines.get(d).map_or(true, |v| v.len() <= len) {
            let counts = self.run_line(d, len)?;
            self.lines.insert(d.to_vec(), counts);
        }
        Ok(self.lines[d][len].clone())
    }

    /// Counts of distinct trajectories of `c + {0, …, k−1}·d` for `k ≤ len`.
    ///
    /// Processing translate `k` adds its pattern to positions `k, k+1, …`;
    /// position `k` is final afterwards. A state is the set of possible
    /// pending tails given the emitted prefix, so distinct paths are distinct
    /// outputs and the count after `k` steps is `Σ paths · |tails|`.
    fn run_line(&self, d: &[i64], len: usize) -> Result<Vec<BigUint>> {
        let w: Vec<Vec<i64>> = self.support.iter().map(|e| coords(e).unwrap()).collect();
        let js: Vec<i64> = w.iter().map(|p| multiple_of(p, &w[0], d).unwrap()).collect();
        let j0 = *js.iter().min().unwrap();
        let width = (js.iter().max().unwrap() - j0 + 1) as usize;
        let offset: HashMap<&Element, usize> =
            self.support.iter().zip(&js).map(|(e, j)| (e, (j - j0) as usize)).collect();
        let g = self.arith.size();
        let table = self.arith.table();
        let add = |a: u32, b: u32| table[a as usize * g + b as usize];
        let zero = self.arith.encode(&vec![0; self.arith.moduli.len()]);
        let patterns: Vec<Vec<u32>> = self
            .x
            .iter()
            .map(|e| {
                let mut p = vec![zero; width];
                if let TargetElem::Sparse(m) = e {
                    for (k, v) in m {
                        p[offset[k]] = self.arith.encode(v);
                    }
                }
                p
            })
            .collect();

        type State = Vec<Vec<u32>>;
        let mut states: HashMap<State, BigUint> = HashMap::from([(vec![vec![zero; width - 1]], BigUint::one())]);
        let mut out = vec![BigUint::one()];
        for _ in 0..len {
            let mut next: HashMap<State, BigUint> = HashMap::new();
            for (state, cnt) in &states {
                let mut by_symbol: BTreeMap<u32, BTreeSet<Vec<u32>>> = BTreeMap::new();
                for tail in state {
                    for p in &patterns {
                        let q: Vec<u32> =
                            (0..width).map(|j| add(if j + 1 < width { tail[j] } else { zero }, p[j])).collect();
                        by_symbol.entry(q[0]).or_default().insert(q[1..].to_vec());
                    }
                }
                for tails in by_symbol.into_values() {
                    *next.entry(tails.into_iter().collect()).or_insert_with(BigUint::zero) += cnt;
                }
            }
            if next.len() > MAX_AUTOMATON_STATES {
                return Err(Error::Budget(format!("trajectory automaton exceeds {MAX_AUTOMATON_STATES} states")));
            }
            states = next;
            let total: BigUint = states.iter().map(|(s, c)| c * BigUint::from(s.len())).sum();
            out.push(total);
        }
        Ok(out)
    }
}

/// `true` when `X` is closed under addition (a subgroup, as targets are torsion).
pub fn is_subgroup(x: &AFinSet) -> bool {
    let t = x.target();
    x.contains_zero() && x.iter().all(|a| x.iter().all(|b| x.contains(&t.add(a, b))))
}

