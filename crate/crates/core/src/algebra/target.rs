use std::collections::BTreeMap;
use std::fmt;

use super::element::Element;
use super::monoid::MonoidCtx;
use crate::error::{Error, Result};

/// The abelian group an action lives on.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AbelianTarget {
    /// ∏ ℤ/m_i; the empty product is the trivial group.
    Finite(Vec<u64>),
    /// ⊕_{s∈S} fiber, finitely supported.
    FinSupport { index: MonoidCtx, fiber: Vec<u64> },
    /// A subgroup of `base`, elements kept in the coordinates of `base`.
    Subgroup { base: Box<AbelianTarget>, kernel: Kernel },
    /// `base / kernel`, elements stored as least coset representatives.
    Quotient { base: Box<AbelianTarget>, kernel: Kernel },
}

/// An explicitly enumerated subgroup used by [`AbelianTarget::Subgroup`] and
/// [`AbelianTarget::Quotient`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Kernel {
    /// Every element of a subgroup of a finite target, sorted.
    Finite(Vec<TargetElem>),
    /// Every element of a subgroup `C` of the fiber; the kernel is ⊕_S C.
    Fiber(Vec<Vec<u64>>),
}

/// An element of an [`AbelianTarget`].
///
/// Sparse values never store a zero fiber, so equality is equality of groups
/// elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TargetElem {
    Dense(Vec<u64>),
    Sparse(BTreeMap<Element, Vec<u64>>),
}

impl fmt::Display for TargetElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetElem::Dense(v) => {
                let p: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", p.join(", "))
            }
            TargetElem::Sparse(m) => {
                if m.is_empty() {
                    return write!(f, "0");
                }
                let p: Vec<String> = m
                    .iter()
                    .map(|(k, v)| {
                        let c: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                        format!("{}@{}", c.join("|"), k)
                    })
                    .collect();
                write!(f, "{}", p.join(" + "))
            }
        }
    }
}

impl fmt::Display for AbelianTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbelianTarget::Finite(m) => write!(f, "{m:?}"),
            AbelianTarget::FinSupport { index, fiber } => write!(f, "(+)_{{{index}}} {fiber:?}"),
            AbelianTarget::Subgroup { base, kernel } => write!(f, "sub[{}] of {base}", kernel.len()),
            AbelianTarget::Quotient { base, kernel } => write!(f, "{base} / [{}]", kernel.len()),
        }
    }
}

fn reduce(v: &mut [u64], m: &[u64]) {
    for (x, mi) in v.iter_mut().zip(m) {
        *x %= mi;
    }
}

impl AbelianTarget {
    pub fn finite(moduli: &[u64]) -> Result<Self> {
        if moduli.iter().any(|&m| m < 2) {
            return Err(Error::Invalid("target moduli must be >= 2".into()));
        }
        Ok(AbelianTarget::Finite(moduli.to_vec()))
    }

    pub fn fin_support(index: MonoidCtx, fiber: &[u64]) -> Result<Self> {
        if fiber.iter().any(|&m| m < 2) {
            return Err(Error::Invalid("fiber moduli must be >= 2".into()));
        }
        Ok(AbelianTarget::FinSupport { index, fiber: fiber.to_vec() })
    }

    /// Moduli of a single coordinate block (the whole group, or one fiber).
    pub fn moduli(&self) -> &[u64] {
        match self {
            AbelianTarget::Finite(m) => m,
            AbelianTarget::FinSupport { fiber, .. } => fiber,
            AbelianTarget::Subgroup { base, .. } | AbelianTarget::Quotient { base, .. } => base.moduli(),
        }
    }

    pub fn base(&self) -> &AbelianTarget {
        match self {
            AbelianTarget::Subgroup { base, .. } | AbelianTarget::Quotient { base, .. } => base.base(),
            _ => self,
        }
    }

    /// Least representative of the coset of `x` for quotient targets; the
    /// identity map otherwise.
    pub fn normalize(&self, x: TargetElem) -> TargetElem {
        match self {
            AbelianTarget::Quotient { base, kernel } => {
                let x = base.normalize(x);
                kernel.reduce(base, &x)
            }
            AbelianTarget::Subgroup { base, .. } => base.normalize(x),
            _ => x,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.base(), AbelianTarget::Finite(_))
    }

    pub fn zero(&self) -> TargetElem {
        match self.base() {
            AbelianTarget::Finite(m) => TargetElem::Dense(vec![0; m.len()]),
            _ => TargetElem::Sparse(BTreeMap::new()),
        }
    }

    pub fn contains(&self, x: &TargetElem) -> bool {
        match (self, x) {
            (AbelianTarget::Finite(m), TargetElem::Dense(v)) => {
                v.len() == m.len() && v.iter().zip(m).all(|(a, b)| a < b)
            }
            (AbelianTarget::FinSupport { index, fiber }, TargetElem::Sparse(map)) => {
                map.iter().all(|(k, v)| {
                    index.contains(k)
                        && v.len() == fiber.len()
                        && v.iter().zip(fiber).all(|(a, b)| a < b)
                        && v.iter().any(|&a| a != 0)
                })
            }
            (AbelianTarget::Subgroup { base, kernel }, x) => base.contains(x) && kernel.contains(x),
            (AbelianTarget::Quotient { base, kernel }, x) => {
                base.contains(x) && kernel.reduce(base, x) == *x
            }
            _ => false,
        }
    }

    pub fn check(&self, x: &TargetElem) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::ContextMismatch(format!("{x} is not an element of {self}")))
        }
    }

    pub fn canonicalize(&self, x: TargetElem) -> Result<TargetElem> {
        let x = match (self, x) {
            (AbelianTarget::Finite(m), TargetElem::Dense(mut v)) if v.len() == m.len() => {
                reduce(&mut v, m);
                TargetElem::Dense(v)
            }
            (AbelianTarget::FinSupport { fiber, .. }, TargetElem::Sparse(map)) => {
                let mut out = BTreeMap::new();
                for (k, mut v) in map {
                    if v.len() != fiber.len() {
                        return Err(Error::ContextMismatch("fiber arity mismatch".into()));
                    }
                    reduce(&mut v, fiber);
                    if v.iter().any(|&a| a != 0) {
                        out.insert(k, v);
                    }
                }
                TargetElem::Sparse(out)
            }
            (AbelianTarget::Subgroup { base, .. }, x) => base.canonicalize(x)?,
            (AbelianTarget::Quotient { base, kernel }, x) => {
                let x = base.canonicalize(x)?;
                kernel.reduce(base, &x)
            }
            (_, x) => x,
        };
        self.check(&x)?;
        Ok(x)
    }

    /// `v·e_t`, the basis vector at index `t` scaled by fiber value `v`.
    pub fn basis(&self, t: &Element, v: &[u64]) -> Result<TargetElem> {
        match self.base() {
            AbelianTarget::FinSupport { index, .. } => {
                index.check(t)?;
                self.canonicalize(TargetElem::Sparse(BTreeMap::from([(t.clone(), v.to_vec())])))
            }
            _ => {
                Err(Error::Unsupported("basis vectors exist only on finitely supported targets".into()))
            }
        }
    }

    pub fn add(&self, a: &TargetElem, b: &TargetElem) -> TargetElem {
        match self {
            AbelianTarget::Quotient { .. } => self.normalize(self.raw_add(a, b)),
            _ => self.raw_add(a, b),
        }
    }

    pub fn neg(&self, a: &TargetElem) -> TargetElem {
        match self {
            AbelianTarget::Quotient { .. } => self.normalize(self.raw_neg(a)),
            _ => self.raw_neg(a),
        }
    }

    pub fn sub(&self, a: &TargetElem, b: &TargetElem) -> TargetElem {
        self.add(a, &self.raw_neg(b))
    }

    /// `k·a` for an integer `k`.
    pub fn scale(&self, a: &TargetElem, k: i64) -> TargetElem {
        match self {
            AbelianTarget::Quotient { .. } => self.normalize(self.raw_scale(a, k)),
            _ => self.raw_scale(a, k),
        }
    }

    fn raw_add(&self, a: &TargetElem, b: &TargetElem) -> TargetElem {
        let m = self.moduli();
        match (a, b) {
            (TargetElem::Dense(x), TargetElem::Dense(y)) => {
                TargetElem::Dense(x.iter().zip(y).zip(m).map(|((p, q), mi)| (p + q) % mi).collect())
            }
            (TargetElem::Sparse(x), TargetElem::Sparse(y)) => {
                let (big, small) = if x.len() >= y.len() { (x, y) } else { (y, x) };
                let mut out = big.clone();
                for (k, v) in small {
                    let e = out.entry(k.clone()).or_insert_with(|| vec![0; m.len()]);
                    for ((a, b), mi) in e.iter_mut().zip(v).zip(m) {
                        *a = (*a + b) % mi;
                    }
                    if e.iter().all(|&z| z == 0) {
                        out.remove(k);
                    }
                }
                TargetElem::Sparse(out)
            }
            _ => panic!("adding target elements of different kinds"),
        }
    }

    fn raw_neg(&self, a: &TargetElem) -> TargetElem {
        let m = self.moduli();
        let negv = |v: &Vec<u64>| -> Vec<u64> { v.iter().zip(m).map(|(x, mi)| (mi - x) % mi).collect() };
        match a {
            TargetElem::Dense(v) => TargetElem::Dense(negv(v)),
            TargetElem::Sparse(map) => {
                TargetElem::Sparse(map.iter().map(|(k, v)| (k.clone(), negv(v))).collect())
            }
        }
    }

    fn raw_scale(&self, a: &TargetElem, k: i64) -> TargetElem {
        let m = self.moduli();
        let sc = |v: &Vec<u64>| -> Vec<u64> {
            v.iter()
                .zip(m)
                .map(|(x, mi)| ((*x as i128 * k as i128).rem_euclid(*mi as i128)) as u64)
                .collect()
        };
        match a {
            TargetElem::Dense(v) => TargetElem::Dense(sc(v)),
            TargetElem::Sparse(map) => TargetElem::Sparse(
                map.iter()
                    .map(|(t, v)| (t.clone(), sc(v)))
                    .filter(|(_, v)| v.iter().any(|&x| x != 0))
                    .collect(),
            ),
        }
    }

    pub fn is_zero(&self, a: &TargetElem) -> bool {
        match a {
            TargetElem::Dense(v) => v.iter().all(|&x| x == 0),
            TargetElem::Sparse(m) => m.is_empty(),
        }
    }
}

impl Kernel {
    pub fn len(&self) -> usize {
        match self {
            Kernel::Finite(v) => v.len(),
            Kernel::Fiber(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, x: &TargetElem) -> bool {
        match (self, x) {
            (Kernel::Finite(els), x) => els.binary_search(x).is_ok(),
            (Kernel::Fiber(c), TargetElem::Sparse(map)) => map.values().all(|v| c.binary_search(v).is_ok()),
            _ => false,
        }
    }

    /// Least element of `x + kernel` in the canonical order of `base`.
    pub fn reduce(&self, base: &AbelianTarget, x: &TargetElem) -> TargetElem {
        match (self, x) {
            (Kernel::Finite(els), x) => els
                .iter()
                .map(|b| base.add(x, b))
                .min()
                .expect("kernel contains 0"),
            (Kernel::Fiber(c), TargetElem::Sparse(map)) => {
                let m = base.moduli();
                let mut out = BTreeMap::new();
                for (k, v) in map {
                    let best = c
                        .iter()
                        .map(|w| v.iter().zip(w).zip(m).map(|((a, b), mi)| (a + b) % mi).collect::<Vec<u64>>())
                        .min()
                        .expect("kernel contains 0");
                    if best.iter().any(|&z| z != 0) {
                        out.insert(k.clone(), best);
                    }
                }
                TargetElem::Sparse(out)
            }
            _ => x.clone(),
        }
    }
}
