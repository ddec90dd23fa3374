use std::collections::HashSet;
use std::fmt;

use crate::algebra::{Element, MonoidCtx};
use crate::error::{Error, Result};

/// A finite subset of a monoid, kept sorted and duplicate-free.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FinSubset {
    ctx: MonoidCtx,
    elems: Vec<Element>,
}

impl fmt::Display for FinSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOW: usize = 12;
        let parts: Vec<String> = self.elems.iter().take(SHOW).map(|e| e.to_string()).collect();
        if self.elems.len() > SHOW {
            write!(f, "{{{}, ... ({} elements)}}", parts.join(", "), self.elems.len())
        } else {
            write!(f, "{{{}}}", parts.join(", "))
        }
    }
}

impl FinSubset {
    pub fn new(ctx: &MonoidCtx, elems: Vec<Element>) -> Result<Self> {
        for e in &elems {
            ctx.check(e)?;
        }
        Ok(Self::from_unsorted(ctx, elems))
    }

    /// Builds from elements known to belong to `ctx`.
    pub fn from_unsorted(ctx: &MonoidCtx, mut elems: Vec<Element>) -> Self {
        elems.sort_unstable();
        elems.dedup();
        FinSubset { ctx: ctx.clone(), elems }
    }

    pub(crate) fn from_sorted(ctx: &MonoidCtx, elems: Vec<Element>) -> Self {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        FinSubset { ctx: ctx.clone(), elems }
    }

    pub fn singleton(ctx: &MonoidCtx, e: Element) -> Result<Self> {
        Self::new(ctx, vec![e])
    }

    pub fn identity(ctx: &MonoidCtx) -> Self {
        FinSubset { ctx: ctx.clone(), elems: vec![ctx.identity()] }
    }

    pub fn empty(ctx: &MonoidCtx) -> Self {
        FinSubset { ctx: ctx.clone(), elems: Vec::new() }
    }

    pub fn ctx(&self) -> &MonoidCtx {
        &self.ctx
    }

    pub fn elems(&self) -> &[Element] {
        &self.elems
    }

    pub fn into_elems(self) -> Vec<Element> {
        self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Element> {
        self.elems.iter()
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.elems.binary_search(e).is_ok()
    }

    pub fn contains_identity(&self) -> bool {
        self.contains(&self.ctx.identity())
    }

    pub fn hash_set(&self) -> HashSet<&Element> {
        self.elems.iter().collect()
    }

    fn same_ctx(&self, other: &FinSubset) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch(format!("sets over {} and {}", self.ctx, other.ctx)));
        }
        Ok(())
    }

    /// `cT`.
    pub fn translate(&self, c: &Element) -> Result<FinSubset> {
        self.ctx.check(c)?;
        let v = self.elems.iter().map(|t| self.ctx.mul_unchecked(c, t)).collect();
        Ok(Self::from_unsorted(&self.ctx, v))
    }

    /// `Tc`.
    pub fn translate_right(&self, c: &Element) -> Result<FinSubset> {
        self.ctx.check(c)?;
        let v = self.elems.iter().map(|t| self.ctx.mul_unchecked(t, c)).collect();
        Ok(Self::from_unsorted(&self.ctx, v))
    }

    /// `AB = {ab}`.
    pub fn product(&self, other: &FinSubset) -> Result<FinSubset> {
        self.same_ctx(other)?;
        let mut v = Vec::with_capacity(self.len() * other.len());
        for a in &self.elems {
            for b in &other.elems {
                v.push(self.ctx.mul_unchecked(a, b));
            }
        }
        Ok(Self::from_unsorted(&self.ctx, v))
    }

    /// `T⁻¹`.
    pub fn inverse(&self) -> Result<FinSubset> {
        let v = self.elems.iter().map(|t| self.ctx.inv(t)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_unsorted(&self.ctx, v))
    }

    pub fn union(&self, other: &FinSubset) -> Result<FinSubset> {
        self.same_ctx(other)?;
        let mut v = self.elems.clone();
        v.extend(other.elems.iter().cloned());
        Ok(Self::from_unsorted(&self.ctx, v))
    }

    pub fn intersection(&self, other: &FinSubset) -> Result<FinSubset> {
        self.same_ctx(other)?;
        let v = self.elems.iter().filter(|e| other.contains(e)).cloned().collect();
        Ok(Self::from_sorted(&self.ctx, v))
    }

    pub fn difference(&self, other: &FinSubset) -> Result<FinSubset> {
        self.same_ctx(other)?;
        let v = self.elems.iter().filter(|e| !other.contains(e)).cloned().collect();
        Ok(Self::from_sorted(&self.ctx, v))
    }

    pub fn is_subset(&self, other: &FinSubset) -> bool {
        self.ctx == other.ctx && self.elems.iter().all(|e| other.contains(e))
    }

    pub fn is_disjoint(&self, other: &FinSubset) -> bool {
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.elems.iter().all(|e| !big.contains(e))
    }

    /// Image under a map into another (or the same) monoid.
    pub fn map<F>(&self, target: &MonoidCtx, f: F) -> Result<FinSubset>
    where
        F: Fn(&Element) -> Result<Element>,
    {
        let v = self.elems.iter().map(f).collect::<Result<Vec<_>>>()?;
        FinSubset::new(target, v)
    }
}
