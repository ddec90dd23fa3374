use std::collections::HashSet;
use std::fmt;

use crate::algebra::{AbelianTarget, TargetElem};
use crate::error::{Error, Result};

/// A finite subset of an abelian target group.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AFinSet {
    target: AbelianTarget,
    elems: Vec<TargetElem>,
    contains_zero: bool,
}

impl fmt::Display for AFinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOW: usize = 10;
        let parts: Vec<String> = self.elems.iter().take(SHOW).map(|e| e.to_string()).collect();
        if self.elems.len() > SHOW {
            write!(f, "{{{}, ... ({} elements)}}", parts.join(", "), self.elems.len())
        } else {
            write!(f, "{{{}}}", parts.join(", "))
        }
    }
}

impl AFinSet {
    pub fn new(target: &AbelianTarget, elems: Vec<TargetElem>) -> Result<Self> {
        for x in &elems {
            target.check(x)?;
        }
        Ok(Self::from_unsorted(target, elems))
    }

    pub fn from_unsorted(target: &AbelianTarget, mut elems: Vec<TargetElem>) -> Self {
        elems.sort_unstable();
        elems.dedup();
        let zero = target.zero();
        let contains_zero = elems.binary_search(&zero).is_ok();
        AFinSet { target: target.clone(), elems, contains_zero }
    }

    pub fn zero(target: &AbelianTarget) -> Self {
        AFinSet { target: target.clone(), elems: vec![target.zero()], contains_zero: true }
    }

    pub fn target(&self) -> &AbelianTarget {
        &self.target
    }

    pub fn elems(&self) -> &[TargetElem] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TargetElem> {
        self.elems.iter()
    }

    pub fn contains(&self, x: &TargetElem) -> bool {
        self.elems.binary_search(x).is_ok()
    }

    pub fn contains_zero(&self) -> bool {
        self.contains_zero
    }

    /// Errors unless `0` belongs to the set.
    pub fn require_zero(&self, name: &str) -> Result<()> {
        if self.contains_zero {
            Ok(())
        } else {
            Err(Error::Invalid(format!("{name} must contain 0")))
        }
    }

    fn same_target(&self, other: &AFinSet) -> Result<()> {
        if self.target != other.target {
            return Err(Error::ContextMismatch(format!(
                "sets in {} and {}",
                self.target, other.target
            )));
        }
        Ok(())
    }

    /// `a + Y`.
    pub fn translate(&self, a: &TargetElem) -> Result<AFinSet> {
        self.target.check(a)?;
        let v = self.elems.iter().map(|y| self.target.add(a, y)).collect();
        Ok(Self::from_unsorted(&self.target, v))
    }

    pub fn minkowski_sum(&self, other: &AFinSet) -> Result<AFinSet> {
        self.same_target(other)?;
        let mut seen: HashSet<TargetElem> = HashSet::with_capacity(self.len() * other.len());
        for x in &self.elems {
            for y in &other.elems {
                seen.insert(self.target.add(x, y));
            }
        }
        Ok(Self::from_unsorted(&self.target, seen.into_iter().collect()))
    }

    /// `X − Y = {x − y}`.
    pub fn difference_set(&self, other: &AFinSet) -> Result<AFinSet> {
        self.same_target(other)?;
        self.minkowski_sum(&other.negate())
    }

    pub fn negate(&self) -> AFinSet {
        Self::from_unsorted(&self.target, self.elems.iter().map(|x| self.target.neg(x)).collect())
    }

    pub fn union(&self, other: &AFinSet) -> Result<AFinSet> {
        self.same_target(other)?;
        let mut v = self.elems.clone();
        v.extend(other.elems.iter().cloned());
        Ok(Self::from_unsorted(&self.target, v))
    }

    pub fn intersection(&self, other: &AFinSet) -> Result<AFinSet> {
        self.same_target(other)?;
        let v = self.elems.iter().filter(|x| other.contains(x)).cloned().collect();
        Ok(Self::from_unsorted(&self.target, v))
    }

    pub fn is_subset(&self, other: &AFinSet) -> bool {
        self.target == other.target && self.elems.iter().all(|x| other.contains(x))
    }

    /// Image under a map into `target`.
    pub fn map<F>(&self, target: &AbelianTarget, f: F) -> Result<AFinSet>
    where
        F: Fn(&TargetElem) -> Result<TargetElem>,
    {
        let v = self.elems.iter().map(f).collect::<Result<Vec<_>>>()?;
        AFinSet::new(target, v)
    }

    /// Elements satisfying `pred`, as a set in the same target.
    pub fn filter<F: Fn(&TargetElem) -> bool>(&self, pred: F) -> AFinSet {
        Self::from_unsorted(&self.target, self.elems.iter().filter(|x| pred(x)).cloned().collect())
    }
}

/// `X + Y`; a free-function spelling of [`AFinSet::minkowski_sum`].
pub fn minkowski_sum(x: &AFinSet, y: &AFinSet) -> Result<AFinSet> {
    x.minkowski_sum(y)
}
