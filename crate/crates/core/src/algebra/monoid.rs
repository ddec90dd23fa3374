use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::element::{fmt_rational, is_nonneg, rat_pow, Element};
use crate::error::{Error, Result};

/// The concrete monoid families the crate knows how to compute in.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    IntAdd,
    NatAdd,
    IntVecAdd(usize),
    NatVecAdd(usize),
    CyclicProd(Vec<u64>),
    RationalAdd,
    /// ℚ⋊ℤ with `n` acting as multiplication by `q^n`.
    SemidirectRatZ(BigRational),
    Heisenberg3,
    /// ⊕_{i∈ℕ} G_i with fiber `G_i = CyclicProd(fibers[i mod len])`.
    DirectSum(Vec<Vec<u64>>),
    /// (ℕ×ℕ) ∖ ({0}×ℕ₊) under addition.
    PuncturedQuadrant,
    /// ℤ⋊ℤ/2, the generator of ℤ/2 acting by negation.
    InfiniteDihedral,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::IntAdd => write!(f, "Z"),
            Family::NatAdd => write!(f, "N"),
            Family::IntVecAdd(d) => write!(f, "Z^{d}"),
            Family::NatVecAdd(d) => write!(f, "N^{d}"),
            Family::CyclicProd(m) => {
                if m.is_empty() {
                    return write!(f, "1");
                }
                let parts: Vec<String> = m.iter().map(|x| format!("Z/{x}")).collect();
                write!(f, "{}", parts.join(" x "))
            }
            Family::RationalAdd => write!(f, "Q"),
            Family::SemidirectRatZ(q) => write!(f, "Q x|_{} Z", fmt_rational(q)),
            Family::Heisenberg3 => write!(f, "H3(Z)"),
            Family::DirectSum(fib) => {
                let parts: Vec<String> = fib.iter().map(|m| format!("{m:?}")).collect();
                write!(f, "(+)_N {}", parts.join(","))
            }
            Family::PuncturedQuadrant => write!(f, "punctured quadrant"),
            Family::InfiniteDihedral => write!(f, "D_inf"),
        }
    }
}

/// A monoid together with an optional generating set.
///
/// Equality and hashing look at the family only; the generating set is
/// auxiliary data used by word lengths and ball exhaustions.
#[derive(Clone, Debug)]
pub struct MonoidCtx {
    family: Family,
    generators: Option<Vec<Element>>,
}

impl PartialEq for MonoidCtx {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family
    }
}
impl Eq for MonoidCtx {}
impl Hash for MonoidCtx {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.family.hash(state)
    }
}

impl fmt::Display for MonoidCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.family.fmt(f)
    }
}

fn mismatch(ctx: &MonoidCtx, e: &Element) -> Error {
    Error::ContextMismatch(format!("{} is not an element of {}", e, ctx.family))
}

impl MonoidCtx {
    pub fn new(family: Family) -> Result<Self> {
        match &family {
            Family::IntVecAdd(0) | Family::NatVecAdd(0) => {
                return Err(Error::Invalid("vector dimension must be positive".into()))
            }
            Family::CyclicProd(m) => {
                if m.iter().any(|&x| x < 2) {
                    return Err(Error::Invalid("cyclic moduli must be >= 2".into()));
                }
            }
            Family::SemidirectRatZ(q) => {
                if q.is_zero() {
                    return Err(Error::Invalid("semidirect parameter q must be nonzero".into()));
                }
            }
            Family::DirectSum(fib) => {
                if fib.is_empty() || fib.iter().any(|m| m.is_empty() || m.iter().any(|&x| x < 2)) {
                    return Err(Error::Invalid(
                        "direct sum fibers must be non-trivial finite cyclic products".into(),
                    ));
                }
            }
            _ => {}
        }
        let generators = default_generators(&family);
        Ok(MonoidCtx { family, generators })
    }

    pub fn int() -> Self {
        Self::new(Family::IntAdd).unwrap()
    }
    pub fn nat() -> Self {
        Self::new(Family::NatAdd).unwrap()
    }
    pub fn int_vec(d: usize) -> Result<Self> {
        Self::new(Family::IntVecAdd(d))
    }
    pub fn nat_vec(d: usize) -> Result<Self> {
        Self::new(Family::NatVecAdd(d))
    }
    pub fn cyclic(moduli: &[u64]) -> Result<Self> {
        Self::new(Family::CyclicProd(moduli.to_vec()))
    }
    pub fn rational() -> Self {
        Self::new(Family::RationalAdd).unwrap()
    }
    pub fn semidirect(q: BigRational) -> Result<Self> {
        Self::new(Family::SemidirectRatZ(q))
    }
    pub fn heisenberg() -> Self {
        Self::new(Family::Heisenberg3).unwrap()
    }
    pub fn direct_sum(fibers: Vec<Vec<u64>>) -> Result<Self> {
        Self::new(Family::DirectSum(fibers))
    }
    pub fn punctured_quadrant() -> Self {
        Self::new(Family::PuncturedQuadrant).unwrap()
    }
    pub fn infinite_dihedral() -> Self {
        Self::new(Family::InfiniteDihedral).unwrap()
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn generators(&self) -> Option<&[Element]> {
        self.generators.as_deref()
    }

    /// Replaces the generating set. In groups the set must be closed under
    /// inversion and must not contain the identity.
    pub fn with_generators(mut self, gens: Vec<Element>) -> Result<Self> {
        let id = self.identity();
        let mut seen = HashSet::new();
        for g in &gens {
            self.check(g)?;
            if self.is_group() && *g == id {
                return Err(Error::Invalid("generating set of a group must omit the identity".into()));
            }
            seen.insert(g.clone());
        }
        if self.is_group() {
            for g in &gens {
                if !seen.contains(&self.inv(g)?) {
                    return Err(Error::Invalid(format!(
                        "generating set is not symmetric: inverse of {g} missing"
                    )));
                }
            }
        }
        let mut gens: Vec<Element> = seen.into_iter().collect();
        gens.sort();
        self.generators = Some(gens);
        Ok(self)
    }

    pub fn is_group(&self) -> bool {
        !matches!(
            self.family,
            Family::NatAdd | Family::NatVecAdd(_) | Family::PuncturedQuadrant
        )
    }

    pub fn is_abelian(&self) -> bool {
        match &self.family {
            Family::SemidirectRatZ(q) => q.is_one(),
            Family::Heisenberg3 | Family::InfiniteDihedral => false,
            _ => true,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.family, Family::CyclicProd(_))
    }

    pub fn order(&self) -> Option<BigUint> {
        match &self.family {
            Family::CyclicProd(m) => Some(m.iter().map(|&x| BigUint::from(x)).product()),
            _ => None,
        }
    }

    /// All elements of a finite family in canonical order.
    pub fn elements(&self) -> Result<Vec<Element>> {
        let Family::CyclicProd(m) = &self.family else {
            return Err(Error::Unsupported(format!("{} is infinite", self.family)));
        };
        let mut out = vec![Vec::new()];
        for &mi in m {
            let mut next = Vec::with_capacity(out.len() * mi as usize);
            for v in &out {
                for r in 0..mi {
                    let mut w = v.clone();
                    w.push(r);
                    next.push(w);
                }
            }
            out = next;
        }
        Ok(out.into_iter().map(Element::Residues).collect())
    }

    pub fn identity(&self) -> Element {
        match &self.family {
            Family::IntAdd | Family::NatAdd => Element::Int(BigInt::zero()),
            Family::IntVecAdd(d) | Family::NatVecAdd(d) => Element::Vector(vec![BigInt::zero(); *d]),
            Family::PuncturedQuadrant => Element::Vector(vec![BigInt::zero(); 2]),
            Family::CyclicProd(m) => Element::Residues(vec![0; m.len()]),
            Family::RationalAdd => Element::Rational(BigRational::zero()),
            Family::SemidirectRatZ(_) => Element::SemiRat(BigRational::zero(), BigInt::zero()),
            Family::Heisenberg3 => Element::Heis(BigInt::zero(), BigInt::zero(), BigInt::zero()),
            Family::DirectSum(_) => Element::Sparse(BTreeMap::new()),
            Family::InfiniteDihedral => Element::Dihedral(BigInt::zero(), 0),
        }
    }

    pub fn fiber_at(&self, index: u64) -> Option<&[u64]> {
        match &self.family {
            Family::DirectSum(fib) => Some(&fib[(index % fib.len() as u64) as usize]),
            _ => None,
        }
    }

    /// Canonical-form membership test.
    pub fn contains(&self, e: &Element) -> bool {
        match (&self.family, e) {
            (Family::IntAdd, Element::Int(_)) => true,
            (Family::NatAdd, Element::Int(v)) => is_nonneg(v),
            (Family::IntVecAdd(d), Element::Vector(v)) => v.len() == *d,
            (Family::NatVecAdd(d), Element::Vector(v)) => v.len() == *d && v.iter().all(is_nonneg),
            (Family::PuncturedQuadrant, Element::Vector(v)) => {
                v.len() == 2 && v.iter().all(is_nonneg) && !(v[0].is_zero() && !v[1].is_zero())
            }
            (Family::CyclicProd(m), Element::Residues(r)) => {
                r.len() == m.len() && r.iter().zip(m).all(|(x, mi)| x < mi)
            }
            (Family::RationalAdd, Element::Rational(_)) => true,
            (Family::SemidirectRatZ(_), Element::SemiRat(..)) => true,
            (Family::Heisenberg3, Element::Heis(..)) => true,
            (Family::DirectSum(_), Element::Sparse(map)) => map.iter().all(|(&i, v)| {
                let m = self.fiber_at(i).unwrap();
                v.len() == m.len() && v.iter().zip(m).all(|(x, mi)| x < mi) && v.iter().any(|&x| x != 0)
            }),
            (Family::InfiniteDihedral, Element::Dihedral(_, e)) => *e < 2,
            _ => false,
        }
    }

    pub fn check(&self, e: &Element) -> Result<()> {
        if self.contains(e) {
            Ok(())
        } else {
            Err(mismatch(self, e))
        }
    }

    /// Reduces residues and drops zero fibers, then checks membership.
    pub fn canonicalize(&self, e: Element) -> Result<Element> {
        let e = match (&self.family, e) {
            (Family::CyclicProd(m), Element::Residues(r)) if r.len() == m.len() => {
                Element::Residues(r.iter().zip(m).map(|(x, mi)| x % mi).collect())
            }
            (Family::DirectSum(_), Element::Sparse(map)) => {
                let mut out = BTreeMap::new();
                for (i, v) in map {
                    let m = self.fiber_at(i).unwrap();
                    if v.len() != m.len() {
                        return Err(Error::ContextMismatch(format!("fiber {i} has wrong arity")));
                    }
                    let v: Vec<u64> = v.iter().zip(m).map(|(x, mi)| x % mi).collect();
                    if v.iter().any(|&x| x != 0) {
                        out.insert(i, v);
                    }
                }
                Element::Sparse(out)
            }
            (Family::InfiniteDihedral, Element::Dihedral(x, e)) => Element::Dihedral(x, e & 1),
            (_, e) => e,
        };
        self.check(&e)?;
        Ok(e)
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    /// Product without membership checks; callers guarantee both factors belong.
    pub(crate) fn mul_unchecked(&self, a: &Element, b: &Element) -> Element {
        match (&self.family, a, b) {
            (_, Element::Int(x), Element::Int(y)) => Element::Int(x + y),
            (_, Element::Vector(x), Element::Vector(y)) => {
                Element::Vector(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            (Family::CyclicProd(m), Element::Residues(x), Element::Residues(y)) => Element::Residues(
                x.iter().zip(y).zip(m).map(|((p, q), mi)| (p + q) % mi).collect(),
            ),
            (_, Element::Rational(x), Element::Rational(y)) => Element::Rational(x + y),
            (Family::SemidirectRatZ(q), Element::SemiRat(x1, n1), Element::SemiRat(x2, n2)) => {
                let qn = rat_pow(q, n1).expect("semidirect exponent out of range");
                Element::SemiRat(x1 + qn * x2, n1 + n2)
            }
            (_, Element::Heis(a1, b1, c1), Element::Heis(a2, b2, c2)) => {
                Element::Heis(a1 + a2, b1 + b2, c1 + c2 + a1 * b2)
            }
            (Family::DirectSum(_), Element::Sparse(x), Element::Sparse(y)) => {
                let mut out = x.clone();
                for (&i, v) in y {
                    let m = self.fiber_at(i).unwrap();
                    let entry = out.entry(i).or_insert_with(|| vec![0; m.len()]);
                    for ((e, add), mi) in entry.iter_mut().zip(v).zip(m) {
                        *e = (*e + add) % mi;
                    }
                    if entry.iter().all(|&z| z == 0) {
                        out.remove(&i);
                    }
                }
                Element::Sparse(out)
            }
            (_, Element::Dihedral(x1, e1), Element::Dihedral(x2, e2)) => {
                let x = if *e1 == 0 { x1 + x2 } else { x1 - x2 };
                Element::Dihedral(x, e1 ^ e2)
            }
            _ => panic!("mul_unchecked on mismatched elements {a} and {b}"),
        }
    }

    pub fn inv(&self, a: &Element) -> Result<Element> {
        if !self.is_group() {
            return Err(Error::NotAGroup(format!("{} has no inverses", self.family)));
        }
        self.check(a)?;
        Ok(self.inv_unchecked(a))
    }

    pub(crate) fn inv_unchecked(&self, a: &Element) -> Element {
        match (&self.family, a) {
            (_, Element::Int(x)) => Element::Int(-x),
            (_, Element::Vector(x)) => Element::Vector(x.iter().map(|v| -v).collect()),
            (Family::CyclicProd(m), Element::Residues(x)) => {
                Element::Residues(x.iter().zip(m).map(|(v, mi)| (mi - v) % mi).collect())
            }
            (_, Element::Rational(x)) => Element::Rational(-x),
            (Family::SemidirectRatZ(q), Element::SemiRat(x, n)) => {
                let qn = rat_pow(q, &-n).expect("semidirect exponent out of range");
                Element::SemiRat(-(qn * x), -n)
            }
            (_, Element::Heis(a, b, c)) => Element::Heis(-a, -b, a * b - c),
            (Family::DirectSum(_), Element::Sparse(x)) => Element::Sparse(
                x.iter()
                    .map(|(&i, v)| {
                        let m = self.fiber_at(i).unwrap();
                        (i, v.iter().zip(m).map(|(r, mi)| (mi - r) % mi).collect())
                    })
                    .collect(),
            ),
            (_, Element::Dihedral(x, 0)) => Element::Dihedral(-x, 0),
            (_, Element::Dihedral(x, e)) => Element::Dihedral(x.clone(), *e),
            _ => panic!("inv_unchecked on mismatched element {a}"),
        }
    }

    /// The unique `c` with `c·t = v`, if it exists in the monoid.
    pub fn left_quotient(&self, v: &Element, t: &Element) -> Option<Element> {
        if self.is_group() {
            return Some(self.mul_unchecked(v, &self.inv_unchecked(t)));
        }
        let c = match (v, t) {
            (Element::Int(x), Element::Int(y)) => Element::Int(x - y),
            (Element::Vector(x), Element::Vector(y)) => {
                Element::Vector(x.iter().zip(y).map(|(p, q)| p - q).collect())
            }
            _ => return None,
        };
        self.contains(&c).then_some(c)
    }

    /// The unique `c` with `t·c = v`, if it exists in the monoid.
    pub fn right_quotient(&self, v: &Element, t: &Element) -> Option<Element> {
        if self.is_group() {
            return Some(self.mul_unchecked(&self.inv_unchecked(t), v));
        }
        // every non-group family is abelian
        self.left_quotient(v, t)
    }

    pub fn pow(&self, a: &Element, n: i64) -> Result<Element> {
        self.check(a)?;
        let base = if n < 0 { self.inv(a)? } else { a.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = self.identity();
        let mut b = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul_unchecked(&acc, &b);
            }
            b = self.mul_unchecked(&b, &b);
            k >>= 1;
        }
        Ok(acc)
    }

    pub fn conjugate(&self, g: &Element, h: &Element) -> Result<Element> {
        let gi = self.inv(g)?;
        Ok(self.mul_unchecked(&self.mul_unchecked(g, h), &gi))
    }

    /// Length of a shortest word in the generators equal to `g`, searched by
    /// breadth-first search up to `radius`.
    pub fn word_length(&self, g: &Element, radius: usize) -> Result<usize> {
        self.check(g)?;
        let gens = self
            .generators()
            .ok_or_else(|| Error::Unsupported(format!("{} has no generating set", self.family)))?;
        let id = self.identity();
        if *g == id {
            return Ok(0);
        }
        let mut seen: HashSet<Element> = HashSet::from([id.clone()]);
        let mut frontier = vec![id];
        for r in 1..=radius {
            let mut next = Vec::new();
            for x in &frontier {
                for s in gens {
                    let y = self.mul_unchecked(x, s);
                    if y == *g {
                        return Ok(r);
                    }
                    if seen.insert(y.clone()) {
                        next.push(y);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Err(Error::Budget(format!("{g} not reached within word radius {radius}")))
    }

    /// The closed word-metric ball of the given radius, sorted.
    pub fn ball(&self, radius: usize) -> Result<Vec<Element>> {
        let gens = self
            .generators()
            .ok_or_else(|| Error::Unsupported(format!("{} has no generating set", self.family)))?;
        let id = self.identity();
        let mut seen: HashSet<Element> = HashSet::from([id.clone()]);
        let mut frontier = vec![id];
        for _ in 0..radius {
            let mut next = Vec::new();
            for x in &frontier {
                for s in gens {
                    let y = self.mul_unchecked(x, s);
                    if seen.insert(y.clone()) {
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        let mut out: Vec<Element> = seen.into_iter().collect();
        out.sort();
        Ok(out)
    }

    /// Spheres of the word metric in order, each sphere sorted canonically.
    /// Stops once `count` elements are listed or the radius cap is hit.
    pub fn ball_order(&self, count: usize, max_radius: usize) -> Result<Vec<Element>> {
        let gens = self
            .generators()
            .ok_or_else(|| Error::Unsupported(format!("{} has no generating set", self.family)))?;
        let id = self.identity();
        let mut seen: HashSet<Element> = HashSet::from([id.clone()]);
        let mut out = vec![id.clone()];
        let mut frontier = vec![id];
        let mut r = 0;
        while out.len() < count && r < max_radius && !frontier.is_empty() {
            let mut next = Vec::new();
            for x in &frontier {
                for s in gens {
                    let y = self.mul_unchecked(x, s);
                    if seen.insert(y.clone()) {
                        next.push(y);
                    }
                }
            }
            next.sort();
            out.extend(next.iter().cloned());
            frontier = next;
            r += 1;
        }
        out.truncate(count);
        Ok(out)
    }
}

fn default_generators(family: &Family) -> Option<Vec<Element>> {
    let unit = |d: usize, i: usize, s: i64| {
        let mut v = vec![BigInt::zero(); d];
        v[i] = BigInt::from(s);
        Element::Vector(v)
    };
    let mut gens = match family {
        Family::IntAdd => vec![Element::int(1), Element::int(-1)],
        Family::NatAdd => vec![Element::int(1)],
        Family::IntVecAdd(d) => (0..*d).flat_map(|i| [unit(*d, i, 1), unit(*d, i, -1)]).collect(),
        Family::NatVecAdd(d) => (0..*d).map(|i| unit(*d, i, 1)).collect(),
        Family::CyclicProd(m) => {
            let mut g = Vec::new();
            for (i, &mi) in m.iter().enumerate() {
                let mut v = vec![0; m.len()];
                v[i] = 1;
                g.push(Element::Residues(v.clone()));
                v[i] = mi - 1;
                g.push(Element::Residues(v));
            }
            g
        }
        Family::Heisenberg3 => vec![
            Element::heis(1, 0, 0),
            Element::heis(-1, 0, 0),
            Element::heis(0, 1, 0),
            Element::heis(0, -1, 0),
        ],
        Family::InfiniteDihedral => {
            vec![Element::dihedral(1, 0), Element::dihedral(-1, 0), Element::dihedral(0, 1)]
        }
        _ => return None,
    };
    gens.sort();
    gens.dedup();
    Some(gens)
}
