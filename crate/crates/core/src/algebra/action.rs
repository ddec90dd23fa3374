use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use super::element::Element;
use super::monoid::{Family, MonoidCtx};
use super::target::{AbelianTarget, TargetElem};
use crate::error::{Error, Result};

/// Cap on the multiplicative order search used to invert an endomorphism.
const ORDER_CAP: usize = 1 << 20;

/// Square integer matrix acting on ∏ ℤ/m_i; row `i` is stored reduced mod `m_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EndoMatrix {
    pub moduli: Vec<u64>,
    pub rows: Vec<Vec<u64>>,
}

impl EndoMatrix {
    pub fn new(moduli: &[u64], entries: &[Vec<i64>]) -> Result<Self> {
        let d = moduli.len();
        if entries.len() != d || entries.iter().any(|r| r.len() != d) {
            return Err(Error::Invalid(format!("matrix must be {d}x{d}")));
        }
        if moduli.iter().any(|&m| m < 2) {
            return Err(Error::Invalid("target moduli must be >= 2".into()));
        }
        let rows: Vec<Vec<u64>> = entries
            .iter()
            .zip(moduli)
            .map(|(r, &mi)| r.iter().map(|&x| x.rem_euclid(mi as i64) as u64).collect())
            .collect();
        for i in 0..d {
            for j in 0..d {
                if (rows[i][j] as u128 * moduli[j] as u128) % moduli[i] as u128 != 0 {
                    return Err(Error::Invalid(format!(
                        "entry ({i},{j}) does not give a homomorphism Z/{} -> Z/{}",
                        moduli[j], moduli[i]
                    )));
                }
            }
        }
        Ok(EndoMatrix { moduli: moduli.to_vec(), rows })
    }

    pub fn identity(moduli: &[u64]) -> Self {
        let d = moduli.len();
        let rows = (0..d).map(|i| (0..d).map(|j| u64::from(i == j)).collect()).collect();
        EndoMatrix { moduli: moduli.to_vec(), rows }
    }

    pub fn dim(&self) -> usize {
        self.moduli.len()
    }

    pub fn compose(&self, other: &EndoMatrix) -> EndoMatrix {
        let d = self.dim();
        let mut rows = vec![vec![0u64; d]; d];
        for i in 0..d {
            let mi = self.moduli[i] as u128;
            for j in 0..d {
                let mut acc: u128 = 0;
                for k in 0..d {
                    acc = (acc + self.rows[i][k] as u128 * other.rows[k][j] as u128) % mi;
                }
                rows[i][j] = acc as u64;
            }
        }
        EndoMatrix { moduli: self.moduli.clone(), rows }
    }

    pub fn pow(&self, mut e: u64) -> EndoMatrix {
        let mut acc = EndoMatrix::identity(&self.moduli);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&b);
            }
            b = b.compose(&b);
            e >>= 1;
        }
        acc
    }

    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        (0..self.dim())
            .map(|i| {
                let mi = self.moduli[i] as u128;
                let mut acc: u128 = 0;
                for (j, &xj) in x.iter().enumerate() {
                    acc = (acc + self.rows[i][j] as u128 * xj as u128) % mi;
                }
                acc as u64
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == EndoMatrix::identity(&self.moduli)
    }

    /// Multiplicative order, or `None` when the matrix is not invertible.
    pub fn order(&self) -> Result<Option<u64>> {
        let mut seen = HashSet::new();
        let mut p = self.clone();
        for k in 1..=ORDER_CAP as u64 {
            if p.is_identity() {
                return Ok(Some(k));
            }
            if !seen.insert(p.rows.clone()) {
                return Ok(None);
            }
            p = p.compose(self);
        }
        Err(Error::Budget(format!("matrix order exceeds {ORDER_CAP}")))
    }
}

/// Power of a matrix by a monoid element of ℕ or ℤ.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EndoPower {
    monoid: MonoidCtx,
    matrix: EndoMatrix,
    /// Order of the matrix when it is invertible (always set over ℤ).
    order: Option<u64>,
}

impl EndoPower {
    pub fn new(monoid: MonoidCtx, matrix: EndoMatrix) -> Result<Self> {
        let order = match monoid.family() {
            Family::IntAdd => match matrix.order()? {
                Some(o) => Some(o),
                None => {
                    return Err(Error::Invalid(
                        "matrix is not invertible over the target, cannot act by Z".into(),
                    ))
                }
            },
            Family::NatAdd => matrix.order().ok().flatten(),
            _ => return Err(Error::Invalid("matrix powers are defined for N or Z only".into())),
        };
        Ok(EndoPower { monoid, matrix, order })
    }

    pub fn matrix(&self) -> &EndoMatrix {
        &self.matrix
    }

    pub fn monoid(&self) -> &MonoidCtx {
        &self.monoid
    }

    /// The matrix `α(n)`.
    pub fn power(&self, n: &BigInt) -> Result<EndoMatrix> {
        let e = match self.order {
            Some(o) => n.mod_floor(&BigInt::from(o)).to_u64().unwrap(),
            None => {
                if n.is_negative() {
                    return Err(Error::ContextMismatch(format!("{n} is not in N")));
                }
                n.to_u64().ok_or_else(|| Error::Invalid(format!("exponent {n} too large")))?
            }
        };
        Ok(self.matrix.pow(e))
    }
}

/// An action `α` of a monoid on an abelian target by endomorphisms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ActionSpec {
    /// `e_t ↦ e_{s·t}` on ⊕_S fiber.
    Shift { target: AbelianTarget },
    EndoPower { power: EndoPower, target: AbelianTarget },
    Trivial { monoid: MonoidCtx, target: AbelianTarget },
    /// Restriction of `inner` to an invariant subgroup, same coordinates.
    Restricted { inner: Box<ActionSpec>, target: AbelianTarget },
    /// Induced action on a quotient by an invariant subgroup.
    Quotient { inner: Box<ActionSpec>, target: AbelianTarget },
}

impl fmt::Display for ActionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionSpec::Shift { target } => write!(f, "shift on {target}"),
            ActionSpec::EndoPower { power, target } => {
                write!(f, "powers of {:?} over {} on {target}", power.matrix.rows, power.monoid)
            }
            ActionSpec::Trivial { monoid, target } => write!(f, "trivial action of {monoid} on {target}"),
            ActionSpec::Restricted { inner, target } => write!(f, "({inner}) restricted to {target}"),
            ActionSpec::Quotient { inner, target } => write!(f, "({inner}) on {target}"),
        }
    }
}

impl ActionSpec {
    pub fn shift(index: MonoidCtx, fiber: &[u64]) -> Result<Self> {
        Ok(ActionSpec::Shift { target: AbelianTarget::fin_support(index, fiber)? })
    }

    pub fn endo_power(monoid: MonoidCtx, moduli: &[u64], matrix: &[Vec<i64>]) -> Result<Self> {
        let m = EndoMatrix::new(moduli, matrix)?;
        Ok(ActionSpec::EndoPower {
            power: EndoPower::new(monoid, m)?,
            target: AbelianTarget::finite(moduli)?,
        })
    }

    pub fn trivial(monoid: MonoidCtx, target: AbelianTarget) -> Self {
        ActionSpec::Trivial { monoid, target }
    }

    pub fn monoid(&self) -> &MonoidCtx {
        match self {
            ActionSpec::Shift { target } => match target {
                AbelianTarget::FinSupport { index, .. } => index,
                _ => unreachable!("shift target is always finitely supported"),
            },
            ActionSpec::EndoPower { power, .. } => &power.monoid,
            ActionSpec::Trivial { monoid, .. } => monoid,
            ActionSpec::Restricted { inner, .. } | ActionSpec::Quotient { inner, .. } => inner.monoid(),
        }
    }

    pub fn target(&self) -> &AbelianTarget {
        match self {
            ActionSpec::Shift { target }
            | ActionSpec::EndoPower { target, .. }
            | ActionSpec::Trivial { target, .. }
            | ActionSpec::Restricted { target, .. }
            | ActionSpec::Quotient { target, .. } => target,
        }
    }

    /// `α(s)(x)`.
    pub fn apply(&self, s: &Element, x: &TargetElem) -> Result<TargetElem> {
        self.monoid().check(s)?;
        self.target().check(x)?;
        self.apply_unchecked(s, x)
    }

    pub(crate) fn apply_unchecked(&self, s: &Element, x: &TargetElem) -> Result<TargetElem> {
        match self {
            ActionSpec::Shift { target } => {
                let AbelianTarget::FinSupport { index, .. } = target else { unreachable!() };
                let TargetElem::Sparse(map) = x else {
                    return Err(Error::ContextMismatch("shift acts on sparse elements".into()));
                };
                let out: BTreeMap<Element, Vec<u64>> =
                    map.iter().map(|(t, v)| (index.mul_unchecked(s, t), v.clone())).collect();
                Ok(TargetElem::Sparse(out))
            }
            ActionSpec::EndoPower { power, .. } => {
                let TargetElem::Dense(v) = x else {
                    return Err(Error::ContextMismatch("matrix acts on dense elements".into()));
                };
                let n = s.as_int().ok_or_else(|| Error::ContextMismatch(format!("{s} is not an integer")))?;
                if n.is_zero() {
                    return Ok(x.clone());
                }
                Ok(TargetElem::Dense(power.power(n)?.apply(v)))
            }
            ActionSpec::Trivial { .. } => Ok(x.clone()),
            ActionSpec::Restricted { inner, .. } => inner.apply_unchecked(s, x),
            ActionSpec::Quotient { inner, target } => Ok(target.normalize(inner.apply_unchecked(s, x)?)),
        }
    }

    /// `α(s)` applied to every element of `xs`; for matrix actions the power
    /// is computed once.
    pub fn apply_all(&self, s: &Element, xs: &[TargetElem]) -> Result<Vec<TargetElem>> {
        self.monoid().check(s)?;
        if let ActionSpec::EndoPower { power, .. } = self {
            let n = s.as_int().unwrap();
            let p = power.power(n)?;
            return xs
                .iter()
                .map(|x| match x {
                    TargetElem::Dense(v) => Ok(TargetElem::Dense(p.apply(v))),
                    _ => Err(Error::ContextMismatch("matrix acts on dense elements".into())),
                })
                .collect();
        }
        xs.iter().map(|x| self.apply_unchecked(s, x)).collect()
    }
}
