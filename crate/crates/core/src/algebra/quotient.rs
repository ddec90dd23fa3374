use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::element::Element;
use super::monoid::{Family, MonoidCtx};
use crate::error::{Error, Result};

/// The supported short exact sequences `1 → H →ι G →π K → 1`, each with a
/// fixed section `σ: K → G`, `σ(1) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum QuotientSpec {
    /// ℤ^d → ℤ^{d−1} (ℤ when d = 2), kernel the last coordinate.
    DropLastCoord { dim: usize },
    /// ℚ⋊_qℤ → ℤ, `(x, n) ↦ n`, kernel ℚ.
    SecondCoord { q: BigRational },
    /// Heisenberg → ℤ², kernel the center.
    CenterQuotient,
    /// ℤ → ℤ/n, kernel nℤ ≅ ℤ.
    ModN { n: u64 },
    /// ∏ℤ/m_i → ∏ℤ/d_i with kernel ∏ d_iℤ/m_i ≅ ∏ℤ/(m_i/d_i).
    ByFinite { moduli: Vec<u64>, divisors: Vec<u64> },
    /// ℤ⋊ℤ/2 → ℤ/2, kernel the translations.
    DihedralParity,
}

fn nontrivial(m: impl Iterator<Item = u64>) -> Vec<u64> {
    m.filter(|&x| x > 1).collect()
}

impl QuotientSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            QuotientSpec::DropLastCoord { dim } if *dim < 2 => {
                Err(Error::Invalid("dropping a coordinate needs dimension >= 2".into()))
            }
            QuotientSpec::SecondCoord { q } if q.is_zero() => Err(Error::Invalid("q must be nonzero".into())),
            QuotientSpec::ModN { n } if *n == 0 => Err(Error::Invalid("n must be positive".into())),
            QuotientSpec::ByFinite { moduli, divisors } => {
                if moduli.len() != divisors.len()
                    || moduli.iter().zip(divisors).any(|(m, d)| *m < 2 || *d == 0 || m % d != 0)
                {
                    return Err(Error::Invalid("each divisor must divide its modulus".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn group(&self) -> MonoidCtx {
        match self {
            QuotientSpec::DropLastCoord { dim } => MonoidCtx::int_vec(*dim).unwrap(),
            QuotientSpec::SecondCoord { q } => MonoidCtx::semidirect(q.clone()).unwrap(),
            QuotientSpec::CenterQuotient => MonoidCtx::heisenberg(),
            QuotientSpec::ModN { .. } => MonoidCtx::int(),
            QuotientSpec::ByFinite { moduli, .. } => MonoidCtx::cyclic(moduli).unwrap(),
            QuotientSpec::DihedralParity => MonoidCtx::infinite_dihedral(),
        }
    }

    pub fn quotient(&self) -> MonoidCtx {
        match self {
            QuotientSpec::DropLastCoord { dim: 2 } => MonoidCtx::int(),
            QuotientSpec::DropLastCoord { dim } => MonoidCtx::int_vec(dim - 1).unwrap(),
            QuotientSpec::SecondCoord { .. } => MonoidCtx::int(),
            QuotientSpec::CenterQuotient => MonoidCtx::int_vec(2).unwrap(),
            QuotientSpec::ModN { n } => MonoidCtx::cyclic(&nontrivial([*n].into_iter())).unwrap(),
            QuotientSpec::ByFinite { divisors, .. } => {
                MonoidCtx::cyclic(&nontrivial(divisors.iter().copied())).unwrap()
            }
            QuotientSpec::DihedralParity => MonoidCtx::cyclic(&[2]).unwrap(),
        }
    }

    pub fn kernel(&self) -> MonoidCtx {
        match self {
            QuotientSpec::SecondCoord { .. } => MonoidCtx::rational(),
            QuotientSpec::ByFinite { moduli, divisors } => {
                MonoidCtx::cyclic(&nontrivial(moduli.iter().zip(divisors).map(|(m, d)| m / d))).unwrap()
            }
            _ => MonoidCtx::int(),
        }
    }

    pub fn is_finite_index(&self) -> bool {
        self.quotient().is_finite()
    }

    /// π.
    pub fn project(&self, g: &Element) -> Result<Element> {
        self.group().check(g)?;
        Ok(match (self, g) {
            (QuotientSpec::DropLastCoord { dim: 2 }, Element::Vector(v)) => Element::Int(v[0].clone()),
            (QuotientSpec::DropLastCoord { dim }, Element::Vector(v)) => Element::Vector(v[..dim - 1].to_vec()),
            (QuotientSpec::SecondCoord { .. }, Element::SemiRat(_, n)) => Element::Int(n.clone()),
            (QuotientSpec::CenterQuotient, Element::Heis(a, b, _)) => Element::Vector(vec![a.clone(), b.clone()]),
            (QuotientSpec::ModN { n }, Element::Int(x)) => {
                if *n == 1 {
                    Element::Residues(vec![])
                } else {
                    Element::Residues(vec![x.mod_floor(&BigInt::from(*n)).to_u64().unwrap()])
                }
            }
            (QuotientSpec::ByFinite { divisors, .. }, Element::Residues(r)) => Element::Residues(
                r.iter().zip(divisors).filter(|(_, d)| **d > 1).map(|(x, d)| x % d).collect(),
            ),
            (QuotientSpec::DihedralParity, Element::Dihedral(_, e)) => Element::Residues(vec![*e as u64]),
            _ => unreachable!("membership checked above"),
        })
    }

    /// σ.
    pub fn section(&self, k: &Element) -> Result<Element> {
        self.quotient().check(k)?;
        let zero = BigInt::zero;
        Ok(match (self, k) {
            (QuotientSpec::DropLastCoord { dim: 2 }, Element::Int(x)) => Element::Vector(vec![x.clone(), zero()]),
            (QuotientSpec::DropLastCoord { .. }, Element::Vector(v)) => {
                let mut w = v.clone();
                w.push(zero());
                Element::Vector(w)
            }
            (QuotientSpec::SecondCoord { .. }, Element::Int(n)) => Element::SemiRat(BigRational::zero(), n.clone()),
            (QuotientSpec::CenterQuotient, Element::Vector(v)) => Element::Heis(v[0].clone(), v[1].clone(), zero()),
            (QuotientSpec::ModN { .. }, Element::Residues(r)) => {
                Element::Int(BigInt::from(r.first().copied().unwrap_or(0)))
            }
            (QuotientSpec::ByFinite { moduli, divisors }, Element::Residues(r)) => {
                let mut it = r.iter();
                Element::Residues(
                    divisors
                        .iter()
                        .map(|&d| if d > 1 { *it.next().unwrap() } else { 0 })
                        .zip(moduli)
                        .map(|(x, m)| x % m)
                        .collect(),
                )
            }
            (QuotientSpec::DihedralParity, Element::Residues(r)) => Element::Dihedral(zero(), r[0] as u8),
            _ => unreachable!("membership checked above"),
        })
    }

    /// ι: H → G.
    pub fn embed(&self, h: &Element) -> Result<Element> {
        self.kernel().check(h)?;
        let zero = BigInt::zero;
        Ok(match (self, h) {
            (QuotientSpec::DropLastCoord { dim }, Element::Int(x)) => {
                let mut v = vec![zero(); *dim];
                v[dim - 1] = x.clone();
                Element::Vector(v)
            }
            (QuotientSpec::SecondCoord { .. }, Element::Rational(x)) => Element::SemiRat(x.clone(), zero()),
            (QuotientSpec::CenterQuotient, Element::Int(c)) => Element::Heis(zero(), zero(), c.clone()),
            (QuotientSpec::ModN { n }, Element::Int(x)) => Element::Int(x * BigInt::from(*n)),
            (QuotientSpec::ByFinite { moduli, divisors }, Element::Residues(r)) => {
                let mut it = r.iter();
                Element::Residues(
                    moduli
                        .iter()
                        .zip(divisors)
                        .map(|(&m, &d)| if m / d > 1 { d * *it.next().unwrap() } else { 0 })
                        .collect(),
                )
            }
            (QuotientSpec::DihedralParity, Element::Int(x)) => Element::Dihedral(x.clone(), 0),
            _ => unreachable!("membership checked above"),
        })
    }

    /// ι⁻¹ on the kernel; `None` when `g ∉ ι(H)`.
    pub fn kernel_preimage(&self, g: &Element) -> Result<Option<Element>> {
        self.group().check(g)?;
        Ok(match (self, g) {
            (QuotientSpec::DropLastCoord { dim }, Element::Vector(v)) => {
                v[..dim - 1].iter().all(|x| x.is_zero()).then(|| Element::Int(v[dim - 1].clone()))
            }
            (QuotientSpec::SecondCoord { .. }, Element::SemiRat(x, n)) => {
                n.is_zero().then(|| Element::Rational(x.clone()))
            }
            (QuotientSpec::CenterQuotient, Element::Heis(a, b, c)) => {
                (a.is_zero() && b.is_zero()).then(|| Element::Int(c.clone()))
            }
            (QuotientSpec::ModN { n }, Element::Int(x)) => {
                let n = BigInt::from(*n);
                (x % &n).is_zero().then(|| Element::Int(x / &n))
            }
            (QuotientSpec::ByFinite { moduli, divisors }, Element::Residues(r)) => {
                if r.iter().zip(divisors).all(|(x, d)| x % d == 0) {
                    Some(Element::Residues(
                        r.iter()
                            .zip(moduli.iter().zip(divisors))
                            .filter(|(_, (m, d))| *m / *d > 1)
                            .map(|(x, (_, d))| x / d)
                            .collect(),
                    ))
                } else {
                    None
                }
            }
            (QuotientSpec::DihedralParity, Element::Dihedral(x, e)) => {
                (*e == 0).then(|| Element::Int(x.clone()))
            }
            _ => unreachable!("membership checked above"),
        })
    }

    pub fn name(&self) -> String {
        match self {
            QuotientSpec::DropLastCoord { dim } => format!("drop_last_coord(d={dim})"),
            QuotientSpec::SecondCoord { q } => format!("second_coord(q={})", super::element::fmt_rational(q)),
            QuotientSpec::CenterQuotient => "center_quotient".into(),
            QuotientSpec::ModN { n } => format!("mod_n(n={n})"),
            QuotientSpec::ByFinite { moduli, divisors } => format!("by_finite({moduli:?}/{divisors:?})"),
            QuotientSpec::DihedralParity => "dihedral_parity".into(),
        }
    }

    /// True when `G` is one of the families this spec accepts.
    pub fn matches_group(&self, ctx: &MonoidCtx) -> bool {
        match (self, ctx.family()) {
            (QuotientSpec::DropLastCoord { dim }, Family::IntVecAdd(d)) => d == dim,
            _ => self.group() == *ctx,
        }
    }
}
