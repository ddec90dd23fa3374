use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A monoid element in canonical form.
///
/// The variant is the family tag; which variant a context accepts is decided by
/// [`MonoidCtx::contains`](super::MonoidCtx::contains). Derived `Ord` is the
/// lexicographic order on the canonical payload and is what every downstream
/// canonicalization sorts by.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Int(BigInt),
    Vector(Vec<BigInt>),
    /// Residues, each already reduced modulo its modulus.
    Residues(Vec<u64>),
    Rational(BigRational),
    /// `(x, n)` in ℚ⋊ℤ.
    SemiRat(BigRational, BigInt),
    /// `(a, b, c)`: upper entries (1,2), (2,3), (1,3) of a unitriangular matrix.
    Heis(BigInt, BigInt, BigInt),
    /// Finitely supported index -> fiber residues; zero fibers are never stored.
    Sparse(BTreeMap<u64, Vec<u64>>),
    /// `(x, e)` in ℤ⋊ℤ/2 with `e ∈ {0, 1}`.
    Dihedral(BigInt, u8),
}

impl Element {
    pub fn int(v: i64) -> Self {
        Element::Int(BigInt::from(v))
    }

    pub fn vector(v: &[i64]) -> Self {
        Element::Vector(v.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn residues(v: &[u64]) -> Self {
        Element::Residues(v.to_vec())
    }

    pub fn rational(p: i64, q: i64) -> Self {
        Element::Rational(BigRational::new(p.into(), q.into()))
    }

    pub fn semi(p: i64, q: i64, n: i64) -> Self {
        Element::SemiRat(BigRational::new(p.into(), q.into()), n.into())
    }

    pub fn heis(a: i64, b: i64, c: i64) -> Self {
        Element::Heis(a.into(), b.into(), c.into())
    }

    pub fn dihedral(x: i64, e: u8) -> Self {
        Element::Dihedral(x.into(), e & 1)
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Element::Int(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        use num_traits::ToPrimitive;
        self.as_int().and_then(|v| v.to_i64())
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Element::Rational(v) => Some(v),
            _ => None,
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Element::Int(_) => "integer",
            Element::Vector(_) => "vector",
            Element::Residues(_) => "residues",
            Element::Rational(_) => "rational",
            Element::SemiRat(..) => "semidirect pair",
            Element::Heis(..) => "heisenberg triple",
            Element::Sparse(_) => "sparse map",
            Element::Dihedral(..) => "dihedral pair",
        }
    }
}

pub(crate) fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Int(v) => write!(f, "{v}"),
            Element::Vector(v) => write!(f, "({})", join(v)),
            Element::Residues(v) => write!(f, "({})", join(v)),
            Element::Rational(r) => write!(f, "{}", fmt_rational(r)),
            Element::SemiRat(x, n) => write!(f, "({}, {n})", fmt_rational(x)),
            Element::Heis(a, b, c) => write!(f, "[{a}, {b}, {c}]"),
            Element::Sparse(m) => {
                if m.is_empty() {
                    return write!(f, "0");
                }
                let parts: Vec<String> =
                    m.iter().map(|(k, v)| format!("{k}:({})", join(v))).collect();
                write!(f, "{{{}}}", parts.join(", "))
            }
            Element::Dihedral(x, e) => {
                if *e == 0 {
                    write!(f, "({x}, 1)")
                } else {
                    write!(f, "({x}, s)")
                }
            }
        }
    }
}

/// `q^n` for a nonzero rational and a signed exponent that fits in `i32`.
pub(crate) fn rat_pow(q: &BigRational, n: &BigInt) -> Option<BigRational> {
    use num_traits::ToPrimitive;
    let e = n.to_i32()?;
    if q.is_zero() {
        return None;
    }
    let base = if e < 0 { q.recip() } else { q.clone() };
    let mut acc = BigRational::one();
    let mut b = base;
    let mut k = e.unsigned_abs();
    while k > 0 {
        if k & 1 == 1 {
            acc *= &b;
        }
        b = &b * &b;
        k >>= 1;
    }
    Some(acc)
}

pub(crate) fn is_nonneg(v: &BigInt) -> bool {
    !v.is_negative()
}
