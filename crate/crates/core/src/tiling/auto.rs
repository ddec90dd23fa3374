use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use super::cert::{compose_prog_certs, find_monotile_cover_with, progression_cover, ProgTileCert, TileCert};
use super::sequence::LevelTiling;
use crate::algebra::json::{element_to_json, rational_to_string};
use crate::algebra::{Element, Family, MonoidCtx};
use crate::error::{Error, Result};
use crate::finset::FinSubset;
use crate::folner::FolnerSeq;

/// Concretely evaluable automorphisms of the groups we handle.
#[derive(Clone, Debug, PartialEq)]
pub enum Automorphism {
    Identity,
    /// `x ↦ qx` on ℚ.
    Scale(BigRational),
    /// `x ↦ g x g⁻¹`.
    Conjugation(Element),
    /// An integer matrix acting on column vectors of ℤ^d.
    Linear(Vec<Vec<i64>>),
}

impl Automorphism {
    pub fn name(&self) -> String {
        match self {
            Automorphism::Identity => "id".into(),
            Automorphism::Scale(q) => format!("scale {}", rational_to_string(q)),
            Automorphism::Conjugation(g) => format!("conj {g}"),
            Automorphism::Linear(m) => format!("linear {m:?}"),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Automorphism::Identity => json!({"kind": "identity"}),
            Automorphism::Scale(q) => json!({"kind": "scale", "q": rational_to_string(q)}),
            Automorphism::Conjugation(g) => json!({"kind": "conjugation", "g": element_to_json(g)}),
            Automorphism::Linear(m) => json!({"kind": "linear", "matrix": m}),
        }
    }

    pub fn apply(&self, ctx: &MonoidCtx, x: &Element) -> Result<Element> {
        match self {
            Automorphism::Identity => Ok(x.clone()),
            Automorphism::Scale(q) => match (ctx.family(), x) {
                (Family::RationalAdd, Element::Rational(r)) if !q.is_zero() => Ok(Element::Rational(r * q)),
                _ => Err(Error::Unsupported(format!("scaling acts on ℚ, not {ctx}"))),
            },
            Automorphism::Conjugation(g) => ctx.conjugate(g, x),
            Automorphism::Linear(m) => match x {
                Element::Vector(v) if m.len() == v.len() && m.iter().all(|r| r.len() == v.len()) => {
                    let out: Vec<BigInt> = m
                        .iter()
                        .map(|row| row.iter().zip(v).map(|(a, b)| BigInt::from(*a) * b).sum())
                        .collect();
                    ctx.canonicalize(Element::Vector(out))
                }
                _ => Err(Error::Unsupported(format!("matrix {m:?} does not act on {x}"))),
            },
        }
    }

    fn scale_factor(&self) -> Option<BigRational> {
        match self {
            Automorphism::Identity => Some(BigRational::one()),
            Automorphism::Scale(q) => Some(q.clone()),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AutoRow {
    pub automorphism: String,
    pub n: usize,
    /// `φ(F_n)` tiles `F_{n+1}` via this certificate, or no tiling exists.
    pub cert: Option<LevelTiling>,
}

/// For each `φ` and `n < depth`, decides whether `φ(F_n)` tiles `F_{n+1}`.
pub fn automorphism_monotile_check(
    seq: &FolnerSeq,
    autos: &[Automorphism],
    depth: usize,
    budget: u64,
) -> Result<Vec<AutoRow>> {
    let ctx = seq.ctx();
    let mut rows = Vec::new();
    for phi in autos {
        for n in 0..depth {
            let cert = match (phi.scale_factor(), seq.progression(n), seq.progression(n + 1)) {
                (Some(q), Some(t), Some(v)) => progression_cover(&t.scale(&q)?, &v).map(LevelTiling::Progression),
                _ => {
                    let f = seq.gen(n)?;
                    let t = FinSubset::from_unsorted(
                        ctx,
                        f.iter().map(|x| phi.apply(ctx, x)).collect::<Result<Vec<_>>>()?,
                    );
                    let v = seq.gen(n + 1)?;
                    find_monotile_cover_with(&t, &v, None, budget)?.map(LevelTiling::Finite)
                }
            };
            rows.push(AutoRow { automorphism: phi.name(), n, cert });
        }
    }
    Ok(rows)
}

/// The translate set `Ē^±_{n+1}` for `φ_q(E_n)` inside `E_{n+1}` where
/// `E_n = ⟨1/(|a|ⁿbⁿn!)⟩ ∩ [0, 2ⁿ|a|ⁿbⁿ)` and `q = a/b`.
pub fn phi_q_translates(q: &BigRational, n: usize) -> Result<Vec<BigRational>> {
    if q.is_zero() {
        return Err(Error::Invalid("q must be non-zero".into()));
    }
    let a = q.numer().abs();
    let b = q.denom().clone();
    let nn = n as u32;
    let fact = |k: usize| (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i));
    let big = |x: BigInt| BigRational::from_integer(x);
    // 2ⁿ|a|ⁿ⁺¹bⁿ⁻¹, kept rational because b^{−1} appears at n = 0
    let period = big(BigInt::from(2).pow(nn) * a.pow(nn + 1) * b.pow(nn)) / big(b.clone());
    let delta = BigRational::new(BigInt::one(), a.pow(nn + 1) * b.pow(nn + 1) * fact(n + 1));
    let ni = (&a * &a * BigInt::from(n + 1)).to_u64().ok_or_else(|| Error::Budget("too many translates".into()))?;
    let nj = (BigInt::from(2) * &b * &b).to_u64().ok_or_else(|| Error::Budget("too many translates".into()))?;
    let mut out = Vec::with_capacity((ni * nj) as usize);
    let shift = if q.is_negative() {
        // Ē⁻ = 2ⁿ|a|ⁿ⁺¹bⁿ⁻¹ − 1/(|a|ⁿ⁻¹bⁿ⁺¹n!) + Ē⁺
        let small = big(a.clone()) / big(a.pow(nn) * b.pow(nn + 1) * fact(n));
        &period - small
    } else {
        BigRational::zero()
    };
    for j in 0..nj {
        for i in 0..ni {
            out.push(&shift + &period * BigInt::from(j) + &delta * BigInt::from(i));
        }
    }
    out.sort();
    Ok(out)
}

/// `φ_q(E_n)` tiles `E_{n+1}` via the explicit set `Ē^±_{n+1}`.
pub fn phi_q_level_cert(seq: &FolnerSeq, q: &BigRational, n: usize) -> Result<ProgTileCert> {
    let (t, v) = match (seq.progression(n), seq.progression(n + 1)) {
        (Some(t), Some(v)) => (t, v),
        _ => return Err(Error::Unsupported("sequence has no symbolic rational levels".into())),
    };
    let cert = ProgTileCert { v, t: t.scale(q)?, c: phi_q_translates(q, n)? };
    cert.verify()?;
    Ok(cert)
}

/// For a word `f = f_{i_s}⋯f_{i_1}` in the automorphisms `gens` (indices into
/// `gens`, rightmost applied first), a certificate that `φ(f)(E_n)` tiles
/// `E_{n+s}`, assembled by composing one-letter level certificates.
pub fn word_monotile_cert(seq: &FolnerSeq, gens: &[Automorphism], word: &[usize], n: usize) -> Result<WordCert> {
    if word.is_empty() {
        return Err(Error::Invalid("empty word: use the identity level certificate".into()));
    }
    let ctx = seq.ctx();
    let symbolic = gens.iter().all(|g| g.scale_factor().is_some()) && seq.progression(n).is_some();
    if symbolic {
        let mut acc: Option<(ProgTileCert, BigRational)> = None;
        for (step, &i) in word.iter().rev().enumerate() {
            let q = gens.get(i).and_then(Automorphism::scale_factor).ok_or_else(|| Error::Invalid("bad letter".into()))?;
            let level = n + step;
            let t = seq.progression(level).ok_or_else(|| Error::Budget(format!("no level {level}")))?;
            let v = seq.progression(level + 1).ok_or_else(|| Error::Budget(format!("no level {}", level + 1)))?;
            let b = progression_cover(&t.scale(&q)?, &v)
                .ok_or_else(|| Error::Refuted(format!("letter {i} fails at level {level}")))?;
            acc = Some(match acc {
                None => (b, q),
                Some((a, total)) => (compose_prog_certs(&a, &q, &b)?, total * q),
            });
        }
        return Ok(WordCert::Progression(acc.unwrap().0));
    }
    let mut acc: Option<TileCert> = None;
    let mut image = (*seq.gen(n)?).clone();
    for (step, &i) in word.iter().rev().enumerate() {
        let phi = gens.get(i).ok_or_else(|| Error::Invalid("bad letter".into()))?;
        let level = n + step;
        let e_level = seq.gen(level)?;
        let t = FinSubset::from_unsorted(ctx, e_level.iter().map(|x| phi.apply(ctx, x)).collect::<Result<Vec<_>>>()?);
        let v = seq.gen(level + 1)?;
        let b = find_monotile_cover_with(&t, &v, None, super::cert::DEFAULT_TILE_BUDGET)?
            .ok_or_else(|| Error::Refuted(format!("letter {i} fails at level {level}")))?;
        image = FinSubset::from_unsorted(ctx, image.iter().map(|x| phi.apply(ctx, x)).collect::<Result<Vec<_>>>()?);
        acc = Some(match acc {
            None => b,
            Some(a) => {
                // E'' = E'·φ_i(Ẽ)
                let mut c = Vec::new();
                for e1 in b.c.iter() {
                    for e2 in a.c.iter() {
                        c.push(ctx.mul(e1, &phi.apply(ctx, e2)?)?);
                    }
                }
                let cert = TileCert { v: v.as_ref().clone(), t: image.clone(), c: FinSubset::from_unsorted(ctx, c) };
                cert.verify()?;
                cert
            }
        });
    }
    Ok(WordCert::Finite(acc.unwrap()))
}

#[derive(Clone, Debug, PartialEq)]
pub enum WordCert {
    Finite(TileCert),
    Progression(ProgTileCert),
}

impl WordCert {
    pub fn verify(&self) -> Result<()> {
        match self {
            WordCert::Finite(c) => c.verify(),
            WordCert::Progression(c) => c.verify(),
        }
    }

    pub fn translate_count(&self) -> usize {
        match self {
            WordCert::Finite(c) => c.c.len(),
            WordCert::Progression(c) => c.c.len(),
        }
    }
}

