use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use super::aseq::{ASeqTerms, ASequence, ASEQ_CHECK_BOUND};
use super::progression::RatProgression;
use super::seq::{Flags, FolnerSeq, Provenance};
use crate::algebra::json::{int_from_json, moduli_from_json, rational_from_json, u64_from_json};
use crate::algebra::{fmt_rational, Element, Family, MonoidCtx};
use crate::error::{Error, Result};
use crate::finset::FinSubset;

/// Parameters of every named sequence construction.
#[derive(Clone, Debug, PartialEq)]
pub enum BuilderSpec {
    /// `F_n = [0, a_n − 1]` on ℕ, or on ℤ when `on_integers`.
    Interval { a: ASequence, on_integers: bool },
    /// ℤ: `F_0 = {0}`, `F_n = [−2^{n−1}+1, 2^{n−1}]`.
    SymmetricDyadic,
    /// ℤ^d: `F_n = [0, 2^n)^d`.
    Box { dim: usize },
    /// ℚ: `F_n = ⟨1/a_n⟩ ∩ [0, c_n)`.
    Rational { a: ASequence, c: ASequence },
    /// ℚ: `E_n = ⟨1/(|a|^n b^n n!)⟩ ∩ [0, 2^n |a|^n b^n)` for `q = a/b`.
    PhiQ { q: BigRational },
    /// Punctured quadrant: `F_0 = {(0,0)}`, `F_n = [2^{n−1}, 2^n)²`.
    Punctured,
    /// `F_n = ⊕_{i=1}^n F_{i,n}`, summand `i` using part `(i−1) mod len`.
    DirectSum { parts: Vec<BuilderSpec> },
    /// ⊕ of finite fibers, `F_n` the elements supported on the first `n` indices.
    LocallyFinite { fibers: Vec<Vec<u64>> },
    /// A finite group: `F_0 = {1}`, `F_n = G` for `n ≥ 1`.
    FiniteGroup { moduli: Vec<u64> },
}

fn pow2(n: usize) -> BigUint {
    BigUint::one() << n
}

fn to_i64(v: &BigUint, what: &str) -> Result<i64> {
    v.to_i64().ok_or_else(|| Error::Budget(format!("{what} = {v} is too large to enumerate")))
}

impl BuilderSpec {
    pub fn name(&self) -> &'static str {
        match self {
            BuilderSpec::Interval { .. } => "interval",
            BuilderSpec::SymmetricDyadic => "symmetric_dyadic",
            BuilderSpec::Box { .. } => "box",
            BuilderSpec::Rational { .. } => "rational",
            BuilderSpec::PhiQ { .. } => "phi_q",
            BuilderSpec::Punctured => "punctured",
            BuilderSpec::DirectSum { .. } => "direct_sum",
            BuilderSpec::LocallyFinite { .. } => "locally_finite",
            BuilderSpec::FiniteGroup { .. } => "finite_group",
        }
    }

    pub fn ctx(&self) -> Result<MonoidCtx> {
        Ok(match self {
            BuilderSpec::Interval { on_integers: false, .. } => MonoidCtx::nat(),
            BuilderSpec::Interval { on_integers: true, .. } | BuilderSpec::SymmetricDyadic => MonoidCtx::int(),
            BuilderSpec::Box { dim } => MonoidCtx::int_vec(*dim)?,
            BuilderSpec::Rational { .. } | BuilderSpec::PhiQ { .. } => MonoidCtx::rational(),
            BuilderSpec::Punctured => MonoidCtx::punctured_quadrant(),
            BuilderSpec::DirectSum { parts } => {
                let mut fibers = Vec::new();
                for p in parts {
                    match p.ctx()?.family() {
                        Family::CyclicProd(m) if !m.is_empty() => fibers.push(m.clone()),
                        _ => {
                            return Err(Error::Invalid(
                                "direct_sum parts must be sequences of non-trivial finite groups".into(),
                            ))
                        }
                    }
                }
                MonoidCtx::direct_sum(fibers)?
            }
            BuilderSpec::LocallyFinite { fibers } => MonoidCtx::direct_sum(fibers.clone())?,
            BuilderSpec::FiniteGroup { moduli } => MonoidCtx::cyclic(moduli)?,
        })
    }

    pub fn to_json(&self) -> Value {
        match self {
            BuilderSpec::Interval { a, on_integers } => json!({
                "builder": "interval", "a": aseq_to_json(a),
                "monoid": if *on_integers { "int" } else { "nat" }
            }),
            BuilderSpec::SymmetricDyadic => json!({"builder": "symmetric_dyadic"}),
            BuilderSpec::Box { dim } => json!({"builder": "box", "dim": dim}),
            BuilderSpec::Rational { a, c } => {
                json!({"builder": "rational", "a": aseq_to_json(a), "c": aseq_to_json(c)})
            }
            BuilderSpec::PhiQ { q } => json!({"builder": "phi_q", "q": fmt_rational(q)}),
            BuilderSpec::Punctured => json!({"builder": "punctured"}),
            BuilderSpec::DirectSum { parts } => {
                json!({"builder": "direct_sum", "parts": parts.iter().map(|p| p.to_json()).collect::<Vec<_>>()})
            }
            BuilderSpec::LocallyFinite { fibers } => json!({"builder": "locally_finite", "fibers": fibers}),
            BuilderSpec::FiniteGroup { moduli } => json!({"builder": "finite_group", "moduli": moduli}),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let name = v
            .get("builder")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Invalid("sequence needs a \"builder\" field".into()))?;
        let field = |k: &str| v.get(k).ok_or_else(|| Error::Invalid(format!("{name} needs field {k:?}")));
        Ok(match name {
            "interval" => BuilderSpec::Interval {
                a: aseq_from_json(field("a")?)?,
                on_integers: match v.get("monoid").and_then(Value::as_str).unwrap_or("nat") {
                    "nat" => false,
                    "int" => true,
                    other => return Err(Error::Invalid(format!("interval builder on unknown monoid {other:?}"))),
                },
            },
            "symmetric_dyadic" => BuilderSpec::SymmetricDyadic,
            "box" => BuilderSpec::Box { dim: u64_from_json(field("dim")?)? as usize },
            "rational" => BuilderSpec::Rational { a: aseq_from_json(field("a")?)?, c: aseq_from_json(field("c")?)? },
            "phi_q" => BuilderSpec::PhiQ { q: rational_from_json(field("q")?)? },
            "punctured" => BuilderSpec::Punctured,
            "direct_sum" => BuilderSpec::DirectSum {
                parts: field("parts")?
                    .as_array()
                    .ok_or_else(|| Error::Invalid("parts must be an array".into()))?
                    .iter()
                    .map(BuilderSpec::from_json)
                    .collect::<Result<_>>()?,
            },
            "locally_finite" => BuilderSpec::LocallyFinite {
                fibers: field("fibers")?
                    .as_array()
                    .ok_or_else(|| Error::Invalid("fibers must be an array".into()))?
                    .iter()
                    .map(moduli_from_json)
                    .collect::<Result<_>>()?,
            },
            "finite_group" => BuilderSpec::FiniteGroup { moduli: moduli_from_json(field("moduli")?)? },
            other => return Err(Error::Invalid(format!("unknown builder {other:?}"))),
        })
    }
}

pub fn aseq_to_json(a: &ASequence) -> Value {
    match &a.terms {
        ASeqTerms::Factorial { r } => json!({"kind": "factorial", "r": r}),
        ASeqTerms::Power { base } => json!({"kind": "power", "base": base}),
        ASeqTerms::Listed(t) => json!({
            "kind": "listed",
            "terms": t.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "geometric": a.geometric,
        }),
    }
}

pub fn aseq_from_json(v: &Value) -> Result<ASequence> {
    if let Some(s) = v.as_str() {
        return match s {
            "factorial" | "n!" => Ok(ASequence::factorial()),
            "dyadic" | "2^n" => Ok(ASequence::power(2)),
            other => Err(Error::Invalid(format!("unknown a-sequence {other:?}"))),
        };
    }
    if let Some(a) = v.as_array() {
        let terms = a.iter().map(|x| int_from_json(x).map(|i| i.to_biguint())).collect::<Result<Vec<_>>>()?;
        let terms = terms.into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| Error::Invalid("negative term".into()))?;
        return Ok(ASequence::listed(terms, false));
    }
    let kind = v.get("kind").and_then(Value::as_str).unwrap_or("listed");
    let num = |k: &str, d: u64| v.get(k).map(u64_from_json).transpose().map(|x| x.unwrap_or(d));
    Ok(match kind {
        "factorial" => ASequence::factorial_scaled(num("r", 1)?),
        "power" => ASequence::power(num("base", 2)?),
        "listed" => {
            let terms = v
                .get("terms")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Invalid("listed a-sequence needs \"terms\"".into()))?
                .iter()
                .map(|x| {
                    int_from_json(x)?.to_biguint().ok_or_else(|| Error::Invalid("negative term".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            ASequence::listed(terms, v.get("geometric").and_then(Value::as_bool).unwrap_or(false))
        }
        other => return Err(Error::Invalid(format!("unknown a-sequence kind {other:?}"))),
    })
}

/// Builds the named sequence, validating its parameters first.
pub fn build_folner(spec: &BuilderSpec) -> Result<FolnerSeq> {
    let ctx = spec.ctx()?;
    let prov = Provenance::new(spec.name(), spec.to_json());
    Ok(match spec {
        BuilderSpec::Interval { a, on_integers } => {
            a.validate(ASEQ_CHECK_BOUND)?;
            let a1 = a.clone();
            let a2 = a.clone();
            let c = ctx.clone();
            FolnerSeq::from_fn(&ctx, Flags::new(true, true, true, !on_integers), prov, move |n| {
                let an = to_i64(&a1.term(n)?, "a_n")?;
                Ok(FinSubset::from_sorted(&c, (0..an).map(Element::int).collect()))
            })
            .with_size(move |n| a2.term(n).ok())
        }
        BuilderSpec::SymmetricDyadic => {
            let c = ctx.clone();
            FolnerSeq::from_fn(&ctx, Flags::new(true, true, false, true), prov, move |n| {
                if n == 0 {
                    return Ok(FinSubset::identity(&c));
                }
                let h = to_i64(&pow2(n - 1), "2^(n-1)")?;
                Ok(FinSubset::from_sorted(&c, (-h + 1..=h).map(Element::int).collect()))
            })
            .with_size(|n| Some(pow2(n)))
        }
        BuilderSpec::Box { dim } => {
            let d = *dim;
            let c = ctx.clone();
            FolnerSeq::from_fn(&ctx, Flags::new(true, true, true, false), prov, move |n| {
                let side = to_i64(&pow2(n), "2^n")?;
                let mut pts: Vec<Vec<i64>> = vec![vec![]];
                for _ in 0..d {
                    pts = pts
                        .into_iter()
                        .flat_map(|p| {
                            (0..side).map(move |x| {
                                let mut q = p.clone();
                                q.push(x);
                                q
                            })
                        })
                        .collect();
                }
                Ok(FinSubset::from_sorted(&c, pts.iter().map(|p| Element::vector(p)).collect()))
            })
            .with_size(move |n| Some(pow2(n * d)))
        }
        BuilderSpec::Rational { a, c } => {
            if !a.geometric {
                return Err(Error::Invalid("rational builder needs a geometric a-sequence a".into()));
            }
            a.validate(ASEQ_CHECK_BOUND)?;
            c.validate(ASEQ_CHECK_BOUND)?;
            rational_seq(&ctx, a.clone(), c.clone(), prov)
        }
        BuilderSpec::PhiQ { q } => {
            if q.is_zero() {
                return Err(Error::Invalid("phi_q needs q != 0".into()));
            }
            let ab = (q.numer().abs() * q.denom())
                .to_u64()
                .ok_or_else(|| Error::Invalid("q has too large a height".into()))?;
            let a = ASequence::factorial_scaled(ab);
            let c = ASequence::power(2 * ab);
            rational_seq(&ctx, a, c, prov)
        }
        BuilderSpec::Punctured => {
            let c = ctx.clone();
            FolnerSeq::from_fn(&ctx, Flags::new(true, true, false, false), prov, move |n| {
                if n == 0 {
                    return Ok(FinSubset::identity(&c));
                }
                let lo = to_i64(&pow2(n - 1), "2^(n-1)")?;
                let mut v = Vec::new();
                for x in lo..2 * lo {
                    for y in lo..2 * lo {
                        v.push(Element::vector(&[x, y]));
                    }
                }
                Ok(FinSubset::from_sorted(&c, v))
            })
            .with_size(|n| Some(if n == 0 { BigUint::one() } else { pow2(2 * (n - 1)) }))
        }
        BuilderSpec::DirectSum { parts } => {
            let seqs: Vec<FolnerSeq> = parts.iter().map(build_folner).collect::<Result<_>>()?;
            let flags = seqs.iter().fold(Flags::new(true, true, true, true), |f, s| {
                let g = s.flags();
                Flags::new(f.folner && g.folner, f.locally_monotileable && g.locally_monotileable,
                    f.congruent && g.congruent, f.exhaustive && g.exhaustive)
            });
            let c = ctx.clone();
            let seqs2 = seqs.clone();
            FolnerSeq::from_fn(&ctx, flags, prov, move |n| {
                let mut acc: Vec<BTreeMap<u64, Vec<u64>>> = vec![BTreeMap::new()];
                for i in 0..n {
                    let part = seqs[i % seqs.len()].gen(n)?;
                    let mut next = Vec::with_capacity(acc.len() * part.len());
                    for m in &acc {
                        for e in part.iter() {
                            let Element::Residues(r) = e else { unreachable!() };
                            let mut m2 = m.clone();
                            if r.iter().any(|&x| x != 0) {
                                m2.insert(i as u64, r.clone());
                            }
                            next.push(m2);
                        }
                    }
                    acc = next;
                }
                Ok(FinSubset::from_unsorted(&c, acc.into_iter().map(Element::Sparse).collect()))
            })
            .with_size(move |n| {
                (0..n).map(|i| seqs2[i % seqs2.len()].size(n).ok()).product::<Option<BigUint>>()
            })
        }
        BuilderSpec::LocallyFinite { fibers } => {
            let c = ctx.clone();
            let fib = fibers.clone();
            FolnerSeq::from_fn(&ctx, Flags::new(true, true, true, true), prov, move |n| {
                Ok(FinSubset::from_unsorted(&c, truncation(&c, n)))
            })
            .with_size(move |n| {
                Some((0..n).map(|i| fib[i % fib.len()].iter().map(|&m| BigUint::from(m)).product::<BigUint>()).product())
            })
        }
        BuilderSpec::FiniteGroup { .. } => {
            let c = ctx.clone();
            FolnerSeq::from_fn(&ctx, Flags::new(true, true, true, true), prov, move |n| {
                if n == 0 {
                    Ok(FinSubset::identity(&c))
                } else {
                    Ok(FinSubset::from_sorted(&c, c.elements()?))
                }
            })
        }
    })
}

/// All elements of a direct sum supported on indices `< n`.
pub(crate) fn truncation(ctx: &MonoidCtx, n: usize) -> Vec<Element> {
    let mut acc: Vec<BTreeMap<u64, Vec<u64>>> = vec![BTreeMap::new()];
    for i in 0..n as u64 {
        let m = ctx.fiber_at(i).unwrap().to_vec();
        let fiber = MonoidCtx::cyclic(&m).unwrap().elements().unwrap();
        let mut next = Vec::with_capacity(acc.len() * fiber.len());
        for a in &acc {
            for e in &fiber {
                let Element::Residues(r) = e else { unreachable!() };
                let mut a2 = a.clone();
                if r.iter().any(|&x| x != 0) {
                    a2.insert(i, r.clone());
                }
                next.push(a2);
            }
        }
        acc = next;
    }
    acc.into_iter().map(Element::Sparse).collect()
}

fn rational_seq(ctx: &MonoidCtx, a: ASequence, c: ASequence, prov: Provenance) -> FolnerSeq {
    let prog = {
        let (a, c) = (a.clone(), c.clone());
        move |n: usize| -> Option<RatProgression> {
            let an = a.term(n).ok()?;
            let cn = c.term(n).ok()?;
            let len = (&an * &cn).to_u64()?;
            RatProgression::new(BigRational::zero(), BigRational::new(BigInt::one(), an.into()), len).ok()
        }
    };
    let prog2 = prog.clone();
    let cap = ctx.clone();
    let (a2, c2) = (a.clone(), c.clone());
    FolnerSeq::from_fn(ctx, Flags::new(true, true, true, false), prov, move |n| {
        let p = prog(n).ok_or_else(|| Error::Budget(format!("rational level {n} is too large")))?;
        let elems = p.elements(u64::MAX)?;
        Ok(FinSubset::from_sorted(&cap, elems.into_iter().map(Element::Rational).collect()))
    })
    .with_size(move |n| Some(a2.term(n).ok()? * c2.term(n).ok()?))
    .with_progression(prog2)
}
