//! JSON encodings. Integers travel as strings, rationals as `"p/q"`.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use super::action::ActionSpec;
use super::element::{fmt_rational, Element};
use super::monoid::{Family, MonoidCtx};
use super::quotient::QuotientSpec;
use super::target::{AbelianTarget, TargetElem};
use crate::error::{Error, Result};

fn bad(what: &str, v: &Value) -> Error {
    Error::Invalid(format!("expected {what}, found {v}"))
}

pub fn int_from_json(v: &Value) -> Result<BigInt> {
    match v {
        Value::String(s) => BigInt::from_str(s.trim()).map_err(|_| bad("an integer", v)),
        Value::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(|| bad("an integer", v)),
        _ => Err(bad("an integer", v)),
    }
}

pub fn u64_from_json(v: &Value) -> Result<u64> {
    int_from_json(v)?.to_u64().ok_or_else(|| bad("a non-negative integer", v))
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p = BigInt::from_str(p).map_err(|_| Error::Invalid(format!("bad rational {s:?}")))?;
    let q = BigInt::from_str(q).map_err(|_| Error::Invalid(format!("bad rational {s:?}")))?;
    if q.is_zero() {
        return Err(Error::Invalid(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(p, q))
}

pub fn rational_from_json(v: &Value) -> Result<BigRational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => n.as_i64().map(|x| BigRational::from_integer(x.into())).ok_or_else(|| bad("a rational", v)),
        _ => Err(bad("a rational", v)),
    }
}

pub fn rational_to_string(r: &BigRational) -> String {
    fmt_rational(r)
}

fn strs<T: ToString>(v: &[T]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(x.to_string())).collect())
}

fn array<'a>(v: &'a Value, len: Option<usize>, what: &str) -> Result<&'a Vec<Value>> {
    match v {
        Value::Array(a) if len.is_none_or(|l| a.len() == l) => Ok(a),
        _ => Err(bad(what, v)),
    }
}

pub fn element_to_json(e: &Element) -> Value {
    match e {
        Element::Int(v) => Value::String(v.to_string()),
        Element::Vector(v) => strs(v),
        Element::Residues(v) => strs(v),
        Element::Rational(r) => Value::String(fmt_rational(r)),
        Element::SemiRat(x, n) => json!([fmt_rational(x), n.to_string()]),
        Element::Heis(a, b, c) => strs(&[a, b, c]),
        Element::Sparse(m) => {
            Value::Object(m.iter().map(|(k, v)| (k.to_string(), strs(v))).collect::<Map<_, _>>())
        }
        Element::Dihedral(x, e) => json!([x.to_string(), e.to_string()]),
    }
}

pub fn element_from_json(ctx: &MonoidCtx, v: &Value) -> Result<Element> {
    let ints = |v: &Value, n: Option<usize>| -> Result<Vec<BigInt>> {
        array(v, n, "an integer array")?.iter().map(int_from_json).collect()
    };
    let res = |v: &Value| -> Result<Vec<u64>> { array(v, None, "a residue array")?.iter().map(u64_from_json).collect() };
    let e = match ctx.family() {
        Family::IntAdd | Family::NatAdd => Element::Int(int_from_json(v)?),
        Family::IntVecAdd(d) | Family::NatVecAdd(d) => Element::Vector(ints(v, Some(*d))?),
        Family::PuncturedQuadrant => Element::Vector(ints(v, Some(2))?),
        Family::CyclicProd(_) => Element::Residues(res(v)?),
        Family::RationalAdd => Element::Rational(rational_from_json(v)?),
        Family::SemidirectRatZ(_) => {
            let a = array(v, Some(2), "a pair [x, n]")?;
            Element::SemiRat(rational_from_json(&a[0])?, int_from_json(&a[1])?)
        }
        Family::Heisenberg3 => {
            let a = ints(v, Some(3))?;
            Element::Heis(a[0].clone(), a[1].clone(), a[2].clone())
        }
        Family::DirectSum(_) => {
            let Value::Object(m) = v else { return Err(bad("an index -> residues object", v)) };
            let mut out = BTreeMap::new();
            for (k, val) in m {
                let i: u64 = k.parse().map_err(|_| Error::Invalid(format!("bad index {k:?}")))?;
                out.insert(i, res(val)?);
            }
            Element::Sparse(out)
        }
        Family::InfiniteDihedral => {
            let a = array(v, Some(2), "a pair [x, e]")?;
            let e = u64_from_json(&a[1])?;
            if e > 1 {
                return Err(bad("a parity 0 or 1", &a[1]));
            }
            Element::Dihedral(int_from_json(&a[0])?, e as u8)
        }
    };
    ctx.canonicalize(e)
}

pub fn elements_to_json<'a>(it: impl IntoIterator<Item = &'a Element>) -> Value {
    Value::Array(it.into_iter().map(element_to_json).collect())
}

pub fn elements_from_json(ctx: &MonoidCtx, v: &Value) -> Result<Vec<Element>> {
    array(v, None, "an element array")?.iter().map(|x| element_from_json(ctx, x)).collect()
}

fn index_key(e: &Element) -> String {
    match element_to_json(e) {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

fn index_from_key(ctx: &MonoidCtx, k: &str) -> Result<Element> {
    match serde_json::from_str::<Value>(k) {
        Ok(v @ (Value::Array(_) | Value::Object(_))) => element_from_json(ctx, &v),
        _ => element_from_json(ctx, &Value::String(k.to_string())),
    }
}

pub fn target_elem_to_json(x: &TargetElem) -> Value {
    match x {
        TargetElem::Dense(v) => strs(v),
        TargetElem::Sparse(m) => {
            Value::Object(m.iter().map(|(k, v)| (index_key(k), strs(v))).collect::<Map<_, _>>())
        }
    }
}

pub fn target_elem_from_json(target: &AbelianTarget, v: &Value) -> Result<TargetElem> {
    let signed = |v: &Value, m: &[u64]| -> Result<Vec<u64>> {
        let a = array(v, Some(m.len()), "a residue array of the fiber arity")?;
        a.iter()
            .zip(m)
            .map(|(x, &mi)| Ok(int_from_json(x)?.mod_floor_u64(mi)))
            .collect()
    };
    let x = match target.base() {
        AbelianTarget::Finite(m) => TargetElem::Dense(signed(v, m)?),
        AbelianTarget::FinSupport { index, fiber } => {
            let Value::Object(obj) = v else { return Err(bad("an index -> residues object", v)) };
            let mut out = BTreeMap::new();
            for (k, val) in obj {
                out.insert(index_from_key(index, k)?, signed(val, fiber)?);
            }
            TargetElem::Sparse(out)
        }
        _ => unreachable!("base() is never a wrapper"),
    };
    target.canonicalize(x)
}

trait ModFloorU64 {
    fn mod_floor_u64(&self, m: u64) -> u64;
}

impl ModFloorU64 for BigInt {
    fn mod_floor_u64(&self, m: u64) -> u64 {
        use num_integer::Integer;
        self.mod_floor(&BigInt::from(m)).to_u64().unwrap()
    }
}

pub fn ctx_to_json(ctx: &MonoidCtx) -> Value {
    let mut v = match ctx.family() {
        Family::IntAdd => json!({"family": "int"}),
        Family::NatAdd => json!({"family": "nat"}),
        Family::IntVecAdd(d) => json!({"family": "int_vec", "dim": d}),
        Family::NatVecAdd(d) => json!({"family": "nat_vec", "dim": d}),
        Family::CyclicProd(m) => json!({"family": "cyclic", "moduli": m}),
        Family::RationalAdd => json!({"family": "rational"}),
        Family::SemidirectRatZ(q) => json!({"family": "q_semidirect", "q": fmt_rational(q)}),
        Family::Heisenberg3 => json!({"family": "heisenberg"}),
        Family::DirectSum(f) => json!({"family": "direct_sum", "fibers": f}),
        Family::PuncturedQuadrant => json!({"family": "punctured_quadrant"}),
        Family::InfiniteDihedral => json!({"family": "infinite_dihedral"}),
    };
    if let Some(g) = ctx.generators() {
        v["generators"] = elements_to_json(g);
    }
    v
}

fn usize_field(v: &Value, key: &str) -> Result<usize> {
    v.get(key)
        .map(u64_from_json)
        .transpose()?
        .map(|x| x as usize)
        .ok_or_else(|| Error::Invalid(format!("missing field {key:?}")))
}

pub fn moduli_from_json(v: &Value) -> Result<Vec<u64>> {
    array(v, None, "a moduli array")?.iter().map(u64_from_json).collect()
}

pub fn ctx_from_json(v: &Value) -> Result<MonoidCtx> {
    let name = match v {
        Value::String(s) => s.as_str(),
        _ => v
            .get("family")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Invalid("monoid needs a \"family\" field".into()))?,
    };
    let field = |k: &str| v.get(k).ok_or_else(|| Error::Invalid(format!("missing field {k:?}")));
    let ctx = match name {
        "int" => MonoidCtx::int(),
        "nat" => MonoidCtx::nat(),
        "int_vec" => MonoidCtx::int_vec(usize_field(v, "dim")?)?,
        "nat_vec" => MonoidCtx::nat_vec(usize_field(v, "dim")?)?,
        "cyclic" => MonoidCtx::cyclic(&moduli_from_json(field("moduli")?)?)?,
        "rational" => MonoidCtx::rational(),
        "q_semidirect" => MonoidCtx::semidirect(rational_from_json(field("q")?)?)?,
        "heisenberg" => MonoidCtx::heisenberg(),
        "direct_sum" => MonoidCtx::direct_sum(
            array(field("fibers")?, None, "a list of fibers")?
                .iter()
                .map(moduli_from_json)
                .collect::<Result<_>>()?,
        )?,
        "punctured_quadrant" => MonoidCtx::punctured_quadrant(),
        "infinite_dihedral" => MonoidCtx::infinite_dihedral(),
        other => return Err(Error::Invalid(format!("unknown monoid family {other:?}"))),
    };
    match v.get("generators") {
        Some(g) => {
            let gens = elements_from_json(&ctx, g)?;
            ctx.with_generators(gens)
        }
        None => Ok(ctx),
    }
}

pub fn target_to_json(t: &AbelianTarget) -> Value {
    match t {
        AbelianTarget::Finite(m) => json!({"kind": "finite", "moduli": m}),
        AbelianTarget::FinSupport { index, fiber } => {
            json!({"kind": "fin_support", "index": ctx_to_json(index), "fiber": fiber})
        }
        AbelianTarget::Subgroup { base, kernel } => {
            json!({"kind": "subgroup", "base": target_to_json(base), "order": kernel.len()})
        }
        AbelianTarget::Quotient { base, kernel } => {
            json!({"kind": "quotient", "base": target_to_json(base), "kernel_order": kernel.len()})
        }
    }
}

pub fn target_from_json(v: &Value) -> Result<AbelianTarget> {
    let kind = v.get("kind").and_then(Value::as_str).unwrap_or("finite");
    match kind {
        "finite" => AbelianTarget::finite(&moduli_from_json(
            v.get("moduli").ok_or_else(|| Error::Invalid("finite target needs \"moduli\"".into()))?,
        )?),
        "fin_support" => AbelianTarget::fin_support(
            ctx_from_json(v.get("index").ok_or_else(|| Error::Invalid("missing \"index\"".into()))?)?,
            &moduli_from_json(v.get("fiber").ok_or_else(|| Error::Invalid("missing \"fiber\"".into()))?)?,
        ),
        other => Err(Error::Invalid(format!("unknown target kind {other:?}"))),
    }
}

pub fn quotient_to_json(q: &QuotientSpec) -> Value {
    match q {
        QuotientSpec::DropLastCoord { dim } => json!({"kind": "drop_last_coord", "dim": dim}),
        QuotientSpec::SecondCoord { q } => json!({"kind": "second_coord", "q": fmt_rational(q)}),
        QuotientSpec::CenterQuotient => json!({"kind": "center_quotient"}),
        QuotientSpec::ModN { n } => json!({"kind": "mod_n", "n": n}),
        QuotientSpec::ByFinite { moduli, divisors } => {
            json!({"kind": "by_finite", "moduli": moduli, "divisors": divisors})
        }
        QuotientSpec::DihedralParity => json!({"kind": "dihedral_parity"}),
    }
}

pub fn quotient_from_json(v: &Value) -> Result<QuotientSpec> {
    let field = |k: &str| v.get(k).ok_or_else(|| Error::Invalid(format!("quotient needs {k:?}")));
    let kind = match v {
        Value::String(s) => s.as_str(),
        _ => v.get("kind").and_then(Value::as_str).ok_or_else(|| Error::Invalid("quotient needs \"kind\"".into()))?,
    };
    let q = match kind {
        "drop_last_coord" => QuotientSpec::DropLastCoord { dim: usize_field(v, "dim")? },
        "second_coord" => QuotientSpec::SecondCoord { q: rational_from_json(field("q")?)? },
        "center_quotient" => QuotientSpec::CenterQuotient,
        "mod_n" => QuotientSpec::ModN { n: u64_from_json(field("n")?)? },
        "by_finite" => QuotientSpec::ByFinite {
            moduli: moduli_from_json(field("moduli")?)?,
            divisors: moduli_from_json(field("divisors")?)?,
        },
        "dihedral_parity" => QuotientSpec::DihedralParity,
        other => return Err(Error::Invalid(format!("unknown quotient {other:?}"))),
    };
    q.validate()?;
    Ok(q)
}

/// Shift, matrix-power and trivial actions; induced actions are derived, not
/// read.
pub fn action_from_json(v: &Value) -> Result<ActionSpec> {
    let field = |k: &str| v.get(k).ok_or_else(|| Error::Invalid(format!("action needs {k:?}")));
    match v.get("kind").and_then(Value::as_str) {
        Some("shift") => ActionSpec::shift(ctx_from_json(field("index")?)?, &moduli_from_json(field("fiber")?)?),
        Some("endo_power") => {
            let rows = array(field("matrix")?, None, "a matrix")?
                .iter()
                .map(|r| {
                    array(r, None, "a matrix row")?
                        .iter()
                        .map(|x| int_from_json(x)?.to_i64().ok_or_else(|| bad("a small integer", x)))
                        .collect::<Result<Vec<i64>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            ActionSpec::endo_power(ctx_from_json(field("monoid")?)?, &moduli_from_json(field("moduli")?)?, &rows)
        }
        Some("trivial") => Ok(ActionSpec::trivial(ctx_from_json(field("monoid")?)?, target_from_json(field("target")?)?)),
        other => Err(Error::Invalid(format!("unknown action kind {other:?}"))),
    }
}
