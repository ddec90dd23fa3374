use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;

use super::builders::truncation;
use crate::algebra::{Element, Family, MonoidCtx};
use crate::error::{Error, Result};
use crate::finset::FinSubset;

type EnumFn = dyn Fn(usize) -> Result<Vec<Element>> + Send + Sync;

#[derive(Clone)]
enum Kind {
    /// `G_n` = word ball of radius `n`.
    Balls,
    /// `G_n = {g_0, …, g_n}` for an enumeration returned in prefixes.
    Enumeration(Arc<EnumFn>),
    /// Explicit blocks `G_0, …, G_N`.
    Blocks(Arc<Vec<FinSubset>>),
}

/// An increasing sequence of finite sets `G_0 ⊆ G_1 ⊆ …` with `1 ∈ G_0`.
#[derive(Clone)]
pub struct Exhaustion {
    ctx: MonoidCtx,
    kind: Kind,
    name: String,
}

impl fmt::Debug for Exhaustion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Exhaustion({} of {})", self.name, self.ctx)
    }
}

impl Exhaustion {
    /// Word-metric balls; the context needs a generating set.
    pub fn balls(ctx: &MonoidCtx) -> Result<Self> {
        ctx.generators()
            .ok_or_else(|| Error::Unsupported(format!("{ctx} has no generating set for balls")))?;
        Ok(Exhaustion { ctx: ctx.clone(), kind: Kind::Balls, name: "balls".into() })
    }

    /// Enumeration by spheres of the word metric, canonical order inside a sphere.
    pub fn ball_enumeration(ctx: &MonoidCtx) -> Result<Self> {
        ctx.generators()
            .ok_or_else(|| Error::Unsupported(format!("{ctx} has no generating set")))?;
        let c = ctx.clone();
        Ok(Self::enumeration(ctx, "ball order", move |count| c.ball_order(count, usize::MAX)))
    }

    /// `G_n` from an enumeration; `prefix(count)` must return its first `count` terms.
    pub fn enumeration<F>(ctx: &MonoidCtx, name: &str, prefix: F) -> Self
    where
        F: Fn(usize) -> Result<Vec<Element>> + Send + Sync + 'static,
    {
        Exhaustion { ctx: ctx.clone(), kind: Kind::Enumeration(Arc::new(prefix)), name: name.into() }
    }

    /// `0, 1, −1, 2, −2, …` on ℤ.
    pub fn integers() -> Self {
        Self::enumeration(&MonoidCtx::int(), "0,1,-1,2,-2,...", |count| {
            Ok((0..count as i64).map(|i| Element::int(if i % 2 == 1 { (i + 1) / 2 } else { -i / 2 })).collect())
        })
    }

    /// A finite list of elements, first one the identity.
    pub fn listed(ctx: &MonoidCtx, elems: Vec<Element>) -> Result<Self> {
        if elems.first() != Some(&ctx.identity()) {
            return Err(Error::Invalid("an exhaustion starts at the identity".into()));
        }
        for e in &elems {
            ctx.check(e)?;
        }
        let len = elems.len();
        Ok(Self::enumeration(ctx, "listed", move |count| {
            if count > len {
                return Err(Error::Budget(format!("exhaustion lists only {len} elements")));
            }
            Ok(elems[..count].to_vec())
        }))
    }

    /// Explicit finite blocks, each containing the identity.
    pub fn blocks(ctx: &MonoidCtx, name: &str, blocks: Vec<FinSubset>) -> Result<Self> {
        for (n, b) in blocks.iter().enumerate() {
            if b.ctx() != ctx {
                return Err(Error::ContextMismatch(format!("block {n} lives in {}", b.ctx())));
            }
            if !b.contains_identity() {
                return Err(Error::Invalid(format!("block {n} misses the identity")));
            }
        }
        Ok(Exhaustion { ctx: ctx.clone(), kind: Kind::Blocks(Arc::new(blocks)), name: name.into() })
    }

    /// The default exhaustion of a family: the integer enumeration on ℤ,
    /// balls for other generated groups, heights otherwise.
    pub fn default_for(ctx: &MonoidCtx) -> Result<Self> {
        match ctx.family() {
            Family::IntAdd => Ok(Self::integers()),
            Family::NatAdd => Ok(Self::enumeration(ctx, "0,1,2,...", |count| {
                Ok((0..count as i64).map(Element::int).collect())
            })),
            _ if ctx.generators().is_some() && ctx.is_group() => Self::balls(ctx),
            _ => Ok(Self::heights(ctx)),
        }
    }

    /// Enumeration by increasing height (largest absolute numerator,
    /// denominator or coordinate), canonical order within one height.
    pub fn heights(ctx: &MonoidCtx) -> Self {
        let c = ctx.clone();
        Self::enumeration(ctx, "height", move |count| {
            let mut out = vec![c.identity()];
            let mut h = 0u64;
            while out.len() < count {
                h += 1;
                let mut shell = height_shell(&c, h)?;
                shell.sort();
                out.extend(shell);
                if h > 1 << 20 {
                    return Err(Error::Budget("height enumeration ran away".into()));
                }
            }
            out.truncate(count);
            Ok(out)
        })
    }

    pub fn ctx(&self) -> &MonoidCtx {
        &self.ctx
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `G_n`.
    pub fn gen(&self, n: usize) -> Result<FinSubset> {
        match &self.kind {
            Kind::Balls => Ok(FinSubset::from_unsorted(&self.ctx, self.ctx.ball(n)?)),
            Kind::Enumeration(f) => Ok(FinSubset::from_unsorted(&self.ctx, f(n + 1)?)),
            Kind::Blocks(b) => b
                .get(n)
                .cloned()
                .ok_or_else(|| Error::Budget(format!("exhaustion lists only {} blocks", b.len()))),
        }
    }

    /// `g_n`, the n-th new element (for balls, in sphere order).
    pub fn element(&self, n: usize) -> Result<Element> {
        let prefix = match &self.kind {
            Kind::Balls => self.ctx.ball_order(n + 1, usize::MAX)?,
            Kind::Enumeration(f) => f(n + 1)?,
            Kind::Blocks(_) => return Err(Error::Unsupported("block exhaustions have no enumeration".into())),
        };
        prefix.into_iter().nth(n).ok_or_else(|| Error::Budget(format!("exhaustion has no element {n}")))
    }
}

fn rationals_of_height(h: u64) -> Vec<BigRational> {
    // p/q in lowest terms with max(|p|, q) = h
    let mut v = Vec::new();
    for q in 1..=h {
        for p in -(h as i64)..=(h as i64) {
            if (p.unsigned_abs() == h || q == h) && p.unsigned_abs().gcd(&q) == 1 {
                v.push(BigRational::new(p.into(), q.into()));
            }
        }
    }
    v
}

fn rationals_upto(h: u64) -> Vec<BigRational> {
    let mut v = vec![BigRational::from_integer(0.into())];
    for k in 1..=h {
        v.extend(rationals_of_height(k));
    }
    v
}

fn height_shell(ctx: &MonoidCtx, h: u64) -> Result<Vec<Element>> {
    let hi = h as i64;
    Ok(match ctx.family() {
        Family::RationalAdd => rationals_of_height(h).into_iter().map(Element::Rational).collect(),
        Family::SemidirectRatZ(_) => {
            let mut v = Vec::new();
            for x in rationals_upto(h) {
                for n in -hi..=hi {
                    let inner = n.abs() < hi && rationals_upto(h - 1).contains(&x);
                    if !inner {
                        v.push(Element::SemiRat(x.clone(), BigInt::from(n)));
                    }
                }
            }
            v
        }
        Family::NatVecAdd(d) | Family::IntVecAdd(d) => {
            let lo = if matches!(ctx.family(), Family::NatVecAdd(_)) { 0 } else { -hi };
            let mut pts: Vec<Vec<i64>> = vec![vec![]];
            for _ in 0..*d {
                pts = pts
                    .into_iter()
                    .flat_map(|p| (lo..=hi).map(move |x| [p.clone(), vec![x]].concat()))
                    .collect();
            }
            pts.into_iter()
                .filter(|p| p.iter().any(|x| x.abs() == hi))
                .map(|p| Element::vector(&p))
                .collect()
        }
        Family::PuncturedQuadrant => {
            let mut v = Vec::new();
            for x in 1..=hi {
                for y in 0..=hi {
                    if x == hi || y == hi {
                        v.push(Element::vector(&[x, y]));
                    }
                }
            }
            v
        }
        Family::DirectSum(_) => {
            let n = h as usize;
            let prev: std::collections::HashSet<Element> = truncation(ctx, n - 1).into_iter().collect();
            truncation(ctx, n).into_iter().filter(|e| !prev.contains(e)).collect()
        }
        _ => {
            return Err(Error::Unsupported(format!("no height enumeration for {ctx}")));
        }
    })
}
