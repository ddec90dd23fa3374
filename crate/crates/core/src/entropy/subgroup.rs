use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use serde_json::{json, Value};

use crate::algebra::json::{target_elem_from_json, target_elem_to_json};
use crate::algebra::{AbelianTarget, ActionSpec, EndoMatrix, EndoPower, Kernel, TargetElem};
use crate::error::{Error, Result};
use crate::finset::{covering_number, AFinSet, CoverCert};

/// An α-invariant subgroup `B` of the target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubgroupSpec {
    /// `B = dA`.
    MultiplesOf(u64),
    /// `⊕_S C` for the subgroup `C` of the fiber generated by the listed values.
    FiberSubgroup(Vec<Vec<u64>>),
    /// The subgroup generated by finitely many elements of a finite target.
    SpanOf(Vec<TargetElem>),
}

/// How `B` and `A/B` are written down.
#[derive(Clone, Debug)]
enum Repr {
    /// Coordinatewise: `gcd(d, m_i)·ℤ/m_i ≅ ℤ/(m_i/g_i)` and `ℤ/g_i`;
    /// `keep_sub`/`keep_quo` list the coordinates that survive (modulus > 1).
    Multiples { g: Vec<u64>, keep_sub: Vec<usize>, keep_quo: Vec<usize> },
    /// Same coordinates as the ambient group, quotient by least representatives.
    Wrapped { kernel: Kernel },
}

/// The restriction `α_B`, the quotient action `α_{A/B}` and the maps between them.
#[derive(Clone, Debug)]
pub struct Induced {
    pub spec: SubgroupSpec,
    pub act: ActionSpec,
    pub sub: ActionSpec,
    pub quotient: ActionSpec,
    repr: Repr,
}

/// Every element of the subgroup of `∏ℤ/m_i` generated by `gens`, sorted.
fn span(moduli: &[u64], gens: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::from([vec![0; moduli.len()]]);
    let mut frontier: Vec<Vec<u64>> = seen.iter().cloned().collect();
    while let Some(v) = frontier.pop() {
        for g in gens {
            let w: Vec<u64> = v.iter().zip(g).zip(moduli).map(|((a, b), m)| (a + b % m) % m).collect();
            if seen.insert(w.clone()) {
                frontier.push(w);
            }
        }
    }
    seen.into_iter().collect()
}

fn dense(x: &TargetElem) -> Result<&[u64]> {
    match x {
        TargetElem::Dense(v) => Ok(v),
        _ => Err(Error::ContextMismatch("expected an element of a finite target".into())),
    }
}

impl SubgroupSpec {
    pub fn name(&self) -> String {
        match self {
            SubgroupSpec::MultiplesOf(d) => format!("{d}A"),
            SubgroupSpec::FiberSubgroup(g) => format!("fiber subgroup generated by {g:?}"),
            SubgroupSpec::SpanOf(g) => format!("span of {} elements", g.len()),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            SubgroupSpec::MultiplesOf(d) => json!({"kind": "multiples", "d": d}),
            SubgroupSpec::FiberSubgroup(g) => json!({"kind": "fiber", "generators": g}),
            SubgroupSpec::SpanOf(g) => {
                json!({"kind": "span", "generators": g.iter().map(target_elem_to_json).collect::<Vec<_>>()})
            }
        }
    }

    pub fn from_json(target: &AbelianTarget, v: &Value) -> Result<Self> {
        let kind = v.get("kind").and_then(Value::as_str).unwrap_or("multiples");
        let gens = || v.get("generators").and_then(Value::as_array).ok_or_else(|| {
            Error::Invalid("subgroup needs \"generators\"".into())
        });
        Ok(match kind {
            "multiples" => SubgroupSpec::MultiplesOf(
                v.get("d").and_then(Value::as_u64).ok_or_else(|| Error::Invalid("multiples needs \"d\"".into()))?,
            ),
            "fiber" => SubgroupSpec::FiberSubgroup(
                gens()?
                    .iter()
                    .map(|g| serde_json::from_value::<Vec<u64>>(g.clone()))
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::Invalid(format!("fiber generator: {e}")))?,
            ),
            "span" => SubgroupSpec::SpanOf(
                gens()?.iter().map(|g| target_elem_from_json(target, g)).collect::<Result<_>>()?,
            ),
            other => return Err(Error::Invalid(format!("unknown subgroup kind {other:?}"))),
        })
    }

    /// The kernel used by the wrapped representation.
    fn kernel(&self, target: &AbelianTarget) -> Result<Kernel> {
        let m = target.moduli();
        match (self, target) {
            (SubgroupSpec::FiberSubgroup(g), AbelianTarget::FinSupport { .. }) => {
                if g.iter().any(|v| v.len() != m.len()) {
                    return Err(Error::ContextMismatch("fiber generator arity".into()));
                }
                Ok(Kernel::Fiber(span(m, g)))
            }
            (SubgroupSpec::SpanOf(g), AbelianTarget::Finite(_)) => {
                let gens = g.iter().map(|x| dense(x).map(<[u64]>::to_vec)).collect::<Result<Vec<_>>>()?;
                Ok(Kernel::Finite(span(m, &gens).into_iter().map(TargetElem::Dense).collect()))
            }
            (SubgroupSpec::FiberSubgroup(_), _) => {
                Err(Error::Unsupported("fiber subgroups need a finitely supported target".into()))
            }
            (SubgroupSpec::SpanOf(_), _) => Err(Error::Unsupported("spans are taken in finite targets only".into())),
            (SubgroupSpec::MultiplesOf(_), _) => unreachable!("multiples use the coordinatewise representation"),
        }
    }

    fn gcds(&self, target: &AbelianTarget) -> Option<Vec<u64>> {
        match self {
            SubgroupSpec::MultiplesOf(d) => Some(target.moduli().iter().map(|m| d.gcd(m)).collect()),
            _ => None,
        }
    }

    /// `x ∈ B`.
    pub fn contains(&self, target: &AbelianTarget, x: &TargetElem) -> Result<bool> {
        if let Some(g) = self.gcds(target) {
            let ok = |v: &[u64]| v.iter().zip(&g).all(|(a, gi)| a % gi == 0);
            return Ok(match x {
                TargetElem::Dense(v) => ok(v),
                TargetElem::Sparse(map) => map.values().all(|v| ok(v)),
            });
        }
        Ok(self.kernel(target)?.contains(x))
    }

    /// A canonical representative of `x + B` in the coordinates of `A`.
    pub fn class_of(&self, target: &AbelianTarget, x: &TargetElem) -> Result<TargetElem> {
        if let Some(g) = self.gcds(target) {
            let red = |v: &[u64]| -> Vec<u64> { v.iter().zip(&g).map(|(a, gi)| a % gi).collect() };
            return Ok(match x {
                TargetElem::Dense(v) => TargetElem::Dense(red(v)),
                TargetElem::Sparse(map) => TargetElem::Sparse(
                    map.iter().map(|(k, v)| (k.clone(), red(v))).filter(|(_, v)| v.iter().any(|&a| a != 0)).collect(),
                ),
            });
        }
        Ok(self.kernel(target)?.reduce(target, x))
    }
}

fn pick(v: &[u64], keep: &[usize]) -> Vec<u64> {
    keep.iter().map(|&i| v[i]).collect()
}

fn map_elem(x: &TargetElem, f: impl Fn(&[u64]) -> Vec<u64>) -> TargetElem {
    match x {
        TargetElem::Dense(v) => TargetElem::Dense(f(v)),
        TargetElem::Sparse(m) => TargetElem::Sparse(
            m.iter()
                .map(|(k, v)| (k.clone(), f(v)))
                .filter(|(_, v)| v.iter().any(|&a| a != 0))
                .collect::<BTreeMap<_, _>>(),
        ),
    }
}

/// Same kind of target as `base` with new per-block moduli.
fn retarget(base: &AbelianTarget, moduli: Vec<u64>) -> AbelianTarget {
    match base {
        AbelianTarget::FinSupport { index, .. } => AbelianTarget::FinSupport { index: index.clone(), fiber: moduli },
        _ => AbelianTarget::Finite(moduli),
    }
}

fn induced_matrix(m: &EndoMatrix, g: &[u64], keep_sub: &[usize], keep_quo: &[usize]) -> Result<(EndoMatrix, EndoMatrix)> {
    let mods = &m.moduli;
    let sub_mod: Vec<u64> = keep_sub.iter().map(|&i| mods[i] / g[i]).collect();
    let sub_rows: Vec<Vec<i64>> = keep_sub
        .iter()
        .map(|&i| {
            keep_sub
                .iter()
                .map(|&j| {
                    let v = m.rows[i][j] as u128 * g[j] as u128;
                    debug_assert_eq!(v % g[i] as u128, 0);
                    ((v / g[i] as u128) % (mods[i] / g[i]) as u128) as i64
                })
                .collect()
        })
        .collect();
    let quo_mod: Vec<u64> = keep_quo.iter().map(|&i| g[i]).collect();
    let quo_rows: Vec<Vec<i64>> = keep_quo
        .iter()
        .map(|&i| keep_quo.iter().map(|&j| (m.rows[i][j] % g[i]) as i64).collect())
        .collect();
    Ok((EndoMatrix::new(&sub_mod, &sub_rows)?, EndoMatrix::new(&quo_mod, &quo_rows)?))
}

/// `α_B` and `α_{A/B}` for an invariant subgroup `B`.
///
/// `B = dA` is written in closed form: a fiber `ℤ/m` splits into the
/// subgroup `gℤ/m ≅ ℤ/(m/g)` and the quotient `ℤ/g`, `g = gcd(d, m)`, so
/// shifts stay shifts and matrices reduce entrywise. Other subgroups keep the
/// coordinates of `A`.
pub fn induced_actions(act: &ActionSpec, b: &SubgroupSpec) -> Result<Induced> {
    let target = act.target();
    if !matches!(target, AbelianTarget::Finite(_) | AbelianTarget::FinSupport { .. }) {
        return Err(Error::Unsupported("induced actions are built from a base target only".into()));
    }
    if let Some(g) = b.gcds(target) {
        let mods = target.moduli();
        let keep_sub: Vec<usize> = (0..mods.len()).filter(|&i| mods[i] / g[i] > 1).collect();
        let keep_quo: Vec<usize> = (0..mods.len()).filter(|&i| g[i] > 1).collect();
        let sub_t = retarget(target, keep_sub.iter().map(|&i| mods[i] / g[i]).collect());
        let quo_t = retarget(target, keep_quo.iter().map(|&i| g[i]).collect());
        let (sub, quotient) = match act {
            ActionSpec::Shift { .. } => (ActionSpec::Shift { target: sub_t }, ActionSpec::Shift { target: quo_t }),
            ActionSpec::Trivial { monoid, .. } => (
                ActionSpec::Trivial { monoid: monoid.clone(), target: sub_t },
                ActionSpec::Trivial { monoid: monoid.clone(), target: quo_t },
            ),
            ActionSpec::EndoPower { power, .. } => {
                let (ms, mq) = induced_matrix(power.matrix(), &g, &keep_sub, &keep_quo)?;
                (
                    ActionSpec::EndoPower { power: EndoPower::new(power.monoid().clone(), ms)?, target: sub_t },
                    ActionSpec::EndoPower { power: EndoPower::new(power.monoid().clone(), mq)?, target: quo_t },
                )
            }
            _ => return Err(Error::Unsupported(format!("no induced actions for {act}"))),
        };
        return Ok(Induced {
            spec: b.clone(),
            act: act.clone(),
            sub,
            quotient,
            repr: Repr::Multiples { g, keep_sub, keep_quo },
        });
    }
    let kernel = b.kernel(target)?;
    check_invariant(act, b, &kernel)?;
    let sub_t = AbelianTarget::Subgroup { base: Box::new(target.clone()), kernel: kernel.clone() };
    let quo_t = AbelianTarget::Quotient { base: Box::new(target.clone()), kernel: kernel.clone() };
    Ok(Induced {
        spec: b.clone(),
        act: act.clone(),
        sub: ActionSpec::Restricted { inner: Box::new(act.clone()), target: sub_t },
        quotient: ActionSpec::Quotient { inner: Box::new(act.clone()), target: quo_t },
        repr: Repr::Wrapped { kernel },
    })
}

/// `α(s)(b) ∈ B` for the monoid generators `s` (or the identity and a few
/// small elements) and the generators `b` of `B`.
fn check_invariant(act: &ActionSpec, spec: &SubgroupSpec, kernel: &Kernel) -> Result<()> {
    let target = act.target();
    let gens: Vec<TargetElem> = match (spec, kernel) {
        (SubgroupSpec::SpanOf(g), _) => g.clone(),
        (SubgroupSpec::FiberSubgroup(g), _) => {
            let index = act.monoid();
            let t = index.identity();
            g.iter()
                .map(|v| target.canonicalize(TargetElem::Sparse(BTreeMap::from([(t.clone(), v.clone())]))))
                .collect::<Result<_>>()?
        }
        _ => vec![],
    };
    let monoid = act.monoid();
    let samples = match monoid.generators() {
        Some(g) => g.to_vec(),
        None => monoid.ball(1)?,
    };
    for s in &samples {
        for b in &gens {
            let img = act.apply(s, b)?;
            if !kernel.contains(&img) {
                return Err(Error::Refuted(format!("subgroup is not invariant: alpha({s}) moves {b} to {img}")));
            }
        }
    }
    Ok(())
}

impl Induced {
    pub fn contains(&self, x: &TargetElem) -> Result<bool> {
        self.spec.contains(self.act.target(), x)
    }

    /// `π: A → A/B`.
    pub fn project(&self, x: &TargetElem) -> Result<TargetElem> {
        self.act.target().check(x)?;
        Ok(match &self.repr {
            Repr::Multiples { g, keep_quo, .. } => {
                map_elem(x, |v| pick(&v.iter().zip(g).map(|(a, gi)| a % gi).collect::<Vec<_>>(), keep_quo))
            }
            Repr::Wrapped { kernel } => kernel.reduce(self.act.target(), x),
        })
    }

    /// `ι⁻¹`: coordinates in `B` of an element of `A` lying in `B`.
    pub fn to_sub(&self, x: &TargetElem) -> Result<TargetElem> {
        if !self.contains(x)? {
            return Err(Error::ContextMismatch(format!("{x} is not in {}", self.spec.name())));
        }
        Ok(match &self.repr {
            Repr::Multiples { g, keep_sub, .. } => {
                map_elem(x, |v| pick(&v.iter().zip(g).map(|(a, gi)| a / gi).collect::<Vec<_>>(), keep_sub))
            }
            Repr::Wrapped { .. } => x.clone(),
        })
    }

    /// `ι: B → A`.
    pub fn from_sub(&self, y: &TargetElem) -> Result<TargetElem> {
        self.sub.target().check(y)?;
        Ok(match &self.repr {
            Repr::Multiples { g, keep_sub, .. } => {
                let n = g.len();
                map_elem(y, |v| {
                    let mut out = vec![0; n];
                    for (k, &i) in keep_sub.iter().enumerate() {
                        out[i] = v[k] * g[i];
                    }
                    out
                })
            }
            Repr::Wrapped { .. } => y.clone(),
        })
    }

    pub fn project_set(&self, x: &AFinSet) -> Result<AFinSet> {
        x.map(self.quotient.target(), |e| self.project(e))
    }

    pub fn sub_set(&self, y: &AFinSet) -> Result<AFinSet> {
        y.map(self.sub.target(), |e| self.to_sub(e))
    }

    /// `Z ⊆ X ∪ {0}` with one element per class of `π(X)`, `0` for the zero
    /// class and the least element of `X` otherwise, so `π(Z) = π(X)` and
    /// `(Z − Z) ∩ B = {0}`.
    pub fn lift(&self, x: &AFinSet) -> Result<AFinSet> {
        let mut reps: BTreeMap<TargetElem, TargetElem> = BTreeMap::new();
        let zero = self.act.target().zero();
        reps.insert(self.project(&zero)?, zero);
        for e in x.iter() {
            reps.entry(self.project(e)?).or_insert_with(|| e.clone());
        }
        Ok(AFinSet::from_unsorted(self.act.target(), reps.into_values().collect()))
    }
}

/// `Y = (X − X) ∩ B` together with `μ(X, Y)`, which equals `|π(X)|`.
#[derive(Clone, Debug)]
pub struct Witness {
    pub y: AFinSet,
    pub mu: usize,
    pub classes: usize,
    pub cover: CoverCert,
}

pub fn witness_subset(x: &AFinSet, b: &SubgroupSpec) -> Result<Witness> {
    x.require_zero("X")?;
    let t = x.target();
    let diff = x.difference_set(x)?;
    let mut keep = Vec::new();
    for e in diff.iter() {
        if b.contains(t, e)? {
            keep.push(e.clone());
        }
    }
    let y = AFinSet::from_unsorted(t, keep);
    let classes: BTreeSet<TargetElem> = x.iter().map(|e| b.class_of(t, e)).collect::<Result<_>>()?;
    let (mu, cover) = covering_number(x, &y)?;
    if mu != classes.len() {
        return Err(Error::Verification(format!("mu(X, Y) = {mu} but pi(X) has {} elements", classes.len())));
    }
    Ok(Witness { y, mu, classes: classes.len(), cover })
}
