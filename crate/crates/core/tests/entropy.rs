use std::collections::BTreeMap;

use entile_core::entropy::{
    addition_report, entropy_profile, induced_actions, log_ratio_le, relative_profile, trajectory,
    trajectory_size, witness_subset, SubgroupSpec,
};
use entile_core::finset::{covering_number, AFinSet, FinSubset};
use entile_core::folner::{build_folner, ASequence, BuilderSpec};
use entile_core::{AbelianTarget, ActionSpec, Element, MonoidCtx, TargetElem};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LN2: f64 = std::f64::consts::LN_2;

fn dyadic_nat() -> entile_core::folner::FolnerSeq {
    build_folner(&BuilderSpec::Interval { a: ASequence::power(2), on_integers: false }).unwrap()
}

fn shift_nat(m: u64) -> ActionSpec {
    ActionSpec::shift(MonoidCtx::nat(), &[m]).unwrap()
}

/// `{v·e_0 : v ∈ vals}` in ⊕ fiber.
fn at_zero(act: &ActionSpec, vals: &[u64]) -> AFinSet {
    let t = act.target();
    let id = act.monoid().identity();
    let mut v = vec![t.zero()];
    v.extend(vals.iter().filter(|&&x| x != 0).map(|&x| t.basis(&id, &[x]).unwrap()));
    AFinSet::new(t, v).unwrap()
}

fn sparse(t: &AbelianTarget, pairs: &[(Element, u64)]) -> TargetElem {
    let mut m: BTreeMap<Element, Vec<u64>> = BTreeMap::new();
    for (k, v) in pairs {
        m.insert(k.clone(), vec![*v]);
    }
    t.canonicalize(TargetElem::Sparse(m)).unwrap()
}

fn nats(xs: impl IntoIterator<Item = i64>) -> FinSubset {
    FinSubset::new(&MonoidCtx::nat(), xs.into_iter().map(Element::int).collect()).unwrap()
}

#[test]
fn trajectory_examples() {
    let act = shift_nat(2);
    let x = at_zero(&act, &[1]);
    assert_eq!(trajectory(&act, &FinSubset::identity(&MonoidCtx::nat()), &x).unwrap(), x);
    let t = trajectory(&act, &nats(0..3), &x).unwrap();
    assert_eq!(t.len(), 8);
    let tgt = act.target();
    for e in t.iter() {
        let TargetElem::Sparse(m) = e else { panic!() };
        assert!(m.keys().all(|k| k.as_i64().unwrap() < 3));
    }
    assert!(t.contains(&sparse(tgt, &[(Element::int(0), 1), (Element::int(1), 1), (Element::int(2), 1)])));
    assert_eq!(trajectory_size(&act, &nats(0..3), &x).unwrap(), BigUint::from(8u32));

    let fin = AbelianTarget::finite(&[5]).unwrap();
    let triv = ActionSpec::trivial(MonoidCtx::int(), fin.clone());
    let x = AFinSet::new(&fin, vec![TargetElem::Dense(vec![0]), TargetElem::Dense(vec![2])]).unwrap();
    let f = FinSubset::identity(&MonoidCtx::int());
    assert_eq!(trajectory(&triv, &f, &x).unwrap(), x);
    // X must contain 0, and must live in the action's target
    let bad = AFinSet::new(&fin, vec![TargetElem::Dense(vec![1])]).unwrap();
    assert!(trajectory(&triv, &f, &bad).is_err());
    assert!(trajectory(&act, &f, &x).is_err());
}

#[test]
fn profile_examples() {
    let seq = dyadic_nat();
    let act = shift_nat(2);
    let p = entropy_profile(&act, &seq, &at_zero(&act, &[1]), 5).unwrap();
    for r in &p.rows {
        assert_eq!(r.count, BigUint::from(2u32).pow(r.f_size as u32));
        assert!((r.value - LN2).abs() < 1e-12);
    }
    let act4 = shift_nat(4);
    let x4 = at_zero(&act4, &[1, 2, 3]);
    let p = entropy_profile(&act4, &seq, &x4, 5).unwrap();
    assert!(p.certified && p.non_increasing() && p.stopped.is_none());
    for r in &p.rows {
        assert_eq!(r.count, BigUint::from(4u32).pow(1 << r.n));
        assert!((r.value - 2.0 * LN2).abs() < 1e-12);
    }

    let fin = AbelianTarget::finite(&[7]).unwrap();
    let triv = ActionSpec::trivial(MonoidCtx::nat(), fin.clone());
    let x = AFinSet::new(&fin, vec![TargetElem::Dense(vec![0]), TargetElem::Dense(vec![1])]).unwrap();
    let p = entropy_profile(&triv, &seq, &x, 5).unwrap();
    assert!(p.non_increasing());
    // |F|·X inside ℤ/7 saturates at 7 elements
    assert_eq!(p.rows[5].count, BigUint::from(7u32));
    assert!(p.rows[5].value < p.rows[0].value);
}

#[test]
fn relative_examples() {
    let seq = dyadic_nat();
    let act = shift_nat(4);
    let x = at_zero(&act, &[1, 2, 3]);
    let same = relative_profile(&act, &seq, &x, &x, 4).unwrap();
    assert!(same.rows.iter().all(|r| r.count == BigUint::from(1u32) && r.value == 0.0));
    let zero = AFinSet::zero(act.target());
    let rel = relative_profile(&act, &seq, &x, &zero, 4).unwrap();
    let abs = entropy_profile(&act, &seq, &x, 4).unwrap();
    assert_eq!(rel.rows, abs.rows);
    let y = at_zero(&act, &[2]);
    let p = relative_profile(&act, &seq, &x, &y, 5).unwrap();
    for r in &p.rows {
        assert_eq!(r.count, BigUint::from(2u32).pow(r.f_size as u32));
        assert!((r.value - LN2).abs() < 1e-12);
    }
    assert!(p.non_increasing());
}

#[test]
fn relative_counts_agree_with_covering_search() {
    // Y = {0, e_0, 3e_0} is not a subgroup, so both paths are exercised
    let act = shift_nat(4);
    let x = at_zero(&act, &[1, 2]);
    let y = at_zero(&act, &[1, 3]);
    let seq = dyadic_nat();
    let p = relative_profile(&act, &seq, &x, &y, 2).unwrap();
    for r in &p.rows {
        let f = nats(0..r.f_size as i64);
        let tx = trajectory(&act, &f, &x).unwrap();
        let ty = trajectory(&act, &f, &y).unwrap();
        assert_eq!(r.count, BigUint::from(covering_number(&tx, &ty).unwrap().0));
    }
}

#[test]
fn induced_action_examples() {
    let act = shift_nat(4);
    let ind = induced_actions(&act, &SubgroupSpec::MultiplesOf(1)).unwrap();
    assert_eq!(ind.sub, act);
    assert_eq!(ind.quotient.target().moduli(), &[] as &[u64]);

    let ind = induced_actions(&act, &SubgroupSpec::MultiplesOf(2)).unwrap();
    assert_eq!(ind.sub, shift_nat(2));
    assert_eq!(ind.quotient, shift_nat(2));
    let t = act.target();
    let x = sparse(t, &[(Element::int(0), 3), (Element::int(2), 2)]);
    let q = ind.quotient.target();
    assert_eq!(ind.project(&x).unwrap(), sparse(q, &[(Element::int(0), 1)]));
    let b = sparse(t, &[(Element::int(1), 2)]);
    let y = ind.to_sub(&b).unwrap();
    assert_eq!(y, sparse(ind.sub.target(), &[(Element::int(1), 1)]));
    assert_eq!(ind.from_sub(&y).unwrap(), b);
    assert!(ind.to_sub(&x).is_err());

    let endo = ActionSpec::endo_power(MonoidCtx::int(), &[4, 4], &[vec![1, 1], vec![0, 1]]).unwrap();
    let ind = induced_actions(&endo, &SubgroupSpec::MultiplesOf(2)).unwrap();
    let mod2 = ActionSpec::endo_power(MonoidCtx::int(), &[2, 2], &[vec![1, 1], vec![0, 1]]).unwrap();
    assert_eq!(ind.sub, mod2);
    assert_eq!(ind.quotient, mod2);

    // the quotient action commutes with the projection
    let s = Element::int(3);
    let v = TargetElem::Dense(vec![3, 1]);
    let lhs = ind.project(&endo.apply(&s, &v).unwrap()).unwrap();
    let rhs = ind.quotient.apply(&s, &ind.project(&v).unwrap()).unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn span_and_fiber_subgroups() {
    let endo = ActionSpec::endo_power(MonoidCtx::int(), &[2, 2], &[vec![1, 1], vec![0, 1]]).unwrap();
    // the first coordinate axis is invariant, the second is not
    let good = SubgroupSpec::SpanOf(vec![TargetElem::Dense(vec![1, 0])]);
    let ind = induced_actions(&endo, &good).unwrap();
    assert!(ind.quotient.target().is_finite());
    let bad = SubgroupSpec::SpanOf(vec![TargetElem::Dense(vec![0, 1])]);
    assert!(induced_actions(&endo, &bad).is_err());

    let act = ActionSpec::shift(MonoidCtx::int(), &[6]).unwrap();
    let ind = induced_actions(&act, &SubgroupSpec::FiberSubgroup(vec![vec![3]])).unwrap();
    let x = at_zero(&act, &[1, 2, 3, 4]);
    let px = ind.project_set(&x).unwrap();
    assert_eq!(px.len(), 3);
    let f = FinSubset::new(&MonoidCtx::int(), (0..4).map(Element::int).collect()).unwrap();
    let n = trajectory_size(&ind.quotient, &f, &px).unwrap();
    assert_eq!(n, BigUint::from(3u32).pow(4));
    assert_eq!(n, BigUint::from(trajectory(&ind.quotient, &f, &px).unwrap().len()));
}

#[test]
fn witness_examples() {
    let act = shift_nat(4);
    let b = SubgroupSpec::MultiplesOf(2);
    let inside = at_zero(&act, &[2]);
    let w = witness_subset(&inside, &b).unwrap();
    assert_eq!(w.y, inside.difference_set(&inside).unwrap());
    assert_eq!(w.mu, 1);
    let w = witness_subset(&at_zero(&act, &[1]), &b).unwrap();
    assert_eq!(w.y, AFinSet::zero(act.target()));
    assert_eq!((w.mu, w.classes), (2, 2));
    let w = witness_subset(&at_zero(&act, &[1, 2]), &b).unwrap();
    assert_eq!(w.y, at_zero(&act, &[2]));
    assert_eq!(w.mu, 2);
    w.cover.verify().unwrap();
}

#[test]
fn addition_examples() {
    let seq = dyadic_nat();
    let act = shift_nat(4);
    let x = at_zero(&act, &[1, 2, 3]);
    let y = at_zero(&act, &[2]);
    let ind = induced_actions(&act, &SubgroupSpec::MultiplesOf(2)).unwrap();
    let rep = addition_report(&ind, &[x.clone()], &[y.clone()], &seq, 5).unwrap();
    let case = &rep.cases[0];
    assert_eq!(case.z, at_zero(&act, &[1]));
    assert_eq!(case.z.minkowski_sum(&y).unwrap(), x);
    assert!(case.exact() && case.superadditive());
    for r in &case.rows[1..] {
        assert!((r.value_whole - 2.0 * LN2).abs() < 1e-12);
        assert!((r.value_sub - LN2).abs() < 1e-12);
        assert!((r.value_quotient - LN2).abs() < 1e-12);
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.whole, &r.sub * &r.quotient);
    }

    let whole = induced_actions(&act, &SubgroupSpec::MultiplesOf(1)).unwrap();
    let rep = addition_report(&whole, &[at_zero(&act, &[0])], &[x.clone()], &seq, 4).unwrap();
    assert!(rep.cases[0].rows.iter().all(|r| r.residual == 0.0));

    let fin = AbelianTarget::finite(&[4]).unwrap();
    let triv = ActionSpec::trivial(MonoidCtx::nat(), fin.clone());
    let ind = induced_actions(&triv, &SubgroupSpec::MultiplesOf(2)).unwrap();
    let d = |v: u64| TargetElem::Dense(vec![v]);
    let xs = AFinSet::new(&fin, vec![d(0), d(1)]).unwrap();
    let ys = AFinSet::new(&fin, vec![d(0), d(2)]).unwrap();
    let rep = addition_report(&ind, &[xs], &[ys], &seq, 5).unwrap();
    let last = rep.cases[0].rows.last().unwrap();
    assert!(last.value_whole < 0.1 && last.value_sub < 0.1 && last.value_quotient < 0.1);
    assert!(rep.cases[0].superadditive());
}

#[test]
fn exact_log_comparison() {
    let b = |x: u64| BigUint::from(x);
    assert!(log_ratio_le(&b(4), 2, &b(2), 1));
    assert!(log_ratio_le(&b(4), 2, &b(2), 1) && log_ratio_le(&b(2), 1, &b(4), 2));
    assert!(!log_ratio_le(&b(5), 2, &b(2), 1));
    assert!(log_ratio_le(&b(3), 2, &b(2), 1));
    // large exponents fall back to logarithms
    assert!(log_ratio_le(&b(2), 20_001, &b(2), 20_000));
    assert!(!log_ratio_le(&b(3), 20_000, &b(2), 20_001));
}

// --- random instances -----------------------------------------------------

fn coord_elem(ctx: &MonoidCtx, p: &[i64]) -> Element {
    if p.len() == 1 {
        Element::int(p[0])
    } else {
        let _ = ctx;
        Element::vector(p)
    }
}

/// A random `X ∋ 0` with support of at most three positions, either on a line
/// along `dir` or scattered.
fn random_x(rng: &mut ChaCha8Rng, act: &ActionSpec, base: &[i64], dir: &[i64], scattered: bool) -> AFinSet {
    let t = act.target();
    let ctx = act.monoid();
    let m = t.moduli().to_vec();
    let width = rng.gen_range(1..=3i64);
    let positions: Vec<Element> = (0..width)
        .map(|j| {
            let p: Vec<i64> = if scattered {
                base.iter().map(|b| b + rng.gen_range(0..3)).collect()
            } else {
                base.iter().zip(dir).map(|(b, d)| b + j * d).collect()
            };
            coord_elem(ctx, &p)
        })
        .filter(|e| ctx.contains(e))
        .collect();
    let size = rng.gen_range(2..=4);
    let mut v = vec![t.zero()];
    for _ in 1..size {
        let mut map = BTreeMap::new();
        for p in &positions {
            if rng.gen_bool(0.6) {
                map.insert(p.clone(), m.iter().map(|&mi| rng.gen_range(0..mi)).collect::<Vec<u64>>());
            }
        }
        v.push(t.canonicalize(TargetElem::Sparse(map)).unwrap());
    }
    AFinSet::new(t, v).unwrap()
}

#[test]
fn trajectory_counts_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cases: Vec<(MonoidCtx, Vec<i64>, Vec<Vec<i64>>)> = vec![
        (MonoidCtx::int(), vec![-1], vec![vec![1], vec![2]]),
        (MonoidCtx::nat(), vec![0], vec![vec![1], vec![2]]),
        (MonoidCtx::int_vec(2).unwrap(), vec![0, 0], vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![1, -1]]),
        (MonoidCtx::punctured_quadrant(), vec![1, 1], vec![vec![1, 0], vec![0, 1], vec![1, 1]]),
    ];
    for i in 0..240 {
        let (ctx, base, dirs) = &cases[i % cases.len()];
        let fiber: &[u64] = [&[2u64][..], &[3], &[2, 2], &[4]][(i / 4) % 4];
        let act = ActionSpec::shift(ctx.clone(), fiber).unwrap();
        let dir = &dirs[rng.gen_range(0..dirs.len())];
        let x = random_x(&mut rng, &act, base, dir, i % 5 == 0);
        // F: a box, a line or a random scatter
        let side = rng.gen_range(1..=3i64);
        let mut pts: Vec<Vec<i64>> = match (base.len(), i % 3) {
            (1, 0) => (0..rng.gen_range(1..=6)).map(|k| vec![base[0] + 1 + k]).collect(),
            (1, _) => (0..4).map(|_| vec![base[0] + 1 + rng.gen_range(0..8)]).collect(),
            (_, 0) => (0..side).flat_map(|a| (0..side).map(move |b| vec![1 + a, 1 + b])).collect(),
            (_, 1) => (0..4).map(|k| vec![1 + k * dir[0].abs(), 3 + k * dir[1]]).collect(),
            _ => (0..4).map(|_| vec![1 + rng.gen_range(0..4), 1 + rng.gen_range(0..4)]).collect(),
        };
        pts.retain(|p| ctx.contains(&coord_elem(ctx, p)));
        if pts.is_empty() {
            continue;
        }
        let f = FinSubset::from_unsorted(ctx, pts.iter().map(|p| coord_elem(ctx, p)).collect());
        let counted = trajectory_size(&act, &f, &x).unwrap();
        let listed = trajectory(&act, &f, &x).unwrap().len();
        assert_eq!(counted, BigUint::from(listed), "case {i}: F={:?} X={x}", f.elems());
    }
}

fn random_dense(rng: &mut ChaCha8Rng, t: &AbelianTarget, n: usize) -> AFinSet {
    let mut v = vec![t.zero()];
    for _ in 1..n {
        v.push(TargetElem::Dense(t.moduli().iter().map(|&m| rng.gen_range(0..m)).collect()));
    }
    AFinSet::new(t, v).unwrap()
}

fn random_matrix_action(rng: &mut ChaCha8Rng) -> ActionSpec {
    loop {
        let m = [2u64, 3, 4][rng.gen_range(0..3)];
        let d = rng.gen_range(1..=2);
        let rows: Vec<Vec<i64>> = (0..d).map(|_| (0..d).map(|_| rng.gen_range(0..m as i64)).collect()).collect();
        if let Ok(a) = ActionSpec::endo_power(MonoidCtx::int(), &vec![m; d], &rows) {
            return a;
        }
    }
}

#[test]
fn trajectory_lemmas_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let z = MonoidCtx::int();
    for _ in 0..60 {
        let act = random_matrix_action(&mut rng);
        let t = act.target().clone();
        let x = random_dense(&mut rng, &t, 3);
        let y = random_dense(&mut rng, &t, 3);
        let a: Vec<i64> = (0..3).map(|_| rng.gen_range(-4..4)).collect();
        let f = FinSubset::from_unsorted(&z, a.iter().map(|&k| Element::int(k)).collect());
        let g = FinSubset::from_unsorted(&z, (0..2).map(|_| Element::int(rng.gen_range(5..9))).collect());
        let tf = |s: &FinSubset, x: &AFinSet| trajectory(&act, s, x).unwrap();
        // disjoint F, F'
        assert_eq!(tf(&f.union(&g).unwrap(), &x), tf(&f, &x).minkowski_sum(&tf(&g, &x)).unwrap());
        // sums
        assert_eq!(tf(&f, &x.minkowski_sum(&y).unwrap()), tf(&f, &x).minkowski_sum(&tf(&f, &y)).unwrap());
        // products: {0,1}·{0,2} is a disjoint union of translates, {0,1}·{0,1} is not
        let p = FinSubset::new(&z, vec![Element::int(0), Element::int(1)]).unwrap();
        let q = FinSubset::new(&z, vec![Element::int(0), Element::int(2)]).unwrap();
        assert_eq!(tf(&p.product(&q).unwrap(), &x), tf(&p, &tf(&q, &x)));
        assert!(tf(&p.product(&p).unwrap(), &x).is_subset(&tf(&p, &tf(&p, &x))));
        // monotone in X
        let xy = x.union(&y).unwrap();
        assert!(trajectory_size(&act, &f, &x).unwrap() <= trajectory_size(&act, &f, &xy).unwrap());
        // projection
        let ind = induced_actions(&act, &SubgroupSpec::MultiplesOf(2)).unwrap();
        let lhs = ind.project_set(&tf(&f, &x)).unwrap();
        let rhs = trajectory(&ind.quotient, &f, &ind.project_set(&x).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn profiles_do_not_increase(seed in any::<u64>(), which in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (spec, base, dirs): (BuilderSpec, Vec<i64>, Vec<Vec<i64>>) = match which {
            0 => (BuilderSpec::SymmetricDyadic, vec![0], vec![vec![1]]),
            1 => (BuilderSpec::Interval { a: ASequence::factorial(), on_integers: false }, vec![0], vec![vec![1]]),
            2 => (BuilderSpec::Box { dim: 2 }, vec![0, 0], vec![vec![1, 0], vec![0, 1], vec![1, 1]]),
            _ => (BuilderSpec::Punctured, vec![1, 1], vec![vec![1, 0], vec![0, 1]]),
        };
        let seq = build_folner(&spec).unwrap();
        let act = ActionSpec::shift(seq.ctx().clone(), &[[2u64, 3][rng.gen_range(0..2)]]).unwrap();
        let dir = dirs[rng.gen_range(0..dirs.len())].clone();
        let x = random_x(&mut rng, &act, &base, &dir, false);
        let p = entropy_profile(&act, &seq, &x, 4).unwrap();
        prop_assert!(p.stopped.is_none());
        prop_assert!(p.non_increasing(), "rows {:?}", p.rows);
        let y = random_x(&mut rng, &act, &base, &dir, false);
        let xy = x.union(&y).unwrap();
        let q = entropy_profile(&act, &seq, &xy, 4).unwrap();
        for (a, b) in p.rows.iter().zip(&q.rows) {
            prop_assert!(a.count <= b.count);
        }
    }
}
