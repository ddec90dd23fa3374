use std::collections::BTreeMap;

use entile_core::algebra::json::{ctx_from_json, ctx_to_json, element_from_json, element_to_json};
use entile_core::algebra::{ActionSpec, QuotientSpec};
use entile_core::{AbelianTarget, Element, Error, MonoidCtx, TargetElem};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

// 3x3 upper unitriangular matrices multiplied entrywise
fn heis_matrix(a: i64, b: i64, c: i64) -> [[i64; 3]; 3] {
    [[1, a, c], [0, 1, b], [0, 0, 1]]
}

fn matmul3(x: [[i64; 3]; 3], y: [[i64; 3]; 3]) -> [[i64; 3]; 3] {
    let mut z = [[0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            z[i][j] = (0..3).map(|k| x[i][k] * y[k][j]).sum();
        }
    }
    z
}

#[test]
fn mul_examples() {
    let z = MonoidCtx::int();
    assert_eq!(z.mul(&Element::int(3), &Element::int(5)).unwrap(), Element::int(8));

    let g = MonoidCtx::semidirect(q(2, 1)).unwrap();
    assert_eq!(
        g.mul(&Element::semi(1, 2, 1), &Element::semi(1, 4, 0)).unwrap(),
        Element::semi(1, 1, 1)
    );

    let h = MonoidCtx::heisenberg();
    let x = Element::heis(1, 0, 0);
    let y = Element::heis(0, 1, 0);
    assert_eq!(h.mul(&x, &y).unwrap(), Element::heis(1, 1, 1));
    assert_eq!(h.mul(&y, &x).unwrap(), Element::heis(1, 1, 0));
}

#[test]
fn heisenberg_law_matches_matrices() {
    let h = MonoidCtx::heisenberg();
    for (a, b, c, d, e, f) in [(1, 2, 3, -4, 5, 6), (0, -1, 7, 2, 2, -3), (3, 3, 3, 3, 3, 3)] {
        let m = matmul3(heis_matrix(a, b, c), heis_matrix(d, e, f));
        let p = h.mul(&Element::heis(a, b, c), &Element::heis(d, e, f)).unwrap();
        assert_eq!(p, Element::heis(m[0][1], m[1][2], m[0][2]));
    }
}

#[test]
fn inverse_examples() {
    assert_eq!(MonoidCtx::int().inv(&Element::int(7)).unwrap(), Element::int(-7));
    let g = MonoidCtx::semidirect(q(2, 1)).unwrap();
    assert_eq!(g.inv(&Element::semi(1, 1, 1)).unwrap(), Element::semi(-1, 2, -1));
    assert!(matches!(MonoidCtx::nat().inv(&Element::int(1)), Err(Error::NotAGroup(_))));
}

#[test]
fn family_mismatch_is_an_error() {
    let z = MonoidCtx::int();
    assert!(matches!(
        z.mul(&Element::int(1), &Element::rational(1, 2)),
        Err(Error::ContextMismatch(_))
    ));
    assert!(!MonoidCtx::nat().contains(&Element::int(-1)));
    assert!(!MonoidCtx::punctured_quadrant().contains(&Element::vector(&[0, 1])));
    assert!(MonoidCtx::punctured_quadrant().contains(&Element::vector(&[1, 0])));
}

#[test]
fn word_lengths() {
    let z = MonoidCtx::int();
    assert_eq!(z.word_length(&Element::int(0), 10).unwrap(), 0);
    assert_eq!(z.word_length(&Element::int(5), 10).unwrap(), 5);
    assert!(z.word_length(&Element::int(50), 10).unwrap_err().is_budget());
    let z2 = MonoidCtx::int_vec(2).unwrap();
    assert_eq!(z2.word_length(&Element::vector(&[2, 3]), 10).unwrap(), 5);
    // taxicab norm is the word length for the standard generators
    for a in -3i64..=3 {
        for b in -3i64..=3 {
            let w = z2.word_length(&Element::vector(&[a, b]), 10).unwrap();
            assert_eq!(w as i64, a.abs() + b.abs());
        }
    }
    // [x, y] = (0,0,1) has length 4 in the Heisenberg group
    let h = MonoidCtx::heisenberg();
    assert_eq!(h.word_length(&Element::heis(0, 0, 1), 8).unwrap(), 4);
}

#[test]
fn custom_generators_must_be_symmetric() {
    let z = MonoidCtx::int();
    assert!(z.clone().with_generators(vec![Element::int(1)]).is_err());
    assert!(z.clone().with_generators(vec![Element::int(0), Element::int(1), Element::int(-1)]).is_err());
    let z = z.with_generators(vec![Element::int(2), Element::int(-2), Element::int(3), Element::int(-3)]).unwrap();
    assert_eq!(z.word_length(&Element::int(1), 5).unwrap(), 2);
}

#[test]
fn ball_order_is_by_sphere() {
    let z = MonoidCtx::int();
    let b = z.ball_order(5, 10).unwrap();
    assert_eq!(b, vec![Element::int(0), Element::int(-1), Element::int(1), Element::int(-2), Element::int(2)]);
}

fn naive_matpow(m: &[Vec<i64>], k: u32, modulus: i64, x: &[i64]) -> Vec<i64> {
    let mut v = x.to_vec();
    for _ in 0..k {
        v = m
            .iter()
            .map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum::<i64>().rem_euclid(modulus))
            .collect();
    }
    v
}

#[test]
fn action_examples() {
    let t = AbelianTarget::finite(&[3]).unwrap();
    let triv = ActionSpec::trivial(MonoidCtx::int(), t);
    let x = TargetElem::Dense(vec![2]);
    assert_eq!(triv.apply(&Element::int(9), &x).unwrap(), x);

    let sh = ActionSpec::shift(MonoidCtx::nat(), &[2]).unwrap();
    let e0 = sh.target().basis(&Element::int(0), &[1]).unwrap();
    let e2 = sh.target().basis(&Element::int(2), &[1]).unwrap();
    assert_eq!(sh.apply(&Element::int(2), &e0).unwrap(), e2);

    let m = vec![vec![0, 1], vec![1, 1]];
    let ep = ActionSpec::endo_power(MonoidCtx::nat(), &[5, 5], &m).unwrap();
    let y = ep.apply(&Element::int(2), &TargetElem::Dense(vec![1, 0])).unwrap();
    assert_eq!(y, TargetElem::Dense(vec![1, 1]));
    for k in 0..12u32 {
        let y = ep.apply(&Element::int(k as i64), &TargetElem::Dense(vec![3, 4])).unwrap();
        assert_eq!(y, TargetElem::Dense(naive_matpow(&m, k, 5, &[3, 4]).iter().map(|&v| v as u64).collect()));
    }
}

#[test]
fn integer_powers_need_invertible_matrices() {
    assert!(ActionSpec::endo_power(MonoidCtx::int(), &[4, 4], &[vec![2, 0], vec![0, 1]]).is_err());
    let a = ActionSpec::endo_power(MonoidCtx::int(), &[4, 4], &[vec![1, 1], vec![0, 1]]).unwrap();
    let x = TargetElem::Dense(vec![1, 3]);
    let y = a.apply(&Element::int(-1), &x).unwrap();
    assert_eq!(a.apply(&Element::int(1), &y).unwrap(), x);
    // ill-defined entry: Z/2 -> Z/4 by 1
    assert!(ActionSpec::endo_power(MonoidCtx::nat(), &[4, 2], &[vec![1, 1], vec![0, 1]]).is_err());
}

#[test]
fn quotient_sections_split() {
    let specs = vec![
        QuotientSpec::DropLastCoord { dim: 2 },
        QuotientSpec::DropLastCoord { dim: 3 },
        QuotientSpec::SecondCoord { q: q(2, 1) },
        QuotientSpec::CenterQuotient,
        QuotientSpec::ModN { n: 3 },
        QuotientSpec::ModN { n: 1 },
        QuotientSpec::ByFinite { moduli: vec![4, 6], divisors: vec![2, 6] },
        QuotientSpec::DihedralParity,
    ];
    for s in specs {
        s.validate().unwrap();
        let g = s.group();
        let k = s.quotient();
        let id = g.identity();
        assert_eq!(s.section(&k.identity()).unwrap(), id, "{}", s.name());
        let sample = sample_group(&g);
        for a in &sample {
            let pa = s.project(a).unwrap();
            assert_eq!(s.project(&s.section(&pa).unwrap()).unwrap(), pa);
            for b in &sample {
                let lhs = s.project(&g.mul(a, b).unwrap()).unwrap();
                let rhs = k.mul(&pa, &s.project(b).unwrap()).unwrap();
                assert_eq!(lhs, rhs, "{} not a homomorphism", s.name());
            }
            // g σ(π g)^{-1} lies in the kernel and round-trips through ι
            let h = g.mul(a, &g.inv(&s.section(&pa).unwrap()).unwrap()).unwrap();
            let pre = s.kernel_preimage(&h).unwrap().expect("kernel element");
            assert_eq!(s.embed(&pre).unwrap(), h);
        }
    }
}

fn sample_group(g: &MonoidCtx) -> Vec<Element> {
    if g.is_finite() {
        return g.elements().unwrap();
    }
    match g.family() {
        entile_core::Family::SemidirectRatZ(_) => {
            vec![Element::semi(0, 1, 0), Element::semi(1, 2, 1), Element::semi(-3, 4, -2), Element::semi(5, 1, 3)]
        }
        _ => g.ball_order(30, 6).unwrap(),
    }
}

#[test]
fn json_round_trip() {
    let ctxs = vec![
        MonoidCtx::int(),
        MonoidCtx::nat_vec(2).unwrap(),
        MonoidCtx::cyclic(&[2, 3]).unwrap(),
        MonoidCtx::rational(),
        MonoidCtx::semidirect(q(2, 3)).unwrap(),
        MonoidCtx::heisenberg(),
        MonoidCtx::direct_sum(vec![vec![2], vec![3]]).unwrap(),
        MonoidCtx::punctured_quadrant(),
        MonoidCtx::infinite_dihedral(),
    ];
    for c in ctxs {
        let back = ctx_from_json(&ctx_to_json(&c)).unwrap();
        assert_eq!(back, c);
    }
    let g = MonoidCtx::semidirect(q(2, 3)).unwrap();
    let e = Element::semi(-7, 6, 12);
    let j = element_to_json(&e);
    assert_eq!(j, serde_json::json!(["-7/6", "12"]));
    assert_eq!(element_from_json(&g, &j).unwrap(), e);
    let big = Element::Int("123456789012345678901234567890".parse::<BigInt>().unwrap());
    assert_eq!(element_from_json(&MonoidCtx::int(), &element_to_json(&big)).unwrap(), big);
    let ds = MonoidCtx::direct_sum(vec![vec![2], vec![3]]).unwrap();
    let e = element_from_json(&ds, &serde_json::json!({"0": ["1"], "1": ["3"], "4": ["0"]})).unwrap();
    assert_eq!(e, Element::Sparse(BTreeMap::from([(0, vec![1])])));
}

#[test]
fn quotient_and_action_json() {
    use entile_core::algebra::json::{action_from_json, quotient_from_json, quotient_to_json};
    let qs = vec![
        QuotientSpec::DropLastCoord { dim: 3 },
        QuotientSpec::SecondCoord { q: q(2, 3) },
        QuotientSpec::CenterQuotient,
        QuotientSpec::ModN { n: 4 },
        QuotientSpec::ByFinite { moduli: vec![4, 6], divisors: vec![2, 3] },
        QuotientSpec::DihedralParity,
    ];
    for x in qs {
        assert_eq!(quotient_from_json(&quotient_to_json(&x)).unwrap(), x);
    }
    assert!(quotient_from_json(&serde_json::json!({"kind": "by_finite", "moduli": [4], "divisors": [3]})).is_err());
    assert!(quotient_from_json(&serde_json::json!("sideways")).is_err());

    let a = action_from_json(&serde_json::json!({"kind": "shift", "index": "nat", "fiber": [4]})).unwrap();
    assert_eq!(a.target().moduli(), &[4]);
    assert!(action_from_json(&serde_json::json!({"kind": "shift", "index": "nat"})).is_err());
    assert!(action_from_json(&serde_json::json!({"kind": "spin"})).is_err());
}

// random elements for every family
fn arb_element(ctx: MonoidCtx) -> BoxedStrategy<Element> {
    use entile_core::Family::*;
    let small = -6i64..=6;
    match ctx.family().clone() {
        IntAdd => small.prop_map(Element::int).boxed(),
        NatAdd => (0i64..=12).prop_map(Element::int).boxed(),
        IntVecAdd(d) => prop::collection::vec(small, d).prop_map(|v| Element::vector(&v)).boxed(),
        NatVecAdd(d) => prop::collection::vec(0i64..=6, d).prop_map(|v| Element::vector(&v)).boxed(),
        CyclicProd(m) => m
            .iter()
            .map(|&mi| (0..mi).boxed())
            .collect::<Vec<_>>()
            .prop_map(Element::Residues)
            .boxed(),
        RationalAdd => (small, 1i64..=6).prop_map(|(p, d)| Element::rational(p, d)).boxed(),
        SemidirectRatZ(_) => ((-6i64..=6), 1i64..=6, -3i64..=3).prop_map(|(p, d, n)| Element::semi(p, d, n)).boxed(),
        Heisenberg3 => (small.clone(), small.clone(), small).prop_map(|(a, b, c)| Element::heis(a, b, c)).boxed(),
        DirectSum(_) => prop::collection::btree_map(0u64..6, 0u64..6, 0..4)
            .prop_map(move |m| {
                let raw = m.into_iter().map(|(k, v)| (k, vec![v])).collect();
                ctx.canonicalize(Element::Sparse(raw)).unwrap()
            })
            .boxed(),
        PuncturedQuadrant => (0i64..=6, 0i64..=6)
            .prop_map(|(a, b)| if a == 0 { Element::vector(&[0, 0]) } else { Element::vector(&[a, b]) })
            .boxed(),
        InfiniteDihedral => (small, 0u8..2).prop_map(|(x, e)| Element::dihedral(x, e)).boxed(),
    }
}

fn families() -> Vec<MonoidCtx> {
    vec![
        MonoidCtx::int(),
        MonoidCtx::nat(),
        MonoidCtx::int_vec(3).unwrap(),
        MonoidCtx::nat_vec(2).unwrap(),
        MonoidCtx::cyclic(&[2, 3, 4]).unwrap(),
        MonoidCtx::rational(),
        MonoidCtx::semidirect(q(2, 1)).unwrap(),
        MonoidCtx::semidirect(q(-2, 3)).unwrap(),
        MonoidCtx::heisenberg(),
        MonoidCtx::direct_sum(vec![vec![2], vec![3]]).unwrap(),
        MonoidCtx::punctured_quadrant(),
        MonoidCtx::infinite_dihedral(),
    ]
}

fn arb_triple() -> impl Strategy<Value = (MonoidCtx, Element, Element, Element)> {
    prop::sample::select(families()).prop_flat_map(|c| {
        let e = arb_element(c.clone());
        (Just(c), e.clone(), e.clone(), e)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn monoid_laws((ctx, a, b, c) in arb_triple()) {
        prop_assert!(ctx.contains(&a));
        let ab = ctx.mul(&a, &b).unwrap();
        prop_assert!(ctx.contains(&ab));
        prop_assert_eq!(ctx.mul(&ab, &c).unwrap(), ctx.mul(&a, &ctx.mul(&b, &c).unwrap()).unwrap());
        let id = ctx.identity();
        prop_assert_eq!(ctx.mul(&id, &a).unwrap(), a.clone());
        prop_assert_eq!(ctx.mul(&a, &id).unwrap(), a.clone());
        if ctx.is_group() {
            let ai = ctx.inv(&a).unwrap();
            prop_assert_eq!(ctx.mul(&a, &ai).unwrap(), id.clone());
            prop_assert_eq!(ctx.mul(&ai, &a).unwrap(), id.clone());
        }
        // cancellativity on both sides
        if ctx.mul(&a, &b).unwrap() == ctx.mul(&a, &c).unwrap() { prop_assert_eq!(&b, &c); }
        if ctx.mul(&b, &a).unwrap() == ctx.mul(&c, &a).unwrap() { prop_assert_eq!(&b, &c); }
        // left quotient solves c·t = v whenever a solution exists
        let v = ctx.mul(&c, &b).unwrap();
        prop_assert_eq!(ctx.left_quotient(&v, &b), Some(c.clone()));
        let w = ctx.mul(&b, &c).unwrap();
        prop_assert_eq!(ctx.right_quotient(&w, &b), Some(c));
    }

    #[test]
    fn shift_is_an_injective_action((ctx, s, s2, t) in arb_triple(), v in 1u64..4) {
        let act = ActionSpec::shift(ctx.clone(), &[4]).unwrap();
        let tg = act.target().clone();
        let x = tg.basis(&t, &[v]).unwrap();
        let id = ctx.identity();
        prop_assert_eq!(act.apply(&id, &x).unwrap(), x.clone());
        let lhs = act.apply(&ctx.mul(&s, &s2).unwrap(), &x).unwrap();
        let rhs = act.apply(&s, &act.apply(&s2, &x).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        let y = tg.basis(&id, &[1]).unwrap();
        let xy = tg.add(&x, &y);
        prop_assert_eq!(act.apply(&s, &xy).unwrap(), tg.add(&act.apply(&s, &x).unwrap(), &act.apply(&s, &y).unwrap()));
        if t != id {
            prop_assert_ne!(act.apply(&s, &x).unwrap(), act.apply(&s, &y).unwrap());
        }
    }

    #[test]
    fn matrix_powers_compose(a in -20i64..20, b in -20i64..20, x0 in 0u64..6, x1 in 0u64..6) {
        let act = ActionSpec::endo_power(MonoidCtx::int(), &[6, 6], &[vec![1, 1], vec![1, 2]]).unwrap();
        let x = TargetElem::Dense(vec![x0, x1]);
        let lhs = act.apply(&Element::int(a + b), &x).unwrap();
        let rhs = act.apply(&Element::int(a), &act.apply(&Element::int(b), &x).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(act.apply(&Element::int(0), &x).unwrap(), x);
    }
}
