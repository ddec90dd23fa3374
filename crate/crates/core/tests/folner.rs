use entile_core::folner::{
    build_folner, cif_extract, defect, folner_report, rational_digits, ASequence, BuilderSpec, Exhaustion,
};
use entile_core::finset::FinSubset;
use entile_core::{Element, MonoidCtx};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn r(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn dyadic_z() -> entile_core::folner::FolnerSeq {
    build_folner(&BuilderSpec::Interval { a: ASequence::power(2), on_integers: true }).unwrap()
}

#[test]
fn builder_examples() {
    let s = build_folner(&BuilderSpec::Interval { a: ASequence::factorial(), on_integers: false }).unwrap();
    let g3 = s.gen(3).unwrap();
    assert_eq!(g3.elems(), (0..6).map(Element::int).collect::<Vec<_>>().as_slice());

    let phi = build_folner(&BuilderSpec::PhiQ { q: r(1, 1) }).unwrap();
    let g2 = phi.gen(2).unwrap();
    let want: Vec<Element> = (0..8).map(|i| Element::rational(i, 2)).collect();
    assert_eq!(g2.elems(), want.as_slice());

    let p = build_folner(&BuilderSpec::Punctured).unwrap();
    assert_eq!(p.gen(0).unwrap().elems(), &[Element::vector(&[0, 0])]);
    assert_eq!(p.gen(1).unwrap().elems(), &[Element::vector(&[1, 1])]);

    let d = build_folner(&BuilderSpec::SymmetricDyadic).unwrap();
    assert_eq!(d.gen(0).unwrap().elems(), &[Element::int(0)]);
    assert_eq!(d.gen(3).unwrap().elems(), (-3..=4).map(Element::int).collect::<Vec<_>>().as_slice());

    assert!(build_folner(&BuilderSpec::Interval { a: ASequence::listed_u64(&[1, 2, 5]), on_integers: false }).is_err());
    assert!(build_folner(&BuilderSpec::Interval { a: ASequence::listed_u64(&[2, 4]), on_integers: false }).is_err());
}

#[test]
fn phi_q_sizes_match_closed_form() {
    // |E_n| = 2^n a^{2n} b^{2n} n!
    for (a, b) in [(1i64, 1i64), (2, 1), (2, 3), (-1, 2)] {
        let s = build_folner(&BuilderSpec::PhiQ { q: r(a, b) }).unwrap();
        let mut fact = 1u64;
        for n in 0..=3u32 {
            if n > 0 {
                fact *= n as u64;
            }
            let want = BigUint::from(2u64.pow(n)) * BigUint::from((a.unsigned_abs() * b as u64).pow(2 * n)) * fact;
            assert_eq!(s.size(n as usize).unwrap(), want, "q={a}/{b} n={n}");
            if n <= 2 {
                assert_eq!(BigUint::from(s.gen(n as usize).unwrap().len()), want);
            }
        }
    }
}

#[test]
fn defect_examples() {
    let z = MonoidCtx::int();
    let f = FinSubset::new(&z, (0..8).map(Element::int).collect()).unwrap();
    assert_eq!(defect(&f, &Element::int(1)).unwrap(), r(1, 8));
    assert_eq!(defect(&f, &Element::int(0)).unwrap(), BigRational::zero());

    let c = MonoidCtx::cyclic(&[6]).unwrap();
    let g = FinSubset::new(&c, c.elements().unwrap()).unwrap();
    for s in c.elements().unwrap() {
        assert!(defect(&g, &s).unwrap().is_zero());
    }

    let pq = MonoidCtx::punctured_quadrant();
    let f = FinSubset::new(&pq, vec![
        Element::vector(&[2, 2]), Element::vector(&[2, 3]), Element::vector(&[3, 2]), Element::vector(&[3, 3]),
    ])
    .unwrap();
    assert_eq!(defect(&f, &Element::vector(&[1, 1])).unwrap(), r(3, 4));
    assert!(defect(&f, &Element::int(1)).is_err());
}

#[test]
fn cif_examples() {
    let c = MonoidCtx::cyclic(&[3, 2]).unwrap();
    let fg = build_folner(&BuilderSpec::FiniteGroup { moduli: vec![3, 2] }).unwrap();
    let cif = cif_extract(&fg, &Exhaustion::balls(&c).unwrap(), 4, 10).unwrap();
    assert_eq!(cif.k, vec![0, 1, 2, 3, 4]);

    let z = dyadic_z();
    let balls = Exhaustion::balls(&MonoidCtx::int()).unwrap();
    let cif = cif_extract(&z, &balls, 3, 40).unwrap();
    assert_eq!(cif.k, vec![0, 1, 3, 4]);
    cif.verify(&z, &balls).unwrap();
    // oracle: k_n = min{k > k_{n-1} : 2^k > n^2}
    let cif = cif_extract(&z, &balls, 12, 40).unwrap();
    let mut prev = 0;
    for n in 1..=12usize {
        let k = (prev + 1..).find(|&k| (1usize << k) > n * n).unwrap();
        assert_eq!(cif.k[n], k);
        prev = k;
    }

    let err = cif_extract(&z, &balls, 3, 3).unwrap_err();
    assert!(err.is_budget());
    assert!(err.to_string().contains("n=3"), "{err}");
    assert!(cif_extract(&z, &balls, 3, 2).unwrap_err().is_budget());
}

#[test]
fn rational_digit_examples() {
    let a = ASequence::listed_u64(&[1, 2, 6, 24]);
    let d = rational_digits(&BigRational::zero(), &a, 12).unwrap();
    assert_eq!((d.n_q, d.k0.clone(), d.k.len()), (0, BigInt::zero(), 0));
    let d = rational_digits(&r(5, 6), &a, 12).unwrap();
    assert_eq!((d.n_q, d.k0.clone()), (2, BigInt::zero()));
    assert_eq!(d.k, vec![BigUint::from(1u8), BigUint::from(2u8)]);
    let d = rational_digits(&r(7, 4), &a, 12).unwrap();
    assert_eq!(d.n_q, 3);
    assert_eq!(d.k0, BigInt::one());
    assert_eq!(d.k, vec![BigUint::from(1u8), BigUint::from(1u8), BigUint::from(2u8)]);
    assert!(rational_digits(&r(1, 7), &ASequence::power(2), 12).unwrap_err().is_budget());
}

proptest! {
    #[test]
    fn rational_digits_reconstruct(p in -500i64..500, q in 1i64..=16) {
        let a = ASequence::factorial_scaled(2);
        let x = r(p, q);
        let d = rational_digits(&x, &a, 20).unwrap();
        let mut sum = BigRational::from_integer(d.k0.clone());
        for (i, k) in d.k.iter().enumerate() {
            let ratio = a.ratio(i + 1).unwrap();
            prop_assert!(k < &ratio);
            sum += BigRational::new(BigInt::from(k.clone()), BigInt::from(a.term(i + 1).unwrap()));
        }
        prop_assert_eq!(&sum, &x);
        // minimality
        if d.n_q > 0 {
            prop_assert!(!(a.term(d.n_q - 1).unwrap() % x.denom().magnitude()).is_zero());
        }
    }
}

#[test]
fn report_trends() {
    let fg = build_folner(&BuilderSpec::FiniteGroup { moduli: vec![4] }).unwrap();
    let rep = folner_report(&fg, &[Element::residues(&[1])], 1, 4).unwrap();
    assert!(rep.rows.iter().all(|row| row.defect.is_zero()));

    let dy = build_folner(&BuilderSpec::SymmetricDyadic).unwrap();
    let rep = folner_report(&dy, &[Element::int(1)], 1, 6).unwrap();
    for row in &rep.rows {
        assert_eq!(row.defect, r(1, 1 << row.n));
    }

    let phi = build_folner(&BuilderSpec::PhiQ { q: r(2, 3) }).unwrap();
    let one = Element::rational(1, 1);
    let rep = folner_report(&phi, &[one.clone()], 1, 4).unwrap();
    assert!(rep.trends[0].strictly_decreasing);
    // progression shortcut agrees with enumerating the set
    for n in 0..=2 {
        let f = phi.gen(n).unwrap();
        for s in [r(1, 1), r(1, 3), r(-5, 7), r(100, 1)] {
            let s = Element::Rational(s);
            assert_eq!(phi.defect_at(n, &s).unwrap(), defect(&f, &s).unwrap());
        }
    }
}

#[test]
fn sizes_of_products_and_rationals() {
    let ds = build_folner(&BuilderSpec::DirectSum {
        parts: vec![
            BuilderSpec::FiniteGroup { moduli: vec![2] },
            BuilderSpec::FiniteGroup { moduli: vec![3] },
        ],
    })
    .unwrap();
    for n in 0..=4 {
        let want: usize = (0..n).map(|i| if i % 2 == 0 { 2 } else { 3 }).product();
        assert_eq!(ds.gen(n).unwrap().len(), want);
        assert_eq!(ds.size(n).unwrap(), BigUint::from(want));
    }
    let a = ASequence::factorial();
    let c = ASequence::power(2);
    let rs = build_folner(&BuilderSpec::Rational { a: a.clone(), c: c.clone() }).unwrap();
    for n in 0..=4 {
        let want = a.term(n).unwrap() * c.term(n).unwrap();
        assert_eq!(BigUint::from(rs.gen(n).unwrap().len()), want);
    }
    assert!(build_folner(&BuilderSpec::Rational { a: ASequence::power(2), c }).is_err());
}

#[test]
fn every_builder_has_shrinking_defects() {
    let q = |x: BigRational| Element::Rational(x);
    let cases: Vec<(BuilderSpec, Vec<Element>, usize)> = vec![
        (BuilderSpec::Interval { a: ASequence::power(2), on_integers: false }, vec![Element::int(1)], 6),
        (BuilderSpec::SymmetricDyadic, vec![Element::int(1), Element::int(-1)], 6),
        (BuilderSpec::Box { dim: 2 }, vec![Element::vector(&[1, 0]), Element::vector(&[0, -1])], 6),
        (BuilderSpec::PhiQ { q: r(2, 3) }, vec![q(r(1, 1)), q(r(1, 6))], 3),
        (BuilderSpec::Rational { a: ASequence::factorial(), c: ASequence::power(2) }, vec![q(r(1, 1)), q(r(-1, 2))], 6),
        (BuilderSpec::Punctured, vec![Element::vector(&[1, 1]), Element::vector(&[2, 5])], 6),
    ];
    for (spec, samples, depth) in cases {
        let s = build_folner(&spec).unwrap();
        let rep = folner_report(&s, &samples, 2, depth).unwrap();
        for t in &rep.trends {
            assert!(t.non_increasing, "{} {}", spec.name(), t.s);
            let first = rep.rows.iter().find(|row| row.s == t.s).unwrap().defect.clone();
            assert!(t.last < first, "{} {}", spec.name(), t.s);
        }
    }
}

#[test]
fn builder_json_round_trip() {
    for spec in [
        BuilderSpec::PhiQ { q: r(2, 3) },
        BuilderSpec::Interval { a: ASequence::factorial(), on_integers: false },
        BuilderSpec::Box { dim: 3 },
        BuilderSpec::DirectSum { parts: vec![BuilderSpec::FiniteGroup { moduli: vec![2, 2] }] },
    ] {
        let v = spec.to_json();
        let back = BuilderSpec::from_json(&v).unwrap();
        assert_eq!(back.to_json(), v);
    }
    let v: serde_json::Value = serde_json::from_str(r#"{"builder":"phi_q","q":"2/3"}"#).unwrap();
    assert_eq!(BuilderSpec::from_json(&v).unwrap().to_json(), BuilderSpec::PhiQ { q: r(2, 3) }.to_json());
}
