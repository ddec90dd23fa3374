use std::collections::HashSet;

use entile_core::finset::FinSubset;
use entile_core::folner::{build_folner, ASequence, BuilderSpec, Exhaustion};
use entile_core::tiling::{
    all_monotile_covers, automorphism_monotile_check, compose_certs, congruentize, extract_tiling_sequence,
    find_monotile_cover, find_translate_into, phi_q_level_cert, phi_q_translates, prefix_monotile,
    progression_cover, word_monotile_cert, Automorphism, ExactCover, LevelTiling, LocalTilingCert, PrefixCert,
    TileCert, WordCert, DEFAULT_TILE_BUDGET,
};
use entile_core::{Element, MonoidCtx};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ints(xs: impl IntoIterator<Item = i64>) -> FinSubset {
    FinSubset::new(&MonoidCtx::int(), xs.into_iter().map(Element::int).collect()).unwrap()
}

fn r(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn k_of(cert: &LocalTilingCert, n: usize) -> Vec<Element> {
    cert.level(n).unwrap().tiling.translates()
}

#[test]
fn cover_examples() {
    let v = ints(-3..7);
    let c = find_monotile_cover(&ints([0]), &v).unwrap().unwrap();
    assert_eq!(c.c, v);

    let c = find_monotile_cover(&ints([0, 1]), &ints(-1..=2)).unwrap().unwrap();
    assert_eq!(c.c, ints([-1, 1]));
    c.verify().unwrap();

    assert!(find_monotile_cover(&ints([0, 1, 3]), &ints(0..=5)).unwrap().is_none());

    // F_1 = [1,2)² = {(1,1)} tiles F_2 = [2,4)² in the punctured quadrant
    let pq = MonoidCtx::punctured_quadrant();
    let sq = |lo: i64, hi: i64| {
        let v = (lo..hi).flat_map(|x| (lo..hi).map(move |y| Element::vector(&[x, y]))).collect();
        FinSubset::new(&pq, v).unwrap()
    };
    let c = find_monotile_cover(&sq(1, 2), &sq(2, 4)).unwrap().unwrap();
    assert_eq!(c.c, sq(1, 3));
    // [2,4)² tiles [4,8)² from translates inside the monoid only
    let c = find_monotile_cover(&sq(2, 4), &sq(4, 8)).unwrap().unwrap();
    let want = FinSubset::new(&pq, [[2, 2], [2, 4], [4, 2], [4, 4]].iter().map(|p| Element::vector(p)).collect()).unwrap();
    assert_eq!(c.c, want);

    // in ℕ no translate may be negative
    let nat = MonoidCtx::nat();
    let t = FinSubset::new(&nat, vec![Element::int(0), Element::int(1)]).unwrap();
    let v = FinSubset::new(&nat, (0..4).map(Element::int).collect()).unwrap();
    assert_eq!(find_monotile_cover(&t, &v).unwrap().unwrap().c.len(), 2);

    assert!(find_monotile_cover(&ints([0]), &FinSubset::empty(&MonoidCtx::int())).is_err());
}

#[test]
fn tampered_certificates_fail() {
    let mut c = find_monotile_cover(&ints([0, 1]), &ints(0..6)).unwrap().unwrap();
    c.verify().unwrap();
    let good = c.clone();
    c.c = ints([0, 1, 4]);
    assert!(c.verify().is_err());
    c.c = ints([0, 2]);
    assert!(c.verify().is_err());
    let back = TileCert::from_json(&good.to_json()).unwrap();
    assert_eq!(back, good);
}

/// Independent oracle: every set of |V|/|T| admissible translates.
fn oracle_tiles(t: &[Vec<i64>], v: &[Vec<i64>]) -> bool {
    if v.len() % t.len() != 0 {
        return false;
    }
    let vs: HashSet<&Vec<i64>> = v.iter().collect();
    let add = |a: &[i64], b: &[i64]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<i64>>();
    let mut cands = Vec::new();
    for x in v {
        let c: Vec<i64> = x.iter().zip(&t[0]).map(|(a, b)| a - b).collect();
        if t.iter().all(|y| vs.contains(&add(&c, y))) && !cands.contains(&c) {
            cands.push(c);
        }
    }
    let k = v.len() / t.len();
    fn choose(
        cands: &[Vec<i64>],
        start: usize,
        k: usize,
        picked: &mut Vec<usize>,
        t: &[Vec<i64>],
        n: usize,
    ) -> bool {
        if picked.len() == k {
            let mut seen = HashSet::new();
            for &i in picked.iter() {
                for y in t {
                    let p: Vec<i64> = cands[i].iter().zip(y).map(|(a, b)| a + b).collect();
                    if !seen.insert(p) {
                        return false;
                    }
                }
            }
            return seen.len() == n;
        }
        for i in start..cands.len() {
            picked.push(i);
            if choose(cands, i + 1, k, picked, t, n) {
                return true;
            }
            picked.pop();
        }
        false
    }
    choose(&cands, 0, k, &mut Vec::new(), t, v.len())
}

fn random_patch(rng: &mut ChaCha8Rng, dim: usize) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let side = 12i64;
    let pt = |rng: &mut ChaCha8Rng, w: i64| (0..dim).map(|_| rng.gen_range(0..w)).collect::<Vec<i64>>();
    let tsize = rng.gen_range(1..=4usize);
    let mut t: Vec<Vec<i64>> = Vec::new();
    while t.len() < tsize {
        let p = pt(rng, 4);
        if !t.contains(&p) {
            t.push(p);
        }
    }
    let mut v: Vec<Vec<i64>> = Vec::new();
    if rng.gen_bool(0.5) {
        // plant a tiling
        for _ in 0..40 {
            let c = pt(rng, side);
            let placed: Vec<Vec<i64>> = t.iter().map(|y| c.iter().zip(y).map(|(a, b)| a + b).collect()).collect();
            if v.len() + placed.len() <= 12 && placed.iter().all(|p| !v.contains(p)) {
                v.extend(placed);
            }
        }
    } else {
        let size = rng.gen_range(1..=12usize);
        while v.len() < size {
            let p = pt(rng, side);
            if !v.contains(&p) {
                v.push(p);
            }
        }
    }
    (t, v)
}

#[test]
fn solver_agrees_with_oracle_on_random_patches() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut positives = 0;
    for case in 0..500 {
        let dim = if case % 2 == 0 { 1 } else { 2 };
        let ctx = if dim == 1 { MonoidCtx::int() } else { MonoidCtx::int_vec(2).unwrap() };
        let (t, v) = random_patch(&mut rng, dim);
        let el = |p: &Vec<i64>| if dim == 1 { Element::int(p[0]) } else { Element::vector(p) };
        let ts = FinSubset::new(&ctx, t.iter().map(el).collect()).unwrap();
        let vs = FinSubset::new(&ctx, v.iter().map(el).collect()).unwrap();
        let got = find_monotile_cover(&ts, &vs).unwrap();
        let want = oracle_tiles(&t, &v);
        assert_eq!(got.is_some(), want, "case {case}: T={t:?} V={v:?}");
        if let Some(c) = got {
            c.verify().unwrap();
            positives += 1;
        }
    }
    assert!(positives > 100, "only {positives} tileable patches");
}

#[test]
fn extraction_examples() {
    let fact = build_folner(&BuilderSpec::Interval { a: ASequence::factorial(), on_integers: false }).unwrap();
    let cert = extract_tiling_sequence(&fact, 4, true, DEFAULT_TILE_BUDGET).unwrap();
    assert_eq!(k_of(&cert, 3), vec![Element::int(0), Element::int(2), Element::int(4)]);
    assert!(cert.congruent);
    cert.verify(Some(&fact)).unwrap();

    let boxes = build_folner(&BuilderSpec::Box { dim: 2 }).unwrap();
    let cert = extract_tiling_sequence(&boxes, 5, true, DEFAULT_TILE_BUDGET).unwrap();
    for n in 1..5usize {
        let s = 1i64 << (n - 1);
        let want: Vec<Element> = [[0, 0], [0, s], [s, 0], [s, s]].iter().map(|p| Element::vector(p)).collect();
        assert_eq!(k_of(&cert, n), want, "n={n}");
    }
    assert!(cert.congruent);
    cert.verify(Some(&boxes)).unwrap();

    let back = LocalTilingCert::from_json(&cert.to_json()).unwrap();
    assert_eq!(back, cert);
    back.verify(Some(&boxes)).unwrap();

    // every interval a-sequence is congruent to depth 6
    let two = build_folner(&BuilderSpec::Interval { a: ASequence::power(3), on_integers: false }).unwrap();
    assert!(extract_tiling_sequence(&two, 6, true, DEFAULT_TILE_BUDGET).unwrap().congruent);
}

#[test]
fn symmetric_dyadic_is_not_congruent() {
    let seq = build_folner(&BuilderSpec::SymmetricDyadic).unwrap();
    let cert = extract_tiling_sequence(&seq, 5, true, DEFAULT_TILE_BUDGET).unwrap();
    cert.verify(Some(&seq)).unwrap();
    assert!(!cert.congruent);
    assert_eq!(k_of(&cert, 1), vec![Element::int(0), Element::int(1)]);
    for n in 2..=5usize {
        let h = 1i64 << (n - 2);
        assert_eq!(k_of(&cert, n), vec![Element::int(-h), Element::int(h)]);
        assert!(cert.level(n).unwrap().identity_excluded);
        // the tiling is unique, so no tiling sequence can have 0 ∈ K_n
        let (all, complete) =
            all_monotile_covers(&seq.gen(n - 1).unwrap(), &seq.gen(n).unwrap(), None, DEFAULT_TILE_BUDGET, 100).unwrap();
        assert!(complete);
        assert_eq!(all.len(), 1);
        assert!(!all[0].c.contains_identity());
    }
    assert_eq!(cert.identity_excluded_levels(), vec![2, 3, 4, 5]);
}

#[test]
fn refutation_when_a_level_does_not_tile() {
    // [0,n] on ℕ: [0,1] does not tile [0,2]
    let s = build_folner(&BuilderSpec::Interval { a: ASequence::factorial(), on_integers: false }).unwrap();
    let bad = entile_core::folner::FolnerSeq::listed(
        s.ctx(),
        vec![s.gen(0).unwrap().as_ref().clone(), FinSubset::new(s.ctx(), vec![Element::int(0), Element::int(1)]).unwrap(),
             FinSubset::new(s.ctx(), (0..3).map(Element::int).collect()).unwrap()],
        s.flags(),
        s.provenance().clone(),
    )
    .unwrap();
    let err = extract_tiling_sequence(&bad, 2, true, DEFAULT_TILE_BUDGET).unwrap_err();
    assert!(matches!(err, entile_core::Error::Refuted(_)), "{err}");
}

#[test]
fn composition_examples() {
    let a = find_monotile_cover(&ints([0, 1]), &ints(0..4)).unwrap().unwrap();
    assert_eq!(a.c, ints([0, 2]));
    let b = find_monotile_cover(&ints(0..4), &ints(0..8)).unwrap().unwrap();
    let c = compose_certs(&a, &b).unwrap();
    assert_eq!(c.c, ints([0, 2, 4, 6]));
    let id = find_monotile_cover(&ints([0, 1]), &ints([0, 1])).unwrap().unwrap();
    assert_eq!(compose_certs(&id, &a).unwrap(), a);
    assert!(compose_certs(&b, &a).is_err());

    let phi = build_folner(&BuilderSpec::PhiQ { q: r(1, 1) }).unwrap();
    let cert = extract_tiling_sequence(&phi, 2, true, DEFAULT_TILE_BUDGET).unwrap();
    cert.verify(Some(&phi)).unwrap();
    let p = prefix_monotile(&cert, 0, 2).unwrap();
    assert_eq!(p.translate_count(), phi.gen(2).unwrap().len());
}

#[test]
fn prefix_examples() {
    let fact = build_folner(&BuilderSpec::Interval { a: ASequence::factorial(), on_integers: false }).unwrap();
    let cert = extract_tiling_sequence(&fact, 3, true, DEFAULT_TILE_BUDGET).unwrap();
    assert_eq!(prefix_monotile(&cert, 1, 3).unwrap().translate_count(), 6);
    let PrefixCert::Finite(one) = prefix_monotile(&cert, 2, 3).unwrap() else { panic!() };
    let LevelTiling::Finite(lvl) = &cert.level(3).unwrap().tiling else { panic!() };
    assert_eq!(&one, lvl);
    assert!(prefix_monotile(&cert, 2, 4).is_err());

    let p = build_folner(&BuilderSpec::Punctured).unwrap();
    let cert = extract_tiling_sequence(&p, 4, true, DEFAULT_TILE_BUDGET).unwrap();
    cert.verify(Some(&p)).unwrap();
    assert_eq!(prefix_monotile(&cert, 0, 3).unwrap().translate_count(), 16);
    assert_eq!(prefix_monotile(&cert, 0, 4).unwrap().translate_count(), 64);
}

#[test]
fn translate_search_examples() {
    let dy = build_folner(&BuilderSpec::SymmetricDyadic).unwrap();
    assert_eq!(find_translate_into(&ints([0, 1]), &dy, 5).unwrap(), (Element::int(0), 1));
    assert_eq!(find_translate_into(&ints([5, 6]), &dy, 5).unwrap(), (Element::int(-5), 1));
    let (g, n) = find_translate_into(&ints([0, 3, 9]), &dy, 8).unwrap();
    assert_eq!(n, 4);
    let f = dy.gen(n).unwrap();
    assert!(ints([0, 3, 9]).translate(&g).unwrap().is_subset(&f));
    assert!(find_translate_into(&ints(0..10), &dy, 1).unwrap_err().is_budget());
}

#[test]
fn rational_automorphism_tilings() {
    for (a, b) in [(1i64, 1i64), (2, 1), (2, 3), (-2, 3), (3, 2)] {
        let q = r(a, b);
        let seq = build_folner(&BuilderSpec::PhiQ { q: q.clone() }).unwrap();
        for n in 0..=3usize {
            let cert = phi_q_level_cert(&seq, &q, n).unwrap();
            let want = 2 * b * b * a * a * (n as i64 + 1);
            assert_eq!(cert.c.len() as i64, want, "q={a}/{b} n={n}");
            // the explicit set is the canonical one
            let canon = progression_cover(&cert.t, &cert.v).unwrap();
            assert_eq!(canon.c, cert.c);
        }
        // inverse automorphism tiles as well
        let rows = automorphism_monotile_check(&seq, &[Automorphism::Scale(r(b, a))], 3, DEFAULT_TILE_BUDGET).unwrap();
        assert!(rows.iter().all(|row| row.cert.is_some()));
    }
    let q = r(2, 3);
    let seq = build_folner(&BuilderSpec::PhiQ { q: q.clone() }).unwrap();
    let rows = automorphism_monotile_check(&seq, &[Automorphism::Scale(q.clone())], 2, DEFAULT_TILE_BUDGET).unwrap();
    assert_eq!(rows[1].cert.as_ref().unwrap().translate_count(), 144);
    // a scale that breaks the lattice does not tile
    let rows = automorphism_monotile_check(&seq, &[Automorphism::Scale(r(1, 7))], 2, DEFAULT_TILE_BUDGET).unwrap();
    assert!(rows.iter().filter(|row| row.n > 0).all(|row| row.cert.is_none()));
}

#[test]
fn structural_rational_certs_match_materialized_search() {
    for (a, b, depth) in [(1i64, 1i64, 2usize), (2, 3, 1), (-1, 2, 1)] {
        let q = r(a, b);
        let seq = build_folner(&BuilderSpec::PhiQ { q: q.clone() }).unwrap();
        for n in 0..depth {
            let cert = phi_q_level_cert(&seq, &q, n).unwrap();
            let m = cert.materialize(1 << 20).unwrap();
            m.verify().unwrap();
            let found = find_monotile_cover(&m.t, &m.v).unwrap().unwrap();
            assert_eq!(found.c.len(), m.c.len());
        }
        // identity automorphism: the level tilings of the sequence itself
        let lt = extract_tiling_sequence(&seq, 3, true, DEFAULT_TILE_BUDGET).unwrap();
        lt.verify(Some(&seq)).unwrap();
        assert!(lt.congruent);
    }
    assert_eq!(phi_q_translates(&r(2, 3), 1).unwrap().len(), 144);
}

#[test]
fn word_certificates_compose() {
    let q = r(2, 3);
    let seq = build_folner(&BuilderSpec::PhiQ { q: q.clone() }).unwrap();
    let gens = [Automorphism::Scale(q.clone()), Automorphism::Scale(r(3, 2))];
    for word in [vec![0], vec![0, 0], vec![1, 0], vec![0, 1]] {
        let cert = word_monotile_cert(&seq, &gens, &word, 0).unwrap();
        cert.verify().unwrap();
        let WordCert::Progression(p) = &cert else { panic!() };
        assert_eq!(p.v, seq.progression(word.len()).unwrap());
    }
    // finite path: reflections of boxes in ℤ²
    let boxes = build_folner(&BuilderSpec::Box { dim: 2 }).unwrap();
    let gens = [Automorphism::Linear(vec![vec![0, 1], vec![1, 0]]), Automorphism::Linear(vec![vec![1, 0], vec![0, -1]])];
    let cert = word_monotile_cert(&boxes, &gens, &[0, 1], 1).unwrap();
    cert.verify().unwrap();
    assert_eq!(cert.translate_count(), 16);
}

#[test]
fn conjugation_in_abelian_groups_is_trivial() {
    let boxes = build_folner(&BuilderSpec::Box { dim: 2 }).unwrap();
    let autos = [Automorphism::Identity, Automorphism::Conjugation(Element::vector(&[3, -1]))];
    let rows = automorphism_monotile_check(&boxes, &autos, 3, DEFAULT_TILE_BUDGET).unwrap();
    let plain = extract_tiling_sequence(&boxes, 3, false, DEFAULT_TILE_BUDGET).unwrap();
    for row in rows {
        assert_eq!(row.cert.unwrap(), plain.level(row.n + 1).unwrap().tiling);
    }
}

#[test]
fn congruentize_symmetric_dyadic() {
    let seq = build_folner(&BuilderSpec::SymmetricDyadic).unwrap();
    let out = congruentize(&seq, &Exhaustion::integers(), 6, 100).unwrap();
    out.verify(&seq).unwrap();
    assert_eq!(out.levels.len(), 7);
    let tc = out.tiling_cert();
    tc.verify(None).unwrap();
    assert!(tc.congruent);
    // each level is a translate of a dyadic interval
    for l in &out.levels {
        assert_eq!(l.h.len(), 1usize << l.m);
    }
    assert!(congruentize(&seq, &Exhaustion::integers(), 6, 1).unwrap_err().is_budget());

    let iv = build_folner(&BuilderSpec::Interval { a: ASequence::power(2), on_integers: true }).unwrap();
    let out = congruentize(&iv, &Exhaustion::integers(), 5, 100).unwrap();
    out.verify(&iv).unwrap();
}

fn brute_exact_cover(n_items: usize, rows: &[Vec<usize>]) -> usize {
    (0u32..1 << rows.len())
        .filter(|mask| {
            let mut hit = vec![0; n_items];
            for (i, row) in rows.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    for &x in row {
                        hit[x] += 1;
                    }
                }
            }
            hit.iter().all(|&h| h == 1)
        })
        .count()
}

proptest! {
    #[test]
    fn dlx_counts_match_brute_force(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_items = rng.gen_range(1..8usize);
        let n_rows = rng.gen_range(1..12usize);
        let mut items: Vec<usize> = (0..n_items).collect();
        let rows: Vec<Vec<usize>> = (0..n_rows).map(|_| {
            items.shuffle(&mut rng);
            let k = rng.gen_range(1..=n_items);
            let mut r = items[..k].to_vec();
            r.sort();
            r
        }).collect();
        let mut ec = ExactCover::new(n_items);
        for row in &rows {
            ec.add_row(row.clone());
        }
        let (sols, complete) = ec.all_solutions(&[], u64::MAX, usize::MAX).unwrap();
        prop_assert!(complete);
        prop_assert_eq!(sols.len(), brute_exact_cover(n_items, &rows));
        for s in sols {
            let mut covered: Vec<usize> = s.iter().flat_map(|&i| rows[i].clone()).collect();
            covered.sort();
            prop_assert_eq!(covered, (0..n_items).collect::<Vec<_>>());
        }
    }
}

#[test]
fn dlx_budget_and_forced_rows() {
    let mut ec = ExactCover::new(4);
    ec.add_row(vec![0, 1]);
    ec.add_row(vec![2, 3]);
    ec.add_row(vec![1, 2]);
    ec.add_row(vec![0]);
    ec.add_row(vec![3]);
    let (all, _) = ec.all_solutions(&[], 1000, 100).unwrap();
    assert_eq!(all, vec![vec![0, 1], vec![2, 3, 4]]);
    assert_eq!(ec.first_solution(&[2], 1000).unwrap(), Some(vec![2, 3, 4]));
    assert_eq!(ec.first_solution(&[0, 2], 1000).unwrap(), None);
    assert!(ec.first_solution(&[], 0).unwrap_err().is_budget());
    assert!(BigRational::zero().is_zero());
}
