use entile_core::finset::{
    covering_number, ell, ell_rel, minkowski_sum, strong_disjoint_check, AFinSet, FinSubset,
};
use entile_core::{AbelianTarget, Element, MonoidCtx, TargetElem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn zset(xs: &[u64], m: u64) -> AFinSet {
    let t = AbelianTarget::finite(&[m]).unwrap();
    AFinSet::new(&t, xs.iter().map(|&x| TargetElem::Dense(vec![x])).collect()).unwrap()
}

// the integers are modelled by a large cyclic group in these examples
fn zint(xs: &[i64]) -> AFinSet {
    let m = 1000;
    zset(&xs.iter().map(|&x| x.rem_euclid(m) as u64).collect::<Vec<_>>(), m as u64)
}

fn dense(v: &[u64]) -> TargetElem {
    TargetElem::Dense(v.to_vec())
}

#[test]
fn translate_examples() {
    let z = MonoidCtx::int();
    let t = FinSubset::new(&z, vec![Element::int(0), Element::int(1)]).unwrap();
    assert_eq!(t.translate(&z.identity()).unwrap(), t);
    assert_eq!(
        t.translate(&Element::int(2)).unwrap().elems(),
        &[Element::int(2), Element::int(3)]
    );
    let h = MonoidCtx::heisenberg();
    let t = FinSubset::new(&h, vec![Element::heis(0, 0, 0), Element::heis(0, 1, 0)]).unwrap();
    let got = t.translate(&Element::heis(1, 0, 0)).unwrap();
    assert_eq!(got.elems(), &[Element::heis(1, 0, 0), Element::heis(1, 1, 1)]);
    assert!(t.translate(&Element::int(1)).is_err());
}

#[test]
fn minkowski_examples() {
    let x = zint(&[0, 1, 5]);
    assert_eq!(minkowski_sum(&x, &zint(&[0])).unwrap(), x);
    assert_eq!(minkowski_sum(&zint(&[0, 1]), &zint(&[0, 2])).unwrap(), zint(&[0, 1, 2, 3]));
    assert_eq!(minkowski_sum(&zset(&[0, 1], 4), &zset(&[0, 2], 4)).unwrap(), zset(&[0, 1, 2, 3], 4));
    assert!(minkowski_sum(&zset(&[0], 4), &zset(&[0], 5)).is_err());
}

#[test]
fn covering_examples() {
    let x = zint(&[0, 3, 7]);
    assert_eq!(covering_number(&x, &x).unwrap().0, 1);
    assert_eq!(ell_rel(&x, &x).unwrap().ln, 0.0);
    assert_eq!(covering_number(&zint(&[0]), &zint(&[0, 4])).unwrap().0, 1);
    let (n, cert) = covering_number(&zint(&[0, 1, 2, 3]), &zint(&[0, 1])).unwrap();
    assert_eq!(n, 2);
    assert_eq!(cert.translates, vec![dense(&[0]), dense(&[2])]);
    cert.verify().unwrap();
    assert_eq!(covering_number(&zset(&[0, 1, 2, 3], 4), &zset(&[0, 2], 4)).unwrap().0, 2);
    assert!((ell_rel(&zint(&[0, 1, 2, 3]), &zint(&[0, 1])).unwrap().ln - 2f64.ln()).abs() < 1e-15);
    assert!(covering_number(&zint(&[1]), &zint(&[0])).is_err());
}

#[test]
fn ell_examples() {
    assert_eq!(ell(&zint(&[0])).unwrap().ln, 0.0);
    assert!((ell(&zint(&[0, 1, 2, 3])).unwrap().ln - 4f64.ln()).abs() < 1e-15);
}

#[test]
fn strong_disjointness_examples() {
    let y = zint(&[0, 1]);
    assert!(strong_disjoint_check(&[dense(&[0])], &y).unwrap());
    assert!(!strong_disjoint_check(&[dense(&[0]), dense(&[2])], &y).unwrap());
    assert!(strong_disjoint_check(&[dense(&[0]), dense(&[5])], &y).unwrap());
}

#[test]
fn strongly_disjoint_translates_give_exact_covering_number() {
    let y = zint(&[0, 1, 3]);
    let c = [0i64, 10, 25, 40];
    // X meets every translate and sits inside their union
    let mut xs = vec![0i64];
    for &a in &c {
        xs.push(a + 1);
        xs.push(a + 3);
    }
    let x = zint(&xs);
    let cs: Vec<TargetElem> = c.iter().map(|&a| dense(&[a as u64])).collect();
    assert!(strong_disjoint_check(&cs, &y).unwrap());
    assert_eq!(covering_number(&x, &y).unwrap().0, c.len());
}

/// Smallest family of translates from `(X − Y) ∖ {0}` which together with
/// `0 + Y` covers `X`, found by trying all subsets in order of size.
fn brute_mu(x: &AFinSet, y: &AFinSet) -> usize {
    let t = x.target();
    let zero = t.zero();
    let pool: Vec<TargetElem> =
        x.difference_set(y).unwrap().iter().filter(|a| **a != zero).cloned().collect();
    let covered = |sel: &[&TargetElem]| {
        x.iter().all(|p| y.contains(&t.sub(p, &zero)) || sel.iter().any(|a| y.contains(&t.sub(p, a))))
    };
    for k in 0..=pool.len() {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let sel: Vec<&TargetElem> = idx.iter().map(|&i| &pool[i]).collect();
            if covered(&sel) {
                return k + 1;
            }
            // next k-combination
            let mut i = k;
            while i > 0 && idx[i - 1] == pool.len() - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    unreachable!("the whole pool always covers")
}

fn random_set(rng: &mut ChaCha8Rng, t: &AbelianTarget, max: usize) -> AFinSet {
    let m = t.moduli().to_vec();
    let n = rng.gen_range(1..=max);
    let mut v = vec![t.zero()];
    for _ in 1..n {
        v.push(TargetElem::Dense(m.iter().map(|&mi| rng.gen_range(0..mi)).collect()));
    }
    AFinSet::new(t, v).unwrap()
}

#[test]
fn covering_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..150 {
        let m = [2u64, 3, 4, 5, 7][i % 5];
        let k = 1 + i % 3;
        let t = AbelianTarget::finite(&vec![m; k]).unwrap();
        let x = random_set(&mut rng, &t, 10);
        let y = random_set(&mut rng, &t, 4);
        let (n, cert) = covering_number(&x, &y).unwrap();
        cert.verify().unwrap();
        assert_eq!(cert.translates.len(), n);
        assert_eq!(n, brute_mu(&x, &y), "X={x} Y={y}");
    }
}

#[test]
fn covering_works_on_sparse_targets() {
    let t = AbelianTarget::fin_support(MonoidCtx::nat(), &[4]).unwrap();
    let e = |i: i64, v: u64| t.basis(&Element::int(i), &[v]).unwrap();
    let x = AFinSet::new(&t, vec![t.zero(), e(0, 1), e(0, 2), e(0, 3), e(1, 1)]).unwrap();
    let y = AFinSet::new(&t, vec![t.zero(), e(0, 2)]).unwrap();
    let (n, cert) = covering_number(&x, &y).unwrap();
    cert.verify().unwrap();
    assert_eq!(n, brute_mu(&x, &y));
    assert_eq!(n, 3);
}

fn image(x: &AFinSet, rows: &[Vec<u64>]) -> AFinSet {
    let t = x.target();
    let m = t.moduli();
    let apply = |v: &[u64]| -> TargetElem {
        TargetElem::Dense(
            rows.iter()
                .zip(m)
                .map(|(r, mi)| r.iter().zip(v).map(|(a, b)| a * b).sum::<u64>() % mi)
                .collect(),
        )
    };
    x.map(t, |e| match e {
        TargetElem::Dense(v) => Ok(apply(v)),
        _ => unreachable!(),
    })
    .unwrap()
}

#[test]
fn ell_calculus_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mu = |a: &AFinSet, b: &AFinSet| covering_number(a, b).unwrap().0;
    for i in 0..240 {
        let m = 2 + (i % 4) as u64;
        let k = 1 + (i / 4) % 3;
        let t = AbelianTarget::finite(&vec![m; k]).unwrap();
        let x = random_set(&mut rng, &t, 8);
        let x2 = x.union(&random_set(&mut rng, &t, 4)).unwrap();
        let y = random_set(&mut rng, &t, 4);
        let y2 = y.union(&random_set(&mut rng, &t, 3)).unwrap();
        let z = random_set(&mut rng, &t, 5);
        // monotone in X, antitone in Y
        assert!(mu(&x, &y) <= mu(&x2, &y));
        assert!(mu(&x, &y2) <= mu(&x, &y));
        // ℓ(X,Y) ≤ ℓ(X) ≤ ℓ(X,Y) + ℓ(Y)
        assert!(mu(&x, &y) <= x.len() && x.len() <= mu(&x, &y) * y.len());
        // sums
        let xs = minkowski_sum(&x, &x2).unwrap();
        let ys = minkowski_sum(&y, &y2).unwrap();
        assert!(mu(&xs, &ys) <= mu(&x, &y) * mu(&x2, &y2));
        // triangle inequality
        assert!(mu(&x, &y) <= mu(&x, &z) * mu(&z, &y));
        // endomorphisms
        let rows: Vec<Vec<u64>> = (0..k).map(|_| (0..k).map(|_| rng.gen_range(0..m)).collect()).collect();
        assert!(mu(&image(&x, &rows), &image(&y, &rows)) <= mu(&x, &y));
        // |X + Y| ≥ |π(X)|·|Y| for Y inside a subgroup B = dA
        let d = if m % 2 == 0 { 2 } else { m };
        let inb = |e: &TargetElem| matches!(e, TargetElem::Dense(v) if v.iter().all(|a| a % d == 0));
        let yb = y2.filter(inb);
        let classes: std::collections::BTreeSet<Vec<u64>> = x
            .iter()
            .map(|e| match e {
                TargetElem::Dense(v) => v.iter().map(|a| a % d).collect(),
                _ => unreachable!(),
            })
            .collect();
        assert!(minkowski_sum(&x, &yb).unwrap().len() >= classes.len() * yb.len());
    }
}
