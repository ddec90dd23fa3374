use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::aseq::ASequence;
use super::exhaustion::Exhaustion;
use super::seq::FolnerSeq;
use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::finset::FinSubset;

/// `|Fs ∖ F| / |F|`.
pub fn defect(f: &FinSubset, s: &Element) -> Result<BigRational> {
    f.ctx().check(s)?;
    if f.is_empty() {
        return Err(Error::Invalid("defect of the empty set".into()));
    }
    let ctx = f.ctx();
    let members: HashSet<&Element> = f.iter().collect();
    let leaving = f.iter().filter(|x| !members.contains(&ctx.mul_unchecked(x, s))).count();
    Ok(BigRational::new(BigInt::from(leaving), BigInt::from(f.len())))
}

/// Re-indexing `k_0 = 0 < k_1 < …` of a Følner sequence making level `n`
/// `1/n`-invariant under the exhaustion block `G_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CifIndices {
    pub k: Vec<usize>,
    /// Worst defect over `G_n` at the chosen `k_n` (index 0 unused, 0).
    pub worst: Vec<BigRational>,
}

impl CifIndices {
    /// Rechecks `defect(F_{k_n}, g) < 1/n` for every recorded level.
    pub fn verify(&self, seq: &FolnerSeq, exh: &Exhaustion) -> Result<()> {
        if self.k.first() != Some(&0) {
            return Err(Error::Verification("k_0 must be 0".into()));
        }
        for n in 1..self.k.len() {
            if self.k[n] <= self.k[n - 1] {
                return Err(Error::Verification(format!("k is not increasing at n={n}")));
            }
            let bound = BigRational::new(BigInt::one(), BigInt::from(n));
            for g in exh.gen(n)?.iter() {
                let d = seq.defect_at(self.k[n], g)?;
                if d >= bound {
                    return Err(Error::Verification(format!(
                        "defect(F_{}, {g}) = {d} is not below 1/{n}",
                        self.k[n]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Extracts `k_1, …, k_depth`, each the least index above the previous one
/// (and at most `horizon`) whose level is `1/n`-invariant under `G_n`.
pub fn cif_extract(seq: &FolnerSeq, exh: &Exhaustion, depth: usize, horizon: usize) -> Result<CifIndices> {
    if !seq.flags().folner {
        return Err(Error::Invalid("CIF extraction needs a sequence that claims to be Følner".into()));
    }
    if seq.ctx() != exh.ctx() {
        return Err(Error::ContextMismatch(format!("sequence over {}, exhaustion over {}", seq.ctx(), exh.ctx())));
    }
    let mut k = vec![0];
    let mut worst = vec![BigRational::zero()];
    for n in 1..=depth {
        let bound = BigRational::new(BigInt::one(), BigInt::from(n));
        let block = exh.gen(n)?;
        let mut cand = k[n - 1] + 1;
        let mut last_fail: Option<(Element, BigRational)> = None;
        loop {
            if cand > horizon {
                let last = last_fail.map_or("no candidate index left".to_string(), |(g, d)| format!("at k={horizon}, g={g} has defect {d}"));
                return Err(Error::Budget(format!(
                    "CIF step n={n}: no k in ({}, {horizon}] with defect < 1/{n}; {last}",
                    k[n - 1]
                )));
            }
            let mut ok = true;
            let mut w = BigRational::zero();
            for g in block.iter() {
                let d = seq.defect_at(cand, g)?;
                if d >= bound {
                    last_fail = Some((g.clone(), d));
                    ok = false;
                    break;
                }
                w = w.max(d);
            }
            if ok {
                k.push(cand);
                worst.push(w);
                break;
            }
            cand += 1;
        }
    }
    Ok(CifIndices { k, worst })
}

/// Digits of `q` in the mixed radix of a geometric a-sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalDigits {
    pub n_q: usize,
    pub k0: BigInt,
    /// `k_1, …, k_{n_q}`.
    pub k: Vec<BigUint>,
}

/// `q = Σ_{i=0}^{n_q} k_i / a_i` with `0 ≤ k_i < a_i / a_{i−1}` and `n_q` least.
pub fn rational_digits(q: &BigRational, a: &ASequence, bound: usize) -> Result<RationalDigits> {
    let den = q.denom().magnitude().clone();
    let n_q = a.first_divisible(&den, bound).ok_or_else(|| {
        Error::Budget(format!("denominator {den} divides none of a_0..a_{bound}"))
    })?;
    let an = BigInt::from(a.term(n_q)?);
    let mut big_n = (q * BigRational::from_integer(an)).to_integer();
    let mut digits = vec![BigUint::zero(); n_q];
    for i in (1..=n_q).rev() {
        let qi = BigInt::from(a.ratio(i)?);
        let (d, r) = big_n.div_mod_floor(&qi);
        digits[i - 1] = r.to_biguint().unwrap();
        big_n = d;
    }
    Ok(RationalDigits { n_q, k0: big_n, k: digits })
}

/// One row of a defect table.
#[derive(Clone, Debug, PartialEq)]
pub struct DefectRow {
    pub n: usize,
    pub s: Element,
    pub defect: BigRational,
}

/// Defect trend along the levels for one sample element.
#[derive(Clone, Debug, PartialEq)]
pub struct DefectTrend {
    pub s: Element,
    pub non_increasing: bool,
    pub strictly_decreasing: bool,
    pub last: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FolnerReport {
    pub rows: Vec<DefectRow>,
    pub trends: Vec<DefectTrend>,
}

/// `defect(F_n, s)` for `from ≤ n ≤ to` and every sample `s`.
pub fn folner_report(seq: &FolnerSeq, samples: &[Element], from: usize, to: usize) -> Result<FolnerReport> {
    let mut rows = Vec::new();
    let mut trends = Vec::new();
    for s in samples {
        let vals: Vec<BigRational> = (from..=to).map(|n| seq.defect_at(n, s)).collect::<Result<_>>()?;
        for (i, d) in vals.iter().enumerate() {
            rows.push(DefectRow { n: from + i, s: s.clone(), defect: d.clone() });
        }
        trends.push(DefectTrend {
            s: s.clone(),
            non_increasing: vals.windows(2).all(|w| w[1] <= w[0]),
            strictly_decreasing: vals.windows(2).all(|w| w[1] < w[0]),
            last: vals.last().cloned().unwrap_or_else(BigRational::zero),
        });
    }
    rows.sort_by(|a, b| (a.n, &a.s).cmp(&(b.n, &b.s)));
    Ok(FolnerReport { rows, trends })
}
