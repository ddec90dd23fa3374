use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// How the terms of an [`ASequence`] are produced.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ASeqTerms {
    /// `a_n = r^n · n!`.
    Factorial { r: u64 },
    /// `a_n = b^n`.
    Power { base: u64 },
    /// Explicit terms; the sequence is only defined on the listed range.
    Listed(Vec<BigUint>),
}

/// A sequence with `a_0 = 1` and `a_n | a_{n+1}`, strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ASequence {
    pub terms: ASeqTerms,
    /// Claimed: every integer divides some term.
    pub geometric: bool,
}

/// Terms inspected when checking the sequence conditions.
pub const ASEQ_CHECK_BOUND: usize = 12;

impl ASequence {
    pub fn factorial() -> Self {
        Self::factorial_scaled(1)
    }

    /// `r^n · n!`; geometric for every `r ≥ 1`.
    pub fn factorial_scaled(r: u64) -> Self {
        ASequence { terms: ASeqTerms::Factorial { r }, geometric: true }
    }

    pub fn power(base: u64) -> Self {
        ASequence { terms: ASeqTerms::Power { base }, geometric: false }
    }

    pub fn listed(terms: Vec<BigUint>, geometric: bool) -> Self {
        ASequence { terms: ASeqTerms::Listed(terms), geometric }
    }

    pub fn listed_u64(terms: &[u64]) -> Self {
        Self::listed(terms.iter().map(|&x| BigUint::from(x)).collect(), false)
    }

    /// Number of defined terms (`None` when infinite).
    pub fn defined_len(&self) -> Option<usize> {
        match &self.terms {
            ASeqTerms::Listed(v) => Some(v.len()),
            _ => None,
        }
    }

    pub fn term(&self, n: usize) -> Result<BigUint> {
        match &self.terms {
            ASeqTerms::Factorial { r } => {
                let mut acc = BigUint::one();
                for k in 1..=n as u64 {
                    acc *= BigUint::from(k) * BigUint::from(*r);
                }
                Ok(acc)
            }
            ASeqTerms::Power { base } => Ok(BigUint::from(*base).pow(n as u32)),
            ASeqTerms::Listed(v) => v
                .get(n)
                .cloned()
                .ok_or_else(|| Error::Budget(format!("a-sequence only lists {} terms, asked for a_{n}", v.len()))),
        }
    }

    /// `q_n = a_n / a_{n−1}`.
    pub fn ratio(&self, n: usize) -> Result<BigUint> {
        if n == 0 {
            return Ok(BigUint::one());
        }
        Ok(self.term(n)? / self.term(n - 1)?)
    }

    /// Checks `a_0 = 1`, divisibility, strict growth and, when claimed,
    /// geometricity, all up to `bound` terms.
    pub fn validate(&self, bound: usize) -> Result<()> {
        if let ASeqTerms::Factorial { r: 0 } | ASeqTerms::Power { base: 0 | 1 } = self.terms {
            return Err(Error::Invalid("a-sequence must be strictly increasing".into()));
        }
        let len = self.defined_len().map_or(bound, |l| l.min(bound));
        if len == 0 {
            return Err(Error::Invalid("a-sequence needs at least a_0".into()));
        }
        let terms: Vec<BigUint> = (0..len).map(|n| self.term(n)).collect::<Result<_>>()?;
        if !terms[0].is_one() {
            return Err(Error::Invalid(format!("a_0 must be 1, found {}", terms[0])));
        }
        for n in 1..len {
            // a_1 = a_0 = 1 is allowed so that n! qualifies
            if terms[n] < terms[n - 1] || (n > 1 && terms[n] == terms[n - 1]) {
                return Err(Error::Invalid(format!("a-sequence not strictly increasing at n={n}")));
            }
            if !(&terms[n] % &terms[n - 1]).is_zero() {
                return Err(Error::Invalid(format!("a_{} = {} does not divide a_{n} = {}", n - 1, terms[n - 1], terms[n])));
            }
        }
        if self.geometric {
            let last = &terms[len - 1];
            // every k up to the checked depth must already divide a term
            for k in 1..=len.min(ASEQ_CHECK_BOUND) as u64 {
                if !(last % BigUint::from(k)).is_zero() {
                    return Err(Error::Invalid(format!(
                        "sequence claimed geometric but {k} divides none of a_0..a_{}",
                        len - 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Least `n ≤ bound` with `d | a_n`.
    pub fn first_divisible(&self, d: &BigUint, bound: usize) -> Option<usize> {
        let len = self.defined_len().map_or(bound + 1, |l| l.min(bound + 1));
        (0..len).find(|&n| self.term(n).map(|a| (a % d).is_zero()).unwrap_or(false))
    }

}
