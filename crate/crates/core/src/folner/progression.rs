use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `{start + i·step : 0 ≤ i < len}` with `step > 0`: the shape of every
/// rational Følner set built here, kept symbolic because the sets get large.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatProgression {
    pub start: BigRational,
    pub step: BigRational,
    pub len: u64,
}

impl RatProgression {
    pub fn new(start: BigRational, step: BigRational, len: u64) -> Result<Self> {
        if !step.is_positive() {
            return Err(Error::Invalid("progression step must be positive".into()));
        }
        if len == 0 {
            return Err(Error::Invalid("progression must be non-empty".into()));
        }
        Ok(RatProgression { start, step, len })
    }

    pub fn last(&self) -> BigRational {
        &self.start + &self.step * BigInt::from(self.len - 1)
    }

    pub fn nth(&self, i: u64) -> BigRational {
        &self.start + &self.step * BigInt::from(i)
    }

    /// Position of `x`, if it belongs.
    pub fn index_of(&self, x: &BigRational) -> Option<u64> {
        let k = (x - &self.start) / &self.step;
        if !k.is_integer() || k.is_negative() {
            return None;
        }
        k.to_integer().to_u64().filter(|&i| i < self.len)
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.index_of(x).is_some()
    }

    pub fn elements(&self, cap: u64) -> Result<Vec<BigRational>> {
        if self.len > cap {
            return Err(Error::Budget(format!(
                "progression has {} elements, cap is {cap}",
                self.len
            )));
        }
        let mut out = Vec::with_capacity(self.len as usize);
        let mut x = self.start.clone();
        for _ in 0..self.len {
            out.push(x.clone());
            x += &self.step;
        }
        Ok(out)
    }

    /// `|(P + s) ∖ P| / |P|`.
    pub fn defect(&self, s: &BigRational) -> BigRational {
        let k = s / &self.step;
        let moved = if k.is_integer() {
            k.to_integer().abs().to_u64().map_or(self.len, |m| m.min(self.len))
        } else {
            self.len
        };
        BigRational::new(moved.into(), self.len.into())
    }

    /// `q·P`.
    pub fn scale(&self, q: &BigRational) -> Result<Self> {
        if q.is_zero() {
            return Err(Error::Invalid("cannot scale by 0".into()));
        }
        if q.is_positive() {
            Ok(RatProgression { start: &self.start * q, step: &self.step * q, len: self.len })
        } else {
            Ok(RatProgression { start: self.last() * q, step: -(&self.step * q), len: self.len })
        }
    }

    pub fn translate(&self, c: &BigRational) -> Self {
        RatProgression { start: &self.start + c, step: self.step.clone(), len: self.len }
    }

    /// `self ⊆ other`, decided arithmetically.
    pub fn is_subset(&self, other: &RatProgression) -> bool {
        if self.len == 1 {
            return other.contains(&self.start);
        }
        let r = &self.step / &other.step;
        r.is_integer() && other.contains(&self.start) && other.contains(&self.last())
    }
}
