use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

/// Natural logarithm of a big natural number.
pub fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln(arg)` with the exact argument retained.
#[derive(Clone, Debug, PartialEq)]
pub struct LogValue {
    pub arg: BigUint,
    pub ln: f64,
}

impl LogValue {
    pub fn of(arg: BigUint) -> Self {
        let ln = ln_big(&arg);
        LogValue { arg, ln }
    }

    pub fn of_usize(n: usize) -> Self {
        Self::of(BigUint::from(n))
    }

    pub fn zero() -> Self {
        Self::of(BigUint::one())
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ln {} = {:.12}", self.arg, self.ln)
    }
}
