//! Exact rational selection rates.
//!
//! The minimum selection rate drives an integer quota `floor(v * t)`. Storing
//! `v` as a reduced integer fraction keeps that floor exact; a floating-point
//! rate can land on either side of an integer boundary depending on platform
//! rounding.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A selection rate in `[0, 1]`, stored as a reduced fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rate {
    num: u64,
    den: u64,
}

impl Rate {
    pub const ZERO: Rate = Rate { num: 0, den: 1 };

    /// Builds `num/den`, reduced. Rejects zero denominators and values above 1.
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Config(format!(
                "rate {num}/{den} has a zero denominator"
            )));
        }
        if num > den {
            return Err(Error::Config(format!(
                "rate {num}/{den} is above 1; rates must lie in [0, 1]"
            )));
        }
        // gcd(0, den) = den, so a zero rate always reduces to 0/1.
        let g = gcd(num, den);
        Ok(Rate {
            num: num / g,
            den: den / g,
        })
    }

    pub fn numer(self) -> u64 {
        self.num
    }

    pub fn denom(self) -> u64 {
        self.den
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// True when `arm_count` arms can all receive this minimum rate,
    /// i.e. `arm_count * num <= den`, checked in integer arithmetic.
    pub fn feasible_for(self, arm_count: usize) -> bool {
        (arm_count as u128) * (self.num as u128) <= self.den as u128
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Rate {
    type Err = Error;

    /// Parses `"p/q"` or a bare integer (`"0"`, `"1"`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_part = |part: &str| {
            part.trim().parse::<u64>().map_err(|_| {
                Error::Config(format!("rate `{s}`: `{part}` is not a non-negative integer"))
            })
        };
        match s.split_once('/') {
            Some((p, q)) => Rate::new(parse_part(p)?, parse_part(q)?),
            None => Rate::new(parse_part(s)?, 1),
        }
    }
}

impl PartialOrd for Rate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rate {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.num as u128 * other.den as u128;
        let rhs = other.num as u128 * self.den as u128;
        lhs.cmp(&rhs)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
