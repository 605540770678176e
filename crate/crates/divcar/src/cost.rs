//! Exact rational tree costs.
//!
//! Every edge cost is the reciprocal of a positive co-usage count, so all
//! arithmetic stays in the rationals. Keeping costs exact lets the solver
//! and the brute-force oracle be compared with `==` instead of a tolerance.

use std::fmt;
use std::ops::{Add, AddAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Sum of reciprocal edge weights along a tree.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Cost(BigRational);

impl Cost {
    pub fn zero() -> Self {
        Cost(BigRational::zero())
    }

    /// Cost of one edge with co-usage count `k`, i.e. `1/k`.
    pub fn from_count(k: u64) -> Self {
        assert!(k >= 1, "edge count must be positive");
        Cost(BigRational::new(BigInt::from(1), BigInt::from(k)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0);
        Cost(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// `1/cost`, or `None` for a zero-cost (single vertex) tree.
    pub fn reciprocal(&self) -> Option<BigRational> {
        if self.is_zero() {
            None
        } else {
            Some(self.0.recip())
        }
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }
}

impl Add<&Cost> for &Cost {
    type Output = Cost;

    fn add(self, rhs: &Cost) -> Cost {
        Cost(&self.0 + &rhs.0)
    }
}

impl AddAssign<&Cost> for Cost {
    fn add_assign(&mut self, rhs: &Cost) {
        self.0 += &rhs.0;
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
