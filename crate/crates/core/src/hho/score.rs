//! Fitness values carried as an unevaluated sum `hi + lo` of two doubles.
//!
//! Penalized objectives add a rate of a few tens to penalty terms near 1e15,
//! where one ulp of a single `f64` is larger than the rate differences being
//! optimized. Keeping the rounding error in a second word preserves them.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

impl Score {
    pub const WORST: Score = Score {
        hi: f64::NEG_INFINITY,
        lo: 0.0,
    };

    /// Normalizes `hi + lo` so that `hi` is the rounded value of the sum.
    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self { hi, lo }.sanitized()
    }

    /// Compensated sum of `terms`.
    pub fn sum<I: IntoIterator<Item = f64>>(terms: I) -> Self {
        let (mut hi, mut lo) = (0.0, 0.0);
        for t in terms {
            let (s, e) = two_sum(hi, t);
            hi = s;
            lo += e;
        }
        Self::new(hi, lo)
    }

    /// The nearest `f64`.
    pub fn value(self) -> f64 {
        self.hi
    }

    pub fn low_word(self) -> f64 {
        self.lo
    }

    /// Non-finite scores become [`Score::WORST`].
    pub fn sanitized(self) -> Self {
        if self.hi.is_finite() && self.lo.is_finite() {
            self
        } else {
            Self::WORST
        }
    }

    pub fn beats(self, other: Score) -> bool {
        self.cmp_total(other) == Ordering::Greater
    }

    pub fn cmp_total(self, other: Score) -> Ordering {
        self.hi.total_cmp(&other.hi).then(self.lo.total_cmp(&other.lo))
    }
}

impl From<f64> for Score {
    fn from(v: f64) -> Self {
        Score { hi: v, lo: 0.0 }.sanitized()
    }
}
