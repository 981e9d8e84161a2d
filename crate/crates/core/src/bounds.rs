//! Hyperrectangle geometry: box projection, support function and the
//! barrier/recession cone projections used by the termination and
//! infeasibility tests.
//!
//! Infinite bounds are IEEE infinities. Products of a zero weight with an
//! infinite bound are taken to be zero explicitly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed interval `[lower, upper]` over the extended reals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub const FREE: Interval = Interval {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    pub fn new(lower: f64, upper: f64) -> Self {
        Interval { lower, upper }
    }

    pub fn fixed(v: f64) -> Self {
        Interval { lower: v, upper: v }
    }

    pub fn is_valid(&self) -> bool {
        !self.lower.is_nan() && !self.upper.is_nan() && self.lower <= self.upper && self.lower < f64::INFINITY
            && self.upper > f64::NEG_INFINITY
    }

    pub fn is_fixed(&self) -> bool {
        self.lower == self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Componentwise bounds stored as two parallel vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch(format!(
                "bounds: {} lower vs {} upper entries",
                lower.len(),
                upper.len()
            )));
        }
        Ok(Bounds { lower, upper })
    }

    pub fn from_intervals(iv: &[Interval]) -> Self {
        Bounds {
            lower: iv.iter().map(|i| i.lower).collect(),
            upper: iv.iter().map(|i| i.upper).collect(),
        }
    }

    pub fn uniform(n: usize, iv: Interval) -> Self {
        Bounds {
            lower: vec![iv.lower; n],
            upper: vec![iv.upper; n],
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn get(&self, i: usize) -> Interval {
        Interval::new(self.lower[i], self.upper[i])
    }

    pub fn set(&mut self, i: usize, iv: Interval) {
        self.lower[i] = iv.lower;
        self.upper[i] = iv.upper;
    }

    pub fn iter(&self) -> impl Iterator<Item = Interval> + '_ {
        self.lower.iter().zip(&self.upper).map(|(&l, &u)| Interval::new(l, u))
    }

    fn check(&self, v: &[f64]) {
        assert_eq!(v.len(), self.len(), "vector and bounds lengths differ");
    }
}

#[inline]
pub fn clamp(v: f64, lower: f64, upper: f64) -> f64 {
    v.min(upper).max(lower)
}

/// Barrier cone component: sign-constrained where a bound is infinite.
#[inline]
pub fn barrier_component(v: f64, lower: f64, upper: f64) -> f64 {
    match (lower == f64::NEG_INFINITY, upper == f64::INFINITY) {
        (true, true) => 0.0,
        (true, false) => v.max(0.0),
        (false, true) => v.min(0.0),
        (false, false) => v,
    }
}

/// Recession cone component: free where the box extends to infinity.
#[inline]
pub fn recession_component(v: f64, lower: f64, upper: f64) -> f64 {
    match (lower == f64::NEG_INFINITY, upper == f64::INFINITY) {
        (false, false) => 0.0,
        (false, true) => v.max(0.0),
        (true, false) => v.min(0.0),
        (true, true) => v,
    }
}

/// `upper·max(v,0) + lower·min(v,0)` with `0·∞ = 0`.
#[inline]
pub fn support_term(v: f64, lower: f64, upper: f64) -> f64 {
    if v > 0.0 {
        upper * v
    } else if v < 0.0 {
        lower * v
    } else {
        0.0
    }
}

pub fn project_box(v: &[f64], bounds: &Bounds) -> Vec<f64> {
    bounds.check(v);
    v.iter()
        .zip(bounds.iter())
        .map(|(&x, b)| clamp(x, b.lower, b.upper))
        .collect()
}

/// Support function of the box; `+∞` outside the barrier cone.
pub fn support_function(v: &[f64], bounds: &Bounds) -> f64 {
    bounds.check(v);
    v.iter()
        .zip(bounds.iter())
        .map(|(&x, b)| support_term(x, b.lower, b.upper))
        .sum()
}

pub fn project_barrier_cone(v: &[f64], bounds: &Bounds) -> Vec<f64> {
    bounds.check(v);
    v.iter()
        .zip(bounds.iter())
        .map(|(&x, b)| barrier_component(x, b.lower, b.upper))
        .collect()
}

pub fn project_recession_cone(v: &[f64], bounds: &Bounds) -> Vec<f64> {
    bounds.check(v);
    v.iter()
        .zip(bounds.iter())
        .map(|(&x, b)| recession_component(x, b.lower, b.upper))
        .collect()
}
