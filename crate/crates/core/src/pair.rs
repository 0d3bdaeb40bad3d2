//! Distributions over a single pair of ±1 outcomes.

use crate::error::{Error, Result};
use crate::geometry::UnitVector3;

/// The two outcomes in canonical order: `+1` first.
pub const OUTCOMES: [i8; 2] = [1, -1];

/// Storage index of a ±1 outcome.
pub fn outcome_index(v: i8) -> usize {
    if v > 0 {
        0
    } else {
        1
    }
}

/// A joint distribution over `(a, b) ∈ {±1}²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDistribution {
    /// `p[outcome_index(a)][outcome_index(b)]`.
    p: [[f64; 2]; 2],
}

impl PairDistribution {
    pub fn from_fn<F: FnMut(i8, i8) -> f64>(mut f: F) -> Self {
        let mut p = [[0.0; 2]; 2];
        for a in OUTCOMES {
            for b in OUTCOMES {
                p[outcome_index(a)][outcome_index(b)] = f(a, b);
            }
        }
        Self { p }
    }

    /// The singlet-state joint distribution `(1 − ab·x·y)/4`.
    pub fn singlet(x: &UnitVector3, y: &UnitVector3) -> Self {
        let d = x.dot(y);
        Self::from_fn(|a, b| (1.0 - (a as f64) * (b as f64) * d) / 4.0)
    }

    pub fn uniform() -> Self {
        Self { p: [[0.25; 2]; 2] }
    }

    pub fn prob(&self, a: i8, b: i8) -> f64 {
        self.p[outcome_index(a)][outcome_index(b)]
    }

    pub fn sum(&self) -> f64 {
        self.p.iter().flatten().sum()
    }

    pub fn marginal_a(&self, a: i8) -> f64 {
        self.p[outcome_index(a)].iter().sum()
    }

    pub fn marginal_b(&self, b: i8) -> f64 {
        self.p[0][outcome_index(b)] + self.p[1][outcome_index(b)]
    }

    /// `E = Σ ab·p(a,b)`.
    pub fn correlator(&self) -> f64 {
        self.p[0][0] - self.p[0][1] - self.p[1][0] + self.p[1][1]
    }

    /// Checks nonnegativity (within `tol`) and normalization (within `tol`).
    pub fn validate(&self, tol: f64) -> Result<()> {
        for row in &self.p {
            for &v in row {
                if !v.is_finite() || v < -tol {
                    return Err(Error::Validation(format!(
                        "pair probability {v} is negative or non-finite"
                    )));
                }
            }
        }
        let s = self.sum();
        if (s - 1.0).abs() > tol {
            return Err(Error::Validation(format!("pair probabilities sum to {s}, not 1")));
        }
        Ok(())
    }

    /// Largest entrywise deviation from another distribution.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for a in OUTCOMES {
            for b in OUTCOMES {
                worst = worst.max((self.prob(a, b) - other.prob(a, b)).abs());
            }
        }
        worst
    }
}
