//! Phase-1 simplex for linear feasibility: find x ≥ 0 with Ax = b, or report
//! the optimal artificial mass together with a Farkas certificate. Dense
//! tableau with Bland's anti-cycling rule — the systems here are small
//! (local-polytope membership over a handful of settings), so simplicity and
//! exact certificates beat sparse sophistication.

use crate::error::{Error, Result};

/// Entering-column threshold: reduced costs above −this are treated as
/// optimal.
pub const REDUCED_COST_TOL: f64 = 1e-12;

/// Smallest pivot magnitude accepted in the ratio test.
pub const PIVOT_TOL: f64 = 1e-11;

/// Iteration cap; Bland's rule terminates, so hitting this indicates a bug.
pub const MAX_ITERATIONS: usize = 50_000;

/// Result of minimizing the artificial mass `Σ s_i` subject to
/// `Ax + s = b`, `x, s ≥ 0`.
#[derive(Debug, Clone)]
pub struct Phase1Solution {
    /// Optimal total artificial mass; ≈ 0 iff the system is feasible.
    pub objective: f64,
    /// Structural variables at the optimum (a feasible point when
    /// `objective ≈ 0`).
    pub x: Vec<f64>,
    /// Dual vector y with `yᵀA ≤ 0` componentwise and `yᵀb = objective`;
    /// a Farkas infeasibility certificate whenever the objective is positive.
    pub dual: Vec<f64>,
    /// Simplex pivots performed.
    pub iterations: usize,
}

/// Minimizes `Σ s_i` over `Ax + s = b (after sign-normalizing rows), x, s ≥ 0`
/// with Bland's rule. `a` is row-major, `a.len()` rows by `x.len()` columns.
pub fn phase1(a: &[Vec<f64>], b: &[f64]) -> Result<Phase1Solution> {
    let m = a.len();
    if m == 0 || b.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} constraint rows vs {} right-hand sides",
            m,
            b.len()
        )));
    }
    let n = a[0].len();
    if n == 0 {
        return Err(Error::InvalidInput("no structural variables".into()));
    }
    for (i, row) in a.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) || !b[i].is_finite() {
            return Err(Error::Validation(format!("row {i} contains non-finite values")));
        }
    }

    // Tableau: m constraint rows + 1 objective row; columns = n structural,
    // m artificial, 1 right-hand side. Rows are sign-normalized so b ≥ 0 and
    // the artificial basis is feasible. Row flips negate the certificate
    // component, undone at extraction.
    let cols = n + m + 1;
    let mut t = vec![vec![0.0f64; cols]; m + 1];
    let mut flipped = vec![false; m];
    for i in 0..m {
        let sign = if b[i] < 0.0 {
            flipped[i] = true;
            -1.0
        } else {
            1.0
        };
        for j in 0..n {
            t[i][j] = sign * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][cols - 1] = sign * b[i];
    }
    // Objective row: reduced costs of min Σ s_i with the artificial basis,
    // i.e. c_j − Σ_i T[i][j]; the rhs entry carries −(current objective).
    t[m] = (0..cols)
        .map(|j| {
            let c = if j >= n && j < n + m { 1.0 } else { 0.0 };
            c - (0..m).map(|i| t[i][j]).sum::<f64>()
        })
        .collect();

    let mut basis: Vec<usize> = (0..m).map(|i| n + i).collect();
    let mut iterations = 0usize;
    loop {
        // Bland: entering column = smallest index with negative reduced cost.
        let entering = (0..n + m).find(|&j| t[m][j] < -REDUCED_COST_TOL);
        let Some(e) = entering else { break };

        // Ratio test; ties broken by smallest basis label (Bland).
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            if t[i][e] > PIVOT_TOL {
                let ratio = t[i][cols - 1] / t[i][e];
                let better = match leave {
                    None => true,
                    Some(r) => {
                        ratio < best_ratio - 1e-15
                            || ((ratio - best_ratio).abs() <= 1e-15 && basis[i] < basis[r])
                    }
                };
                if better {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(r) = leave else {
            // Phase-1 objective is bounded below by 0, so an unbounded ray
            // means numerical breakdown.
            return Err(Error::Internal("phase-1 simplex found an unbounded direction".into()));
        };

        // Pivot on (r, e).
        let pivot = t[r][e];
        for v in t[r].iter_mut() {
            *v /= pivot;
        }
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r {
                let factor = row[e];
                if factor != 0.0 {
                    for (v, p) in row.iter_mut().zip(&pivot_row) {
                        *v -= factor * p;
                    }
                }
            }
        }
        basis[r] = e;
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            return Err(Error::Internal(format!(
                "phase-1 simplex exceeded {MAX_ITERATIONS} pivots"
            )));
        }
    }

    let objective = -t[m][cols - 1];
    let mut x = vec![0.0; n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[i][cols - 1];
        }
    }
    // Reduced cost of artificial i is 1 − y_i in the sign-normalized system;
    // undo row flips to express y against the original rows.
    let dual: Vec<f64> = (0..m)
        .map(|i| {
            let y = 1.0 - t[m][n + i];
            if flipped[i] {
                -y
            } else {
                y
            }
        })
        .collect();
    Ok(Phase1Solution { objective, x, dual, iterations })
}
