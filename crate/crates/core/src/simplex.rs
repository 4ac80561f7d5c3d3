//! Dense two-phase simplex with Bland's rule.
//!
//! Sized for this pipeline: a handful of variables (state dimension, or
//! zonotope generator count) against at most a few hundred rows. Bland's
//! rule makes every pivot choice the lowest admissible index, which both
//! prevents cycling and keeps runs deterministic.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("simplex exceeded the pivot cap (degenerate or ill-conditioned input)")]
    NumericalInstability,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    /// Maximiser and objective value.
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

const PIVOT_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 20_000;

/// Maximise `c·x` subject to `rows[i]·x ≤ rhs[i]` and finite variable
/// bounds `lo ≤ x ≤ hi`.
pub fn maximize(
    c: &[f64],
    rows: &[Vec<f64>],
    rhs: &[f64],
    bounds: &[(f64, f64)],
) -> Result<LpOutcome, LpError> {
    let n = c.len();
    debug_assert!(bounds.len() == n);
    debug_assert!(rows.iter().all(|r| r.len() == n));
    debug_assert!(bounds.iter().all(|(lo, hi)| lo.is_finite() && hi.is_finite() && lo <= hi));

    // Shift to z = x − lo ≥ 0 and add the upper bounds as rows.
    let lo: Vec<f64> = bounds.iter().map(|b| b.0).collect();
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(rows.len() + n);
    let mut b: Vec<f64> = Vec::with_capacity(rows.len() + n);
    for (row, &r) in rows.iter().zip(rhs) {
        let dot: f64 = row.iter().zip(&lo).map(|(v, l)| v * l).sum();
        a.push(row.clone());
        b.push(r - dot);
    }
    for j in 0..n {
        let mut row = vec![0.0; n];
        row[j] = 1.0;
        a.push(row);
        b.push(bounds[j].1 - bounds[j].0);
    }

    let m = a.len();
    // Columns: n structural, m slacks, then one artificial per negative
    // rhs row; the final column is the rhs.
    let neg_rows: Vec<usize> = (0..m).filter(|&i| b[i] < 0.0).collect();
    let n_art = neg_rows.len();
    let width = n + m + n_art + 1;
    let mut t = vec![vec![0.0; width]; m];
    let mut basis = vec![0usize; m];
    let mut art_col = n + m;
    for i in 0..m {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = flip * a[i][j];
        }
        t[i][n + i] = flip;
        t[i][width - 1] = flip * b[i];
        if flip < 0.0 {
            t[i][art_col] = 1.0;
            basis[i] = art_col;
            art_col += 1;
        } else {
            basis[i] = n + i;
        }
    }

    let mut pivots = 0usize;

    if n_art > 0 {
        // Phase 1: maximise −Σ artificials. In the `z_j − c_j` convention
        // the objective row starts as +1 on artificial columns minus the
        // sum of the artificial-basic rows; its rhs tracks −Σ a_i.
        let mut obj = vec![0.0; width];
        for j in n + m..width - 1 {
            obj[j] = 1.0;
        }
        for i in 0..m {
            if basis[i] >= n + m {
                for j in 0..width {
                    obj[j] -= t[i][j];
                }
            }
        }
        run_simplex(&mut t, &mut obj, &mut basis, n + m, &mut pivots)?;
        if obj[width - 1] < -FEAS_EPS {
            return Ok(LpOutcome::Infeasible);
        }
        // Pivot remaining artificials out where possible; rows where we
        // cannot are redundant and harmless at value zero.
        for i in 0..m {
            if basis[i] >= n + m {
                if let Some(j) = (0..n + m).find(|&j| t[i][j].abs() > PIVOT_EPS) {
                    pivot(&mut t, &mut basis, i, j);
                    pivots += 1;
                }
            }
        }
    }

    // Phase 2 on the real objective (artificial columns frozen).
    let mut obj = vec![0.0; width];
    for j in 0..n {
        obj[j] = -c[j];
    }
    for i in 0..m {
        let bj = basis[i];
        if bj < n && c[bj] != 0.0 {
            let factor = c[bj];
            for j in 0..width {
                obj[j] += factor * t[i][j];
            }
        }
    }
    match run_simplex(&mut t, &mut obj, &mut basis, n + m, &mut pivots)? {
        true => {}
        false => return Ok(LpOutcome::Unbounded),
    }

    let mut z = vec![0.0; n];
    for i in 0..m {
        if basis[i] < n {
            z[basis[i]] = t[i][width - 1];
        }
    }
    let x: Vec<f64> = z.iter().zip(&lo).map(|(v, l)| v + l).collect();
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpOutcome::Optimal { x, objective })
}

/// Bland-rule simplex on the current objective row; returns false on
/// unboundedness. Columns `>= allowed` (artificials) never enter.
fn run_simplex(
    t: &mut [Vec<f64>],
    obj: &mut Vec<f64>,
    basis: &mut [usize],
    allowed: usize,
    pivots: &mut usize,
) -> Result<bool, LpError> {
    let m = t.len();
    let width = obj.len();
    loop {
        // Entering: lowest index with negative reduced cost.
        let Some(enter) = (0..allowed).find(|&j| obj[j] < -PIVOT_EPS) else {
            return Ok(true);
        };
        // Leaving: min ratio, ties broken by lowest basis index (Bland).
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if t[i][enter] > PIVOT_EPS {
                let ratio = t[i][width - 1] / t[i][enter];
                let better = ratio < best - PIVOT_EPS
                    || (ratio < best + PIVOT_EPS
                        && leave.is_some_and(|l| basis[i] < basis[l]));
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            return Ok(false);
        };
        pivot_with_obj(t, obj, basis, leave, enter);
        *pivots += 1;
        if *pivots > MAX_PIVOTS {
            return Err(LpError::NumericalInstability);
        }
    }
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let width = t[row].len();
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    for i in 0..t.len() {
        if i != row && t[i][col].abs() > 0.0 {
            let f = t[i][col];
            for j in 0..width {
                t[i][j] -= f * t[row][j];
            }
        }
    }
    basis[row] = col;
}

fn pivot_with_obj(
    t: &mut [Vec<f64>],
    obj: &mut [f64],
    basis: &mut [usize],
    row: usize,
    col: usize,
) {
    pivot(t, basis, row, col);
    let f = obj[col];
    if f != 0.0 {
        for j in 0..obj.len() {
            obj[j] -= f * t[row][j];
        }
    }
}
