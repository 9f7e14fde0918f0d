//! Dense two-phase simplex for the tiny linear programs this crate needs
//! (a handful of free variables, a few dozen inequality rows).
//!
//! Problem form: maximize `c·x` subject to `A x ≤ b`, `x` free.
//! Bland's rule is used throughout, so degenerate pivots cannot cycle.

use alloc::vec;
use alloc::vec::Vec;

const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

/// Maximizes `c·x` subject to `rows[i]·x ≤ rhs[i]` with `x ∈ ℝⁿ` free.
pub fn maximize(c: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> LpOutcome {
    let n = c.len();
    let m = rows.len();
    debug_assert_eq!(m, rhs.len());
    // Columns: x⁺ (n), x⁻ (n), slack (m), artificial (m); last column is the rhs.
    let n_struct = 2 * n;
    let n_cols = n_struct + 2 * m;
    let mut t = vec![vec![0.0; n_cols + 1]; m];
    let mut basis = vec![0usize; m];
    let mut has_artificial = false;
    for i in 0..m {
        let sign = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * rows[i][j];
            t[i][n + j] = -sign * rows[i][j];
        }
        t[i][n_struct + i] = sign;
        t[i][n_cols] = sign * rhs[i];
        if sign < 0.0 {
            t[i][n_struct + m + i] = 1.0;
            basis[i] = n_struct + m + i;
            has_artificial = true;
        } else {
            basis[i] = n_struct + i;
        }
    }
    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .chain(rhs.iter())
        .fold(1.0f64, |s, v| s.max(v.abs()));
    let tol = PIVOT_TOL * scale;

    if has_artificial {
        // Phase 1: maximize −Σ artificials.
        let mut obj = vec![0.0; n_cols + 1];
        for j in n_struct + m..n_cols {
            obj[j] = -1.0;
        }
        let allowed = |_j: usize| true;
        let _ = run_simplex(&mut t, &mut basis, &obj, &allowed, tol, true);
        let infeas: f64 = (0..m)
            .filter(|&i| basis[i] >= n_struct + m)
            .map(|i| t[i][n_cols])
            .sum();
        if infeas > 1e-9 * scale {
            return LpOutcome::Infeasible;
        }
        // Drive remaining (zero-level) artificials out of the basis.
        for i in 0..m {
            if basis[i] >= n_struct + m {
                if let Some(j) = (0..n_struct + m).find(|&j| t[i][j].abs() > tol) {
                    pivot(&mut t, &mut basis, i, j);
                }
            }
        }
    }

    let mut obj = vec![0.0; n_cols + 1];
    for j in 0..n {
        obj[j] = c[j];
        obj[n + j] = -c[j];
    }
    let limit = n_struct + m;
    let allowed = move |j: usize| j < limit;
    match run_simplex(&mut t, &mut basis, &obj, &allowed, tol, false) {
        Err(()) => LpOutcome::Unbounded,
        Ok(()) => {
            let mut full = vec![0.0; n_cols];
            for i in 0..m {
                full[basis[i]] = t[i][n_cols];
            }
            let x: Vec<f64> = (0..n).map(|j| full[j] - full[n + j]).collect();
            let value = x.iter().zip(c).map(|(a, b)| a * b).sum();
            LpOutcome::Optimal { x, value }
        }
    }
}

/// Minimizes `c·x` subject to `rows·x ≤ rhs`.
pub fn minimize(c: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> LpOutcome {
    let neg: Vec<f64> = c.iter().map(|v| -v).collect();
    match maximize(&neg, rows, rhs) {
        LpOutcome::Optimal { x, value } => LpOutcome::Optimal { x, value: -value },
        other => other,
    }
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i != row {
            let f = r[col];
            if f != 0.0 {
                for (a, b) in r.iter_mut().zip(&pivot_row) {
                    *a -= f * b;
                }
            }
        }
    }
    basis[row] = col;
}

/// Maximizes `obj` over the current tableau. `Err(())` signals unboundedness.
/// A column with a tiny positive reduced cost and no admissible pivot row is
/// roundoff, not a ray, and is skipped; so is every such column in phase 1,
/// whose objective is bounded above by 0.
fn run_simplex(
    t: &mut [Vec<f64>],
    basis: &mut [usize],
    obj: &[f64],
    allowed: &dyn Fn(usize) -> bool,
    tol: f64,
    phase_one: bool,
) -> Result<(), ()> {
    let m = t.len();
    let obj_scale = obj.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    if m == 0 {
        return if !phase_one && obj.iter().take(obj.len() - 1).any(|&c| c > 0.0) {
            Err(())
        } else {
            Ok(())
        };
    }
    let n_cols = t[0].len() - 1;
    'outer: for _iter in 0..10_000 {
        // Reduced cost r_j = obj_j − Σ_i obj_{basis i} t[i][j]; Bland order.
        for col in 0..n_cols {
            if !allowed(col) || basis.contains(&col) {
                continue;
            }
            let r = obj[col] - (0..m).map(|i| obj[basis[i]] * t[i][col]).sum::<f64>();
            if r <= 1e-12 * obj_scale {
                continue;
            }
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                if t[i][col] > tol {
                    let ratio = t[i][n_cols] / t[i][col];
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-14 || (ratio <= lr + 1e-14 && basis[i] < basis[li]) {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            match leave {
                Some((row, _)) => {
                    pivot(t, basis, row, col);
                    continue 'outer;
                }
                None if !phase_one && r > 1e-9 * obj_scale => return Err(()),
                None => continue,
            }
        }
        return Ok(());
    }
    Ok(())
}
