//! The partition pseudometric `d(P, Q) = min_π Σ μ(A_i △ B_{π(i)})`.

use crate::error::{Error, Result};

/// Largest class count handled by the exact assignment.
pub const MAX_CLASSES: usize = 64;

/// Distance between two labelings of a common finite refinement.
///
/// `masses[c]` is the measure of refinement cell `c`; `p[c]` and `q[c]` are
/// its class labels in `0..m`. Missing labels are empty classes.
pub fn partition_distance(masses: &[f64], p: &[usize], q: &[usize], m: usize) -> Result<f64> {
    if masses.len() != p.len() || masses.len() != q.len() {
        return Err(Error::InconsistentRefinement(format!(
            "refinement has {} cells but labelings have {} and {}",
            masses.len(),
            p.len(),
            q.len()
        )));
    }
    if m == 0 || m > MAX_CLASSES {
        return Err(Error::InconsistentRefinement(format!(
            "class count {m} outside 1..={MAX_CLASSES}"
        )));
    }
    if let Some(&bad) = p.iter().chain(q).find(|&&l| l >= m) {
        return Err(Error::InconsistentRefinement(format!(
            "label {bad} is not below m = {m}"
        )));
    }
    if masses.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
        return Err(Error::InconsistentRefinement(
            "cell masses must be finite and nonnegative".into(),
        ));
    }
    let mut mu_a = vec![0.0; m];
    let mut mu_b = vec![0.0; m];
    let mut inter = vec![vec![0.0; m]; m];
    for ((&w, &i), &j) in masses.iter().zip(p).zip(q) {
        mu_a[i] += w;
        mu_b[j] += w;
        inter[i][j] += w;
    }
    let cost: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| (mu_a[i] + mu_b[j] - 2.0 * inter[i][j]).max(0.0))
                .collect()
        })
        .collect();
    let assign = hungarian(&cost);
    Ok(assign.iter().enumerate().map(|(i, &j)| cost[i][j]).sum())
}

/// Minimum-cost perfect matching on a square matrix; returns row → column.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // Potentials and matching use 1-based indices with a sentinel column 0.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut col_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        col_row[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_col = vec![0; n];
    for j in 1..=n {
        row_col[col_row[j] - 1] = j - 1;
    }
    row_col
}
