//! Min-max of finitely many affine functions over a probability simplex.
//!
//! `min_z max_k (c_k - <a_k, z>)` over `z` in the simplex is the value of a
//! matrix game with entries `G[k][j] = c_k - a_k[j]`. After shifting `G` to be
//! positive the minimizer solves `max 1'w  s.t.  G w <= 1, w >= 0`, which has the
//! origin as a feasible basis, so a single-phase dense simplex suffices.

use crate::error::{input, Error, Result};

/// Pivot cap; Bland's rule cannot cycle, so hitting it signals numerical trouble.
pub const MAX_PIVOTS: usize = 10_000;

const PIVOT_EPS: f64 = 1e-12;

/// `constant - <coeffs, z>`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePiece {
    pub constant: f64,
    pub coeffs: Vec<f64>,
}

impl AffinePiece {
    pub fn new(constant: f64, coeffs: Vec<f64>) -> Self {
        Self { constant, coeffs }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.constant - self.coeffs.iter().zip(z).map(|(a, b)| a * b).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxSolution {
    pub value: f64,
    pub minimizer: Vec<f64>,
    pub pivots: usize,
}

/// Upper envelope of `pieces` at `z`.
pub fn envelope(pieces: &[AffinePiece], z: &[f64]) -> f64 {
    pieces.iter().map(|p| p.eval(z)).fold(f64::NEG_INFINITY, f64::max)
}

pub fn solve_minimax_lp(pieces: &[AffinePiece], dim: usize) -> Result<MinimaxSolution> {
    if pieces.is_empty() {
        return input("at least one affine piece is required");
    }
    if dim == 0 {
        return input("simplex dimension must be positive");
    }
    if let Some(k) = pieces.iter().position(|p| p.coeffs.len() != dim) {
        return input(format!("piece {k} has {} coefficients, expected {dim}", pieces[k].coeffs.len()));
    }
    if pieces.iter().any(|p| !p.constant.is_finite() || p.coeffs.iter().any(|a| !a.is_finite())) {
        return input("affine pieces must be finite");
    }

    let rows = pieces.len();
    let g_min = pieces
        .iter()
        .flat_map(|p| p.coeffs.iter().map(move |a| p.constant - a))
        .fold(f64::INFINITY, f64::min);
    let shift = 1.0 - g_min;

    // Tableau: `rows` constraint rows over `dim` structural + `rows` slack columns, then rhs.
    let width = dim + rows + 1;
    let mut t = vec![0.0; rows * width];
    for (k, p) in pieces.iter().enumerate() {
        let row = &mut t[k * width..(k + 1) * width];
        for (r, a) in row[..dim].iter_mut().zip(&p.coeffs) {
            *r = p.constant - a + shift;
        }
        row[dim + k] = 1.0;
        row[width - 1] = 1.0;
    }
    // Reduced costs of the maximization objective sum(w).
    let mut cost = vec![0.0; dim + rows];
    cost[..dim].fill(1.0);
    let mut basis: Vec<usize> = (dim..dim + rows).collect();

    let mut pivots = 0;
    while let Some(enter) = (0..dim + rows).find(|&j| cost[j] > PIVOT_EPS) {
        if pivots >= MAX_PIVOTS {
            return Err(Error::Solver(format!("pivot cap {MAX_PIVOTS} exceeded")));
        }
        // Ratio test; ties broken by the smallest basic index (Bland).
        let mut leave: Option<(usize, f64)> = None;
        for k in 0..rows {
            let a = t[k * width + enter];
            if a > PIVOT_EPS {
                let ratio = t[k * width + width - 1] / a;
                leave = match leave {
                    None => Some((k, ratio)),
                    Some((l, r)) if ratio < r - 1e-15 || (ratio <= r + 1e-15 && basis[k] < basis[l]) => {
                        Some((k, ratio))
                    }
                    keep => keep,
                };
            }
        }
        let Some((prow, _)) = leave else {
            return Err(Error::Solver("unbounded direction in a bounded program".into()));
        };
        let pv = t[prow * width + enter];
        for j in 0..width {
            t[prow * width + j] /= pv;
        }
        for k in 0..rows {
            if k == prow {
                continue;
            }
            let f = t[k * width + enter];
            if f != 0.0 {
                for j in 0..width {
                    t[k * width + j] -= f * t[prow * width + j];
                }
            }
        }
        let f = cost[enter];
        for j in 0..dim + rows {
            cost[j] -= f * t[prow * width + j];
        }
        basis[prow] = enter;
        pivots += 1;
    }

    let mut w = vec![0.0; dim];
    for (k, &b) in basis.iter().enumerate() {
        if b < dim {
            w[b] = t[k * width + width - 1].max(0.0);
        }
    }
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Solver("degenerate optimum with empty support".into()));
    }
    let minimizer: Vec<f64> = w.iter().map(|x| x / total).collect();
    let value = envelope(pieces, &minimizer);
    Ok(MinimaxSolution { value, minimizer, pivots })
}
