//! Overlap between decoded and planted receptive fields.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};
use crate::types::{BinaryWeights, Matrix};

/// Largest `P` matched by exhaustive search over permutations.
pub const EXHAUSTIVE_MATCH_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MatchMethod {
    Exhaustive,
    /// Descending `|q|` with row/column elimination; not guaranteed optimal.
    Greedy,
}

/// Overlaps after matching hidden units up to permutation and sign.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct OverlapReport {
    /// `Q^μ = s_μ q_{μ,π(μ)}`, indexed by predicted unit.
    pub per_hidden_q: Vec<f64>,
    /// `π(μ)`: planted unit assigned to predicted unit `μ`.
    pub permutation: Vec<usize>,
    pub signs: Vec<i8>,
    pub mean_q: f64,
    /// `q_{μν} = (1/N) Σ_i ξ_i^{μ,prd} ξ_i^{ν,plt}`.
    pub raw_q_matrix: Matrix,
    /// Unmatched diagonal `q_{μμ}`.
    pub raw_diagonal: Vec<f64>,
    pub method: MatchMethod,
}

/// All cross overlaps `q_{μν}`.
pub fn overlap_matrix(predicted: &BinaryWeights, planted: &BinaryWeights) -> Result<Matrix> {
    let (a, b) = (predicted.shape(), planted.shape());
    check_dim("visible units", b.n_visible, a.n_visible)?;
    check_dim("hidden units", b.n_hidden, a.n_hidden)?;
    let (n, p) = (a.n_visible, a.n_hidden);
    let mut dots = vec![0i64; p * p];
    for i in 0..n {
        for mu in 0..p {
            let x = i64::from(predicted.get(i, mu));
            for nu in 0..p {
                dots[mu * p + nu] += x * i64::from(planted.get(i, nu));
            }
        }
    }
    Matrix::from_vec(p, p, dots.into_iter().map(|d| d as f64 / n as f64).collect())
}

/// Raw diagonal overlaps `Q^μ = (1/N) ξ^{μ,prd} · ξ^{μ,plt}`, no matching.
pub fn unmatched_overlap(predicted: &BinaryWeights, planted: &BinaryWeights) -> Result<Vec<f64>> {
    let q = overlap_matrix(predicted, planted)?;
    Ok((0..q.rows()).map(|mu| q[(mu, mu)]).collect())
}

/// Matches predicted to planted units, maximizing `Σ_μ |q_{μ,π(μ)}|`, with
/// the sign of each pair chosen to make its overlap non-negative.
pub fn matched_overlap(predicted: &BinaryWeights, planted: &BinaryWeights) -> Result<OverlapReport> {
    let q = overlap_matrix(predicted, planted)?;
    let p = q.rows();
    let (permutation, method) = if p <= EXHAUSTIVE_MATCH_LIMIT {
        (best_permutation(&q), MatchMethod::Exhaustive)
    } else {
        (greedy_permutation(&q), MatchMethod::Greedy)
    };
    let signs: Vec<i8> = (0..p)
        .map(|mu| if q[(mu, permutation[mu])] < 0.0 { -1 } else { 1 })
        .collect();
    let per_hidden_q: Vec<f64> = (0..p)
        .map(|mu| f64::from(signs[mu]) * q[(mu, permutation[mu])])
        .collect();
    let mean_q = per_hidden_q.iter().sum::<f64>() / p as f64;
    let raw_diagonal = (0..p).map(|mu| q[(mu, mu)]).collect();
    Ok(OverlapReport {
        per_hidden_q,
        permutation,
        signs,
        mean_q,
        raw_q_matrix: q,
        raw_diagonal,
        method,
    })
}

fn best_permutation(q: &Matrix) -> Vec<usize> {
    let p = q.rows();
    let mut perm: Vec<usize> = (0..p).collect();
    let profile = |perm: &[usize]| -> (f64, Vec<f64>) {
        let mut abs: Vec<f64> = perm.iter().enumerate().map(|(mu, nu)| q[(mu, *nu)].abs()).collect();
        let total = abs.iter().sum();
        abs.sort_by(|a, b| b.total_cmp(a));
        (total, abs)
    };
    // Ties in the total are broken by the sorted overlaps, largest first, so
    // the reported multiset does not depend on the order of the predicted
    // columns. Full ties keep the earliest permutation visited (identity).
    let better = |cand: &(f64, Vec<f64>), best: &(f64, Vec<f64>)| {
        if cand.0 > best.0 + 1e-12 {
            true
        } else if cand.0 < best.0 - 1e-12 {
            false
        } else {
            cand.1.iter().zip(&best.1).find(|(a, b)| a != b).is_some_and(|(a, b)| a > b)
        }
    };
    let mut best = perm.clone();
    let mut best_profile = profile(&perm);
    // Heap's algorithm, iterative form
    let mut c = vec![0usize; p];
    let mut k = 1;
    while k < p {
        if c[k] < k {
            if k % 2 == 0 {
                perm.swap(0, k);
            } else {
                perm.swap(c[k], k);
            }
            let cand = profile(&perm);
            if better(&cand, &best_profile) {
                best_profile = cand;
                best.copy_from_slice(&perm);
            }
            c[k] += 1;
            k = 1;
        } else {
            c[k] = 0;
            k += 1;
        }
    }
    best
}

fn greedy_permutation(q: &Matrix) -> Vec<usize> {
    let p = q.rows();
    let mut cells: Vec<(usize, usize)> = (0..p).flat_map(|r| (0..p).map(move |c| (r, c))).collect();
    cells.sort_by(|a, b| {
        q[*b].abs()
            .partial_cmp(&q[*a].abs())
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(b))
    });
    let mut perm = vec![usize::MAX; p];
    let mut used = vec![false; p];
    for (r, c) in cells {
        if perm[r] == usize::MAX && !used[c] {
            perm[r] = c;
            used[c] = true;
        }
    }
    perm
}
