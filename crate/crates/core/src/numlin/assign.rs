use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Result of pairing a computed spectrum with a predicted one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumMatch {
    /// `pairing[i]` is the index of the computed value matched to `predicted[i]`.
    pub pairing: Vec<usize>,
    pub max_abs_gap: f64,
    /// Gap divided by `max(1, |predicted|)`.
    pub max_rel_gap: f64,
}

/// Minimum-cost perfect assignment (Hungarian method with potentials).
/// Returns `assign[row] = col`.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    // 1-based arrays; index 0 is the virtual row/column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
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
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Optimal matching of `computed` against `predicted` minimizing the total
/// absolute gap.
pub fn match_spectra(computed: &[Complex64], predicted: &[Complex64]) -> Result<SpectrumMatch> {
    if computed.len() != predicted.len() {
        return Err(Error::LengthMismatch { left: computed.len(), right: predicted.len() });
    }
    let cost: Vec<Vec<f64>> = predicted.iter().map(|p| computed.iter().map(|c| (c - p).norm()).collect()).collect();
    let pairing = min_cost_assignment(&cost);
    let mut max_abs_gap = 0.0f64;
    let mut max_rel_gap = 0.0f64;
    for (i, &j) in pairing.iter().enumerate() {
        let gap = cost[i][j];
        max_abs_gap = max_abs_gap.max(gap);
        max_rel_gap = max_rel_gap.max(gap / predicted[i].norm().max(1.0));
    }
    Ok(SpectrumMatch { pairing, max_abs_gap, max_rel_gap })
}
