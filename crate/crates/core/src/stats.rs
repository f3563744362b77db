//! Paired statistics: Wilcoxon signed-rank test, medians and means.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::math;

pub const MIN_PAIRS: usize = 20;

/// Largest number of non-zero differences for which the exact null
/// distribution is enumerated; above it the tie-corrected normal
/// approximation with continuity correction is used.
pub const EXACT_LIMIT: usize = 400;

/// Two-sided Wilcoxon signed-rank p-value for paired samples.
///
/// Zero differences are dropped; ties share their average rank. When every
/// difference is zero the p-value is 1.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        bail!(Arity, "paired samples of length {} and {}", a.len(), b.len());
    }
    if a.len() < MIN_PAIRS {
        bail!(Arity, "need at least {MIN_PAIRS} pairs, got {}", a.len());
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        bail!(Data, "paired samples contain non-finite values");
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(1.0);
    }
    let (ranks2, tie_term) = doubled_ranks(&diffs);
    let w_plus2: usize = diffs
        .iter()
        .zip(&ranks2)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| *r)
        .sum();
    let p = if n <= EXACT_LIMIT {
        exact_two_sided(&ranks2, w_plus2)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
        if var <= 0.0 {
            return Ok(1.0);
        }
        let w = w_plus2 as f64 / 2.0;
        let z = (math::abs(w - mean) - 0.5).max(0.0) / math::sqrt(var);
        math::erfc(z / core::f64::consts::SQRT_2)
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Twice the average rank of each `|d|` (always an integer), and the tie
/// correction `Σ (t³ - t)`.
fn doubled_ranks(diffs: &[f64]) -> (Vec<usize>, f64) {
    let n = diffs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| math::abs(diffs[i]).total_cmp(&math::abs(diffs[j])));
    let mut ranks2 = vec![0usize; n];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && math::abs(diffs[order[j]]) == math::abs(diffs[order[i]]) {
            j += 1;
        }
        // ranks i+1..=j share (i+1+j)/2
        let r2 = i + 1 + j;
        for &k in &order[i..j] {
            ranks2[k] = r2;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    (ranks2, tie_term)
}

/// Exact sign-flip null distribution of the (doubled) positive rank sum.
fn exact_two_sided(ranks2: &[usize], observed: usize) -> f64 {
    let total: usize = ranks2.iter().sum();
    let mut dist = vec![0.0f64; total + 1];
    dist[0] = 1.0;
    let mut reach = 0;
    for &r in ranks2 {
        for s in (0..=reach).rev() {
            let half = dist[s] * 0.5;
            dist[s] = half;
            dist[s + r] += half;
        }
        reach += r;
    }
    let lower: f64 = dist[..=observed].iter().sum();
    let upper: f64 = dist[observed..].iter().sum();
    (2.0 * lower.min(upper)).min(1.0)
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}
