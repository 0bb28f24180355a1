//! Matrix profile: all-pairs similarity join over observation-sequence
//! subsequences, arc curves, and change-point detection.

mod arcs;
mod mass;
mod stomp;

pub use arcs::{corrected_arc_curve, detect_change, detect_change_with, CacResult, DetectParams};
pub use mass::{distance_profile, sliding_dot_product};
pub use stomp::{matrix_profile, matrix_profile_of};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MpError {
    #[error("subsequence lengths differ: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("invalid subsequence length {l} for sequence of {p} points")]
    InvalidLength { l: usize, p: usize },
    #[error("sequence of {p} points too short for subsequence length {l} (need p >= 2l)")]
    SequenceTooShort { p: usize, l: usize },
    #[error("exclusion radius {radius} invalid for {n} subsequences (need 1 <= radius < n - 1)")]
    InvalidExclusion { radius: usize, n: usize },
}

/// Matrix profile and companion nearest-neighbour index.
#[derive(Debug, Clone, PartialEq)]
pub struct MpResult {
    /// Z-normalised distance from each subsequence to its nearest
    /// non-trivial neighbour; length `p - l + 1`.
    pub profile: Vec<f64>,
    /// Position of that neighbour; `|index[i] - i| > exclusion_radius`.
    pub index: Vec<usize>,
    pub subseq_len: usize,
    pub exclusion_radius: usize,
}

impl MpResult {
    pub fn len(&self) -> usize {
        self.profile.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profile.is_empty()
    }
}

/// Variance floor below which a window counts as constant and z-normalises
/// to the zero vector.
const DEGENERATE_VAR_TOL: f64 = 1e-14;

/// Z-normalised Euclidean distance between two equal-length vectors.
/// Population standard deviation; zero-variance vectors map to the zero
/// vector rather than erroring.
pub fn znorm_distance(a: &[f64], b: &[f64]) -> Result<f64, MpError> {
    if a.len() != b.len() {
        return Err(MpError::LengthMismatch { a: a.len(), b: b.len() });
    }
    if a.len() < 2 {
        return Err(MpError::InvalidLength { l: a.len(), p: a.len() });
    }
    let za = znorm(a);
    let zb = znorm(b);
    let sum: f64 = za.iter().zip(zb.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum.sqrt())
}

fn znorm(v: &[f64]) -> Vec<f64> {
    let l = v.len() as f64;
    let mean = v.iter().sum::<f64>() / l;
    let var = (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / l).max(0.0);
    if var <= DEGENERATE_VAR_TOL * mean.powi(2).max(1.0) {
        return vec![0.0; v.len()];
    }
    let inv = 1.0 / var.sqrt();
    v.iter().map(|x| (x - mean) * inv).collect()
}

/// Per-window running statistics over all subsequences of length `l`.
pub(crate) struct WindowStats {
    /// Window means.
    pub mean: Vec<f64>,
    /// `1 / sigma` per window; 0 for degenerate windows.
    pub inv_sigma: Vec<f64>,
    /// Windows flagged as constant.
    pub degenerate: Vec<bool>,
    pub any_degenerate: bool,
}

pub(crate) fn window_stats(seq: &[f64], l: usize) -> WindowStats {
    let n = seq.len() - l + 1;
    let lf = l as f64;
    let mut cumsum = Vec::with_capacity(seq.len() + 1);
    let mut cumsq = Vec::with_capacity(seq.len() + 1);
    let (mut s, mut s2) = (0.0f64, 0.0f64);
    cumsum.push(0.0);
    cumsq.push(0.0);
    for &x in seq {
        s += x;
        s2 += x * x;
        cumsum.push(s);
        cumsq.push(s2);
    }
    let mut mean = Vec::with_capacity(n);
    let mut inv_sigma = Vec::with_capacity(n);
    let mut degenerate = Vec::with_capacity(n);
    let mut any = false;
    for i in 0..n {
        let m = (cumsum[i + l] - cumsum[i]) / lf;
        let var = ((cumsq[i + l] - cumsq[i]) / lf - m * m).max(0.0);
        let deg = var <= DEGENERATE_VAR_TOL * (m * m).max(1.0);
        mean.push(m);
        if deg {
            inv_sigma.push(0.0);
            degenerate.push(true);
            any = true;
        } else {
            inv_sigma.push(1.0 / var.sqrt());
            degenerate.push(false);
        }
    }
    WindowStats {
        mean,
        inv_sigma,
        degenerate,
        any_degenerate: any,
    }
}

/// Squared z-normalised distance from the sliding dot product `qt` and the
/// window statistics of subsequences `i` and `j`.
#[inline]
pub(crate) fn squared_dist(qt: f64, l: f64, stats: &WindowStats, i: usize, j: usize) -> f64 {
    if stats.any_degenerate && (stats.degenerate[i] || stats.degenerate[j]) {
        return if stats.degenerate[i] && stats.degenerate[j] {
            0.0
        } else {
            // One zero vector against a unit-energy z-vector: ||z||^2 = l.
            l
        };
    }
    let corr = (qt - l * stats.mean[i] * stats.mean[j]) * stats.inv_sigma[i] * stats.inv_sigma[j];
    (2.0 * (l - corr)).max(0.0)
}
