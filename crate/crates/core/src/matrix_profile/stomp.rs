//! All-pairs similarity join.
//!
//! The first row of sliding dot products comes from the FFT path; every
//! diagonal of the distance matrix is then propagated with the O(1)
//! dot-product recurrence, refreshed periodically with a direct dot product
//! to stop floating-point drift. Total cost O(p^2) with O(p) memory.

use super::mass::sliding_dot_product;
use super::{squared_dist, window_stats, MpError, MpResult, WindowStats};
use crate::preprocess::ObservationSequence;

/// Recurrence steps between exact dot-product refreshes. Caps accumulated
/// rounding independently of sequence length.
const REFRESH_INTERVAL: usize = 4096;

/// Matrix profile of an observation sequence.
pub fn matrix_profile(
    seq: &ObservationSequence,
    l: usize,
    exclusion_radius: usize,
) -> Result<MpResult, MpError> {
    matrix_profile_of(&seq.flat, l, exclusion_radius)
}

/// Matrix profile of a bare sequence: `profile[i]` is the z-normalised
/// distance from subsequence `i` to its nearest neighbour at least
/// `exclusion_radius + 1` positions away; `index[i]` is that neighbour
/// (ties resolve to the smallest index).
pub fn matrix_profile_of(
    seq: &[f64],
    l: usize,
    exclusion_radius: usize,
) -> Result<MpResult, MpError> {
    let p = seq.len();
    if l < 2 {
        return Err(MpError::InvalidLength { l, p });
    }
    if p < 2 * l {
        return Err(MpError::SequenceTooShort { p, l });
    }
    if exclusion_radius == 0 {
        return Err(MpError::InvalidExclusion {
            radius: exclusion_radius,
            n: p - l + 1,
        });
    }
    let n = p - l + 1;
    if exclusion_radius + 1 >= n {
        return Err(MpError::InvalidExclusion {
            radius: exclusion_radius,
            n,
        });
    }

    let stats = window_stats(seq, l);
    let first_row = sliding_dot_product(seq, &seq[..l]);
    let lf = l as f64;

    let mut best_sq = vec![f64::INFINITY; n];
    let mut best_j = vec![usize::MAX; n];

    // Walk each super-diagonal d = j - i; Hermitian symmetry of the distance
    // matrix updates both endpoints of every pair.
    for d in exclusion_radius + 1..n {
        let mut qt = first_row[d];
        step(&mut best_sq, &mut best_j, &stats, lf, qt, 0, d);
        for i in 1..n - d {
            let j = i + d;
            if i % REFRESH_INTERVAL == 0 {
                qt = dot(&seq[i..i + l], &seq[j..j + l]);
            } else {
                qt += seq[i + l - 1] * seq[j + l - 1] - seq[i - 1] * seq[j - 1];
            }
            step(&mut best_sq, &mut best_j, &stats, lf, qt, i, j);
        }
    }

    let profile = best_sq.iter().map(|&sq| sq.max(0.0).sqrt()).collect();
    Ok(MpResult {
        profile,
        index: best_j,
        subseq_len: l,
        exclusion_radius,
    })
}

#[inline]
fn step(
    best_sq: &mut [f64],
    best_j: &mut [usize],
    stats: &WindowStats,
    lf: f64,
    qt: f64,
    i: usize,
    j: usize,
) {
    let sq = squared_dist(qt, lf, stats, i, j);
    // Lexicographic (distance, neighbour index) minimum: the outcome is a
    // pure function of the candidate set, independent of visit order.
    if sq < best_sq[i] || (sq == best_sq[i] && j < best_j[i]) {
        best_sq[i] = sq;
        best_j[i] = j;
    }
    if sq < best_sq[j] || (sq == best_sq[j] && i < best_j[j]) {
        best_sq[j] = sq;
        best_j[j] = i;
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}
