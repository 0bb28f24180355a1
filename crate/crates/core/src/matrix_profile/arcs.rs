//! Arc counts, idealised arc curve, and change-point detection.

use super::{matrix_profile, MpError, MpResult};
use crate::preprocess::ObservationSequence;

/// Corrected-arc-curve output.
#[derive(Debug, Clone, PartialEq)]
pub struct CacResult {
    /// Number of nearest-neighbour arcs spanning each location.
    pub ac: Vec<u32>,
    /// Idealised arc counts `2k(N - k)/N` for uniformly random arcs.
    pub iac: Vec<f64>,
    /// Clipped ratio `min(ac/iac, 1)`, in `[0, 1]`.
    pub cac: Vec<f64>,
    /// Interior argmin when it undercuts the detection threshold.
    pub change_index: Option<usize>,
    /// Width of the boundary zones excluded from the change-point search.
    pub edge_ignore: usize,
}

impl CacResult {
    /// Location and value of the CAC minimum outside the edge-ignore zones.
    pub fn interior_min(&self) -> Option<(usize, f64)> {
        let n = self.cac.len();
        if 2 * self.edge_ignore >= n {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        for k in self.edge_ignore..n - self.edge_ignore {
            let v = self.cac[k];
            if best.map_or(true, |(_, bv)| v < bv) {
                best = Some((k, v));
            }
        }
        best
    }
}

/// Change-point search parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectParams {
    /// Trivial-match exclusion radius; defaults to `ceil(l / 4)`.
    pub exclusion_radius: Option<usize>,
    /// Edge zone width; defaults to `l`.
    pub edge_ignore: Option<usize>,
    /// CAC value below which the interior minimum is reported as a change
    /// point.
    pub detection_threshold: f64,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self {
            exclusion_radius: None,
            edge_ignore: None,
            detection_threshold: 0.6,
        }
    }
}

/// Arc curve, idealised arc curve and their clipped ratio.
///
/// An arc connects each subsequence `i` to its nearest neighbour `I[i]` and
/// spans the locations strictly between them. Few arcs cross a regime
/// boundary, so the CAC dips there; the inverted-parabola IAC normalises
/// away the matching edge starvation.
pub fn corrected_arc_curve(mp: &MpResult) -> CacResult {
    corrected_arc_curve_with(mp, mp.subseq_len)
}

fn corrected_arc_curve_with(mp: &MpResult, edge_ignore: usize) -> CacResult {
    let n = mp.len();
    let mut diff = vec![0i64; n + 1];
    for (i, &j) in mp.index.iter().enumerate() {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        // Crossing predicate a < k < b keeps the curve mirror-symmetric.
        if b - a >= 2 {
            diff[a + 1] += 1;
            diff[b] -= 1;
        }
    }
    let mut ac = Vec::with_capacity(n);
    let mut running = 0i64;
    for &d in diff.iter().take(n) {
        running += d;
        debug_assert!(running >= 0);
        ac.push(running as u32);
    }

    let nf = n as f64;
    let iac: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 * (nf - k as f64) / nf).collect();
    let cac: Vec<f64> = ac
        .iter()
        .zip(iac.iter())
        .map(|(&a, &i)| if i > 0.0 { (a as f64 / i).min(1.0) } else { 1.0 })
        .collect();

    CacResult {
        ac,
        iac,
        cac,
        change_index: None,
        edge_ignore,
    }
}

/// Full change-point pipeline with default parameters: matrix profile, then
/// corrected arc curve, reporting the interior argmin when it falls below
/// the detection threshold.
pub fn detect_change(seq: &ObservationSequence, l: usize) -> Result<CacResult, MpError> {
    detect_change_with(seq, l, &DetectParams::default())
}

/// [`detect_change`] with explicit parameters.
pub fn detect_change_with(
    seq: &ObservationSequence,
    l: usize,
    params: &DetectParams,
) -> Result<CacResult, MpError> {
    let exclusion = params.exclusion_radius.unwrap_or_else(|| l.div_ceil(4));
    let edge = params.edge_ignore.unwrap_or(l);
    let mp = matrix_profile(seq, l, exclusion)?;
    let mut result = corrected_arc_curve_with(&mp, edge);
    if let Some((k, v)) = result.interior_min() {
        if v < params.detection_threshold {
            result.change_index = Some(k);
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_mp(index: Vec<usize>, l: usize) -> MpResult {
        let n = index.len();
        MpResult {
            profile: vec![1.0; n],
            index,
            subseq_len: l,
            exclusion_radius: 1,
        }
    }

    #[test]
    fn uniform_random_arcs_track_the_idealised_curve() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let n = 4000;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        let index: Vec<usize> = (0..n)
            .map(|i| loop {
                let j = rng.gen_range(0..n);
                if j != i {
                    break j;
                }
            })
            .collect();
        let cac = corrected_arc_curve(&synthetic_mp(index, 100));
        let n = cac.cac.len();
        for k in 400..n - 400 {
            assert!(cac.cac[k] >= 0.75, "cac[{k}] = {}", cac.cac[k]);
        }
    }

    #[test]
    fn cac_bounded_in_unit_interval_and_iac_peaks_midway() {
        let index = vec![3, 4, 5, 0, 1, 2, 9, 8, 7, 6];
        let cac = corrected_arc_curve(&synthetic_mp(index, 2));
        assert!(cac.cac.iter().all(|&v| (0.0..=1.0).contains(&v)));
        let n = cac.iac.len();
        let mid_val = cac.iac[n / 2];
        assert!(cac.iac.iter().all(|&v| v <= mid_val + 1e-9));
    }

    #[test]
    fn two_isolated_regimes_produce_a_gap() {
        // First half matches within the first half, second within the second:
        // no arc crosses the midpoint.
        let n = 200;
        let index: Vec<usize> = (0..n)
            .map(|i| if i < 100 { (i + 37) % 100 } else { 100 + (i + 37) % 100 })
            .collect();
        let cac = corrected_arc_curve(&synthetic_mp(index, 10));
        assert_eq!(cac.ac[100], 0);
        assert!(cac.cac[100] == 0.0);
        assert!(cac.cac[50] > 0.2);
    }

    #[test]
    fn reversal_mirrors_the_arc_counts() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let n = 500;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(6);
        let index: Vec<usize> = (0..n)
            .map(|i| loop {
                let j = rng.gen_range(0..n);
                if j != i {
                    break j;
                }
            })
            .collect();
        let mirrored: Vec<usize> = (0..n).rev().map(|i| n - 1 - index[i]).collect();
        let fwd = corrected_arc_curve(&synthetic_mp(index, 10));
        let rev = corrected_arc_curve(&synthetic_mp(mirrored, 10));
        for k in 0..n {
            assert_eq!(fwd.ac[k], rev.ac[n - 1 - k], "mirror mismatch at {k}");
        }
    }

    #[test]
    fn interior_min_respects_edge_zones() {
        let n = 100;
        // All arcs long, except the edges which are naturally starved.
        let index: Vec<usize> = (0..n).map(|i| (i + 50) % n).collect();
        let mut cac = corrected_arc_curve(&synthetic_mp(index, 15));
        cac.cac[3] = 0.0; // inside the edge zone: must be ignored
        let (k, _) = cac.interior_min().unwrap();
        assert!(k >= 15 && k < n - 15);
    }
}
