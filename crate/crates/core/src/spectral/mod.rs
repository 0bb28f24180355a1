//! Frequency domain decomposition: CPSD estimation, per-bin SVD sweep and
//! spectral peak identification.

mod cpsd;
mod eig;
mod peak;

pub use cpsd::{compute_cpsd, default_params, pool_cpsd, CpsdParams, DEFAULT_TARGET_DF};
pub use eig::{hermitian_eigen, hermitian_eigenvalues};
pub use peak::pick_peak;

use rustfft::num_complex::Complex64;
use thiserror::Error;

use crate::record::MultiChannelRecord;

/// Relative tolerance for Hermitian symmetry and PSD checks on CPSD bins.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Search band for the vehicle motor harmonic, Hz.
pub const MOTOR_BAND: (f64, f64) = (13.0, 17.0);

/// Prominence floor used when hunting the motor line; high enough that flat
/// noise produces no detection.
pub const MOTOR_MIN_PROMINENCE: f64 = 0.8;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("record too short: {samples} samples for segment length {seg_len}")]
    RecordTooShort { samples: usize, seg_len: usize },
    #[error("overlap must lie in [0, 1), got {0}")]
    InvalidOverlap(f64),
    #[error("target frequency resolution must be positive, got {0}")]
    BadResolution(f64),
    #[error("segment of {seg_len} samples exceeds the {nfft}-point transform implied by the target resolution")]
    SegmentExceedsTransform { seg_len: usize, nfft: usize },
    #[error("bin {bin}: matrix violates Hermitian symmetry (relative deviation {deviation:.3e})")]
    NonHermitianInput { bin: usize, deviation: f64 },
    #[error("band ({lo}, {hi}) Hz outside grid [{grid_lo}, {grid_hi}] Hz")]
    BandOutsideGrid {
        lo: f64,
        hi: f64,
        grid_lo: f64,
        grid_hi: f64,
    },
    #[error("min_prominence must lie in [0, 1), got {0}")]
    InvalidProminence(f64),
    #[error("no qualifying peak in band ({lo}, {hi}) Hz")]
    NoPeakInBand { lo: f64, hi: f64 },
    #[error("frequency grids of pooled records do not match")]
    GridMismatch,
    #[error("no records supplied")]
    NoRecords,
}

/// Per-frequency cross-power spectral density matrices.
#[derive(Debug, Clone)]
pub struct CpsdStack {
    /// Ascending frequency grid in Hz.
    pub freq_hz: Vec<f64>,
    /// Grid spacing in Hz.
    pub df: f64,
    /// Sensor count m; each bin holds an m x m complex matrix.
    pub channels: usize,
    /// Row-major per-bin matrices, `n_bins * m * m` entries.
    pub(crate) mats: Vec<Complex64>,
}

impl CpsdStack {
    /// Number of frequency bins.
    pub fn n_bins(&self) -> usize {
        self.freq_hz.len()
    }

    /// The m x m matrix at bin `k`, row-major.
    pub fn bin(&self, k: usize) -> &[Complex64] {
        let mm = self.channels * self.channels;
        &self.mats[k * mm..(k + 1) * mm]
    }

    /// Auto-spectrum of one channel across all bins.
    pub fn auto_spectrum(&self, ch: usize) -> Vec<f64> {
        (0..self.n_bins())
            .map(|k| self.bin(k)[ch * self.channels + ch].re)
            .collect()
    }

    /// Largest relative Hermitian deviation at bin `k` (0 for an all-zero bin).
    pub fn hermitian_deviation(&self, k: usize) -> f64 {
        let m = self.channels;
        let mat = self.bin(k);
        let scale = mat.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in i..m {
                let dev = (mat[i * m + j] - mat[j * m + i].conj()).norm();
                worst = worst.max(dev);
            }
        }
        worst / scale
    }
}

/// First-singular-value curve from the per-bin SVD of a CPSD stack.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    /// Ascending frequency grid in Hz.
    pub freq_hz: Vec<f64>,
    /// Largest singular value per bin, non-negative.
    pub values: Vec<f64>,
    /// Grid spacing in Hz.
    pub df: f64,
}

/// Outcome of a peak search over a band.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakReport {
    pub peak_freq: f64,
    pub peak_value: f64,
    /// Other qualifying peaks, highest first.
    pub secondary_peaks: Vec<(f64, f64)>,
    pub search_band: (f64, f64),
}

/// Largest singular value of every CPSD bin.
///
/// For Hermitian PSD matrices the singular values equal the eigenvalue
/// magnitudes, so the sweep runs a Jacobi eigensolver per bin instead of a
/// general SVD. Bins violating Hermitian symmetry beyond [`HERMITIAN_TOL`]
/// are rejected.
pub fn svd_sweep(cpsd: &CpsdStack) -> Result<SingularSpectrum, SpectralError> {
    let m = cpsd.channels;
    let mut values = Vec::with_capacity(cpsd.n_bins());
    for k in 0..cpsd.n_bins() {
        let deviation = cpsd.hermitian_deviation(k);
        if deviation > HERMITIAN_TOL {
            return Err(SpectralError::NonHermitianInput { bin: k, deviation });
        }
        let eigs = hermitian_eigenvalues(cpsd.bin(k), m);
        let s1 = eigs.iter().map(|v| v.abs()).fold(0.0, f64::max);
        values.push(s1);
    }
    Ok(SingularSpectrum {
        freq_hz: cpsd.freq_hz.clone(),
        values,
        df: cpsd.df,
    })
}

/// Identify the motor harmonic from pooled driving-test records: Welch CPSD
/// per record, per-bin SVD of the pooled stack, then a peak search in
/// [`MOTOR_BAND`].
pub fn identify_motor_frequency(
    records: &[MultiChannelRecord],
) -> Result<PeakReport, SpectralError> {
    if records.is_empty() {
        return Err(SpectralError::NoRecords);
    }
    let stacks: Vec<CpsdStack> = records
        .iter()
        .map(|r| {
            let p = default_params(r);
            compute_cpsd(r, p.seg_len, p.overlap, p.target_df)
        })
        .collect::<Result<_, _>>()?;
    let pooled = pool_cpsd(&stacks)?;
    let spectrum = svd_sweep(&pooled)?;
    pick_peak(&spectrum, MOTOR_BAND, MOTOR_MIN_PROMINENCE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use rand_distr::StandardNormal;

    fn record(data: Vec<Vec<f64>>, fs: f64) -> MultiChannelRecord {
        MultiChannelRecord::new(data, fs, "test").unwrap()
    }

    /// Direct DFT periodogram of the full record: the independent oracle for
    /// locating spectral maxima.
    fn periodogram_peak_bin(x: &[f64], fs: f64, f_lo: f64, f_hi: f64) -> f64 {
        let n = x.len();
        let mut best = (0.0, f64::NEG_INFINITY);
        let k_lo = (f_lo * n as f64 / fs).ceil() as usize;
        let k_hi = (f_hi * n as f64 / fs).floor() as usize;
        for k in k_lo..=k_hi {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &v) in x.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * (k * i) as f64 / n as f64;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            let p = re * re + im * im;
            if p > best.1 {
                best = (k as f64 * fs / n as f64, p);
            }
        }
        best.0
    }

    #[test]
    fn zero_record_gives_zero_stack() {
        let r = record(vec![vec![0.0; 4000], vec![0.0; 4000]], 100.0);
        let stack = compute_cpsd(&r, 4000, 0.5, 0.025).unwrap();
        assert!(stack.mats.iter().all(|z| z.norm() == 0.0));
        let spec = svd_sweep(&stack).unwrap();
        assert!(spec.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identical_channels_are_rank_one() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let ch: Vec<f64> = (0..5000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let r = record(vec![ch.clone(), ch], 100.0);
        let stack = compute_cpsd(&r, 2500, 0.5, 0.04).unwrap();
        for k in 0..stack.n_bins() {
            let m = stack.bin(k);
            // S11 == S12 == S22 for perfectly coherent channels.
            assert!((m[0] - m[1]).norm() <= 1e-12 * m[0].norm().max(1e-300));
            assert!((m[0] - m[3]).norm() <= 1e-12 * m[0].norm().max(1e-300));
            let eigs = hermitian_eigenvalues(m, 2);
            let (lo, hi) = (eigs[0].min(eigs[1]), eigs[0].max(eigs[1]));
            assert!(lo.abs() <= 1e-10 * hi.abs().max(1e-300), "rank-1 expected");
        }
    }

    #[test]
    fn sine_peak_matches_periodogram_oracle() {
        // 5 Hz tone at 500 Hz sampling; oracle scans a direct DFT of a slice.
        let fs = 500.0;
        let n = 50_000; // 100 s
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let ch: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                (2.0 * std::f64::consts::PI * 5.0 * t).sin()
                    + 0.01 * rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        let oracle_freq = periodogram_peak_bin(&ch[..5000], fs, 2.0, 8.0);
        assert!((oracle_freq - 5.0).abs() < 0.1, "oracle sanity");

        let r = record(vec![ch], fs);
        let p = default_params(&r);
        let stack = compute_cpsd(&r, p.seg_len, p.overlap, p.target_df).unwrap();
        let s11 = stack.auto_spectrum(0);
        let peak_bin = s11
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let peak_freq = stack.freq_hz[peak_bin];
        assert!(
            (peak_freq - 5.0).abs() <= stack.df + 1e-12,
            "S11 max at {peak_freq} Hz"
        );
    }

    #[test]
    fn hermitian_and_psd_invariants_on_noise() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let data: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..6000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let r = record(data, 200.0);
        let stack = compute_cpsd(&r, 2000, 0.5, 0.05).unwrap();
        for k in 0..stack.n_bins() {
            assert!(stack.hermitian_deviation(k) <= HERMITIAN_TOL);
            let eigs = hermitian_eigenvalues(stack.bin(k), 3);
            let max = eigs.iter().cloned().fold(0.0f64, f64::max);
            let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min >= -HERMITIAN_TOL * max.max(1e-300), "bin {k} not PSD");
        }
    }

    #[test]
    fn parseval_variance_check() {
        // Integral of the S11 density over the one-sided band recovers the
        // channel variance within Welch bias tolerance.
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let n = 100_000;
        let ch: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let variance = {
            let mean = ch.iter().sum::<f64>() / n as f64;
            ch.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64
        };
        let r = record(vec![ch], 500.0);
        let stack = compute_cpsd(&r, 10_000, 0.5, 0.05).unwrap();
        let integral: f64 = stack.auto_spectrum(0).iter().sum::<f64>() * stack.df;
        let rel = (integral - variance).abs() / variance;
        assert!(rel < 0.02, "Parseval deviation {rel}");
    }

    #[test]
    fn channel_reordering_preserves_singular_values() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let base: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..4000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let permuted = vec![base[2].clone(), base[0].clone(), base[1].clone()];
        let sa = svd_sweep(&compute_cpsd(&record(base, 100.0), 2000, 0.5, 0.05).unwrap()).unwrap();
        let sb =
            svd_sweep(&compute_cpsd(&record(permuted, 100.0), 2000, 0.5, 0.05).unwrap()).unwrap();
        for (a, b) in sa.values.iter().zip(sb.values.iter()) {
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn diagonal_bin_takes_largest_entry() {
        let stack = CpsdStack {
            freq_hz: vec![0.0],
            df: 1.0,
            channels: 2,
            mats: vec![
                Complex64::new(4.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        };
        let spec = svd_sweep(&stack).unwrap();
        assert!((spec.values[0] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_bin_is_rejected() {
        let stack = CpsdStack {
            freq_hz: vec![0.0],
            df: 1.0,
            channels: 2,
            mats: vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, 0.1),
                Complex64::new(0.5, 0.1), // should be the conjugate
                Complex64::new(1.0, 0.0),
            ],
        };
        assert!(matches!(
            svd_sweep(&stack),
            Err(SpectralError::NonHermitianInput { bin: 0, .. })
        ));
    }

    #[test]
    fn parameter_validation() {
        let r = record(vec![vec![0.0; 100]], 100.0);
        assert!(matches!(
            compute_cpsd(&r, 200, 0.5, 1.0),
            Err(SpectralError::RecordTooShort { .. })
        ));
        assert!(matches!(
            compute_cpsd(&r, 50, 1.0, 1.0),
            Err(SpectralError::InvalidOverlap(_))
        ));
        assert!(matches!(
            compute_cpsd(&r, 50, -0.1, 1.0),
            Err(SpectralError::InvalidOverlap(_))
        ));
        assert!(matches!(
            compute_cpsd(&r, 100, 0.5, 10.0),
            Err(SpectralError::SegmentExceedsTransform { .. })
        ));
    }

    #[test]
    fn motor_line_identified_and_flat_noise_rejected() {
        let fs = 500.0;
        let make = |seed: u64, harmonic: Option<f64>, dur_s: f64| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let n = (dur_s * fs) as usize;
            let data: Vec<Vec<f64>> = (0..4)
                .map(|_| {
                    let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                    (0..n)
                        .map(|i| {
                            let t = i as f64 / fs;
                            let line = harmonic.map_or(0.0, |f| {
                                0.05 * (std::f64::consts::TAU * f * t + phase).sin()
                            });
                            line + 0.002 * rng.sample::<f64, _>(StandardNormal)
                        })
                        .collect()
                })
                .collect();
            record(data, fs)
        };

        let runs: Vec<_> = (0..5).map(|s| make(s, Some(15.0), 20.0)).collect();
        let report = identify_motor_frequency(&runs).unwrap();
        assert!(
            (report.peak_freq - 15.0).abs() <= DEFAULT_TARGET_DF + 1e-12,
            "f_vd = {}",
            report.peak_freq
        );

        let shifted: Vec<_> = (10..15).map(|s| make(s, Some(14.2), 20.0)).collect();
        let report = identify_motor_frequency(&shifted).unwrap();
        assert!((report.peak_freq - 14.2).abs() <= DEFAULT_TARGET_DF + 1e-12);
        assert!(report.peak_freq > 13.0 && report.peak_freq < 17.0);

        let noise: Vec<_> = (20..25).map(|s| make(s, None, 200.0)).collect();
        assert!(matches!(
            identify_motor_frequency(&noise),
            Err(SpectralError::NoPeakInBand { .. })
        ));
    }
}
