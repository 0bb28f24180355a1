//! Conversion of raw singular spectra into model inputs: band cropping,
//! random-set averaging, min-max normalisation and observation-sequence
//! assembly.

use rand::seq::index::sample;
use thiserror::Error;

use crate::seeds;
use crate::spectral::SingularSpectrum;

/// Number of spectral lines in the 1-10 Hz crop at 0.01 Hz spacing.
pub const SAMPLE_LEN: usize = 900;

/// Standard crop band in Hz.
pub const CROP_BAND: (f64, f64) = (1.0, 10.0);

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("band [{lo}, {hi}) Hz outside grid [{grid_lo}, {grid_hi}] Hz")]
    BandOutsideGrid {
        lo: f64,
        hi: f64,
        grid_lo: f64,
        grid_hi: f64,
    },
    #[error("input spectra do not share one frequency grid")]
    GridMismatch,
    #[error("set size {set_size} exceeds the {available} available spectra")]
    SetSizeTooLarge { set_size: usize, available: usize },
    #[error("constant spectrum cannot be normalised (value {0})")]
    DegenerateRange(f64),
    #[error("samples are heterogeneous: {0}")]
    HeterogeneousSamples(String),
}

/// A cropped, averaged, min-max-normalised singular-value sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSample {
    /// Sample values; exactly attain 0 and 1 when `normalized`.
    pub values: Vec<f64>,
    /// Frequency grid matching `values`.
    pub freq_hz: Vec<f64>,
    /// Labels of the crossings that contributed to this sample.
    pub source_ids: Vec<String>,
    pub normalized: bool,
}

/// Concatenation of spectral samples analysed for change points.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSequence {
    pub samples: Vec<SpectralSample>,
    /// Flat vector of length `p = sample_len * n`.
    pub flat: Vec<f64>,
    /// Start index of each sample within `flat`, strictly increasing.
    pub boundaries: Vec<usize>,
    /// Sample index where the regime changes, when known from simulation.
    pub truth_change_index: Option<usize>,
}

impl ObservationSequence {
    /// Total flat length `p`.
    pub fn len(&self) -> usize {
        self.flat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    /// Flat index of the ground-truth transition, when present.
    pub fn truth_flat_index(&self) -> Option<usize> {
        self.truth_change_index.map(|i| self.boundaries[i])
    }
}

/// Keep bins with `lo <= f < hi`. Index selection on the frequency grid, not
/// a time-domain filter; at 0.01 Hz spacing the (1, 10) crop yields exactly
/// 900 lines starting at 1.00 Hz.
pub fn band_crop(
    spec: &SingularSpectrum,
    lo: f64,
    hi: f64,
) -> Result<SingularSpectrum, PreprocessError> {
    let grid = &spec.freq_hz;
    let bad = |_: ()| PreprocessError::BandOutsideGrid {
        lo,
        hi,
        grid_lo: grid.first().copied().unwrap_or(f64::NAN),
        grid_hi: grid.last().copied().unwrap_or(f64::NAN),
    };
    if grid.is_empty() || lo >= hi || lo < grid[0] || hi > grid.last().unwrap() + spec.df {
        return Err(bad(()));
    }
    let start = grid.partition_point(|&f| f < lo - 1e-9 * spec.df.max(1.0));
    let end = grid.partition_point(|&f| f < hi - 1e-9 * spec.df.max(1.0));
    if start >= end {
        return Err(bad(()));
    }
    Ok(SingularSpectrum {
        freq_hz: grid[start..end].to_vec(),
        values: spec.values[start..end].to_vec(),
        df: spec.df,
    })
}

/// Average `n_out` random sets of `set_size` spectra each. Members of a set
/// are drawn uniformly without replacement; sets are drawn independently.
/// Deterministic for a fixed seed.
pub fn average_random_sets(
    specs: &[SingularSpectrum],
    set_size: usize,
    n_out: usize,
    seed: u64,
) -> Result<Vec<SingularSpectrum>, PreprocessError> {
    if set_size == 0 || set_size > specs.len() {
        return Err(PreprocessError::SetSizeTooLarge {
            set_size,
            available: specs.len(),
        });
    }
    let first = &specs[0];
    for s in specs {
        if s.freq_hz.len() != first.freq_hz.len() || (s.df - first.df).abs() > 1e-12 {
            return Err(PreprocessError::GridMismatch);
        }
    }
    let mut rng = seeds::rng_from(seed);
    let len = first.values.len();
    let inv = 1.0 / set_size as f64;
    let mut out = Vec::with_capacity(n_out);
    for _ in 0..n_out {
        let picks = sample(&mut rng, specs.len(), set_size);
        let mut values = vec![0.0; len];
        for idx in picks.iter() {
            for (v, x) in values.iter_mut().zip(specs[idx].values.iter()) {
                *v += x;
            }
        }
        for v in &mut values {
            *v *= inv;
        }
        out.push(SingularSpectrum {
            freq_hz: first.freq_hz.clone(),
            values,
            df: first.df,
        });
    }
    Ok(out)
}

/// Averaging variant that records which crossings contributed to each output.
pub fn average_random_sets_labelled(
    specs: &[(String, SingularSpectrum)],
    set_size: usize,
    n_out: usize,
    seed: u64,
) -> Result<Vec<(Vec<String>, SingularSpectrum)>, PreprocessError> {
    let bare: Vec<SingularSpectrum> = specs.iter().map(|(_, s)| s.clone()).collect();
    if set_size == 0 || set_size > bare.len() {
        return Err(PreprocessError::SetSizeTooLarge {
            set_size,
            available: bare.len(),
        });
    }
    // Re-run the same draws to recover the labels deterministically.
    let mut rng = seeds::rng_from(seed);
    let averaged = average_random_sets(&bare, set_size, n_out, seed)?;
    let mut out = Vec::with_capacity(n_out);
    for avg in averaged {
        let picks = sample(&mut rng, bare.len(), set_size);
        let ids = picks.iter().map(|i| specs[i].0.clone()).collect();
        out.push((ids, avg));
    }
    Ok(out)
}

/// Min-max scaling: `(v - min) / (max - min)`. The minimum maps to exactly 0
/// and the maximum to exactly 1. Constant spectra are rejected; a silent
/// zero-fill would poison downstream training.
pub fn minmax_normalize(spec: &SingularSpectrum) -> Result<SpectralSample, PreprocessError> {
    minmax_normalize_labelled(spec, Vec::new())
}

/// [`minmax_normalize`] carrying the contributing crossing labels.
pub fn minmax_normalize_labelled(
    spec: &SingularSpectrum,
    source_ids: Vec<String>,
) -> Result<SpectralSample, PreprocessError> {
    let min = spec.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = spec.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if !(range > 0.0) || !range.is_finite() {
        return Err(PreprocessError::DegenerateRange(min));
    }
    let values = spec.values.iter().map(|v| (v - min) / range).collect();
    Ok(SpectralSample {
        values,
        freq_hz: spec.freq_hz.clone(),
        source_ids,
        normalized: true,
    })
}

/// Concatenate normalised samples into one observation sequence of length
/// `p = sample_len * n`, recording sample boundaries.
pub fn assemble_sequence(
    samples: Vec<SpectralSample>,
    truth_change_index: Option<usize>,
) -> Result<ObservationSequence, PreprocessError> {
    if samples.is_empty() {
        return Err(PreprocessError::HeterogeneousSamples(
            "no samples supplied".into(),
        ));
    }
    let len = samples[0].values.len();
    for (i, s) in samples.iter().enumerate() {
        if s.values.len() != len {
            return Err(PreprocessError::HeterogeneousSamples(format!(
                "sample {i} has length {}, expected {len}",
                s.values.len()
            )));
        }
        if !s.normalized {
            return Err(PreprocessError::HeterogeneousSamples(format!(
                "sample {i} is not normalised"
            )));
        }
    }
    if let Some(t) = truth_change_index {
        if t >= samples.len() {
            return Err(PreprocessError::HeterogeneousSamples(format!(
                "truth change index {t} out of range for {} samples",
                samples.len()
            )));
        }
    }
    let mut flat = Vec::with_capacity(len * samples.len());
    let mut boundaries = Vec::with_capacity(samples.len());
    for s in &samples {
        boundaries.push(flat.len());
        flat.extend_from_slice(&s.values);
    }
    Ok(ObservationSequence {
        samples,
        flat,
        boundaries,
        truth_change_index,
    })
}
