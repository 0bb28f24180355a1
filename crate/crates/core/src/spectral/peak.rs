//! Peak identification on first-singular-value spectra.

use super::{PeakReport, SingularSpectrum, SpectralError};

/// Largest local maximum in `band` whose topographic prominence reaches
/// `min_prominence` times the band maximum. Ties break toward the lower
/// frequency.
pub fn pick_peak(
    spec: &SingularSpectrum,
    band: (f64, f64),
    min_prominence: f64,
) -> Result<PeakReport, SpectralError> {
    let (lo, hi) = band;
    if !(0.0..1.0).contains(&min_prominence) {
        return Err(SpectralError::InvalidProminence(min_prominence));
    }
    let grid = &spec.freq_hz;
    if grid.is_empty() || lo >= hi || lo < grid[0] || hi > *grid.last().unwrap() {
        return Err(SpectralError::BandOutsideGrid {
            lo,
            hi,
            grid_lo: grid.first().copied().unwrap_or(f64::NAN),
            grid_hi: grid.last().copied().unwrap_or(f64::NAN),
        });
    }
    let start = grid.partition_point(|&f| f < lo);
    let end = grid.partition_point(|&f| f <= hi);
    let v = &spec.values[start..end];
    if v.len() < 3 {
        return Err(SpectralError::NoPeakInBand { lo, hi });
    }
    let band_max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let mut qualifying: Vec<(usize, f64)> = Vec::new();
    for k in 1..v.len() - 1 {
        if v[k] > v[k - 1] && v[k] > v[k + 1] {
            let prom = prominence(v, k);
            if prom >= min_prominence * band_max {
                qualifying.push((k, v[k]));
            }
        }
    }
    if qualifying.is_empty() {
        return Err(SpectralError::NoPeakInBand { lo, hi });
    }

    // Ascending scan with strict replacement keeps the lowest frequency on ties.
    let mut best = qualifying[0];
    for &cand in &qualifying[1..] {
        if cand.1 > best.1 {
            best = cand;
        }
    }
    let mut secondary: Vec<(f64, f64)> = qualifying
        .iter()
        .filter(|&&(k, _)| k != best.0)
        .map(|&(k, val)| (grid[start + k], val))
        .collect();
    secondary.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.partial_cmp(&b.0).unwrap()));

    Ok(PeakReport {
        peak_freq: grid[start + best.0],
        peak_value: best.1,
        secondary_peaks: secondary,
        search_band: band,
    })
}

/// Topographic prominence of the local maximum at `k` within the band slice:
/// walk outward until a higher point or the band edge, take the lowest point
/// reached on each side, and measure the drop to the higher of the two bases.
fn prominence(v: &[f64], k: usize) -> f64 {
    let peak = v[k];
    let mut left_base = peak;
    for i in (0..k).rev() {
        if v[i] > peak {
            break;
        }
        left_base = left_base.min(v[i]);
    }
    let mut right_base = peak;
    for &val in &v[k + 1..] {
        if val > peak {
            break;
        }
        right_base = right_base.min(val);
    }
    peak - left_base.max(right_base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum(values: Vec<f64>, df: f64) -> SingularSpectrum {
        let freq_hz = (0..values.len()).map(|k| k as f64 * df).collect();
        SingularSpectrum { freq_hz, values, df }
    }

    #[test]
    fn finds_single_dominant_peak() {
        let n = 1000;
        let values: Vec<f64> = (0..n)
            .map(|k| {
                let f = k as f64 * 0.01;
                1.0 / (1.0 + ((f - 5.0) / 0.1).powi(2))
            })
            .collect();
        let spec = spectrum(values, 0.01);
        let report = pick_peak(&spec, (1.0, 9.0), 0.1).unwrap();
        assert!((report.peak_freq - 5.0).abs() < 1e-9);
        assert!(report.secondary_peaks.is_empty());
    }

    #[test]
    fn monotone_band_has_no_peak() {
        let values: Vec<f64> = (0..100).map(|k| k as f64).collect();
        let spec = spectrum(values, 0.1);
        let err = pick_peak(&spec, (1.0, 8.0), 0.0).unwrap_err();
        assert!(matches!(err, SpectralError::NoPeakInBand { .. }));
    }

    #[test]
    fn tie_breaks_toward_lower_frequency() {
        let mut values = vec![0.0; 100];
        values[20] = 1.0;
        values[60] = 1.0;
        let spec = spectrum(values, 0.1);
        let report = pick_peak(&spec, (0.5, 9.0), 0.0).unwrap();
        assert!((report.peak_freq - 2.0).abs() < 1e-12);
        assert_eq!(report.secondary_peaks.len(), 1);
        assert!((report.secondary_peaks[0].0 - 6.0).abs() < 1e-12);
    }

    #[test]
    fn prominence_floor_rejects_small_bumps() {
        let mut values = vec![0.0; 100];
        values[30] = 1.0;
        values[70] = 0.05;
        let spec = spectrum(values, 0.1);
        let report = pick_peak(&spec, (0.5, 9.0), 0.2).unwrap();
        assert!((report.peak_freq - 3.0).abs() < 1e-12);
        assert!(report.secondary_peaks.is_empty(), "bump below floor kept");
    }

    #[test]
    fn band_checks() {
        let spec = spectrum(vec![0.0; 100], 0.1);
        assert!(matches!(
            pick_peak(&spec, (5.0, 20.0), 0.1),
            Err(SpectralError::BandOutsideGrid { .. })
        ));
        assert!(matches!(
            pick_peak(&spec, (5.0, 2.0), 0.1),
            Err(SpectralError::BandOutsideGrid { .. })
        ));
        assert!(matches!(
            pick_peak(&spec, (1.0, 9.0), 1.5),
            Err(SpectralError::InvalidProminence(_))
        ));
    }

    #[test]
    fn rescaling_does_not_move_the_peak() {
        let n = 500;
        let values: Vec<f64> = (0..n)
            .map(|k| {
                let f = k as f64 * 0.01;
                (-((f - 3.0) / 0.2).powi(2)).exp() + 0.3 * (-((f - 4.0) / 0.1).powi(2)).exp()
            })
            .collect();
        let scaled: Vec<f64> = values.iter().map(|v| v * 7.5).collect();
        let a = pick_peak(&spectrum(values, 0.01), (1.0, 4.5), 0.05).unwrap();
        let b = pick_peak(&spectrum(scaled, 0.01), (1.0, 4.5), 0.05).unwrap();
        assert_eq!(a.peak_freq, b.peak_freq);
    }
}
