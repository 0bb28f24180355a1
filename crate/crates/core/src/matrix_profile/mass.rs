//! Distance profiles via FFT sliding dot products (the MASS scheme).

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::{squared_dist, window_stats, MpError};

/// Dot product of `query` against every length-`l` window of `seq`, computed
/// through the convolution theorem. Returns `seq.len() - query.len() + 1`
/// values.
pub fn sliding_dot_product(seq: &[f64], query: &[f64]) -> Vec<f64> {
    let p = seq.len();
    let l = query.len();
    assert!(l >= 1 && l <= p, "query longer than sequence");
    let nfft = (p + l - 1).next_power_of_two();

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(nfft);
    let ifft = planner.plan_fft_inverse(nfft);

    let mut x = vec![Complex64::new(0.0, 0.0); nfft];
    for (dst, &v) in x.iter_mut().zip(seq.iter()) {
        *dst = Complex64::new(v, 0.0);
    }
    let mut q = vec![Complex64::new(0.0, 0.0); nfft];
    for (i, &v) in query.iter().enumerate() {
        q[l - 1 - i] = Complex64::new(v, 0.0);
    }
    fft.process(&mut x);
    fft.process(&mut q);
    for (a, b) in x.iter_mut().zip(q.iter()) {
        *a *= b;
    }
    ifft.process(&mut x);

    let scale = 1.0 / nfft as f64;
    (0..p - l + 1).map(|j| x[j + l - 1].re * scale).collect()
}

/// Z-normalised distances from the subsequence at `query_idx` to every
/// subsequence of `seq`, FFT dot products plus running window statistics.
/// Matches the direct per-pair evaluation within 1e-9 absolute.
pub fn distance_profile(query_idx: usize, seq: &[f64], l: usize) -> Result<Vec<f64>, MpError> {
    let p = seq.len();
    if l < 2 || l > p {
        return Err(MpError::InvalidLength { l, p });
    }
    let n = p - l + 1;
    if query_idx >= n {
        return Err(MpError::InvalidLength { l, p });
    }
    let stats = window_stats(seq, l);
    let dots = sliding_dot_product(seq, &seq[query_idx..query_idx + l]);
    let lf = l as f64;
    Ok((0..n)
        .map(|j| squared_dist(dots[j], lf, &stats, query_idx, j).sqrt())
        .collect())
}
