//! Multi-channel acceleration records.

use thiserror::Error;

/// Time-domain acceleration signals from `m` sensors at a fixed sample rate.
///
/// Data is stored channel-major: `data[ch]` is the full time series of one
/// sensor in m/s².
#[derive(Debug, Clone, PartialEq)]
pub struct MultiChannelRecord {
    /// Per-channel time series, all of identical length.
    pub data: Vec<Vec<f64>>,
    /// Sampling rate in Hz.
    pub sample_rate: f64,
    /// Free-text sensor/run identity.
    pub label: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RecordError {
    #[error("record must have at least one channel")]
    NoChannels,
    #[error("channel {0} has length {1}, expected {2}")]
    RaggedChannels(usize, usize, usize),
    #[error("sample rate must be positive, got {0}")]
    BadSampleRate(String),
    #[error("record needs at least 2 samples per channel, got {0}")]
    TooShort(usize),
}

impl MultiChannelRecord {
    /// Build a record, validating the channel-shape invariants.
    pub fn new(
        data: Vec<Vec<f64>>,
        sample_rate: f64,
        label: impl Into<String>,
    ) -> Result<Self, RecordError> {
        if data.is_empty() {
            return Err(RecordError::NoChannels);
        }
        let n = data[0].len();
        for (i, ch) in data.iter().enumerate() {
            if ch.len() != n {
                return Err(RecordError::RaggedChannels(i, ch.len(), n));
            }
        }
        if !(sample_rate > 0.0) {
            return Err(RecordError::BadSampleRate(format!("{sample_rate}")));
        }
        if n < 2 {
            return Err(RecordError::TooShort(n));
        }
        Ok(Self {
            data,
            sample_rate,
            label: label.into(),
        })
    }

    /// Number of channels.
    pub fn channels(&self) -> usize {
        self.data.len()
    }

    /// Samples per channel.
    pub fn samples_per_channel(&self) -> usize {
        self.data[0].len()
    }

    /// Record duration in seconds.
    pub fn duration(&self) -> f64 {
        self.samples_per_channel() as f64 / self.sample_rate
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_channels() {
        let err = MultiChannelRecord::new(vec![vec![0.0; 10], vec![0.0; 9]], 100.0, "x");
        assert_eq!(err.unwrap_err(), RecordError::RaggedChannels(1, 9, 10));
    }

    #[test]
    fn rejects_bad_rate_and_short_records() {
        assert!(matches!(
            MultiChannelRecord::new(vec![vec![0.0; 10]], 0.0, "x"),
            Err(RecordError::BadSampleRate(_))
        ));
        assert_eq!(
            MultiChannelRecord::new(vec![vec![0.0]], 100.0, "x").unwrap_err(),
            RecordError::TooShort(1)
        );
    }

    #[test]
    fn accessors() {
        let r = MultiChannelRecord::new(vec![vec![0.0; 50], vec![1.0; 50]], 25.0, "run-1").unwrap();
        assert_eq!(r.channels(), 2);
        assert_eq!(r.samples_per_channel(), 50);
        assert!((r.duration() - 2.0).abs() < 1e-12);
    }
}
