//! Adversarial autoencoder anomaly detector.
//!
//! Encoder/decoder/discriminator trained in alternating reconstruction and
//! regularisation phases; anomalies surface as reconstruction error above a
//! percentile threshold calibrated on held-out nominal samples.

mod net;
mod persist;

pub use net::{Activation, Adam, Layer, Mlp, MlpGrads};
pub use persist::{load_model, save_model};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::SpectralSample;
use crate::seeds;
use net::softplus;

#[derive(Debug, Error)]
pub enum AaeError {
    #[error("dimension mismatch: model expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("batch sizes differ: {a} vs {b}")]
    MismatchedBatch { a: usize, b: usize },
    #[error("too few samples: {got} (need at least {need})")]
    TooFewSamples { got: usize, need: usize },
    #[error("invalid training config: {0}")]
    BadConfig(String),
    #[error("model persistence failed: {0}")]
    Persist(String),
}

/// Encoder/decoder/discriminator parameter sets with an isotropic standard
/// Gaussian latent prior.
#[derive(Debug, Clone, PartialEq)]
pub struct AaeModel {
    pub encoder: Mlp,
    pub decoder: Mlp,
    pub discriminator: Mlp,
    pub latent_dim: usize,
    pub rng_seed: u64,
}

/// Training schedule. Defaults: 2,000 epochs of batch-8 Adam at 1e-3, an
/// 80:20 train/validation split, threshold at the 90th percentile of
/// validation reconstruction errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Fraction of the supplied samples used for weight updates; the rest
    /// calibrate the threshold.
    pub split_ratio: f64,
    pub threshold_percentile: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 2000,
            batch_size: 8,
            learning_rate: 1e-3,
            split_ratio: 0.8,
            threshold_percentile: 90.0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), AaeError> {
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(AaeError::BadConfig(format!(
                "split_ratio must lie in (0, 1), got {}",
                self.split_ratio
            )));
        }
        if !(self.threshold_percentile > 0.0 && self.threshold_percentile <= 100.0) {
            return Err(AaeError::BadConfig(format!(
                "threshold_percentile must lie in (0, 100], got {}",
                self.threshold_percentile
            )));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(AaeError::BadConfig(
                "epochs and batch_size must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Nominal,
    Anomalous,
}

/// Classification outcome for one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionResult {
    /// Mean squared reconstruction error over the sample's components.
    pub error: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

/// Everything `train` produces: the fitted model, the calibrated threshold,
/// per-sample validation errors, and the per-epoch reconstruction loss.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: AaeModel,
    pub threshold: f64,
    pub validation_errors: Vec<f64>,
    pub epoch_losses: Vec<f64>,
}

/// Fresh model with fan-in-scaled symmetric uniform weights; deterministic
/// for a fixed seed.
///
/// Encoder `input -> 256 -> 64 -> latent` (tanh hidden, linear latent),
/// decoder mirrored with a sigmoid output (inputs live in `[0, 1]`),
/// discriminator `latent -> 64 -> 32 -> 1` with a sigmoid output.
pub fn init_model(input_dim: usize, latent_dim: usize, seed: u64) -> AaeModel {
    let mut rng = seeds::rng(seed, "aae-init", 0);
    let encoder = Mlp::new(
        &[input_dim, 256, 64, latent_dim],
        Activation::Tanh,
        Activation::Linear,
        &mut rng,
    );
    let decoder = Mlp::new(
        &[latent_dim, 64, 256, input_dim],
        Activation::Tanh,
        Activation::Sigmoid,
        &mut rng,
    );
    let discriminator = Mlp::new(
        &[latent_dim, 64, 32, 1],
        Activation::Tanh,
        Activation::Sigmoid,
        &mut rng,
    );
    AaeModel {
        encoder,
        decoder,
        discriminator,
        latent_dim,
        rng_seed: seed,
    }
}

impl AaeModel {
    pub fn input_dim(&self) -> usize {
        self.encoder.input_dim()
    }

    /// Encode then decode: `(x_bar, y)`.
    pub fn reconstruct(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>), AaeError> {
        if x.len() != self.input_dim() {
            return Err(AaeError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let y = self.encoder.forward(x);
        let x_bar = self.decoder.forward(&y);
        Ok((x_bar, y))
    }

    /// Discriminator probability that `y` was drawn from the prior, clamped
    /// strictly inside (0, 1).
    pub fn discriminate(&self, y: &[f64]) -> Result<f64, AaeError> {
        if y.len() != self.latent_dim {
            return Err(AaeError::DimensionMismatch {
                expected: self.latent_dim,
                got: y.len(),
            });
        }
        let out = self.discriminator.forward(y)[0];
        Ok(out.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
    }

    /// Mean squared reconstruction error over the sample components.
    pub fn reconstruction_error(&self, x: &[f64]) -> Result<f64, AaeError> {
        let (x_bar, _) = self.reconstruct(x)?;
        let n = x.len() as f64;
        Ok(x.iter()
            .zip(x_bar.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / n)
    }
}

/// Discriminator loss, Eq-style binary cross entropy over paired batches of
/// prior draws and encoded latents:
/// `-(1/n) sum [log D(y_true) + log(1 - D(y))]`, always >= 0.
pub fn discriminator_loss(
    model: &AaeModel,
    y_batch: &[Vec<f64>],
    y_true_batch: &[Vec<f64>],
) -> Result<f64, AaeError> {
    check_batches(y_batch, y_true_batch)?;
    let n = y_batch.len() as f64;
    let mut loss = 0.0;
    for (y, y_true) in y_batch.iter().zip(y_true_batch.iter()) {
        let z_true = disc_logit(model, y_true)?;
        let z_fake = disc_logit(model, y)?;
        // -log sigmoid(z) = softplus(-z); -log(1 - sigmoid(z)) = softplus(z)
        loss += softplus(-z_true) + softplus(z_fake);
    }
    Ok(loss / n)
}

/// Generator loss: batch-mean reconstruction error plus the adversarial term
/// `-(1/n) sum log D(y)`; the squared error is averaged over both the batch
/// and the sample components.
pub fn generator_loss(model: &AaeModel, x_batch: &[&[f64]]) -> Result<f64, AaeError> {
    if x_batch.is_empty() {
        return Err(AaeError::EmptyBatch);
    }
    let n = x_batch.len() as f64;
    let mut loss = 0.0;
    for &x in x_batch {
        let (x_bar, y) = model.reconstruct(x)?;
        let d = x.len() as f64;
        let mse = x
            .iter()
            .zip(x_bar.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / d;
        let z = disc_logit(model, &y)?;
        loss += mse + softplus(-z);
    }
    Ok(loss / n)
}

/// Analytic gradient of [`discriminator_loss`] with respect to the
/// discriminator parameters. Returns `(loss, grads)`.
pub fn discriminator_loss_grads(
    model: &AaeModel,
    y_batch: &[Vec<f64>],
    y_true_batch: &[Vec<f64>],
) -> Result<(f64, MlpGrads), AaeError> {
    check_batches(y_batch, y_true_batch)?;
    let n = y_batch.len() as f64;
    let mut grads = MlpGrads::zeros_like(&model.discriminator);
    let mut loss = 0.0;
    for (y, y_true) in y_batch.iter().zip(y_true_batch.iter()) {
        let trace_true = model.discriminator.forward_trace(y_true);
        let z_true = model.discriminator.last_logit(&trace_true)[0];
        loss += softplus(-z_true);
        // d/dz of -log sigmoid(z) = sigmoid(z) - 1
        let grad = vec![(sigmoid(z_true) - 1.0) / n];
        model
            .discriminator
            .backward_from_logit(&trace_true, grad, &mut grads);

        let trace_fake = model.discriminator.forward_trace(y);
        let z_fake = model.discriminator.last_logit(&trace_fake)[0];
        loss += softplus(z_fake);
        // d/dz of -log(1 - sigmoid(z)) = sigmoid(z)
        let grad = vec![sigmoid(z_fake) / n];
        model
            .discriminator
            .backward_from_logit(&trace_fake, grad, &mut grads);
    }
    Ok((loss / n, grads))
}

/// Analytic gradient of [`generator_loss`] with respect to the encoder and
/// decoder parameters (the ones its optimisation updates). Returns
/// `(loss, encoder grads, decoder grads)`.
pub fn generator_loss_grads(
    model: &AaeModel,
    x_batch: &[&[f64]],
) -> Result<(f64, MlpGrads, MlpGrads), AaeError> {
    if x_batch.is_empty() {
        return Err(AaeError::EmptyBatch);
    }
    let n = x_batch.len() as f64;
    let mut enc_grads = MlpGrads::zeros_like(&model.encoder);
    let mut dec_grads = MlpGrads::zeros_like(&model.decoder);
    let mut disc_scratch = MlpGrads::zeros_like(&model.discriminator);
    let mut loss = 0.0;
    for &x in x_batch {
        if x.len() != model.input_dim() {
            return Err(AaeError::DimensionMismatch {
                expected: model.input_dim(),
                got: x.len(),
            });
        }
        let d = x.len() as f64;
        let enc_trace = model.encoder.forward_trace(x);
        let y = enc_trace.output().to_vec();
        let dec_trace = model.decoder.forward_trace(&y);
        let x_bar = dec_trace.output();
        let mse = x
            .iter()
            .zip(x_bar.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / d;

        // Reconstruction route: through the decoder into the latent code.
        let grad_xbar: Vec<f64> = x_bar
            .iter()
            .zip(x.iter())
            .map(|(&xb, &xv)| 2.0 * (xb - xv) / (d * n))
            .collect();
        let grad_y_recon = model.decoder.backward(&dec_trace, &grad_xbar, &mut dec_grads);

        // Adversarial route: through the (frozen) discriminator.
        let disc_trace = model.discriminator.forward_trace(&y);
        let z = model.discriminator.last_logit(&disc_trace)[0];
        loss += mse + softplus(-z);
        let grad_logit = vec![(sigmoid(z) - 1.0) / n];
        let grad_y_adv =
            model
                .discriminator
                .backward_from_logit(&disc_trace, grad_logit, &mut disc_scratch);

        let grad_y: Vec<f64> = grad_y_recon
            .iter()
            .zip(grad_y_adv.iter())
            .map(|(a, b)| a + b)
            .collect();
        model.encoder.backward(&enc_trace, &grad_y, &mut enc_grads);
    }
    Ok((loss / n, enc_grads, dec_grads))
}

/// Alternating-phase training, deterministic for a fixed model seed.
///
/// Per batch: (1) minimise the reconstruction term over encoder + decoder;
/// (2) update the discriminator on the cross-entropy loss, then the encoder
/// on the adversarial term. The threshold is the configured percentile
/// (linear interpolation) of reconstruction errors over the held-out tail of
/// `samples`.
pub fn train(
    model: AaeModel,
    samples: &[SpectralSample],
    cfg: &TrainConfig,
) -> Result<TrainOutcome, AaeError> {
    cfg.validate()?;
    if samples.len() < 10 {
        return Err(AaeError::TooFewSamples {
            got: samples.len(),
            need: 10,
        });
    }
    let dim = model.input_dim();
    for s in samples {
        if s.values.len() != dim {
            return Err(AaeError::DimensionMismatch {
                expected: dim,
                got: s.values.len(),
            });
        }
    }
    let n_update = ((samples.len() as f64) * cfg.split_ratio).floor() as usize;
    let n_update = n_update.clamp(1, samples.len() - 1);
    let (fit, validation) = samples.split_at(n_update);

    let mut model = model;
    let mut rng = seeds::rng(model.rng_seed, "aae-train", 0);
    let mut ae_opt_enc = Adam::new(&model.encoder, cfg.learning_rate);
    let mut ae_opt_dec = Adam::new(&model.decoder, cfg.learning_rate);
    let mut disc_opt = Adam::new(&model.discriminator, cfg.learning_rate);
    let mut gen_opt = Adam::new(&model.encoder, cfg.learning_rate);

    let mut order: Vec<usize> = (0..fit.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        // Fisher-Yates shuffle from the training RNG stream.
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&[f64]> = chunk.iter().map(|&i| fit[i].values.as_slice()).collect();

            // Phase 1: reconstruction.
            let (recon_loss, enc_g, dec_g) = reconstruction_grads(&model, &batch)?;
            ae_opt_enc.step(&mut model.encoder, &enc_g);
            ae_opt_dec.step(&mut model.decoder, &dec_g);
            epoch_loss += recon_loss;
            batches += 1;

            // Phase 2a: discriminator on prior vs encoded latents.
            let y_batch: Vec<Vec<f64>> = batch.iter().map(|x| model.encoder.forward(x)).collect();
            let y_true: Vec<Vec<f64>> = (0..batch.len())
                .map(|_| {
                    (0..model.latent_dim)
                        .map(|_| rng.sample::<f64, _>(StandardNormal))
                        .collect()
                })
                .collect();
            let (_, disc_g) = discriminator_loss_grads(&model, &y_batch, &y_true)?;
            disc_opt.step(&mut model.discriminator, &disc_g);

            // Phase 2b: encoder fools the (frozen) discriminator.
            let enc_g = adversarial_encoder_grads(&model, &batch)?;
            gen_opt.step(&mut model.encoder, &enc_g);
        }
        epoch_losses.push(epoch_loss / batches as f64);
    }

    let validation_errors: Vec<f64> = validation
        .iter()
        .map(|s| model.reconstruction_error(&s.values))
        .collect::<Result<_, _>>()?;
    let threshold = percentile_linear(&validation_errors, cfg.threshold_percentile);

    Ok(TrainOutcome {
        model,
        threshold,
        validation_errors,
        epoch_losses,
    })
}

/// Compare the reconstruction error of `x` against the threshold; anomalous
/// iff `error > threshold`.
pub fn classify(model: &AaeModel, threshold: f64, x: &SpectralSample) -> Result<DetectionResult, AaeError> {
    let error = model.reconstruction_error(&x.values)?;
    let verdict = if error > threshold {
        Verdict::Anomalous
    } else {
        Verdict::Nominal
    };
    Ok(DetectionResult {
        error,
        threshold,
        verdict,
    })
}

/// Percentile with linear interpolation between order statistics.
pub fn percentile_linear(values: &[f64], pct: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of empty slice");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = (pct / 100.0) * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = rank - lo as f64;
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

fn reconstruction_grads(
    model: &AaeModel,
    batch: &[&[f64]],
) -> Result<(f64, MlpGrads, MlpGrads), AaeError> {
    let n = batch.len() as f64;
    let mut enc_grads = MlpGrads::zeros_like(&model.encoder);
    let mut dec_grads = MlpGrads::zeros_like(&model.decoder);
    let mut loss = 0.0;
    for &x in batch {
        let d = x.len() as f64;
        let enc_trace = model.encoder.forward_trace(x);
        let dec_trace = model.decoder.forward_trace(enc_trace.output());
        let x_bar = dec_trace.output();
        loss += x
            .iter()
            .zip(x_bar.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / d;
        let grad_xbar: Vec<f64> = x_bar
            .iter()
            .zip(x.iter())
            .map(|(&xb, &xv)| 2.0 * (xb - xv) / (d * n))
            .collect();
        let grad_y = model.decoder.backward(&dec_trace, &grad_xbar, &mut dec_grads);
        model.encoder.backward(&enc_trace, &grad_y, &mut enc_grads);
    }
    Ok((loss / n, enc_grads, dec_grads))
}

fn adversarial_encoder_grads(model: &AaeModel, batch: &[&[f64]]) -> Result<MlpGrads, AaeError> {
    let n = batch.len() as f64;
    let mut enc_grads = MlpGrads::zeros_like(&model.encoder);
    let mut disc_scratch = MlpGrads::zeros_like(&model.discriminator);
    for &x in batch {
        let enc_trace = model.encoder.forward_trace(x);
        let disc_trace = model.discriminator.forward_trace(enc_trace.output());
        let z = model.discriminator.last_logit(&disc_trace)[0];
        let grad_logit = vec![(sigmoid(z) - 1.0) / n];
        let grad_y =
            model
                .discriminator
                .backward_from_logit(&disc_trace, grad_logit, &mut disc_scratch);
        model.encoder.backward(&enc_trace, &grad_y, &mut enc_grads);
    }
    Ok(enc_grads)
}

fn disc_logit(model: &AaeModel, y: &[f64]) -> Result<f64, AaeError> {
    if y.len() != model.latent_dim {
        return Err(AaeError::DimensionMismatch {
            expected: model.latent_dim,
            got: y.len(),
        });
    }
    let trace = model.discriminator.forward_trace(y);
    Ok(model.discriminator.last_logit(&trace)[0])
}

fn check_batches(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<(), AaeError> {
    if a.is_empty() || b.is_empty() {
        return Err(AaeError::EmptyBatch);
    }
    if a.len() != b.len() {
        return Err(AaeError::MismatchedBatch { a: a.len(), b: b.len() });
    }
    Ok(())
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}
