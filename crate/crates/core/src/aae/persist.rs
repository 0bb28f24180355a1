//! Model persistence as a JSON document.
//!
//! Weights are stored row-major as decimal strings (shortest round-trip
//! formatting), so a saved model reloads bit-exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::net::{Activation, Layer, Mlp};
use super::{AaeError, AaeModel, TrainConfig};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct TrainingManifest {
    pub config: TrainConfig,
    pub n_samples: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct LayerDoc {
    input_dim: usize,
    output_dim: usize,
    activation: Activation,
    weights: Vec<String>,
    biases: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelDoc {
    schema_version: u32,
    latent_dim: usize,
    rng_seed: u64,
    threshold: Option<String>,
    training: Option<TrainingManifest>,
    encoder: Vec<LayerDoc>,
    decoder: Vec<LayerDoc>,
    discriminator: Vec<LayerDoc>,
}

fn layer_to_doc(layer: &Layer) -> LayerDoc {
    LayerDoc {
        input_dim: layer.input_dim,
        output_dim: layer.output_dim,
        activation: layer.activation,
        weights: layer.weights.iter().map(|v| format!("{v}")).collect(),
        biases: layer.biases.iter().map(|v| format!("{v}")).collect(),
    }
}

fn doc_to_layer(doc: &LayerDoc) -> Result<Layer, AaeError> {
    let parse = |s: &String| -> Result<f64, AaeError> {
        s.parse::<f64>()
            .map_err(|e| AaeError::Persist(format!("bad weight {s:?}: {e}")))
    };
    let weights: Vec<f64> = doc.weights.iter().map(parse).collect::<Result<_, _>>()?;
    let biases: Vec<f64> = doc.biases.iter().map(parse).collect::<Result<_, _>>()?;
    if weights.len() != doc.input_dim * doc.output_dim || biases.len() != doc.output_dim {
        return Err(AaeError::Persist(format!(
            "layer shape {}x{} inconsistent with {} weights / {} biases",
            doc.output_dim,
            doc.input_dim,
            weights.len(),
            biases.len()
        )));
    }
    Ok(Layer {
        weights,
        biases,
        input_dim: doc.input_dim,
        output_dim: doc.output_dim,
        activation: doc.activation,
    })
}

/// Serialise a model (and optional calibrated threshold / training manifest)
/// to pretty JSON.
pub fn model_to_json(
    model: &AaeModel,
    threshold: Option<f64>,
    training: Option<TrainingManifest>,
) -> String {
    let doc = ModelDoc {
        schema_version: MODEL_SCHEMA_VERSION,
        latent_dim: model.latent_dim,
        rng_seed: model.rng_seed,
        threshold: threshold.map(|t| format!("{t}")),
        training,
        encoder: model.encoder.layers.iter().map(layer_to_doc).collect(),
        decoder: model.decoder.layers.iter().map(layer_to_doc).collect(),
        discriminator: model.discriminator.layers.iter().map(layer_to_doc).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("model serialisation cannot fail")
}

/// Parse a model document produced by [`model_to_json`].
pub fn model_from_json(json: &str) -> Result<(AaeModel, Option<f64>), AaeError> {
    let doc: ModelDoc =
        serde_json::from_str(json).map_err(|e| AaeError::Persist(format!("bad model JSON: {e}")))?;
    if doc.schema_version != MODEL_SCHEMA_VERSION {
        return Err(AaeError::Persist(format!(
            "unsupported model schema version {}",
            doc.schema_version
        )));
    }
    let to_mlp = |docs: &[LayerDoc]| -> Result<Mlp, AaeError> {
        Ok(Mlp {
            layers: docs.iter().map(doc_to_layer).collect::<Result<_, _>>()?,
        })
    };
    let threshold = doc
        .threshold
        .as_ref()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|e| AaeError::Persist(format!("bad threshold {s:?}: {e}")))
        })
        .transpose()?;
    Ok((
        AaeModel {
            encoder: to_mlp(&doc.encoder)?,
            decoder: to_mlp(&doc.decoder)?,
            discriminator: to_mlp(&doc.discriminator)?,
            latent_dim: doc.latent_dim,
            rng_seed: doc.rng_seed,
        },
        threshold,
    ))
}

/// Write a model document to disk.
pub fn save_model(
    path: &Path,
    model: &AaeModel,
    threshold: Option<f64>,
    training: Option<TrainingManifest>,
) -> Result<(), AaeError> {
    std::fs::write(path, model_to_json(model, threshold, training))
        .map_err(|e| AaeError::Persist(format!("writing {}: {e}", path.display())))
}

/// Read a model document from disk.
pub fn load_model(path: &Path) -> Result<(AaeModel, Option<f64>), AaeError> {
    let json = std::fs::read_to_string(path)
        .map_err(|e| AaeError::Persist(format!("reading {}: {e}", path.display())))?;
    model_from_json(&json)
}
