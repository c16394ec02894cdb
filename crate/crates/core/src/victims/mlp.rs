use std::path::Path;

use serde::{Deserialize, Serialize};

use super::VictimError;
use crate::domain::{DecisionOracle, InputVector, Label, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    None,
}

/// One dense layer; `weights` has one row per output unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

/// On-disk form of an [`MlpOracle`] (JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpFile {
    /// Optional `[d]` or `[c, h, w]`; defaults to the first layer's width.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_shape: Option<Vec<usize>>,
    pub layers: Vec<Layer>,
}

/// A dense feed-forward classifier; the label is the argmax of the last
/// layer, lowest index on ties.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpOracle {
    layers: Vec<Layer>,
    input_shape: Shape,
}

impl MlpOracle {
    pub fn new(layers: Vec<Layer>, input_shape: Option<Shape>) -> Result<Self, VictimError> {
        let first = layers
            .first()
            .ok_or_else(|| VictimError::Invalid("network has no layers".into()))?;
        let mut width = first.weights.first().map_or(0, Vec::len);
        if width == 0 {
            return Err(VictimError::Invalid("first layer has no inputs".into()));
        }
        let input_shape = input_shape.unwrap_or(Shape::Flat(width));
        if input_shape.len() != width {
            return Err(VictimError::Invalid(format!(
                "input shape {input_shape} does not match first layer width {width}"
            )));
        }
        for (i, layer) in layers.iter().enumerate() {
            if layer.weights.is_empty() {
                return Err(VictimError::Invalid(format!("layer {i} has no units")));
            }
            if let Some(row) = layer.weights.iter().position(|r| r.len() != width) {
                return Err(VictimError::Invalid(format!(
                    "layer {i} row {row} has {} columns, expected {width}",
                    layer.weights[row].len()
                )));
            }
            if layer.bias.len() != layer.weights.len() {
                return Err(VictimError::Invalid(format!(
                    "layer {i} has {} biases for {} units",
                    layer.bias.len(),
                    layer.weights.len()
                )));
            }
            width = layer.weights.len();
        }
        Ok(Self {
            layers,
            input_shape,
        })
    }

    pub fn from_file(file: MlpFile) -> Result<Self, VictimError> {
        let shape = match file.input_shape.as_deref() {
            None => None,
            Some([d]) => Some(Shape::Flat(*d)),
            Some([c, h, w]) => Some(Shape::Chw(*c, *h, *w)),
            Some(other) => {
                return Err(VictimError::Invalid(format!(
                    "input_shape must have 1 or 3 dimensions, got {other:?}"
                )))
            }
        };
        Self::new(file.layers, shape)
    }

    pub fn from_json(text: &str) -> Result<Self, VictimError> {
        let file: MlpFile =
            serde_json::from_str(text).map_err(|e| VictimError::Invalid(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, VictimError> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_json(&text)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn logits(&self, x: &InputVector) -> Result<Vec<f64>, VictimError> {
        if x.len() != self.input_shape.len() {
            return Err(VictimError::ShapeMismatch {
                expected: self.input_shape.len(),
                got: x.len(),
            });
        }
        let mut act = x.data().to_vec();
        for layer in &self.layers {
            act = layer
                .weights
                .iter()
                .zip(&layer.bias)
                .map(|(row, b)| {
                    let z = row.iter().zip(&act).map(|(w, a)| w * a).sum::<f64>() + b;
                    match layer.activation {
                        Activation::Relu => z.max(0.0),
                        Activation::None => z,
                    }
                })
                .collect();
        }
        Ok(act)
    }

    pub fn mlp_label(&self, x: &InputVector) -> Result<Label, VictimError> {
        let logits = self.logits(x)?;
        let mut best = 0;
        for (i, v) in logits.iter().enumerate() {
            if *v > logits[best] {
                best = i;
            }
        }
        Ok(Label(best))
    }
}

impl DecisionOracle for MlpOracle {
    fn label_of(&self, x: &InputVector) -> Label {
        self.mlp_label(x)
            .expect("attack inputs match the oracle's input shape")
    }

    fn class_count(&self) -> usize {
        self.layers.last().map_or(0, |l| l.weights.len())
    }

    fn input_shape(&self) -> Shape {
        self.input_shape
    }
}
