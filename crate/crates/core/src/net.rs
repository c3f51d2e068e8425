//! A small feed-forward network trained from scratch: dense and dropout
//! layers, sigmoid output with binary cross-entropy, mini-batch SGD or Adam,
//! and a finite-difference gradient checker.
//!
//! Everything is deterministic: weight init and dropout masks come from the
//! model's seeded generator, batch order from the training config's shuffle
//! seed, and all reductions run in a fixed order.

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

mod io;
pub use io::{load_model, save_model};

/// Clamp bound for probabilities inside the cross-entropy.
pub const BCE_EPSILON: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Sigmoid,
    Linear,
}

/// One layer of the architecture description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Dense { units: usize, activation: Activation },
    Dropout { rate: f64 },
}

/// The reference architecture: six dense layers with two dropout layers,
/// ReLU hidden activations and a single sigmoid output unit. With 29 inputs
/// this holds exactly 2,112 parameters.
pub fn paper_architecture(input_dim: usize) -> Result<Vec<LayerSpec>> {
    if input_dim < 1 {
        return Err(Error::InvalidParameter {
            name: "input_dim",
            reason: "must be at least 1".into(),
        });
    }
    use Activation::{Relu, Sigmoid};
    Ok(vec![
        LayerSpec::Dense { units: 16, activation: Relu },
        LayerSpec::Dense { units: 24, activation: Relu },
        LayerSpec::Dropout { rate: 0.5 },
        LayerSpec::Dense { units: 20, activation: Relu },
        LayerSpec::Dense { units: 15, activation: Relu },
        LayerSpec::Dropout { rate: 0.3 },
        LayerSpec::Dense { units: 24, activation: Relu },
        LayerSpec::Dense { units: 1, activation: Sigmoid },
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerSpec {
    Sgd { learning_rate: f64 },
    Adam { learning_rate: f64 },
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        OptimizerSpec::Adam { learning_rate: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerSpec,
    pub shuffle_seed: u64,
    /// Score cutoff for the accuracy entry of the history and for `predict`.
    pub classify_threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 32,
            optimizer: OptimizerSpec::default(),
            shuffle_seed: 0,
            classify_threshold: 0.5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::InvalidParameter {
                name: "epochs",
                reason: "must be at least 1".into(),
            });
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidParameter {
                name: "batch_size",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.classify_threshold > 0.0 && self.classify_threshold < 1.0) {
            return Err(Error::InvalidParameter {
                name: "classify_threshold",
                reason: format!("must be in (0, 1), got {}", self.classify_threshold),
            });
        }
        let (OptimizerSpec::Sgd { learning_rate } | OptimizerSpec::Adam { learning_rate }) =
            self.optimizer;
        if !(learning_rate >= 0.0 && learning_rate.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "learning_rate",
                reason: format!("must be finite and nonnegative, got {learning_rate}"),
            });
        }
        Ok(())
    }
}

/// Loss and training accuracy of one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone)]
struct Dense {
    weights: Array2<f64>,
    biases: Array1<f64>,
    activation: Activation,
}

#[derive(Debug, Clone)]
enum Layer {
    Dense(Dense),
    Dropout { rate: f64 },
}

/// Forward/inference mode: training applies inverted dropout (surviving
/// activations scaled by 1/(1-rate)); inference leaves activations alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Activation/mask cache from one forward pass, sufficient for backward.
pub struct ForwardCache {
    /// Input to each layer, in layer order (index 0 is the batch itself).
    layer_inputs: Vec<Array2<f64>>,
    /// Pre-activation of each dense layer (None for dropout layers).
    pre_activations: Vec<Option<Array2<f64>>>,
    /// Scaled dropout mask of each dropout layer (None in infer mode or for
    /// dense layers).
    masks: Vec<Option<Array2<f64>>>,
    /// Final (n, 1) output.
    output: Array2<f64>,
}

/// Dense/dropout layer stack with materialized weights.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    input_dim: usize,
    layers: Vec<Layer>,
    seed: u64,
    rng: ChaCha8Rng,
}

impl NetworkModel {
    /// Materialize an architecture: Glorot-style uniform weight init
    /// (U(-L, L), L = sqrt(6 / (fan_in + fan_out))) and zero biases, drawn
    /// from a generator seeded with `seed`.
    pub fn new(input_dim: usize, specs: &[LayerSpec], seed: u64) -> Result<Self> {
        if input_dim < 1 {
            return Err(Error::InvalidParameter {
                name: "input_dim",
                reason: "must be at least 1".into(),
            });
        }
        if !matches!(specs.last(), Some(LayerSpec::Dense { .. })) {
            return Err(Error::InvalidParameter {
                name: "layers",
                reason: "the final layer must be dense".into(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(specs.len());
        let mut width = input_dim;
        for spec in specs {
            match *spec {
                LayerSpec::Dense { units, activation } => {
                    if units < 1 {
                        return Err(Error::InvalidParameter {
                            name: "units",
                            reason: "dense layers need at least 1 unit".into(),
                        });
                    }
                    let limit = (6.0 / (width + units) as f64).sqrt();
                    let weights = Array2::from_shape_fn((width, units), |_| {
                        rng.random_range(-limit..limit)
                    });
                    layers.push(Layer::Dense(Dense {
                        weights,
                        biases: Array1::zeros(units),
                        activation,
                    }));
                    width = units;
                }
                LayerSpec::Dropout { rate } => {
                    if !(0.0..1.0).contains(&rate) {
                        return Err(Error::InvalidParameter {
                            name: "rate",
                            reason: format!("dropout rate must be in [0, 1), got {rate}"),
                        });
                    }
                    layers.push(Layer::Dropout { rate });
                }
            }
        }
        Ok(Self {
            input_dim,
            layers,
            seed,
            rng,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The architecture this model was built from.
    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Dense(d) => LayerSpec::Dense {
                    units: d.weights.ncols(),
                    activation: d.activation,
                },
                Layer::Dropout { rate } => LayerSpec::Dropout { rate: *rate },
            })
            .collect()
    }

    /// Total trainable parameter count: sum of fan_in*units + units over
    /// dense layers.
    pub fn param_count(&self) -> usize {
        self.dense_param_counts().iter().sum()
    }

    /// Parameter count per dense layer, in layer order.
    pub fn dense_param_counts(&self) -> Vec<usize> {
        self.layers
            .iter()
            .filter_map(|l| match l {
                Layer::Dense(d) => Some(d.weights.len() + d.biases.len()),
                Layer::Dropout { .. } => None,
            })
            .collect()
    }

    /// Copy of the model with every dropout rate forced to zero.
    pub fn with_dropout_disabled(&self) -> Self {
        let mut copy = self.clone();
        for layer in &mut copy.layers {
            if let Layer::Dropout { rate } = layer {
                *rate = 0.0;
            }
        }
        copy
    }

    /// Run the network over a batch (rows = examples). Training mode draws
    /// fresh dropout masks from the model's generator; inference applies
    /// none. Returns the output probabilities and the cache backward needs.
    pub fn forward(&mut self, batch: &Array2<f64>, mode: Mode) -> Result<(Array1<f64>, ForwardCache)> {
        let masks = match mode {
            Mode::Train => Some(self.draw_masks(batch.nrows())),
            Mode::Infer => None,
        };
        self.forward_with_masks(batch, masks)
    }

    /// Inference-only forward pass; needs no mutable access because no
    /// dropout masks are drawn.
    pub fn forward_infer(&self, batch: &Array2<f64>) -> Result<Array1<f64>> {
        let (probs, _) = self.forward_with_masks(batch, None)?;
        Ok(probs)
    }

    /// Scores and thresholded labels for a feature matrix: label 1 iff
    /// score >= threshold.
    pub fn predict(&self, features: &Array2<f64>, threshold: f64) -> Result<(Vec<u8>, Vec<f64>)> {
        let scores = self.forward_infer(features)?;
        let labels = scores
            .iter()
            .map(|&s| u8::from(s >= threshold))
            .collect();
        Ok((labels, scores.to_vec()))
    }

    fn draw_masks(&mut self, batch_len: usize) -> Vec<Option<Array2<f64>>> {
        let mut width = self.input_dim;
        let mut masks = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            match layer {
                Layer::Dense(d) => {
                    width = d.weights.ncols();
                    masks.push(None);
                }
                Layer::Dropout { rate } => {
                    if *rate == 0.0 {
                        masks.push(None);
                    } else {
                        let scale = 1.0 / (1.0 - rate);
                        let mask = Array2::from_shape_fn((batch_len, width), |_| {
                            if self.rng.random::<f64>() < *rate {
                                0.0
                            } else {
                                scale
                            }
                        });
                        masks.push(Some(mask));
                    }
                }
            }
        }
        masks
    }

    fn forward_with_masks(
        &self,
        batch: &Array2<f64>,
        masks: Option<Vec<Option<Array2<f64>>>>,
    ) -> Result<(Array1<f64>, ForwardCache)> {
        if batch.ncols() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: batch.ncols(),
            });
        }
        let masks = masks.unwrap_or_else(|| vec![None; self.layers.len()]);
        let mut layer_inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut current = batch.clone();
        for (layer, mask) in self.layers.iter().zip(&masks) {
            layer_inputs.push(current.clone());
            match layer {
                Layer::Dense(d) => {
                    let mut z = current.dot(&d.weights);
                    z += &d.biases;
                    let a = match d.activation {
                        Activation::Relu => z.mapv(|v| v.max(0.0)),
                        Activation::Sigmoid => z.mapv(sigmoid),
                        Activation::Linear => z.clone(),
                    };
                    pre_activations.push(Some(z));
                    current = a;
                }
                Layer::Dropout { .. } => {
                    pre_activations.push(None);
                    if let Some(mask) = mask {
                        current *= mask;
                    }
                }
            }
            if current.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "activations",
                    reason: "non-finite activation; training has diverged".into(),
                });
            }
        }
        let output = current;
        let probs = output.index_axis(Axis(1), 0).to_owned();
        Ok((
            probs,
            ForwardCache {
                layer_inputs,
                pre_activations,
                masks,
                output,
            },
        ))
    }

    fn require_sigmoid_output(&self) -> Result<()> {
        match self.layers.last() {
            Some(Layer::Dense(d))
                if d.activation == Activation::Sigmoid && d.weights.ncols() == 1 =>
            {
                Ok(())
            }
            _ => Err(Error::InvalidParameter {
                name: "layers",
                reason: "training requires a single-unit sigmoid output layer".into(),
            }),
        }
    }

    /// Per-dense-layer gradients for the batch in `cache`, with the
    /// sigmoid/cross-entropy pair folded into the output delta.
    fn backward(&self, cache: &ForwardCache, targets: &Array1<f64>) -> Vec<Option<DenseGrads>> {
        let n = targets.len() as f64;
        let mut delta = cache.output.clone();
        let mut col = delta.index_axis_mut(Axis(1), 0);
        col -= targets;
        delta /= n;

        let mut grads: Vec<Option<DenseGrads>> = Vec::with_capacity(self.layers.len());
        grads.resize_with(self.layers.len(), || None);
        let mut at_output = true;
        for (i, layer) in self.layers.iter().enumerate().rev() {
            match layer {
                Layer::Dropout { .. } => {
                    if let Some(mask) = &cache.masks[i] {
                        delta *= mask;
                    }
                }
                Layer::Dense(d) => {
                    if at_output {
                        // Delta already holds dL/dz for the fused
                        // sigmoid + cross-entropy output layer.
                        at_output = false;
                    } else {
                        let z = cache.pre_activations[i].as_ref().expect("dense cached z");
                        match d.activation {
                            Activation::Relu => {
                                delta.zip_mut_with(z, |g, &zv| {
                                    if zv <= 0.0 {
                                        *g = 0.0;
                                    }
                                });
                            }
                            Activation::Sigmoid => {
                                delta.zip_mut_with(z, |g, &zv| {
                                    let s = sigmoid(zv);
                                    *g *= s * (1.0 - s);
                                });
                            }
                            Activation::Linear => {}
                        }
                    }
                    let x = &cache.layer_inputs[i];
                    grads[i] = Some(DenseGrads {
                        weights: x.t().dot(&delta),
                        biases: delta.sum_axis(Axis(0)),
                    });
                    delta = delta.dot(&d.weights.t());
                }
            }
        }
        grads
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

struct DenseGrads {
    weights: Array2<f64>,
    biases: Array1<f64>,
}

/// Mean binary cross-entropy with probabilities clamped to
/// [BCE_EPSILON, 1 - BCE_EPSILON].
pub fn bce_loss(probs: &[f64], targets: &[f64]) -> Result<f64> {
    if probs.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: targets.len(),
            got: probs.len(),
        });
    }
    if probs.is_empty() {
        return Err(Error::EmptyInput("bce_loss needs at least one value".into()));
    }
    let mut sum = 0.0;
    for (&p, &y) in probs.iter().zip(targets) {
        let p = p.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON);
        sum -= y * p.ln() + (1.0 - y) * (1.0 - p).ln();
    }
    Ok(sum / probs.len() as f64)
}

enum OptimizerState {
    Sgd {
        learning_rate: f64,
    },
    Adam {
        learning_rate: f64,
        step: u64,
        moments: Vec<Option<AdamMoments>>,
    },
}

struct AdamMoments {
    m_w: Array2<f64>,
    v_w: Array2<f64>,
    m_b: Array1<f64>,
    v_b: Array1<f64>,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl OptimizerState {
    fn new(spec: OptimizerSpec, layers: &[Layer]) -> Self {
        match spec {
            OptimizerSpec::Sgd { learning_rate } => OptimizerState::Sgd { learning_rate },
            OptimizerSpec::Adam { learning_rate } => {
                let moments = layers
                    .iter()
                    .map(|l| match l {
                        Layer::Dense(d) => Some(AdamMoments {
                            m_w: Array2::zeros(d.weights.dim()),
                            v_w: Array2::zeros(d.weights.dim()),
                            m_b: Array1::zeros(d.biases.len()),
                            v_b: Array1::zeros(d.biases.len()),
                        }),
                        Layer::Dropout { .. } => None,
                    })
                    .collect();
                OptimizerState::Adam {
                    learning_rate,
                    step: 0,
                    moments,
                }
            }
        }
    }

    fn apply(&mut self, layers: &mut [Layer], grads: &[Option<DenseGrads>]) {
        match self {
            OptimizerState::Sgd { learning_rate } => {
                for (layer, grad) in layers.iter_mut().zip(grads) {
                    if let (Layer::Dense(d), Some(g)) = (layer, grad) {
                        d.weights.scaled_add(-*learning_rate, &g.weights);
                        d.biases.scaled_add(-*learning_rate, &g.biases);
                    }
                }
            }
            OptimizerState::Adam {
                learning_rate,
                step,
                moments,
            } => {
                *step += 1;
                let t = *step as i32;
                let bias1 = 1.0 - ADAM_BETA1.powi(t);
                let bias2 = 1.0 - ADAM_BETA2.powi(t);
                for ((layer, grad), moment) in layers.iter_mut().zip(grads).zip(moments) {
                    let (Layer::Dense(d), Some(g), Some(m)) = (layer, grad, moment) else {
                        continue;
                    };
                    adam_update_2d(&mut d.weights, &g.weights, &mut m.m_w, &mut m.v_w, *learning_rate, bias1, bias2);
                    adam_update_1d(&mut d.biases, &g.biases, &mut m.m_b, &mut m.v_b, *learning_rate, bias1, bias2);
                }
            }
        }
    }
}

fn adam_update_2d(
    param: &mut Array2<f64>,
    grad: &Array2<f64>,
    m: &mut Array2<f64>,
    v: &mut Array2<f64>,
    lr: f64,
    bias1: f64,
    bias2: f64,
) {
    for ((p, &g), (m, v)) in param
        .iter_mut()
        .zip(grad.iter())
        .zip(m.iter_mut().zip(v.iter_mut()))
    {
        *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
        *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
        let m_hat = *m / bias1;
        let v_hat = *v / bias2;
        *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
    }
}

fn adam_update_1d(
    param: &mut Array1<f64>,
    grad: &Array1<f64>,
    m: &mut Array1<f64>,
    v: &mut Array1<f64>,
    lr: f64,
    bias1: f64,
    bias2: f64,
) {
    for ((p, &g), (m, v)) in param
        .iter_mut()
        .zip(grad.iter())
        .zip(m.iter_mut().zip(v.iter_mut()))
    {
        *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
        *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
        let m_hat = *m / bias1;
        let v_hat = *v / bias2;
        *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
    }
}

/// Mini-batch training with shuffled epochs. The last short batch is used,
/// not dropped. Returns the per-epoch (loss, train accuracy) history;
/// aborts with the epoch index if the loss stops being finite.
pub fn train(
    model: &mut NetworkModel,
    data: &LabeledDataset,
    cfg: &TrainConfig,
) -> Result<Vec<EpochRecord>> {
    cfg.validate()?;
    model.require_sigmoid_output()?;
    if data.is_empty() {
        return Err(Error::EmptyInput("training data is empty".into()));
    }
    if data.n_features() != model.input_dim {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim,
            got: data.n_features(),
        });
    }
    let targets: Vec<f64> = data.labels().iter().map(|&l| l as f64).collect();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.shuffle_seed);
    let mut optimizer = OptimizerState::new(cfg.optimizer, &model.layers);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..data.n_rows()).collect();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let batch = data.features().select(Axis(0), chunk);
            let batch_targets =
                Array1::from_iter(chunk.iter().map(|&i| targets[i]));
            let (probs, cache) = model
                .forward(&batch, Mode::Train)
                .map_err(|_| Error::Divergence { epoch })?;
            let loss = bce_loss(probs.as_slice().expect("contiguous"), batch_targets.as_slice().expect("contiguous"))?;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            loss_sum += loss * chunk.len() as f64;
            correct += probs
                .iter()
                .zip(batch_targets.iter())
                .filter(|(&p, &y)| f64::from(u8::from(p >= cfg.classify_threshold)) == y)
                .count();
            let grads = model.backward(&cache, &batch_targets);
            optimizer.apply(&mut model.layers, &grads);
        }
        history.push(EpochRecord {
            loss: loss_sum / data.n_rows() as f64,
            accuracy: correct as f64 / data.n_rows() as f64,
        });
    }
    Ok(history)
}

/// Compare analytic gradients with central finite differences of the loss
/// at w +/- epsilon, parameter-wise, on one batch. Returns the maximum
/// relative error |analytic - numeric| / max(|analytic|, |numeric|, 1e-5).
///
/// The model must have every dropout rate at zero (see
/// `with_dropout_disabled`) so both gradient routes see the same function.
pub fn gradient_check(
    model: &NetworkModel,
    features: &Array2<f64>,
    labels: &[u8],
    epsilon: f64,
) -> Result<f64> {
    if model.layers.iter().any(|l| matches!(l, Layer::Dropout { rate } if *rate > 0.0)) {
        return Err(Error::DropoutActive);
    }
    model.require_sigmoid_output()?;
    if features.nrows() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: features.nrows(),
            got: labels.len(),
        });
    }
    let targets: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
    let target_arr = Array1::from_vec(targets.clone());

    let (_, cache) = model.forward_with_masks(features, None)?;
    let grads = model.backward(&cache, &target_arr);

    let mut probe = model.clone();
    let mut max_rel = 0.0f64;
    for layer_idx in 0..model.layers.len() {
        let Some(g) = &grads[layer_idx] else { continue };
        let n_weights = g.weights.len();
        let n_params = n_weights + g.biases.len();
        let cols = g.weights.ncols();
        for flat in 0..n_params {
            // Flat order: weight matrix row-major, then biases — the same
            // convention peek_param/poke_param use on the model.
            let analytic = if flat < n_weights {
                g.weights[[flat / cols, flat % cols]]
            } else {
                g.biases[flat - n_weights]
            };
            let original = probe.peek_param(layer_idx, flat);
            probe.poke_param(layer_idx, flat, original + epsilon);
            let loss_plus = loss_of(&probe, features, &targets)?;
            probe.poke_param(layer_idx, flat, original - epsilon);
            let loss_minus = loss_of(&probe, features, &targets)?;
            probe.poke_param(layer_idx, flat, original);
            let numeric = (loss_plus - loss_minus) / (2.0 * epsilon);
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-5);
            max_rel = max_rel.max(rel);
        }
    }
    Ok(max_rel)
}

fn loss_of(model: &NetworkModel, features: &Array2<f64>, targets: &[f64]) -> Result<f64> {
    let probs = model.forward_infer(features)?;
    bce_loss(probs.as_slice().expect("contiguous"), targets)
}

impl NetworkModel {
    fn peek_param(&self, layer_idx: usize, flat: usize) -> f64 {
        let Layer::Dense(d) = &self.layers[layer_idx] else {
            unreachable!("gradients exist only for dense layers")
        };
        let n_weights = d.weights.len();
        if flat < n_weights {
            d.weights.as_slice().expect("standard layout")[flat]
        } else {
            d.biases[flat - n_weights]
        }
    }

    fn poke_param(&mut self, layer_idx: usize, flat: usize, value: f64) {
        let Layer::Dense(d) = &mut self.layers[layer_idx] else {
            unreachable!("gradients exist only for dense layers")
        };
        let n_weights = d.weights.len();
        if flat < n_weights {
            d.weights.as_slice_mut().expect("standard layout")[flat] = value;
        } else {
            d.biases[flat - n_weights] = value;
        }
    }

    /// Iterate dense layers as (weights, biases) for serialization.
    fn dense_layers(&self) -> impl Iterator<Item = &Dense> {
        self.layers.iter().filter_map(|l| match l {
            Layer::Dense(d) => Some(d),
            Layer::Dropout { .. } => None,
        })
    }

    fn dense_layers_mut(&mut self) -> impl Iterator<Item = &mut Dense> {
        self.layers.iter_mut().filter_map(|l| match l {
            Layer::Dense(d) => Some(d),
            Layer::Dropout { .. } => None,
        })
    }
}
