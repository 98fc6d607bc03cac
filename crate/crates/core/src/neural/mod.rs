//! From-scratch MLP engine: forward pass, softmax cross-entropy with L1
//! regularization, reverse-mode gradients, Adam, and the training loop.
//!
//! All hidden layers use ReLU; the output layer is affine (no softmax in the
//! logits). Everything is deterministic given the seed: weight init draws,
//! shuffles and summation orders are fixed. Dot products accumulate from
//! zero in index order with the bias added last — the fusion transfer
//! identity relies on that exact order.

mod io;
mod optim;
mod train;

pub use io::{load_model, load_model_expecting, save_model};
pub use optim::{adam_step, AdamState};
pub use train::{evaluate, loss, train, EpochMetrics};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("batch is empty")]
    EmptyBatch,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("malformed model file: {0}")]
    MalformedModel(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Fully-connected network parameters.
///
/// `dims = [d_in, h_1, ..., h_k, n_classes]`; layer `l` maps `dims[l]` to
/// `dims[l + 1]` with a `dims[l+1] x dims[l]` row-major weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel<T: Real> {
    dims: Vec<usize>,
    weights: Vec<Vec<T>>,
    biases: Vec<Vec<T>>,
}

impl<T: Real> MlpModel<T> {
    /// Seeded init: weights uniform in `±sqrt(6 / (fan_in + fan_out))`
    /// (drawn layer by layer, row-major), biases zero.
    pub fn init(dims: &[usize], seed: u64) -> Result<Self, NeuralError> {
        Self::check_dims(dims)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(dims.len() - 1);
        let mut biases = Vec::with_capacity(dims.len() - 1);
        for l in 0..dims.len() - 1 {
            let (fan_in, fan_out) = (dims[l], dims[l + 1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let w = (0..fan_in * fan_out)
                .map(|_| T::from_f64c(rng.gen_range(-bound..bound)))
                .collect();
            weights.push(w);
            biases.push(vec![T::zero(); fan_out]);
        }
        Ok(Self {
            dims: dims.to_vec(),
            weights,
            biases,
        })
    }

    /// All-zero parameters (tests and hand-built cases).
    pub fn zeros(dims: &[usize]) -> Result<Self, NeuralError> {
        Self::check_dims(dims)?;
        let weights = (0..dims.len() - 1)
            .map(|l| vec![T::zero(); dims[l] * dims[l + 1]])
            .collect();
        let biases = (0..dims.len() - 1).map(|l| vec![T::zero(); dims[l + 1]]).collect();
        Ok(Self {
            dims: dims.to_vec(),
            weights,
            biases,
        })
    }

    /// Assembles a model from explicit parameters, validating shapes.
    pub fn from_parts(
        dims: Vec<usize>,
        weights: Vec<Vec<T>>,
        biases: Vec<Vec<T>>,
    ) -> Result<Self, NeuralError> {
        Self::check_dims(&dims)?;
        if weights.len() != dims.len() - 1 || biases.len() != dims.len() - 1 {
            return Err(NeuralError::Shape(format!(
                "expected {} layers of parameters, got {} weight and {} bias sets",
                dims.len() - 1,
                weights.len(),
                biases.len()
            )));
        }
        for l in 0..dims.len() - 1 {
            if weights[l].len() != dims[l] * dims[l + 1] {
                return Err(NeuralError::Shape(format!(
                    "layer {l} weights: expected {}x{} values, got {}",
                    dims[l + 1],
                    dims[l],
                    weights[l].len()
                )));
            }
            if biases[l].len() != dims[l + 1] {
                return Err(NeuralError::Shape(format!(
                    "layer {l} biases: expected {}, got {}",
                    dims[l + 1],
                    biases[l].len()
                )));
            }
        }
        if weights.iter().flatten().any(|w| !w.is_finite())
            || biases.iter().flatten().any(|b| !b.is_finite())
        {
            return Err(NeuralError::Shape("non-finite parameter".into()));
        }
        Ok(Self {
            dims,
            weights,
            biases,
        })
    }

    fn check_dims(dims: &[usize]) -> Result<(), NeuralError> {
        if dims.len() < 2 {
            return Err(NeuralError::Shape(format!(
                "need at least input and output dims, got {dims:?}"
            )));
        }
        if dims.contains(&0) {
            return Err(NeuralError::Shape(format!("zero-size layer in {dims:?}")));
        }
        Ok(())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn layer_count(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn d_in(&self) -> usize {
        self.dims[0]
    }

    pub fn n_classes(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn weights(&self, layer: usize) -> &[T] {
        &self.weights[layer]
    }

    pub fn biases(&self, layer: usize) -> &[T] {
        &self.biases[layer]
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    pub(crate) fn weights_mut(&mut self, layer: usize) -> &mut [T] {
        &mut self.weights[layer]
    }

    pub(crate) fn biases_mut(&mut self, layer: usize) -> &mut [T] {
        &mut self.biases[layer]
    }

    /// `y = W x + b` for one layer; the dot product starts at zero and the
    /// bias is added after the full accumulation.
    fn affine(&self, layer: usize, input: &[T], output: &mut [T]) {
        let (d_in, d_out) = (self.dims[layer], self.dims[layer + 1]);
        debug_assert_eq!(input.len(), d_in);
        debug_assert_eq!(output.len(), d_out);
        let w = &self.weights[layer];
        let b = &self.biases[layer];
        for o in 0..d_out {
            let row = &w[o * d_in..(o + 1) * d_in];
            let mut acc = T::zero();
            for (wi, xi) in row.iter().zip(input.iter()) {
                acc += *wi * *xi;
            }
            output[o] = acc + b[o];
        }
    }

    /// Batched forward pass; returns `rows x n_classes` logits.
    pub fn forward(&self, inputs: &[T], rows: usize) -> Result<Vec<T>, NeuralError> {
        if rows == 0 || inputs.len() != rows * self.d_in() {
            return Err(NeuralError::Shape(format!(
                "inputs: expected {} rows x {} cols = {} values, got {}",
                rows,
                self.d_in(),
                rows * self.d_in(),
                inputs.len()
            )));
        }
        let acts = self.forward_cached(inputs, rows);
        Ok(acts.into_iter().last().unwrap())
    }

    /// Forward pass keeping every layer's activations (post-ReLU for hidden
    /// layers, raw logits for the output layer). `result[0]` is the input.
    pub(crate) fn forward_cached(&self, inputs: &[T], rows: usize) -> Vec<Vec<T>> {
        let layers = self.layer_count();
        let mut acts: Vec<Vec<T>> = Vec::with_capacity(layers + 1);
        acts.push(inputs.to_vec());
        for l in 0..layers {
            let d_out = self.dims[l + 1];
            let mut out = vec![T::zero(); rows * d_out];
            {
                let prev = &acts[l];
                let d_in = self.dims[l];
                for r in 0..rows {
                    let (src, dst) = (
                        &prev[r * d_in..(r + 1) * d_in],
                        &mut out[r * d_out..(r + 1) * d_out],
                    );
                    self.affine(l, src, dst);
                }
            }
            if l + 1 < layers {
                for v in out.iter_mut() {
                    if *v < T::zero() {
                        *v = T::zero();
                    }
                }
            }
            acts.push(out);
        }
        acts
    }
}

/// A labeled input matrix: `inputs` is `len x d_in` row-major, labels are
/// class indices in `[0, n_classes)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBatch<T: Real> {
    pub d_in: usize,
    inputs: Vec<T>,
    labels: Vec<usize>,
}

impl<T: Real> LabeledBatch<T> {
    pub fn new(d_in: usize, inputs: Vec<T>, labels: Vec<usize>) -> Result<Self, NeuralError> {
        if d_in == 0 || inputs.len() != labels.len() * d_in {
            return Err(NeuralError::Shape(format!(
                "batch: {} labels x {} dims != {} input values",
                labels.len(),
                d_in,
                inputs.len()
            )));
        }
        Ok(Self {
            d_in,
            inputs,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn inputs(&self) -> &[T] {
        &self.inputs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.inputs[i * self.d_in..(i + 1) * self.d_in]
    }

    /// Gathers the given rows into a new batch (used for minibatching).
    pub fn gather(&self, indices: &[usize]) -> Self {
        let mut inputs = Vec::with_capacity(indices.len() * self.d_in);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            inputs.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self {
            d_in: self.d_in,
            inputs,
            labels,
        }
    }
}

/// Per-parameter gradients, shapes mirroring [`MlpModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T: Real> {
    pub weights: Vec<Vec<T>>,
    pub biases: Vec<Vec<T>>,
}

impl<T: Real> Gradients<T> {
    pub fn zeros_like(model: &MlpModel<T>) -> Self {
        Self {
            weights: model.weights.iter().map(|w| vec![T::zero(); w.len()]).collect(),
            biases: model.biases.iter().map(|b| vec![T::zero(); b.len()]).collect(),
        }
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub l1_lambda: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 3e-4,
            batch_size: 16,
            epochs: 40,
            l1_lambda: 1e-5,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NeuralError> {
        if self.learning_rate <= 0.0 {
            return Err(NeuralError::Shape(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(NeuralError::Shape("batch_size must be >= 1".into()));
        }
        if self.l1_lambda < 0.0 {
            return Err(NeuralError::Shape(format!(
                "l1_lambda must be >= 0, got {}",
                self.l1_lambda
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_model_maps_everything_to_zero_logits() {
        let model = MlpModel::<f64>::zeros(&[3, 4, 2]).unwrap();
        let logits = model.forward(&[1.0, -2.0, 3.0, 0.5, 0.5, 0.5], 2).unwrap();
        assert_eq!(logits, vec![0.0; 4]);
    }

    #[test]
    fn single_layer_identity_passes_input_through() {
        let mut model = MlpModel::<f64>::zeros(&[2, 2]).unwrap();
        model.weights_mut(0)[0] = 1.0; // W = I
        model.weights_mut(0)[3] = 1.0;
        let logits = model.forward(&[0.25, -0.75], 1).unwrap();
        assert_eq!(logits, vec![0.25, -0.75]);
    }

    #[test]
    fn hand_computed_two_layer_case() {
        // W1 = [[1,-1],[0,2]], b1 = 0, W2 = [[1,1]], input (1,1):
        // hidden = ReLU(1-1, 0+2) = (0, 2); logit = 0 + 2 = 2
        let model = MlpModel::from_parts(
            vec![2, 2, 1],
            vec![vec![1.0, -1.0, 0.0, 2.0], vec![1.0, 1.0]],
            vec![vec![0.0, 0.0], vec![0.0]],
        )
        .unwrap();
        let logits = model.forward(&[1.0, 1.0], 1).unwrap();
        assert_eq!(logits, vec![2.0]);
    }

    #[test]
    fn forward_rejects_dimension_mismatch() {
        let model = MlpModel::<f64>::zeros(&[3, 2]).unwrap();
        assert!(matches!(
            model.forward(&[1.0, 2.0], 1),
            Err(NeuralError::Shape(_))
        ));
    }

    #[test]
    fn init_is_seed_deterministic_and_bounded() {
        let a = MlpModel::<f64>::init(&[10, 20, 4], 42).unwrap();
        let b = MlpModel::<f64>::init(&[10, 20, 4], 42).unwrap();
        assert_eq!(a, b);
        let c = MlpModel::<f64>::init(&[10, 20, 4], 43).unwrap();
        assert_ne!(a, c);
        let bound0 = (6.0f64 / 30.0).sqrt();
        assert!(a.weights(0).iter().all(|w| w.abs() < bound0));
        assert!(a.biases(0).iter().all(|&b| b == 0.0));
    }

    #[test]
    fn from_parts_validates_shapes() {
        assert!(MlpModel::<f64>::from_parts(vec![2, 2], vec![vec![0.0; 3]], vec![vec![0.0; 2]])
            .is_err());
        assert!(MlpModel::<f64>::from_parts(
            vec![2, 2],
            vec![vec![f64::NAN; 4]],
            vec![vec![0.0; 2]]
        )
        .is_err());
    }

    #[test]
    fn batch_gather_slices_rows() {
        let batch = LabeledBatch::new(2, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0], vec![0, 1, 2]).unwrap();
        let sub = batch.gather(&[2, 0]);
        assert_eq!(sub.inputs(), &[4.0, 5.0, 0.0, 1.0]);
        assert_eq!(sub.labels(), &[2, 0]);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        assert!(TrainConfig {
            learning_rate: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(TrainConfig {
            batch_size: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
