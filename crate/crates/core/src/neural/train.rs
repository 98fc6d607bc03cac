//! Loss, backprop, the training loop and evaluation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::optim::{adam_step, AdamState};
use super::{Gradients, LabeledBatch, MlpModel, NeuralError, TrainConfig};
use crate::real::Real;

/// Per-epoch training metrics.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

/// Row-wise stable softmax (max-subtracted). Rows sum to one.
fn softmax_rows<T: Real>(logits: &[T], rows: usize, cols: usize) -> Vec<T> {
    let mut probs = vec![T::zero(); rows * cols];
    for r in 0..rows {
        let row = &logits[r * cols..(r + 1) * cols];
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let mut denom = T::zero();
        let out = &mut probs[r * cols..(r + 1) * cols];
        for (o, &z) in out.iter_mut().zip(row.iter()) {
            let e = (z - max).exp();
            *o = e;
            denom += e;
        }
        for o in out.iter_mut() {
            *o /= denom;
        }
    }
    probs
}

/// Mean softmax cross-entropy over the batch plus `l1_lambda * sum|W|`
/// (weights only, biases excluded), with reverse-mode gradients.
///
/// The L1 subgradient at exactly zero is zero.
pub fn loss<T: Real>(
    model: &MlpModel<T>,
    batch: &LabeledBatch<T>,
    l1_lambda: f64,
) -> Result<(T, Gradients<T>), NeuralError> {
    if batch.is_empty() {
        return Err(NeuralError::EmptyBatch);
    }
    if batch.d_in != model.d_in() {
        return Err(NeuralError::Shape(format!(
            "batch dim {} != model input dim {}",
            batch.d_in,
            model.d_in()
        )));
    }
    let n_classes = model.n_classes();
    if let Some(&bad) = batch.labels().iter().find(|&&l| l >= n_classes) {
        return Err(NeuralError::Shape(format!(
            "label {bad} out of range for {n_classes} classes"
        )));
    }
    let rows = batch.len();
    let layers = model.layer_count();
    let lambda = T::from_f64c(l1_lambda);

    let acts = model.forward_cached(batch.inputs(), rows);
    let logits = &acts[layers];
    let probs = softmax_rows(logits, rows, n_classes);

    let nf = T::from_f64c(rows as f64);
    let mut data_loss = T::zero();
    for (r, &label) in batch.labels().iter().enumerate() {
        data_loss += -(probs[r * n_classes + label].ln());
    }
    data_loss /= nf;

    // dL/dlogits = (softmax - onehot) / n
    let mut delta = probs;
    for (r, &label) in batch.labels().iter().enumerate() {
        delta[r * n_classes + label] -= T::one();
    }
    for d in delta.iter_mut() {
        *d /= nf;
    }

    let mut grads = Gradients::zeros_like(model);
    let mut l1_term = T::zero();
    for l in (0..layers).rev() {
        let (d_in, d_out) = (model.dims()[l], model.dims()[l + 1]);
        let below = &acts[l];
        {
            let gw = &mut grads.weights[l];
            let gb = &mut grads.biases[l];
            for r in 0..rows {
                let drow = &delta[r * d_out..(r + 1) * d_out];
                let arow = &below[r * d_in..(r + 1) * d_in];
                for (o, &d) in drow.iter().enumerate() {
                    gb[o] += d;
                    let grow = &mut gw[o * d_in..(o + 1) * d_in];
                    for (g, &a) in grow.iter_mut().zip(arow.iter()) {
                        *g += d * a;
                    }
                }
            }
        }
        // L1 value and subgradient on weights
        if l1_lambda != 0.0 {
            let w = model.weights(l);
            let gw = &mut grads.weights[l];
            for (g, &wi) in gw.iter_mut().zip(w.iter()) {
                l1_term += wi.abs();
                if wi > T::zero() {
                    *g += lambda;
                } else if wi < T::zero() {
                    *g -= lambda;
                }
            }
        }
        if l > 0 {
            // delta_prev = (delta . W) masked by ReLU activity
            let w = model.weights(l);
            let mut prev = vec![T::zero(); rows * d_in];
            for r in 0..rows {
                let drow = &delta[r * d_out..(r + 1) * d_out];
                let prow = &mut prev[r * d_in..(r + 1) * d_in];
                for (o, &d) in drow.iter().enumerate() {
                    let wrow = &w[o * d_in..(o + 1) * d_in];
                    for (p, &wi) in prow.iter_mut().zip(wrow.iter()) {
                        *p += d * wi;
                    }
                }
                let arow = &below[r * d_in..(r + 1) * d_in];
                for (p, &a) in prow.iter_mut().zip(arow.iter()) {
                    if a <= T::zero() {
                        *p = T::zero();
                    }
                }
            }
            delta = prev;
        }
    }
    // when l1_lambda is zero we skipped the |w| accumulation entirely
    let total = data_loss + lambda * l1_term;
    Ok((total, grads))
}

/// Minibatch training with Adam. Returns per-epoch metrics: the
/// sample-weighted mean of minibatch losses and the accuracy over the full
/// dataset after the epoch. Fully deterministic given the config seed.
pub fn train<T: Real>(
    model: &mut MlpModel<T>,
    dataset: &LabeledBatch<T>,
    cfg: &TrainConfig,
) -> Result<Vec<EpochMetrics>, NeuralError> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(NeuralError::EmptyDataset);
    }
    if dataset.d_in != model.d_in() {
        return Err(NeuralError::Shape(format!(
            "dataset dim {} != model input dim {}",
            dataset.d_in,
            model.d_in()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = AdamState::new(model, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
    let mut metrics = Vec::with_capacity(cfg.epochs);
    let n = dataset.len();
    let mut order: Vec<usize> = (0..n).collect();
    for epoch in 0..cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut rng);
        }
        let mut loss_sum = 0.0f64;
        for chunk in order.chunks(cfg.batch_size) {
            let minibatch = dataset.gather(chunk);
            let (batch_loss, grads) = loss(model, &minibatch, cfg.l1_lambda)?;
            adam_step(model, &grads, &mut state, cfg.learning_rate);
            loss_sum += batch_loss.to_f64c() * chunk.len() as f64;
        }
        metrics.push(EpochMetrics {
            epoch,
            loss: loss_sum / n as f64,
            accuracy: evaluate(model, dataset)?,
        });
    }
    Ok(metrics)
}

/// Fraction of samples whose argmax logit equals the label. Ties break to
/// the lowest class index.
pub fn evaluate<T: Real>(
    model: &MlpModel<T>,
    dataset: &LabeledBatch<T>,
) -> Result<f64, NeuralError> {
    if dataset.is_empty() {
        return Err(NeuralError::EmptyDataset);
    }
    let n_classes = model.n_classes();
    let logits = model.forward(dataset.inputs(), dataset.len())?;
    let mut correct = 0usize;
    for (r, &label) in dataset.labels().iter().enumerate() {
        let row = &logits[r * n_classes..(r + 1) * n_classes];
        let mut best = 0usize;
        for (k, &z) in row.iter().enumerate().skip(1) {
            if z > row[best] {
                best = k;
            }
        }
        if best == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / dataset.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_logits_loss_is_ln_k() {
        let model = MlpModel::<f64>::zeros(&[3, 4]).unwrap();
        let batch = LabeledBatch::new(3, vec![0.5; 9], vec![0, 1, 3]).unwrap();
        let (l, _) = loss(&model, &batch, 0.0).unwrap();
        assert!((l - 4.0f64.ln()).abs() < 1e-12);
        assert!((l - 1.3862943611198906).abs() < 1e-12);
    }

    #[test]
    fn l1_term_adds_lambda_times_weight_mass() {
        // 10 weights of magnitude 1 with lambda 0.1 adds exactly 1.0
        let mut model = MlpModel::<f64>::zeros(&[5, 2]).unwrap();
        for (i, w) in model.weights_mut(0).iter_mut().enumerate() {
            *w = if i % 2 == 0 { 1.0 } else { -1.0 };
        }
        let batch = LabeledBatch::new(5, vec![0.0; 5], vec![0]).unwrap();
        let (with_l1, _) = loss(&model, &batch, 0.1).unwrap();
        let (without, _) = loss(&model, &batch, 0.0).unwrap();
        assert!((with_l1 - without - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_batch_is_rejected() {
        let model = MlpModel::<f64>::zeros(&[2, 2]).unwrap();
        let batch = LabeledBatch::new(2, vec![], vec![]).unwrap();
        assert!(matches!(
            loss(&model, &batch, 0.0),
            Err(NeuralError::EmptyBatch)
        ));
    }

    #[test]
    fn out_of_range_label_is_shape_error() {
        let model = MlpModel::<f64>::zeros(&[2, 2]).unwrap();
        let batch = LabeledBatch::new(2, vec![0.0, 0.0], vec![5]).unwrap();
        assert!(matches!(loss(&model, &batch, 0.0), Err(NeuralError::Shape(_))));
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let logits = vec![3.0f64, -1.0, 0.5, 700.0, 690.0, -700.0];
        let probs = softmax_rows(&logits, 2, 3);
        for r in 0..2 {
            let s: f64 = probs[r * 3..(r + 1) * 3].iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "row {r} sums to {s}");
            assert!(probs[r * 3..(r + 1) * 3].iter().all(|p| p.is_finite()));
        }
    }

    #[test]
    fn evaluate_tie_breaks_to_lowest_index() {
        // all-zero model: every logit ties, argmax = class 0
        let model = MlpModel::<f64>::zeros(&[2, 3]).unwrap();
        let batch = LabeledBatch::new(2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], vec![0, 1, 2]).unwrap();
        let acc = evaluate(&model, &batch).unwrap();
        assert!((acc - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn evaluate_perfect_and_two_thirds_cases() {
        // identity logits on 3 classes
        let mut model = MlpModel::<f64>::zeros(&[3, 3]).unwrap();
        for k in 0..3 {
            model.weights_mut(0)[k * 3 + k] = 1.0;
        }
        let one_hot = |k: usize| {
            let mut v = vec![0.0; 3];
            v[k] = 1.0;
            v
        };
        let inputs: Vec<f64> = [one_hot(0), one_hot(1), one_hot(2)].concat();
        let perfect = LabeledBatch::new(3, inputs.clone(), vec![0, 1, 2]).unwrap();
        assert_eq!(evaluate(&model, &perfect).unwrap(), 1.0);
        let off = LabeledBatch::new(3, inputs, vec![0, 1, 0]).unwrap();
        assert!((evaluate(&model, &off).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn evaluate_rejects_empty_dataset() {
        let model = MlpModel::<f64>::zeros(&[2, 2]).unwrap();
        let empty = LabeledBatch::new(2, vec![], vec![]).unwrap();
        assert!(matches!(
            evaluate(&model, &empty),
            Err(NeuralError::EmptyDataset)
        ));
    }

    #[test]
    fn argmax_invariant_under_logit_shift() {
        let mut model = MlpModel::<f64>::init(&[4, 8, 3], 9).unwrap();
        let inputs: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).sin()).collect();
        let batch = LabeledBatch::new(4, inputs, vec![0, 1, 2, 0, 1, 2, 0, 1, 2, 0]).unwrap();
        let before = evaluate(&model, &batch).unwrap();
        // shifting every output bias by a constant shifts all logits equally
        for b in model.biases_mut(model.layer_count() - 1).iter_mut() {
            *b += 13.5;
        }
        assert_eq!(evaluate(&model, &batch).unwrap(), before);
    }

    #[test]
    fn zero_epochs_leaves_model_unchanged() {
        let mut model = MlpModel::<f64>::init(&[3, 4, 2], 1).unwrap();
        let snapshot = model.clone();
        let data = LabeledBatch::new(3, vec![0.1; 9], vec![0, 1, 0]).unwrap();
        let cfg = TrainConfig {
            epochs: 0,
            ..Default::default()
        };
        let metrics = train(&mut model, &data, &cfg).unwrap();
        assert!(metrics.is_empty());
        assert_eq!(model, snapshot);
    }

    #[test]
    fn single_batch_step_decreases_loss_for_small_lr() {
        let mut model = MlpModel::<f64>::init(&[4, 6, 3], 5).unwrap();
        let inputs: Vec<f64> = (0..20).map(|i| ((i * 7 % 11) as f64 - 5.0) / 5.0).collect();
        let data = LabeledBatch::new(4, inputs, vec![0, 2, 1, 0, 2]).unwrap();
        let (before, _) = loss(&model, &data, 0.0).unwrap();
        let cfg = TrainConfig {
            learning_rate: 1e-5,
            batch_size: 5,
            epochs: 1,
            l1_lambda: 0.0,
            shuffle: false,
            seed: 0,
            ..Default::default()
        };
        train(&mut model, &data, &cfg).unwrap();
        let (after, _) = loss(&model, &data, 0.0).unwrap();
        assert!(after < before, "{after} !< {before}");
    }

    #[test]
    fn training_is_bit_deterministic() {
        let data_inputs: Vec<f64> = (0..400).map(|i| ((i * 13 % 97) as f64 - 48.0) / 48.0).collect();
        let labels: Vec<usize> = (0..100).map(|i| i % 4).collect();
        let data = LabeledBatch::new(4, data_inputs, labels).unwrap();
        let cfg = TrainConfig {
            epochs: 5,
            batch_size: 16,
            seed: 77,
            ..Default::default()
        };
        let mut m1 = MlpModel::<f64>::init(&[4, 8, 4], 3).unwrap();
        let mut m2 = MlpModel::<f64>::init(&[4, 8, 4], 3).unwrap();
        let r1 = train(&mut m1, &data, &cfg).unwrap();
        let r2 = train(&mut m2, &data, &cfg).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(r1, r2);
    }

    #[test]
    fn separable_blobs_reach_full_train_accuracy() {
        // two 2-d blobs with margin 2 around (-2,-2) and (2,2)
        let mut inputs = Vec::new();
        let mut labels = Vec::new();
        for i in 0..200 {
            let jx = ((i * 37 % 100) as f64 / 100.0 - 0.5) * 0.8;
            let jy = ((i * 53 % 100) as f64 / 100.0 - 0.5) * 0.8;
            let (cx, cy, label) = if i % 2 == 0 { (-2.0, -2.0, 0) } else { (2.0, 2.0, 1) };
            inputs.push(cx + jx);
            inputs.push(cy + jy);
            labels.push(label);
        }
        let data = LabeledBatch::new(2, inputs, labels).unwrap();
        let mut model = MlpModel::<f64>::init(&[2, 8, 2], 11).unwrap();
        let cfg = TrainConfig {
            learning_rate: 3e-4,
            batch_size: 16,
            epochs: 200,
            l1_lambda: 0.0,
            seed: 1,
            shuffle: true,
            ..Default::default()
        };
        train(&mut model, &data, &cfg).unwrap();
        assert_eq!(evaluate(&model, &data).unwrap(), 1.0);
    }
}
