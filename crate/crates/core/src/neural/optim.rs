//! Adam optimizer state and update rule.

use super::{Gradients, MlpModel};
use crate::real::Real;

/// Per-parameter first/second moment estimates and the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T: Real> {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    m_weights: Vec<Vec<T>>,
    v_weights: Vec<Vec<T>>,
    m_biases: Vec<Vec<T>>,
    v_biases: Vec<Vec<T>>,
}

impl<T: Real> AdamState<T> {
    pub fn new(model: &MlpModel<T>, beta1: f64, beta2: f64, eps: f64) -> Self {
        let zeros = Gradients::zeros_like(model);
        Self {
            beta1,
            beta2,
            eps,
            t: 0,
            m_weights: zeros.weights.clone(),
            v_weights: zeros.weights,
            m_biases: zeros.biases.clone(),
            v_biases: zeros.biases,
        }
    }
}

/// Bias-corrected step scalars for one [`adam_step`] call.
#[derive(Clone, Copy)]
struct StepScalars<T> {
    beta1: T,
    beta2: T,
    corr1: T,
    corr2: T,
    lr: T,
    eps: T,
}

fn update_slice<T: Real>(params: &mut [T], grads: &[T], m: &mut [T], v: &mut [T], s: StepScalars<T>) {
    let one = T::one();
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = s.beta1 * m[i] + (one - s.beta1) * g;
        v[i] = s.beta2 * v[i] + (one - s.beta2) * g * g;
        let m_hat = m[i] / s.corr1;
        let v_hat = v[i] / s.corr2;
        params[i] -= s.lr * m_hat / (v_hat.sqrt() + s.eps);
    }
}

/// One Adam step:
/// `m <- b1*m + (1-b1)*g`, `v <- b2*v + (1-b2)*g^2`,
/// `w <- w - lr * m_hat / (sqrt(v_hat) + eps)` with bias-corrected
/// `m_hat = m / (1 - b1^t)`, `v_hat = v / (1 - b2^t)`.
/// The step counter increments once per call.
pub fn adam_step<T: Real>(
    model: &mut MlpModel<T>,
    grads: &Gradients<T>,
    state: &mut AdamState<T>,
    lr: f64,
) {
    state.t += 1;
    let t = state.t as i32;
    let beta1 = T::from_f64c(state.beta1);
    let beta2 = T::from_f64c(state.beta2);
    let scalars = StepScalars {
        beta1,
        beta2,
        corr1: T::one() - beta1.powi(t),
        corr2: T::one() - beta2.powi(t),
        lr: T::from_f64c(lr),
        eps: T::from_f64c(state.eps),
    };
    for l in 0..model.layer_count() {
        update_slice(
            model.weights_mut(l),
            &grads.weights[l],
            &mut state.m_weights[l],
            &mut state.v_weights[l],
            scalars,
        );
        update_slice(
            model.biases_mut(l),
            &grads.biases[l],
            &mut state.m_biases[l],
            &mut state.v_biases[l],
            scalars,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_model(w: f64) -> MlpModel<f64> {
        let mut m = MlpModel::<f64>::zeros(&[1, 1]).unwrap();
        m.weights_mut(0)[0] = w;
        m
    }

    fn unit_grads(model: &MlpModel<f64>, g: f64) -> Gradients<f64> {
        let mut grads = Gradients::zeros_like(model);
        grads.weights[0][0] = g;
        grads
    }

    #[test]
    fn first_step_matches_hand_formula() {
        let mut model = scalar_model(0.0);
        let mut state = AdamState::new(&model, 0.9, 0.999, 1e-8);
        let grads = unit_grads(&model, 1.0);
        adam_step(&mut model, &grads, &mut state, 0.1);
        // m_hat = v_hat = 1 after bias correction; dw = -0.1 / (1 + 1e-8)
        let expect = -0.1 / (1.0 + 1e-8);
        assert!((model.weights(0)[0] - expect).abs() < 1e-15);
        assert!((model.weights(0)[0] - (-0.09999999900000002)).abs() < 1e-12);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn zero_gradient_with_zero_state_changes_nothing() {
        let mut model = scalar_model(0.7);
        let mut state = AdamState::new(&model, 0.9, 0.999, 1e-8);
        let grads = Gradients::zeros_like(&model);
        adam_step(&mut model, &grads, &mut state, 0.5);
        assert_eq!(model.weights(0)[0], 0.7);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn two_constant_gradient_steps_match_hand_trajectory() {
        let mut model = scalar_model(0.0);
        let mut state = AdamState::new(&model, 0.9, 0.999, 1e-8);
        let grads = unit_grads(&model, 1.0);
        adam_step(&mut model, &grads, &mut state, 0.1);
        adam_step(&mut model, &grads, &mut state, 0.1);

        // hand computation with the same formulas
        let (b1, b2, eps, lr) = (0.9f64, 0.999f64, 1e-8f64, 0.1f64);
        let (mut w, mut m, mut v) = (0.0f64, 0.0f64, 0.0f64);
        for t in 1..=2 {
            m = b1 * m + (1.0 - b1) * 1.0;
            v = b2 * v + (1.0 - b2) * 1.0;
            let m_hat = m / (1.0 - b1.powi(t));
            let v_hat = v / (1.0 - b2.powi(t));
            w -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        assert!((model.weights(0)[0] - w).abs() < 1e-12);
    }
}
