//! Reference checks used by the self-test command and the test suites.
//!
//! Everything here is an independent path: the DFT is the O(n^2) direct
//! sum with its own windowing and padding code (deliberately not shared
//! with the FFT-based implementation), and gradients are central finite
//! differences of the public loss function.

use crate::dsp::{stft_power, AudioClip, StftConfig};
use crate::neural::{loss, LabeledBatch, MlpModel};

/// One-sided power spectrum of one windowed frame by the direct O(n^2) DFT.
pub fn dft_power_direct(windowed: &[f64]) -> Vec<f64> {
    let n = windowed.len();
    let bins = n / 2 + 1;
    (0..bins)
        .map(|k| {
            let mut re = 0.0f64;
            let mut im = 0.0f64;
            for (j, &x) in windowed.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * (k * j) as f64 / n as f64;
                re += x * ang.cos();
                im += x * ang.sin();
            }
            re * re + im * im
        })
        .collect()
}

/// Reference framing: reflect-padded, centered frames with a periodic Hann
/// window, written independently of the `dsp` implementation.
pub fn reference_windowed_frames(samples: &[f64], window_len: usize, hop_len: usize) -> Vec<Vec<f64>> {
    let n = samples.len() as isize;
    let pick = |i: isize| -> f64 {
        // bounce until the index lands inside [0, n)
        let mut i = i;
        if n == 1 {
            return samples[0];
        }
        loop {
            if i < 0 {
                i = -i;
            } else if i >= n {
                i = 2 * (n - 1) - i;
            } else {
                return samples[i as usize];
            }
        }
    };
    let hann: Vec<f64> = (0..window_len)
        .map(|j| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * j as f64 / window_len as f64).cos())
        .collect();
    let frames = samples.len() / hop_len + 1;
    let pad = window_len as isize / 2;
    (0..frames)
        .map(|t| {
            (0..window_len)
                .map(|j| pick((t * hop_len) as isize - pad + j as isize) * hann[j])
                .collect()
        })
        .collect()
}

/// Compares the FFT spectrogram against the direct DFT on every frame.
/// Tolerance is relative to each frame's peak power.
pub fn stft_matches_direct_dft(
    clip: &AudioClip<f64>,
    cfg: &StftConfig,
    rel_tol: f64,
) -> Result<(), String> {
    let spec = stft_power(clip, cfg).map_err(|e| e.to_string())?;
    let frames = reference_windowed_frames(clip.samples(), cfg.window_len, cfg.hop_len);
    if frames.len() != spec.frames {
        return Err(format!(
            "frame count mismatch: implementation {}, reference {}",
            spec.frames,
            frames.len()
        ));
    }
    for (t, windowed) in frames.iter().enumerate() {
        let expect = dft_power_direct(windowed);
        let got = spec.frame(t);
        let peak = expect.iter().cloned().fold(f64::MIN_POSITIVE, f64::max);
        for (k, (&e, &g)) in expect.iter().zip(got.iter()).enumerate() {
            if (e - g).abs() > rel_tol * peak {
                return Err(format!(
                    "clip {:?} frame {t} bin {k}: fft {g} vs dft {e} (peak {peak})",
                    clip.id()
                ));
            }
        }
    }
    Ok(())
}

/// Parseval for each frame: the full-spectrum power sum must equal
/// `window_len * sum(windowed^2)`. The one-sided spectrum is unfolded with
/// conjugate-symmetry weights.
pub fn parseval_check(clip: &AudioClip<f64>, cfg: &StftConfig, rel_tol: f64) -> Result<(), String> {
    let spec = stft_power(clip, cfg).map_err(|e| e.to_string())?;
    let frames = reference_windowed_frames(clip.samples(), cfg.window_len, cfg.hop_len);
    for (t, windowed) in frames.iter().enumerate() {
        let time_energy: f64 = windowed.iter().map(|x| x * x).sum();
        let expect = cfg.window_len as f64 * time_energy;
        let row = spec.frame(t);
        let mut freq_energy = row[0] + row[spec.bins - 1];
        for &p in &row[1..spec.bins - 1] {
            freq_energy += 2.0 * p;
        }
        let scale = expect.abs().max(1.0);
        if (freq_energy - expect).abs() > rel_tol * scale {
            return Err(format!(
                "frame {t}: freq-domain {freq_energy} vs time-domain {expect}"
            ));
        }
    }
    Ok(())
}

/// Central-finite-difference gradient check of the loss at step `h`:
/// every analytic partial must match within `max(abs_tol, rel_tol * |fd|)`.
pub fn gradient_check(
    model: &MlpModel<f64>,
    batch: &LabeledBatch<f64>,
    l1_lambda: f64,
    h: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<(), String> {
    let (_, grads) = loss(model, batch, l1_lambda).map_err(|e| e.to_string())?;
    let eval = |m: &MlpModel<f64>| -> f64 {
        let (l, _) = loss(m, batch, l1_lambda).expect("loss on valid batch");
        l
    };
    for layer in 0..model.layer_count() {
        for (kind, count) in [("w", model.weights(layer).len()), ("b", model.biases(layer).len())]
        {
            for i in 0..count {
                let mut plus = model.clone();
                let mut minus = model.clone();
                {
                    let (p, m) = if kind == "w" {
                        (plus.weights_mut(layer), minus.weights_mut(layer))
                    } else {
                        (plus.biases_mut(layer), minus.biases_mut(layer))
                    };
                    p[i] += h;
                    m[i] -= h;
                }
                let fd = (eval(&plus) - eval(&minus)) / (2.0 * h);
                let analytic = if kind == "w" {
                    grads.weights[layer][i]
                } else {
                    grads.biases[layer][i]
                };
                let tol = abs_tol.max(rel_tol * fd.abs());
                if (analytic - fd).abs() > tol {
                    return Err(format!(
                        "layer {layer} {kind}[{i}]: analytic {analytic} vs fd {fd} (tol {tol})"
                    ));
                }
            }
        }
    }
    Ok(())
}

/// A random model for gradient checks. Unlike [`MlpModel::init`], biases
/// are nonzero: with zero biases a fully dead input row puts a hidden
/// pre-activation exactly on the ReLU kink, where the analytic subgradient
/// (zero) legitimately disagrees with a straddling central difference.
/// Random biases keep the check point generic.
pub fn random_model_for_check(dims: &[usize], seed: u64) -> MlpModel<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for l in 0..dims.len() - 1 {
        let bound = (6.0 / (dims[l] + dims[l + 1]) as f64).sqrt();
        weights.push(
            (0..dims[l] * dims[l + 1])
                .map(|_| rng.gen_range(-bound..bound))
                .collect(),
        );
        biases.push((0..dims[l + 1]).map(|_| rng.gen_range(0.05..0.15)).collect());
    }
    MlpModel::from_parts(dims.to_vec(), weights, biases).expect("consistent dims")
}

/// Deterministic pseudo-random clip for oracle sweeps (splitmix64 core so
/// the test inputs are independent of any RNG crate).
pub fn pseudo_random_clip(seed: u64, len: usize, sample_rate_hz: u32) -> AudioClip<f64> {
    let mut state = seed;
    let mut next = move || {
        state = state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    };
    let samples: Vec<f64> = (0..len)
        .map(|_| (next() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0)
        .collect();
    AudioClip::new(format!("rand-{seed}"), samples, sample_rate_hz).expect("valid random clip")
}
