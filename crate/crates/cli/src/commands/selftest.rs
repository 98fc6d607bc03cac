//! `selftest`: fast end-to-end verification of the numeric core.
//!
//! Runs the DFT oracle sweep, Parseval, gradient checks, the Adam
//! trajectory, the transfer identity and determinism checks, printing one
//! line per check. `inject_fault` deliberately corrupts the Adam expected
//! value so the failure path itself stays tested.

use std::time::Instant;

use maivar_core::check::{
    gradient_check, parseval_check, pseudo_random_clip, random_model_for_check,
    stft_matches_direct_dft,
};
use maivar_core::dsp::{compute_track, stft_power, StftConfig, TrackKind, TrackParams};
use maivar_core::fusion::{transfer_identity_holds, transfer_init};
use maivar_core::img::{render, Colormap};
use maivar_core::neural::{adam_step, train, AdamState, Gradients, LabeledBatch, MlpModel, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult};

fn check_stft_oracle() -> Result<(), String> {
    let cfg = StftConfig {
        window_len: 1024,
        hop_len: 256,
        ..Default::default()
    };
    for seed in 0..6u64 {
        let clip = pseudo_random_clip(seed, 1500 + seed as usize * 400, 22_050);
        stft_matches_direct_dft(&clip, &cfg, 1e-9)?;
    }
    let sine: Vec<f64> = (0..11_025)
        .map(|i| 0.9 * (2.0 * std::f64::consts::PI * 440.0 * i as f64 / 22_050.0).sin())
        .collect();
    let clip = maivar_core::dsp::AudioClip::new("sine", sine, 22_050).map_err(|e| e.to_string())?;
    stft_matches_direct_dft(&clip, &StftConfig::default(), 1e-9)
}

fn check_parseval() -> Result<(), String> {
    for seed in [7u64, 21] {
        parseval_check(
            &pseudo_random_clip(seed, 3000, 22_050),
            &StftConfig::default(),
            1e-9,
        )?;
    }
    Ok(())
}

fn check_gradients() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..3u64 {
        let model = random_model_for_check(&[5, 6, 4, 3], i);
        let inputs: Vec<f64> = (0..25).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let labels: Vec<usize> = (0..5).map(|_| rng.gen_range(0..3)).collect();
        let batch = LabeledBatch::new(5, inputs, labels).map_err(|e| e.to_string())?;
        gradient_check(&model, &batch, 1e-3, 1e-5, 1e-6, 1e-4)?;
    }
    Ok(())
}

fn check_adam(inject_fault: bool) -> Result<(), String> {
    let mut model = MlpModel::<f64>::zeros(&[1, 1]).map_err(|e| e.to_string())?;
    let mut state = AdamState::new(&model, 0.9, 0.999, 1e-8);
    let mut grads = Gradients::zeros_like(&model);
    grads.weights[0][0] = 1.0;
    adam_step(&mut model, &grads, &mut state, 0.1);
    adam_step(&mut model, &grads, &mut state, 0.1);

    let (b1, b2, eps, lr) = (0.9f64, 0.999f64, 1e-8f64, 0.1f64);
    let (mut w, mut m, mut v) = (0.0f64, 0.0, 0.0);
    for t in 1..=2 {
        m = b1 * m + (1.0 - b1);
        v = b2 * v + (1.0 - b2);
        let m_hat = m / (1.0 - b1.powi(t));
        let v_hat = v / (1.0 - b2.powi(t));
        w -= lr * m_hat / (v_hat.sqrt() + eps);
    }
    if inject_fault {
        w += 1e-6; // deliberate corruption to exercise failure reporting
    }
    let got = model.weights(0)[0];
    if (got - w).abs() > 1e-12 {
        return Err(format!("two-step trajectory: engine {got}, hand {w}"));
    }
    Ok(())
}

fn check_transfer_identity() -> Result<(), String> {
    let video = MlpModel::<f64>::init(&[1024, 512, 51], 17).map_err(|e| e.to_string())?;
    let (fusion, report) =
        transfer_init(&video, &[2560, 512, 51], 18).map_err(|e| e.to_string())?;
    if report.copied_params + report.fresh_params != fusion.param_count() {
        return Err("transfer report does not account for every parameter".into());
    }
    match transfer_identity_holds(&fusion, &video, 20, 4242) {
        Ok(true) => Ok(()),
        Ok(false) => Err("fusion forward differs from video forward on zero-audio input".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn check_determinism() -> Result<(), String> {
    // stft
    let clip = pseudo_random_clip(3, 2500, 22_050);
    let cfg = StftConfig::default();
    let s1 = stft_power(&clip, &cfg).map_err(|e| e.to_string())?;
    let s2 = stft_power(&clip, &cfg).map_err(|e| e.to_string())?;
    if s1 != s2 {
        return Err("stft_power is not deterministic".into());
    }
    // render
    let track = compute_track(&clip, TrackKind::Chromagram, &TrackParams::default())
        .map_err(|e| e.to_string())?;
    let i1 = render(&track, &Colormap::viridis(), "d").map_err(|e| e.to_string())?;
    let i2 = render(&track, &Colormap::viridis(), "d").map_err(|e| e.to_string())?;
    if i1.pixels() != i2.pixels() {
        return Err("render is not deterministic".into());
    }
    // training
    let inputs: Vec<f64> = (0..120).map(|i| ((i * 31 % 17) as f64 - 8.0) / 8.0).collect();
    let labels: Vec<usize> = (0..40).map(|i| i % 2).collect();
    let data = LabeledBatch::new(3, inputs, labels).map_err(|e| e.to_string())?;
    let cfg = TrainConfig {
        epochs: 3,
        batch_size: 8,
        seed: 5,
        ..Default::default()
    };
    let mut m1 = MlpModel::<f64>::init(&[3, 6, 2], 1).map_err(|e| e.to_string())?;
    let mut m2 = m1.clone();
    train(&mut m1, &data, &cfg).map_err(|e| e.to_string())?;
    train(&mut m2, &data, &cfg).map_err(|e| e.to_string())?;
    if m1 != m2 {
        return Err("training is not deterministic".into());
    }
    Ok(())
}

fn check_shape_contracts() -> Result<(), String> {
    use maivar_core::embed::{AudioEmbedding, VideoEmbedding};
    if AudioEmbedding::new("x", vec![0.0; 1535]).is_ok() {
        return Err("1535-dim audio embedding accepted".into());
    }
    if VideoEmbedding::new("x", vec![0.0; 24 * 1024]).is_ok() {
        return Err("24x1024 video embedding accepted".into());
    }
    if AudioEmbedding::new("x", vec![0.0; 1536]).is_err() {
        return Err("valid audio embedding rejected".into());
    }
    Ok(())
}

type Check = Box<dyn Fn() -> Result<(), String>>;

pub fn run(inject_fault: bool) -> CliResult<()> {
    let checks: Vec<(&str, Check)> = vec![
        ("stft-dft-oracle", Box::new(check_stft_oracle)),
        ("parseval", Box::new(check_parseval)),
        ("gradient-check", Box::new(check_gradients)),
        ("adam-trajectory", Box::new(move || check_adam(inject_fault))),
        ("transfer-identity", Box::new(check_transfer_identity)),
        ("determinism", Box::new(check_determinism)),
        ("shape-contracts", Box::new(check_shape_contracts)),
    ];
    let mut failures = 0usize;
    let total = checks.len();
    for (name, check) in checks {
        let start = Instant::now();
        match check() {
            Ok(()) => println!("[selftest] {name}: ok ({:.2}s)", start.elapsed().as_secs_f64()),
            Err(msg) => {
                failures += 1;
                println!("[selftest] {name}: FAILED: {msg}");
            }
        }
    }
    if failures > 0 {
        Err(CliError::runtime(format!(
            "{failures} of {total} selftest checks failed"
        )))
    } else {
        println!("[selftest] all {total} checks passed");
        Ok(())
    }
}
