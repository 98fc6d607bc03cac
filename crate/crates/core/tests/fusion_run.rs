//! End-to-end fusion runs on constructed embedding data.

use maivar_core::embed::{EmbeddingFile, Modality, AUDIO_EMBED_DIM, VIDEO_FEATURE_DIM, VIDEO_SEGMENTS};
use maivar_core::fusion::{
    run_maivar, ClipRef, FusionError, ModalityData, ReductionMode, RunMaivarConfig, Split,
};
use maivar_core::neural::TrainConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Builds a dataset where the audio embedding fully determines the label
/// (class-dependent offset pattern plus noise) and video is pure noise.
fn audio_determined_dataset(
    n_classes: usize,
    clips_per_class: usize,
    seed: u64,
) -> (Vec<ClipRef>, EmbeddingFile, EmbeddingFile) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clips = Vec::new();
    let mut audio = EmbeddingFile::new(Modality::Audio);
    let mut video = EmbeddingFile::new(Modality::Video);
    for c in 0..n_classes {
        for i in 0..clips_per_class {
            let id = format!("c{c}-{i}");
            let split = if i % 5 == 4 { Split::Test } else { Split::Train };
            clips.push(ClipRef {
                clip_id: id.clone(),
                label: c,
                split,
            });
            let a: Vec<f32> = (0..AUDIO_EMBED_DIM)
                .map(|j| {
                    let signal = if j % n_classes == c { 2.0 } else { 0.0 };
                    signal + rng.gen_range(-0.2..0.2)
                })
                .collect();
            audio.push(id.clone(), a).unwrap();
            let v: Vec<f32> = (0..VIDEO_SEGMENTS * VIDEO_FEATURE_DIM)
                .map(|_| rng.gen_range(-0.5..0.5))
                .collect();
            video.push(id, v).unwrap();
        }
    }
    (clips, audio, video)
}

fn quick_cfg(epochs: usize) -> RunMaivarConfig {
    RunMaivarConfig {
        audio: TrainConfig {
            epochs,
            seed: 11,
            ..Default::default()
        },
        video: TrainConfig {
            epochs,
            seed: 12,
            ..Default::default()
        },
        fusion: TrainConfig {
            learning_rate: 1e-4,
            batch_size: 128,
            epochs,
            seed: 13,
            ..Default::default()
        },
        hidden_dims: vec![64],
        reduction: ReductionMode::MeanSegments,
    }
}

#[test]
fn fusion_preserves_audio_signal() {
    let (clips, audio, video) = audio_determined_dataset(4, 20, 99);
    let data =
        ModalityData::<f64>::assemble(&clips, &audio, &video, 4, ReductionMode::MeanSegments)
            .unwrap();
    let (report, _) = run_maivar(&data, &quick_cfg(25), "chromagram").unwrap();
    assert!(report.transfer_identity_ok);
    // labels are fully determined by audio; transfer must not destroy it
    assert!(
        report.fusion_test_accuracy >= report.audio_test_accuracy - 0.02,
        "fusion {} vs audio {}",
        report.fusion_test_accuracy,
        report.audio_test_accuracy
    );
    assert!(report.audio_test_accuracy > 0.9);
}

#[test]
fn zero_epoch_run_reports_untrained_models_with_identity() {
    let (clips, audio, video) = audio_determined_dataset(3, 10, 5);
    let data =
        ModalityData::<f64>::assemble(&clips, &audio, &video, 3, ReductionMode::MeanSegments)
            .unwrap();
    let (report, _) = run_maivar(&data, &quick_cfg(0), "waveplot").unwrap();
    assert!(report.audio_curve.is_empty());
    assert!(report.transfer_identity_ok);
    assert!(report.fusion_test_accuracy >= 0.0 && report.fusion_test_accuracy <= 1.0);
}

#[test]
fn rerun_is_bit_identical() {
    let (clips, audio, video) = audio_determined_dataset(3, 8, 42);
    let data =
        ModalityData::<f64>::assemble(&clips, &audio, &video, 3, ReductionMode::MeanSegments)
            .unwrap();
    let (r1, m1) = run_maivar(&data, &quick_cfg(4), "mfcc").unwrap();
    let (r2, m2) = run_maivar(&data, &quick_cfg(4), "mfcc").unwrap();
    assert_eq!(r1, r2);
    assert_eq!(m1.fusion, m2.fusion);
    assert_eq!(
        serde_json::to_string(&r1).unwrap(),
        serde_json::to_string(&r2).unwrap()
    );
}

#[test]
fn missing_modality_is_detected() {
    let (mut clips, audio, video) = audio_determined_dataset(3, 4, 1);
    clips.push(ClipRef {
        clip_id: "orphan".into(),
        label: 0,
        split: Split::Train,
    });
    let err = ModalityData::<f64>::assemble(&clips, &audio, &video, 3, ReductionMode::MeanSegments)
        .unwrap_err();
    match err {
        FusionError::MissingModality(id) => assert_eq!(id, "orphan"),
        other => panic!("expected MissingModality, got {other}"),
    }
}

#[test]
fn flatten_reduction_round_trips_through_run() {
    let (clips, audio, video) = audio_determined_dataset(2, 6, 77);
    let data = ModalityData::<f64>::assemble(&clips, &audio, &video, 2, ReductionMode::Flatten)
        .unwrap();
    let mut cfg = quick_cfg(2);
    cfg.reduction = ReductionMode::Flatten;
    let (report, models) = run_maivar(&data, &cfg, "rolloff").unwrap();
    assert!(report.transfer_identity_ok);
    assert_eq!(models.fusion.d_in(), AUDIO_EMBED_DIM + 25_600);
}
