//! Late fusion: video reduction, audio-first concatenation, weight transfer
//! from the trained video model, and the three-phase training run.
//!
//! The transfer rule preserves the trained video function exactly: layers
//! whose shapes match are copied whole; the first layer of the fusion model
//! copies the video model's weights into the video-slice columns and draws
//! fresh seeded values for the audio-slice columns. Because a fused input
//! with a zero audio slice contributes exactly `+0.0` through every fresh
//! column before the video columns accumulate, the fusion model's forward
//! pass bit-equals the video model's on such inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::embed::{
    AudioEmbedding, EmbedError, EmbeddingFile, VideoEmbedding, AUDIO_EMBED_DIM, VIDEO_FEATURE_DIM,
    VIDEO_SEGMENTS,
};
use crate::neural::{
    evaluate, train, EpochMetrics, LabeledBatch, MlpModel, NeuralError, TrainConfig,
};
use crate::real::Real;

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("clip {0:?} is missing one modality")]
    MissingModality(String),
    #[error("incompatible architecture: {0}")]
    IncompatibleArchitecture(String),
    #[error("fusion data error: {0}")]
    Invalid(String),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

/// How the 25x1024 video embedding enters the fusion vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionMode {
    /// Mean over the 25 segment rows (default): 1024 dims.
    MeanSegments,
    /// Row-major concatenation of all segments: 25600 dims.
    Flatten,
}

impl ReductionMode {
    pub fn reduced_dim(self) -> usize {
        match self {
            ReductionMode::MeanSegments => VIDEO_FEATURE_DIM,
            ReductionMode::Flatten => VIDEO_SEGMENTS * VIDEO_FEATURE_DIM,
        }
    }
}

/// Reduces a video embedding to the fusion-input video slice.
pub fn reduce_video<T: Real>(emb: &VideoEmbedding, mode: ReductionMode) -> Vec<T> {
    match mode {
        ReductionMode::MeanSegments => {
            let norm = T::from_f64c(1.0 / VIDEO_SEGMENTS as f64);
            (0..VIDEO_FEATURE_DIM)
                .map(|j| {
                    let mut acc = T::zero();
                    for s in 0..VIDEO_SEGMENTS {
                        acc += T::from_f64c(emb.segment(s)[j] as f64);
                    }
                    acc * norm
                })
                .collect()
        }
        ReductionMode::Flatten => emb
            .values()
            .iter()
            .map(|&v| T::from_f64c(v as f64))
            .collect(),
    }
}

/// One fused training example: audio slice first, then the reduced video
/// slice, in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionInput<T: Real> {
    pub clip_id: String,
    pub vector: Vec<T>,
    pub label: usize,
}

/// Concatenates audio-then-video into a fused vector.
pub fn fuse<T: Real>(
    audio: &AudioEmbedding,
    video_reduced: &[T],
    label: usize,
) -> FusionInput<T> {
    let mut vector = Vec::with_capacity(AUDIO_EMBED_DIM + video_reduced.len());
    vector.extend(audio.values().iter().map(|&v| T::from_f64c(v as f64)));
    vector.extend_from_slice(video_reduced);
    FusionInput {
        clip_id: audio.clip_id.clone(),
        vector,
        label,
    }
}

/// What happened to one fusion-model layer during transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferAction {
    CopiedFull,
    CopiedSlice,
    FreshInit,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LayerTransfer {
    pub layer: usize,
    pub action: TransferAction,
    pub copied_params: usize,
    pub fresh_params: usize,
}

/// Accounting of every fusion-model parameter: copied from the video model
/// or freshly initialized.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TransferReport {
    pub layers: Vec<LayerTransfer>,
    pub copied_params: usize,
    pub fresh_params: usize,
}

/// Initializes a fusion model from a trained video model.
///
/// `fusion_dims` must share hidden widths and class count with the video
/// model and have `d_in >= video d_in`. The extra leading columns of the
/// first layer (the audio slice) get fresh seeded init with the fusion
/// layer's own fan bound; everything else, biases included, is copied.
pub fn transfer_init<T: Real>(
    video_model: &MlpModel<T>,
    fusion_dims: &[usize],
    seed: u64,
) -> Result<(MlpModel<T>, TransferReport), FusionError> {
    let vdims = video_model.dims();
    if fusion_dims.len() != vdims.len() || fusion_dims[1..] != vdims[1..] {
        return Err(FusionError::IncompatibleArchitecture(format!(
            "hidden widths / class count differ: video {vdims:?}, fusion {fusion_dims:?}"
        )));
    }
    let (video_in, fusion_in) = (vdims[0], fusion_dims[0]);
    if fusion_in < video_in {
        return Err(FusionError::IncompatibleArchitecture(format!(
            "fusion input dim {fusion_in} smaller than video input dim {video_in}"
        )));
    }
    let audio_in = fusion_in - video_in;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut weights = Vec::with_capacity(fusion_dims.len() - 1);
    let mut biases = Vec::with_capacity(fusion_dims.len() - 1);
    let mut layers = Vec::new();
    let (mut copied_total, mut fresh_total) = (0usize, 0usize);
    for l in 0..fusion_dims.len() - 1 {
        let d_out = fusion_dims[l + 1];
        if l == 0 && audio_in > 0 {
            let bound = (6.0 / (fusion_in + d_out) as f64).sqrt();
            let mut w = vec![T::zero(); fusion_in * d_out];
            for o in 0..d_out {
                let row = &mut w[o * fusion_in..(o + 1) * fusion_in];
                for slot in row[..audio_in].iter_mut() {
                    *slot = T::from_f64c(rng.gen_range(-bound..bound));
                }
                row[audio_in..].copy_from_slice(&video_model.weights(0)[o * video_in..(o + 1) * video_in]);
            }
            weights.push(w);
            biases.push(video_model.biases(0).to_vec());
            let copied = video_in * d_out + d_out;
            let fresh = audio_in * d_out;
            layers.push(LayerTransfer {
                layer: 0,
                action: TransferAction::CopiedSlice,
                copied_params: copied,
                fresh_params: fresh,
            });
            copied_total += copied;
            fresh_total += fresh;
        } else {
            weights.push(video_model.weights(l).to_vec());
            biases.push(video_model.biases(l).to_vec());
            let copied = video_model.weights(l).len() + video_model.biases(l).len();
            layers.push(LayerTransfer {
                layer: l,
                action: TransferAction::CopiedFull,
                copied_params: copied,
                fresh_params: 0,
            });
            copied_total += copied;
        }
    }
    let model = MlpModel::from_parts(fusion_dims.to_vec(), weights, biases)?;
    debug_assert_eq!(copied_total + fresh_total, model.param_count());
    Ok((
        model,
        TransferReport {
            layers,
            copied_params: copied_total,
            fresh_params: fresh_total,
        },
    ))
}

/// Checks the transfer identity on `n_probes` seeded random video vectors:
/// `forward_fusion(0_audio ++ v)` must bit-equal `forward_video(v)`.
pub fn transfer_identity_holds<T: Real>(
    fusion_model: &MlpModel<T>,
    video_model: &MlpModel<T>,
    n_probes: usize,
    seed: u64,
) -> Result<bool, FusionError> {
    let video_in = video_model.d_in();
    let fusion_in = fusion_model.d_in();
    let audio_in = fusion_in - video_in;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_probes {
        let v: Vec<T> = (0..video_in)
            .map(|_| T::from_f64c(rng.gen_range(-3.0..3.0)))
            .collect();
        let mut fused = vec![T::zero(); audio_in];
        fused.extend_from_slice(&v);
        let out_fusion = fusion_model.forward(&fused, 1)?;
        let out_video = video_model.forward(&v, 1)?;
        let bit_equal = out_fusion
            .iter()
            .zip(out_video.iter())
            .all(|(a, b)| a.to_f64c().to_bits() == b.to_f64c().to_bits());
        if !bit_equal {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Which split a clip belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

/// A clip's identity, class index and split.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipRef {
    pub clip_id: String,
    pub label: usize,
    pub split: Split,
}

/// The assembled per-modality datasets for one run.
#[derive(Debug, Clone)]
pub struct ModalityData<T: Real> {
    pub n_classes: usize,
    pub reduction: ReductionMode,
    pub audio_train: LabeledBatch<T>,
    pub audio_test: LabeledBatch<T>,
    pub video_train: LabeledBatch<T>,
    pub video_test: LabeledBatch<T>,
    pub fusion_train: LabeledBatch<T>,
    pub fusion_test: LabeledBatch<T>,
}

impl<T: Real> ModalityData<T> {
    /// Joins clips with their embeddings, enforcing shape contracts at the
    /// boundary and failing fast on any clip missing a modality.
    pub fn assemble(
        clips: &[ClipRef],
        audio: &EmbeddingFile,
        video: &EmbeddingFile,
        n_classes: usize,
        reduction: ReductionMode,
    ) -> Result<Self, FusionError> {
        if n_classes < 2 {
            return Err(FusionError::Invalid(format!(
                "need at least 2 classes, got {n_classes}"
            )));
        }
        let d_video = reduction.reduced_dim();
        let d_fused = AUDIO_EMBED_DIM + d_video;
        let mut parts: [(Vec<T>, Vec<usize>); 6] = Default::default();
        for clip in clips {
            if clip.label >= n_classes {
                return Err(FusionError::Invalid(format!(
                    "clip {:?} label {} out of range for {} classes",
                    clip.clip_id, clip.label, n_classes
                )));
            }
            let a_raw = audio
                .get(&clip.clip_id)
                .ok_or_else(|| FusionError::MissingModality(clip.clip_id.clone()))?;
            let v_raw = video
                .get(&clip.clip_id)
                .ok_or_else(|| FusionError::MissingModality(clip.clip_id.clone()))?;
            let a = AudioEmbedding::new(clip.clip_id.clone(), a_raw.to_vec())?;
            let v = VideoEmbedding::new(clip.clip_id.clone(), v_raw.to_vec())?;
            let v_reduced = reduce_video::<T>(&v, reduction);
            let fused = fuse(&a, &v_reduced, clip.label);

            let base = match clip.split {
                Split::Train => 0,
                Split::Test => 1,
            };
            let audio_t: Vec<T> = a.values().iter().map(|&x| T::from_f64c(x as f64)).collect();
            parts[base].0.extend_from_slice(&audio_t);
            parts[base].1.push(clip.label);
            parts[2 + base].0.extend_from_slice(&v_reduced);
            parts[2 + base].1.push(clip.label);
            parts[4 + base].0.extend_from_slice(&fused.vector);
            parts[4 + base].1.push(clip.label);
        }
        let [at, ate, vt, vte, ft, fte] = parts;
        Ok(Self {
            n_classes,
            reduction,
            audio_train: LabeledBatch::new(AUDIO_EMBED_DIM, at.0, at.1)?,
            audio_test: LabeledBatch::new(AUDIO_EMBED_DIM, ate.0, ate.1)?,
            video_train: LabeledBatch::new(d_video, vt.0, vt.1)?,
            video_test: LabeledBatch::new(d_video, vte.0, vte.1)?,
            fusion_train: LabeledBatch::new(d_fused, ft.0, ft.1)?,
            fusion_test: LabeledBatch::new(d_fused, fte.0, fte.1)?,
        })
    }
}

/// Hyperparameters of a full three-phase run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunMaivarConfig {
    pub audio: TrainConfig,
    pub video: TrainConfig,
    pub fusion: TrainConfig,
    /// Hidden widths shared by all three MLPs.
    pub hidden_dims: Vec<usize>,
    pub reduction: ReductionMode,
}

impl Default for RunMaivarConfig {
    fn default() -> Self {
        Self {
            audio: TrainConfig {
                learning_rate: 3e-4,
                batch_size: 16,
                ..Default::default()
            },
            video: TrainConfig {
                learning_rate: 3e-4,
                batch_size: 16,
                ..Default::default()
            },
            fusion: TrainConfig {
                learning_rate: 1e-4,
                batch_size: 128,
                ..Default::default()
            },
            hidden_dims: vec![512],
            reduction: ReductionMode::MeanSegments,
        }
    }
}

/// Everything a run produces: the Table-style accuracy triple, per-epoch
/// curves, the transfer accounting and the recorded identity check.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunReport {
    pub representation: String,
    pub n_classes: usize,
    pub audio_test_accuracy: f64,
    pub video_test_accuracy: f64,
    pub fusion_test_accuracy: f64,
    pub audio_curve: Vec<EpochMetrics>,
    pub video_curve: Vec<EpochMetrics>,
    pub fusion_curve: Vec<EpochMetrics>,
    pub transfer: TransferReport,
    pub transfer_identity_ok: bool,
    pub config: RunMaivarConfig,
}

/// The trained models of a run, returned alongside the report.
pub struct RunModels<T: Real> {
    pub audio: MlpModel<T>,
    pub video: MlpModel<T>,
    pub fusion: MlpModel<T>,
}

/// Runs the full procedure: train the audio MLP, train the video MLP,
/// transfer-initialize the fusion MLP from the trained video model, verify
/// the transfer identity, fine-tune, and evaluate all three on the test
/// split.
pub fn run_maivar<T: Real>(
    data: &ModalityData<T>,
    cfg: &RunMaivarConfig,
    representation: &str,
) -> Result<(RunReport, RunModels<T>), FusionError> {
    for (name, batch) in [
        ("audio train", &data.audio_train),
        ("audio test", &data.audio_test),
        ("video train", &data.video_train),
        ("video test", &data.video_test),
        ("fusion train", &data.fusion_train),
        ("fusion test", &data.fusion_test),
    ] {
        if batch.is_empty() {
            return Err(FusionError::Invalid(format!("{name} split is empty")));
        }
    }
    if data.reduction != cfg.reduction {
        return Err(FusionError::Invalid(
            "data was assembled with a different reduction mode".into(),
        ));
    }
    let k = data.n_classes;
    let mk_dims = |d_in: usize| -> Vec<usize> {
        let mut dims = Vec::with_capacity(cfg.hidden_dims.len() + 2);
        dims.push(d_in);
        dims.extend_from_slice(&cfg.hidden_dims);
        dims.push(k);
        dims
    };

    let mut audio_model = MlpModel::init(&mk_dims(AUDIO_EMBED_DIM), cfg.audio.seed)?;
    let audio_curve = train(&mut audio_model, &data.audio_train, &cfg.audio)?;
    let audio_acc = evaluate(&audio_model, &data.audio_test)?;

    let d_video = cfg.reduction.reduced_dim();
    let mut video_model = MlpModel::init(&mk_dims(d_video), cfg.video.seed)?;
    let video_curve = train(&mut video_model, &data.video_train, &cfg.video)?;
    let video_acc = evaluate(&video_model, &data.video_test)?;

    let fusion_dims = mk_dims(AUDIO_EMBED_DIM + d_video);
    let (mut fusion_model, transfer) = transfer_init(&video_model, &fusion_dims, cfg.fusion.seed)?;
    let identity_ok = transfer_identity_holds(&fusion_model, &video_model, 8, cfg.fusion.seed ^ 0x5eed)?;
    let fusion_curve = train(&mut fusion_model, &data.fusion_train, &cfg.fusion)?;
    let fusion_acc = evaluate(&fusion_model, &data.fusion_test)?;

    Ok((
        RunReport {
            representation: representation.to_string(),
            n_classes: k,
            audio_test_accuracy: audio_acc,
            video_test_accuracy: video_acc,
            fusion_test_accuracy: fusion_acc,
            audio_curve,
            video_curve,
            fusion_curve,
            transfer,
            transfer_identity_ok: identity_ok,
            config: cfg.clone(),
        },
        RunModels {
            audio: audio_model,
            video: video_model,
            fusion: fusion_model,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn video_of(values: Vec<f32>) -> VideoEmbedding {
        VideoEmbedding::new("v", values).unwrap()
    }

    #[test]
    fn mean_reduction_of_identical_rows_is_the_row() {
        let row: Vec<f32> = (0..VIDEO_FEATURE_DIM).map(|i| (i % 13) as f32 * 0.5).collect();
        let mut values = Vec::new();
        for _ in 0..VIDEO_SEGMENTS {
            values.extend_from_slice(&row);
        }
        let reduced: Vec<f64> = reduce_video(&video_of(values), ReductionMode::MeanSegments);
        for (r, e) in reduced.iter().zip(row.iter()) {
            assert!((r - *e as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_reduction_of_scaled_basis_rows() {
        // row k holds value k at position 0: mean position 0 = mean(0..=24) = 12
        let mut values = vec![0.0f32; VIDEO_SEGMENTS * VIDEO_FEATURE_DIM];
        for s in 0..VIDEO_SEGMENTS {
            values[s * VIDEO_FEATURE_DIM] = s as f32;
        }
        let reduced: Vec<f64> = reduce_video(&video_of(values), ReductionMode::MeanSegments);
        assert!((reduced[0] - 12.0).abs() < 1e-12);
        assert!(reduced[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn flatten_reduction_has_25600_dims() {
        let values = vec![0.25f32; VIDEO_SEGMENTS * VIDEO_FEATURE_DIM];
        let reduced: Vec<f64> = reduce_video(&video_of(values), ReductionMode::Flatten);
        assert_eq!(reduced.len(), 25_600);
    }

    #[test]
    fn fuse_concatenates_audio_first() {
        let audio = AudioEmbedding::new("c", vec![1.0; AUDIO_EMBED_DIM]).unwrap();
        let video: Vec<f64> = vec![2.0; VIDEO_FEATURE_DIM];
        let fused = fuse(&audio, &video, 3);
        assert_eq!(fused.vector.len(), 2560);
        assert_eq!(fused.label, 3);
        assert_eq!(fused.clip_id, "c");
        assert!(fused.vector[..AUDIO_EMBED_DIM].iter().all(|&v| v == 1.0));
        assert!(fused.vector[AUDIO_EMBED_DIM..].iter().all(|&v| v == 2.0));
        // restricting to the audio slice reproduces the audio embedding
        let audio_slice: Vec<f32> = fused.vector[..AUDIO_EMBED_DIM].iter().map(|&v| v as f32).collect();
        assert_eq!(audio_slice, audio.values());
    }

    #[test]
    fn fuse_zeros_gives_zero_vector() {
        let audio = AudioEmbedding::new("z", vec![0.0; AUDIO_EMBED_DIM]).unwrap();
        let video = vec![0.0f64; VIDEO_FEATURE_DIM];
        let fused = fuse(&audio, &video, 0);
        assert_eq!(fused.vector, vec![0.0; 2560]);
    }

    #[test]
    fn transfer_matching_dims_copies_everything() {
        let video = MlpModel::<f64>::init(&[64, 32, 4], 5).unwrap();
        let (fusion, report) = transfer_init(&video, &[64, 32, 4], 9).unwrap();
        assert_eq!(fusion, video);
        assert_eq!(report.fresh_params, 0);
        assert_eq!(report.copied_params, video.param_count());
        assert!(report
            .layers
            .iter()
            .all(|l| l.action == TransferAction::CopiedFull));
    }

    #[test]
    fn transfer_default_shapes_slice_structure() {
        let video = MlpModel::<f64>::init(&[1024, 512, 51], 5).unwrap();
        let (fusion, report) = transfer_init(&video, &[2560, 512, 51], 9).unwrap();
        assert_eq!(fusion.dims(), &[2560, 512, 51]);
        assert_eq!(report.layers[0].action, TransferAction::CopiedSlice);
        assert_eq!(report.layers[0].copied_params, 512 * 1024 + 512);
        assert_eq!(report.layers[0].fresh_params, 512 * 1536);
        assert_eq!(report.layers[1].action, TransferAction::CopiedFull);
        assert_eq!(
            report.copied_params + report.fresh_params,
            fusion.param_count()
        );
        // video-slice columns hold the video weights verbatim
        for o in 0..512 {
            assert_eq!(
                &fusion.weights(0)[o * 2560 + 1536..(o + 1) * 2560],
                &video.weights(0)[o * 1024..(o + 1) * 1024]
            );
        }
        assert_eq!(fusion.biases(0), video.biases(0));
    }

    #[test]
    fn transfer_rejects_incompatible_architectures() {
        let video = MlpModel::<f64>::init(&[1024, 512, 51], 5).unwrap();
        assert!(matches!(
            transfer_init(&video, &[2560, 256, 51], 9),
            Err(FusionError::IncompatibleArchitecture(_))
        ));
        assert!(matches!(
            transfer_init(&video, &[512, 512, 51], 9),
            Err(FusionError::IncompatibleArchitecture(_))
        ));
    }

    #[test]
    fn transfer_identity_is_bit_exact() {
        let video = MlpModel::<f64>::init(&[1024, 512, 7], 21).unwrap();
        let (fusion, _) = transfer_init(&video, &[2560, 512, 7], 22).unwrap();
        assert!(transfer_identity_holds(&fusion, &video, 100, 1234).unwrap());
    }

    #[test]
    fn perturbed_transfer_breaks_identity() {
        let video = MlpModel::<f64>::init(&[32, 16, 3], 21).unwrap();
        let (mut fusion, _) = transfer_init(&video, &[48, 16, 3], 22).unwrap();
        // flip one video-slice weight
        fusion.weights_mut(0)[16 + 20] += 1e-9;
        assert!(!transfer_identity_holds(&fusion, &video, 50, 99).unwrap());
    }
}
