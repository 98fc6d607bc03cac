//! Modality embeddings: toy extractors and ingest of precomputed features.
//!
//! The toy extractors stand in for the frozen pretrained backbones: they
//! mean-pool the normalized image over an 8x8 patch grid per channel
//! (192 values), apply a seeded fixed random projection, and rectify.
//! Shape contracts — audio 1536, video 25x1024 — are enforced at every
//! construction site; precomputed features with the same shapes can be
//! ingested through the file formats in [`format`].

mod format;

pub use format::{read_embeddings, read_embeddings_csv, write_embeddings, EmbeddingFile, Modality};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::img::{NormalizedTensor, CHANNELS, IMAGE_SIZE};
use crate::real::Real;

/// Audio embedding length.
pub const AUDIO_EMBED_DIM: usize = 1536;
/// Video temporal segment count.
pub const VIDEO_SEGMENTS: usize = 25;
/// Per-segment video feature length.
pub const VIDEO_FEATURE_DIM: usize = 1024;
/// Patch-grid side; pooling yields `3 * 8 * 8 = 192` values.
pub const PATCH_GRID: usize = 8;
/// Pooled vector length fed to the projections.
pub const POOLED_DIM: usize = CHANNELS * PATCH_GRID * PATCH_GRID;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("audio embedding must have {AUDIO_EMBED_DIM} values, got {0}")]
    AudioShape(usize),
    #[error("video embedding must be {VIDEO_SEGMENTS}x{VIDEO_FEATURE_DIM} values, got {0}")]
    VideoShape(usize),
    #[error("embedding contains a non-finite value")]
    NonFinite,
    #[error("no input frames")]
    EmptyInput,
    #[error("bad magic bytes; not an embedding file")]
    BadMagic,
    #[error("unsupported embedding file version {0}")]
    UnsupportedVersion(u16),
    #[error("file dims {got_rows}x{got_cols} do not match expected {want_rows}x{want_cols}")]
    ShapeMismatch {
        want_rows: usize,
        want_cols: usize,
        got_rows: usize,
        got_cols: usize,
    },
    #[error("duplicate clip id {0:?}")]
    DuplicateClipId(String),
    #[error("malformed embedding file: {0}")]
    Malformed(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// A 1536-dim audio feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioEmbedding {
    pub clip_id: String,
    values: Vec<f32>,
}

impl AudioEmbedding {
    pub fn new(clip_id: impl Into<String>, values: Vec<f32>) -> Result<Self, EmbedError> {
        if values.len() != AUDIO_EMBED_DIM {
            return Err(EmbedError::AudioShape(values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(EmbedError::NonFinite);
        }
        Ok(Self {
            clip_id: clip_id.into(),
            values,
        })
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }
}

/// A 25x1024 video feature matrix (segments x features, row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct VideoEmbedding {
    pub clip_id: String,
    values: Vec<f32>,
}

impl VideoEmbedding {
    pub fn new(clip_id: impl Into<String>, values: Vec<f32>) -> Result<Self, EmbedError> {
        if values.len() != VIDEO_SEGMENTS * VIDEO_FEATURE_DIM {
            return Err(EmbedError::VideoShape(values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(EmbedError::NonFinite);
        }
        Ok(Self {
            clip_id: clip_id.into(),
            values,
        })
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn segment(&self, s: usize) -> &[f32] {
        &self.values[s * VIDEO_FEATURE_DIM..(s + 1) * VIDEO_FEATURE_DIM]
    }
}

/// Parameters of the deterministic toy feature extractor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ToyExtractorSpec {
    pub seed: u64,
}

impl ToyExtractorSpec {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }
}

/// The toy extractor with its seed-derived projection matrices.
///
/// Projection entries are i.i.d. uniform in `[-1/sqrt(192), 1/sqrt(192)]`,
/// drawn row-major from a ChaCha stream keyed by the seed (stream 0 for the
/// audio matrix, stream 1 for video).
pub struct ToyExtractor {
    spec: ToyExtractorSpec,
    /// `AUDIO_EMBED_DIM x POOLED_DIM`, row-major.
    audio_proj: Vec<f64>,
    /// `VIDEO_FEATURE_DIM x POOLED_DIM`, row-major.
    video_proj: Vec<f64>,
}

fn projection(seed: u64, stream: u64, rows: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let bound = 1.0 / (POOLED_DIM as f64).sqrt();
    (0..rows * POOLED_DIM)
        .map(|_| rng.gen_range(-bound..=bound))
        .collect()
}

impl ToyExtractor {
    pub fn new(spec: ToyExtractorSpec) -> Self {
        Self {
            spec,
            audio_proj: projection(spec.seed, 0, AUDIO_EMBED_DIM),
            video_proj: projection(spec.seed, 1, VIDEO_FEATURE_DIM),
        }
    }

    pub fn spec(&self) -> ToyExtractorSpec {
        self.spec
    }

    /// Mean-pools a normalized tensor over the patch grid, channel-major:
    /// `pooled[c * 64 + gy * 8 + gx]`.
    pub fn patch_pool<T: Real>(tensor: &NormalizedTensor<T>) -> Vec<f64> {
        let patch = IMAGE_SIZE / PATCH_GRID;
        let mut pooled = vec![0.0f64; POOLED_DIM];
        let norm = 1.0 / (patch * patch) as f64;
        for c in 0..CHANNELS {
            for gy in 0..PATCH_GRID {
                for gx in 0..PATCH_GRID {
                    let mut acc = 0.0f64;
                    for py in 0..patch {
                        for px in 0..patch {
                            acc += tensor.get(c, gy * patch + py, gx * patch + px).to_f64c();
                        }
                    }
                    pooled[(c * PATCH_GRID + gy) * PATCH_GRID + gx] = acc * norm;
                }
            }
        }
        pooled
    }

    fn project_relu(matrix: &[f64], rows: usize, pooled: &[f64]) -> Vec<f32> {
        (0..rows)
            .map(|r| {
                let row = &matrix[r * POOLED_DIM..(r + 1) * POOLED_DIM];
                let mut acc = 0.0f64;
                for (w, x) in row.iter().zip(pooled.iter()) {
                    acc += w * x;
                }
                acc.max(0.0) as f32
            })
            .collect()
    }

    /// Audio-image -> 1536-dim embedding: patch pool, project, ReLU.
    pub fn extract_audio<T: Real>(
        &self,
        clip_id: &str,
        tensor: &NormalizedTensor<T>,
    ) -> AudioEmbedding {
        let pooled = Self::patch_pool(tensor);
        let values = Self::project_relu(&self.audio_proj, AUDIO_EMBED_DIM, &pooled);
        AudioEmbedding::new(clip_id, values).expect("constructed with the contract dims")
    }

    /// Frame sequence -> 25x1024 embedding.
    ///
    /// Frame `f` of `n` belongs to segment `floor(f * 25 / n)`; each
    /// segment averages its frames' pooled vectors in frame order, projects
    /// and rectifies. Segments left empty (fewer than 25 frames) copy the
    /// nearest earlier non-empty segment row.
    pub fn extract_video<T: Real>(
        &self,
        clip_id: &str,
        frames: &[NormalizedTensor<T>],
    ) -> Result<VideoEmbedding, EmbedError> {
        if frames.is_empty() {
            return Err(EmbedError::EmptyInput);
        }
        let n = frames.len();
        let mut sums = vec![vec![0.0f64; POOLED_DIM]; VIDEO_SEGMENTS];
        let mut counts = [0usize; VIDEO_SEGMENTS];
        for (f, tensor) in frames.iter().enumerate() {
            let s = (f * VIDEO_SEGMENTS / n).min(VIDEO_SEGMENTS - 1);
            let pooled = Self::patch_pool(tensor);
            for (acc, v) in sums[s].iter_mut().zip(pooled.iter()) {
                *acc += v;
            }
            counts[s] += 1;
        }
        let mut values = vec![0.0f32; VIDEO_SEGMENTS * VIDEO_FEATURE_DIM];
        let mut last_filled: Option<usize> = None;
        for s in 0..VIDEO_SEGMENTS {
            if counts[s] > 0 {
                let mean: Vec<f64> = sums[s].iter().map(|v| v / counts[s] as f64).collect();
                let row = Self::project_relu(&self.video_proj, VIDEO_FEATURE_DIM, &mean);
                values[s * VIDEO_FEATURE_DIM..(s + 1) * VIDEO_FEATURE_DIM].copy_from_slice(&row);
                last_filled = Some(s);
            } else {
                let src = last_filled.expect("frame 0 always lands in segment 0");
                let (head, tail) = values.split_at_mut(s * VIDEO_FEATURE_DIM);
                tail[..VIDEO_FEATURE_DIM].copy_from_slice(
                    &head[src * VIDEO_FEATURE_DIM..(src + 1) * VIDEO_FEATURE_DIM],
                );
            }
        }
        VideoEmbedding::new(clip_id, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::TrackKind;
    use crate::img::{normalize, AudioImage};

    fn tensor_from(f: impl Fn(usize, usize) -> [u8; 3]) -> NormalizedTensor<f64> {
        let mut img = AudioImage::black("t", TrackKind::Chromagram);
        for y in 0..IMAGE_SIZE {
            for x in 0..IMAGE_SIZE {
                img.set(y, x, f(y, x));
            }
        }
        normalize(&img)
    }

    #[test]
    fn zero_tensor_projects_to_zero_embedding() {
        let ex = ToyExtractor::new(ToyExtractorSpec::new(7));
        let zeros = NormalizedTensor::<f64>::from_values(
            vec![0.0; CHANNELS * IMAGE_SIZE * IMAGE_SIZE],
            crate::img::IMAGENET_MEAN,
            crate::img::IMAGENET_STD,
        )
        .unwrap();
        let emb = ex.extract_audio("z", &zeros);
        assert!(emb.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn same_seed_same_embedding() {
        let t = tensor_from(|y, x| [(x % 256) as u8, (y % 256) as u8, 7]);
        let a = ToyExtractor::new(ToyExtractorSpec::new(7)).extract_audio("c", &t);
        let b = ToyExtractor::new(ToyExtractorSpec::new(7)).extract_audio("c", &t);
        assert_eq!(a.values(), b.values());
        let c = ToyExtractor::new(ToyExtractorSpec::new(8)).extract_audio("c", &t);
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn single_patch_difference_changes_embedding() {
        let ex = ToyExtractor::new(ToyExtractorSpec::new(7));
        let t1 = tensor_from(|_, _| [100, 100, 100]);
        // brighten one patch (patch (0,0): pixels 0..28)
        let t2 = tensor_from(|y, x| {
            if y < 28 && x < 28 {
                [200, 100, 100]
            } else {
                [100, 100, 100]
            }
        });
        assert_ne!(
            ex.extract_audio("c", &t1).values(),
            ex.extract_audio("c", &t2).values()
        );
    }

    #[test]
    fn identical_frames_give_identical_segments() {
        let ex = ToyExtractor::new(ToyExtractorSpec::new(3));
        let t = tensor_from(|y, _| [(y % 200) as u8, 30, 60]);
        let frames: Vec<_> = (0..VIDEO_SEGMENTS).map(|_| t.clone()).collect();
        let emb = ex.extract_video("c", &frames).unwrap();
        for s in 1..VIDEO_SEGMENTS {
            assert_eq!(emb.segment(s), emb.segment(0));
        }
    }

    #[test]
    fn single_frame_copies_into_all_segments() {
        let ex = ToyExtractor::new(ToyExtractorSpec::new(3));
        let t = tensor_from(|y, x| [(x % 200) as u8, (y % 100) as u8, 9]);
        let emb = ex.extract_video("c", &[t]).unwrap();
        for s in 1..VIDEO_SEGMENTS {
            assert_eq!(emb.segment(s), emb.segment(0), "segment {s}");
        }
    }

    #[test]
    fn fifty_frames_segment_zero_is_mean_of_first_two() {
        let ex = ToyExtractor::new(ToyExtractorSpec::new(11));
        let a = tensor_from(|_, _| [10, 20, 30]);
        let b = tensor_from(|_, _| [50, 60, 70]);
        let mut frames = vec![a.clone(), b.clone()];
        for i in 0..48 {
            frames.push(tensor_from(|_, _| [(i % 256) as u8, 0, 0]));
        }
        let emb = ex.extract_video("c", &frames).unwrap();
        // hand-assembled: mean of the two pooled vectors, projected, ReLU
        let pa = ToyExtractor::patch_pool(&a);
        let pb = ToyExtractor::patch_pool(&b);
        let mean: Vec<f64> = pa.iter().zip(pb.iter()).map(|(x, y)| (x + y) / 2.0).collect();
        let expect = ToyExtractor::project_relu(&ex.video_proj, VIDEO_FEATURE_DIM, &mean);
        assert_eq!(emb.segment(0), &expect[..]);
    }

    #[test]
    fn two_frame_segment_is_order_invariant() {
        let ex = ToyExtractor::new(ToyExtractorSpec::new(5));
        let a = tensor_from(|y, x| [(x % 9) as u8, (y % 9) as u8, 1]);
        let b = tensor_from(|y, x| [(x % 17) as u8, 3, (y % 31) as u8]);
        // 50 frames -> 2 per segment; swap the two frames of segment 0
        let mut f1 = vec![a.clone(), b.clone()];
        let mut f2 = vec![b, a];
        for i in 0..48 {
            let filler = tensor_from(|_, _| [(i * 5 % 256) as u8, 0, 0]);
            f1.push(filler.clone());
            f2.push(filler);
        }
        let e1 = ex.extract_video("c", &f1).unwrap();
        let e2 = ex.extract_video("c", &f2).unwrap();
        assert_eq!(e1.segment(0), e2.segment(0));
    }

    #[test]
    fn empty_frames_rejected() {
        let ex = ToyExtractor::new(ToyExtractorSpec::new(5));
        assert!(matches!(
            ex.extract_video::<f64>("c", &[]),
            Err(EmbedError::EmptyInput)
        ));
    }

    #[test]
    fn shape_contracts_enforced() {
        assert!(matches!(
            AudioEmbedding::new("a", vec![0.0; 1535]),
            Err(EmbedError::AudioShape(1535))
        ));
        assert!(matches!(
            VideoEmbedding::new("v", vec![0.0; 1024]),
            Err(EmbedError::VideoShape(1024))
        ));
        assert!(matches!(
            AudioEmbedding::new("a", vec![f32::NAN; 1536]),
            Err(EmbedError::NonFinite)
        ));
        assert!(AudioEmbedding::new("a", vec![0.5; 1536]).is_ok());
        assert!(VideoEmbedding::new("v", vec![0.5; 25 * 1024]).is_ok());
    }
}
