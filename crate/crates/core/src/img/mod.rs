//! Fixed-size audio-image rendering, normalization and augmentation.
//!
//! Every representation renders to a 224x224 RGB image. [`normalize`]
//! produces the channel-standardized tensor fed to the feature extractors;
//! [`augment`] applies seeded horizontal/vertical flips.

mod colormap;
mod png;
mod render;

pub use colormap::{Colormap, VIRIDIS_LUT};
pub use png::{read_png, write_png};
pub use render::render;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dsp::TrackKind;
use crate::real::Real;

/// Image side length; all audio-images are square.
pub const IMAGE_SIZE: usize = 224;
/// Number of color channels.
pub const CHANNELS: usize = 3;
/// ImageNet channel means, RGB order.
pub const IMAGENET_MEAN: [f64; 3] = [0.485, 0.456, 0.406];
/// ImageNet channel standard deviations, RGB order.
pub const IMAGENET_STD: [f64; 3] = [0.229, 0.224, 0.225];

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("track has no frames")]
    EmptyTrack,
    #[error("image dimensions {got_w}x{got_h} do not match required {want}x{want}")]
    DimensionMismatch { got_w: u32, got_h: u32, want: u32 },
    #[error("malformed image: {0}")]
    MalformedImage(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// A rendered 224x224x3 audio-image, row-major RGB bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AudioImage {
    pub clip_id: String,
    pub kind: TrackKind,
    pixels: Vec<u8>,
}

impl AudioImage {
    pub fn new(clip_id: impl Into<String>, kind: TrackKind, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if pixels.len() != IMAGE_SIZE * IMAGE_SIZE * CHANNELS {
            return Err(ImageError::MalformedImage(format!(
                "pixel buffer holds {} bytes, need {}",
                pixels.len(),
                IMAGE_SIZE * IMAGE_SIZE * CHANNELS
            )));
        }
        Ok(Self {
            clip_id: clip_id.into(),
            kind,
            pixels,
        })
    }

    /// All-black canvas.
    pub fn black(clip_id: impl Into<String>, kind: TrackKind) -> Self {
        Self {
            clip_id: clip_id.into(),
            kind,
            pixels: vec![0; IMAGE_SIZE * IMAGE_SIZE * CHANNELS],
        }
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, y: usize, x: usize) -> [u8; 3] {
        let i = (y * IMAGE_SIZE + x) * CHANNELS;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn set(&mut self, y: usize, x: usize, rgb: [u8; 3]) {
        let i = (y * IMAGE_SIZE + x) * CHANNELS;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    /// Canonical output file name, `<clip_id>.<kind>.png`.
    pub fn file_name(&self) -> String {
        format!("{}.{}.png", self.clip_id, self.kind.slug())
    }
}

/// Channel-normalized image tensor, shape `3 x 224 x 224` (CHW).
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedTensor<T: Real> {
    values: Vec<T>,
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

impl<T: Real> NormalizedTensor<T> {
    /// Builds a tensor from raw CHW values (for tests and for features
    /// produced outside [`normalize`]). Values must be finite and the
    /// buffer exactly `3 * 224 * 224` long.
    pub fn from_values(values: Vec<T>, mean: [f64; 3], std: [f64; 3]) -> Result<Self, ImageError> {
        if values.len() != CHANNELS * IMAGE_SIZE * IMAGE_SIZE {
            return Err(ImageError::MalformedImage(format!(
                "tensor holds {} values, need {}",
                values.len(),
                CHANNELS * IMAGE_SIZE * IMAGE_SIZE
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ImageError::MalformedImage("non-finite tensor value".into()));
        }
        Ok(Self { values, mean, std })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, c: usize, y: usize, x: usize) -> T {
        self.values[(c * IMAGE_SIZE + y) * IMAGE_SIZE + x]
    }
}

/// `(pixel/255 - mean_c) / std_c` per channel, ImageNet constants.
pub fn normalize<T: Real>(img: &AudioImage) -> NormalizedTensor<T> {
    let mut values = vec![T::zero(); CHANNELS * IMAGE_SIZE * IMAGE_SIZE];
    for y in 0..IMAGE_SIZE {
        for x in 0..IMAGE_SIZE {
            let rgb = img.get(y, x);
            for c in 0..CHANNELS {
                let v = (rgb[c] as f64 / 255.0 - IMAGENET_MEAN[c]) / IMAGENET_STD[c];
                values[(c * IMAGE_SIZE + y) * IMAGE_SIZE + x] = T::from_f64c(v);
            }
        }
    }
    NormalizedTensor {
        values,
        mean: IMAGENET_MEAN,
        std: IMAGENET_STD,
    }
}

/// Inverse of [`normalize`] up to byte quantization.
pub fn denormalize<T: Real>(t: &NormalizedTensor<T>, clip_id: &str, kind: TrackKind) -> AudioImage {
    let mut img = AudioImage::black(clip_id, kind);
    for y in 0..IMAGE_SIZE {
        for x in 0..IMAGE_SIZE {
            let mut rgb = [0u8; 3];
            for (c, slot) in rgb.iter_mut().enumerate() {
                let v = t.get(c, y, x).to_f64c() * t.std[c] + t.mean[c];
                *slot = (v * 255.0).round().clamp(0.0, 255.0) as u8;
            }
            img.set(y, x, rgb);
        }
    }
    img
}

/// Flip policy with a seed for the counter-based draw.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AugmentPolicy {
    pub horizontal_flip_prob: f64,
    pub vertical_flip_prob: f64,
    pub seed: u64,
}

impl AugmentPolicy {
    pub fn new(horizontal_flip_prob: f64, vertical_flip_prob: f64, seed: u64) -> Result<Self, ImageError> {
        for (name, p) in [
            ("horizontal_flip_prob", horizontal_flip_prob),
            ("vertical_flip_prob", vertical_flip_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ImageError::InvalidParameter(format!(
                    "{name} must be in [0, 1], got {p}"
                )));
            }
        }
        Ok(Self {
            horizontal_flip_prob,
            vertical_flip_prob,
            seed,
        })
    }
}

/// Applies horizontal/vertical flips decided by a counter-based RNG keyed by
/// `(policy.seed, draw_index)`: the same key always yields the same flips.
/// The horizontal decision is drawn first.
pub fn augment<T: Real>(
    t: &NormalizedTensor<T>,
    policy: &AugmentPolicy,
    draw_index: u64,
) -> NormalizedTensor<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    rng.set_stream(draw_index);
    let flip_h = rng.gen::<f64>() < policy.horizontal_flip_prob;
    let flip_v = rng.gen::<f64>() < policy.vertical_flip_prob;

    let mut values = vec![T::zero(); t.values.len()];
    for c in 0..CHANNELS {
        for y in 0..IMAGE_SIZE {
            let sy = if flip_v { IMAGE_SIZE - 1 - y } else { y };
            for x in 0..IMAGE_SIZE {
                let sx = if flip_h { IMAGE_SIZE - 1 - x } else { x };
                values[(c * IMAGE_SIZE + y) * IMAGE_SIZE + x] = t.get(c, sy, sx);
            }
        }
    }
    NormalizedTensor {
        values,
        mean: t.mean,
        std: t.std,
    }
}
