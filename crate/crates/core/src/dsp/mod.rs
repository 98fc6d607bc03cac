//! Signal-processing primitives for the six per-clip feature tracks.
//!
//! The chain is: [`AudioClip`] → [`stft_power`] → [`PowerSpectrogram`] →
//! one of the per-kind feature ops ([`mfcc`], [`spectral_centroid`],
//! [`spectral_rolloff`], [`chromagram`]), or directly
//! [`waveplot_track`] for the time-domain envelope. Every op is a pure
//! function: same clip and config gives bit-identical output.

mod dct;
mod features;
mod mel;
mod stft;

use crate::real::Real;
use thiserror::Error;

pub use dct::{dct_ii, dct_iii};
pub use features::{
    chromagram, mfcc, mfcc_feature_scaled, spectral_centroid, spectral_rolloff, waveplot_track,
    CHROMA_BINS,
};
pub use mel::{hz_to_mel, mel_filterbank, mel_to_hz};
pub use stft::{hann_window, stft_power};

/// Default analysis sample rate; WAV ingest resamples to this.
pub const DEFAULT_SAMPLE_RATE: u32 = 22_050;
/// Default STFT window length in samples.
pub const DEFAULT_WINDOW_LEN: usize = 2048;
/// Default STFT hop length in samples.
pub const DEFAULT_HOP_LEN: usize = 512;
/// Default mel filter count.
pub const DEFAULT_N_MELS: usize = 40;
/// Default number of MFCC coefficients kept.
pub const DEFAULT_N_COEFFS: usize = 20;
/// Default spectral-rolloff cumulative power fraction.
pub const DEFAULT_ROLLOFF_FRACTION: f64 = 0.85;
/// Frames whose total power falls below this are treated as silent.
pub const SILENCE_POWER_FLOOR: f64 = 1e-12;
/// Mel energies are clamped to this floor before the log.
pub const LOG_FLOOR: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum DspError {
    #[error("signal is empty")]
    EmptySignal,
    #[error("sample {index} is not a finite value in [-1, 1]: {value}")]
    InvalidSample { index: usize, value: f64 },
    #[error("sample rate must be positive")]
    InvalidSampleRate,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("mel filterbank degenerate: {0}")]
    DegenerateFilterbank(String),
    #[error("feature scaling needs at least 2 frames, got {0}")]
    InsufficientFrames(usize),
}

/// One action instance's raw mono signal.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip<T: Real> {
    id: String,
    samples: Vec<T>,
    sample_rate_hz: u32,
}

impl<T: Real> AudioClip<T> {
    /// Validates the clip invariants: non-empty, finite samples in [-1, 1],
    /// positive sample rate.
    pub fn new(id: impl Into<String>, samples: Vec<T>, sample_rate_hz: u32) -> Result<Self, DspError> {
        if samples.is_empty() {
            return Err(DspError::EmptySignal);
        }
        if sample_rate_hz == 0 {
            return Err(DspError::InvalidSampleRate);
        }
        let one = T::one();
        for (index, &s) in samples.iter().enumerate() {
            if !s.is_finite() || s > one || s < -one {
                return Err(DspError::InvalidSample {
                    index,
                    value: s.to_f64c(),
                });
            }
        }
        Ok(Self {
            id: id.into(),
            samples,
            sample_rate_hz,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Nyquist frequency of the clip.
    pub fn nyquist_hz(&self) -> T {
        T::from_f64c(self.sample_rate_hz as f64 / 2.0)
    }
}

/// Tapering window applied to each STFT frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum WindowKind {
    /// Periodic Hann, `0.5 * (1 - cos(2*pi*n/N))`.
    #[default]
    Hann,
    /// All-ones window, mainly for tests.
    Rectangular,
}

/// STFT framing parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StftConfig {
    pub window_len: usize,
    pub hop_len: usize,
    pub window: WindowKind,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            window_len: DEFAULT_WINDOW_LEN,
            hop_len: DEFAULT_HOP_LEN,
            window: WindowKind::Hann,
        }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<(), DspError> {
        if !self.window_len.is_power_of_two() {
            return Err(DspError::InvalidParameter(format!(
                "window_len must be a power of two, got {}",
                self.window_len
            )));
        }
        if self.hop_len == 0 || self.hop_len > self.window_len {
            return Err(DspError::InvalidParameter(format!(
                "hop_len must satisfy 0 < hop_len <= window_len, got {}",
                self.hop_len
            )));
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        self.window_len / 2 + 1
    }
}

/// One-sided linear power spectrogram, `frames x bins`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrogram<T: Real> {
    pub frames: usize,
    pub bins: usize,
    /// `values[frame * bins + bin] = |DFT(window . frame)[bin]|^2`
    pub values: Vec<T>,
    /// Hz per bin (`sample_rate / window_len`).
    pub bin_hz: T,
    /// Seconds per frame hop.
    pub hop_s: T,
}

impl<T: Real> PowerSpectrogram<T> {
    pub fn frame(&self, t: usize) -> &[T] {
        &self.values[t * self.bins..(t + 1) * self.bins]
    }

    /// Highest representable frequency (`bin_hz * (bins - 1)` = Nyquist).
    pub fn nyquist_hz(&self) -> T {
        self.bin_hz * T::from_f64c((self.bins - 1) as f64)
    }
}

/// Triangular mel filterbank, stored as a `bins x n_mels` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank<T: Real> {
    pub n_mels: usize,
    pub bins: usize,
    /// `weights[bin * n_mels + mel]`, all non-negative.
    pub weights: Vec<T>,
    pub fmin_hz: T,
    pub fmax_hz: T,
}

impl<T: Real> MelFilterbank<T> {
    /// `e = weights^T . power`: mel-band energies for one spectrogram frame.
    pub fn apply(&self, power_frame: &[T]) -> Vec<T> {
        debug_assert_eq!(power_frame.len(), self.bins);
        let mut energies = vec![T::zero(); self.n_mels];
        for (bin, &p) in power_frame.iter().enumerate() {
            let row = &self.weights[bin * self.n_mels..(bin + 1) * self.n_mels];
            for (m, &w) in row.iter().enumerate() {
                energies[m] += w * p;
            }
        }
        energies
    }
}

/// The six representation kinds of the pipeline.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum TrackKind {
    Waveplot,
    Mfcc,
    MfccScaled,
    SpectralCentroid,
    SpectralRolloff,
    Chromagram,
}

impl TrackKind {
    /// All kinds, in the canonical report row order.
    pub const ALL: [TrackKind; 6] = [
        TrackKind::Waveplot,
        TrackKind::SpectralCentroid,
        TrackKind::SpectralRolloff,
        TrackKind::Mfcc,
        TrackKind::MfccScaled,
        TrackKind::Chromagram,
    ];

    /// Short identifier used in file names and CLI arguments.
    pub fn slug(self) -> &'static str {
        match self {
            TrackKind::Waveplot => "waveplot",
            TrackKind::Mfcc => "mfcc",
            TrackKind::MfccScaled => "mfcc_scaled",
            TrackKind::SpectralCentroid => "centroid",
            TrackKind::SpectralRolloff => "rolloff",
            TrackKind::Chromagram => "chromagram",
        }
    }

    /// Human-readable name used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            TrackKind::Waveplot => "Waveplot",
            TrackKind::Mfcc => "MFCCs",
            TrackKind::MfccScaled => "MFCCs Feature Scaling",
            TrackKind::SpectralCentroid => "Spectral Centroids",
            TrackKind::SpectralRolloff => "Spectral Rolloff",
            TrackKind::Chromagram => "Chromagram",
        }
    }

    pub fn from_slug(s: &str) -> Option<Self> {
        TrackKind::ALL.into_iter().find(|k| k.slug() == s)
    }
}

impl std::fmt::Display for TrackKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.slug())
    }
}

/// Analysis parameters shared by every representation of one run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrackParams {
    pub stft: StftConfig,
    pub n_mels: usize,
    pub n_coeffs: usize,
    pub rolloff_fraction: f64,
    pub tuning_a4_hz: f64,
    pub waveplot_columns: usize,
}

impl Default for TrackParams {
    fn default() -> Self {
        Self {
            stft: StftConfig::default(),
            n_mels: DEFAULT_N_MELS,
            n_coeffs: DEFAULT_N_COEFFS,
            rolloff_fraction: DEFAULT_ROLLOFF_FRACTION,
            tuning_a4_hz: 440.0,
            waveplot_columns: 224,
        }
    }
}

/// Computes the feature track of the given kind for one clip.
pub fn compute_track<T: Real>(
    clip: &AudioClip<T>,
    kind: TrackKind,
    params: &TrackParams,
) -> Result<FeatureTrack<T>, DspError> {
    if kind == TrackKind::Waveplot {
        return waveplot_track(clip, params.waveplot_columns);
    }
    let spec = stft_power(clip, &params.stft)?;
    match kind {
        TrackKind::Mfcc | TrackKind::MfccScaled => {
            let fb = mel_filterbank(
                clip.sample_rate_hz(),
                params.stft.window_len,
                params.n_mels,
                T::zero(),
                clip.nyquist_hz(),
            )?;
            let raw = mfcc(&spec, &fb, params.n_coeffs)?;
            if kind == TrackKind::Mfcc {
                Ok(raw)
            } else {
                mfcc_feature_scaled(&raw)
            }
        }
        TrackKind::SpectralCentroid => Ok(spectral_centroid(&spec)),
        TrackKind::SpectralRolloff => {
            spectral_rolloff(&spec, T::from_f64c(params.rolloff_fraction))
        }
        TrackKind::Chromagram => Ok(chromagram(&spec, T::from_f64c(params.tuning_a4_hz))),
        TrackKind::Waveplot => unreachable!("handled above"),
    }
}

/// A per-clip feature matrix, `frames x dims`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTrack<T: Real> {
    pub kind: TrackKind,
    pub frames: usize,
    pub dims: usize,
    pub values: Vec<T>,
    /// Frequency full scale of the source signal. Only the y-axis bound for
    /// Hz-valued kinds (centroid, rolloff) at render time; carried on every
    /// track so rendering needs no side channel.
    pub nyquist_hz: T,
}

impl<T: Real> FeatureTrack<T> {
    pub fn frame(&self, t: usize) -> &[T] {
        &self.values[t * self.dims..(t + 1) * self.dims]
    }

    /// Expected feature dimension for a kind (`None` for waveplot, whose
    /// column count is caller-chosen).
    pub fn expected_dims(kind: TrackKind, n_coeffs: usize) -> usize {
        match kind {
            TrackKind::Waveplot => 2,
            TrackKind::Mfcc | TrackKind::MfccScaled => n_coeffs,
            TrackKind::SpectralCentroid | TrackKind::SpectralRolloff => 1,
            TrackKind::Chromagram => CHROMA_BINS,
        }
    }

    /// Reverses the frame order; used by rendering tests.
    pub fn time_reversed(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for t in (0..self.frames).rev() {
            values.extend_from_slice(self.frame(t));
        }
        Self {
            values,
            ..self.clone()
        }
    }
}
