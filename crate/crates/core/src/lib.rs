//! Desk-scale multimodal action recognition on audio-image representations.
//!
//! The pipeline turns raw audio into six fixed-size image representations
//! (waveplot, MFCC, feature-scaled MFCC, spectral centroid, spectral
//! rolloff, chromagram), extracts per-modality embeddings with deterministic
//! toy featurizers (or ingests precomputed ones), trains unimodal MLP
//! classifiers on each modality, and trains a late-fusion classifier whose
//! weights are initialized from the trained video model before fine-tuning.
//!
//! Numeric modules are generic over the scalar type via [`real::Real`]
//! (`f32` or `f64`); the reference pipeline uses [`Scalar`] = `f64`.

pub mod check;
pub mod dsp;
pub mod embed;
pub mod fusion;
pub mod img;
pub mod neural;
pub mod real;
pub mod wav;

pub use real::Real;

/// Scalar type used by the reference pipeline and the CLI.
pub type Scalar = f64;

/// Feature track at pipeline precision.
pub type Track = dsp::FeatureTrack<Scalar>;
/// MLP model at pipeline precision.
pub type Model = neural::MlpModel<Scalar>;
