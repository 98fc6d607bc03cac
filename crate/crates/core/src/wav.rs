//! WAV ingest and writing.
//!
//! Reads RIFF little-endian PCM (8/16/24-bit int, 32-bit float), mono or
//! stereo. Stereo is downmixed by channel averaging, then the signal is
//! resampled to [`crate::dsp::DEFAULT_SAMPLE_RATE`] by linear interpolation.
//! Linear interpolation is a fidelity limit accepted for image rendering;
//! it is not an anti-aliased resampler.

use std::path::Path;

use thiserror::Error;

use crate::dsp::{AudioClip, DspError, DEFAULT_SAMPLE_RATE};
use crate::real::Real;

#[derive(Debug, Error)]
pub enum WavError {
    #[error("io error reading wav: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed wav: {0}")]
    Malformed(String),
    #[error("unsupported wav format: {0}")]
    UnsupportedFormat(String),
    #[error("wav contains a non-finite sample")]
    NonFiniteSample,
    #[error(transparent)]
    Dsp(#[from] DspError),
}

impl From<hound::Error> for WavError {
    fn from(e: hound::Error) -> Self {
        match e {
            hound::Error::IoError(io) => WavError::Io(io),
            hound::Error::FormatError(msg) => WavError::Malformed(msg.to_string()),
            hound::Error::Unsupported => WavError::UnsupportedFormat("unsupported encoding".into()),
            other => WavError::Malformed(other.to_string()),
        }
    }
}

/// Decodes a WAV file to normalized mono samples at its native rate.
pub fn decode_wav(path: &Path) -> Result<(Vec<f64>, u32), WavError> {
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    if spec.channels == 0 || spec.channels > 2 {
        return Err(WavError::UnsupportedFormat(format!(
            "{} channels; only mono and stereo are supported",
            spec.channels
        )));
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 8) => reader
            .samples::<i8>()
            // hound exposes 8-bit PCM (stored unsigned) as signed i8
            .map(|s| s.map(|v| v as f64 / 128.0))
            .collect::<Result<_, _>>()?,
        (hound::SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32_768.0))
            .collect::<Result<_, _>>()?,
        (hound::SampleFormat::Int, 24) => reader
            .samples::<i32>()
            .map(|s| s.map(|v| v as f64 / 8_388_608.0))
            .collect::<Result<_, _>>()?,
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<Result<_, _>>()?,
        (fmt, bits) => {
            return Err(WavError::UnsupportedFormat(format!(
                "{bits}-bit {fmt:?} PCM"
            )))
        }
    };
    if interleaved.is_empty() {
        return Err(WavError::Malformed("no samples".into()));
    }
    if interleaved.iter().any(|s| !s.is_finite()) {
        return Err(WavError::NonFiniteSample);
    }

    let mono: Vec<f64> = if spec.channels == 2 {
        interleaved
            .chunks_exact(2)
            .map(|lr| (lr[0] + lr[1]) / 2.0)
            .collect()
    } else {
        interleaved
    };
    // float input may exceed full scale; clamp to the clip invariant range
    let mono = mono.into_iter().map(|s| s.clamp(-1.0, 1.0)).collect();
    Ok((mono, spec.sample_rate))
}

/// Linear-interpolation resampler.
pub fn resample_linear(samples: &[f64], from_hz: u32, to_hz: u32) -> Vec<f64> {
    if from_hz == to_hz || samples.len() < 2 {
        return samples.to_vec();
    }
    let ratio = from_hz as f64 / to_hz as f64;
    let n_out = ((samples.len() - 1) as f64 / ratio).floor() as usize + 1;
    (0..n_out)
        .map(|i| {
            let pos = i as f64 * ratio;
            let lo = pos.floor() as usize;
            let frac = pos - lo as f64;
            if lo + 1 < samples.len() {
                samples[lo] * (1.0 - frac) + samples[lo + 1] * frac
            } else {
                samples[lo]
            }
        })
        .collect()
}

/// Reads a WAV file into an [`AudioClip`] at the pipeline sample rate.
pub fn ingest_wav<T: Real>(path: &Path, clip_id: &str) -> Result<AudioClip<T>, WavError> {
    let (mono, sr) = decode_wav(path)?;
    let resampled = resample_linear(&mono, sr, DEFAULT_SAMPLE_RATE);
    let samples = resampled.into_iter().map(T::from_f64c).collect();
    Ok(AudioClip::new(clip_id, samples, DEFAULT_SAMPLE_RATE)?)
}

/// Writes mono samples as 16-bit PCM.
pub fn write_wav_mono16(path: &Path, samples: &[f64], sample_rate_hz: u32) -> Result<(), WavError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: sample_rate_hz,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec)?;
    for &s in samples {
        let q = (s.clamp(-1.0, 1.0) * 32_767.0).round() as i16;
        writer.write_sample(q)?;
    }
    writer.finalize()?;
    Ok(())
}
