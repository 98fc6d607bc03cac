//! Per-frame feature tracks derived from the power spectrogram.

use super::dct::dct_ii;
use super::{
    AudioClip, DspError, FeatureTrack, MelFilterbank, PowerSpectrogram, TrackKind, LOG_FLOOR,
    SILENCE_POWER_FLOOR,
};
use crate::real::Real;

/// Number of pitch classes in a chromagram frame.
pub const CHROMA_BINS: usize = 12;

/// MFCCs: per frame, DCT-II of the natural log of mel-band energies
/// (floored at [`LOG_FLOOR`]), keeping the first `n_coeffs` coefficients.
pub fn mfcc<T: Real>(
    spec: &PowerSpectrogram<T>,
    fb: &MelFilterbank<T>,
    n_coeffs: usize,
) -> Result<FeatureTrack<T>, DspError> {
    if n_coeffs == 0 || n_coeffs > fb.n_mels {
        return Err(DspError::InvalidParameter(format!(
            "n_coeffs must be in 1..={}, got {n_coeffs}",
            fb.n_mels
        )));
    }
    if fb.bins != spec.bins {
        return Err(DspError::InvalidParameter(format!(
            "filterbank built for {} bins, spectrogram has {}",
            fb.bins, spec.bins
        )));
    }
    let floor = T::from_f64c(LOG_FLOOR);
    let mut values = Vec::with_capacity(spec.frames * n_coeffs);
    for t in 0..spec.frames {
        let energies = fb.apply(spec.frame(t));
        let log_e: Vec<T> = energies.iter().map(|&e| e.max(floor).ln()).collect();
        let coeffs = dct_ii(&log_e);
        values.extend_from_slice(&coeffs[..n_coeffs]);
    }
    Ok(FeatureTrack {
        kind: TrackKind::Mfcc,
        frames: spec.frames,
        dims: n_coeffs,
        values,
        nyquist_hz: spec.nyquist_hz(),
    })
}

/// Standardizes each MFCC coefficient across time: mean 0, sample standard
/// deviation 1 (n-1 denominator). A coefficient that is bitwise constant
/// across frames maps to all zeros.
pub fn mfcc_feature_scaled<T: Real>(track: &FeatureTrack<T>) -> Result<FeatureTrack<T>, DspError> {
    if track.kind != TrackKind::Mfcc {
        return Err(DspError::InvalidParameter(format!(
            "feature scaling applies to mfcc tracks, got {}",
            track.kind
        )));
    }
    let (frames, dims) = (track.frames, track.dims);
    if frames < 2 {
        return Err(DspError::InsufficientFrames(frames));
    }
    let nf = T::from_f64c(frames as f64);
    let mut values = vec![T::zero(); frames * dims];
    for d in 0..dims {
        let first = track.values[d];
        let constant = (0..frames).all(|t| track.values[t * dims + d] == first);
        if constant {
            continue; // zero-variance rule
        }
        let mut sum = T::zero();
        for t in 0..frames {
            sum += track.values[t * dims + d];
        }
        let mean = sum / nf;
        let mut ss = T::zero();
        for t in 0..frames {
            let dev = track.values[t * dims + d] - mean;
            ss += dev * dev;
        }
        let std = (ss / T::from_f64c((frames - 1) as f64)).sqrt();
        if std == T::zero() {
            continue;
        }
        for t in 0..frames {
            values[t * dims + d] = (track.values[t * dims + d] - mean) / std;
        }
    }
    Ok(FeatureTrack {
        kind: TrackKind::MfccScaled,
        frames,
        dims,
        values,
        nyquist_hz: track.nyquist_hz,
    })
}

/// Power-weighted mean frequency per frame: `sum(f_k * p_k) / sum(p_k)`.
/// Frames with total power below [`SILENCE_POWER_FLOOR`] report 0 Hz.
pub fn spectral_centroid<T: Real>(spec: &PowerSpectrogram<T>) -> FeatureTrack<T> {
    let silence = T::from_f64c(SILENCE_POWER_FLOOR);
    let values = (0..spec.frames)
        .map(|t| {
            let frame = spec.frame(t);
            let total: T = frame.iter().copied().sum();
            if total < silence {
                return T::zero();
            }
            let mut weighted = T::zero();
            for (k, &p) in frame.iter().enumerate() {
                weighted += spec.bin_hz * T::from_f64c(k as f64) * p;
            }
            weighted / total
        })
        .collect();
    FeatureTrack {
        kind: TrackKind::SpectralCentroid,
        frames: spec.frames,
        dims: 1,
        values,
        nyquist_hz: spec.nyquist_hz(),
    }
}

/// Per frame, the lowest bin frequency at which cumulative power reaches
/// `fraction` of the frame total. Silent frames report 0 Hz.
pub fn spectral_rolloff<T: Real>(
    spec: &PowerSpectrogram<T>,
    fraction: T,
) -> Result<FeatureTrack<T>, DspError> {
    if !(fraction > T::zero() && fraction <= T::one()) {
        return Err(DspError::InvalidParameter(format!(
            "rolloff fraction must be in (0, 1], got {fraction}"
        )));
    }
    let silence = T::from_f64c(SILENCE_POWER_FLOOR);
    let values = (0..spec.frames)
        .map(|t| {
            let frame = spec.frame(t);
            // total taken as the final cumulative sum so fraction = 1.0
            // lands exactly on the highest nonzero bin
            let mut total = T::zero();
            for &p in frame {
                total += p;
            }
            if total < silence {
                return T::zero();
            }
            let threshold = fraction * total;
            let mut cum = T::zero();
            for (k, &p) in frame.iter().enumerate() {
                cum += p;
                if cum >= threshold {
                    return spec.bin_hz * T::from_f64c(k as f64);
                }
            }
            spec.bin_hz * T::from_f64c((spec.bins - 1) as f64)
        })
        .collect();
    Ok(FeatureTrack {
        kind: TrackKind::SpectralRolloff,
        frames: spec.frames,
        dims: 1,
        values,
        nyquist_hz: spec.nyquist_hz(),
    })
}

/// Pitch class of a frequency under the given A4 tuning, with C = 0.
fn pitch_class<T: Real>(hz: T, tuning_a4_hz: T) -> usize {
    // MIDI note 69 is A4; midi % 12 == 0 for C.
    let midi = 69.0 + 12.0 * (hz / tuning_a4_hz).to_f64c().log2();
    (midi.round() as i64).rem_euclid(12) as usize
}

/// Folds bin power into 12 pitch classes by nearest-semitone assignment of
/// each bin's center frequency, then max-normalizes each frame. The DC bin
/// has no pitch class and is skipped; frames with total power below
/// [`SILENCE_POWER_FLOOR`] (or with all power in DC) are all zeros.
pub fn chromagram<T: Real>(spec: &PowerSpectrogram<T>, tuning_a4_hz: T) -> FeatureTrack<T> {
    let silence = T::from_f64c(SILENCE_POWER_FLOOR);
    // bin -> pitch class table, shared across frames
    let classes: Vec<usize> = (1..spec.bins)
        .map(|k| pitch_class(spec.bin_hz * T::from_f64c(k as f64), tuning_a4_hz))
        .collect();
    let mut values = Vec::with_capacity(spec.frames * CHROMA_BINS);
    for t in 0..spec.frames {
        let frame = spec.frame(t);
        let total: T = frame.iter().copied().sum();
        let mut chroma = [T::zero(); CHROMA_BINS];
        if total >= silence {
            for (k, &p) in frame.iter().enumerate().skip(1) {
                chroma[classes[k - 1]] += p;
            }
            let max = chroma.iter().copied().fold(T::zero(), T::max);
            if max > T::zero() {
                for c in chroma.iter_mut() {
                    *c /= max;
                }
            }
        }
        values.extend_from_slice(&chroma);
    }
    FeatureTrack {
        kind: TrackKind::Chromagram,
        frames: spec.frames,
        dims: CHROMA_BINS,
        values,
        nyquist_hz: spec.nyquist_hz(),
    }
}

/// Min/max amplitude envelope over `columns` equal sample spans.
/// Empty spans (more columns than samples) yield (0, 0).
pub fn waveplot_track<T: Real>(
    clip: &AudioClip<T>,
    columns: usize,
) -> Result<FeatureTrack<T>, DspError> {
    if columns == 0 {
        return Err(DspError::InvalidParameter("columns must be >= 1".into()));
    }
    let samples = clip.samples();
    let n = samples.len();
    let mut values = Vec::with_capacity(columns * 2);
    for c in 0..columns {
        let start = c * n / columns;
        let end = (c + 1) * n / columns;
        if start == end {
            values.push(T::zero());
            values.push(T::zero());
            continue;
        }
        let span = &samples[start..end];
        let mut lo = span[0];
        let mut hi = span[0];
        for &s in &span[1..] {
            lo = lo.min(s);
            hi = hi.max(s);
        }
        values.push(lo);
        values.push(hi);
    }
    Ok(FeatureTrack {
        kind: TrackKind::Waveplot,
        frames: columns,
        dims: 2,
        values,
        nyquist_hz: clip.nyquist_hz(),
    })
}
