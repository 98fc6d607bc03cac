//! Triangular mel filterbank on the HTK mel scale.

use super::{DspError, MelFilterbank};
use crate::real::Real;

/// HTK mel scale: `2595 * log10(1 + hz / 700)`.
pub fn hz_to_mel<T: Real>(hz: T) -> T {
    let seven_hundred = T::from_f64c(700.0);
    T::from_f64c(2595.0) * (T::one() + hz / seven_hundred).log10()
}

/// Inverse of [`hz_to_mel`].
pub fn mel_to_hz<T: Real>(mel: T) -> T {
    let ten = T::from_f64c(10.0);
    T::from_f64c(700.0) * (ten.powf(mel / T::from_f64c(2595.0)) - T::one())
}

/// Builds `n_mels` triangular filters with peaks equally spaced on the mel
/// scale between `fmin_hz` and `fmax_hz`.
///
/// Filter `m` rises from mel point `m` to its peak at point `m + 1` and
/// falls to zero at point `m + 2`; weights are evaluated at the bin center
/// frequencies `k * sample_rate / window_len` with peak weight 1.
pub fn mel_filterbank<T: Real>(
    sample_rate_hz: u32,
    window_len: usize,
    n_mels: usize,
    fmin_hz: T,
    fmax_hz: T,
) -> Result<MelFilterbank<T>, DspError> {
    let nyquist = T::from_f64c(sample_rate_hz as f64 / 2.0);
    if n_mels == 0 {
        return Err(DspError::InvalidParameter("n_mels must be >= 1".into()));
    }
    if !(fmin_hz >= T::zero() && fmin_hz < fmax_hz && fmax_hz <= nyquist) {
        return Err(DspError::InvalidParameter(format!(
            "need 0 <= fmin < fmax <= Nyquist, got fmin={fmin_hz} fmax={fmax_hz} nyquist={nyquist}"
        )));
    }
    let bins = window_len / 2 + 1;
    let mel_min = hz_to_mel(fmin_hz);
    let mel_max = hz_to_mel(fmax_hz);
    let step = (mel_max - mel_min) / T::from_f64c((n_mels + 1) as f64);
    let hz_points: Vec<T> = (0..n_mels + 2)
        .map(|i| mel_to_hz(mel_min + step * T::from_f64c(i as f64)))
        .collect();

    let bin_hz = T::from_f64c(sample_rate_hz as f64 / window_len as f64);
    let mut weights = vec![T::zero(); bins * n_mels];
    for bin in 0..bins {
        let f = bin_hz * T::from_f64c(bin as f64);
        for m in 0..n_mels {
            let (left, peak, right) = (hz_points[m], hz_points[m + 1], hz_points[m + 2]);
            if f <= left || f >= right {
                continue;
            }
            let w = if f <= peak {
                (f - left) / (peak - left)
            } else {
                (right - f) / (right - peak)
            };
            if w > T::zero() {
                weights[bin * n_mels + m] = w;
            }
        }
    }

    for m in 0..n_mels {
        let has_support = (0..bins).any(|bin| weights[bin * n_mels + m] > T::zero());
        if !has_support {
            return Err(DspError::DegenerateFilterbank(format!(
                "filter {m} of {n_mels} covers no spectrogram bin; reduce n_mels or widen the band"
            )));
        }
    }

    Ok(MelFilterbank {
        n_mels,
        bins,
        weights,
        fmin_hz,
        fmax_hz,
    })
}
