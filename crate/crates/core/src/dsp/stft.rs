//! Short-time Fourier transform with center-padded (reflected) framing.

use num_complex::Complex;

use super::{AudioClip, DspError, PowerSpectrogram, StftConfig, WindowKind};
use crate::real::Real;

/// Periodic Hann window of length `n`: `0.5 * (1 - cos(2*pi*i/n))`.
pub fn hann_window<T: Real>(n: usize) -> Vec<T> {
    (0..n)
        .map(|i| {
            let x = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            T::from_f64c(0.5 * (1.0 - x.cos()))
        })
        .collect()
}

fn window_values<T: Real>(kind: WindowKind, n: usize) -> Vec<T> {
    match kind {
        WindowKind::Hann => hann_window(n),
        WindowKind::Rectangular => vec![T::one(); n],
    }
}

/// Reflect an out-of-range index back into `[0, n)` without repeating the
/// edge sample, bouncing as many times as needed.
fn reflect_index(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let mut j = i % period;
    if j < 0 {
        j += period;
    }
    if j >= n as isize {
        j = period - j;
    }
    j as usize
}

/// Radix-2 FFT with a per-size twiddle table.
///
/// Twiddles come straight from `f64` trig per index (no recurrence), so
/// rounding error stays near machine precision at every size. Input length
/// must be a power of two, which `StftConfig` guarantees.
pub(crate) struct FftPlan<T: Real> {
    n: usize,
    twiddles: Vec<Complex<T>>,
}

impl<T: Real> FftPlan<T> {
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "FFT size must be a power of two");
        let twiddles = (0..n / 2)
            .map(|k| {
                let ang = -2.0 * std::f64::consts::PI * k as f64 / n as f64;
                Complex::new(T::from_f64c(ang.cos()), T::from_f64c(ang.sin()))
            })
            .collect();
        Self { n, twiddles }
    }

    pub fn run(&self, buf: &mut [Complex<T>]) {
        let n = self.n;
        debug_assert_eq!(buf.len(), n);
        // Bit-reversal permutation.
        let mut j = 0usize;
        for i in 1..n {
            let mut bit = n >> 1;
            while j & bit != 0 {
                j ^= bit;
                bit >>= 1;
            }
            j |= bit;
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let stride = n / len;
            let half = len / 2;
            let mut base = 0;
            while base < n {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let u = buf[base + k];
                    let v = buf[base + k + half] * w;
                    buf[base + k] = u + v;
                    buf[base + k + half] = u - v;
                }
                base += len;
            }
            len <<= 1;
        }
    }
}

/// Computes the one-sided power spectrogram of a clip.
///
/// Frames are centered: the signal is reflect-padded by `window_len / 2` on
/// each side so frame `t` is centered on sample `t * hop_len`, giving
/// `floor(len / hop_len) + 1` frames. Bin `k` of frame `t` holds
/// `|DFT(window . frame_t)[k]|^2` with no DFT normalization.
pub fn stft_power<T: Real>(
    clip: &AudioClip<T>,
    cfg: &StftConfig,
) -> Result<PowerSpectrogram<T>, DspError> {
    cfg.validate()?;
    let samples = clip.samples();
    if samples.is_empty() {
        return Err(DspError::EmptySignal);
    }
    let n = samples.len();
    let window_len = cfg.window_len;
    let pad = window_len / 2;
    let bins = cfg.bins();
    let frames = n / cfg.hop_len + 1;
    let window = window_values::<T>(cfg.window, window_len);
    let plan = FftPlan::new(window_len);

    let mut values = Vec::with_capacity(frames * bins);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); window_len];
    for t in 0..frames {
        let start = (t * cfg.hop_len) as isize - pad as isize;
        for (j, slot) in buf.iter_mut().enumerate() {
            let idx = reflect_index(start + j as isize, n);
            *slot = Complex::new(samples[idx] * window[j], T::zero());
        }
        plan.run(&mut buf);
        values.extend(buf[..bins].iter().map(|c| c.norm_sqr()));
    }

    let sr = clip.sample_rate_hz() as f64;
    Ok(PowerSpectrogram {
        frames,
        bins,
        values,
        bin_hz: T::from_f64c(sr / window_len as f64),
        hop_s: T::from_f64c(cfg.hop_len as f64 / sr),
    })
}
