//! Deterministic rendering of feature tracks to 224x224 images.
//!
//! Rendering conventions (fixed so golden tests are well-defined):
//! - Waveplot: filled min/max envelope, amplitude -1..1 over the full image
//!   height (row 0 = +1), colormap midpoint on black.
//! - Heatmaps (mfcc, mfcc_scaled, chromagram): time on x with frames mapped
//!   to 224 columns by sample-hold (`frame = floor(x * frames / 224)`),
//!   feature dimension on y stretched to 224 rows with row 0 = highest dim,
//!   values min-max scaled per image onto the full LUT.
//! - Polylines (centroid, rolloff): Hz value against y = 0..Nyquist mapped
//!   bottom-to-top, 2-px stroke in the colormap midpoint on black.

use super::{AudioImage, Colormap, ImageError, IMAGE_SIZE};
use crate::dsp::{FeatureTrack, TrackKind};
use crate::real::Real;

/// Renders a feature track into its audio-image.
pub fn render<T: Real>(
    track: &FeatureTrack<T>,
    cmap: &Colormap,
    clip_id: &str,
) -> Result<AudioImage, ImageError> {
    if track.frames == 0 || track.dims == 0 {
        return Err(ImageError::EmptyTrack);
    }
    match track.kind {
        TrackKind::Waveplot => render_waveplot(track, cmap, clip_id),
        TrackKind::Mfcc | TrackKind::MfccScaled | TrackKind::Chromagram => {
            render_heatmap(track, cmap, clip_id)
        }
        TrackKind::SpectralCentroid | TrackKind::SpectralRolloff => {
            render_polyline(track, cmap, clip_id)
        }
    }
}

/// Sample-hold column resampling: image column -> track frame.
fn frame_for_column(x: usize, frames: usize) -> usize {
    (x * frames / IMAGE_SIZE).min(frames - 1)
}

/// Amplitude in [-1, 1] -> image row (row 0 is +1).
fn amp_to_row(a: f64) -> usize {
    let y = ((1.0 - a.clamp(-1.0, 1.0)) * 0.5 * (IMAGE_SIZE - 1) as f64).round();
    y as usize
}

fn render_waveplot<T: Real>(
    track: &FeatureTrack<T>,
    cmap: &Colormap,
    clip_id: &str,
) -> Result<AudioImage, ImageError> {
    let fg = cmap.midpoint();
    let mut img = AudioImage::black(clip_id, track.kind);
    for x in 0..IMAGE_SIZE {
        let frame = track.frame(frame_for_column(x, track.frames));
        let (lo, hi) = (frame[0].to_f64c(), frame[1].to_f64c());
        let top = amp_to_row(hi);
        let bottom = amp_to_row(lo);
        for y in top..=bottom {
            img.set(y, x, fg);
        }
    }
    Ok(img)
}

fn render_heatmap<T: Real>(
    track: &FeatureTrack<T>,
    cmap: &Colormap,
    clip_id: &str,
) -> Result<AudioImage, ImageError> {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in &track.values {
        let v = v.to_f64c();
        min = min.min(v);
        max = max.max(v);
    }
    let range = max - min;
    let mut img = AudioImage::black(clip_id, track.kind);
    for y in 0..IMAGE_SIZE {
        // row 0 shows the highest feature dimension
        let d = track.dims - 1 - (y * track.dims / IMAGE_SIZE).min(track.dims - 1);
        for x in 0..IMAGE_SIZE {
            let v = track.frame(frame_for_column(x, track.frames))[d].to_f64c();
            let idx = if range > 0.0 {
                ((v - min) / range * 255.0).round() as usize
            } else {
                0 // min == max maps to scaled value 0
            };
            img.set(y, x, cmap.lut[idx.min(255)]);
        }
    }
    Ok(img)
}

fn render_polyline<T: Real>(
    track: &FeatureTrack<T>,
    cmap: &Colormap,
    clip_id: &str,
) -> Result<AudioImage, ImageError> {
    let full_scale = track.nyquist_hz.to_f64c();
    if full_scale <= 0.0 {
        return Err(ImageError::InvalidParameter(
            "polyline rendering needs a positive frequency full scale".into(),
        ));
    }
    // Hz -> row, 0 Hz at the bottom, Nyquist at the top.
    let row_of = |hz: f64| -> usize {
        let t = (hz / full_scale).clamp(0.0, 1.0);
        ((1.0 - t) * (IMAGE_SIZE - 1) as f64).round() as usize
    };
    let fg = cmap.midpoint();
    let mut img = AudioImage::black(clip_id, track.kind);
    let mut prev_row: Option<usize> = None;
    for x in 0..IMAGE_SIZE {
        let hz = track.frame(frame_for_column(x, track.frames))[0].to_f64c();
        let row = row_of(hz);
        // connect to the previous column, then a 2-px stroke at the value
        let (lo, hi) = match prev_row {
            Some(p) => (p.min(row), p.max(row)),
            None => (row, row),
        };
        for y in lo..=hi {
            img.set(y, x, fg);
        }
        let second = (row + 1).min(IMAGE_SIZE - 1);
        img.set(row, x, fg);
        img.set(second, x, fg);
        prev_row = Some(row);
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::CHROMA_BINS;

    fn track(kind: TrackKind, frames: usize, dims: usize, values: Vec<f64>) -> FeatureTrack<f64> {
        FeatureTrack {
            kind,
            frames,
            dims,
            values,
            nyquist_hz: 11_025.0,
        }
    }

    #[test]
    fn silence_waveplot_is_single_midline() {
        let t = track(TrackKind::Waveplot, 224, 2, vec![0.0; 448]);
        let img = render(&t, &Colormap::viridis(), "s").unwrap();
        let fg = Colormap::viridis().midpoint();
        let midline = amp_to_row(0.0);
        for y in 0..IMAGE_SIZE {
            for x in 0..IMAGE_SIZE {
                let expect = if y == midline { fg } else { [0, 0, 0] };
                assert_eq!(img.get(y, x), expect, "pixel ({y},{x})");
            }
        }
    }

    #[test]
    fn constant_heatmap_maps_to_lut_zero() {
        let t = track(TrackKind::Mfcc, 10, 4, vec![3.25; 40]);
        let img = render(&t, &Colormap::viridis(), "c").unwrap();
        let expect = Colormap::viridis().lut[0];
        for y in 0..IMAGE_SIZE {
            for x in 0..IMAGE_SIZE {
                assert_eq!(img.get(y, x), expect);
            }
        }
    }

    #[test]
    fn heatmap_min_max_hit_lut_ends() {
        // two-value track: min in frame 0, max in frame 1
        let t = track(TrackKind::Mfcc, 2, 1, vec![-4.0, 9.0]);
        let img = render(&t, &Colormap::viridis(), "mm").unwrap();
        let lut = Colormap::viridis().lut;
        assert_eq!(img.get(0, 0), lut[0]);
        assert_eq!(img.get(0, IMAGE_SIZE - 1), lut[255]);
    }

    #[test]
    fn chroma_band_row_has_maximal_luminance() {
        // chroma track with pitch class A (=9) at 1.0, light leakage elsewhere
        let frames = 8;
        let mut values = vec![0.0f64; frames * CHROMA_BINS];
        for f in 0..frames {
            for pc in 0..CHROMA_BINS {
                values[f * CHROMA_BINS + pc] = if pc == 9 { 1.0 } else { 0.2 };
            }
        }
        let t = track(TrackKind::Chromagram, frames, CHROMA_BINS, values);
        let img = render(&t, &Colormap::viridis(), "a").unwrap();
        let lum = |rgb: [u8; 3]| 0.2126 * rgb[0] as f64 + 0.7152 * rgb[1] as f64 + 0.0722 * rgb[2] as f64;
        // a row inside the pitch-class-9 band: dims 12, band d=9 covers rows
        // where 11 - floor(y*12/224) == 9
        let band_row = (2 * IMAGE_SIZE / CHROMA_BINS) + 1;
        let other_row = 0; // pitch class 11 band
        for x in 0..IMAGE_SIZE {
            assert!(lum(img.get(band_row, x)) > lum(img.get(other_row, x)));
            assert_eq!(img.get(band_row, x), Colormap::viridis().lut[255]);
        }
    }

    #[test]
    fn horizontal_flip_matches_time_reversed_render() {
        // frame count divides 224 so sample-hold aligns exactly
        let frames = 56;
        let dims = 3;
        let values: Vec<f64> = (0..frames * dims).map(|i| (i as f64 * 0.37).sin()).collect();
        let t = track(TrackKind::Mfcc, frames, dims, values);
        let fwd = render(&t, &Colormap::viridis(), "f").unwrap();
        let rev = render(&t.time_reversed(), &Colormap::viridis(), "f").unwrap();
        for y in 0..IMAGE_SIZE {
            for x in 0..IMAGE_SIZE {
                assert_eq!(fwd.get(y, x), rev.get(y, IMAGE_SIZE - 1 - x));
            }
        }
    }

    #[test]
    fn polyline_constant_value_draws_flat_stroke() {
        let t = track(TrackKind::SpectralCentroid, 5, 1, vec![5512.5; 5]);
        let img = render(&t, &Colormap::viridis(), "p").unwrap();
        let row = ((1.0 - 0.5) * 223.0f64).round() as usize;
        let fg = Colormap::viridis().midpoint();
        for x in 0..IMAGE_SIZE {
            assert_eq!(img.get(row, x), fg);
            assert_eq!(img.get(row + 1, x), fg);
            assert_eq!(img.get(row - 1, x), [0, 0, 0]);
            assert_eq!(img.get(row + 2, x), [0, 0, 0]);
        }
    }

    #[test]
    fn polyline_zero_hz_sits_on_bottom_rows() {
        let t = track(TrackKind::SpectralRolloff, 4, 1, vec![0.0; 4]);
        let img = render(&t, &Colormap::viridis(), "z").unwrap();
        let fg = Colormap::viridis().midpoint();
        for x in 0..IMAGE_SIZE {
            assert_eq!(img.get(IMAGE_SIZE - 1, x), fg);
        }
    }

    #[test]
    fn render_is_deterministic() {
        let values: Vec<f64> = (0..44 * 12).map(|i| (i as f64 * 0.11).cos()).collect();
        let t = track(TrackKind::Chromagram, 44, 12, values);
        let a = render(&t, &Colormap::viridis(), "d").unwrap();
        let b = render(&t, &Colormap::viridis(), "d").unwrap();
        assert_eq!(a.pixels(), b.pixels());
    }

    #[test]
    fn empty_track_is_rejected() {
        let t = track(TrackKind::Mfcc, 0, 4, vec![]);
        assert!(matches!(
            render(&t, &Colormap::viridis(), "e"),
            Err(ImageError::EmptyTrack)
        ));
    }
}
