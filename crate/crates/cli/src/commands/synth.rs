//! Synthetic complementary dataset generation.
//!
//! Audio and video are deliberately complementary: class `c` gets the tone
//! `220 * 2^(a(c)/12)` Hz with `a(c) = min(c, K/2)`, so the upper half of
//! the classes shares one tone and is indistinguishable by audio alone;
//! the video patch pattern is shared across the lower half and distinct for
//! the upper half. Neither modality can separate all classes, their fusion
//! can.

use std::path::PathBuf;

use maivar_core::dsp::TrackKind;
use maivar_core::img::{AudioImage, CHANNELS, IMAGE_SIZE};
use maivar_core::wav::write_wav_mono16;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::manifest::{DatasetManifest, ManifestEntry};

pub struct SynthOptions {
    pub out_dir: PathBuf,
    pub classes: usize,
    pub clips_per_class: usize,
    pub seed: u64,
    pub frames_per_clip: usize,
    pub duration_s: f64,
    pub sample_rate_hz: u32,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("synth"),
            classes: 4,
            clips_per_class: 50,
            seed: 0,
            frames_per_clip: 4,
            duration_s: 1.0,
            sample_rate_hz: 22_050,
        }
    }
}

/// Tone index per class: distinct below `K/2`, shared above.
fn audio_tone_index(class: usize, n_classes: usize) -> usize {
    class.min(n_classes / 2)
}

/// Video pattern id per class: shared below `K/2`, distinct above.
fn video_pattern_id(class: usize, n_classes: usize) -> usize {
    if class < n_classes / 2 {
        n_classes
    } else {
        class
    }
}

pub fn tone_hz(class: usize, n_classes: usize) -> f64 {
    220.0 * 2f64.powf(audio_tone_index(class, n_classes) as f64 / 12.0)
}

fn clip_samples(opts: &SynthOptions, class: usize, clip_index: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(10_000 + clip_index);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let freq = tone_hz(class, opts.classes);
    let n = (opts.duration_s * opts.sample_rate_hz as f64) as usize;
    (0..n)
        .map(|i| {
            let t = i as f64 / opts.sample_rate_hz as f64;
            let tone = 0.5 * (std::f64::consts::TAU * freq * t + phase).sin();
            tone + rng.gen_range(-0.05..0.05)
        })
        .collect()
}

/// Base colors of the 8x8 patch grid for one pattern id.
fn pattern_palette(seed: u64, pattern_id: usize) -> Vec<[u8; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1_000 + pattern_id as u64);
    (0..64)
        .map(|_| [rng.gen_range(30..=225), rng.gen_range(30..=225), rng.gen_range(30..=225)])
        .collect()
}

fn render_frame(palette: &[[u8; 3]], rng: &mut ChaCha8Rng) -> AudioImage {
    let patch = IMAGE_SIZE / 8;
    // per-frame jitter per patch keeps clips of one class distinct
    let jitter: Vec<[i16; 3]> = (0..64)
        .map(|_| [rng.gen_range(-8..=8), rng.gen_range(-8..=8), rng.gen_range(-8..=8)])
        .collect();
    let mut pixels = vec![0u8; IMAGE_SIZE * IMAGE_SIZE * CHANNELS];
    for y in 0..IMAGE_SIZE {
        for x in 0..IMAGE_SIZE {
            let p = (y / patch) * 8 + x / patch;
            let idx = (y * IMAGE_SIZE + x) * CHANNELS;
            for c in 0..CHANNELS {
                let v = palette[p][c] as i16 + jitter[p][c];
                pixels[idx + c] = v.clamp(0, 255) as u8;
            }
        }
    }
    AudioImage::new("frame", TrackKind::Waveplot, pixels).expect("buffer sized above")
}

pub fn run(opts: &SynthOptions) -> CliResult<PathBuf> {
    if opts.classes < 2 {
        return Err(CliError::validation("need at least 2 classes"));
    }
    if opts.clips_per_class < 5 {
        return Err(CliError::validation(
            "need at least 5 clips per class for an 80/20 split",
        ));
    }
    if opts.frames_per_clip == 0 || opts.duration_s <= 0.0 {
        return Err(CliError::validation(
            "frames_per_clip and duration_s must be positive",
        ));
    }
    let audio_dir = opts.out_dir.join("audio");
    let frames_dir = opts.out_dir.join("frames");
    std::fs::create_dir_all(&audio_dir)?;
    std::fs::create_dir_all(&frames_dir)?;

    let train_per_class = (opts.clips_per_class * 4).div_ceil(5);
    let mut jobs = Vec::new();
    let mut entries = Vec::new();
    for class in 0..opts.classes {
        for i in 0..opts.clips_per_class {
            let clip_id = format!("c{class:03}-{i:03}");
            let split = if i < train_per_class { "train" } else { "test" };
            entries.push(ManifestEntry {
                clip_id: clip_id.clone(),
                audio_path: format!("audio/{clip_id}.wav"),
                video_source: format!("frames/{clip_id}"),
                label: format!("c{class:03}"),
                split: split.to_string(),
            });
            jobs.push((class, i, clip_id));
        }
    }

    jobs.par_iter().try_for_each(|(class, i, clip_id)| -> CliResult<()> {
        let clip_index = (*class * opts.clips_per_class + *i) as u64;
        let samples = clip_samples(opts, *class, clip_index);
        write_wav_mono16(
            &audio_dir.join(format!("{clip_id}.wav")),
            &samples,
            opts.sample_rate_hz,
        )?;

        let palette = pattern_palette(opts.seed, video_pattern_id(*class, opts.classes));
        let clip_frames_dir = frames_dir.join(clip_id);
        std::fs::create_dir_all(&clip_frames_dir)?;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(20_000 + clip_index);
        for f in 0..opts.frames_per_clip {
            let frame = render_frame(&palette, &mut rng);
            maivar_core::img::write_png(&frame, &clip_frames_dir.join(format!("f{f:03}.png")))?;
        }
        Ok(())
    })?;

    let manifest = DatasetManifest::from_entries(opts.out_dir.clone(), entries)?;
    let manifest_path = opts.out_dir.join("manifest.csv");
    manifest.save(&manifest_path)?;
    Ok(manifest_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complementary_structure() {
        // K = 4: audio tones distinct for {0, 1}, shared for {2, 3}
        assert_eq!(audio_tone_index(0, 4), 0);
        assert_eq!(audio_tone_index(1, 4), 1);
        assert_eq!(audio_tone_index(2, 4), 2);
        assert_eq!(audio_tone_index(3, 4), 2);
        // video patterns shared for {0, 1}, distinct for {2, 3}
        assert_eq!(video_pattern_id(0, 4), 4);
        assert_eq!(video_pattern_id(1, 4), 4);
        assert_eq!(video_pattern_id(2, 4), 2);
        assert_eq!(video_pattern_id(3, 4), 3);
    }

    #[test]
    fn class_zero_tone_is_220_hz() {
        assert!((tone_hz(0, 4) - 220.0).abs() < 1e-12);
        assert!((tone_hz(1, 4) - 233.0818807590449).abs() < 1e-9);
    }

    #[test]
    fn generated_counts_and_split() {
        let dir = tempfile::tempdir().unwrap();
        let opts = SynthOptions {
            out_dir: dir.path().join("ds"),
            classes: 3,
            clips_per_class: 10,
            seed: 1,
            frames_per_clip: 2,
            duration_s: 0.15,
            ..Default::default()
        };
        let manifest_path = run(&opts).unwrap();
        let m = DatasetManifest::load(&manifest_path).unwrap();
        assert_eq!(m.entries.len(), 30);
        let train = m.entries.iter().filter(|e| e.split == "train").count();
        assert_eq!(train, 24); // 80% of 10, per class
        assert_eq!(m.classes.len(), 3);
        // every referenced file exists
        for e in &m.entries {
            assert!(m.resolve(&e.audio_path).is_file());
            let frames: Vec<_> = std::fs::read_dir(m.resolve(&e.video_source))
                .unwrap()
                .collect();
            assert_eq!(frames.len(), 2);
        }
    }

    #[test]
    fn regeneration_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let mk = |name: &str| SynthOptions {
            out_dir: dir.path().join(name),
            classes: 2,
            clips_per_class: 5,
            seed: 9,
            frames_per_clip: 1,
            duration_s: 0.1,
            ..Default::default()
        };
        run(&mk("a")).unwrap();
        run(&mk("b")).unwrap();
        let wav_a = std::fs::read(dir.path().join("a/audio/c000-000.wav")).unwrap();
        let wav_b = std::fs::read(dir.path().join("b/audio/c000-000.wav")).unwrap();
        assert_eq!(wav_a, wav_b);
        let png_a = std::fs::read(dir.path().join("a/frames/c001-004/f000.png")).unwrap();
        let png_b = std::fs::read(dir.path().join("b/frames/c001-004/f000.png")).unwrap();
        assert_eq!(png_a, png_b);
    }
}
