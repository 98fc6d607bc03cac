//! `extract`: audio-image and video-frame features to embedding files.
//!
//! Audio embeddings come from the rendered `<clip_id>.<kind>.png` images in
//! the `--images` directory. Video embeddings come from each entry's
//! `video_source`: a directory of frame PNGs goes through the toy
//! extractor, a `.emb` file reference passes the precomputed record through
//! unmodified.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use maivar_core::dsp::TrackKind;
use maivar_core::embed::{
    read_embeddings, write_embeddings, EmbeddingFile, Modality, ToyExtractor, ToyExtractorSpec,
};
use maivar_core::img::{normalize, read_png};
use maivar_core::Scalar;
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::manifest::DatasetManifest;

#[derive(Debug)]
pub struct ExtractOutput {
    pub audio_path: PathBuf,
    pub video_path: PathBuf,
}

enum VideoSource {
    Frames(Vec<PathBuf>),
    Precomputed(PathBuf),
}

fn list_frame_pngs(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut frames: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "png"))
        .collect();
    frames.sort();
    Ok(frames)
}

pub fn run(
    manifest_path: &Path,
    kind: TrackKind,
    images_dir: &Path,
    seed: u64,
    out_dir: &Path,
) -> CliResult<ExtractOutput> {
    let manifest = DatasetManifest::load(manifest_path)?;
    std::fs::create_dir_all(out_dir)?;

    // fail-fast validation of every input before any extraction work
    let mut sources = Vec::with_capacity(manifest.entries.len());
    let mut missing = Vec::new();
    for entry in &manifest.entries {
        let image_path = images_dir.join(format!("{}.{}.png", entry.clip_id, kind.slug()));
        if !image_path.is_file() {
            missing.push(format!("{}: no image {}", entry.clip_id, image_path.display()));
        }
        let video_path = manifest.resolve(&entry.video_source);
        let source = if video_path.extension().is_some_and(|ext| ext == "emb") {
            if !video_path.is_file() {
                missing.push(format!(
                    "{}: no embedding file {}",
                    entry.clip_id,
                    video_path.display()
                ));
            }
            VideoSource::Precomputed(video_path)
        } else {
            match list_frame_pngs(&video_path) {
                Ok(frames) if !frames.is_empty() => VideoSource::Frames(frames),
                _ => {
                    missing.push(format!(
                        "{}: no frames in {}",
                        entry.clip_id,
                        video_path.display()
                    ));
                    VideoSource::Frames(Vec::new())
                }
            }
        };
        sources.push((entry.clip_id.clone(), image_path, source));
    }
    if !missing.is_empty() {
        for m in &missing {
            eprintln!("extract: missing input: {m}");
        }
        return Err(CliError::validation(format!(
            "{} clips have missing inputs",
            missing.len()
        )));
    }

    // precomputed files are read once and shared
    let mut precomputed: HashMap<PathBuf, EmbeddingFile> = HashMap::new();
    for (_, _, source) in &sources {
        if let VideoSource::Precomputed(path) = source {
            if !precomputed.contains_key(path) {
                precomputed.insert(path.clone(), read_embeddings(path, Modality::Video)?);
            }
        }
    }

    type ClipRecord = (String, Vec<f32>, Vec<f32>);
    let extractor = ToyExtractor::new(ToyExtractorSpec::new(seed));
    let records: Vec<CliResult<ClipRecord>> = sources
        .par_iter()
        .map(|(clip_id, image_path, source)| {
            let image = read_png(image_path, clip_id, kind)?;
            let tensor = normalize::<Scalar>(&image);
            let audio = extractor.extract_audio(clip_id, &tensor);

            let video_values = match source {
                VideoSource::Frames(frame_paths) => {
                    let mut tensors = Vec::with_capacity(frame_paths.len());
                    for fp in frame_paths {
                        let frame = read_png(fp, clip_id, kind)?;
                        tensors.push(normalize::<Scalar>(&frame));
                    }
                    extractor.extract_video(clip_id, &tensors)?.values().to_vec()
                }
                VideoSource::Precomputed(path) => precomputed[path]
                    .get(clip_id)
                    .ok_or_else(|| {
                        CliError::validation(format!(
                            "{clip_id}: not found in {}",
                            path.display()
                        ))
                    })?
                    .to_vec(),
            };
            Ok((clip_id.clone(), audio.values().to_vec(), video_values))
        })
        .collect();

    let mut audio_file = EmbeddingFile::new(Modality::Audio);
    let mut video_file = EmbeddingFile::new(Modality::Video);
    for record in records {
        let (clip_id, audio_values, video_values) = record?;
        audio_file.push(clip_id.clone(), audio_values)?;
        video_file.push(clip_id, video_values)?;
    }

    let audio_path = out_dir.join(format!("audio.{}.emb", kind.slug()));
    let video_path = out_dir.join("video.emb");
    write_embeddings(&audio_file, &audio_path)?;
    write_embeddings(&video_file, &video_path)?;
    Ok(ExtractOutput {
        audio_path,
        video_path,
    })
}
