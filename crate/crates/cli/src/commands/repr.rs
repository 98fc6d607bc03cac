//! `repr`: render one audio-image per manifest entry.

use std::path::{Path, PathBuf};

use maivar_core::dsp::{compute_track, TrackKind, TrackParams};
use maivar_core::img::{render, write_png, Colormap};
use maivar_core::wav::ingest_wav;
use maivar_core::Scalar;
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::manifest::DatasetManifest;

pub fn run(manifest_path: &Path, kind: TrackKind, out_dir: &Path) -> CliResult<Vec<PathBuf>> {
    let manifest = DatasetManifest::load(manifest_path)?;
    std::fs::create_dir_all(out_dir)?;
    let params = TrackParams::default();
    let cmap = Colormap::viridis();

    let results: Vec<(String, CliResult<PathBuf>)> = manifest
        .entries
        .par_iter()
        .map(|entry| {
            let result = (|| -> CliResult<PathBuf> {
                let wav_path = manifest.resolve(&entry.audio_path);
                let clip = ingest_wav::<Scalar>(&wav_path, &entry.clip_id)?;
                let track = compute_track(&clip, kind, &params)?;
                let image = render(&track, &cmap, &entry.clip_id)?;
                let out_path = out_dir.join(image.file_name());
                write_png(&image, &out_path)?;
                Ok(out_path)
            })();
            (entry.clip_id.clone(), result)
        })
        .collect();

    let mut written = Vec::new();
    let mut failures = Vec::new();
    for (clip_id, result) in results {
        match result {
            Ok(path) => written.push(path),
            Err(e) => failures.push(format!("{clip_id}: {e}")),
        }
    }
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("repr error: {f}");
        }
        return Err(CliError::runtime(format!(
            "{} of {} clips failed",
            failures.len(),
            manifest.entries.len()
        )));
    }
    Ok(written)
}
