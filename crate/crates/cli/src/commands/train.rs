//! `train`: the full three-phase run from embedding files.
//!
//! Writes `audio.model`, `video.model`, `fusion.model`, `report.json` and
//! `curves.csv` into the output directory. All inconsistencies between the
//! manifest and the embedding files surface before training starts.

use std::io::Write;
use std::path::{Path, PathBuf};

use maivar_core::embed::{read_embeddings, Modality};
use maivar_core::fusion::{run_maivar, ModalityData, RunReport};
use maivar_core::neural::save_model;
use maivar_core::Scalar;

use crate::config::TrainSettings;
use crate::error::CliResult;
use crate::manifest::DatasetManifest;

#[derive(Debug)]
pub struct TrainOutput {
    pub report: RunReport,
    pub report_path: PathBuf,
}

pub fn run(
    manifest_path: &Path,
    audio_emb: &Path,
    video_emb: &Path,
    kind_name: &str,
    settings: &TrainSettings,
    out_dir: &Path,
) -> CliResult<TrainOutput> {
    let manifest = DatasetManifest::load(manifest_path)?;
    manifest.require_both_splits()?;
    std::fs::create_dir_all(out_dir)?;

    let audio = read_embeddings(audio_emb, Modality::Audio)?;
    let video = read_embeddings(video_emb, Modality::Video)?;
    let data = ModalityData::<Scalar>::assemble(
        &manifest.clip_refs(),
        &audio,
        &video,
        manifest.classes.len(),
        settings.run.reduction,
    )?;

    let (report, models) = run_maivar(&data, &settings.run, kind_name)?;

    save_model(&models.audio, &out_dir.join("audio.model"))?;
    save_model(&models.video, &out_dir.join("video.model"))?;
    save_model(&models.fusion, &out_dir.join("fusion.model"))?;

    let report_path = out_dir.join("report.json");
    let json = serde_json::to_string_pretty(&report)
        .expect("report serialization is infallible for finite values");
    std::fs::write(&report_path, json)?;

    let mut curves = std::fs::File::create(out_dir.join("curves.csv"))?;
    writeln!(curves, "model,epoch,loss,accuracy")?;
    for (name, curve) in [
        ("audio", &report.audio_curve),
        ("video", &report.video_curve),
        ("fusion", &report.fusion_curve),
    ] {
        for m in curve {
            writeln!(curves, "{name},{},{},{}", m.epoch, m.loss, m.accuracy)?;
        }
    }

    Ok(TrainOutput {
        report,
        report_path,
    })
}
