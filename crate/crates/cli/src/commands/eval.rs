//! `eval`: accuracy of a saved model on one split of one modality.

use std::path::Path;

use maivar_core::embed::{read_embeddings, Modality};
use maivar_core::fusion::{ModalityData, ReductionMode, Split};
use maivar_core::neural::{evaluate, load_model};
use maivar_core::{Model, Scalar};

use crate::error::{CliError, CliResult};
use crate::manifest::DatasetManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalModality {
    Audio,
    Video,
    Fusion,
}

impl std::str::FromStr for EvalModality {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "audio" => Ok(EvalModality::Audio),
            "video" => Ok(EvalModality::Video),
            "fusion" => Ok(EvalModality::Fusion),
            other => Err(format!("expected audio, video or fusion, got {other:?}")),
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run(
    model_path: &Path,
    modality: EvalModality,
    manifest_path: &Path,
    audio_emb: &Path,
    video_emb: &Path,
    split: Split,
    reduction: ReductionMode,
) -> CliResult<f64> {
    let manifest = DatasetManifest::load(manifest_path)?;
    let audio = read_embeddings(audio_emb, Modality::Audio)?;
    let video = read_embeddings(video_emb, Modality::Video)?;
    let refs = manifest.clip_refs();
    if !refs.iter().any(|r| r.split == split) {
        return Err(CliError::validation("requested split has no entries"));
    }
    let data = ModalityData::<Scalar>::assemble(
        &refs,
        &audio,
        &video,
        manifest.classes.len(),
        reduction,
    )?;
    let batch = match (modality, split) {
        (EvalModality::Audio, Split::Train) => &data.audio_train,
        (EvalModality::Audio, Split::Test) => &data.audio_test,
        (EvalModality::Video, Split::Train) => &data.video_train,
        (EvalModality::Video, Split::Test) => &data.video_test,
        (EvalModality::Fusion, Split::Train) => &data.fusion_train,
        (EvalModality::Fusion, Split::Test) => &data.fusion_test,
    };
    let model: Model = load_model(model_path)?;
    if model.d_in() != batch.d_in {
        return Err(CliError::validation(format!(
            "model expects input dim {}, {} data has {}",
            model.d_in(),
            match modality {
                EvalModality::Audio => "audio",
                EvalModality::Video => "video",
                EvalModality::Fusion => "fusion",
            },
            batch.d_in
        )));
    }
    Ok(evaluate(&model, batch)?)
}
