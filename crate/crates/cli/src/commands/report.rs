//! `report`: comparison table across run directories.
//!
//! One row per representation with audio-only and fusion accuracies, the
//! video-only accuracy as a caption, the best fusion value bolded, and both
//! the best-audio and best-fusion representations called out (unimodal
//! ranking does not predict post-fusion ranking).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use maivar_core::dsp::TrackKind;
use maivar_core::fusion::RunReport;

use crate::error::{CliError, CliResult};

pub struct ReportOutput {
    pub markdown: String,
    pub csv: String,
    pub markdown_path: PathBuf,
    pub csv_path: PathBuf,
}

fn canonical_order(slug: &str) -> usize {
    TrackKind::ALL
        .iter()
        .position(|k| k.slug() == slug)
        .unwrap_or(TrackKind::ALL.len())
}

fn display_name(slug: &str) -> String {
    TrackKind::from_slug(slug)
        .map(|k| k.display_name().to_string())
        .unwrap_or_else(|| slug.to_string())
}

pub fn load_reports(run_dirs: &[PathBuf]) -> CliResult<Vec<RunReport>> {
    let mut reports = Vec::with_capacity(run_dirs.len());
    for dir in run_dirs {
        let path = dir.join("report.json");
        let text = std::fs::read_to_string(&path).map_err(|e| {
            CliError::validation(format!("missing report.json in {}: {e}", dir.display()))
        })?;
        let report: RunReport = serde_json::from_str(&text).map_err(|e| {
            CliError::validation(format!("bad report.json in {}: {e}", dir.display()))
        })?;
        reports.push(report);
    }
    if reports.is_empty() {
        return Err(CliError::validation("no run directories given"));
    }
    Ok(reports)
}

pub fn build(reports: &[RunReport]) -> (String, String) {
    let mut rows: Vec<&RunReport> = reports.iter().collect();
    rows.sort_by_key(|r| canonical_order(&r.representation));

    let best_fusion = rows
        .iter()
        .max_by(|a, b| a.fusion_test_accuracy.total_cmp(&b.fusion_test_accuracy))
        .expect("non-empty");
    let best_audio = rows
        .iter()
        .max_by(|a, b| a.audio_test_accuracy.total_cmp(&b.audio_test_accuracy))
        .expect("non-empty");
    let pct = |v: f64| format!("{:.2}", v * 100.0);

    let mut md = String::new();
    writeln!(md, "# Audio-image representation comparison\n").unwrap();
    writeln!(
        md,
        "_Video-only accuracy: {}%_\n",
        pct(rows[0].video_test_accuracy)
    )
    .unwrap();
    writeln!(md, "| Representation | Audio | Fusion (Audio+Video) |").unwrap();
    writeln!(md, "| --- | --- | --- |").unwrap();
    for r in &rows {
        let fusion_cell = if std::ptr::eq(*r, *best_fusion) {
            format!("**{}**", pct(r.fusion_test_accuracy))
        } else {
            pct(r.fusion_test_accuracy)
        };
        writeln!(
            md,
            "| {} | {} | {} |",
            display_name(&r.representation),
            pct(r.audio_test_accuracy),
            fusion_cell
        )
        .unwrap();
    }
    writeln!(md).unwrap();
    writeln!(
        md,
        "Best audio-only representation: {} ({}%)",
        display_name(&best_audio.representation),
        pct(best_audio.audio_test_accuracy)
    )
    .unwrap();
    writeln!(
        md,
        "Best fusion representation: {} ({}%)",
        display_name(&best_fusion.representation),
        pct(best_fusion.fusion_test_accuracy)
    )
    .unwrap();

    let mut csv = String::from("representation,audio,fusion\n");
    for r in &rows {
        writeln!(
            csv,
            "{},{},{}",
            r.representation,
            pct(r.audio_test_accuracy),
            pct(r.fusion_test_accuracy)
        )
        .unwrap();
    }
    (md, csv)
}

pub fn run(run_dirs: &[PathBuf], out_dir: &Path) -> CliResult<ReportOutput> {
    let reports = load_reports(run_dirs)?;
    let (markdown, csv) = build(&reports);
    std::fs::create_dir_all(out_dir)?;
    let markdown_path = out_dir.join("report.md");
    let csv_path = out_dir.join("report.csv");
    std::fs::write(&markdown_path, &markdown)?;
    std::fs::write(&csv_path, &csv)?;
    Ok(ReportOutput {
        markdown,
        csv,
        markdown_path,
        csv_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use maivar_core::fusion::{RunMaivarConfig, TransferReport};

    fn report(representation: &str, audio: f64, video: f64, fusion: f64) -> RunReport {
        RunReport {
            representation: representation.into(),
            n_classes: 4,
            audio_test_accuracy: audio,
            video_test_accuracy: video,
            fusion_test_accuracy: fusion,
            audio_curve: vec![],
            video_curve: vec![],
            fusion_curve: vec![],
            transfer: TransferReport {
                layers: vec![],
                copied_params: 0,
                fresh_params: 0,
            },
            transfer_identity_ok: true,
            config: RunMaivarConfig::default(),
        }
    }

    #[test]
    fn rows_follow_canonical_order_and_best_fusion_is_bold() {
        let reports = vec![
            report("chromagram", 0.1548, 0.7567, 0.8791),
            report("waveplot", 0.1208, 0.7567, 0.8621),
            report("mfcc_scaled", 0.1743, 0.7567, 0.8611),
        ];
        let (md, csv) = build(&reports);
        let waveplot_pos = md.find("Waveplot").unwrap();
        let scaled_pos = md.find("MFCCs Feature Scaling").unwrap();
        let chroma_pos = md.find("| Chromagram").unwrap();
        assert!(waveplot_pos < scaled_pos && scaled_pos < chroma_pos);
        assert!(md.contains("**87.91**"));
        assert!(md.contains("_Video-only accuracy: 75.67%_"));
        // the unimodal winner differs from the fusion winner; both rendered
        assert!(md.contains("Best audio-only representation: MFCCs Feature Scaling (17.43%)"));
        assert!(md.contains("Best fusion representation: Chromagram (87.91%)"));
        assert!(csv.starts_with("representation,audio,fusion\n"));
        assert!(csv.contains("chromagram,15.48,87.91"));
    }

    #[test]
    fn missing_report_is_validation_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_reports(&[dir.path().join("absent")]).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
