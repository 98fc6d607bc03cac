//! Command-line front end for the audio-image fusion pipeline.
//!
//! Exit codes: 0 success, 1 validation failure, 2 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use maivar_core::dsp::TrackKind;
use maivar_core::fusion::{ReductionMode, Split};

use maivar_cli::commands::{self, eval::EvalModality};
use maivar_cli::config::TrainSettings;
use maivar_cli::error::CliResult;

#[derive(Parser)]
#[command(
    name = "maivar",
    about = "Audio-image action recognition: representations, embeddings, unimodal and fusion training",
    version
)]
struct Cli {
    /// Worker threads for per-clip stages (0 uses all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

fn parse_kind(s: &str) -> Result<TrackKind, String> {
    TrackKind::from_slug(s).ok_or_else(|| {
        format!(
            "unknown representation {s:?}; expected one of {}",
            TrackKind::ALL
                .iter()
                .map(|k| k.slug())
                .collect::<Vec<_>>()
                .join(", ")
        )
    })
}

fn parse_reduction(s: &str) -> Result<ReductionMode, String> {
    match s {
        "mean_segments" => Ok(ReductionMode::MeanSegments),
        "flatten" => Ok(ReductionMode::Flatten),
        other => Err(format!("expected mean_segments or flatten, got {other:?}")),
    }
}

fn parse_split(s: &str) -> Result<Split, String> {
    match s {
        "train" => Ok(Split::Train),
        "test" => Ok(Split::Test),
        other => Err(format!("expected train or test, got {other:?}")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic complementary dataset (WAVs, frame PNGs, manifest).
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        classes: usize,
        #[arg(long, default_value_t = 50)]
        clips_per_class: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        frames_per_clip: usize,
        #[arg(long, default_value_t = 1.0)]
        duration_s: f64,
    },
    /// Render one audio-image per clip.
    Repr {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        kind: TrackKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract audio and video embeddings.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        kind: TrackKind,
        /// Directory holding the rendered audio-images.
        #[arg(long)]
        images: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the audio, video and transfer-initialized fusion models.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        audio_emb: PathBuf,
        #[arg(long)]
        video_emb: PathBuf,
        /// Representation name recorded in the report.
        #[arg(long, value_parser = parse_kind)]
        kind: TrackKind,
        #[arg(long)]
        out: PathBuf,
        /// Base seed; audio/video/fusion derive seed, seed+1, seed+2.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional key=value run-config file.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Accuracy of a saved model on one split.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        modality: EvalModality,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        audio_emb: PathBuf,
        #[arg(long)]
        video_emb: PathBuf,
        #[arg(long, default_value = "test", value_parser = parse_split)]
        split: Split,
        #[arg(long, default_value = "mean_segments", value_parser = parse_reduction)]
        reduction: ReductionMode,
    },
    /// Build the comparison table from run directories.
    Report {
        run_dirs: Vec<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the built-in verification suite.
    Selftest {
        /// Corrupt one check to exercise the failure path.
        #[arg(long, default_value_t = false)]
        inject_fault: bool,
    },
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Synth {
            out,
            classes,
            clips_per_class,
            seed,
            frames_per_clip,
            duration_s,
        } => {
            let opts = commands::synth::SynthOptions {
                out_dir: out,
                classes,
                clips_per_class,
                seed,
                frames_per_clip,
                duration_s,
                ..Default::default()
            };
            let manifest = commands::synth::run(&opts)?;
            println!("wrote {}", manifest.display());
            Ok(())
        }
        Command::Repr { manifest, kind, out } => {
            let written = commands::repr::run(&manifest, kind, &out)?;
            println!("rendered {} images to {}", written.len(), out.display());
            Ok(())
        }
        Command::Extract {
            manifest,
            kind,
            images,
            seed,
            out,
        } => {
            let output = commands::extract::run(&manifest, kind, &images, seed, &out)?;
            println!(
                "wrote {} and {}",
                output.audio_path.display(),
                output.video_path.display()
            );
            Ok(())
        }
        Command::Train {
            manifest,
            audio_emb,
            video_emb,
            kind,
            out,
            seed,
            config,
        } => {
            let mut settings = TrainSettings::default().with_base_seed(seed);
            if let Some(path) = &config {
                settings.apply_config_file(path)?;
            }
            let output = commands::train::run(
                &manifest,
                &audio_emb,
                &video_emb,
                kind.slug(),
                &settings,
                &out,
            )?;
            println!(
                "audio {:.4}  video {:.4}  fusion {:.4}  (report: {})",
                output.report.audio_test_accuracy,
                output.report.video_test_accuracy,
                output.report.fusion_test_accuracy,
                output.report_path.display()
            );
            Ok(())
        }
        Command::Eval {
            model,
            modality,
            manifest,
            audio_emb,
            video_emb,
            split,
            reduction,
        } => {
            let accuracy = commands::eval::run(
                &model, modality, &manifest, &audio_emb, &video_emb, split, reduction,
            )?;
            println!("{accuracy:.6}");
            Ok(())
        }
        Command::Report { run_dirs, out } => {
            let output = commands::report::run(&run_dirs, &out)?;
            print!("{}", output.markdown);
            Ok(())
        }
        Command::Selftest { inject_fault } => commands::selftest::run(inject_fault),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
        {
            eprintln!("error: cannot size worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
