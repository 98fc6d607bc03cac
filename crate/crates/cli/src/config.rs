//! Declarative run configuration: `key = value` lines, `#` comments.
//!
//! Recognized keys: `hidden` (comma-separated widths), `reduction`
//! (`mean_segments` | `flatten`), and per-model `audio.` / `video.` /
//! `fusion.` prefixes with `lr`, `batch`, `epochs`, `l1`, `seed`,
//! `shuffle`.

use std::path::Path;

use maivar_core::fusion::{ReductionMode, RunMaivarConfig};
use maivar_core::neural::TrainConfig;

use crate::error::{CliError, CliResult};

/// Training settings: the run config plus the base-seed derivation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSettings {
    pub run: RunMaivarConfig,
}

impl Default for TrainSettings {
    fn default() -> Self {
        let mut run = RunMaivarConfig::default();
        run.audio.epochs = 40;
        run.video.epochs = 40;
        run.fusion.epochs = 60;
        Self { run }
    }
}

impl TrainSettings {
    /// Derives per-model seeds from one base seed: audio gets `seed`,
    /// video `seed + 1`, fusion `seed + 2`.
    pub fn with_base_seed(mut self, seed: u64) -> Self {
        self.run.audio.seed = seed;
        self.run.video.seed = seed.wrapping_add(1);
        self.run.fusion.seed = seed.wrapping_add(2);
        self
    }

    pub fn apply_config_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::validation(format!("config line {}: expected key = value", lineno + 1))
            })?;
            self.apply_kv(key.trim(), value.trim()).map_err(|e| {
                CliError::validation(format!("config line {}: {e}", lineno + 1))
            })?;
        }
        Ok(())
    }

    pub fn apply_kv(&mut self, key: &str, value: &str) -> CliResult<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T>
        where
            T::Err: std::fmt::Display,
        {
            value
                .parse::<T>()
                .map_err(|e| CliError::validation(format!("{key}: {e}")))
        }

        match key {
            "hidden" => {
                let dims: Vec<usize> = value
                    .split(',')
                    .map(|v| parse::<usize>("hidden", v.trim()))
                    .collect::<CliResult<_>>()?;
                if dims.is_empty() || dims.contains(&0) {
                    return Err(CliError::validation("hidden: widths must be positive"));
                }
                self.run.hidden_dims = dims;
            }
            "reduction" => {
                self.run.reduction = match value {
                    "mean_segments" => ReductionMode::MeanSegments,
                    "flatten" => ReductionMode::Flatten,
                    other => {
                        return Err(CliError::validation(format!(
                            "reduction: expected mean_segments or flatten, got {other:?}"
                        )))
                    }
                };
            }
            _ => {
                let (model, field) = key.split_once('.').ok_or_else(|| {
                    CliError::validation(format!("unknown config key {key:?}"))
                })?;
                let cfg: &mut TrainConfig = match model {
                    "audio" => &mut self.run.audio,
                    "video" => &mut self.run.video,
                    "fusion" => &mut self.run.fusion,
                    other => {
                        return Err(CliError::validation(format!(
                            "unknown model prefix {other:?}"
                        )))
                    }
                };
                match field {
                    "lr" => cfg.learning_rate = parse(key, value)?,
                    "batch" => cfg.batch_size = parse(key, value)?,
                    "epochs" => cfg.epochs = parse(key, value)?,
                    "l1" => cfg.l1_lambda = parse(key, value)?,
                    "seed" => cfg.seed = parse(key, value)?,
                    "shuffle" => cfg.shuffle = parse(key, value)?,
                    other => {
                        return Err(CliError::validation(format!(
                            "unknown config field {other:?} for {model}"
                        )))
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_stated_hyperparameters() {
        let s = TrainSettings::default();
        assert_eq!(s.run.audio.learning_rate, 3e-4);
        assert_eq!(s.run.video.learning_rate, 3e-4);
        assert_eq!(s.run.fusion.learning_rate, 1e-4);
        assert_eq!(s.run.audio.batch_size, 16);
        assert_eq!(s.run.fusion.batch_size, 128);
        assert_eq!(s.run.hidden_dims, vec![512]);
    }

    #[test]
    fn base_seed_derivation() {
        let s = TrainSettings::default().with_base_seed(100);
        assert_eq!(s.run.audio.seed, 100);
        assert_eq!(s.run.video.seed, 101);
        assert_eq!(s.run.fusion.seed, 102);
    }

    #[test]
    fn config_file_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(
            &path,
            "# comment\nhidden = 64, 32\nreduction = flatten\naudio.epochs = 3\nfusion.lr = 5e-5\n",
        )
        .unwrap();
        let mut s = TrainSettings::default();
        s.apply_config_file(&path).unwrap();
        assert_eq!(s.run.hidden_dims, vec![64, 32]);
        assert_eq!(s.run.reduction, ReductionMode::Flatten);
        assert_eq!(s.run.audio.epochs, 3);
        assert_eq!(s.run.fusion.learning_rate, 5e-5);
    }

    #[test]
    fn unknown_keys_are_validation_errors() {
        let mut s = TrainSettings::default();
        assert_eq!(s.apply_kv("nope", "1").unwrap_err().exit_code(), 1);
        assert_eq!(s.apply_kv("audio.nope", "1").unwrap_err().exit_code(), 1);
        assert_eq!(s.apply_kv("reduction", "bogus").unwrap_err().exit_code(), 1);
    }
}
