use std::path::{Path, PathBuf};

use certainty_core::experiments::{ExperimentKind, Learner};
use certainty_core::models::{KappaVariant, TreeParams};
use certainty_core::prosody::TrackerConfig;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Everything a batch run depends on. Loaded from an optional JSON file and
/// then overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    /// Defaults to `lexicon.json` next to the manifest.
    pub lexicon: Option<PathBuf>,
    pub tracker: TrackerConfig,
    /// `A`..`E`, `nonprosodic`, or the path of a JSON feature-set file.
    pub feature_set: String,
    pub learner: Learner,
    pub tree: TreeParams,
    pub kappa: KappaVariant,
    pub experiment: Option<ExperimentKind>,
    pub output: PathBuf,
    /// Analysis cache; defaults to `cache/` inside the output directory.
    pub cache_dir: Option<PathBuf>,
    pub no_cache: bool,
    pub seed: u64,
    /// Keep per-utterance predictions in perceived reports.
    pub scatter: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            lexicon: None,
            tracker: TrackerConfig::default(),
            feature_set: "E".into(),
            learner: Learner::default(),
            tree: TreeParams::default(),
            kappa: KappaVariant::default(),
            experiment: None,
            output: PathBuf::from("out"),
            cache_dir: None,
            no_cache: false,
            seed: 0,
            scatter: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LearnerArg {
    Linear,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KappaArg {
    Pairwise,
    Fleiss,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration; flags take precedence over its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// A, B, C, D, E, nonprosodic, or a JSON feature-set file.
    #[arg(long)]
    pub feature_set: Option<String>,
    #[arg(long, value_enum)]
    pub learner: Option<LearnerArg>,
    #[arg(long, value_enum)]
    pub kappa: Option<KappaArg>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Recompute every analysis and leave the cache untouched.
    #[arg(long)]
    pub no_cache: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub scatter: bool,
    #[arg(long)]
    pub frame_length: Option<f64>,
    #[arg(long)]
    pub hop: Option<f64>,
    #[arg(long)]
    pub f0_floor: Option<f64>,
    #[arg(long)]
    pub f0_ceil: Option<f64>,
    #[arg(long)]
    pub voicing_threshold: Option<f64>,
    #[arg(long)]
    pub silence_db: Option<f64>,
    #[arg(long)]
    pub min_silence: Option<f64>,
    #[arg(long)]
    pub min_leaf: Option<usize>,
    #[arg(long)]
    pub confidence: Option<f64>,
    #[arg(long)]
    pub no_prune: bool,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:expr),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { $field = v.into(); })*
            };
        }
        set! {
            manifest => c.manifest,
            lexicon => c.lexicon,
            feature_set => c.feature_set,
            output => c.output,
            cache_dir => c.cache_dir,
            seed => c.seed,
            frame_length => c.tracker.frame_length,
            hop => c.tracker.hop,
            f0_floor => c.tracker.f0_floor,
            f0_ceil => c.tracker.f0_ceil,
            voicing_threshold => c.tracker.voicing_threshold,
            silence_db => c.tracker.silence_db_threshold,
            min_silence => c.tracker.min_silence_run,
            min_leaf => c.tree.min_leaf,
            confidence => c.tree.confidence,
        }
        if let Some(l) = self.learner {
            c.learner = match l {
                LearnerArg::Linear => Learner::Linear,
                LearnerArg::Constant => Learner::Constant,
            };
        }
        if let Some(k) = self.kappa {
            c.kappa = match k {
                KappaArg::Pairwise => KappaVariant::AveragePairwise,
                KappaArg::Fleiss => KappaVariant::Fleiss,
            };
        }
        c.no_cache |= self.no_cache;
        c.scatter |= self.scatter;
        c.tree.prune &= !self.no_prune;
        c.tracker.validate()?;
        Ok(c)
    }
}

impl RunConfig {
    pub fn manifest(&self) -> Result<&Path, CliError> {
        self.manifest
            .as_deref()
            .ok_or_else(|| CliError::Config("no manifest given (use --manifest or the config file)".into()))
    }

    pub fn cache_dir(&self) -> Option<PathBuf> {
        if self.no_cache {
            return None;
        }
        Some(self.cache_dir.clone().unwrap_or_else(|| self.output.join("cache")))
    }

    /// The configuration as embedded in reports: settings that change
    /// results, without output or cache locations.
    pub fn embedded(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Value::Object(map) = &mut v {
            for key in ["output", "cache_dir", "no_cache"] {
                map.remove(key);
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"feature_set": "C", "seed": 3, "tracker": {"hop": 0.005}, "tree": {"min_leaf": 4, "confidence": 0.1, "prune": true}}"#).unwrap();
        let args = RunArgs {
            config: Some(path),
            seed: Some(9),
            f0_ceil: Some(400.0),
            no_prune: true,
            ..RunArgs::default()
        };
        let c = args.resolve().unwrap();
        assert_eq!(c.feature_set, "C");
        assert_eq!(c.seed, 9);
        assert_eq!(c.tracker.hop, 0.005);
        assert_eq!(c.tracker.f0_ceil, 400.0);
        assert_eq!(c.tracker.frame_length, TrackerConfig::default().frame_length);
        assert_eq!((c.tree.min_leaf, c.tree.prune), (4, false));
    }

    #[test]
    fn unknown_fields_and_bad_tracker_values_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"featureset": "C"}"#).unwrap();
        let args = RunArgs {
            config: Some(path),
            ..RunArgs::default()
        };
        assert!(matches!(args.resolve(), Err(CliError::Config(_))));
        let args = RunArgs {
            hop: Some(0.0),
            ..RunArgs::default()
        };
        assert!(matches!(args.resolve(), Err(CliError::Tracker(_))));
    }

    #[test]
    fn embedded_config_omits_locations() {
        let c = RunConfig {
            output: "a".into(),
            cache_dir: Some("b".into()),
            ..RunConfig::default()
        };
        let v = c.embedded();
        assert!(v.get("output").is_none() && v.get("cache_dir").is_none());
        assert_eq!(v["feature_set"], "E");
    }
}
