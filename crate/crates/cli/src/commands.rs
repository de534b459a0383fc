use std::collections::BTreeMap;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use certainty_core::corpus::{load_manifest, parse_manifest, Corpus, Item, Lexicon, NonprosodicId};
use certainty_core::experiments::*;
use certainty_core::featuresets::FeatureSetSpec;
use certainty_core::prosody::{FeatureId, Scope, MISSING_TOKEN};
use certainty_core::synthetic::{generate_study, SyntheticConfig};
use certainty_service::ServiceConfig;
use clap::Args;
use serde::Deserialize;
use serde_json::json;

use crate::cache::{analyze_corpus, AnalysisCache};
use crate::config::{RunArgs, RunConfig};
use crate::CliError;

pub fn load_corpus(c: &RunConfig) -> Result<(Corpus, Lexicon), CliError> {
    let manifest = c.manifest()?;
    let corpus = load_manifest(manifest)?;
    let lexicon = match &c.lexicon {
        Some(path) => Lexicon::load(path)?,
        None => {
            let path = manifest.parent().unwrap_or(Path::new(".")).join("lexicon.json");
            if path.exists() {
                Lexicon::load(&path)?
            } else {
                log::warn!("no lexicon at {}; syllable and phoneme counts fall back to spelling heuristics", path.display());
                Lexicon::new([])?
            }
        }
    };
    Ok((corpus, lexicon))
}

/// Analyzes (through the cache) and normalizes the corpus.
pub fn prepare(c: &RunConfig, corpus: &Corpus, lexicon: &Lexicon) -> Result<PreparedCorpus, CliError> {
    let cache = c.cache_dir().map(|dir| AnalysisCache::new(&dir, &c.tracker));
    let analyses = analyze_corpus(corpus, &c.tracker, cache.as_ref())?;
    Ok(prepare_with_analyses(corpus, lexicon, &analyses)?)
}

pub fn feature_spec(name: &str, corpus: &PreparedCorpus) -> Result<FeatureSetSpec, CliError> {
    Ok(match name {
        "A" | "a" => FeatureSetSpec::a(),
        "B" | "b" => FeatureSetSpec::b(),
        "C" | "c" => FeatureSetSpec::c(),
        "D" | "d" => FeatureSetSpec::d(),
        "E" | "e" => combination_set(corpus)?,
        "nonprosodic" => FeatureSetSpec::nonprosodic(),
        path => {
            let path = Path::new(path);
            let text = fs::read_to_string(path).map_err(CliError::io(path))?;
            FeatureSetSpec::from_json(&text)?
        }
    })
}

#[derive(Debug, Clone, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Append the lexical and positional feature columns.
    #[arg(long)]
    pub nonprosodic: bool,
    /// Write unnormalized values instead of per-speaker z-scores.
    #[arg(long)]
    pub raw: bool,
    /// CSV destination; defaults to `features.csv` in the output directory.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

pub fn feature_header(nonprosodic: bool) -> Vec<String> {
    let mut header: Vec<String> = ["utterance_id", "speaker_id", "item_id"].map(String::from).to_vec();
    for scope in Scope::ALL {
        header.extend(FeatureId::ALL.iter().map(|f| format!("{}.{}", scope.as_str(), f.as_str())));
    }
    if nonprosodic {
        header.extend(NonprosodicId::ALL.iter().map(|f| format!("nonprosodic.{}", f.as_str())));
    }
    header
}

pub fn extract(args: &ExtractArgs) -> Result<PathBuf, CliError> {
    let c = args.run.resolve()?;
    let (corpus, lexicon) = load_corpus(&c)?;
    let prepared = prepare(&c, &corpus, &lexicon)?;
    let path = args.csv.clone().unwrap_or_else(|| c.output.join("features.csv"));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
    w.write_record(feature_header(args.nonprosodic)).map_err(|e| csv_error(&path, e))?;
    for u in &prepared.utterances {
        let features = if args.raw { &u.raw } else { &u.features };
        let mut row = vec![u.utterance_id.clone(), u.speaker_id.clone(), u.item_id.clone()];
        for scope in Scope::ALL {
            let v = features.scope(scope);
            row.extend(FeatureId::ALL.iter().map(|&f| v.get(f).map_or_else(|| MISSING_TOKEN.to_string(), |x| x.to_string())));
        }
        if args.nonprosodic {
            match &u.nonprosodic {
                Some(np) => row.extend(np.values().iter().map(f64::to_string)),
                None => row.extend(NonprosodicId::ALL.iter().map(|_| MISSING_TOKEN.to_string())),
            }
        }
        w.write_record(&row).map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(CliError::io(&path))?;
    log::info!("wrote {} rows to {}", prepared.len(), path.display());
    Ok(path)
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source: e.into(),
    }
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    /// perceived, triage, correlations, localize or agreement.
    pub experiment: Option<String>,
    #[command(flatten)]
    pub run: RunArgs,
}

/// Runs one experiment and returns its report.
pub fn run_experiment(c: &RunConfig, kind: ExperimentKind) -> Result<ExperimentReport, CliError> {
    let body = if kind == ExperimentKind::Agreement {
        let path = c.manifest()?;
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        let manifest = parse_manifest(&text)?;
        ReportBody::Agreement(run_agreement(&manifest.utterances, c.kappa)?)
    } else {
        let (corpus, lexicon) = load_corpus(c)?;
        let prepared = prepare(c, &corpus, &lexicon)?;
        match kind {
            ExperimentKind::Perceived => {
                let config = PerceivedConfig {
                    spec: feature_spec(&c.feature_set, &prepared)?,
                    learner: c.learner,
                    scatter: c.scatter,
                };
                ReportBody::Perceived(run_perceived_experiment(&prepared, &config)?)
            }
            ExperimentKind::Triage => ReportBody::Triage(run_triage_experiment(&prepared, &c.tree)?),
            ExperimentKind::Correlations => ReportBody::Correlations(run_correlations(&prepared)?),
            ExperimentKind::Localize => {
                ReportBody::Localize(run_localization(&prepared, &LocalizationConfig::default())?)
            }
            ExperimentKind::Agreement => unreachable!("handled above"),
        }
    };
    let mut config = c.embedded();
    config["experiment"] = json!(kind.as_str());
    Ok(ExperimentReport::new(c.seed, config, body))
}

/// Writes `report.json` and `report.txt` into the output directory.
pub fn write_report(dir: &Path, report: &ExperimentReport) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let json = dir.join("report.json");
    fs::write(&json, report.to_json()).map_err(CliError::io(&json))?;
    let txt = dir.join("report.txt");
    fs::write(&txt, report.to_text()).map_err(CliError::io(&txt))
}

pub fn experiment(args: &ExperimentArgs) -> Result<ExperimentReport, CliError> {
    let c = args.run.resolve()?;
    let kind = match (&args.experiment, c.experiment) {
        (Some(name), _) => name.parse().map_err(CliError::Usage)?,
        (None, Some(kind)) => kind,
        (None, None) => return Err(CliError::Usage("no experiment given".into())),
    };
    let report = run_experiment(&c, kind)?;
    write_report(&c.output, &report)?;
    Ok(report)
}

pub fn agreement(args: &RunArgs) -> Result<ExperimentReport, CliError> {
    let c = args.resolve()?;
    let report = run_experiment(&c, ExperimentKind::Agreement)?;
    write_report(&c.output, &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

/// Loads the manifest with all its audio and summarizes it.
pub fn validate(args: &ValidateArgs) -> Result<serde_json::Value, CliError> {
    let corpus = load_manifest(&args.manifest)?;
    let u = corpus.utterances();
    Ok(json!({
        "valid": true,
        "utterances": u.len(),
        "speakers": corpus.speakers().len(),
        "items": corpus.items().len(),
        "single_target": u.iter().filter(|u| u.is_single_target()).count(),
        "with_control_word": u.iter().filter(|u| u.control_span.is_some()).count(),
        "listener_ratings_per_utterance": u.first().map(|u| u.listener_ratings.len()),
    }))
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    /// JSON file with `item_sets` (set name to list of items) and an
    /// optional `data_dir`.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ServeFile {
    data_dir: Option<PathBuf>,
    item_sets: BTreeMap<String, Vec<Item>>,
}

pub fn service_config(args: &ServeArgs) -> Result<ServiceConfig, CliError> {
    let text = fs::read_to_string(&args.config).map_err(CliError::io(&args.config))?;
    let file: ServeFile =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    let data_dir = args
        .data_dir
        .clone()
        .or(file.data_dir)
        .ok_or_else(|| CliError::Config("no data directory (use --data-dir or `data_dir`)".into()))?;
    let config = ServiceConfig::new(data_dir, file.item_sets);
    config.validate()?;
    Ok(config)
}

pub fn serve(args: &ServeArgs) -> Result<(), CliError> {
    let config = service_config(args)?;
    let runtime = tokio::runtime::Runtime::new().map_err(|source| CliError::Io {
        path: "tokio runtime".into(),
        source,
    })?;
    Ok(runtime.block_on(certainty_service::serve(config, args.addr))?)
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Directory to write the manifest, lexicon and audio into.
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, default_value_t = SyntheticConfig::default().speakers)]
    pub speakers: usize,
    #[arg(long, default_value_t = SyntheticConfig::default().seed)]
    pub seed: u64,
    #[arg(long, default_value_t = SyntheticConfig::default().uncertain_rate)]
    pub uncertain_rate: f64,
    #[arg(long, default_value_t = SyntheticConfig::default().judges)]
    pub judges: usize,
    #[arg(long, default_value_t = SyntheticConfig::default().sample_rate)]
    pub sample_rate: u32,
}

pub fn synth(args: &SynthArgs) -> Result<PathBuf, CliError> {
    let config = SyntheticConfig {
        speakers: args.speakers,
        seed: args.seed,
        uncertain_rate: args.uncertain_rate,
        judges: args.judges,
        sample_rate: args.sample_rate,
    };
    let study = generate_study(&config, &Default::default())?;
    study.write(&args.out).map_err(CliError::io(&args.out))
}
