//! Content-addressed store of tracker analyses. Entries live under
//! `<dir>/<tracker hash>/<audio hash>.json`; deleting any of them only costs
//! recomputation.

use std::fs;
use std::path::{Path, PathBuf};

use certainty_core::corpus::Corpus;
use certainty_core::experiments::{analyze_clip, Analysis, ExperimentError};
use certainty_core::prosody::TrackerConfig;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct AnalysisCache {
    dir: PathBuf,
}

impl AnalysisCache {
    pub fn new(root: &Path, tracker: &TrackerConfig) -> Self {
        let key = sha256_hex(serde_json::to_string(tracker).expect("config serializes").as_bytes());
        Self { dir: root.join(key) }
    }

    fn entry(&self, audio_hash: &str) -> PathBuf {
        self.dir.join(format!("{audio_hash}.json"))
    }

    /// A missing or unreadable entry is a miss.
    pub fn get(&self, audio_hash: &str) -> Option<Analysis> {
        let text = fs::read_to_string(self.entry(audio_hash)).ok()?;
        match serde_json::from_str(&text) {
            Ok(a) => Some(a),
            Err(e) => {
                log::warn!("ignoring corrupt cache entry {audio_hash}: {e}");
                None
            }
        }
    }

    pub fn put(&self, audio_hash: &str, analysis: &Analysis) -> std::io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let path = self.entry(audio_hash);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, serde_json::to_string(analysis).expect("analysis serializes"))?;
        fs::rename(tmp, path)
    }
}

/// Tracker analyses for every utterance in manifest order, reusing cached
/// entries where present.
pub fn analyze_corpus(
    corpus: &Corpus,
    tracker: &TrackerConfig,
    cache: Option<&AnalysisCache>,
) -> Result<Vec<Analysis>, CliError> {
    corpus
        .utterances()
        .par_iter()
        .enumerate()
        .map(|(i, u)| {
            let hash = match cache {
                Some(_) => {
                    let path = corpus.root().join(&u.audio);
                    Some(sha256_hex(&fs::read(&path).map_err(CliError::io(&path))?))
                }
                None => None,
            };
            if let (Some(cache), Some(hash)) = (cache, &hash) {
                if let Some(a) = cache.get(hash) {
                    return Ok(a);
                }
            }
            let a = analyze_clip(corpus.clip(i), tracker).map_err(|source| ExperimentError::Prosody {
                utterance_id: u.utterance_id.clone(),
                source,
            })?;
            if let (Some(cache), Some(hash)) = (cache, &hash) {
                if let Err(e) = cache.put(hash, &a) {
                    log::warn!("could not write cache entry for {}: {e}", u.utterance_id);
                }
            }
            Ok(a)
        })
        .collect()
}
