//! In-memory session registry backed by one append-only JSONL log per
//! session. Every accepted mutation is logged before it becomes visible, and
//! the logs are replayed on startup.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use certainty_core::audio::decode_wav;
use certainty_core::corpus::{
    code_correctness, validate_manifest, Item, Manifest, Utterance, WordSpan,
};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::session::{AnnotationSession, ElicitationEvent, ElicitationSession, ItemState, Recording};
use crate::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceConfig {
    /// Where session logs, recordings and exports live.
    pub data_dir: PathBuf,
    /// Named lists of items a speaker can be elicited with.
    pub item_sets: BTreeMap<String, Vec<Item>>,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>, item_sets: BTreeMap<String, Vec<Item>>) -> Self {
        Self {
            data_dir: data_dir.into(),
            item_sets,
        }
    }

    /// Item ids must be unique across sets and usable as file names.
    pub fn validate(&self) -> Result<(), ServiceError> {
        let items: Vec<Item> = self.item_sets.values().flatten().cloned().collect();
        for item in &items {
            let ok = !item.item_id.is_empty()
                && item.item_id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
            if !ok {
                return Err(ServiceError::Config(format!("item id `{}` must match [A-Za-z0-9_-]+", item.item_id)));
            }
        }
        let manifest = Manifest {
            items,
            ..Manifest::default()
        };
        validate_manifest(&manifest).map_err(|e| ServiceError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Session {
    Elicitation(ElicitationSession),
    Annotation(AnnotationSession),
}

impl Session {
    pub fn session_id(&self) -> &str {
        match self {
            Self::Elicitation(s) => &s.session_id,
            Self::Annotation(s) => &s.session_id,
        }
    }

    fn created_at(&self) -> f64 {
        match self {
            Self::Elicitation(s) => s.created_at,
            Self::Annotation(s) => s.created_at,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum LogEntry {
    Created { session: Session },
    Event { event: ElicitationEvent },
    Recording { item_id: String, recording: Recording },
    Rating { utterance_id: String, rating: i64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LogRecord {
    at: f64,
    #[serde(flatten)]
    entry: LogEntry,
}

/// Why an export was refused.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExportReport {
    pub utterances: usize,
    pub judges: usize,
    /// Recordings the speaker has not yet self-rated.
    pub awaiting_self_rating: Vec<String>,
    pub untranscribed: Vec<String>,
    pub incomplete_judges: Vec<JudgeProgress>,
}

impl ExportReport {
    pub fn is_complete(&self) -> bool {
        self.awaiting_self_rating.is_empty()
            && self.untranscribed.is_empty()
            && self.incomplete_judges.is_empty()
            && (self.utterances == 0 || self.judges > 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeProgress {
    pub session_id: String,
    pub judge_id: String,
    pub rated: usize,
    /// Utterances this judge still has to rate, including ones recorded
    /// after the judge's playlist was drawn.
    pub missing: usize,
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

pub struct Store {
    data_dir: PathBuf,
    item_sets: BTreeMap<String, Vec<Item>>,
    items: HashMap<String, Item>,
    sessions: RwLock<BTreeMap<String, Arc<Mutex<Session>>>>,
}

impl Store {
    /// Creates the data directory layout and replays existing session logs.
    pub fn open(config: ServiceConfig) -> Result<Self, ServiceError> {
        config.validate()?;
        let items = config
            .item_sets
            .values()
            .flatten()
            .map(|i| (i.item_id.clone(), i.clone()))
            .collect();
        let store = Self {
            data_dir: config.data_dir,
            item_sets: config.item_sets,
            items,
            sessions: RwLock::new(BTreeMap::new()),
        };
        fs::create_dir_all(store.sessions_dir()).map_err(ServiceError::storage)?;
        fs::create_dir_all(store.data_dir.join("recordings")).map_err(ServiceError::storage)?;
        store.replay()?;
        Ok(store)
    }

    pub fn data_dir(&self) -> &Path {
        &self.data_dir
    }

    pub fn item(&self, item_id: &str) -> Option<&Item> {
        self.items.get(item_id)
    }

    fn sessions_dir(&self) -> PathBuf {
        self.data_dir.join("sessions")
    }

    fn log_path(&self, session_id: &str) -> PathBuf {
        self.sessions_dir().join(format!("{session_id}.jsonl"))
    }

    fn recording_rel_path(session_id: &str, item_id: &str) -> String {
        format!("recordings/{session_id}/{item_id}.wav")
    }

    fn replay(&self) -> Result<(), ServiceError> {
        let mut paths: Vec<PathBuf> = fs::read_dir(self.sessions_dir())
            .map_err(ServiceError::storage)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        let mut map = self.sessions.write().unwrap_or_else(|e| e.into_inner());
        for path in paths {
            let session = self.replay_log(&path)?;
            map.insert(session.session_id().to_string(), Arc::new(Mutex::new(session)));
        }
        log::info!("replayed {} sessions from {}", map.len(), self.sessions_dir().display());
        Ok(())
    }

    fn replay_log(&self, path: &Path) -> Result<Session, ServiceError> {
        let text = fs::read_to_string(path).map_err(ServiceError::storage)?;
        let corrupt = |line: usize, msg: String| ServiceError::Storage(format!("{}:{line}: {msg}", path.display()));
        let lines: Vec<&str> = text.lines().collect();
        let mut session: Option<Session> = None;
        for (n, line) in lines.iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: LogRecord = match serde_json::from_str(line) {
                Ok(r) => r,
                // A torn final write from a crash: the mutation was never acknowledged.
                Err(e) if n + 1 == lines.len() && !text.ends_with('\n') => {
                    log::warn!("{}: dropping torn last line: {e}", path.display());
                    break;
                }
                Err(e) => return Err(corrupt(n + 1, e.to_string())),
            };
            match (&mut session, record.entry) {
                (None, LogEntry::Created { session: s }) => session = Some(s),
                (None, _) => return Err(corrupt(n + 1, "log does not start with a session".into())),
                (Some(s), entry) => self.apply_entry(s, entry, record.at).map_err(|e| corrupt(n + 1, e.to_string()))?,
            }
        }
        session.ok_or_else(|| corrupt(0, "empty log".into()))
    }

    fn apply_entry(&self, session: &mut Session, entry: LogEntry, at: f64) -> Result<(), ServiceError> {
        match (session, entry) {
            (Session::Elicitation(s), LogEntry::Event { event }) => {
                let item = self.lookup(event.item_id())?;
                s.apply(&event, item, at)
            }
            (Session::Elicitation(s), LogEntry::Recording { item_id, recording }) => {
                s.attach_recording(&item_id, recording, at)
            }
            (Session::Annotation(s), LogEntry::Rating { utterance_id, rating }) => s.rate(&utterance_id, rating),
            (s, _) => Err(ServiceError::WrongKind(s.session_id().to_string())),
        }
    }

    fn lookup(&self, item_id: &str) -> Result<&Item, ServiceError> {
        self.items
            .get(item_id)
            .ok_or_else(|| ServiceError::UnknownItem(item_id.to_string()))
    }

    fn append(&self, session_id: &str, record: &LogRecord) -> Result<(), ServiceError> {
        let mut line = serde_json::to_string(record).map_err(ServiceError::storage)?;
        line.push('\n');
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.log_path(session_id))
            .map_err(ServiceError::storage)?;
        file.write_all(line.as_bytes()).map_err(ServiceError::storage)?;
        file.sync_data().map_err(ServiceError::storage)
    }

    fn handle(&self, session_id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(session_id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(session_id.to_string()))
    }

    fn lock(handle: &Mutex<Session>) -> MutexGuard<'_, Session> {
        handle.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn register(&self, session: Session) -> Result<Session, ServiceError> {
        let id = session.session_id().to_string();
        self.append(&id, &LogRecord {
            at: session.created_at(),
            entry: LogEntry::Created { session: session.clone() },
        })?;
        self.sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(id, Arc::new(Mutex::new(session.clone())));
        Ok(session)
    }

    /// Logs `entry` and applies it, leaving the session untouched on failure.
    fn mutate(&self, session_id: &str, entry: LogEntry) -> Result<Session, ServiceError> {
        let handle = self.handle(session_id)?;
        let mut guard = Self::lock(&handle);
        let at = now();
        let mut next = guard.clone();
        self.apply_entry(&mut next, entry.clone(), at)?;
        self.append(session_id, &LogRecord { at, entry })?;
        *guard = next.clone();
        Ok(next)
    }

    pub fn create_elicitation(&self, speaker_id: &str, item_set: &str, seed: u64) -> Result<Session, ServiceError> {
        if speaker_id.trim().is_empty() {
            return Err(ServiceError::InvalidRequest("speaker_id must not be empty".into()));
        }
        let items = self.item_sets.get(item_set).map(Vec::as_slice).unwrap_or_default();
        let session = ElicitationSession::new(
            Uuid::new_v4().to_string(),
            speaker_id.to_string(),
            item_set.to_string(),
            items,
            seed,
            now(),
        )?;
        self.register(Session::Elicitation(session))
    }

    /// Draws a playlist over every recording made so far.
    pub fn create_annotation(&self, judge_id: &str, seed: u64) -> Result<Session, ServiceError> {
        if judge_id.trim().is_empty() {
            return Err(ServiceError::InvalidRequest("judge_id must not be empty".into()));
        }
        let utterances: Vec<String> = self.recordings().into_iter().map(|r| r.recording.utterance_id).collect();
        let session = AnnotationSession::new(Uuid::new_v4().to_string(), judge_id.to_string(), &utterances, seed, now());
        self.register(Session::Annotation(session))
    }

    pub fn snapshot(&self, session_id: &str) -> Result<Session, ServiceError> {
        let handle = self.handle(session_id)?;
        let session = Self::lock(&handle).clone();
        Ok(session)
    }

    fn elicitation(&self, session_id: &str) -> Result<ElicitationSession, ServiceError> {
        match self.snapshot(session_id)? {
            Session::Elicitation(s) => Ok(s),
            Session::Annotation(_) => Err(ServiceError::WrongKind(session_id.to_string())),
        }
    }

    pub fn apply_event(&self, session_id: &str, event: ElicitationEvent) -> Result<ElicitationSession, ServiceError> {
        self.lookup(event.item_id())?;
        match self.mutate(session_id, LogEntry::Event { event })? {
            Session::Elicitation(s) => Ok(s),
            Session::Annotation(_) => Err(ServiceError::WrongKind(session_id.to_string())),
        }
    }

    /// Validates and stores a WAV upload for an item awaiting its recording.
    pub fn upload_recording(&self, session_id: &str, item_id: &str, wav: &[u8]) -> Result<Recording, ServiceError> {
        self.elicitation(session_id)?.check_recording_allowed(item_id)?;
        let clip = decode_wav(wav)?;
        let rel = Self::recording_rel_path(session_id, item_id);
        let path = self.data_dir.join(&rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(ServiceError::storage)?;
        }
        let recording = Recording {
            utterance_id: Uuid::new_v4().to_string(),
            sample_rate: clip.sample_rate(),
            duration: clip.duration(),
        };
        // Write to a temporary name first so a lost race never clobbers an
        // accepted recording.
        let tmp = path.with_extension(format!("{}.part", recording.utterance_id));
        fs::write(&tmp, wav).map_err(ServiceError::storage)?;
        let entry = LogEntry::Recording {
            item_id: item_id.to_string(),
            recording: recording.clone(),
        };
        match self.mutate(session_id, entry) {
            Ok(_) => {
                fs::rename(&tmp, &path).map_err(ServiceError::storage)?;
                Ok(recording)
            }
            Err(e) => {
                let _ = fs::remove_file(&tmp);
                Err(e)
            }
        }
    }

    pub fn rate(&self, session_id: &str, utterance_id: &str, rating: i64) -> Result<AnnotationSession, ServiceError> {
        let entry = LogEntry::Rating {
            utterance_id: utterance_id.to_string(),
            rating,
        };
        match self.mutate(session_id, entry)? {
            Session::Annotation(s) => Ok(s),
            Session::Elicitation(_) => Err(ServiceError::WrongKind(session_id.to_string())),
        }
    }

    /// Bytes of a stored recording.
    pub fn audio(&self, utterance_id: &str) -> Result<Vec<u8>, ServiceError> {
        let found = self
            .recordings()
            .into_iter()
            .find(|r| r.recording.utterance_id == utterance_id)
            .ok_or_else(|| ServiceError::UnknownUtterance(utterance_id.to_string()))?;
        fs::read(self.data_dir.join(Self::recording_rel_path(&found.session.session_id, &found.item_id)))
            .map_err(ServiceError::storage)
    }

    fn sessions_in_order(&self) -> Vec<Session> {
        let handles: Vec<_> = self.sessions.read().unwrap_or_else(|e| e.into_inner()).values().cloned().collect();
        let mut all: Vec<Session> = handles.iter().map(|h| Self::lock(h).clone()).collect();
        all.sort_by(|a, b| a.created_at().total_cmp(&b.created_at()).then_with(|| a.session_id().cmp(b.session_id())));
        all
    }

    /// Every recording, by session creation order then presentation order.
    fn recordings(&self) -> Vec<Recorded> {
        let mut out = Vec::new();
        for s in self.sessions_in_order() {
            if let Session::Elicitation(e) = s {
                for p in &e.items {
                    if let Some(recording) = &p.recording {
                        out.push(Recorded {
                            session: e.clone(),
                            item_id: p.item_id.clone(),
                            recording: recording.clone(),
                        });
                    }
                }
            }
        }
        out
    }

    /// Checks whether the study can be exported.
    pub fn export_status(&self) -> ExportReport {
        let sessions = self.sessions_in_order();
        let mut report = ExportReport::default();
        let mut recorded = Vec::new();
        for s in &sessions {
            if let Session::Elicitation(e) = s {
                for p in e.items.iter().filter(|p| p.recording.is_some()) {
                    let id = p.recording.as_ref().map(|r| r.utterance_id.clone()).unwrap_or_default();
                    if p.state != ItemState::SelfRated {
                        report.awaiting_self_rating.push(id.clone());
                    }
                    if p.transcription.is_none() {
                        report.untranscribed.push(id.clone());
                    }
                    recorded.push(id);
                }
            }
        }
        report.utterances = recorded.len();
        for s in &sessions {
            if let Session::Annotation(a) = s {
                report.judges += 1;
                let missing = recorded.iter().filter(|u| !a.ratings.contains_key(*u)).count();
                if missing > 0 {
                    report.incomplete_judges.push(JudgeProgress {
                        session_id: a.session_id.clone(),
                        judge_id: a.judge_id.clone(),
                        rated: a.ratings.len(),
                        missing,
                    });
                }
            }
        }
        report
    }

    /// Builds the corpus manifest, writes it to `manifest.json` in the data
    /// directory (next to `recordings/`) and returns it.
    pub fn export_manifest(&self) -> Result<Manifest, ServiceError> {
        let report = self.export_status();
        if !report.is_complete() {
            return Err(ServiceError::ExportIncomplete(report));
        }
        let sessions = self.sessions_in_order();
        let judges: Vec<&AnnotationSession> = sessions
            .iter()
            .filter_map(|s| match s {
                Session::Annotation(a) => Some(a),
                Session::Elicitation(_) => None,
            })
            .collect();
        let mut utterances = Vec::new();
        let mut ordinal_base: HashMap<&str, u32> = HashMap::new();
        for s in &sessions {
            let Session::Elicitation(e) = s else { continue };
            let base = ordinal_base.entry(e.speaker_id.as_str()).or_insert(0);
            for (pos, p) in e.items.iter().enumerate() {
                let (Some(rec), Some(tx), Some(self_rating)) = (&p.recording, &p.transcription, p.self_rating) else {
                    continue;
                };
                let item = self.lookup(&p.item_id)?;
                let invalid = || ServiceError::InvalidExport(format!("item {} no longer matches its transcription", p.item_id));
                let (words, slots) = item.fill(&tx.chosen_options).ok_or_else(invalid)?;
                let span = |(a, b): (usize, usize)| -> Result<WordSpan, ServiceError> {
                    let start = tx.word_times.get(a).ok_or_else(invalid)?.0;
                    let end = tx.word_times.get(b.wrapping_sub(1)).ok_or_else(invalid)?.1;
                    Ok(WordSpan::aligned(a, b, start, end))
                };
                utterances.push(Utterance {
                    utterance_id: rec.utterance_id.clone(),
                    speaker_id: e.speaker_id.clone(),
                    item_id: p.item_id.clone(),
                    audio: Self::recording_rel_path(&e.session_id, &p.item_id),
                    sample_rate: rec.sample_rate,
                    transcript: words,
                    target_spans: slots.into_iter().map(&span).collect::<Result<_, _>>()?,
                    control_span: item.control_word_span(&tx.chosen_options).map(&span).transpose()?,
                    chosen_options: tx.chosen_options.clone(),
                    correctness: code_correctness(item, &tx.chosen_options),
                    self_rating,
                    listener_ratings: judges
                        .iter()
                        .map(|j| j.ratings.get(&rec.utterance_id).copied().ok_or_else(invalid))
                        .collect::<Result<_, _>>()?,
                    presentation_ordinal: *base + pos as u32 + 1,
                });
            }
            *base += e.items.len() as u32;
        }
        let manifest = Manifest {
            items: self.item_sets.values().flatten().cloned().collect(),
            utterances,
            ..Manifest::default()
        };
        validate_manifest(&manifest).map_err(|e| ServiceError::InvalidExport(e.to_string()))?;
        let json = serde_json::to_string_pretty(&manifest).map_err(ServiceError::storage)?;
        fs::write(self.data_dir.join("manifest.json"), json + "\n").map_err(ServiceError::storage)?;
        Ok(manifest)
    }
}

struct Recorded {
    session: ElicitationSession,
    item_id: String,
    recording: Recording,
}
