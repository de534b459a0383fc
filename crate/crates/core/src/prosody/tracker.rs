use serde::{Deserialize, Serialize};

use super::ProsodyError;
use crate::audio::AudioClip;

/// Analysis parameters for the pitch/energy tracker and silence detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerConfig {
    /// Analysis window length in seconds.
    pub frame_length: f64,
    /// Spacing between successive frame centers in seconds.
    pub hop: f64,
    pub f0_floor: f64,
    pub f0_ceil: f64,
    /// Minimum normalized autocorrelation peak for a frame to count as voiced.
    pub voicing_threshold: f64,
    /// Frames quieter than the clip's loudest frame by more than this many dB are silent.
    pub silence_db_threshold: f64,
    /// Shortest silent stretch, in seconds, reported as a pause.
    pub min_silence_run: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            frame_length: 0.040,
            hop: 0.010,
            f0_floor: 50.0,
            f0_ceil: 500.0,
            voicing_threshold: 0.45,
            silence_db_threshold: 35.0,
            min_silence_run: 0.100,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), ProsodyError> {
        let bad = |msg: &str| Err(ProsodyError::InvalidConfig(msg.to_string()));
        if !(self.hop > 0.0 && self.frame_length > self.hop) {
            return bad("require frame_length > hop > 0");
        }
        if !(self.f0_floor > 0.0 && self.f0_floor < self.f0_ceil) {
            return bad("require 0 < f0_floor < f0_ceil");
        }
        if !(0.0..=1.0).contains(&self.voicing_threshold) {
            return bad("voicing_threshold must lie in [0, 1]");
        }
        if !(self.silence_db_threshold > 0.0) || !(self.min_silence_run >= 0.0) {
            return bad("silence thresholds must be positive");
        }
        Ok(())
    }
}

/// One analysis frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    /// Frame center in seconds from the start of the clip.
    pub time: f64,
    /// Fundamental frequency in Hz, `None` when unvoiced.
    pub f0: Option<f64>,
    pub rms: f64,
}

/// The frame sequence of a clip plus the geometry needed to map frames back
/// onto the clip timeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub frames: Vec<Frame>,
    /// Actual window length in seconds (rounded to whole samples).
    pub frame_length: f64,
    /// Actual hop in seconds (rounded to whole samples).
    pub hop: f64,
    /// Duration of the analysed clip in seconds.
    pub duration: f64,
}

impl Contour {
    pub fn voiced(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.frames.iter().filter_map(|f| f.f0.map(|f0| (f.time, f0)))
    }

    pub fn peak_rms(&self) -> f64 {
        self.frames.iter().map(|f| f.rms).fold(0.0, f64::max)
    }
}

/// Computes one [`Frame`] per hop using normalized autocorrelation pitch
/// detection with parabolic peak interpolation.
pub fn extract_contour(clip: &AudioClip, config: &TrackerConfig) -> Result<Contour, ProsodyError> {
    config.validate()?;
    let sr = clip.sample_rate() as f64;
    let win = (config.frame_length * sr).round() as usize;
    let hop = ((config.hop * sr).round() as usize).max(1);
    if clip.duration() < config.frame_length || clip.len() < win || win < 4 {
        return Err(ProsodyError::ClipTooShort {
            duration: clip.duration(),
            frame_length: config.frame_length,
        });
    }
    let lag_min = ((sr / config.f0_ceil).floor() as usize).max(2);
    let lag_max = ((sr / config.f0_floor).ceil() as usize).min(win - 2);
    if lag_min + 1 >= lag_max {
        return Err(ProsodyError::InvalidConfig(
            "f0 range does not fit inside the analysis window".into(),
        ));
    }

    let samples = clip.samples();
    let n_frames = (samples.len() - win) / hop + 1;
    let mut buf = vec![0.0; win];
    let mut corr = vec![0.0; lag_max + 2];
    let frames = (0..n_frames)
        .map(|i| {
            let start = i * hop;
            let raw = &samples[start..start + win];
            let rms = (raw.iter().map(|s| s * s).sum::<f64>() / win as f64).sqrt();
            let f0 = estimate_f0(raw, &mut buf, &mut corr, lag_min, lag_max, sr, config);
            Frame {
                time: (start as f64 + win as f64 / 2.0) / sr,
                f0,
                rms,
            }
        })
        .collect();

    Ok(Contour {
        frames,
        frame_length: win as f64 / sr,
        hop: hop as f64 / sr,
        duration: clip.duration(),
    })
}

/// Peaks within this fraction of the strongest one are octave candidates; the
/// shortest such lag wins.
const OCTAVE_TOLERANCE: f64 = 0.9;

fn estimate_f0(
    raw: &[f64],
    buf: &mut [f64],
    corr: &mut [f64],
    lag_min: usize,
    lag_max: usize,
    sr: f64,
    config: &TrackerConfig,
) -> Option<f64> {
    let n = raw.len();
    let mean = raw.iter().sum::<f64>() / n as f64;
    for (b, r) in buf.iter_mut().zip(raw) {
        *b = r - mean;
    }
    let energy: f64 = buf.iter().map(|x| x * x).sum();
    if energy <= 1e-12 * n as f64 {
        return None;
    }

    // prefix[k] = sum of squares of buf[..k]
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for x in buf.iter() {
        prefix.push(prefix.last().unwrap() + x * x);
    }

    let first = lag_min - 1;
    let last = lag_max + 1;
    for lag in first..=last {
        let m = n - lag;
        let cross: f64 = buf[..m].iter().zip(&buf[lag..]).map(|(a, b)| a * b).sum();
        let e_head = prefix[m];
        let e_tail = prefix[n] - prefix[lag];
        let denom = (e_head * e_tail).sqrt();
        corr[lag] = if denom > 0.0 { cross / denom } else { 0.0 };
    }

    let peaks: Vec<usize> = (lag_min..=lag_max)
        .filter(|&l| corr[l] > corr[l - 1] && corr[l] >= corr[l + 1])
        .collect();
    let best = peaks.iter().map(|&l| corr[l]).fold(f64::NEG_INFINITY, f64::max);
    if !(best >= config.voicing_threshold) {
        return None;
    }
    let lag = peaks
        .into_iter()
        .find(|&l| corr[l] >= OCTAVE_TOLERANCE * best)
        .expect("the best peak itself qualifies");

    let (a, b, c) = (corr[lag - 1], corr[lag], corr[lag + 1]);
    let curvature = a - 2.0 * b + c;
    let shift = if curvature < 0.0 {
        (0.5 * (a - c) / curvature).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    let f0 = sr / (lag as f64 + shift);
    Some(f0.clamp(config.f0_floor, config.f0_ceil))
}
