use super::{Contour, Interval, TrackerConfig};

/// Finds sustained silences in a contour.
///
/// A frame is silent when its RMS lies more than `silence_db_threshold` dB
/// below the loudest frame of the clip (every frame is silent when the clip
/// is digitally silent). Because a silent frame's entire window is quiet, a
/// run of silent frames spans the union of their windows; runs touching the
/// first or last frame extend to the clip edges. Overlapping runs are merged
/// and runs shorter than `min_silence_run` are dropped.
pub fn detect_silence(contour: &Contour, config: &TrackerConfig) -> Vec<Interval> {
    let frames = &contour.frames;
    if frames.is_empty() {
        return Vec::new();
    }
    let peak = contour.peak_rms();
    let limit = peak * 10f64.powf(-config.silence_db_threshold / 20.0);
    let silent = |rms: f64| if peak > 0.0 { rms < limit } else { true };

    let half = contour.frame_length / 2.0;
    let last = frames.len() - 1;
    let mut runs: Vec<Interval> = Vec::new();
    let mut i = 0;
    while i <= last {
        if !silent(frames[i].rms) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < last && silent(frames[j + 1].rms) {
            j += 1;
        }
        let start = if i == 0 { 0.0 } else { frames[i].time - half };
        let end = if j == last {
            contour.duration
        } else {
            frames[j].time + half
        };
        match runs.last_mut() {
            Some(prev) if start <= prev.end => prev.end = prev.end.max(end),
            _ => runs.push(Interval::new(start, end)),
        }
        i = j + 1;
    }
    // tolerate the floating error in hop arithmetic when comparing to the minimum
    runs.retain(|r| r.len() + 1e-9 >= config.min_silence_run);
    runs
}
