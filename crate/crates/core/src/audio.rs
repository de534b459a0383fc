//! Decoding and synthesis of mono speech recordings.
//!
//! Only RIFF/WAVE files carrying 16-bit integer PCM are accepted. Stereo input
//! is downmixed by averaging the two channels; nothing is resampled.

use std::f64::consts::PI;
use std::sync::Arc;

use thiserror::Error;

/// Lowest sample rate accepted by [`decode_wav`].
pub const MIN_SAMPLE_RATE: u32 = 8000;

const PCM16_SCALE: f64 = 32768.0;
const FORMAT_PCM: u16 = 1;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AudioError {
    #[error("malformed RIFF/WAVE container: {0}")]
    MalformedContainer(String),
    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("unsupported sample rate {0} Hz (minimum {MIN_SAMPLE_RATE} Hz)")]
    UnsupportedRate(u32),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

/// Decoded mono PCM audio.
///
/// Samples are normalized to `[-1.0, 1.0]`. The sample buffer is shared, so
/// clones are cheap and clips can be handed to worker threads freely.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Arc<[f64]>,
    sample_rate: u32,
}

impl AudioClip {
    /// Builds a clip from already-normalized samples.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::InvalidParameters("sample rate must be positive".into()));
        }
        if let Some((i, s)) = samples
            .iter()
            .enumerate()
            .find(|(_, s)| !s.is_finite() || s.abs() > 1.0)
        {
            return Err(AudioError::InvalidParameters(format!(
                "sample {i} = {s} lies outside [-1, 1]"
            )));
        }
        Ok(Self {
            samples: samples.into(),
            sample_rate,
        })
    }

    /// A clip of digital silence.
    pub fn silence(duration: f64, sample_rate: u32) -> Result<Self, AudioError> {
        if !(duration >= 0.0) || sample_rate == 0 {
            return Err(AudioError::InvalidParameters(format!(
                "silence of {duration} s at {sample_rate} Hz"
            )));
        }
        Self::new(vec![0.0; sample_count(duration, sample_rate)], sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Multiplies every sample by `gain`. Fails if the result would clip.
    pub fn scaled(&self, gain: f64) -> Result<Self, AudioError> {
        Self::new(self.samples.iter().map(|s| s * gain).collect(), self.sample_rate)
    }

    /// Appends clips end to end. All parts must share one sample rate.
    pub fn concat(parts: &[AudioClip]) -> Result<Self, AudioError> {
        let Some(first) = parts.first() else {
            return Err(AudioError::InvalidParameters("nothing to concatenate".into()));
        };
        let rate = first.sample_rate;
        if parts.iter().any(|p| p.sample_rate != rate) {
            return Err(AudioError::InvalidParameters(
                "cannot concatenate clips with different sample rates".into(),
            ));
        }
        let samples: Vec<f64> = parts.iter().flat_map(|p| p.samples.iter().copied()).collect();
        Ok(Self {
            samples: samples.into(),
            sample_rate: rate,
        })
    }
}

fn sample_count(duration: f64, sample_rate: u32) -> usize {
    (duration * sample_rate as f64).round() as usize
}

/// Generates `amplitude * sin(2π f t)`.
pub fn synthesize_tone(
    freq: f64,
    amplitude: f64,
    duration: f64,
    sample_rate: u32,
) -> Result<AudioClip, AudioError> {
    synthesize_chirp(freq, freq, amplitude, duration, sample_rate)
}

/// Generates a linear chirp whose instantaneous frequency moves from
/// `start_freq` to `end_freq` over `duration` seconds.
pub fn synthesize_chirp(
    start_freq: f64,
    end_freq: f64,
    amplitude: f64,
    duration: f64,
    sample_rate: u32,
) -> Result<AudioClip, AudioError> {
    let nyquist = sample_rate as f64 / 2.0;
    for f in [start_freq, end_freq] {
        if !(f > 0.0 && f < nyquist) {
            return Err(AudioError::InvalidParameters(format!(
                "frequency {f} Hz outside (0, {nyquist}) Hz"
            )));
        }
    }
    if !(amplitude > 0.0 && amplitude <= 1.0) {
        return Err(AudioError::InvalidParameters(format!(
            "amplitude {amplitude} outside (0, 1]"
        )));
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(AudioError::InvalidParameters(format!(
            "duration {duration} s must be positive"
        )));
    }
    let n = sample_count(duration, sample_rate);
    let sr = sample_rate as f64;
    let sweep = (end_freq - start_freq) / duration;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / sr;
            let phase = 2.0 * PI * (start_freq * t + 0.5 * sweep * t * t);
            amplitude * phase.sin()
        })
        .collect();
    AudioClip::new(samples, sample_rate)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], AudioError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let out = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(out)
            }
            None => Err(AudioError::MalformedContainer(format!(
                "truncated while reading {what} at byte {}",
                self.pos
            ))),
        }
    }

    fn u16(&mut self, what: &str) -> Result<u16, AudioError> {
        let b = self.take(2, what)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self, what: &str) -> Result<u32, AudioError> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

struct Format {
    channels: u16,
    sample_rate: u32,
}

fn parse_fmt(body: &[u8]) -> Result<Format, AudioError> {
    let mut r = Reader { bytes: body, pos: 0 };
    let mut tag = r.u16("format tag")?;
    let channels = r.u16("channel count")?;
    let sample_rate = r.u32("sample rate")?;
    let _byte_rate = r.u32("byte rate")?;
    let block_align = r.u16("block align")?;
    let bits = r.u16("bits per sample")?;
    if tag == FORMAT_EXTENSIBLE {
        let _cb_size = r.u16("extension size")?;
        let _valid_bits = r.u16("valid bits")?;
        let _mask = r.u32("channel mask")?;
        let guid = r.take(16, "sub-format")?;
        tag = u16::from_le_bytes([guid[0], guid[1]]);
    }
    if tag != FORMAT_PCM {
        return Err(AudioError::UnsupportedEncoding(format!("format tag {tag:#06x} is not PCM")));
    }
    if bits != 16 {
        return Err(AudioError::UnsupportedEncoding(format!("{bits}-bit samples")));
    }
    if !(1..=2).contains(&channels) {
        return Err(AudioError::UnsupportedEncoding(format!("{channels} channels")));
    }
    if block_align != 2 * channels {
        return Err(AudioError::MalformedContainer(format!(
            "block align {block_align} inconsistent with {channels} channel(s) of 16-bit PCM"
        )));
    }
    if sample_rate < MIN_SAMPLE_RATE {
        return Err(AudioError::UnsupportedRate(sample_rate));
    }
    Ok(Format {
        channels,
        sample_rate,
    })
}

/// Decodes a RIFF/WAVE PCM16 blob into a mono clip.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioClip, AudioError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "RIFF tag")? != b"RIFF" {
        return Err(AudioError::MalformedContainer("missing RIFF tag".into()));
    }
    let _riff_len = r.u32("RIFF length")?;
    if r.take(4, "WAVE tag")? != b"WAVE" {
        return Err(AudioError::MalformedContainer("missing WAVE tag".into()));
    }

    let mut format = None;
    loop {
        if r.pos == bytes.len() {
            return Err(AudioError::MalformedContainer("no data chunk".into()));
        }
        let id = r.take(4, "chunk id")?;
        let len = r.u32("chunk length")? as usize;
        match id {
            b"fmt " => {
                format = Some(parse_fmt(r.take(len, "fmt chunk")?)?);
            }
            b"data" => {
                let fmt = format.ok_or_else(|| {
                    AudioError::MalformedContainer("data chunk precedes fmt chunk".into())
                })?;
                let data = r.take(len, "sample data")?;
                return decode_pcm16(data, &fmt);
            }
            _ => {
                r.take(len, "chunk body")?;
            }
        }
        // chunks are word aligned
        if len % 2 == 1 && r.pos < bytes.len() {
            r.take(1, "chunk padding")?;
        }
    }
}

fn decode_pcm16(data: &[u8], fmt: &Format) -> Result<AudioClip, AudioError> {
    let frame_bytes = 2 * fmt.channels as usize;
    if data.len() % frame_bytes != 0 {
        return Err(AudioError::MalformedContainer(format!(
            "data length {} is not a whole number of {frame_bytes}-byte frames",
            data.len()
        )));
    }
    let samples = data
        .chunks_exact(frame_bytes)
        .map(|frame| {
            let sum: f64 = frame
                .chunks_exact(2)
                .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / PCM16_SCALE)
                .sum();
            sum / fmt.channels as f64
        })
        .collect();
    AudioClip::new(samples, fmt.sample_rate)
}

fn quantize(sample: f64) -> i16 {
    (sample * PCM16_SCALE).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16
}

/// Encodes a clip as a mono PCM16 WAV file.
pub fn encode_wav(clip: &AudioClip) -> Vec<u8> {
    encode_wav_channels(&[clip.samples()], clip.sample_rate())
}

/// Encodes interleaved PCM16 from per-channel sample slices of equal length.
pub fn encode_wav_channels(channels: &[&[f64]], sample_rate: u32) -> Vec<u8> {
    let n_ch = channels.len().max(1) as u16;
    let n = channels.first().map_or(0, |c| c.len());
    let data_len = (n * n_ch as usize * 2) as u32;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&n_ch.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * n_ch as u32 * 2).to_le_bytes());
    out.extend_from_slice(&(n_ch * 2).to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for i in 0..n {
        for ch in channels {
            out.extend_from_slice(&quantize(ch[i]).to_le_bytes());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|s| s * s).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn one_second_mono_decodes_to_16000_samples() {
        let clip = AudioClip::silence(1.0, 16000).unwrap();
        let decoded = decode_wav(&encode_wav(&clip)).unwrap();
        assert_eq!(decoded.len(), 16000);
        assert_eq!(decoded.sample_rate(), 16000);
        assert_eq!(decoded.duration(), 1.0);
        assert!(decoded.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn truncated_header_is_malformed() {
        let bytes = encode_wav(&AudioClip::silence(0.1, 16000).unwrap());
        assert!(matches!(decode_wav(&bytes[..20]), Err(AudioError::MalformedContainer(_))));
    }

    #[test]
    fn truncated_payload_is_malformed() {
        let bytes = encode_wav(&AudioClip::silence(0.1, 16000).unwrap());
        let cut = &bytes[..bytes.len() - 10];
        assert!(matches!(decode_wav(cut), Err(AudioError::MalformedContainer(_))));
    }

    #[test]
    fn rejects_non_pcm_and_wrong_depth() {
        let mut bytes = encode_wav(&AudioClip::silence(0.1, 16000).unwrap());
        bytes[20] = 3; // IEEE float
        assert!(matches!(decode_wav(&bytes), Err(AudioError::UnsupportedEncoding(_))));

        let mut bytes = encode_wav(&AudioClip::silence(0.1, 16000).unwrap());
        bytes[34] = 24;
        assert!(matches!(decode_wav(&bytes), Err(AudioError::UnsupportedEncoding(_))));
    }

    #[test]
    fn rejects_low_rates() {
        let clip = AudioClip::silence(0.1, 4000).unwrap();
        assert_eq!(decode_wav(&encode_wav(&clip)), Err(AudioError::UnsupportedRate(4000)));
    }

    #[test]
    fn skips_unknown_chunks() {
        let clip = synthesize_tone(220.0, 0.5, 0.05, 16000).unwrap();
        let plain = encode_wav(&clip);
        let mut bytes = plain[..36].to_vec();
        bytes.extend_from_slice(b"LIST");
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.extend_from_slice(b"abc\0");
        bytes.extend_from_slice(&plain[36..]);
        assert_eq!(decode_wav(&bytes).unwrap(), decode_wav(&plain).unwrap());
    }

    #[test]
    fn stereo_downmix_is_channel_mean() {
        let left = [0.5, -0.25, 0.0];
        let right = [0.25, 0.25, -1.0];
        let clip = decode_wav(&encode_wav_channels(&[&left, &right], 8000)).unwrap();
        let expected = [0.375, 0.0, -0.5];
        for (a, b) in clip.samples().iter().zip(expected) {
            assert!((a - b).abs() < 1.0 / 32768.0);
        }
    }

    #[test]
    fn tone_rms_matches_closed_form() {
        let clip = synthesize_tone(220.0, 0.5, 1.0, 16000).unwrap();
        assert!((rms(clip.samples()) - 0.5 / 2f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn tone_dominant_lag_matches_period() {
        let clip = synthesize_tone(220.0, 0.5, 1.0, 16000).unwrap();
        let x = clip.samples();
        // brute-force autocorrelation over one plausible period range
        let best = (40..120)
            .max_by(|&a, &b| {
                let ra: f64 = (0..x.len() - a).map(|i| x[i] * x[i + a]).sum();
                let rb: f64 = (0..x.len() - b).map(|i| x[i] * x[i + b]).sum();
                ra.total_cmp(&rb)
            })
            .unwrap();
        assert!((best as f64 - 16000.0 / 220.0).abs() <= 1.0, "lag {best}");
    }

    #[test]
    fn invalid_tone_parameters() {
        assert!(matches!(
            synthesize_tone(440.0, 1.0, 0.0, 16000),
            Err(AudioError::InvalidParameters(_))
        ));
        assert!(synthesize_tone(9000.0, 1.0, 1.0, 16000).is_err());
        assert!(synthesize_tone(440.0, 1.5, 1.0, 16000).is_err());
    }

    proptest! {
        #[test]
        fn wav_round_trip_within_one_step(samples in prop::collection::vec(-1.0f64..1.0, 1..400)) {
            let clip = AudioClip::new(samples, 16000).unwrap();
            let back = decode_wav(&encode_wav(&clip)).unwrap();
            prop_assert_eq!(back.len(), clip.len());
            for (a, b) in clip.samples().iter().zip(back.samples()) {
                prop_assert!((a - b).abs() <= 1.0 / 32768.0);
            }
        }

        #[test]
        fn identical_stereo_channels_equal_mono(samples in prop::collection::vec(-1.0f64..1.0, 1..200)) {
            let mono = decode_wav(&encode_wav_channels(&[&samples], 16000)).unwrap();
            let stereo = decode_wav(&encode_wav_channels(&[&samples, &samples], 16000)).unwrap();
            prop_assert_eq!(mono, stereo);
        }
    }
}
