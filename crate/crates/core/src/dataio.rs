//! Trial container, EEGB binary I/O, and the seeded synthetic generator.
//!
//! The EEGB layout is little-endian throughout:
//!
//! ```text
//! header (24 bytes): magic "EEGBIN01" | n_trials u32 | n_channels u32
//!                    | n_samples u32 | sample_rate_hz f32
//! per trial:         subject_id u32 | chrono_index u32 | label u8
//!                    | samples (n_channels * n_samples) f32, channel-major
//! ```
//!
//! No padding, no compression. `read_container(write_container(s))` is
//! bit-exact.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"EEGBIN01";
pub const HEADER_LEN: u64 = 24;

/// One trial: a channel-major sample block plus identity and label.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub subject_id: u32,
    /// Position of this trial within its subject's recording session.
    pub chrono_index: u32,
    /// 0 = left, 1 = right.
    pub label: u8,
    /// `n_channels * n_samples` values, channel-major.
    pub samples: Vec<f32>,
}

impl Trial {
    pub fn channel<'a>(&'a self, c: usize, n_samples: usize) -> &'a [f32] {
        &self.samples[c * n_samples..(c + 1) * n_samples]
    }
}

/// An ordered collection of trials sharing one channel/sample geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordingSet {
    pub n_channels: usize,
    pub n_samples: usize,
    pub sample_rate_hz: f32,
    pub trials: Vec<Trial>,
}

impl RecordingSet {
    pub fn n_trials(&self) -> usize {
        self.trials.len()
    }

    /// Checks every structural invariant: finite samples with the right
    /// geometry, binary labels, positive sample rate, and gapless
    /// per-subject chronology (`0..m-1`, no duplicates).
    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz > 0.0) || !self.sample_rate_hz.is_finite() {
            return Err(Error::Validation(format!(
                "sample_rate_hz must be positive and finite, got {}",
                self.sample_rate_hz
            )));
        }
        let expected = self.n_channels * self.n_samples;
        let mut chrono: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (i, t) in self.trials.iter().enumerate() {
            if t.samples.len() != expected {
                return Err(Error::Validation(format!(
                    "trial {i}: expected {expected} samples, got {}",
                    t.samples.len()
                )));
            }
            if t.label > 1 {
                return Err(Error::Validation(format!(
                    "trial {i}: label must be 0 or 1, got {}",
                    t.label
                )));
            }
            if !t.samples.iter().all(|v| v.is_finite()) {
                return Err(Error::Validation(format!(
                    "trial {i}: non-finite sample value"
                )));
            }
            chrono.entry(t.subject_id).or_default().push(t.chrono_index);
        }
        for (sid, mut idx) in chrono {
            idx.sort_unstable();
            for (want, got) in idx.iter().enumerate() {
                if *got != want as u32 {
                    return Err(Error::Validation(format!(
                        "subject {sid}: chrono_index values must be 0..{} with no \
                         gaps or duplicates",
                        idx.len() - 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Trial counts per subject, keyed by subject id.
    pub fn subject_trial_counts(&self) -> BTreeMap<u32, usize> {
        let mut m = BTreeMap::new();
        for t in &self.trials {
            *m.entry(t.subject_id).or_insert(0) += 1;
        }
        m
    }
}

/// Parameters for the synthetic nonstationary generator.
///
/// Each subject's informative channels switch from `set_a` to `set_b` at the
/// chronological midpoint, and the label-dependent amplitude contrast decays
/// over the session. Both mechanisms drift the discriminative structure the
/// way a learning subject's recordings do.
///
/// The default contrast is small against the band-limited noise envelope on
/// purpose: pooled F-scores dilute into the noise floor (each informative
/// channel is active in only half the rows), so whole-session selection has
/// to compromise between `set_a` and `set_b` while per-half selection sees
/// both cleanly.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub n_subjects: usize,
    pub trials_per_subject: usize,
    pub n_channels: usize,
    pub n_samples: usize,
    pub sample_rate_hz: f32,
    pub seed: u64,
    pub noise_sigma: f64,
    pub carrier_hz: f64,
    pub base_amp: f64,
    pub contrast: f64,
    /// Fraction of the contrast lost by the final trial, in `[0, 1)`.
    pub decay: f64,
    /// Discriminative channels for the first chronological half.
    pub set_a: Vec<usize>,
    /// Discriminative channels for the second chronological half.
    pub set_b: Vec<usize>,
}

/// Default discriminative channel sets for a given montage size: the first
/// `n/16` channels (at most 8) and the same-sized block starting at the
/// middle. At the default 129 channels this yields indices 0-7 and 64-71.
pub fn default_channel_sets(n_channels: usize) -> (Vec<usize>, Vec<usize>) {
    if n_channels < 2 {
        return ((0..n_channels).collect(), Vec::new());
    }
    let size = (n_channels / 16).clamp(1, 8).min(n_channels / 2);
    let mid = n_channels / 2;
    ((0..size).collect(), (mid..mid + size).collect())
}

impl GeneratorConfig {
    /// Defaults for everything except the two mandatory counts.
    pub fn new(n_subjects: usize, trials_per_subject: usize) -> Self {
        let (set_a, set_b) = default_channel_sets(129);
        GeneratorConfig {
            n_subjects,
            trials_per_subject,
            n_channels: 129,
            n_samples: 500,
            sample_rate_hz: 500.0,
            seed: 0,
            noise_sigma: 1.0,
            carrier_hz: 10.0,
            base_amp: 1.0,
            contrast: 0.04,
            decay: 0.5,
            set_a,
            set_b,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subjects == 0 {
            return Err(Error::config("n_subjects", "must be >= 1"));
        }
        if self.trials_per_subject < 2 {
            return Err(Error::config("trials_per_subject", "must be >= 2"));
        }
        if self.n_channels == 0 {
            return Err(Error::config("n_channels", "must be >= 1"));
        }
        if self.n_samples == 0 {
            return Err(Error::config("n_samples", "must be >= 1"));
        }
        if !(self.sample_rate_hz > 0.0) || !self.sample_rate_hz.is_finite() {
            return Err(Error::config("sample_rate_hz", "must be positive"));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::config("noise_sigma", "must be >= 0"));
        }
        if !(self.carrier_hz > 0.0) || self.carrier_hz >= f64::from(self.sample_rate_hz) / 2.0 {
            return Err(Error::config(
                "carrier_hz",
                "must lie in (0, sample_rate_hz/2)",
            ));
        }
        if !(self.base_amp >= 0.0) || !self.base_amp.is_finite() {
            return Err(Error::config("base_amp", "must be >= 0"));
        }
        if !(self.contrast >= 0.0) || !self.contrast.is_finite() {
            return Err(Error::config("contrast", "must be >= 0"));
        }
        if !(0.0..1.0).contains(&self.decay) {
            return Err(Error::config("decay", "must lie in [0, 1)"));
        }
        for (name, set) in [("set_a", &self.set_a), ("set_b", &self.set_b)] {
            if let Some(&c) = set.iter().find(|&&c| c >= self.n_channels) {
                return Err(Error::config(
                    name,
                    format!("channel index {c} >= n_channels {}", self.n_channels),
                ));
            }
        }
        if self.set_a.iter().any(|c| self.set_b.contains(c)) {
            return Err(Error::config("set_a", "must be disjoint from set_b"));
        }
        Ok(())
    }
}

/// Generates a seeded synthetic dataset. Identical configs (seed included)
/// yield bit-identical output.
///
/// Per subject the labels are balanced (counts differ by at most one, the
/// extra trial labelled 0) and shuffled. Every channel carries white
/// Gaussian noise; channels in the active set additionally carry a sinusoid
/// at `carrier_hz` with amplitude
/// `base_amp + s * contrast * (1 - decay * t / (T-1))`, `s = +1` for label 1
/// and `-1` for label 0, and a uniform random initial phase per
/// (trial, channel). The active set is `set_a` for `t < ceil(T/2)` and
/// `set_b` afterwards.
pub fn generate_synthetic(cfg: &GeneratorConfig) -> Result<RecordingSet> {
    cfg.validate()?;
    let t_per = cfg.trials_per_subject;
    let n1 = t_per / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut active_a = vec![false; cfg.n_channels];
    for &c in &cfg.set_a {
        active_a[c] = true;
    }
    let mut active_b = vec![false; cfg.n_channels];
    for &c in &cfg.set_b {
        active_b[c] = true;
    }

    let omega = 2.0 * std::f64::consts::PI * cfg.carrier_hz / f64::from(cfg.sample_rate_hz);
    let mut trials = Vec::with_capacity(cfg.n_subjects * t_per);
    for subject in 0..cfg.n_subjects {
        let mut labels: Vec<u8> = (0..t_per).map(|t| u8::from(t < n1)).collect();
        labels.shuffle(&mut rng);
        for (t, &label) in labels.iter().enumerate() {
            let active = if t < (t_per + 1) / 2 {
                &active_a
            } else {
                &active_b
            };
            let sign = if label == 1 { 1.0 } else { -1.0 };
            let amp = cfg.base_amp
                + sign * cfg.contrast * (1.0 - cfg.decay * t as f64 / (t_per - 1) as f64);
            let mut samples = Vec::with_capacity(cfg.n_channels * cfg.n_samples);
            for c in 0..cfg.n_channels {
                if active[c] {
                    let phase: f64 = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
                    for i in 0..cfg.n_samples {
                        let noise: f64 = rng.sample(StandardNormal);
                        let v = noise * cfg.noise_sigma + amp * (omega * i as f64 + phase).sin();
                        samples.push(v as f32);
                    }
                } else {
                    for _ in 0..cfg.n_samples {
                        let noise: f64 = rng.sample(StandardNormal);
                        samples.push((noise * cfg.noise_sigma) as f32);
                    }
                }
            }
            trials.push(Trial {
                subject_id: subject as u32,
                chrono_index: t as u32,
                label,
                samples,
            });
        }
    }
    Ok(RecordingSet {
        n_channels: cfg.n_channels,
        n_samples: cfg.n_samples,
        sample_rate_hz: cfg.sample_rate_hz,
        trials,
    })
}

/// Serializes `set` as EEGB into any writer.
pub fn write_container_to<W: Write>(set: &RecordingSet, w: &mut W) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(set.trials.len() as u32).to_le_bytes())?;
    w.write_all(&(set.n_channels as u32).to_le_bytes())?;
    w.write_all(&(set.n_samples as u32).to_le_bytes())?;
    w.write_all(&set.sample_rate_hz.to_le_bytes())?;
    let mut buf = Vec::with_capacity(9 + 4 * set.n_channels * set.n_samples);
    for t in &set.trials {
        buf.clear();
        buf.extend_from_slice(&t.subject_id.to_le_bytes());
        buf.extend_from_slice(&t.chrono_index.to_le_bytes());
        buf.push(t.label);
        for v in &t.samples {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

/// Validates `set` and writes it to `path` in EEGB format.
pub fn write_container(set: &RecordingSet, path: &Path) -> Result<()> {
    set.validate()?;
    if set.trials.len() > u32::MAX as usize {
        return Err(Error::Validation("too many trials for u32 count".into()));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_container_to(set, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn read_exact_or_format<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::Format(format!("truncated while reading {what}")))
}

/// Reads an EEGB file and validates every RecordingSet invariant.
pub fn read_container(path: &Path) -> Result<RecordingSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let file_len = file.metadata().map_err(|e| Error::io(path, e))?.len();
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 8];
    read_exact_or_format(&mut r, &mut magic, "magic")?;
    if &magic != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&magic),
            String::from_utf8_lossy(MAGIC)
        )));
    }
    let mut u32buf = [0u8; 4];
    read_exact_or_format(&mut r, &mut u32buf, "n_trials")?;
    let n_trials = u32::from_le_bytes(u32buf) as usize;
    read_exact_or_format(&mut r, &mut u32buf, "n_channels")?;
    let n_channels = u32::from_le_bytes(u32buf) as usize;
    read_exact_or_format(&mut r, &mut u32buf, "n_samples")?;
    let n_samples = u32::from_le_bytes(u32buf) as usize;
    read_exact_or_format(&mut r, &mut u32buf, "sample_rate_hz")?;
    let sample_rate_hz = f32::from_le_bytes(u32buf);

    let record_len = 9u64 + 4 * (n_channels as u64) * (n_samples as u64);
    let expected = HEADER_LEN + n_trials as u64 * record_len;
    if file_len != expected {
        return Err(Error::Format(format!(
            "payload size mismatch: header declares {n_trials} trials \
             ({expected} bytes total), file has {file_len} bytes"
        )));
    }

    let per_trial = n_channels * n_samples;
    let mut sample_buf = vec![0u8; 4 * per_trial];
    let mut trials = Vec::with_capacity(n_trials);
    for i in 0..n_trials {
        let mut head = [0u8; 9];
        read_exact_or_format(&mut r, &mut head, &format!("trial {i} header"))?;
        let subject_id = u32::from_le_bytes(head[0..4].try_into().unwrap());
        let chrono_index = u32::from_le_bytes(head[4..8].try_into().unwrap());
        let label = head[8];
        read_exact_or_format(&mut r, &mut sample_buf, &format!("trial {i} samples"))?;
        let samples: Vec<f32> = sample_buf
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        trials.push(Trial {
            subject_id,
            chrono_index,
            label,
            samples,
        });
    }

    let set = RecordingSet {
        n_channels,
        n_samples,
        sample_rate_hz,
        trials,
    };
    set.validate()?;
    Ok(set)
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over a byte stream.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

struct FnvWriter {
    hash: u64,
}

impl Write for FnvWriter {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        for &b in buf {
            self.hash ^= u64::from(b);
            self.hash = self.hash.wrapping_mul(FNV_PRIME);
        }
        Ok(buf.len())
    }
    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

/// FNV-1a digest of the set's EEGB serialization, without materializing it.
pub fn container_digest(set: &RecordingSet) -> u64 {
    let mut w = FnvWriter { hash: FNV_OFFSET };
    write_container_to(set, &mut w).expect("in-memory digest write cannot fail");
    w.hash
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg() -> GeneratorConfig {
        GeneratorConfig {
            n_channels: 4,
            n_samples: 16,
            set_a: vec![0],
            set_b: vec![2],
            ..GeneratorConfig::new(2, 6)
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let cfg = tiny_cfg();
        let a = generate_synthetic(&cfg).unwrap();
        let b = generate_synthetic(&cfg).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&GeneratorConfig {
            seed: 1,
            ..tiny_cfg()
        })
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn labels_balanced_per_subject() {
        let cfg = GeneratorConfig {
            trials_per_subject: 7,
            ..tiny_cfg()
        };
        let set = generate_synthetic(&cfg).unwrap();
        set.validate().unwrap();
        for sid in 0..cfg.n_subjects as u32 {
            let ones = set
                .trials
                .iter()
                .filter(|t| t.subject_id == sid && t.label == 1)
                .count();
            let zeros = set
                .trials
                .iter()
                .filter(|t| t.subject_id == sid && t.label == 0)
                .count();
            assert!(zeros.abs_diff(ones) <= 1, "{zeros} vs {ones}");
        }
    }

    #[test]
    fn noiseless_first_half_is_exact_sinusoid() {
        let cfg = GeneratorConfig {
            noise_sigma: 0.0,
            decay: 0.0,
            n_samples: 500, // ten full carrier cycles, so a sample lands near the peak
            ..tiny_cfg()
        };
        let set = generate_synthetic(&cfg).unwrap();
        for t in set.trials.iter().filter(|t| t.chrono_index < 3) {
            let expect = if t.label == 1 {
                cfg.base_amp + cfg.contrast
            } else {
                cfg.base_amp - cfg.contrast
            };
            let ch0 = t.channel(0, cfg.n_samples);
            let peak = f64::from(ch0.iter().fold(0.0f32, |m, v| m.max(v.abs())));
            assert!(peak <= expect + 1e-6, "peak {peak} exceeds amplitude {expect}");
            assert!(peak >= expect * 0.995, "peak {peak} below amplitude {expect}");
            // inactive channel in the first half is exactly zero
            let ch2 = t.channel(2, cfg.n_samples);
            assert!(ch2.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn config_errors_name_fields() {
        let err = generate_synthetic(&GeneratorConfig {
            trials_per_subject: 1,
            ..tiny_cfg()
        })
        .unwrap_err();
        assert!(err.to_string().contains("trials_per_subject"), "{err}");

        let err = generate_synthetic(&GeneratorConfig {
            set_a: vec![0, 2],
            ..tiny_cfg()
        })
        .unwrap_err();
        assert!(err.to_string().contains("set_a"), "{err}");

        let err = generate_synthetic(&GeneratorConfig {
            set_b: vec![99],
            ..tiny_cfg()
        })
        .unwrap_err();
        assert!(err.to_string().contains("set_b"), "{err}");
    }

    #[test]
    fn roundtrip_preserves_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.eegb");
        let set = generate_synthetic(&tiny_cfg()).unwrap();
        write_container(&set, &path).unwrap();
        let back = read_container(&path).unwrap();
        assert_eq!(set, back);

        let mut a = Vec::new();
        write_container_to(&set, &mut a).unwrap();
        let mut b = Vec::new();
        write_container_to(&back, &mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(fnv1a64(&a), container_digest(&set));
    }

    #[test]
    fn empty_set_is_24_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.eegb");
        let set = RecordingSet {
            n_channels: 2,
            n_samples: 4,
            sample_rate_hz: 500.0,
            trials: vec![],
        };
        write_container(&set, &path).unwrap();
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 24);
        let back = read_container(&path).unwrap();
        assert_eq!(back.n_trials(), 0);
        assert_eq!(back, set);
    }

    #[test]
    fn file_length_formula() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.eegb");
        let set = RecordingSet {
            n_channels: 2,
            n_samples: 4,
            sample_rate_hz: 100.0,
            trials: vec![Trial {
                subject_id: 0,
                chrono_index: 0,
                label: 1,
                samples: vec![0.5; 8],
            }],
        };
        write_container(&set, &path).unwrap();
        assert_eq!(
            std::fs::metadata(&path).unwrap().len(),
            24 + 9 + 2 * 4 * 4
        );
    }

    #[test]
    fn bad_magic_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.eegb");
        std::fs::write(&path, b"XXXXXXXX\x00\x00\x00\x00").unwrap();
        match read_container(&path).unwrap_err() {
            Error::Format(msg) => assert!(msg.contains("magic"), "{msg}"),
            other => panic!("expected format error, got {other}"),
        }
    }

    #[test]
    fn truncated_payload_reports_counts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.eegb");
        let set = generate_synthetic(&tiny_cfg()).unwrap();
        write_container(&set, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        // keep the header but drop one trial's worth of payload
        std::fs::write(&path, &bytes[..bytes.len() - 10]).unwrap();
        match read_container(&path).unwrap_err() {
            Error::Format(msg) => {
                assert!(msg.contains("bytes"), "{msg}");
            }
            other => panic!("expected format error, got {other}"),
        }
    }

    #[test]
    fn invalid_label_names_trial() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("label.eegb");
        let mut set = generate_synthetic(&tiny_cfg()).unwrap();
        write_container(&set, &path).unwrap();
        // corrupt trial 3's label byte in place
        let mut bytes = std::fs::read(&path).unwrap();
        let record = 9 + 4 * set.n_channels * set.n_samples;
        let off = 24 + 3 * record + 8;
        bytes[off] = 7;
        std::fs::write(&path, &bytes).unwrap();
        match read_container(&path).unwrap_err() {
            Error::Validation(msg) => assert!(msg.contains("trial 3"), "{msg}"),
            other => panic!("expected validation error, got {other}"),
        }
        set.trials[0].label = 7;
        assert!(set.validate().is_err());
    }
}
