//! Alpha-band filtering, analytic signal, and per-channel feature extraction.
//!
//! Pipeline per trial and channel:
//!
//! ```text
//! samples -> zero-phase FIR band-pass (8-13 Hz) -> analytic signal
//!         -> amplitude = mean envelope over the central 80% window
//!         -> phase     = circular mean of instantaneous phase, same window
//! ```
//!
//! The band-pass is applied forward-backward so the phase feature carries no
//! group delay; the effective magnitude response is `|H|^2`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::dataio::RecordingSet;
use crate::error::{Error, Result};

/// FIR band-pass design parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub low_hz: f64,
    pub high_hz: f64,
    /// Tap count; odd so the filter has an exact centre of symmetry.
    pub n_taps: usize,
    pub sample_rate_hz: f64,
}

impl FilterSpec {
    pub fn alpha_band(sample_rate_hz: f64) -> Self {
        FilterSpec {
            low_hz: 8.0,
            high_hz: 13.0,
            n_taps: 101,
            sample_rate_hz,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.low_hz > 0.0) {
            return Err(Error::config("low_hz", "must be > 0"));
        }
        if !(self.high_hz > self.low_hz) {
            return Err(Error::config("high_hz", "must exceed low_hz"));
        }
        if !(self.high_hz < self.sample_rate_hz / 2.0) {
            return Err(Error::config("high_hz", "must be below Nyquist"));
        }
        if self.n_taps < 3 || self.n_taps % 2 == 0 {
            return Err(Error::config("n_taps", "must be odd and >= 3"));
        }
        Ok(())
    }
}

/// DTFT magnitude of a tap sequence at frequency `f_hz` — the closed-form
/// oracle the design is tested against.
pub fn magnitude_at(taps: &[f64], f_hz: f64, sample_rate_hz: f64) -> f64 {
    let omega = 2.0 * std::f64::consts::PI * f_hz / sample_rate_hz;
    let mut re = 0.0;
    let mut im = 0.0;
    for (n, &h) in taps.iter().enumerate() {
        let a = omega * n as f64;
        re += h * a.cos();
        im -= h * a.sin();
    }
    re.hypot(im)
}

fn sinc_lp(cutoff_hz: f64, sample_rate_hz: f64, offset: f64) -> f64 {
    let nu = cutoff_hz / sample_rate_hz;
    if offset == 0.0 {
        2.0 * nu
    } else {
        (2.0 * std::f64::consts::PI * nu * offset).sin() / (std::f64::consts::PI * offset)
    }
}

/// Designs a linear-phase windowed-sinc band-pass: difference of two
/// low-pass sincs at `high_hz` and `low_hz` under a Hamming window, with the
/// residual DC leak nulled and the gain normalized to exactly unity at the
/// geometric centre frequency `sqrt(low * high)`.
///
/// Coefficients are built on one half and mirrored, so `h[k] ==
/// h[n_taps-1-k]` holds bit-exactly.
pub fn design_bandpass(spec: &FilterSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = spec.n_taps;
    let mid = (n - 1) / 2;

    // left half including the centre tap
    let mut half = vec![0.0f64; mid + 1];
    let mut win = vec![0.0f64; mid + 1];
    for k in 0..=mid {
        let offset = k as f64 - mid as f64;
        let ideal = sinc_lp(spec.high_hz, spec.sample_rate_hz, offset)
            - sinc_lp(spec.low_hz, spec.sample_rate_hz, offset);
        let w = 0.54
            - 0.46 * (2.0 * std::f64::consts::PI * k as f64 / (n - 1) as f64).cos();
        half[k] = ideal * w;
        win[k] = w;
    }

    // null the DC leak: subtract a window-shaped correction so sum(h) == 0
    let sum_h = half[mid] + 2.0 * half[..mid].iter().sum::<f64>();
    let sum_w = win[mid] + 2.0 * win[..mid].iter().sum::<f64>();
    let c = sum_h / sum_w;
    for k in 0..=mid {
        half[k] -= c * win[k];
    }

    let mut taps = vec![0.0f64; n];
    for k in 0..=mid {
        taps[k] = half[k];
        taps[n - 1 - k] = half[k];
    }

    let centre = (spec.low_hz * spec.high_hz).sqrt();
    let gain = magnitude_at(&taps, centre, spec.sample_rate_hz);
    for h in &mut taps {
        *h /= gain;
    }
    Ok(taps)
}

/// Dot product with four independent accumulators. The fixed lane order
/// keeps results deterministic while breaking the add-latency chain.
fn dot4(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (mut a0, mut a1, mut a2, mut a3) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (xa, xb) in a[..n].chunks_exact(4).zip(b[..n].chunks_exact(4)) {
        a0 += xa[0] * xb[0];
        a1 += xa[1] * xb[1];
        a2 += xa[2] * xb[2];
        a3 += xa[3] * xb[3];
    }
    let rem = n % 4;
    let mut tail = 0.0;
    for (xa, xb) in a[n - rem..n].iter().zip(&b[n - rem..n]) {
        tail += xa * xb;
    }
    (a0 + a1) + (a2 + a3) + tail
}

fn fir_causal(x: &[f64], h_rev: &[f64], out: &mut Vec<f64>) {
    // y[i] = sum_j h[j] * x[i-j], with h pre-reversed so the inner loop is a
    // contiguous dot product
    out.clear();
    out.resize(x.len(), 0.0);
    let m = h_rev.len();
    let head = (m - 1).min(x.len());
    for i in 0..head {
        out[i] = dot4(&x[..=i], &h_rev[m - 1 - i..]);
    }
    for i in head..x.len() {
        out[i] = dot4(&x[i + 1 - m..=i], h_rev);
    }
}

/// Forward-backward FIR filtering: filter, reverse, filter, reverse.
/// Output length equals input length; the net phase response is zero and the
/// effective magnitude response is `|H|^2`.
fn filter_zero_phase_into(x: &[f64], h_rev: &[f64], pass: &mut Vec<f64>, out: &mut Vec<f64>) {
    fir_causal(x, h_rev, pass);
    pass.reverse();
    fir_causal(pass, h_rev, out);
    out.reverse();
}

pub fn filter_zero_phase(x: &[f64], h: &[f64]) -> Result<Vec<f64>> {
    if x.len() <= 3 * h.len() {
        return Err(Error::Precondition(format!(
            "input length {} must exceed 3 * n_taps = {}",
            x.len(),
            3 * h.len()
        )));
    }
    let h_rev: Vec<f64> = h.iter().rev().copied().collect();
    let mut pass = Vec::new();
    let mut out = Vec::new();
    filter_zero_phase_into(x, &h_rev, &mut pass, &mut out);
    Ok(out)
}

/// Discrete analytic signal via the frequency-domain method with an
/// exact-length DFT (no padding for any `N`).
///
/// Bin weights: DC x1, positive frequencies x2, Nyquist (even `N`) x1,
/// negative frequencies x0. The real part reproduces the input.
pub fn analytic_signal(x: &[f64]) -> Result<Vec<Complex64>> {
    let n = x.len();
    if n < 2 {
        return Err(Error::Precondition(
            "analytic signal needs at least 2 samples".into(),
        ));
    }
    let mut planner = FftPlanner::new();
    analytic_signal_with(&mut planner, x)
}

/// As [`analytic_signal`] but reusing a caller-owned planner, which caches
/// FFT twiddles across the many same-length calls feature extraction makes.
pub fn analytic_signal_with(planner: &mut FftPlanner<f64>, x: &[f64]) -> Result<Vec<Complex64>> {
    let n = x.len();
    if n < 2 {
        return Err(Error::Precondition(
            "analytic signal needs at least 2 samples".into(),
        ));
    }
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);

    let half = (n + 1) / 2;
    for b in buf.iter_mut().take(half).skip(1) {
        *b *= 2.0;
    }
    // bin n/2 (even n) keeps weight 1; everything above is zeroed
    let upper_start = if n % 2 == 0 { n / 2 + 1 } else { half };
    for b in buf.iter_mut().skip(upper_start) {
        *b = Complex64::new(0.0, 0.0);
    }

    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    for b in &mut buf {
        *b *= scale;
    }
    Ok(buf)
}

/// Which quantity a feature column measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Amplitude,
    Phase,
}

impl FeatureKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Amplitude => "amplitude",
            FeatureKind::Phase => "phase",
        }
    }
}

/// Column provenance: which channel, and amplitude or phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureName {
    pub channel: usize,
    pub kind: FeatureKind,
}

/// Row provenance carried alongside the numeric features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowMeta {
    pub subject_id: u32,
    pub chrono_index: u32,
    pub label: u8,
}

/// Trials-by-features matrix with full row and column provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub values: crate::matrix::Matrix,
    pub feature_names: Vec<FeatureName>,
    pub row_meta: Vec<RowMeta>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.values.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.n_cols()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.row_meta.iter().map(|m| m.label).collect()
    }
}

/// Degree of worker parallelism for feature extraction, from the
/// `TWOHEADS_THREADS` environment variable. 0 or unset means sequential.
fn worker_threads() -> usize {
    std::env::var("TWOHEADS_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0)
}

struct ExtractScratch {
    chan: Vec<f64>,
    pass: Vec<f64>,
    filtered: Vec<f64>,
}

impl ExtractScratch {
    fn new() -> Self {
        ExtractScratch {
            chan: Vec::new(),
            pass: Vec::new(),
            filtered: Vec::new(),
        }
    }
}

fn extract_trial_row(
    planner: &mut FftPlanner<f64>,
    scratch: &mut ExtractScratch,
    samples: &[f32],
    n_channels: usize,
    n_samples: usize,
    h_rev: &[f64],
) -> Result<Vec<f64>> {
    let margin = n_samples / 10;
    let window = margin..n_samples - margin;
    let mut row = Vec::with_capacity(2 * n_channels);
    scratch.chan.resize(n_samples, 0.0);
    for c in 0..n_channels {
        for (dst, src) in scratch
            .chan
            .iter_mut()
            .zip(&samples[c * n_samples..(c + 1) * n_samples])
        {
            *dst = f64::from(*src);
        }
        filter_zero_phase_into(&scratch.chan, h_rev, &mut scratch.pass, &mut scratch.filtered);
        let analytic = analytic_signal_with(planner, &scratch.filtered)?;
        let win = &analytic[window.clone()];
        let mut amp_sum = 0.0;
        let mut cos_sum = 0.0;
        let mut sin_sum = 0.0;
        for a in win {
            let norm = (a.re * a.re + a.im * a.im).sqrt();
            amp_sum += norm;
            // unit phasor without trig: cos = re/|a|, sin = im/|a|;
            // a zero sample contributes angle 0 by convention
            if norm > 0.0 {
                cos_sum += a.re / norm;
                sin_sum += a.im / norm;
            } else {
                cos_sum += 1.0;
            }
        }
        let amp = amp_sum / win.len() as f64;
        let mut phase = sin_sum.atan2(cos_sum);
        if phase == -std::f64::consts::PI {
            phase = std::f64::consts::PI;
        }
        row.push(amp);
        row.push(phase);
    }
    Ok(row)
}

/// Extracts the `2 * n_channels` feature vector for every trial, in trial
/// order: channel 0 amplitude, channel 0 phase, channel 1 amplitude, ...
///
/// Amplitude is the mean analytic envelope over the central 80% of samples;
/// phase is the circular mean (atan2 of summed unit phasors) over the same
/// window, with 0 as the zero-signal convention. Parallel extraction (under
/// `TWOHEADS_THREADS`) partitions trials across threads and is bit-identical
/// to the sequential result.
pub fn extract_features(set: &RecordingSet, spec: &FilterSpec) -> Result<FeatureMatrix> {
    spec.validate()?;
    if (spec.sample_rate_hz - f64::from(set.sample_rate_hz)).abs() > 1e-9 {
        return Err(Error::config(
            "sample_rate_hz",
            format!(
                "filter designed for {} Hz but recording is {} Hz",
                spec.sample_rate_hz, set.sample_rate_hz
            ),
        ));
    }
    let taps = design_bandpass(spec)?;
    if set.n_samples <= 3 * taps.len() {
        return Err(Error::Precondition(format!(
            "trial length {} must exceed 3 * n_taps = {}",
            set.n_samples,
            3 * taps.len()
        )));
    }
    let h_rev: Vec<f64> = taps.iter().rev().copied().collect();

    let n_trials = set.n_trials();
    let threads = worker_threads().min(n_trials);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_trials);
    if threads <= 1 {
        let mut planner = FftPlanner::new();
        let mut scratch = ExtractScratch::new();
        for t in &set.trials {
            let row = extract_trial_row(
                &mut planner,
                &mut scratch,
                &t.samples,
                set.n_channels,
                set.n_samples,
                &h_rev,
            )
            .map_err(|e| per_trial_error(t.subject_id, t.chrono_index, e))?;
            rows.push(row);
        }
    } else {
        let mut slots: Vec<Option<Result<Vec<f64>>>> = (0..n_trials).map(|_| None).collect();
        let chunk = n_trials.div_ceil(threads);
        std::thread::scope(|scope| {
            for (chunk_idx, slot_chunk) in slots.chunks_mut(chunk).enumerate() {
                let h_rev = &h_rev;
                let trials = &set.trials;
                let start = chunk_idx * chunk;
                scope.spawn(move || {
                    let mut planner = FftPlanner::new();
                    let mut scratch = ExtractScratch::new();
                    for (off, slot) in slot_chunk.iter_mut().enumerate() {
                        let t = &trials[start + off];
                        *slot = Some(
                            extract_trial_row(
                                &mut planner,
                                &mut scratch,
                                &t.samples,
                                set.n_channels,
                                set.n_samples,
                                h_rev,
                            )
                            .map_err(|e| per_trial_error(t.subject_id, t.chrono_index, e)),
                        );
                    }
                });
            }
        });
        for slot in slots {
            rows.push(slot.expect("all slots filled")?);
        }
    }

    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    let mut values = crate::matrix::Matrix::from_rows(&refs)?;
    if n_trials == 0 {
        values = crate::matrix::Matrix::zeros(0, 2 * set.n_channels);
    }
    let feature_names = (0..set.n_channels)
        .flat_map(|c| {
            [
                FeatureName {
                    channel: c,
                    kind: FeatureKind::Amplitude,
                },
                FeatureName {
                    channel: c,
                    kind: FeatureKind::Phase,
                },
            ]
        })
        .collect();
    let row_meta = set
        .trials
        .iter()
        .map(|t| RowMeta {
            subject_id: t.subject_id,
            chrono_index: t.chrono_index,
            label: t.label,
        })
        .collect();
    Ok(FeatureMatrix {
        values,
        feature_names,
        row_meta,
    })
}

fn per_trial_error(subject: u32, chrono: u32, e: Error) -> Error {
    match e {
        Error::Precondition(msg) => Error::Precondition(format!(
            "subject {subject} chrono {chrono}: {msg}"
        )),
        other => other,
    }
}

/// Writes the feature matrix as CSV: `subject,chrono_index,label` followed
/// by `ch<i>_amp,ch<i>_phase` columns, feature values with 9 significant
/// digits.
pub fn write_features_csv(fm: &FeatureMatrix, rows: &[usize], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_features_csv_to(fm, rows, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_features_csv_to<W: Write>(
    fm: &FeatureMatrix,
    rows: &[usize],
    w: &mut W,
) -> std::io::Result<()> {
    write!(w, "subject,chrono_index,label")?;
    let n_channels = fm.n_cols() / 2;
    for c in 0..n_channels {
        write!(w, ",ch{c}_amp,ch{c}_phase")?;
    }
    writeln!(w)?;
    for &i in rows {
        let m = fm.row_meta[i];
        write!(w, "{},{},{}", m.subject_id, m.chrono_index, m.label)?;
        for v in fm.values.row(i) {
            write!(w, ",{v:.8e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec500() -> FilterSpec {
        FilterSpec::alpha_band(500.0)
    }

    fn db(x: f64) -> f64 {
        20.0 * x.max(1e-300).log10()
    }

    #[test]
    fn design_meets_response_targets() {
        let taps = design_bandpass(&spec500()).unwrap();
        assert_eq!(taps.len(), 101);
        // unity at the geometric centre, checked single-pass and effective
        let centre = (8.0f64 * 13.0).sqrt();
        assert!(db(magnitude_at(&taps, centre, 500.0)).abs() < 1e-9);
        assert!(db(magnitude_at(&taps, 10.2, 500.0)).abs() <= 0.5);
        // stopband, measured through the forward-backward |H|^2 response
        assert!(2.0 * db(magnitude_at(&taps, 2.0, 500.0)) <= -40.0);
        assert!(2.0 * db(magnitude_at(&taps, 30.0, 500.0)) <= -40.0);
    }

    #[test]
    fn design_is_symmetric_and_dc_free() {
        let taps = design_bandpass(&spec500()).unwrap();
        let n = taps.len();
        for k in 0..n {
            assert_eq!(taps[k], taps[n - 1 - k], "tap {k} not mirror-equal");
        }
        let dc: f64 = taps.iter().sum();
        assert!(db(dc.abs()) <= -40.0, "dc gain {} dB", db(dc.abs()));
    }

    #[test]
    fn design_rejects_bad_specs() {
        for bad in [
            FilterSpec { low_hz: 0.0, ..spec500() },
            FilterSpec { high_hz: 7.0, ..spec500() },
            FilterSpec { high_hz: 250.0, ..spec500() },
            FilterSpec { n_taps: 100, ..spec500() },
            FilterSpec { n_taps: 1, ..spec500() },
        ] {
            assert!(design_bandpass(&bad).is_err(), "{bad:?} accepted");
        }
    }

    #[test]
    fn zero_phase_passes_10hz_with_squared_gain_and_no_lag() {
        let taps = design_bandpass(&spec500()).unwrap();
        let n = 2500;
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * 10.0 * i as f64 / 500.0).sin())
            .collect();
        let y = filter_zero_phase(&x, &taps).unwrap();
        let expected_gain = magnitude_at(&taps, 10.0, 500.0).powi(2);
        // central 60%
        let lo = n / 5;
        let hi = n - n / 5;
        let peak = y[lo..hi].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert_relative_eq!(peak, expected_gain, max_relative = 0.03);
        // zero phase lag: correlate output against input and its quadrature
        let mut in_phase = 0.0;
        let mut quad = 0.0;
        for i in lo..hi {
            let arg = 2.0 * std::f64::consts::PI * 10.0 * i as f64 / 500.0;
            in_phase += y[i] * arg.sin();
            quad += y[i] * arg.cos();
        }
        let lag = quad.atan2(in_phase);
        assert!(lag.abs() < 0.01, "phase lag {lag} rad");
    }

    #[test]
    fn zero_phase_rejects_40hz() {
        let taps = design_bandpass(&spec500()).unwrap();
        let n = 2500;
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * 40.0 * i as f64 / 500.0).sin())
            .collect();
        let y = filter_zero_phase(&x, &taps).unwrap();
        let lo = n / 5;
        let hi = n - n / 5;
        let rms_out =
            (y[lo..hi].iter().map(|v| v * v).sum::<f64>() / (hi - lo) as f64).sqrt();
        let rms_in =
            (x[lo..hi].iter().map(|v| v * v).sum::<f64>() / (hi - lo) as f64).sqrt();
        assert!(rms_out / rms_in <= 1e-2, "ratio {}", rms_out / rms_in);
    }

    #[test]
    fn zero_phase_zero_in_zero_out_and_short_input() {
        let taps = design_bandpass(&spec500()).unwrap();
        let x = vec![0.0; 400];
        let y = filter_zero_phase(&x, &taps).unwrap();
        assert_eq!(y.len(), x.len());
        assert!(y.iter().all(|&v| v == 0.0));
        assert!(filter_zero_phase(&vec![0.0; 303], &taps).is_err());
    }

    #[test]
    fn analytic_signal_of_cosine_is_unit_phasor() {
        let omega = 2.0 * std::f64::consts::PI * 10.5 / 500.0;
        // 42 full cycles: no spectral leakage, the discrete result matches
        // the closed-form phasor e^{i omega n} almost exactly
        let n = 2000;
        let x: Vec<f64> = (0..n).map(|i| (omega * i as f64).cos()).collect();
        let a = analytic_signal(&x).unwrap();
        let (lo, hi) = (n / 10, n - n / 10);
        for i in lo..hi {
            assert!((a[i].norm() - 1.0).abs() <= 0.01, "envelope at {i}: {}", a[i].norm());
            let step = (a[i + 1] / a[i]).arg();
            assert!(
                (step - omega).abs() <= 0.01 * omega,
                "phase step at {i}: {step} vs {omega}"
            );
        }

        // at N = 500 the 10.5 Hz cosine covers a half-integer cycle count and
        // the exact-length DFT leaks: the envelope ripples about 2% at the
        // central-window edge while the means stay tight
        let n = 500;
        let x: Vec<f64> = (0..n).map(|i| (omega * i as f64).cos()).collect();
        let a = analytic_signal(&x).unwrap();
        let (lo, hi) = (n / 10, n - n / 10);
        let mut env_sum = 0.0;
        let mut step_sum = 0.0;
        for i in lo..hi {
            assert!((a[i].norm() - 1.0).abs() <= 0.025, "envelope at {i}: {}", a[i].norm());
            env_sum += a[i].norm();
            step_sum += (a[i + 1] / a[i]).arg();
        }
        let win = (hi - lo) as f64;
        assert!((env_sum / win - 1.0).abs() <= 0.005);
        assert!((step_sum / win - omega).abs() <= 0.001 * omega);
    }

    #[test]
    fn analytic_signal_dc_and_reconstruction() {
        let x = vec![3.25; 64];
        let a = analytic_signal(&x).unwrap();
        for v in &a {
            assert_relative_eq!(v.re, 3.25, max_relative = 1e-12);
            assert!(v.im.abs() < 1e-12);
        }
        // random signal: real part reconstructs input, for odd and even N
        for n in [127usize, 128] {
            let x: Vec<f64> = (0..n).map(|i| ((i * 2654435761) % 1000) as f64 / 500.0 - 1.0).collect();
            let a = analytic_signal(&x).unwrap();
            for (ai, xi) in a.iter().zip(&x) {
                assert!((ai.re - xi).abs() <= 1e-9 * xi.abs().max(1.0));
            }
        }
    }

    #[test]
    fn features_isolate_active_channel() {
        use crate::dataio::{RecordingSet, Trial};
        // long enough that the filter transients sit outside the central
        // 80% window and the mean envelope reaches steady state
        let n_samples = 1000;
        let n_channels = 5;
        let mut samples = vec![0.0f32; n_channels * n_samples];
        for i in 0..n_samples {
            samples[3 * n_samples + i] =
                (2.0 * std::f64::consts::PI * 10.0 * i as f64 / 500.0).sin() as f32;
        }
        let set = RecordingSet {
            n_channels,
            n_samples,
            sample_rate_hz: 500.0,
            trials: vec![Trial {
                subject_id: 0,
                chrono_index: 0,
                label: 0,
                samples,
            }],
        };
        let fm = extract_features(&set, &spec500()).unwrap();
        assert_eq!(fm.n_cols(), 2 * n_channels);
        let taps = design_bandpass(&spec500()).unwrap();
        let expect = magnitude_at(&taps, 10.0, 500.0).powi(2);
        let amp3 = fm.values.get(0, 6);
        assert_relative_eq!(amp3, expect, max_relative = 0.03);
        for c in [0usize, 1, 2, 4] {
            assert!(fm.values.get(0, 2 * c) <= 1e-6, "channel {c} leaked");
        }
    }

    #[test]
    fn zero_trial_features_are_zero() {
        use crate::dataio::{RecordingSet, Trial};
        let set = RecordingSet {
            n_channels: 2,
            n_samples: 400,
            sample_rate_hz: 500.0,
            trials: vec![Trial {
                subject_id: 0,
                chrono_index: 0,
                label: 1,
                samples: vec![0.0; 800],
            }],
        };
        let fm = extract_features(&set, &spec500()).unwrap();
        for j in 0..fm.n_cols() {
            assert_eq!(fm.values.get(0, j), 0.0);
        }
    }

    #[test]
    fn scaling_amplitude_only() {
        use crate::dataio::{generate_synthetic, GeneratorConfig};
        let cfg = GeneratorConfig {
            n_channels: 3,
            n_samples: 400,
            set_a: vec![0],
            set_b: vec![1],
            ..GeneratorConfig::new(1, 2)
        };
        let set = generate_synthetic(&cfg).unwrap();
        let a = extract_features(&set, &spec500()).unwrap();
        // power-of-two scale: exact through the whole linear pipeline
        let mut scaled = set.clone();
        for t in &mut scaled.trials {
            for v in &mut t.samples {
                *v *= 2.0;
            }
        }
        let b = extract_features(&scaled, &spec500()).unwrap();
        // non-dyadic scale: the f32 sample rounding perturbs the signal
        // itself, so only near-exactness is available
        let mut scaled25 = set.clone();
        for t in &mut scaled25.trials {
            for v in &mut t.samples {
                *v *= 2.5;
            }
        }
        let c = extract_features(&scaled25, &spec500()).unwrap();
        for i in 0..a.n_rows() {
            for ch in 0..3 {
                let (amp_a, ph_a) = (a.values.get(i, 2 * ch), a.values.get(i, 2 * ch + 1));
                let (amp_b, ph_b) = (b.values.get(i, 2 * ch), b.values.get(i, 2 * ch + 1));
                let (amp_c, ph_c) = (c.values.get(i, 2 * ch), c.values.get(i, 2 * ch + 1));
                assert_eq!(amp_b, 2.0 * amp_a, "dyadic scaling must be exact");
                assert_eq!(ph_a, ph_b, "phase moved under dyadic scaling");
                if amp_a > 1e-12 {
                    assert_relative_eq!(amp_c / amp_a, 2.5, max_relative = 1e-6);
                }
                assert!((ph_a - ph_c).abs() < 1e-6, "phase moved under scaling");
            }
        }
    }

    #[test]
    fn csv_export_shape() {
        use crate::dataio::{generate_synthetic, GeneratorConfig};
        let cfg = GeneratorConfig {
            n_channels: 2,
            n_samples: 400,
            set_a: vec![0],
            set_b: vec![1],
            ..GeneratorConfig::new(1, 2)
        };
        let set = generate_synthetic(&cfg).unwrap();
        let fm = extract_features(&set, &spec500()).unwrap();
        let mut out = Vec::new();
        write_features_csv_to(&fm, &[0, 1], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert_eq!(header.split(',').count(), 3 + 2 * 2);
        assert_eq!(lines.count(), 2);

        let mut empty = Vec::new();
        write_features_csv_to(&fm, &[], &mut empty).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap().lines().count(), 1);
    }
}
