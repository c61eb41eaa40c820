//! # twoheads — chronological-half EEG classification benchmark
//!
//! Nonstationary EEG drifts as a subject learns a task, so features selected
//! over a whole recording compromise between regimes. This crate benchmarks
//! the alternative: split each subject's trials into two chronological
//! halves, select features and train classifiers per half, and combine the
//! per-half accuracies by a test-size-weighted average.
//!
//! ## Pipeline overview
//!
//! ```text
//! dataset.eegb
//!   |
//!   |- dataio        seeded synthetic generator + EEGB container I/O
//!   |- dsp           8-13 Hz zero-phase FIR, analytic signal,
//!   |                per-channel amplitude/phase features
//!   |- segmentation  per-subject 1H/2H halving, stratified 0.7:0.15:0.15
//!   |- featsel       ANOVA-F scores, top-k selection (train rows only)
//!   |- classifiers   eight from-scratch families, seeded and deterministic
//!   '- bench         sota / fs / twoheads conditions, five seeded runs,
//!                    weighted combination, runtime accounting, reports
//! ```
//!
//! Everything is deterministic given explicit seeds: generated datasets are
//! bit-identical, model serialization round-trips exactly, and repeated
//! benchmark runs produce byte-identical reports up to wall-clock fields.

pub mod bench;
pub mod classifiers;
pub mod cli;
pub mod dataio;
pub mod dsp;
pub mod error;
pub mod featsel;
pub mod matrix;
pub mod segmentation;

pub use error::{Error, Result};
