//! Command-line entry point: generation, benchmarking, inspection, and
//! feature export behind one binary.
//!
//! Exit codes are a stable contract for scripting: 0 success, 1 runtime or
//! I/O failure, 2 usage error. Everything on stdout is deterministic for a
//! given invocation; diagnostics go to stderr.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::bench::{
    emit_report, run_benchmark, Condition, ReportFormat, RunReport,
};
use crate::classifiers::{ClassifierKind, Hyperparams};
use crate::dataio::{
    default_channel_sets, generate_synthetic, read_container, write_container, GeneratorConfig,
};
use crate::dsp::{extract_features, write_features_csv, FeatureMatrix, FilterSpec};
use crate::error::{Error, Result};
use crate::featsel::fit_selector;
use crate::segmentation::halves_of_rows;

#[derive(Parser)]
#[command(
    name = "twoheads",
    version,
    about = "Chronological-half EEG feature selection and classification benchmark"
)]
pub struct Cli {
    /// Base seed for generation and benchmark iterations.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Progress notes on stderr.
    #[arg(long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a seeded synthetic dataset and write it as EEGB.
    Generate {
        /// Number of subjects.
        #[arg(long)]
        subjects: usize,
        /// Trials per subject (>= 2).
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 129)]
        channels: usize,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        /// Sample rate in Hz.
        #[arg(long, default_value_t = 500.0)]
        rate: f32,
        #[arg(long, default_value_t = 1.0)]
        noise_sigma: f64,
        /// Carrier frequency of the discriminative sinusoid, Hz.
        #[arg(long, default_value_t = 10.0)]
        carrier: f64,
        #[arg(long, default_value_t = 1.0)]
        base_amp: f64,
        /// Label-dependent amplitude delta.
        #[arg(long, default_value_t = 0.04)]
        contrast: f64,
        /// Fraction of the contrast lost by the final trial, in [0, 1).
        #[arg(long, default_value_t = 0.5)]
        decay: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the benchmark conditions over a dataset and report accuracies.
    Run {
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated classifier names, or `all`.
        #[arg(long, default_value = "all")]
        classifiers: String,
        /// Comma-separated condition names (sota, fs, twoheads), or `all`.
        #[arg(long, default_value = "all")]
        conditions: String,
        /// Features kept by the univariate selector.
        #[arg(long, default_value_t = 50)]
        k: usize,
        /// Number of iterations; seeds are seed, seed+1, ...
        #[arg(long, default_value_t = 5)]
        runs: usize,
        /// Write the full report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Report format: json or csv.
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Print the top F-ranked features for a partition of the data.
    Inspect {
        #[arg(long)]
        data: PathBuf,
        /// Partition to score: all, 1h, or 2h.
        #[arg(long, default_value = "all")]
        half: String,
        /// How many features to list.
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Export extracted features as CSV.
    #[command(name = "export-features")]
    ExportFeatures {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Partition to export: all, 1h, or 2h.
        #[arg(long, default_value = "all")]
        half: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum HalfChoice {
    All,
    First,
    Second,
}

impl HalfChoice {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(HalfChoice::All),
            "1h" => Ok(HalfChoice::First),
            "2h" => Ok(HalfChoice::Second),
            other => Err(Error::Argument(format!(
                "unknown half `{other}`; valid: all, 1h, 2h"
            ))),
        }
    }
}

fn parse_classifiers(s: &str) -> Result<Vec<ClassifierKind>> {
    if s == "all" {
        return Ok(ClassifierKind::ALL.to_vec());
    }
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(ClassifierKind::parse)
        .collect()
}

fn parse_conditions(s: &str) -> Result<Vec<Condition>> {
    if s == "all" {
        return Ok(Condition::ALL.to_vec());
    }
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(Condition::parse)
        .collect()
}

/// Rounds half away from zero to one decimal place.
fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

fn partition_rows(features: &FeatureMatrix, half: HalfChoice) -> Result<Vec<usize>> {
    match half {
        HalfChoice::All => Ok((0..features.n_rows()).collect()),
        HalfChoice::First => Ok(halves_of_rows(&features.row_meta)?.half_1h),
        HalfChoice::Second => Ok(halves_of_rows(&features.row_meta)?.half_2h),
    }
}

fn load_features(data: &PathBuf, verbose: bool) -> Result<FeatureMatrix> {
    let set = read_container(data)?;
    if verbose {
        eprintln!(
            "loaded {} trials ({} channels x {} samples) from {}",
            set.n_trials(),
            set.n_channels,
            set.n_samples,
            data.display()
        );
    }
    let spec = FilterSpec::alpha_band(f64::from(set.sample_rate_hz));
    extract_features(&set, &spec)
}

/// Prints the accuracy summary: one row per classifier, one column per
/// condition (three for twoheads), one decimal place.
fn print_summary(report: &RunReport, kinds: &[ClassifierKind], conditions: &[Condition]) {
    let mut headers: Vec<&str> = vec![];
    for c in conditions {
        match c {
            Condition::Sota => headers.push("SOTA"),
            Condition::Fs => headers.push("FS"),
            Condition::Twoheads => headers.extend(["1H", "2H", "1H+2H"]),
        }
    }
    print!("{:<20}", "classifier");
    for h in &headers {
        print!("{h:>10}");
    }
    println!();
    for kind in kinds {
        print!("{:<20}", kind.name());
        for c in conditions {
            let cell = report
                .cells
                .iter()
                .find(|cell| cell.classifier == kind.name() && cell.condition == c.name())
                .expect("cell present for every (kind, condition)");
            match c {
                Condition::Twoheads => {
                    print!("{:>10.1}", round1(cell.mean_acc_1h_pct.unwrap_or(f64::NAN)));
                    print!("{:>10.1}", round1(cell.mean_acc_2h_pct.unwrap_or(f64::NAN)));
                    print!("{:>10.1}", round1(cell.mean_accuracy_pct));
                }
                _ => print!("{:>10.1}", round1(cell.mean_accuracy_pct)),
            }
        }
        println!();
    }
}

fn cmd_generate(cli_seed: u64, cmd: &Command) -> Result<()> {
    let Command::Generate {
        subjects,
        trials,
        channels,
        samples,
        rate,
        noise_sigma,
        carrier,
        base_amp,
        contrast,
        decay,
        out,
    } = cmd
    else {
        unreachable!()
    };
    let (set_a, set_b) = default_channel_sets(*channels);
    let cfg = GeneratorConfig {
        n_subjects: *subjects,
        trials_per_subject: *trials,
        n_channels: *channels,
        n_samples: *samples,
        sample_rate_hz: *rate,
        seed: cli_seed,
        noise_sigma: *noise_sigma,
        carrier_hz: *carrier,
        base_amp: *base_amp,
        contrast: *contrast,
        decay: *decay,
        set_a,
        set_b,
    };
    cfg.validate()?;
    let set = generate_synthetic(&cfg)?;
    write_container(&set, out)?;
    println!(
        "generated {} trials, {} subjects -> {}",
        set.n_trials(),
        subjects,
        out.display()
    );
    Ok(())
}

fn cmd_run(cli_seed: u64, verbose: bool, cmd: &Command) -> Result<()> {
    let Command::Run {
        data,
        classifiers,
        conditions,
        k,
        runs,
        report: report_path,
        format,
    } = cmd
    else {
        unreachable!()
    };
    let kinds = parse_classifiers(classifiers)?;
    let conds = parse_conditions(conditions)?;
    let fmt = ReportFormat::parse(format)?;
    if *runs == 0 {
        return Err(Error::Argument("--runs must be >= 1".into()));
    }
    if *k == 0 {
        return Err(Error::Argument("--k must be >= 1".into()));
    }
    let seeds: Vec<u64> = (0..*runs as u64).map(|i| cli_seed + i).collect();

    let set = read_container(data)?;
    if verbose {
        eprintln!(
            "benchmarking {} classifiers x {} conditions x {} seeds on {} trials",
            kinds.len(),
            conds.len(),
            seeds.len(),
            set.n_trials()
        );
    }
    let hp = Hyperparams::default();
    let report = run_benchmark(&set, &kinds, &conds, *k, &hp, &seeds)?;
    if let Some(path) = report_path {
        emit_report(&report, path, fmt)?;
        if verbose {
            eprintln!("report written to {}", path.display());
        }
    }
    print_summary(&report, &kinds, &conds);
    Ok(())
}

fn cmd_inspect(verbose: bool, cmd: &Command) -> Result<()> {
    let Command::Inspect { data, half, top } = cmd else {
        unreachable!()
    };
    let half = HalfChoice::parse(half)?;
    if *top == 0 {
        return Err(Error::Argument("--top must be >= 1".into()));
    }
    let features = load_features(data, verbose)?;
    let rows = partition_rows(&features, half)?;
    let x = features.values.select_rows(&rows);
    let y: Vec<u8> = rows.iter().map(|&i| features.row_meta[i].label).collect();
    let model = fit_selector(&x, &y, x.n_cols().max(1))?;

    let mut order: Vec<usize> = (0..model.scores.len()).collect();
    order.sort_by(|&a, &b| {
        model.scores[b]
            .partial_cmp(&model.scores[a])
            .expect("F-scores are never NaN")
            .then_with(|| a.cmp(&b))
    });
    println!("{:>4}  {:>7}  {:<9}  {:>14}", "rank", "channel", "kind", "f_score");
    for (rank, &f) in order.iter().take(*top).enumerate() {
        let name = features.feature_names[f];
        println!(
            "{:>4}  {:>7}  {:<9}  {:>14.6e}",
            rank + 1,
            name.channel,
            name.kind.name(),
            model.scores[f]
        );
    }
    Ok(())
}

fn cmd_export(verbose: bool, cmd: &Command) -> Result<()> {
    let Command::ExportFeatures { data, out, half } = cmd else {
        unreachable!()
    };
    let half = HalfChoice::parse(half)?;
    let features = load_features(data, verbose)?;
    let rows = partition_rows(&features, half)?;
    write_features_csv(&features, &rows, out)?;
    println!("exported {} rows -> {}", rows.len(), out.display());
    Ok(())
}

/// Flag validation that must reject before any work starts, mapped to
/// exit 2.
fn validate_flags(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate { trials, .. } => {
            if *trials < 2 {
                return Err(Error::Argument("--trials must be >= 2".into()));
            }
            Ok(())
        }
        Command::Run {
            classifiers,
            conditions,
            format,
            runs,
            k,
            ..
        } => {
            parse_classifiers(classifiers)?;
            parse_conditions(conditions)?;
            ReportFormat::parse(format)?;
            if *runs == 0 {
                return Err(Error::Argument("--runs must be >= 1".into()));
            }
            if *k == 0 {
                return Err(Error::Argument("--k must be >= 1".into()));
            }
            Ok(())
        }
        Command::Inspect { half, top, .. } => {
            HalfChoice::parse(half)?;
            if *top == 0 {
                return Err(Error::Argument("--top must be >= 1".into()));
            }
            Ok(())
        }
        Command::ExportFeatures { half, .. } => {
            HalfChoice::parse(half)?;
            Ok(())
        }
    }
}

/// Parses and executes; returns the process exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = validate_flags(&cli) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let outcome = match &cli.command {
        Command::Generate { .. } => cmd_generate(cli.seed, &cli.command),
        Command::Run { .. } => cmd_run(cli.seed, cli.verbose, &cli.command),
        Command::Inspect { .. } => cmd_inspect(cli.verbose, &cli.command),
        Command::ExportFeatures { .. } => cmd_export(cli.verbose, &cli.command),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                // config rejections are usage errors even when they surface
                // during execution
                Error::Config { .. } | Error::Argument(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classifier_list_parsing() {
        assert_eq!(parse_classifiers("all").unwrap().len(), 8);
        let kinds = parse_classifiers("gnb,knn").unwrap();
        assert_eq!(kinds, vec![ClassifierKind::GaussianNb, ClassifierKind::Knn]);
        assert!(parse_classifiers("cnn").is_err());
    }

    #[test]
    fn condition_list_parsing() {
        assert_eq!(parse_conditions("all").unwrap().len(), 3);
        assert!(parse_conditions("deep").is_err());
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(round1(96.45), 96.5);
        assert_eq!(round1(-96.45), -96.5);
        assert_eq!(round1(93.04), 93.0);
        assert_eq!(round1(92.75), 92.8);
    }

    #[test]
    fn half_choice_parsing() {
        assert_eq!(HalfChoice::parse("1h").unwrap(), HalfChoice::First);
        assert!(HalfChoice::parse("3h").is_err());
    }
}
