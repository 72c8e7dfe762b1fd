//! Execute a parsed config and write its artifacts.
//!
//! Files written into the output directory, for experiment id `ID`:
//!
//! * audits: `ID.report.json` (sweeps: `ID.T<t>.report.json` per `T`),
//!   one row per report appended to `summary.csv`;
//! * classification: `ID.classify.json` and `ID.classify.csv`;
//! * always: `ID.manifest.json`;
//! * with diagnostic trajectories: `ID[.T<t>].trajectories/<side>-<trial>.csv`.

use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::audit::{
    audit_theorem, classify_ac, classify_zero_preserving, fmt_f64, sample_trajectories,
    AcReport, AcSettings, AuditReport, ZeroPreservingReport, CSV_HEADER,
};
use crate::estimators::{EstimatorKind, EstimatorSpec, Oracle};
use crate::losses::Side;
use crate::stream::child_rng;

use super::config::{ExperimentConfig, Mode};
use super::CliError;

pub const SUMMARY_CSV: &str = "summary.csv";
/// Trajectories dumped per side with `--diagnostic-trajectories`.
pub const DIAGNOSTIC_TRAJECTORIES: u64 = 4;
/// Stream domain of classification runs; audits use the iteration count.
const CLASSIFY_DOMAIN: u64 = u64::MAX;

pub const CLASSIFY_HEADER: [&str; 9] = [
    "estimator",
    "zero_preserving",
    "zero_preserving_failed",
    "anti_concentration",
    "anti_concentration_failed",
    "estimated_c_s",
    "mean",
    "standard_error",
    "nonnegative_samples",
];

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub diagnostic_trajectories: bool,
    /// Worker threads; `None` uses the global pool (one per logical core).
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyRow {
    pub estimator: EstimatorSpec,
    pub label: String,
    pub zero_preserving: ZeroPreservingReport,
    pub anti_concentration: AcReport,
}

impl ClassifyRow {
    pub fn csv_row(&self) -> Vec<String> {
        let zp = &self.zero_preserving;
        let ac = &self.anti_concentration;
        vec![
            self.label.clone(),
            zp.verdict.to_string(),
            zp.failed.join("; "),
            ac.verdict.to_string(),
            ac.failed.join("; "),
            fmt_f64(ac.estimated_c_s),
            fmt_f64(ac.mean),
            fmt_f64(ac.standard_error),
            ac.nonnegative_samples.to_string(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub label: String,
    pub seconds: f64,
}

/// Everything needed to reproduce a run, plus wall-clock timings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment_id: String,
    /// SHA-256 of the canonical JSON config.
    pub config_hash: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub master_seed: u64,
    /// Stream domains used, one per audited configuration.
    pub stream_domains: Vec<u64>,
    pub workers: Option<usize>,
    pub started_unix_ms: u128,
    pub timings: Vec<Timing>,
    pub total_seconds: f64,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub reports: Vec<AuditReport>,
    pub classify: Vec<ClassifyRow>,
    pub manifest: RunManifest,
    pub written: Vec<PathBuf>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

/// Append rows to `summary.csv`, writing the header first if the file is new
/// or empty.
pub fn append_summary(path: &Path, rows: &[Vec<String>]) -> Result<(), CliError> {
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| io_err(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(CSV_HEADER).map_err(|e| io_err(path, e))?;
    }
    for row in rows {
        w.write_record(row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// The five estimators of a classification run: the four base kinds with the
/// configured radii and averaging, and SPSA with additive Gaussian noise.
pub fn classify_estimators(cfg: &ExperimentConfig) -> Vec<EstimatorSpec> {
    let template = cfg.estimator.clone();
    let mut out: Vec<EstimatorSpec> = EstimatorKind::ALL
        .iter()
        .map(|&kind| EstimatorSpec {
            kind,
            additive_sigma: 0.0,
            ..template.clone()
        })
        .collect();
    out.push(
        EstimatorSpec {
            kind: EstimatorKind::Spsa,
            additive_sigma: 0.0,
            ..template
        }
        .with_additive_noise(cfg.classify_noise_sigma.unwrap_or(1.0)),
    );
    out
}

fn run_classify(cfg: &ExperimentConfig) -> Result<Vec<ClassifyRow>, CliError> {
    let trials = cfg.trials.unwrap_or(super::config::MIN_CLASSIFY_TRIALS);
    classify_estimators(cfg)
        .into_iter()
        .enumerate()
        .map(|(row, est)| {
            let mut rng = child_rng(cfg.master_seed, CLASSIFY_DOMAIN, row as u64, 0);
            let zero_preserving = classify_zero_preserving(&est, cfg.d, trials, &mut rng)?;
            let settings = AcSettings {
                lipschitz: cfg.lipschitz.unwrap_or(1.0),
                i_star: cfg.i_star,
                c_s: cfg.c_s.unwrap_or(3.0),
                ..AcSettings::new(-1.0, cfg.d, trials)
            };
            let mut rng = child_rng(cfg.master_seed, CLASSIFY_DOMAIN, row as u64, 1);
            let anti_concentration = classify_ac(&est, &settings, &mut rng)?;
            Ok(ClassifyRow {
                label: est.label(),
                estimator: est,
                zero_preserving,
                anti_concentration,
            })
        })
        .collect()
}

fn write_trajectories(
    dir: &Path,
    params: &crate::audit::AuditParams,
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = Vec::new();
    let mut counters = [0u64; 2];
    for (side, traj) in sample_trajectories(params, DIAGNOSTIC_TRAJECTORIES)? {
        let name = match side {
            Side::X => "x",
            Side::XPrime => "xprime",
        };
        let i = &mut counters[side.tag() as usize];
        let path = dir.join(format!("{name}-{i}.csv"));
        *i += 1;
        let file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        traj.write_csv(file).map_err(|e| io_err(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

fn run_inner(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutput, CliError> {
    let start = Instant::now();
    let started_unix_ms = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    let dir = &opts.out_dir;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let id = &cfg.experiment_id;
    let mut written = Vec::new();
    let mut timings = Vec::new();
    let mut reports = Vec::new();
    let mut classify = Vec::new();
    let mut stream_domains = Vec::new();

    if cfg.mode == Mode::Classify {
        let t0 = Instant::now();
        classify = run_classify(cfg)?;
        timings.push(Timing {
            label: "classify".into(),
            seconds: t0.elapsed().as_secs_f64(),
        });
        stream_domains.push(CLASSIFY_DOMAIN);
        let json = dir.join(format!("{id}.classify.json"));
        write_json(&json, &classify)?;
        let csv_path = dir.join(format!("{id}.classify.csv"));
        let mut w = csv::Writer::from_path(&csv_path).map_err(|e| io_err(&csv_path, e))?;
        w.write_record(CLASSIFY_HEADER).map_err(|e| io_err(&csv_path, e))?;
        for row in &classify {
            w.write_record(row.csv_row()).map_err(|e| io_err(&csv_path, e))?;
        }
        w.flush().map_err(|e| io_err(&csv_path, e))?;
        written.extend([json, csv_path]);
    } else {
        let sweep = cfg.mode == Mode::SweepT;
        for t in cfg.iteration_grid() {
            let params = cfg.audit_params(t).expect("audit mode");
            let stem = match t {
                Some(t) if sweep => format!("{id}.T{t}"),
                _ => id.clone(),
            };
            let t0 = Instant::now();
            let mut report = audit_theorem(&params)?;
            report.experiment_id = id.clone();
            timings.push(Timing {
                label: stem.clone(),
                seconds: t0.elapsed().as_secs_f64(),
            });
            stream_domains.push(params.domain);
            let path = dir.join(format!("{stem}.report.json"));
            write_json(&path, &report)?;
            written.push(path);
            if opts.diagnostic_trajectories {
                written.extend(write_trajectories(
                    &dir.join(format!("{stem}.trajectories")),
                    &params,
                )?);
            }
            reports.push(report);
        }
        let summary = dir.join(SUMMARY_CSV);
        let rows: Vec<_> = reports.iter().map(AuditReport::csv_row).collect();
        append_summary(&summary, &rows)?;
        written.push(summary);
    }

    let manifest = RunManifest {
        experiment_id: id.clone(),
        config_hash: cfg.hash(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        master_seed: cfg.master_seed,
        stream_domains,
        workers: opts.workers,
        started_unix_ms,
        timings,
        total_seconds: start.elapsed().as_secs_f64(),
    };
    let path = dir.join(format!("{id}.manifest.json"));
    write_json(&path, &manifest)?;
    written.push(path);
    Ok(RunOutput {
        reports,
        classify,
        manifest,
        written,
    })
}

/// Run a validated config, writing all artifacts under `opts.out_dir`.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    match opts.workers {
        Some(0) => Err(CliError::Config("--workers must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(format!("worker pool: {e}")))?
            .install(|| run_inner(cfg, opts)),
        None => run_inner(cfg, opts),
    }
}
