//! JSON experiment configuration.
//!
//! Every field except `experiment_id` and `mode` may be omitted; parsing
//! fills mode-dependent defaults, so a parsed config serializes to a fully
//! explicit document that parses back to the same value.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::audit::{AuditParams, Theorem, DEFAULT_GAMMA};
use crate::descent::{DescentConfig, Init, Projection};
use crate::estimators::EstimatorSpec;

use super::CliError;

pub const DEFAULT_SWEEP: [usize; 7] = [1, 2, 4, 8, 16, 32, 64];
/// Trials below which the anti-concentration check refuses to run.
pub const MIN_CLASSIFY_TRIALS: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    Classify,
    AuditThm1,
    AuditThm2,
    AuditThm3,
    SweepT,
}

impl Mode {
    pub fn theorem(self) -> Option<Theorem> {
        match self {
            Mode::Classify => None,
            Mode::AuditThm1 => Some(Theorem::Thm1),
            Mode::AuditThm2 => Some(Theorem::Thm2),
            Mode::AuditThm3 | Mode::SweepT => Some(Theorem::Thm3),
        }
    }

    /// Subcommand that runs this mode.
    pub fn command(self) -> &'static str {
        match self {
            Mode::Classify => "classify",
            Mode::AuditThm1 | Mode::AuditThm2 | Mode::AuditThm3 => "audit",
            Mode::SweepT => "sweep",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Classify => "CLASSIFY",
            Mode::AuditThm1 => "AUDIT_THM1",
            Mode::AuditThm2 => "AUDIT_THM2",
            Mode::AuditThm3 => "AUDIT_THM3",
            Mode::SweepT => "SWEEP_T",
        })
    }
}

/// Descent settings; absent fields take the mode's defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescentSection {
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, rename = "D", skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<Projection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<Init>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub mode: Mode,
    #[serde(default = "EstimatorSpec::spsa")]
    pub estimator: EstimatorSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default = "default_dim")]
    pub d: usize,
    /// Record dimension of the quadratic pair; defaults to `d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    /// Zero-based.
    #[serde(default)]
    pub i_star: usize,
    #[serde(default)]
    pub descent: DescentSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Absent means the theorem default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<usize>>,
    /// Noise scale of the additive-noise row in classification runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify_noise_sigma: Option<f64>,
    /// Output directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

fn default_dim() -> usize {
    2
}

fn default_gamma() -> f64 {
    DEFAULT_GAMMA
}

impl ExperimentConfig {
    /// A config for `mode` with every default filled in.
    pub fn new(experiment_id: impl Into<String>, mode: Mode) -> Self {
        let mut cfg = Self {
            experiment_id: experiment_id.into(),
            mode,
            estimator: EstimatorSpec::spsa(),
            n: None,
            d: default_dim(),
            k: None,
            lipschitz: None,
            i_star: 0,
            descent: DescentSection::default(),
            query_point: None,
            c_s: None,
            trials: None,
            gamma: DEFAULT_GAMMA,
            delta: None,
            master_seed: 0,
            sweep: None,
            classify_noise_sigma: None,
            out_dir: None,
        };
        cfg.fill_defaults();
        cfg
    }

    /// Replace every absent field by the mode's default.
    pub fn fill_defaults(&mut self) {
        let base = AuditParams::new(self.mode.theorem().unwrap_or(Theorem::Thm1), self.estimator.clone(), self.d);
        self.n.get_or_insert(base.n);
        self.k.get_or_insert(self.d);
        self.lipschitz.get_or_insert(base.lipschitz);
        self.c_s.get_or_insert(base.c_s);
        self.trials.get_or_insert(base.trials);
        let ds = &mut self.descent;
        ds.iterations.get_or_insert(base.descent.iterations);
        ds.eta.get_or_insert(base.descent.eta);
        ds.radius.get_or_insert(base.descent.radius);
        ds.projection.get_or_insert(base.descent.projection);
        ds.init.get_or_insert(base.descent.init);
        match self.mode {
            Mode::SweepT => {
                self.sweep.get_or_insert_with(|| DEFAULT_SWEEP.to_vec());
            }
            Mode::Classify => {
                self.classify_noise_sigma.get_or_insert(1.0);
            }
            _ => {}
        }
    }

    pub fn descent_config(&self) -> DescentConfig {
        let base = AuditParams::new(self.mode.theorem().unwrap_or(Theorem::Thm1), self.estimator.clone(), self.d);
        let ds = &self.descent;
        DescentConfig {
            iterations: ds.iterations.unwrap_or(base.descent.iterations),
            eta: ds.eta.unwrap_or(base.descent.eta),
            radius: ds.radius.unwrap_or(base.descent.radius),
            projection: ds.projection.unwrap_or(base.descent.projection),
            init: ds.init.clone().unwrap_or(base.descent.init),
            record_trajectory: false,
        }
    }

    /// Audit parameters for this config, or for iteration count `t` when
    /// given. `None` for classification runs.
    pub fn audit_params(&self, t: Option<usize>) -> Option<AuditParams> {
        let theorem = self.mode.theorem()?;
        let base = AuditParams::new(theorem, self.estimator.clone(), self.d);
        let mut descent = self.descent_config();
        if let Some(t) = t {
            descent.iterations = t;
        }
        Some(AuditParams {
            theorem,
            estimator: self.estimator.clone(),
            n: self.n.unwrap_or(base.n),
            dim: self.d,
            record_dim: self.k.unwrap_or(self.d),
            lipschitz: self.lipschitz.unwrap_or(base.lipschitz),
            i_star: self.i_star,
            descent,
            query_point: self.query_point.clone(),
            c_s: self.c_s.unwrap_or(base.c_s),
            trials: self.trials.unwrap_or(base.trials),
            gamma: self.gamma,
            delta: self.delta,
            master_seed: self.master_seed,
            domain: t.unwrap_or(0) as u64,
        })
    }

    /// Iteration counts audited by this config.
    pub fn iteration_grid(&self) -> Vec<Option<usize>> {
        match (&self.mode, &self.sweep) {
            (Mode::SweepT, Some(ts)) => ts.iter().map(|&t| Some(t)).collect(),
            (Mode::SweepT, None) => DEFAULT_SWEEP.iter().map(|&t| Some(t)).collect(),
            _ => vec![None],
        }
    }

    /// Every violated constraint, phrased as the failed inequality.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.experiment_id.is_empty()
            || self
                .experiment_id
                .chars()
                .any(|c| !(c.is_ascii_alphanumeric() || "-_.".contains(c)))
        {
            out.push(format!(
                "experiment_id must be non-empty and use only [A-Za-z0-9._-] (got {:?})",
                self.experiment_id
            ));
        }
        if self.mode == Mode::Classify {
            if let Err(e) = self.estimator.validate() {
                out.push(e.to_string());
            }
            if self.d < 1 {
                out.push(format!("d >= 1 (got {})", self.d));
            }
            if self.i_star >= self.d {
                out.push(format!("i_star < d (got i_star = {}, d = {})", self.i_star, self.d));
            }
            let trials = self.trials.unwrap_or(MIN_CLASSIFY_TRIALS);
            if trials < MIN_CLASSIFY_TRIALS {
                out.push(format!("trials >= {MIN_CLASSIFY_TRIALS} (got {trials})"));
            }
            let l = self.lipschitz.unwrap_or(1.0);
            if !(l >= 1.0 && l.is_finite()) {
                out.push(format!("L >= 1 so that g = -1 lies in [-L, 0] (got {l})"));
            }
            if let Some(s) = self.classify_noise_sigma {
                if !(s > 0.0 && s.is_finite()) {
                    out.push(format!("classify_noise_sigma > 0 (got {s})"));
                }
            }
            return out;
        }
        if self.mode == Mode::SweepT && self.sweep.as_ref().is_some_and(|s| s.is_empty()) {
            out.push("sweep lists at least one T".to_string());
        }
        for t in self.iteration_grid() {
            let params = self.audit_params(t).expect("audit mode");
            for v in params.violations() {
                let v = match t {
                    Some(t) => format!("at T = {t}: {v}"),
                    None => v,
                };
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "config {:?} is invalid:\n  {}",
                self.experiment_id,
                v.join("\n  ")
            )))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(serde_json::to_vec(self).expect("config serializes"));
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Parse JSON text into a validated config with defaults filled.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("at `{path}`: {}", e.inner()))
    })?;
    cfg.fill_defaults();
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}
