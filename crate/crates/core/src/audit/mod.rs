//! Monte Carlo privacy audits.
//!
//! A distinguishing experiment runs a mechanism many times on each side of a
//! neighboring dataset pair, counts how often the released output lands in
//! an event `S`, and turns the two counts into exact one-sided binomial
//! bounds. If `p.lo - delta > q.hi` then, with confidence at least
//! `1 - 2 gamma`, the mechanism is not `(eps, delta)`-DP for any
//! `eps < ln((p.lo - delta) / q.hi)`.
//!
//! Trial `i` on side `s` always draws from the stream
//! `StreamId(master_seed, domain, s, i)`, so reports are a pure function of
//! the parameters and the seed regardless of thread scheduling.

pub mod binomial;
pub mod classify;

use std::fmt;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descent::{run_descent, DescentConfig, Init, Projection, Trajectory};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorSpec, Oracle};
use crate::losses::{linear_pair, norm, quadratic_pair, LossSpec, Side};
use crate::stream::{child_rng, TrialRng};
use crate::theory::{thm3_bounds, BoundReport, Thm3Params};

pub use binomial::{clopper_pearson, Bound, ProbEstimate};
pub use classify::{
    classify_ac, classify_zero_preserving, AcReport, AcSettings, ConstantOracle, Verdict,
    ZeroPreservingReport,
};

pub const MIN_TRIALS: u64 = 1000;
pub const DEFAULT_GAMMA: f64 = 0.01;
/// `delta` used for the fixed-initialization audits when none is given.
pub const DEFAULT_SINGLETON_DELTA: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventSpec {
    /// Bitwise equality with `target`.
    ExactPoint { target: Vec<f64> },
    /// `w[i_star] >= threshold`, zero-based `i_star`.
    CoordAtLeast { i_star: usize, threshold: f64 },
}

impl EventSpec {
    pub fn contains(&self, w: &[f64]) -> bool {
        match self {
            EventSpec::ExactPoint { target } => {
                w.len() == target.len()
                    && w.iter().zip(target).all(|(a, b)| a.to_bits() == b.to_bits())
            }
            EventSpec::CoordAtLeast { i_star, threshold } => {
                w.get(*i_star).is_some_and(|x| x >= threshold)
            }
        }
    }
}

/// Hit estimates on both sides of a pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distinguished {
    pub x: ProbEstimate,
    pub x_prime: ProbEstimate,
}

impl Distinguished {
    pub fn side(&self, side: Side) -> &ProbEstimate {
        match side {
            Side::X => &self.x,
            Side::XPrime => &self.x_prime,
        }
    }
}

/// Run `trials` independent copies of `mechanism` on each side and count
/// event hits.
///
/// `mechanism(side, rng)` must return the released output for one run.
pub fn run_distinguisher<M>(
    mechanism: M,
    event: &EventSpec,
    trials: u64,
    gamma: f64,
    master_seed: u64,
    domain: u64,
) -> Result<Distinguished>
where
    M: Fn(Side, &mut TrialRng) -> Result<Vec<f64>> + Sync,
{
    if trials < MIN_TRIALS {
        return Err(Error::invalid(format!(
            "need at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    let count = |side: Side| -> Result<u64> {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = child_rng(master_seed, domain, side.tag(), i);
                mechanism(side, &mut rng)
                    .map(|w| u64::from(event.contains(&w)))
                    .map_err(|e| Error::Trial {
                        trial: i,
                        source: Box::new(e),
                    })
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))
    };
    let hits_x = count(Side::X)?;
    let hits_xp = count(Side::XPrime)?;
    Ok(Distinguished {
        x: ProbEstimate::new(hits_x, trials, gamma)?,
        x_prime: ProbEstimate::new(hits_xp, trials, gamma)?,
    })
}

/// `ln((p.lo - delta) / q.hi)` when the bounds certify a violation.
///
/// Returns `None` when `p.lo <= delta + q.hi`. `delta` must lie in `[0, 1)`.
pub fn eps_lower_bound(p: &ProbEstimate, q: &ProbEstimate, delta: f64) -> Option<f64> {
    debug_assert!((0.0..1.0).contains(&delta));
    let excess = p.lo - delta;
    if excess <= q.hi {
        None
    } else if q.hi == 0.0 {
        Some(f64::INFINITY)
    } else {
        Some((excess / q.hi).ln())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Theorem {
    /// Raw oracle output on the quadratic pair.
    Thm1,
    /// Final iterate from a fixed start, quadratic pair, ball constraint.
    Thm2,
    /// Final iterate from a Gaussian start, linear pair, box constraint.
    Thm3,
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theorem::Thm1 => "THM1",
            Theorem::Thm2 => "THM2",
            Theorem::Thm3 => "THM3",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AuditVerdict {
    Violation,
    NoViolationDetected,
}

impl fmt::Display for AuditVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AuditVerdict::Violation => "VIOLATION",
            AuditVerdict::NoViolationDetected => "NO_VIOLATION_DETECTED",
        })
    }
}

/// Everything needed to reproduce one audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditParams {
    pub theorem: Theorem,
    pub estimator: EstimatorSpec,
    pub n: usize,
    /// Model dimension `d`.
    pub dim: usize,
    /// Record dimension `k` of the quadratic pair.
    pub record_dim: usize,
    pub lipschitz: f64,
    /// Zero-based distinguished coordinate of the linear pair.
    pub i_star: usize,
    pub descent: DescentConfig,
    /// Query point of the raw-oracle audit. Defaults to the fixed start.
    pub query_point: Option<Vec<f64>>,
    pub c_s: f64,
    pub trials: u64,
    pub gamma: f64,
    pub delta: Option<f64>,
    pub master_seed: u64,
    /// Stream domain; distinct values give independent audits under one seed.
    pub domain: u64,
}

impl AuditParams {
    /// Defaults for `theorem` on a `dim`-dimensional model.
    pub fn new(theorem: Theorem, estimator: EstimatorSpec, dim: usize) -> Self {
        let mut point = vec![0.0; dim];
        if let Some(first) = point.first_mut() {
            *first = 0.1;
        }
        let descent = match theorem {
            Theorem::Thm1 | Theorem::Thm2 => DescentConfig {
                iterations: 10,
                eta: 0.1,
                radius: 1.0,
                projection: Projection::Ball,
                init: Init::Fixed { point },
                record_trajectory: false,
            },
            Theorem::Thm3 => DescentConfig {
                iterations: 8,
                eta: 0.01,
                radius: 1.0,
                projection: Projection::Box,
                init: Init::Gaussian {
                    sigma: 1.0 / 1020.0,
                },
                record_trajectory: false,
            },
        };
        let (n, lipschitz, trials) = match theorem {
            Theorem::Thm3 => (100, 100.0, 100_000),
            _ => (1, 1.0, 10_000),
        };
        Self {
            theorem,
            estimator,
            n,
            dim,
            record_dim: dim,
            lipschitz,
            i_star: 0,
            descent,
            query_point: None,
            c_s: 3.0,
            trials,
            gamma: DEFAULT_GAMMA,
            delta: None,
            master_seed: 0,
            domain: 0,
        }
    }

    pub fn thm3_params(&self) -> Option<Thm3Params> {
        match self.descent.init {
            Init::Gaussian { sigma } => Some(Thm3Params {
                n: self.n,
                eta: self.descent.eta,
                lipschitz: self.lipschitz,
                sigma,
                radius: self.descent.radius,
                c_s: self.c_s,
                iterations: self.descent.iterations,
            }),
            Init::Fixed { .. } => None,
        }
    }

    fn raw_query_point(&self) -> Vec<f64> {
        if let Some(p) = &self.query_point {
            return p.clone();
        }
        match &self.descent.init {
            Init::Fixed { point } => point.clone(),
            Init::Gaussian { .. } => {
                let mut p = vec![0.0; self.dim];
                p[0] = 0.1;
                p
            }
        }
    }

    /// Every violated precondition, phrased as the failed inequality.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(e) = self.estimator.validate() {
            out.push(e.to_string());
        }
        if self.n < 1 {
            out.push(format!("n >= 1 (got {})", self.n));
        }
        if self.dim < 1 {
            out.push(format!("d >= 1 (got {})", self.dim));
        }
        if self.record_dim < 1 {
            out.push(format!("k >= 1 (got {})", self.record_dim));
        }
        if !(self.lipschitz > 0.0 && self.lipschitz.is_finite()) {
            out.push(format!("L > 0 (got {})", self.lipschitz));
        }
        if self.trials < MIN_TRIALS {
            out.push(format!("trials >= {MIN_TRIALS} (got {})", self.trials));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            out.push(format!("0 < gamma < 1 (got {})", self.gamma));
        }
        if let Some(delta) = self.delta {
            if !(0.0..1.0).contains(&delta) {
                out.push(format!("0 <= delta < 1 (got {delta})"));
            }
        }
        let cfg = &self.descent;
        match self.theorem {
            Theorem::Thm1 => {
                let w = self.raw_query_point();
                if w.len() != self.dim {
                    out.push(format!("query point has dimension d = {} (got {})", self.dim, w.len()));
                } else if w.iter().all(|x| *x == 0.0) {
                    out.push("query point w != 0".to_string());
                }
            }
            Theorem::Thm2 => {
                if let Err(e) = cfg.validate(self.dim) {
                    out.push(e.to_string());
                }
                if !(cfg.eta > 0.0) {
                    out.push(format!("eta > 0 (got {})", cfg.eta));
                }
                match &cfg.init {
                    Init::Fixed { point } => {
                        if !(norm(point) < cfg.radius) {
                            out.push(format!(
                                "|w0| < D (got |w0| = {}, D = {})",
                                norm(point),
                                cfg.radius
                            ));
                        }
                    }
                    Init::Gaussian { .. } => out.push("fixed initialization w0".to_string()),
                }
            }
            Theorem::Thm3 => {
                if let Err(e) = cfg.validate(self.dim) {
                    out.push(e.to_string());
                }
                if self.i_star >= self.dim {
                    out.push(format!("i_star < d (got i_star = {}, d = {})", self.i_star, self.dim));
                }
                if cfg.projection != Projection::Box {
                    out.push("box constraint [-D, D]^d".to_string());
                }
                match self.thm3_params() {
                    Some(p) => out.extend(p.violations()),
                    None => out.push("Gaussian initialization N(0, sigma^2 I)".to_string()),
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Hypothesis(v))
        }
    }

    fn loss_spec(&self) -> Result<LossSpec> {
        match self.theorem {
            Theorem::Thm1 | Theorem::Thm2 => LossSpec::new(
                quadratic_pair(self.n, self.record_dim, self.lipschitz)?,
                self.dim,
            ),
            Theorem::Thm3 => LossSpec::new(
                linear_pair(self.n, self.dim, self.lipschitz, self.i_star)?,
                self.dim,
            ),
        }
    }

    /// Side on which the event is expected to be likely.
    pub fn high_side(&self) -> Side {
        match self.theorem {
            Theorem::Thm1 | Theorem::Thm2 => Side::X,
            Theorem::Thm3 => Side::XPrime,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub experiment_id: String,
    pub theorem: Theorem,
    pub estimator: String,
    pub params: AuditParams,
    pub event: EventSpec,
    /// Side whose estimate is `p`; `q` is the other side.
    pub p_side: Side,
    pub p: ProbEstimate,
    pub q: ProbEstimate,
    pub delta: f64,
    pub eps_lb: Option<f64>,
    pub theory: Option<BoundReport>,
    pub verdict: AuditVerdict,
    pub seed: u64,
}

impl AuditReport {
    pub fn hits(&self, side: Side) -> u64 {
        if side == self.p_side {
            self.p.hits
        } else {
            self.q.hits
        }
    }

    /// Empirical-versus-theory check for random-initialization audits:
    /// `(p_hat >= p_lower - 3 sqrt(p_lower / trials),
    ///   q_hat <= q_upper + 3 sqrt(1 / trials))`.
    pub fn theory_sandwich(&self) -> Option<(bool, bool)> {
        let b = self.theory.as_ref()?;
        let trials = self.p.trials as f64;
        let lower = b.p_lower();
        let upper = b.log_q_upper().exp();
        Some((
            self.p.p_hat >= lower - 3.0 * (lower / trials).sqrt(),
            self.q.p_hat <= upper + 3.0 * (1.0 / trials).sqrt(),
        ))
    }
}

struct Mechanism {
    spec: LossSpec,
    params: AuditParams,
}

impl Mechanism {
    fn release(&self, side: Side, rng: &mut dyn RngCore, record: bool) -> Result<Trajectory> {
        let loss = self.spec.build_loss(side);
        let est: &dyn Oracle = &self.params.estimator;
        match self.params.theorem {
            Theorem::Thm1 => {
                let w = self.params.raw_query_point();
                let u = est.draw(&loss, &w, rng)?;
                Ok(Trajectory {
                    iterates: vec![w, u.value],
                    seed: None,
                })
            }
            Theorem::Thm2 | Theorem::Thm3 => {
                let mut cfg = self.params.descent.clone();
                cfg.record_trajectory = record;
                run_descent(&loss, est, &cfg, rng)
            }
        }
    }
}

fn event_for(params: &AuditParams, theory: Option<&BoundReport>) -> EventSpec {
    match params.theorem {
        Theorem::Thm1 => EventSpec::ExactPoint {
            target: vec![0.0; params.dim],
        },
        Theorem::Thm2 => EventSpec::ExactPoint {
            target: params.raw_query_point(),
        },
        Theorem::Thm3 => EventSpec::CoordAtLeast {
            i_star: params.i_star,
            threshold: theory.map_or(params.descent.radius, |b| b.s_threshold),
        },
    }
}

/// Run the distinguishing experiment prescribed by `params.theorem`.
///
/// Only the released output enters the certificate: the raw oracle draw for
/// [`Theorem::Thm1`], the final iterate otherwise.
pub fn audit_theorem(params: &AuditParams) -> Result<AuditReport> {
    params.validate()?;
    let theory = match params.theorem {
        Theorem::Thm3 => Some(thm3_bounds(&params.thm3_params().expect("validated"))?),
        _ => None,
    };
    let delta = params.delta.unwrap_or(match &theory {
        Some(b) => b.delta_max / 2.0,
        None => DEFAULT_SINGLETON_DELTA,
    });
    let event = event_for(params, theory.as_ref());
    let mech = Mechanism {
        spec: params.loss_spec()?,
        params: params.clone(),
    };
    let outcome = run_distinguisher(
        |side, rng| Ok(mech.release(side, rng, false)?.last().to_vec()),
        &event,
        params.trials,
        params.gamma,
        params.master_seed,
        params.domain,
    )?;
    let p_side = params.high_side();
    let q_side = if p_side == Side::X { Side::XPrime } else { Side::X };
    let p = outcome.side(p_side).clone();
    let q = outcome.side(q_side).clone();
    let eps_lb = eps_lower_bound(&p, &q, delta);
    Ok(AuditReport {
        experiment_id: String::new(),
        theorem: params.theorem,
        estimator: params.estimator.label(),
        params: params.clone(),
        event,
        p_side,
        p,
        q,
        delta,
        eps_lb,
        theory,
        verdict: if eps_lb.is_some() {
            AuditVerdict::Violation
        } else {
            AuditVerdict::NoViolationDetected
        },
        seed: params.master_seed,
    })
}

/// Replay the first `count` trials on each side with the trajectory recorded.
///
/// Uses the same streams as [`audit_theorem`], so the final iterates match the
/// audited runs. Diagnostic only; never part of a certificate.
pub fn sample_trajectories(params: &AuditParams, count: u64) -> Result<Vec<(Side, Trajectory)>> {
    params.validate()?;
    let mech = Mechanism {
        spec: params.loss_spec()?,
        params: params.clone(),
    };
    let mut out = Vec::new();
    for side in Side::BOTH {
        for i in 0..count.min(params.trials) {
            let mut rng = child_rng(params.master_seed, params.domain, side.tag(), i);
            let mut traj = mech.release(side, &mut rng, true)?;
            traj.seed = Some(params.master_seed);
            out.push((side, traj));
        }
    }
    Ok(out)
}

pub const CSV_HEADER: [&str; 20] = [
    "experiment_id",
    "theorem",
    "estimator",
    "n",
    "d",
    "T",
    "eta",
    "D",
    "sigma",
    "trials",
    "hits_x",
    "hits_xprime",
    "p_lo",
    "q_hi",
    "delta",
    "eps_lb",
    "c1",
    "c2",
    "verdict",
    "seed",
];

/// 17 significant digits; round-trips exactly through `str::parse::<f64>`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl AuditReport {
    /// One summary row, in [`CSV_HEADER`] order. Absent values are empty.
    pub fn csv_row(&self) -> Vec<String> {
        let params = &self.params;
        let descent_used = params.theorem != Theorem::Thm1;
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        let sigma = match params.descent.init {
            Init::Gaussian { sigma } if descent_used => Some(sigma),
            _ => None,
        };
        vec![
            self.experiment_id.clone(),
            self.theorem.to_string(),
            self.estimator.clone(),
            params.n.to_string(),
            params.dim.to_string(),
            if descent_used {
                params.descent.iterations.to_string()
            } else {
                String::new()
            },
            opt(descent_used.then_some(params.descent.eta)),
            opt(descent_used.then_some(params.descent.radius)),
            opt(sigma),
            params.trials.to_string(),
            self.hits(Side::X).to_string(),
            self.hits(Side::XPrime).to_string(),
            fmt_f64(self.p.lo),
            fmt_f64(self.q.hi),
            fmt_f64(self.delta),
            opt(self.eps_lb),
            opt(self.theory.as_ref().map(|b| b.c1)),
            opt(self.theory.as_ref().map(|b| b.c2)),
            self.verdict.to_string(),
            self.seed.to_string(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn estimate(hits: u64, trials: u64) -> ProbEstimate {
        ProbEstimate::new(hits, trials, 0.01).unwrap()
    }

    #[test]
    fn certificate_arithmetic() {
        let p = ProbEstimate {
            hits: 0,
            trials: 0,
            p_hat: 1.0,
            lo: 0.999,
            hi: 1.0,
            gamma: 0.01,
        };
        let q = ProbEstimate {
            lo: 0.0,
            hi: 4.6e-4,
            p_hat: 0.0,
            ..p.clone()
        };
        let eps = eps_lower_bound(&p, &q, 0.001).unwrap();
        assert!((eps - (0.998f64 / 0.00046).ln()).abs() < 1e-12);
        assert!((eps - 7.68).abs() < 0.01);
        let weak = ProbEstimate { lo: 0.0005, ..p };
        assert_eq!(eps_lower_bound(&weak, &q, 0.001), None);
    }

    #[test]
    fn certificate_is_valid_by_construction() {
        for (hp, hq) in [(1000, 0), (900, 3), (400, 100), (10, 9)] {
            let (p, q) = (estimate(hp, 1000), estimate(hq, 1000));
            for delta in [0.0, 0.01, 0.2] {
                if let Some(eps) = eps_lower_bound(&p, &q, delta) {
                    assert!(p.lo >= eps.exp() * q.hi + delta - 1e-12);
                }
            }
        }
    }

    #[test]
    fn events() {
        let e = EventSpec::ExactPoint {
            target: vec![0.1, 0.0],
        };
        assert!(e.contains(&[0.1, 0.0]));
        assert!(!e.contains(&[0.1, -0.0]));
        assert!(!e.contains(&[0.1]));
        let e = EventSpec::CoordAtLeast {
            i_star: 1,
            threshold: 0.5,
        };
        assert!(e.contains(&[0.0, 0.5]) && !e.contains(&[9.0, 0.49]));
    }

    #[test]
    fn distinguisher_rejects_too_few_trials() {
        let ev = EventSpec::ExactPoint { target: vec![0.0] };
        let err = run_distinguisher(|_, _| Ok(vec![0.0]), &ev, 0, 0.01, 0, 0).unwrap_err();
        assert!(err.is_input_error());
    }

    #[test]
    fn distinguisher_reports_failing_trial() {
        let ev = EventSpec::ExactPoint { target: vec![0.0] };
        let err = run_distinguisher(
            |_, rng| {
                if rng.next_u32() % 97 == 0 {
                    Err(Error::invalid("boom"))
                } else {
                    Ok(vec![0.0])
                }
            },
            &ev,
            5000,
            0.01,
            0,
            0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Trial { .. }));
    }

    #[test]
    fn thm1_default_audit() {
        let mut params = AuditParams::new(Theorem::Thm1, EstimatorSpec::spsa(), 2);
        params.trials = 2000;
        let r = audit_theorem(&params).unwrap();
        assert_eq!(r.hits(Side::X), 2000);
        assert_eq!(r.hits(Side::XPrime), 0);
        assert_eq!(r.verdict, AuditVerdict::Violation);
        assert_eq!(r, audit_theorem(&params).unwrap());
    }

    #[test]
    fn thm2_hypotheses() {
        let mut params = AuditParams::new(Theorem::Thm2, EstimatorSpec::spsa(), 2);
        params.descent.init = Init::Fixed {
            point: vec![1.0, 0.0],
        };
        params.descent.eta = 0.0;
        match audit_theorem(&params) {
            Err(Error::Hypothesis(v)) => {
                assert_eq!(v.len(), 2, "{v:?}");
                assert!(v.iter().any(|s| s.starts_with("|w0| < D")));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn thm3_hypotheses() {
        let mut params = AuditParams::new(Theorem::Thm3, EstimatorSpec::spsa(), 2);
        params.descent.radius = 0.005;
        params.descent.projection = Projection::Ball;
        let v = params.violations();
        assert!(v.iter().any(|s| s.starts_with("D > eta*L/(2n)")), "{v:?}");
        assert!(v.iter().any(|s| s.starts_with("box constraint")));
    }

    #[test]
    fn trajectories_replay_audited_streams() {
        let mut params = AuditParams::new(Theorem::Thm3, EstimatorSpec::fd(), 2);
        params.trials = 1000;
        let trajs = sample_trajectories(&params, 3).unwrap();
        assert_eq!(trajs.len(), 6);
        let mech = Mechanism {
            spec: params.loss_spec().unwrap(),
            params: params.clone(),
        };
        for (i, (side, traj)) in trajs.iter().enumerate() {
            assert_eq!(traj.iterates.len(), params.descent.iterations + 1);
            let mut rng = child_rng(0, 0, side.tag(), (i % 3) as u64);
            let fin = mech.release(*side, &mut rng, false).unwrap();
            assert_eq!(fin.last(), traj.last());
        }
    }

    #[test]
    fn csv_row_shape() {
        let mut params = AuditParams::new(Theorem::Thm1, EstimatorSpec::spsa(), 2);
        params.trials = 1000;
        let r = audit_theorem(&params).unwrap();
        let row = r.csv_row();
        assert_eq!(row.len(), CSV_HEADER.len());
        assert_eq!(row[5], "");
        assert_eq!(row[10], "1000");
        assert_eq!(row[18], "VIOLATION");
        assert_eq!(row[12].parse::<f64>().unwrap(), r.p.lo);
    }
}
