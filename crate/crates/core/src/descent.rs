//! Projected stochastic zeroth-order descent.
//!
//! ```text
//! w_0 ~ init
//! for t in 1..=T:
//!     U_t ~ oracle(loss, w_{t-1})
//!     w_t = project(w_{t-1} - eta * U_t)
//! ```
//!
//! The constraint set is called a *constraint set* here (ball or box of
//! radius `D`) to keep it apart from the dataset.

use std::io::Write;

use rand::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{standard_normal_vec, Oracle, ScalarFunction};
use crate::losses::norm;
use crate::stream::TrialRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Projection {
    /// Euclidean ball `{w : |w| <= D}`.
    Ball,
    /// Hypercube `[-D, D]^d`.
    Box,
}

impl Projection {
    pub fn project(self, w: &[f64], radius: f64) -> Vec<f64> {
        match self {
            Projection::Ball => project_ball(w, radius),
            Projection::Box => project_box(w, radius),
        }
    }

    pub fn contains(self, w: &[f64], radius: f64) -> bool {
        match self {
            Projection::Ball => norm(w) <= radius,
            Projection::Box => w.iter().all(|x| x.abs() <= radius),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE", deny_unknown_fields)]
pub enum Init {
    Fixed { point: Vec<f64> },
    Gaussian { sigma: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentConfig {
    pub iterations: usize,
    pub eta: f64,
    pub radius: f64,
    pub projection: Projection,
    pub init: Init,
    #[serde(default)]
    pub record_trajectory: bool,
}

impl DescentConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.iterations < 1 {
            return Err(Error::invalid("iteration count T must be >= 1"));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid(format!("step size must be >= 0, got {}", self.eta)));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::invalid(format!("radius D must be > 0, got {}", self.radius)));
        }
        match &self.init {
            Init::Fixed { point } if point.len() != dim => Err(Error::DimensionMismatch {
                expected: dim,
                got: point.len(),
            }),
            Init::Gaussian { sigma } if !(*sigma > 0.0 && sigma.is_finite()) => Err(
                Error::invalid(format!("init sigma must be > 0, got {sigma}")),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// `w_0 ..= w_T`, or just `[w_0, w_T]` unless the trajectory is recorded.
    pub iterates: Vec<Vec<f64>>,
    pub seed: Option<u64>,
}

impl Trajectory {
    pub fn initial(&self) -> &[f64] {
        &self.iterates[0]
    }

    pub fn last(&self) -> &[f64] {
        self.iterates.last().expect("trajectory always holds w_0")
    }

    /// CSV dump with columns `t, w_1, ..., w_d`. Only meaningful for
    /// recorded trajectories.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let d = self.iterates[0].len();
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=d).map(|i| format!("w_{i}")));
        wtr.write_record(&header)?;
        for (t, w) in self.iterates.iter().enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(w.iter().map(|x| format!("{x:.16e}")));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Euclidean projection onto the ball of radius `radius`.
pub fn project_ball(w: &[f64], radius: f64) -> Vec<f64> {
    let r = norm(w);
    if r <= radius {
        w.to_vec()
    } else {
        w.iter().map(|x| x * radius / r).collect()
    }
}

/// Coordinate-wise clipping to `[-radius, radius]`.
pub fn project_box(w: &[f64], radius: f64) -> Vec<f64> {
    w.iter().map(|x| x.clamp(-radius, radius)).collect()
}

/// Run `cfg.iterations` oracle steps on `loss` starting from a draw of
/// `cfg.init`.
///
/// Errors raised by the oracle are wrapped with the (one-based) step index.
pub fn run_descent(
    loss: &ScalarFunction,
    oracle: &dyn Oracle,
    cfg: &DescentConfig,
    rng: &mut dyn RngCore,
) -> Result<Trajectory> {
    let d = loss.dim();
    cfg.validate(d)?;
    let w0 = match &cfg.init {
        Init::Fixed { point } => point.clone(),
        Init::Gaussian { sigma } => standard_normal_vec(d, rng)
            .into_iter()
            .map(|z| sigma * z)
            .collect(),
    };
    let mut iterates = vec![w0.clone()];
    let mut w = w0;
    for t in 1..=cfg.iterations {
        let u = oracle.draw(loss, &w, rng).map_err(|e| Error::Descent {
            iteration: t,
            source: Box::new(e),
        })?;
        let stepped: Vec<f64> = w
            .iter()
            .zip(&u.value)
            .map(|(wi, ui)| wi - cfg.eta * ui)
            .collect();
        w = cfg.projection.project(&stepped, cfg.radius);
        if cfg.record_trajectory {
            iterates.push(w.clone());
        }
    }
    if !cfg.record_trajectory {
        iterates.push(w);
    }
    Ok(Trajectory {
        iterates,
        seed: None,
    })
}

/// [`run_descent`] on a fresh generator seeded from `seed`.
pub fn run_descent_seeded(
    loss: &ScalarFunction,
    oracle: &dyn Oracle,
    cfg: &DescentConfig,
    seed: u64,
) -> Result<Trajectory> {
    let mut rng = TrialRng::seed_from_u64(seed);
    let mut traj = run_descent(loss, oracle, cfg, &mut rng)?;
    traj.seed = Some(seed);
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{EstimatorKind, EstimatorSpec};
    use crate::losses::{linear_pair, quadratic_pair, LossSpec, Side};
    use crate::stream::child_rng;
    use proptest::prelude::*;

    fn ball_cfg(t: usize, w0: Vec<f64>) -> DescentConfig {
        DescentConfig {
            iterations: t,
            eta: 0.1,
            radius: 1.0,
            projection: Projection::Ball,
            init: Init::Fixed { point: w0 },
            record_trajectory: true,
        }
    }

    #[test]
    fn ball_projection_examples() {
        assert_eq!(project_ball(&[3.0, 4.0], 1.0), vec![0.6, 0.8]);
        assert_eq!(project_ball(&[0.1, 0.0], 1.0), vec![0.1, 0.0]);
    }

    #[test]
    fn box_projection_examples() {
        assert_eq!(project_box(&[1.5, -0.2], 1.0), vec![1.0, -0.2]);
        assert_eq!(project_box(&[0.3, -0.9], 1.0), vec![0.3, -0.9]);
        assert_eq!(project_box(&[-7.0], 2.0), vec![-2.0]);
    }

    proptest! {
        #[test]
        fn ball_projection_is_idempotent(
            w in proptest::collection::vec(-10.0f64..10.0, 1..6), r in 0.01f64..5.0,
        ) {
            let p = project_ball(&w, r);
            let pp = project_ball(&p, r);
            for (a, b) in p.iter().zip(&pp) {
                prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON * r);
            }
            prop_assert!(norm(&p) <= r * (1.0 + 4.0 * f64::EPSILON));
        }

        #[test]
        fn box_projection_is_monotone(
            pairs in proptest::collection::vec((-10.0f64..10.0, 0.0f64..5.0), 1..6),
            r in 0.01f64..5.0,
        ) {
            let u: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let v: Vec<f64> = pairs.iter().map(|p| p.0 + p.1).collect();
            let (pu, pv) = (project_box(&u, r), project_box(&v, r));
            prop_assert!(pu.iter().zip(&pv).all(|(a, b)| a <= b));
            prop_assert_eq!(project_box(&pu, r), pu);
        }
    }

    #[test]
    fn zero_loss_leaves_fixed_start_untouched() {
        let spec = LossSpec::new(quadratic_pair(1, 2, 1.0).unwrap(), 2).unwrap();
        let f = spec.build_loss(Side::X);
        let w0 = vec![0.1, -0.0];
        for kind in EstimatorKind::ALL {
            let est = EstimatorSpec::new(kind).with_mean(3);
            for t in [1, 10, 50] {
                let traj = run_descent_seeded(&f, &est, &ball_cfg(t, w0.clone()), 9).unwrap();
                for w in &traj.iterates {
                    assert!(w.iter().zip(&w0).all(|(a, b)| a.to_bits() == b.to_bits()));
                }
            }
        }
    }

    #[test]
    fn linear_drift_is_monotone_in_distinguished_coordinate() {
        let (n, lip, d) = (100, 100.0, 2);
        let spec = LossSpec::new(linear_pair(n, d, lip, 0).unwrap(), d).unwrap();
        let f = spec.build_loss(Side::XPrime);
        let cfg = DescentConfig {
            iterations: 30,
            eta: 0.01,
            radius: 1.0,
            projection: Projection::Box,
            init: Init::Gaussian { sigma: 1.0 / 1020.0 },
            record_trajectory: true,
        };
        let est = EstimatorSpec::spsa();
        for trial in 0..1000 {
            let traj = run_descent(&f, &est, &cfg, &mut child_rng(3, 0, 1, trial)).unwrap();
            assert_eq!(traj.iterates.len(), 31);
            for pair in traj.iterates.windows(2) {
                assert!(pair[0][0] <= pair[1][0]);
            }
            for w in &traj.iterates[1..] {
                assert!(Projection::Box.contains(w, 1.0));
            }
        }
    }

    #[test]
    fn zero_step_projects_the_start() {
        let spec = LossSpec::new(quadratic_pair(1, 2, 1.0).unwrap(), 2).unwrap();
        let f = spec.build_loss(Side::XPrime);
        let mut cfg = ball_cfg(1, vec![3.0, 4.0]);
        cfg.eta = 0.0;
        let traj = run_descent_seeded(&f, &EstimatorSpec::spsa(), &cfg, 0).unwrap();
        assert_eq!(traj.last(), &[0.6, 0.8]);
    }

    #[test]
    fn rejects_bad_configs() {
        let f = ScalarFunction::zero(2);
        let est = EstimatorSpec::spsa();
        let mut cfg = ball_cfg(0, vec![0.0, 0.0]);
        assert!(run_descent_seeded(&f, &est, &cfg, 0).is_err());
        cfg.iterations = 1;
        cfg.radius = 0.0;
        assert!(run_descent_seeded(&f, &est, &cfg, 0).is_err());
        cfg.radius = 1.0;
        cfg.init = Init::Fixed { point: vec![0.0] };
        assert!(matches!(
            run_descent_seeded(&f, &est, &cfg, 0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn seeded_runs_are_reproducible_and_respect_the_ball() {
        let spec = LossSpec::new(quadratic_pair(1, 2, 1.0).unwrap(), 2).unwrap();
        let f = spec.build_loss(Side::XPrime);
        let mut cfg = ball_cfg(40, vec![0.5, 0.5]);
        cfg.eta = 2.0;
        let a = run_descent_seeded(&f, &EstimatorSpec::fd(), &cfg, 77).unwrap();
        let b = run_descent_seeded(&f, &EstimatorSpec::fd(), &cfg, 77).unwrap();
        assert_eq!(a, b);
        for w in &a.iterates {
            assert!(norm(w) <= 1.0 + f64::EPSILON);
        }
    }

    #[test]
    fn eval_budget_and_unrecorded_trajectory() {
        let spec = LossSpec::new(quadratic_pair(2, 2, 1.0).unwrap(), 2).unwrap();
        let f = spec.build_loss(Side::XPrime);
        let mut cfg = ball_cfg(12, vec![0.2, 0.2]);
        cfg.record_trajectory = false;
        let est = EstimatorSpec::two_point().with_mean(4);
        let traj = run_descent_seeded(&f, &est, &cfg, 1).unwrap();
        assert_eq!(traj.iterates.len(), 2);
        assert_eq!(f.eval_count(), 12 * est.evals_per_draw());
    }

    #[test]
    fn oracle_failure_reports_the_step() {
        let f = ScalarFunction::new(1, |w| if w[0] > 0.5 { f64::INFINITY } else { -w[0] });
        let cfg = DescentConfig {
            iterations: 10_000,
            eta: 0.1,
            radius: 10.0,
            projection: Projection::Box,
            init: Init::Fixed { point: vec![0.0] },
            record_trajectory: false,
        };
        let err = run_descent_seeded(&f, &EstimatorSpec::spsa(), &cfg, 0).unwrap_err();
        assert!(matches!(err, Error::Descent { iteration, .. } if iteration >= 1));
    }

    #[test]
    fn trajectory_csv() {
        let traj = Trajectory {
            iterates: vec![vec![0.0, 1.0], vec![0.5, 0.25]],
            seed: Some(1),
        };
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,w_1,w_2"));
        assert_eq!(lines.next(), Some("0,0.0000000000000000e0,1.0000000000000000e0"));
    }
}
