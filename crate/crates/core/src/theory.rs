//! Closed-form bounds for the random-initialization lower bound.
//!
//! All quantities are plain double-precision arithmetic. Exponential factors
//! are carried in log space; the linear-scale fields underflow to `0.0` when a
//! probability drops below roughly `1e-308`, so the `log_*` fields are the
//! authoritative values there.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `ln(sigma e^{-w^2 / 2 sigma^2} / (w sqrt(2 pi)))`
pub fn gaussian_tail_log_bound(w: f64, sigma: f64) -> f64 {
    sigma.ln() - w.ln() - 0.5 * (2.0 * PI).ln() - w * w / (2.0 * sigma * sigma)
}

/// Upper bound on `P[N(0, sigma^2) >= w]` for `w > 0`.
pub fn gaussian_tail_bound(w: f64, sigma: f64) -> f64 {
    gaussian_tail_log_bound(w, sigma).exp()
}

/// Lower bound `(1 - alpha)^2 m1^2 / m2` on `P[Z >= alpha E Z]` for
/// non-negative `Z` with `E Z = m1` and `E Z^2 = m2`.
pub fn paley_zygmund_bound(alpha: f64, m1: f64, m2: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if !(m1 > 0.0) {
        return Err(Error::invalid(format!("first moment must be > 0, got {m1}")));
    }
    if m2 < m1 * m1 {
        return Err(Error::invalid(format!(
            "second moment {m2} < squared first moment {}",
            m1 * m1
        )));
    }
    Ok((1.0 - alpha).powi(2) * m1 * m1 / m2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thm3Params {
    pub n: usize,
    pub eta: f64,
    pub lipschitz: f64,
    /// Standard deviation of the Gaussian initialization.
    pub sigma: f64,
    pub radius: f64,
    /// Anti-concentration constant of the oracle.
    pub c_s: f64,
    pub iterations: usize,
}

impl Thm3Params {
    /// Every violated hypothesis, as the failed inequality.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n < 1 {
            out.push(format!("n >= 1 (got n = {})", self.n));
        }
        if self.iterations < 1 {
            out.push(format!("T >= 1 (got T = {})", self.iterations));
        }
        for (name, v) in [
            ("eta", self.eta),
            ("L", self.lipschitz),
            ("sigma", self.sigma),
            ("D", self.radius),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                out.push(format!("{name} > 0 (got {name} = {v})"));
            }
        }
        if !(self.c_s >= 1.0 && self.c_s.is_finite()) {
            out.push(format!("C_s >= 1 (got C_s = {})", self.c_s));
        }
        if self.n >= 1 && !(self.radius > self.drift_per_step()) {
            out.push(format!(
                "D > eta*L/(2n) (got D = {}, eta*L/(2n) = {})",
                self.radius,
                self.drift_per_step()
            ));
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

    /// `eta L / (2n)`
    fn drift_per_step(&self) -> f64 {
        self.eta * self.lipschitz / (2.0 * self.n as f64)
    }

    fn t23(&self) -> f64 {
        (self.iterations as f64).cbrt().powi(2)
    }

    /// `(eta L / 2n) T^{2/3}`, the unclipped event threshold.
    pub fn drift_threshold(&self) -> f64 {
        self.drift_per_step() * self.t23()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundCase {
    /// `(eta L / 2n) T^{2/3} <= D`: the event threshold is below the wall.
    Case1,
    /// The threshold saturates at `D`.
    Case2,
}

/// Ties at `T = (2nD / eta L)^{3/2}` go to [`BoundCase::Case1`].
pub fn thm3_case(p: &Thm3Params) -> BoundCase {
    if p.drift_threshold() <= p.radius {
        BoundCase::Case1
    } else {
        BoundCase::Case2
    }
}

/// `min{(eta L / 2n) T^{2/3}, D}`
pub fn s_threshold(p: &Thm3Params) -> f64 {
    p.drift_threshold().min(p.radius)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub case: BoundCase,
    pub s_threshold: f64,
    /// Largest `delta` for which the lower bound rules out `(eps, delta)`-DP.
    pub delta_max: f64,
    /// Largest `eps` for which the lower bound rules out `(eps, delta)`-DP.
    pub eps_max: f64,
    /// Lower bound on the `X'` hit probability when the threshold is unclipped.
    pub c1: f64,
    /// Upper bound on the `X` hit probability when the threshold is unclipped.
    pub c2: f64,
    pub log_c2: f64,
    /// Lower bound on the `X'` hit probability when the threshold saturates.
    pub f1: f64,
    /// Upper bound on the `X` hit probability when the threshold saturates.
    pub f2: f64,
    pub log_f2: f64,
}

impl BoundReport {
    /// Guaranteed hit probability on `X'` for the case in force.
    pub fn p_lower(&self) -> f64 {
        match self.case {
            BoundCase::Case1 => self.c1,
            BoundCase::Case2 => self.f1,
        }
    }

    /// Log of the hit-probability ceiling on `X` for the case in force.
    pub fn log_q_upper(&self) -> f64 {
        match self.case {
            BoundCase::Case1 => self.log_c2,
            BoundCase::Case2 => self.log_f2,
        }
    }
}

pub fn thm3_bounds(p: &Thm3Params) -> Result<BoundReport> {
    p.validate()?;
    let n = p.n as f64;
    let t = p.iterations as f64;
    let t23 = p.t23();
    let t43 = t.powf(4.0 / 3.0);
    let (eta, l, sigma, d, cs) = (p.eta, p.lipschitz, p.sigma, p.radius, p.c_s);

    let delta_max = (1.0 / (16.0 * cs)) * (1.0 / t23).max(eta * l / (2.0 * n * d));
    let drift_exponent = eta * eta * l * l * t43 / (8.0 * n * n * sigma * sigma);
    let wall_exponent = d * d / (2.0 * sigma * sigma);
    let eps_max = drift_exponent.min(wall_exponent)
        + ((2.0 * PI).sqrt() * l * eta / (64.0 * cs * n * sigma)).ln();

    let c1 = 1.0 / (8.0 * cs * t23);
    let log_c2 = gaussian_tail_log_bound(p.drift_threshold(), sigma);
    let f1 = eta * l / (16.0 * cs * d * n);
    let log_f2 = gaussian_tail_log_bound(d, sigma);

    Ok(BoundReport {
        case: thm3_case(p),
        s_threshold: s_threshold(p),
        delta_max,
        eps_max,
        c1,
        c2: log_c2.exp(),
        log_c2,
        f1,
        f2: log_f2.exp(),
        log_f2,
    })
}
