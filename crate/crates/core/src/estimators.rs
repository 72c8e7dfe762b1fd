//! Zeroth-order gradient oracles.
//!
//! Every estimator sees the objective only through [`ScalarFunction`], a
//! black-box evaluator with an evaluation counter. An oracle call draws one
//! random gradient estimate from the estimator's distribution at a query
//! point.
//!
//! Conventions shared by all estimators:
//!
//! * a zero scalar coefficient yields the canonical `+0.0` vector, so the
//!   identically-zero objective produces bit-identical zero estimates;
//! * a non-finite function value aborts the draw with [`Error::NonFinite`].
//!
//! Note on [`sp`]: with Gaussian perturbations and the `d / xi` prefactor,
//! `E[SP] = d * grad f_xi(w)` (Stein's lemma), i.e. the single-point estimator
//! is unbiased for the smoothed gradient only up to the factor `d`.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_RADIUS: f64 = 1e-2;

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Black-box objective `w -> f(w)` on `R^dim`.
///
/// `evaluate` must be deterministic. The evaluation counter is atomic so a
/// single function may be shared between worker threads.
pub struct ScalarFunction {
    eval: Arc<EvalFn>,
    dim: usize,
    evals: AtomicU64,
}

impl ScalarFunction {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            dim,
            evals: AtomicU64::new(0),
        }
    }

    /// The identically-zero objective.
    pub fn zero(dim: usize) -> Self {
        Self::new(dim, |_| 0.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval_count(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    pub fn evaluate(&self, w: &[f64]) -> f64 {
        self.evals.fetch_add(1, Ordering::Relaxed);
        (self.eval)(w)
    }

    /// A handle sharing the same evaluator with a fresh counter.
    pub fn fresh(&self) -> Self {
        Self {
            eval: Arc::clone(&self.eval),
            dim: self.dim,
            evals: AtomicU64::new(0),
        }
    }

    fn evaluate_checked(&self, w: &[f64]) -> Result<f64> {
        let value = self.evaluate(w);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFinite {
                point: w.to_vec(),
                value,
            })
        }
    }
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction")
            .field("dim", &self.dim)
            .field("evals", &self.eval_count())
            .finish()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientEstimate {
    pub value: Vec<f64>,
    pub evals_used: u64,
}

/// A randomized update oracle: given `f` and `w`, draw one gradient estimate.
pub trait Oracle: Send + Sync {
    fn draw(
        &self,
        f: &ScalarFunction,
        w: &[f64],
        rng: &mut dyn RngCore,
    ) -> Result<GradientEstimate>;

    /// Function evaluations consumed by one call to [`Oracle::draw`].
    fn evals_per_draw(&self) -> u64;

    fn label(&self) -> String;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EstimatorKind {
    Spsa,
    Fd,
    Sp,
    TwoPoint,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [
        EstimatorKind::Spsa,
        EstimatorKind::Fd,
        EstimatorKind::Sp,
        EstimatorKind::TwoPoint,
    ];

    pub fn evals_per_draw(self) -> u64 {
        match self {
            EstimatorKind::Sp => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::Spsa => "SPSA",
            EstimatorKind::Fd => "FD",
            EstimatorKind::Sp => "SP",
            EstimatorKind::TwoPoint => "TWO_POINT",
        })
    }
}

fn default_radius() -> f64 {
    DEFAULT_RADIUS
}

fn default_mean_m() -> usize {
    1
}

/// Serializable description of an estimator: a base kind, optionally
/// averaged over `mean_m` draws, optionally with independent Gaussian noise
/// of scale `additive_sigma` added to the (averaged) estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    pub kind: EstimatorKind,
    #[serde(default = "default_radius")]
    pub xi: f64,
    #[serde(default = "default_radius")]
    pub mu1: f64,
    #[serde(default = "default_radius")]
    pub mu2: f64,
    #[serde(default = "default_mean_m")]
    pub mean_m: usize,
    #[serde(default)]
    pub additive_sigma: f64,
}

impl EstimatorSpec {
    pub fn new(kind: EstimatorKind) -> Self {
        Self {
            kind,
            xi: DEFAULT_RADIUS,
            mu1: DEFAULT_RADIUS,
            mu2: DEFAULT_RADIUS,
            mean_m: 1,
            additive_sigma: 0.0,
        }
    }

    pub fn spsa() -> Self {
        Self::new(EstimatorKind::Spsa)
    }

    pub fn fd() -> Self {
        Self::new(EstimatorKind::Fd)
    }

    pub fn sp() -> Self {
        Self::new(EstimatorKind::Sp)
    }

    pub fn two_point() -> Self {
        Self::new(EstimatorKind::TwoPoint)
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = xi;
        self
    }

    pub fn with_mu(mut self, mu1: f64, mu2: f64) -> Self {
        self.mu1 = mu1;
        self.mu2 = mu2;
        self
    }

    pub fn with_mean(mut self, m: usize) -> Self {
        self.mean_m = m;
        self
    }

    pub fn with_additive_noise(mut self, sigma: f64) -> Self {
        self.additive_sigma = sigma;
        self
    }

    /// Same kind and radii, no averaging, no additive noise.
    pub fn base(&self) -> Self {
        Self {
            mean_m: 1,
            additive_sigma: 0.0,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            EstimatorKind::Spsa | EstimatorKind::Fd | EstimatorKind::Sp => {
                if !(self.xi > 0.0 && self.xi.is_finite()) {
                    return Err(Error::invalid(format!("xi must be > 0, got {}", self.xi)));
                }
            }
            EstimatorKind::TwoPoint => {
                if !(self.mu2 > 0.0 && self.mu2.is_finite()) {
                    return Err(Error::invalid(format!("mu2 must be > 0, got {}", self.mu2)));
                }
                if !(self.mu1 >= 0.0 && self.mu1.is_finite()) {
                    return Err(Error::invalid(format!("mu1 must be >= 0, got {}", self.mu1)));
                }
            }
        }
        if self.mean_m < 1 {
            return Err(Error::invalid("mean_m must be >= 1"));
        }
        if !(self.additive_sigma >= 0.0 && self.additive_sigma.is_finite()) {
            return Err(Error::invalid(format!(
                "additive_sigma must be >= 0, got {}",
                self.additive_sigma
            )));
        }
        Ok(())
    }

    fn draw_base(
        &self,
        f: &ScalarFunction,
        w: &[f64],
        rng: &mut dyn RngCore,
    ) -> Result<GradientEstimate> {
        match self.kind {
            EstimatorKind::Spsa => spsa(f, w, self.xi, rng),
            EstimatorKind::Fd => fd(f, w, self.xi, rng),
            EstimatorKind::Sp => sp(f, w, self.xi, rng),
            EstimatorKind::TwoPoint => two_point(f, w, self.mu1, self.mu2, rng),
        }
    }
}

impl Oracle for EstimatorSpec {
    fn draw(
        &self,
        f: &ScalarFunction,
        w: &[f64],
        rng: &mut dyn RngCore,
    ) -> Result<GradientEstimate> {
        self.validate()?;
        if self.additive_sigma > 0.0 {
            let inner = Self {
                additive_sigma: 0.0,
                ..self.clone()
            };
            additive_noise_wrap(&inner, self.additive_sigma, f, w, rng)
        } else if self.mean_m > 1 {
            mean_extension(&self.base(), self.mean_m, f, w, rng)
        } else {
            self.draw_base(f, w, rng)
        }
    }

    fn evals_per_draw(&self) -> u64 {
        self.kind.evals_per_draw() * self.mean_m as u64
    }

    fn label(&self) -> String {
        let mut s = self.kind.to_string();
        if self.mean_m > 1 {
            s = format!("M{}({})", self.mean_m, s);
        }
        if self.additive_sigma > 0.0 {
            s = format!("{}+N(0,{}^2)", s, self.additive_sigma);
        }
        s
    }
}

fn check_dim(f: &ScalarFunction, w: &[f64]) -> Result<()> {
    if w.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: w.len(),
        });
    }
    Ok(())
}

fn check_radius(name: &str, r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be > 0, got {r}")))
    }
}

pub(crate) fn standard_normal_vec(d: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// `w + step * z`
fn offset(w: &[f64], step: f64, z: &[f64]) -> Vec<f64> {
    w.iter().zip(z).map(|(wi, zi)| wi + step * zi).collect()
}

/// `coef * z`, with a zero coefficient mapped to the canonical zero vector.
fn scale(coef: f64, z: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    if !coef.is_finite() {
        return Err(Error::NonFinite {
            point: w.to_vec(),
            value: coef,
        });
    }
    if coef == 0.0 {
        return Ok(vec![0.0; z.len()]);
    }
    Ok(z.iter().map(|zi| coef * zi).collect())
}

/// Symmetric two-point estimate `(f(w + xi Z) - f(w - xi Z)) / (2 xi) * Z`.
pub fn spsa(
    f: &ScalarFunction,
    w: &[f64],
    xi: f64,
    rng: &mut dyn RngCore,
) -> Result<GradientEstimate> {
    check_dim(f, w)?;
    check_radius("xi", xi)?;
    let z = standard_normal_vec(w.len(), rng);
    let plus = f.evaluate_checked(&offset(w, xi, &z))?;
    let minus = f.evaluate_checked(&offset(w, -xi, &z))?;
    Ok(GradientEstimate {
        value: scale((plus - minus) / (2.0 * xi), &z, w)?,
        evals_used: 2,
    })
}

/// Forward-difference estimate `(f(w + xi Z) - f(w)) / xi * Z`.
pub fn fd(
    f: &ScalarFunction,
    w: &[f64],
    xi: f64,
    rng: &mut dyn RngCore,
) -> Result<GradientEstimate> {
    check_dim(f, w)?;
    check_radius("xi", xi)?;
    let z = standard_normal_vec(w.len(), rng);
    let plus = f.evaluate_checked(&offset(w, xi, &z))?;
    let here = f.evaluate_checked(w)?;
    Ok(GradientEstimate {
        value: scale((plus - here) / xi, &z, w)?,
        evals_used: 2,
    })
}

/// Single-point estimate `(d / xi) f(w + xi Z) * Z`.
pub fn sp(
    f: &ScalarFunction,
    w: &[f64],
    xi: f64,
    rng: &mut dyn RngCore,
) -> Result<GradientEstimate> {
    check_dim(f, w)?;
    check_radius("xi", xi)?;
    let d = w.len() as f64;
    let z = standard_normal_vec(w.len(), rng);
    let value = f.evaluate_checked(&offset(w, xi, &z))?;
    Ok(GradientEstimate {
        value: scale(d / xi * value, &z, w)?,
        evals_used: 1,
    })
}

/// Two-scale estimate
/// `(f(w + mu1 Z1 + mu2 Z2) - f(w + mu1 Z1)) / mu2 * Z2` with independent
/// `Z1, Z2`.
pub fn two_point(
    f: &ScalarFunction,
    w: &[f64],
    mu1: f64,
    mu2: f64,
    rng: &mut dyn RngCore,
) -> Result<GradientEstimate> {
    check_dim(f, w)?;
    check_radius("mu2", mu2)?;
    if !(mu1 >= 0.0 && mu1.is_finite()) {
        return Err(Error::invalid(format!("mu1 must be >= 0, got {mu1}")));
    }
    let z1 = standard_normal_vec(w.len(), rng);
    let z2 = standard_normal_vec(w.len(), rng);
    let anchor = offset(w, mu1, &z1);
    let plus = f.evaluate_checked(&offset(&anchor, mu2, &z2))?;
    let base = f.evaluate_checked(&anchor)?;
    Ok(GradientEstimate {
        value: scale((plus - base) / mu2, &z2, w)?,
        evals_used: 2,
    })
}

/// Average of `m` independent draws of `base`.
pub fn mean_extension(
    base: &dyn Oracle,
    m: usize,
    f: &ScalarFunction,
    w: &[f64],
    rng: &mut dyn RngCore,
) -> Result<GradientEstimate> {
    if m < 1 {
        return Err(Error::invalid("mean extension needs m >= 1"));
    }
    if m == 1 {
        return base.draw(f, w, rng);
    }
    let mut sum = vec![0.0; w.len()];
    let mut evals = 0;
    for _ in 0..m {
        let u = base.draw(f, w, rng)?;
        for (s, ui) in sum.iter_mut().zip(&u.value) {
            *s += ui;
        }
        evals += u.evals_used;
    }
    let m = m as f64;
    sum.iter_mut().for_each(|s| *s /= m);
    Ok(GradientEstimate {
        value: sum,
        evals_used: evals,
    })
}

/// `base` draw plus independent `N(0, sigma^2 I)` noise.
pub fn additive_noise_wrap(
    base: &dyn Oracle,
    sigma: f64,
    f: &ScalarFunction,
    w: &[f64],
    rng: &mut dyn RngCore,
) -> Result<GradientEstimate> {
    check_radius("sigma", sigma)?;
    let mut u = base.draw(f, w, rng)?;
    let noise = standard_normal_vec(w.len(), rng);
    for (ui, gi) in u.value.iter_mut().zip(noise) {
        *ui += sigma * gi;
    }
    Ok(u)
}
