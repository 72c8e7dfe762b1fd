//! Empirical checks of oracle classes.
//!
//! * Zero preservation: exact zero on the zero function, and an atomless
//!   output distribution on a strictly convex quadratic away from the origin.
//! * Anti-concentration along coordinate `i*`, on the linear family
//!   `h(w) = g * w_{i*}` with `-L <= g <= 0`:
//!   1. `g = 0` gives the zero vector,
//!   2. `g < 0` gives a strictly negative coordinate `i*`,
//!   3. the mean of coordinate `i*` does not exceed `g`,
//!   4. sums of `N` independent draws have `E[S^2] <= C_s E[S]^2`.

use std::collections::HashSet;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{standard_normal_vec, GradientEstimate, Oracle, ScalarFunction};

/// Sum sizes used to estimate the concentration ratio.
pub const SUM_SIZES: [usize; 3] = [1, 4, 16];

/// Relative slack on the concentration ratio before property 4 fails.
pub const RATIO_TOLERANCE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

impl Verdict {
    fn from_failures(failed: &[String]) -> Self {
        if failed.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroPreservingReport {
    pub oracle: String,
    pub trials: u64,
    /// Draws on the zero function that were not the exact zero vector.
    pub nonzero_on_zero_function: u64,
    /// Draws on the quadratic that repeated an earlier draw exactly.
    pub repeated_on_quadratic: u64,
    /// Draws on the quadratic equal to the zero vector.
    pub zero_on_quadratic: u64,
    pub property1: bool,
    pub property2: bool,
    pub failed: Vec<String>,
    pub verdict: Verdict,
}

fn is_exact_zero(v: &[f64]) -> bool {
    v.iter().all(|x| x.to_bits() == 0)
}

fn require_trials(trials: u64, min: u64) -> Result<()> {
    if trials < min {
        Err(Error::invalid(format!("need at least {min} trials, got {trials}")))
    } else {
        Ok(())
    }
}

/// Query point used for the continuity check: `(1, -1/2, 1/4, ...)`.
fn continuity_point(dim: usize) -> Vec<f64> {
    (0..dim).map(|i| (-0.5f64).powi(i as i32)).collect()
}

pub fn classify_zero_preserving(
    oracle: &dyn Oracle,
    dim: usize,
    trials: u64,
    rng: &mut dyn RngCore,
) -> Result<ZeroPreservingReport> {
    require_trials(trials, 1000)?;
    if dim < 1 {
        return Err(Error::invalid("dimension must be >= 1"));
    }

    let zero = ScalarFunction::zero(dim);
    let mut nonzero = 0;
    for _ in 0..trials {
        let w = standard_normal_vec(dim, rng);
        if !is_exact_zero(&oracle.draw(&zero, &w, rng)?.value) {
            nonzero += 1;
        }
    }

    let quad = ScalarFunction::new(dim, |w| 0.5 * w.iter().map(|x| x * x).sum::<f64>());
    let w = continuity_point(dim);
    let mut seen = HashSet::with_capacity(trials as usize);
    let (mut repeated, mut zeros) = (0, 0);
    for _ in 0..trials {
        let GradientEstimate { value, .. } = oracle.draw(&quad, &w, rng)?;
        if value.iter().all(|x| *x == 0.0) {
            zeros += 1;
        }
        let key: Vec<u64> = value.iter().map(|x| x.to_bits()).collect();
        if !seen.insert(key) {
            repeated += 1;
        }
    }

    let property1 = nonzero == 0;
    let property2 = repeated == 0 && zeros == 0;
    let mut failed = Vec::new();
    if !property1 {
        failed.push(format!(
            "property 1: {nonzero}/{trials} draws on the zero function were not exactly zero"
        ));
    }
    if !property2 {
        failed.push(format!(
            "property 2: {repeated} repeated and {zeros} zero draws on the quadratic"
        ));
    }
    Ok(ZeroPreservingReport {
        oracle: oracle.label(),
        trials,
        nonzero_on_zero_function: nonzero,
        repeated_on_quadratic: repeated,
        zero_on_quadratic: zeros,
        property1,
        property2,
        verdict: Verdict::from_failures(&failed),
        failed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcSettings {
    /// Slope `g` of the linear test function, in `[-L, 0]`.
    pub g: f64,
    pub lipschitz: f64,
    pub dim: usize,
    /// Zero-based distinguished coordinate.
    pub i_star: usize,
    pub trials: u64,
    /// Claimed anti-concentration constant.
    pub c_s: f64,
}

impl AcSettings {
    pub fn new(g: f64, dim: usize, trials: u64) -> Self {
        Self {
            g,
            lipschitz: g.abs().max(1.0),
            dim,
            i_star: 0,
            trials,
            c_s: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRatio {
    pub sum_size: usize,
    pub first_moment: f64,
    pub second_moment: f64,
    /// `E[S^2] / E[S]^2`
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcReport {
    pub oracle: String,
    pub settings: AcSettings,
    pub nonzero_at_zero_slope: u64,
    pub nonnegative_samples: u64,
    pub mean: f64,
    pub standard_error: f64,
    pub ratios: Vec<ConcentrationRatio>,
    pub estimated_c_s: f64,
    pub property1: bool,
    pub property2: bool,
    pub property3: bool,
    pub property4: bool,
    pub failed: Vec<String>,
    pub verdict: Verdict,
}

pub fn classify_ac(
    oracle: &dyn Oracle,
    settings: &AcSettings,
    rng: &mut dyn RngCore,
) -> Result<AcReport> {
    let AcSettings {
        g,
        lipschitz,
        dim,
        i_star,
        trials,
        c_s,
    } = settings.clone();
    require_trials(trials, 10_000)?;
    if !(-lipschitz <= g && g <= 0.0) {
        return Err(Error::invalid(format!("need -L <= g <= 0, got g = {g}, L = {lipschitz}")));
    }
    if i_star >= dim {
        return Err(Error::invalid(format!("i_star {i_star} out of range for d = {dim}")));
    }

    let flat = ScalarFunction::new(dim, move |w| 0.0 * w[i_star]);
    let mut nonzero = 0;
    for _ in 0..trials {
        let w = standard_normal_vec(dim, rng);
        if !is_exact_zero(&oracle.draw(&flat, &w, rng)?.value) {
            nonzero += 1;
        }
    }

    let h = ScalarFunction::new(dim, move |w| g * w[i_star]);
    let draw = |rng: &mut dyn RngCore| -> Result<f64> {
        let w = standard_normal_vec(dim, rng);
        Ok(oracle.draw(&h, &w, rng)?.value[i_star])
    };

    let mut nonneg = 0;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..trials {
        let u = draw(rng)?;
        if u >= 0.0 {
            nonneg += 1;
        }
        sum += u;
        sum_sq += u * u;
    }
    let nt = trials as f64;
    let mean = sum / nt;
    let var = ((sum_sq - nt * mean * mean) / (nt - 1.0)).max(0.0);
    let se = (var / nt).sqrt();

    let mut ratios = Vec::with_capacity(SUM_SIZES.len());
    for &n in &SUM_SIZES {
        let (mut m1, mut m2) = (0.0, 0.0);
        for _ in 0..trials {
            let mut s = 0.0;
            for _ in 0..n {
                s += draw(rng)?;
            }
            m1 += s;
            m2 += s * s;
        }
        m1 /= nt;
        m2 /= nt;
        ratios.push(ConcentrationRatio {
            sum_size: n,
            first_moment: m1,
            second_moment: m2,
            ratio: m2 / (m1 * m1),
        });
    }
    let estimated_c_s = ratios.iter().map(|r| r.ratio).fold(f64::NAN, f64::max);

    let strict = g < 0.0;
    let property1 = nonzero == 0;
    let property2 = !strict || nonneg == 0;
    let property3 = !strict || mean <= g + 3.0 * se;
    let property4 = !strict || estimated_c_s <= c_s * (1.0 + RATIO_TOLERANCE);

    let mut failed = Vec::new();
    if !property1 {
        failed.push(format!("property 1: {nonzero}/{trials} nonzero draws at g = 0"));
    }
    if !property2 {
        failed.push(format!(
            "property 2: {nonneg}/{trials} draws with coordinate {i_star} >= 0"
        ));
    }
    if !property3 {
        failed.push(format!("property 3: mean {mean} > g + 3 SE = {}", g + 3.0 * se));
    }
    if !property4 {
        failed.push(format!(
            "property 4: estimated C_s {estimated_c_s} exceeds {c_s}"
        ));
    }
    Ok(AcReport {
        oracle: oracle.label(),
        settings: settings.clone(),
        nonzero_at_zero_slope: nonzero,
        nonnegative_samples: nonneg,
        mean,
        standard_error: se,
        ratios,
        estimated_c_s,
        property1,
        property2,
        property3,
        property4,
        verdict: Verdict::from_failures(&failed),
        failed,
    })
}

/// Control oracle that ignores its input and returns a fixed vector.
#[derive(Clone, Debug)]
pub struct ConstantOracle(pub Vec<f64>);

impl Oracle for ConstantOracle {
    fn draw(
        &self,
        f: &ScalarFunction,
        w: &[f64],
        _rng: &mut dyn RngCore,
    ) -> Result<GradientEstimate> {
        if w.len() != f.dim() || self.0.len() != w.len() {
            return Err(Error::DimensionMismatch {
                expected: f.dim(),
                got: w.len(),
            });
        }
        Ok(GradientEstimate {
            value: self.0.clone(),
            evals_used: 0,
        })
    }

    fn evals_per_draw(&self) -> u64 {
        0
    }

    fn label(&self) -> String {
        format!("CONSTANT{:?}", self.0)
    }
}
