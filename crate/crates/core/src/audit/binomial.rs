//! Exact (Clopper-Pearson) one-sided binomial confidence bounds.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Bound {
    Lower,
    Upper,
}

/// One-sided bound at confidence `1 - gamma` on a binomial success
/// probability after `hits` successes in `trials` trials.
pub fn clopper_pearson(hits: u64, trials: u64, gamma: f64, side: Bound) -> Result<f64> {
    if trials == 0 || hits > trials {
        return Err(Error::invalid(format!(
            "need 0 <= hits <= trials and trials > 0, got {hits}/{trials}"
        )));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    let (k, n) = (hits as f64, trials as f64);
    Ok(match side {
        Bound::Lower if hits == 0 => 0.0,
        // P[Bin(n, p) >= n] = p^n = gamma
        Bound::Lower if hits == trials => (gamma.ln() / n).exp(),
        Bound::Lower => beta_quantile(k, n - k + 1.0, gamma),
        Bound::Upper if hits == trials => 1.0,
        // P[Bin(n, p) <= 0] = (1 - p)^n = gamma
        Bound::Upper if hits == 0 => -(gamma.ln() / n).exp_m1(),
        Bound::Upper => beta_quantile(k + 1.0, n - k, 1.0 - gamma),
    })
}

/// Quantile of `Beta(a, b)` by bisection on the regularized incomplete beta
/// function, which is monotone in `x`.
pub(crate) fn beta_quantile(a: f64, b: f64, prob: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Hit-rate estimate with exact one-sided bounds, each at level `1 - gamma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbEstimate {
    pub hits: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub lo: f64,
    pub hi: f64,
    pub gamma: f64,
}

impl ProbEstimate {
    pub fn new(hits: u64, trials: u64, gamma: f64) -> Result<Self> {
        let lo = clopper_pearson(hits, trials, gamma, Bound::Lower)?;
        let hi = clopper_pearson(hits, trials, gamma, Bound::Upper)?;
        Ok(Self {
            hits,
            trials,
            p_hat: hits as f64 / trials as f64,
            lo,
            hi,
            gamma,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn zero_hits_upper_closed_form() {
        let hi = clopper_pearson(0, 10_000, 0.01, Bound::Upper).unwrap();
        assert!(rel(hi, 1.0 - 0.01f64.powf(1e-4)) < 1e-10);
        assert!((hi - 4.6e-4).abs() < 5e-6);
        // the bisection path agrees with the closed form
        assert!(rel(beta_quantile(1.0, 10_000.0, 0.99), hi) < 1e-9);
    }

    #[test]
    fn all_hits_lower_closed_form() {
        for n in [1u64, 10, 10_000, 100_000] {
            let lo = clopper_pearson(n, n, 0.01, Bound::Lower).unwrap();
            assert!(rel(lo, 0.01f64.powf(1.0 / n as f64)) < 1e-12);
            assert!(rel(beta_quantile(n as f64, 1.0, 0.01), lo) < 1e-9);
        }
        assert!(rel(clopper_pearson(10_000, 10_000, 0.01, Bound::Lower).unwrap(), 0.99954) < 1e-5);
    }

    #[test]
    fn bounds_bracket_the_estimate() {
        for (k, n) in [(0, 10), (3, 10), (10, 10), (500, 1000), (1, 100_000)] {
            let e = ProbEstimate::new(k, n, 0.05).unwrap();
            assert!(0.0 <= e.lo && e.lo <= e.p_hat && e.p_hat <= e.hi && e.hi <= 1.0, "{e:?}");
        }
    }

    #[test]
    fn lower_bound_inverts_the_binomial_tail() {
        // P[Bin(n, lo) >= k] = gamma, via direct summation
        let (k, n, gamma) = (7u64, 40u64, 0.05);
        let lo = clopper_pearson(k, n, gamma, Bound::Lower).unwrap();
        let mut tail = 0.0;
        let mut coef = 1.0f64;
        for j in 0..=n {
            if j > 0 {
                coef *= (n - j + 1) as f64 / j as f64;
            }
            if j >= k {
                tail += coef * lo.powi(j as i32) * (1.0 - lo).powi((n - j) as i32);
            }
        }
        assert!((tail - gamma).abs() < 1e-10, "{tail}");
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(clopper_pearson(1, 0, 0.1, Bound::Lower).is_err());
        assert!(clopper_pearson(5, 4, 0.1, Bound::Lower).is_err());
        assert!(clopper_pearson(1, 4, 0.0, Bound::Upper).is_err());
        assert!(clopper_pearson(1, 4, 1.0, Bound::Upper).is_err());
    }

    #[test]
    fn lower_bound_coverage() {
        let (p, n, reps, gamma) = (0.3, 1000u64, 10_000, 0.01);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut misses = 0;
        for _ in 0..reps {
            let k = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
            if clopper_pearson(k, n, gamma, Bound::Lower).unwrap() > p {
                misses += 1;
            }
        }
        let rate = misses as f64 / reps as f64;
        assert!(rate <= gamma + 0.005, "miss rate {rate}");
    }
}
