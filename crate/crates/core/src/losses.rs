//! Neighboring dataset pairs and the empirical losses they induce.
//!
//! Both constructions put every record at the origin except the last one,
//! which differs between the two sides. On side `X` the loss is therefore the
//! literal constant `0.0`; on side `X'` it is either a strictly convex
//! quadratic or a linear function along one coordinate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::ScalarFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Side {
    X,
    XPrime,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::X, Side::XPrime];

    /// Stream tag used when deriving per-trial random streams.
    pub fn tag(self) -> u64 {
        match self {
            Side::X => 0,
            Side::XPrime => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LossFamily {
    /// `(L/n) * sum_i |x_i| * |w|^2`
    Quadratic,
    /// `-(1/n) <w, sum_i x_i>`
    Linear,
}

/// Two datasets of equal size differing in exactly the record at
/// `differing_index`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetPair {
    pub family: LossFamily,
    pub records_x: Vec<Vec<f64>>,
    pub records_x_prime: Vec<Vec<f64>>,
    pub differing_index: usize,
    pub lipschitz: f64,
}

impl DatasetPair {
    pub fn n(&self) -> usize {
        self.records_x.len()
    }

    pub fn record_dim(&self) -> usize {
        self.records_x.first().map_or(0, Vec::len)
    }

    pub fn records(&self, side: Side) -> &[Vec<f64>] {
        match side {
            Side::X => &self.records_x,
            Side::XPrime => &self.records_x_prime,
        }
    }

    /// Indices at which the two sides disagree.
    pub fn differing_indices(&self) -> Vec<usize> {
        self.records_x
            .iter()
            .zip(&self.records_x_prime)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| i)
            .collect()
    }

    fn record_sum(&self, side: Side) -> Vec<f64> {
        let mut sum = vec![0.0; self.record_dim()];
        for r in self.records(side) {
            for (s, x) in sum.iter_mut().zip(r) {
                *s += x;
            }
        }
        sum
    }

    fn norm_sum(&self, side: Side) -> f64 {
        self.records(side).iter().map(|r| norm(r)).sum()
    }
}

fn validate_common(n: usize, dim: usize, lipschitz: f64) -> Result<()> {
    if n < 1 {
        return Err(Error::invalid("dataset size n must be >= 1"));
    }
    if dim < 1 {
        return Err(Error::invalid("record dimension must be >= 1"));
    }
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::invalid(format!("L must be > 0, got {lipschitz}")));
    }
    Ok(())
}

/// All-zero records except `x'_n = 1_k / sqrt(k)`.
pub fn quadratic_pair(n: usize, k: usize, lipschitz: f64) -> Result<DatasetPair> {
    validate_common(n, k, lipschitz)?;
    let records_x = vec![vec![0.0; k]; n];
    let mut records_x_prime = records_x.clone();
    records_x_prime[n - 1] = vec![1.0 / (k as f64).sqrt(); k];
    Ok(DatasetPair {
        family: LossFamily::Quadratic,
        records_x,
        records_x_prime,
        differing_index: n - 1,
        lipschitz,
    })
}

/// All-zero records except `x'_n = L e_{i_star}`. `i_star` is zero-based.
pub fn linear_pair(n: usize, d: usize, lipschitz: f64, i_star: usize) -> Result<DatasetPair> {
    validate_common(n, d, lipschitz)?;
    if i_star >= d {
        return Err(Error::invalid(format!(
            "i_star must be < d = {d}, got {i_star}"
        )));
    }
    let records_x = vec![vec![0.0; d]; n];
    let mut records_x_prime = records_x.clone();
    records_x_prime[n - 1][i_star] = lipschitz;
    Ok(DatasetPair {
        family: LossFamily::Linear,
        records_x,
        records_x_prime,
        differing_index: n - 1,
        lipschitz,
    })
}

/// Which loss to build over a [`DatasetPair`], and on which model dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub pair: DatasetPair,
    pub param_dim: usize,
}

/// Closed-form description of the loss on one side.
#[derive(Clone, Debug, PartialEq)]
enum Form {
    /// `c * |w|^2`
    Quadratic { c: f64 },
    /// `<slope, w>`
    Linear { slope: Vec<f64> },
}

impl LossSpec {
    pub fn new(pair: DatasetPair, param_dim: usize) -> Result<Self> {
        if param_dim < 1 {
            return Err(Error::invalid("model dimension must be >= 1"));
        }
        if pair.family == LossFamily::Linear && pair.record_dim() != param_dim {
            return Err(Error::DimensionMismatch {
                expected: param_dim,
                got: pair.record_dim(),
            });
        }
        Ok(Self { pair, param_dim })
    }

    pub fn family(&self) -> LossFamily {
        self.pair.family
    }

    fn form(&self, side: Side) -> Form {
        let n = self.pair.n() as f64;
        match self.pair.family {
            LossFamily::Quadratic => Form::Quadratic {
                c: self.pair.lipschitz / n * self.pair.norm_sum(side),
            },
            LossFamily::Linear => Form::Linear {
                slope: self
                    .pair
                    .record_sum(side)
                    .into_iter()
                    .map(|s| -s / n)
                    .collect(),
            },
        }
    }

    /// The quadratic coefficient `c` in `c |w|^2`, if quadratic.
    pub fn quadratic_coefficient(&self, side: Side) -> Option<f64> {
        match self.form(side) {
            Form::Quadratic { c } => Some(c),
            Form::Linear { .. } => None,
        }
    }

    /// Seal the chosen side into a black-box evaluator.
    pub fn build_loss(&self, side: Side) -> ScalarFunction {
        let d = self.param_dim;
        match self.form(side) {
            Form::Quadratic { c } => {
                ScalarFunction::new(d, move |w| c * w.iter().map(|x| x * x).sum::<f64>())
            }
            Form::Linear { slope } => {
                ScalarFunction::new(d, move |w| slope.iter().zip(w).map(|(s, x)| s * x).sum())
            }
        }
    }

    /// Analytic gradient, for checking estimators. Never handed to an oracle.
    pub fn true_gradient(&self, side: Side, w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != self.param_dim {
            return Err(Error::DimensionMismatch {
                expected: self.param_dim,
                got: w.len(),
            });
        }
        Ok(match self.form(side) {
            Form::Quadratic { c } => w.iter().map(|x| 2.0 * c * x).collect(),
            Form::Linear { slope } => slope,
        })
    }
}

/// Convenience wrapper around [`LossSpec::build_loss`].
pub fn build_loss(spec: &LossSpec, side: Side) -> ScalarFunction {
    spec.build_loss(side)
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quadratic_pair_small() {
        let spec = LossSpec::new(quadratic_pair(1, 1, 1.0).unwrap(), 3).unwrap();
        let fx = spec.build_loss(Side::X);
        let fxp = spec.build_loss(Side::XPrime);
        for w in [[0.0, 0.0, 0.0], [1.0, 2.0, -3.0], [0.5, 0.0, 0.0]] {
            assert_eq!(fx.evaluate(&w), 0.0);
            let sq: f64 = w.iter().map(|x| x * x).sum();
            assert_eq!(fxp.evaluate(&w), sq);
        }
    }

    #[test]
    fn quadratic_pair_scaled_by_lipschitz() {
        let spec = LossSpec::new(quadratic_pair(10, 4, 100.0).unwrap(), 3).unwrap();
        assert_eq!(spec.build_loss(Side::XPrime).evaluate(&[1.0, 0.0, 0.0]), 10.0);
    }

    #[test]
    fn zero_point_is_zero_on_both_sides() {
        for n in [1, 3, 50] {
            let spec = LossSpec::new(quadratic_pair(n, 2, 7.0).unwrap(), 2).unwrap();
            for side in Side::BOTH {
                assert_eq!(spec.build_loss(side).evaluate(&[0.0, 0.0]), 0.0);
            }
        }
    }

    #[test]
    fn linear_pair_values_and_gradient() {
        let spec = LossSpec::new(linear_pair(100, 3, 100.0, 1).unwrap(), 3).unwrap();
        let f = spec.build_loss(Side::XPrime);
        assert_eq!(f.evaluate(&[0.0, 1.0, 0.0]), -1.0);
        assert_eq!(f.evaluate(&[5.0, 1.0, -2.0]), -1.0);
        assert_eq!(
            spec.true_gradient(Side::XPrime, &[3.0, 4.0, 5.0]).unwrap(),
            vec![0.0, -1.0, 0.0]
        );
        let spec = LossSpec::new(linear_pair(4, 2, 2.0, 0).unwrap(), 2).unwrap();
        assert_eq!(spec.build_loss(Side::XPrime).evaluate(&[1.0, 0.0]), -0.5);
    }

    #[test]
    fn x_side_is_identically_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for pair in [quadratic_pair(5, 3, 2.0).unwrap(), linear_pair(5, 3, 2.0, 2).unwrap()] {
            let spec = LossSpec::new(pair, 3).unwrap();
            let f = spec.build_loss(Side::X);
            for _ in 0..10 {
                let w: Vec<f64> = (0..3).map(|_| rng.random_range(-10.0..10.0)).collect();
                assert_eq!(f.evaluate(&w), 0.0);
                assert_eq!(spec.true_gradient(Side::X, &w).unwrap(), vec![0.0; 3]);
            }
        }
    }

    #[test]
    fn quadratic_gradient() {
        let spec = LossSpec::new(quadratic_pair(1, 1, 1.0).unwrap(), 2).unwrap();
        assert_eq!(spec.quadratic_coefficient(Side::XPrime), Some(1.0));
        assert_eq!(
            spec.true_gradient(Side::XPrime, &[1.0, 2.0]).unwrap(),
            vec![2.0, 4.0]
        );
    }

    #[test]
    fn exactly_one_record_differs() {
        for pair in [quadratic_pair(7, 3, 1.0).unwrap(), linear_pair(7, 3, 9.0, 0).unwrap()] {
            assert_eq!(pair.differing_indices(), vec![pair.differing_index]);
        }
        let pair = quadratic_pair(7, 3, 1.0).unwrap();
        assert!(pair.records_x_prime.iter().all(|r| norm(r) <= 1.0 + 1e-15));
        let pair = linear_pair(7, 3, 9.0, 0).unwrap();
        assert!(pair.records_x_prime.iter().all(|r| norm(r) <= 9.0));
    }

    #[test]
    fn construction_rejects_bad_inputs() {
        assert!(quadratic_pair(0, 1, 1.0).is_err());
        assert!(quadratic_pair(1, 0, 1.0).is_err());
        assert!(quadratic_pair(1, 1, 0.0).is_err());
        assert!(linear_pair(2, 3, 1.0, 3).is_err());
        assert!(LossSpec::new(linear_pair(2, 3, 1.0, 0).unwrap(), 4).is_err());
        let spec = LossSpec::new(quadratic_pair(1, 1, 1.0).unwrap(), 2).unwrap();
        assert!(spec.true_gradient(Side::X, &[1.0]).is_err());
    }

    #[test]
    fn evaluation_is_deterministic() {
        let spec = LossSpec::new(quadratic_pair(3, 2, 1.5).unwrap(), 2).unwrap();
        let f = spec.build_loss(Side::XPrime);
        let w = [0.123456789, -9.87654321];
        assert_eq!(f.evaluate(&w).to_bits(), f.evaluate(&w).to_bits());
        assert_eq!(f.eval_count(), 2);
    }

    #[test]
    fn linear_loss_is_lipschitz() {
        let (n, lip) = (10, 4.0);
        let spec = LossSpec::new(linear_pair(n, 3, lip, 2).unwrap(), 3).unwrap();
        let f = spec.build_loss(Side::XPrime);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let w: Vec<f64> = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect();
            let v: Vec<f64> = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect();
            let dist = norm(&w.iter().zip(&v).map(|(a, b)| a - b).collect::<Vec<_>>());
            let gap = (f.evaluate(&w) - f.evaluate(&v)).abs();
            assert!(gap <= lip / n as f64 * dist + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn quadratic_matches_formula(
            n in 1usize..20, k in 1usize..6, lip in 0.1f64..100.0,
            w in proptest::collection::vec(-10.0f64..10.0, 3),
        ) {
            let spec = LossSpec::new(quadratic_pair(n, k, lip).unwrap(), 3).unwrap();
            let expected = lip / n as f64 * w.iter().map(|x| x * x).sum::<f64>();
            let got = spec.build_loss(Side::XPrime).evaluate(&w);
            prop_assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0));
        }
    }
}
