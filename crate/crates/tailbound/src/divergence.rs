//! Kullback-Leibler divergence for binary and general finite distributions.
//!
//! Every tail bound in [`crate::bounds`] has the relative entropy
//! `D(p+t ‖ p)` in its exponent, so the edge cases here are load-bearing:
//! `0·ln(0/q) = 0` and `x·ln(x/0) = +∞` for `x > 0`. Infinities are
//! represented with IEEE infinity rather than an error so that callers can
//! turn them into zero-probability bounds.

use crate::error::{Error, Result};

/// Absolute tolerance on the total mass of a [`DiscreteDistribution`].
pub const DISTRIBUTION_SUM_TOLERANCE: f64 = 1e-12;

/// `x·ln(x)` continuously extended with `0` at `x = 0`.
fn x_ln_x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// One summand `x·ln(x/y)` of a relative entropy, computed as
/// `x·ln(x) − x·ln(y)` so that `x = 0` yields an exact zero instead of
/// `0·(−∞) = NaN`.
fn rel_entropy_term(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if y == 0.0 {
        f64::INFINITY
    } else {
        x_ln_x(x) - x * y.ln()
    }
}

fn check_probability(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::Domain(format!(
            "{name} must lie in [0, 1], got {value}"
        )));
    }
    Ok(())
}

/// Relative entropy `D(a ‖ p)` between the Bernoulli laws `(a, 1−a)` and
/// `(p, 1−p)`, in nats.
///
/// Finite whenever `p ∈ (0, 1)`; returns `+∞` for `(a > 0, p = 0)` and
/// `(a < 1, p = 1)`. The result is clamped at zero: the true divergence
/// is nonnegative and only rounding can leave a negative residue.
pub fn kl_binary(a: f64, p: f64) -> Result<f64> {
    check_probability("a", a)?;
    check_probability("p", p)?;
    let sum = rel_entropy_term(a, p) + rel_entropy_term(1.0 - a, 1.0 - p);
    Ok(sum.max(0.0))
}

/// A probability distribution on finitely many elements: nonnegative
/// weights that sum to one within [`DISTRIBUTION_SUM_TOLERANCE`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    weights: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Shape(
                "distribution needs at least one weight".into(),
            ));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Domain(format!(
                    "weight {i} must be a finite nonnegative number, got {w}"
                )));
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_SUM_TOLERANCE {
            return Err(Error::Domain(format!(
                "weights must sum to 1 within {DISTRIBUTION_SUM_TOLERANCE:e}, got {total}"
            )));
        }
        Ok(Self { weights })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Shape("uniform distribution needs m >= 1".into()));
        }
        Ok(Self {
            weights: vec![1.0 / m as f64; m],
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Relative entropy `D(P ‖ Q) = Σ p_i ln(p_i/q_i)` with the same zero
/// conventions as [`kl_binary`]. Agrees with the binary form when `m = 2`.
pub fn kl_general(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Shape(format!(
            "distributions have different lengths: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    let sum: f64 = p
        .weights()
        .iter()
        .zip(q.weights())
        .map(|(&pi, &qi)| rel_entropy_term(pi, qi))
        .sum();
    Ok(sum.max(0.0))
}
