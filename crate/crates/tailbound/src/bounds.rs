//! Closed-form tail bound evaluators. Every bound is computed in log
//! domain first and reported in both domains; a vacuous bound (value ≥ 1)
//! is flagged, never clamped.

use crate::divergence::kl_binary;
use crate::error::{Error, Result};

/// Which tail of the distribution a query concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    Upper,
    Lower,
}

impl Tail {
    pub fn as_str(self) -> &'static str {
        match self {
            Tail::Upper => "upper",
            Tail::Lower => "lower",
        }
    }
}

/// Direction of a multiplicative-deviation query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplicativeDirection {
    Upper,
    Lower,
    TwoSided,
}

impl MultiplicativeDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            MultiplicativeDirection::Upper => "upper",
            MultiplicativeDirection::Lower => "lower",
            MultiplicativeDirection::TwoSided => "two_sided",
        }
    }
}

/// Tilting method behind the parametric bound family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParametricMethod {
    /// Markov's inequality applied to `e^{λX}`; any `λ > 0` is admissible.
    Moment,
    /// The Impagliazzo–Kabanets random-subset route; `λ ∈ (0, 1]`.
    Ik,
}

impl ParametricMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ParametricMethod::Moment => "moment",
            ParametricMethod::Ik => "ik",
        }
    }
}

/// A population of `n` mean-`p` trials together with an additive deviation
/// `t` and a tail direction. `t` must lie in `[0, 1−p]` for the upper tail
/// and `[0, p]` for the lower tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailQuery {
    pub n: u64,
    pub p: f64,
    pub t: f64,
    pub direction: Tail,
}

impl TailQuery {
    pub fn new(n: u64, p: f64, t: f64, direction: Tail) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("trial count n must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("p must lie in [0, 1], got {p}")));
        }
        let limit = match direction {
            Tail::Upper => 1.0 - p,
            Tail::Lower => p,
        };
        // the 1e-12 headroom admits deviations that sit exactly on the
        // edge but picked up an ulp from complement arithmetic
        if !t.is_finite() || t < 0.0 || t > limit + 1e-12 {
            return Err(Error::Domain(format!(
                "deviation t={t} outside the admissible interval [0, {limit}] for the {} tail",
                direction.as_str()
            )));
        }
        Ok(Self { n, p, t, direction })
    }

    /// Expected sum `μ = pn`.
    pub fn mean(&self) -> f64 {
        self.p * self.n as f64
    }
}

/// A relative deviation `δ` around an expectation `μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplicativeQuery {
    pub mu: f64,
    pub delta: f64,
    pub direction: MultiplicativeDirection,
}

impl MultiplicativeQuery {
    pub fn new(mu: f64, delta: f64, direction: MultiplicativeDirection) -> Result<Self> {
        if !mu.is_finite() || mu < 0.0 {
            return Err(Error::Domain(format!(
                "expectation mu must be finite and nonnegative, got {mu}"
            )));
        }
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::Domain(format!(
                "relative deviation delta must be finite and nonnegative, got {delta}"
            )));
        }
        Ok(Self {
            mu,
            delta,
            direction,
        })
    }
}

/// Echo of the inputs a bound was evaluated at.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundInputs {
    Tail(TailQuery),
    Multiplicative(MultiplicativeQuery),
    Threshold {
        mu: f64,
        t_abs: f64,
    },
    WeakExponent {
        n: u64,
        t: f64,
    },
    Parametric {
        query: TailQuery,
        lambda: f64,
        method: ParametricMethod,
    },
    Hypergeometric {
        population: u64,
        red: u64,
        sample: u64,
        t: f64,
    },
}

/// A bound's identity and value in both domains. `value` is always
/// `exp(log_value)` and `vacuous` is `log_value ≥ 0`, i.e. `value ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    pub name: &'static str,
    pub log_value: f64,
    pub value: f64,
    pub vacuous: bool,
    pub inputs: BoundInputs,
    pub note: Option<String>,
}

impl BoundResult {
    fn from_log(name: &'static str, log_value: f64, inputs: BoundInputs) -> Self {
        Self {
            name,
            log_value,
            value: log_value.exp(),
            vacuous: log_value >= 0.0,
            inputs,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// `coef·ln(x)` with the convention that a zero coefficient absorbs any
/// logarithm, including `ln 0`.
fn mul_ln(coef: f64, x: f64) -> f64 {
    if coef == 0.0 {
        0.0
    } else {
        coef * x.ln()
    }
}

/// Integer threshold for the event `sum ≥ x` when the sum is
/// integer-valued: `⌈x⌉`, with values within 1e-9 of an integer snapped to
/// it first so that thresholds that are exact in real arithmetic do not
/// drift up by one from floating-point residue.
pub fn ceil_threshold(x: f64) -> u64 {
    let rounded = x.round();
    let k = if (x - rounded).abs() < 1e-9 {
        rounded
    } else {
        x.ceil()
    };
    if k <= 0.0 {
        0
    } else {
        k as u64
    }
}

fn kl_exponent(n: u64, p: f64, t: f64) -> Result<f64> {
    // p + t can overshoot 1 by one ulp when t sits at the admissible edge
    let a = (p + t).min(1.0);
    let divergence = kl_binary(a, p)?;
    Ok(-(n as f64) * divergence)
}

/// The relative-entropy (Chernoff–Hoeffding) tail bound
/// `Pr[X ≥ (p+t)n] ≤ e^{−D(p+t‖p)n}`, and its lower-tail counterpart via
/// the complement reduction `Pr[X ≤ (p−t)n] = Pr[X' ≥ ((1−p)+t)n]`, which
/// makes the lower tail bitwise equal to the reflected upper tail.
pub fn kl_tail_bound(query: TailQuery) -> Result<BoundResult> {
    let (name, log_value) = match query.direction {
        Tail::Upper => ("kl-upper", kl_exponent(query.n, query.p, query.t)?),
        Tail::Lower => ("kl-lower", kl_exponent(query.n, 1.0 - query.p, query.t)?),
    };
    Ok(BoundResult::from_log(
        name,
        log_value,
        BoundInputs::Tail(query),
    ))
}

/// One member of the parametric family the optimized bound is the envelope
/// of: `((pe^λ + 1 − p)/e^{λ(p+t)})ⁿ` for the moment method, or
/// `((λp + 1 − λ)/(1−λ)^{1−p−t})ⁿ` for the random-subset method. Upper
/// tail only.
pub fn parametric_bound(
    query: TailQuery,
    lambda: f64,
    method: ParametricMethod,
) -> Result<BoundResult> {
    if query.direction == Tail::Lower {
        return Err(Error::Unsupported(
            "parametric bounds cover the upper tail only".into(),
        ));
    }
    let n = query.n as f64;
    let (p, t) = (query.p, query.t);
    let (name, log_value) = match method {
        ParametricMethod::Moment => {
            if !lambda.is_finite() || lambda <= 0.0 {
                return Err(Error::Domain(format!(
                    "moment method needs lambda > 0, got {lambda}"
                )));
            }
            // ln(pe^λ + 1 − p) evaluated as λ + ln(p + (1−p)e^{−λ}) so large
            // λ cannot overflow the intermediate
            let log_mgf = if p == 0.0 {
                0.0
            } else {
                lambda + (p + (1.0 - p) * (-lambda).exp()).ln()
            };
            ("moment", n * (log_mgf - lambda * (p + t)))
        }
        ParametricMethod::Ik => {
            if lambda.is_nan() || lambda <= 0.0 || lambda > 1.0 {
                return Err(Error::Domain(format!(
                    "random-subset method needs lambda in (0, 1], got {lambda}"
                )));
            }
            let exponent = if p == 0.0 {
                // (λ·0 + 1 − λ)/(1−λ)^{1−t} collapses to (1−λ)^t
                n * mul_ln(t, 1.0 - lambda)
            } else {
                n * ((lambda * p + 1.0 - lambda).ln() - mul_ln(1.0 - p - t, 1.0 - lambda))
            };
            ("ik", exponent)
        }
    };
    Ok(BoundResult::from_log(
        name,
        log_value,
        BoundInputs::Parametric {
            query,
            lambda,
            method,
        },
    ))
}

/// The tilt that minimizes [`parametric_bound`] for the given method:
/// `ln[(1−p)(p+t)/(p(1−p−t))]` for the moment method and
/// `t/((1−p)(p+t))` for the random-subset method.
pub fn optimal_lambda(p: f64, t: f64, method: ParametricMethod) -> Result<f64> {
    if p.is_nan() || p <= 0.0 || p >= 1.0 {
        return Err(Error::Domain(format!(
            "optimal tilt needs p strictly inside (0, 1), got {p}"
        )));
    }
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::Domain(format!(
            "optimal tilt needs a positive deviation, got t={t}"
        )));
    }
    match method {
        ParametricMethod::Moment => {
            if t >= 1.0 - p {
                return Err(Error::Domain(format!(
                    "moment-method optimum is singular at t = 1−p; need t < {}, got {t}",
                    1.0 - p
                )));
            }
            Ok(((1.0 - p) * (p + t) / (p * (1.0 - p - t))).ln())
        }
        ParametricMethod::Ik => {
            if t > 1.0 - p {
                return Err(Error::Domain(format!(
                    "random-subset optimum needs t <= 1−p = {}, got {t}",
                    1.0 - p
                )));
            }
            // mathematically in (0, 1]; trim floating-point overshoot
            Ok((t / ((1.0 - p) * (p + t))).min(1.0))
        }
    }
}

/// Multiplicative tail bound: `(e^δ/(1+δ)^{1+δ})^μ` above the mean and
/// `(e^{−δ}/(1−δ)^{1−δ})^μ` below it, with `(1−δ)ln(1−δ) → 0` at `δ = 1`.
pub fn multiplicative_bound(query: MultiplicativeQuery) -> Result<BoundResult> {
    let MultiplicativeQuery {
        mu,
        delta,
        direction,
    } = query;
    let (name, exponent) = match direction {
        MultiplicativeDirection::TwoSided => {
            return Err(Error::Unsupported(
                "the multiplicative form is one-sided; use simplified_bound for two_sided".into(),
            ));
        }
        MultiplicativeDirection::Upper => ("mult-upper", delta - (1.0 + delta) * delta.ln_1p()),
        MultiplicativeDirection::Lower => {
            if delta > 1.0 {
                return Err(Error::Domain(format!(
                    "the lower multiplicative bound needs delta <= 1, got {delta}"
                )));
            }
            let entropy = if 1.0 - delta == 0.0 {
                0.0
            } else {
                (1.0 - delta) * (-delta).ln_1p()
            };
            ("mult-lower", -delta - entropy)
        }
    };
    // μ = 0 makes the bound (·)^0 = 1 even when the exponent is infinite
    let log_value = if mu == 0.0 { 0.0 } else { mu * exponent };
    Ok(BoundResult::from_log(
        name,
        log_value,
        BoundInputs::Multiplicative(query),
    ))
}

/// The power-series simplifications of the multiplicative bound:
/// `e^{−δ²μ/2}` below the mean for `δ ∈ (0,1)`, `e^{−min{δ²,δ}μ/4}` above
/// it, and twice the latter for the two-sided version.
pub fn simplified_bound(query: MultiplicativeQuery) -> Result<BoundResult> {
    let MultiplicativeQuery {
        mu,
        delta,
        direction,
    } = query;
    let quarter_rate = delta.min(delta * delta) * mu / 4.0;
    let (name, log_value) = match direction {
        MultiplicativeDirection::Lower => {
            if !(delta > 0.0 && delta < 1.0) {
                return Err(Error::Domain(format!(
                    "the simplified lower bound needs delta in (0, 1), got {delta}"
                )));
            }
            ("simple-lower", -delta * delta * mu / 2.0)
        }
        MultiplicativeDirection::Upper => ("simple-upper", -quarter_rate),
        MultiplicativeDirection::TwoSided => ("two-sided", std::f64::consts::LN_2 - quarter_rate),
    };
    Ok(BoundResult::from_log(
        name,
        log_value,
        BoundInputs::Multiplicative(query),
    ))
}

/// Absolute-threshold bound `Pr[X ≥ t] ≤ 2^{−t}`, valid once `t ≥ 2eμ`.
pub fn absolute_threshold_bound(mu: f64, t_abs: f64) -> Result<BoundResult> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::Domain(format!(
            "expectation mu must be finite and nonnegative, got {mu}"
        )));
    }
    let floor = 2.0 * std::f64::consts::E * mu;
    if t_abs.is_nan() || t_abs < floor {
        return Err(Error::Domain(format!(
            "the 2^-t bound needs t_abs >= 2e·mu = {floor}, got {t_abs}"
        )));
    }
    Ok(BoundResult::from_log(
        "threshold",
        -t_abs * std::f64::consts::LN_2,
        BoundInputs::Threshold { mu, t_abs },
    ))
}

/// The weaker exponential bound `e^{1 − t²n/64}` obtained through the
/// stable-selector argument. Vacuous whenever `t < 8/√n`.
pub fn steinke_ullman_bound(n: u64, t: f64) -> Result<BoundResult> {
    if n == 0 {
        return Err(Error::Domain("trial count n must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t must lie in [0, 1], got {t}")));
    }
    Ok(BoundResult::from_log(
        "su-weak",
        1.0 - t * t * n as f64 / 64.0,
        BoundInputs::WeakExponent { n, t },
    ))
}

/// Arithmetic mean of a list of per-trial success probabilities. Feeding
/// the result into [`kl_tail_bound`] realizes the heterogeneous
/// (Hoeffding-extension) and negatively-correlated variants.
pub fn mean_parameter(ps: &[f64]) -> Result<f64> {
    if ps.is_empty() {
        return Err(Error::Domain("probability list must be nonempty".into()));
    }
    for (i, &pi) in ps.iter().enumerate() {
        if !(0.0..=1.0).contains(&pi) {
            return Err(Error::Domain(format!(
                "p[{i}] must lie in [0, 1], got {pi}"
            )));
        }
    }
    Ok(ps.iter().sum::<f64>() / ps.len() as f64)
}

/// Tail bound for drawing without replacement: the relative-entropy bound
/// evaluated at the urn's mean parameter `p = red/population`.
pub fn hypergeometric_bound(population: u64, red: u64, sample: u64, t: f64) -> Result<BoundResult> {
    if population == 0 || red > population || sample > population {
        return Err(Error::Domain(format!(
            "urn requires population >= 1, red <= population, sample <= population, \
             got population={population} red={red} sample={sample}"
        )));
    }
    let p = red as f64 / population as f64;
    let query = TailQuery::new(sample, p, t, Tail::Upper)?;
    let log_value = kl_exponent(query.n, query.p, query.t)?;
    Ok(BoundResult::from_log(
        "hypergeometric",
        log_value,
        BoundInputs::Hypergeometric {
            population,
            red,
            sample,
            t,
        },
    ))
}
