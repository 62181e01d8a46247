//! Seeded, reproducible simulation of the three random models the bounds
//! cover (iid Bernoulli sums, heterogeneous Bernoulli sums, urn draws
//! without replacement) and the empirical-versus-bound scorecard.
//!
//! Each trial draws from its own ChaCha stream keyed by `(seed, trial
//! index)`, so results are independent of scheduling and thread count.

use crate::bounds::{
    ceil_threshold, kl_tail_bound, multiplicative_bound, simplified_bound, steinke_ullman_bound,
    MultiplicativeDirection, MultiplicativeQuery, Tail, TailQuery,
};
use crate::error::{Error, Result};
use crate::oracles::{
    exact_binomial_tail, exact_hypergeometric_tail, exact_poisson_binomial_tail, BinomialSpec,
    UrnSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::HashMap;

/// Cap on total bit draws per simulation call.
pub const MAX_TOTAL_DRAWS: u64 = 1_000_000_000;

/// One of the three experiment families.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// `n` independent Bernoulli(p) trials.
    Iid { n: u64, p: f64 },
    /// Independent Bernoulli trials with per-variable success rates.
    Heterogeneous { ps: Vec<f64> },
    /// `sample` draws without replacement from an urn with `red` marked
    /// balls out of `population`.
    Urn(UrnSpec),
}

impl Generator {
    fn validate(&self) -> Result<()> {
        match self {
            Generator::Iid { n, p } => {
                if *n == 0 {
                    return Err(Error::Domain("iid generator needs n >= 1".into()));
                }
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::Domain(format!("p must lie in [0, 1], got {p}")));
                }
            }
            Generator::Heterogeneous { ps } => {
                if ps.is_empty() {
                    return Err(Error::Domain(
                        "heterogeneous generator needs at least one probability".into(),
                    ));
                }
                for (i, &pi) in ps.iter().enumerate() {
                    if !(0.0..=1.0).contains(&pi) {
                        return Err(Error::Domain(format!(
                            "p[{i}] must lie in [0, 1], got {pi}"
                        )));
                    }
                }
            }
            Generator::Urn(spec) => {
                UrnSpec::new(spec.population, spec.red, spec.sample)?;
            }
        }
        Ok(())
    }

    /// Number of bit draws per trial.
    pub fn trial_length(&self) -> u64 {
        match self {
            Generator::Iid { n, .. } => *n,
            Generator::Heterogeneous { ps } => ps.len() as u64,
            Generator::Urn(spec) => spec.sample,
        }
    }

    /// Mean success parameter of one draw.
    pub fn mean_parameter(&self) -> f64 {
        match self {
            Generator::Iid { p, .. } => *p,
            Generator::Heterogeneous { ps } => ps.iter().sum::<f64>() / ps.len() as f64,
            Generator::Urn(spec) => spec.mean_parameter(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Generator::Iid { .. } => "iid",
            Generator::Heterogeneous { .. } => "heterogeneous",
            Generator::Urn(_) => "urn",
        }
    }
}

/// A fully specified experiment: model, trial count, and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub generator: Generator,
    pub trials: u64,
    pub seed: u64,
}

impl SimulationSpec {
    pub fn new(generator: Generator, trials: u64, seed: u64) -> Result<Self> {
        generator.validate()?;
        if trials == 0 {
            return Err(Error::Domain("trial count must be at least 1".into()));
        }
        let draws = trials.saturating_mul(generator.trial_length());
        if draws > MAX_TOTAL_DRAWS {
            return Err(Error::Resource(format!(
                "simulation would need {draws} bit draws; the cap is {MAX_TOTAL_DRAWS}"
            )));
        }
        Ok(Self {
            generator,
            trials,
            seed,
        })
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn run_trial(generator: &Generator, seed: u64, trial: u64) -> u64 {
    let mut rng = trial_rng(seed, trial);
    match generator {
        Generator::Iid { n, p } => (0..*n).filter(|_| rng.random::<f64>() < *p).count() as u64,
        Generator::Heterogeneous { ps } => {
            ps.iter().filter(|&&pi| rng.random::<f64>() < pi).count() as u64
        }
        Generator::Urn(spec) => {
            // partial Fisher-Yates over N items, sparse so a trial costs
            // O(sample) regardless of the population size; balls below
            // `red` are the marked ones
            let mut displaced: HashMap<u64, u64> = HashMap::new();
            let mut count = 0;
            for i in 0..spec.sample {
                let j = rng.random_range(i..spec.population);
                let ball = *displaced.get(&j).unwrap_or(&j);
                let at_i = *displaced.get(&i).unwrap_or(&i);
                displaced.insert(j, at_i);
                if ball < spec.red {
                    count += 1;
                }
            }
            count
        }
    }
}

/// One sum per trial, in trial order. Deterministic for a given spec.
pub fn simulate_sum(spec: &SimulationSpec) -> Vec<u64> {
    (0..spec.trials)
        .into_par_iter()
        .map(|trial| run_trial(&spec.generator, spec.seed, trial))
        .collect()
}

/// An empirical tail estimate with its plug-in binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalTail {
    pub threshold: u64,
    pub estimate: f64,
    pub standard_error: f64,
    pub trials: u64,
    pub seed: u64,
}

fn tail_from_sums(sums: &[u64], k: u64, trials: u64, seed: u64) -> EmpiricalTail {
    let hits = sums.iter().filter(|&&s| s >= k).count() as f64;
    let estimate = hits / trials as f64;
    EmpiricalTail {
        threshold: k,
        estimate,
        standard_error: (estimate * (1.0 - estimate) / trials as f64).sqrt(),
        trials,
        seed,
    }
}

/// Fraction of trials whose sum reaches `k`, plus the standard error.
pub fn empirical_tail(spec: &SimulationSpec, k: u64) -> EmpiricalTail {
    tail_from_sums(&simulate_sum(spec), k, spec.trials, spec.seed)
}

/// Empirical per-position success frequencies of the urn draw, for
/// exchangeability checks. Only defined for the urn generator.
pub fn urn_position_success_rates(spec: &SimulationSpec) -> Result<Vec<f64>> {
    let urn = match &spec.generator {
        Generator::Urn(urn) => *urn,
        other => {
            return Err(Error::Unsupported(format!(
                "position frequencies are defined for the urn generator, not {}",
                other.label()
            )))
        }
    };
    let counts = (0..spec.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(spec.seed, trial);
            let mut displaced: HashMap<u64, u64> = HashMap::new();
            let mut hits = vec![0u64; urn.sample as usize];
            for i in 0..urn.sample {
                let j = rng.random_range(i..urn.population);
                let ball = *displaced.get(&j).unwrap_or(&j);
                let at_i = *displaced.get(&i).unwrap_or(&i);
                displaced.insert(j, at_i);
                if ball < urn.red {
                    hits[i as usize] = 1;
                }
            }
            hits
        })
        .reduce(
            || vec![0u64; urn.sample as usize],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(counts
        .iter()
        .map(|&c| c as f64 / spec.trials as f64)
        .collect())
}

/// One scorecard line: a deviation, its integer threshold, the exact and
/// empirical tails, and every closed-form bound at that deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScorecardRow {
    pub t: f64,
    pub threshold: u64,
    pub exact: f64,
    pub empirical: f64,
    pub kl: f64,
    pub multiplicative: f64,
    pub simplified: f64,
    pub steinke_ullman: f64,
}

/// Evaluate the full bound family against the matching exact oracle and a
/// single shared simulation, one row per deviation.
pub fn bound_scorecard(spec: &SimulationSpec, deviations: &[f64]) -> Result<Vec<ScorecardRow>> {
    if deviations.is_empty() {
        return Err(Error::Domain("need at least one deviation".into()));
    }
    let n = spec.generator.trial_length();
    if n == 0 {
        return Err(Error::Domain(
            "the scorecard needs at least one draw per trial".into(),
        ));
    }
    let p = spec.generator.mean_parameter();
    if p == 0.0 {
        return Err(Error::Domain(
            "the scorecard needs a positive mean parameter".into(),
        ));
    }
    let mu = p * n as f64;
    let sums = simulate_sum(spec);
    deviations
        .iter()
        .map(|&t| {
            let query = TailQuery::new(n, p, t, Tail::Upper)?;
            let k = ceil_threshold((p + t) * n as f64);
            let exact = match &spec.generator {
                Generator::Iid { n, p } => {
                    exact_binomial_tail(BinomialSpec::new(*n, *p)?, k, Tail::Upper)?
                }
                Generator::Heterogeneous { ps } => exact_poisson_binomial_tail(ps, k)?,
                Generator::Urn(urn) => exact_hypergeometric_tail(*urn, k)?,
            };
            let empirical = tail_from_sums(&sums, k, spec.trials, spec.seed).estimate;
            let delta = if t == 0.0 { 0.0 } else { t / p };
            let kl = kl_tail_bound(query)?.value;
            let multiplicative = multiplicative_bound(MultiplicativeQuery::new(
                mu,
                delta,
                MultiplicativeDirection::Upper,
            )?)?
            .value;
            let simplified = simplified_bound(MultiplicativeQuery::new(
                mu,
                delta,
                MultiplicativeDirection::Upper,
            )?)?
            .value;
            let steinke_ullman = steinke_ullman_bound(n, t)?.value;
            Ok(ScorecardRow {
                t,
                threshold: k,
                exact,
                empirical,
                kl,
                multiplicative,
                simplified,
                steinke_ullman,
            })
        })
        .collect()
}
