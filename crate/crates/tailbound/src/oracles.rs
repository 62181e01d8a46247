//! Exact, independently derived ground truth: closed-form distribution
//! tails, exhaustive enumeration over `{0,1}ⁿ`, and exact expected-maximum
//! computation. Everything here is the brute-force side of a verification
//! pair; nothing reuses the bound evaluators it is meant to check.
//!
//! Tail sums run in log domain with a max shift (subtract the largest log
//! term before exponentiating) so that `n` up to 10³ stays clear of
//! underflow.

use crate::bounds::Tail;
use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{BigUint, One, Signed, ToPrimitive, Zero};

/// Slack allowed when an enumerated quantity is compared against an
/// inequality that holds exactly in real arithmetic.
pub const ENUMERATION_SLACK: f64 = 1e-12;

/// Hard cap on joint-distribution size: `2ⁿ` masses with `n ≤ 20`.
pub const MAX_JOINT_BITS: u32 = 20;

/// Cap for the double enumeration over outcomes and index sets (`4ⁿ` pairs).
pub const MAX_DOUBLE_ENUMERATION_BITS: u32 = 10;

/// Cap for single enumerations such as the weight-exceedance check.
pub const MAX_SINGLE_ENUMERATION_BITS: u32 = 12;

// ---------------------------------------------------------------------------
// log-domain plumbing
// ---------------------------------------------------------------------------

/// Cumulative table of `ln(k!)`.
pub(crate) struct LnFactorials {
    table: Vec<f64>,
}

impl LnFactorials {
    pub fn up_to(n: u64) -> Self {
        let mut table = Vec::with_capacity(n as usize + 1);
        table.push(0.0);
        let mut acc = 0.0;
        for k in 1..=n {
            acc += (k as f64).ln();
            table.push(acc);
        }
        Self { table }
    }

    pub fn ln_choose(&self, n: u64, k: u64) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.table[n as usize] - self.table[k as usize] - self.table[(n - k) as usize]
    }
}

/// `Σ exp(term)` with the largest term factored out first.
fn sum_exp_max_shift(log_terms: &[f64]) -> f64 {
    let max = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return 0.0;
    }
    let scaled: f64 = log_terms.iter().map(|&t| (t - max).exp()).sum();
    (max + scaled.ln()).exp()
}

fn clamp_probability(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn check_probability(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::Domain(format!(
            "{name} must lie in [0, 1], got {value}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Binomial
// ---------------------------------------------------------------------------

/// A Binomial(n, p) population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialSpec {
    pub n: u64,
    pub p: f64,
}

impl BinomialSpec {
    pub fn new(n: u64, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("binomial needs n >= 1".into()));
        }
        check_probability("p", p)?;
        Ok(Self { n, p })
    }
}

/// Exact `Pr[B(n,p) ≥ k]` (upper) or `Pr[B(n,p) ≤ k]` (lower), summed in
/// log domain with a max shift. Absolute accuracy is a few `n·ε`, well
/// inside 1e-13 at desk scale.
pub fn exact_binomial_tail(spec: BinomialSpec, k: u64, direction: Tail) -> Result<f64> {
    let n = spec.n;
    let p = spec.p;
    if k > n + 1 {
        return Err(Error::Domain(format!(
            "threshold k={k} out of range 0..={}",
            n + 1
        )));
    }
    if p == 0.0 {
        return Ok(match direction {
            Tail::Upper => {
                if k == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Tail::Lower => 1.0,
        });
    }
    if p == 1.0 {
        return Ok(match direction {
            Tail::Upper => {
                if k <= n {
                    1.0
                } else {
                    0.0
                }
            }
            Tail::Lower => {
                if k >= n {
                    1.0
                } else {
                    0.0
                }
            }
        });
    }
    // full-support sums are exactly 1
    match direction {
        Tail::Upper if k == 0 => return Ok(1.0),
        Tail::Lower if k >= n => return Ok(1.0),
        _ => {}
    }
    let lf = LnFactorials::up_to(n);
    let ln_p = p.ln();
    let ln_q = (1.0 - p).ln();
    let range = match direction {
        Tail::Upper => {
            if k > n {
                return Ok(0.0);
            }
            k..=n
        }
        Tail::Lower => 0..=k.min(n),
    };
    let log_terms: Vec<f64> = range
        .map(|i| lf.ln_choose(n, i) + i as f64 * ln_p + (n - i) as f64 * ln_q)
        .collect();
    Ok(clamp_probability(sum_exp_max_shift(&log_terms)))
}

/// Exact upper tail `Pr[Σ Xᵢ ≥ k]` of independent Bernoulli variables with
/// success probabilities `ps` (the Poisson-binomial law), via the usual
/// counting convolution.
pub fn exact_poisson_binomial_tail(ps: &[f64], k: u64) -> Result<f64> {
    if ps.is_empty() {
        return Err(Error::Domain("probability list must be nonempty".into()));
    }
    for (i, &pi) in ps.iter().enumerate() {
        check_probability(&format!("p[{i}]"), pi)?;
    }
    let n = ps.len();
    if k as usize > n + 1 {
        return Err(Error::Domain(format!(
            "threshold k={k} out of range 0..={}",
            n + 1
        )));
    }
    let mut dist = vec![0.0f64; n + 1];
    dist[0] = 1.0;
    for (count, &pi) in ps.iter().enumerate() {
        for j in (1..=count + 1).rev() {
            dist[j] = dist[j] * (1.0 - pi) + dist[j - 1] * pi;
        }
        dist[0] *= 1.0 - pi;
    }
    let tail: f64 = dist.iter().skip(k as usize).sum();
    Ok(clamp_probability(tail))
}

/// Binomial pmf table used by [`expected_max_with_floor`]. For `n ≤ 52`
/// the coefficients fit exactly in an `f64` integer, so the direct product
/// is used; larger `n` falls back to the log-factorial route.
fn binomial_pmf_table(n: u64, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0f64; n as usize + 1];
    if p == 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if p == 1.0 {
        pmf[n as usize] = 1.0;
        return pmf;
    }
    let q = 1.0 - p;
    if n <= 52 {
        let mut row = vec![1.0f64];
        for _ in 0..n {
            let mut next = vec![1.0f64; row.len() + 1];
            for j in 1..row.len() {
                next[j] = row[j - 1] + row[j];
            }
            next[row.len()] = 1.0;
            row = next;
        }
        for (k, slot) in pmf.iter_mut().enumerate() {
            *slot = row[k] * p.powi(k as i32) * q.powi((n as usize - k) as i32);
        }
    } else {
        let lf = LnFactorials::up_to(n);
        let (ln_p, ln_q) = (p.ln(), q.ln());
        for (k, slot) in pmf.iter_mut().enumerate() {
            let k64 = k as u64;
            *slot = (lf.ln_choose(n, k64) + k as f64 * ln_p + (n - k64) as f64 * ln_q).exp();
        }
    }
    pmf
}

/// Upper-tail table `U[k] = Pr[B(n,p) ≥ k]` for `k = 0..=n+1`.
fn binomial_upper_tail_table(n: u64, p: f64) -> Vec<f64> {
    let pmf = binomial_pmf_table(n, p);
    let mut upper = vec![0.0f64; n as usize + 2];
    for k in (0..=n as usize).rev() {
        upper[k] = (upper[k + 1] + pmf[k]).min(1.0);
    }
    upper
}

/// Exact `E[max{X⁽¹⁾, …, X⁽ᵐ⁻¹⁾, pn}]` where the `X⁽ⁱ⁾` are iid
/// Binomial(n, p) copies and the last slot is pinned to the mean.
///
/// Uses `E[max(M, c)] = c + Σ_{k=⌈c⌉}^{n} Pr[M ≥ k]·w_k` with
/// `w_⌈c⌉ = ⌈c⌉ − c` and `w_k = 1` above, and `Pr[M ≥ k] = 1 − F(k−1)^{m−1}`
/// through CDF powers, so the cost is independent of `m`.
pub fn expected_max_with_floor(spec: BinomialSpec, m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("copy count m must be at least 1".into()));
    }
    if spec.n > 1000 || m > 1_000_000 {
        return Err(Error::Resource(format!(
            "expected_max_with_floor caps at n <= 1000 and m <= 1e6, got n={} m={m}",
            spec.n
        )));
    }
    let n = spec.n;
    let floor = spec.p * n as f64;
    let k0 = floor.ceil();
    if k0 > n as f64 {
        return Ok(floor);
    }
    let upper = binomial_upper_tail_table(n, spec.p);
    let copies = m - 1;
    let prob_max_at_least = |u: f64| -> f64 {
        if copies == 0 {
            0.0
        } else if copies <= 32 {
            1.0 - (1.0 - u).powi(copies as i32)
        } else {
            -((copies as f64) * (-u).ln_1p()).exp_m1()
        }
    };
    let k0_int = k0 as usize;
    let mut acc = (k0 - floor) * prob_max_at_least(upper[k0_int]);
    for &tail in &upper[k0_int + 1..=n as usize] {
        acc += prob_max_at_least(tail);
    }
    Ok(floor + acc)
}

// ---------------------------------------------------------------------------
// Hypergeometric
// ---------------------------------------------------------------------------

/// An urn with `population` balls, `red` of which are marked, sampled
/// `sample` times without replacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UrnSpec {
    pub population: u64,
    pub red: u64,
    pub sample: u64,
}

impl UrnSpec {
    pub fn new(population: u64, red: u64, sample: u64) -> Result<Self> {
        if population == 0 {
            return Err(Error::Domain("urn needs at least one ball".into()));
        }
        if red > population || sample > population {
            return Err(Error::Domain(format!(
                "urn requires red <= population and sample <= population, \
                 got population={population} red={red} sample={sample}"
            )));
        }
        Ok(Self {
            population,
            red,
            sample,
        })
    }

    /// Fraction of marked balls, the mean parameter of the draw.
    pub fn mean_parameter(&self) -> f64 {
        self.red as f64 / self.population as f64
    }
}

/// Exact `Pr[H(N,P,n) ≥ k]` via log-domain binomial coefficients from
/// cumulative log-factorials.
pub fn exact_hypergeometric_tail(spec: UrnSpec, k: u64) -> Result<f64> {
    let UrnSpec {
        population: total,
        red,
        sample,
    } = spec;
    if k > sample + 1 {
        return Err(Error::Domain(format!(
            "threshold k={k} out of range 0..={}",
            sample + 1
        )));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let white = total - red;
    let lo = k.max(sample.saturating_sub(white));
    let hi = sample.min(red);
    if lo > hi {
        return Ok(0.0);
    }
    let lf = LnFactorials::up_to(total);
    let ln_denom = lf.ln_choose(total, sample);
    let log_terms: Vec<f64> = (lo..=hi)
        .map(|i| lf.ln_choose(red, i) + lf.ln_choose(white, sample - i) - ln_denom)
        .collect();
    Ok(clamp_probability(sum_exp_max_shift(&log_terms)))
}

fn big_choose(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut result = BigUint::one();
    for i in 0..k {
        result *= BigUint::from(n - i);
        result /= BigUint::from(i + 1);
    }
    result
}

fn rational_pow(base: &BigRational, exponent: u64) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..exponent {
        acc *= base;
    }
    acc
}

fn ratio_of(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact margins `C(n,j)·pʲ − C(N,n)⁻¹ Σ_{i≥j} C(P,i)C(N−P,n−i)C(i,j)`
/// for every `j`, in big-rational arithmetic.
pub(crate) fn counting_moment_margins(spec: UrnSpec) -> Vec<BigRational> {
    let UrnSpec {
        population: total,
        red,
        sample,
    } = spec;
    let white = total - red;
    let denom = big_choose(total, sample);
    let p = ratio_of(BigUint::from(red), BigUint::from(total));
    (0..=sample)
        .map(|j| {
            let mut lhs_num = BigUint::zero();
            for i in j..=sample {
                lhs_num += big_choose(red, i) * big_choose(white, sample - i) * big_choose(i, j);
            }
            let lhs = ratio_of(lhs_num, denom.clone());
            let rhs = BigRational::from(BigInt::from(big_choose(sample, j))) * rational_pow(&p, j);
            rhs - lhs
        })
        .collect()
}

/// Exact margin `(1+(τ−1)p)ⁿ − C(N,n)⁻¹ Σ_i C(P,i)C(N−P,n−i)τⁱ`.
pub(crate) fn tilted_sum_margin(spec: UrnSpec, tau: f64) -> Result<BigRational> {
    if !tau.is_finite() || tau < 1.0 {
        return Err(Error::Domain(format!(
            "tau must be a finite real >= 1, got {tau}"
        )));
    }
    let UrnSpec {
        population: total,
        red,
        sample,
    } = spec;
    let white = total - red;
    let denom = BigRational::from(BigInt::from(big_choose(total, sample)));
    let tau_rat = BigRational::from_float(tau)
        .ok_or_else(|| Error::Domain(format!("tau must be finite, got {tau}")))?;
    let p = ratio_of(BigUint::from(red), BigUint::from(total));
    let mut lhs = BigRational::zero();
    for i in 0..=sample {
        let coeff = big_choose(red, i) * big_choose(white, sample - i);
        lhs += BigRational::from(BigInt::from(coeff)) * rational_pow(&tau_rat, i);
    }
    lhs /= denom;
    let base = BigRational::one() + (tau_rat - BigRational::one()) * p;
    Ok(rational_pow(&base, sample) - lhs)
}

/// Result of the exact counting-moment and tilted-sum checks behind the
/// hypergeometric tail bound.
#[derive(Debug, Clone)]
pub struct HypergeometricClaims {
    pub tau: f64,
    /// Per-`j` margin of `Σ_{i≥j} C(P,i)C(N−P,n−i)C(i,j)/C(N,n) ≤ C(n,j)pʲ`.
    pub counting_margins: Vec<f64>,
    /// Margin of `Σ_i C(P,i)C(N−P,n−i)τⁱ/C(N,n) ≤ (1+(τ−1)p)ⁿ`.
    pub tilted_margin: f64,
    /// True when every exact rational margin is nonnegative.
    pub holds: bool,
}

/// Verify, in exact rational arithmetic, the two combinatorial inequalities
/// that make the hypergeometric tail dominate the binomial moment bound.
pub fn verify_hypergeometric_claims(spec: UrnSpec, tau: f64) -> Result<HypergeometricClaims> {
    if spec.population > 60 {
        return Err(Error::Resource(format!(
            "exact rational verification caps at population <= 60, got {}",
            spec.population
        )));
    }
    let counting = counting_moment_margins(spec);
    let tilted = tilted_sum_margin(spec, tau)?;
    let holds = counting.iter().all(|m| !m.is_negative()) && !tilted.is_negative();
    Ok(HypergeometricClaims {
        tau,
        counting_margins: counting
            .iter()
            .map(|m| m.to_f64().unwrap_or(f64::NAN))
            .collect(),
        tilted_margin: tilted.to_f64().unwrap_or(f64::NAN),
        holds,
    })
}

// ---------------------------------------------------------------------------
// Joint distributions on {0,1}^n
// ---------------------------------------------------------------------------

/// An explicit probability mass function over `{0,1}ⁿ`, indexed by bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    n: u32,
    mass: Vec<f64>,
}

impl JointDistribution {
    pub fn new(n: u32, mass: Vec<f64>) -> Result<Self> {
        if n > MAX_JOINT_BITS {
            return Err(Error::Resource(format!(
                "joint distributions cap at n <= {MAX_JOINT_BITS}, got {n}"
            )));
        }
        if mass.len() != 1usize << n {
            return Err(Error::Shape(format!(
                "mass table must have 2^{n} = {} entries, got {}",
                1usize << n,
                mass.len()
            )));
        }
        for (x, &w) in mass.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Domain(format!(
                    "mass of string {x:#b} must be finite and nonnegative, got {w}"
                )));
            }
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > ENUMERATION_SLACK {
            return Err(Error::Domain(format!(
                "masses must sum to 1 within {ENUMERATION_SLACK:e}, got {total}"
            )));
        }
        Ok(Self { n, mass })
    }

    /// Independent product law with marginals `ps`.
    pub fn product(ps: &[f64]) -> Result<Self> {
        let n = ps.len() as u32;
        if ps.is_empty() || n > MAX_JOINT_BITS {
            return Err(Error::Resource(format!(
                "product law needs 1..={MAX_JOINT_BITS} variables, got {}",
                ps.len()
            )));
        }
        for (i, &pi) in ps.iter().enumerate() {
            check_probability(&format!("p[{i}]"), pi)?;
        }
        let size = 1usize << n;
        let mut mass = vec![0.0f64; size];
        for (x, slot) in mass.iter_mut().enumerate() {
            let mut w = 1.0;
            for (i, &pi) in ps.iter().enumerate() {
                w *= if x >> i & 1 == 1 { pi } else { 1.0 - pi };
            }
            *slot = w;
        }
        Ok(Self { n, mass })
    }

    /// Joint law of the first `sample` draw indicators from an urn,
    /// i.e. the exchangeable without-replacement family.
    pub fn urn_indicators(spec: UrnSpec) -> Result<Self> {
        let n = spec.sample as u32;
        if n > MAX_JOINT_BITS {
            return Err(Error::Resource(format!(
                "urn indicator joints cap at sample <= {MAX_JOINT_BITS}, got {n}"
            )));
        }
        fn falling(a: u64, j: u64) -> f64 {
            if j > a {
                return 0.0;
            }
            (0..j).map(|i| (a - i) as f64).product()
        }
        let total_orderings = falling(spec.population, spec.sample);
        let size = 1usize << n;
        let mut mass = vec![0.0f64; size];
        for (x, slot) in mass.iter_mut().enumerate() {
            let k = (x as u32).count_ones() as u64;
            *slot = falling(spec.red, k) * falling(spec.population - spec.red, spec.sample - k)
                / total_orderings;
        }
        Self::new(n, mass)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }
}

/// `Pr[Σ Xᵢ ≥ k]` under an explicit joint law, by direct enumeration.
pub fn exact_joint_tail(joint: &JointDistribution, k: u32) -> f64 {
    joint
        .mass
        .iter()
        .enumerate()
        .filter(|(x, _)| (*x as u32).count_ones() >= k)
        .map(|(_, &w)| w)
        .sum()
}

/// Outcome of checking `E[∏_{i∈I} Xᵢ] ≤ ∏_{i∈I} pᵢ` over every index set.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeCorrelationReport {
    pub holds: bool,
    /// Index set with the smallest slack `∏ pᵢ − E[∏ Xᵢ]`.
    pub worst_set: Vec<usize>,
    pub worst_slack: f64,
}

/// Enumerate all `2ⁿ` index sets and test the negative-correlation
/// hypothesis with slack `≥ −1e-12`. Superset sums are built with a
/// subset-sum transform so the whole check is `O(n·2ⁿ)`.
pub fn verify_negative_correlation(
    joint: &JointDistribution,
    ps: &[f64],
) -> Result<NegativeCorrelationReport> {
    if ps.len() != joint.n as usize {
        return Err(Error::Shape(format!(
            "need one marginal per variable: joint has {}, got {}",
            joint.n,
            ps.len()
        )));
    }
    for (i, &pi) in ps.iter().enumerate() {
        check_probability(&format!("p[{i}]"), pi)?;
    }
    let n = joint.n;
    let size = 1usize << n;
    // expectation[mask] = Pr[all variables in mask are 1] = Σ_{x ⊇ mask} p_x
    let mut expectation = joint.mass.clone();
    for bit in 0..n {
        for mask in 0..size {
            if mask & (1 << bit) == 0 {
                expectation[mask] += expectation[mask | (1 << bit)];
            }
        }
    }
    let mut worst_mask = 0usize;
    let mut worst_slack = f64::INFINITY;
    for (mask, &e) in expectation.iter().enumerate() {
        let mut product = 1.0;
        for (i, &pi) in ps.iter().enumerate() {
            if mask >> i & 1 == 1 {
                product *= pi;
            }
        }
        let slack = product - e;
        if slack < worst_slack {
            worst_slack = slack;
            worst_mask = mask;
        }
    }
    let worst_set = (0..n as usize)
        .filter(|i| worst_mask >> i & 1 == 1)
        .collect();
    Ok(NegativeCorrelationReport {
        holds: worst_slack >= -ENUMERATION_SLACK,
        worst_set,
        worst_slack,
    })
}

// ---------------------------------------------------------------------------
// Exhaustive product-expectation enumeration
// ---------------------------------------------------------------------------

/// `E[∏_{i∈I} Xᵢ]` where the `Xᵢ` are iid Bernoulli(p) and `I` keeps each
/// index independently with probability `lambda`, evaluated by brute force
/// over all `2ⁿ` outcomes and all `2ⁿ` index sets.
pub fn ik_product_expectation(n: u32, p: f64, lambda: f64) -> Result<f64> {
    if n > MAX_DOUBLE_ENUMERATION_BITS {
        return Err(Error::Resource(format!(
            "double enumeration caps at n <= {MAX_DOUBLE_ENUMERATION_BITS}, got {n}"
        )));
    }
    check_probability("p", p)?;
    check_probability("lambda", lambda)?;
    let size = 1u32 << n;
    // weight tables indexed by popcount; powi(0) = 1 keeps the 0^0 edges right
    let outcome_weight: Vec<f64> = (0..=n)
        .map(|k| p.powi(k as i32) * (1.0 - p).powi((n - k) as i32))
        .collect();
    let set_weight: Vec<f64> = (0..=n)
        .map(|j| lambda.powi(j as i32) * (1.0 - lambda).powi((n - j) as i32))
        .collect();
    let mut total = 0.0;
    for x in 0..size {
        let wx = outcome_weight[x.count_ones() as usize];
        if wx == 0.0 {
            continue;
        }
        for set in 0..size {
            // the product over the index set is 1 only when every chosen
            // variable came up 1
            if set & x == set {
                total += wx * set_weight[set.count_ones() as usize];
            }
        }
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Weight-function exceedance
// ---------------------------------------------------------------------------

/// Enumerated probability that a weight function exceeds `s` times the
/// true mass, plus the `1/s` budget check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightExceedance {
    pub probability: f64,
    pub within_bound: bool,
}

/// For a valid weight function `w` (nonnegative, total weight ≤ 1), compute
/// `Pr_{x∼joint}[w(x) ≥ s·p_x]` exactly and check it against `1/s`.
pub fn weight_exceedance_probability(
    joint: &JointDistribution,
    weights: &[f64],
    s: f64,
) -> Result<WeightExceedance> {
    if joint.n > MAX_SINGLE_ENUMERATION_BITS {
        return Err(Error::Resource(format!(
            "exceedance enumeration caps at n <= {MAX_SINGLE_ENUMERATION_BITS}, got {}",
            joint.n
        )));
    }
    if weights.len() != joint.mass.len() {
        return Err(Error::Shape(format!(
            "need one weight per bit string: expected {}, got {}",
            joint.mass.len(),
            weights.len()
        )));
    }
    if s.is_nan() || s < 1.0 {
        return Err(Error::Domain(format!("s must be >= 1, got {s}")));
    }
    let mut total_weight = 0.0;
    for (x, &w) in weights.iter().enumerate() {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::Domain(format!(
                "weight of string {x:#b} must be finite and nonnegative, got {w}"
            )));
        }
        total_weight += w;
    }
    if total_weight > 1.0 + ENUMERATION_SLACK {
        return Err(Error::Domain(format!(
            "weight function is not valid: total weight {total_weight} exceeds 1"
        )));
    }
    let probability: f64 = joint
        .mass
        .iter()
        .zip(weights)
        .filter(|(&px, &w)| w >= s * px)
        .map(|(&px, _)| px)
        .sum();
    Ok(WeightExceedance {
        probability,
        within_bound: probability <= 1.0 / s + ENUMERATION_SLACK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::DiscreteCDF;

    fn binom(n: u64, p: f64) -> BinomialSpec {
        BinomialSpec::new(n, p).unwrap()
    }

    #[test]
    fn binomial_tail_rational_values() {
        let spec = binom(10, 0.5);
        // 638/1024 and 56/1024, from direct rational summation of C(10, i)/2^10.
        assert!((exact_binomial_tail(spec, 5, Tail::Upper).unwrap() - 0.623046875).abs() < 1e-13);
        assert!((exact_binomial_tail(spec, 8, Tail::Upper).unwrap() - 0.0546875).abs() < 1e-13);
        assert_eq!(exact_binomial_tail(spec, 0, Tail::Upper).unwrap(), 1.0);
        assert_eq!(exact_binomial_tail(spec, 11, Tail::Upper).unwrap(), 0.0);
    }

    #[test]
    fn binomial_tail_matches_statrs() {
        for &(n, p) in &[(25u64, 0.3f64), (60, 0.77), (100, 0.5)] {
            let reference = statrs::distribution::Binomial::new(p, n).unwrap();
            let spec = binom(n, p);
            for k in 0..=n {
                let upper = exact_binomial_tail(spec, k, Tail::Upper).unwrap();
                let expect = if k == 0 { 1.0 } else { reference.sf(k - 1) };
                assert!((upper - expect).abs() < 1e-11, "n={n} p={p} k={k}");
            }
        }
    }

    #[test]
    fn binomial_tail_consistency() {
        let spec = binom(37, 0.23);
        for k in 1..=37 {
            let upper = exact_binomial_tail(spec, k, Tail::Upper).unwrap();
            let lower = exact_binomial_tail(spec, k - 1, Tail::Lower).unwrap();
            assert!((upper + lower - 1.0).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn binomial_tail_degenerate_p() {
        let zero = binom(5, 0.0);
        assert_eq!(exact_binomial_tail(zero, 0, Tail::Upper).unwrap(), 1.0);
        assert_eq!(exact_binomial_tail(zero, 1, Tail::Upper).unwrap(), 0.0);
        let one = binom(5, 1.0);
        assert_eq!(exact_binomial_tail(one, 5, Tail::Upper).unwrap(), 1.0);
        assert_eq!(exact_binomial_tail(one, 4, Tail::Lower).unwrap(), 0.0);
    }

    #[test]
    fn binomial_tail_rejects_out_of_range_threshold() {
        assert!(exact_binomial_tail(binom(10, 0.5), 12, Tail::Upper).is_err());
    }

    #[test]
    fn poisson_binomial_matches_binomial_when_homogeneous() {
        let ps = vec![0.35; 12];
        let spec = binom(12, 0.35);
        for k in 0..=13 {
            let a = exact_poisson_binomial_tail(&ps, k).unwrap();
            let b = exact_binomial_tail(spec, k.min(12), Tail::Upper).unwrap();
            let b = if k == 13 { 0.0 } else { b };
            assert!((a - b).abs() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn hypergeometric_tail_values() {
        let spec = UrnSpec::new(10, 5, 4).unwrap();
        // (C(5,3)C(5,1) + C(5,4)C(5,0)) / C(10,4) = 55/210
        let expected = 55.0 / 210.0;
        assert!((exact_hypergeometric_tail(spec, 3).unwrap() - expected).abs() < 1e-13);
        assert_eq!(exact_hypergeometric_tail(spec, 0).unwrap(), 1.0);
        assert_eq!(exact_hypergeometric_tail(spec, 5).unwrap(), 0.0);
        assert!(exact_hypergeometric_tail(spec, 6).is_err());
    }

    #[test]
    fn hypergeometric_tail_matches_statrs() {
        let spec = UrnSpec::new(40, 17, 12).unwrap();
        let reference = statrs::distribution::Hypergeometric::new(40, 17, 12).unwrap();
        for k in 0..=12u64 {
            let ours = exact_hypergeometric_tail(spec, k).unwrap();
            let expect = if k == 0 { 1.0 } else { reference.sf(k - 1) };
            assert!((ours - expect).abs() < 1e-11, "k={k}");
        }
    }

    #[test]
    fn hypergeometric_claims_small_urn() {
        let spec = UrnSpec::new(10, 5, 4).unwrap();
        let report = verify_hypergeometric_claims(spec, 2.0).unwrap();
        assert!(report.holds);
        // j = 0: both sides are 1, so the margin vanishes.
        assert_eq!(report.counting_margins[0], 0.0);
        // j = 4: 0.0625 − 5/210.
        let expected_j4 = 0.0625 - 5.0 / 210.0;
        assert!((report.counting_margins[4] - expected_j4).abs() < 1e-15);
        // tau = 2: (1 + p)^4 − 985/210.
        let expected_tilted = 1.5f64.powi(4) - 985.0 / 210.0;
        assert!((report.tilted_margin - expected_tilted).abs() < 1e-13);
    }

    #[test]
    fn hypergeometric_claims_caps_population() {
        let spec = UrnSpec::new(61, 30, 10).unwrap();
        assert!(matches!(
            verify_hypergeometric_claims(spec, 1.0),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn product_expectation_enumeration() {
        let value = ik_product_expectation(3, 0.5, 0.5).unwrap();
        assert!((value - 0.421875).abs() < 1e-15);
        assert!((ik_product_expectation(7, 0.3, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let all_in = ik_product_expectation(2, 0.3, 1.0).unwrap();
        assert!((all_in - 0.09).abs() < 1e-15);
        assert!(matches!(
            ik_product_expectation(11, 0.5, 0.5),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn joint_tail_and_negative_correlation_for_urn() {
        let joint = JointDistribution::urn_indicators(UrnSpec::new(4, 2, 2).unwrap()).unwrap();
        assert!((exact_joint_tail(&joint, 2) - 1.0 / 6.0).abs() < 1e-13);
        // k = 0 returns the table's own total mass
        assert!((exact_joint_tail(&joint, 0) - 1.0).abs() < 1e-12);
        let report = verify_negative_correlation(&joint, &[0.5, 0.5]).unwrap();
        assert!(report.holds);
    }

    #[test]
    fn joint_tail_of_product_law_matches_binomial() {
        let joint = JointDistribution::product(&[0.5; 10]).unwrap();
        let spec = binom(10, 0.5);
        for k in 0..=10u32 {
            let enumerated = exact_joint_tail(&joint, k);
            let direct = exact_binomial_tail(spec, k as u64, Tail::Upper).unwrap();
            assert!((enumerated - direct).abs() < 1e-12, "k={k}");
        }
        assert!((exact_joint_tail(&joint, 8) - 0.0546875).abs() < 1e-12);
    }

    #[test]
    fn negative_correlation_product_law_is_tight() {
        let ps = [0.3, 0.6, 0.5];
        let joint = JointDistribution::product(&ps).unwrap();
        let report = verify_negative_correlation(&joint, &ps).unwrap();
        assert!(report.holds);
        assert!(report.worst_slack.abs() < 1e-12);
    }

    #[test]
    fn negative_correlation_rejects_duplicated_variable() {
        // X1 = X2 with marginal 1/2: E[X1 X2] = 1/2 > 1/4.
        let joint = JointDistribution::new(2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let report = verify_negative_correlation(&joint, &[0.5, 0.5]).unwrap();
        assert!(!report.holds);
        assert_eq!(report.worst_set, vec![0, 1]);
        assert!((report.worst_slack - (0.25 - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn expected_max_small_cases_are_exact() {
        let spec = binom(4, 0.5);
        assert_eq!(expected_max_with_floor(spec, 1).unwrap(), 2.0);
        assert_eq!(expected_max_with_floor(spec, 2).unwrap(), 2.375);
        assert_eq!(expected_max_with_floor(spec, 3).unwrap(), 678.0 / 256.0);
        assert!(matches!(
            expected_max_with_floor(spec, 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn expected_max_handles_fractional_floor() {
        // n = 1, p = 0.4, m = 2: E[max(X, 0.4)] = 0.4 + 0.4·0.6 = 0.64.
        let spec = binom(1, 0.4);
        let value = expected_max_with_floor(spec, 2).unwrap();
        assert!((value - 0.64).abs() < 1e-15);
    }

    #[test]
    fn exceedance_examples() {
        let uniform = JointDistribution::new(2, vec![0.25; 4]).unwrap();
        // w identical to the mass never reaches 2x the mass
        let same = weight_exceedance_probability(&uniform, &[0.25; 4], 2.0).unwrap();
        assert_eq!(same.probability, 0.0);
        assert!(same.within_bound);
        // all weight on one string: exceedance probability exactly 1/s
        let spike = weight_exceedance_probability(&uniform, &[1.0, 0.0, 0.0, 0.0], 4.0).unwrap();
        assert!((spike.probability - 0.25).abs() < 1e-15);
        assert!(spike.within_bound);
        // s = 1 is always within budget
        let loose = weight_exceedance_probability(&uniform, &[0.25; 4], 1.0).unwrap();
        assert!(loose.within_bound);
        // invalid weight function
        assert!(matches!(
            weight_exceedance_probability(&uniform, &[0.5; 4], 2.0),
            Err(Error::Domain(_))
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn upper_and_lower_tails_partition(n in 1u64..40, p in 0.0f64..=1.0, k in 1u64..40) {
                let k = k.min(n);
                let spec = BinomialSpec::new(n, p).unwrap();
                let upper = exact_binomial_tail(spec, k, Tail::Upper).unwrap();
                let lower = exact_binomial_tail(spec, k - 1, Tail::Lower).unwrap();
                prop_assert!((upper + lower - 1.0).abs() < 1e-12);
            }

            #[test]
            fn hypergeometric_tail_is_monotone(total in 1u64..40, red in 0u64..40, sample in 0u64..40) {
                let red = red.min(total);
                let sample = sample.min(total);
                let spec = UrnSpec::new(total, red, sample).unwrap();
                let mut prev = 1.0;
                for k in 0..=sample + 1 {
                    let tail = exact_hypergeometric_tail(spec, k).unwrap();
                    prop_assert!(tail <= prev + 1e-15);
                    prev = tail;
                }
            }
        }
    }
}
