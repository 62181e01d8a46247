//! The algorithmic constructions behind the bounds: a stable selector
//! over score-matrix rows (an exponential-mechanism instance) together
//! with its stability and accuracy audits, and the product-measure weight
//! function with its likelihood ratio.

use crate::divergence::kl_binary;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Slack allowed on the selector's audited inequalities.
pub const AUDIT_SLACK: f64 = 1e-12;

/// An `m×n` matrix of scores in `[0, 1]`, stored row-major. Row sums are
/// the utilities the selector exponentiates.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl ScoreMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!(
                "score matrix needs at least one row and one column, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {rows}x{cols} = {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        for (i, &a) in entries.iter().enumerate() {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::Domain(format!(
                    "score at flat index {i} must lie in [0, 1], got {a}"
                )));
            }
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::Shape("score matrix needs at least one row".into()));
        }
        let n = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Shape(format!(
                    "ragged rows: row 0 has {n} entries, row {i} has {}",
                    row.len()
                )));
            }
        }
        Self::new(m, n, rows.into_iter().flatten().collect())
    }

    /// Parse the comma-separated text format: one row per line, entries as
    /// decimal literals in `[0, 1]`. Ragged rows are rejected.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|cell| {
                    cell.trim().parse::<f64>().map_err(|_| {
                        Error::Parse(format!(
                            "line {}: cannot parse {:?} as a decimal literal",
                            lineno + 1,
                            cell.trim()
                        ))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Self::from_rows(rows)
    }

    pub fn from_csv_path(path: &std::path::Path) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    /// Per-row sums `b_i = Σ_j a_ij`.
    pub fn row_sums(&self) -> Vec<f64> {
        self.entries
            .chunks(self.cols)
            .map(|row| row.iter().sum())
            .collect()
    }

    /// The neighbor matrix obtained by replacing column `j`.
    pub fn with_column_replaced(&self, j: usize, column: &[f64]) -> Result<Self> {
        if j >= self.cols {
            return Err(Error::Shape(format!(
                "column index {j} out of range for a matrix with {} columns",
                self.cols
            )));
        }
        if column.len() != self.rows {
            return Err(Error::Shape(format!(
                "replacement column needs {} entries, got {}",
                self.rows,
                column.len()
            )));
        }
        let mut entries = self.entries.clone();
        for (i, &c) in column.iter().enumerate() {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::Domain(format!(
                    "replacement entry {i} must lie in [0, 1], got {c}"
                )));
            }
            entries[i * self.cols + j] = c;
        }
        Self::new(self.rows, self.cols, entries)
    }
}

/// The selector's law `Pr[i] ∝ γ^{b_i}`, with the log normalizer
/// `ln C_γ = ln Σ_i γ^{b_i}` kept alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorDistribution {
    pub gamma: f64,
    pub probabilities: Vec<f64>,
    pub log_normalizer: f64,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma == 1.0 {
        return Err(Error::Domain(
            "gamma = 1 is rejected: the accuracy guarantee divides by ln(gamma)".into(),
        ));
    }
    if !gamma.is_finite() || gamma <= 1.0 {
        return Err(Error::Domain(format!(
            "stable selection needs gamma > 1, got {gamma}"
        )));
    }
    Ok(())
}

/// Selection probabilities `γ^{b_i}/C_γ(A)`, computed as a max-shifted
/// softmax of `b_i·ln γ` so that scores in the hundreds stay finite.
pub fn selector_distribution(matrix: &ScoreMatrix, gamma: f64) -> Result<SelectorDistribution> {
    check_gamma(gamma)?;
    let ln_gamma = gamma.ln();
    let logits: Vec<f64> = matrix.row_sums().iter().map(|b| b * ln_gamma).collect();
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = scaled.iter().sum();
    Ok(SelectorDistribution {
        gamma,
        probabilities: scaled.iter().map(|&w| w / total).collect(),
        log_normalizer: max + total.ln(),
    })
}

/// Draw `count` row indices by inverse CDF over the cumulative
/// probabilities, from a ChaCha stream keyed by `seed`. A draw that lands
/// exactly on a cumulative boundary resolves to the lower index.
pub fn sample_selector(dist: &SelectorDistribution, seed: u64, count: usize) -> Vec<usize> {
    let mut cumulative = Vec::with_capacity(dist.probabilities.len());
    let mut acc = 0.0;
    for &p in &dist.probabilities {
        acc += p;
        cumulative.push(acc);
    }
    let top = dist.probabilities.len() - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            cumulative.partition_point(|&c| c < u).min(top)
        })
        .collect()
}

/// Per-row probability ratios against a one-column neighbor, checked
/// against the `[γ⁻², γ²]` stability window, plus the intermediate fact
/// that the normalizers differ by at most a factor of `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityAudit {
    pub ratios: Vec<f64>,
    pub within: bool,
    pub normalizer_within: bool,
}

pub fn stability_audit(
    matrix: &ScoreMatrix,
    column_index: usize,
    replacement: &[f64],
    gamma: f64,
) -> Result<StabilityAudit> {
    let original = selector_distribution(matrix, gamma)?;
    let neighbor = selector_distribution(
        &matrix.with_column_replaced(column_index, replacement)?,
        gamma,
    )?;
    let ratios: Vec<f64> = original
        .probabilities
        .iter()
        .zip(&neighbor.probabilities)
        .map(|(&a, &b)| a / b)
        .collect();
    let lo = gamma.powi(-2) - AUDIT_SLACK;
    let hi = gamma.powi(2) + AUDIT_SLACK;
    let within = ratios.iter().all(|&r| r >= lo && r <= hi);
    let normalizer_within =
        (original.log_normalizer - neighbor.log_normalizer).abs() <= gamma.ln() + AUDIT_SLACK;
    Ok(StabilityAudit {
        ratios,
        within,
        normalizer_within,
    })
}

/// Expected selected score versus the best score. The gap is guaranteed
/// to stay below `log_γ m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyGap {
    pub expected_score: f64,
    pub max_score: f64,
    pub gap: f64,
    pub within: bool,
}

pub fn accuracy_gap(matrix: &ScoreMatrix, gamma: f64) -> Result<AccuracyGap> {
    let dist = selector_distribution(matrix, gamma)?;
    let sums = matrix.row_sums();
    let expected_score: f64 = dist
        .probabilities
        .iter()
        .zip(&sums)
        .map(|(&pr, &b)| pr * b)
        .sum();
    let max_score = sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let gap = max_score - expected_score;
    let budget = (matrix.rows() as f64).ln() / gamma.ln();
    Ok(AccuracyGap {
        expected_score,
        max_score,
        gap,
        within: gap >= -AUDIT_SLACK && gap <= budget + AUDIT_SLACK,
    })
}

/// The product-measure weight function `w(x) = (p+t)^{k_x}(1−p−t)^{n−k_x}`
/// paired with the base law `p_x = p^{k_x}(1−p)^{n−k_x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodingScheme {
    pub n: u64,
    pub p: f64,
    pub t: f64,
}

impl EncodingScheme {
    pub fn new(n: u64, p: f64, t: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain(
                "bit-string length n must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&p) || t.is_nan() || t < 0.0 || p + t > 1.0 {
            return Err(Error::Domain(format!(
                "need 0 <= p <= p+t <= 1, got p={p} t={t}"
            )));
        }
        Ok(Self { n, p, t })
    }

    /// `ln(w(x)/p_x)` for a string with `k` one-bits:
    /// `k·ln((p+t)/p) + (n−k)·ln((1−p−t)/(1−p))`. At `t = 0` the measures
    /// coincide and the ratio is exactly 1; strings the base law cannot
    /// produce report `+∞`.
    pub fn log_ratio(&self, k: u64) -> Result<f64> {
        if k > self.n {
            return Err(Error::Domain(format!(
                "one-bit count k={k} exceeds n={}",
                self.n
            )));
        }
        if self.t == 0.0 {
            return Ok(0.0);
        }
        let (n, p, t) = (self.n, self.p, self.t);
        let ones = k as f64;
        let zeros = (n - k) as f64;
        let coef_ln = |coef: f64, x: f64| if coef == 0.0 { 0.0 } else { coef * x.ln() };
        let log_weight = coef_ln(ones, p + t) + coef_ln(zeros, 1.0 - p - t);
        let log_base = coef_ln(ones, p) + coef_ln(zeros, 1.0 - p);
        if log_base == f64::NEG_INFINITY {
            return Ok(f64::INFINITY);
        }
        Ok(log_weight - log_base)
    }

    /// Linear-domain likelihood ratio `w(x)/p_x`.
    pub fn ratio(&self, k: u64) -> Result<f64> {
        Ok(self.log_ratio(k)?.exp())
    }

    /// Materialize `w` over all of `{0,1}ⁿ`, indexed by bitmask. The table
    /// is a product measure, so it sums to one.
    pub fn weight_table(&self) -> Result<Vec<f64>> {
        if self.n > crate::oracles::MAX_JOINT_BITS as u64 {
            return Err(Error::Resource(format!(
                "weight tables cap at n <= {}, got {}",
                crate::oracles::MAX_JOINT_BITS,
                self.n
            )));
        }
        let n = self.n as u32;
        let q = self.p + self.t;
        Ok((0..1usize << n)
            .map(|x| {
                let k = (x as u32).count_ones() as i32;
                q.powi(k) * (1.0 - q).powi(n as i32 - k)
            })
            .collect())
    }

    /// The exponent the ratio reaches at the tail threshold:
    /// `n·D(p+t ‖ p)`.
    pub fn threshold_log_ratio(&self) -> Result<f64> {
        Ok(self.n as f64 * kl_binary(self.p + self.t, self.p)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: Vec<Vec<f64>>) -> ScoreMatrix {
        ScoreMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn selector_closed_forms() {
        let dist = selector_distribution(&matrix(vec![vec![1.0], vec![0.0]]), 2.0).unwrap();
        assert!((dist.probabilities[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((dist.probabilities[1] - 1.0 / 3.0).abs() < 1e-15);

        let dist = selector_distribution(
            &matrix(vec![vec![1.0, 1.0], vec![0.5, 0.5], vec![0.0, 0.0]]),
            2.0,
        )
        .unwrap();
        // row sums (2, 1, 0) with gamma 2: (4/7, 2/7, 1/7)
        assert!((dist.probabilities[0] - 4.0 / 7.0).abs() < 1e-15);
        assert!((dist.probabilities[1] - 2.0 / 7.0).abs() < 1e-15);
        assert!((dist.probabilities[2] - 1.0 / 7.0).abs() < 1e-15);

        let flat = selector_distribution(&matrix(vec![vec![0.7]; 5]), 3.0).unwrap();
        for &pr in &flat.probabilities {
            assert!((pr - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn selector_rejects_gamma_at_most_one() {
        let m = matrix(vec![vec![0.5]]);
        assert!(selector_distribution(&m, 1.0).is_err());
        assert!(selector_distribution(&m, 0.5).is_err());
        assert!(selector_distribution(&m, f64::INFINITY).is_err());
    }

    #[test]
    fn selector_handles_large_scores_in_log_domain() {
        // b ln γ spans hundreds; naive exponentiation would overflow
        let wide = ScoreMatrix::new(2, 300, {
            let mut v = vec![1.0; 300];
            v.extend(vec![0.0; 300]);
            v
        })
        .unwrap();
        let dist = selector_distribution(&wide, 10.0).unwrap();
        assert!((dist.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(dist.probabilities[0] > 1.0 - 1e-12);
        assert!(dist.log_normalizer > 0.0 && dist.log_normalizer.is_finite());
    }

    #[test]
    fn sampling_is_deterministic_and_respects_degenerate_mass() {
        let dist = selector_distribution(&matrix(vec![vec![1.0], vec![0.0]]), 2.0).unwrap();
        assert!(sample_selector(&dist, 7, 0).is_empty());
        let a = sample_selector(&dist, 42, 1000);
        let b = sample_selector(&dist, 42, 1000);
        assert_eq!(a, b);
        let c = sample_selector(&dist, 43, 1000);
        assert_ne!(a, c);

        let point = SelectorDistribution {
            gamma: 2.0,
            probabilities: vec![1.0, 0.0],
            log_normalizer: 0.0,
        };
        assert!(sample_selector(&point, 9, 500).iter().all(|&i| i == 0));
    }

    #[test]
    fn sampling_frequencies_converge() {
        let dist = selector_distribution(&matrix(vec![vec![1.0], vec![0.0]]), 2.0).unwrap();
        let draws = sample_selector(&dist, 42, 100_000);
        let freq = draws.iter().filter(|&&i| i == 0).count() as f64 / 100_000.0;
        let std_err = (2.0 / 9.0 / 100_000.0f64).sqrt();
        assert!((freq - 2.0 / 3.0).abs() < 4.0 * std_err, "freq={freq}");
    }

    #[test]
    fn stability_audit_examples() {
        let m = matrix(vec![vec![1.0], vec![0.0]]);
        let audit = stability_audit(&m, 0, &[0.0, 0.0], 2.0).unwrap();
        // (2/3, 1/3) against (1/2, 1/2)
        assert!((audit.ratios[0] - 4.0 / 3.0).abs() < 1e-14);
        assert!((audit.ratios[1] - 2.0 / 3.0).abs() < 1e-14);
        assert!(audit.within && audit.normalizer_within);

        let unchanged = stability_audit(&m, 0, &[1.0, 0.0], 2.0).unwrap();
        assert!(unchanged.ratios.iter().all(|&r| (r - 1.0).abs() < 1e-15));

        let swapped = stability_audit(&m, 0, &[0.0, 1.0], 2.0).unwrap();
        assert!((swapped.ratios[0] - 2.0).abs() < 1e-14);
        assert!((swapped.ratios[1] - 0.5).abs() < 1e-14);
        assert!(swapped.within);

        assert!(stability_audit(&m, 1, &[0.0, 0.0], 2.0).is_err());
        assert!(stability_audit(&m, 0, &[0.0], 2.0).is_err());
        assert!(stability_audit(&m, 0, &[0.0, 1.5], 2.0).is_err());
    }

    #[test]
    fn accuracy_gap_examples() {
        let single = accuracy_gap(&matrix(vec![vec![0.8, 0.3]]), 2.0).unwrap();
        assert_eq!(single.gap, 0.0);
        assert!(single.within);

        let two = accuracy_gap(&matrix(vec![vec![1.0], vec![0.0]]), 2.0).unwrap();
        assert!((two.expected_score - 2.0 / 3.0).abs() < 1e-15);
        assert!((two.gap - 1.0 / 3.0).abs() < 1e-15);
        assert!(two.within); // 1/3 <= log_2 2 = 1

        let flat = accuracy_gap(&matrix(vec![vec![0.4, 0.2]; 6]), 1.5).unwrap();
        assert!(flat.gap.abs() < 1e-12);
        assert!(flat.within);
    }

    #[test]
    fn encoding_ratio_examples() {
        let id = EncodingScheme::new(5, 0.4, 0.0).unwrap();
        for k in 0..=5 {
            assert_eq!(id.ratio(k).unwrap(), 1.0);
        }

        let small = EncodingScheme::new(2, 0.5, 0.25).unwrap();
        assert!((small.ratio(2).unwrap() - 2.25).abs() < 1e-14);

        // at the threshold count the log ratio equals n·D(p+t‖p):
        // 10·D(0.8‖0.5) at 40 digits
        let scheme = EncodingScheme::new(10, 0.5, 0.3).unwrap();
        let at_threshold = scheme.log_ratio(8).unwrap();
        assert!((at_threshold - 1.9274475702175743).abs() < 1e-12);
        assert!((at_threshold - scheme.threshold_log_ratio().unwrap()).abs() < 1e-12);

        assert!(scheme.log_ratio(11).is_err());
        assert!(EncodingScheme::new(10, 0.7, 0.5).is_err());
    }

    #[test]
    fn encoding_ratio_is_increasing_and_weights_sum_to_one() {
        let scheme = EncodingScheme::new(12, 0.3, 0.4).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=12 {
            let lr = scheme.log_ratio(k).unwrap();
            assert!(lr > prev, "k={k}");
            prev = lr;
        }
        let total: f64 = scheme.weight_table().unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn encoding_boundary_conventions() {
        // base law cannot produce ones: ratio is +infinity
        let spiked = EncodingScheme::new(4, 0.0, 0.5).unwrap();
        assert_eq!(spiked.log_ratio(1).unwrap(), f64::INFINITY);
        // weight law cannot produce zeros: ratio is 0 below the full count
        let saturated = EncodingScheme::new(4, 0.5, 0.5).unwrap();
        assert_eq!(saturated.log_ratio(2).unwrap(), f64::NEG_INFINITY);
        assert!(saturated.log_ratio(4).unwrap().is_finite());
    }

    #[test]
    fn csv_ingestion() {
        let m = ScoreMatrix::from_csv_str("0.5, 1.0, 0.25\n0.0, 0.75, 1.0\n").unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.cols(), 3);
        assert_eq!(m.entry(1, 1), 0.75);
        assert!((m.row_sums()[0] - 1.75).abs() < 1e-15);

        assert!(matches!(
            ScoreMatrix::from_csv_str("0.5, 1.0\n0.25\n"),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            ScoreMatrix::from_csv_str("0.5, oops\n"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            ScoreMatrix::from_csv_str("0.5, 1.5\n"),
            Err(Error::Domain(_))
        ));
        assert!(ScoreMatrix::from_csv_str("\n").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_matrix() -> impl Strategy<Value = ScoreMatrix> {
            (1usize..8, 1usize..8).prop_flat_map(|(m, n)| {
                prop::collection::vec(0.0f64..=1.0, m * n)
                    .prop_map(move |entries| ScoreMatrix::new(m, n, entries).unwrap())
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(128))]

            #[test]
            fn probabilities_normalize(m in arb_matrix(), gamma in 1.01f64..20.0) {
                let dist = selector_distribution(&m, gamma).unwrap();
                let total: f64 = dist.probabilities.iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
                prop_assert!(dist.probabilities.iter().all(|&p| p >= 0.0));
            }

            #[test]
            fn higher_scores_get_higher_probability(m in arb_matrix(), gamma in 1.01f64..20.0) {
                let dist = selector_distribution(&m, gamma).unwrap();
                let sums = m.row_sums();
                for i in 0..sums.len() {
                    for j in 0..sums.len() {
                        if sums[i] > sums[j] {
                            prop_assert!(dist.probabilities[i] >= dist.probabilities[j]);
                        }
                    }
                }
            }
        }
    }
}
