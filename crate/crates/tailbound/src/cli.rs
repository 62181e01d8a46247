//! Batch front end: evaluate one bound, emit comparison scorecards, run
//! verification suites, drive simulations, and inspect selector
//! distributions. Documents are machine-readable (JSON, CSV, or plain
//! text) with all decimals rendered at 12 significant digits, and every
//! randomized command requires an explicit `--seed`.

use crate::bounds::{
    absolute_threshold_bound, hypergeometric_bound, kl_tail_bound, multiplicative_bound,
    simplified_bound, steinke_ullman_bound, BoundResult, MultiplicativeDirection,
    MultiplicativeQuery, Tail, TailQuery,
};
use crate::error::{Error, Result};
use crate::mechanisms::{accuracy_gap, sample_selector, selector_distribution, ScoreMatrix};
use crate::montecarlo::{bound_scorecard, empirical_tail, Generator, ScorecardRow, SimulationSpec};
use crate::oracles::UrnSpec;
use crate::verify::{run_all, run_suite, SuiteOptions, SuiteReport};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::path::PathBuf;

/// Output formats the batch commands can emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "tailbound",
    version,
    about = "Tail bounds for sums of bounded random variables: closed forms, \
             exact oracles, verification suites, and seeded simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one named bound and report it in both domains
    Bound(BoundArgs),
    /// Emit a scorecard comparing exact, empirical, and bound values over a deviation grid
    Compare(CompareArgs),
    /// Run named verification suites against the exact oracles
    Verify(VerifyArgs),
    /// Simulate one model and report an empirical tail estimate
    Simulate(SimulateArgs),
    /// Load a score matrix and report its selection distribution
    Select(SelectArgs),
}

/// Stable bound identifiers, one per closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundKind {
    KlUpper,
    KlLower,
    MultUpper,
    MultLower,
    SimpleLower,
    SimpleUpper,
    TwoSided,
    Threshold,
    SuWeak,
    Hypergeometric,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Which bound to evaluate
    #[arg(long, value_enum)]
    pub kind: BoundKind,
    /// Trial count n
    #[arg(long)]
    pub n: Option<u64>,
    /// Success probability (or mean parameter) p
    #[arg(long)]
    pub p: Option<f64>,
    /// Additive deviation t
    #[arg(long)]
    pub t: Option<f64>,
    /// Expectation mu
    #[arg(long)]
    pub mu: Option<f64>,
    /// Relative deviation delta
    #[arg(long)]
    pub delta: Option<f64>,
    /// Absolute threshold for the 2^-t bound
    #[arg(long)]
    pub t_abs: Option<f64>,
    /// Urn population size N
    #[arg(long)]
    pub pop: Option<u64>,
    /// Marked balls P in the urn
    #[arg(long)]
    pub red: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorKind {
    Iid,
    Heterogeneous,
    Urn,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Which random model to draw from
    #[arg(long = "gen", value_enum)]
    pub generator: GeneratorKind,
    /// Trial length n (iid) or sample size (urn)
    #[arg(long)]
    pub n: Option<u64>,
    /// Success probability p (iid)
    #[arg(long)]
    pub p: Option<f64>,
    /// Comma-separated per-variable probabilities (heterogeneous)
    #[arg(long)]
    pub p_list: Option<String>,
    /// Urn population size N
    #[arg(long)]
    pub pop: Option<u64>,
    /// Marked balls P in the urn
    #[arg(long)]
    pub red: Option<u64>,
    /// Number of simulated trials
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Generator seed; reproducibility is a contract, so there is no default
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated additive deviations, one scorecard row each
    #[arg(long)]
    pub t_list: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Tail threshold k
    #[arg(long)]
    pub k: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Suite name, or `all`
    #[arg(long)]
    pub suite: String,
    /// Seed for the randomized suites
    #[arg(long)]
    pub seed: Option<u64>,
    /// Enumeration cap for the eq2 suite
    #[arg(long)]
    pub max_n: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Path to the score-matrix file (one comma-separated row per line)
    #[arg(long)]
    pub matrix: PathBuf,
    /// Selection sharpness; must exceed 1
    #[arg(long)]
    pub gamma: f64,
    /// Also draw this many row indices
    #[arg(long)]
    pub samples: Option<usize>,
    /// Seed for sampling; required when --samples is given
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

/// A finished command: the document to print and the process exit status
/// (0 success, 2 verification failure; errors map through [`exit_code`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub document: String,
    pub status: i32,
}

/// Exit status for a failed command: 3 for i/o problems, 1 for domain,
/// shape, resource, parse, and usage errors.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Io(_) => 3,
        _ => 1,
    }
}

// ---------------------------------------------------------------------------
// numeric rendering
// ---------------------------------------------------------------------------

/// Render a decimal at 12 significant digits. Non-finite values print as
/// `inf`, `-inf`, or `nan`, all of which `f64::from_str` accepts back.
pub fn fmt_sig12(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.11e}")
    }
}

/// JSON value for a decimal: the 12-significant-digit rounding as a
/// number, or a string for non-finite values (JSON has no infinities).
fn json_num(x: f64) -> Value {
    if x.is_finite() {
        let rounded: f64 = fmt_sig12(x).parse().expect("sig12 round-trips");
        json!(rounded)
    } else {
        Value::String(fmt_sig12(x))
    }
}

fn csv_quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

// ---------------------------------------------------------------------------
// flag plumbing
// ---------------------------------------------------------------------------

fn require<T: Copy>(value: Option<T>, flag: &str, kind: &str) -> Result<T> {
    value.ok_or_else(|| Error::Domain(format!("{kind} requires --{flag}")))
}

fn parse_f64_list(text: &str, flag: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|cell| {
            cell.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("--{flag}: cannot parse {:?}", cell.trim())))
        })
        .collect()
}

fn build_generator(model: &ModelArgs) -> Result<Generator> {
    match model.generator {
        GeneratorKind::Iid => Ok(Generator::Iid {
            n: require(model.n, "n", "gen iid")?,
            p: require(model.p, "p", "gen iid")?,
        }),
        GeneratorKind::Heterogeneous => {
            let text = model
                .p_list
                .as_deref()
                .ok_or_else(|| Error::Domain("gen heterogeneous requires --p-list".into()))?;
            Ok(Generator::Heterogeneous {
                ps: parse_f64_list(text, "p-list")?,
            })
        }
        GeneratorKind::Urn => Ok(Generator::Urn(UrnSpec::new(
            require(model.pop, "pop", "gen urn")?,
            require(model.red, "red", "gen urn")?,
            require(model.n, "n", "gen urn")?,
        )?)),
    }
}

fn generator_json(generator: &Generator) -> Value {
    match generator {
        Generator::Iid { n, p } => json!({"kind": "iid", "n": n, "p": json_num(*p)}),
        Generator::Heterogeneous { ps } => json!({
            "kind": "heterogeneous",
            "p_list": ps.iter().map(|&x| json_num(x)).collect::<Vec<_>>(),
        }),
        Generator::Urn(urn) => json!({
            "kind": "urn",
            "pop": urn.population,
            "red": urn.red,
            "n": urn.sample,
        }),
    }
}

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

/// Execute a parsed request and produce its document and exit status.
pub fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Bound(args) => run_bound(args),
        Command::Compare(args) => run_compare(args),
        Command::Verify(args) => run_verify(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Select(args) => run_select(args),
    }
}

fn run_bound(args: &BoundArgs) -> Result<Outcome> {
    let kind = args.kind;
    let (result, inputs) = match kind {
        BoundKind::KlUpper | BoundKind::KlLower => {
            let n = require(args.n, "n", "kl bounds")?;
            let p = require(args.p, "p", "kl bounds")?;
            let t = require(args.t, "t", "kl bounds")?;
            let direction = if kind == BoundKind::KlUpper {
                Tail::Upper
            } else {
                Tail::Lower
            };
            let result = kl_tail_bound(TailQuery::new(n, p, t, direction)?)?;
            (result, json!({"n": n, "p": json_num(p), "t": json_num(t)}))
        }
        BoundKind::MultUpper | BoundKind::MultLower => {
            let mu = require(args.mu, "mu", "multiplicative bounds")?;
            let delta = require(args.delta, "delta", "multiplicative bounds")?;
            let direction = if kind == BoundKind::MultUpper {
                MultiplicativeDirection::Upper
            } else {
                MultiplicativeDirection::Lower
            };
            let result = multiplicative_bound(MultiplicativeQuery::new(mu, delta, direction)?)?;
            (
                result,
                json!({"mu": json_num(mu), "delta": json_num(delta)}),
            )
        }
        BoundKind::SimpleLower | BoundKind::SimpleUpper | BoundKind::TwoSided => {
            let mu = require(args.mu, "mu", "simplified bounds")?;
            let delta = require(args.delta, "delta", "simplified bounds")?;
            let direction = match kind {
                BoundKind::SimpleLower => MultiplicativeDirection::Lower,
                BoundKind::SimpleUpper => MultiplicativeDirection::Upper,
                _ => MultiplicativeDirection::TwoSided,
            };
            let mut result = simplified_bound(MultiplicativeQuery::new(mu, delta, direction)?)?;
            // with n known the degenerate regime is detectable: a relative
            // deviation past (n - mu)/mu targets a count above n
            if direction != MultiplicativeDirection::Lower {
                if let Some(n) = args.n {
                    if (1.0 + delta) * mu > n as f64 + 1e-9 {
                        result = result.with_note(
                            "threshold (1+delta)mu exceeds the trial count; the exact tail is 0",
                        );
                    }
                }
            }
            (
                result,
                json!({"mu": json_num(mu), "delta": json_num(delta)}),
            )
        }
        BoundKind::Threshold => {
            let mu = require(args.mu, "mu", "the threshold bound")?;
            let t_abs = require(args.t_abs, "t-abs", "the threshold bound")?;
            let result = absolute_threshold_bound(mu, t_abs)?;
            (
                result,
                json!({"mu": json_num(mu), "t_abs": json_num(t_abs)}),
            )
        }
        BoundKind::SuWeak => {
            let n = require(args.n, "n", "the weak exponential bound")?;
            let t = require(args.t, "t", "the weak exponential bound")?;
            let result = steinke_ullman_bound(n, t)?;
            (result, json!({"n": n, "t": json_num(t)}))
        }
        BoundKind::Hypergeometric => {
            let pop = require(args.pop, "pop", "the hypergeometric bound")?;
            let red = require(args.red, "red", "the hypergeometric bound")?;
            let n = require(args.n, "n", "the hypergeometric bound")?;
            let t = require(args.t, "t", "the hypergeometric bound")?;
            let result = hypergeometric_bound(pop, red, n, t)?;
            (
                result,
                json!({"pop": pop, "red": red, "n": n, "t": json_num(t)}),
            )
        }
    };
    Ok(Outcome {
        document: render_bound(&result, inputs, args.format),
        status: 0,
    })
}

fn render_bound(result: &BoundResult, inputs: Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut doc = json!({
                "name": result.name,
                "inputs": inputs,
                "log_value": json_num(result.log_value),
                "value": json_num(result.value),
                "vacuous": result.vacuous,
            });
            if let Some(note) = &result.note {
                doc["note"] = Value::String(note.clone());
            }
            format!("{doc}\n")
        }
        Format::Csv => {
            let mut out = String::from("name,log_value,value,vacuous\n");
            out.push_str(&format!(
                "{},{},{},{}\n",
                result.name,
                fmt_sig12(result.log_value),
                fmt_sig12(result.value),
                result.vacuous
            ));
            out
        }
        Format::Text => {
            let mut out = format!(
                "name: {}\nlog_value: {}\nvalue: {}\nvacuous: {}\n",
                result.name,
                fmt_sig12(result.log_value),
                fmt_sig12(result.value),
                result.vacuous
            );
            if let Some(note) = &result.note {
                out.push_str(&format!("note: {note}\n"));
            }
            out
        }
    }
}

fn run_compare(args: &CompareArgs) -> Result<Outcome> {
    let generator = build_generator(&args.model)?;
    let spec = SimulationSpec::new(generator, args.model.trials, args.model.seed)?;
    let deviations = parse_f64_list(&args.t_list, "t-list")?;
    let rows = bound_scorecard(&spec, &deviations)?;
    Ok(Outcome {
        document: render_table(&rows, args.format)?,
        status: 0,
    })
}

/// Render scorecard rows. The CSV header is fixed:
/// `t,k,exact,empirical,kl,multiplicative,simplified,steinke_ullman`,
/// fields comma-separated, lines LF-terminated, decimals at 12
/// significant digits; the JSON array uses the same keys.
pub fn render_table(rows: &[ScorecardRow], format: Format) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Domain("refusing to render an empty table".into()));
    }
    match format {
        Format::Csv => {
            let mut out =
                String::from("t,k,exact,empirical,kl,multiplicative,simplified,steinke_ullman\n");
            for row in rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    fmt_sig12(row.t),
                    row.threshold,
                    fmt_sig12(row.exact),
                    fmt_sig12(row.empirical),
                    fmt_sig12(row.kl),
                    fmt_sig12(row.multiplicative),
                    fmt_sig12(row.simplified),
                    fmt_sig12(row.steinke_ullman),
                ));
            }
            Ok(out)
        }
        Format::Json => {
            let array: Vec<Value> = rows
                .iter()
                .map(|row| {
                    json!({
                        "t": json_num(row.t),
                        "k": row.threshold,
                        "exact": json_num(row.exact),
                        "empirical": json_num(row.empirical),
                        "kl": json_num(row.kl),
                        "multiplicative": json_num(row.multiplicative),
                        "simplified": json_num(row.simplified),
                        "steinke_ullman": json_num(row.steinke_ullman),
                    })
                })
                .collect();
            Ok(format!("{}\n", Value::Array(array)))
        }
        Format::Text => {
            let mut out = format!(
                "{:>18} {:>6} {:>18} {:>18} {:>18} {:>18} {:>18} {:>18} {:>12}\n",
                "t",
                "k",
                "exact",
                "empirical",
                "kl",
                "multiplicative",
                "simplified",
                "su-weak",
                "kl/exact"
            );
            for row in rows {
                // tightness of the sharpest bound against the exact tail
                let tightness = if row.exact > 0.0 {
                    format!("{:.3e}", row.kl / row.exact)
                } else {
                    "inf".to_string()
                };
                out.push_str(&format!(
                    "{:>18} {:>6} {:>18} {:>18} {:>18} {:>18} {:>18} {:>18} {:>12}\n",
                    fmt_sig12(row.t),
                    row.threshold,
                    fmt_sig12(row.exact),
                    fmt_sig12(row.empirical),
                    fmt_sig12(row.kl),
                    fmt_sig12(row.multiplicative),
                    fmt_sig12(row.simplified),
                    fmt_sig12(row.steinke_ullman),
                    tightness,
                ));
            }
            Ok(out)
        }
    }
}

fn run_verify(args: &VerifyArgs) -> Result<Outcome> {
    let options = SuiteOptions {
        seed: args.seed,
        max_n: args.max_n,
    };
    let reports = if args.suite == "all" {
        run_all(&options)?
    } else {
        vec![run_suite(&args.suite, &options)?]
    };
    Ok(verify_outcome(&reports, args.format))
}

/// Render suite reports into a document; any failed check yields exit
/// status 2.
pub fn verify_outcome(reports: &[SuiteReport], format: Format) -> Outcome {
    let failures: usize = reports.iter().map(SuiteReport::failures).sum();
    Outcome {
        document: render_verify(reports, format),
        status: if failures == 0 { 0 } else { 2 },
    }
}

fn render_verify(reports: &[SuiteReport], format: Format) -> String {
    let failures: usize = reports.iter().map(SuiteReport::failures).sum();
    match format {
        Format::Json => {
            let suites: Vec<Value> = reports
                .iter()
                .map(|r| {
                    json!({
                        "suite": r.suite,
                        "passed": r.passed(),
                        "checks": r.checks.iter().map(|c| json!({
                            "name": c.name,
                            "passed": c.passed,
                            "detail": c.detail,
                        })).collect::<Vec<_>>(),
                    })
                })
                .collect();
            format!("{}\n", json!({"suites": suites, "failures": failures}))
        }
        Format::Csv => {
            let mut out = String::from("suite,check,passed,detail\n");
            for report in reports {
                for check in &report.checks {
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        report.suite,
                        csv_quote(&check.name),
                        check.passed,
                        csv_quote(&check.detail)
                    ));
                }
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            for report in reports {
                out.push_str(&format!(
                    "suite {}: {} checks, {} failures\n",
                    report.suite,
                    report.checks.len(),
                    report.failures()
                ));
                for check in &report.checks {
                    out.push_str(&format!(
                        "  [{}] {}: {}\n",
                        if check.passed { "pass" } else { "FAIL" },
                        check.name,
                        check.detail
                    ));
                }
            }
            if failures == 0 {
                out.push_str("checks: all pass\n");
            } else {
                out.push_str(&format!("checks: {failures} failed\n"));
            }
            out
        }
    }
}

fn run_simulate(args: &SimulateArgs) -> Result<Outcome> {
    let generator = build_generator(&args.model)?;
    let spec = SimulationSpec::new(generator, args.model.trials, args.model.seed)?;
    let tail = empirical_tail(&spec, args.k);
    let document = match args.format {
        Format::Json => format!(
            "{}\n",
            json!({
                "generator": generator_json(&spec.generator),
                "trials": tail.trials,
                "seed": tail.seed,
                "threshold": tail.threshold,
                "estimate": json_num(tail.estimate),
                "standard_error": json_num(tail.standard_error),
            })
        ),
        Format::Csv => format!(
            "generator,trials,seed,threshold,estimate,standard_error\n{},{},{},{},{},{}\n",
            spec.generator.label(),
            tail.trials,
            tail.seed,
            tail.threshold,
            fmt_sig12(tail.estimate),
            fmt_sig12(tail.standard_error),
        ),
        Format::Text => format!(
            "generator: {}\ntrials: {}\nseed: {}\nthreshold: {}\nestimate: {}\nstandard_error: {}\n",
            spec.generator.label(),
            tail.trials,
            tail.seed,
            tail.threshold,
            fmt_sig12(tail.estimate),
            fmt_sig12(tail.standard_error),
        ),
    };
    Ok(Outcome {
        document,
        status: 0,
    })
}

fn run_select(args: &SelectArgs) -> Result<Outcome> {
    let matrix = ScoreMatrix::from_csv_path(&args.matrix)?;
    let dist = selector_distribution(&matrix, args.gamma)?;
    let gap = accuracy_gap(&matrix, args.gamma)?;
    let samples = match args.samples {
        None => None,
        Some(count) => {
            let seed = args.seed.ok_or_else(|| {
                Error::Domain("--samples draws randomness and requires --seed".into())
            })?;
            Some(sample_selector(&dist, seed, count))
        }
    };
    let sums = matrix.row_sums();
    let document = match args.format {
        Format::Json => {
            let mut doc = json!({
                "rows": matrix.rows(),
                "cols": matrix.cols(),
                "gamma": json_num(dist.gamma),
                "log_normalizer": json_num(dist.log_normalizer),
                "row_scores": sums.iter().map(|&b| json_num(b)).collect::<Vec<_>>(),
                "probabilities": dist
                    .probabilities
                    .iter()
                    .map(|&p| json_num(p))
                    .collect::<Vec<_>>(),
                "expected_score": json_num(gap.expected_score),
                "max_score": json_num(gap.max_score),
                "accuracy_gap": json_num(gap.gap),
            });
            if let Some(samples) = &samples {
                doc["samples"] = json!(samples);
            }
            format!("{doc}\n")
        }
        Format::Csv => {
            let mut out = String::from("row,score_sum,probability\n");
            for (i, (&b, &p)) in sums.iter().zip(&dist.probabilities).enumerate() {
                out.push_str(&format!("{i},{},{}\n", fmt_sig12(b), fmt_sig12(p)));
            }
            out
        }
        Format::Text => {
            let mut out = format!(
                "rows: {}\ncols: {}\ngamma: {}\nlog_normalizer: {}\nexpected_score: {}\nmax_score: {}\naccuracy_gap: {}\n",
                matrix.rows(),
                matrix.cols(),
                fmt_sig12(dist.gamma),
                fmt_sig12(dist.log_normalizer),
                fmt_sig12(gap.expected_score),
                fmt_sig12(gap.max_score),
                fmt_sig12(gap.gap),
            );
            for (i, (&b, &p)) in sums.iter().zip(&dist.probabilities).enumerate() {
                out.push_str(&format!(
                    "row {i}: score_sum {} probability {}\n",
                    fmt_sig12(b),
                    fmt_sig12(p)
                ));
            }
            if let Some(samples) = &samples {
                let rendered: Vec<String> = samples.iter().map(|s| s.to_string()).collect();
                out.push_str(&format!("samples: {}\n", rendered.join(",")));
            }
            out
        }
    };
    Ok(Outcome {
        document,
        status: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(args).expect("flags parse")
    }

    #[test]
    fn bound_kl_upper_reference_document() {
        let cli = parse(&[
            "tailbound",
            "bound",
            "--kind",
            "kl-upper",
            "--n",
            "100",
            "--p",
            "0.5",
            "--t",
            "0.1",
            "--format",
            "json",
        ]);
        let outcome = dispatch(&cli).unwrap();
        assert_eq!(outcome.status, 0);
        let doc: Value = serde_json::from_str(&outcome.document).unwrap();
        assert_eq!(doc["name"], "kl-upper");
        assert!((doc["value"].as_f64().unwrap() - 0.1335136772513166).abs() < 1e-11);
        assert!((doc["log_value"].as_f64().unwrap() + 2.013551355068887).abs() < 1e-11);
        assert_eq!(doc["vacuous"], Value::Bool(false));
    }

    #[test]
    fn bound_zero_deviation_is_flagged_vacuous() {
        let cli = parse(&[
            "tailbound",
            "bound",
            "--kind",
            "kl-upper",
            "--n",
            "100",
            "--p",
            "0.5",
            "--t",
            "0",
            "--format",
            "json",
        ]);
        let doc: Value = serde_json::from_str(&dispatch(&cli).unwrap().document).unwrap();
        assert_eq!(doc["value"].as_f64().unwrap(), 1.0);
        assert_eq!(doc["vacuous"], Value::Bool(true));
    }

    #[test]
    fn bound_missing_flags_are_domain_errors() {
        let cli = parse(&["tailbound", "bound", "--kind", "kl-upper", "--n", "100"]);
        let err = dispatch(&cli).unwrap_err();
        assert_eq!(exit_code(&err), 1);
    }

    #[test]
    fn simplified_bound_notes_the_degenerate_regime() {
        let cli = parse(&[
            "tailbound",
            "bound",
            "--kind",
            "simple-upper",
            "--mu",
            "8",
            "--delta",
            "2",
            "--n",
            "10",
            "--format",
            "json",
        ]);
        let doc: Value = serde_json::from_str(&dispatch(&cli).unwrap().document).unwrap();
        assert!(doc["note"].as_str().unwrap().contains("exceeds"));
        // e^{-4} evaluated at 40 digits
        assert!((doc["value"].as_f64().unwrap() - 0.018_315_638_888_734_18).abs() < 1e-12);
    }

    #[test]
    fn compare_emits_the_fixed_csv_header() {
        let cli = parse(&[
            "tailbound",
            "compare",
            "--gen",
            "iid",
            "--n",
            "100",
            "--p",
            "0.5",
            "--t-list",
            "0.05,0.1",
            "--trials",
            "2000",
            "--seed",
            "7",
            "--format",
            "csv",
        ]);
        let outcome = dispatch(&cli).unwrap();
        let mut lines = outcome.document.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,k,exact,empirical,kl,multiplicative,simplified,steinke_ullman"
        );
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 2);
        // the kl column decreases along the grid
        let kl: Vec<f64> = rows
            .iter()
            .map(|r| r.split(',').nth(4).unwrap().parse().unwrap())
            .collect();
        assert!(kl[0] > kl[1]);
        assert!(outcome.document.ends_with('\n'));
        assert!(!outcome.document.contains('\r'));
    }

    #[test]
    fn compare_json_uses_the_same_keys() {
        let cli = parse(&[
            "tailbound",
            "compare",
            "--gen",
            "urn",
            "--pop",
            "10",
            "--red",
            "5",
            "--n",
            "4",
            "--t-list",
            "0.25",
            "--trials",
            "1000",
            "--seed",
            "3",
            "--format",
            "json",
        ]);
        let doc: Value = serde_json::from_str(&dispatch(&cli).unwrap().document).unwrap();
        let row = &doc.as_array().unwrap()[0];
        for key in [
            "t",
            "k",
            "exact",
            "empirical",
            "kl",
            "multiplicative",
            "simplified",
            "steinke_ullman",
        ] {
            assert!(row.get(key).is_some(), "missing key {key}");
        }
        assert_eq!(row["k"], json!(3));
    }

    #[test]
    fn verify_quick_suite_reports_all_pass() {
        let cli = parse(&[
            "tailbound",
            "verify",
            "--suite",
            "eq2",
            "--max-n",
            "4",
            "--format",
            "text",
        ]);
        let outcome = dispatch(&cli).unwrap();
        assert_eq!(outcome.status, 0);
        assert!(outcome.document.contains("checks: all pass"));
    }

    #[test]
    fn verify_randomized_suite_without_seed_errors() {
        let cli = parse(&["tailbound", "verify", "--suite", "selector"]);
        let err = dispatch(&cli).unwrap_err();
        assert_eq!(exit_code(&err), 1);
    }

    #[test]
    fn simulate_document_round_trips() {
        let cli = parse(&[
            "tailbound",
            "simulate",
            "--gen",
            "iid",
            "--n",
            "10",
            "--p",
            "0.5",
            "--k",
            "8",
            "--trials",
            "5000",
            "--seed",
            "7",
            "--format",
            "csv",
        ]);
        let outcome = dispatch(&cli).unwrap();
        let data = outcome.document.lines().nth(1).unwrap();
        let fields: Vec<&str> = data.split(',').collect();
        assert_eq!(fields[0], "iid");
        let estimate: f64 = fields[4].parse().unwrap();
        assert!(estimate > 0.0 && estimate < 0.2);
    }

    #[test]
    fn select_reads_a_matrix_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.csv");
        std::fs::write(&path, "1.0\n0.0\n").unwrap();
        let cli = parse(&[
            "tailbound",
            "select",
            "--matrix",
            path.to_str().unwrap(),
            "--gamma",
            "2",
            "--samples",
            "100",
            "--seed",
            "5",
            "--format",
            "json",
        ]);
        let doc: Value = serde_json::from_str(&dispatch(&cli).unwrap().document).unwrap();
        let probs = doc["probabilities"].as_array().unwrap();
        assert!((probs[0].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-11);
        assert_eq!(doc["samples"].as_array().unwrap().len(), 100);

        let missing = parse(&[
            "tailbound",
            "select",
            "--matrix",
            "/nonexistent/scores.csv",
            "--gamma",
            "2",
        ]);
        let err = dispatch(&missing).unwrap_err();
        assert_eq!(exit_code(&err), 3);

        let unseeded = parse(&[
            "tailbound",
            "select",
            "--matrix",
            path.to_str().unwrap(),
            "--gamma",
            "2",
            "--samples",
            "10",
        ]);
        assert_eq!(exit_code(&dispatch(&unseeded).unwrap_err()), 1);
    }

    #[test]
    fn sig12_formatting_round_trips() {
        for &x in &[
            0.1335136772513166,
            1.0,
            0.0,
            -2.013551355068887,
            3.5e-300,
            1.25e7,
        ] {
            let rendered = fmt_sig12(x);
            let back: f64 = rendered.parse().unwrap();
            let tolerance = 1e-11 * x.abs().max(1e-300);
            assert!((back - x).abs() <= tolerance, "{x} -> {rendered} -> {back}");
        }
        assert_eq!(fmt_sig12(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_sig12(f64::INFINITY), "inf");
        assert_eq!("-inf".parse::<f64>().unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn render_table_rejects_empty_input() {
        assert!(render_table(&[], Format::Csv).is_err());
    }

    #[test]
    fn verification_failures_map_to_status_two() {
        use crate::verify::{Check, SuiteReport};
        let clean = SuiteReport {
            suite: "divergence",
            checks: vec![Check {
                name: "nonnegativity".into(),
                passed: true,
                detail: "ok".into(),
            }],
        };
        assert_eq!(verify_outcome(std::slice::from_ref(&clean), Format::Text).status, 0);

        let broken = SuiteReport {
            suite: "divergence",
            checks: vec![Check {
                name: "nonnegativity".into(),
                passed: false,
                detail: "broken".into(),
            }],
        };
        let outcome = verify_outcome(&[clean, broken], Format::Text);
        assert_eq!(outcome.status, 2);
        assert!(outcome.document.contains("checks: 1 failed"));
        assert!(outcome.document.contains("[FAIL]"));
    }
}
