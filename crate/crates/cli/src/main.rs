//! apstats: command line front end for apstats-core.
//!
//! Tables (census rows, kernel samples, simulation batches, oracle pmfs)
//! print in their natural CSV shape; scalar reports flatten to key,value
//! rows, or to pretty JSON with --format json. Argument errors exit 2
//! through clap; library failures exit 1 with a one-line JSON object on
//! stderr ({"error":{"kind":..,"message":..}}) so scripts can branch on
//! the kind without parsing prose.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use apstats_core::{
    bound_report, census_bruteforce_with_budget, census_fast, classify_regimes, count_aps,
    covariance_from_census, dominant_moment, empirical_correlation, exact_joint_distribution,
    exact_joint_moment_with_budget, expected_count, fmt_rat, gamma_coeff, kappa, lambda_constant,
    parse_rat, rat, rat_to_f64, run_all, run_criterion, run_experiment, write_samples_csv, Error,
    Kernel, LengthClass, ModelParams, PairCensus, PairRegime, Prob, Rat, Result,
    StandardizedMoment, DEFAULT_MOMENT_BUDGET, DEFAULT_PAIR_BUDGET,
};

#[derive(Parser)]
#[command(name = "apstats", version, about = "Arithmetic progression counts in random subsets")]
struct Cli {
    /// Output format: csv (default) or json.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Exact number of arithmetic progressions of length ell in {1, .., n}.
    Count(CountArgs),
    /// Census of intersection sizes over ordered progression pairs.
    Pairs(PairsArgs),
    /// Samples of the limit kernel phi on a uniform grid of [0, 1].
    Kernel(KernelArgs),
    /// Limiting pair constants: lambda, kappa, gamma.
    Kappa(KappaArgs),
    /// Classify the univariate and pair regimes at given parameters.
    Regime(RegimeArgs),
    /// Exact covariance and correlation of the two progression counts.
    Covariance(CovarianceArgs),
    /// Exact standardized joint moment by tuple enumeration.
    Moments(MomentsArgs),
    /// Poisson approximation error bounds and the moment growth criterion.
    Bounds(BoundsArgs),
    /// Monte Carlo replicas of the Bernoulli subset experiment.
    Simulate(SimulateArgs),
    /// Exact joint distribution of the two counts (small n only).
    Oracle(OracleArgs),
    /// Re-run the acceptance criteria, one pass/fail line each.
    Repro(ReproArgs),
}

#[derive(Args)]
struct CountArgs {
    /// Ground set size.
    n: u64,
    /// Progression length, at least 3.
    ell: u32,
    /// Inclusion probability; adds the expected count to the report.
    #[arg(long, value_parser = prob_arg)]
    p: Option<Prob>,
}

#[derive(Args)]
struct PairsArgs {
    n: u64,
    /// Longer progression length.
    ell: u32,
    /// Shorter progression length, at most ell.
    ell_prime: u32,
    /// Use the quadratic reference enumeration instead of the fast route.
    #[arg(long)]
    brute: bool,
    /// Ordered-pair budget for the reference enumeration.
    #[arg(long, env = "APSTATS_BUDGET")]
    budget: Option<u64>,
}

#[derive(Args)]
struct KernelArgs {
    /// Length class: an integer >= 3, or "inf" for the divergent kernel.
    #[arg(long, value_parser = class_arg)]
    class: LengthClass,
    /// Number of grid points, endpoints included.
    #[arg(long, default_value_t = 201)]
    points: u32,
}

#[derive(Args)]
struct KappaArgs {
    /// Length class of the first family: an integer >= 3 or "inf".
    #[arg(long, value_parser = class_arg)]
    ell: LengthClass,
    /// Length class of the second family.
    #[arg(long, value_parser = class_arg)]
    ell_prime: LengthClass,
    /// Intensity c of the intermediate regime; adds gamma and the damped
    /// kappa to the report.
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Args)]
struct RegimeArgs {
    #[arg(long)]
    n: u64,
    /// Inclusion probability, as a decimal or an exact fraction like 3/1000.
    #[arg(long, value_parser = prob_arg)]
    p: Prob,
    #[arg(long)]
    ell1: u32,
    #[arg(long)]
    ell2: u32,
}

#[derive(Args)]
struct CovarianceArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    ell1: u32,
    #[arg(long)]
    ell2: u32,
    /// Exact inclusion probability, e.g. 1/2 or 0.125.
    #[arg(long, value_parser = rat_arg)]
    p: Rat,
}

#[derive(Args)]
struct MomentsArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    ell1: u32,
    #[arg(long)]
    ell2: u32,
    /// Exact inclusion probability in (0, 1).
    #[arg(long, value_parser = rat_arg)]
    p: Rat,
    /// Moment order.
    #[arg(long)]
    k: u32,
    /// Direction coefficient on the first standardized count.
    #[arg(long, value_parser = rat_arg, default_value = "1")]
    u1: Rat,
    /// Direction coefficient on the second standardized count.
    #[arg(long, value_parser = rat_arg, default_value = "1")]
    u2: Rat,
    /// Ceiling on enumerated progression multisets.
    #[arg(long, env = "APSTATS_BUDGET")]
    budget: Option<u64>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    ell: u32,
    #[arg(long)]
    p: f64,
    /// Moment order for the growth criterion; must exceed 2.
    #[arg(long, default_value_t = 3.0)]
    s: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: u64,
    #[arg(long, value_parser = prob_arg)]
    p: Prob,
    #[arg(long)]
    ell1: u32,
    #[arg(long)]
    ell2: u32,
    #[arg(long)]
    replicas: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses the global pool. The output is identical
    /// for every thread count.
    #[arg(long, env = "APSTATS_THREADS", default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    ell1: u32,
    #[arg(long)]
    ell2: u32,
    /// Exact inclusion probability in [0, 1].
    #[arg(long, value_parser = rat_arg)]
    p: Rat,
}

#[derive(Args)]
struct ReproArgs {
    /// Run a single criterion (1 through 10) instead of all ten.
    #[arg(long)]
    criterion: Option<u32>,
}

fn prob_arg(s: &str) -> std::result::Result<Prob, String> {
    Prob::parse(s).map_err(|e| e.to_string())
}

fn rat_arg(s: &str) -> std::result::Result<Rat, String> {
    parse_rat(s).map_err(|e| e.to_string())
}

fn class_arg(s: &str) -> std::result::Result<LengthClass, String> {
    LengthClass::parse(s).map_err(|e| e.to_string())
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!(
                "{}",
                json!({ "error": { "kind": e.kind(), "message": e.to_string() } })
            );
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    let fmt = cli.format;
    let out = cli.out;
    match cli.command {
        Command::Count(a) => cmd_count(a, fmt, &out)?,
        Command::Pairs(a) => cmd_pairs(a, fmt, &out)?,
        Command::Kernel(a) => cmd_kernel(a, fmt, &out)?,
        Command::Kappa(a) => cmd_kappa(a, fmt, &out)?,
        Command::Regime(a) => cmd_regime(a, fmt, &out)?,
        Command::Covariance(a) => cmd_covariance(a, fmt, &out)?,
        Command::Moments(a) => cmd_moments(a, fmt, &out)?,
        Command::Bounds(a) => cmd_bounds(a, fmt, &out)?,
        Command::Simulate(a) => cmd_simulate(a, fmt, &out)?,
        Command::Oracle(a) => cmd_oracle(a, fmt, &out)?,
        Command::Repro(a) => return cmd_repro(a, &out),
    }
    Ok(0)
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

/// i128 values that fit a JSON number stay numeric; larger ones become
/// decimal strings rather than losing digits.
fn i128_value(v: i128) -> Value {
    match i64::try_from(v) {
        Ok(x) => Value::from(x),
        Err(_) => Value::from(v.to_string()),
    }
}

/// Scalar reports: pretty JSON, or key,value CSV rows with nested values
/// embedded as compact JSON strings.
fn emit_report(fmt: Format, out: &Option<PathBuf>, v: &Value) -> Result<()> {
    let mut w = open_out(out)?;
    match fmt {
        Format::Json => {
            let text = serde_json::to_string_pretty(v).expect("report values are plain data");
            writeln!(w, "{text}")?;
        }
        Format::Csv => {
            let mut wtr = csv::Writer::from_writer(w);
            wtr.write_record(["key", "value"])?;
            let obj = v.as_object().expect("scalar reports are objects");
            for (key, val) in obj {
                let cell = match val {
                    Value::String(s) => s.clone(),
                    Value::Null => String::new(),
                    other => other.to_string(),
                };
                wtr.write_record([key.as_str(), cell.as_str()])?;
            }
            wtr.flush()?;
        }
    }
    Ok(())
}

fn cmd_count(a: CountArgs, fmt: Format, out: &Option<PathBuf>) -> Result<()> {
    let count = count_aps(a.n, a.ell)?;
    let mut v = json!({
        "n": a.n,
        "ell": a.ell,
        "count": i128_value(count),
    });
    if let Some(p) = &a.p {
        let e = expected_count(a.n, a.ell, p)?;
        let obj = v.as_object_mut().expect("literal object");
        obj.insert("p".into(), Value::from(p.to_string()));
        obj.insert("expected".into(), Value::from(e.to_string()));
        obj.insert("expected_f64".into(), Value::from(e.as_f64()));
    }
    emit_report(fmt, out, &v)
}

fn cmd_pairs(a: PairsArgs, fmt: Format, out: &Option<PathBuf>) -> Result<()> {
    let census = if a.brute {
        census_bruteforce_with_budget(a.n, a.ell, a.ell_prime, a.budget.unwrap_or(DEFAULT_PAIR_BUDGET))?
    } else {
        census_fast(a.n, a.ell, a.ell_prime)?
    };
    match fmt {
        Format::Csv => census.write_csv(open_out(out)?),
        Format::Json => emit_report(fmt, out, &census_value(&census)),
    }
}

fn census_value(c: &PairCensus) -> Value {
    json!({
        "n": c.n,
        "ell": c.ell,
        "ell_prime": c.ell_prime,
        "counts": c.counts.iter().map(|&x| i128_value(x)).collect::<Vec<_>>(),
        "loose": i128_value(c.loose()),
        "overlap": i128_value(c.overlap()),
        "total": i128_value(c.total()),
        "weighted_sum": i128_value(c.weighted_sum()),
    })
}

fn cmd_kernel(a: KernelArgs, fmt: Format, out: &Option<PathBuf>) -> Result<()> {
    let k = Kernel::for_class(a.class)?;
    match fmt {
        Format::Csv => write_samples_csv(&k, a.points, open_out(out)?),
        Format::Json => {
            if a.points < 2 {
                return Err(Error::Domain(format!(
                    "need at least 2 sample points, got {}",
                    a.points
                )));
            }
            let step = 1.0 / f64::from(a.points - 1);
            let mut samples = Vec::with_capacity(a.points as usize);
            for i in 0..a.points {
                let x = f64::from(i) * step;
                samples.push(json!([x, k.eval_f64(x)?]));
            }
            let v = json!({
                "class": a.class.to_string(),
                "points": a.points,
                "samples": samples,
            });
            emit_report(fmt, out, &v)
        }
    }
}

fn cmd_kappa(a: KappaArgs, fmt: Format, out: &Option<PathBuf>) -> Result<()> {
    let lam = lambda_constant(a.ell, a.ell_prime)?;
    let loose = kappa(a.ell, a.ell_prime, &PairRegime::Loose)?;
    let mut v = json!({
        "ell": a.ell.to_string(),
        "ell_prime": a.ell_prime.to_string(),
        "lambda": lam.computed.to_string(),
        "lambda_f64": lam.computed.as_f64(),
        "kappa_loose": loose,
    });
    let obj = v.as_object_mut().expect("literal object");
    if let Some(t) = &lam.tabulated {
        obj.insert("lambda_tabulated".into(), Value::from(fmt_rat(t)));
        obj.insert("lambda_tabulated_f64".into(), Value::from(rat_to_f64(t)));
    }
    if let Some(c) = a.c {
        let regime = PairRegime::Intermediate { c };
        obj.insert("c".into(), Value::from(c));
        obj.insert("gamma".into(), Value::from(gamma_coeff(a.ell, c)?));
        obj.insert(
            "kappa_intermediate".into(),
            Value::from(kappa(a.ell, a.ell_prime, &regime)?),
        );
    }
    emit_report(fmt, out, &v)
}

fn cmd_regime(a: RegimeArgs, fmt: Format, out: &Option<PathBuf>) -> Result<()> {
    let params = ModelParams::new(a.n, a.p, a.ell1, a.ell2)?;
    let report = classify_regimes(&params)?;
    let v = serde_json::to_value(&report).expect("report serializes");
    emit_report(fmt, out, &v)
}

fn cmd_covariance(a: CovarianceArgs, fmt: Format, out: &Option<PathBuf>) -> Result<()> {
    if a.p < rat(0, 1) || a.p > rat(1, 1) {
        return Err(Error::Domain(format!(
            "probability {} outside [0, 1]",
            fmt_rat(&a.p)
        )));
    }
    let cov = covariance_from_census(&census_fast(a.n, a.ell1, a.ell2)?, &a.p)?;
    let var1 = covariance_from_census(&census_fast(a.n, a.ell1, a.ell1)?, &a.p)?;
    let var2 = if a.ell2 == a.ell1 {
        var1.clone()
    } else {
        covariance_from_census(&census_fast(a.n, a.ell2, a.ell2)?, &a.p)?
    };
    let denom = (rat_to_f64(&var1) * rat_to_f64(&var2)).sqrt();
    let v = json!({
        "n": a.n,
        "ell1": a.ell1,
        "ell2": a.ell2,
        "p": fmt_rat(&a.p),
        "covariance": fmt_rat(&cov),
        "covariance_f64": rat_to_f64(&cov),
        "variance1": fmt_rat(&var1),
        "variance2": fmt_rat(&var2),
        "correlation": if denom > 0.0 { Value::from(rat_to_f64(&cov) / denom) } else { Value::Null },
    });
    emit_report(fmt, out, &v)
}

fn moment_value(m: &StandardizedMoment) -> Value {
    let mut v = json!({
        "value": m.as_f64(),
        "coeffs": m.coeffs.iter().map(|c| fmt_rat(c)).collect::<Vec<_>>(),
    });
    if let Some(exact) = m.as_exact() {
        v.as_object_mut()
            .expect("literal object")
            .insert("exact".into(), Value::from(fmt_rat(exact)));
    }
    v
}

fn cmd_moments(a: MomentsArgs, fmt: Format, out: &Option<PathBuf>) -> Result<()> {
    let budget = a.budget.unwrap_or(DEFAULT_MOMENT_BUDGET);
    let r = exact_joint_moment_with_budget(a.n, a.ell1, a.ell2, &a.p, a.k, &a.u1, &a.u2, budget)?;
    let cov = covariance_from_census(&census_fast(a.n, a.ell1, a.ell2)?, &a.p)?;
    let rho = rat_to_f64(&cov) / (rat_to_f64(&r.total.var1) * rat_to_f64(&r.total.var2)).sqrt();
    let v = json!({
        "n": r.n,
        "ell1": r.ell1,
        "ell2": r.ell2,
        "k": r.k,
        "p": fmt_rat(&a.p),
        "u1": fmt_rat(&r.u1),
        "u2": fmt_rat(&r.u2),
        "variance1": fmt_rat(&r.total.var1),
        "variance2": fmt_rat(&r.total.var2),
        "correlation": rho,
        // coefficients sit in the basis [1, 1/sd1, 1/sd2, 1/(sd1 sd2)]
        "basis": ["1", "1/sd1", "1/sd2", "1/(sd1*sd2)"],
        "total": moment_value(&r.total),
        "dominant": moment_value(&r.dominant),
        "residual": moment_value(&r.residual),
        "gaussian_prediction": dominant_moment(a.k, rat_to_f64(&r.u1), rat_to_f64(&r.u2), rho),
        "matching_tuples": r.matching_tuples,
        "contributing_tuples": r.contributing_tuples,
        "enumerated_multisets": r.enumerated_multisets,
    });
    emit_report(fmt, out, &v)
}

fn cmd_bounds(a: BoundsArgs, fmt: Format, out: &Option<PathBuf>) -> Result<()> {
    let report = bound_report(a.n, a.ell, a.p, a.s)?;
    let v = serde_json::to_value(&report).expect("report serializes");
    emit_report(fmt, out, &v)
}

fn cmd_simulate(a: SimulateArgs, fmt: Format, out: &Option<PathBuf>) -> Result<()> {
    let params = ModelParams::new(a.n, a.p, a.ell1, a.ell2)?;
    let batch = run_experiment(&params, a.replicas, a.seed, a.threads)?;
    match fmt {
        Format::Csv => batch.write_csv(open_out(out)?),
        Format::Json => {
            let m = batch.rows.len() as f64;
            let mean_of = |f: &dyn Fn(&apstats_core::SampleRow) -> f64| {
                if batch.rows.is_empty() {
                    Value::Null
                } else {
                    Value::from(batch.rows.iter().map(|r| f(r)).sum::<f64>() / m)
                }
            };
            let z1: Vec<f64> = batch.rows.iter().map(|r| r.z1).collect();
            let z2: Vec<f64> = batch.rows.iter().map(|r| r.z2).collect();
            let corr = match empirical_correlation(&z1, &z2) {
                Ok(c) => Value::from(c),
                Err(_) => Value::Null,
            };
            let v = json!({
                "n": batch.n,
                "ell1": batch.ell1,
                "ell2": batch.ell2,
                "p": batch.p,
                "seed": batch.seed,
                "replicas": batch.rows.len(),
                "model_mean1": batch.mean1,
                "model_sd1": batch.sd1,
                "model_mean2": batch.mean2,
                "model_sd2": batch.sd2,
                "sample_mean1": mean_of(&|r| r.x1 as f64),
                "sample_mean2": mean_of(&|r| r.x2 as f64),
                "correlation": corr,
            });
            emit_report(fmt, out, &v)
        }
    }
}

fn cmd_oracle(a: OracleArgs, fmt: Format, out: &Option<PathBuf>) -> Result<()> {
    let dist = exact_joint_distribution(a.n, a.ell1, a.ell2, &a.p)?;
    match fmt {
        Format::Csv => dist.write_pmf_csv(open_out(out)?),
        Format::Json => {
            let cov = dist.covariance();
            let var1 = dist.variance(1);
            let var2 = dist.variance(2);
            let denom = (rat_to_f64(&var1) * rat_to_f64(&var2)).sqrt();
            let v = json!({
                "n": dist.n,
                "ell1": dist.ell1,
                "ell2": dist.ell2,
                "p": fmt_rat(&a.p),
                "support": dist.pmf.len(),
                "mean1": fmt_rat(&dist.mean(1)),
                "mean2": fmt_rat(&dist.mean(2)),
                "variance1": fmt_rat(&var1),
                "variance2": fmt_rat(&var2),
                "covariance": fmt_rat(&cov),
                "correlation": if denom > 0.0 { Value::from(rat_to_f64(&cov) / denom) } else { Value::Null },
            });
            emit_report(fmt, out, &v)
        }
    }
}

fn cmd_repro(a: ReproArgs, out: &Option<PathBuf>) -> Result<i32> {
    let reports = match a.criterion {
        Some(id) => vec![run_criterion(id)?],
        None => run_all()?,
    };
    let mut w = open_out(out)?;
    let mut failed = 0;
    for r in &reports {
        writeln!(w, "{}", r.line())?;
        if !r.passed {
            failed += 1;
        }
    }
    writeln!(w, "{} of {} criteria passed", reports.len() - failed, reports.len())?;
    Ok(if failed > 0 { 1 } else { 0 })
}
