//! Command-line front end: certified contraction checks, identity
//! cross-verification, criterion scans, and the built-in selftest.
//!
//! Exit codes: 0 success, 2 verification failure (identity disagreement,
//! theorem-side mismatch, engine fault, failed selftest), 64 usage or input
//! errors, 65 precision exhaustion, 70 internal errors.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use padic::criterion::{self, CriterionReport};
use padic::error::Error;
use padic::gen;
use padic::identities::{run_identity_suite, IdentitySuite};
use padic::matfile::MatrixFile;
use padic::oracle;
use padic::selftest::{run_selftest, SelftestConfig, SelftestReport};
use padic::valuation::Val;
use padic::{PadicContext, PadicMatrix};
use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_VERIFICATION: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_PRECISION: u8 = 65;
const EXIT_INTERNAL: u8 = 70;

#[derive(Parser)]
#[command(
    name = "padic",
    version,
    about = "Certified p-adic resolvent contraction checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check both directions of the contraction criterion on one matrix.
    Check(CheckArgs),
    /// Cross-verify the operator identities behind the criterion.
    VerifyIdentities(IdentityArgs),
    /// Tabulate the criterion over the (k, v(mu)) grid, in parallel.
    Scan(ScanArgs),
    /// Run the built-in diagnostic battery.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct SourceArgs {
    /// Matrix file (JSON with exact rational entries). Omitted: generate a
    /// seeded random matrix in the unit ball instead.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Prime for generated matrices.
    #[arg(long, default_value_t = 5, conflicts_with = "matrix")]
    prime: u64,
    /// Dimension for generated matrices.
    #[arg(long, default_value_t = 2, conflicts_with = "matrix")]
    dim: usize,
    /// Seed for generated matrices.
    #[arg(long, default_value_t = 0, conflicts_with = "matrix")]
    seed: u64,
    /// Working precision in base-p digits (default: target + 32).
    #[arg(long)]
    precision: Option<u32>,
}

#[derive(Args)]
struct OutputArgs {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Largest k for the (R - I)^k side.
    #[arg(long, default_value_t = 12)]
    kmax: u64,
    /// Largest power of A checked directly on the other side.
    #[arg(long, default_value_t = 24)]
    mmax: u64,
    /// Inclusive v(mu) range "lo..hi" (default: admissible radius, spanning
    /// 6 valuations).
    #[arg(long, value_parser = parse_range)]
    mu_valuations: Option<(i64, i64)>,
    /// Certified error exponent for series evaluations
    /// (default: 2 * kmax * hi + 8).
    #[arg(long)]
    target: Option<i64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct IdentityArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Largest derivative order / chain depth.
    #[arg(long, default_value_t = 8)]
    mmax: u64,
    /// Largest k for the S_k family.
    #[arg(long, default_value_t = 8)]
    kmax: u64,
    /// Inclusive v(mu) range "lo..hi" (default: admissible radius, spanning
    /// 2 valuations).
    #[arg(long, value_parser = parse_range)]
    mu_valuations: Option<(i64, i64)>,
    /// Certified error exponent (default: 2 * (max(kmax, mmax) + 1) * hi + 8).
    #[arg(long)]
    target: Option<i64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Largest k for the (R - I)^k side.
    #[arg(long, default_value_t = 12)]
    kmax: u64,
    /// Inclusive v(mu) range "lo..hi" (default: admissible radius, spanning
    /// 6 valuations).
    #[arg(long, value_parser = parse_range)]
    mu_valuations: Option<(i64, i64)>,
    /// Certified error exponent (default: 2 * kmax * hi + 8).
    #[arg(long)]
    target: Option<i64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SelftestArgs {
    /// Seed for the randomized sections.
    #[arg(long, default_value_t = SelftestConfig::default().seed)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let parse_one = |t: &str| {
        t.trim()
            .parse::<i64>()
            .map_err(|_| format!("{t:?} is not an integer"))
    };
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (parse_one(lo)?, parse_one(hi)?),
        None => {
            let v = parse_one(s)?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

/// A matrix resolved from either a file or the seeded generator.
struct Resolved {
    id: String,
    prime: u64,
    ctx: PadicContext,
    matrix: PadicMatrix,
}

fn resolve_source(
    source: &SourceArgs,
    span: i64,
    mu_valuations: Option<(i64, i64)>,
    target_flag: Option<i64>,
    target_of_hi: impl Fn(i64) -> i64,
) -> Result<(Resolved, Vec<i64>, i64), Error> {
    let (id, prime, rational) = match &source.matrix {
        Some(path) => {
            let mf = MatrixFile::load(path)?;
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "matrix".to_string());
            (id, mf.prime, mf.to_rational()?)
        }
        None => {
            let mut rng = gen::rng_from_seed(source.seed);
            let rm = gen::random_contractive_rational(&mut rng, source.prime, source.dim);
            let id = format!("gen-p{}-d{}-s{}", source.prime, source.dim, source.seed);
            (id, source.prime, rm)
        }
    };

    let s = match rational.min_valuation(prime) {
        Val::Finite(v) => -v,
        Val::Infinity => 0,
    };
    let required = (s + 1).max(1);
    let (lo, hi) = mu_valuations.unwrap_or((required, required + span));
    if lo < required {
        return Err(Error::InadmissibleMu {
            required,
            got: Val::Finite(lo),
        });
    }
    let grid: Vec<i64> = (lo..=hi).collect();
    let target = target_flag.unwrap_or_else(|| target_of_hi(hi));
    if target < 1 {
        return Err(Error::InvalidPrecision);
    }
    let precision = source.precision.unwrap_or((target + 32) as u32);
    let ctx = PadicContext::new(prime, precision)?;
    let matrix = oracle::to_padic(&rational, &ctx)?;
    Ok((
        Resolved {
            id,
            prime,
            ctx,
            matrix,
        },
        grid,
        target,
    ))
}

fn emit(output: &OutputArgs, text: &str) -> Result<(), Error> {
    match &output.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn csv_quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn criterion_csv(report: &CriterionReport) -> String {
    let mut s = String::from("k,v_mu,lhs_exponent,rhs_exponent,pass\n");
    for r in &report.records {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.k, r.mu_valuation, r.lhs_exponent, r.rhs_exponent, r.pass
        ));
    }
    s
}

fn run_check(args: &CheckArgs) -> Result<u8, Error> {
    let (resolved, grid, target) = resolve_source(
        &args.source,
        5,
        args.mu_valuations,
        args.target,
        |hi| 2 * args.kmax as i64 * hi + 8,
    )?;
    let check = criterion::check_theorem(
        &resolved.matrix,
        &resolved.id,
        &grid,
        args.kmax,
        args.mmax,
        target,
    )?;
    let text = match args.output.format {
        Format::Json => to_json(&check),
        Format::Csv => criterion_csv(&check.criterion),
    };
    emit(&args.output, &text)?;
    Ok(if check.agreement {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    })
}

#[derive(Serialize)]
struct IdentityRun {
    mu_valuation: i64,
    suite: IdentitySuite,
}

#[derive(Serialize)]
struct IdentityReport {
    matrix_id: String,
    prime: u64,
    dim: usize,
    fault_injected: bool,
    runs: Vec<IdentityRun>,
    all_agree: bool,
}

fn fault_injection_requested() -> bool {
    std::env::var("PADIC_FAULT_INJECT").is_ok_and(|v| !v.is_empty() && v != "0")
}

fn run_verify_identities(args: &IdentityArgs) -> Result<u8, Error> {
    let depth = args.kmax.max(args.mmax) as i64;
    let (resolved, grid, target) = resolve_source(
        &args.source,
        1,
        args.mu_valuations,
        args.target,
        |hi| 2 * (depth + 1) * hi + 8,
    )?;
    let inject = fault_injection_requested();
    let mut runs = Vec::with_capacity(grid.len());
    for (i, &v) in grid.iter().enumerate() {
        let mu = padic::PadicScalar::p_power(&resolved.ctx, v);
        // Inject into the first run only: one corrupted comparison is
        // enough to prove the detector wakes up.
        let suite = run_identity_suite(
            &resolved.matrix,
            &mu,
            args.mmax,
            args.kmax,
            target,
            inject && i == 0,
        )?;
        runs.push(IdentityRun {
            mu_valuation: v,
            suite,
        });
    }
    let all_agree = runs.iter().all(|r| r.suite.all_agree());
    let report = IdentityReport {
        matrix_id: resolved.id.clone(),
        prime: resolved.prime,
        dim: resolved.matrix.dim(),
        fault_injected: inject,
        runs,
        all_agree,
    };
    let text = match args.output.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut s = String::from("v_mu,name,certificate,observed,outcome\n");
            for run in &report.runs {
                for row in &run.suite.rows {
                    s.push_str(&format!(
                        "{},{},{},{},{:?}\n",
                        run.mu_valuation,
                        csv_quote(&row.name),
                        row.certificate,
                        row.observed,
                        row.outcome
                    ));
                }
            }
            s
        }
    };
    emit(&args.output, &text)?;
    Ok(if all_agree { EXIT_OK } else { EXIT_VERIFICATION })
}

fn run_scan(args: &ScanArgs) -> Result<u8, Error> {
    let (resolved, grid, target) = resolve_source(
        &args.source,
        5,
        args.mu_valuations,
        args.target,
        |hi| 2 * args.kmax as i64 * hi + 8,
    )?;
    criterion::validate_grid(&resolved.matrix, &grid)?;
    let cells: Vec<(u64, i64)> = (1..=args.kmax)
        .flat_map(|k| grid.iter().map(move |&v| (k, v)))
        .collect();
    // Independent engines per cell keep the arithmetic identical to the
    // serial path, so parallelism cannot change a single byte of output.
    let records = cells
        .par_iter()
        .map(|&(k, v)| criterion::compute_record(&resolved.matrix, k, v, target))
        .collect::<Result<Vec<_>, Error>>()?;
    let report = criterion::assemble_report(&resolved.matrix, &resolved.id, records, target);
    let text = match args.output.format {
        Format::Json => to_json(&report),
        Format::Csv => criterion_csv(&report),
    };
    emit(&args.output, &text)?;
    Ok(EXIT_OK)
}

fn selftest_csv(report: &SelftestReport) -> String {
    let mut s = String::from("name,checks,passed,detail\n");
    for section in &report.sections {
        s.push_str(&format!(
            "{},{},{},{}\n",
            section.name,
            section.checks,
            section.passed,
            csv_quote(&section.detail)
        ));
    }
    s
}

fn run_selftest_cmd(args: &SelftestArgs) -> Result<u8, Error> {
    let report = run_selftest(&SelftestConfig { seed: args.seed })?;
    let text = match args.output.format {
        Format::Json => to_json(&report),
        Format::Csv => selftest_csv(&report),
    };
    emit(&args.output, &text)?;
    Ok(if report.passed {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    })
}

fn classify(e: &Error) -> u8 {
    match e {
        Error::NotPrime(_)
        | Error::InvalidPrecision
        | Error::ZeroDenominator
        | Error::DimensionMismatch(_, _)
        | Error::ContextMismatch { .. }
        | Error::InadmissibleMu { .. }
        | Error::MatrixFile(_)
        | Error::Io(_) => EXIT_USAGE,
        Error::Precision { .. } | Error::Undecidable(_) | Error::UncertifiedDivisor => {
            EXIT_PRECISION
        }
        Error::EngineFault(_) => EXIT_VERIFICATION,
        _ => EXIT_INTERNAL,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Check(args) => run_check(args),
        Command::VerifyIdentities(args) => run_verify_identities(args),
        Command::Scan(args) => run_scan(args),
        Command::Selftest(args) => run_selftest_cmd(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(classify(&e))
        }
    }
}
