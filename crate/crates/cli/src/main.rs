//! `smalldev`: reproduce the headline bounds, emit figure data, evaluate
//! single bounds with certificates, and run the verification harness.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use smalldev::berry::{f1, f1_hat};
use smalldev::combine::{default_d_grid, default_s_grid, feige_bound, figure_data, format_sig, BoundReport, Figure, Variant};
use smalldev::model::M3Mode;
use smalldev::momentsdp::{moment_bound, MomentSet};
use smalldev::oracle::{verify_bounds, verify_moment_formulas, Claim, MomentFormulaReport, VerifyReport};
use smalldev::scalar::floor_decimals;
use smalldev::Error;

const DEFAULT_XI: f64 = 0.2;
const FORMULA_TRIALS: usize = 500;
const FORMULA_TOL: f64 = 1e-10;

#[derive(Parser, Debug)]
#[command(name = "smalldev", version, about = "Certified small-deviation bounds for sums of bounded random variables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the four headline bounds next to the literature baselines.
    Reproduce {
        #[arg(long, default_value_t = DEFAULT_XI)]
        xi: f64,
        /// Write the full reports (curves and certificates) as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also tabulate the bounds over a range of ξ (exploratory).
        #[arg(long)]
        sweep_xi: bool,
    },
    /// Write curve data as CSV.
    Figure {
        #[arg(long, value_enum)]
        which: FigureArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_XI)]
        xi: f64,
    },
    /// Evaluate both sides at one (ξ, D) and export the moment certificate.
    Bound {
        /// Defaults to 0.2 when omitted.
        #[arg(long)]
        xi: Option<f64>,
        #[arg(long)]
        d: f64,
        #[arg(long, value_enum, default_value_t = MomentsArg::M1234)]
        moments: MomentsArg,
        /// Known ratio s = T_B / D in (0, 1]; enables the refined bounds.
        #[arg(long)]
        tb_ratio: Option<f64>,
        /// Certificate JSON path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check every bound against exact probabilities on random instances.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 14, value_parser = clap::value_parser!(u64).range(1..))]
        nmax: u64,
        #[arg(long, default_value_t = DEFAULT_XI)]
        xi: f64,
        /// Report JSON path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FigureArg {
    Fig1,
    Fig2,
    Fig3,
    #[value(name = "figA1", alias = "figa1")]
    FigA1,
    #[value(name = "fig_interplay")]
    FigInterplay,
}

impl From<FigureArg> for Figure {
    fn from(f: FigureArg) -> Self {
        match f {
            FigureArg::Fig1 => Figure::Fig1,
            FigureArg::Fig2 => Figure::Fig2,
            FigureArg::Fig3 => Figure::Fig3,
            FigureArg::FigA1 => Figure::FigA1,
            FigureArg::FigInterplay => Figure::FigInterplay,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MomentsArg {
    #[value(name = "124")]
    M124,
    #[value(name = "1234")]
    M1234,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Violation(String),
    Usage(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Violation(_) => 1,
            Self::Usage(_) => 2,
            Self::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Violation(m) | Self::Usage(m) | Self::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Domain(_) => Self::Usage(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Numerical(format!("cannot write {}: {e}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_failure(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| io_failure(path, e))
}

fn sig(x: f64) -> String {
    format_sig(x, 10)
}

#[derive(Serialize)]
struct Baseline {
    name: &'static str,
    bound: f64,
    method: &'static str,
}

const BASELINES: [Baseline; 3] = [
    Baseline { name: "Feige", bound: 1.0 / 13.0, method: "" },
    Baseline { name: "He", bound: 0.125, method: "approximate MP(1,2,4)" },
    Baseline { name: "Garnett", bound: 0.14, method: "approximate MP(1,2,3,4)" },
];

#[derive(Serialize)]
struct ReproduceOutput {
    xi: f64,
    baselines: [Baseline; 3],
    reports: Vec<BoundReport<f64>>,
}

fn reproduce(xi: f64, out: Option<PathBuf>, sweep_xi: bool) -> Result<(), Failure> {
    let total = Instant::now();
    println!("{:<40} {:>8} {:>14} {:>10}", "method", "bound", "D*", "time");
    for b in &BASELINES {
        let label = if b.method.is_empty() { b.name.to_string() } else { format!("{} ({})", b.name, b.method) };
        println!("{label:<40} {:>8.4} {:>14} {:>10}", b.bound, "-", "-");
    }
    let mut reports = Vec::new();
    for variant in Variant::ALL {
        let start = Instant::now();
        let r = feige_bound(variant, xi)?;
        let flag = if r.no_crossing { " (no crossing)" } else { "" };
        println!(
            "{:<40} {:>8.4} {:>14} {:>9.2?}{flag}",
            variant.description(),
            r.bound_value,
            sig(r.d_star),
            start.elapsed()
        );
        reports.push(r);
    }
    println!("xi = {xi}, total wall time {:.2?}", total.elapsed());
    if sweep_xi {
        println!("\nexploratory xi sweep (not part of the reproduced results)");
        println!("{:>6} {:>8} {:>8} {:>8} {:>8}", "xi", "A.1", "4.2", "4.3", "4.4");
        for i in 0..7 {
            let x = 0.1 + 0.05 * i as f64;
            let values: Vec<String> = Variant::ALL
                .iter()
                .map(|&v| feige_bound(v, x).map(|r| format!("{:>8.4}", r.bound_value)))
                .collect::<Result<_, _>>()?;
            println!("{x:>6.2} {}", values.join(" "));
        }
    }
    if let Some(path) = out {
        write_json(&path, &ReproduceOutput { xi, baselines: BASELINES, reports })?;
        println!("reports written to {}", path.display());
    }
    Ok(())
}

fn figure(which: Figure, out: &Path, xi: f64) -> Result<(), Failure> {
    let grid = if which == Figure::Fig3 { default_s_grid() } else { default_d_grid() };
    let table = figure_data(which, xi, &grid)?;
    std::fs::write(out, table.to_csv()).map_err(|e| io_failure(out, e))?;
    println!("{} rows written to {}", table.rows.len(), out.display());
    Ok(())
}

fn bound(xi: Option<f64>, d: f64, moments: MomentsArg, tb_ratio: Option<f64>, out: Option<PathBuf>) -> Result<(), Failure> {
    let xi = xi.unwrap_or_else(|| {
        println!("note: --xi not given, using the default {DEFAULT_XI}");
        DEFAULT_XI
    });
    let set = match moments {
        MomentsArg::M124 => MomentSet::Mp124,
        MomentsArg::M1234 => MomentSet::Mp1234,
    };
    let mode = tb_ratio.map_or(M3Mode::Basic, |s| M3Mode::Refined { s });
    let m = moment_bound(xi, d, set, mode)?;
    let be = match tb_ratio {
        Some(s) => f1_hat(xi, d, s * d)?,
        None => f1(xi, d)?,
    };
    let moment_side = 1.0 - m.opt_upper;
    let combined = (-xi).exp() * moment_side.min(be);
    println!("xi = {}, D = {}, moments = {:?}", sig(xi), sig(d), set.orders());
    println!("moment-side   {}", sig(moment_side));
    println!("BE-side       {}", sig(be));
    println!("combined      {}  (floor {:.4})", sig(combined), floor_decimals(combined, 4));
    let check = m.certificate.verify(1000, 0);
    if !check.passed() {
        return Err(Failure::Numerical(format!("certificate failed re-verification: {check:?}")));
    }
    match out {
        Some(path) => {
            write_json(&path, &m.certificate)?;
            println!("certificate   {}", path.display());
        }
        None => println!("certificate   verified in memory (pass --out to export)"),
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyOutput {
    seed: u64,
    trials: usize,
    violations: Vec<smalldev::oracle::Violation>,
    max_gap: f64,
    claims: Vec<Claim>,
    bounds: VerifyReport,
    moment_formulas: MomentFormulaReport,
}

fn verify(seed: u64, trials: usize, nmax: usize, xi: f64, out: Option<PathBuf>) -> Result<(), Failure> {
    let claims = Variant::ALL
        .iter()
        .map(|&v| {
            let r = feige_bound(v, xi)?;
            Ok(Claim { name: v.label().to_string(), omega: xi.exp() * r.bound_value })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let report = verify_bounds(seed, trials, nmax, xi, &claims)?;
    let formulas = verify_moment_formulas(seed, FORMULA_TRIALS)?;
    for c in &claims {
        println!("claim {:<8} omega = {}", c.name, sig(c.omega));
    }
    println!(
        "seed {seed}: {} instances, {} violations, max gap {}",
        report.instances_checked,
        report.violations.len(),
        sig(report.max_gap)
    );
    println!(
        "moment formulas: {} instances, max relative error {}, {} bound failures",
        formulas.trials,
        sig(formulas.max_rel_error),
        formulas.bound_failures.len()
    );
    for w in &report.sampling_warnings {
        println!("warning: sampled estimate {} ± {} below {} (n = {})", sig(w.estimate), sig(w.half_width), w.claim, w.n);
    }
    let passed = report.passed() && formulas.passed(FORMULA_TOL);
    let output = VerifyOutput {
        seed,
        trials,
        violations: report.violations.clone(),
        max_gap: report.max_gap,
        claims,
        bounds: report,
        moment_formulas: formulas,
    };
    if let Some(path) = out {
        write_json(&path, &output)?;
        println!("report written to {}", path.display());
    }
    if passed {
        Ok(())
    } else {
        for v in &output.violations {
            eprintln!("violation: {}", serde_json::to_string(v).unwrap_or_default());
        }
        for inst in &output.moment_formulas.bound_failures {
            eprintln!("moment bound failure: {}", serde_json::to_string(inst).unwrap_or_default());
        }
        Err(Failure::Violation("verification found violations".into()))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Reproduce { xi, out, sweep_xi } => reproduce(xi, out, sweep_xi),
        Command::Figure { which, out, xi } => figure(which.into(), &out, xi),
        Command::Bound { xi, d, moments, tb_ratio, out } => bound(xi, d, moments, tb_ratio, out),
        Command::Verify { seed, trials, nmax, xi, out } => verify(seed, trials as usize, nmax as usize, xi, out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
