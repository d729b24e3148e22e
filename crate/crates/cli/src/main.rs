//! The `ofa` binary: expected cost of greedy online facility assignment on
//! regular polygons. Subcommands cover the exact regime, the simulation regime,
//! the sampled cross-check estimator, range sweeps, and the validation
//! suite.

mod report;

use std::path::PathBuf;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use ofa_core::error::Error as CoreError;
use ofa_core::exact_dp::{
    per_arrival_expectations_with_limit, save_table, value_function_with_limit,
    DEFAULT_EXACT_LIMIT,
};
use ofa_core::geometry::PolygonSize;
use ofa_core::montecarlo::{estimate_total, mc_state_dp, Estimate, RNG_ID};
use ofa_core::validation;

use report::{float_repr, Format, Row};

const EXIT_OK: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_VALIDATION: i32 = 2;
const EXIT_RESOURCE: i32 = 3;

#[derive(Parser)]
#[command(
    name = "ofa",
    version,
    about = "Expected cost of greedy online facility assignment on a regular n-gon",
    long_about = "Computes the expected total cost of assigning uniform random edge arrivals \
                  to the nearest free vertex facility: exactly (symmetry-reduced backward \
                  induction) for small n, by seeded Monte Carlo simulation for large n."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads for parallel sections (0 = library default).
    /// Numeric results are identical for every thread count.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Emit a machine-readable report in this format (csv or json).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the machine-readable report to this path; defaults the format
    /// to csv and keeps the human summary on stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact expected-cost table for one polygon size
    Exact {
        /// Polygon size (number of vertices / edges)
        #[arg(long)]
        n: usize,
        /// Largest n accepted by the exact regime
        #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
        exact_limit: usize,
        /// Persist the per-orbit value table (CSV: mask,popcount,value) here
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the expected total cost
    Simulate {
        #[arg(long)]
        n: usize,
        /// Number of independent runs
        #[arg(long, default_value_t = 20_000)]
        runs: usize,
        /// Base seed; run r uses stream r of this seed
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Sampled full-state backward induction (independent cross-check)
    Mcdp {
        #[arg(long)]
        n: usize,
        /// Random (edge, position) samples per state
        #[arg(long, default_value_t = 5_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// One row per n over a range: exact up to the limit, simulation beyond
    Sweep {
        #[arg(long)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        /// Runs per simulated size
        #[arg(long, default_value_t = 10_000)]
        runs: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Sizes up to this use the exact regime (0 forces simulation)
        #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
        exact_limit: usize,
    },
    /// Run the validation suite; exit 2 if any check fails
    Validate {
        #[arg(long, default_value_t = validation::DEFAULT_SEED)]
        seed: u64,
        /// Skip the large-n simulation checks
        #[arg(long)]
        fast: bool,
    },
}

/// Where reports go. Machine output replaces the human summary on stdout
/// unless `--out` redirects it to a file.
struct Sink {
    format: Option<Format>,
    out: Option<PathBuf>,
}

impl Sink {
    fn human(&self) -> bool {
        self.format.is_none() || self.out.is_some()
    }

    fn effective_format(&self) -> Option<Format> {
        match (self.format, &self.out) {
            (Some(f), _) => Some(f),
            (None, Some(_)) => Some(Format::Csv),
            (None, None) => None,
        }
    }

    fn emit(&self, rows: &[Row]) -> anyhow::Result<()> {
        let Some(format) = self.effective_format() else {
            return Ok(());
        };
        let text = report::render(rows, format);
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return EXIT_OK;
            }
            eprint!("{err}");
            return EXIT_USAGE;
        }
    };

    if cli.threads > 0 {
        // Ignore the error if a global pool already exists (e.g. in tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }

    let sink = Sink {
        format: cli.format,
        out: cli.out,
    };

    let result = match cli.command {
        Command::Exact {
            n,
            exact_limit,
            table,
        } => cmd_exact(n, exact_limit, table.as_deref(), &sink),
        Command::Simulate { n, runs, seed } => cmd_simulate(n, runs, seed, &sink),
        Command::Mcdp { n, samples, seed } => cmd_mcdp(n, samples, seed, &sink),
        Command::Sweep {
            n_min,
            n_max,
            runs,
            seed,
            exact_limit,
        } => cmd_sweep(n_min, n_max, runs, seed, exact_limit, &sink),
        Command::Validate { seed, fast } => cmd_validate(seed, fast, &sink),
    };

    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            match err.downcast_ref::<CoreError>() {
                Some(CoreError::ExactLimitExceeded { n, .. }) => {
                    eprintln!("hint: `ofa simulate --n {n}` handles this size in the Monte Carlo regime");
                    EXIT_RESOURCE
                }
                Some(CoreError::StateSpaceTooLarge { .. }) => EXIT_RESOURCE,
                _ => EXIT_USAGE,
            }
        }
    }
}

fn cmd_exact(
    n: usize,
    exact_limit: usize,
    table_path: Option<&std::path::Path>,
    sink: &Sink,
) -> anyhow::Result<i32> {
    let ps = PolygonSize::new(n)?;
    let start = Instant::now();
    let table = value_function_with_limit(ps, exact_limit)?;
    let per_arrival = per_arrival_expectations_with_limit(ps, exact_limit)?;
    let elapsed = start.elapsed().as_secs_f64();
    let v_empty = table.expected_total();

    if sink.human() {
        println!("n = {n}  (exact regime, limit {exact_limit})");
        println!("orbits (canonical states): {}", table.len());
        println!("V(empty) = {}", float_repr(v_empty));
        println!("per-customer average = {}", float_repr(v_empty / n as f64));
        println!("per-arrival expected costs:");
        for (k, cost) in per_arrival.iter().enumerate() {
            println!("  arrival {:>3}: {}", k + 1, float_repr(*cost));
        }
        let drift = (per_arrival.iter().sum::<f64>() - v_empty).abs();
        println!("per-arrival sum drift: {drift:.3e}");
        println!("elapsed: {elapsed:.3} s");
    }

    if let Some(path) = table_path {
        save_table(&table, path)?;
        if sink.human() {
            println!("value table written to {}", path.display());
        }
    }

    let joined = per_arrival
        .iter()
        .map(|c| float_repr(*c))
        .collect::<Vec<_>>()
        .join(";");
    let row = Row::new()
        .str("command", "exact")
        .str("version", version())
        .uint("n", n as u128)
        .uint("exact_limit", exact_limit as u128)
        .uint("orbits", table.len() as u128)
        .float("v_empty", v_empty)
        .float("mean_per_customer", v_empty / n as f64)
        .str("per_arrival", joined);
    sink.emit(&[row])?;
    Ok(EXIT_OK)
}

fn simulate_row(n: usize, runs: usize, seed: u64, est: &Estimate, per_customer: &Estimate) -> Row {
    Row::new()
        .str("command", "simulate")
        .str("version", version())
        .str("rng", RNG_ID)
        .uint("n", n as u128)
        .uint("runs", runs as u128)
        .uint("seed", seed as u128)
        .float("mean_total", est.mean)
        .float("std_total", est.std)
        .float("ci_low", est.ci_low)
        .float("ci_high", est.ci_high)
        .float("mean_per_customer", per_customer.mean)
        .float("per_customer_ci_low", per_customer.ci_low)
        .float("per_customer_ci_high", per_customer.ci_high)
}

fn print_estimate(n: usize, runs: usize, seed: u64, est: &Estimate, per_customer: &Estimate) {
    println!("n = {n}, runs = {runs}, seed = {seed}, rng = {RNG_ID}");
    println!("mean total        = {}", float_repr(est.mean));
    println!("sample std        = {}", float_repr(est.std));
    println!(
        "95% CI            = [{}, {}]",
        float_repr(est.ci_low),
        float_repr(est.ci_high)
    );
    println!("per-customer mean = {}", float_repr(per_customer.mean));
    println!(
        "per-customer CI   = [{}, {}]",
        float_repr(per_customer.ci_low),
        float_repr(per_customer.ci_high)
    );
}

fn cmd_simulate(n: usize, runs: usize, seed: u64, sink: &Sink) -> anyhow::Result<i32> {
    let ps = PolygonSize::new(n)?;
    let start = Instant::now();
    let est = estimate_total(ps, runs, seed)?;
    let elapsed = start.elapsed().as_secs_f64();
    let per_customer = est.scaled(1.0 / n as f64);

    if sink.human() {
        print_estimate(n, runs, seed, &est, &per_customer);
        println!("elapsed: {elapsed:.3} s");
    }
    sink.emit(&[simulate_row(n, runs, seed, &est, &per_customer)])?;
    Ok(EXIT_OK)
}

fn cmd_mcdp(n: usize, samples: usize, seed: u64, sink: &Sink) -> anyhow::Result<i32> {
    let ps = PolygonSize::new(n)?;
    let start = Instant::now();
    let table = mc_state_dp(ps, samples, seed)?;
    let elapsed = start.elapsed().as_secs_f64();
    let v_empty = table.at_empty();

    if sink.human() {
        println!("n = {n}, samples per state = {samples}, seed = {seed}, rng = {RNG_ID}");
        println!("states sampled: 2^{n} = {}", 1u128 << n);
        println!("estimated V(empty) = {}", float_repr(v_empty));
        println!("elapsed: {elapsed:.3} s");
    }

    let row = Row::new()
        .str("command", "mcdp")
        .str("version", version())
        .str("rng", RNG_ID)
        .uint("n", n as u128)
        .uint("samples", samples as u128)
        .uint("seed", seed as u128)
        .float("v_empty", v_empty);
    sink.emit(&[row])?;
    Ok(EXIT_OK)
}

fn cmd_sweep(
    n_min: usize,
    n_max: usize,
    runs: usize,
    seed: u64,
    exact_limit: usize,
    sink: &Sink,
) -> anyhow::Result<i32> {
    anyhow::ensure!(n_min <= n_max, "--n-min must not exceed --n-max");
    let mut rows = Vec::with_capacity(n_max - n_min + 1);
    let mut per_customer_series = Vec::new();

    if sink.human() {
        println!(
            "{:>4} {:>9} {:>22} {:>46} {:>22}",
            "n", "mode", "mean total", "95% CI (total)", "per customer"
        );
    }

    for n in n_min..=n_max {
        let ps = PolygonSize::new(n)?;
        let base = Row::new()
            .str("command", "sweep")
            .str("version", version())
            .uint("n", n as u128);
        if n <= exact_limit {
            let total = value_function_with_limit(ps, exact_limit)?.expected_total();
            let per_customer = total / n as f64;
            per_customer_series.push(per_customer);
            if sink.human() {
                println!(
                    "{n:>4} {:>9} {:>22} {:>46} {:>22}",
                    "exact",
                    float_repr(total),
                    "-",
                    float_repr(per_customer)
                );
            }
            rows.push(
                base.str("mode", "exact")
                    .empty("runs")
                    .empty("seed")
                    .empty("rng")
                    .float("mean_total", total)
                    .empty("std_total")
                    .empty("ci_low")
                    .empty("ci_high")
                    .float("mean_per_customer", per_customer)
                    .empty("per_customer_ci_low")
                    .empty("per_customer_ci_high"),
            );
        } else {
            let est = estimate_total(ps, runs, seed)?;
            let per_customer = est.scaled(1.0 / n as f64);
            per_customer_series.push(per_customer.mean);
            if sink.human() {
                println!(
                    "{n:>4} {:>9} {:>22} [{}, {}] {:>22}",
                    "simulate",
                    float_repr(est.mean),
                    float_repr(est.ci_low),
                    float_repr(est.ci_high),
                    float_repr(per_customer.mean)
                );
            }
            rows.push(
                base.str("mode", "simulate")
                    .uint("runs", runs as u128)
                    .uint("seed", seed as u128)
                    .str("rng", RNG_ID)
                    .float("mean_total", est.mean)
                    .float("std_total", est.std)
                    .float("ci_low", est.ci_low)
                    .float("ci_high", est.ci_high)
                    .float("mean_per_customer", per_customer.mean)
                    .float("per_customer_ci_low", per_customer.ci_low)
                    .float("per_customer_ci_high", per_customer.ci_high),
            );
        }
    }

    if sink.human() {
        let nondecreasing = per_customer_series.windows(2).all(|w| w[0] <= w[1]);
        println!(
            "per-customer cost nondecreasing across the sweep: {}",
            if nondecreasing { "yes" } else { "no" }
        );
    }
    sink.emit(&rows)?;
    Ok(EXIT_OK)
}

fn cmd_validate(seed: u64, fast: bool, sink: &Sink) -> anyhow::Result<i32> {
    let outcomes = validation::run_all(seed, fast);
    let mut rows = Vec::with_capacity(outcomes.len());
    let mut failures = 0usize;
    for outcome in &outcomes {
        if !outcome.passed {
            failures += 1;
        }
        if sink.human() {
            println!(
                "{} {}: expected {}; observed {}; tolerance {}",
                outcome.status(),
                outcome.name,
                outcome.expected,
                outcome.observed,
                outcome.tolerance
            );
        }
        rows.push(
            Row::new()
                .str("command", "validate")
                .str("version", version())
                .uint("seed", seed as u128)
                .bool("fast", fast)
                .str("check", outcome.name.clone())
                .str("expected", outcome.expected.clone())
                .str("observed", outcome.observed.clone())
                .str("tolerance", outcome.tolerance.clone())
                .bool("passed", outcome.passed),
        );
    }
    if sink.human() {
        println!("{} checks run, {failures} failed", outcomes.len());
    }
    sink.emit(&rows)?;
    Ok(if failures == 0 { EXIT_OK } else { EXIT_VALIDATION })
}
