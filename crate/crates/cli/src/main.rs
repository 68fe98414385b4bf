//! `gue-edge`: tabulate and cross-check the largest-eigenvalue law of GUE_n.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gue_edge::airy_ops::{self, Discretization, F2Method, F2_LEFT_LIMIT};
use gue_edge::edgeworth::EdgeworthTerms;
use gue_edge::fit::loglog_slope;
use gue_edge::gue_mc::{self, SamplerConfig};
use gue_edge::hermite_n::{self, ScalingMap, FINITE_LEFT_LIMIT};
use gue_edge::quad::MAX_GAUSS_NODES;
use gue_edge::verify::{self, VerifyConfig};

use table::{Cell, Table};

const DEFAULT_M: usize = 100;
const DEFAULT_T: f64 = 40.0;
const DEFAULT_C: f64 = 0.0;
const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "gue-edge", version, about)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Discretize {
    /// Nyström nodes.
    #[arg(long, default_value_t = DEFAULT_M)]
    m: usize,
    /// Truncation length in scaled units.
    #[arg(long = "t-len", default_value_t = DEFAULT_T)]
    t_len: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tracy–Widom F2 by determinant and by the Painlevé II integral.
    TwTable {
        /// Comma-separated s values.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        s: Vec<f64>,
        #[command(flatten)]
        disc: Discretize,
    },
    /// Finite-n CDF against the expansion through orders 0, 1, 2.
    Edgeworth {
        /// Comma-separated matrix sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Comma-separated scaled thresholds.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        s: Vec<f64>,
        /// Fine-tuning constant in the centering √(2(n+c)).
        #[arg(long, default_value_t = DEFAULT_C, allow_hyphen_values = true)]
        c: f64,
    },
    /// Run the self-checks; exit status 1 if any fails.
    Verify {
        /// Override every tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Run only this check.
        #[arg(long)]
        check: Option<String>,
        /// List check names and exit.
        #[arg(long)]
        list: bool,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Monte Carlo sample count.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Monte Carlo empirical CDF of λ_max against the Fredholm determinant.
    Mc {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Comma-separated unscaled thresholds; default is 20 points spanning
        /// s in [-3.5, 1.5].
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        t: Vec<f64>,
    },
}

/// A failure that maps to exit status 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let regime = e.downcast_ref::<UsageError>().is_some()
                || e.downcast_ref::<gue_edge::Error>().is_some_and(|g| {
                    matches!(
                        g,
                        gue_edge::Error::OutOfRegime { .. }
                            | gue_edge::Error::InvalidArgument { .. }
                    )
                });
            ExitCode::from(if regime { 2 } else { 1 })
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let (table, ok) = match &cli.command {
        Command::TwTable { s, disc } => (tw_table(s, disc)?, true),
        Command::Edgeworth { n, s, c } => (edgeworth(n, s, *c)?, true),
        Command::Verify { list: true, .. } => {
            for name in verify::check_names() {
                println!("{name}");
            }
            return Ok(true);
        }
        Command::Verify {
            tolerance,
            check,
            seed,
            samples,
            ..
        } => verify_table(*tolerance, check.as_deref(), *seed, *samples)?,
        Command::Mc {
            n,
            samples,
            seed,
            t,
        } => (mc(*n, *samples, *seed, t)?, true),
    };
    emit(cli, &table)?;
    Ok(ok)
}

fn emit(cli: &Cli, table: &Table) -> anyhow::Result<()> {
    let mut out: Box<dyn Write> = match &cli.output {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match cli.format {
        Format::Csv => table.write_csv(&mut out)?,
        Format::Json => table.write_json(&mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn provenance(table: &mut Table) {
    table.meta("default_m", DEFAULT_M.to_string());
    table.meta("default_T", DEFAULT_T.to_string());
    table.meta("default_c", DEFAULT_C.to_string());
    table.meta("default_seed", DEFAULT_SEED.to_string());
}

fn check_disc(disc: &Discretize) -> anyhow::Result<Discretization> {
    if !(2..=MAX_GAUSS_NODES).contains(&disc.m) {
        bail!(usage(format!(
            "--m {} not in 2..={MAX_GAUSS_NODES}",
            disc.m
        )));
    }
    if !(disc.t_len > 0.0 && disc.t_len.is_finite()) {
        bail!(usage(format!("--t-len {} must be positive", disc.t_len)));
    }
    Ok(Discretization {
        m: disc.m,
        t_len: disc.t_len,
    })
}

fn check_s(s: &[f64], limit: f64) -> anyhow::Result<()> {
    if s.is_empty() {
        bail!(usage("s grid is empty"));
    }
    if let Some(bad) = s.iter().find(|v| !(**v >= limit) || !v.is_finite()) {
        bail!(usage(format!(
            "s = {bad} is outside the supported regime (s >= {limit})"
        )));
    }
    Ok(())
}

fn tw_table(s: &[f64], disc: &Discretize) -> anyhow::Result<Table> {
    let d = check_disc(disc)?;
    check_s(s, F2_LEFT_LIMIT)?;
    let mut t = Table::new("tw-table", &["s", "F2_det", "F2_qint", "q", "u0", "v0"]);
    provenance(&mut t);
    t.meta("m", d.m.to_string());
    t.meta("T", d.t_len.to_string());
    for &sv in s {
        let r = airy_ops::build_resolvent(sv, d)?;
        let f = r.functionals();
        let qint = airy_ops::f2_cdf_with(sv, F2Method::QIntegral, d)?;
        t.row(vec![
            Cell::F(sv),
            Cell::F(r.det()),
            Cell::F(qint),
            Cell::F(f.q[0]),
            Cell::F(f.u[0]),
            Cell::F(f.v[0]),
        ]);
    }
    Ok(t)
}

fn edgeworth(ns: &[usize], ss: &[f64], c: f64) -> anyhow::Result<Table> {
    if ns.is_empty() {
        bail!(usage("n list is empty"));
    }
    for &n in ns {
        ScalingMap::new(n, c).map_err(|e| usage(e.to_string()))?;
    }
    check_s(ss, FINITE_LEFT_LIMIT)?;
    let mut t = Table::new(
        "edgeworth",
        &[
            "n",
            "c",
            "s",
            "F_exact",
            "F_order0",
            "F_order1",
            "F_order2",
            "res_order0",
            "res_order1",
            "res_order2",
        ],
    );
    provenance(&mut t);
    t.meta("c", c.to_string());
    for &s in ss {
        let terms = EdgeworthTerms::new(s, c)?;
        let mut res: Vec<[f64; 3]> = Vec::new();
        for &n in ns {
            let exact = hermite_n::cdf_fredholm(n, ScalingMap::new(n, c)?.tau(s))?;
            let a = [
                terms.assembled(n, 0)?,
                terms.assembled(n, 1)?,
                terms.assembled(n, 2)?,
            ];
            let r = [
                (exact - a[0]).abs(),
                (exact - a[1]).abs(),
                (exact - a[2]).abs(),
            ];
            res.push(r);
            t.row(vec![
                Cell::I(n as i64),
                Cell::F(c),
                Cell::F(s),
                Cell::F(exact),
                Cell::F(a[0]),
                Cell::F(a[1]),
                Cell::F(a[2]),
                Cell::F(r[0]),
                Cell::F(r[1]),
                Cell::F(r[2]),
            ]);
        }
        if ns.len() >= 2 {
            let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
            for k in 0..3 {
                let y: Vec<f64> = res.iter().map(|r| r[k]).collect();
                let slope = loglog_slope(&x, &y).unwrap_or(f64::NAN);
                t.summary(format!("slope_order{k}_s{s}"), slope);
            }
        }
    }
    Ok(t)
}

fn verify_table(
    tolerance: Option<f64>,
    check: Option<&str>,
    seed: u64,
    samples: usize,
) -> anyhow::Result<(Table, bool)> {
    if let Some(tol) = tolerance {
        if !(tol > 0.0) {
            bail!(usage(format!("--tolerance {tol} must be positive")));
        }
    }
    if samples < gue_mc::MIN_DRAWS {
        bail!(usage(format!(
            "--samples must be at least {}",
            gue_mc::MIN_DRAWS
        )));
    }
    if let Some(name) = check {
        if !verify::check_names().contains(&name) {
            bail!(usage(format!("unknown check `{name}` (see --list)")));
        }
    }
    let cfg = VerifyConfig {
        tolerance,
        seed,
        mc_samples: samples,
    };
    let results = verify::run(&cfg, check)?;
    let mut t = Table::new(
        "verify",
        &[
            "check",
            "passed",
            "measured",
            "target",
            "tolerance",
            "detail",
        ],
    );
    provenance(&mut t);
    t.meta("seed", seed.to_string());
    t.meta("samples", samples.to_string());
    let mut all = true;
    for r in &results {
        all &= r.passed;
        eprintln!(
            "{} {:<26} {:.3e} ({:.2}s)",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.measured,
            r.seconds
        );
        t.row(vec![
            Cell::S(r.name.to_string()),
            Cell::B(r.passed),
            Cell::F(r.measured),
            r.target.map_or(Cell::Empty, Cell::F),
            Cell::F(r.tolerance),
            Cell::S(r.detail.clone()),
        ]);
    }
    t.summary("all_passed".into(), if all { 1.0 } else { 0.0 });
    Ok((t, all))
}

fn mc(n: usize, samples: usize, seed: u64, ts: &[f64]) -> anyhow::Result<Table> {
    ScalingMap::new(n, 0.0).map_err(|e| usage(e.to_string()))?;
    if samples < gue_mc::MIN_DRAWS {
        bail!(usage(format!(
            "--samples must be at least {}",
            gue_mc::MIN_DRAWS
        )));
    }
    if let Some(bad) = ts.iter().find(|v| !v.is_finite()) {
        bail!(usage(format!("t = {bad} is not finite")));
    }
    let grid = if ts.is_empty() {
        verify::mc_grid(n)?
    } else {
        ts.to_vec()
    };
    let draws = gue_mc::sample_lambda_max(&SamplerConfig::raw(n, samples, seed))?;
    let mut t = Table::new(
        "mc",
        &["t", "empirical", "halfwidth", "fredholm", "inside_CI"],
    );
    provenance(&mut t);
    t.meta("n", n.to_string());
    t.meta("samples", samples.to_string());
    t.meta("seed", seed.to_string());
    for &x in &grid {
        let (e, h) = gue_mc::empirical_cdf(&draws, x)?;
        let f = hermite_n::cdf_fredholm(n, x)?;
        t.row(vec![
            Cell::F(x),
            Cell::F(e),
            Cell::F(h),
            Cell::F(f),
            Cell::B((e - f).abs() <= h),
        ]);
    }
    Ok(t)
}
