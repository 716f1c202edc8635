use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{ArgGroup, Parser, ValueEnum};

use iluk::bench::{emit_report, run_bench, BenchPlan, MatrixSource, OutputFormat};
use iluk::{RhsMode, SolverConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Rhs {
    /// b = A * ones
    Ones,
    /// uniform in [-1, 1), seeded by --seed
    Random,
}

/// Sweep block sizes, fill levels and thread counts of block ILU(k)
/// preconditioned GMRES over one matrix.
#[derive(Debug, Parser)]
#[command(name = "iluk-bench", version, about)]
#[command(group(ArgGroup::new("matrix").required(true).args(["poisson", "mtx"])))]
struct Args {
    /// 7-point Poisson matrix on an NX x NY x NZ grid
    #[arg(long, num_args = 3, value_names = ["NX", "NY", "NZ"])]
    poisson: Option<Vec<usize>>,

    /// Matrix Market coordinate file
    #[arg(long, value_name = "PATH")]
    mtx: Option<PathBuf>,

    #[arg(long, value_delimiter = ',', default_value = "1")]
    block_sizes: Vec<usize>,

    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
    k_levels: Vec<usize>,

    #[arg(long, value_delimiter = ',', default_value = "1")]
    threads: Vec<usize>,

    /// GMRES restart length
    #[arg(long, default_value_t = 20)]
    restart: usize,

    /// Relative residual tolerance
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,

    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,

    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = Rhs::Ones)]
    rhs: Rhs,
}

impl Args {
    fn plan(self) -> Result<BenchPlan> {
        let source = match (self.poisson, self.mtx) {
            (Some(d), None) => MatrixSource::Poisson {
                nx: d[0],
                ny: d[1],
                nz: d[2],
            },
            (None, Some(p)) => MatrixSource::MatrixMarket(p),
            _ => unreachable!("clap enforces exactly one matrix source"),
        };
        anyhow::ensure!(self.restart >= 1, "--restart must be at least 1");
        anyhow::ensure!(self.tol > 0.0, "--tol must be positive");
        anyhow::ensure!(
            self.block_sizes.iter().all(|&b| b > 0),
            "block sizes must be positive"
        );
        Ok(BenchPlan {
            source,
            block_sizes: self.block_sizes,
            k_levels: self.k_levels,
            threads: self.threads,
            solver: SolverConfig {
                restart: self.restart,
                max_iters: self.max_iters,
                rel_tol: self.tol,
                rhs_mode: match self.rhs {
                    Rhs::Ones => RhsMode::OnesSolution,
                    Rhs::Random => RhsMode::Random { seed: self.seed },
                },
                ..SolverConfig::default()
            },
            output: match self.format {
                Format::Table => OutputFormat::Table,
                Format::Csv => OutputFormat::Csv,
            },
        })
    }
}

fn run() -> Result<bool> {
    let plan = Args::parse().plan()?;
    let report = run_bench(&plan).context("benchmark failed")?;
    for s in &report.skipped {
        eprintln!(
            "skipped block_size={} k={} threads={}: {}",
            s.block_size, s.k, s.threads, s.reason
        );
    }
    if !report.records.is_empty() {
        print!("{}", emit_report(&report.records, plan.output));
    }
    Ok(report.all_converged())
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
