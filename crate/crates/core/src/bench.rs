//! Benchmark harness: sweeps block sizes, fill levels and worker counts over
//! one matrix and reports setup/solve wall-clock time and GMRES iterations.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::exec::with_threads;
use crate::factor::build_preconditioner;
use crate::krylov::{gmres, make_rhs, SolverConfig};
use crate::sparse::{poisson_3d, read_matrix_market, BcsrMatrix, CsrMatrix};
use crate::symbolic::FillParams;
use crate::trisolve::IlukPreconditioner;

pub const CSV_HEADER: &str = "block_size,k,threads,setup_s,solve_s,iterations,converged,residual";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatrixSource {
    Poisson { nx: usize, ny: usize, nz: usize },
    MatrixMarket(PathBuf),
}

impl MatrixSource {
    pub fn load(&self) -> Result<CsrMatrix> {
        match self {
            MatrixSource::Poisson { nx, ny, nz } => poisson_3d(*nx, *ny, *nz),
            MatrixSource::MatrixMarket(path) => read_matrix_market(path),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Table,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!("unknown output format '{other}'")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub source: MatrixSource,
    pub block_sizes: Vec<usize>,
    pub k_levels: Vec<usize>,
    pub threads: Vec<usize>,
    pub solver: SolverConfig,
    pub output: OutputFormat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub block_size: usize,
    pub k: usize,
    pub threads: usize,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
}

/// A configuration that could not be run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skipped {
    pub block_size: usize,
    pub k: usize,
    pub threads: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    pub skipped: Vec<Skipped>,
}

impl BenchReport {
    /// Whether every configuration that actually ran converged.
    pub fn all_converged(&self) -> bool {
        self.records.iter().all(|r| r.converged)
    }
}

pub fn run_bench(plan: &BenchPlan) -> Result<BenchReport> {
    let a = plan.source.load()?;
    run_bench_on(&a, plan)
}

/// Runs every `(block size, k, threads)` configuration of `plan` on `a`,
/// sequentially, in that nesting order.
pub fn run_bench_on(a: &CsrMatrix, plan: &BenchPlan) -> Result<BenchReport> {
    let b = make_rhs(a, plan.solver.rhs_mode)?
        .ok_or_else(|| Error::structure("benchmarks need a generated right-hand side"))?;
    let mut report = BenchReport::default();
    for &bs in &plan.block_sizes {
        let blocked = BcsrMatrix::from_csr(a, bs);
        for &k in &plan.k_levels {
            for &threads in &plan.threads {
                let skip = |reason: String| Skipped {
                    block_size: bs,
                    k,
                    threads,
                    reason,
                };
                let blocked = match &blocked {
                    Ok(m) => m,
                    Err(e) => {
                        report.skipped.push(skip(e.to_string()));
                        continue;
                    }
                };
                match run_one(a, blocked, &b, k, threads, &plan.solver) {
                    Ok(rec) => report.records.push(rec),
                    Err(e) => report.skipped.push(skip(e.to_string())),
                }
            }
        }
    }
    Ok(report)
}

fn run_one(
    a: &CsrMatrix,
    blocked: &BcsrMatrix,
    b: &[f64],
    k: usize,
    threads: usize,
    cfg: &SolverConfig,
) -> Result<BenchRecord> {
    let setup = Instant::now();
    let factors = build_preconditioner(blocked, FillParams::new(k))?;
    let m = IlukPreconditioner::new(factors)?;
    let setup_seconds = setup.elapsed().as_secs_f64();

    let (_, stats) = with_threads(threads, |exec| gmres(a, b, &m, cfg, exec))?;
    Ok(BenchRecord {
        block_size: blocked.block_size(),
        k,
        threads,
        setup_seconds,
        solve_seconds: stats.solve_seconds,
        iterations: stats.iterations,
        converged: stats.converged,
        final_residual: stats.final_relative_residual,
    })
}

pub fn emit_report(records: &[BenchRecord], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => emit_csv(records),
        OutputFormat::Table => emit_table(records),
    }
}

fn emit_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.block_size,
            r.k,
            r.threads,
            r.setup_seconds,
            r.solve_seconds,
            r.iterations,
            r.converged,
            r.final_residual
        );
    }
    out
}

/// Solve-time ratio against the single-thread run of the same configuration.
pub fn speedup(records: &[BenchRecord], r: &BenchRecord) -> Option<f64> {
    records
        .iter()
        .find(|o| o.block_size == r.block_size && o.k == r.k && o.threads == 1)
        .map(|base| base.solve_seconds / r.solve_seconds)
}

fn emit_table(records: &[BenchRecord]) -> String {
    let mut out = String::new();
    let mut sizes: Vec<usize> = Vec::new();
    for r in records {
        if !sizes.contains(&r.block_size) {
            sizes.push(r.block_size);
        }
    }
    for bs in sizes {
        let _ = writeln!(out, "Block size {bs}");
        let _ = writeln!(
            out,
            "{:>5} {:>8} {:>12} {:>12} {:>10} {:>10} {:>12} {:>8}",
            "k", "threads", "setup (s)", "solve (s)", "iterations", "converged", "residual", "speedup"
        );
        for r in records.iter().filter(|r| r.block_size == bs) {
            let ratio = speedup(records, r).map_or_else(|| "-".to_string(), |s| format!("{s:.2}"));
            let _ = writeln!(
                out,
                "{:>5} {:>8} {:>12.6} {:>12.6} {:>10} {:>10} {:>12.3e} {:>8}",
                r.k,
                r.threads,
                r.setup_seconds,
                r.solve_seconds,
                r.iterations,
                if r.converged { "yes" } else { "no" },
                r.final_residual,
                ratio
            );
        }
        out.push('\n');
    }
    out
}

/// Parses CSV produced by [`emit_report`].
pub fn parse_csv(text: &str) -> Result<Vec<BenchRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: "missing CSV header".into(),
            })
        }
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let bad = |what: &str| Error::Parse {
            line: line_no,
            msg: format!("bad {what}"),
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(bad("field count"));
        }
        records.push(BenchRecord {
            block_size: f[0].parse().map_err(|_| bad("block_size"))?,
            k: f[1].parse().map_err(|_| bad("k"))?,
            threads: f[2].parse().map_err(|_| bad("threads"))?,
            setup_seconds: f[3].parse().map_err(|_| bad("setup_s"))?,
            solve_seconds: f[4].parse().map_err(|_| bad("solve_s"))?,
            iterations: f[5].parse().map_err(|_| bad("iterations"))?,
            converged: f[6].parse().map_err(|_| bad("converged"))?,
            final_residual: f[7].parse().map_err(|_| bad("residual"))?,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(bs: usize, k: usize, threads: usize, solve: f64) -> BenchRecord {
        BenchRecord {
            block_size: bs,
            k,
            threads,
            setup_seconds: 0.125,
            solve_seconds: solve,
            iterations: 10 + k,
            converged: true,
            final_residual: 3.2e-7,
        }
    }

    fn plan(source: MatrixSource, bs: Vec<usize>, k: Vec<usize>, threads: Vec<usize>) -> BenchPlan {
        BenchPlan {
            source,
            block_sizes: bs,
            k_levels: k,
            threads,
            solver: SolverConfig::default(),
            output: OutputFormat::Csv,
        }
    }

    #[test]
    fn single_record_csv() {
        let csv = emit_report(&[record(1, 0, 1, 0.5)], OutputFormat::Csv);
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    }

    #[test]
    fn csv_round_trip() {
        let recs = vec![record(1, 0, 1, 0.1 + 0.2), record(2, 3, 8, 1e-9 / 3.0)];
        assert_eq!(parse_csv(&emit_report(&recs, OutputFormat::Csv)).unwrap(), recs);
    }

    #[test]
    fn table_sections_by_block_size() {
        let recs = vec![
            record(1, 0, 1, 1.0),
            record(1, 1, 1, 1.0),
            record(2, 0, 1, 1.0),
            record(2, 1, 1, 1.0),
        ];
        let t = emit_report(&recs, OutputFormat::Table);
        assert_eq!(t.matches("Block size").count(), 2);
        let section = t.split("Block size 2").nth(1).unwrap();
        assert_eq!(section.lines().filter(|l| l.contains("yes")).count(), 2);
    }

    #[test]
    fn speedup_is_single_thread_over_parallel() {
        let recs = vec![record(1, 0, 1, 4.0), record(1, 0, 4, 1.6)];
        assert_eq!(speedup(&recs, &recs[1]), Some(2.5));
        assert_eq!(speedup(&recs[1..], &recs[1]), None);
        assert!(emit_report(&recs, OutputFormat::Table).contains("2.50"));
    }

    #[test]
    fn one_by_one_system() {
        let p = plan(MatrixSource::Poisson { nx: 1, ny: 1, nz: 1 }, vec![1], vec![0], vec![1]);
        let rep = run_bench(&p).unwrap();
        assert_eq!(rep.records.len(), 1);
        assert_eq!(rep.records[0].iterations, 1);
        assert!(rep.all_converged());
    }

    #[test]
    fn non_divisible_block_size_is_skipped() {
        let p = plan(
            MatrixSource::Poisson { nx: 20, ny: 20, nz: 20 },
            vec![7],
            vec![0],
            vec![1],
        );
        let rep = run_bench(&p).unwrap();
        assert!(rep.records.is_empty());
        assert_eq!(rep.skipped.len(), 1);
        assert!(rep.skipped[0].reason.contains("does not divide"));
    }

    #[test]
    fn missing_matrix_file_is_an_error() {
        let p = plan(
            MatrixSource::MatrixMarket("/nonexistent/a.mtx".into()),
            vec![1],
            vec![0],
            vec![1],
        );
        assert!(run_bench(&p).is_err());
    }
}
