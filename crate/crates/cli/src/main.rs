use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use fmasr::bench::{make_test_case, run_benchmark, solve, SolverKind, TestId, Truth};
use fmasr::grid::BoundaryMode;
use fmasr::io::{write_bench_csv, write_stencil_stats, GridFile, IoError};
use fmasr::solver::residual;
use fmasr::stencil::mesh_cardinality_stats;
use fmasr::{OffsetNorm, SymMat2, Vec2};

#[derive(Parser, Debug)]
#[command(name = "fmasr", version, about = "Anisotropic eikonal solvers on Cartesian grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one benchmark problem and write the distance field.
    Solve {
        #[arg(long)]
        test: TestId,
        #[arg(long, default_value = "fm-asr")]
        solver: SolverKind,
        /// Grid points per side; odd values put a node on the source.
        #[arg(long)]
        n: usize,
        /// Grid rotation in radians.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        theta: f64,
        /// Grid offset `x,y` in lattice units.
        #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
        offset: Option<Vec2>,
        #[arg(long, value_enum, default_value_t = Boundary::Source)]
        bc: Boundary,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Time solvers over a list of resolutions and report their errors.
    Bench {
        #[arg(long)]
        test: TestId,
        #[arg(long, value_delimiter = ',', default_value = "fm-asr")]
        solver: Vec<SolverKind>,
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
        /// `analytic` or `reference:<n>[:<solver>]`.
        #[arg(long, default_value = "analytic")]
        truth: Truth,
        #[arg(long)]
        csv: PathBuf,
        /// Directory caching reference solutions between runs.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Stencil cardinality of a norm over equally spaced orientations.
    StencilStats {
        /// Quadratic form `a,b,c` of the matrix [[a, b], [b, c]].
        #[arg(long, value_parser = parse_sym, allow_hyphen_values = true)]
        m: SymMat2,
        #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
        omega: Option<Vec2>,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        #[arg(long)]
        csv: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Boundary {
    Source,
    Escape,
}

fn parse_reals<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got '{s}'"));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("'{p}' is not a number"))?;
    }
    Ok(out)
}

fn parse_vec2(s: &str) -> Result<Vec2, String> {
    let [x, y] = parse_reals::<2>(s)?;
    Ok(Vec2::new(x, y))
}

fn parse_sym(s: &str) -> Result<SymMat2, String> {
    let [a, b, c] = parse_reals::<3>(s)?;
    Ok(SymMat2::new(a, b, c))
}

fn write_file(path: &PathBuf, body: impl FnOnce(&mut BufWriter<File>) -> Result<(), IoError>) -> Result<()> {
    let context = || format!("writing {}", path.display());
    let mut w = BufWriter::new(File::create(path).with_context(context)?);
    body(&mut w).with_context(context)?;
    w.flush().with_context(context)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve {
            test,
            solver,
            n,
            theta,
            offset,
            bc,
            out,
            pgm,
        } => {
            if n < 2 {
                bail!("--n must be at least 2");
            }
            let case = make_test_case(test);
            let base = case.grid(n);
            let boundary = match bc {
                Boundary::Source => BoundaryMode::Source,
                Boundary::Escape => BoundaryMode::Escape,
            };
            let spec = base
                .with_rotation(theta, offset.unwrap_or(base.offset))
                .with_boundary(boundary);
            let sol = solve(&case, solver, &spec)?;
            let grid = GridFile::from_field(&sol.domain, &sol.field.values);
            write_file(&out, |w| grid.write(w))?;
            if let Some(p) = pgm {
                write_file(&p, |w| grid.write_pgm(w))?;
            }
            println!(
                "{test} {solver} n={n}: {} points, {} stencil entries, prep {:.3}s, solve {:.3}s, residual {:.2e}",
                sol.domain.len(),
                sol.stencil_size(),
                sol.prep_seconds,
                sol.solve_seconds,
                residual(&sol.field, &sol.domain, &sol.table)
            );
        }
        Command::Bench {
            test,
            solver,
            n_list,
            truth,
            csv,
            cache_dir,
        } => {
            if n_list.is_empty() {
                bail!("--n-list is empty");
            }
            if let Some(n) = n_list.iter().find(|n| n.is_multiple_of(2) || **n < 3) {
                bail!("resolutions must be odd and at least 3, got {n}");
            }
            let case = make_test_case(test);
            let rows = run_benchmark(&case, &solver, &n_list, truth, cache_dir.as_deref())?;
            for row in &rows {
                match &row.result {
                    Ok(r) => println!(
                        "{} {} n={}: linf {:.4e} l1 {:.4e} in {:.3}s",
                        row.test,
                        row.solver,
                        row.n,
                        r.linf,
                        r.l1_avg,
                        r.cpu_seconds()
                    ),
                    Err(e) => eprintln!("{} {} n={}: {e}", row.test, row.solver, row.n),
                }
            }
            write_file(&csv, |w| write_bench_csv(w, &rows))?;
        }
        Command::StencilStats { m, omega, samples, csv } => {
            let norm = OffsetNorm::new(m, omega.unwrap_or(Vec2::ZERO))?;
            let stats = mesh_cardinality_stats(&norm, samples)?;
            let mean = stats.iter().map(|s| s.1 as f64).sum::<f64>() / stats.len() as f64;
            let max = stats.iter().map(|s| s.1).max().unwrap_or(0);
            println!(
                "kappa {:.4}: mean cardinality {mean:.3}, max {max}",
                norm.anisotropy_ratio()
            );
            write_file(&csv, |w| write_stencil_stats(w, &stats))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
