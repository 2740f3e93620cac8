use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use bregman_ot::bounds::full_report;
use bregman_ot::exact::{divergence_radius, solve_lp, suboptimality_gap};
use bregman_ot::harness::{reproduce_figure, run_sweep, write_csv, EpsGrid, ExperimentConfig, GridKind, GridUnit};
use bregman_ot::io::{read_histogram_file, read_matrix_file, write_plan};
use bregman_ot::polytope::{enumerate_vertices, Matrix};
use bregman_ot::regularized::{solve_regularized, SolveOptions};
use bregman_ot::{CostMatrix, Error, Generator, Histogram, Result};

/// Bregman-regularized optimal transport: exact and regularized solvers, error bounds and sweeps.
///
/// Exit codes: 0 success, 2 invalid input, 3 assumption violation, 4 convergence failure.
#[derive(Parser)]
#[command(name = "ot", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Data {
    /// Cost matrix CSV, one row per line, no header.
    #[arg(long)]
    cost: PathBuf,
    /// Source histogram CSV.
    #[arg(long)]
    x: PathBuf,
    /// Target histogram CSV.
    #[arg(long)]
    y: PathBuf,
}

impl Data {
    fn load(&self) -> Result<(CostMatrix, Histogram, Histogram)> {
        Ok((
            read_matrix_file(&self.cost)?,
            read_histogram_file(&self.x)?,
            read_histogram_file(&self.y)?,
        ))
    }
}

#[derive(Args)]
struct Marginals {
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    y: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the unregularized transport LP.
    Solve {
        #[command(flatten)]
        data: Data,
        /// Write the optimal plan as `i,j,value` CSV.
        #[arg(long)]
        plan_out: Option<PathBuf>,
    },
    /// Suboptimality gap between the best and second-best vertex.
    Gap {
        #[command(flatten)]
        data: Data,
        #[arg(long)]
        tie_tol: Option<f64>,
    },
    /// Divergence radius: the largest divergence from x⊗y over the polytope.
    Radius {
        #[arg(long)]
        gen: Generator,
        #[command(flatten)]
        m: Marginals,
    },
    /// Solve the regularized problem at one ε.
    RegSolve {
        #[arg(long)]
        gen: Generator,
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        data: Data,
        #[arg(long, default_value_t = SolveOptions::default().grad_tol)]
        tol: f64,
        #[arg(long, default_value_t = SolveOptions::default().max_iters)]
        max_iters: usize,
        #[arg(long)]
        plan_out: Option<PathBuf>,
    },
    /// Bound ingredients and, with --eps, the bounds themselves.
    Bound {
        #[arg(long)]
        gen: Generator,
        #[command(flatten)]
        data: Data,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Run an ε sweep from a JSON config; flags override config fields.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Generator spec; repeat to build the roster.
        #[arg(long = "gen")]
        gens: Vec<String>,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long)]
        eps_lo: Option<f64>,
        #[arg(long)]
        eps_hi: Option<f64>,
        #[arg(long)]
        eps_count: Option<usize>,
        /// absolute, delta or eps-max.
        #[arg(long)]
        eps_unit: Option<String>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce figure 1, 2 or 3 as CSV and SVG.
    Reproduce {
        #[arg(long)]
        fig: u32,
        #[arg(long, default_value_t = 20240601)]
        seed: u64,
        #[arg(long, default_value = "figures")]
        out_dir: PathBuf,
    },
    /// Check a generator against the admissibility conditions.
    Check {
        #[arg(long)]
        gen: Generator,
        #[arg(long, default_value_t = 256)]
        grid: usize,
    },
    /// Enumerate the vertices of the transport polytope.
    Vertices {
        #[command(flatten)]
        m: Marginals,
    },
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn save_plan(plan: &Matrix, path: Option<&Path>) -> Result<()> {
    if let Some(p) = path {
        write_plan(plan, std::fs::File::create(p)?)?;
    }
    Ok(())
}

fn parse_unit(s: &str) -> Result<GridUnit> {
    match s {
        "absolute" => Ok(GridUnit::Absolute),
        "delta" => Ok(GridUnit::Delta),
        "eps-max" => Ok(GridUnit::EpsMax),
        _ => Err(Error::Parse {
            what: "eps unit".into(),
            detail: s.into(),
        }),
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Solve { data, plan_out } => {
            let (c, x, y) = data.load()?;
            let lp = solve_lp(&c, &x, &y)?;
            save_plan(lp.optimal_plan.entries(), plan_out.as_deref())?;
            print_json(&json!({
                "optimal_value": lp.optimal_value,
                "method": lp.method,
                "plan": lp.optimal_plan.entries().to_rows(),
            }))
        }
        Cmd::Gap { data, tie_tol } => {
            let (c, x, y) = data.load()?;
            print_json(&suboptimality_gap(&c, &x, &y, tie_tol)?)
        }
        Cmd::Radius { gen, m } => {
            let (x, y) = (read_histogram_file(&m.x)?, read_histogram_file(&m.y)?);
            print_json(&json!({ "generator": gen.to_string(), "radius": divergence_radius(&gen, &x, &y)? }))
        }
        Cmd::RegSolve {
            gen,
            eps,
            data,
            tol,
            max_iters,
            plan_out,
        } => {
            let (c, x, y) = data.load()?;
            let opts = SolveOptions {
                grad_tol: tol,
                max_iters,
                ..SolveOptions::default()
            };
            let r = solve_regularized(&gen, &c, &x, &y, eps, &opts)?;
            save_plan(r.plan.entries(), plan_out.as_deref())?;
            print_json(&r)?;
            if r.converged {
                Ok(())
            } else {
                Err(Error::Convergence(format!(
                    "gradient norm {} after {} iterations",
                    r.grad_norm, r.iterations
                )))
            }
        }
        Cmd::Bound { gen, data, eps } => {
            let (c, x, y) = data.load()?;
            let report = full_report(&gen, &c, &x, &y)?;
            let mut v = serde_json::to_value(&report)?;
            if let Some(e) = eps {
                let b = report.bound_eval(e)?;
                v["eps"] = json!(e);
                v["bound"] = json!(b.value);
                v["ln_bound"] = json!(b.ln_value);
                v["bound_underflow"] = json!(b.clamped);
                v["naive_bound"] = json!(report.naive_at(e));
                if let Some(w) = report.weed_at(e) {
                    v["weed_bound"] = json!(w?);
                }
            }
            print_json(&v)
        }
        Cmd::Sweep {
            config,
            seed,
            gens,
            rows,
            cols,
            eps_lo,
            eps_hi,
            eps_count,
            eps_unit,
            out,
        } => {
            let mut cfg = match &config {
                Some(p) => ExperimentConfig::from_file(p)?,
                None => ExperimentConfig::paper(
                    0,
                    &[],
                    EpsGrid {
                        kind: GridKind::Log,
                        lo: 0.01,
                        hi: 1.0,
                        count: 20,
                        unit: GridUnit::Delta,
                    },
                ),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if !gens.is_empty() {
                cfg.generators = gens;
            }
            if let Some(r) = rows {
                cfg.rows = r;
            }
            if let Some(c) = cols {
                cfg.cols = c;
            }
            if let Some(v) = eps_lo {
                cfg.eps_grid.lo = v;
            }
            if let Some(v) = eps_hi {
                cfg.eps_grid.hi = v;
            }
            if let Some(v) = eps_count {
                cfg.eps_grid.count = v;
            }
            if let Some(u) = eps_unit {
                cfg.eps_grid.unit = parse_unit(&u)?;
            }
            if out.is_some() {
                cfg.output_path = out;
            }
            let res = run_sweep(&cfg)?;
            match &cfg.output_path {
                Some(p) => write_csv(&res.rows, std::fs::File::create(p)?),
                None => write_csv(&res.rows, std::io::stdout().lock()),
            }
        }
        Cmd::Reproduce { fig, seed, out_dir } => {
            let run = reproduce_figure(fig, seed, &out_dir)?;
            print_json(&json!({
                "figure": fig,
                "seed": seed,
                "delta": run.sweep.delta,
                "csv": run.csv_path,
                "svg": run.svg_path,
                "rows": run.sweep.rows.len(),
            }))
        }
        Cmd::Check { gen, grid } => {
            let report = gen.check_assumptions(grid)?;
            print_json(&report)?;
            if report.admissible {
                Ok(())
            } else {
                Err(Error::Assumption(report.failures.join("; ")))
            }
        }
        Cmd::Vertices { m } => {
            let (x, y) = (read_histogram_file(&m.x)?, read_histogram_file(&m.y)?);
            let vs = enumerate_vertices(&x, &y)?;
            let vertices: Vec<_> = vs.vertices.iter().map(|v| v.entries().to_rows()).collect();
            print_json(&json!({ "count": vs.len(), "vertices": vertices }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
