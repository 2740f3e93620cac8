//! Seeded instances, ε sweeps and figure reproduction.
//!
//! Cost matrices come from `Xoshiro256PlusPlus::seed_from_u64(seed)`, filled row-major
//! with uniform draws from the open interval `(0, 1)`. The stream is fixed by the
//! `rand_xoshiro` crate and identical on every platform.

mod figures;

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{full_report, BoundReport};
use crate::error::{Error, Result};
use crate::exact::network_simplex;
use crate::generators::Generator;
use crate::polytope::{CostMatrix, Histogram, Matrix};
use crate::regularized::{solve_regularized, SolveOptions};

pub use figures::{figure_generators, reproduce_figure, write_svg, FigureRun, FIGURE_GRID};

/// Marginals of the experiments in the figures.
pub const PAPER_X: [f64; 3] = [0.1, 0.2, 0.7];
pub const PAPER_Y: [f64; 3] = [0.3, 0.4, 0.3];

pub const CSV_HEADER: [&str; 8] = [
    "generator",
    "eps",
    "error",
    "theorem_bound",
    "naive_bound",
    "log_error_ratio",
    "log_bound_ratio",
    "converged",
];

/// Uniform `(0, 1)` cost matrix, deterministic in `seed`.
pub fn generate_instance(seed: u64, rows: usize, cols: usize) -> Result<CostMatrix> {
    if rows < 2 || cols < 2 {
        return Err(Error::invalid(format!(
            "instance must be at least 2x2, got {rows}x{cols}"
        )));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    Ok(Matrix::from_fn(rows, cols, |_, _| rng.sample(Open01)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Marginal {
    /// Only `"paper"` is recognized.
    Preset(String),
    Values(Vec<f64>),
}

impl Marginal {
    fn resolve(&self, preset: &[f64], len: usize) -> Result<Histogram> {
        let values = match self {
            Marginal::Preset(name) if name == "paper" => preset.to_vec(),
            Marginal::Preset(name) => return Err(Error::invalid(format!("unknown marginal preset {name:?}"))),
            Marginal::Values(v) => v.clone(),
        };
        if values.len() != len {
            return Err(Error::invalid(format!(
                "marginal has {} entries, instance needs {len}",
                values.len()
            )));
        }
        Histogram::new(values)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Log,
    Linear,
}

/// What the grid endpoints are measured in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridUnit {
    #[default]
    Absolute,
    /// Multiples of the instance's `Δ_C`.
    Delta,
    /// Multiples of each generator's own `eps_max`.
    EpsMax,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsGrid {
    pub kind: GridKind,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    #[serde(default)]
    pub unit: GridUnit,
}

impl EpsGrid {
    pub fn log(lo: f64, hi: f64, count: usize) -> Self {
        EpsGrid {
            kind: GridKind::Log,
            lo,
            hi,
            count,
            unit: GridUnit::Absolute,
        }
    }

    pub fn in_units(mut self, unit: GridUnit) -> Self {
        self.unit = unit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(Error::invalid(format!(
                "eps grid needs 0 < lo <= hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.count < 2 {
            return Err(Error::invalid("eps grid needs at least 2 points"));
        }
        Ok(())
    }

    /// Grid points in increasing order, multiplied by `unit`.
    pub fn points(&self, unit: f64) -> Vec<f64> {
        let n = self.count - 1;
        (0..=n)
            .map(|k| {
                let t = k as f64 / n as f64;
                let v = match self.kind {
                    GridKind::Log => (self.lo.ln() * (1.0 - t) + self.hi.ln() * t).exp(),
                    GridKind::Linear => self.lo * (1.0 - t) + self.hi * t,
                };
                let v = if k == 0 {
                    self.lo
                } else if k == n {
                    self.hi
                } else {
                    v
                };
                v * unit
            })
            .collect()
    }
}

fn default_marginal() -> Marginal {
    Marginal::Preset("paper".into())
}

fn default_dim() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(rename = "I", default = "default_dim")]
    pub rows: usize,
    #[serde(rename = "J", default = "default_dim")]
    pub cols: usize,
    #[serde(default = "default_marginal")]
    pub x: Marginal,
    #[serde(default = "default_marginal")]
    pub y: Marginal,
    #[serde(alias = "generator_specs")]
    pub generators: Vec<String>,
    pub eps_grid: EpsGrid,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    /// The figure setting: 3×3, paper marginals.
    pub fn paper(seed: u64, generators: &[&str], eps_grid: EpsGrid) -> Self {
        ExperimentConfig {
            seed,
            rows: 3,
            cols: 3,
            x: default_marginal(),
            y: default_marginal(),
            generators: generators.iter().map(|s| s.to_string()).collect(),
            eps_grid,
            output_path: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.eps_grid.validate()?;
        self.marginals()?;
        self.parsed_generators()?;
        Ok(())
    }

    pub fn marginals(&self) -> Result<(Histogram, Histogram)> {
        let x = self.x.resolve(&PAPER_X, self.rows)?;
        let y = self.y.resolve(&PAPER_Y, self.cols)?;
        Ok((x, y))
    }

    pub fn parsed_generators(&self) -> Result<Vec<Generator>> {
        self.generators.iter().map(|s| s.parse()).collect()
    }

    pub fn instance(&self) -> Result<CostMatrix> {
        generate_instance(self.seed, self.rows, self.cols)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub generator: String,
    pub eps: f64,
    /// `⟨C, Π^ε⟩ - min ⟨C, Π⟩`; NaN when the solve failed outright.
    pub error: f64,
    /// `None` when `eps` lies outside the valid interval.
    pub theorem_bound: Option<f64>,
    pub naive_bound: f64,
    pub log_error_ratio: f64,
    pub log_bound_ratio: Option<f64>,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub cost: Vec<Vec<f64>>,
    pub delta: f64,
    pub lp_value: f64,
    pub reports: Vec<BoundReport>,
    pub rows: Vec<SweepRow>,
}

/// Solves every (generator, ε) pair of the config; rows come back sorted by
/// generator (in config order) and then by ε.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let (x, y) = config.marginals()?;
    let c = config.instance()?;
    sweep_instance(&c, &x, &y, &config.parsed_generators()?, &config.eps_grid)
}

/// [`run_sweep`] on explicit data.
pub fn sweep_instance(
    c: &CostMatrix,
    x: &Histogram,
    y: &Histogram,
    gens: &[Generator],
    grid: &EpsGrid,
) -> Result<SweepResult> {
    grid.validate()?;
    let lp = network_simplex(c, x, y)?;
    let reports = gens
        .iter()
        .map(|g| full_report(g, c, x, y))
        .collect::<Result<Vec<_>>>()?;
    let delta = reports.first().map_or(f64::NAN, |r| r.delta);

    let jobs: Vec<(usize, f64)> = reports
        .iter()
        .enumerate()
        .flat_map(|(k, r)| {
            let unit = match grid.unit {
                GridUnit::Absolute => 1.0,
                GridUnit::Delta => r.delta,
                GridUnit::EpsMax => r.eps_max,
            };
            grid.points(unit).into_iter().map(move |e| (k, e))
        })
        .collect();
    let opts = SolveOptions::default();
    let mut rows: Vec<(usize, SweepRow)> = jobs
        .par_iter()
        .map(|&(k, eps)| {
            let r = &reports[k];
            let (error, converged) = match solve_regularized(&gens[k], c, x, y, eps, &opts) {
                Ok(sol) => (lp.excess_cost(c, sol.plan.entries()), sol.converged),
                Err(_) => (f64::NAN, false),
            };
            let bound = r.bound_eval(eps).ok();
            let row = SweepRow {
                generator: r.generator.clone(),
                eps,
                error,
                theorem_bound: bound.map(|b| b.value),
                naive_bound: r.naive_at(eps),
                log_error_ratio: (error / r.delta).ln(),
                log_bound_ratio: bound.map(|b| b.ln_value - r.delta.ln()),
                converged,
            };
            (k, row)
        })
        .collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.eps.total_cmp(&b.1.eps)));
    Ok(SweepResult {
        cost: c.to_rows(),
        delta,
        lp_value: lp.optimal_value,
        reports,
        rows: rows.into_iter().map(|(_, r)| r).collect(),
    })
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:e}")
    }
}

/// Writes sweep rows as CSV; out-of-interval bound cells read `invalid-eps`.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let opt = |v: Option<f64>| v.map_or_else(|| "invalid-eps".to_string(), num);
        w.write_record([
            r.generator.clone(),
            num(r.eps),
            num(r.error),
            opt(r.theorem_bound),
            num(r.naive_bound),
            num(r.log_error_ratio),
            opt(r.log_bound_ratio),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(rows: &[SweepRow], path: &Path) -> Result<()> {
    write_csv(rows, std::fs::File::create(path)?)
}

fn parse_cell(s: &str) -> Result<Option<f64>> {
    match s {
        "invalid-eps" => Ok(None),
        "nan" => Ok(Some(f64::NAN)),
        "inf" => Ok(Some(f64::INFINITY)),
        "-inf" => Ok(Some(f64::NEG_INFINITY)),
        _ => s.parse().map(Some).map_err(|_| Error::Parse {
            what: "sweep cell".into(),
            detail: s.into(),
        }),
    }
}

/// Reads back a CSV written by [`write_csv`].
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::Parse {
                what: "sweep row".into(),
                detail: format!("expected {} fields, got {}", CSV_HEADER.len(), rec.len()),
            });
        }
        let need = |k: usize| {
            parse_cell(&rec[k])?.ok_or_else(|| Error::Parse {
                what: CSV_HEADER[k].into(),
                detail: rec[k].into(),
            })
        };
        rows.push(SweepRow {
            generator: rec[0].to_string(),
            eps: need(1)?,
            error: need(2)?,
            theorem_bound: parse_cell(&rec[3])?,
            naive_bound: need(4)?,
            log_error_ratio: need(5)?,
            log_bound_ratio: parse_cell(&rec[6])?,
            converged: rec[7].parse().map_err(|_| Error::Parse {
                what: "converged".into(),
                detail: rec[7].into(),
            })?,
        });
    }
    Ok(rows)
}
