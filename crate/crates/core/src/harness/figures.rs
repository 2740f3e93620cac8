use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{run_sweep, write_csv_file, EpsGrid, ExperimentConfig, GridKind, GridUnit, SweepResult, SweepRow};
use crate::error::{Error, Result};

/// ε grid shared by all figures: 40 log-spaced points on `[Δ/100, Δ]`.
pub const FIGURE_GRID: EpsGrid = EpsGrid {
    kind: GridKind::Log,
    lo: 0.01,
    hi: 1.0,
    count: 40,
    unit: GridUnit::Delta,
};

/// Generator roster of figure 1, 2 or 3.
pub fn figure_generators(fig: u32) -> Result<&'static [&'static str]> {
    match fig {
        1 => Ok(&["gamma:1", "gamma:1/2", "gamma:1/3", "gamma:1/4"]),
        2 => Ok(&["erfc:2", "erfc:3", "erfc:4", "erfc:5", "kl"]),
        3 => Ok(&["fermi:2", "fermi:3", "fermi:4", "fermi:5", "kl"]),
        _ => Err(Error::invalid(format!("figure must be 1, 2 or 3, got {fig}"))),
    }
}

#[derive(Debug)]
pub struct FigureRun {
    pub sweep: SweepResult,
    pub csv_path: PathBuf,
    pub svg_path: PathBuf,
}

/// Runs the figure's sweep on the paper marginals and writes `fig{N}.csv` and `fig{N}.svg`.
pub fn reproduce_figure(fig: u32, seed: u64, out_dir: &Path) -> Result<FigureRun> {
    let gens = figure_generators(fig)?;
    let cfg = ExperimentConfig::paper(seed, gens, FIGURE_GRID);
    let sweep = run_sweep(&cfg)?;
    std::fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("fig{fig}.csv"));
    let svg_path = out_dir.join(format!("fig{fig}.svg"));
    write_csv_file(&sweep.rows, &csv_path)?;
    let title = format!("Figure {fig}: ln(error / delta) solid, ln(bound / delta) dashed (seed {seed})");
    std::fs::write(&svg_path, write_svg(&sweep.rows, &title))?;
    Ok(FigureRun {
        sweep,
        csv_path,
        svg_path,
    })
}

const COLORS: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#000000", "#ff7f0e"];

/// Static line chart of the log ratios against `log10 ε`.
pub fn write_svg(rows: &[SweepRow], title: &str) -> String {
    let (w, h, pad) = (720.0, 480.0, 60.0);
    let mut series: Vec<(&str, Vec<&SweepRow>)> = Vec::new();
    for r in rows {
        match series.iter_mut().find(|(g, _)| *g == r.generator) {
            Some((_, v)) => v.push(r),
            None => series.push((&r.generator, vec![r])),
        }
    }
    let finite = |v: f64| v.is_finite().then_some(v);
    let xs: Vec<f64> = rows.iter().map(|r| r.eps.log10()).collect();
    let ys: Vec<f64> = rows
        .iter()
        .flat_map(|r| [finite(r.log_error_ratio), r.log_bound_ratio.and_then(finite)])
        .flatten()
        .collect();
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() && hi > lo {
            (lo, hi)
        } else {
            (lo - 1.0, lo + 1.0)
        }
    };
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    let px = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{title}</text>"#, w / 2.0);
    let _ = writeln!(
        s,
        r#"<path d="M{pad} {pad} V{} H{}" fill="none" stroke="black"/>"#,
        h - pad,
        w - pad
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">log10 eps  [{x0:.3}, {x1:.3}]</text>"#,
        w / 2.0,
        h - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">log ratio  [{y0:.1}, {y1:.1}]</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let line = |ys: Vec<Option<f64>>, dash: &str, s: &mut String| {
            let d: Vec<String> = pts
                .iter()
                .zip(ys)
                .filter_map(|(r, y)| y.map(|y| format!("{:.2},{:.2}", px(r.eps.log10()), py(y))))
                .collect();
            if !d.is_empty() {
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
                    d.join(" ")
                );
            }
        };
        line(pts.iter().map(|r| finite(r.log_error_ratio)).collect(), "", &mut s);
        line(
            pts.iter().map(|r| r.log_bound_ratio.and_then(finite)).collect(),
            r#" stroke-dasharray="6 4""#,
            &mut s,
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{name}</text>"#,
            w - pad - 90.0,
            pad + 16.0 * k as f64
        );
    }
    s.push_str("</svg>\n");
    s
}
