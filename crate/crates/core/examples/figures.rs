//! Reproduce the three figure sweeps (CSV + SVG) into a directory.
use std::path::PathBuf;

use bregman_ot::harness::reproduce_figure;
use bregman_ot::Result;

fn main() -> Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("ot-figures"), PathBuf::from);
    for fig in 1..=3 {
        let run = reproduce_figure(fig, 20240601, &dir)?;
        println!(
            "figure {fig}: {} rows -> {}, {}",
            run.sweep.rows.len(),
            run.csv_path.display(),
            run.svg_path.display()
        );
        for r in &run.sweep.reports {
            println!("  {:<10} eps_max = {:.4e}", r.generator, r.eps_max);
        }
    }
    Ok(())
}
