//! Domain scaling and affine wrapping leave the regularized plans and the
//! admissible ε-interval unchanged.
use bregman_ot::bounds::full_report;
use bregman_ot::harness::{generate_instance, PAPER_X, PAPER_Y};
use bregman_ot::regularized::{solve_regularized, SolveOptions};
use bregman_ot::{Generator, Histogram, Result};

fn main() -> Result<()> {
    let x = Histogram::new(PAPER_X.to_vec())?;
    let y = Histogram::new(PAPER_Y.to_vec())?;
    let c = generate_instance(5, 3, 3)?;
    let g: Generator = "gamma:1/2".parse()?;
    let opts = SolveOptions::default();
    let base = solve_regularized(&g, &c, &x, &y, 0.05, &opts)?;
    let r0 = full_report(&g, &c, &x, &y)?;
    for a in [2.0, 5.0] {
        let w = g.domain_scale(a, 1.0)?;
        let (ax, ay) = (x.scaled(a)?, y.scaled(a)?);
        let sol = solve_regularized(&w, &c, &ax, &ay, 0.05, &opts)?;
        let diff = sol.plan.entries().max_abs_diff(&base.plan.entries().scaled(a));
        let r = full_report(&w, &c, &ax, &ay)?;
        println!(
            "a = {a}: plan vs a·plan {diff:.1e}, eps_max {:.10} vs {:.10}",
            r.eps_max, r0.eps_max
        );
    }
    let shifted = g.affine(1.0, 0.7, -2.0)?;
    let sol = solve_regularized(&shifted, &c, &x, &y, 0.05, &opts)?;
    println!(
        "affine shift: plan difference {:.1e}",
        sol.plan.entries().max_abs_diff(base.plan.entries())
    );
    Ok(())
}
