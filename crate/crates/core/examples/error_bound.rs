//! Assemble the bound ingredients for one instance and compare the bound with the measured error.
use bregman_ot::bounds::full_report;
use bregman_ot::exact::network_simplex;
use bregman_ot::polytope::Matrix;
use bregman_ot::regularized::{solve_regularized, SolveOptions};
use bregman_ot::{Generator, Histogram, Result};

fn main() -> Result<()> {
    let c = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])?;
    let x = Histogram::new(vec![0.5, 0.5])?;
    let lp = network_simplex(&c, &x, &x)?;
    for s in ["kl", "gamma:1/2", "erfc:2"] {
        let g: Generator = s.parse()?;
        let r = full_report(&g, &c, &x, &x)?;
        println!(
            "{s}: Δ = {}, radius = {:.6}, R = {:.6}, ν = {:.6}, eps_max = {:.6}",
            r.delta, r.radius, r.r_u, r.nu_u, r.eps_max
        );
        for f in [1.0, 0.5, 0.25] {
            let eps = f * r.eps_max;
            let sol = solve_regularized(&g, &c, &x, &x, eps, &SolveOptions::default())?;
            println!(
                "  eps {:.4}: error {:.3e} <= bound {:.3e} <= naive {:.3e}",
                eps,
                lp.excess_cost(&c, sol.plan.entries()),
                r.bound_at(eps)?,
                r.naive_at(eps)
            );
        }
        if let Some(w) = r.weed_at(0.5) {
            println!("  KL closed form at 0.5: {:.6}", w?);
        }
    }
    Ok(())
}
