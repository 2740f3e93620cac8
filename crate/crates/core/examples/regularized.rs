//! Solve the regularized problem for several generators and watch the error shrink with ε.
use bregman_ot::exact::network_simplex;
use bregman_ot::harness::{generate_instance, PAPER_X, PAPER_Y};
use bregman_ot::regularized::{kkt_residual, solve_regularized, SolveOptions};
use bregman_ot::{Generator, Histogram, Result};

fn main() -> Result<()> {
    let x = Histogram::new(PAPER_X.to_vec())?;
    let y = Histogram::new(PAPER_Y.to_vec())?;
    let c = generate_instance(3, 3, 3)?;
    let lp = network_simplex(&c, &x, &y)?;
    let opts = SolveOptions::default();
    println!(
        "{:<10} {:>8} {:>12} {:>6} {:>10}",
        "generator", "eps", "error", "iters", "kkt"
    );
    for s in ["kl", "gamma:1/2", "erfc:2", "fermi:2"] {
        let g: Generator = s.parse()?;
        for eps in [0.1, 0.03, 0.01] {
            let r = solve_regularized(&g, &c, &x, &y, eps, &opts)?;
            // Undefined once an entry has underflowed to 0.
            let kkt = kkt_residual(&g, &c, &x, &y, eps, r.plan.entries()).map_or("-".into(), |k| format!("{k:.1e}"));
            println!(
                "{:<10} {:>8} {:>12.4e} {:>6} {:>10}",
                s,
                eps,
                lp.excess_cost(&c, r.plan.entries()),
                r.iterations,
                kkt
            );
        }
    }
    Ok(())
}
