//! The unregularized problem: optimal value, gap between the two best vertex values,
//! divergence radius, and the network simplex on a larger instance.
use bregman_ot::exact::{divergence_radius, network_simplex, solve_lp, suboptimality_gap};
use bregman_ot::harness::{generate_instance, PAPER_X, PAPER_Y};
use bregman_ot::{Generator, Histogram, Result};

fn main() -> Result<()> {
    let x = Histogram::new(PAPER_X.to_vec())?;
    let y = Histogram::new(PAPER_Y.to_vec())?;
    let c = generate_instance(20240601, 3, 3)?;
    let lp = solve_lp(&c, &x, &y)?;
    println!("LP value {:.9} via {:?}", lp.optimal_value, lp.method);
    let gap = suboptimality_gap(&c, &x, &y, None)?;
    println!(
        "gap Δ = {:.6e} (best {:.6}, second {:.6})",
        gap.delta, gap.best_value, gap.second_value
    );
    for s in ["kl", "gamma:1/2", "fermi:2"] {
        let g: Generator = s.parse()?;
        println!("radius[{s}] = {:.6}", divergence_radius(&g, &x, &y)?);
    }

    let big_x = Histogram::uniform(40)?;
    let big_y = Histogram::normalized((1..=30).map(f64::from).collect())?;
    let big = generate_instance(1, 40, 30)?;
    let ns = network_simplex(&big, &big_x, &big_y)?;
    println!(
        "40x30 network simplex: value {:.6} in {} pivots, min reduced cost {:.1e}",
        ns.optimal_value, ns.iterations, ns.min_reduced_cost
    );
    Ok(())
}
