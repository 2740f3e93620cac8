//! Evaluate the shipped generator families and run the admissibility checker.
use bregman_ot::{Generator, Result};

fn main() -> Result<()> {
    let specs = [
        "kl",
        "gamma:1/2",
        "gamma:1/4",
        "erfc:3",
        "fermi:2",
        "qlog:0.5",
        "qlog:2",
    ];
    println!(
        "{:<12} {:>12} {:>12} {:>12} {:>10}",
        "generator", "U(0.3)", "U'(0.3)", "e_U(-1.5)", "admissible"
    );
    for s in specs {
        let g: Generator = s.parse()?;
        let report = g.check_assumptions(256)?;
        println!(
            "{:<12} {:>12.6} {:>12.6} {:>12} {:>10}",
            g.to_string(),
            g.u_value(0.3)?,
            g.u_prime(0.3)?,
            g.e_u(-1.5).map_or("-".into(), |v| format!("{v:.4e}")),
            report.admissible
        );
        for f in &report.failures {
            println!("    fails: {f}");
        }
    }

    // Bregman divergence, and its behavior under affine wrapping.
    let g: Generator = "gamma:1/2".parse()?;
    let w = g.affine(2.0, 1.0, -3.0)?;
    println!("d_U(0.5, 0.25) = {:.6}", g.d_u(0.5, 0.25)?);
    println!("wrapped (λ = 2)  = {:.6}", w.d_u(0.5, 0.25)?);
    Ok(())
}
