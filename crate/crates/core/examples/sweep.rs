//! Run an ε sweep from a JSON config and print the CSV.
use bregman_ot::harness::{run_sweep, write_csv, ExperimentConfig};
use bregman_ot::Result;

fn main() -> Result<()> {
    let cfg = ExperimentConfig::from_json(
        r#"{
            "seed": 11, "I": 3, "J": 3, "x": "paper", "y": "paper",
            "generators": ["kl", "gamma:1/2", "fermi:3"],
            "eps_grid": {"kind": "log", "lo": 0.05, "hi": 2.0, "count": 6, "unit": "eps-max"}
        }"#,
    )?;
    let res = run_sweep(&cfg)?;
    eprintln!("Δ = {:.4e}, LP value = {:.6}", res.delta, res.lp_value);
    write_csv(&res.rows, std::io::stdout().lock())
}
