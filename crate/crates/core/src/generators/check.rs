use serde::Serialize;

use super::Generator;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct AssumptionReport {
    pub convex_ok: bool,
    /// Numerical evidence that `U'(0⁺) = -∞`.
    pub barrier_ok: bool,
    pub ru2_monotone_ok: bool,
    /// Samples `(r, q_U(r))` with `q_U = -r U'''/U''`.
    pub q_values: Vec<(f64, f64)>,
    pub big_q_estimate: f64,
    pub admissible: bool,
    /// One line per failed condition.
    pub failures: Vec<String>,
}

/// Interior grid: log-spaced towards both endpoints so each end is resolved.
fn interior_grid(l: f64, n: usize) -> Vec<f64> {
    let half = n / 2;
    let mut pts = Vec::with_capacity(n);
    for k in 0..half {
        let t = k as f64 / (half - 1) as f64;
        pts.push(l * 10f64.powf(-8.0 + t * (8.0 - 2f64.log10())));
    }
    for k in 0..(n - half) {
        let t = k as f64 / (n - half - 1) as f64;
        let gap = 10f64.powf(-2f64.log10() - t * (6.0 - 2f64.log10()));
        pts.push(l * (1.0 - gap));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

impl Generator {
    /// Samples convexity, the barrier at 0, monotonicity of `r U''(r)` and `q_U`.
    pub fn check_assumptions(&self, grid_size: usize) -> Result<AssumptionReport> {
        if grid_size < 16 {
            return Err(Error::invalid(format!(
                "grid_size must be at least 16, got {grid_size}"
            )));
        }
        let l = self.domain_length();
        let grid = interior_grid(l, grid_size);
        let mut failures = Vec::new();

        let convex_ok = grid.iter().all(|&r| {
            let s = self.raw_second(r);
            s > 0.0 && !s.is_nan()
        });
        if !convex_ok {
            failures.push("U'' is not positive on the interior grid".to_string());
        }

        // Divergence test along r = a 2^-k: strictly decreasing, and the drop over
        // k in [256, 512] must not be negligible next to the drop over [128, 256]
        // (a convergent power-law tail shrinks it by ~2^-128γ).
        let primes: Vec<f64> = (0..=512).map(|k| self.raw_prime(l * 2f64.powi(-k))).collect();
        let decreasing = primes.windows(2).all(|w| w[1] < w[0]);
        let d_lo = primes[128] - primes[256];
        let d_hi = primes[256] - primes[512];
        let barrier_ok = decreasing && d_hi.is_finite() && d_hi >= 0.5 * d_lo;
        if !barrier_ok {
            failures.push(format!("U'(0+) appears finite: U'(a 2^-512) = {}", primes[512]));
        }

        let ru2: Vec<f64> = grid.iter().map(|&r| r * self.raw_second(r)).collect();
        let ru2_monotone_ok = ru2.windows(2).all(|w| w[1] >= w[0] - 1e-10 * w[0].abs().max(1e-300));
        if !ru2_monotone_ok {
            failures.push("r U''(r) is not non-decreasing".to_string());
        }

        let mut q_values = Vec::with_capacity(grid.len());
        for &r in &grid {
            let h = 1e-4 * r.min(l - r);
            if h <= 0.0 {
                continue;
            }
            let third = (self.raw_second(r + h) - self.raw_second(r - h)) / (2.0 * h);
            let q = -r * third / self.raw_second(r);
            if q.is_finite() {
                q_values.push((r, q));
            }
        }
        let big_q_estimate = q_values.iter().map(|&(_, q)| q).fold(f64::NEG_INFINITY, f64::max);

        Ok(AssumptionReport {
            convex_ok,
            barrier_ok,
            ru2_monotone_ok,
            q_values,
            big_q_estimate,
            admissible: convex_ok && barrier_ok && ru2_monotone_ok,
            failures,
        })
    }
}
