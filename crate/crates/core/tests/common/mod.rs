//! Checks shared by the property tests and the acceptance runner. Each returns
//! `Err` with a description of the first failure.
#![allow(dead_code)]

use bregman_ot::{Generator, Histogram};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub type Check = Result<String, String>;

pub const SHIPPED: [&str; 13] = [
    "kl",
    "gamma:1",
    "gamma:1/2",
    "gamma:1/3",
    "gamma:1/4",
    "erfc:2",
    "erfc:3",
    "erfc:4",
    "erfc:5",
    "fermi:2",
    "fermi:3",
    "fermi:4",
    "fermi:5",
];

pub fn gen(s: &str) -> Generator {
    s.parse().unwrap()
}

pub fn shipped() -> Vec<Generator> {
    SHIPPED.iter().map(|s| gen(s)).collect()
}

pub fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

pub fn random_hist(rng: &mut Xoshiro256PlusPlus, n: usize) -> Histogram {
    Histogram::normalized((0..n).map(|_| rng.gen_range(0.05..1.0)).collect()).unwrap()
}

/// `|h U'(h)|` at `h = 2^-40` is below 1e-6, and the sequence shrinks from there on.
pub fn h_uprime_vanishes(g: &Generator) -> Check {
    let a = g.domain_length();
    let mut last = f64::INFINITY;
    for k in 40..=200 {
        let h = a * 2f64.powi(-k);
        let v = (h * g.u_prime(h).map_err(|e| e.to_string())?).abs();
        if k == 40 && v >= 1e-6 {
            return Err(format!("{g}: |h U'(h)| = {v:e} at 2^-40"));
        }
        if v > last {
            return Err(format!("{g}: |h U'(h)| grew at 2^-{k}"));
        }
        last = v;
    }
    Ok(format!("{g}: {last:.1e} at 2^-200"))
}

/// `U((1-t)r + ts) ≥ (1-t)U(r) + tU(s) + rU(1-t) + sU(t)` on a 17³ grid, for the normalized generator.
pub fn grid_inequality(g: &Generator) -> Check {
    let n = g.normalize().map_err(|e| e.to_string())?;
    let u = |v: f64| n.u_value(v).unwrap();
    let mut worst = f64::INFINITY;
    for i in 0..=16 {
        for j in 0..=16 {
            for k in 0..=16 {
                let (r, s, t) = (i as f64 / 16.0, j as f64 / 16.0, k as f64 / 16.0);
                let slack = u((1.0 - t) * r + t * s) - (1.0 - t) * u(r) - t * u(s) - r * u(1.0 - t) - s * u(t);
                worst = worst.min(slack);
            }
        }
    }
    if worst >= -1e-12 {
        Ok(format!("{g}: min slack {worst:.2e}"))
    } else {
        Err(format!("{g}: slack {worst:e}"))
    }
}

/// `r ↦ Dr - U(r) - U(1-r)` strictly increases on a 64-point grid of `(0, R]`.
pub fn monotone_before_root(g: &Generator) -> Check {
    for d in [0.1, 1.0, 5.0] {
        let r_root = bregman_ot::bounds::r_u(g, d).map_err(|e| e.to_string())?;
        let f = |r: f64| d * r - g.u_value(r).unwrap() - g.u_value(1.0 - r).unwrap();
        let mut prev = f(r_root / 64.0);
        for k in 2..=64 {
            let v = f(r_root * k as f64 / 64.0);
            if v.partial_cmp(&prev) != Some(std::cmp::Ordering::Greater) {
                return Err(format!("{g}: D = {d}, not increasing at point {k}"));
            }
            prev = v;
        }
    }
    Ok(format!("{g}: increasing for D in {{0.1, 1, 5}}"))
}

/// `d` of the wrapped generator equals `λ d` on a 32×32 grid.
pub fn affine_invariance(g: &Generator) -> Check {
    let mut worst = 0.0f64;
    for (lam, mu0, mu1) in [(2.0, 1.0, -3.0), (0.3, -0.5, 4.0)] {
        let w = g.affine(lam, mu0, mu1).map_err(|e| e.to_string())?;
        for i in 0..32 {
            for j in 0..32 {
                let (r, r0) = (i as f64 / 31.0, (j as f64 + 0.5) / 32.0);
                let base = g.d_u(r, r0).unwrap();
                let got = w.d_u(r, r0).unwrap();
                let err = (got - lam * base).abs() / (lam * base).abs().max(1e-300);
                if base > 1e-14 {
                    worst = worst.max(err);
                }
            }
        }
    }
    if worst <= 1e-12 {
        Ok(format!("{g}: max rel {worst:.1e}"))
    } else {
        Err(format!("{g}: max rel {worst:e}"))
    }
}

/// Sample standard deviation of `D(ã z, ã w) / D(a z, a w)` over random pairs.
pub fn scaling_ratio_spread(g: &Generator, pairs: usize, seed: u64) -> (f64, f64) {
    let (a, at) = (0.5, 0.25);
    let mut rng = rng(seed);
    let ratios: Vec<f64> = (0..pairs)
        .map(|_| {
            let z = random_hist(&mut rng, 4);
            let w = random_hist(&mut rng, 4);
            let scale = |h: &Histogram, s: f64| h.values().iter().map(|v| v * s).collect::<Vec<_>>();
            g.bregman_divergence(&scale(&z, at), &scale(&w, at)).unwrap()
                / g.bregman_divergence(&scale(&z, a), &scale(&w, a)).unwrap()
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / pairs as f64;
    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (pairs as f64 - 1.0);
    (mean, var.sqrt())
}
