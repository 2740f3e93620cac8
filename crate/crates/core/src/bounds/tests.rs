use std::f64::consts::{E, LN_2};

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use super::*;
use crate::polytope::Matrix;

fn h(v: &[f64]) -> Histogram {
    Histogram::new(v.to_vec()).unwrap()
}

fn gen(s: &str) -> Generator {
    s.parse().unwrap()
}

fn e1() -> (CostMatrix, Histogram, Histogram) {
    let c = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    (c, h(&[0.5, 0.5]), h(&[0.5, 0.5]))
}

fn preset(seed: u64) -> (CostMatrix, Histogram, Histogram) {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let c = Matrix::from_fn(3, 3, |_, _| rng.gen::<f64>());
    (c, h(&[0.1, 0.2, 0.7]), h(&[0.3, 0.4, 0.3]))
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn e1_kl_report() {
    let (c, x, y) = e1();
    let r = full_report(&Generator::kl(), &c, &x, &y).unwrap();
    assert!((r.delta - 1.0).abs() < 1e-12);
    assert!((r.radius - LN_2).abs() < 1e-14);
    assert!((r.r_u - 2.0 / 3.0).abs() < 1e-13);
    assert_eq!(r.nu_u, 2.0);
    assert_eq!(r.nu_source, NuSource::Analytic);
    assert!((r.eps_max - 1.0 / (1.0 + LN_2)).abs() < 1e-14);
    assert!((r.eps_max - 0.59061).abs() < 1e-5);
    assert!(rel(r.bound_at(0.5).unwrap(), 2.0 / E) < 1e-14);
    assert!(rel(r.weed_at(0.5).unwrap().unwrap(), 2.0 / E) < 1e-14);
    assert!(matches!(r.bound_at(0.6), Err(Error::EpsilonOutOfInterval { .. })));
    assert!((r.naive_at(0.1) - 0.1 * LN_2).abs() < 1e-16);
    let json = serde_json::to_value(&r).unwrap();
    for k in ["delta", "radius", "r_u", "nu_u", "u_prime_one", "eps_max"] {
        assert!(json.get(k).is_some(), "{k}");
    }
}

#[test]
fn r_u_examples() {
    for d in [1e-6, 0.1, LN_2, 1.0, 5.0, 30.0, 200.0] {
        let root = r_u_root(&Generator::kl(), d).unwrap();
        let want = 1.0 / (1.0 + d.exp());
        assert!(rel(root.complement, want) < 1e-12, "{d}");
    }
    assert!((r_u(&gen("fermi:3"), 1e-9).unwrap() - 0.5).abs() < 1e-9);
    for g in ["gamma:1/2", "gamma:1/4", "erfc:2", "fermi:5"] {
        let g = gen(g);
        let r = r_u(&g, 1.0).unwrap();
        let resid = g.u_prime(r).unwrap() - g.u_prime(1.0 - r).unwrap() - 1.0;
        assert!(resid.abs() <= 1e-10, "{g}: {resid}");
        assert!(r > 0.5 && r < 1.0);
    }
    assert!(r_u(&Generator::kl(), 0.0).is_err());
    assert!(r_u(&gen("qlog:0.5"), 1.0).is_err());
}

#[test]
fn r_u_scaled_identity() {
    let g = gen("gamma:1/3").domain_scale(4.0, 1.0).unwrap();
    let r = r_u(&g, 2.0).unwrap();
    let resid = g.u_prime(r).unwrap() - g.u_prime(4.0 - r).unwrap() - 0.5;
    assert!(resid.abs() < 1e-10);
    assert!(r > 2.0 && r < 4.0);
}

#[test]
fn nu_examples() {
    let kl = Generator::kl();
    for d in [0.1, LN_2, 3.0] {
        let root = r_u_root(&kl, d).unwrap();
        assert_eq!(nu_u_estimate(&kl, root).unwrap().value, 2.0);
        assert!((nu_u_numeric(&kl, root).unwrap().value - 2.0).abs() < 1e-9);
    }
    for g in [
        "gamma:1",
        "gamma:1/2",
        "gamma:1/3",
        "gamma:1/4",
        "erfc:2",
        "erfc:5",
        "fermi:2",
        "fermi:5",
    ] {
        let g = gen(g);
        for d in [0.2, LN_2, 2.0] {
            let root = r_u_root(&g, d).unwrap();
            let nu = nu_u_estimate(&g, root).unwrap();
            assert!(nu.value >= g.u1_prime(), "{g}");
            assert!(nu.value.is_finite());
        }
    }
}

#[test]
fn nu_dominates_audit_grid() {
    let (_, x, y) = e1();
    for g in ["gamma:1/2", "gamma:1/4", "erfc:3", "fermi:2"] {
        let g = gen(g);
        let d = crate::exact::divergence_radius(&g, &x, &y).unwrap();
        let root = r_u_root(&g, d).unwrap();
        let nu = nu_u_estimate(&g, root).unwrap().value;
        let n = 100_000;
        for k in 1..=n {
            let r = root.r * k as f64 / n as f64;
            let v = g.u_prime(1.0 - r).unwrap() + r * g.u_second(r).unwrap();
            assert!(v <= nu + 1e-12 * nu.abs().max(1.0), "{g} r={r}: {v} > {nu}");
        }
    }
}

#[test]
fn interval_examples() {
    assert!((epsilon_interval(1.0, LN_2, 2.0 / 3.0, 2.0, 1.0, 1.0) - 0.590_616_109_149_641_2).abs() < 1e-12);
    assert_eq!(epsilon_interval(f64::INFINITY, 1.0, 0.7, 2.0, 1.0, 1.0), f64::INFINITY);
    let big = 600.0;
    let r = r_u(&Generator::kl(), big).unwrap();
    assert!(epsilon_interval(1.0, big, r, 2.0, 1.0, 1.0) < 2e-3);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
    for _ in 0..50 {
        let (delta, d) = (rng.gen_range(0.01..1.0), rng.gen_range(0.05..4.0));
        let r = r_u(&Generator::kl(), d).unwrap();
        let want = delta / (1.0 + d);
        assert!(rel(epsilon_interval(delta, d, r, 2.0, 1.0, 1.0), want) < 1e-14);
    }
}

#[test]
fn kl_bound_matches_closed_form() {
    let kl = Generator::kl();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (delta, d) = (rng.gen_range(0.01..1.0), rng.gen_range(0.05..4.0));
        let eps = rng.gen_range(0.02..1.0) * delta / (1.0 + d);
        let a = theorem_bound(&kl, delta, d, 2.0, eps).unwrap();
        let b = weed_bound(delta, d, eps).unwrap();
        worst = worst.max(rel(a, b));
    }
    assert!(worst <= 1e-12, "{worst}");
    assert!(weed_bound(1.0, LN_2, 0.7).is_err());
    assert_eq!(weed_bound(1.0, LN_2, 1e-3).unwrap(), 0.0);
}

#[test]
fn gamma_bound_beats_kl_at_small_eps() {
    let (c, x, y) = e1();
    let kl = full_report(&Generator::kl(), &c, &x, &y).unwrap();
    let gm = full_report(&gen("gamma:1/2"), &c, &x, &y).unwrap();
    let eps = 0.5 * kl.eps_max.min(gm.eps_max);
    for k in 0..5 {
        let e = eps / 2f64.powi(k);
        assert!(gm.bound_eval(e).unwrap().ln_value < kl.bound_eval(e).unwrap().ln_value);
    }
}

#[test]
fn underflow_is_flagged() {
    let (c, x, y) = e1();
    let r = full_report(&Generator::kl(), &c, &x, &y).unwrap();
    let b = r.bound_eval(1e-3).unwrap();
    assert!(b.clamped && b.value == 0.0);
    assert!((b.ln_value - (-1000.0 + LN_2 + 1.0)).abs() < 1e-9);
    assert!(!r.bound_eval(0.3).unwrap().clamped);
}

#[test]
fn naive_examples() {
    assert_eq!(naive_bound(0.0, 0.3), 0.0);
    assert!((naive_bound(LN_2, 0.1) - 0.069_314_718_055_994_53).abs() < 1e-17);
}

#[test]
fn report_rejections() {
    let (_, x, y) = e1();
    let flat = Matrix::new(2, 2, vec![1.0; 4]).unwrap();
    let err = full_report(&Generator::kl(), &flat, &x, &y).unwrap_err();
    assert!(matches!(err, Error::Assumption(ref m) if m.contains("Π(x,y) ≠ argmin")));
    let (c, ..) = e1();
    assert!(matches!(
        full_report(&gen("qlog:2"), &c, &x, &y),
        Err(Error::NotAdmissible(_))
    ));
    let scaled = gen("scale(kl,2,1)");
    assert!(full_report(&scaled, &c, &x, &y).is_err());
}

#[test]
fn preset_report_is_well_formed() {
    for seed in 0..5 {
        let (c, x, y) = preset(seed);
        for g in ["kl", "gamma:1/2", "erfc:2", "fermi:2"] {
            let r = full_report(&gen(g), &c, &x, &y).unwrap();
            assert!(r.delta > 0.0 && r.eps_max > 0.0);
            assert!(r.nu_u >= r.u_prime_one);
            assert!(r.r_u >= 0.5 && r.r_u < 1.0);
        }
    }
}

#[test]
fn affine_normalization_leaves_bound_unchanged() {
    let (c, x, y) = preset(1);
    for base in ["kl", "gamma:1/2", "fermi:3"] {
        let g = gen(base);
        let r0 = full_report(&g, &c, &x, &y).unwrap();
        for (mu0, mu1) in [(0.3, -2.0), (-1.0, 5.0)] {
            let w = g.affine(1.0, mu0, mu1).unwrap();
            let r1 = full_report(&w, &c, &x, &y).unwrap();
            assert!((r1.delta - r0.delta).abs() < 1e-14);
            assert!((r1.radius - r0.radius).abs() < 1e-10);
            assert!((r1.r_u - r0.r_u).abs() < 1e-10);
            assert!((r1.nu_u - (r0.nu_u + mu1)).abs() < 1e-9, "{base}");
            assert!(rel(r1.eps_max, r0.eps_max) < 1e-10);
            for f in [0.2, 0.6, 1.0] {
                let e = f * r0.eps_max;
                let (a, b) = (r0.bound_at(e).unwrap(), r1.bound_at(e).unwrap());
                assert!((a - b).abs() <= 1e-10 * a.max(1e-300), "{base}: {a} {b}");
            }
        }
        let n = g.normalize().unwrap();
        let rn = full_report(&n, &c, &x, &y).unwrap();
        // Normalizing may rescale by some λ, which only reparametrizes ε.
        let lam = r0.eps_max / rn.eps_max;
        let e = 0.5 * r0.eps_max;
        assert!(rel(rn.bound_at(e / lam).unwrap(), r0.bound_at(e).unwrap()) < 1e-10);
    }
}

#[test]
fn lambda_wrap_rescales_eps() {
    let (c, x, y) = preset(2);
    for base in ["kl", "gamma:1/3", "erfc:2"] {
        let g = gen(base);
        let r0 = full_report(&g, &c, &x, &y).unwrap();
        for lam in [0.25, 3.0] {
            let w = g.affine(lam, 0.0, 0.0).unwrap();
            let r1 = full_report(&w, &c, &x, &y).unwrap();
            assert!(rel(lam * r1.eps_max, r0.eps_max) < 1e-10);
            for f in [0.1, 0.5, 1.0, 1.5] {
                let e = f * r1.eps_max;
                assert_eq!(r1.contains(e), r0.contains(lam * e), "{base} {lam} {f}");
                if r1.contains(e) && r0.contains(lam * e) {
                    let (a, b) = (r1.bound_at(e).unwrap(), r0.bound_at(lam * e).unwrap());
                    assert!((a - b).abs() <= 1e-10 * b, "{base}: {a} {b}");
                }
            }
        }
    }
}

#[test]
fn domain_scaling_invariance() {
    let (c, x, y) = preset(3);
    for base in ["kl", "gamma:1/2", "fermi:2"] {
        let g = gen(base);
        let r0 = full_report(&g, &c, &x, &y).unwrap();
        for a in [2.0, 5.0] {
            let w = g.domain_scale(a, 1.0).unwrap();
            let r1 = full_report(&w, &c, &x.scaled(a).unwrap(), &y.scaled(a).unwrap()).unwrap();
            assert!(rel(r1.eps_max, r0.eps_max) < 1e-10, "{base} {a}");
            assert!(rel(r1.delta, a * r0.delta) < 1e-12);
            assert!(rel(r1.radius, a * r0.radius) < 1e-10);
            assert!(rel(r1.r_u, a * r0.r_u) < 1e-10);
            assert!((r1.nu_u - r0.nu_u).abs() < 1e-9 * r0.nu_u.abs().max(1.0));
            // Plans, and hence errors, scale by a; so does the bound.
            let e = 0.5 * r0.eps_max;
            assert!(rel(r1.bound_at(e).unwrap(), a * r0.bound_at(e).unwrap()) < 1e-10);
        }
    }
}

#[test]
fn gamma_inverse_decays_faster_than_exponential() {
    for alpha in ["gamma:1/2", "gamma:1/3", "gamma:1/4"] {
        let g = gen(alpha);
        let mut last = 0.0;
        for k in 1..=30 {
            let tau = -(1000f64).powf(k as f64 / 30.0);
            let ratio = g.ln_e_u(tau).unwrap() / tau;
            assert!(ratio > last, "{alpha} tau={tau}");
            last = ratio;
        }
        assert!(last > 10.0);
    }
    // KL sits exactly on the exponential boundary.
    let kl = Generator::kl();
    let ratio = kl.ln_e_u(-1000.0).unwrap() / -1000.0;
    assert!((ratio - 1.001).abs() < 1e-12);
}
