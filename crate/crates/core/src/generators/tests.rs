use std::f64::consts::{E, LN_2, PI};

use proptest::prelude::*;

use super::*;

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

fn shipped() -> Vec<Generator> {
    [
        "kl",
        "gamma:1",
        "gamma:1/2",
        "gamma:1/3",
        "gamma:1/4",
        "erfc:2",
        "erfc:5",
        "fermi:2",
        "fermi:5",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect()
}

#[test]
fn kl_values() {
    let g = Generator::kl();
    assert_eq!(g.u_value(0.0).unwrap(), 0.0);
    assert_eq!(g.u_value(1.0).unwrap(), 0.0);
    assert_eq!(g.u_prime(1.0).unwrap(), 1.0);
    assert!(rel(g.u_prime((-2.0f64).exp()).unwrap(), -1.0) < 1e-15);
    assert_eq!(g.u_prime(0.0).unwrap(), f64::NEG_INFINITY);
    assert_eq!(g.u_second(0.5).unwrap(), 2.0);
    assert_eq!(g.u_second(0.25).unwrap(), 4.0);
    assert!(g.u_second(1.0).is_err());
    assert!(g.u_value(1.5).is_err());
    assert_eq!(g.e_u(1.0).unwrap(), 1.0);
    assert!(rel(g.e_u(0.0).unwrap(), 1.0 / E) < 1e-15);
    assert!(matches!(g.e_u(1.5), Err(Error::OutOfRange { .. })));
}

#[test]
fn gamma_half_values() {
    let g = Generator::incomplete_gamma(0.5).unwrap();
    // mpmath: 0.5 - Q(3/2, ln 2), matched by quadrature of U'.
    assert!(rel(g.u_value(0.5).unwrap(), -0.208_750_530_799_337_6) < 1e-13);
    assert!(rel(g.u_prime(0.5).unwrap(), 0.060_562_721_300_348_67) < 1e-13);
    assert!(rel(g.e_u(0.0).unwrap(), (-PI / 4.0).exp()) < 1e-13);
    assert!(rel(g.e_u(0.0).unwrap(), g.e_u_by_bisection(0.0).unwrap()) < 1e-12);
    let g3 = Generator::incomplete_gamma(1.0 / 3.0).unwrap();
    assert!(rel(g3.u_value(0.2).unwrap(), -0.104_300_759_740_102_6) < 1e-12);
}

#[test]
fn gamma_one_is_kl() {
    let g = Generator::incomplete_gamma(1.0).unwrap();
    let kl = Generator::kl();
    for k in 1..40 {
        let r = k as f64 / 40.0;
        assert!((g.u_value(r).unwrap() - kl.u_value(r).unwrap()).abs() < 1e-14);
        assert!(rel(g.u_prime(r).unwrap(), kl.u_prime(r).unwrap()) < 1e-13);
    }
}

#[test]
fn erfc_values_match_quadrature() {
    // ∫₀^r H(t/a) dt by mpmath quadrature.
    let cases = [
        (2.0, 0.5, -0.898_807_877_788_607_3),
        (3.0, 0.9, -1.475_134_831_616_101_5),
        (2.0, 1.0, -std::f64::consts::FRAC_2_SQRT_PI),
    ];
    for (a, r, want) in cases {
        let g = Generator::erfc_scaled(a).unwrap();
        assert!(rel(g.u_value(r).unwrap(), want) < 1e-12, "a={a} r={r}");
    }
    let g = Generator::erfc_scaled(2.0).unwrap();
    assert!(rel(g.u_prime(0.5).unwrap(), -0.953_872_552_408_939_7) < 1e-13);
    assert_eq!(g.u_prime(1.0).unwrap(), 0.0);
    // U''(1) = √π for a = 2, checked against a central difference of U'.
    let h = 1e-6;
    let fd = (g.u_prime(1.0).unwrap() - g.u_prime(1.0 - 2.0 * h).unwrap()) / (2.0 * h);
    let exact = g.raw_second(1.0);
    assert!(rel(exact, PI.sqrt()) < 1e-14);
    assert!(rel(fd, exact) < 1e-6);
    assert!(g.u_second(0.999).unwrap() > 0.0);
}

#[test]
fn fermi_values() {
    let g = Generator::fermi_dirac_scaled(2.0).unwrap();
    assert!(rel(g.u_value(0.5).unwrap(), -1.124_670_289_237_616_7) < 1e-14);
    let g = Generator::fermi_dirac_scaled(3.0).unwrap();
    assert!(rel(g.u_value(0.9).unwrap(), -1.832_592_906_164_680_4) < 1e-14);
    assert!(rel(g.e_u(-LN_2).unwrap(), 1.0) < 1e-15);
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(Generator::incomplete_gamma(0.0).is_err());
    assert!(Generator::incomplete_gamma(1.5).is_err());
    assert!(Generator::erfc_scaled(1.0).is_err());
    assert!(Generator::fermi_dirac_scaled(0.5).is_err());
    assert!(Generator::kl().affine(0.0, 0.0, 0.0).is_err());
    assert!(Generator::kl().domain_scale(-1.0, 1.0).is_err());
    assert!(Generator::kl().domain_scale(2.0, 3.0).is_err());
}

#[test]
fn d_u_examples() {
    let g = Generator::kl();
    assert_eq!(g.d_u(0.3, 0.3).unwrap(), 0.0);
    let want = 0.5 * LN_2 - 0.25;
    let d = g.d_u(0.5, 0.25).unwrap();
    assert!(rel(d, want) < 1e-15);
    let direct = g.u_value(0.5).unwrap() - g.u_value(0.25).unwrap() - 0.25 * g.u_prime(0.25).unwrap();
    assert!(rel(direct, want) < 1e-14);
    assert_eq!(g.d_u(0.0, 0.25).unwrap(), 0.25);
    assert_eq!(g.d_u(0.0, 0.0).unwrap(), 0.0);
    assert_eq!(g.d_u(0.1, 0.0).unwrap(), f64::INFINITY);
}

#[test]
fn bregman_divergence_examples() {
    let g = Generator::kl();
    assert_eq!(g.bregman_divergence(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
    let d = g.bregman_divergence(&[0.5, 0.5, 0.0, 0.0], &[0.25; 4]).unwrap();
    assert!(rel(d, LN_2) < 1e-15);
    assert_eq!(g.bregman_divergence(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), f64::INFINITY);
    assert!(g.bregman_divergence(&[1.0], &[0.5, 0.5]).is_err());
}

#[test]
fn affine_examples() {
    let kl = Generator::kl();
    let g = kl.affine(2.0, 0.0, 0.0).unwrap();
    assert!(rel(g.d_u(0.5, 0.25).unwrap(), 2.0 * (0.5 * LN_2 - 0.25)) < 1e-15);
    let g = kl.affine(1.0, 3.0, -5.0).unwrap();
    for i in 0..=10 {
        for j in 0..=10 {
            let (r, r0) = (i as f64 / 10.0, j as f64 / 10.0);
            assert_eq!(g.d_u(r, r0).unwrap(), kl.d_u(r, r0).unwrap());
        }
    }
    let g = kl.affine(1.0, 0.0, -1.0).unwrap();
    assert_eq!(g.u_prime(1.0).unwrap(), 0.0);
    assert_eq!(g.u1_prime(), 0.0);
}

#[test]
fn domain_scale_examples() {
    let kl = Generator::kl();
    let same = kl.domain_scale(1.0, 1.0).unwrap();
    for k in 1..=10 {
        let r = k as f64 / 10.0;
        assert_eq!(same.u_value(r).unwrap(), kl.u_value(r).unwrap());
        assert_eq!(same.u_prime(r).unwrap(), kl.u_prime(r).unwrap());
    }
    let two = kl.domain_scale(2.0, 1.0).unwrap();
    assert_eq!(two.domain_length(), 2.0);
    assert_eq!(two.u_prime(2.0).unwrap(), 1.0);

    let f = Generator::fermi_dirac_scaled(2.0).unwrap();
    let f3 = f.domain_scale(3.0, 1.0).unwrap();
    for (r, r0) in [(0.1, 0.7), (0.5, 0.25), (0.9, 0.05)] {
        let lhs = f3.d_u(3.0 * r, 3.0 * r0).unwrap();
        assert!(rel(lhs, 3.0 * f.d_u(r, r0).unwrap()) < 1e-12);
    }
}

#[test]
fn normalize_examples() {
    let kl = Generator::kl();
    assert_eq!(kl.normalize().unwrap(), kl);
    let g = Generator::incomplete_gamma(0.5).unwrap();
    assert_eq!(g.normalize().unwrap(), g);
    let wrapped = kl.affine(2.0, 1.0, -3.0).unwrap();
    let n = wrapped.normalize().unwrap();
    for k in 0..=20 {
        let r = k as f64 / 20.0;
        assert!((n.u_value(r).unwrap() - kl.u_value(r).unwrap()).abs() < 1e-14);
    }
    assert!((n.u1_prime() - 1.0).abs() < 1e-14);
    let f = Generator::fermi_dirac_scaled(2.0).unwrap().normalize().unwrap();
    assert!(f.u_value(0.0).unwrap().abs() < 1e-14);
    assert!(f.u_value(1.0).unwrap().abs() < 1e-14);
    assert!((f.u1_prime() - 1.0).abs() < 1e-14);
}

#[test]
fn extension_beyond_domain() {
    let kl = Generator::kl();
    assert!(rel(kl.extended_value(2.0).unwrap(), 2.0 * LN_2) < 1e-15);
    assert_eq!(kl.extended_value(1.0).unwrap(), 0.0);
    let g = Generator::incomplete_gamma(0.5).unwrap();
    let h = 1e-7;
    let left = (g.extended_value(1.0).unwrap() - g.extended_value(1.0 - h).unwrap()) / h;
    let right = (g.extended_value(1.0 + h).unwrap() - g.extended_value(1.0).unwrap()) / h;
    // U'' blows up like s^(-1/2) at the junction, so the left quotient is off by ~√h.
    assert!((left - 1.0).abs() < 5e-4, "left {left}");
    assert!((right - 1.0).abs() < 1e-6, "right {right}");
    for tau in [1.0, 1.5, 4.0] {
        let r = g.ext_e(tau);
        assert!(rel(g.extended_prime(r).unwrap(), tau) < 1e-14);
    }
}

#[test]
fn assumption_checks() {
    for g in shipped() {
        let rep = g.check_assumptions(256).unwrap();
        assert!(rep.admissible, "{g}: {:?}", rep.failures);
    }
    let kl = Generator::kl().check_assumptions(64).unwrap();
    assert!(kl.q_values.iter().all(|&(_, q)| (q - 1.0).abs() < 1e-6));
    assert!((kl.big_q_estimate - 1.0).abs() < 1e-6);
    let q05 = Generator::qlog(0.5).unwrap().check_assumptions(64).unwrap();
    assert!(!q05.barrier_ok && q05.ru2_monotone_ok && !q05.admissible);
    let q2 = Generator::qlog(2.0).unwrap().check_assumptions(64).unwrap();
    assert!(q2.barrier_ok && !q2.ru2_monotone_ok && !q2.admissible);
    assert!(Generator::qlog(1.0).unwrap().check_assumptions(64).unwrap().admissible);
    assert!(Generator::kl().check_assumptions(8).is_err());
}

#[test]
fn qlog_is_rejected_for_bounds_unless_one() {
    assert!(Generator::qlog(1.0).unwrap().require_admissible().is_ok());
    assert!(Generator::qlog(0.5).unwrap().require_admissible().is_err());
    assert!(Generator::qlog(2.0)
        .unwrap()
        .affine(1.0, 0.0, 0.0)
        .unwrap()
        .require_admissible()
        .is_err());
}

#[test]
fn spec_strings_round_trip() {
    for s in [
        "kl",
        "gamma:0.5",
        "erfc:2",
        "fermi:3",
        "qlog:2",
        "affine(kl,2,1,-3)",
        "scale(fermi:2,3,1)",
        "scale(affine(gamma:0.25,1,0,0.5),2,1)",
    ] {
        let g: Generator = s.parse().unwrap();
        assert_eq!(g.to_string(), s);
    }
    let g: Generator = "gamma:1/3".parse().unwrap();
    assert_eq!(g, Generator::incomplete_gamma(1.0 / 3.0).unwrap());
    for bad in ["", "kl:2", "gamma", "gamma:x", "nope:1", "affine(kl,1)", "scale(kl,2,1"] {
        assert!(bad.parse::<Generator>().is_err(), "{bad}");
    }
}

#[test]
fn derivative_consistency() {
    let h = 1e-6;
    for g in shipped() {
        let a = g.domain_length();
        for k in 1..=50 {
            let r = a * (0.01 + 0.98 * k as f64 / 50.0);
            let fd1 = (g.u_value(r + h).unwrap() - g.u_value(r - h).unwrap()) / (2.0 * h);
            let d1 = g.u_prime(r).unwrap();
            assert!((fd1 - d1).abs() <= 1e-5 * d1.abs().max(1.0), "{g} U' at {r}");
            if r + h < a {
                let fd2 = (g.u_prime(r + h).unwrap() - g.u_prime(r - h).unwrap()) / (2.0 * h);
                let d2 = g.u_second(r).unwrap();
                assert!(rel(fd2, d2) <= 1e-5, "{g} U'' at {r}");
            }
        }
    }
}

#[test]
fn inverse_consistency() {
    for g in shipped() {
        let a = g.domain_length();
        for k in 0..=80 {
            let r = a * 10f64.powf(-8.0 + 8.0 * k as f64 / 80.0);
            let back = g.e_u(g.u_prime(r).unwrap()).unwrap();
            assert!(rel(back, r) < 1e-10, "{g}: e(U'({r})) = {back}");
            let ln_back = g.ln_e_u(g.u_prime(r).unwrap()).unwrap();
            assert!((ln_back - r.ln()).abs() < 1e-10, "{g}: ln e at {r}");
        }
    }
}

#[test]
fn ext_e_prime_matches_finite_difference() {
    for g in shipped() {
        for tau in [-30.0, -3.0, -0.5, 0.3, g.u1_prime() - 0.05] {
            let tau = tau.min(g.u1_prime() - 0.05);
            let r = g.ext_e(tau);
            if r < 1e-300 {
                assert_eq!(g.ext_e_prime(tau), 0.0);
                continue;
            }
            let want = 1.0 / g.raw_second(r);
            assert!(rel(g.ext_e_prime(tau), want) < 1e-6, "{g} at {tau}");
        }
        let tau = g.u1_prime() + 0.5;
        let h = 1e-6;
        let fd = (g.ext_e(tau + h) - g.ext_e(tau - h)) / (2.0 * h);
        assert!(rel(g.ext_e_prime(tau), fd) < 1e-8, "{g} tail");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn d_u_nonnegative(r in 0.0f64..=1.0, r0 in 1e-9f64..=1.0, k in 0usize..9) {
        let g = &shipped()[k];
        let d = g.d_u(r, r0).unwrap();
        prop_assert!(d >= 0.0);
        if (r - r0).abs() > 1e-6 {
            prop_assert!(d > 0.0);
        }
    }

    #[test]
    fn affine_scales_divergence(
        r in 0.0f64..=1.0,
        r0 in 1e-6f64..=1.0,
        lambda in 0.1f64..10.0,
        mu0 in -5.0f64..5.0,
        mu1 in -5.0f64..5.0,
        k in 0usize..9,
    ) {
        let g = &shipped()[k];
        let w = g.affine(lambda, mu0, mu1).unwrap();
        let lhs = w.d_u(r, r0).unwrap();
        let rhs = lambda * g.d_u(r, r0).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300));
    }
}
