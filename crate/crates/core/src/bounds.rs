//! The error bound `Δ · e_U(-Δ/ε + 𝔇 + ν)` and its ingredients.
//!
//! For a generator on `[0, a]` every quantity is taken in its scaled form:
//! `R` solves `U'(R) - U'(a - R) = 𝔇/a`, `ν = sup_{r ∈ (0, R]} U'(a - r) + r U''(r)`,
//! the bound is `(Δ/a) e_U(-Δ/(aε) + 𝔇/a + ν)` and the valid interval ends at
//! `min(ΔR/(a𝔇), (Δ/a)/(𝔇/a + ν - U'(a)))`. With `a = 1` these are the plain formulas.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{check_shapes, gap_from_vertices, radius_from_vertices};
use crate::generators::{Family, Generator};
use crate::polytope::{enumerate_vertices, CostMatrix, Histogram};

/// Points of the log-spaced grid used for `ν`.
pub const NU_GRID: usize = 2048;
/// Smallest relative grid point `r/R` of that grid.
const NU_GRID_FLOOR: f64 = 1e-200;
/// Bounds below this are reported as 0 and flagged.
pub const UNDERFLOW: f64 = 1e-300;
/// Relative slack when testing `ε ≤ eps_max`.
const INTERVAL_SLACK: f64 = 1e-12;

/// `R_U` together with its complement `a - R_U`, which carries full precision when `R` is close to `a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RootR {
    pub r: f64,
    pub complement: f64,
}

fn root_gap(gen: &Generator, u: f64, target: f64) -> f64 {
    let a = gen.domain_length();
    gen.raw_prime(a - u) - gen.raw_prime(u) - target
}

/// Solves `U'(R) - U'(a - R) = radius/a` for `R ∈ (a/2, a)`.
pub fn r_u_root(gen: &Generator, radius: f64) -> Result<RootR> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid(format!(
            "radius must be positive and finite, got {radius}"
        )));
    }
    gen.require_admissible()?;
    let a = gen.domain_length();
    let target = radius / a;
    // The gap decreases in the complement u = a - R; bisect on ln u.
    let mut lo = (a * 1e-300).ln();
    let mut hi = (0.5 * a).ln();
    if root_gap(gen, lo.exp(), target) <= 0.0 {
        return Err(Error::invalid(format!(
            "radius {radius} too large: R is indistinguishable from a = {a}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if root_gap(gen, mid.exp(), target) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let complement = (0.5 * (lo + hi)).exp();
    Ok(RootR {
        r: a - complement,
        complement,
    })
}

/// `R_U(x, y)` for the given radius `𝔇_U(x, y)`.
pub fn r_u(gen: &Generator, radius: f64) -> Result<f64> {
    Ok(r_u_root(gen, radius)?.r)
}

/// Which candidate attains `ν`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NuSource {
    Analytic,
    LimitAtZero,
    Interior,
    Endpoint,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NuEstimate {
    pub value: f64,
    /// `U'(a) + lim_{r↓0} r U''(r)`.
    pub limit: f64,
    /// Best refined grid value and where it sits.
    pub interior: f64,
    pub interior_at: f64,
    /// `g(R)`.
    pub endpoint: f64,
    pub source: NuSource,
}

/// `g(r) = U'(a - r) + r U''(r)` at `r = R e^t`, with `a - r` formed from the complement.
fn nu_integrand(gen: &Generator, root: RootR, t: f64) -> f64 {
    let r = root.r * t.exp();
    let rest = root.complement + root.r * (-t.exp_m1());
    let v = gen.raw_prime(rest) + r * gen.raw_second(r);
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (hi - lo).abs() <= 1e-15 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Numerical `ν` from a root with known complement; no analytic shortcut.
pub fn nu_u_numeric(gen: &Generator, root: RootR) -> Result<NuEstimate> {
    gen.require_admissible()?;
    let a = gen.domain_length();
    if !(root.r >= 0.5 * a * (1.0 - 1e-12) && root.complement > 0.0) {
        return Err(Error::invalid(format!("R = {} must lie in [a/2, a)", root.r)));
    }
    let limit = gen.u1_prime() + gen.r_second_limit_at_zero();
    let lo = NU_GRID_FLOOR.ln();
    let at = |k: usize| lo * (1.0 - k as f64 / (NU_GRID - 1) as f64);
    let g = |t: f64| nu_integrand(gen, root, t);
    let (mut best_k, mut best) = (0, f64::NEG_INFINITY);
    for k in 0..NU_GRID {
        let v = g(at(k));
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let left = at(best_k.saturating_sub(1));
    let right = at((best_k + 1).min(NU_GRID - 1));
    let (t, refined) = golden_max(g, left, right);
    let (interior, interior_at) = if refined > best {
        (refined, root.r * t.exp())
    } else {
        (best, root.r * at(best_k).exp())
    };
    let endpoint = nu_integrand(gen, root, 0.0);
    let mut value = limit;
    let mut source = NuSource::LimitAtZero;
    if interior > value {
        value = interior;
        source = NuSource::Interior;
    }
    if endpoint >= value {
        value = endpoint;
        source = NuSource::Endpoint;
    }
    Ok(NuEstimate {
        value,
        limit,
        interior,
        interior_at,
        endpoint,
        source,
    })
}

/// `ν` with the exact value 2 for KL.
pub fn nu_u_estimate(gen: &Generator, root: RootR) -> Result<NuEstimate> {
    let mut est = nu_u_numeric(gen, root)?;
    if *gen.family() == Family::Kl {
        est.value = 2.0;
        est.source = NuSource::Analytic;
    }
    Ok(est)
}

/// `ν_U(x, y)` given `R_U(x, y)`.
pub fn nu_u(gen: &Generator, r_u: f64) -> Result<f64> {
    let root = RootR {
        r: r_u,
        complement: gen.domain_length() - r_u,
    };
    Ok(nu_u_estimate(gen, root)?.value)
}

/// Right end of the valid ε-interval; `+∞` when `delta` is infinite.
pub fn epsilon_interval(delta: f64, radius: f64, r_u: f64, nu_u: f64, u_prime_one: f64, a: f64) -> f64 {
    if delta.is_infinite() {
        return f64::INFINITY;
    }
    let first = if radius > 0.0 {
        delta * r_u / (a * radius)
    } else {
        f64::INFINITY
    };
    let second = (delta / a) / (radius / a + nu_u - u_prime_one);
    first.min(second)
}

/// A bound value that stays meaningful after underflow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundEval {
    pub value: f64,
    pub ln_value: f64,
    /// Set when the value fell below [`UNDERFLOW`] and was reported as 0.
    pub clamped: bool,
}

impl BoundEval {
    fn from_ln(ln_value: f64) -> Self {
        let value = ln_value.exp();
        if value < UNDERFLOW {
            BoundEval {
                value: 0.0,
                ln_value,
                clamped: true,
            }
        } else {
            BoundEval {
                value,
                ln_value,
                clamped: false,
            }
        }
    }
}

fn in_interval(eps: f64, eps_max: f64) -> Result<()> {
    if eps > 0.0 && eps <= eps_max * (1.0 + INTERVAL_SLACK) {
        Ok(())
    } else {
        Err(Error::EpsilonOutOfInterval { eps, eps_max })
    }
}

fn bound_from_parts(gen: &Generator, delta: f64, radius: f64, nu: f64, eps: f64) -> Result<BoundEval> {
    let a = gen.domain_length();
    let tau = (-delta / (a * eps) + radius / a + nu).min(gen.u1_prime());
    Ok(BoundEval::from_ln((delta / a).ln() + gen.ln_e_u(tau)?))
}

/// Evaluates the bound with underflow information; checks `ε` against the interval.
pub fn theorem_bound_eval(gen: &Generator, delta: f64, radius: f64, nu_u: f64, eps: f64) -> Result<BoundEval> {
    let root = r_u_root(gen, radius)?;
    let eps_max = epsilon_interval(delta, radius, root.r, nu_u, gen.u1_prime(), gen.domain_length());
    in_interval(eps, eps_max)?;
    bound_from_parts(gen, delta, radius, nu_u, eps)
}

/// `Δ e_U(-Δ/ε + 𝔇 + ν)` (scaled form for generators on `[0, a]`).
pub fn theorem_bound(gen: &Generator, delta: f64, radius: f64, nu_u: f64, eps: f64) -> Result<f64> {
    Ok(theorem_bound_eval(gen, delta, radius, nu_u, eps)?.value)
}

/// The KL closed form `Δ exp(-Δ/ε + 𝔇 + 1)` on `ε ≤ Δ/(1 + 𝔇)`.
pub fn weed_bound(delta: f64, radius_kl: f64, eps: f64) -> Result<f64> {
    in_interval(eps, delta / (1.0 + radius_kl))?;
    Ok(delta * (-delta / eps + radius_kl + 1.0).exp())
}

/// `ε 𝔇`, valid for every `ε > 0`.
pub fn naive_bound(radius: f64, eps: f64) -> f64 {
    eps * radius
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub generator: String,
    pub delta: f64,
    pub radius: f64,
    pub r_u: f64,
    pub r_u_complement: f64,
    pub nu_u: f64,
    pub nu_source: NuSource,
    pub u_prime_one: f64,
    pub domain_length: f64,
    pub eps_max: f64,
    /// Optimal value of the unregularized problem.
    pub lp_value: f64,
    #[serde(skip_serializing)]
    gen: Generator,
}

impl BoundReport {
    pub fn contains(&self, eps: f64) -> bool {
        in_interval(eps, self.eps_max).is_ok()
    }

    pub fn bound_eval(&self, eps: f64) -> Result<BoundEval> {
        in_interval(eps, self.eps_max)?;
        bound_from_parts(&self.gen, self.delta, self.radius, self.nu_u, eps)
    }

    pub fn bound_at(&self, eps: f64) -> Result<f64> {
        Ok(self.bound_eval(eps)?.value)
    }

    pub fn naive_at(&self, eps: f64) -> f64 {
        naive_bound(self.radius, eps)
    }

    /// The KL closed form; `None` for other generators.
    pub fn weed_at(&self, eps: f64) -> Option<Result<f64>> {
        (*self.gen.family() == Family::Kl).then(|| weed_bound(self.delta, self.radius, eps))
    }

    pub fn generator(&self) -> &Generator {
        &self.gen
    }
}

/// Assembles gap, radius, `R`, `ν` and the interval for one instance.
pub fn full_report(gen: &Generator, c: &CostMatrix, x: &Histogram, y: &Histogram) -> Result<BoundReport> {
    gen.require_admissible()?;
    check_shapes(c, x, y)?;
    let a = gen.domain_length();
    if (x.total_mass() - a).abs() > 1e-12 * a {
        return Err(Error::invalid(format!(
            "data mass {} must equal the generator's domain length {a}",
            x.total_mass()
        )));
    }
    let vs = enumerate_vertices(x, y)?;
    let gap = gap_from_vertices(c, &vs, None);
    if !gap.delta.is_finite() {
        return Err(Error::Assumption(
            "Π(x,y) ≠ argmin fails: every plan is optimal for this cost".into(),
        ));
    }
    let radius = radius_from_vertices(gen, &vs, x, y)?;
    let root = r_u_root(gen, radius)?;
    let nu = nu_u_estimate(gen, root)?;
    let eps_max = epsilon_interval(gap.delta, radius, root.r, nu.value, gen.u1_prime(), a);
    Ok(BoundReport {
        generator: gen.to_string(),
        delta: gap.delta,
        radius,
        r_u: root.r,
        r_u_complement: root.complement,
        nu_u: nu.value,
        nu_source: nu.source,
        u_prime_one: gen.u1_prime(),
        domain_length: a,
        eps_max,
        lp_value: gap.best_value,
        gen: gen.clone(),
    })
}

#[cfg(test)]
mod tests;
