//! Strictly convex generator functions `U` and their Bregman calculus.
//!
//! A [`Generator`] is an immutable description of `U` on `[0, a]` together with
//! closed forms for `U`, `U'`, `U''` and the inverse derivative `e_U = (U')⁻¹`.
//! Shipped families:
//!
//! | spec string | `U'(r)` | domain |
//! |-------------|---------|--------|
//! | `kl` | `ln r + 1` | `[0, 1]` |
//! | `gamma:<α>` | `1 - (-ln r)^α / Γ(α+1)` | `[0, 1]` |
//! | `erfc:<a>` | `H(r/a)`, `H⁻¹(τ) = erfc(-τ/2)/2` | `[0, 1]` |
//! | `fermi:<a>` | `ln r - ln(a - r)` | `[0, 1]` |
//! | `qlog:<q>` | `(r^(1-q) - 1)/(1-q)` | `[0, 1]` |
//!
//! `erfc:<a>` and `fermi:<a>` are the `a`-scaled functions `a·W(r/a)` restricted
//! to the unit interval; the unscaled functions are not `C¹` up to `r = 1`, so
//! only `a > 1` is accepted. `qlog` exists to exercise the admissibility checker.
//! Wrappers `affine(...)` (`λU + μ₁r + μ₀`) and `scale(...)` (`(a/b)·U(br/a)`)
//! compose with every family.

mod check;
mod parse;
pub mod special;

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

pub use check::AssumptionReport;
pub use parse::{parse_generator, parse_number};

use special::{erfc_half_inverse, gamma_p, gamma_q, ln_gamma, ln_norm_cdf, norm_cdf};

/// Relative slack accepted when an argument sits on the right end of the domain.
const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Kl,
    IncompleteGamma {
        alpha: f64,
    },
    ErfcScaled {
        a: f64,
    },
    FermiDiracScaled {
        a: f64,
    },
    QLog {
        q: f64,
    },
    AffineWrapped {
        base: Box<Generator>,
        lambda: f64,
        mu0: f64,
        mu1: f64,
    },
    DomainScaled {
        base: Box<Generator>,
        a: f64,
        b: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    family: Family,
    domain_length: f64,
    u1_prime: f64,
    /// `Γ(α+1)` for the incomplete-gamma family.
    gamma_norm: f64,
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn finite_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

impl Generator {
    fn build(family: Family, domain_length: f64, gamma_norm: f64) -> Self {
        let mut g = Generator {
            family,
            domain_length,
            u1_prime: f64::NAN,
            gamma_norm,
        };
        g.u1_prime = g.raw_prime(domain_length);
        g
    }

    /// `U_o(r) = r ln r`, the generator of the Kullback–Leibler divergence.
    pub fn kl() -> Self {
        Self::build(Family::Kl, 1.0, 1.0)
    }

    /// `U_α(r) = r - Γ(α+1, -ln r)/Γ(α+1)` for `α ∈ (0, 1]`; `α = 1` is `r ln r`.
    pub fn incomplete_gamma(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!(
                "incomplete-gamma exponent must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(Self::build(
            Family::IncompleteGamma { alpha },
            1.0,
            ln_gamma(alpha + 1.0).exp(),
        ))
    }

    /// `a·W(r/a)` on `[0, 1]` where `W' = H` inverts `τ ↦ erfc(-τ/2)/2`.
    pub fn erfc_scaled(a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 1.0) {
            return Err(Error::invalid(format!("erfc scale must exceed 1, got {a}")));
        }
        Ok(Self::build(Family::ErfcScaled { a }, 1.0, 1.0))
    }

    /// `a·U_s(r/a)` on `[0, 1]` with `U_s(r) = r ln r + (1-r) ln(1-r)`.
    pub fn fermi_dirac_scaled(a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 1.0) {
            return Err(Error::invalid(format!("Fermi-Dirac scale must exceed 1, got {a}")));
        }
        Ok(Self::build(Family::FermiDiracScaled { a }, 1.0, 1.0))
    }

    /// Generator whose derivative is the q-logarithm.
    pub fn qlog(q: f64) -> Result<Self> {
        if !q.is_finite() {
            return Err(Error::invalid(format!("q must be finite, got {q}")));
        }
        Ok(Self::build(Family::QLog { q }, 1.0, 1.0))
    }

    /// `λU(r) + μ₁r + μ₀`. Nested affine wrappers are folded into one.
    pub fn affine(&self, lambda: f64, mu0: f64, mu1: f64) -> Result<Self> {
        finite_positive("lambda", lambda)?;
        if !(mu0.is_finite() && mu1.is_finite()) {
            return Err(Error::invalid("mu0 and mu1 must be finite"));
        }
        let (base, lambda, mu0, mu1) = match &self.family {
            Family::AffineWrapped {
                base,
                lambda: l0,
                mu0: m0,
                mu1: m1,
            } => (base.clone(), lambda * l0, lambda * m0 + mu0, lambda * m1 + mu1),
            _ => (Box::new(self.clone()), lambda, mu0, mu1),
        };
        let domain_length = base.domain_length;
        Ok(Self::build(
            Family::AffineWrapped { base, lambda, mu0, mu1 },
            domain_length,
            1.0,
        ))
    }

    /// `W_b^a(r) = (a/b)·W(br/a)` on `[0, a]` for a base `W` on `[0, b]`.
    pub fn domain_scale(&self, a: f64, b: f64) -> Result<Self> {
        finite_positive("a", a)?;
        finite_positive("b", b)?;
        if ((self.domain_length - b) / b).abs() > DOMAIN_SLACK {
            return Err(Error::invalid(format!(
                "base generator lives on [0, {}], not [0, {b}]",
                self.domain_length
            )));
        }
        Ok(Self::build(
            Family::DomainScaled {
                base: Box::new(self.clone()),
                a,
                b,
            },
            a,
            1.0,
        ))
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Right end `a` of the domain `[0, a]`.
    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    /// `U'(a)`.
    pub fn u1_prime(&self) -> f64 {
        self.u1_prime
    }

    /// `U'(0⁺) = -∞`.
    pub fn is_barrier(&self) -> bool {
        match &self.family {
            Family::QLog { q } => *q >= 1.0,
            Family::AffineWrapped { base, .. } | Family::DomainScaled { base, .. } => base.is_barrier(),
            _ => true,
        }
    }

    /// Rejects the generators that the error bound and the solver do not accept:
    /// every `qlog` other than `q = 1`.
    pub fn require_admissible(&self) -> Result<()> {
        match &self.family {
            Family::QLog { q } if *q != 1.0 => Err(Error::NotAdmissible(format!(
                "qlog:{q} violates {}",
                if *q < 1.0 {
                    "U'(0+) = -inf"
                } else {
                    "monotonicity of r U''(r)"
                }
            ))),
            Family::AffineWrapped { base, .. } | Family::DomainScaled { base, .. } => base.require_admissible(),
            _ => Ok(()),
        }
    }

    /// `lim_{r↓0} r U''(r)` (exists because `r U''` is monotone).
    pub fn r_second_limit_at_zero(&self) -> f64 {
        match &self.family {
            Family::Kl | Family::FermiDiracScaled { .. } => 1.0,
            Family::IncompleteGamma { alpha } => {
                if *alpha == 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Family::ErfcScaled { .. } => 0.0,
            Family::QLog { q } => match q.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Less) => 0.0,
                Some(std::cmp::Ordering::Equal) => 1.0,
                _ => f64::INFINITY,
            },
            Family::AffineWrapped { base, lambda, .. } => lambda * base.r_second_limit_at_zero(),
            Family::DomainScaled { base, .. } => base.r_second_limit_at_zero(),
        }
    }

    fn check_closed(&self, r: f64) -> Result<f64> {
        let l = self.domain_length;
        if r.is_nan() || r < -DOMAIN_SLACK * l || r > l * (1.0 + DOMAIN_SLACK) {
            return Err(Error::Domain {
                value: r,
                domain: format!("[0, {l}]"),
            });
        }
        Ok(r.clamp(0.0, l))
    }

    /// `U(r)` for `r ∈ [0, a]`.
    pub fn u_value(&self, r: f64) -> Result<f64> {
        let r = self.check_closed(r)?;
        Ok(self.raw_value(r))
    }

    /// `U'(r)` for `r ∈ [0, a]`; `r = 0` yields the limit `U'(0⁺)`, `-∞` for barrier families.
    pub fn u_prime(&self, r: f64) -> Result<f64> {
        let r = self.check_closed(r)?;
        Ok(self.raw_prime(r))
    }

    /// `U''(r)` on the open interval `(0, a)`.
    pub fn u_second(&self, r: f64) -> Result<f64> {
        let l = self.domain_length;
        if !(r > 0.0 && r < l) {
            return Err(Error::Domain {
                value: r,
                domain: format!("(0, {l})"),
            });
        }
        Ok(self.raw_second(r))
    }

    fn check_tau(&self, tau: f64) -> Result<()> {
        let max = self.u1_prime;
        if tau.is_nan() || tau > max + DOMAIN_SLACK * max.abs().max(1.0) {
            return Err(Error::OutOfRange { tau, max });
        }
        if !self.is_barrier() {
            let min = self.raw_prime(0.0);
            if tau < min {
                return Err(Error::Domain {
                    value: tau,
                    domain: format!("U'((0, a]) = ({min}, {max}]"),
                });
            }
        }
        Ok(())
    }

    /// Inverse derivative `e_U(τ)`, the unique `r ∈ (0, a]` with `U'(r) = τ`.
    pub fn e_u(&self, tau: f64) -> Result<f64> {
        self.check_tau(tau)?;
        Ok(self.raw_e(tau.min(self.u1_prime)).min(self.domain_length))
    }

    /// `ln e_U(τ)`; stays finite where `e_U(τ)` underflows.
    pub fn ln_e_u(&self, tau: f64) -> Result<f64> {
        self.check_tau(tau)?;
        Ok(self.raw_ln_e(tau.min(self.u1_prime)).min(self.domain_length.ln()))
    }

    /// Inverse derivative by bisection on `U'`; independent of the closed forms.
    pub fn e_u_by_bisection(&self, tau: f64) -> Result<f64> {
        self.check_tau(tau)?;
        let l = self.domain_length;
        let (mut lo, mut hi) = (0.0_f64, l);
        for _ in 0..2000 {
            let mid = if lo > 0.0 && hi / lo > 4.0 {
                (lo * hi).sqrt()
            } else if lo == 0.0 && hi > f64::MIN_POSITIVE * 4.0 {
                hi * 1e-3
            } else {
                0.5 * (lo + hi)
            };
            if mid <= lo || mid >= hi {
                break;
            }
            if self.raw_prime(mid) < tau {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Bregman gap `d_U(r, r₀) = U(r) - U(r₀) - (r - r₀)U'(r₀)`, extended to `r₀ = 0` by its limit.
    pub fn d_u(&self, r: f64, r0: f64) -> Result<f64> {
        let r = self.check_closed(r)?;
        let r0 = self.check_closed(r0)?;
        Ok(self.raw_d(r, r0))
    }

    fn raw_d(&self, r: f64, r0: f64) -> f64 {
        if r0 == 0.0 {
            if r == 0.0 {
                return 0.0;
            }
            if self.is_barrier() {
                return f64::INFINITY;
            }
        }
        match &self.family {
            Family::Kl => {
                if r == 0.0 {
                    r0
                } else {
                    (r * (r / r0).ln() - r + r0).max(0.0)
                }
            }
            Family::FermiDiracScaled { a } => {
                let left = if r == 0.0 { 0.0 } else { r * (r / r0).ln() };
                let right = (a - r) * ((a - r) / (a - r0)).ln();
                (left + right).max(0.0)
            }
            Family::AffineWrapped { base, lambda, .. } => lambda * base.raw_d(r, r0),
            Family::DomainScaled { base, a, b } => {
                let k = b / a;
                base.raw_d(k * r, k * r0) / k
            }
            _ => {
                let v = self.raw_value(r) - self.raw_value(r0) - (r - r0) * self.raw_prime(r0);
                v.max(0.0)
            }
        }
    }

    /// `D_U(z, w) = Σ_k d_U(z_k, w_k)`, which may be `+∞`.
    pub fn bregman_divergence(&self, z: &[f64], w: &[f64]) -> Result<f64> {
        if z.len() != w.len() {
            return Err(Error::invalid(format!("length mismatch: {} vs {}", z.len(), w.len())));
        }
        let mut total = 0.0;
        for (&zk, &wk) in z.iter().zip(w) {
            total += self.d_u(zk, wk)?;
        }
        Ok(total)
    }

    /// Affine re-normalization to `U(0) = U(a) = 0`, `U'(a) = 1`.
    pub fn normalize(&self) -> Result<Self> {
        let l = self.domain_length;
        let u0 = self.raw_value(0.0);
        let ul = self.raw_value(l);
        let ud = self.u1_prime;
        if !(u0.is_finite() && ul.is_finite() && ud.is_finite()) {
            return Err(Error::NotAdmissible(format!(
                "{self} cannot be normalized: U(0) = {u0}, U(a) = {ul}, U'(a) = {ud}"
            )));
        }
        if u0.abs() <= 1e-15 && ul.abs() <= 1e-15 && (ud - 1.0).abs() <= 1e-15 {
            return Ok(self.clone());
        }
        let lambda = 1.0 / (ud - (ul - u0) / l);
        self.affine(lambda, -lambda * u0, 1.0 - lambda * ud)
    }

    /// `U` continued past `a` with the `C¹` tail `r ln(r/a) + (U'(a) - 1)(r - a) + U(a)`.
    pub fn extended_value(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::Domain {
                value: r,
                domain: "[0, inf)".into(),
            });
        }
        Ok(self.ext_value(r))
    }

    /// Derivative of [`Self::extended_value`], `ln(r/a) + U'(a)` past `a`.
    pub fn extended_prime(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::Domain {
                value: r,
                domain: "[0, inf)".into(),
            });
        }
        Ok(self.ext_prime(r))
    }

    pub(crate) fn ext_value(&self, r: f64) -> f64 {
        let l = self.domain_length;
        if r <= l {
            self.raw_value(r)
        } else {
            r * (r / l).ln() + (self.u1_prime - 1.0) * (r - l) + self.raw_value(l)
        }
    }

    pub(crate) fn ext_prime(&self, r: f64) -> f64 {
        let l = self.domain_length;
        if r <= l {
            self.raw_prime(r)
        } else {
            (r / l).ln() + self.u1_prime
        }
    }

    /// Inverse of the extended derivative, defined on the whole real line.
    pub(crate) fn ext_e(&self, tau: f64) -> f64 {
        if tau <= self.u1_prime {
            self.raw_e(tau)
        } else {
            self.domain_length * (tau - self.u1_prime).exp()
        }
    }

    /// `d/dτ` of [`Self::ext_e`], i.e. `1/U''(e(τ))`.
    pub(crate) fn ext_e_prime(&self, tau: f64) -> f64 {
        if tau <= self.u1_prime {
            self.raw_e_prime(tau)
        } else {
            self.domain_length * (tau - self.u1_prime).exp()
        }
    }

    pub(crate) fn raw_value(&self, r: f64) -> f64 {
        match &self.family {
            Family::Kl => {
                if r == 0.0 {
                    0.0
                } else {
                    r * r.ln()
                }
            }
            Family::IncompleteGamma { alpha } => {
                if r == 0.0 {
                    return 0.0;
                }
                let s = -r.ln();
                if s < alpha + 2.0 {
                    (r - 1.0) + gamma_p(alpha + 1.0, s)
                } else {
                    r - gamma_q(alpha + 1.0, s)
                }
            }
            Family::ErfcScaled { a } => {
                if r == 0.0 {
                    return 0.0;
                }
                let h = erfc_half_inverse(r / a);
                -(a / PI.sqrt()) * (-0.25 * h * h).exp()
            }
            Family::FermiDiracScaled { a } => {
                let left = if r == 0.0 { 0.0 } else { r * (r / a).ln() };
                left + (a - r) * (-r / a).ln_1p()
            }
            Family::QLog { q } => {
                let q = *q;
                if q == 1.0 {
                    if r == 0.0 {
                        0.0
                    } else {
                        r * r.ln() - r
                    }
                } else if q < 2.0 {
                    (r.powf(2.0 - q) / (2.0 - q) - r) / (1.0 - q)
                } else if q == 2.0 {
                    r - 1.0 - r.ln()
                } else {
                    (r.powf(2.0 - q) - 1.0) / ((2.0 - q) * (1.0 - q)) - (r - 1.0) / (1.0 - q)
                }
            }
            Family::AffineWrapped { base, lambda, mu0, mu1 } => lambda * base.raw_value(r) + mu1 * r + mu0,
            Family::DomainScaled { base, a, b } => {
                let k = b / a;
                base.raw_value(k * r) / k
            }
        }
    }

    pub(crate) fn raw_prime(&self, r: f64) -> f64 {
        match &self.family {
            Family::Kl => r.ln() + 1.0,
            Family::IncompleteGamma { alpha } => {
                if r == 0.0 {
                    return f64::NEG_INFINITY;
                }
                let s = (-r.ln()).max(0.0);
                1.0 - s.powf(*alpha) / self.gamma_norm
            }
            Family::ErfcScaled { a } => erfc_half_inverse(r / a),
            Family::FermiDiracScaled { a } => r.ln() - (a - r).ln(),
            Family::QLog { q } => {
                let q = *q;
                if q == 1.0 {
                    r.ln()
                } else {
                    (r.powf(1.0 - q) - 1.0) / (1.0 - q)
                }
            }
            Family::AffineWrapped { base, lambda, mu1, .. } => lambda * base.raw_prime(r) + mu1,
            Family::DomainScaled { base, a, b } => base.raw_prime(b / a * r),
        }
    }

    pub(crate) fn raw_second(&self, r: f64) -> f64 {
        match &self.family {
            Family::Kl => 1.0 / r,
            Family::IncompleteGamma { alpha } => {
                let s = (-r.ln()).max(0.0);
                alpha * s.powf(alpha - 1.0) / (r * self.gamma_norm)
            }
            Family::ErfcScaled { a } => {
                let h = erfc_half_inverse(r / a);
                (4.0 * PI).sqrt() * (0.25 * h * h).exp() / a
            }
            Family::FermiDiracScaled { a } => 1.0 / r + 1.0 / (a - r),
            Family::QLog { q } => r.powf(-q),
            Family::AffineWrapped { base, lambda, .. } => lambda * base.raw_second(r),
            Family::DomainScaled { base, a, b } => {
                let k = b / a;
                k * base.raw_second(k * r)
            }
        }
    }

    fn raw_e(&self, tau: f64) -> f64 {
        match &self.family {
            Family::Kl => (tau - 1.0).exp(),
            Family::IncompleteGamma { alpha } => (-(self.gamma_norm * (1.0 - tau)).powf(1.0 / alpha)).exp(),
            Family::ErfcScaled { a } => a * norm_cdf(tau * std::f64::consts::FRAC_1_SQRT_2),
            Family::FermiDiracScaled { a } => a * logistic(tau),
            Family::QLog { q } => {
                let q = *q;
                if q == 1.0 {
                    tau.exp()
                } else {
                    let base = 1.0 + (1.0 - q) * tau;
                    if base <= 0.0 {
                        0.0
                    } else {
                        base.powf(1.0 / (1.0 - q))
                    }
                }
            }
            Family::AffineWrapped { base, lambda, mu1, .. } => base.raw_e((tau - mu1) / lambda),
            Family::DomainScaled { base, a, b } => base.raw_e(tau) * a / b,
        }
    }

    fn raw_ln_e(&self, tau: f64) -> f64 {
        match &self.family {
            Family::Kl => tau - 1.0,
            Family::IncompleteGamma { alpha } => -(self.gamma_norm * (1.0 - tau)).powf(1.0 / alpha),
            Family::ErfcScaled { a } => a.ln() + ln_norm_cdf(tau * std::f64::consts::FRAC_1_SQRT_2),
            Family::FermiDiracScaled { a } => a.ln() - softplus(-tau),
            Family::QLog { q } => {
                if *q == 1.0 {
                    tau
                } else {
                    self.raw_e(tau).ln()
                }
            }
            Family::AffineWrapped { base, lambda, mu1, .. } => base.raw_ln_e((tau - mu1) / lambda),
            Family::DomainScaled { base, a, b } => base.raw_ln_e(tau) + (a / b).ln(),
        }
    }

    fn raw_e_prime(&self, tau: f64) -> f64 {
        match &self.family {
            Family::Kl => (tau - 1.0).exp(),
            Family::IncompleteGamma { alpha } => {
                let z = self.gamma_norm * (1.0 - tau);
                let e = (-z.powf(1.0 / alpha)).exp();
                if e == 0.0 {
                    0.0
                } else {
                    e * self.gamma_norm / alpha * z.powf(1.0 / alpha - 1.0)
                }
            }
            Family::ErfcScaled { a } => a * (-0.25 * tau * tau).exp() / (4.0 * PI).sqrt(),
            Family::FermiDiracScaled { a } => {
                let s = logistic(tau);
                a * s * logistic(-tau)
            }
            Family::QLog { q } => {
                let q = *q;
                if q == 1.0 {
                    tau.exp()
                } else {
                    let base = 1.0 + (1.0 - q) * tau;
                    if base <= 0.0 {
                        0.0
                    } else {
                        base.powf(q / (1.0 - q))
                    }
                }
            }
            Family::AffineWrapped { base, lambda, mu1, .. } => base.raw_e_prime((tau - mu1) / lambda) / lambda,
            Family::DomainScaled { base, a, b } => base.raw_e_prime(tau) * a / b,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Kl => write!(f, "kl"),
            Family::IncompleteGamma { alpha } => write!(f, "gamma:{alpha}"),
            Family::ErfcScaled { a } => write!(f, "erfc:{a}"),
            Family::FermiDiracScaled { a } => write!(f, "fermi:{a}"),
            Family::QLog { q } => write!(f, "qlog:{q}"),
            Family::AffineWrapped { base, lambda, mu0, mu1 } => write!(f, "affine({base},{lambda},{mu0},{mu1})"),
            Family::DomainScaled { base, a, b } => write!(f, "scale({base},{a},{b})"),
        }
    }
}

#[cfg(test)]
mod tests;
