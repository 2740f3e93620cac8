//! Discrete optimal transport regularized by Bregman divergences, with the
//! non-asymptotic error bound `Δ·e_U(-Δ/ε + 𝔇 + ν)` computed from its ingredients.
//!
//! * [`generators`]: convex generators `U`, their calculus and admissibility checks.
//! * [`polytope`]: histograms, transport plans and vertex enumeration of `Π(x, y)`.
//! * [`exact`]: the unregularized LP, the suboptimality gap `Δ` and the radius `𝔇`.
//! * [`regularized`]: the regularized minimizer `Π^U(C, x, y, ε)`.
//! * [`bounds`]: `R_U`, `ν_U`, the valid ε-interval and the error bounds.
//! * [`harness`]: seeded instances, ε sweeps, CSV/SVG output and figure presets.
//! * [`io`]: the plain-text matrix, histogram and plan formats.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bounds;
pub mod error;
pub mod exact;
pub mod generators;
pub mod harness;
pub mod io;
pub mod polytope;
pub mod regularized;

pub use error::{Error, Result};
pub use generators::Generator;
pub use polytope::{CostMatrix, Histogram, TransportPlan};
