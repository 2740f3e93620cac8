//! The regularized problem `min ⟨C, Π⟩ + ε D_U(Π, x⊗y)` over `Π(x, y)`.
//!
//! The minimizer is computed through its dual. Stationarity gives
//! `U'(π_ij) = U'(p_ij) + (α_i + β_j - c_ij)/ε` with `p = x⊗y`, so the plan is
//! `π_ij = e_U(τ_ij)` for potentials `(α, β)`. The concave dual function
//!
//! `G(α, β) = Σ α_i x_i + Σ β_j y_j + Σ [(c_ij - α_i - β_j) π_ij + ε d_U(π_ij, p_ij)]`
//!
//! has gradient equal to the marginal residuals and a weighted-Laplacian Hessian
//! with weights `1/U''(π_ij)`, so damped Newton on `G` converges quadratically
//! and resolves entries far below `1e-300` in log scale. `e_U` is continued past
//! `U'(a)` by the logarithmic tail of [`Generator::extended_value`] so that dual
//! iterates can never leave the domain; at the solution every entry is at most
//! `min(x_i, y_j) ≤ a` and the extension is inactive.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::check_shapes;
use crate::generators::Generator;
use crate::polytope::{product_plan, validate_plan, CostMatrix, Histogram, Matrix, TransportPlan};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Convergence when `‖marginal residual‖∞ ≤ grad_tol·(1 + |objective|)`.
    pub grad_tol: f64,
    pub max_iters: usize,
    pub backtrack_factor: f64,
    pub armijo_c: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            grad_tol: 1e-10,
            max_iters: 500,
            backtrack_factor: 0.5,
            armijo_c: 1e-4,
        }
    }
}

impl SolveOptions {
    fn check(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::invalid("grad_tol must be positive"));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::invalid("backtrack_factor must lie in (0, 1)"));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 0.5) {
            return Err(Error::invalid("armijo_c must lie in (0, 1/2)"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be positive"));
        }
        Ok(())
    }
}

/// Dual potentials; entries outside the supports are zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Potentials {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularizedResult {
    pub plan: TransportPlan,
    /// `⟨C, Π⟩`.
    pub linear_value: f64,
    /// `D_U(Π, x⊗y)`.
    pub divergence_value: f64,
    pub objective: f64,
    pub iterations: usize,
    /// Final `‖marginal residual‖∞`.
    pub grad_norm: f64,
    pub converged: bool,
    pub potentials: Potentials,
}

fn check_inputs(gen: &Generator, c: &CostMatrix, x: &Histogram, y: &Histogram, eps: f64) -> Result<()> {
    check_shapes(c, x, y)?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive and finite, got {eps}")));
    }
    if !gen.is_barrier() {
        return Err(Error::NotAdmissible(format!(
            "{gen} has finite U'(0+); the regularized minimizer may touch the boundary"
        )));
    }
    let l = gen.domain_length();
    if x.total_mass() > l * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "data mass {} exceeds the generator domain [0, {l}]",
            x.total_mass()
        )));
    }
    Ok(())
}

/// `⟨C, Π⟩ + ε D_U(Π, x⊗y)`; may be `+∞`.
pub fn objective(
    gen: &Generator,
    c: &CostMatrix,
    x: &Histogram,
    y: &Histogram,
    eps: f64,
    plan: &Matrix,
) -> Result<f64> {
    check_shapes(c, x, y)?;
    let check = validate_plan(plan, x, y, 1e-9 * x.total_mass());
    if !check.valid {
        return Err(Error::invalid(format!("infeasible plan: {}", check.violations[0])));
    }
    let prod = product_plan(x, y)?;
    let d = gen.bregman_divergence(plan.as_slice(), prod.entries().as_slice())?;
    Ok(plan.dot(c) + eps * d)
}

/// Dual problem restricted to `spt(x) × spt(y)`, with `β` of the last column pinned to 0.
struct Dual<'a> {
    gen: &'a Generator,
    eps: f64,
    rows: Vec<usize>,
    cols: Vec<usize>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    cost: Vec<f64>,
    p: Vec<f64>,
    p_prime: Vec<f64>,
    p_value: Vec<f64>,
}

struct DualPoint {
    /// `m` row potentials followed by `n - 1` column potentials.
    z: Vec<f64>,
    pi: Vec<f64>,
    weight: Vec<f64>,
    value: f64,
    /// `x_i - Σ_j π_ij` for every row, then `y_j - Σ_i π_ij` for every column.
    residual: Vec<f64>,
}

impl DualPoint {
    fn res_norm(&self) -> f64 {
        self.residual.iter().fold(0.0, |a, r| a.max(r.abs()))
    }
}

impl<'a> Dual<'a> {
    fn new(gen: &'a Generator, c: &CostMatrix, x: &Histogram, y: &Histogram, eps: f64) -> Self {
        let rows = x.support();
        let cols = y.support();
        let mass = x.total_mass();
        let mut cost = Vec::new();
        let mut p = Vec::new();
        for &i in &rows {
            for &j in &cols {
                cost.push(c.get(i, j));
                p.push(x[i] * y[j] / mass);
            }
        }
        let p_prime = p.iter().map(|&v| gen.raw_prime(v)).collect();
        let p_value = p.iter().map(|&v| gen.raw_value(v)).collect();
        Dual {
            gen,
            eps,
            xs: rows.iter().map(|&i| x[i]).collect(),
            ys: cols.iter().map(|&j| y[j]).collect(),
            rows,
            cols,
            cost,
            p,
            p_prime,
            p_value,
        }
    }

    fn m(&self) -> usize {
        self.rows.len()
    }

    fn n(&self) -> usize {
        self.cols.len()
    }

    fn beta(&self, z: &[f64], j: usize) -> f64 {
        if j + 1 == self.n() {
            0.0
        } else {
            z[self.m() + j]
        }
    }

    fn eval(&self, z: Vec<f64>) -> DualPoint {
        let (m, n) = (self.m(), self.n());
        let gen = self.gen;
        let mut pi = vec![0.0; m * n];
        let mut weight = vec![0.0; m * n];
        let mut value = 0.0;
        let mut residual: Vec<f64> = self.xs.iter().chain(&self.ys).copied().collect();
        for i in 0..m {
            value += z[i] * self.xs[i];
        }
        for j in 0..n {
            value += self.beta(&z, j) * self.ys[j];
        }
        for i in 0..m {
            for j in 0..n {
                let k = i * n + j;
                let slack = self.cost[k] - z[i] - self.beta(&z, j);
                let tau = self.p_prime[k] - slack / self.eps;
                let r = gen.ext_e(tau);
                pi[k] = r;
                weight[k] = gen.ext_e_prime(tau);
                let d = gen.ext_value(r) - self.p_value[k] - (r - self.p[k]) * self.p_prime[k];
                value += slack * r + self.eps * d;
                residual[i] -= r;
                residual[m + j] -= r;
            }
        }
        DualPoint {
            z,
            pi,
            weight,
            value,
            residual,
        }
    }

    /// Newton direction `d` solving `K d = ε g`, `K` the reduced weighted Laplacian.
    fn direction(&self, pt: &DualPoint) -> Option<DVector<f64>> {
        let (m, n) = (self.m(), self.n());
        let dim = m + n - 1;
        let mut k = DMatrix::<f64>::zeros(dim, dim);
        for i in 0..m {
            for j in 0..n {
                let w = pt.weight[i * n + j];
                k[(i, i)] += w;
                if j + 1 < n {
                    k[(m + j, m + j)] += w;
                    k[(i, m + j)] += w;
                    k[(m + j, i)] += w;
                }
            }
        }
        let rhs = DVector::from_fn(dim, |r, _| self.eps * pt.residual[r]);
        let scale = (0..dim).map(|r| k[(r, r)]).fold(0.0, f64::max);
        let mut ridge = 0.0;
        for _ in 0..40 {
            let mut kk = k.clone();
            for r in 0..dim {
                kk[(r, r)] += ridge;
            }
            if let Some(ch) = kk.cholesky() {
                let d = ch.solve(&rhs);
                if d.iter().all(|v| v.is_finite()) {
                    return Some(d);
                }
            }
            ridge = if ridge == 0.0 {
                (1e-14 * scale).max(f64::MIN_POSITIVE)
            } else {
                ridge * 100.0
            };
        }
        None
    }

    fn cold_start(&self) -> Vec<f64> {
        let (m, n) = (self.m(), self.n());
        let alpha: Vec<f64> = (0..m)
            .map(|i| (0..n).map(|j| self.cost[i * n + j]).fold(f64::INFINITY, f64::min))
            .collect();
        let beta: Vec<f64> = (0..n)
            .map(|j| {
                (0..m)
                    .map(|i| self.cost[i * n + j] - alpha[i])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let shift = beta[n - 1];
        alpha
            .iter()
            .map(|a| a + shift)
            .chain(beta[..n - 1].iter().map(|b| b - shift))
            .collect()
    }

    fn warm_start(&self, warm: &Potentials) -> Option<Vec<f64>> {
        let alpha: Vec<f64> = self
            .rows
            .iter()
            .map(|&i| warm.alpha.get(i).copied())
            .collect::<Option<_>>()?;
        let beta: Vec<f64> = self
            .cols
            .iter()
            .map(|&j| warm.beta.get(j).copied())
            .collect::<Option<_>>()?;
        let shift = beta[self.n() - 1];
        let z: Vec<f64> = alpha
            .iter()
            .map(|a| a + shift)
            .chain(beta[..self.n() - 1].iter().map(|b| b - shift))
            .collect();
        z.iter().all(|v| v.is_finite()).then_some(z)
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    gen: &Generator,
    c: &CostMatrix,
    x: &Histogram,
    y: &Histogram,
    eps: f64,
    entries: Matrix,
    iterations: usize,
    grad_norm: f64,
    tol: f64,
    potentials: Potentials,
) -> Result<RegularizedResult> {
    let prod = product_plan(x, y)?;
    let l = gen.domain_length();
    let mut divergence = 0.0;
    for (&r, &p) in entries.as_slice().iter().zip(prod.entries().as_slice()) {
        divergence += gen.d_u(r.min(l), p)?;
    }
    let linear_value = entries.dot(c);
    let objective = linear_value + eps * divergence;
    Ok(RegularizedResult {
        plan: TransportPlan::from_parts(entries, x.clone(), y.clone()),
        linear_value,
        divergence_value: divergence,
        objective,
        iterations,
        grad_norm,
        converged: grad_norm <= tol * (1.0 + objective.abs()),
        potentials,
    })
}

/// Computes `Π^U(C, x, y, ε)` from a cold start.
pub fn solve_regularized(
    gen: &Generator,
    c: &CostMatrix,
    x: &Histogram,
    y: &Histogram,
    eps: f64,
    opts: &SolveOptions,
) -> Result<RegularizedResult> {
    solve_regularized_from(gen, c, x, y, eps, opts, None)
}

/// Like [`solve_regularized`], optionally warm-started from earlier potentials.
pub fn solve_regularized_from(
    gen: &Generator,
    c: &CostMatrix,
    x: &Histogram,
    y: &Histogram,
    eps: f64,
    opts: &SolveOptions,
    warm: Option<&Potentials>,
) -> Result<RegularizedResult> {
    check_inputs(gen, c, x, y, eps)?;
    opts.check()?;
    let dual = Dual::new(gen, c, x, y, eps);
    let (m, n) = (dual.m(), dual.n());
    let mass = x.total_mass();

    let to_potentials = |z: &[f64]| {
        let mut alpha = vec![0.0; x.len()];
        let mut beta = vec![0.0; y.len()];
        for (k, &i) in dual.rows.iter().enumerate() {
            alpha[i] = z[k];
        }
        for (k, &j) in dual.cols.iter().enumerate() {
            beta[j] = dual.beta(z, k);
        }
        Potentials { alpha, beta }
    };
    let to_entries = |pt: &DualPoint| {
        let mut e = Matrix::zeros(x.len(), y.len());
        for (a, &i) in dual.rows.iter().enumerate() {
            for (b, &j) in dual.cols.iter().enumerate() {
                e.set(i, j, pt.pi[a * n + b]);
            }
        }
        e
    };

    if m == 1 || n == 1 {
        // Π(x, y) is the single point x⊗y.
        let prod = product_plan(x, y)?;
        let mut alpha = vec![0.0; x.len()];
        let mut beta = vec![0.0; y.len()];
        if m == 1 {
            for &j in &dual.cols {
                beta[j] = c.get(dual.rows[0], j);
            }
        } else {
            for &i in &dual.rows {
                alpha[i] = c.get(i, dual.cols[0]);
            }
        }
        return finish(
            gen,
            c,
            x,
            y,
            eps,
            prod.entries().clone(),
            0,
            0.0,
            opts.grad_tol,
            Potentials { alpha, beta },
        );
    }

    let mut pt = None;
    if let Some(w) = warm {
        if let Some(z) = dual.warm_start(w) {
            let cand = dual.eval(z);
            if cand.value.is_finite() && cand.residual.iter().all(|r| r.is_finite()) {
                pt = Some(cand);
            }
        }
    }
    let mut pt = pt.unwrap_or_else(|| dual.eval(dual.cold_start()));

    let floor = 16.0 * f64::EPSILON * mass;
    let (lo, hi) = dual
        .cost
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let step_cap = (hi - lo) + eps;
    let mut iterations = 0;
    let mut polish = 0;
    while iterations < opts.max_iters {
        let res = pt.res_norm();
        if res <= floor {
            break;
        }
        if res <= opts.grad_tol * (1.0 + pt.value.abs()) {
            // Keep going while quadratic convergence still pays off.
            polish += 1;
            if polish > 3 {
                break;
            }
        }
        let Some(mut d) = dual.direction(&pt) else {
            break;
        };
        // Rows whose entries all sit deep in the left tail have vanishing curvature;
        // a raw Newton step there can be astronomically long.
        d.apply(|v| *v = v.clamp(-step_cap, step_cap));
        let mut slope: f64 = d.iter().zip(&pt.residual).map(|(a, b)| a * b).sum();
        if !(slope > 0.0) {
            // Fall back to plain gradient ascent.
            let g = DVector::from_column_slice(&pt.residual[..m + n - 1]);
            let scale = (step_cap / g.amax()).min(eps);
            d = g * scale;
            slope = d.dot(&d) / scale;
        }
        let noise = 1e-14 * (1.0 + pt.value.abs());
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let z: Vec<f64> = pt.z.iter().zip(d.iter()).map(|(a, b)| a + t * b).collect();
            let cand = dual.eval(z);
            if cand.value.is_finite() {
                let armijo = cand.value >= pt.value + opts.armijo_c * t * slope;
                let residual_drop = cand.res_norm() < res && cand.value >= pt.value - noise;
                if armijo || residual_drop {
                    accepted = Some(cand);
                    break;
                }
            }
            t *= opts.backtrack_factor;
        }
        iterations += 1;
        match accepted {
            Some(next) => {
                let stalled = next.res_norm() >= res && next.value <= pt.value + noise;
                pt = next;
                if stalled {
                    break;
                }
            }
            None => break,
        }
    }

    let grad_norm = pt.res_norm();
    finish(
        gen,
        c,
        x,
        y,
        eps,
        to_entries(&pt),
        iterations,
        grad_norm,
        opts.grad_tol,
        to_potentials(&pt.z),
    )
}

/// Norm of the objective gradient `c_ij + ε(U'(π_ij) - U'(p_ij))` projected onto
/// the tangent space of `Π(x, y)`, i.e. with its best additive fit `a_i + b_j` removed.
pub fn kkt_residual(
    gen: &Generator,
    c: &CostMatrix,
    x: &Histogram,
    y: &Histogram,
    eps: f64,
    plan: &Matrix,
) -> Result<f64> {
    check_inputs(gen, c, x, y, eps)?;
    let rows = x.support();
    let cols = y.support();
    let (m, n) = (rows.len(), cols.len());
    let mass = x.total_mass();
    let mut g = vec![0.0; m * n];
    for (a, &i) in rows.iter().enumerate() {
        for (b, &j) in cols.iter().enumerate() {
            let r = plan.get(i, j);
            if !(r > 0.0) {
                return Err(Error::invalid(format!(
                    "plan entry ({i},{j}) = {r} lies on the boundary"
                )));
            }
            let p = x[i] * y[j] / mass;
            g[a * n + b] = c.get(i, j) + eps * (gen.u_prime(r.min(gen.domain_length()))? - gen.raw_prime(p));
        }
    }
    let row_mean: Vec<f64> = (0..m)
        .map(|a| (0..n).map(|b| g[a * n + b]).sum::<f64>() / n as f64)
        .collect();
    let col_mean: Vec<f64> = (0..n)
        .map(|b| (0..m).map(|a| g[a * n + b]).sum::<f64>() / m as f64)
        .collect();
    let grand: f64 = g.iter().sum::<f64>() / (m * n) as f64;
    let mut norm = 0.0;
    for a in 0..m {
        for b in 0..n {
            let v = g[a * n + b] - row_mean[a] - col_mean[b] + grand;
            norm += v * v;
        }
    }
    Ok(norm.sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitPlan {
    pub plan: TransportPlan,
    /// Smallest ε solved successfully.
    pub eps: f64,
    /// False when some solve along the sequence failed to converge.
    pub complete: bool,
    pub steps: Vec<RegularizedResult>,
}

/// Follows a strictly decreasing ε sequence with warm starts and returns the last plan,
/// an approximation of `lim_{ε→0} Π^U(C, x, y, ε)`.
pub fn solve_limit_plan(
    gen: &Generator,
    c: &CostMatrix,
    x: &Histogram,
    y: &Histogram,
    eps_sequence: &[f64],
) -> Result<LimitPlan> {
    if eps_sequence.is_empty() {
        return Err(Error::invalid("empty eps sequence"));
    }
    if eps_sequence.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::invalid("eps sequence must be strictly decreasing"));
    }
    let opts = SolveOptions::default();
    let mut steps: Vec<RegularizedResult> = Vec::new();
    let mut complete = true;
    for &eps in eps_sequence {
        let warm = steps.last().map(|r| &r.potentials);
        let r = solve_regularized_from(gen, c, x, y, eps, &opts, warm)?;
        let ok = r.converged;
        steps.push(r);
        if !ok {
            complete = false;
            break;
        }
    }
    let last = if complete {
        steps.last()
    } else {
        steps.iter().rev().nth(1).or(steps.last())
    }
    .expect("at least one step");
    let eps = if complete {
        *eps_sequence.last().unwrap()
    } else {
        eps_sequence[steps.len().saturating_sub(2)]
    };
    Ok(LimitPlan {
        plan: last.plan.clone(),
        eps,
        complete,
        steps,
    })
}
