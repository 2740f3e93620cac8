//! The unregularized transport LP, the suboptimality gap `Δ_C(x, y)` and the
//! divergence radius `𝔇_U(x, y)`.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::polytope::{
    enumerate_vertices, product_plan, CostMatrix, Histogram, Matrix, TransportPlan, VertexSet, MAX_ENUMERATION_SIZE,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LpMethod {
    VertexEnumeration,
    NetworkSimplex,
}

#[derive(Clone, Debug, Serialize)]
pub struct LpResult {
    pub optimal_value: f64,
    pub optimal_plan: TransportPlan,
    /// Indices into the enumerated vertex set; empty when solved by network simplex.
    pub optimal_vertices: Vec<usize>,
    pub method: LpMethod,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    /// `second_value - best_value`, or `+∞` when every vertex is optimal.
    pub delta: f64,
    pub best_value: f64,
    pub second_value: f64,
    pub tie_tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NetworkSimplexResult {
    pub optimal_value: f64,
    pub plan: TransportPlan,
    pub iterations: usize,
    /// Most negative reduced cost at termination (nonnegative up to rounding).
    pub min_reduced_cost: f64,
    /// Dual potentials `u_i`, `v_j` of the final basis; 0 off the support.
    pub row_potentials: Vec<f64>,
    pub col_potentials: Vec<f64>,
    /// Cells of the final spanning tree.
    pub basis: Vec<(usize, usize)>,
    rc_tol: f64,
}

impl NetworkSimplexResult {
    /// Reduced costs `c_ij - u_i - v_j`: exactly 0 on the basis and on cells off the
    /// support, and clamped to 0 when below the optimality tolerance.
    pub fn reduced_costs(&self, c: &CostMatrix) -> Matrix {
        let x = self.plan.x();
        let y = self.plan.y();
        let mut rc = Matrix::from_fn(c.rows(), c.cols(), |i, j| {
            if !x.in_support(i) || !y.in_support(j) {
                return 0.0;
            }
            let v = c.get(i, j) - self.row_potentials[i] - self.col_potentials[j];
            if v <= self.rc_tol {
                0.0
            } else {
                v
            }
        });
        for &(i, j) in &self.basis {
            rc.set(i, j, 0.0);
        }
        rc
    }

    /// `⟨C, Π⟩ - LP` for a feasible `Π`, summed as `Σ Π_ij rc_ij` over nonnegative
    /// terms so it keeps relative accuracy far below the rounding level of `⟨C, Π⟩`.
    pub fn excess_cost(&self, c: &CostMatrix, plan: &Matrix) -> f64 {
        self.reduced_costs(c).dot(plan)
    }
}

/// `1e-9·(1 + |best|)`.
pub fn default_tie_tol(best: f64) -> f64 {
    1e-9 * (1.0 + best.abs())
}

pub(crate) fn check_shapes(c: &CostMatrix, x: &Histogram, y: &Histogram) -> Result<()> {
    if c.rows() != x.len() || c.cols() != y.len() {
        return Err(Error::invalid(format!(
            "cost matrix is {}x{} but marginals have lengths {} and {}",
            c.rows(),
            c.cols(),
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

fn vertex_costs(c: &CostMatrix, vs: &VertexSet) -> Vec<f64> {
    vs.vertices.iter().map(|v| v.cost(c)).collect()
}

/// Minimizes `⟨C, ·⟩` over an already enumerated vertex set.
pub fn solve_lp_over(c: &CostMatrix, vs: &VertexSet, tie_tol: Option<f64>) -> LpResult {
    let costs = vertex_costs(c, vs);
    let (best_idx, best) = costs
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
    let tol = tie_tol.unwrap_or_else(|| default_tie_tol(best));
    LpResult {
        optimal_value: best,
        optimal_plan: vs.vertices[best_idx].clone(),
        optimal_vertices: (0..costs.len()).filter(|&k| costs[k] <= best + tol).collect(),
        method: LpMethod::VertexEnumeration,
    }
}

/// Solves `min ⟨C, Π⟩` over `Π(x, y)`: exactly over the vertices when `I + J ≤ 14`,
/// otherwise by [`network_simplex`].
pub fn solve_lp(c: &CostMatrix, x: &Histogram, y: &Histogram) -> Result<LpResult> {
    check_shapes(c, x, y)?;
    if x.len() + y.len() <= MAX_ENUMERATION_SIZE {
        let vs = enumerate_vertices(x, y)?;
        Ok(solve_lp_over(c, &vs, None))
    } else {
        let ns = network_simplex(c, x, y)?;
        Ok(LpResult {
            optimal_value: ns.optimal_value,
            optimal_plan: ns.plan,
            optimal_vertices: Vec::new(),
            method: LpMethod::NetworkSimplex,
        })
    }
}

/// Edges of the basis tree on the path from row node `r` to column node `c`,
/// listed from `c` back to `r`. Column nodes are offset by `m`.
fn tree_path(basis: &[(usize, usize)], m: usize, n: usize, r: usize, c: usize) -> Vec<usize> {
    let nodes = m + n;
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for (e, &(i, j)) in basis.iter().enumerate() {
        incident[i].push(e);
        incident[m + j].push(e);
    }
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nodes];
    let mut seen = vec![false; nodes];
    seen[r] = true;
    let mut queue = VecDeque::from([r]);
    while let Some(u) = queue.pop_front() {
        if u == c {
            break;
        }
        for &e in &incident[u] {
            let (i, j) = basis[e];
            let v = if i == u { m + j } else { i };
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some((u, e));
                queue.push_back(v);
            }
        }
    }
    let mut path = Vec::new();
    let mut v = c;
    while let Some((u, e)) = parent[v] {
        path.push(e);
        v = u;
    }
    path
}

/// Primal transportation simplex with Bland's rule, started from the northwest corner.
///
/// Works on `spt(x) × spt(y)`. Optimality is certified by nonnegative reduced costs
/// `c_ij - u_i - v_j` for the dual potentials of the final basis.
pub fn network_simplex(c: &CostMatrix, x: &Histogram, y: &Histogram) -> Result<NetworkSimplexResult> {
    check_shapes(c, x, y)?;
    let mass = x.total_mass();
    if ((mass - y.total_mass()) / mass).abs() > 1e-12 {
        return Err(Error::invalid("total-mass mismatch between x and y"));
    }
    let rows = x.support();
    let cols = y.support();
    let (m, n) = (rows.len(), cols.len());
    let cost = |i: usize, j: usize| c.get(rows[i], cols[j]);
    let scale = c.as_slice().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let rc_tol = 1e-12 * (1.0 + scale);

    let mut basis: Vec<(usize, usize)> = Vec::with_capacity(m + n - 1);
    let mut flow: Vec<f64> = Vec::with_capacity(m + n - 1);
    {
        let (mut i, mut j) = (0, 0);
        let mut supply = x[rows[0]];
        let mut demand = y[cols[0]];
        loop {
            let f = supply.min(demand);
            basis.push((i, j));
            flow.push(f);
            if i == m - 1 && j == n - 1 {
                break;
            }
            if (supply <= demand && i < m - 1) || j == n - 1 {
                demand -= f;
                i += 1;
                supply = x[rows[i]];
            } else {
                supply -= f;
                j += 1;
                demand = y[cols[j]];
            }
        }
    }

    let max_iters = 100 * (m * n).max(100);
    let mut iterations = 0;
    loop {
        // Dual potentials from u_0 = 0 across the tree.
        let mut u = vec![f64::NAN; m];
        let mut v = vec![f64::NAN; n];
        u[0] = 0.0;
        let mut assigned = 1;
        while assigned < m + n {
            let before = assigned;
            for &(i, j) in &basis {
                if !u[i].is_nan() && v[j].is_nan() {
                    v[j] = cost(i, j) - u[i];
                    assigned += 1;
                } else if u[i].is_nan() && !v[j].is_nan() {
                    u[i] = cost(i, j) - v[j];
                    assigned += 1;
                }
            }
            if assigned == before {
                return Err(Error::Convergence(
                    "network simplex basis is not a spanning tree".into(),
                ));
            }
        }
        let mut entering = None;
        let mut min_rc = f64::INFINITY;
        for i in 0..m {
            for j in 0..n {
                let rc = cost(i, j) - u[i] - v[j];
                min_rc = min_rc.min(rc);
                if entering.is_none() && rc < -rc_tol && !basis.contains(&(i, j)) {
                    entering = Some((i, j));
                }
            }
        }
        let Some((ei, ej)) = entering else {
            let mut entries = Matrix::zeros(x.len(), y.len());
            for (&(i, j), &f) in basis.iter().zip(&flow) {
                entries.set(rows[i], cols[j], f.max(0.0));
            }
            let plan = TransportPlan::from_parts(entries, x.clone(), y.clone());
            let mut row_potentials = vec![0.0; x.len()];
            let mut col_potentials = vec![0.0; y.len()];
            for (k, &i) in rows.iter().enumerate() {
                row_potentials[i] = u[k];
            }
            for (k, &j) in cols.iter().enumerate() {
                col_potentials[j] = v[k];
            }
            return Ok(NetworkSimplexResult {
                optimal_value: plan.cost(c),
                plan,
                iterations,
                min_reduced_cost: min_rc,
                row_potentials,
                col_potentials,
                basis: basis.iter().map(|&(i, j)| (rows[i], cols[j])).collect(),
                rc_tol,
            });
        };
        iterations += 1;
        if iterations > max_iters {
            return Err(Error::Convergence(format!(
                "network simplex exceeded {max_iters} pivots"
            )));
        }
        let path = tree_path(&basis, m, n, ei, m + ej);
        // Bland: among the decreasing edges with minimal flow, leave the smallest cell.
        let theta = path.iter().step_by(2).map(|&e| flow[e]).fold(f64::INFINITY, f64::min);
        let leaving = path
            .iter()
            .step_by(2)
            .copied()
            .filter(|&e| flow[e] <= theta)
            .min_by_key(|&e| basis[e])
            .expect("cycle has a decreasing edge");
        for (k, &e) in path.iter().enumerate() {
            if k % 2 == 0 {
                flow[e] -= theta;
            } else {
                flow[e] += theta;
            }
        }
        basis[leaving] = (ei, ej);
        flow[leaving] = theta;
    }
}

/// Gap between the best and the second-best vertex objective.
pub fn gap_from_vertices(c: &CostMatrix, vs: &VertexSet, tie_tol: Option<f64>) -> GapReport {
    let costs = vertex_costs(c, vs);
    let best = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = tie_tol.unwrap_or_else(|| default_tie_tol(best));
    let second = costs
        .iter()
        .copied()
        .filter(|&v| v > best + tol)
        .fold(f64::INFINITY, f64::min);
    GapReport {
        delta: second - best,
        best_value: best,
        second_value: second,
        tie_tolerance: tol,
    }
}

/// `Δ_C(x, y)`; requires full vertex enumeration.
pub fn suboptimality_gap(c: &CostMatrix, x: &Histogram, y: &Histogram, tie_tol: Option<f64>) -> Result<GapReport> {
    check_shapes(c, x, y)?;
    let vs = enumerate_vertices(x, y)?;
    Ok(gap_from_vertices(c, &vs, tie_tol))
}

/// `max_V D_U(V, x⊗y)` over an enumerated vertex set.
pub fn radius_from_vertices(gen: &Generator, vs: &VertexSet, x: &Histogram, y: &Histogram) -> Result<f64> {
    let prod = product_plan(x, y)?;
    let mut best = 0.0f64;
    for v in &vs.vertices {
        let d = gen.bregman_divergence(v.entries().as_slice(), prod.entries().as_slice())?;
        best = best.max(d);
    }
    Ok(best)
}

/// `𝔇_U(x, y) = sup_Π D_U(Π, x⊗y)`, attained at a vertex by convexity.
pub fn divergence_radius(gen: &Generator, x: &Histogram, y: &Histogram) -> Result<f64> {
    let vs = enumerate_vertices(x, y)?;
    radius_from_vertices(gen, &vs, x, y)
}

/// Whether `⟨C, ·⟩` is non-constant on `Π(x, y)`.
pub fn check_assumption_xy(c: &CostMatrix, x: &Histogram, y: &Histogram, tie_tol: Option<f64>) -> Result<bool> {
    Ok(suboptimality_gap(c, x, y, tie_tol)?.delta.is_finite())
}
