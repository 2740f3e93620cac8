//! Vertex enumeration of `Π(x, y)`.
//!
//! Two strategies, chosen by whether the marginals are degenerate (some proper
//! subset sum of `x` equals a subset sum of `y`).
//!
//! Nondegenerate marginals: every vertex has exactly one spanning-tree basis, so
//! a breadth-first walk over simplex pivots visits each vertex once. Flows are
//! carried as `val + coef·δ` under Orden's perturbation (supplies `+δ`, last
//! demand `+mδ`) so ties that are exact in real arithmetic but fuzzy in floating
//! point are still broken consistently.
//!
//! Degenerate marginals (uniform ones above all) have vastly more bases than
//! vertices, so instead we use saturation sequences. Vertices are the feasible
//! plans whose support graph is a forest. Any such
//! forest has a leaf, and the edge at a leaf carries the whole remaining mass of
//! that node, i.e. `min(x'_i, y'_j)` for the residual marginals. Conversely,
//! repeatedly saturating a cell at `min(x'_i, y'_j)` always yields a forest
//! (each step retires a node that never receives another edge). So the vertex
//! set is exactly the set of plans produced by saturation sequences; the
//! recursion is memoized on the residual marginals, which collapses the heavy
//! degeneracy of e.g. uniform marginals.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::rc::Rc;

use serde::Serialize;

use super::{check_masses, Histogram, Matrix, TransportPlan};
use crate::error::{Error, Result};

/// Enumeration is refused when `I + J` exceeds this.
pub const MAX_ENUMERATION_SIZE: usize = 14;

const MAX_STATES: usize = 2_000_000;
const MAX_BASES: usize = 4_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct VertexSet {
    pub vertices: Vec<TransportPlan>,
    /// Support forest (cells `(i, j)`) of each vertex.
    pub tree_supports: Vec<Vec<(usize, usize)>>,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

type Completion = Vec<(u16, f64)>;
/// Spanning-forest support of a vertex as `(row, col)` cells.
type Tree = Vec<(usize, usize)>;

struct Peeler {
    m: usize,
    n: usize,
    /// Residuals at or below this are retired.
    tol: f64,
    /// Quantum for memo keys.
    quantum: f64,
    memo: HashMap<Vec<i64>, Rc<Vec<Completion>>>,
}

impl Peeler {
    fn key(&self, res: &[f64]) -> Vec<i64> {
        res.iter().map(|v| (v / self.quantum).round() as i64).collect()
    }

    fn completions(&mut self, res: &[f64]) -> Result<Rc<Vec<Completion>>> {
        let (m, n) = (self.m, self.n);
        let rows: Vec<usize> = (0..m).filter(|&i| res[i] > 0.0).collect();
        let cols: Vec<usize> = (0..n).filter(|&j| res[m + j] > 0.0).collect();
        if rows.is_empty() && cols.is_empty() {
            return Ok(Rc::new(vec![Vec::new()]));
        }
        if rows.is_empty() || cols.is_empty() {
            return Ok(Rc::new(Vec::new()));
        }
        let key = self.key(res);
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        if self.memo.len() >= MAX_STATES {
            return Err(Error::invalid(format!(
                "vertex enumeration exceeded {MAX_STATES} intermediate states"
            )));
        }
        let mut out: BTreeMap<Vec<(u16, i64)>, Completion> = BTreeMap::new();
        for &i in &rows {
            for &j in &cols {
                let f = res[i].min(res[m + j]);
                let mut next = res.to_vec();
                for k in [i, m + j] {
                    next[k] -= f;
                    if next[k] <= self.tol {
                        next[k] = 0.0;
                    }
                }
                let cell = (i * n + j) as u16;
                for tail in self.completions(&next)?.iter() {
                    let mut full = tail.clone();
                    let pos = full.partition_point(|&(c, _)| c < cell);
                    full.insert(pos, (cell, f));
                    let k = full
                        .iter()
                        .map(|&(c, v)| (c, (v / self.quantum).round() as i64))
                        .collect();
                    out.entry(k).or_insert(full);
                }
            }
        }
        let result = Rc::new(out.into_values().collect::<Vec<_>>());
        self.memo.insert(key, result.clone());
        Ok(result)
    }
}

/// All vertices of `Π(x, y)`, deduplicated by an entrywise rounding key at `1e-9`.
pub fn enumerate_vertices(x: &Histogram, y: &Histogram) -> Result<VertexSet> {
    check_masses(x, y)?;
    let size = x.len() + y.len();
    if size > MAX_ENUMERATION_SIZE {
        return Err(Error::SizeGuard {
            size,
            limit: MAX_ENUMERATION_SIZE,
        });
    }
    let rows = x.support();
    let cols = y.support();
    let mass = x.total_mass();
    let mut peeler = Peeler {
        m: rows.len(),
        n: cols.len(),
        tol: 64.0 * f64::EPSILON * mass,
        quantum: 1e-13 * mass,
        memo: HashMap::new(),
    };
    let start: Vec<f64> = rows.iter().map(|&i| x[i]).chain(cols.iter().map(|&j| y[j])).collect();
    let n = peeler.n;

    let mut vertices: BTreeMap<Vec<i64>, (Matrix, Tree)> = BTreeMap::new();
    let completions = if is_degenerate(&start[..peeler.m], &start[peeler.m..], peeler.tol) {
        peeler.completions(&start)?
    } else {
        Rc::new(pivot_walk(&start, peeler.m, n)?)
    };
    for completion in completions.iter() {
        let mut entries = Matrix::zeros(x.len(), y.len());
        let mut tree = Vec::with_capacity(completion.len());
        for &(cell, v) in completion {
            let v = if v.abs() <= peeler.tol { 0.0 } else { v };
            let (i, j) = (rows[cell as usize / n], cols[cell as usize % n]);
            entries.set(i, j, v);
            tree.push((i, j));
        }
        let key = entries
            .as_slice()
            .iter()
            .map(|v| (v / mass * 1e9).round() as i64)
            .collect();
        vertices.entry(key).or_insert((entries, tree));
    }

    let (vertices, tree_supports) = vertices
        .into_values()
        .map(|(entries, tree)| (TransportPlan::from_parts(entries, x.clone(), y.clone()), tree))
        .unzip();
    Ok(VertexSet {
        vertices,
        tree_supports,
    })
}

fn subset_sums(v: &[f64]) -> Vec<f64> {
    let mut sums = vec![0.0];
    for &t in v {
        let extended: Vec<f64> = sums.iter().map(|s| s + t).collect();
        sums.extend(extended);
    }
    sums
}

/// Whether some proper nonempty subset of rows has the mass of some subset of columns.
fn is_degenerate(x: &[f64], y: &[f64], tol: f64) -> bool {
    let mut xs = subset_sums(x);
    // Drop the empty and the full subset.
    xs.remove(0);
    xs.pop();
    let mut ys = subset_sums(y);
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (mut a, mut b) = (0, 0);
    while a < xs.len() && b < ys.len() {
        if (xs[a] - ys[b]).abs() <= tol {
            return true;
        }
        if xs[a] < ys[b] {
            a += 1;
        } else {
            b += 1;
        }
    }
    false
}

#[derive(Clone, Copy, Debug)]
struct Lex {
    val: f64,
    coef: f64,
}

impl Lex {
    fn sub(self, o: Lex) -> Lex {
        Lex {
            val: self.val - o.val,
            coef: self.coef - o.coef,
        }
    }
}

struct Perturbed {
    m: usize,
    n: usize,
    /// Row nodes `0..m` carry supplies, column nodes `m..m+n` demands.
    node_mass: Vec<Lex>,
    tol: f64,
}

impl Perturbed {
    fn sign(&self, a: Lex) -> Ordering {
        if a.val > self.tol {
            Ordering::Greater
        } else if a.val < -self.tol {
            Ordering::Less
        } else {
            a.coef.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
        }
    }

    fn cmp(&self, a: Lex, b: Lex) -> Ordering {
        self.sign(a.sub(b))
    }

    fn endpoints(&self, cell: u16) -> (usize, usize) {
        let cell = cell as usize;
        (cell / self.n, self.m + cell % self.n)
    }

    fn incidence(&self, basis: &[u16]) -> Vec<Vec<usize>> {
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); self.m + self.n];
        for (e, &cell) in basis.iter().enumerate() {
            let (u, v) = self.endpoints(cell);
            incident[u].push(e);
            incident[v].push(e);
        }
        incident
    }

    /// Basic flows by peeling leaves off the spanning tree.
    fn flows(&self, basis: &[u16]) -> Vec<Lex> {
        let nodes = self.m + self.n;
        let incident = self.incidence(basis);
        let mut degree: Vec<usize> = incident.iter().map(Vec::len).collect();
        let mut residual = self.node_mass.clone();
        let mut flow = vec![Lex { val: 0.0, coef: 0.0 }; basis.len()];
        let mut done = vec![false; basis.len()];
        let mut queue: VecDeque<usize> = (0..nodes).filter(|&u| degree[u] == 1).collect();
        while let Some(u) = queue.pop_front() {
            if degree[u] != 1 {
                continue;
            }
            let e = *incident[u].iter().find(|&&e| !done[e]).expect("leaf edge");
            let (a, b) = self.endpoints(basis[e]);
            let other = if a == u { b } else { a };
            flow[e] = residual[u];
            residual[other] = residual[other].sub(residual[u]);
            done[e] = true;
            degree[u] -= 1;
            degree[other] -= 1;
            if degree[other] == 1 {
                queue.push_back(other);
            }
        }
        flow
    }

    fn northwest_corner(&self) -> Vec<u16> {
        let (m, n) = (self.m, self.n);
        let mut basis = Vec::with_capacity(m + n - 1);
        let (mut i, mut j) = (0, 0);
        let mut supply = self.node_mass[0];
        let mut demand = self.node_mass[m];
        loop {
            basis.push((i * n + j) as u16);
            if i == m - 1 && j == n - 1 {
                break;
            }
            let move_row = match self.cmp(supply, demand) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => i < m - 1,
            };
            if (move_row && i < m - 1) || j == n - 1 {
                demand = demand.sub(supply);
                i += 1;
                supply = self.node_mass[i];
            } else {
                supply = supply.sub(demand);
                j += 1;
                demand = self.node_mass[m + j];
            }
        }
        basis
    }

    /// Edges (positions in `basis`) on the tree path from row `r` to column node `c`,
    /// ordered from `c` back to `r`.
    fn tree_path(&self, incident: &[Vec<usize>], basis: &[u16], r: usize, c: usize) -> Vec<usize> {
        let nodes = self.m + self.n;
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; nodes];
        let mut seen = vec![false; nodes];
        seen[r] = true;
        let mut queue = VecDeque::from([r]);
        while let Some(u) = queue.pop_front() {
            if u == c {
                break;
            }
            for &e in &incident[u] {
                let (a, b) = self.endpoints(basis[e]);
                let v = if a == u { b } else { a };
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
}

/// Breadth-first walk over the feasible bases of the perturbed problem.
fn pivot_walk(start: &[f64], m: usize, n: usize) -> Result<Vec<Completion>> {
    let mass: f64 = start[..m].iter().sum();
    let mut node_mass: Vec<Lex> = start[..m].iter().map(|&v| Lex { val: v, coef: 1.0 }).collect();
    node_mass.extend(start[m..].iter().map(|&v| Lex { val: v, coef: 0.0 }));
    node_mass[m + n - 1].coef = m as f64;
    let problem = Perturbed {
        m,
        n,
        node_mass,
        tol: 16.0 * f64::EPSILON * mass,
    };

    let first = problem.northwest_corner();
    let mut seen: HashSet<Vec<u16>> = HashSet::from([first.clone()]);
    let mut queue = VecDeque::from([first]);
    let mut out = Vec::new();
    while let Some(basis) = queue.pop_front() {
        let flow = problem.flows(&basis);
        out.push(basis.iter().zip(&flow).map(|(&c, f)| (c, f.val)).collect());

        let incident = problem.incidence(&basis);
        let in_basis: HashSet<u16> = basis.iter().copied().collect();
        for cell in 0..(m * n) as u16 {
            if in_basis.contains(&cell) {
                continue;
            }
            let (r, c) = problem.endpoints(cell);
            let path = problem.tree_path(&incident, &basis, r, c);
            // Walking back from the column, the cycle signs alternate starting with a decrease.
            let leaving = path
                .iter()
                .step_by(2)
                .copied()
                .min_by(|&a, &b| problem.cmp(flow[a], flow[b]))
                .expect("cycle has a decreasing edge");
            let mut next = basis.clone();
            next[leaving] = cell;
            next.sort_unstable();
            if seen.insert(next.clone()) {
                if seen.len() > MAX_BASES {
                    return Err(Error::invalid(format!(
                        "vertex enumeration visited more than {MAX_BASES} bases"
                    )));
                }
                queue.push_back(next);
            }
        }
    }
    Ok(out)
}
