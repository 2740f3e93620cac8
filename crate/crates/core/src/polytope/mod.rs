//! Histograms, cost matrices and transport plans on the polytope `Π(x, y)`.

mod vertices;

use std::fmt;
use std::ops::Index;

use serde::Serialize;

use crate::error::{Error, Result};

pub use vertices::{enumerate_vertices, VertexSet, MAX_ENUMERATION_SIZE};

/// Entries at or below this fraction of the total mass count as zeros for support purposes.
pub const SUPPORT_THRESHOLD: f64 = 1e-15;

/// Nonnegative vector summing to `total_mass` (1 unless the data was scaled).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    values: Vec<f64>,
    total_mass: f64,
}

impl Histogram {
    /// A probability histogram; the sum must be 1 up to rounding.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_mass(values, 1.0)
    }

    /// A histogram whose entries sum to `total_mass`.
    pub fn with_mass(values: Vec<f64>, total_mass: f64) -> Result<Self> {
        if !(total_mass.is_finite() && total_mass > 0.0) {
            return Err(Error::invalid(format!("total mass must be positive, got {total_mass}")));
        }
        if values.is_empty() {
            return Err(Error::invalid("histogram is empty"));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(format!(
                "histogram entries must be nonnegative and finite, got {v}"
            )));
        }
        let sum: f64 = values.iter().sum();
        let tol = 1e-12 * total_mass * values.len().max(1) as f64;
        if (sum - total_mass).abs() > tol {
            return Err(Error::invalid(format!(
                "histogram sums to {sum}, expected {total_mass}"
            )));
        }
        Ok(Histogram { values, total_mass })
    }

    /// Rescales nonnegative weights to a probability histogram.
    pub fn normalized(values: Vec<f64>) -> Result<Self> {
        let sum: f64 = values.iter().sum();
        if !(sum.is_finite() && sum > 0.0) {
            return Err(Error::invalid("histogram weights must have a positive sum"));
        }
        Self::new(values.into_iter().map(|v| v / sum).collect())
    }

    /// Uniform probability histogram of length `n`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("histogram is empty"));
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    /// `a·z` with total mass `a·mass`.
    pub fn scaled(&self, a: f64) -> Result<Self> {
        Self::with_mass(self.values.iter().map(|v| a * v).collect(), a * self.total_mass)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn in_support(&self, k: usize) -> bool {
        self.values[k] > SUPPORT_THRESHOLD * self.total_mass
    }

    /// Indices of the entries treated as nonzero.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.in_support(k)).collect()
    }
}

impl Index<usize> for Histogram {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.values[k]
    }
}

/// Dense row-major real matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Cost matrix `C` of the linear objective `⟨C, Π⟩`.
pub type CostMatrix = Matrix;

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix must have at least one row and column"));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged matrix rows"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Frobenius inner product `⟨A, B⟩`.
    pub fn dot(&self, other: &Matrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, k: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| k * v).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, v) in sums.iter_mut().zip(self.row(i)) {
                *s += v;
            }
        }
        sums
    }

    pub fn same_shape(&self, other: &Matrix) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            writeln!(f, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// A member of `Π(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransportPlan {
    entries: Matrix,
    row_marginal: Histogram,
    col_marginal: Histogram,
}

impl TransportPlan {
    /// Checks feasibility at an absolute tolerance of `1e-9 · mass`.
    pub fn new(entries: Matrix, x: &Histogram, y: &Histogram) -> Result<Self> {
        let check = validate_plan(&entries, x, y, 1e-9 * x.total_mass());
        if !check.valid {
            return Err(Error::invalid(format!("not a transport plan: {}", check.violations[0])));
        }
        Ok(Self::from_parts(entries, x.clone(), y.clone()))
    }

    pub(crate) fn from_parts(entries: Matrix, x: Histogram, y: Histogram) -> Self {
        TransportPlan {
            entries,
            row_marginal: x,
            col_marginal: y,
        }
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(i, j)
    }

    pub fn x(&self) -> &Histogram {
        &self.row_marginal
    }

    pub fn y(&self) -> &Histogram {
        &self.col_marginal
    }

    /// `⟨C, Π⟩`.
    pub fn cost(&self, c: &CostMatrix) -> f64 {
        self.entries.dot(c)
    }

    pub fn nonzeros(&self, tol: f64) -> usize {
        self.entries.as_slice().iter().filter(|v| v.abs() > tol).count()
    }

    /// `(1 - t)·self + t·other`.
    pub fn mix(&self, other: &TransportPlan, t: f64) -> TransportPlan {
        let data = self
            .entries
            .as_slice()
            .iter()
            .zip(other.entries.as_slice())
            .map(|(a, b)| (1.0 - t) * a + t * b)
            .collect();
        TransportPlan {
            entries: Matrix {
                rows: self.entries.rows,
                cols: self.entries.cols,
                data,
            },
            row_marginal: self.row_marginal.clone(),
            col_marginal: self.col_marginal.clone(),
        }
    }

    pub fn validate(&self, tol: f64) -> PlanCheck {
        validate_plan(&self.entries, &self.row_marginal, &self.col_marginal, tol)
    }
}

fn check_masses(x: &Histogram, y: &Histogram) -> Result<()> {
    let (mx, my) = (x.total_mass(), y.total_mass());
    if ((mx - my) / mx.max(my)).abs() > 1e-12 {
        return Err(Error::invalid(format!("total-mass mismatch: x has {mx}, y has {my}")));
    }
    Ok(())
}

/// `x⊗y` with entries `x_i y_j / mass`, the reference point of the divergence.
pub fn product_plan(x: &Histogram, y: &Histogram) -> Result<TransportPlan> {
    check_masses(x, y)?;
    let m = x.total_mass();
    let entries = Matrix::from_fn(x.len(), y.len(), |i, j| x[i] * y[j] / m);
    Ok(TransportPlan::from_parts(entries, x.clone(), y.clone()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Violation {
    Shape {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    Negative {
        i: usize,
        j: usize,
        value: f64,
    },
    RowMarginal {
        i: usize,
        sum: f64,
        expected: f64,
    },
    ColMarginal {
        j: usize,
        sum: f64,
        expected: f64,
    },
    Support {
        i: usize,
        j: usize,
        value: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape {
                rows,
                cols,
                expected_rows,
                expected_cols,
            } => write!(f, "shape {rows}x{cols}, expected {expected_rows}x{expected_cols}"),
            Violation::Negative { i, j, value } => write!(f, "negative entry {value} at ({i},{j})"),
            Violation::RowMarginal { i, sum, expected } => {
                write!(f, "row {i} sums to {sum}, expected {expected}")
            }
            Violation::ColMarginal { j, sum, expected } => {
                write!(f, "column {j} sums to {sum}, expected {expected}")
            }
            Violation::Support { i, j, value } => {
                write!(f, "mass {value} at ({i},{j}) outside spt(x) x spt(y)")
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PlanCheck {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

/// Checks nonnegativity, both marginals and the support condition, each within `tol`.
pub fn validate_plan(entries: &Matrix, x: &Histogram, y: &Histogram, tol: f64) -> PlanCheck {
    let mut violations = Vec::new();
    if entries.rows() != x.len() || entries.cols() != y.len() {
        violations.push(Violation::Shape {
            rows: entries.rows(),
            cols: entries.cols(),
            expected_rows: x.len(),
            expected_cols: y.len(),
        });
        return PlanCheck {
            valid: false,
            violations,
        };
    }
    for i in 0..x.len() {
        for j in 0..y.len() {
            let v = entries.get(i, j);
            if v < -tol {
                violations.push(Violation::Negative { i, j, value: v });
            }
            if v.abs() > tol && !(x.in_support(i) && y.in_support(j)) {
                violations.push(Violation::Support { i, j, value: v });
            }
        }
    }
    for (i, sum) in entries.row_sums().into_iter().enumerate() {
        if (sum - x[i]).abs() > tol {
            violations.push(Violation::RowMarginal { i, sum, expected: x[i] });
        }
    }
    for (j, sum) in entries.col_sums().into_iter().enumerate() {
        if (sum - y[j]).abs() > tol {
            violations.push(Violation::ColMarginal { j, sum, expected: y[j] });
        }
    }
    PlanCheck {
        valid: violations.is_empty(),
        violations,
    }
}

/// Basis of the tangent space of `Π(x, y)`: matrices with zero marginals on `spt(x) × spt(y)`.
///
/// With supports `r₀ < r₁ < …` and `c₀ < c₁ < …` the elements are
/// `E(r₀,c₀) - E(r₀,c_j) - E(r_i,c₀) + E(r_i,c_j)` for `i, j ≥ 1`.
pub fn null_space_basis(x: &Histogram, y: &Histogram) -> Vec<Matrix> {
    let rs = x.support();
    let cs = y.support();
    let mut basis = Vec::new();
    for &ri in rs.iter().skip(1) {
        for &cj in cs.iter().skip(1) {
            let mut b = Matrix::zeros(x.len(), y.len());
            b.set(rs[0], cs[0], 1.0);
            b.set(rs[0], cj, -1.0);
            b.set(ri, cs[0], -1.0);
            b.set(ri, cj, 1.0);
            basis.push(b);
        }
    }
    basis
}
