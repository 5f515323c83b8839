//! Two-sided linear constraints `lᵢ ≤ aᵢᵀx ≤ uᵢ` and the small amount of
//! polyhedral geometry the constrained solver needs.
//!
//! The geometric queries (a feasible point, the minimum-norm point, the
//! vertices) are answered exactly by enumerating sets of linearly
//! independent active rows. That costs `O(3^m)` small solves and is meant
//! for the handful of constraints the constrained solver accepts.

use nalgebra::{DMatrix, DVector};

use crate::error::{PrsError, Result};

/// Rows `aᵢ` with bounds `lᵢ ≤ aᵢᵀx ≤ uᵢ`; `lᵢ = uᵢ` is an equality.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabConstraints {
    rows: DMatrix<f64>,
    lower: DVector<f64>,
    upper: DVector<f64>,
}

/// Relative cut below which a row or a singular value counts as zero.
pub(crate) const RANK_TOL: f64 = 1e-10;

impl SlabConstraints {
    pub fn new(rows: DMatrix<f64>, lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        let m = rows.nrows();
        if lower.len() != m || upper.len() != m {
            return Err(PrsError::InvalidConstraints(format!(
                "{m} rows but {} lower and {} upper bounds",
                lower.len(),
                upper.len()
            )));
        }
        for i in 0..m {
            if lower[i].is_nan() || upper[i].is_nan() || lower[i] > upper[i] {
                return Err(PrsError::InvalidConstraints(format!(
                    "row {i}: lower bound {} exceeds upper bound {}",
                    lower[i], upper[i]
                )));
            }
            if rows.row(i).norm() == 0.0 {
                return Err(PrsError::DegenerateRow(i));
            }
        }
        Ok(Self { rows, lower, upper })
    }

    /// No constraints in dimension `n`.
    pub fn empty(n: usize) -> Self {
        Self {
            rows: DMatrix::zeros(0, n),
            lower: DVector::zeros(0),
            upper: DVector::zeros(0),
        }
    }

    /// Unchecked constructor for rows that may have become zero after a
    /// reduction.
    pub(crate) fn from_parts(rows: DMatrix<f64>, lower: DVector<f64>, upper: DVector<f64>) -> Self {
        Self { rows, lower, upper }
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    pub fn m(&self) -> usize {
        self.rows.nrows()
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn is_equality(&self, i: usize) -> bool {
        self.lower[i] == self.upper[i]
    }

    pub fn max_row_norm(&self) -> f64 {
        (0..self.m())
            .map(|i| self.rows.row(i).norm())
            .fold(0.0, f64::max)
    }

    /// Feasibility slack `1e-8 · (1 + ‖x‖) · maxᵢ‖aᵢ‖`.
    pub fn feasibility_tolerance(&self, x: &DVector<f64>) -> f64 {
        1e-8 * (1.0 + x.norm()) * self.max_row_norm()
    }

    pub fn is_feasible(&self, x: &DVector<f64>) -> bool {
        self.is_feasible_within(x, self.feasibility_tolerance(x))
    }

    pub fn is_feasible_within(&self, x: &DVector<f64>, slack: f64) -> bool {
        (0..self.m()).all(|i| {
            let ax = self.rows.row(i).iter().zip(x.iter()).map(|(a, v)| a * v).sum::<f64>();
            ax >= self.lower[i] - slack && ax <= self.upper[i] + slack
        })
    }

    /// `lᵢ + margin < aᵢᵀx < uᵢ − margin` for every row.
    pub fn is_strictly_interior(&self, x: &DVector<f64>, margin: f64) -> bool {
        let ax = &self.rows * x;
        (0..self.m()).all(|i| ax[i] > self.lower[i] + margin && ax[i] < self.upper[i] - margin)
    }

    /// Largest violation `max(0, lᵢ − aᵢᵀx, aᵢᵀx − uᵢ)`.
    pub fn max_violation(&self, x: &DVector<f64>) -> f64 {
        let ax = &self.rows * x;
        (0..self.m())
            .map(|i| (self.lower[i] - ax[i]).max(ax[i] - self.upper[i]).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Numerical rank of the row matrix.
    pub fn rank(&self) -> usize {
        rank_and_null_space(&self.rows).0
    }

    /// The point of smallest Euclidean norm in the feasible region, or
    /// `None` when the region is empty.
    pub fn min_norm_point(&self) -> Option<DVector<f64>> {
        let rank = self.rank();
        let mut best: Option<DVector<f64>> = None;
        self.for_each_active_set(rank, false, |y| {
            if best.as_ref().map_or(true, |b| y.norm_squared() < b.norm_squared()) {
                best = Some(y);
            }
        });
        best
    }

    /// Any feasible point, or `None` when the region is empty.
    pub fn feasible_point(&self) -> Option<DVector<f64>> {
        self.min_norm_point()
    }

    /// Vertices of the region. Only meaningful when the rows have full
    /// column rank; returns an empty list otherwise.
    pub fn vertices(&self) -> Vec<DVector<f64>> {
        let n = self.dim();
        if self.rank() < n {
            return Vec::new();
        }
        let mut out: Vec<DVector<f64>> = Vec::new();
        self.for_each_active_set(n, true, |v| {
            let scale = 1e-9 * (1.0 + v.norm());
            if !out.iter().any(|w| (w - &v).norm() <= scale) {
                out.push(v);
            }
        });
        out
    }

    /// Calls `visit` with the minimum-norm point of every affine set
    /// `{aᵢᵀy = bᵢ, i ∈ S}` (rows of `S` independent, `bᵢ` one of the two
    /// bounds) that is feasible. `exact_size` restricts `S` to `max_size`
    /// rows.
    fn for_each_active_set<F: FnMut(DVector<f64>)>(
        &self,
        max_size: usize,
        exact_size: bool,
        mut visit: F,
    ) {
        let m = self.m();
        let n = self.dim();
        let row_scale = self.max_row_norm().max(f64::MIN_POSITIVE);
        let mut subset: Vec<usize> = Vec::with_capacity(max_size);

        fn recurse<F: FnMut(&[usize])>(start: usize, m: usize, max: usize, s: &mut Vec<usize>, f: &mut F) {
            f(s);
            if s.len() == max {
                return;
            }
            for i in start..m {
                s.push(i);
                recurse(i + 1, m, max, s, f);
                s.pop();
            }
        }

        recurse(0, m, max_size, &mut subset, &mut |s: &[usize]| {
            if exact_size && s.len() != max_size {
                return;
            }
            let k = s.len();
            if k == 0 {
                let y = DVector::zeros(n);
                if self.is_feasible(&y) {
                    visit(y);
                }
                return;
            }
            let a = DMatrix::from_fn(k, n, |r, c| self.rows[(s[r], c)]);
            let gram = &a * a.transpose();
            let eig_min = gram.clone().symmetric_eigenvalues().min();
            if eig_min <= (RANK_TOL * row_scale).powi(2) {
                return;
            }
            let Some(chol) = gram.cholesky() else {
                return;
            };
            // every side assignment; equalities have a single side
            let sides = 1usize << k;
            for mask in 0..sides {
                if (0..k).any(|r| mask >> r & 1 == 1 && self.is_equality(s[r])) {
                    continue;
                }
                let b = DVector::from_fn(k, |r, _| {
                    if mask >> r & 1 == 1 {
                        self.upper[s[r]]
                    } else {
                        self.lower[s[r]]
                    }
                });
                if b.iter().any(|v| !v.is_finite()) {
                    continue;
                }
                let y = a.transpose() * chol.solve(&b);
                if self.is_feasible(&y) {
                    visit(y);
                }
            }
        });
    }
}

/// Numerical rank of `b` and an orthonormal basis (as columns) of its null
/// space.
pub(crate) fn rank_and_null_space(b: &DMatrix<f64>) -> (usize, DMatrix<f64>) {
    let k = b.ncols();
    if k == 0 {
        return (0, DMatrix::zeros(0, 0));
    }
    // Zero rows up to a square shape so the SVD returns all of V.
    let rows = b.nrows().max(k);
    let mut square = DMatrix::zeros(rows, k);
    square.view_mut((0, 0), (b.nrows(), k)).copy_from(b);
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let top = svd.singular_values.max();
    let null: Vec<usize> = (0..k)
        .filter(|&i| top == 0.0 || svd.singular_values[i] <= RANK_TOL * top)
        .collect();
    let mut basis = DMatrix::zeros(k, null.len());
    for (dst, &src) in null.iter().enumerate() {
        basis.set_column(dst, &v_t.row(src).transpose());
    }
    (k - null.len(), basis)
}
