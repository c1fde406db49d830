//! Compressed sparse row storage and a sparse LU wrapper.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use super::SolverError;

/// Accepted normwise backward error ‖Ax − b‖∞ / max(‖b‖∞, ‖A‖∞‖x‖∞).
pub const RESIDUAL_TOL: f64 = 1e-11;

/// Coordinate-format accumulator; duplicates are summed on conversion.
#[derive(Clone, Debug, Default)]
pub struct Triplets {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Triplets { nrows, ncols, entries: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_triplets(t: &Triplets) -> Self {
        let mut counts = vec![0usize; t.nrows + 1];
        for &(r, _, _) in &t.entries {
            counts[r + 1] += 1;
        }
        for i in 0..t.nrows {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; t.entries.len()];
        let mut vals = vec![0.0; t.entries.len()];
        let mut next = counts.clone();
        for &(r, c, v) in &t.entries {
            cols[next[r]] = c;
            vals[next[r]] = v;
            next[r] += 1;
        }
        // sort each row by column and merge duplicates, in a fixed order
        let mut row_ptr = Vec::with_capacity(t.nrows + 1);
        let mut col_idx = Vec::with_capacity(t.entries.len());
        let mut values = Vec::with_capacity(t.entries.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for r in 0..t.nrows {
            scratch.clear();
            scratch.extend((counts[r]..counts[r + 1]).map(|k| (cols[k], vals[k])));
            scratch.sort_by_key(|&(c, _)| c);
            for &(c, v) in &scratch {
                if col_idx.len() > row_ptr[r] && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { nrows: t.nrows, ncols: t.ncols, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(j, _)| j == c).map_or(0.0, |(_, v)| v)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut t = Triplets::new(self.ncols, self.nrows);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                t.push(c, r, v);
            }
        }
        CsrMatrix::from_triplets(&t)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                d[r][c] += v;
            }
        }
        d
    }
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Backward error of a computed solution.
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r = ax.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let scale = norm_inf(b).max(a.norm_inf() * norm_inf(x));
    if scale == 0.0 {
        r
    } else {
        r / scale
    }
}

/// LU factors (fill-reducing ordering, partial pivoting) kept with the matrix for residual checks.
pub struct Factorization {
    matrix: CsrMatrix,
    lu: Lu<usize, f64>,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization").field("n", &self.matrix.nrows).field("nnz", &self.matrix.nnz()).finish()
    }
}

impl Factorization {
    pub fn new(matrix: CsrMatrix) -> Result<Self, SolverError> {
        if matrix.nrows != matrix.ncols {
            return Err(SolverError::Dimension(format!(
                "matrix is {}x{}, expected square",
                matrix.nrows, matrix.ncols
            )));
        }
        let mut trip = Vec::with_capacity(matrix.nnz());
        for r in 0..matrix.nrows {
            for (c, v) in matrix.row(r) {
                trip.push(Triplet::new(r, c, v));
            }
        }
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(matrix.nrows, matrix.ncols, &trip)
            .map_err(|e| SolverError::Singular(format!("{e:?}")))?;
        let lu = a.sp_lu().map_err(|e| SolverError::Singular(format!("{e:?}")))?;
        Ok(Factorization { matrix, lu })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Solves with one step of iterative refinement when the first residual is not small enough.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SolverError> {
        let n = self.matrix.nrows;
        if b.len() != n {
            return Err(SolverError::Dimension(format!("rhs has {} entries, expected {n}", b.len())));
        }
        let raw = |rhs: &[f64]| -> Vec<f64> {
            let mut m = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
            self.lu.solve_in_place(m.as_mut());
            (0..n).map(|i| m[(i, 0)]).collect()
        };
        let mut x = raw(b);
        let mut res = relative_residual(&self.matrix, &x, b);
        if !(res <= RESIDUAL_TOL) && res.is_finite() {
            let ax = self.matrix.mul_vec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
            let dx = raw(&r);
            for (xi, d) in x.iter_mut().zip(dx) {
                *xi += d;
            }
            res = relative_residual(&self.matrix, &x, b);
        }
        if !(res <= RESIDUAL_TOL) {
            return Err(SolverError::Inaccurate { residual: res });
        }
        Ok(x)
    }
}

pub fn sparse_solve(matrix: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>, SolverError> {
    Factorization::new(matrix.clone())?.solve(rhs)
}
