//! Compressed sparse row matrices and a sparse LU backed by `faer`.

use std::sync::Once;

use faer::prelude::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, SymbolicSparseColMat, Triplet};
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

static SEQUENTIAL: Once = Once::new();

/// Factorizations run single-threaded; parallelism lives one level up, across
/// independent subsystems, and sequential kernels keep results reproducible.
fn force_sequential() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

/// Sparse matrix in CSR layout with sorted, duplicate-free column indices.
///
/// Exact zeros are not stored, so an empty row means a structurally zero row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<S> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<S>,
}

impl<S: Scalar> SparseMatrix<S> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, S::from_real(1.0))))
    }

    /// Builds a matrix from `(row, col, value)` entries, summing duplicates.
    ///
    /// Panics if an index is out of bounds.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, entries: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, S)>,
    {
        let mut entries: Vec<(usize, usize, S)> = entries.into_iter().collect();
        for &(i, j, _) in &entries {
            assert!(i < nrows && j < ncols, "entry ({i}, {j}) out of bounds for {nrows}x{ncols}");
        }
        entries.sort_by_key(|&(i, j, _)| (i, j));

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<S> = Vec::with_capacity(entries.len());
        let mut rows = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            if let (Some(&last_row), Some(&last_col)) = (rows.last(), col_idx.last()) {
                if last_row == i && last_col == j {
                    *values.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(i);
            col_idx.push(j);
            values.push(v);
        }
        // drop entries that summed to exact zero
        let mut k = 0;
        for idx in 0..values.len() {
            if values[idx] != S::zero() {
                rows[k] = rows[idx];
                col_idx[k] = col_idx[idx];
                values[k] = values[idx];
                k += 1;
            }
        }
        rows.truncate(k);
        col_idx.truncate(k);
        values.truncate(k);
        for &i in &rows {
            row_ptr[i + 1] += 1;
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_dense(m: &DMatrix<S>) -> Self {
        let mut t = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                t.push((i, j, m[(i, j)]));
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterator over the stored entries of row `i` as `(col, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, S)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn row_is_empty(&self, i: usize) -> bool {
        self.row_ptr[i] == self.row_ptr[i + 1]
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => S::zero(),
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, S)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// Columns holding at least one stored entry.
    pub fn nonzero_columns(&self) -> Vec<bool> {
        let mut used = vec![false; self.ncols];
        for &j in &self.col_idx {
            used[j] = true;
        }
        used
    }

    /// `y = self * x`
    pub fn mul_vec(&self, x: &[S], y: &mut [S]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = S::zero();
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            *yi = acc;
        }
    }

    /// `y += alpha * self * x`
    pub fn mul_vec_acc(&self, alpha: S, x: &[S], y: &mut [S]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = S::zero();
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            *yi += alpha * acc;
        }
    }

    pub fn scaled(&self, alpha: S) -> Self {
        Self::from_triplets(self.nrows, self.ncols, self.triplets().map(|(i, j, v)| (i, j, alpha * v)))
    }

    /// `alpha * self + beta * other`
    pub fn lin_comb(&self, alpha: S, other: &Self, beta: S) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let entries = self
            .triplets()
            .map(|(i, j, v)| (i, j, alpha * v))
            .chain(other.triplets().map(|(i, j, v)| (i, j, beta * v)));
        Self::from_triplets(self.nrows, self.ncols, entries)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> SparseMatrix<T> {
        SparseMatrix::from_triplets(self.nrows, self.ncols, self.triplets().map(|(i, j, v)| (i, j, f(v))))
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.triplets().map(|(i, j, v)| (j, i, v)))
    }

    /// Submatrix selecting the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (new, &old) in cols.iter().enumerate() {
            col_map[old] = new;
        }
        let mut t = Vec::new();
        for (new_i, &old_i) in rows.iter().enumerate() {
            for (j, v) in self.row(old_i) {
                if col_map[j] != usize::MAX {
                    t.push((new_i, col_map[j], v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), t)
    }

    /// Kronecker product `left ⊗ self` for a small dense left factor.
    ///
    /// Blocks with a zero left coefficient are not stored.
    pub fn kron_left(&self, left: &DMatrix<S>) -> Self {
        let (n, m) = (self.nrows, self.ncols);
        let mut t = Vec::new();
        for bi in 0..left.nrows() {
            for bj in 0..left.ncols() {
                let c = left[(bi, bj)];
                if c == S::zero() {
                    continue;
                }
                t.extend(self.triplets().map(|(i, j, v)| (bi * n + i, bj * m + j, c * v)));
            }
        }
        Self::from_triplets(left.nrows() * n, left.ncols() * m, t)
    }

    pub fn to_dense(&self) -> DMatrix<S> {
        let mut d = DMatrix::from_element(self.nrows, self.ncols, S::zero());
        for (i, j, v) in self.triplets() {
            d[(i, j)] = v;
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, S>> {
        let t: Vec<Triplet<usize, usize, S>> =
            self.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &t)
            .map_err(|e| Error::Dimension(format!("{e:?}")))
    }
}

impl SparseMatrix<f64> {
    /// One `row col value` line per stored entry, row-major.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, j, v) in self.triplets() {
            s.push_str(&format!("{i} {j} {v:.17e}\n"));
        }
        s
    }
}

/// Sparse LU factorization.
pub struct SparseLu<S: Scalar> {
    n: usize,
    lu: Lu<usize, S>,
}

impl<S: Scalar> SparseLu<S> {
    pub fn factorize(m: &SparseMatrix<S>, context: &str) -> Result<Self> {
        force_sequential();
        if m.nrows != m.ncols {
            return Err(Error::Dimension(format!("{context}: LU of non-square {}x{} matrix", m.nrows, m.ncols)));
        }
        let lu = m.to_faer()?.sp_lu().map_err(|_| Error::Singular { context: context.to_string() })?;
        Ok(Self { n: m.nrows, lu })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves in place; fails if the result is not finite (numerically singular).
    pub fn solve_in_place(&self, rhs: &mut [S]) -> Result<()> {
        assert_eq!(rhs.len(), self.n);
        let mut b = faer::Mat::<S>::from_fn(self.n, 1, |i, _| rhs[i]);
        self.lu.solve_in_place(b.as_mut());
        for (i, r) in rhs.iter_mut().enumerate() {
            *r = b[(i, 0)];
        }
        if rhs.iter().all(|v| v.is_finite_value()) {
            Ok(())
        } else {
            Err(Error::Singular { context: "LU solve produced non-finite values".into() })
        }
    }

    pub fn solve(&self, rhs: &[S]) -> Result<Vec<S>> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }
}

/// Repeated factorization of `alpha * A + beta * B` for a fixed pencil.
///
/// The union sparsity pattern and its symbolic LU are computed once; each
/// call to [`Pencil::factorize`] only redoes the numeric phase.
pub struct Pencil<S: Scalar> {
    n: usize,
    symbolic: SymbolicSparseColMat<usize>,
    a_slots: Vec<(usize, S)>,
    b_slots: Vec<(usize, S)>,
    symbolic_lu: Option<SymbolicLu<usize>>,
    factorizations: usize,
}

impl<S: Scalar> Pencil<S> {
    pub fn new(a: &SparseMatrix<S>, b: &SparseMatrix<S>) -> Result<Self> {
        force_sequential();
        let n = a.nrows();
        if a.ncols() != n || b.nrows() != n || b.ncols() != n {
            return Err(Error::Dimension("pencil matrices must be square and equal-sized".into()));
        }
        // column-major union pattern
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, j, _) in a.triplets().chain(b.triplets()) {
            cols[j].push(i);
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        col_ptr.push(0);
        for c in &mut cols {
            c.sort_unstable();
            c.dedup();
            row_idx.extend_from_slice(c);
            col_ptr.push(row_idx.len());
        }
        let slot = |i: usize, j: usize| -> usize {
            let start = col_ptr[j];
            start + row_idx[start..col_ptr[j + 1]].binary_search(&i).expect("entry in union pattern")
        };
        let a_slots = a.triplets().map(|(i, j, v)| (slot(i, j), v)).collect();
        let b_slots = b.triplets().map(|(i, j, v)| (slot(i, j), v)).collect();
        let symbolic = SymbolicSparseColMat::new_checked(n, n, col_ptr, None, row_idx);
        Ok(Self {
            n,
            symbolic,
            a_slots,
            b_slots,
            symbolic_lu: None,
            factorizations: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of numeric factorizations performed so far.
    pub fn factorizations(&self) -> usize {
        self.factorizations
    }

    pub fn factorize(&mut self, alpha: S, beta: S) -> Result<SparseLu<S>> {
        let mut values = vec![S::zero(); self.symbolic.row_idx().len()];
        for &(k, v) in &self.a_slots {
            values[k] += alpha * v;
        }
        for &(k, v) in &self.b_slots {
            values[k] += beta * v;
        }
        let mat = SparseColMat::new(self.symbolic.clone(), values);
        let symbolic_lu = match &self.symbolic_lu {
            Some(s) => s.clone(),
            None => {
                let s = SymbolicLu::try_new(self.symbolic.as_ref())
                    .map_err(|e| Error::Singular { context: format!("symbolic LU: {e:?}") })?;
                self.symbolic_lu = Some(s.clone());
                s
            }
        };
        let lu = Lu::try_new_with_symbolic(symbolic_lu, mat.as_ref())
            .map_err(|_| Error::Singular { context: "iteration matrix".into() })?;
        self.factorizations += 1;
        Ok(SparseLu { n: self.n, lu })
    }
}
