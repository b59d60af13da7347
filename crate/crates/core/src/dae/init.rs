//! Consistent initialization of index-1 descriptor systems.

use super::system::DescriptorSystem;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::{SparseLu, SparseMatrix};

/// Differential/algebraic partition of a pencil `(A, B)`.
///
/// A variable is differential iff its column of `A` is nonzero; an equation
/// is algebraic iff its row of `A` is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSplit {
    pub differential_vars: Vec<usize>,
    pub algebraic_vars: Vec<usize>,
    pub differential_rows: Vec<usize>,
    pub algebraic_rows: Vec<usize>,
}

impl VariableSplit {
    pub fn from_pencil<S: Scalar>(a: &SparseMatrix<S>) -> Result<Self> {
        let used = a.nonzero_columns();
        let (differential_vars, algebraic_vars): (Vec<usize>, Vec<usize>) = (0..a.ncols()).partition(|&j| used[j]);
        let (algebraic_rows, differential_rows): (Vec<usize>, Vec<usize>) = (0..a.nrows()).partition(|&i| a.row_is_empty(i));
        if algebraic_rows.len() != algebraic_vars.len() {
            return Err(Error::Structure(format!(
                "{} algebraic equations for {} algebraic variables; the pencil is not semi-explicit",
                algebraic_rows.len(),
                algebraic_vars.len()
            )));
        }
        Ok(Self { differential_vars, algebraic_vars, differential_rows, algebraic_rows })
    }

    pub fn is_ode(&self) -> bool {
        self.algebraic_vars.is_empty()
    }
}

/// State and slope after a (re)initialization.
#[derive(Debug, Clone)]
pub struct ConsistentState<S> {
    pub x: Vec<S>,
    pub xdot: Vec<S>,
    /// Max-norm of each Newton increment on the algebraic variables.
    pub newton_increments: Vec<f64>,
}

/// Reusable consistent initialization for one pencil.
///
/// Factorizes the algebraic block `B_aa` and the slope matrix (differential
/// rows of `A` stacked with algebraic rows of `B`) once.
pub struct ConsistentInitializer<S: Scalar> {
    a: SparseMatrix<S>,
    b: SparseMatrix<S>,
    split: VariableSplit,
    b_alg: SparseMatrix<S>,
    b_aa: Option<SparseLu<S>>,
    slope: SparseLu<S>,
}

impl<S: Scalar> ConsistentInitializer<S> {
    pub fn new(sys: &DescriptorSystem<S>) -> Result<Self> {
        let split = VariableSplit::from_pencil(&sys.a)?;
        let b_aa = if split.algebraic_vars.is_empty() {
            None
        } else {
            let m = sys.b.select(&split.algebraic_rows, &split.algebraic_vars);
            Some(SparseLu::factorize(&m, "algebraic block").map_err(|_| {
                Error::Consistency("algebraic subsystem is singular (index > 1 or inconsistent model)".into())
            })?)
        };
        let b_alg = sys.b.select(&split.algebraic_rows, &(0..sys.dim()).collect::<Vec<_>>());
        let mut is_alg_row = vec![false; sys.dim()];
        for &i in &split.algebraic_rows {
            is_alg_row[i] = true;
        }
        let entries = sys
            .a
            .triplets()
            .filter(|&(i, _, _)| !is_alg_row[i])
            .chain(sys.b.triplets().filter(|&(i, _, _)| is_alg_row[i]));
        let slope_matrix = SparseMatrix::from_triplets(sys.dim(), sys.dim(), entries);
        let slope = SparseLu::factorize(&slope_matrix, "slope system")
            .map_err(|_| Error::Consistency("slope system is singular".into()))?;
        Ok(Self { a: sys.a.clone(), b: sys.b.clone(), split, b_alg, b_aa, slope })
    }

    pub fn split(&self) -> &VariableSplit {
        &self.split
    }

    /// Keeps the differential variables of `x_prev`, solves the algebraic
    /// equations for the rest and computes the slope for excitation `c`.
    pub fn initialize(&self, c: &[S], x_prev: &[S]) -> Result<ConsistentState<S>> {
        let n = self.a.nrows();
        if c.len() != n || x_prev.len() != n {
            return Err(Error::Dimension(format!("consistent init expects length {n}")));
        }
        let mut x = x_prev.to_vec();
        let mut newton_increments = Vec::new();
        if let Some(lu) = &self.b_aa {
            let m = self.split.algebraic_rows.len();
            let mut bx = vec![S::zero(); m];
            for _ in 0..2 {
                self.b_alg.mul_vec(&x, &mut bx);
                let mut r: Vec<S> = self.split.algebraic_rows.iter().zip(&bx).map(|(&i, &v)| c[i] - v).collect();
                lu.solve_in_place(&mut r)?;
                let mut inc: f64 = 0.0;
                for (&j, &d) in self.split.algebraic_vars.iter().zip(&r) {
                    x[j] += d;
                    inc = inc.max(d.modulus());
                }
                newton_increments.push(inc);
            }
        }
        let xdot = self.slope(c, &x)?;
        Ok(ConsistentState { x, xdot, newton_increments })
    }

    /// Slope `x'` with `A x' = c - B x` on differential rows and
    /// `B_alg x' = 0` on algebraic rows (piecewise constant excitation).
    pub fn slope(&self, c: &[S], x: &[S]) -> Result<Vec<S>> {
        let n = self.a.nrows();
        let mut bx = vec![S::zero(); n];
        self.b.mul_vec(x, &mut bx);
        let mut r: Vec<S> = (0..n).map(|i| c[i] - bx[i]).collect();
        for &i in &self.split.algebraic_rows {
            r[i] = S::zero();
        }
        self.slope.solve_in_place(&mut r)?;
        Ok(r)
    }

    /// Max-norm of the algebraic residual `c - B x` over algebraic rows.
    pub fn algebraic_residual(&self, c: &[S], x: &[S]) -> f64 {
        let mut bx = vec![S::zero(); self.split.algebraic_rows.len()];
        self.b_alg.mul_vec(x, &mut bx);
        self.split
            .algebraic_rows
            .iter()
            .zip(&bx)
            .map(|(&i, &v)| (c[i] - v).modulus())
            .fold(0.0, f64::max)
    }
}

/// One-shot consistent initialization; see [`ConsistentInitializer`].
pub fn consistent_init<S: Scalar>(sys: &DescriptorSystem<S>, c_plus: &[S], x_prev: &[S]) -> Result<ConsistentState<S>> {
    ConsistentInitializer::new(sys)?.initialize(c_plus, x_prev)
}
