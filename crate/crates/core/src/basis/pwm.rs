use nalgebra::DMatrix;

use super::poly::PiecewisePolynomial;
use crate::error::{Error, Result};

const DEGENERACY_TOL: f64 = 1e-10;

/// Relative time `τ = (t / Ts) mod 1`.
pub fn relative_time(t: f64, period: f64) -> f64 {
    let tau = (t / period).rem_euclid(1.0);
    // rem_euclid may round up to exactly 1.0 for tiny negative inputs
    if tau >= 1.0 {
        0.0
    } else {
        tau
    }
}

/// Orthonormal PWM basis `p_0, ..., p_Np` for a duty cycle `D`.
///
/// `p_0 ≡ 1`, `p_1` is the duty-cycle ramp rising on `[0, D]` and falling on
/// `[D, 1]`, and `p_k` for `k ≥ 2` is the orthonormalized antiderivative of
/// `p_{k-1}`. All functions are continuous and periodic on the unit period.
#[derive(Debug, Clone)]
pub struct PwmBasis {
    duty: f64,
    functions: Vec<PiecewisePolynomial>,
}

impl PwmBasis {
    pub fn generate(order: usize, duty: f64) -> Result<Self> {
        if !(duty > 0.0 && duty < 1.0) {
            return Err(Error::DutyCycle(duty));
        }
        let bp = vec![0.0, duty, 1.0];
        let sqrt3 = 3f64.sqrt();
        let mut functions = vec![PiecewisePolynomial::constant(bp.clone(), 1.0)];
        if order >= 1 {
            // √3 (2τ - D)/D on [0, D] and √3 (1 + D - 2τ)/(1 - D) on [D, 1]
            // are ±√3 s in the local coordinates
            functions.push(PiecewisePolynomial::new(bp, vec![vec![0.0, sqrt3], vec![0.0, -sqrt3]]));
        }
        for k in 2..=order {
            let mut f = functions[k - 1].antiderivative();
            // modified Gram-Schmidt, one reorthogonalization pass
            for _ in 0..2 {
                for p in &functions {
                    let c = f.inner(p);
                    f.axpy(-c, p);
                }
            }
            let norm = f.inner(&f).sqrt();
            if !(norm >= DEGENERACY_TOL) {
                return Err(Error::DegenerateBasis { index: k, norm });
            }
            let sign = f.leading_sign(0);
            f.scale(if sign < 0.0 { -1.0 } else { 1.0 } / norm);
            functions.push(f);
        }
        Ok(Self { duty, functions })
    }

    pub fn duty(&self) -> f64 {
        self.duty
    }

    /// Highest basis index `Np`.
    pub fn order(&self) -> usize {
        self.functions.len() - 1
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn functions(&self) -> &[PiecewisePolynomial] {
        &self.functions
    }

    pub fn function(&self, k: usize) -> &PiecewisePolynomial {
        &self.functions[k]
    }

    /// `[p_0(τ), ..., p_Np(τ)]` for `τ ∈ [0, 1]`.
    pub fn eval_tau(&self, tau: f64) -> Vec<f64> {
        self.functions.iter().map(|p| p.eval(tau)).collect()
    }

    /// `[p_k'(τ)]`, derivative with respect to relative time.
    pub fn eval_tau_derivative(&self, tau: f64) -> Vec<f64> {
        self.functions.iter().map(|p| p.derivative().eval(tau)).collect()
    }

    /// Basis values at fast time `t2`, using `τ = (t2 / Ts) mod 1`.
    pub fn eval(&self, t2: f64, period: f64) -> Vec<f64> {
        self.eval_tau(relative_time(t2, period))
    }

    /// Gram matrix `∫_0^1 p_k p_l dτ`.
    pub fn gram(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |k, l| self.functions[k].inner(&self.functions[l]))
    }

    /// `∫_0^D p_k dτ` for every `k`: the on-phase integrals of a pulse.
    pub fn on_phase_integrals(&self) -> Vec<f64> {
        self.functions.iter().map(|p| p.segment_integral(0)).collect()
    }

    pub fn galerkin_matrices(&self, period: f64) -> GalerkinMatrices {
        let n = self.len();
        let derivs: Vec<_> = self.functions.iter().map(|p| p.derivative()).collect();
        let gram = self.gram();
        let mat_i = gram * period;
        let mut mat_q = DMatrix::zeros(n, n);
        for k in 1..n {
            for l in 1..n {
                mat_q[(k, l)] = -derivs[k].inner(&self.functions[l]);
            }
        }
        // exact skew symmetry; row and column 0 vanish since p_0 is constant
        // and the basis is periodic
        let mat_q = (&mat_q - mat_q.transpose()) * 0.5;
        GalerkinMatrices { period, mat_i, mat_q }
    }
}

/// Galerkin matrices `ℐ = Ts ∫ p pᵀ` and `𝒬 = -∫ p' pᵀ` of a basis.
#[derive(Debug, Clone)]
pub struct GalerkinMatrices {
    pub period: f64,
    pub mat_i: DMatrix<f64>,
    pub mat_q: DMatrix<f64>,
}

impl GalerkinMatrices {
    pub fn dim(&self) -> usize {
        self.mat_q.nrows()
    }

    /// `max |ℐ - Ts·Id|`
    pub fn identity_deviation(&self) -> f64 {
        let n = self.dim();
        let id = DMatrix::<f64>::identity(n, n) * self.period;
        (&self.mat_i - id).abs().max()
    }

    pub fn skew_deviation(&self) -> f64 {
        (&self.mat_q + self.mat_q.transpose()).abs().max()
    }

    /// Fraction of entries of `𝒬` whose magnitude exceeds `tol · max|𝒬|`.
    pub fn q_fill_fraction(&self, tol: f64) -> f64 {
        let max = self.mat_q.abs().max();
        if max == 0.0 {
            return 0.0;
        }
        let nz = self.mat_q.iter().filter(|v| v.abs() > tol * max).count();
        nz as f64 / self.mat_q.len() as f64
    }
}
