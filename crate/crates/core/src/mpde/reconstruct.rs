use num_complex::Complex64;

use crate::basis::{relative_time, PwmBasis, SpectralBasis};
use crate::dae::{StateHistory, Trajectory};
use crate::error::{Error, Result};

/// Relative size of the imaginary part tolerated when summing the
/// eigenfunction expansion.
pub const IMAGINARY_TOLERANCE: f64 = 1e-8;

/// `x(t) = Σ_k w_k(t) p_k(τ(t))` for block-major real coefficients.
#[derive(Debug, Clone)]
pub struct PwmExpansion {
    basis: PwmBasis,
    period: f64,
    coeffs: Trajectory<f64>,
}

impl PwmExpansion {
    pub fn new(basis: PwmBasis, period: f64, coeffs: Trajectory<f64>) -> Result<Self> {
        if !coeffs.dim().is_multiple_of(basis.len()) {
            return Err(Error::Dimension(format!(
                "{} coefficients do not split into {} blocks",
                coeffs.dim(),
                basis.len()
            )));
        }
        Ok(Self { basis, period, coeffs })
    }

    pub fn coefficients(&self) -> &Trajectory<f64> {
        &self.coeffs
    }

    /// Coefficient `w_{j,k}(t1)`.
    pub fn coefficient(&self, t1: f64, j: usize, k: usize) -> Result<f64> {
        Ok(self.coeffs.eval(t1)?[k * self.dim() + j])
    }
}

impl StateHistory for PwmExpansion {
    fn dim(&self) -> usize {
        self.coeffs.dim() / self.basis.len()
    }

    fn span(&self) -> (f64, f64) {
        (self.coeffs.start(), self.coeffs.end())
    }

    fn state(&self, t: f64) -> Result<Vec<f64>> {
        let n = self.dim();
        let w = self.coeffs.eval(t)?;
        let p = self.basis.eval_tau(relative_time(t, self.period));
        Ok((0..n).map(|j| p.iter().enumerate().map(|(k, pk)| w[k * n + j] * pk).sum()).collect())
    }

    fn state_derivative(&self, t: f64) -> Result<Vec<f64>> {
        let n = self.dim();
        let w = self.coeffs.eval(t)?;
        let dw = self.coeffs.eval_derivative(t)?;
        let tau = relative_time(t, self.period);
        let p = self.basis.eval_tau(tau);
        let dp = self.basis.eval_tau_derivative(tau);
        Ok((0..n)
            .map(|j| (0..p.len()).map(|k| dw[k * n + j] * p[k] + w[k * n + j] * dp[k] / self.period).sum())
            .collect())
    }
}

/// `x(t) = Σ_k w_k(t) g_k(τ(t))` over all eigenfunction blocks.
///
/// The sum is real up to roundoff because partner blocks are conjugate;
/// a larger imaginary part is reported as an error.
#[derive(Debug, Clone)]
pub struct SpectralExpansion {
    basis: PwmBasis,
    spectral: SpectralBasis,
    period: f64,
    blocks: Vec<Trajectory<Complex64>>,
}

impl SpectralExpansion {
    pub fn new(basis: PwmBasis, spectral: SpectralBasis, period: f64, blocks: Vec<Trajectory<Complex64>>) -> Result<Self> {
        if blocks.len() != spectral.len() || blocks.is_empty() {
            return Err(Error::Dimension(format!("{} blocks for {} eigenfunctions", blocks.len(), spectral.len())));
        }
        let n = blocks[0].dim();
        if blocks.iter().any(|b| b.dim() != n) {
            return Err(Error::Dimension("eigen blocks differ in size".into()));
        }
        Ok(Self { basis, spectral, period, blocks })
    }

    pub fn blocks(&self) -> &[Trajectory<Complex64>] {
        &self.blocks
    }

    fn realize(&self, t: f64, terms: impl Fn(usize, usize) -> (Complex64, f64)) -> Result<Vec<f64>> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n);
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let (mut sum, mut scale) = (Complex64::new(0.0, 0.0), 0.0);
            for k in 0..self.blocks.len() {
                let (z, s) = terms(k, j);
                sum += z;
                scale += s;
            }
            let rel = sum.im.abs() / scale.max(f64::MIN_POSITIVE);
            if sum.im != 0.0 {
                worst = worst.max(rel);
            }
            out.push(sum.re);
        }
        if worst > IMAGINARY_TOLERANCE {
            return Err(Error::ImaginaryResidual { t, residual: worst });
        }
        Ok(out)
    }
}

impl StateHistory for SpectralExpansion {
    fn dim(&self) -> usize {
        self.blocks[0].dim()
    }

    fn span(&self) -> (f64, f64) {
        (self.blocks[0].start(), self.blocks[0].end())
    }

    fn state(&self, t: f64) -> Result<Vec<f64>> {
        let g = self.spectral.eval_tau(&self.basis, relative_time(t, self.period));
        let w = self.blocks.iter().map(|b| b.eval(t)).collect::<Result<Vec<_>>>()?;
        self.realize(t, |k, j| {
            let z = w[k][j] * g[k];
            (z, z.norm())
        })
    }

    fn state_derivative(&self, t: f64) -> Result<Vec<f64>> {
        let tau = relative_time(t, self.period);
        let g = self.spectral.eval_tau(&self.basis, tau);
        let dg = self.spectral.eval_tau_derivative(&self.basis, tau);
        let w = self.blocks.iter().map(|b| b.eval(t)).collect::<Result<Vec<_>>>()?;
        let dw = self.blocks.iter().map(|b| b.eval_derivative(t)).collect::<Result<Vec<_>>>()?;
        let inv_ts = 1.0 / self.period;
        self.realize(t, |k, j| {
            let (a, b) = (dw[k][j] * g[k], w[k][j] * dg[k] * inv_ts);
            (a + b, a.norm() + b.norm())
        })
    }
}
