//! PWM eigenfunctions: the eigenbasis of the skew-symmetric coupling `𝒬`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::pwm::{relative_time, GalerkinMatrices, PwmBasis};
use crate::error::{Error, Result};

const ORTHONORMALITY_TOL: f64 = 1e-8;

/// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns real eigenvalues and the unitary matrix of eigenvectors (columns),
/// unsorted. Intended for the small matrices that arise here.
pub fn hermitian_jacobi(h: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = h.nrows();
    assert_eq!(n, h.ncols());
    let mut a = h.clone();
    let mut v = DMatrix::<Complex64>::identity(n, n);
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                // D = diag(1, e^{-iφ}) makes the (p, q) entry real and positive;
                // a real rotation then annihilates it
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let zeta = (aqq - app) / (2.0 * mag);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = D R with R = [[c, s], [-s, c]]
                let g_pp = Complex64::new(c, 0.0);
                let g_pq = Complex64::new(s, 0.0);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;
                // columns: A <- A G
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g_pp + akq * g_qp;
                    a[(k, q)] = akp * g_pq + akq * g_qq;
                }
                // rows: A <- G^H A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }
    let eig = (0..n).map(|i| a[(i, i)].re).collect();
    (eig, v)
}

/// Eigenvalues `λ_k` and orthonormal eigenvectors `v_k` of `𝒬`.
///
/// Canonical order: zero eigenvalues first (the constant function `e_0`
/// leading), then conjugate pairs by ascending `|Im λ|` with the positive
/// imaginary part first. Partner eigenvectors are exact conjugates.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    eigenvalues: Vec<Complex64>,
    vectors: DMatrix<Complex64>,
    pairing: Vec<usize>,
}

impl SpectralBasis {
    pub fn compute(gm: &GalerkinMatrices) -> Result<Self> {
        let deviation = gm.identity_deviation();
        if deviation > ORTHONORMALITY_TOL * gm.period.abs() {
            return Err(Error::InconsistentGalerkin { deviation });
        }
        let n = gm.dim();
        let i = Complex64::new(0.0, 1.0);
        let h = gm.mat_q.map(|q| i * q);
        let (mu, w) = hermitian_jacobi(&h);
        // H v = μ v  ⇔  𝒬 v = -iμ v
        let qnorm = gm.mat_q.abs().max().max(1.0);
        let zero_tol = 1e-9 * qnorm;

        let mut zeros: Vec<usize> = (0..n).filter(|&k| mu[k].abs() <= zero_tol).collect();
        // the column carrying the constant function leads
        zeros.sort_by(|&a, &b| w[(0, b)].norm().total_cmp(&w[(0, a)].norm()).then(a.cmp(&b)));
        let mut positive: Vec<usize> = (0..n).filter(|&k| mu[k] < -zero_tol).collect();
        positive.sort_by(|&a, &b| mu[b].total_cmp(&mu[a]));
        let negatives = (0..n).filter(|&k| mu[k] > zero_tol).count();
        if negatives != positive.len() {
            return Err(Error::InconsistentGalerkin { deviation: gm.skew_deviation() });
        }

        let mut eigenvalues = Vec::with_capacity(n);
        let mut vectors = DMatrix::<Complex64>::zeros(n, n);
        let mut pairing = Vec::with_capacity(n);
        for &k in &zeros {
            let col = eigenvalues.len();
            let mut v = w.column(k).into_owned();
            // a simple zero eigenvalue of a real matrix has a real eigenvector
            let pivot = (0..n).max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm())).unwrap();
            let phase = v[pivot].conj() / v[pivot].norm();
            v *= phase;
            if zeros.len() == 1 || v.iter().all(|z| z.im.abs() <= 1e-12) {
                v.iter_mut().for_each(|z| *z = Complex64::new(z.re, 0.0));
                let norm = v.norm();
                v /= Complex64::new(norm, 0.0);
            }
            vectors.set_column(col, &v);
            eigenvalues.push(Complex64::new(0.0, 0.0));
            pairing.push(col);
        }
        for &k in &positive {
            let col = eigenvalues.len();
            let mut v = w.column(k).into_owned();
            let pivot = (0..n).max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm())).unwrap();
            let phase = v[pivot].conj() / v[pivot].norm();
            v *= phase;
            let lambda = Complex64::new(0.0, -mu[k]);
            vectors.set_column(col, &v);
            vectors.set_column(col + 1, &v.map(|z| z.conj()));
            eigenvalues.push(lambda);
            eigenvalues.push(lambda.conj());
            pairing.push(col + 1);
            pairing.push(col);
        }
        Ok(Self { eigenvalues, vectors, pairing })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, k: usize) -> Complex64 {
        self.eigenvalues[k]
    }

    /// Eigenvectors as columns.
    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    /// Index of the conjugate partner of `k` (itself for a real eigenvalue).
    pub fn partner(&self, k: usize) -> usize {
        self.pairing[k]
    }

    pub fn pairing(&self) -> &[usize] {
        &self.pairing
    }

    /// One representative per conjugate pair plus every self-paired index.
    pub fn solve_set(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.pairing[k] >= k).collect()
    }

    /// `max |V^H V - I|`
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.len();
        let g = self.vectors.adjoint() * &self.vectors;
        (g - DMatrix::<Complex64>::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest off-diagonal magnitude of `V^H 𝒬 V` and largest diagonal
    /// deviation from the stored eigenvalues.
    pub fn diagonalization_defect(&self, mat_q: &DMatrix<f64>) -> f64 {
        let q = mat_q.map(|x| Complex64::new(x, 0.0));
        let d = self.vectors.adjoint() * q * &self.vectors;
        let mut worst: f64 = 0.0;
        for i in 0..self.len() {
            for j in 0..self.len() {
                let target = if i == j { self.eigenvalues[i] } else { Complex64::new(0.0, 0.0) };
                worst = worst.max((d[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// `g_k(τ) = Σ_l V_{l,k} p_l(τ)` for all `k`.
    pub fn eval_tau(&self, basis: &PwmBasis, tau: f64) -> Vec<Complex64> {
        self.combine(&basis.eval_tau(tau))
    }

    pub fn eval_tau_derivative(&self, basis: &PwmBasis, tau: f64) -> Vec<Complex64> {
        self.combine(&basis.eval_tau_derivative(tau))
    }

    /// Eigenfunction values at fast time `t2`.
    pub fn eval(&self, basis: &PwmBasis, t2: f64, period: f64) -> Vec<Complex64> {
        self.eval_tau(basis, relative_time(t2, period))
    }

    /// Maps PWM-basis values `[p_l]` to eigenfunction values `[g_k]`.
    pub fn combine(&self, p: &[f64]) -> Vec<Complex64> {
        let n = self.len();
        assert_eq!(p.len(), n);
        (0..n).map(|k| (0..n).map(|l| self.vectors[(l, k)] * p[l]).sum()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonalizes_random_hermitian() {
        let n = 6;
        let mut h = DMatrix::<Complex64>::zeros(n, n);
        let mut seed = 12345u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for i in 0..n {
            h[(i, i)] = Complex64::new(rnd(), 0.0);
            for j in i + 1..n {
                let z = Complex64::new(rnd(), rnd());
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        let (mu, v) = hermitian_jacobi(&h);
        let d = v.adjoint() * &h * &v;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { mu[i] } else { 0.0 };
                assert!((d[(i, j)] - Complex64::new(target, 0.0)).norm() < 1e-13);
            }
        }
        let trace: f64 = (0..n).map(|i| h[(i, i)].re).sum();
        assert!((mu.iter().sum::<f64>() - trace).abs() < 1e-13);
    }

    #[test]
    fn single_function_gives_constant_eigenfunction() {
        let b = PwmBasis::generate(0, 0.5).unwrap();
        let sb = SpectralBasis::compute(&b.galerkin_matrices(1.0)).unwrap();
        assert_eq!(sb.len(), 1);
        assert_eq!(sb.eigenvalue(0), Complex64::new(0.0, 0.0));
        for tau in [0.0, 0.3, 0.9] {
            assert_eq!(sb.eval_tau(&b, tau)[0], Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn canonical_order_and_pairing() {
        let b = PwmBasis::generate(4, 0.35).unwrap();
        let sb = SpectralBasis::compute(&b.galerkin_matrices(1e-3)).unwrap();
        let lam = sb.eigenvalues();
        assert_eq!(lam[0], Complex64::new(0.0, 0.0));
        assert_eq!(sb.vectors()[(0, 0)], Complex64::new(1.0, 0.0));
        assert!(lam[1].im > 0.0 && lam[2] == lam[1].conj());
        assert!(lam[3].im > lam[1].im && lam[4] == lam[3].conj());
        assert_eq!(sb.pairing(), &[0, 2, 1, 4, 3]);
        assert_eq!(sb.solve_set(), vec![0, 1, 3]);
    }

    #[test]
    fn odd_order_has_two_zero_modes() {
        let b = PwmBasis::generate(3, 0.5).unwrap();
        let sb = SpectralBasis::compute(&b.galerkin_matrices(1.0)).unwrap();
        let zeros = sb.eigenvalues().iter().filter(|z| z.norm() == 0.0).count();
        assert_eq!(zeros, 2);
        assert_eq!(sb.solve_set().len(), 3);
        // second zero mode is real
        assert!(sb.vectors().column(1).iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn non_orthonormal_galerkin_is_rejected() {
        let b = PwmBasis::generate(2, 0.5).unwrap();
        let mut gm = b.galerkin_matrices(1.0);
        gm.mat_i[(1, 1)] = 1.1;
        assert!(matches!(SpectralBasis::compute(&gm), Err(Error::InconsistentGalerkin { .. })));
    }
}
