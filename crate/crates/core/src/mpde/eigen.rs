use num_complex::Complex64;

use super::galerkin::{initial_coeffs, solve_constant_rhs, CoefficientSolution, GalerkinSystem, InitStrategy};
use crate::basis::SpectralBasis;
use crate::dae::{DescriptorSystem, SolverConfig, Trajectory};
use crate::error::{Error, Result};
use crate::sparse::SparseLu;

/// One block of the diagonalized system:
/// `Ts A w' + (Ts B + λ_k A) w = ∫_0^Ts conj(g_k(τ(t2))) c(t2) dt2`.
#[derive(Debug, Clone)]
pub struct DecoupledSubsystem {
    pub index: usize,
    pub lambda: Complex64,
    pub system: DescriptorSystem<Complex64>,
    pub rhs: Vec<Complex64>,
}

impl DecoupledSubsystem {
    /// Periodic steady state `(Ts B + λ A)⁻¹ rhs`.
    pub fn steady_state(&self) -> Result<Vec<Complex64>> {
        SparseLu::factorize(&self.system.b, "decoupled steady state")?.solve(&self.rhs)
    }

    pub fn solve(&self, w0: &[Complex64], span: (f64, f64), config: &SolverConfig) -> Result<CoefficientSolution<Complex64>> {
        solve_constant_rhs(&self.system, &self.rhs, w0, span, config)
    }
}

/// The Galerkin system in the PWM eigenbasis: `Np + 1` independent blocks,
/// stored separately.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    spectral: SpectralBasis,
    subsystems: Vec<DecoupledSubsystem>,
    x0: Vec<f64>,
    g_at_zero: Vec<Complex64>,
}

impl EigenSystem {
    pub fn new(gs: &GalerkinSystem, spectral: SpectralBasis) -> Result<Self> {
        let nb = gs.basis().len();
        if spectral.len() != nb {
            return Err(Error::Dimension(format!("{} eigenfunctions for {nb} basis functions", spectral.len())));
        }
        let ts = gs.period();
        let dae = gs.dae();
        let n = dae.dim();
        let a = dae.a().map(|v| Complex64::new(v * ts, 0.0));
        let b_ts = dae.b().map(|v| Complex64::new(v * ts, 0.0));
        let a_plain = dae.a().map(|v| Complex64::new(v, 0.0));
        let rhs_real = gs.rhs(0.0);
        let v = spectral.vectors();
        let subsystems = (0..nb)
            .map(|k| {
                let lambda = spectral.eigenvalue(k);
                let b = b_ts.lin_comb(Complex64::new(1.0, 0.0), &a_plain, lambda);
                let mut rhs = vec![Complex64::new(0.0, 0.0); n];
                for l in 0..nb {
                    let c = v[(l, k)].conj();
                    for j in 0..n {
                        rhs[j] += c * rhs_real[l * n + j];
                    }
                }
                Ok(DecoupledSubsystem { index: k, lambda, system: DescriptorSystem::new(a.clone(), b)?, rhs })
            })
            .collect::<Result<Vec<_>>>()?;
        let g_at_zero = spectral.eval_tau(gs.basis(), 0.0);
        Ok(Self { spectral, subsystems, x0: dae.x0.clone(), g_at_zero })
    }

    pub fn spectral(&self) -> &SpectralBasis {
        &self.spectral
    }

    pub fn subsystems(&self) -> &[DecoupledSubsystem] {
        &self.subsystems
    }

    pub fn subsystem(&self, k: usize) -> &DecoupledSubsystem {
        &self.subsystems[k]
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    /// Indices that have to be integrated; the others are conjugates.
    pub fn solve_set(&self) -> Vec<usize> {
        self.spectral.solve_set()
    }

    /// Steady state of every block, block-major. Only the solve set is
    /// factorized; partners are conjugated.
    pub fn steady_state(&self) -> Result<Vec<Complex64>> {
        let n = self.x0.len();
        let mut w = vec![Complex64::new(0.0, 0.0); n * self.len()];
        for k in self.solve_set() {
            let ws = self.subsystems[k].steady_state()?;
            let p = self.spectral.partner(k);
            for j in 0..n {
                w[k * n + j] = ws[j];
                w[p * n + j] = ws[j].conj();
            }
        }
        Ok(w)
    }

    /// Initial coefficients of every block, block-major.
    pub fn initial_coeffs(&self, strategy: InitStrategy) -> Result<Vec<Complex64>> {
        let w_s = match strategy {
            InitStrategy::SteadyState => self.steady_state()?,
            InitStrategy::Naive => vec![Complex64::new(0.0, 0.0); self.x0.len() * self.len()],
        };
        Ok(initial_coeffs(strategy, &w_s, &self.x0, &self.g_at_zero))
    }

    /// Initial values of block `k` taken from a full coefficient vector.
    pub fn block<'a>(&self, w: &'a [Complex64], k: usize) -> &'a [Complex64] {
        let n = self.x0.len();
        &w[k * n..(k + 1) * n]
    }

    /// Completes per-block trajectories from solutions of the solve set.
    /// `solved[i]` belongs to block `self.solve_set()[i]`.
    pub fn complete(&self, solved: Vec<Trajectory<Complex64>>) -> Vec<Trajectory<Complex64>> {
        let set = self.solve_set();
        assert_eq!(solved.len(), set.len());
        let mut slots: Vec<Option<Trajectory<Complex64>>> = vec![None; self.len()];
        for (&k, tr) in set.iter().zip(solved) {
            let p = self.spectral.partner(k);
            if p != k {
                slots[p] = Some(tr.conj());
            }
            slots[k] = Some(tr);
        }
        slots.into_iter().map(|s| s.expect("every block is solved or a partner")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::PwmBasis;
    use crate::dae::{LinearDae, PulsedSource, Waveform};
    use crate::sparse::SparseMatrix;

    fn gs(np: usize) -> GalerkinSystem {
        let a = SparseMatrix::from_triplets(2, 2, vec![(1, 0, 1.0)]);
        let b = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 1, -0.5), (1, 1, 2.0)]);
        let src = Waveform::Pulsed(PulsedSource::new(3.0, 0.01, 0.3).unwrap());
        let dae = LinearDae::new(a, b, vec![0.0, 1.0], src, vec![0.2, 0.4]).unwrap();
        GalerkinSystem::assemble(&dae, PwmBasis::generate(np, 0.3).unwrap()).unwrap()
    }

    #[test]
    fn zero_mode_is_the_scaled_averaged_model() {
        let g = gs(4);
        let es = EigenSystem::new(&g, SpectralBasis::compute(g.matrices()).unwrap()).unwrap();
        let s0 = es.subsystem(0);
        assert_eq!(s0.lambda, Complex64::new(0.0, 0.0));
        for (i, j, v) in s0.system.b.triplets() {
            assert!((v.re - 0.01 * g.dae().b().get(i, j)).abs() < 1e-15 && v.im == 0.0);
        }
        assert!((s0.rhs[1].re - 3.0 * 0.01 * 0.3).abs() < 1e-15);
        assert_eq!(es.solve_set().len(), 3);
    }

    #[test]
    fn steady_state_matches_transformed_coupled_steady_state() {
        let g = gs(4);
        let spectral = SpectralBasis::compute(g.matrices()).unwrap();
        let es = EigenSystem::new(&g, spectral.clone()).unwrap();
        let ws = g.steady_state().unwrap();
        let wt = es.steady_state().unwrap();
        let v = spectral.vectors();
        let n = 2;
        for k in 0..5 {
            for j in 0..n {
                let expect: Complex64 = (0..5).map(|l| v[(l, k)].conj() * ws[l * n + j]).sum();
                assert!((wt[k * n + j] - expect).norm() < 1e-12, "k={k} j={j}");
            }
        }
    }

    #[test]
    fn initial_coefficients_reconstruct_x0() {
        let g = gs(3);
        let spectral = SpectralBasis::compute(g.matrices()).unwrap();
        let es = EigenSystem::new(&g, spectral.clone()).unwrap();
        let w0 = es.initial_coeffs(InitStrategy::SteadyState).unwrap();
        let gz = spectral.eval_tau(g.basis(), 0.0);
        for j in 0..2 {
            let x: Complex64 = (0..4).map(|k| w0[k * 2 + j] * gz[k]).sum();
            assert!((x - g.dae().x0[j]).norm() < 1e-14);
        }
    }
}
