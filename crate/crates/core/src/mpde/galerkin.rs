use std::time::{Duration, Instant};

use crate::basis::{GalerkinMatrices, PwmBasis};
use crate::dae::{ConsistentInitializer, DescriptorSystem, IntegrationStats, Integrator, LinearDae, PulsedSource, SolverConfig, Trajectory};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::SparseLu;

/// How the slow-time initial coefficients are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitStrategy {
    /// Higher coefficients from the periodic steady state, the constant
    /// coefficient fixed by `x(0) = x0`.
    #[default]
    SteadyState,
    /// All of `x0` in the constant coefficient, the rest zero.
    Naive,
}

/// Initial coefficients, block-major (`w[k * n + j]`), from a steady state
/// `w_s` and the basis values `p(0)`.
pub fn initial_coeffs<S: Scalar>(strategy: InitStrategy, w_s: &[S], x0: &[f64], p_at_zero: &[S]) -> Vec<S> {
    let n = x0.len();
    let nb = p_at_zero.len();
    assert_eq!(w_s.len(), n * nb);
    let mut w = vec![S::zero(); n * nb];
    match strategy {
        InitStrategy::SteadyState => {
            w[n..].copy_from_slice(&w_s[n..]);
            for j in 0..n {
                let mut v = S::from_real(x0[j]);
                for k in 1..nb {
                    v -= w_s[k * n + j] * p_at_zero[k];
                }
                w[j] = v;
            }
        }
        InitStrategy::Naive => {
            for j in 0..n {
                w[j] = S::from_real(x0[j]);
            }
        }
    }
    w
}

/// Coefficient trajectory of one slow-time integration.
#[derive(Debug, Clone)]
pub struct CoefficientSolution<S> {
    pub trajectory: Trajectory<S>,
    pub stats: IntegrationStats,
    /// Wall time of consistent initialization and integration.
    pub elapsed: Duration,
}

/// Integrates `sys` with a right-hand side constant in slow time.
pub(crate) fn solve_constant_rhs<S: Scalar>(
    sys: &DescriptorSystem<S>,
    rhs: &[S],
    w0: &[S],
    span: (f64, f64),
    config: &SolverConfig,
) -> Result<CoefficientSolution<S>> {
    let clock = Instant::now();
    let init = ConsistentInitializer::new(sys)?.initialize(rhs, w0)?;
    let mut integrator = Integrator::new(sys.clone(), config.clone())?;
    let mut trajectory = Trajectory::new(sys.dim());
    let stats = integrator.run(&mut |_, c| c.copy_from_slice(rhs), &init.x, &init.xdot, span, &mut trajectory)?;
    Ok(CoefficientSolution { trajectory, stats, elapsed: clock.elapsed() })
}

/// Galerkin projection of the multirate system onto a PWM basis:
/// `𝒜 w' + ℬ w = 𝒞` with `𝒜 = ℐ⊗A`, `ℬ = ℐ⊗B + 𝒬⊗A`.
///
/// Coefficients are stored block-major, `w[k * n + j]` for basis function `k`
/// and state `j`.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    dae: LinearDae,
    source: PulsedSource,
    basis: PwmBasis,
    matrices: GalerkinMatrices,
    system: DescriptorSystem<f64>,
    rhs: Vec<f64>,
}

impl GalerkinSystem {
    pub fn assemble(dae: &LinearDae, basis: PwmBasis) -> Result<Self> {
        let source = *dae
            .source
            .pulsed()
            .ok_or_else(|| Error::InvalidParameter("the multirate formulation needs a pulsed source".into()))?;
        if (source.duty - basis.duty()).abs() > 1e-14 {
            return Err(Error::InvalidParameter(format!(
                "basis duty cycle {} does not match the source duty cycle {}",
                basis.duty(),
                source.duty
            )));
        }
        let matrices = basis.galerkin_matrices(source.period);
        let big_a = dae.a().kron_left(&matrices.mat_i);
        let big_b = dae.b().kron_left(&matrices.mat_i).lin_comb(1.0, &dae.a().kron_left(&matrices.mat_q), 1.0);
        let system = DescriptorSystem::new(big_a, big_b)?;
        let rhs = Self::project_excitation(dae, &source, &basis);
        Ok(Self { dae: dae.clone(), source, basis, matrices, system, rhs })
    }

    /// Block `k` is `∫_0^Ts p_k(τ(t2)) v(t2) dt2 · injection = V0 Ts ∫_0^D p_k dτ · injection`.
    fn project_excitation(dae: &LinearDae, source: &PulsedSource, basis: &PwmBasis) -> Vec<f64> {
        let n = dae.dim();
        let scale = source.amplitude * source.period;
        let mut rhs = vec![0.0; n * basis.len()];
        for (k, &ip) in basis.on_phase_integrals().iter().enumerate() {
            for j in 0..n {
                rhs[k * n + j] = scale * ip * dae.injection[j];
            }
        }
        rhs
    }

    pub fn dae(&self) -> &LinearDae {
        &self.dae
    }

    pub fn source(&self) -> &PulsedSource {
        &self.source
    }

    pub fn basis(&self) -> &PwmBasis {
        &self.basis
    }

    pub fn matrices(&self) -> &GalerkinMatrices {
        &self.matrices
    }

    pub fn system(&self) -> &DescriptorSystem<f64> {
        &self.system
    }

    pub fn period(&self) -> f64 {
        self.source.period
    }

    /// Number of states of the underlying DAE.
    pub fn state_dim(&self) -> usize {
        self.dae.dim()
    }

    /// Total number of coefficients, `(Np + 1) · N_s`.
    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    /// Projected excitation `𝒞(t1)`; constant in slow time here.
    pub fn rhs(&self, _t1: f64) -> &[f64] {
        &self.rhs
    }

    /// Periodic steady state `w_s = ℬ⁻¹ 𝒞(0)`.
    pub fn steady_state(&self) -> Result<Vec<f64>> {
        SparseLu::factorize(&self.system.b, "Galerkin steady state")?.solve(&self.rhs)
    }

    pub fn initial_coeffs(&self, strategy: InitStrategy) -> Result<Vec<f64>> {
        let w_s = match strategy {
            InitStrategy::SteadyState => self.steady_state()?,
            InitStrategy::Naive => vec![0.0; self.dim()],
        };
        Ok(initial_coeffs(strategy, &w_s, &self.dae.x0, &self.basis.eval_tau(0.0)))
    }

    /// Integrates the coupled coefficient system over `span`.
    pub fn solve(&self, w0: &[f64], span: (f64, f64), config: &SolverConfig) -> Result<CoefficientSolution<f64>> {
        solve_constant_rhs(&self.system, &self.rhs, w0, span, config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dae::Waveform;
    use crate::sparse::SparseMatrix;

    fn small_dae(duty: f64) -> LinearDae {
        let a = SparseMatrix::from_triplets(3, 3, vec![(0, 0, 1.0), (1, 1, 2.0)]);
        let b = SparseMatrix::from_triplets(3, 3, vec![(0, 0, 1.0), (0, 1, 0.5), (1, 1, 3.0), (2, 2, 1.0), (2, 0, -1.0)]);
        let src = Waveform::Pulsed(PulsedSource::new(2.0, 0.1, duty).unwrap());
        LinearDae::new(a, b, vec![1.0, 0.0, 0.0], src, vec![0.0; 3]).unwrap()
    }

    #[test]
    fn shapes_and_block_structure() {
        let dae = small_dae(0.5);
        let gs = GalerkinSystem::assemble(&dae, PwmBasis::generate(4, 0.5).unwrap()).unwrap();
        assert_eq!(gs.dim(), 15);
        let a = gs.system().a.to_dense();
        let ts = 0.1;
        for bi in 0..5 {
            for bj in 0..5 {
                for i in 0..3 {
                    for j in 0..3 {
                        let expect = if bi == bj { ts * dae.a().get(i, j) } else { 0.0 };
                        assert!((a[(bi * 3 + i, bj * 3 + j)] - expect).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn off_diagonal_blocks_are_skew() {
        let dae = small_dae(0.5);
        let gs = GalerkinSystem::assemble(&dae, PwmBasis::generate(1, 0.5).unwrap()).unwrap();
        let b = gs.system().b.to_dense();
        let q01 = gs.matrices().mat_q[(0, 1)];
        let q10 = gs.matrices().mat_q[(1, 0)];
        assert_eq!(q10, -q01);
        for i in 0..3 {
            for j in 0..3 {
                assert!((b[(i, 3 + j)] - q01 * dae.a().get(i, j)).abs() < 1e-15);
                assert!((b[(3 + i, j)] - q10 * dae.a().get(i, j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn projected_excitation_blocks() {
        let dae = small_dae(0.3);
        let gs = GalerkinSystem::assemble(&dae, PwmBasis::generate(3, 0.3).unwrap()).unwrap();
        let rhs = gs.rhs(0.0);
        assert!((rhs[0] - 2.0 * 0.1 * 0.3).abs() < 1e-15);
        assert!(rhs[3].abs() < 1e-15);
        let quiet = dae.with_source(Waveform::Pulsed(PulsedSource::new(0.0, 0.1, 0.3).unwrap()));
        let gs0 = GalerkinSystem::assemble(&quiet, PwmBasis::generate(3, 0.3).unwrap()).unwrap();
        assert!(gs0.rhs(0.0).iter().all(|&v| v == 0.0));
        assert!(gs0.steady_state().unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn initial_coefficients_reproduce_x0() {
        let mut dae = small_dae(0.4);
        dae.x0 = vec![0.7, -0.2, 0.7];
        let gs = GalerkinSystem::assemble(&dae, PwmBasis::generate(4, 0.4).unwrap()).unwrap();
        let w0 = gs.initial_coeffs(InitStrategy::SteadyState).unwrap();
        let p = gs.basis().eval_tau(0.0);
        for j in 0..3 {
            let x: f64 = (0..5).map(|k| w0[k * 3 + j] * p[k]).sum();
            assert!((x - dae.x0[j]).abs() < 1e-15);
        }
        let naive = gs.initial_coeffs(InitStrategy::Naive).unwrap();
        assert_eq!(&naive[..3], &dae.x0[..]);
        assert!(naive[3..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn order_zero_is_the_averaged_model() {
        let mut dae = small_dae(0.5);
        dae.x0 = vec![1.0, 2.0, 1.0];
        let gs = GalerkinSystem::assemble(&dae, PwmBasis::generate(0, 0.5).unwrap()).unwrap();
        assert_eq!(gs.initial_coeffs(InitStrategy::SteadyState).unwrap(), dae.x0);
        assert!(gs.matrices().mat_q[(0, 0)] == 0.0);
    }

    #[test]
    fn non_pulsed_source_is_rejected() {
        let dae = small_dae(0.5).with_source(Waveform::Constant(1.0));
        assert!(GalerkinSystem::assemble(&dae, PwmBasis::generate(2, 0.5).unwrap()).is_err());
    }
}
