mod common;

use common::{basis, midpoints, rel_l2};
use mpwm_core::basis::SpectralBasis;
use mpwm_core::dae::{integrate_with_switching, LinearDae, PulsedSource, SolverConfig, StateHistory, Waveform};
use mpwm_core::models::{build_lumped, lumped_index, CircuitParams};
use mpwm_core::mpde::{EigenSystem, GalerkinSystem, InitStrategy, PwmExpansion, SpectralExpansion};
use mpwm_core::sparse::{SparseLu, SparseMatrix};
use proptest::prelude::*;

fn buck(duty: f64) -> LinearDae {
    let src = PulsedSource::from_frequency(24.0, 1000.0, duty).unwrap();
    build_lumped(&CircuitParams::default(), Waveform::Pulsed(src)).unwrap()
}

fn coupled(dae: &LinearDae, np: usize, span: (f64, f64), cfg: &SolverConfig) -> PwmExpansion {
    let b = basis(np, dae.source.pulsed().unwrap().duty);
    let gs = GalerkinSystem::assemble(dae, b.clone()).unwrap();
    let w0 = gs.initial_coeffs(InitStrategy::SteadyState).unwrap();
    let sol = gs.solve(&w0, span, cfg).unwrap();
    PwmExpansion::new(b, gs.period(), sol.trajectory).unwrap()
}

fn decoupled(dae: &LinearDae, np: usize, span: (f64, f64), cfg: &SolverConfig) -> SpectralExpansion {
    let b = basis(np, dae.source.pulsed().unwrap().duty);
    let gs = GalerkinSystem::assemble(dae, b.clone()).unwrap();
    let spectral = SpectralBasis::compute(gs.matrices()).unwrap();
    let es = EigenSystem::new(&gs, spectral.clone()).unwrap();
    let w0 = es.initial_coeffs(InitStrategy::SteadyState).unwrap();
    let solved = es.solve_set().into_iter().map(|k| es.subsystem(k).solve(es.block(&w0, k), span, cfg).unwrap().trajectory).collect();
    SpectralExpansion::new(b, spectral, gs.period(), es.complete(solved)).unwrap()
}

fn sample(h: &dyn StateHistory, times: &[f64], j: usize) -> Vec<f64> {
    times.iter().map(|&t| h.state(t).unwrap()[j]).collect()
}

#[test]
fn dc_gain_of_the_lumped_model() {
    let dae = build_lumped(&CircuitParams::default(), Waveform::Constant(24.0)).unwrap();
    let lu = SparseLu::factorize(dae.b(), "dc").unwrap();
    let x = lu.solve(&dae.excitation(0.0)).unwrap();
    assert!((x[lumped_index::VC] - 24.0 * 30.0 / 30.8).abs() < 1e-10);
}

#[test]
fn reference_mean_and_ripple_after_ten_periods() {
    let dae = buck(0.5);
    let sol = integrate_with_switching(&dae, (0.0, 10e-3), &SolverConfig::with_tolerance(1e-9)).unwrap();
    let last = midpoints((9e-3, 10e-3), 2000);
    let vc = sample(&sol.trajectory, &last, lumped_index::VC);
    let il = sample(&sol.trajectory, &last, lumped_index::IL);
    let mean = vc.iter().sum::<f64>() / vc.len() as f64;
    let dc = 0.5 * 24.0 * 30.0 / 30.8;
    assert!((mean - dc).abs() / dc < 0.01, "mean {mean}");
    let ripple = il.iter().cloned().fold(f64::MIN, f64::max) - il.iter().cloned().fold(f64::MAX, f64::min);
    let formula = 24.0 * 0.25 / (65e-3 * 1000.0);
    assert!((ripple - formula).abs() / formula < 0.05, "ripple {ripple}");
}

#[test]
fn reference_mean_settles_to_the_averaged_dc_value() {
    let dae = buck(0.5);
    let sol = integrate_with_switching(&dae, (0.0, 60e-3), &SolverConfig::with_tolerance(1e-9)).unwrap();
    let vc = sample(&sol.trajectory, &midpoints((59e-3, 60e-3), 2000), lumped_index::VC);
    let mean = vc.iter().sum::<f64>() / vc.len() as f64;
    assert!((mean - 0.5 * 24.0 * 30.0 / 30.8).abs() < 2e-3, "mean {mean}");
}

#[test]
fn steady_state_coefficients_reproduce_the_periodic_scalar_solution() {
    // x' + x/T = v/T with period Ts: closed-form periodic orbit
    let (t_const, ts, d, v0) = (0.4, 1.0, 0.3, 2.0);
    let src = PulsedSource::new(v0, ts, d).unwrap();
    let dae = LinearDae::new(
        SparseMatrix::from_triplets(1, 1, vec![(0, 0, t_const)]),
        SparseMatrix::from_triplets(1, 1, vec![(0, 0, 1.0)]),
        vec![1.0],
        Waveform::Pulsed(src),
        vec![0.0],
    )
    .unwrap();
    let (e_on, e_off) = ((-d * ts / t_const).exp(), (-(1.0 - d) * ts / t_const).exp());
    let x_start = v0 * (1.0 - e_on) * e_off / (1.0 - e_on * e_off);
    let x_switch = v0 + (x_start - v0) * e_on;
    let exact = |tau: f64| {
        if tau <= d {
            v0 + (x_start - v0) * (-tau * ts / t_const).exp()
        } else {
            x_switch * (-(tau - d) * ts / t_const).exp()
        }
    };
    let taus = midpoints((0.0, 1.0), 1000);
    let want: Vec<f64> = taus.iter().map(|&t| exact(t)).collect();
    let mut last = f64::INFINITY;
    for np in [2, 4, 6, 8] {
        let b = basis(np, d);
        let ws = GalerkinSystem::assemble(&dae, b.clone()).unwrap().steady_state().unwrap();
        let got: Vec<f64> = taus.iter().map(|&t| b.eval_tau(t).iter().zip(&ws).map(|(p, w)| p * w).sum()).collect();
        let err = rel_l2(&want, &got);
        assert!(err < last, "Np={np}: {err:e}");
        last = err;
    }
    assert!(last < 1e-6, "{last:e}");
}

#[test]
fn steady_state_start_keeps_higher_coefficients_fixed() {
    let dae = buck(0.5);
    let b = basis(4, 0.5);
    let gs = GalerkinSystem::assemble(&dae, b).unwrap();
    let n = gs.state_dim();
    let tol = 1e-7;
    for (strategy, frozen) in [(InitStrategy::SteadyState, true), (InitStrategy::Naive, false)] {
        let w0 = gs.initial_coeffs(strategy).unwrap();
        let sol = gs.solve(&w0, (0.0, 10e-3), &SolverConfig::with_tolerance(tol)).unwrap();
        let mut drift = vec![0.0f64; gs.dim()];
        for (_, w, _) in sol.trajectory.nodes() {
            for (i, d) in drift.iter_mut().enumerate() {
                *d = d.max((w[i] - w0[i]).abs());
            }
        }
        let higher = drift[n..].iter().cloned().fold(0.0, f64::max);
        assert_eq!(higher <= 10.0 * tol, frozen, "{strategy:?}: {higher:e}");
        assert!(drift[lumped_index::VC] > 100.0 * tol);
    }
}

#[test]
fn buck_pipelines_agree() {
    let dae = buck(0.5);
    let span = (0.0, 10e-3);
    let cfg = SolverConfig::with_tolerance(1e-10);
    let a = coupled(&dae, 4, span, &cfg);
    let b = decoupled(&dae, 4, span, &cfg);
    let ts = midpoints(span, 10000);
    for j in [lumped_index::VC, lumped_index::IL] {
        let e = rel_l2(&sample(&a, &ts, j), &sample(&b, &ts, j));
        assert!(e <= 1e-6, "state {j}: {e:e}");
    }
}

fn random_dae(n: usize, algebraic: bool, entries: &[f64], duty: f64) -> LinearDae {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..n {
        let alg = algebraic && i == n - 1;
        if !alg {
            a.push((i, i, 0.5 + entries[i].abs()));
        }
        for j in 0..n {
            let v = entries[(i * n + j + n) % entries.len()];
            b.push((i, j, if i == j { 2.0 + v.abs() } else { 0.5 * v }));
        }
    }
    let injection = (0..n).map(|i| entries[(3 * i + 1) % entries.len()]).collect();
    let mut x0: Vec<f64> = (0..n).map(|i| entries[(5 * i + 2) % entries.len()]).collect();
    if algebraic {
        x0[n - 1] = 0.0;
    }
    let src = PulsedSource::new(1.0, 1.0, duty).unwrap();
    LinearDae::new(SparseMatrix::from_triplets(n, n, a), SparseMatrix::from_triplets(n, n, b), injection, Waveform::Pulsed(src), x0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coupled_and_decoupled_reconstructions_agree(
        n in 1usize..=4,
        np in 0usize..=4,
        algebraic in any::<bool>(),
        duty in 0.1f64..0.9,
        entries in proptest::collection::vec(-1.0f64..1.0, 24),
        strategy in prop_oneof![Just(InitStrategy::SteadyState), Just(InitStrategy::Naive)],
    ) {
        let dae = random_dae(n, algebraic && n > 1, &entries, duty);
        let span = (0.0, 1.0);
        let cfg = SolverConfig::with_tolerance(1e-10);
        let b = basis(np, duty);
        let gs = GalerkinSystem::assemble(&dae, b.clone()).unwrap();
        let w0 = gs.initial_coeffs(strategy).unwrap();
        let a = PwmExpansion::new(b.clone(), 1.0, gs.solve(&w0, span, &cfg).unwrap().trajectory).unwrap();
        let spectral = SpectralBasis::compute(gs.matrices()).unwrap();
        let es = EigenSystem::new(&gs, spectral.clone()).unwrap();
        let v0 = es.initial_coeffs(strategy).unwrap();
        let solved = es.solve_set().into_iter().map(|k| es.subsystem(k).solve(es.block(&v0, k), span, &cfg).unwrap().trajectory).collect();
        let e = SpectralExpansion::new(b, spectral, 1.0, es.complete(solved)).unwrap();
        let ts = midpoints(span, 2000);
        for j in 0..n {
            let x = sample(&a, &ts, j);
            let y = sample(&e, &ts, j);
            let scale = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if scale > 1e-6 {
                let err = rel_l2(&x, &y);
                prop_assert!(err <= 1e-6, "state {}: {:e}", j, err);
            }
        }
    }
}
