mod common;

use common::{midpoints, rel_l2};
use mpwm_core::dae::{integrate_with_switching, PulsedSource, SolverConfig, StateHistory, Waveform};
use mpwm_core::models::{build_coupled, build_lumped, coupled_index, eddy_losses, lumped_index, CircuitParams, FemConfig, FemInductorModel, Geometry};

fn config(divisions: usize) -> FemConfig {
    FemConfig { geometry: Geometry { divisions, ..Default::default() }, ..Default::default() }
}

fn model(divisions: usize) -> FemInductorModel {
    FemInductorModel::build(&config(divisions)).unwrap()
}

#[test]
fn default_mesh_is_desk_scale_and_inductance_in_range() {
    let fem = model(Geometry::default().divisions);
    assert!((1000..=3000).contains(&fem.n_dofs()), "{}", fem.n_dofs());
    let l = fem.dc_inductance().unwrap();
    assert!((10e-3..=100e-3).contains(&l), "{l}");
}

#[test]
fn stiffness_is_symmetric_positive_definite() {
    let fem = model(16);
    let k = fem.k.to_dense();
    assert!((&k - k.transpose()).abs().max() <= 1e-12 * k.abs().max());
    assert!(k.cholesky().is_some());
    let m = fem.m_sigma.to_dense();
    assert!((&m - m.transpose()).abs().max() == 0.0);
    assert!(m.symmetric_eigenvalues().min() >= -1e-12 * m.abs().max());
}

#[test]
fn inductance_converges_at_second_order() {
    let l: Vec<f64> = [8, 16, 32, 64].iter().map(|&n| model(n).dc_inductance().unwrap()).collect();
    let diffs: Vec<f64> = l.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(diffs.iter().all(|&d| d > 0.0), "{l:?}");
    for w in diffs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn zero_conductivity_gives_no_losses() {
    let fem = FemInductorModel::build(&FemConfig { core_conductivity: 0.0, ..config(16) }).unwrap();
    assert_eq!(fem.m_sigma.nnz(), 0);
    let a_dot: Vec<f64> = (0..fem.n_dofs()).map(|i| (i as f64).sin()).collect();
    assert_eq!(fem.eddy_loss(&a_dot), 0.0);
}

#[test]
fn zero_excitation_stays_at_rest() {
    let fem = model(16);
    let dae = build_coupled(&fem, &CircuitParams::default(), Waveform::Constant(0.0)).unwrap();
    let sol = integrate_with_switching(&dae, (0.0, 1e-3), &SolverConfig::with_tolerance(1e-8)).unwrap();
    assert!(sol.trajectory.nodes().all(|(_, x, _)| x.iter().all(|&v| v == 0.0)));
}

#[test]
fn low_frequency_drive_matches_the_extracted_lumped_model() {
    let fem = model(16);
    let params = CircuitParams::default();
    let sine = Waveform::Sine { amplitude: 24.0, frequency: 1.0 };
    let span = (0.0, 1.0);
    let cfg = SolverConfig::with_tolerance(1e-7);
    let field = integrate_with_switching(&build_coupled(&fem, &params, sine).unwrap(), span, &cfg).unwrap();
    let lumped = build_lumped(&fem.equivalent_lumped(&params).unwrap(), sine).unwrap();
    let circuit = integrate_with_switching(&lumped, span, &cfg).unwrap();
    let ts = midpoints(span, 20000);
    let na = fem.n_dofs();
    let a: Vec<f64> = ts.iter().map(|&t| field.trajectory.state(t).unwrap()[na + coupled_index::IL]).collect();
    let b: Vec<f64> = ts.iter().map(|&t| circuit.trajectory.state(t).unwrap()[lumped_index::IL]).collect();
    let e = rel_l2(&b, &a);
    assert!(e <= 0.02, "{e:e}");
}

#[test]
fn flux_linkage_and_losses_along_a_pulsed_run() {
    let fem = model(16);
    let src = PulsedSource::from_frequency(24.0, 1000.0, 0.5).unwrap();
    let dae = build_coupled(&fem, &CircuitParams::default(), Waveform::Pulsed(src)).unwrap();
    let cfg = SolverConfig::with_tolerance(1e-7);
    let sol = integrate_with_switching(&dae, (0.0, 3e-3), &cfg).unwrap();
    let na = fem.n_dofs();
    for (_, x, _) in sol.trajectory.nodes() {
        let pa: f64 = fem.p.iter().zip(&x[..na]).map(|(p, a)| p * a).sum();
        assert!((pa - x[na + coupled_index::FLUX]).abs() <= 10.0 * cfg.abstol);
    }
    let times = midpoints((0.0, 3e-3), 600);
    let losses = eddy_losses(&sol.trajectory, &fem, &times).unwrap();
    assert!(losses.iter().all(|&p| p >= 0.0));
    assert!(losses.iter().any(|&p| p > 0.0));
    // element-wise sum equals the assembled quadratic form
    let t = times[100];
    let da = sol.trajectory.state_derivative(t).unwrap();
    let mut ma = vec![0.0; na];
    fem.m_sigma.mul_vec(&da[..na], &mut ma);
    let form: f64 = ma.iter().zip(&da[..na]).map(|(m, a)| m * a).sum();
    assert!((form - losses[100]).abs() <= 1e-10 * form.abs());
}

#[test]
fn losses_vanish_at_dc_steady_state() {
    let fem = model(16);
    let dae = build_coupled(&fem, &CircuitParams::default(), Waveform::Constant(24.0)).unwrap();
    let sol = integrate_with_switching(&dae, (0.0, 0.2), &SolverConfig::with_tolerance(1e-8)).unwrap();
    let losses = eddy_losses(&sol.trajectory, &fem, &[1e-4, 0.2]).unwrap();
    assert!(losses[0] > 0.0);
    assert!(losses[1] <= 1e-8 * losses[0], "{losses:?}");
}
