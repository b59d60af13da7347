//! Variable-step BDF integration of `A x' + B x = c(t)`.
//!
//! The method is the fixed-leading-coefficient BDF of order 1 or 2 in
//! Nordsieck form. With the history carried as `z = [x, h x', h² x''/2]` the
//! corrector is `x = x_p + l0 Δ` where `(A / h + l0 B) Δ = c - B x_p - A z1_p / h`.
//! The iteration matrix depends only on `h`, so a new LU is needed only when
//! the step size changes.

use super::system::DescriptorSystem;
use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::{Pencil, SparseLu};

/// Tolerances and step-size limits for [`Integrator`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub abstol: f64,
    pub reltol: f64,
    /// First step; defaults to `1e-4` of the span.
    pub initial_step: Option<f64>,
    /// Smallest step before giving up; defaults to `1e-12` of the span.
    pub min_step: Option<f64>,
    pub max_step: Option<f64>,
    /// BDF order, 1 or 2.
    pub max_order: usize,
    /// Store every accepted step; otherwise only the ends of each run.
    pub dense_output: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            abstol: 1e-8,
            reltol: 1e-6,
            initial_step: None,
            min_step: None,
            max_step: None,
            max_order: 2,
            dense_output: true,
        }
    }
}

impl SolverConfig {
    /// Same absolute and relative tolerance.
    pub fn with_tolerance(tol: f64) -> Self {
        Self { abstol: tol, reltol: tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abstol > 0.0 && self.reltol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerances must be positive (abstol {}, reltol {})",
                self.abstol, self.reltol
            )));
        }
        if !(1..=2).contains(&self.max_order) {
            return Err(Error::InvalidParameter(format!("BDF order must be 1 or 2, got {}", self.max_order)));
        }
        for (name, v) in [("initial_step", self.initial_step), ("min_step", self.min_step), ("max_step", self.max_step)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }
}

/// Work counters of one or more integrations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub factorizations: usize,
    pub step_size_changes: usize,
    /// Number of restarted runs (one per integration interval).
    pub runs: usize,
}

impl std::ops::AddAssign for IntegrationStats {
    fn add_assign(&mut self, o: Self) {
        self.accepted_steps += o.accepted_steps;
        self.rejected_steps += o.rejected_steps;
        self.factorizations += o.factorizations;
        self.step_size_changes += o.step_size_changes;
        self.runs += o.runs;
    }
}

/// Integrator bound to one pencil; the sparse symbolic analysis is shared
/// by all runs.
pub struct Integrator<S: Scalar> {
    sys: DescriptorSystem<S>,
    pencil: Pencil<S>,
    config: SolverConfig,
}

impl<S: Scalar> Integrator<S> {
    pub fn new(sys: DescriptorSystem<S>, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let pencil = Pencil::new(&sys.a, &sys.b)?;
        Ok(Self { sys, pencil, config })
    }

    pub fn system(&self) -> &DescriptorSystem<S> {
        &self.sys
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Integrates from a consistent `(x0, xdot0)` over `[t0, t1]`, appending
    /// a new piece to `out`. `excitation(t, c)` writes `c(t)`; it is only
    /// evaluated strictly after `t0`.
    pub fn run(
        &mut self,
        excitation: &mut dyn FnMut(f64, &mut [S]),
        x0: &[S],
        xdot0: &[S],
        (t0, t1): (f64, f64),
        out: &mut Trajectory<S>,
    ) -> Result<IntegrationStats> {
        let n = self.sys.dim();
        if x0.len() != n || xdot0.len() != n || out.dim() != n {
            return Err(Error::Dimension(format!("integrator state dimension is {n}")));
        }
        if !(t1 > t0) {
            return Err(Error::InvalidParameter(format!("empty integration interval [{t0}, {t1}]")));
        }
        let cfg = &self.config;
        let span = t1 - t0;
        let q = cfg.max_order;
        let l: &[f64] = if q == 2 { &[2.0 / 3.0, 1.0, 1.0 / 3.0] } else { &[1.0, 1.0] };
        let max_step = cfg.max_step.unwrap_or(f64::INFINITY).min(span);
        let min_step = cfg.min_step.unwrap_or(1e-12 * span).min(max_step);
        let end_slack = 1e-13 * t1.abs().max(span);
        let factorizations_before = self.pencil.factorizations();
        let mut stats = IntegrationStats { runs: 1, ..Default::default() };

        let mut h = cfg.initial_step.unwrap_or(1e-4 * span).clamp(min_step, max_step);
        h = fit_to_end(h, t1 - t0);

        let mut z: Vec<Vec<S>> = vec![x0.to_vec(), xdot0.iter().map(|&v| v * h).collect()];
        if q == 2 {
            z.push(vec![S::zero(); n]);
        }
        out.begin_piece();
        out.push(t0, x0, xdot0);

        let mut lu: Option<(f64, SparseLu<S>)> = None;
        let mut t = t0;
        let (mut zp, mut c, mut r, mut tmp) = (vec![vec![S::zero(); n]; q + 1], vec![S::zero(); n], vec![S::zero(); n], vec![S::zero(); n]);
        let mut last_dense: Option<(f64, Vec<S>, Vec<S>)> = None;

        while t1 - t > end_slack {
            if lu.as_ref().is_none_or(|(hh, _)| *hh != h) {
                let m = self.pencil.factorize(S::from_real(1.0 / h), S::from_real(l[0]))?;
                lu = Some((h, m));
            }
            let m = &lu.as_ref().unwrap().1;

            // predictor: Pascal triangle applied to z
            for i in 0..n {
                if q == 2 {
                    zp[0][i] = z[0][i] + z[1][i] + z[2][i];
                    zp[1][i] = z[1][i] + z[2][i] * 2.0;
                    zp[2][i] = z[2][i];
                } else {
                    zp[0][i] = z[0][i] + z[1][i];
                    zp[1][i] = z[1][i];
                }
            }
            let t_new = if (t1 - (t + h)).abs() <= end_slack { t1 } else { t + h };
            excitation(t_new, &mut c);
            // r = c - B x_p - A z1_p / h
            self.sys.b.mul_vec(&zp[0], &mut tmp);
            for i in 0..n {
                r[i] = c[i] - tmp[i];
            }
            self.sys.a.mul_vec_acc(S::from_real(-1.0 / h), &zp[1], &mut r);
            m.solve_in_place(&mut r)?;

            // error estimate: predictor-corrector difference in the weighted max norm
            let mut err: f64 = 0.0;
            for i in 0..n {
                let dx = r[i] * l[0];
                let xn = zp[0][i] + dx;
                let w = cfg.abstol + cfg.reltol * xn.modulus().max(zp[0][i].modulus());
                err = err.max(dx.modulus() / w);
            }
            if !err.is_finite() {
                return Err(Error::NonFinite(t_new));
            }

            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-1.0 / (q as f64 + 1.0))).clamp(0.2, 5.0) };
            let mut h_new;
            if err <= 1.0 {
                for (j, zj) in z.iter_mut().enumerate() {
                    for i in 0..n {
                        zj[i] = zp[j][i] + r[i] * l[j];
                    }
                }
                t = t_new;
                stats.accepted_steps += 1;
                let deriv: Vec<S> = z[1].iter().map(|&v| v * (1.0 / h)).collect();
                if cfg.dense_output || t1 - t <= end_slack {
                    out.push(t, &z[0], &deriv);
                    last_dense = None;
                } else {
                    last_dense = Some((t, z[0].clone(), deriv));
                }
                h_new = if factor >= 1.5 { h * factor } else { h };
            } else {
                stats.rejected_steps += 1;
                h_new = h * factor.min(0.9);
                if h_new < min_step {
                    return Err(Error::StepUnderflow { t, step: h_new, min_step });
                }
            }
            h_new = h_new.min(max_step);
            if t1 - t > end_slack {
                h_new = fit_to_end(h_new, t1 - t);
            }
            if h_new != h {
                let ratio = h_new / h;
                let mut scale = 1.0;
                for zj in z.iter_mut().skip(1) {
                    scale *= ratio;
                    for v in zj.iter_mut() {
                        *v = *v * scale;
                    }
                }
                h = h_new;
                stats.step_size_changes += 1;
            }
        }
        if let Some((t, x, d)) = last_dense {
            out.push(t, &x, &d);
        }
        stats.factorizations = self.pencil.factorizations() - factorizations_before;
        Ok(stats)
    }
}

/// Adjusts `h` so the remaining interval is not left with a sliver.
fn fit_to_end(h: f64, remaining: f64) -> f64 {
    if h >= remaining / 1.1 {
        remaining
    } else if h > remaining / 2.0 {
        remaining / 2.0
    } else {
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SparseMatrix;
    use num_complex::Complex64;

    fn scalar_system<S: Scalar>(a: S, b: S) -> DescriptorSystem<S> {
        DescriptorSystem::new(SparseMatrix::from_triplets(1, 1, vec![(0, 0, a)]), SparseMatrix::from_triplets(1, 1, vec![(0, 0, b)]))
            .unwrap()
    }

    fn solve_scalar(tol: f64, order: usize) -> (f64, IntegrationStats) {
        let cfg = SolverConfig { max_order: order, ..SolverConfig::with_tolerance(tol) };
        let mut it = Integrator::new(scalar_system(1.0, 1.0), cfg).unwrap();
        let mut tr = Trajectory::new(1);
        let st = it.run(&mut |_, c| c[0] = 0.0, &[1.0], &[-1.0], (0.0, 1.0), &mut tr).unwrap();
        assert_eq!(tr.end(), 1.0);
        ((tr.last_state().unwrap()[0] - (-1.0f64).exp()).abs(), st)
    }

    #[test]
    fn exponential_decay() {
        let (err, st) = solve_scalar(1e-8, 2);
        assert!(err <= 1e-6, "error {err}");
        assert!(st.factorizations <= st.step_size_changes + 1);
    }

    #[test]
    fn halving_the_step_quarters_the_error() {
        let err = |h: f64| {
            let cfg = SolverConfig { initial_step: Some(h), max_step: Some(h), ..SolverConfig::with_tolerance(1e-1) };
            let mut it = Integrator::new(scalar_system(1.0, 1.0), cfg).unwrap();
            let mut tr = Trajectory::new(1);
            it.run(&mut |_, c| c[0] = 0.0, &[1.0], &[-1.0], (0.0, 1.0), &mut tr).unwrap();
            (tr.last_state().unwrap()[0] - (-1.0f64).exp()).abs()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn first_order_needs_more_steps() {
        let (e1, s1) = solve_scalar(1e-6, 1);
        let (_, s2) = solve_scalar(1e-6, 2);
        assert!(e1 < 1e-3, "error {e1}");
        assert!(s1.accepted_steps > 3 * s2.accepted_steps);
    }

    #[test]
    fn complex_scalar_matches_closed_form() {
        // x' + (1 + 2πi) x = 1, x(0) = 0
        let lam = Complex64::new(1.0, 2.0 * std::f64::consts::PI);
        let mut it = Integrator::new(scalar_system(Complex64::new(1.0, 0.0), lam), SolverConfig::with_tolerance(1e-9)).unwrap();
        let mut tr = Trajectory::new(1);
        let one = Complex64::new(1.0, 0.0);
        it.run(&mut |_, c| c[0] = one, &[Complex64::new(0.0, 0.0)], &[one], (0.0, 2.0), &mut tr).unwrap();
        for k in 0..=40 {
            let t = k as f64 * 0.05;
            let exact = (one - (-lam * t).exp()) / lam;
            let got = tr.eval(t).unwrap()[0];
            assert!((got - exact).norm() < 1e-6, "t={t}: {got} vs {exact}");
        }
    }

    #[test]
    fn conjugate_systems_give_conjugate_solutions() {
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 0, Complex64::new(1.0, 0.5)), (1, 1, Complex64::new(2.0, 0.0))]);
        let b = SparseMatrix::from_triplets(
            2,
            2,
            vec![(0, 0, Complex64::new(3.0, 1.0)), (0, 1, Complex64::new(-1.0, 0.0)), (1, 0, Complex64::new(0.5, -2.0)), (1, 1, Complex64::new(1.0, 4.0))],
        );
        let sys = DescriptorSystem::new(a.clone(), b.clone()).unwrap();
        let sys_c = DescriptorSystem::new(a.map(|v| v.conj()), b.map(|v| v.conj())).unwrap();
        let cv = [Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.0)];
        let x0 = [Complex64::new(0.0, 0.0); 2];
        let d0 = [Complex64::new(0.6, 1.4), Complex64::new(-0.25, 0.0)];
        let mut tr = Trajectory::new(2);
        let mut tr_c = Trajectory::new(2);
        Integrator::new(sys, SolverConfig::with_tolerance(1e-7))
            .unwrap()
            .run(&mut |_, c| c.copy_from_slice(&cv), &x0, &d0, (0.0, 1.0), &mut tr)
            .unwrap();
        Integrator::new(sys_c, SolverConfig::with_tolerance(1e-7))
            .unwrap()
            .run(&mut |_, c| {
                c[0] = cv[0].conj();
                c[1] = cv[1].conj();
            }, &x0, &[d0[0].conj(), d0[1].conj()], (0.0, 1.0), &mut tr_c)
            .unwrap();
        for (p, q) in tr.nodes().zip(tr_c.nodes()) {
            assert_eq!(p.0, q.0);
            for (u, v) in p.1.iter().zip(q.1) {
                assert!((u.conj() - v).norm() <= 1e-12 * (1.0 + u.norm()));
            }
        }
    }

    #[test]
    fn sparse_output_keeps_endpoints() {
        let cfg = SolverConfig { dense_output: false, ..SolverConfig::with_tolerance(1e-6) };
        let mut it = Integrator::new(scalar_system(1.0, 1.0), cfg).unwrap();
        let mut tr = Trajectory::new(1);
        it.run(&mut |_, c| c[0] = 0.0, &[1.0], &[-1.0], (0.0, 1.0), &mut tr).unwrap();
        assert_eq!(tr.len(), 2);
    }

    #[test]
    fn underflow_is_reported() {
        let cfg = SolverConfig { min_step: Some(0.5), max_step: Some(0.5), ..SolverConfig::with_tolerance(1e-12) };
        let mut it = Integrator::new(scalar_system(1.0, 1.0), cfg).unwrap();
        let mut tr = Trajectory::new(1);
        let r = it.run(&mut |_, c| c[0] = 0.0, &[1.0], &[-1.0], (0.0, 10.0), &mut tr);
        assert!(matches!(r, Err(Error::StepUnderflow { .. })));
    }
}
