use mpwm_core::dae::StateHistory;

use crate::error::{SimError, SimResult};

/// Relative L2 error `‖ref − test‖ / ‖ref‖` of one state component over
/// `span`, both norms by midpoint quadrature on `samples` subintervals.
pub fn l2_error(
    reference: &dyn StateHistory,
    test: &dyn StateHistory,
    component: usize,
    span: (f64, f64),
    samples: usize,
) -> SimResult<f64> {
    l2_error_fn(|t| Ok(reference.state(t)?[component]), |t| Ok(test.state(t)?[component]), span, samples)
}

/// [`l2_error`] for plain functions of time.
pub fn l2_error_fn(
    reference: impl Fn(f64) -> SimResult<f64>,
    test: impl Fn(f64) -> SimResult<f64>,
    (t0, t1): (f64, f64),
    samples: usize,
) -> SimResult<f64> {
    if samples == 0 {
        return Err(SimError::Config("error quadrature needs at least one sample".into()));
    }
    let h = (t1 - t0) / samples as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..samples {
        let t = t0 + (i as f64 + 0.5) * h;
        let r = reference(t)?;
        let d = r - test(t)?;
        num += d * d;
        den += r * r;
    }
    if den == 0.0 {
        return Err(SimError::ZeroReference);
    }
    Ok((num / den).sqrt())
}
