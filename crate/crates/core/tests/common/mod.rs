#![allow(dead_code)]

use mpwm_core::basis::PwmBasis;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Integral of `f` over [0, 1] split at the duty cycle, exact for
/// piecewise polynomials up to degree 39.
pub fn integrate_unit(duty: f64, f: impl Fn(f64) -> f64) -> f64 {
    let rule = gauss_legendre(20);
    [(0.0, duty), (duty, 1.0)]
        .iter()
        .map(|&(a, b)| {
            let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
            rule.iter().map(|&(x, w)| w * h * f(m + h * x)).sum::<f64>()
        })
        .sum()
}

/// The duty-cycle ramp written out directly.
pub fn ramp(tau: f64, duty: f64) -> f64 {
    let s3 = 3f64.sqrt();
    if tau <= duty {
        s3 * (2.0 * tau - duty) / duty
    } else {
        s3 * (1.0 + duty - 2.0 * tau) / (1.0 - duty)
    }
}

pub fn basis(np: usize, duty: f64) -> PwmBasis {
    PwmBasis::generate(np, duty).unwrap()
}

/// Relative L2 distance of two sampled signals.
pub fn rel_l2(reference: &[f64], test: &[f64]) -> f64 {
    let num: f64 = reference.iter().zip(test).map(|(r, t)| (r - t).powi(2)).sum();
    let den: f64 = reference.iter().map(|r| r * r).sum();
    (num / den).sqrt()
}

/// Midpoints of `n` equal cells of `span`.
pub fn midpoints(span: (f64, f64), n: usize) -> Vec<f64> {
    let h = (span.1 - span.0) / n as f64;
    (0..n).map(|i| span.0 + (i as f64 + 0.5) * h).collect()
}
