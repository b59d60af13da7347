//! Piecewise polynomials on the unit period.
//!
//! Each segment `[a, b]` stores Legendre coefficients in the local coordinate
//! `s = 2 (τ - a) / (b - a) - 1 ∈ [-1, 1]`, ascending in degree. In that
//! representation products integrate in closed form,
//! `∫_a^b f g dτ = (b - a) Σ_n f_n g_n / (2n + 1)`, and differentiation and
//! antidifferentiation are exact coefficient recurrences, so none of the
//! Galerkin integrals below involve quadrature.

#[cfg(test)]
/// Values `[P_0(s), ..., P_n(s)]` by the three-term recurrence.
fn legendre_values(n: usize, s: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n >= 1 {
        p.push(s);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * s * p[k] - kf * p[k - 1]) / (kf + 1.0);
        p.push(next);
    }
    p
}

fn legendre_eval(coeffs: &[f64], s: f64) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    // Clenshaw
    let n = coeffs.len() - 1;
    let (mut b1, mut b2) = (0.0, 0.0);
    for k in (1..=n).rev() {
        let kf = k as f64;
        let alpha = (2.0 * kf + 1.0) / (kf + 1.0) * s;
        let beta = -(kf + 1.0) / (kf + 2.0);
        let b0 = coeffs[k] + alpha * b1 + beta * b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + s * b1 - 0.5 * b2
}

/// Derivative with respect to `s`.
fn legendre_derivative(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    if n <= 1 {
        return vec![0.0];
    }
    let mut d = vec![0.0; n - 1];
    // d_k = (2k + 1) Σ_{j > k, j - k odd} a_j, accumulated from the top
    let (mut odd, mut even) = (0.0, 0.0);
    for k in (0..n - 1).rev() {
        // a_{k+1} enters the parity class of k+1
        if (k + 1) % 2 == 1 {
            odd += coeffs[k + 1];
        } else {
            even += coeffs[k + 1];
        }
        let s = if k % 2 == 0 { odd } else { even };
        d[k] = (2 * k + 1) as f64 * s;
    }
    d
}

/// Antiderivative with respect to `s`, with value 0 at `s = -1`.
fn legendre_antiderivative(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    let mut b = vec![0.0; n + 1];
    for (k, &a) in coeffs.iter().enumerate() {
        if k == 0 {
            b[1] += a;
        } else {
            let c = a / (2 * k + 1) as f64;
            b[k + 1] += c;
            b[k - 1] -= c;
        }
    }
    let at_left: f64 = b.iter().enumerate().map(|(k, &c)| if k % 2 == 0 { c } else { -c }).sum();
    b[0] -= at_left;
    b
}

/// A piecewise polynomial on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomial {
    breakpoints: Vec<f64>,
    segments: Vec<Vec<f64>>,
}

impl PiecewisePolynomial {
    /// Panics unless breakpoints run strictly increasing from 0 to 1 and there
    /// is exactly one coefficient list per segment.
    pub fn new(breakpoints: Vec<f64>, segments: Vec<Vec<f64>>) -> Self {
        assert!(breakpoints.len() >= 2, "need at least one segment");
        assert_eq!(breakpoints[0], 0.0);
        assert_eq!(*breakpoints.last().unwrap(), 1.0);
        assert!(breakpoints.windows(2).all(|w| w[0] < w[1]), "breakpoints must increase");
        assert_eq!(segments.len(), breakpoints.len() - 1);
        Self { breakpoints, segments }
    }

    pub fn constant(breakpoints: Vec<f64>, value: f64) -> Self {
        let segments = vec![vec![value]; breakpoints.len() - 1];
        Self::new(breakpoints, segments)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Legendre coefficients of each segment in its local coordinate.
    pub fn segments(&self) -> &[Vec<f64>] {
        &self.segments
    }

    pub fn degree(&self) -> usize {
        self.segments
            .iter()
            .map(|c| c.iter().rposition(|&v| v != 0.0).unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    fn width(&self, seg: usize) -> f64 {
        self.breakpoints[seg + 1] - self.breakpoints[seg]
    }

    fn locate(&self, tau: f64) -> usize {
        // a breakpoint belongs to the segment on its left
        let interior = &self.breakpoints[1..self.breakpoints.len() - 1];
        interior.partition_point(|&b| b < tau)
    }

    fn local(&self, seg: usize, tau: f64) -> f64 {
        2.0 * (tau - self.breakpoints[seg]) / self.width(seg) - 1.0
    }

    /// Value at `tau ∈ [0, 1]`.
    pub fn eval(&self, tau: f64) -> f64 {
        let seg = self.locate(tau);
        legendre_eval(&self.segments[seg], self.local(seg, tau))
    }

    /// Value at the right end of `seg` and at the left end of `seg`.
    pub fn segment_end_values(&self, seg: usize) -> (f64, f64) {
        let c = &self.segments[seg];
        let left = c.iter().enumerate().map(|(k, &v)| if k % 2 == 0 { v } else { -v }).sum();
        let right = c.iter().sum();
        (left, right)
    }

    pub fn derivative(&self) -> Self {
        let segments = self
            .segments
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let scale = 2.0 / self.width(i);
                legendre_derivative(c).into_iter().map(|v| v * scale).collect()
            })
            .collect();
        Self { breakpoints: self.breakpoints.clone(), segments }
    }

    /// Continuous antiderivative `∫_0^τ f`, zero at `τ = 0`.
    pub fn antiderivative(&self) -> Self {
        let mut segments = Vec::with_capacity(self.segments.len());
        let mut carry = 0.0;
        for (i, c) in self.segments.iter().enumerate() {
            let half = 0.5 * self.width(i);
            let mut b: Vec<f64> = legendre_antiderivative(c).into_iter().map(|v| v * half).collect();
            b[0] += carry;
            carry = b.iter().sum();
            segments.push(b);
        }
        Self { breakpoints: self.breakpoints.clone(), segments }
    }

    /// `∫_0^1 f g dτ`, exact up to roundoff. Both must share breakpoints.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.breakpoints, other.breakpoints, "mismatched breakpoints");
        self.segments
            .iter()
            .zip(&other.segments)
            .enumerate()
            .map(|(i, (f, g))| {
                let dot: f64 = f.iter().zip(g).enumerate().map(|(n, (a, b))| a * b / (2 * n + 1) as f64).sum();
                self.width(i) * dot
            })
            .sum()
    }

    /// `∫` over segment `seg`.
    pub fn segment_integral(&self, seg: usize) -> f64 {
        self.width(seg) * self.segments[seg][0]
    }

    pub fn integral(&self) -> f64 {
        (0..self.segments.len()).map(|i| self.segment_integral(i)).sum()
    }

    pub fn scale(&mut self, alpha: f64) {
        for c in &mut self.segments {
            for v in c.iter_mut() {
                *v *= alpha;
            }
        }
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        assert_eq!(self.breakpoints, other.breakpoints, "mismatched breakpoints");
        for (c, o) in self.segments.iter_mut().zip(&other.segments) {
            if c.len() < o.len() {
                c.resize(o.len(), 0.0);
            }
            for (v, w) in c.iter_mut().zip(o) {
                *v += alpha * w;
            }
        }
    }

    /// Coefficient of the highest degree term of segment `seg` expressed in
    /// monomials of `τ`, up to a positive factor. Its sign is the sign of the
    /// top Legendre coefficient.
    pub fn leading_sign(&self, seg: usize) -> f64 {
        self.segments[seg].iter().rev().find(|&&v| v != 0.0).map_or(0.0, |v| v.signum())
    }

    /// Monomial coefficients of segment `seg` in the local variable
    /// `u = (τ - a) / (b - a) ∈ [0, 1]`, ascending.
    pub fn local_monomials(&self, seg: usize) -> Vec<f64> {
        let c = &self.segments[seg];
        let n = c.len();
        // shifted Legendre expansion: P_k(2u - 1) built by recurrence on polynomials
        let mut out = vec![0.0; n];
        let mut prev: Vec<f64> = vec![1.0];
        let mut cur: Vec<f64> = vec![-1.0, 2.0];
        for (k, &ck) in c.iter().enumerate() {
            let pk = match k {
                0 => prev.clone(),
                1 => cur.clone(),
                _ => {
                    let kf = (k - 1) as f64;
                    let mut next = vec![0.0; k + 1];
                    for (i, &v) in cur.iter().enumerate() {
                        next[i] -= (2.0 * kf + 1.0) * v / (kf + 1.0);
                        next[i + 1] += 2.0 * (2.0 * kf + 1.0) * v / (kf + 1.0);
                    }
                    for (i, &v) in prev.iter().enumerate() {
                        next[i] -= kf * v / (kf + 1.0);
                    }
                    prev = std::mem::replace(&mut cur, next);
                    cur.clone()
                }
            };
            for (i, v) in pk.iter().enumerate() {
                out[i] += ck * v;
            }
        }
        out
    }
}
