use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A real state trajectory that can be sampled at any time in its span.
pub trait StateHistory {
    fn dim(&self) -> usize;
    fn span(&self) -> (f64, f64);
    fn state(&self, t: f64) -> Result<Vec<f64>>;
    fn state_derivative(&self, t: f64) -> Result<Vec<f64>>;
}

impl StateHistory for Trajectory<f64> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn span(&self) -> (f64, f64) {
        (self.start(), self.end())
    }

    fn state(&self, t: f64) -> Result<Vec<f64>> {
        self.eval(t)
    }

    fn state_derivative(&self, t: f64) -> Result<Vec<f64>> {
        self.eval_derivative(t)
    }
}

/// A run of accepted steps with strictly increasing times.
#[derive(Debug, Clone)]
pub struct TrajectoryPiece<S> {
    times: Vec<f64>,
    states: Vec<S>,
    derivs: Vec<S>,
}

impl<S: Scalar> TrajectoryPiece<S> {
    fn new() -> Self {
        Self { times: Vec::new(), states: Vec::new(), derivs: Vec::new() }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Time grid, states and derivatives with cubic Hermite dense output.
///
/// A trajectory is a sequence of pieces that abut at restart instants; the
/// shared instant appears in both pieces and evaluation there uses the later
/// piece (right limit).
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    dim: usize,
    pieces: Vec<TrajectoryPiece<S>>,
}

impl<S: Scalar> Trajectory<S> {
    pub fn new(dim: usize) -> Self {
        Self { dim, pieces: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Starts a new piece; subsequent pushes go there.
    pub fn begin_piece(&mut self) {
        self.pieces.push(TrajectoryPiece::new());
    }

    /// Appends a node to the current piece. Panics if time does not increase
    /// or the sizes are wrong.
    pub fn push(&mut self, t: f64, x: &[S], dx: &[S]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(dx.len(), self.dim);
        if self.pieces.is_empty() {
            self.begin_piece();
        }
        let piece = self.pieces.last_mut().unwrap();
        if let Some(&last) = piece.times.last() {
            assert!(t > last, "trajectory times must increase ({t} after {last})");
        }
        piece.times.push(t);
        piece.states.extend_from_slice(x);
        piece.derivs.extend_from_slice(dx);
    }

    /// Appends every piece of `other`.
    pub fn append(&mut self, other: Trajectory<S>) {
        assert_eq!(self.dim, other.dim);
        self.pieces.extend(other.pieces.into_iter().filter(|p| !p.is_empty()));
    }

    pub fn pieces(&self) -> &[TrajectoryPiece<S>] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.iter().map(|p| p.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn start(&self) -> f64 {
        self.pieces.iter().find(|p| !p.is_empty()).map_or(f64::NAN, |p| p.times[0])
    }

    pub fn end(&self) -> f64 {
        self.pieces.iter().rev().find(|p| !p.is_empty()).map_or(f64::NAN, |p| *p.times.last().unwrap())
    }

    /// Iterates over stored nodes `(t, x, x')`.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, &[S], &[S])> + '_ {
        let n = self.dim;
        self.pieces.iter().flat_map(move |p| {
            p.times.iter().enumerate().map(move |(i, &t)| (t, &p.states[i * n..(i + 1) * n], &p.derivs[i * n..(i + 1) * n]))
        })
    }

    pub fn last_state(&self) -> Option<&[S]> {
        let n = self.dim;
        let p = self.pieces.iter().rev().find(|p| !p.is_empty())?;
        let k = p.len() - 1;
        Some(&p.states[k * n..(k + 1) * n])
    }

    fn locate(&self, t: f64) -> Result<(usize, usize, f64)> {
        let (start, end) = (self.start(), self.end());
        let slack = 1e-12 * (end - start).abs().max(end.abs()).max(f64::MIN_POSITIVE);
        if !(t >= start - slack && t <= end + slack) {
            return Err(Error::OutOfSpan { t, start, end });
        }
        let t = t.clamp(start, end);
        // last piece whose first time is <= t
        let pi = self
            .pieces
            .iter()
            .rposition(|p| !p.is_empty() && p.times[0] <= t)
            .expect("non-empty trajectory");
        let p = &self.pieces[pi];
        if p.len() == 1 {
            return Ok((pi, 0, 0.0));
        }
        let idx = p.times.partition_point(|&x| x <= t).clamp(1, p.len() - 1) - 1;
        let h = p.times[idx + 1] - p.times[idx];
        let theta = ((t - p.times[idx]) / h).clamp(0.0, 1.0);
        Ok((pi, idx, theta))
    }

    pub fn eval_into(&self, t: f64, out: &mut [S]) -> Result<()> {
        let (pi, idx, theta) = self.locate(t)?;
        let p = &self.pieces[pi];
        let n = self.dim;
        if p.len() == 1 {
            out.copy_from_slice(&p.states[..n]);
            return Ok(());
        }
        let h = p.times[idx + 1] - p.times[idx];
        let (t2, t3) = (theta * theta, theta * theta * theta);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = (t3 - 2.0 * t2 + theta) * h;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = (t3 - t2) * h;
        let (x0, x1) = (&p.states[idx * n..(idx + 1) * n], &p.states[(idx + 1) * n..(idx + 2) * n]);
        let (d0, d1) = (&p.derivs[idx * n..(idx + 1) * n], &p.derivs[(idx + 1) * n..(idx + 2) * n]);
        for i in 0..n {
            out[i] = x0[i] * h00 + d0[i] * h10 + x1[i] * h01 + d1[i] * h11;
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Result<Vec<S>> {
        let mut out = vec![S::zero(); self.dim];
        self.eval_into(t, &mut out)?;
        Ok(out)
    }

    /// Time derivative of the dense output.
    pub fn eval_derivative_into(&self, t: f64, out: &mut [S]) -> Result<()> {
        let (pi, idx, theta) = self.locate(t)?;
        let p = &self.pieces[pi];
        let n = self.dim;
        if p.len() == 1 {
            out.copy_from_slice(&p.derivs[..n]);
            return Ok(());
        }
        let h = p.times[idx + 1] - p.times[idx];
        let t2 = theta * theta;
        let g00 = (6.0 * t2 - 6.0 * theta) / h;
        let g10 = 3.0 * t2 - 4.0 * theta + 1.0;
        let g01 = (-6.0 * t2 + 6.0 * theta) / h;
        let g11 = 3.0 * t2 - 2.0 * theta;
        let (x0, x1) = (&p.states[idx * n..(idx + 1) * n], &p.states[(idx + 1) * n..(idx + 2) * n]);
        let (d0, d1) = (&p.derivs[idx * n..(idx + 1) * n], &p.derivs[(idx + 1) * n..(idx + 2) * n]);
        for i in 0..n {
            out[i] = x0[i] * g00 + d0[i] * g10 + x1[i] * g01 + d1[i] * g11;
        }
        Ok(())
    }

    pub fn eval_derivative(&self, t: f64) -> Result<Vec<S>> {
        let mut out = vec![S::zero(); self.dim];
        self.eval_derivative_into(t, &mut out)?;
        Ok(out)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> Trajectory<T> {
        Trajectory {
            dim: self.dim,
            pieces: self
                .pieces
                .iter()
                .map(|p| TrajectoryPiece {
                    times: p.times.clone(),
                    states: p.states.iter().map(|&v| f(v)).collect(),
                    derivs: p.derivs.iter().map(|&v| f(v)).collect(),
                })
                .collect(),
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conjugate())
    }

    pub fn all_finite(&self) -> bool {
        self.pieces.iter().all(|p| p.states.iter().chain(&p.derivs).all(|v| v.is_finite_value()))
    }

    /// CSV with header `t,x_0,...`; complex entries are written as `re:im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t");
        for i in 0..self.dim {
            s.push_str(&format!(",x_{i}"));
        }
        s.push('\n');
        for (t, x, _) in self.nodes() {
            s.push_str(&format!("{t:.12e}"));
            for &v in x {
                if S::IS_COMPLEX {
                    s.push_str(&format!(",{:.12e}:{:.12e}", v.real_part(), v.imag_part()));
                } else {
                    s.push_str(&format!(",{:.12e}", v.real_part()));
                }
            }
            s.push('\n');
        }
        s
    }
}

impl Trajectory<Complex64> {
    pub fn real(&self) -> Trajectory<f64> {
        self.map(|v| v.re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_cubics_and_nodes() {
        let f = |t: f64| t * t * t - 2.0 * t + 1.0;
        let df = |t: f64| 3.0 * t * t - 2.0;
        let mut tr = Trajectory::<f64>::new(1);
        for t in [0.0, 0.3, 0.7, 1.0] {
            tr.push(t, &[f(t)], &[df(t)]);
        }
        for i in 0..=50 {
            let t = i as f64 / 50.0;
            assert!((tr.eval(t).unwrap()[0] - f(t)).abs() < 1e-14);
            assert!((tr.eval_derivative(t).unwrap()[0] - df(t)).abs() < 1e-12);
        }
        assert_eq!(tr.eval(0.3).unwrap()[0], f(0.3));
        assert!(tr.eval(1.5).is_err());
    }

    #[test]
    fn pieces_use_right_limit_at_boundaries() {
        let mut tr = Trajectory::<f64>::new(1);
        tr.push(0.0, &[0.0], &[1.0]);
        tr.push(1.0, &[1.0], &[1.0]);
        tr.begin_piece();
        tr.push(1.0, &[1.0], &[-1.0]);
        tr.push(2.0, &[0.0], &[-1.0]);
        assert_eq!(tr.eval_derivative(1.0).unwrap()[0], -1.0);
        assert!((tr.eval(0.5).unwrap()[0] - 0.5).abs() < 1e-15);
        assert!((tr.eval(1.5).unwrap()[0] - 0.5).abs() < 1e-15);
        assert_eq!(tr.len(), 4);
    }

    #[test]
    fn csv_writes_complex_as_pairs() {
        let mut tr = Trajectory::<Complex64>::new(1);
        tr.push(0.0, &[Complex64::new(1.0, -2.0)], &[Complex64::new(0.0, 0.0)]);
        let csv = tr.to_csv();
        assert!(csv.starts_with("t,x_0\n"));
        assert!(csv.contains("1.000000000000e0:-2.000000000000e0"));
    }
}
