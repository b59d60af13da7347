use crate::basis::relative_time;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::SparseMatrix;

/// Ideal pulsed voltage: `V0` while `τ(t) ≤ D`, zero otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulsedSource {
    pub amplitude: f64,
    pub period: f64,
    pub duty: f64,
}

impl PulsedSource {
    pub fn new(amplitude: f64, period: f64, duty: f64) -> Result<Self> {
        if !(duty > 0.0 && duty < 1.0) {
            return Err(Error::DutyCycle(duty));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidParameter(format!("switching period must be positive, got {period}")));
        }
        Ok(Self { amplitude, period, duty })
    }

    pub fn from_frequency(amplitude: f64, frequency: f64, duty: f64) -> Result<Self> {
        Self::new(amplitude, 1.0 / frequency, duty)
    }

    pub fn value(&self, t: f64) -> f64 {
        if relative_time(t, self.period) <= self.duty {
            self.amplitude
        } else {
            0.0
        }
    }

    /// Switching instants `k Ts` and `(k + D) Ts` strictly inside `(t0, t1)`.
    pub fn switching_instants(&self, t0: f64, t1: f64) -> Vec<f64> {
        let ts = self.period;
        let eps = 1e-9 * ts;
        let mut out = Vec::new();
        let mut k = (t0 / ts).floor() as i64 - 1;
        loop {
            let base = k as f64 * ts;
            if base > t1 {
                break;
            }
            for t in [base, (k as f64 + self.duty) * ts] {
                if t > t0 + eps && t < t1 - eps {
                    out.push(t);
                }
            }
            k += 1;
        }
        out
    }
}

/// Scalar input waveform driving a [`LinearDae`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Waveform {
    Pulsed(PulsedSource),
    Sine { amplitude: f64, frequency: f64 },
    Constant(f64),
}

impl Waveform {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Waveform::Pulsed(p) => p.value(t),
            Waveform::Sine { amplitude, frequency } => amplitude * (2.0 * std::f64::consts::PI * frequency * t).sin(),
            Waveform::Constant(v) => *v,
        }
    }

    /// Instants where the waveform is discontinuous.
    pub fn discontinuities(&self, t0: f64, t1: f64) -> Vec<f64> {
        match self {
            Waveform::Pulsed(p) => p.switching_instants(t0, t1),
            _ => Vec::new(),
        }
    }

    pub fn pulsed(&self) -> Option<&PulsedSource> {
        match self {
            Waveform::Pulsed(p) => Some(p),
            _ => None,
        }
    }
}

/// Descriptor pencil `A x' + B x`, real or complex.
#[derive(Debug, Clone)]
pub struct DescriptorSystem<S> {
    pub a: SparseMatrix<S>,
    pub b: SparseMatrix<S>,
}

impl<S: Scalar> DescriptorSystem<S> {
    pub fn new(a: SparseMatrix<S>, b: SparseMatrix<S>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.nrows() != n || b.ncols() != n {
            return Err(Error::Dimension(format!(
                "A is {}x{}, B is {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        Ok(Self { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

/// Linear DAE `A x' + B x = v(t) · injection` with initial state `x0`.
#[derive(Debug, Clone)]
pub struct LinearDae {
    pub system: DescriptorSystem<f64>,
    pub injection: Vec<f64>,
    pub source: Waveform,
    pub x0: Vec<f64>,
    /// Optional state names, used for output headers.
    pub labels: Vec<String>,
}

impl LinearDae {
    pub fn new(a: SparseMatrix<f64>, b: SparseMatrix<f64>, injection: Vec<f64>, source: Waveform, x0: Vec<f64>) -> Result<Self> {
        let system = DescriptorSystem::new(a, b)?;
        let n = system.dim();
        if injection.len() != n || x0.len() != n {
            return Err(Error::Dimension(format!(
                "state dimension {n}, injection {}, x0 {}",
                injection.len(),
                x0.len()
            )));
        }
        Ok(Self { system, injection, source, x0, labels: Vec::new() })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        self.labels = labels;
        self
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    pub fn a(&self) -> &SparseMatrix<f64> {
        &self.system.a
    }

    pub fn b(&self) -> &SparseMatrix<f64> {
        &self.system.b
    }

    pub fn excitation(&self, t: f64) -> Vec<f64> {
        self.excitation_for(self.source.value(t))
    }

    pub fn excitation_for(&self, v: f64) -> Vec<f64> {
        self.injection.iter().map(|&w| w * v).collect()
    }

    /// Same model driven by another waveform.
    pub fn with_source(&self, source: Waveform) -> Self {
        Self { source, ..self.clone() }
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pulse_levels_and_instants() {
        let p = PulsedSource::new(24.0, 1e-3, 0.25).unwrap();
        assert_eq!(p.value(0.0), 24.0);
        assert_eq!(p.value(0.1e-3), 24.0);
        assert_eq!(p.value(0.5e-3), 0.0);
        assert_eq!(p.value(1.1e-3), 24.0);
        let s = p.switching_instants(0.0, 2e-3);
        assert_eq!(s.len(), 3);
        assert!((s[0] - 0.25e-3).abs() < 1e-15);
        assert!((s[1] - 1e-3).abs() < 1e-15);
        assert!((s[2] - 1.25e-3).abs() < 1e-15);
    }

    #[test]
    fn bad_pulse_parameters() {
        assert!(PulsedSource::new(1.0, 1.0, 1.0).is_err());
        assert!(PulsedSource::new(1.0, 0.0, 0.5).is_err());
    }
}
