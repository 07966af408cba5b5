use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    SquaredExponential,
    Matern32,
}

/// Stationary covariance function with a single isotropic length-scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub length_scale: f64,
    pub signal_variance: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, length_scale: f64, signal_variance: f64) -> Result<Self> {
        let spec = KernelSpec {
            kind,
            length_scale,
            signal_variance,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn squared_exponential(length_scale: f64, signal_variance: f64) -> Result<Self> {
        Self::new(KernelKind::SquaredExponential, length_scale, signal_variance)
    }

    pub fn matern32(length_scale: f64, signal_variance: f64) -> Result<Self> {
        Self::new(KernelKind::Matern32, length_scale, signal_variance)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_scale > 0.0 && self.length_scale.is_finite()) {
            return Err(Error::config(format!(
                "kernel length-scale must be positive, got {}",
                self.length_scale
            )));
        }
        if !(self.signal_variance > 0.0 && self.signal_variance.is_finite()) {
            return Err(Error::config(format!(
                "kernel signal variance must be positive, got {}",
                self.signal_variance
            )));
        }
        Ok(())
    }

    /// Covariance as a function of Euclidean distance `r`.
    #[inline]
    pub fn of_distance(&self, r: f64) -> f64 {
        match self.kind {
            KernelKind::SquaredExponential => {
                let z = r / self.length_scale;
                self.signal_variance * (-0.5 * z * z).exp()
            }
            KernelKind::Matern32 => {
                let a = 3f64.sqrt() * r / self.length_scale;
                self.signal_variance * (1.0 + a) * (-a).exp()
            }
        }
    }

    /// Unchecked evaluation; callers guarantee equal dimensions.
    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        let r2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        self.of_distance(r2.sqrt())
    }

    /// `k(a, b) / σ_f²`, in `[0, 1]`.
    #[inline]
    pub fn correlation(&self, a: &[f64], b: &[f64]) -> f64 {
        self.eval(a, b) / self.signal_variance
    }
}

/// Checked kernel evaluation.
pub fn kernel_eval(spec: &KernelSpec, s: &[f64], s2: &[f64]) -> Result<f64> {
    if s.len() != s2.len() {
        return Err(Error::input(format!(
            "kernel arguments differ in dimension ({} vs {})",
            s.len(),
            s2.len()
        )));
    }
    Ok(spec.eval(s, s2))
}
