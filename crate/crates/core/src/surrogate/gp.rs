use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use crate::error::{Error, Result};

/// Jitter schedule, as multiples of the signal variance.
const JITTER_START: f64 = 1e-9;
const JITTER_MAX: f64 = 1e-5;
/// Negative variances above this magnitude are round-off and clamp to zero.
pub const VARIANCE_CLAMP: f64 = 1e-10;

/// Training inputs, targets and the homoscedastic noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpDataset {
    points: Vec<Vec<f64>>,
    observations: Vec<f64>,
    noise_std: f64,
}

impl GpDataset {
    pub fn new(points: Vec<Vec<f64>>, observations: Vec<f64>, noise_std: f64) -> Result<Self> {
        if points.len() != observations.len() {
            return Err(Error::input(format!(
                "{} points but {} observations",
                points.len(),
                observations.len()
            )));
        }
        if !(noise_std >= 0.0 && noise_std.is_finite()) {
            return Err(Error::input(format!("noise std must be >= 0, got {noise_std}")));
        }
        if let Some(first) = points.first() {
            let d = first.len();
            for p in &points {
                if p.len() != d {
                    return Err(Error::input("training points differ in dimension"));
                }
                if p.iter().any(|v| !v.is_finite()) {
                    return Err(Error::input("non-finite training coordinate"));
                }
            }
        }
        if observations.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("non-finite observation"));
        }
        Ok(GpDataset {
            points,
            observations,
            noise_std,
        })
    }

    pub fn empty(noise_std: f64) -> Result<Self> {
        Self::new(Vec::new(), Vec::new(), noise_std)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn observations(&self) -> &[f64] {
        &self.observations
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(Vec::len)
    }

    /// Returns a copy with one extra observation.
    pub fn with(&self, x: &[f64], y: f64) -> Result<Self> {
        let mut points = self.points.clone();
        let mut obs = self.observations.clone();
        points.push(x.to_vec());
        obs.push(y);
        Self::new(points, obs, self.noise_std)
    }
}

/// Posterior mean and variance at one location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub mean: f64,
    pub variance: f64,
}

impl PosteriorSummary {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

pub(crate) fn clamp_variance(v: f64) -> f64 {
    debug_assert!(v > -1e-6, "variance badly negative: {v}");
    if v < 0.0 {
        0.0
    } else {
        v
    }
}

/// A Gaussian process conditioned on a dataset.
///
/// Holds the Cholesky factor `L` of `K + (σ_n² + jitter) I` (row `i` stores
/// `L[i][0..=i]`), the whitened residual `L⁻¹(y − μ₀)` and the weight vector
/// `α = (K + σ_n² I)⁻¹ (y − μ₀)`. Immutable once built; conditioning returns a
/// new value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpPosterior {
    dataset: GpDataset,
    kernel: KernelSpec,
    prior_mean: f64,
    jitter: f64,
    chol: Vec<Vec<f64>>,
    white: Vec<f64>,
    weights: Vec<f64>,
}

/// Fits a zero-mean Gaussian process.
pub fn gp_fit(data: GpDataset, kernel: KernelSpec) -> Result<GpPosterior> {
    GpPosterior::fit(data, kernel, 0.0)
}

pub fn gp_predict(post: &GpPosterior, x: &[f64]) -> Result<PosteriorSummary> {
    post.predict(x)
}

/// Kriging-believer step: condition on `(x, μ(x))`.
pub fn gp_condition_hallucinated(post: &GpPosterior, x: &[f64]) -> Result<GpPosterior> {
    post.condition_hallucinated(x)
}

/// Mean posterior variance over `grid`.
pub fn integrated_posterior_variance(post: &GpPosterior, grid: &[Vec<f64>]) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::input("integrated variance needs a non-empty grid"));
    }
    let mut total = 0.0;
    for s in grid {
        total += post.predict(s)?.variance;
    }
    Ok(total / grid.len() as f64)
}

impl GpPosterior {
    pub fn fit(data: GpDataset, kernel: KernelSpec, prior_mean: f64) -> Result<Self> {
        kernel.validate()?;
        if !prior_mean.is_finite() {
            return Err(Error::input("prior mean must be finite"));
        }
        let n = data.len();
        let noise_var = data.noise_std() * data.noise_std();
        let mut jitter = JITTER_START * kernel.signal_variance;
        let limit = JITTER_MAX * kernel.signal_variance * (1.0 + 1e-9);
        let chol = loop {
            match cholesky(data.points(), &kernel, noise_var + jitter) {
                Ok(l) => break l,
                Err(_) if jitter * 10.0 <= limit => jitter *= 10.0,
                Err(pivot) => {
                    return Err(Error::numerical(format!(
                        "Cholesky of {n}x{n} Gram matrix failed with jitter {jitter:.1e} \
                         (pivot {pivot:.3e}); inputs are nearly duplicated or the \
                         length-scale is too long"
                    )))
                }
            }
        };
        let resid: Vec<f64> = data.observations().iter().map(|y| y - prior_mean).collect();
        let white = forward_solve(&chol, &resid);
        let weights = back_solve(&chol, &white);
        Ok(GpPosterior {
            dataset: data,
            kernel,
            prior_mean,
            jitter,
            chol,
            white,
            weights,
        })
    }

    /// The unconditioned prior.
    pub fn prior(kernel: KernelSpec, noise_std: f64, prior_mean: f64) -> Result<Self> {
        Self::fit(GpDataset::empty(noise_std)?, kernel, prior_mean)
    }

    pub fn dataset(&self) -> &GpDataset {
        &self.dataset
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }

    pub fn len(&self) -> usize {
        self.dataset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dataset.is_empty()
    }

    /// Absolute jitter added to the diagonal.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn white(&self) -> &[f64] {
        &self.white
    }

    pub(crate) fn chol_rows(&self) -> &[Vec<f64>] {
        &self.chol
    }

    /// Dense copy of the lower-triangular factor.
    pub fn chol_factor(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        self.chol
            .iter()
            .map(|row| {
                let mut full = row.clone();
                full.resize(n, 0.0);
                full
            })
            .collect()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if let Some(d) = self.dataset.dim() {
            if d != x.len() {
                return Err(Error::input(format!(
                    "query has dimension {} but training data has {d}",
                    x.len()
                )));
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("non-finite query coordinate"));
        }
        Ok(())
    }

    pub(crate) fn cross_cov(&self, x: &[f64]) -> Vec<f64> {
        self.dataset
            .points()
            .iter()
            .map(|p| self.kernel.eval(p, x))
            .collect()
    }

    /// `L⁻¹ k(X, x)`.
    pub(crate) fn whiten(&self, kx: &[f64]) -> Vec<f64> {
        forward_solve(&self.chol, kx)
    }

    pub fn predict(&self, x: &[f64]) -> Result<PosteriorSummary> {
        self.check_dim(x)?;
        let kx = self.cross_cov(x);
        let v = self.whiten(&kx);
        let mean = self.prior_mean + dot(&v, &self.white);
        let variance = clamp_variance(self.kernel.signal_variance - dot(&v, &v));
        Ok(PosteriorSummary { mean, variance })
    }

    /// Conditions on one more observation with a rank-one extension of the
    /// factor; falls back to a full refit when the new pivot is not positive.
    pub fn condition(&self, x: &[f64], y: f64) -> Result<GpPosterior> {
        let mut next = self.clone();
        next.push(x, y)?;
        Ok(next)
    }

    pub fn condition_hallucinated(&self, x: &[f64]) -> Result<GpPosterior> {
        let believed = self.predict(x)?.mean;
        self.condition(x, believed)
    }

    /// Appends an observation in place. Returns `true` for a rank-one
    /// extension and `false` when the factor had to be rebuilt.
    pub(crate) fn push(&mut self, x: &[f64], y: f64) -> Result<bool> {
        self.check_dim(x)?;
        if !y.is_finite() {
            return Err(Error::input("non-finite observation"));
        }
        let kx = self.cross_cov(x);
        let l = self.whiten(&kx);
        let noise_var = self.dataset.noise_std() * self.dataset.noise_std();
        let d2 = self.kernel.eval(x, x) + noise_var + self.jitter - dot(&l, &l);
        if !(d2 > self.jitter * 1e-3) || !d2.is_finite() {
            let data = self.dataset.with(x, y)?;
            *self = GpPosterior::fit(data, self.kernel, self.prior_mean)?;
            return Ok(false);
        }
        let d = d2.sqrt();
        let w_new = (y - self.prior_mean - dot(&l, &self.white)) / d;
        let mut row = l;
        row.push(d);
        self.chol.push(row);
        self.white.push(w_new);
        self.weights = back_solve(&self.chol, &self.white);
        self.dataset.points.push(x.to_vec());
        self.dataset.observations.push(y);
        Ok(true)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Row-wise Cholesky of `K(X, X) + diag I`. On failure returns the offending pivot.
fn cholesky(points: &[Vec<f64>], kernel: &KernelSpec, diag: f64) -> std::result::Result<Vec<Vec<f64>>, f64> {
    let n = points.len();
    let mut l: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = vec![0.0; i + 1];
        for j in 0..i {
            let s = kernel.eval(&points[i], &points[j]) - dot(&row[..j], &l[j][..j]);
            row[j] = s / l[j][j];
        }
        let pivot = kernel.eval(&points[i], &points[i]) + diag - dot(&row[..i], &row[..i]);
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(pivot);
        }
        row[i] = pivot.sqrt();
        l.push(row);
    }
    Ok(l)
}

/// Solves `L z = b`.
pub(crate) fn forward_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let mut z = Vec::with_capacity(b.len());
    for (i, row) in l.iter().enumerate() {
        let s = b[i] - dot(&row[..i], &z);
        z.push(s / row[i]);
    }
    z
}

/// Solves `Lᵀ z = b`.
fn back_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut z = b.to_vec();
    for i in (0..n).rev() {
        z[i] /= l[i][i];
        let zi = z[i];
        for (k, lik) in l[i][..i].iter().enumerate() {
            z[k] -= lik * zi;
        }
    }
    z
}
