//! Posterior summaries over a fixed, finite candidate set.
//!
//! Every design loop in this crate scores the same candidate list after each
//! new observation. Instead of re-solving `L v = k(X, c)` per candidate, the
//! pool keeps `v_c = L⁻¹ k(X, c)` for every candidate and extends it by one
//! entry per observation, so an update costs `O(|pool| · n)`.

use super::gp::{clamp_variance, dot, GpPosterior, PosteriorSummary};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PooledPosterior {
    post: GpPosterior,
    candidates: Vec<Vec<f64>>,
    whitened: Vec<Vec<f64>>,
    means: Vec<f64>,
    variances: Vec<f64>,
}

impl PooledPosterior {
    pub fn new(post: GpPosterior, candidates: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(d) = post.dataset().dim() {
            if candidates.iter().any(|c| c.len() != d) {
                return Err(Error::input("candidate dimension differs from training data"));
            }
        }
        let mut pool = PooledPosterior {
            post,
            candidates,
            whitened: Vec::new(),
            means: Vec::new(),
            variances: Vec::new(),
        };
        pool.rebuild();
        Ok(pool)
    }

    fn rebuild(&mut self) {
        let sv = self.post.kernel().signal_variance;
        let mu0 = self.post.prior_mean();
        self.whitened = self
            .candidates
            .iter()
            .map(|c| self.post.whiten(&self.post.cross_cov(c)))
            .collect();
        self.means = self
            .whitened
            .iter()
            .map(|v| mu0 + dot(v, self.post.white()))
            .collect();
        self.variances = self
            .whitened
            .iter()
            .map(|v| clamp_variance(sv - dot(v, v)))
            .collect();
    }

    pub fn posterior(&self) -> &GpPosterior {
        &self.post
    }

    pub fn candidates(&self) -> &[Vec<f64>] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.means[i]
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.variances[i]
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn summary(&self, i: usize) -> PosteriorSummary {
        PosteriorSummary {
            mean: self.means[i],
            variance: self.variances[i],
        }
    }

    /// Mean variance over the whole pool.
    pub fn integrated_variance(&self) -> f64 {
        self.variances.iter().sum::<f64>() / self.variances.len().max(1) as f64
    }

    /// Conditions on an observation `y` at candidate `i`.
    pub fn observe(&mut self, i: usize, y: f64) -> Result<()> {
        let x = self.candidates[i].clone();
        self.observe_point(&x, y)
    }

    /// Conditions on an observation at an arbitrary location.
    pub fn observe_point(&mut self, x: &[f64], y: f64) -> Result<()> {
        let n = self.post.len();
        if !self.post.push(x, y)? {
            self.rebuild();
            return Ok(());
        }
        let row = &self.post.chol_rows()[n];
        let (l, d) = (&row[..n], row[n]);
        let w_new = self.post.white()[n];
        let kern = *self.post.kernel();
        for (i, c) in self.candidates.iter().enumerate() {
            let v = &mut self.whitened[i];
            let e = (kern.eval(x, c) - dot(l, v)) / d;
            v.push(e);
            self.means[i] += e * w_new;
            self.variances[i] = clamp_variance(self.variances[i] - e * e);
        }
        Ok(())
    }

    /// Kriging-believer update at candidate `i`; the mean surface is unchanged.
    pub fn hallucinate(&mut self, i: usize) -> Result<()> {
        let y = self.means[i];
        self.observe(i, y)
    }
}

