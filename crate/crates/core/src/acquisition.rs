//! Acquisition scoring and sequential / batch query selection.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::surrogate::{GpPosterior, PooledPosterior, PosteriorSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AcquisitionKind {
    Ucb,
    ExpectedImprovement,
    MaxVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionSpec {
    pub kind: AcquisitionKind,
    /// UCB exploration weight.
    pub beta: f64,
    /// EI improvement margin.
    pub xi: f64,
}

impl AcquisitionSpec {
    pub fn ucb(beta: f64) -> Self {
        AcquisitionSpec {
            kind: AcquisitionKind::Ucb,
            beta,
            xi: 0.0,
        }
    }

    pub fn expected_improvement(xi: f64) -> Self {
        AcquisitionSpec {
            kind: AcquisitionKind::ExpectedImprovement,
            beta: 0.0,
            xi,
        }
    }

    pub fn max_variance() -> Self {
        AcquisitionSpec {
            kind: AcquisitionKind::MaxVariance,
            beta: 0.0,
            xi: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0) || !(self.xi >= 0.0) {
            return Err(Error::config("acquisition beta and xi must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchSpec {
    pub batch_size: usize,
    /// Weight on the max kernel correlation to already-chosen batch members.
    pub diversity_weight: f64,
}

impl BatchSpec {
    pub const DEFAULT_DIVERSITY: f64 = 0.5;

    pub fn new(batch_size: usize) -> Self {
        BatchSpec {
            batch_size,
            diversity_weight: Self::DEFAULT_DIVERSITY,
        }
    }
}

/// Scores one posterior summary. `incumbent` is only read by EI.
pub fn acq_score(spec: &AcquisitionSpec, summary: &PosteriorSummary, incumbent: f64) -> f64 {
    let sd = summary.variance.max(0.0).sqrt();
    match spec.kind {
        AcquisitionKind::Ucb => summary.mean + spec.beta * sd,
        AcquisitionKind::MaxVariance => summary.variance.max(0.0),
        AcquisitionKind::ExpectedImprovement => {
            let gain = summary.mean - incumbent - spec.xi;
            if sd <= 0.0 {
                return gain.max(0.0);
            }
            let z = gain / sd;
            let n = Normal::standard();
            gain * n.cdf(z) + sd * n.pdf(z)
        }
    }
}

/// Largest observed value, or the prior mean when nothing has been observed.
pub fn incumbent_value(post: &GpPosterior) -> f64 {
    post.dataset()
        .observations()
        .iter()
        .copied()
        .fold(None, |m: Option<f64>, y| Some(m.map_or(y, |m| m.max(y))))
        .unwrap_or(post.prior_mean())
}

/// Acquisition scores for every pool member.
pub fn score_pool(pool: &PooledPosterior, spec: &AcquisitionSpec, incumbent: f64) -> Vec<f64> {
    (0..pool.len())
        .map(|i| acq_score(spec, &pool.summary(i), incumbent))
        .collect()
}

/// Index of the maximum; ties go to the lowest index. `None` when every entry
/// is excluded.
pub fn argmax_lowest(scores: &[f64], excluded: Option<&[bool]>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if excluded.is_some_and(|e| e[i]) {
            continue;
        }
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}

pub fn select_next(post: &GpPosterior, candidates: &[Vec<f64>], spec: &AcquisitionSpec) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::input("select_next needs at least one candidate"));
    }
    let incumbent = incumbent_value(post);
    let scores = candidates
        .iter()
        .map(|c| post.predict(c).map(|s| acq_score(spec, &s, incumbent)))
        .collect::<Result<Vec<_>>>()?;
    Ok(argmax_lowest(&scores, None).expect("non-empty"))
}

/// Subtracts `weight · max_j corr(c, anchor_j)` from each score.
pub fn apply_diversity_penalty(
    scores: &mut [f64],
    pool: &PooledPosterior,
    anchors: &[Vec<f64>],
    weight: f64,
) {
    if anchors.is_empty() || weight == 0.0 {
        return;
    }
    let kernel = *pool.posterior().kernel();
    for (s, c) in scores.iter_mut().zip(pool.candidates()) {
        let max_corr = anchors
            .iter()
            .map(|a| kernel.correlation(c, a))
            .fold(0.0, f64::max);
        *s -= weight * max_corr;
    }
}

/// Greedy Kriging-believer batch on a pooled posterior. `pool` is consumed as
/// scratch space: on return it holds the hallucinated state.
pub fn select_batch_pooled(
    pool: &mut PooledPosterior,
    acq: &AcquisitionSpec,
    batch: &BatchSpec,
    incumbent: f64,
) -> Result<Vec<usize>> {
    if batch.batch_size == 0 {
        return Err(Error::input("batch size must be at least 1"));
    }
    if pool.len() < batch.batch_size {
        return Err(Error::input(format!(
            "batch of {} requested from {} candidates",
            batch.batch_size,
            pool.len()
        )));
    }
    let mut chosen = Vec::with_capacity(batch.batch_size);
    let mut anchors: Vec<Vec<f64>> = Vec::with_capacity(batch.batch_size);
    let mut excluded = vec![false; pool.len()];
    for _ in 0..batch.batch_size {
        let mut scores = score_pool(pool, acq, incumbent);
        apply_diversity_penalty(&mut scores, pool, &anchors, batch.diversity_weight);
        let pick = argmax_lowest(&scores, Some(&excluded)).expect("enough candidates");
        chosen.push(pick);
        excluded[pick] = true;
        anchors.push(pool.candidates()[pick].clone());
        if chosen.len() < batch.batch_size {
            pool.hallucinate(pick)?;
        }
    }
    Ok(chosen)
}

pub fn select_batch(
    post: &GpPosterior,
    candidates: &[Vec<f64>],
    acq: &AcquisitionSpec,
    batch: &BatchSpec,
) -> Result<Vec<usize>> {
    if candidates.len() < batch.batch_size {
        return Err(Error::input(format!(
            "batch of {} requested from {} candidates",
            batch.batch_size,
            candidates.len()
        )));
    }
    let incumbent = incumbent_value(post);
    let mut pool = PooledPosterior::new(post.clone(), candidates.to_vec())?;
    select_batch_pooled(&mut pool, acq, batch, incumbent)
}
