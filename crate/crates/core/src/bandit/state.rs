use rand_distr::{Beta, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::Rng;

/// Default known observation variance for Gaussian Thompson sampling.
pub const DEFAULT_OBS_VARIANCE: f64 = 0.1;
/// Default UCB1 exploration constant.
pub const DEFAULT_UCB_C: f64 = std::f64::consts::SQRT_2;

/// Conjugate model used by Thompson sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RewardModel {
    /// Beta posteriors, one `(α, β)` pair per arm, starting at `(1, 1)`.
    Bernoulli { alpha: Vec<f64>, beta: Vec<f64> },
    /// Flat prior, known observation variance.
    Gaussian { obs_variance: f64 },
}

/// Per-arm pull counts and running means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditState {
    counts: Vec<u64>,
    means: Vec<f64>,
    total: u64,
    model: RewardModel,
}

impl BanditState {
    pub fn bernoulli(arms: usize) -> Self {
        BanditState {
            counts: vec![0; arms],
            means: vec![0.0; arms],
            total: 0,
            model: RewardModel::Bernoulli {
                alpha: vec![1.0; arms],
                beta: vec![1.0; arms],
            },
        }
    }

    pub fn gaussian(arms: usize, obs_variance: f64) -> Self {
        BanditState {
            counts: vec![0; arms],
            means: vec![0.0; arms],
            total: 0,
            model: RewardModel::Gaussian { obs_variance },
        }
    }

    /// Builds a state over a subset of another state's arms, in the given order.
    pub fn restricted(&self, arms: &[usize]) -> Self {
        let model = match &self.model {
            RewardModel::Bernoulli { alpha, beta } => RewardModel::Bernoulli {
                alpha: arms.iter().map(|&a| alpha[a]).collect(),
                beta: arms.iter().map(|&a| beta[a]).collect(),
            },
            RewardModel::Gaussian { obs_variance } => RewardModel::Gaussian {
                obs_variance: *obs_variance,
            },
        };
        BanditState {
            counts: arms.iter().map(|&a| self.counts[a]).collect(),
            means: arms.iter().map(|&a| self.means[a]).collect(),
            total: self.total,
            model,
        }
    }

    pub fn arms(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, arm: usize) -> u64 {
        self.counts[arm]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn mean(&self, arm: usize) -> f64 {
        self.means[arm]
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn model(&self) -> &RewardModel {
        &self.model
    }

    fn check_arm(&self, arm: usize) -> Result<()> {
        if arm >= self.arms() {
            return Err(Error::input(format!("arm {arm} out of range (have {})", self.arms())));
        }
        Ok(())
    }

    /// Incremental-mean update; Bernoulli mode also updates the Beta posterior.
    pub fn update(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.check_arm(arm)?;
        if !reward.is_finite() {
            return Err(Error::input("non-finite reward"));
        }
        if let RewardModel::Bernoulli { alpha, beta } = &mut self.model {
            if reward == 1.0 {
                alpha[arm] += 1.0;
            } else if reward == 0.0 {
                beta[arm] += 1.0;
            } else {
                return Err(Error::input(format!("Bernoulli arm received reward {reward}")));
            }
        }
        let n = self.counts[arm] + 1;
        self.means[arm] += (reward - self.means[arm]) / n as f64;
        self.counts[arm] = n;
        self.total += 1;
        Ok(())
    }

    fn first_unpulled(&self) -> Option<usize> {
        self.counts.iter().position(|&n| n == 0)
    }
}

pub fn update_arm(state: &mut BanditState, arm: usize, reward: f64) -> Result<()> {
    state.update(arm, reward)
}

/// UCB1 with forced initial exploration: unpulled arms first (lowest index),
/// then `argmax μ̂_i + c √(ln t / n_i)` with ties to the lowest index.
pub fn ucb1_select(state: &BanditState, c: f64) -> Result<usize> {
    if state.arms() == 0 {
        return Err(Error::input("bandit has no arms"));
    }
    if let Some(a) = state.first_unpulled() {
        return Ok(a);
    }
    let ln_t = (state.total as f64).ln();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, (&n, &m)) in state.counts.iter().zip(&state.means).enumerate() {
        let score = m + c * (ln_t / n as f64).sqrt();
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    Ok(best)
}

/// Thompson sampling: one posterior draw per arm, argmax wins.
///
/// In Gaussian mode the flat prior leaves unpulled arms without a proper
/// posterior, so they are played first, lowest index first.
pub fn thompson_select(state: &BanditState, rng: &mut Rng) -> Result<usize> {
    if state.arms() == 0 {
        return Err(Error::input("bandit has no arms"));
    }
    let draws: Vec<f64> = match &state.model {
        RewardModel::Bernoulli { alpha, beta } => alpha
            .iter()
            .zip(beta)
            .map(|(&a, &b)| {
                Beta::new(a, b)
                    .map(|d| d.sample(rng))
                    .map_err(|e| Error::numerical(format!("Beta({a}, {b}): {e}")))
            })
            .collect::<Result<_>>()?,
        RewardModel::Gaussian { obs_variance } => {
            if let Some(a) = state.first_unpulled() {
                return Ok(a);
            }
            state
                .means
                .iter()
                .zip(&state.counts)
                .map(|(&m, &n)| {
                    let sd = (obs_variance / n as f64).sqrt();
                    Normal::new(m, sd)
                        .map(|d| d.sample(rng))
                        .map_err(|e| Error::numerical(format!("Normal({m}, {sd}): {e}")))
                })
                .collect::<Result<_>>()?
        }
    };
    let mut best = 0;
    for (i, &d) in draws.iter().enumerate() {
        if d > draws[best] {
            best = i;
        }
    }
    Ok(best)
}

/// UCB over arms with Gaussian beliefs `N(m_i, v_i)`: `argmax m_i + c √(v_i ln t)`.
///
/// Equivalent to UCB1 with the pseudo-count `n_i = 1 / v_i` in units of the
/// reference variance. Ties go to the lowest index.
pub fn belief_ucb_select(means: &[f64], variances: &[f64], t: u64, c: f64) -> Result<usize> {
    check_beliefs(means, variances)?;
    let ln_t = (t.max(1) as f64).ln().max(0.0);
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, (&m, &v)) in means.iter().zip(variances).enumerate() {
        let score = m + c * (v.max(0.0) * ln_t).sqrt();
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    Ok(best)
}

/// Thompson sampling over arms with Gaussian beliefs `N(m_i, v_i)`.
pub fn belief_thompson_select(means: &[f64], variances: &[f64], rng: &mut Rng) -> Result<usize> {
    check_beliefs(means, variances)?;
    let mut best = 0;
    let mut best_draw = f64::NEG_INFINITY;
    for (i, (&m, &v)) in means.iter().zip(variances).enumerate() {
        let z: f64 = rand_distr::StandardNormal.sample(rng);
        let d = m + v.max(0.0).sqrt() * z;
        if d > best_draw {
            best = i;
            best_draw = d;
        }
    }
    Ok(best)
}

fn check_beliefs(means: &[f64], variances: &[f64]) -> Result<()> {
    if means.is_empty() {
        return Err(Error::input("bandit has no arms"));
    }
    if means.len() != variances.len() {
        return Err(Error::input("belief means and variances differ in length"));
    }
    if means.iter().chain(variances).any(|v| !v.is_finite()) {
        return Err(Error::input("non-finite arm belief"));
    }
    Ok(())
}
