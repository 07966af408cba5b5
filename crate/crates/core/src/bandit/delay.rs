use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::seed::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DelayDistribution {
    Zero,
    /// Uniform over `0..=tau_max`.
    UniformInteger,
    /// Always `tau_max`.
    Constant,
}

/// Bounded feedback delay, in rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelaySpec {
    pub tau_max: u64,
    pub distribution: DelayDistribution,
}

impl DelaySpec {
    pub const NONE: DelaySpec = DelaySpec {
        tau_max: 0,
        distribution: DelayDistribution::Zero,
    };

    pub fn uniform(tau_max: u64) -> Self {
        DelaySpec {
            tau_max,
            distribution: DelayDistribution::UniformInteger,
        }
    }

    pub fn constant(tau_max: u64) -> Self {
        DelaySpec {
            tau_max,
            distribution: DelayDistribution::Constant,
        }
    }

    /// Draws one delay. `Zero` and `Constant` consume no randomness.
    pub fn sample(&self, rng: &mut Rng) -> u64 {
        match self.distribution {
            DelayDistribution::Zero => 0,
            DelayDistribution::Constant => self.tau_max,
            DelayDistribution::UniformInteger => rng.random_range(0..=self.tau_max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackEvent {
    pub issue_round: u64,
    pub agent: usize,
    pub arm: usize,
    pub reward: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Delivery {
    pub deliver_round: u64,
    pub delay: u64,
    pub event: FeedbackEvent,
}

/// Assigns a delay to every event and returns the delivery schedule ordered
/// by delivery round, then agent index, then input order.
pub fn delayed_feedback_buffer(events: &[FeedbackEvent], delay: &DelaySpec, rng: &mut Rng) -> Vec<Delivery> {
    let mut out: Vec<(usize, Delivery)> = events
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let d = delay.sample(rng);
            (
                i,
                Delivery {
                    deliver_round: e.issue_round + d,
                    delay: d,
                    event: *e,
                },
            )
        })
        .collect();
    out.sort_by_key(|(i, d)| (d.deliver_round, d.event.agent, *i));
    out.into_iter().map(|(_, d)| d).collect()
}
