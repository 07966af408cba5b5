use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-agent and distributed regret accounting against known arm means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretLedger {
    true_means: Vec<f64>,
    optimal_mean: f64,
    rounds: Vec<Vec<usize>>,
    cumulative_regret: f64,
    distributed_regret: f64,
    comm_costs: Vec<f64>,
    comm_weight: f64,
    round_comm_cost: f64,
}

impl RegretLedger {
    pub fn new(true_means: Vec<f64>) -> Result<Self> {
        if true_means.is_empty() || true_means.iter().any(|m| !m.is_finite()) {
            return Err(Error::input("ledger needs at least one finite arm mean"));
        }
        let optimal_mean = true_means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(RegretLedger {
            true_means,
            optimal_mean,
            rounds: Vec::new(),
            cumulative_regret: 0.0,
            distributed_regret: 0.0,
            comm_costs: Vec::new(),
            comm_weight: 0.0,
            round_comm_cost: 0.0,
        })
    }

    /// Sets `w_c` and the per-round communication cost `C_comm(t)`.
    pub fn with_communication(mut self, comm_weight: f64, round_comm_cost: f64) -> Self {
        self.comm_weight = comm_weight;
        self.round_comm_cost = round_comm_cost;
        self
    }

    pub fn optimal_mean(&self) -> f64 {
        self.optimal_mean
    }

    pub fn true_means(&self) -> &[f64] {
        &self.true_means
    }

    pub fn rounds(&self) -> &[Vec<usize>] {
        &self.rounds
    }

    pub fn comm_costs(&self) -> &[f64] {
        &self.comm_costs
    }

    /// Sum of per-pull gaps over every agent's pull.
    pub fn cumulative_regret(&self) -> f64 {
        self.cumulative_regret
    }

    pub fn distributed_regret(&self) -> f64 {
        self.distributed_regret
    }

    /// Records one round where agent `j` played `arms[j]`. Returns the
    /// instantaneous distributed regret `μ* − mean_j μ_{a_j}`.
    pub fn step(&mut self, arms: &[usize]) -> Result<f64> {
        if arms.is_empty() {
            return Err(Error::input("a round needs at least one agent"));
        }
        if let Some(&bad) = arms.iter().find(|&&a| a >= self.true_means.len()) {
            return Err(Error::input(format!("arm {bad} out of range")));
        }
        let mut gap_sum = 0.0;
        for &a in arms {
            gap_sum += self.optimal_mean - self.true_means[a];
        }
        let inst = gap_sum / arms.len() as f64;
        self.cumulative_regret += gap_sum;
        self.distributed_regret += inst;
        self.comm_costs.push(self.round_comm_cost);
        self.rounds.push(arms.to_vec());
        Ok(inst)
    }

    /// Distributed regret recomputed from the round records.
    pub fn recompute_distributed(&self) -> f64 {
        self.rounds
            .iter()
            .map(|r| {
                let avg = r.iter().map(|&a| self.true_means[a]).sum::<f64>() / r.len() as f64;
                self.optimal_mean - avg
            })
            .sum()
    }

    /// `R_dist + w_c Σ_t C_comm(t)`.
    pub fn effective_regret(&self) -> f64 {
        self.distributed_regret + self.comm_weight * self.comm_costs.iter().sum::<f64>()
    }
}

pub fn distributed_regret_step(ledger: &mut RegretLedger, arms_chosen: &[usize]) -> Result<f64> {
    ledger.step(arms_chosen)
}

pub fn effective_regret(ledger: &RegretLedger) -> f64 {
    ledger.effective_regret()
}

/// Classical finite-time UCB1 bound `Σ_i 8 ln T / Δ_i + (1 + π²/3) Δ_i`.
pub fn ucb_regret_bound(gaps: &[f64], horizon: u64) -> Result<f64> {
    if horizon < 2 {
        return Err(Error::input("regret bound needs T >= 2"));
    }
    if let Some(g) = gaps.iter().find(|&&g| !(g > 0.0)) {
        return Err(Error::input(format!("suboptimality gaps must be positive, got {g}")));
    }
    let ln_t = (horizon as f64).ln();
    let c = 1.0 + std::f64::consts::PI.powi(2) / 3.0;
    Ok(gaps.iter().map(|&d| 8.0 * ln_t / d + c * d).sum())
}
