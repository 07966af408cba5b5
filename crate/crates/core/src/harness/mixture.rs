use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::bandit::{thompson_select, ucb1_select, BanditState};
use crate::benchmarks::{default_budget, CaseId, DesignStrategy, MixtureSpec};
use crate::distsim::{simulate_async_run, AsyncPolicy, Oracle};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from, sub_rng, Rng};

use super::config::ExperimentConfig;
use super::run::{oracle_seed, round_rows, sim_config, CellResult, ReplicateRecord, RoundRow};

/// Observation noise of the default mixture demo.
pub const MIXTURE_NOISE: f64 = 0.2;

/// Mixture landscape of a config: its own spec or the demo, with extra noise added in quadrature.
pub fn mixture_spec(cfg: &ExperimentConfig) -> Result<MixtureSpec> {
    let spec = match &cfg.mixture {
        Some(s) => s.clone(),
        None => MixtureSpec::demo(MIXTURE_NOISE)?,
    };
    let sd = spec.noise_std().hypot(cfg.noise);
    spec.with_noise(sd)
}

/// Bandit over the arm grid. Rewards arrive already averaged over `K`
/// agents, so the exploration bonus is scaled by the averaged noise level.
struct ArmBandit {
    state: BanditState,
    strategy: DesignStrategy,
    c: f64,
    rng: Rng,
    means: Vec<f64>,
    best: f64,
    regret: f64,
    reward: f64,
    steps: Vec<(f64, f64)>,
}

impl AsyncPolicy for ArmBandit {
    fn propose(&mut self, _pending: &[usize]) -> Result<usize> {
        match self.strategy {
            DesignStrategy::AlmabTs => thompson_select(&self.state, &mut self.rng),
            DesignStrategy::Random => {
                use rand::Rng as _;
                Ok(self.rng.random_range(0..self.state.arms()))
            }
            _ => ucb1_select(&self.state, self.c),
        }
    }

    fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.state.update(arm, reward)?;
        self.regret += self.best - self.means[arm];
        self.reward += reward;
        let n = self.steps.len() as f64 + 1.0;
        self.steps.push((self.regret, self.reward / n));
        Ok(())
    }
}

struct ArmOracle<'a> {
    means: &'a [f64],
    sd: f64,
    seed: u64,
}

impl Oracle for ArmOracle<'_> {
    fn evaluate(&mut self, arm: usize, query: usize) -> Result<f64> {
        let m = self
            .means
            .get(arm)
            .ok_or_else(|| Error::input(format!("arm {arm} outside {} arms", self.means.len())))?;
        let z: f64 = StandardNormal.sample(&mut rng_from(derive_seed(self.seed, &[query as u64])));
        Ok(m + self.sd * z)
    }
}

fn check_strategy(s: DesignStrategy) -> Result<()> {
    match s {
        DesignStrategy::AlmabUcb | DesignStrategy::AlmabTs | DesignStrategy::Random => Ok(()),
        other => Err(Error::config(format!("strategy {other} does not apply to the mixture demo"))),
    }
}

pub fn run_mixture_replicate(
    cfg: &ExperimentConfig,
    strategy: DesignStrategy,
    agents: usize,
    replicate: usize,
) -> Result<ReplicateRecord> {
    check_strategy(strategy)?;
    let spec = mixture_spec(cfg)?;
    let means = spec.arm_means();
    let sd = spec.noise_std();
    let avg_sd = sd / (agents as f64).sqrt();
    let budget = cfg.budget.unwrap_or_else(|| default_budget(CaseId::Mixture, agents));
    let sseed = cfg.strategy_seed(strategy, agents, replicate);
    let mut policy = ArmBandit {
        state: BanditState::gaussian(means.len(), (avg_sd * avg_sd).max(1e-12)),
        strategy,
        c: cfg.policy.ucb_c * avg_sd,
        rng: sub_rng(sseed, &[1]),
        best: means.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        means: means.clone(),
        regret: 0.0,
        reward: 0.0,
        steps: Vec::new(),
    };
    let mut oracle = ArmOracle {
        means: &means,
        sd,
        seed: oracle_seed(cfg, replicate),
    };
    let sim = sim_config(cfg, agents, budget);
    let out = simulate_async_run(&mut policy, &mut oracle, &sim, &mut sub_rng(sseed, &[2]))?;
    let rounds = round_rows(&policy.steps, 1, |round, (regret, mean)| RoundRow {
        round,
        metric: regret,
        best_so_far: mean,
        regret,
    });
    let last = *rounds.last().ok_or_else(|| Error::config("mixture run produced no rounds"))?;
    Ok(ReplicateRecord {
        case: CaseId::Mixture,
        strategy: strategy.name().to_string(),
        agents,
        replicate,
        final_metric: last.metric,
        cumulative_regret: last.regret,
        mean_reward: Some(last.best_so_far),
        wall_clock: out.trace.wall_clock,
        evaluations: out.evaluations.len(),
        variance_rank: None,
        rounds,
    })
}

/// Mixture cell for the first strategy of the config.
pub fn run_mixture_cell(cfg: &ExperimentConfig, agents: usize) -> Result<CellResult> {
    let strategy = *cfg
        .strategies
        .first()
        .ok_or_else(|| Error::config("mixture sweep needs a strategy"))?;
    let replicates = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| run_mixture_replicate(cfg, strategy, agents, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(CellResult {
        case: CaseId::Mixture,
        strategy: strategy.name().to_string(),
        agents,
        replicates,
    })
}
