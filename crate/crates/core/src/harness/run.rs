use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{
    CaseId, DesignStrategy, MetricKind, Problem, ProblemOptions, ProblemOracle, StrategyPolicy,
};
use crate::distsim::{simulate_async_run, AsyncPolicy, Oracle, SimConfig, SimOutcome};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, sub_rng};
use crate::stats::Sense;
use crate::surrogate::{GpPosterior, PooledPosterior};

use super::config::ExperimentConfig;

/// One row of a replicate trajectory, after `round` decision rounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRow {
    pub round: usize,
    /// Headline metric of the case.
    pub metric: f64,
    /// Best true objective among evaluated points (raw units); current IPV for the spatial case.
    pub best_so_far: f64,
    /// Cumulative regret of the evaluations made after the initial design.
    pub regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub case: CaseId,
    pub strategy: String,
    pub agents: usize,
    pub replicate: usize,
    pub rounds: Vec<RoundRow>,
    pub final_metric: f64,
    pub cumulative_regret: f64,
    /// Average observed reward per round (mixture demo only).
    pub mean_reward: Option<f64>,
    pub wall_clock: f64,
    pub evaluations: usize,
    /// Mean variance percentile of the chosen candidates, when audited.
    pub variance_rank: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub case: CaseId,
    pub strategy: String,
    pub agents: usize,
    pub replicates: Vec<ReplicateRecord>,
}

impl CellResult {
    pub fn final_metrics(&self) -> Vec<f64> {
        self.replicates.iter().map(|r| r.final_metric).collect()
    }
}

/// Direction of the headline metric.
pub fn metric_sense(case: CaseId) -> Sense {
    match case {
        CaseId::Case1 | CaseId::Case3 => Sense::Maximize,
        _ => Sense::Minimize,
    }
}

#[derive(Debug, Clone, Copy)]
struct Snapshot {
    metric: f64,
    best: f64,
    regret: f64,
}

/// Wraps a strategy and records metrics after every learned evaluation.
struct Tracked<'p> {
    inner: StrategyPolicy,
    problem: &'p Problem,
    ipv: Option<PooledPosterior>,
    best: f64,
    regret: f64,
    snaps: Vec<Snapshot>,
    audit: Option<Vec<f64>>,
}

impl<'p> Tracked<'p> {
    fn new(inner: StrategyPolicy, problem: &'p Problem, audit: bool) -> Result<Self> {
        let ipv = if problem.metric == MetricKind::IntegratedVariance {
            let s = problem.surrogate;
            let prior = GpPosterior::prior(s.kernel, s.noise_std, s.prior_mean)?;
            Some(PooledPosterior::new(prior, problem.candidates.clone())?)
        } else {
            None
        };
        Ok(Tracked {
            inner,
            problem,
            ipv,
            best: f64::NEG_INFINITY,
            regret: 0.0,
            snaps: Vec::new(),
            audit: audit.then(Vec::new),
        })
    }

    fn learn(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.inner.observe(arm, reward)?;
        self.best = self.best.max(self.problem.utility(arm));
        if let Some(p) = self.ipv.as_mut() {
            p.observe(arm, 0.0)?;
        }
        Ok(())
    }

    fn snapshot(&self) -> Snapshot {
        let p = self.problem;
        let sign = p.sense.sign();
        match p.metric {
            MetricKind::Recommended => {
                let rec = self.inner.recommend().expect("at least one observation");
                Snapshot {
                    metric: p.truth[rec],
                    best: sign * self.best,
                    regret: self.regret,
                }
            }
            MetricKind::SimpleRegret => Snapshot {
                metric: p.best_utility() - self.best,
                best: sign * self.best,
                regret: self.regret,
            },
            MetricKind::IntegratedVariance => {
                let v = self.ipv.as_ref().expect("ipv pool").integrated_variance();
                Snapshot {
                    metric: v,
                    best: v,
                    regret: self.regret,
                }
            }
        }
    }
}

/// Fraction of other candidates with lower posterior variance, ties counted half.
fn variance_percentile(variances: &[f64], pick: usize) -> f64 {
    if variances.len() < 2 {
        return 0.5;
    }
    let v = variances[pick];
    let mut below = 0.0;
    for (i, &w) in variances.iter().enumerate() {
        if i == pick {
            continue;
        }
        if w < v {
            below += 1.0;
        } else if w == v {
            below += 0.5;
        }
    }
    below / (variances.len() - 1) as f64
}

impl AsyncPolicy for Tracked<'_> {
    fn propose(&mut self, pending: &[usize]) -> Result<usize> {
        let pick = self.inner.propose(pending)?;
        if let (Some(log), Some(pool)) = (self.audit.as_mut(), self.inner.pool()) {
            log.push(variance_percentile(pool.variances(), pick));
        }
        Ok(pick)
    }

    fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.regret += self.problem.best_utility() - self.problem.utility(arm);
        self.learn(arm, reward)?;
        let s = self.snapshot();
        self.snaps.push(s);
        Ok(())
    }
}

/// Shifts query indices past the initial design so noise streams never collide.
struct Shifted<O> {
    inner: O,
    offset: usize,
}

impl<O: Oracle> Oracle for Shifted<O> {
    fn evaluate(&mut self, arm: usize, query: usize) -> Result<f64> {
        self.inner.evaluate(arm, query + self.offset)
    }
}

pub(crate) fn sim_config(cfg: &ExperimentConfig, agents: usize, budget: usize) -> SimConfig {
    SimConfig {
        agents,
        budget,
        durations: cfg.durations,
        update_cost: cfg.update_cost,
        delay: cfg.delay,
        mode: cfg.mode,
        comm_alpha: cfg.comm_alpha,
        comm_beta: cfg.comm_beta,
    }
}

/// Picks trajectory rows at round boundaries: row `r` follows `r·K` learned evaluations.
pub(crate) fn round_rows<T: Copy>(per_eval: &[T], agents: usize, row: impl Fn(usize, T) -> RoundRow) -> Vec<RoundRow> {
    let rounds = per_eval.len().div_ceil(agents);
    (1..=rounds)
        .map(|r| row(r, per_eval[(r * agents).min(per_eval.len()) - 1]))
        .collect()
}

/// Oracle noise seed of a replicate; shared by every strategy and agent count.
pub fn oracle_seed(cfg: &ExperimentConfig, replicate: usize) -> u64 {
    derive_seed(cfg.replicate_seed(replicate), &[0x0a_c1e])
}

/// Runs one replicate of a pool problem and also returns the raw simulator outcome.
pub fn run_replicate_detailed(
    cfg: &ExperimentConfig,
    strategy: DesignStrategy,
    agents: usize,
    replicate: usize,
) -> Result<(ReplicateRecord, SimOutcome)> {
    let opts = ProblemOptions {
        extra_noise: cfg.noise,
        agents,
        budget: cfg.budget,
    };
    let mut problem = Problem::build(cfg.case, &opts, cfg.replicate_seed(replicate))?;
    if let Some(o) = &cfg.surrogate {
        problem.surrogate = problem.surrogate.with_override(o)?;
    }
    let sseed = cfg.strategy_seed(strategy, agents, replicate);
    let policy = StrategyPolicy::new(strategy, &problem, cfg.policy, sub_rng(sseed, &[1]))?;
    let audit = strategy == DesignStrategy::AlmabNoAl;
    let mut tracked = Tracked::new(policy, &problem, audit)?;
    let mut oracle = ProblemOracle::new(&problem, oracle_seed(cfg, replicate));
    for (q, &arm) in problem.init.iter().enumerate() {
        let y = oracle.evaluate(arm, q)?;
        tracked.learn(arm, y)?;
    }
    let mut shifted = Shifted {
        inner: oracle,
        offset: problem.init.len(),
    };
    let sim = sim_config(cfg, agents, problem.budget);
    let outcome = simulate_async_run(&mut tracked, &mut shifted, &sim, &mut sub_rng(sseed, &[2]))?;
    let rounds = round_rows(&tracked.snaps, agents, |round, s| RoundRow {
        round,
        metric: s.metric,
        best_so_far: s.best,
        regret: s.regret,
    });
    let last = *rounds.last().ok_or_else(|| Error::config("run produced no evaluations"))?;
    let record = ReplicateRecord {
        case: cfg.case,
        strategy: strategy.name().to_string(),
        agents,
        replicate,
        final_metric: last.metric,
        cumulative_regret: last.regret,
        mean_reward: None,
        wall_clock: outcome.trace.wall_clock,
        evaluations: outcome.evaluations.len(),
        variance_rank: tracked
            .audit
            .as_ref()
            .filter(|l| !l.is_empty())
            .map(|l| l.iter().sum::<f64>() / l.len() as f64),
        rounds,
    };
    Ok((record, outcome))
}

pub fn run_replicate(
    cfg: &ExperimentConfig,
    strategy: DesignStrategy,
    agents: usize,
    replicate: usize,
) -> Result<ReplicateRecord> {
    run_replicate_detailed(cfg, strategy, agents, replicate).map(|r| r.0)
}

/// Runs every replicate of one `(case, strategy, K)` cell. Replicates run in
/// parallel and are collected in replicate order.
pub fn run_cell(cfg: &ExperimentConfig, strategy: DesignStrategy, agents: usize) -> Result<CellResult> {
    cfg.validate()?;
    if cfg.case == CaseId::Mixture {
        return super::mixture::run_mixture_cell(cfg, agents);
    }
    let replicates = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| run_replicate(cfg, strategy, agents, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(CellResult {
        case: cfg.case,
        strategy: strategy.name().to_string(),
        agents,
        replicates,
    })
}

/// Every `(strategy, K)` cell of a sweep, strategies outermost.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<CellResult>> {
    cfg.validate()?;
    if cfg.case == CaseId::Mixture {
        return cfg
            .agents
            .iter()
            .map(|&k| super::mixture::run_mixture_cell(cfg, k))
            .collect();
    }
    let mut cells = Vec::new();
    for &s in &cfg.strategies {
        for &k in &cfg.agents {
            cells.push(run_cell(cfg, s, k)?);
        }
    }
    Ok(cells)
}
