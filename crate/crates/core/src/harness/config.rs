use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bandit::DelaySpec;
use crate::benchmarks::{CaseId, DesignStrategy, PolicySettings, SurrogateOverride};
use crate::distsim::{DispatchMode, TaskDurationModel};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

pub const DEFAULT_REPLICATES: usize = 200;
pub const DEFAULT_SEED: u64 = 42;

fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_agents() -> Vec<usize> {
    vec![1]
}
fn default_durations() -> TaskDurationModel {
    TaskDurationModel::Constant(1.0)
}
fn default_strategies() -> Vec<DesignStrategy> {
    vec![DesignStrategy::AlmabUcb]
}

/// One sweep over strategies and agent counts on a single case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub case: CaseId,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<DesignStrategy>,
    #[serde(default = "default_agents")]
    pub agents: Vec<usize>,
    /// Total evaluations including the initial design; case default when absent.
    #[serde(default)]
    pub budget: Option<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub policy: PolicySettings,
    /// Replaces parts of the case's surrogate.
    #[serde(default)]
    pub surrogate: Option<SurrogateOverride>,
    /// Extra Gaussian observation noise.
    #[serde(default)]
    pub noise: f64,
    #[serde(default = "default_durations")]
    pub durations: TaskDurationModel,
    #[serde(default)]
    pub update_cost: f64,
    #[serde(default = "default_delay")]
    pub delay: DelaySpec,
    #[serde(default = "default_mode")]
    pub mode: DispatchMode,
    #[serde(default)]
    pub comm_alpha: f64,
    #[serde(default = "default_beta")]
    pub comm_beta: f64,
    /// Mixture demo only.
    #[serde(default)]
    pub mixture: Option<crate::benchmarks::MixtureSpec>,
}

fn default_delay() -> DelaySpec {
    DelaySpec::NONE
}
fn default_mode() -> DispatchMode {
    DispatchMode::BatchDiverse
}
fn default_beta() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn new(case: CaseId, strategies: Vec<DesignStrategy>, agents: Vec<usize>) -> Self {
        ExperimentConfig {
            case,
            strategies,
            agents,
            budget: None,
            replicates: DEFAULT_REPLICATES,
            seed: DEFAULT_SEED,
            policy: PolicySettings::default(),
            surrogate: None,
            noise: 0.0,
            durations: default_durations(),
            update_cost: 0.0,
            delay: DelaySpec::NONE,
            mode: if case == CaseId::Mixture {
                DispatchMode::ReplicateAveraging
            } else {
                DispatchMode::BatchDiverse
            },
            comm_alpha: 0.0,
            comm_beta: 1.0,
            mixture: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() || self.agents.is_empty() {
            return Err(Error::config("a sweep needs at least one strategy and one agent count"));
        }
        if self.replicates == 0 {
            return Err(Error::config("replicate count must be >= 1"));
        }
        if self.agents.contains(&0) {
            return Err(Error::config("agent counts must be >= 1"));
        }
        if !(self.noise >= 0.0) || !(self.update_cost >= 0.0) || !(self.comm_alpha >= 0.0) {
            return Err(Error::config("noise and costs must be >= 0"));
        }
        self.durations.validate()?;
        self.policy.validate()?;
        if self.case == CaseId::Mixture {
            for s in &self.strategies {
                if !matches!(s, DesignStrategy::AlmabUcb | DesignStrategy::AlmabTs | DesignStrategy::Random) {
                    return Err(Error::config(format!("strategy {s} does not apply to the mixture demo")));
                }
            }
        } else {
            for s in &self.strategies {
                let ok = match s {
                    DesignStrategy::EqualSpacing | DesignStrategy::DOptimal => self.case == CaseId::Case4,
                    _ => true,
                };
                if !ok {
                    return Err(Error::config(format!("strategy {s} does not apply to {}", self.case)));
                }
            }
            if self.mode == DispatchMode::ReplicateAveraging {
                return Err(Error::config("replicate averaging is only wired for the mixture demo"));
            }
        }
        Ok(())
    }

    /// Replicate-level seed shared by every strategy: initial design, field draw and oracle noise.
    pub fn replicate_seed(&self, replicate: usize) -> u64 {
        derive_seed(self.seed, &[self.case.code(), replicate as u64])
    }

    /// Seed of the strategy's own randomness: `hash(base, case, strategy, K, r)`.
    pub fn strategy_seed(&self, strategy: DesignStrategy, agents: usize, replicate: usize) -> u64 {
        derive_seed(
            self.seed,
            &[self.case.code(), strategy.code(), agents as u64, replicate as u64],
        )
    }
}

/// A list of sweeps written to one output tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub sweeps: Vec<ExperimentConfig>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl Manifest {
    /// Accepts either a manifest or a bare sweep.
    pub fn from_json(text: &str) -> Result<Manifest> {
        if let Ok(m) = serde_json::from_str::<Manifest>(text) {
            return Ok(m);
        }
        let one: ExperimentConfig = serde_json::from_str(text)?;
        Ok(Manifest {
            sweeps: vec![one],
            out: None,
        })
    }

    pub fn load(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path)?;
        Manifest::from_json(&text)
    }
}
