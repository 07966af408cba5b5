use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::acquisition::AcquisitionSpec;
use crate::distsim::Oracle;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from, sub_rng};
use crate::stats::Sense;
use crate::surrogate::KernelSpec;

use super::oracles::{dose_sample, spatial_field_draw, DoseSpec, DragSpec, SaturationSpec, SpatialSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseId {
    Case1,
    Case2,
    Case3,
    Case4,
    Case5,
    Mixture,
}

impl CaseId {
    pub const ALL: [CaseId; 6] = [
        CaseId::Case1,
        CaseId::Case2,
        CaseId::Case3,
        CaseId::Case4,
        CaseId::Case5,
        CaseId::Mixture,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::Case1 => "case1",
            CaseId::Case2 => "case2",
            CaseId::Case3 => "case3",
            CaseId::Case4 => "case4",
            CaseId::Case5 => "case5",
            CaseId::Mixture => "mixture",
        }
    }

    pub fn code(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let t = t.strip_prefix("case").unwrap_or(&t);
        Ok(match t {
            "1" => CaseId::Case1,
            "2" => CaseId::Case2,
            "3" => CaseId::Case3,
            "4" => CaseId::Case4,
            "5" => CaseId::Case5,
            "mixture" | "mixture-demo" | "mixture_demo" => CaseId::Mixture,
            _ => return Err(Error::config(format!("unknown case '{s}'"))),
        })
    }
}

/// How a replicate is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// True value at the recommended point.
    Recommended,
    /// `f* − max f` over queried points.
    SimpleRegret,
    /// Mean posterior variance over the grid.
    IntegratedVariance,
}

/// Surrogate settings in the oracle's own units, after applying the sense.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateSettings {
    pub kernel: KernelSpec,
    pub prior_mean: f64,
    pub noise_std: f64,
}

/// Partial replacement of a case's surrogate settings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateOverride {
    pub kernel: Option<KernelSpec>,
    pub prior_mean: Option<f64>,
    pub noise_std: Option<f64>,
}

impl SurrogateSettings {
    pub fn with_override(mut self, o: &SurrogateOverride) -> Result<Self> {
        if let Some(k) = o.kernel {
            k.validate()?;
            self.kernel = k;
        }
        if let Some(m) = o.prior_mean {
            self.prior_mean = m;
        }
        if let Some(n) = o.noise_std {
            if !(n >= 0.0) {
                return Err(Error::config("surrogate noise must be >= 0"));
            }
            self.noise_std = n;
        }
        Ok(self)
    }

    pub fn signal_sd(&self) -> f64 {
        self.kernel.signal_variance.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OracleKind {
    /// Noise-free table plus Gaussian noise.
    Table,
    Dose(DoseSpec),
}

/// One replicate's benchmark instance: a finite candidate pool with known truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub case: CaseId,
    pub candidates: Vec<Vec<f64>>,
    /// Noise-free objective per candidate, in raw units.
    pub truth: Vec<f64>,
    pub sense: Sense,
    pub noise_std: f64,
    pub oracle: OracleKind,
    pub surrogate: SurrogateSettings,
    pub acquisition: AcquisitionSpec,
    /// Evaluated before the run, shared by every strategy.
    pub init: Vec<usize>,
    /// Evaluations after the initial design.
    pub budget: usize,
    pub metric: MetricKind,
    /// Lattice shape when the pool is a full tensor grid.
    pub levels: Option<Vec<usize>>,
    pub optimum_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemOptions {
    /// Extra Gaussian observation noise added to the case default.
    pub extra_noise: f64,
    /// Parallel agents; sets the budget of the round-based cases.
    pub agents: usize,
    /// Overrides the default budget (total evaluations, initial design included).
    pub budget: Option<usize>,
}

impl Default for ProblemOptions {
    fn default() -> Self {
        ProblemOptions {
            extra_noise: 0.0,
            agents: 1,
            budget: None,
        }
    }
}

pub const CASE4_ROUNDS: usize = 10;
pub const CASE4_INIT_DOSES: [f64; 4] = [0.0, 2.0, 5.5, 8.0];
pub const RANDOM_INIT: usize = 5;

/// Default total evaluation budget per case.
pub fn default_budget(case: CaseId, agents: usize) -> usize {
    match case {
        CaseId::Case1 => 60,
        CaseId::Case2 | CaseId::Case3 => 50,
        CaseId::Case4 => CASE4_INIT_DOSES.len() + CASE4_ROUNDS * agents,
        CaseId::Case5 => 30,
        CaseId::Mixture => 150 * agents,
    }
}

impl Problem {
    /// Builds the instance for one replicate. `seed` drives only the
    /// replicate-level draws (initial design, spatial field).
    pub fn build(case: CaseId, opts: &ProblemOptions, seed: u64) -> Result<Problem> {
        if !(opts.extra_noise >= 0.0) {
            return Err(Error::config("extra noise must be >= 0"));
        }
        if opts.agents == 0 {
            return Err(Error::config("agent count must be >= 1"));
        }
        let total = opts.budget.unwrap_or_else(|| default_budget(case, opts.agents));
        let combine = |base: f64| (base * base + opts.extra_noise * opts.extra_noise).sqrt();
        let random_init = |n_cands: usize| -> Vec<usize> {
            let mut rng = sub_rng(seed, &[0x1417]);
            sample(&mut rng, n_cands, RANDOM_INIT).into_vec()
        };
        let mut p = match case {
            CaseId::Case1 | CaseId::Case3 => {
                let spec = if case == CaseId::Case1 {
                    SaturationSpec::case1()
                } else {
                    SaturationSpec::case3()
                };
                spec.validate()?;
                let candidates = spec.lattice();
                let truth = candidates.iter().map(|x| spec.mean_value(x)).collect::<Result<Vec<_>>>()?;
                let noise = combine(spec.noise_std);
                let (ls, sd, mean) = if case == CaseId::Case1 { (0.3, 0.35, 0.0) } else { (0.3, 3500.0, 0.0) };
                Problem {
                    case,
                    init: random_init(candidates.len()),
                    candidates,
                    truth,
                    sense: Sense::Maximize,
                    noise_std: noise,
                    oracle: OracleKind::Table,
                    surrogate: SurrogateSettings {
                        kernel: KernelSpec::squared_exponential(ls, sd * sd)?,
                        prior_mean: mean,
                        noise_std: noise,
                    },
                    acquisition: AcquisitionSpec::ucb(2.0),
                    budget: 0,
                    metric: MetricKind::Recommended,
                    levels: Some(spec.levels.clone()),
                    optimum_value: spec.peak(),
                }
            }
            CaseId::Case2 => {
                let spec = DragSpec::default();
                let candidates = spec.lattice();
                let truth = candidates
                    .iter()
                    .map(|u| {
                        let (c, t) = spec.denormalize(u);
                        spec.mean_drag(c, t)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let noise = combine(spec.noise_std);
                Problem {
                    case,
                    init: random_init(candidates.len()),
                    optimum_value: truth.iter().cloned().fold(f64::INFINITY, f64::min),
                    candidates,
                    truth,
                    sense: Sense::Minimize,
                    noise_std: noise,
                    oracle: OracleKind::Table,
                    surrogate: SurrogateSettings {
                        kernel: KernelSpec::squared_exponential(0.15, 0.1 * 0.1)?,
                        prior_mean: -0.15,
                        noise_std: noise,
                    },
                    acquisition: AcquisitionSpec::ucb(2.0),
                    budget: 0,
                    metric: MetricKind::Recommended,
                    levels: Some(vec![spec.levels, spec.levels]),
                }
            }
            CaseId::Case4 => {
                let spec = DoseSpec::default();
                let candidates: Vec<Vec<f64>> = spec.levels.iter().map(|&x| vec![x]).collect();
                let truth = spec.utilities();
                let init = CASE4_INIT_DOSES
                    .iter()
                    .map(|&d| spec.level_index(d))
                    .collect::<Result<Vec<_>>>()?;
                Problem {
                    case,
                    init,
                    optimum_value: truth.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    candidates,
                    truth,
                    sense: Sense::Maximize,
                    noise_std: opts.extra_noise,
                    oracle: OracleKind::Dose(spec),
                    surrogate: SurrogateSettings {
                        kernel: KernelSpec::squared_exponential(1.5, 0.9)?,
                        prior_mean: 0.0,
                        noise_std: 0.18,
                    },
                    acquisition: AcquisitionSpec::ucb(2.0),
                    budget: 0,
                    metric: MetricKind::SimpleRegret,
                    levels: Some(vec![33]),
                }
            }
            CaseId::Case5 => {
                let spec = SpatialSpec::default();
                let truth = spatial_field_draw(&spec, &mut sub_rng(seed, &[0x5fe1d]))?;
                let noise = combine(spec.noise_std);
                Problem {
                    case,
                    init: spec.corners(),
                    candidates: spec.cells(),
                    optimum_value: 0.0,
                    truth,
                    sense: Sense::Maximize,
                    noise_std: noise,
                    oracle: OracleKind::Table,
                    surrogate: SurrogateSettings {
                        kernel: spec.kernel,
                        prior_mean: 0.0,
                        noise_std: noise,
                    },
                    acquisition: AcquisitionSpec::max_variance(),
                    budget: 0,
                    metric: MetricKind::IntegratedVariance,
                    levels: Some(vec![spec.side, spec.side]),
                }
            }
            CaseId::Mixture => {
                return Err(Error::config("the mixture demo is a bandit run, not a pool problem"));
            }
        };
        if total <= p.init.len() {
            return Err(Error::config(format!(
                "budget {total} does not exceed the {} initial evaluations",
                p.init.len()
            )));
        }
        p.budget = total - p.init.len();
        Ok(p)
    }

    /// Objective in maximization form.
    pub fn utility(&self, arm: usize) -> f64 {
        self.sense.sign() * self.truth[arm]
    }

    pub fn best_utility(&self) -> f64 {
        self.sense.sign() * self.optimum_value
    }
}

/// Seeded noise keyed by `(seed, query)`, independent of which arm is asked.
#[derive(Debug, Clone)]
pub struct ProblemOracle<'a> {
    problem: &'a Problem,
    seed: u64,
}

impl<'a> ProblemOracle<'a> {
    pub fn new(problem: &'a Problem, seed: u64) -> Self {
        ProblemOracle { problem, seed }
    }

    pub fn problem(&self) -> &Problem {
        self.problem
    }
}

impl Oracle for ProblemOracle<'_> {
    fn evaluate(&mut self, arm: usize, query: usize) -> Result<f64> {
        let p = self.problem;
        if arm >= p.candidates.len() {
            return Err(Error::input(format!("arm {arm} outside a pool of {}", p.candidates.len())));
        }
        let mut rng = rng_from(derive_seed(self.seed, &[query as u64]));
        match &p.oracle {
            OracleKind::Table => {
                let z: f64 = StandardNormal.sample(&mut rng);
                Ok(p.truth[arm] + p.noise_std * z)
            }
            OracleKind::Dose(spec) => {
                let (e, t) = dose_sample(spec, p.candidates[arm][0], &mut rng)?;
                let z: f64 = if p.noise_std > 0.0 { StandardNormal.sample(&mut rng) } else { 0.0 };
                Ok(spec.reward(e, t) + p.noise_std * z)
            }
        }
    }
}
