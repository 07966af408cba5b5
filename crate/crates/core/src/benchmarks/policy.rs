use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::acquisition::{apply_diversity_penalty, argmax_lowest, score_pool, AcquisitionSpec, BatchSpec};
use crate::bandit::{belief_thompson_select, belief_ucb_select, thompson_select, ucb1_select, BanditState, DEFAULT_OBS_VARIANCE, DEFAULT_UCB_C};
use crate::distsim::AsyncPolicy;
use crate::error::{Error, Result};
use crate::seed::Rng;
use crate::surrogate::{GpPosterior, PooledPosterior};

use super::cases::{OracleKind, Problem};
use super::design::{grid_order, latin_hypercube, DOptimal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignStrategy {
    Grid,
    Random,
    LatinHypercube,
    EqualSpacing,
    DOptimal,
    GreedyMaxVariance,
    PureBo,
    AlmabUcb,
    AlmabTs,
    AlmabNoMab,
    AlmabNoAl,
}

impl DesignStrategy {
    pub const ALL: [DesignStrategy; 11] = [
        DesignStrategy::Grid,
        DesignStrategy::Random,
        DesignStrategy::LatinHypercube,
        DesignStrategy::EqualSpacing,
        DesignStrategy::DOptimal,
        DesignStrategy::GreedyMaxVariance,
        DesignStrategy::PureBo,
        DesignStrategy::AlmabUcb,
        DesignStrategy::AlmabTs,
        DesignStrategy::AlmabNoMab,
        DesignStrategy::AlmabNoAl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DesignStrategy::Grid => "grid",
            DesignStrategy::Random => "random",
            DesignStrategy::LatinHypercube => "latin_hypercube",
            DesignStrategy::EqualSpacing => "equal_spacing",
            DesignStrategy::DOptimal => "d_optimal",
            DesignStrategy::GreedyMaxVariance => "greedy_max_variance",
            DesignStrategy::PureBo => "pure_bo",
            DesignStrategy::AlmabUcb => "almab_ucb",
            DesignStrategy::AlmabTs => "almab_ts",
            DesignStrategy::AlmabNoMab => "almab_no_mab",
            DesignStrategy::AlmabNoAl => "almab_no_al",
        }
    }

    pub fn code(self) -> u64 {
        self as u64 + 1
    }

    pub fn uses_surrogate(self) -> bool {
        matches!(
            self,
            DesignStrategy::GreedyMaxVariance
                | DesignStrategy::PureBo
                | DesignStrategy::AlmabUcb
                | DesignStrategy::AlmabTs
                | DesignStrategy::AlmabNoMab
                | DesignStrategy::AlmabNoAl
        )
    }

    fn is_almab(self) -> bool {
        matches!(
            self,
            DesignStrategy::AlmabUcb | DesignStrategy::AlmabTs | DesignStrategy::AlmabNoMab | DesignStrategy::AlmabNoAl
        )
    }
}

impl fmt::Display for DesignStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DesignStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase().replace('-', "_");
        let alias = match t.as_str() {
            "lhs" => "latin_hypercube",
            "dopt" | "doptimal" => "d_optimal",
            "greedy" | "max_variance" => "greedy_max_variance",
            "purebo" | "bo" => "pure_bo",
            "almab" | "ucb" => "almab_ucb",
            "ts" => "almab_ts",
            "no_mab" => "almab_no_mab",
            "no_al" => "almab_no_al",
            other => other,
        };
        DesignStrategy::ALL
            .into_iter()
            .find(|d| d.name() == alias)
            .ok_or_else(|| Error::config(format!("unknown strategy '{s}'")))
    }
}

/// Knobs of the surrogate-plus-bandit layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicySettings {
    /// Replaces the case's acquisition when set.
    pub acquisition: Option<AcquisitionSpec>,
    /// Size of the candidate shortlist handed to the bandit.
    pub shortlist: usize,
    pub ucb_c: f64,
    pub ts_obs_variance: f64,
    /// Diversity penalty weight, in units of the surrogate's signal sd.
    pub diversity: f64,
}

impl Default for PolicySettings {
    fn default() -> Self {
        PolicySettings {
            acquisition: None,
            shortlist: 5,
            ucb_c: DEFAULT_UCB_C,
            ts_obs_variance: DEFAULT_OBS_VARIANCE,
            diversity: BatchSpec::DEFAULT_DIVERSITY,
        }
    }
}

impl PolicySettings {
    pub fn validate(&self) -> Result<()> {
        if self.shortlist == 0 {
            return Err(Error::config("shortlist size must be >= 1"));
        }
        if !(self.ucb_c >= 0.0 && self.ts_obs_variance > 0.0 && self.diversity >= 0.0) {
            return Err(Error::config("bandit constants must be non-negative"));
        }
        if let Some(a) = &self.acquisition {
            a.validate()?;
        }
        Ok(())
    }
}

/// One design strategy bound to a problem instance.
///
/// Every strategy answers the same history-to-next-point question; the
/// simulator decides when it is asked.
#[derive(Debug, Clone)]
pub struct StrategyPolicy {
    strategy: DesignStrategy,
    settings: PolicySettings,
    acquisition: AcquisitionSpec,
    sign: f64,
    n: usize,
    pool: Option<PooledPosterior>,
    bandit: BanditState,
    rng: Rng,
    plan: Vec<usize>,
    cursor: usize,
    dopt: Option<DOptimal>,
    doses: Vec<f64>,
    penalty: f64,
    variance_reward: bool,
    prior_mean: f64,
    signal_sd: f64,
    sums: Vec<f64>,
    counts: Vec<u32>,
    queried: Vec<usize>,
}

impl StrategyPolicy {
    pub fn new(strategy: DesignStrategy, problem: &Problem, settings: PolicySettings, rng: Rng) -> Result<Self> {
        settings.validate()?;
        let n = problem.candidates.len();
        if n == 0 {
            return Err(Error::input("empty candidate set"));
        }
        let mut rng = rng;
        let acquisition = settings.acquisition.unwrap_or(problem.acquisition);
        let s = problem.surrogate;
        let pool = if strategy.uses_surrogate() {
            let prior = GpPosterior::prior(s.kernel, s.noise_std, s.prior_mean)?;
            Some(PooledPosterior::new(prior, problem.candidates.clone())?)
        } else {
            None
        };
        let plan = match strategy {
            DesignStrategy::Grid => {
                let levels = problem
                    .levels
                    .as_ref()
                    .ok_or_else(|| Error::config("grid search needs a lattice-shaped pool"))?;
                grid_order(levels, problem.budget)?
            }
            DesignStrategy::LatinHypercube => latin_hypercube(&problem.candidates, problem.budget, &mut rng)?,
            DesignStrategy::EqualSpacing => (0..n).collect(),
            _ => Vec::new(),
        };
        let (dopt, penalty) = match (&problem.oracle, strategy) {
            (OracleKind::Dose(spec), DesignStrategy::DOptimal) => (Some(DOptimal::default()), spec.penalty),
            (_, DesignStrategy::DOptimal) => return Err(Error::config("D-optimal design needs the dose model")),
            (OracleKind::Dose(spec), _) => (None, spec.penalty),
            _ => (None, 0.0),
        };
        Ok(StrategyPolicy {
            strategy,
            settings,
            acquisition,
            sign: problem.sense.sign(),
            n,
            pool,
            bandit: BanditState::gaussian(n, settings.ts_obs_variance),
            rng,
            plan,
            cursor: 0,
            dopt,
            doses: problem.candidates.iter().map(|c| c[0]).collect(),
            penalty,
            variance_reward: acquisition.kind == crate::acquisition::AcquisitionKind::MaxVariance,
            prior_mean: s.prior_mean,
            signal_sd: s.signal_sd(),
            sums: vec![0.0; n],
            counts: vec![0; n],
            queried: Vec::new(),
        })
    }

    pub fn strategy(&self) -> DesignStrategy {
        self.strategy
    }

    pub fn pool(&self) -> Option<&PooledPosterior> {
        self.pool.as_ref()
    }

    /// Distinct evaluated candidates in first-evaluation order.
    pub fn queried(&self) -> &[usize] {
        &self.queried
    }

    /// Candidate believed best: highest posterior mean for surrogate strategies,
    /// highest average observation otherwise. `None` before any feedback.
    pub fn recommend(&self) -> Option<usize> {
        let score = |a: usize| match &self.pool {
            Some(p) => p.mean(a),
            None => self.sums[a] / self.counts[a] as f64,
        };
        let mut best: Option<(usize, f64)> = None;
        for &a in &self.queried {
            let s = score(a);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((a, s));
            }
        }
        best.map(|b| b.0)
    }

    fn hallucinated(&self, pending: &[usize]) -> Result<PooledPosterior> {
        let mut p = self.pool.clone().expect("surrogate strategy");
        for &a in pending {
            p.hallucinate(a)?;
        }
        Ok(p)
    }

    fn excluded(&self, pending: &[usize]) -> Vec<bool> {
        let mut e = vec![false; self.n];
        for &a in pending {
            e[a] = true;
        }
        if pending.len() >= self.n {
            e.iter_mut().for_each(|b| *b = false);
        }
        e
    }

    fn surrogate_scores(&self, pool: &PooledPosterior, pending: &[usize], penalize: bool) -> Vec<f64> {
        let incumbent = self
            .queried
            .iter()
            .map(|&a| pool.mean(a))
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
            .unwrap_or(self.prior_mean);
        let mut scores = score_pool(pool, &self.acquisition, incumbent);
        if penalize && !pending.is_empty() {
            let anchors: Vec<Vec<f64>> = pending.iter().map(|&a| pool.candidates()[a].clone()).collect();
            apply_diversity_penalty(&mut scores, pool, &anchors, self.settings.diversity * self.signal_sd);
        }
        scores
    }

    /// Top-`m` non-excluded indices by score, best first, ties to the lowest index.
    fn top(scores: &[f64], excluded: &[bool], m: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..scores.len()).filter(|&i| !excluded[i]).collect();
        idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        idx.truncate(m);
        idx
    }

    fn bandit_pick(&mut self, shortlist: &[usize]) -> Result<usize> {
        let view = self.bandit.restricted(shortlist);
        let j = match self.strategy {
            DesignStrategy::AlmabTs => thompson_select(&view, &mut self.rng)?,
            _ => ucb1_select(&view, self.settings.ucb_c)?,
        };
        Ok(shortlist[j])
    }

    fn almab_next(&mut self, pending: &[usize]) -> Result<usize> {
        let excluded = self.excluded(pending);
        let m = self.settings.shortlist.min(self.n);
        if self.strategy == DesignStrategy::AlmabNoAl {
            let free: Vec<usize> = (0..self.n).filter(|&i| !excluded[i]).collect();
            let shortlist: Vec<usize> = sample(&mut self.rng, free.len(), m.min(free.len()))
                .into_iter()
                .map(|i| free[i])
                .collect();
            return self.bandit_pick(&shortlist);
        }
        let pool = if pending.is_empty() {
            None
        } else {
            Some(self.hallucinated(pending)?)
        };
        let pool_ref = pool.as_ref().unwrap_or_else(|| self.pool.as_ref().expect("surrogate"));
        let scores = self.surrogate_scores(pool_ref, pending, true);
        let shortlist = Self::top(&scores, &excluded, m);
        match self.strategy {
            DesignStrategy::AlmabNoMab => Ok(shortlist[self.rng.random_range(0..shortlist.len())]),
            _ if self.variance_reward => self.bandit_pick(&shortlist),
            _ => {
                // Each shortlisted arm's belief is its GP posterior, in signal-sd units.
                let sd = self.signal_sd;
                let means: Vec<f64> = shortlist.iter().map(|&a| (pool_ref.mean(a) - self.prior_mean) / sd).collect();
                let vars: Vec<f64> = shortlist.iter().map(|&a| pool_ref.variance(a) / (sd * sd)).collect();
                let t = (self.bandit.total() as usize + pending.len() + 1) as u64;
                let j = match self.strategy {
                    DesignStrategy::AlmabTs => belief_thompson_select(&means, &vars, &mut self.rng)?,
                    _ => belief_ucb_select(&means, &vars, t, self.settings.ucb_c)?,
                };
                Ok(shortlist[j])
            }
        }
    }

    fn decode_dose(&self, reward: f64) -> (bool, bool) {
        let eff = reward > (1.0 - self.penalty) / 2.0;
        let tox = if eff { reward < 1.0 - self.penalty / 2.0 } else { reward < -self.penalty / 2.0 };
        (eff, tox)
    }
}

impl AsyncPolicy for StrategyPolicy {
    fn propose(&mut self, pending: &[usize]) -> Result<usize> {
        let next = match self.strategy {
            DesignStrategy::Grid | DesignStrategy::EqualSpacing => {
                let a = self.plan[self.cursor % self.plan.len()];
                self.cursor += 1;
                a
            }
            DesignStrategy::LatinHypercube => {
                let a = match self.plan.get(self.cursor) {
                    Some(&a) => a,
                    None => self.rng.random_range(0..self.n),
                };
                self.cursor += 1;
                a
            }
            DesignStrategy::Random => self.rng.random_range(0..self.n),
            DesignStrategy::DOptimal => {
                let pend: Vec<f64> = pending.iter().map(|&a| self.doses[a]).collect();
                self.dopt.as_ref().expect("dose model").next(&self.doses, &pend)?
            }
            DesignStrategy::GreedyMaxVariance | DesignStrategy::PureBo => {
                let excluded = self.excluded(pending);
                let scores = if pending.is_empty() {
                    let p = self.pool.as_ref().expect("surrogate");
                    self.greedy_scores(p, pending)
                } else {
                    let p = self.hallucinated(pending)?;
                    self.greedy_scores(&p, pending)
                };
                argmax_lowest(&scores, Some(&excluded)).expect("free candidate")
            }
            _ => self.almab_next(pending)?,
        };
        Ok(next)
    }

    fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        if arm >= self.n {
            return Err(Error::input(format!("arm {arm} outside a pool of {}", self.n)));
        }
        let y = self.sign * reward;
        if self.counts[arm] == 0 {
            self.queried.push(arm);
        }
        self.counts[arm] += 1;
        self.sums[arm] += y;
        let (e, t) = self.decode_dose(reward);
        if let Some(d) = self.dopt.as_mut() {
            d.record(self.doses[arm], e, t);
        }
        if let Some(p) = self.pool.as_mut() {
            let before = if self.variance_reward { p.integrated_variance() } else { 0.0 };
            p.observe(arm, y)?;
            if self.strategy.is_almab() {
                let r = if self.variance_reward {
                    (before - p.integrated_variance()) / (self.signal_sd * self.signal_sd)
                } else {
                    (y - self.prior_mean) / self.signal_sd
                };
                self.bandit.update(arm, r)?;
            }
        } else if self.strategy == DesignStrategy::AlmabNoAl {
            self.bandit.update(arm, (y - self.prior_mean) / self.signal_sd)?;
        }
        Ok(())
    }
}

impl StrategyPolicy {
    fn greedy_scores(&self, pool: &PooledPosterior, pending: &[usize]) -> Vec<f64> {
        if self.strategy == DesignStrategy::GreedyMaxVariance {
            pool.variances().to_vec()
        } else {
            self.surrogate_scores(pool, pending, false)
        }
    }

    /// Efficacy and toxicity outcomes encoded in a scalar dose reward.
    pub fn dose_outcomes(&self, reward: f64) -> (bool, bool) {
        self.decode_dose(reward)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::cases::{CaseId, ProblemOptions};
    use crate::seed::rng_from;

    fn problem(case: CaseId) -> Problem {
        Problem::build(case, &ProblemOptions::default(), 7).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for s in DesignStrategy::ALL {
            assert_eq!(s.name().parse::<DesignStrategy>().unwrap(), s);
        }
        assert_eq!("lhs".parse::<DesignStrategy>().unwrap(), DesignStrategy::LatinHypercube);
        assert!("bohb".parse::<DesignStrategy>().is_err());
    }

    #[test]
    fn greedy_prior_pick_is_first_index() {
        let p = problem(CaseId::Case5);
        let mut pol = StrategyPolicy::new(DesignStrategy::GreedyMaxVariance, &p, PolicySettings::default(), rng_from(1)).unwrap();
        assert_eq!(pol.propose(&[]).unwrap(), 0);
    }

    #[test]
    fn random_on_single_candidate() {
        let mut p = problem(CaseId::Case4);
        p.candidates.truncate(1);
        p.truth.truncate(1);
        let mut pol = StrategyPolicy::new(DesignStrategy::Random, &p, PolicySettings::default(), rng_from(1)).unwrap();
        assert_eq!(pol.propose(&[]).unwrap(), 0);
    }

    #[test]
    fn dose_rewards_decode() {
        let p = problem(CaseId::Case4);
        let pol = StrategyPolicy::new(DesignStrategy::DOptimal, &p, PolicySettings::default(), rng_from(1)).unwrap();
        assert_eq!(pol.dose_outcomes(1.0), (true, false));
        assert_eq!(pol.dose_outcomes(0.5), (true, true));
        assert_eq!(pol.dose_outcomes(0.0), (false, false));
        assert_eq!(pol.dose_outcomes(-0.5), (false, true));
    }

    #[test]
    fn equal_spacing_cycles_upward() {
        let p = problem(CaseId::Case4);
        let mut pol = StrategyPolicy::new(DesignStrategy::EqualSpacing, &p, PolicySettings::default(), rng_from(1)).unwrap();
        let picks: Vec<usize> = (0..35).map(|_| pol.propose(&[]).unwrap()).collect();
        assert_eq!(&picks[..3], &[0, 1, 2]);
        assert_eq!(picks[33], 0);
    }

    #[test]
    fn pending_points_are_not_repeated() {
        let p = problem(CaseId::Case5);
        for s in [DesignStrategy::AlmabUcb, DesignStrategy::PureBo, DesignStrategy::GreedyMaxVariance] {
            let mut pol = StrategyPolicy::new(s, &p, PolicySettings::default(), rng_from(2)).unwrap();
            let a = pol.propose(&[]).unwrap();
            let b = pol.propose(&[a]).unwrap();
            let c = pol.propose(&[a, b]).unwrap();
            assert!(a != b && b != c && a != c, "{s}");
        }
    }
}
