use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::benchmarks::{CaseId, DesignStrategy, Problem, ProblemOptions};
use crate::distsim::{amdahl_speedup, fit_serial_fraction, EventKind, ScalingParams, SimTrace};
use crate::error::{Error, Result};
use crate::stats::{bonferroni, fit_convergence_rate, mann_whitney_u, median, ConvergenceFit, Sense, Summary};

use super::config::ExperimentConfig;
use super::run::{metric_sense, run_cell, CellResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub case: CaseId,
    pub strategy: String,
    pub agents: usize,
    pub final_metric: Summary,
    pub cumulative_regret: Summary,
    pub wall_clock: Summary,
    pub mean_reward: Option<Summary>,
    /// Median metric per round.
    pub median_trajectory: Vec<f64>,
    pub convergence: Option<ConvergenceFit>,
    /// Rank-biserial correlation between being chosen and posterior-variance rank.
    pub variance_rank_correlation: Option<f64>,
}

/// Two-sided Mann–Whitney test of a strategy against the reference strategy of its `(case, K)` group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub case: CaseId,
    pub agents: usize,
    pub reference: String,
    pub strategy: String,
    pub u: f64,
    pub p_value: f64,
    pub p_adjusted: f64,
    pub exact: bool,
    /// Reference median minus strategy median, signed so positive favours the reference.
    pub advantage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub case: CaseId,
    pub strategy: String,
    /// `(K, speedup)` from median wall clock, normalized by evaluations.
    pub speedups: Vec<(usize, f64)>,
    pub serial_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub cells: Vec<CellSummary>,
    pub comparisons: Vec<Comparison>,
    pub scaling: Vec<ScalingFit>,
}

/// Known limit of the headline metric, used for convergence fits.
pub fn metric_asymptote(case: CaseId) -> Option<f64> {
    match case {
        CaseId::Case1 | CaseId::Case2 | CaseId::Case3 => {
            Problem::build(case, &ProblemOptions::default(), 0).ok().map(|p| p.optimum_value)
        }
        CaseId::Case4 | CaseId::Case5 => Some(0.0),
        CaseId::Mixture => None,
    }
}

/// Signed so that larger is better.
fn signed(sense: Sense, v: f64) -> f64 {
    sense.sign() * v
}

pub fn summarize_cell(cell: &CellResult, asymptote: Option<f64>) -> Result<CellSummary> {
    if cell.replicates.is_empty() {
        return Err(Error::input("cell has no replicates"));
    }
    let col = |f: &dyn Fn(&super::run::ReplicateRecord) -> f64| -> Vec<f64> { cell.replicates.iter().map(f).collect() };
    let rounds = cell.replicates.iter().map(|r| r.rounds.len()).max().unwrap_or(0);
    let median_trajectory: Vec<f64> = (0..rounds)
        .map(|i| {
            let v: Vec<f64> = cell
                .replicates
                .iter()
                .filter_map(|r| r.rounds.get(i).map(|x| x.metric))
                .collect();
            median(&v)
        })
        .collect();
    let sense = metric_sense(cell.case);
    let convergence = asymptote.and_then(|a| {
        let traj: Vec<f64> = median_trajectory.iter().map(|&v| signed(sense, v)).collect();
        fit_convergence_rate(&traj, signed(sense, a)).ok()
    });
    let rewards: Vec<f64> = cell.replicates.iter().filter_map(|r| r.mean_reward).collect();
    let ranks: Vec<f64> = cell.replicates.iter().filter_map(|r| r.variance_rank).collect();
    Ok(CellSummary {
        case: cell.case,
        strategy: cell.strategy.clone(),
        agents: cell.agents,
        final_metric: Summary::of(&col(&|r| r.final_metric)),
        cumulative_regret: Summary::of(&col(&|r| r.cumulative_regret)),
        wall_clock: Summary::of(&col(&|r| r.wall_clock)),
        mean_reward: (!rewards.is_empty()).then(|| Summary::of(&rewards)),
        median_trajectory,
        convergence,
        variance_rank_correlation: (!ranks.is_empty()).then(|| 2.0 * ranks.iter().sum::<f64>() / ranks.len() as f64 - 1.0),
    })
}

/// Compares every strategy with the first strategy seen for the same `(case, K)`,
/// Bonferroni-adjusted over all comparisons of that case.
pub fn compare_cells(cells: &[CellResult]) -> Result<Vec<Comparison>> {
    let mut groups: BTreeMap<(u64, usize), Vec<&CellResult>> = BTreeMap::new();
    for c in cells {
        groups.entry((c.case.code(), c.agents)).or_default().push(c);
    }
    let mut by_case: BTreeMap<u64, Vec<Comparison>> = BTreeMap::new();
    for ((code, _), group) in groups {
        let reference = group[0];
        let a = reference.final_metrics();
        let sense = metric_sense(reference.case);
        for other in &group[1..] {
            let b = other.final_metrics();
            let t = mann_whitney_u(&a, &b)?;
            by_case.entry(code).or_default().push(Comparison {
                case: reference.case,
                agents: reference.agents,
                reference: reference.strategy.clone(),
                strategy: other.strategy.clone(),
                u: t.u,
                p_value: t.p_value,
                p_adjusted: t.p_value,
                exact: t.exact,
                advantage: signed(sense, median(&a) - median(&b)),
            });
        }
    }
    let mut out = Vec::new();
    for (_, mut comps) in by_case {
        let p: Vec<f64> = comps.iter().map(|c| c.p_value).collect();
        if !p.is_empty() {
            let adj = bonferroni(&p, p.len())?;
            for (c, a) in comps.iter_mut().zip(adj) {
                c.p_adjusted = a;
            }
        }
        out.extend(comps);
    }
    Ok(out)
}

/// Throughput speedups relative to `K = 1` and the fitted serial fraction,
/// for every strategy run at `K = 1` and at least one other `K`.
pub fn scaling_fits(cells: &[CellResult]) -> Vec<ScalingFit> {
    let mut groups: BTreeMap<(u64, String), Vec<&CellResult>> = BTreeMap::new();
    for c in cells {
        groups.entry((c.case.code(), c.strategy.clone())).or_default().push(c);
    }
    let throughput = |c: &CellResult| {
        let evals = median(&c.replicates.iter().map(|r| r.evaluations as f64).collect::<Vec<_>>());
        let t = median(&c.replicates.iter().map(|r| r.wall_clock).collect::<Vec<_>>());
        evals / t
    };
    let mut out = Vec::new();
    for ((_, strategy), group) in groups {
        let Some(base) = group.iter().find(|c| c.agents == 1) else { continue };
        if group.len() < 2 || base.replicates.is_empty() {
            continue;
        }
        let t1 = throughput(base);
        let mut speedups: Vec<(usize, f64)> = group.iter().map(|c| (c.agents, throughput(c) / t1)).collect();
        speedups.sort_by_key(|s| s.0);
        if let Ok(p) = fit_serial_fraction(&speedups) {
            out.push(ScalingFit {
                case: base.case,
                strategy,
                speedups,
                serial_fraction: p,
            });
        }
    }
    out
}

pub fn aggregate(cells: &[CellResult]) -> Result<Aggregate> {
    let mut asymptotes: BTreeMap<u64, Option<f64>> = BTreeMap::new();
    let summaries = cells
        .iter()
        .map(|c| {
            let a = *asymptotes.entry(c.case.code()).or_insert_with(|| metric_asymptote(c.case));
            summarize_cell(c, a)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Aggregate {
        cells: summaries,
        comparisons: compare_cells(cells)?,
        scaling: scaling_fits(cells),
    })
}

/// Default observation-noise levels of the robustness sweep.
pub const NOISE_LEVELS: [f64; 4] = [0.0, 0.01, 0.02, 0.04];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub strategy: String,
    pub sigma: f64,
    pub median: f64,
    /// Loss of median final metric relative to `σ = 0`; positive is worse.
    pub degradation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSweep {
    pub rows: Vec<NoiseRow>,
    pub cells: Vec<CellResult>,
}

impl NoiseSweep {
    pub fn row(&self, strategy: &str, sigma: f64) -> Option<&NoiseRow> {
        self.rows.iter().find(|r| r.strategy == strategy && r.sigma == sigma)
    }

    /// Median advantage of `a` over `b` at `sigma`, positive when `a` is better.
    pub fn advantage(&self, case: CaseId, a: &str, b: &str, sigma: f64) -> Option<f64> {
        let (ra, rb) = (self.row(a, sigma)?, self.row(b, sigma)?);
        Some(signed(metric_sense(case), ra.median - rb.median))
    }
}

/// Repeats every cell of `cfg` at each extra-noise level. The first level is
/// the baseline for degradation.
pub fn run_noise_sweep(cfg: &ExperimentConfig, sigmas: &[f64]) -> Result<NoiseSweep> {
    cfg.validate()?;
    if sigmas.is_empty() {
        return Err(Error::config("noise sweep needs at least one level"));
    }
    if cfg.case == CaseId::Mixture {
        return Err(Error::config("the noise sweep runs on pool cases"));
    }
    let sense = metric_sense(cfg.case);
    let k = cfg.agents[0];
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for &s in &cfg.strategies {
        let mut base = None;
        for &sigma in sigmas {
            let mut c = cfg.clone();
            c.noise = sigma;
            let cell = run_cell(&c, s, k)?;
            let m = median(&cell.final_metrics());
            let b = *base.get_or_insert(m);
            rows.push(NoiseRow {
                strategy: s.name().to_string(),
                sigma,
                median: m,
                degradation: signed(sense, b - m),
            });
            cells.push(cell);
        }
    }
    Ok(NoiseSweep { rows, cells })
}

/// The variants compared in the ablation.
pub const ABLATION_VARIANTS: [DesignStrategy; 4] = [
    DesignStrategy::AlmabUcb,
    DesignStrategy::AlmabNoMab,
    DesignStrategy::AlmabNoAl,
    DesignStrategy::PureBo,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub strategy: String,
    pub final_metric: Summary,
    pub variance_rank_correlation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ablation {
    pub rows: Vec<AblationRow>,
    pub comparisons: Vec<Comparison>,
    pub cells: Vec<CellResult>,
}

/// Runs the ablation variants on the same seeds at the first agent count of `cfg`.
pub fn run_ablation(cfg: &ExperimentConfig) -> Result<Ablation> {
    let mut c = cfg.clone();
    c.strategies = ABLATION_VARIANTS.to_vec();
    c.validate()?;
    let k = c.agents[0];
    let cells = ABLATION_VARIANTS
        .iter()
        .map(|&s| run_cell(&c, s, k))
        .collect::<Result<Vec<_>>>()?;
    let rows = cells
        .iter()
        .map(|cell| {
            let s = summarize_cell(cell, None)?;
            Ok(AblationRow {
                strategy: cell.strategy.clone(),
                final_metric: s.final_metric,
                variance_rank_correlation: s.variance_rank_correlation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Ablation {
        comparisons: compare_cells(&cells)?,
        rows,
        cells,
    })
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub agents: usize,
    pub evaluations: usize,
    pub wall_clock: f64,
    /// Throughput relative to the single-agent trace.
    pub speedup: f64,
    /// Amdahl speedup at the fitted serial fraction.
    pub amdahl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceScaling {
    pub points: Vec<TracePoint>,
    pub serial_fraction: f64,
}

/// Fits the Amdahl serial fraction to a set of event traces. One trace must
/// come from a single agent.
pub fn fit_traces(traces: &[SimTrace]) -> Result<TraceScaling> {
    let stats: Vec<(usize, usize, f64)> = traces
        .iter()
        .map(|t| (t.agents(), t.count(EventKind::Complete), t.wall_clock))
        .collect();
    if stats.iter().any(|s| s.1 == 0 || !(s.2 > 0.0)) {
        return Err(Error::input("trace without completed work"));
    }
    let base = stats
        .iter()
        .find(|s| s.0 == 1)
        .ok_or_else(|| Error::input("scaling fit needs a single-agent trace"))?;
    let t1 = base.1 as f64 / base.2;
    let mut speedups: Vec<(usize, f64)> = stats.iter().map(|s| (s.0, s.1 as f64 / s.2 / t1)).collect();
    speedups.sort_by_key(|s| s.0);
    let p = fit_serial_fraction(&speedups)?;
    let mut points: Vec<TracePoint> = stats
        .iter()
        .map(|&(k, n, w)| {
            Ok(TracePoint {
                agents: k,
                evaluations: n,
                wall_clock: w,
                speedup: n as f64 / w / t1,
                amdahl: amdahl_speedup(&ScalingParams::amdahl(p), k)?,
            })
        })
        .collect::<Result<_>>()?;
    points.sort_by_key(|p| p.agents);
    Ok(TraceScaling {
        points,
        serial_fraction: p,
    })
}
