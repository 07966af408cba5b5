use std::fs;
use std::path::Path;

use crate::benchmarks::{CaseId, DesignStrategy, RANDOM_INIT};
use crate::distsim::TaskDurationModel;
use crate::error::{Error, Result};

use super::analysis::{run_ablation, run_noise_sweep, Aggregate, NOISE_LEVELS};
use super::config::ExperimentConfig;
use super::output::{emit_outputs, write_json, OutputFormat};
use super::run::{run_replicate_detailed, run_sweep};

use DesignStrategy::*;

pub const PRESET_NAMES: [&str; 9] = [
    "case1", "case2", "case3", "case4", "case5", "mixture", "ablation", "noise", "scaling",
];

/// Ablation budget. Every variant saturates at the default Case 1 budget.
pub const ABLATION_BUDGET: usize = 15;

/// Agent counts of the scaling study.
pub const SCALING_AGENTS: [usize; 5] = [1, 2, 4, 8, 16];

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Sweeps(Vec<ExperimentConfig>),
    Noise(ExperimentConfig),
    Ablation(ExperimentConfig),
    /// Sweeps plus one event trace per agent count.
    Scaling(ExperimentConfig),
}

fn sweep(case: CaseId, strategies: &[DesignStrategy], agents: &[usize], seed: u64, n: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(case, strategies.to_vec(), agents.to_vec());
    c.seed = seed;
    c.replicates = n;
    c
}

/// The manifest behind `reproduce <name>`.
pub fn preset(name: &str, seed: u64, replicates: usize) -> Result<Preset> {
    let n = replicates;
    let pool_cases = [AlmabUcb, AlmabTs, PureBo, Random, Grid, LatinHypercube];
    Ok(match name.to_ascii_lowercase().as_str() {
        "case1" | "1" => Preset::Sweeps(vec![sweep(CaseId::Case1, &pool_cases, &[1], seed, n)]),
        "case2" | "2" => Preset::Sweeps(vec![sweep(CaseId::Case2, &pool_cases, &[1], seed, n)]),
        "case3" | "3" => Preset::Sweeps(vec![sweep(CaseId::Case3, &pool_cases, &[1], seed, n)]),
        "case4" | "4" => Preset::Sweeps(vec![
            sweep(CaseId::Case4, &[AlmabUcb, AlmabTs, Random, DOptimal, EqualSpacing, PureBo], &[1], seed, n),
            sweep(CaseId::Case4, &[AlmabUcb], &[2, 4, 8], seed, n),
        ]),
        "case5" | "5" => Preset::Sweeps(vec![
            sweep(CaseId::Case5, &[AlmabUcb, GreedyMaxVariance, LatinHypercube, Random], &[1], seed, n),
            sweep(CaseId::Case5, &[AlmabUcb], &[2, 4], seed, n),
        ]),
        "mixture" => {
            let mut c = sweep(CaseId::Mixture, &[AlmabUcb], &[1, 4], seed, n);
            c.comm_alpha = 0.01;
            Preset::Sweeps(vec![c])
        }
        "ablation" => Preset::Ablation(ExperimentConfig {
            budget: Some(ABLATION_BUDGET),
            ..sweep(CaseId::Case1, &[AlmabUcb], &[1], seed, n)
        }),
        "noise" => Preset::Noise(sweep(CaseId::Case1, &[AlmabUcb, PureBo, Random, Grid], &[1], seed, n)),
        "scaling" | "fig4" => {
            let mut c = sweep(CaseId::Case1, &[AlmabUcb], &SCALING_AGENTS, seed, n);
            c.durations = TaskDurationModel::Constant(0.92);
            c.update_cost = 0.08;
            c.budget = Some(RANDOM_INIT + 160);
            Preset::Scaling(c)
        }
        other => {
            return Err(Error::config(format!(
                "unknown preset '{other}' (one of {})",
                PRESET_NAMES.join(", ")
            )))
        }
    })
}

/// Runs a preset and writes its output tree into `out`.
pub fn reproduce(name: &str, seed: u64, replicates: usize, out: &Path, format: OutputFormat) -> Result<Aggregate> {
    match preset(name, seed, replicates)? {
        Preset::Sweeps(sweeps) => {
            let mut cells = Vec::new();
            for s in &sweeps {
                cells.extend(run_sweep(s)?);
            }
            emit_outputs(&cells, out, format)
        }
        Preset::Noise(cfg) => {
            let sweep = run_noise_sweep(&cfg, &NOISE_LEVELS)?;
            let agg = emit_outputs(&sweep.cells, out, format)?;
            write_json(out, "noise_sweep.json", &sweep.rows)?;
            Ok(agg)
        }
        Preset::Ablation(cfg) => {
            let ab = run_ablation(&cfg)?;
            let agg = emit_outputs(&ab.cells, out, format)?;
            write_json(out, "ablation.json", &(&ab.rows, &ab.comparisons))?;
            Ok(agg)
        }
        Preset::Scaling(cfg) => {
            let cells = run_sweep(&cfg)?;
            let agg = emit_outputs(&cells, out, format)?;
            let traces = out.join("traces");
            fs::create_dir_all(&traces)?;
            for &k in &cfg.agents {
                let (_, outcome) = run_replicate_detailed(&cfg, cfg.strategies[0], k, 0)?;
                let f = fs::File::create(traces.join(format!("trace_k{k:02}.jsonl")))?;
                outcome.trace.write_jsonl(std::io::BufWriter::new(f))?;
            }
            Ok(agg)
        }
    }
}
