//! Argument parsing and command dispatch for the `almab` binary.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use almab_core::benchmarks::{CaseId, DesignStrategy};
use almab_core::distsim::SimTrace;
use almab_core::harness::{
    aggregate, emit_outputs, fit_traces, per_replicate_path, read_cells, reproduce, run_sweep, Aggregate,
    CellResult, ExperimentConfig, Manifest, OutputFormat, DEFAULT_REPLICATES, DEFAULT_SEED, PER_REPLICATE_JSON,
};
use almab_core::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "almab", version, about = "Active-learning bandit experiment runner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one cell or a sweep from flags or a config file.
    Run(RunArgs),
    /// Run a named preset manifest.
    Reproduce(ReproduceArgs),
    /// Recompute aggregates from an existing output directory.
    Analyze(AnalyzeArgs),
    /// Fit the serial fraction from event trace files.
    Scaling(ScalingArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON manifest or single sweep config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// 1..5 or mixture. Ignored with --config.
    #[arg(long)]
    pub case: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub strategy: Vec<String>,
    #[arg(long = "k", value_delimiter = ',')]
    pub agents: Vec<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub budget: Option<usize>,
    /// Extra Gaussian observation noise.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// case1..case5, mixture, ablation, noise, scaling.
    pub name: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    pub replicates: usize,
    /// Defaults to results/<name>.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Output directory or per-replicate file.
    pub path: PathBuf,
    /// Write the aggregate here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    /// JSON-lines traces, one of them from a single agent.
    #[arg(required = true)]
    pub traces: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(a) => run(a),
        Command::Reproduce(a) => {
            let out = a.out.unwrap_or_else(|| Path::new("results").join(&a.name));
            let agg = reproduce(&a.name, a.seed, a.replicates, &out, a.format.parse()?)?;
            print_table(&agg);
            eprintln!("wrote {}", out.display());
            Ok(())
        }
        Command::Analyze(a) => {
            let cells = load_cells(&a.path)?;
            emit_json(&aggregate(&cells)?, a.out.as_deref())
        }
        Command::Scaling(a) => {
            let traces = a
                .traces
                .iter()
                .map(|p| SimTrace::read_jsonl(BufReader::new(fs::File::open(p)?)))
                .collect::<Result<Vec<_>>>()?;
            emit_json(&fit_traces(&traces)?, a.out.as_deref())
        }
    }
}

/// Builds the sweeps of a `run` invocation. Flags override the config file.
pub fn run_manifest(a: &RunArgs) -> Result<Manifest> {
    let mut manifest = match (&a.config, &a.case) {
        (Some(path), _) => Manifest::load(path)?,
        (None, Some(case)) => {
            let case: CaseId = case.parse()?;
            let strategies = if a.strategy.is_empty() {
                vec![DesignStrategy::AlmabUcb]
            } else {
                a.strategy.iter().map(|s| s.parse()).collect::<Result<_>>()?
            };
            let agents = if a.agents.is_empty() { vec![1] } else { a.agents.clone() };
            Manifest {
                sweeps: vec![ExperimentConfig::new(case, strategies, agents)],
                out: None,
            }
        }
        (None, None) => return Err(Error::Config("run needs --config or --case".into())),
    };
    for s in &mut manifest.sweeps {
        if let Some(seed) = a.seed {
            s.seed = seed;
        }
        if let Some(n) = a.replicates {
            s.replicates = n;
        }
        if a.budget.is_some() {
            s.budget = a.budget;
        }
        if let Some(noise) = a.noise {
            s.noise = noise;
        }
        s.validate()?;
    }
    if a.out.is_some() {
        manifest.out = a.out.clone();
    }
    Ok(manifest)
}

fn run(a: RunArgs) -> Result<()> {
    let format: OutputFormat = a.format.parse()?;
    let manifest = run_manifest(&a)?;
    let out = manifest.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    let mut cells = Vec::new();
    for s in &manifest.sweeps {
        cells.extend(run_sweep(s)?);
    }
    let agg = emit_outputs(&cells, &out, format)?;
    print_table(&agg);
    eprintln!("wrote {}", out.display());
    Ok(())
}

/// Reads cells from a directory (CSV or JSON rows) or a per-replicate CSV file.
pub fn load_cells(path: &Path) -> Result<Vec<CellResult>> {
    let json = if path.is_dir() {
        Some(path.join(PER_REPLICATE_JSON)).filter(|j| j.exists() && !per_replicate_path(path).exists())
    } else {
        Some(path.to_path_buf()).filter(|p| p.extension().is_some_and(|e| e == "json"))
    };
    match json {
        Some(j) => Ok(serde_json::from_reader(BufReader::new(fs::File::open(j)?))?),
        None => read_cells(&per_replicate_path(path)),
    }
}

fn emit_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => fs::write(p, text + "\n")?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(())
}

fn print_table(agg: &Aggregate) {
    println!("{:<8} {:<22} {:>3} {:>14} {:>14} {:>14}", "case", "strategy", "K", "median", "q25", "q75");
    for c in &agg.cells {
        let m = &c.final_metric;
        println!(
            "{:<8} {:<22} {:>3} {:>14.6} {:>14.6} {:>14.6}",
            c.case.name(),
            c.strategy,
            c.agents,
            m.median,
            m.q25,
            m.q75
        );
    }
    for cmp in &agg.comparisons {
        println!(
            "{} K={} {} vs {}: p_adj = {:.3e}",
            cmp.case.name(),
            cmp.agents,
            cmp.reference,
            cmp.strategy,
            cmp.p_adjusted
        );
    }
}
