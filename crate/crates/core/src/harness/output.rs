use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::benchmarks::CaseId;
use crate::error::{Error, Result};

use super::analysis::{aggregate, Aggregate};
use super::run::{CellResult, ReplicateRecord, RoundRow};

pub const PER_REPLICATE_CSV: &str = "per_replicate.csv";
pub const PER_REPLICATE_JSON: &str = "per_replicate.json";
pub const REPLICATES_CSV: &str = "replicates.csv";
pub const AGGREGATE_JSON: &str = "aggregate.json";
pub const PLOT_TRAJECTORIES: &str = "plot_trajectories.csv";
pub const PLOT_SCALING: &str = "plot_scaling.csv";

const ROW_HEADER: [&str; 8] = ["case", "strategy", "K", "replicate", "round", "metric", "best_so_far", "regret"];
const REPLICATE_HEADER: [&str; 10] = [
    "case",
    "strategy",
    "K",
    "replicate",
    "final_metric",
    "cumulative_regret",
    "mean_reward",
    "wall_clock",
    "evaluations",
    "variance_rank",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::config(format!("unknown format '{other}' (csv or json)"))),
        }
    }
}

/// Seventeen significant digits, enough for an exact round trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

pub fn write_rows_csv<W: Write>(cells: &[CellResult], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(ROW_HEADER)?;
    for c in cells {
        for r in &c.replicates {
            for row in &r.rounds {
                out.write_record([
                    c.case.name().to_string(),
                    c.strategy.clone(),
                    c.agents.to_string(),
                    r.replicate.to_string(),
                    row.round.to_string(),
                    fmt_f64(row.metric),
                    fmt_f64(row.best_so_far),
                    fmt_f64(row.regret),
                ])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_replicates_csv<W: Write>(cells: &[CellResult], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(REPLICATE_HEADER)?;
    for c in cells {
        for r in &c.replicates {
            out.write_record([
                c.case.name().to_string(),
                c.strategy.clone(),
                c.agents.to_string(),
                r.replicate.to_string(),
                fmt_f64(r.final_metric),
                fmt_f64(r.cumulative_regret),
                fmt_opt(r.mean_reward),
                fmt_f64(r.wall_clock),
                r.evaluations.to_string(),
                fmt_opt(r.variance_rank),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

fn write_plots(dir: &Path, agg: &Aggregate, cells: &[CellResult]) -> Result<()> {
    let mut out = csv::Writer::from_writer(create(dir, PLOT_TRAJECTORIES)?);
    out.write_record(["case", "strategy", "K", "round", "median", "q25", "q75"])?;
    for c in cells {
        let rounds = c.replicates.iter().map(|r| r.rounds.len()).max().unwrap_or(0);
        for i in 0..rounds {
            let v: Vec<f64> = c.replicates.iter().filter_map(|r| r.rounds.get(i).map(|x| x.metric)).collect();
            let s = crate::stats::Summary::of(&v);
            out.write_record([
                c.case.name().to_string(),
                c.strategy.clone(),
                c.agents.to_string(),
                (i + 1).to_string(),
                fmt_f64(s.median),
                fmt_f64(s.q25),
                fmt_f64(s.q75),
            ])?;
        }
    }
    out.flush()?;
    let mut out = csv::Writer::from_writer(create(dir, PLOT_SCALING)?);
    out.write_record(["case", "strategy", "K", "speedup", "serial_fraction"])?;
    for f in &agg.scaling {
        for &(k, s) in &f.speedups {
            out.write_record([
                f.case.name().to_string(),
                f.strategy.clone(),
                k.to_string(),
                fmt_f64(s),
                fmt_f64(f.serial_fraction),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Writes the per-replicate rows, replicate summaries, aggregate JSON and
/// plot CSVs for `cells` into `dir`, creating it if needed.
pub fn emit_outputs(cells: &[CellResult], dir: &Path, format: OutputFormat) -> Result<Aggregate> {
    fs::create_dir_all(dir)?;
    match format {
        OutputFormat::Csv => write_rows_csv(cells, create(dir, PER_REPLICATE_CSV)?)?,
        OutputFormat::Json => write_json(dir, PER_REPLICATE_JSON, &cells)?,
    }
    write_replicates_csv(cells, create(dir, REPLICATES_CSV)?)?;
    let agg = aggregate(cells)?;
    write_json(dir, AGGREGATE_JSON, &agg)?;
    write_plots(dir, &agg, cells)?;
    Ok(agg)
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::input(format!("cannot parse {what} from '{s}'")))
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse(s, "number").map(Some)
    }
}

type Key = (u64, String, usize);

/// Rebuilds cells from a per-replicate CSV. Replicate summaries are merged from
/// `replicates.csv` in the same directory when present.
pub fn read_cells(per_replicate: &Path) -> Result<Vec<CellResult>> {
    let mut reader = csv::Reader::from_path(per_replicate)?;
    if reader.headers()?.iter().ne(ROW_HEADER) {
        return Err(Error::input(format!("{} does not have the per-replicate header", per_replicate.display())));
    }
    let mut order: Vec<Key> = Vec::new();
    let mut cells: BTreeMap<Key, (CaseId, BTreeMap<usize, ReplicateRecord>)> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec?;
        let case: CaseId = rec[0].parse()?;
        let key = (case.code(), rec[1].to_string(), parse(&rec[2], "K")?);
        let replicate: usize = parse(&rec[3], "replicate")?;
        let row = RoundRow {
            round: parse(&rec[4], "round")?,
            metric: parse(&rec[5], "metric")?,
            best_so_far: parse(&rec[6], "best_so_far")?,
            regret: parse(&rec[7], "regret")?,
        };
        if !cells.contains_key(&key) {
            order.push(key.clone());
        }
        let entry = cells.entry(key.clone()).or_insert_with(|| (case, BTreeMap::new()));
        let r = entry.1.entry(replicate).or_insert_with(|| ReplicateRecord {
            case,
            strategy: key.1.clone(),
            agents: key.2,
            replicate,
            rounds: Vec::new(),
            final_metric: f64::NAN,
            cumulative_regret: f64::NAN,
            mean_reward: None,
            wall_clock: f64::NAN,
            evaluations: 0,
            variance_rank: None,
        });
        r.final_metric = row.metric;
        r.cumulative_regret = row.regret;
        r.rounds.push(row);
    }
    let side = per_replicate.with_file_name(REPLICATES_CSV);
    if side.exists() {
        let mut reader = csv::Reader::from_path(&side)?;
        for rec in reader.records() {
            let rec = rec?;
            let case: CaseId = rec[0].parse()?;
            let key = (case.code(), rec[1].to_string(), parse(&rec[2], "K")?);
            let replicate: usize = parse(&rec[3], "replicate")?;
            if let Some(r) = cells.get_mut(&key).and_then(|c| c.1.get_mut(&replicate)) {
                r.final_metric = parse(&rec[4], "final_metric")?;
                r.cumulative_regret = parse(&rec[5], "cumulative_regret")?;
                r.mean_reward = parse_opt(&rec[6])?;
                r.wall_clock = parse(&rec[7], "wall_clock")?;
                r.evaluations = parse(&rec[8], "evaluations")?;
                r.variance_rank = parse_opt(&rec[9])?;
            }
        }
    }
    Ok(order
        .into_iter()
        .map(|key| {
            let (case, reps) = cells.remove(&key).expect("key recorded");
            CellResult {
                case,
                strategy: key.1,
                agents: key.2,
                replicates: reps.into_values().collect(),
            }
        })
        .collect())
}

/// Path of the per-replicate CSV inside an output directory, or the file itself.
pub fn per_replicate_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(PER_REPLICATE_CSV)
    } else {
        path.to_path_buf()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::DesignStrategy;
    use crate::harness::{run_cell, ExperimentConfig};

    #[test]
    fn empty_records_give_headered_csv() {
        let mut buf = Vec::new();
        write_rows_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "case,strategy,K,replicate,round,metric,best_so_far,regret\n");
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 123456.789, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn outputs_round_trip_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = ExperimentConfig::new(CaseId::Case4, vec![DesignStrategy::Random], vec![1]);
        c.replicates = 4;
        let cells = vec![run_cell(&c, DesignStrategy::Random, 1).unwrap()];
        let agg = emit_outputs(&cells, dir.path(), OutputFormat::Csv).unwrap();
        let text = fs::read_to_string(dir.path().join(PER_REPLICATE_CSV)).unwrap();
        assert_eq!(text.lines().count(), 1 + 4 * 10);
        let back = read_cells(&dir.path().join(PER_REPLICATE_CSV)).unwrap();
        assert_eq!(back, cells);
        assert_eq!(aggregate(&back).unwrap(), agg);
        assert!(emit_outputs(&cells, Path::new("/proc/no/such/dir"), OutputFormat::Csv).is_err());
    }
}
