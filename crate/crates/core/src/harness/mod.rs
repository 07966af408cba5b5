//! Experiment configuration, replicate execution and result files.

mod analysis;
mod config;
mod mixture;
mod output;
mod presets;
mod run;

pub use analysis::{
    aggregate, compare_cells, fit_traces, metric_asymptote, run_ablation, run_noise_sweep, scaling_fits, summarize_cell,
    Ablation, AblationRow, Aggregate, CellSummary, Comparison, NoiseRow, NoiseSweep, ScalingFit, ABLATION_VARIANTS,
    TracePoint, TraceScaling, NOISE_LEVELS,
};
pub use config::{ExperimentConfig, Manifest, DEFAULT_REPLICATES, DEFAULT_SEED};
pub use mixture::{mixture_spec, run_mixture_cell, run_mixture_replicate, MIXTURE_NOISE};
pub use output::{
    emit_outputs, fmt_f64, per_replicate_path, read_cells, write_json, write_replicates_csv, write_rows_csv,
    OutputFormat, AGGREGATE_JSON, PER_REPLICATE_CSV, PER_REPLICATE_JSON, PLOT_SCALING, PLOT_TRAJECTORIES,
    REPLICATES_CSV,
};
pub use presets::{preset, reproduce, Preset, ABLATION_BUDGET, PRESET_NAMES, SCALING_AGENTS};
pub use run::{
    metric_sense, oracle_seed, run_cell, run_replicate, run_replicate_detailed, run_sweep, CellResult,
    ReplicateRecord, RoundRow,
};
