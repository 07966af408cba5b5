//! Virtual-clock simulation of asynchronous workers and the analytic scaling laws.

mod scaling;
mod sim;

pub use scaling::{
    amdahl_speedup, amdahl_time, fit_serial_fraction, gustafson_speedup, optimal_agents, parallel_efficiency,
    ScalingParams,
};
pub use sim::{
    simulate_async_run, AsyncPolicy, DispatchMode, EventKind, Evaluation, Oracle, SimConfig, SimEvent, SimOutcome,
    SimTrace, TaskDurationModel, DEFAULT_SIGMA_LOG,
};
