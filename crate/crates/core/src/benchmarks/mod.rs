//! Benchmark oracles and the design strategies compared on them.

mod cases;
mod design;
mod oracles;
mod policy;

pub use cases::{
    default_budget, CaseId, MetricKind, OracleKind, Problem, ProblemOptions, ProblemOracle, SurrogateOverride,
    SurrogateSettings,
    CASE4_INIT_DOSES, CASE4_ROUNDS, RANDOM_INIT,
};
pub use design::{grid_order, latin_hypercube, logistic_fit, DOptimal, DOPT_PRIOR_SD};
pub use oracles::{
    dose_sample, dose_utility, drag_oracle, lattice, logistic, mixture_reward, saturation_oracle, spatial_field_draw,
    spatial_observe, DoseSpec, DragSpec, MixtureComponent, MixtureConfig, MixtureSpec, SaturationSpec, SpatialSpec,
};
pub use policy::{DesignStrategy, PolicySettings, StrategyPolicy};
