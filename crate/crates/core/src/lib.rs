//! Simulation and optimization of compute-and-forward relaying assisted
//! by a reconfigurable reflecting surface.
//!
//! A relay decodes an integer combination of K user messages. An
//! M-element passive surface sits between users and relay; choosing its
//! per-element reflection phases reshapes the effective channel and with
//! it the achievable computation rate. This crate provides:
//!
//! * the channel model and seeded sampling ([`channel`]),
//! * rate evaluation in its closed and β-parameterized forms ([`rate`]),
//! * alternating optimization of phases and scaling factor, plus the
//!   oracles used to verify it ([`optimizer`]),
//! * the comparison schemes ([`baselines`]),
//! * and a deterministic parallel Monte-Carlo driver ([`montecarlo`]).
//!
//! Reproducibility is a design constraint throughout: every random
//! stream is derived from a master seed plus its role and indices, and
//! all reductions run in a fixed order, so a given seed produces
//! bit-identical output on any worker count.

pub mod baselines;
pub mod channel;
pub mod error;
pub mod montecarlo;
pub mod optimizer;
pub mod rate;
pub mod stats;

pub use baselines::{
    ao_over_inits, draw_uniform_phases, no_irs_rate, random_phase_rates, reduce_max, reduce_mean,
    MethodId,
};
pub use channel::{
    derive_seed, sample_channel, snr_db_to_linear, sub_rng, ChannelRealization,
    CoefficientVector, GaussianInt, SeedDomain, SystemParams,
};
pub use error::{Error, Result};
pub use montecarlo::{
    evaluate_point, evaluate_realizations, run_sweep, EvalConfig, MethodStats, PhaseDrawMode,
    RealizationRates, SweepRow, SweepSpec, SweepTable, SweepValue, SweepVariable,
};
pub use optimizer::{
    ao_optimize, coordinate_phase_optimum, finite_difference_gradient, gd_minimize,
    grid_search_phases, phase_gradient, phase_objective, AOConfig, AOResult, AOTraceEntry,
    CoordinateOptimum, GDConfig,
};
pub use rate::{
    computation_rate_beta, computation_rate_direct, computation_rate_direct_detailed,
    computation_rate_direct_solve, effective_channel, log_plus, optimal_beta,
    rate_at_optimal_beta, wrap_angle, PhaseShifts, RateDetail, RateValue, SATURATION_FLOOR,
};
