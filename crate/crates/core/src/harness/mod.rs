//! Experiment orchestration: dimension estimates, verification reports and
//! the config-driven runner.

mod experiments;
mod report;
mod run;

pub use experiments::{
    ball_tail, certified_inf, mbke_estimate, mdim_estimate, measure_for, scale_growth, unit_resolution, vp_chain_check,
    JoinRow, MbkeEstimate, MbkeRow, MdimEstimate, MeasureInf, ScaleGrowth, SystemSpec, VpChain,
};
pub use report::{CheckRow, DimensionEstimate, DimensionKind, Provenance, Verdict, VerificationReport};
pub use run::{compute, exit_code_for, run_experiment, Config, Outcome, Params, Table, Tolerances, Units, EXPERIMENTS};
