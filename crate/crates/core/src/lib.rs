//! Finite-scale numerical laboratory for metric mean dimension.
//!
//! The crate computes, on finitely represented shift systems and small metric
//! spaces, the quantities that enter the variational principles for metric
//! mean dimension:
//!
//! * covering numbers under Bowen metrics and their growth rates ([`metric_core`]),
//! * windowed full shifts, subshifts of finite type and rotations ([`shift_systems`]),
//! * Bernoulli, Markov, mixture and empirical measures ([`measures`]),
//! * partition entropies, mean Rényi information dimension and information
//!   dimension rates ([`entropy`]),
//! * L^p rate-distortion and distortion-rate functions via Blahut–Arimoto
//!   ([`rate_distortion`]),
//! * Bowen-ball measures and Brin–Katok local entropy ([`local_entropy`]),
//! * experiment orchestration and verification reports ([`harness`]).
//!
//! All entropies are in nats. Every limit is replaced by a finite-scale
//! extrapolation and labelled as such; bounds carry their direction
//! (exact / upper / lower).

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entropy;
pub mod error;
pub mod harness;
pub mod local_entropy;
pub mod measures;
pub mod metric_core;
pub mod par;
pub mod rate_distortion;
pub mod shift_systems;
pub mod stats;

pub use error::{Error, Result};
