//! Component-wise gradient boosting for distributional regression.
//!
//! Every parameter of the response distribution (location, scale, shape)
//! gets its own additive predictor, and base-learners are selected one at a
//! time by fitting them to the negative gradient of the negative
//! log-likelihood. Two fitting strategies are provided:
//!
//! * **cyclical** — every distribution parameter receives an update in every
//!   iteration, each with its own stopping value ([`engine::fit_cyclical`]);
//! * **noncyclical** — exactly one parameter, the one whose champion
//!   base-learner most reduces the empirical risk, is updated per iteration,
//!   so a single scalar stopping value tunes the whole model
//!   ([`engine::fit_noncyclical`]).
//!
//! On top of the boosting engine sit out-of-bag tuning of the stopping
//! iteration ([`tune`]), stability selection with per-family error-rate
//! control ([`stabsel`]), and generators for the bundled simulation designs
//! ([`simgen`]).
//!
//! The crate is `no_std`-compatible (`alloc` is required): disable default
//! features to drop `std`. The `parallel` feature runs resampling loops on
//! rayon; results are identical either way because every fold, subsample and
//! replication derives its own RNG stream from the caller's seed.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod baselearner;
pub mod dist;
pub mod engine;
pub mod simgen;
pub mod stabsel;
pub mod tune;

mod math;
mod par;
mod rng;

pub use rng::stream_rng;
