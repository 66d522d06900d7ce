//! Optimization by conservation laws.
//!
//! A particle moving without friction on the graph of `f` keeps its total
//! energy `½‖v‖² + f(x)` and moves fastest where `f` is lowest along its
//! path. The crate turns that observation into two algorithms:
//!
//! * [`ade_minimize`] finds a local minimum by zeroing the velocity every time
//!   the speed stops growing.
//! * [`ec_detect`] records the speed peaks of an undamped trajectory as
//!   candidate minima; [`combined_search`] refines each with
//!   [`ade_minimize`].
//!
//! Gradient descent, heavy ball and Nesterov's method live in [`baseline`]
//! for comparison, and [`spectral`] holds the linearized analysis of the
//! scheme on quadratics.
//!
//! With the default `parallel` feature, batch operations driven by
//! [`Exec::Parallel`] run on the rayon thread pool. Results are identical to
//! [`Exec::Sequential`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod conserve;
pub mod error;
pub mod exec;
pub mod integrate;
pub mod objective;
pub mod spectral;
pub mod trace;

pub use conserve::{
    ade_minimize, ade_minimize_batch, combined_search, ec_detect, iteration_estimate, CandidateSet,
    CombinedResult, CombinedSearch, RunConfig,
};
pub use error::{Error, Result};
pub use exec::Exec;
pub use integrate::{energy, stormer_verlet_step, symplectic_euler_step, PhaseState};
pub use objective::Objective;
pub use trace::{Record, RunTrace, Termination};
