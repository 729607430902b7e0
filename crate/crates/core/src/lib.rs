//! Simulation suite for postselected quantum computation.
//!
//! * [`state`]: state vectors, |amp|^p measurement rules, seeded sampling.
//! * [`circuit`]: circuit and truth-table types, the text format, and
//!   rewrites that defer postselection to a single flag qubit.
//! * [`dense`]: the reference state-vector simulator.
//! * [`pathsum`]: exact integer path sums for H / X / CNOT / Toffoli circuits.
//! * [`majority`]: the postselected decider for s < 2^(n-1).
//! * [`fantasy`]: nonunitary and |amp|^p substitutes for postselection.
//! * [`cli`]: the `postsim` command line.

// `!(x >= guard)` is used on purpose so NaN falls into the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod cli;
pub mod dense;
pub mod error;
pub mod fantasy;
pub mod majority;
pub mod pathsum;
pub mod state;

pub use circuit::{Circuit, Gate, MajorityInstance, Postselection};
pub use error::{Error, Result};
pub use majority::DecisionReport;
pub use state::{FantasyRule, StateVector};
