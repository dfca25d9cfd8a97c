//! Classical simulation of phase-oracle quantum gradient estimation.
//!
//! The crate builds the algorithm from its parts: exact central-difference
//! schemes, a grid of evaluation points, diagonal phase oracles, a dense
//! statevector with a per-axis inverse QFT, and the outer sampling loop with
//! median aggregation. Alongside sit the numerical checks for the lower-bound
//! machinery (test-function family, hybrid bound, oracle distances, moment
//! bounds) and a command-line front end.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod functions;
pub mod grid;
pub mod numerics;
pub mod oracle;
pub mod qge;
pub mod state;
pub mod stats;

pub use error::{Error, Result};
pub use functions::{Domain, ObjectiveFunction, TestFunctionInstance};
pub use grid::GridSpec;
pub use numerics::CentralDifferenceScheme;
pub use oracle::{CostModel, QueryLedger};
pub use qge::{AlgorithmParams, DerivedConstants, NormOrder, RunResult};
pub use state::State;
