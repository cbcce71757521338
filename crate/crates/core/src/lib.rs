//! Matrix functions by spectral calculus, and randomized falsifiers for
//! matrix monotonicity, matrix concavity, the Hansen-Pedersen contraction
//! inequality and generalized Powers-Stormer trace inequalities.
//!
//! The crate is organised bottom-up:
//!
//! * [`scalarfn`] parses and differentiates scalar functions of `t`.
//! * [`symmat`] holds dense symmetric matrices, the Jacobi eigensolver and
//!   the functional calculus built on it.
//! * [`monotone`] provides Loewner matrices, Daleckii-Krein derivatives and
//!   the order-property falsifiers.
//! * [`psineq`] checks the trace inequalities and reproduces the worked
//!   examples.
//! * [`cli`] is the command-line front end (also reachable as a library).

pub mod cli;
pub mod config;
pub mod error;
pub mod monotone;
pub mod psineq;
pub mod scalarfn;
pub mod symmat;
mod trials;
pub mod verdict;

pub use config::{Tolerances, TrialBudget};
pub use error::{Error, Result};
pub use scalarfn::{DomainInterval, ScalarFunction};
pub use symmat::{DenseMatrix, Spectrum, State, SymMatrix};
pub use verdict::{Status, Verdict, Witness};
