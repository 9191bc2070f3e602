//! Coupled Lyapunov equations of Markov jump linear systems: solvers,
//! stability tests, generators and a benchmark front end.

pub mod bench;
pub mod cli;
pub mod error;
pub mod fixedpoint;
pub mod generators;
pub mod io;
pub mod linalg;
pub mod model;
pub mod operators;
pub mod optimization;
pub mod solve;
pub mod stability;

pub use error::{Error, Result};
pub use model::{Method, MjlsProblem, SolverReport, SymTuple};
pub use solve::{solve, SolveOptions};
