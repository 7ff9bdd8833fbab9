//! Continuous Markovian Logic over finite-support continuous Markov kernels:
//! exact model checking, rate-bisimulation, satisfiability with finite-model
//! synthesis, quantitative satisfiability and its pseudometric layer, and
//! randomized soundness testing of the axiom schemas.
//!
//! All semantic computation is on exact rationals; no floating point enters
//! the core.

pub mod axioms;
pub mod bisim;
pub mod formula;
pub mod grid;
pub mod kernel;
pub mod lp;
pub mod metrics;
pub mod par;
pub mod parse;
pub mod random;
pub mod rational;
pub mod sat;

pub use formula::{measures, ClosureSpec, Formula, Label};
pub use grid::{enumerate_family, modal_grid, Caps};
pub use kernel::{load_model, save_model, sat, Kernel, Process};
pub use par::Exec;
pub use parse::parse;
pub use rational::Rat;
