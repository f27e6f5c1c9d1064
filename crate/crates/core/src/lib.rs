//! Worst-case cost analysis by searching the space of symbolic-execution
//! path strings.
//!
//! A program is turned into a function from bit strings to costs: each
//! consumed bit picks a side at a symbolic branch, and the resulting path is
//! checked for satisfiability. An evolutionary search over those bit strings
//! (see [`evo`]) then looks for the most expensive feasible path, and the
//! solver turns the path condition back into a concrete input.

pub mod baselines;
pub mod bench;
pub mod budget;
pub mod concrete;
pub mod evo;
pub mod harness;
pub mod parallel;
pub mod program;
pub mod report;
pub mod solver;
pub mod symbolic;
