//! Comparison methods: input fuzzing, best-first symbolic execution, and
//! exhaustive path enumeration for small programs.

pub mod enumerate;
pub mod fuzz;
pub mod symexe;

pub use enumerate::{enumerate_paths, Enumeration};
pub use fuzz::fuzz_inputs;
pub use symexe::{symexe_search, SymExeParams};
