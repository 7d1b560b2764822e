//! Exact hafnians and loop hafnians of complex symmetric matrices.
//!
//! The engine sums `2^(n/2)` inclusion–exclusion terms, each obtained from
//! the power traces of a pair-swapped principal submatrix, for a total cost
//! of `O(n^3 2^(n/2))`. Brute-force oracles, a low-rank evaluator and a
//! benchmark harness sit alongside it.
//!
//! ```
//! use hafnium::{hafnian, EngineOptions, SymmetricMatrix};
//! use num_complex::Complex64;
//!
//! let k4 = SymmetricMatrix::from_upper(4, |i, j| Complex64::new(if i == j { 0.0 } else { 1.0 }, 0.0));
//! let h = hafnian(&k4, &EngineOptions::default()).unwrap();
//! assert!((h - Complex64::new(3.0, 0.0)).norm() < 1e-12);
//! ```

pub mod bench;
pub mod engine;
pub mod error;
pub mod io;
pub mod lowrank;
pub mod matrix;
pub mod oracle;
pub mod powertrace;

pub use engine::{evaluate, hafnian, loop_hafnian, EngineOptions, HafnianReport, ReductionMode};
pub use error::{Error, Result};
pub use lowrank::{hafnian_lowrank, LowRankFactor};
pub use matrix::{ComplexMatrix, PairSubset, SymmetricMatrix, SymmetryMode};
pub use powertrace::{power_traces, Backend, PowerTraceVector};
