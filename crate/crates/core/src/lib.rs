//! Extended duals for linear copositive programs.
//!
//! A linear copositive program minimizes `cᵀx` subject to
//! `A₀ + Σ xⱼ Aⱼ` being copositive. Without a Slater point the ordinary
//! conic dual may leave a gap. This crate detects the immobile indices of
//! the constraint (simplex points where every feasible constraint matrix has
//! a zero quadratic form), builds a multi-level dual whose completely
//! positive blocks are certified by nonnegative factors, and checks weak and
//! strong duality numerically.
//!
//! Module overview:
//!
//! - [`symcore`]: symmetric matrices, simplex points and grids
//! - [`cones`]: copositivity oracle, PSD test, completely positive factors
//! - [`model`]: program data and the JSON file format
//! - [`lp`]: dense simplex solver with dual multipliers
//! - [`dam`]: the data modification procedure on multiplier sets
//! - [`dualgen`]: level-by-level construction of the extended dual
//! - [`verify`]: duality checks and the Slater probe
//! - [`sdpbridge`]: semidefinite extended duals and their conversion
//!
//! ```
//! use copodual::{dualgen, model, verify};
//!
//! // min x  s.t.  x * diag(1, 0) is copositive; t = (0, 1) is immobile.
//! let prog = model::CopositiveProgram::new(
//!     vec![
//!         copodual::SymMatrix::zeros(2),
//!         copodual::SymMatrix::diag(&[1.0, 0.0]),
//!     ],
//!     vec![1.0],
//! )
//! .unwrap();
//! let out = dualgen::build_dual(&prog, &dualgen::GenConfig::default()).unwrap();
//! assert_eq!(out.solution.m0, 1);
//! let report = verify::strong_duality_report(&prog, &out.x0, &out.solution).unwrap();
//! assert_eq!(report.verdict, verify::Verdict::StrongDuality);
//! ```

// `!(x > 0.0)` rejects NaN along with nonpositive values; dense kernels
// index several arrays with one loop counter.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cones;
pub mod dam;
pub mod dualgen;
pub mod error;
pub mod lp;
pub mod model;
pub mod sdpbridge;
pub mod symcore;
pub mod verify;

pub use error::{Error, Result};
pub use symcore::{Mat, SimplexGrid, SimplexPoint, SymMatrix};
