//! Pressure functions for products of non-negative matrices over subshifts
//! of finite type.
//!
//! The crate enumerates admissible words, computes partition sums
//! `s_n(q) = Σ_J ‖M_J‖^q` in a numerically stable renormalized form, and
//! from them produces:
//!
//! * finite-level pressure estimates with certified lower/upper brackets
//!   (`pressure`), plus an exact spectral oracle for positive integer
//!   exponents via a tensor-power transfer operator (`lift`);
//! * finite-level cylinder measures, their marginals, and Gibbs /
//!   quasi-Bernoulli / shift-invariance diagnostics with exact seeded
//!   sampling (`gibbs`);
//! * scaling exponents, numerical pressure derivatives, and the dimension
//!   spectrum of growth-rate level sets with its dual upper bound
//!   (`multifractal`).
//!
//! Five built-in demo systems (`demos`) cover the known closed forms used
//! by the acceptance suite, and `config` ingests user systems from strict
//! JSON. All CSV and SVG emission is byte-stable across runs and thread
//! counts.
//!
//! ```
//! use pressurelab::demos::Demo;
//! use pressurelab::{pressure, EvalOptions};
//!
//! let family = Demo::Golden.family();
//! let r = pressure::pressure_estimate(&family, 8, 1.0, &EvalOptions::default()).unwrap();
//! assert!((r.estimate - 4.0f64.ln()).abs() < 1e-6);
//! assert!(r.lower.unwrap() <= r.estimate && r.estimate <= r.upper.unwrap());
//! ```

pub mod config;
pub mod demos;
pub mod error;
pub mod gibbs;
pub mod lift;
pub mod matrix;
pub mod multifractal;
pub mod numeric;
pub mod pressure;
pub mod sft;
pub mod svg;

pub use error::{Error, Result};
pub use matrix::{H2Witness, Mat, MatrixFamily, NormalizedProduct};
pub use numeric::EvalOptions;
pub use pressure::{Method, PartitionSum, PressureEvaluator, PressureResult};
pub use sft::{SubshiftSpec, Word};
