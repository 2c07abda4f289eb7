//! Exact coefficients and heights of the inclusion-exclusion polynomials
//! `P_N(x) = (1 - x^N) Π_{i<j} (1 - x^{N/p_i p_j}) / Π_i (1 - x^{N/p_i})`
//! for squarefree `N = p_1 ⋯ p_n`.

pub mod arith;
pub mod config;
pub mod constructions;
pub mod engine;
pub mod error;
pub mod oracle;
pub mod recursion;

pub use arith::{PrimeTuple, Rational};
pub use config::Config;
pub use error::{Error, Result};
