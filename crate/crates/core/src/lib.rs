//! Deciding, quantifying and certifying incompatibility of finite quantum
//! measurements.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod criteria;
pub mod entanglement;
pub mod error;
pub mod json;
pub mod measurement;
pub mod operator;
pub mod random;
pub mod sdp;
pub mod witness;

pub use error::{Error, Result};
pub use measurement::{JointCandidate, Observable, QubitDichotomic};
pub use operator::{BlochVector, DensityOperator, HermitianOperator};
pub use sdp::{MarginReport, SolverConfig, Status};
