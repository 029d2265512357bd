//! Certified lower bounds on small-deviation probabilities
//! `Prob[∑Xᵢ ≤ t]` for sums of independent bounded random variables,
//! obtained by combining semidefinite moment-problem bounds with
//! Berry-Esseen bounds.
//!
//! The numerical core is generic over the scalar type through [`Real`];
//! the `*F64` aliases below are what the CLI and the acceptance suite use.

// `!(x > 0)` is used deliberately so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod berry;
pub mod combine;
pub mod error;
pub mod linalg;
pub mod model;
pub mod momentsdp;
pub mod numerics;
pub mod oracle;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type TwoPointVarF64 = model::TwoPointVar<f64>;
pub type InstanceF64 = model::Instance<f64>;
pub type InstanceStatsF64 = model::InstanceStats<f64>;
pub type ShiftedMomentsF64 = model::ShiftedMoments<f64>;
pub type MomentProblemF64 = momentsdp::MomentProblem<f64>;
pub type MomentBoundF64 = momentsdp::MomentBound<f64>;
pub type DualCertificateF64 = momentsdp::DualCertificate<f64>;
pub type BoundReportF64 = combine::BoundReport<f64>;
pub type CrossingF64 = combine::Crossing<f64>;
pub type SumDistributionF64 = oracle::SumDistribution<f64>;
pub type AtomicDistributionF64 = oracle::AtomicDistribution<f64>;
