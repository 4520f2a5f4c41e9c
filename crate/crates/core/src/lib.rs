//! Access selection across heterogeneous radio technologies: a generic link
//! layer abstraction, a multi-radio resource manager, a trigger bus and a
//! deterministic discrete-event simulator that exercises them together.
//!
//! Link metrics and selection scores are generic over [`Scalar`] (`f32` or
//! `f64`); the aliases below fix the common instantiations. The simulator
//! itself runs on `f64`.

// `!(x >= 0.0)` is used on purpose in validation so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod gll;
pub mod harness;
pub mod mrrm;
pub mod scalar;
pub mod simenv;
pub mod trg;

pub use scalar::Scalar;

/// Scalar used by the simulator.
pub type Real = f64;

pub type Measurement = gll::LinkMeasurement<f64>;
pub type QualityReport = gll::LinkQualityReport<f64>;
pub type Flow = mrrm::Flow<f64>;
pub type RankedList = mrrm::RankedList<f64>;

pub type Measurement32 = gll::LinkMeasurement<f32>;
pub type QualityReport32 = gll::LinkQualityReport<f32>;
pub type Flow32 = mrrm::Flow<f32>;
pub type RankedList32 = mrrm::RankedList<f32>;
