//! Online maximum margin classification through dual certificates.
//!
//! The crate provides the online learner ([`omm`]), the classical online
//! large-margin baselines it is compared against ([`baselines`]), the
//! nearest-point machinery both depend on ([`geometry`]), mistake-bound
//! calculators ([`bounds`]), data loading and transformations ([`data`]), and
//! an experiment harness ([`harness`]).

pub mod baselines;
pub mod bounds;
pub mod data;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod norms;
pub mod omm;
pub mod types;

pub use geometry::{CertificatePair, GeometryError, MaxMarginSolution};
pub use norms::{NormError, NormSpec};
pub use types::{Label, LabeledPoint, LinearClassifier};
