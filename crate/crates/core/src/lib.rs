//! Exact kernels for sunflower-free extremal set theory.
//!
//! Families over a ground set of at most 64 elements are bitmask-encoded
//! ([`SetFamily`]). On top of that sit ambient domains, sunflower search,
//! spreadness and homogeneity certificates, p-biased Boolean analysis,
//! the approximation pipelines and the bound evaluators.
//!
//! Every verdict is computed in exact arithmetic. Measure and noise code is
//! generic over [`Scalar`]; the aliases below fix the common choices.

pub mod approximation;
pub mod bits;
pub mod boolean;
pub mod bounds;
pub mod domains;
pub mod error;
pub mod family;
pub mod interval;
pub mod io;
pub mod rng;
pub mod report;
pub mod scalar;
pub mod spread;
pub mod sunflower;

pub use bits::Mask;
pub use domains::{Ambient, Domain, DomainSpec};
pub use error::{Error, Result};
pub use family::{GroundSet, SetFamily, SunflowerWitness};
pub use interval::Interval;
pub use scalar::{Rational, Scalar};

/// Exact scalar used for every certificate.
pub type Exact = Rational;
/// Fast floating scalar for estimates.
pub type Float = f64;
