//! Exact arithmetic on the adelic solenoid `A/Q`.
//!
//! The crate represents points of the fundamental domain
//! `[0,1) × ∏_p Z_p`, evaluates the quotient metric, enumerates orbits of
//! two-generator multiplicative semigroups, builds CRT-based ε-density
//! certificates, finds semigroup elements just above 1, and reproduces the
//! non-dense examples driven by affine iterated function systems.

pub mod approx;
pub mod density;
pub mod error;
pub mod ifs;
pub mod interval;
pub mod number;
pub mod padic;
pub mod solenoid;
pub mod verify;

#[cfg(test)]
mod proptests;

pub use approx::{ContinuedFractionPrefix, NearOneElement};
pub use density::{CoverageReport, DensityCertificate, OrbitPoint, SemigroupSpec};
pub use error::{Error, Result};
pub use ifs::{AffineContraction, IfsSystem};
pub use interval::DyadicInterval;
pub use number::{Rational, Valuation};
pub use padic::{PAdicExpansion, XiElement};
pub use solenoid::{BasePoint, RawPoint, RealCoord, RealSource, ReductionWitness, SolenoidPoint};
