//! Numerical core for SLE(κ, ρ) realized as diffusing polygons.
//!
//! The crate simulates the driver / force-point system of SLE(κ, ρ), flows
//! points under the chordal Loewner equation, evaluates the time-dependent
//! Schwarz–Christoffel maps whose corners are the force points, and checks
//! the analytic identities tying these together (martingale observable,
//! Brownian time change, hitting probabilities, rate identity, metric
//! Brownian motion).
//!
//! Everything here is `no_std` with `alloc`. File formats, configuration and
//! the command-line front end live in the `polysle-cli` crate, which also
//! provides a thread-pool [`verify::Executor`].

#![no_std]
// once std is anywhere in the build graph the float methods resolve
// inherently and the `Float` imports look unused
#![allow(unused_imports)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod driving;
pub mod error;
pub mod geometry;
pub mod loewner;
pub mod noise;
pub mod quadrature;
pub mod scmap;
pub mod special;
pub mod verify;

pub use num_complex::Complex64;

pub use driving::{DriverOptions, DrivingPath, DrivingState, TimeParam};
pub use error::{Error, Result};
pub use geometry::{Corner, CornerPosition, PolygonSnapshot, PrevertexConfig};
pub use loewner::{FlowResult, SwallowOrder, TraceSample};
pub use scmap::{CorrectedMap, QuadratureSettings, ScEvaluator, ScFamily};
