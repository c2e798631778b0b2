//! Stationary states of the Schrödinger–Newton–Hooke system in `d >= 6`
//! spatial dimensions.
//!
//! The radial problem is reduced to a pair of ODEs for the field `f` and the
//! shifted potential `h = omega - v`, and solved by shooting on the central
//! value of `h`. Singular states, diverging like `2(d-4)/r^2` at the origin,
//! are shot from the unstable manifold of the reduced system in `ln r`.
//!
//! * [`ode`]: reduced systems, series and manifold starts, integrator.
//! * [`shooting`]: regular ground and excited states, frequency extraction.
//! * [`singular`]: singular states and the limiting frequency `omega_inf(d)`.
//! * [`analysis`]: integral identities, potential cross-check, sweeps, fits.

pub mod analysis;
pub mod error;
pub mod ode;
pub mod problem;
pub mod shooting;
pub mod singular;

mod interp;

pub use error::{Result, SolverError};
pub use problem::{Mode, ProblemSpec};
