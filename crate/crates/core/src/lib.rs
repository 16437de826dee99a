//! Minimum-energy steering of Caputo time-fractional diffusion into a target
//! subspace.
//!
//! The model is the sub-diffusion equation `D^α y = ∂²y/∂x² + B u` on `[0, 1]`
//! with homogeneous Dirichlet conditions, written in the sine eigenbasis
//! `w_i(x) = √2 sin(iπx)`, `λ_i = −i²π²`. Each mode evolves through
//! Mittag-Leffler functions, which makes the forward map exact per mode.
//!
//! The crate provides:
//!
//! * [`special`]: gamma, two-parameter Mittag-Leffler, the one-sided stable
//!   density and its moment identity.
//! * [`fractional`]: discrete Caputo and Riemann-Liouville operators on
//!   uniform grids plus the reflection operator.
//! * [`spectral`]: solution operators and the mild solution.
//! * [`actuators`]: zone and pointwise actuators, target subspaces,
//!   strategic-actuator and reachability criteria.
//! * [`rhum`]: Gramian assembly and the reverse HUM control synthesis.
//! * [`penalty`]: the penalized minimum-energy problem used to cross-check
//!   the synthesized control.
//! * [`config`] and [`driver`]: JSON configuration, CSV/JSON emission and the
//!   experiment drivers behind the `subdiff` binary.

pub mod actuators;
pub mod config;
pub mod driver;
pub mod error;
pub mod fractional;
pub mod penalty;
pub mod quadrature;
pub mod rhum;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
