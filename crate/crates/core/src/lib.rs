//! Multirate partitioned Runge-Kutta integration of two compressible
//! Navier-Stokes fluids coupled through a rigid-lid interface.
//!
//! The lower subdomain Ω₁ is advanced with the fast step, the upper
//! subdomain Ω₂ with the slow step, except for a band of Ω₂ layers next to
//! the interface (the buffer) that follows the fast stage pattern.

pub mod butcher;
pub mod coupling;
pub mod diagnostics;
pub mod domain;
pub mod integrator;
pub mod physics;
pub mod scenarios;
pub mod spatial;
pub mod studies;

pub use butcher::{generate_mprk, ButcherTableau, MprkTableauSet};
pub use domain::{CoupledDomain, CoupledState, ConservedField, Region, StructuredGrid};
pub use integrator::{integrate, IntegrateOptions, RhsEvalLedger, Scheme};
pub use physics::{Conserved, FluidParams, NVAR};
pub use spatial::CoupledSystem;
