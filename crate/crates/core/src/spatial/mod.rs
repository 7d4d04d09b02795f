//! Cell-centered second-order finite-volume right-hand side.
//!
//! Per evaluation: primitive conversion, central (least-squares on a uniform
//! mesh) gradients, linear reconstruction to faces, a local Lax-Friedrichs
//! inviscid flux, a common-state viscous flux, and the flux divergence plus
//! gravity source. Every face flux is computed once and applied with
//! opposite signs to its two neighbors.

mod boundary;
mod flux;
mod gradient;
mod operator;
mod region;

pub use boundary::{apply_boundary_conditions, wall_ghost, BoundaryKind, BoundarySpec, GhostLayers, Side};
pub use flux::{lax_friedrichs_flux, normal_flux, reconstruct_face_states, roe_average, viscous_face_flux};
pub use gradient::{ls_gradients, CellGradient, GradientField};
pub use operator::{DomainOperator, FaceFluxSet};
pub use region::{CoupledSystem, StageInputs};

use thiserror::Error;

use crate::physics::PhysicsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpatialError {
    #[error("non-physical state at element {element}: {source}")]
    NonPhysical { element: usize, source: PhysicsError },
    #[error("non-physical reconstructed face state next to element {element}: {source}")]
    NonPhysicalFace { element: usize, source: PhysicsError },
    #[error("boundary specification: {0}")]
    Boundary(String),
    #[error("interface face requires exchanged interface fluxes")]
    MissingInterface,
}
