use serde::{Deserialize, Serialize};

use super::SpatialError;
use crate::domain::{ConservedField, StructuredGrid};
use crate::physics::{Axis, Conserved};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    /// Adiabatic no-slip wall.
    Wall,
    Periodic,
    /// Rigid-lid coupling to the other subdomain; only valid on z faces.
    Interface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Lo = 0,
    Hi = 1,
}

/// Boundary kind on each of the six faces of a subdomain box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundarySpec {
    kinds: [[BoundaryKind; 2]; 3],
}

impl BoundarySpec {
    pub fn new(kinds: [[BoundaryKind; 2]; 3]) -> Result<Self, SpatialError> {
        for (d, pair) in kinds.iter().enumerate() {
            let periodic = pair.iter().filter(|k| **k == BoundaryKind::Periodic).count();
            if periodic == 1 {
                return Err(SpatialError::Boundary(format!(
                    "axis {d} is periodic on one side only"
                )));
            }
            if d < 2 && pair.contains(&BoundaryKind::Interface) {
                return Err(SpatialError::Boundary(format!(
                    "interface boundary on horizontal axis {d}"
                )));
            }
        }
        Ok(Self { kinds })
    }

    /// Lateral kind for x and y, bottom and top kinds for z.
    pub fn boxed(lateral: BoundaryKind, bottom: BoundaryKind, top: BoundaryKind) -> Result<Self, SpatialError> {
        Self::new([[lateral; 2], [lateral; 2], [bottom, top]])
    }

    /// All six faces periodic.
    pub fn periodic() -> Self {
        Self { kinds: [[BoundaryKind::Periodic; 2]; 3] }
    }

    #[inline]
    pub fn kind(&self, axis: Axis, side: Side) -> BoundaryKind {
        self.kinds[axis.index()][side as usize]
    }

    #[inline]
    pub fn is_periodic(&self, axis: Axis) -> bool {
        self.kinds[axis.index()][0] == BoundaryKind::Periodic
    }

    pub fn has_interface(&self) -> bool {
        self.kinds[2].contains(&BoundaryKind::Interface)
    }
}

/// Mirror state of an adiabatic no-slip wall: velocity negated, density and
/// total energy (hence pressure and temperature) copied.
#[inline]
pub fn wall_ghost(q: &Conserved) -> Conserved {
    [q[0], -q[1], -q[2], -q[3], q[4]]
}

/// One layer of ghost elements per boundary face. Interface faces carry no
/// ghost layer; their data comes from the coupling exchange.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostLayers {
    layers: [[Option<Vec<Conserved>>; 2]; 3],
}

impl GhostLayers {
    pub fn get(&self, axis: Axis, side: Side) -> Option<&[Conserved]> {
        self.layers[axis.index()][side as usize].as_deref()
    }
}

/// Builds ghost layers of `field`, ordered like the boundary slab they face.
pub fn apply_boundary_conditions(
    field: &ConservedField,
    grid: &StructuredGrid,
    bcs: &BoundarySpec,
) -> GhostLayers {
    let q = field.as_slice();
    let n = grid.cells();
    let mut layers: [[Option<Vec<Conserved>>; 2]; 3] = Default::default();
    for axis in Axis::ALL {
        let d = axis.index();
        for side in [Side::Lo, Side::Hi] {
            let own = if side == Side::Lo { 0 } else { n[d] - 1 };
            let source = match bcs.kind(axis, side) {
                BoundaryKind::Interface => continue,
                BoundaryKind::Wall => own,
                BoundaryKind::Periodic => n[d] - 1 - own,
            };
            let mirror = bcs.kind(axis, side) == BoundaryKind::Wall;
            let mut slab = Vec::new();
            for k in 0..n[2] {
                for j in 0..n[1] {
                    for i in 0..n[0] {
                        let mut c = [i, j, k];
                        if c[d] != own {
                            continue;
                        }
                        c[d] = source;
                        let v = q[grid.index(c[0], c[1], c[2])];
                        slab.push(if mirror { wall_ghost(&v) } else { v });
                    }
                }
            }
            layers[d][side as usize] = Some(slab);
        }
    }
    GhostLayers { layers }
}
