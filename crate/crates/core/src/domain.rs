//! Structured grids for the two subdomains, the fast / buffer / slow region
//! split, and per-element field storage.
//!
//! Ω₁ lies below the interface plane and is entirely fast. Ω₂ lies above it;
//! its bottom `buffer_layers` element layers form the slow buffer and the
//! remaining layers are slow. Elements are stored x-fastest, then y, then z,
//! so every z-layer is a contiguous slab.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::physics::{conserved_to_primitive, Conserved, PhysicsError, NVAR};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("subdomains are not conformal at the interface: {0}")]
    NonConformal(String),
    #[error("buffer of {buffer} layers does not fit a slow domain of {layers} layers")]
    BufferDepth { buffer: usize, layers: usize },
    #[error("field has {got} elements, grid has {expected}")]
    FieldSize { got: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Fast,
    Buffer,
    Slow,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::Fast, Region::Buffer, Region::Slow];
}

/// Uniform Cartesian mesh of one subdomain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredGrid {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

impl StructuredGrid {
    pub fn new(lower: [f64; 3], upper: [f64; 3], cells: [usize; 3]) -> Result<Self, DomainError> {
        for d in 0..3 {
            if cells[d] == 0 {
                return Err(DomainError::InvalidGrid(format!("axis {d} has no elements")));
            }
            if !(upper[d] > lower[d]) || !lower[d].is_finite() || !upper[d].is_finite() {
                return Err(DomainError::InvalidGrid(format!(
                    "axis {d} extent ({}, {}) is empty",
                    lower[d], upper[d]
                )));
            }
        }
        Ok(Self { nx: cells[0], ny: cells[1], nz: cells[2], lower, upper })
    }

    #[inline]
    pub fn cells(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    #[inline]
    pub fn spacing(&self) -> [f64; 3] {
        [self.dx(), self.dy(), self.dz()]
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        (self.upper[0] - self.lower[0]) / self.nx as f64
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        (self.upper[1] - self.lower[1]) / self.ny as f64
    }

    #[inline]
    pub fn dz(&self) -> f64 {
        (self.upper[2] - self.lower[2]) / self.nz as f64
    }

    /// Element measure `|K| = dx dy dz`.
    #[inline]
    pub fn volume(&self) -> f64 {
        self.dx() * self.dy() * self.dz()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Elements per z-layer.
    #[inline]
    pub fn layer_len(&self) -> usize {
        self.nx * self.ny
    }

    /// Whether y-fluxes are active. A single y element collapses the grid to 2D.
    #[inline]
    pub fn is_3d(&self) -> bool {
        self.ny > 1
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.nx * (j + self.ny * k)
    }

    #[inline]
    pub fn ijk(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.nx;
        let j = (idx / self.nx) % self.ny;
        [i, j, idx / self.layer_len()]
    }

    pub fn center(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let h = self.spacing();
        [
            self.lower[0] + (i as f64 + 0.5) * h[0],
            self.lower[1] + (j as f64 + 0.5) * h[1],
            self.lower[2] + (k as f64 + 0.5) * h[2],
        ]
    }

    /// Element range covered by z-layers `layers`.
    pub fn layer_span(&self, layers: Range<usize>) -> Range<usize> {
        layers.start * self.layer_len()..layers.end * self.layer_len()
    }

    /// Center of the horizontal face `(i, j)` on the plane `z`.
    pub fn horizontal_face_center(&self, i: usize, j: usize, z: f64) -> [f64; 3] {
        let c = self.center(i, j, 0);
        [c[0], c[1], z]
    }
}

/// Split of Ω₂ into a slow buffer touching the interface and the slow rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionPartition {
    pub slow_layers: usize,
    pub buffer_layers: usize,
}

impl RegionPartition {
    pub fn new(grid2: &StructuredGrid, buffer_layers: usize) -> Result<Self, DomainError> {
        if buffer_layers == 0 || buffer_layers > grid2.nz {
            return Err(DomainError::BufferDepth { buffer: buffer_layers, layers: grid2.nz });
        }
        Ok(Self { slow_layers: grid2.nz - buffer_layers, buffer_layers })
    }

    /// Ω₂ layers of the buffer (adjacent to the interface at the bottom of Ω₂).
    pub fn buffer_layer_range(&self) -> Range<usize> {
        0..self.buffer_layers
    }

    pub fn slow_layer_range(&self) -> Range<usize> {
        self.buffer_layers..self.buffer_layers + self.slow_layers
    }

    pub fn region_of_layer(&self, k: usize) -> Region {
        if k < self.buffer_layers {
            Region::Buffer
        } else {
            Region::Slow
        }
    }

    /// Ω₂ layer range of a slow-side region. `Fast` has no Ω₂ layers.
    pub fn layers(&self, region: Region) -> Range<usize> {
        match region {
            Region::Fast => 0..0,
            Region::Buffer => self.buffer_layer_range(),
            Region::Slow => self.slow_layer_range(),
        }
    }
}

/// Element counts `N_E` of each region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionCounts {
    pub slow: usize,
    pub buffer: usize,
    pub fast: usize,
    pub total: usize,
}

impl RegionCounts {
    pub fn get(&self, region: Region) -> usize {
        match region {
            Region::Fast => self.fast,
            Region::Buffer => self.buffer,
            Region::Slow => self.slow,
        }
    }
}

pub fn region_element_counts(
    partition: &RegionPartition,
    grid1: &StructuredGrid,
    grid2: &StructuredGrid,
) -> RegionCounts {
    let slow = partition.slow_layers * grid2.layer_len();
    let buffer = partition.buffer_layers * grid2.layer_len();
    let fast = grid1.len();
    RegionCounts { slow, buffer, fast, total: slow + buffer + fast }
}

/// Extents and element counts of one subdomain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubdomainConfig {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    pub cells: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainConfig {
    pub omega1: SubdomainConfig,
    pub omega2: SubdomainConfig,
    pub buffer_layers: usize,
}

/// The two conformal grids and the region split of Ω₂.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledDomain {
    pub grid1: StructuredGrid,
    pub grid2: StructuredGrid,
    pub partition: RegionPartition,
}

impl CoupledDomain {
    pub fn counts(&self) -> RegionCounts {
        region_element_counts(&self.partition, &self.grid1, &self.grid2)
    }

    /// z coordinate of the interface plane.
    pub fn interface_z(&self) -> f64 {
        self.grid2.lower[2]
    }
}

pub fn build_coupled_domain(config: &DomainConfig) -> Result<CoupledDomain, DomainError> {
    let a = &config.omega1;
    let b = &config.omega2;
    let grid1 = StructuredGrid::new(a.lower, a.upper, a.cells)?;
    let grid2 = StructuredGrid::new(b.lower, b.upper, b.cells)?;
    for d in 0..2 {
        if a.cells[d] != b.cells[d] {
            return Err(DomainError::NonConformal(format!(
                "axis {d}: {} vs {} elements",
                a.cells[d], b.cells[d]
            )));
        }
        if a.lower[d] != b.lower[d] || a.upper[d] != b.upper[d] {
            return Err(DomainError::NonConformal(format!(
                "axis {d}: extents ({}, {}) vs ({}, {})",
                a.lower[d], a.upper[d], b.lower[d], b.upper[d]
            )));
        }
    }
    if a.upper[2] != b.lower[2] {
        return Err(DomainError::NonConformal(format!(
            "lower domain top z = {} but upper domain bottom z = {}",
            a.upper[2], b.lower[2]
        )));
    }
    let partition = RegionPartition::new(&grid2, config.buffer_layers)?;
    Ok(CoupledDomain { grid1, grid2, partition })
}

/// Per-element conserved averages over one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedField {
    data: Vec<Conserved>,
}

impl ConservedField {
    pub fn zeros(len: usize) -> Self {
        Self { data: vec![[0.0; NVAR]; len] }
    }

    pub fn from_vec(data: Vec<Conserved>) -> Self {
        Self { data }
    }

    pub fn from_fn(grid: &StructuredGrid, mut f: impl FnMut(usize, usize, usize) -> Conserved) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for k in 0..grid.nz {
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    data.push(f(i, j, k));
                }
            }
        }
        Self { data }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[Conserved] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [Conserved] {
        &mut self.data
    }

    pub fn check_grid(&self, grid: &StructuredGrid) -> Result<(), DomainError> {
        if self.data.len() != grid.len() {
            return Err(DomainError::FieldSize { got: self.data.len(), expected: grid.len() });
        }
        Ok(())
    }

    /// `sum_l |K| q_l[var]`.
    pub fn integral(&self, grid: &StructuredGrid, var: usize) -> f64 {
        self.data.iter().map(|q| q[var]).sum::<f64>() * grid.volume()
    }

    pub fn mass(&self, grid: &StructuredGrid) -> f64 {
        self.integral(grid, 0)
    }

    pub fn energy(&self, grid: &StructuredGrid) -> f64 {
        self.integral(grid, 4)
    }

    /// First element whose density or pressure is not positive.
    pub fn validity_scan(&self, gamma: f64) -> Result<(), (usize, PhysicsError)> {
        for (idx, q) in self.data.iter().enumerate() {
            conserved_to_primitive(q, gamma).map_err(|e| (idx, e))?;
        }
        Ok(())
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Fields on Ω₁ and Ω₂ plus the simulation clock.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub field1: ConservedField,
    pub field2: ConservedField,
    pub t: f64,
}

impl CoupledState {
    pub fn check(&self, domain: &CoupledDomain) -> Result<(), DomainError> {
        self.field1.check_grid(&domain.grid1)?;
        self.field2.check_grid(&domain.grid2)
    }

    pub fn total_mass(&self, domain: &CoupledDomain) -> f64 {
        self.field1.mass(&domain.grid1) + self.field2.mass(&domain.grid2)
    }

    pub fn total_energy(&self, domain: &CoupledDomain) -> f64 {
        self.field1.energy(&domain.grid1) + self.field2.energy(&domain.grid2)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.field1.max_abs_diff(&other.field1).max(self.field2.max_abs_diff(&other.field2))
    }
}
