use std::ops::Range;

use rayon::prelude::*;

use super::{BoundarySpec, SpatialError};
use crate::domain::{ConservedField, StructuredGrid};
use crate::physics::{conserved_to_primitive, Axis, Conserved, PrimitiveState, NVAR};

/// Cell-centered gradients of the conserved variables, velocity and temperature.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellGradient {
    /// `dq[v][d] = d q_v / d x_d`
    pub dq: [[f64; 3]; NVAR],
    /// `du[a][d] = d u_a / d x_d`
    pub du: [[f64; 3]; 3],
    pub dt: [f64; 3],
}

/// Gradients over a contiguous band of z-layers.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub layers: Range<usize>,
    layer_len: usize,
    data: Vec<CellGradient>,
}

impl GradientField {
    /// Gradient of the element with global index `idx`.
    #[inline]
    pub fn at(&self, idx: usize) -> &CellGradient {
        &self.data[idx - self.layers.start * self.layer_len]
    }
}

/// Difference stencil `(a, b, scale)` such that `d f/dx_d ~ (f[b] - f[a]) * scale`.
///
/// Central on the interior and across periodic seams, one-sided at walls and
/// at the interface, zero along a collapsed axis.
#[inline]
pub(crate) fn stencil(
    grid: &StructuredGrid,
    bcs: &BoundarySpec,
    ijk: [usize; 3],
    axis: Axis,
) -> (usize, usize, f64) {
    let d = axis.index();
    let n = grid.cells()[d];
    let me = grid.index(ijk[0], ijk[1], ijk[2]);
    if axis == Axis::Y && !grid.is_3d() {
        return (me, me, 0.0);
    }
    let h = grid.spacing()[d];
    let periodic = bcs.is_periodic(axis);
    let c = ijk[d];
    let lo = if c > 0 { Some(c - 1) } else if periodic { Some(n - 1) } else { None };
    let hi = if c + 1 < n { Some(c + 1) } else if periodic { Some(0) } else { None };
    let at = |p: usize| {
        let mut q = ijk;
        q[d] = p;
        grid.index(q[0], q[1], q[2])
    };
    match (lo, hi) {
        (Some(l), Some(r)) => (at(l), at(r), 0.5 / h),
        (None, Some(r)) => (me, at(r), 1.0 / h),
        (Some(l), None) => (at(l), me, 1.0 / h),
        (None, None) => (me, me, 0.0),
    }
}

pub(crate) fn compute_gradients(
    grid: &StructuredGrid,
    bcs: &BoundarySpec,
    q: &[Conserved],
    prims: &[PrimitiveState],
    prim_base: usize,
    layers: Range<usize>,
) -> GradientField {
    let ll = grid.layer_len();
    let mut data = vec![CellGradient::default(); (layers.end - layers.start) * ll];
    let first = layers.start;
    data.par_chunks_mut(ll.max(1)).enumerate().for_each(|(off, slab)| {
        let k = first + off;
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let g = &mut slab[i + grid.nx * j];
                for axis in Axis::ALL {
                    let d = axis.index();
                    let (a, b, s) = stencil(grid, bcs, [i, j, k], axis);
                    if s == 0.0 {
                        continue;
                    }
                    let (qa, qb) = (&q[a], &q[b]);
                    for v in 0..NVAR {
                        g.dq[v][d] = (qb[v] - qa[v]) * s;
                    }
                    let (pa, pb) = (&prims[a - prim_base], &prims[b - prim_base]);
                    for c in 0..3 {
                        g.du[c][d] = (pb.vel[c] - pa.vel[c]) * s;
                    }
                    g.dt[d] = (pb.t - pa.t) * s;
                }
            }
        }
    });
    GradientField { layers, layer_len: ll, data }
}

/// Primitive states of layers `layers`, starting at element `layers.start * nx * ny`.
pub(crate) fn primitives(
    grid: &StructuredGrid,
    q: &[Conserved],
    gamma: f64,
    layers: Range<usize>,
) -> Result<Vec<PrimitiveState>, SpatialError> {
    let span = grid.layer_span(layers);
    let base = span.start;
    q[span]
        .par_iter()
        .enumerate()
        .map(|(off, s)| {
            conserved_to_primitive(s, gamma)
                .map_err(|source| SpatialError::NonPhysical { element: base + off, source })
        })
        .collect()
}

/// Cell gradients of every element of `field`.
pub fn ls_gradients(
    field: &ConservedField,
    grid: &StructuredGrid,
    bcs: &BoundarySpec,
    gamma: f64,
) -> Result<GradientField, SpatialError> {
    let prims = primitives(grid, field.as_slice(), gamma, 0..grid.nz)?;
    Ok(compute_gradients(grid, bcs, field.as_slice(), &prims, 0, 0..grid.nz))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::BoundaryKind;

    fn line_grid(n: usize) -> StructuredGrid {
        StructuredGrid::new([0.0; 3], [1.0, 1.0, 1.0], [n, 1, 1]).unwrap()
    }

    fn walls() -> BoundarySpec {
        BoundarySpec::boxed(BoundaryKind::Wall, BoundaryKind::Wall, BoundaryKind::Wall).unwrap()
    }

    fn density_field(grid: &StructuredGrid, f: impl Fn(f64) -> f64) -> ConservedField {
        ConservedField::from_fn(grid, |i, _, _| {
            let x = grid.center(i, 0, 0)[0];
            [f(x), 0.0, 0.0, 0.0, 10.0]
        })
    }

    #[test]
    fn linear_field_exact() {
        let g = line_grid(10);
        let f = density_field(&g, |x| 1.0 + 2.0 * x);
        let grads = ls_gradients(&f, &g, &walls(), 1.4).unwrap();
        for i in 0..10 {
            assert!((grads.at(i).dq[0][0] - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_field_zero() {
        let g = line_grid(6);
        let f = density_field(&g, |_| 1.3);
        let grads = ls_gradients(&f, &g, &walls(), 1.4).unwrap();
        for i in 0..6 {
            assert_eq!(grads.at(i).dq[0], [0.0; 3]);
            assert_eq!(grads.at(i).dt, [0.0; 3]);
        }
    }

    #[test]
    fn quadratic_cell_averages() {
        // cell averages of x^2 over [x_i - h/2, x_i + h/2] are x_i^2 + h^2/12
        let g = line_grid(8);
        let h = g.dx();
        let f = density_field(&g, |x| 1.0 + x * x + h * h / 12.0);
        let grads = ls_gradients(&f, &g, &walls(), 1.4).unwrap();
        for i in 1..7 {
            let x = g.center(i, 0, 0)[0];
            assert!((grads.at(i).dq[0][0] - 2.0 * x).abs() < 1e-12);
        }
    }

    #[test]
    fn collapsed_axis_has_zero_gradient() {
        let g = StructuredGrid::new([0.0; 3], [1.0; 3], [3, 1, 3]).unwrap();
        let f = ConservedField::from_fn(&g, |i, _, k| [1.0 + 0.1 * (i + k) as f64, 0.0, 0.0, 0.0, 5.0]);
        let grads = ls_gradients(&f, &g, &walls(), 1.4).unwrap();
        for idx in 0..g.len() {
            assert_eq!(grads.at(idx).dq[0][1], 0.0);
        }
    }

    #[test]
    fn periodic_wraps_central() {
        let g = line_grid(4);
        let f = ConservedField::from_vec(
            [1.0, 2.0, 3.0, 4.0].iter().map(|r| [*r, 0.0, 0.0, 0.0, 10.0]).collect(),
        );
        let bcs = BoundarySpec::periodic();
        let grads = ls_gradients(&f, &g, &bcs, 1.4).unwrap();
        // (q1 - q3) / (2h) with h = 1/4
        assert!((grads.at(0).dq[0][0] - (2.0 - 4.0) * 2.0).abs() < 1e-12);
    }
}
