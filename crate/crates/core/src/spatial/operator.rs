use std::ops::Range;

use rayon::prelude::*;

use super::flux::lax_friedrichs_primitive;
use super::gradient::{compute_gradients, primitives};
use super::{
    reconstruct_face_states, viscous_face_flux, wall_ghost, BoundaryKind, BoundarySpec, CellGradient,
    GradientField, Side, SpatialError,
};
use crate::domain::StructuredGrid;
use crate::physics::{
    conserved_to_primitive, gravity_source, Axis, Conserved, FluidParams, PrimitiveState, NVAR,
};

/// Numerical fluxes `F*`, `G*`, `H*` on every face bounding a band of layers.
///
/// Each face is stored once; element `(i, j, k)` is bounded by x faces `i`
/// and `i + 1`, and likewise along y and z.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceFluxSet {
    pub layers: Range<usize>,
    nx: usize,
    ny: usize,
    x: Vec<Conserved>,
    y: Vec<Conserved>,
    z: Vec<Conserved>,
}

impl FaceFluxSet {
    /// x face `i` (0..=nx) in row `(j, k)`.
    #[inline]
    pub fn x_face(&self, i: usize, j: usize, k: usize) -> &Conserved {
        let kk = k - self.layers.start;
        &self.x[i + (self.nx + 1) * (j + self.ny * kk)]
    }

    /// y face `j` (0..=ny) in column `(i, k)`; `None` on a collapsed y axis.
    #[inline]
    pub fn y_face(&self, i: usize, j: usize, k: usize) -> Option<&Conserved> {
        if self.y.is_empty() {
            return None;
        }
        let kk = k - self.layers.start;
        Some(&self.y[i + self.nx * (j + (self.ny + 1) * kk)])
    }

    /// z face `k` (`layers.start..=layers.end`) at column `(i, j)`.
    #[inline]
    pub fn z_face(&self, i: usize, j: usize, k: usize) -> &Conserved {
        let kk = k - self.layers.start;
        &self.z[i + self.nx * (j + self.ny * kk)]
    }

    /// All z fluxes on face plane `k`, x-fastest.
    pub fn z_plane(&self, k: usize) -> &[Conserved] {
        let ll = self.nx * self.ny;
        let kk = k - self.layers.start;
        &self.z[kk * ll..(kk + 1) * ll]
    }
}

/// Spatial operator of one subdomain.
#[derive(Debug, Clone, Copy)]
pub struct DomainOperator<'a> {
    pub grid: &'a StructuredGrid,
    pub params: &'a FluidParams,
    pub bcs: &'a BoundarySpec,
}

struct Ctx<'a> {
    grid: &'a StructuredGrid,
    params: &'a FluidParams,
    bcs: &'a BoundarySpec,
    q: &'a [Conserved],
    prims: &'a [PrimitiveState],
    prim_base: usize,
    grads: &'a GradientField,
    interface: Option<&'a [Conserved]>,
}

fn unit(axis: Axis) -> [f64; 3] {
    let mut n = [0.0; 3];
    n[axis.index()] = 1.0;
    n
}

fn ghost_primitive(w: &PrimitiveState) -> PrimitiveState {
    PrimitiveState { rho: w.rho, vel: [-w.vel[0], -w.vel[1], -w.vel[2]], p: w.p, t: w.t }
}

/// Gradient of the mirror cell behind a wall normal to `d`: tangential
/// velocity derivatives flip with the velocity, temperature ones are kept.
fn ghost_gradient(g: &CellGradient, d: usize) -> CellGradient {
    let mut out = CellGradient::default();
    for e in 0..3 {
        if e == d {
            continue;
        }
        for a in 0..3 {
            out.du[a][e] = -g.du[a][e];
        }
        out.dt[e] = g.dt[e];
    }
    out
}

impl Ctx<'_> {
    #[inline]
    fn prim(&self, idx: usize) -> &PrimitiveState {
        &self.prims[idx - self.prim_base]
    }

    fn face_primitive(&self, q: &Conserved, element: usize) -> Result<PrimitiveState, SpatialError> {
        conserved_to_primitive(q, self.params.gamma)
            .map_err(|source| SpatialError::NonPhysicalFace { element, source })
    }

    fn interior(&self, l: usize, r: usize, axis: Axis) -> Result<Conserved, SpatialError> {
        let d = axis.index();
        let h = self.grid.spacing()[d];
        let (gl, gr) = (self.grads.at(l), self.grads.at(r));
        let (ql, qr) = reconstruct_face_states(&self.q[l], gl, &self.q[r], gr, axis, h);
        let wl = self.face_primitive(&ql, l)?;
        let wr = self.face_primitive(&qr, r)?;
        let inv = lax_friedrichs_primitive(&ql, &qr, &wl, &wr, unit(axis), self.params.gamma);
        let vis = viscous_face_flux(self.prim(l), gl, self.prim(r), gr, axis, h, self.params);
        Ok(sub(&inv, &vis))
    }

    /// Own reconstructed state on the `side` face of element `c`.
    fn face_state(&self, c: usize, axis: Axis, side: Side) -> Conserved {
        let d = axis.index();
        let half = 0.5 * self.grid.spacing()[d];
        let g = self.grads.at(c);
        let sign = if side == Side::Hi { 1.0 } else { -1.0 };
        let mut s = self.q[c];
        for v in 0..NVAR {
            s[v] += sign * g.dq[v][d] * half;
        }
        s
    }

    fn wall(&self, c: usize, axis: Axis, side: Side) -> Result<Conserved, SpatialError> {
        let d = axis.index();
        let h = self.grid.spacing()[d];
        let q_in = self.face_state(c, axis, side);
        let w_in = self.face_primitive(&q_in, c)?;
        let q_g = wall_ghost(&q_in);
        let w_g = ghost_primitive(&w_in);
        let wc = self.prim(c);
        let gc = self.grads.at(c);
        let wcg = ghost_primitive(wc);
        let gcg = ghost_gradient(gc, d);
        let gamma = self.params.gamma;
        let n = unit(axis);
        let (inv, vis) = match side {
            Side::Lo => (
                lax_friedrichs_primitive(&q_g, &q_in, &w_g, &w_in, n, gamma),
                viscous_face_flux(&wcg, &gcg, wc, gc, axis, h, self.params),
            ),
            Side::Hi => (
                lax_friedrichs_primitive(&q_in, &q_g, &w_in, &w_g, n, gamma),
                viscous_face_flux(wc, gc, &wcg, &gcg, axis, h, self.params),
            ),
        };
        Ok(sub(&inv, &vis))
    }

    fn interface(&self, c: usize, column: usize, side: Side) -> Result<Conserved, SpatialError> {
        let rows = self.interface.ok_or(SpatialError::MissingInterface)?;
        let q_in = self.face_state(c, Axis::Z, side);
        let p = self.face_primitive(&q_in, c)?.p;
        let hv = rows[column];
        Ok([-hv[0], -hv[1], -hv[2], p - hv[3], -hv[4]])
    }

    fn boundary(&self, c: usize, axis: Axis, side: Side) -> Result<Conserved, SpatialError> {
        match self.bcs.kind(axis, side) {
            BoundaryKind::Wall => self.wall(c, axis, side),
            BoundaryKind::Interface => {
                let column = c % self.grid.layer_len();
                self.interface(c, column, side)
            }
            BoundaryKind::Periodic => unreachable!("periodic faces are interior"),
        }
    }

    /// Flux on face `f` (0..=n) of the line of elements `at(0..n)` along `axis`.
    fn line_face(
        &self,
        f: usize,
        n: usize,
        axis: Axis,
        at: impl Fn(usize) -> usize,
    ) -> Result<Conserved, SpatialError> {
        if self.bcs.is_periodic(axis) {
            let r = f % n;
            let l = (f + n - 1) % n;
            return self.interior(at(l), at(r), axis);
        }
        if f == 0 {
            self.boundary(at(0), axis, Side::Lo)
        } else if f == n {
            self.boundary(at(n - 1), axis, Side::Hi)
        } else {
            self.interior(at(f - 1), at(f), axis)
        }
    }
}

#[inline]
fn sub(a: &Conserved, b: &Conserved) -> Conserved {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3], a[4] - b[4]]
}

fn first_error(results: Vec<Result<(), SpatialError>>) -> Result<(), SpatialError> {
    results.into_iter().collect()
}

impl<'a> DomainOperator<'a> {
    pub fn new(grid: &'a StructuredGrid, params: &'a FluidParams, bcs: &'a BoundarySpec) -> Self {
        Self { grid, params, bcs }
    }

    /// Tendencies `-div F* + S` of the elements in z-layers `layers`, written
    /// to `out` (one entry per element of the band). Elements outside the band
    /// enter only through gradients and face states.
    ///
    /// `interface` holds the shared viscous row of every interface face
    /// (x-fastest), required when a z boundary is an interface.
    pub fn evaluate(
        &self,
        q: &[Conserved],
        interface: Option<&[Conserved]>,
        layers: Range<usize>,
        out: &mut [Conserved],
    ) -> Result<FaceFluxSet, SpatialError> {
        let grid = self.grid;
        let (nx, ny, nz) = (grid.nx, grid.ny, grid.nz);
        let ll = grid.layer_len();
        debug_assert_eq!(q.len(), grid.len());
        debug_assert_eq!(out.len(), (layers.end - layers.start) * ll);
        if layers.is_empty() {
            return Ok(FaceFluxSet { layers, nx, ny, x: vec![], y: vec![], z: vec![] });
        }
        if let Some(rows) = interface {
            debug_assert_eq!(rows.len(), ll);
        }

        let (prim_layers, grad_layers) = if self.bcs.is_periodic(Axis::Z) {
            (0..nz, 0..nz)
        } else {
            (
                layers.start.saturating_sub(2)..(layers.end + 2).min(nz),
                layers.start.saturating_sub(1)..(layers.end + 1).min(nz),
            )
        };
        let prim_base = prim_layers.start * ll;
        let prims = primitives(grid, q, self.params.gamma, prim_layers)?;
        let grads = compute_gradients(grid, self.bcs, q, &prims, prim_base, grad_layers);
        let ctx = Ctx {
            grid,
            params: self.params,
            bcs: self.bcs,
            q,
            prims: &prims,
            prim_base,
            grads: &grads,
            interface,
        };
        let k0 = layers.start;
        let nl = layers.end - layers.start;

        let mut x = vec![[0.0; NVAR]; (nx + 1) * ny * nl];
        let res = x
            .par_chunks_mut((nx + 1) * ny)
            .enumerate()
            .map(|(kk, slab)| {
                let k = k0 + kk;
                for j in 0..ny {
                    for f in 0..=nx {
                        slab[f + (nx + 1) * j] = ctx.line_face(f, nx, Axis::X, |i| grid.index(i, j, k))?;
                    }
                }
                Ok(())
            })
            .collect();
        first_error(res)?;

        let mut y = Vec::new();
        if grid.is_3d() {
            y = vec![[0.0; NVAR]; nx * (ny + 1) * nl];
            let res = y
                .par_chunks_mut(nx * (ny + 1))
                .enumerate()
                .map(|(kk, slab)| {
                    let k = k0 + kk;
                    for f in 0..=ny {
                        for i in 0..nx {
                            slab[i + nx * f] = ctx.line_face(f, ny, Axis::Y, |j| grid.index(i, j, k))?;
                        }
                    }
                    Ok(())
                })
                .collect();
            first_error(res)?;
        }

        let mut z = vec![[0.0; NVAR]; ll * (nl + 1)];
        let res = z
            .par_chunks_mut(ll)
            .enumerate()
            .map(|(kk, slab)| {
                let f = k0 + kk;
                for j in 0..ny {
                    for i in 0..nx {
                        slab[i + nx * j] = ctx.line_face(f, nz, Axis::Z, |k| grid.index(i, j, k))?;
                    }
                }
                Ok(())
            })
            .collect();
        first_error(res)?;

        let faces = FaceFluxSet { layers: layers.clone(), nx, ny, x, y, z };
        let [dx, dy, dz] = grid.spacing();
        let g = self.params.gravity_z;
        out.par_chunks_mut(ll).enumerate().for_each(|(kk, slab)| {
            let k = k0 + kk;
            for j in 0..ny {
                for i in 0..nx {
                    let idx = grid.index(i, j, k);
                    let (xl, xr) = (faces.x_face(i, j, k), faces.x_face(i + 1, j, k));
                    let (zl, zr) = (faces.z_face(i, j, k), faces.z_face(i, j, k + 1));
                    let src = gravity_source(&q[idx], g);
                    let mut t = [0.0; NVAR];
                    for v in 0..NVAR {
                        t[v] = src[v] - (xr[v] - xl[v]) / dx - (zr[v] - zl[v]) / dz;
                    }
                    if let (Some(yl), Some(yr)) = (faces.y_face(i, j, k), faces.y_face(i, j + 1, k)) {
                        for v in 0..NVAR {
                            t[v] -= (yr[v] - yl[v]) / dy;
                        }
                    }
                    slab[i + nx * j] = t;
                }
            }
        });
        Ok(faces)
    }

    /// Tendencies of every element.
    pub fn evaluate_all(
        &self,
        q: &[Conserved],
        interface: Option<&[Conserved]>,
    ) -> Result<(Vec<Conserved>, FaceFluxSet), SpatialError> {
        let mut out = vec![[0.0; NVAR]; q.len()];
        let faces = self.evaluate(q, interface, 0..self.grid.nz, &mut out)?;
        Ok((out, faces))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ConservedField;
    use crate::physics::primitive_to_conserved;

    const G: f64 = 1.4;

    fn walls() -> BoundarySpec {
        BoundarySpec::boxed(BoundaryKind::Wall, BoundaryKind::Wall, BoundaryKind::Wall).unwrap()
    }

    fn params(g: f64) -> FluidParams {
        FluidParams::new(G, 1e-3, 0.72, g).unwrap()
    }

    fn smooth(grid: &StructuredGrid) -> ConservedField {
        ConservedField::from_fn(grid, |i, j, k| {
            let [x, y, z] = grid.center(i, j, k);
            let w = PrimitiveState::from_rho_vel_t(
                1.0 + 0.1 * (x + 2.0 * z).sin(),
                [0.1 * z.cos(), 0.05 * x.sin(), 0.05 * (y + x).cos()],
                1.0 + 0.05 * (x * z).cos(),
                G,
            );
            primitive_to_conserved(&w, G)
        })
    }

    #[test]
    fn rest_state_is_steady() {
        let grid = StructuredGrid::new([0.0; 3], [1.0, 1.0, 2.0], [5, 3, 6]).unwrap();
        let q = vec![primitive_to_conserved(&PrimitiveState::from_rho_vel_t(1.0, [0.0; 3], 1.0, G), G); grid.len()];
        let p = params(0.0);
        let bcs = walls();
        let (t, _) = DomainOperator::new(&grid, &p, &bcs).evaluate_all(&q, None).unwrap();
        for v in t.iter().flatten() {
            assert!(v.abs() < 1e-14, "{v}");
        }
    }

    #[test]
    fn periodic_mass_telescopes() {
        let grid = StructuredGrid::new([0.0; 3], [3.0, 2.0, 4.0], [6, 5, 7]).unwrap();
        let f = smooth(&grid);
        let p = params(0.0);
        let bcs = BoundarySpec::periodic();
        let (t, _) = DomainOperator::new(&grid, &p, &bcs).evaluate_all(f.as_slice(), None).unwrap();
        let total: f64 = t.iter().map(|r| r[0]).sum::<f64>() * grid.volume();
        assert!(total.abs() < 1e-14, "{total}");
    }

    #[test]
    fn walls_block_mass_and_energy() {
        let grid = StructuredGrid::new([0.0; 3], [3.0, 2.0, 4.0], [6, 5, 7]).unwrap();
        let f = smooth(&grid);
        let p = params(0.0);
        let bcs = walls();
        let (t, faces) = DomainOperator::new(&grid, &p, &bcs).evaluate_all(f.as_slice(), None).unwrap();
        for j in 0..grid.ny {
            for k in 0..grid.nz {
                assert_eq!(faces.x_face(0, j, k)[0], 0.0);
                assert_eq!(faces.x_face(grid.nx, j, k)[4], 0.0);
            }
        }
        let mass: f64 = t.iter().map(|r| r[0]).sum::<f64>() * grid.volume();
        let energy: f64 = t.iter().map(|r| r[4]).sum::<f64>() * grid.volume();
        assert!(mass.abs() < 1e-13, "{mass}");
        assert!(energy.abs() < 1e-13, "{energy}");
    }

    #[test]
    fn layer_band_matches_full_evaluation() {
        let grid = StructuredGrid::new([0.0; 3], [3.0, 2.0, 4.0], [6, 4, 9]).unwrap();
        let f = smooth(&grid);
        let p = params(-0.01);
        let bcs = walls();
        let op = DomainOperator::new(&grid, &p, &bcs);
        let (full, _) = op.evaluate_all(f.as_slice(), None).unwrap();
        let ll = grid.layer_len();
        for band in [0..3, 3..7, 7..9, 4..5] {
            let mut out = vec![[0.0; NVAR]; band.len() * ll];
            op.evaluate(f.as_slice(), None, band.clone(), &mut out).unwrap();
            assert_eq!(&out[..], &full[band.start * ll..band.end * ll]);
        }
    }

    #[test]
    fn interface_requires_rows() {
        let grid = StructuredGrid::new([0.0; 3], [1.0; 3], [2, 1, 2]).unwrap();
        let f = smooth(&grid);
        let p = params(0.0);
        let bcs = BoundarySpec::boxed(BoundaryKind::Wall, BoundaryKind::Wall, BoundaryKind::Interface).unwrap();
        let r = DomainOperator::new(&grid, &p, &bcs).evaluate_all(f.as_slice(), None);
        assert_eq!(r.unwrap_err(), SpatialError::MissingInterface);
    }

    #[test]
    fn nonphysical_element_reported() {
        let grid = StructuredGrid::new([0.0; 3], [1.0; 3], [3, 1, 3]).unwrap();
        let mut f = smooth(&grid);
        f.as_mut_slice()[4][0] = -1.0;
        let p = params(0.0);
        let bcs = walls();
        let r = DomainOperator::new(&grid, &p, &bcs).evaluate_all(f.as_slice(), None);
        assert!(matches!(r, Err(SpatialError::NonPhysical { element: 4, .. })));
    }
}
