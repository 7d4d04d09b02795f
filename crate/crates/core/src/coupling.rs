//! Rigid-lid interface between the two subdomains.
//!
//! No mass crosses the interface and the normal velocity there is zero. The
//! fluids exchange horizontal momentum and heat through linear bulk
//! formulas driven by the jumps of the adjacent cell-center velocity and
//! temperature. Each interface face carries one shared flux value that both
//! sides apply with opposite orientation.

use rayon::prelude::*;
use thiserror::Error;

use crate::physics::{conserved_to_primitive, Conserved, PhysicsError, NVAR};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CouplingError {
    #[error("interface exchange between stage {fast} (fast) and stage {buffer} (buffer)")]
    StageMismatch { fast: usize, buffer: usize },
    #[error("interface layers have {got} elements, expected {expected}")]
    LayerSize { got: usize, expected: usize },
    #[error("non-physical state next to interface face {face} on side {side}: {source}")]
    NonPhysical { face: usize, side: u8, source: PhysicsError },
}

/// Linear transfer coefficients: interface flux per unit jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BulkCoefficients {
    pub b_u: f64,
    pub b_v: f64,
    pub b_t: f64,
}

fn harmonic(c1: f64, c2: f64, dz1: f64, dz2: f64) -> f64 {
    let den = dz2 * c1 + dz1 * c2;
    if den == 0.0 {
        0.0
    } else {
        2.0 * c1 * c2 / den
    }
}

/// `b_u = b_v = 2 mu1 mu2 / (dz2 mu1 + dz1 mu2)`, `b_T` likewise with kappa.
pub fn bulk_coefficients(mu1: f64, mu2: f64, kappa1: f64, kappa2: f64, dz1: f64, dz2: f64) -> BulkCoefficients {
    let b = harmonic(mu1, mu2, dz1, dz2);
    BulkCoefficients { b_u: b, b_v: b, b_t: harmonic(kappa1, kappa2, dz1, dz2) }
}

/// Horizontal velocity and temperature of the element next to one interface
/// face. The normal velocity is never exchanged.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InterfaceSample {
    pub u: f64,
    /// Zero in 2D, where only `(u, T)` is exchanged.
    pub v: f64,
    pub t: f64,
}

/// Samples of both sides at one stage, x-fastest over the interface faces.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceData {
    pub stage: usize,
    pub side1: Vec<InterfaceSample>,
    pub side2: Vec<InterfaceSample>,
}

fn sample_layer(layer: &[Conserved], gamma: f64, three_d: bool, side: u8) -> Result<Vec<InterfaceSample>, CouplingError> {
    layer
        .par_iter()
        .enumerate()
        .map(|(face, q)| {
            let w = conserved_to_primitive(q, gamma)
                .map_err(|source| CouplingError::NonPhysical { face, side, source })?;
            Ok(InterfaceSample { u: w.vel[0], v: if three_d { w.vel[1] } else { 0.0 }, t: w.t })
        })
        .collect()
}

/// Collects the interface samples of the top layer of Ω₁ (fast stage
/// `stage_fast`) and the bottom layer of Ω₂ (buffer stage `stage_buffer`).
pub fn exchange_interface_data(
    stage_fast: usize,
    top_layer_1: &[Conserved],
    stage_buffer: usize,
    bottom_layer_2: &[Conserved],
    gamma: f64,
    three_d: bool,
) -> Result<InterfaceData, CouplingError> {
    if stage_fast != stage_buffer {
        return Err(CouplingError::StageMismatch { fast: stage_fast, buffer: stage_buffer });
    }
    if top_layer_1.len() != bottom_layer_2.len() {
        return Err(CouplingError::LayerSize { got: bottom_layer_2.len(), expected: top_layer_1.len() });
    }
    Ok(InterfaceData {
        stage: stage_fast,
        side1: sample_layer(top_layer_1, gamma, three_d, 1)?,
        side2: sample_layer(bottom_layer_2, gamma, three_d, 2)?,
    })
}

/// Material data of one side needed by the interface formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceSide {
    pub mu: f64,
    pub kappa: f64,
    /// Element height next to the interface.
    pub dz: f64,
}

/// Fluxes on one interface face.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InterfaceFace {
    pub sigma_xz: f64,
    pub sigma_yz: f64,
    pub pi_z: f64,
    /// Interface velocity used in the energy row.
    pub u_w: f64,
    pub v_w: f64,
}

impl InterfaceFace {
    /// Viscous flux row `(0, sigma_xz, sigma_yz, 0, u_w sigma_xz + v_w sigma_yz - Pi_z)`
    /// in the +z direction, shared by both sides.
    pub fn viscous_row(&self) -> Conserved {
        [
            0.0,
            self.sigma_xz,
            self.sigma_yz,
            0.0,
            self.u_w * self.sigma_xz + self.v_w * self.sigma_yz - self.pi_z,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceFluxes {
    pub stage: usize,
    pub faces: Vec<InterfaceFace>,
}

impl InterfaceFluxes {
    pub fn viscous_rows(&self) -> Vec<Conserved> {
        self.faces.iter().map(InterfaceFace::viscous_row).collect()
    }
}

/// Which subdomain a wall state belongs to: 1 lies below the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfaceSideId {
    Lower,
    Upper,
}

/// Interface velocity and temperature seen from one side, extrapolated from
/// the cell center over half an element with the interface fluxes.
pub fn wall_states(
    cell: &InterfaceSample,
    sigma_xz: f64,
    sigma_yz: f64,
    pi_z: f64,
    side: InterfaceSideId,
    material: &InterfaceSide,
) -> InterfaceSample {
    let h = 0.5 * material.dz;
    let sign = match side {
        InterfaceSideId::Lower => 1.0,
        InterfaceSideId::Upper => -1.0,
    };
    let (u, v) = if material.mu > 0.0 {
        (cell.u + sign * sigma_xz * h / material.mu, cell.v + sign * sigma_yz * h / material.mu)
    } else {
        (cell.u, cell.v)
    };
    let t = if material.kappa > 0.0 { cell.t - sign * pi_z * h / material.kappa } else { cell.t };
    InterfaceSample { u, v, t }
}

/// Bulk fluxes on every interface face from the exchanged samples.
pub fn interface_fluxes(
    data: &InterfaceData,
    coeffs: &BulkCoefficients,
    lower: &InterfaceSide,
    upper: &InterfaceSide,
) -> InterfaceFluxes {
    let faces = data
        .side1
        .par_iter()
        .zip(&data.side2)
        .map(|(s1, s2)| {
            let sigma_xz = coeffs.b_u * (s2.u - s1.u);
            let sigma_yz = coeffs.b_v * (s2.v - s1.v);
            let pi_z = -coeffs.b_t * (s2.t - s1.t);
            let w1 = wall_states(s1, sigma_xz, sigma_yz, pi_z, InterfaceSideId::Lower, lower);
            let w2 = wall_states(s2, sigma_xz, sigma_yz, pi_z, InterfaceSideId::Upper, upper);
            InterfaceFace {
                sigma_xz,
                sigma_yz,
                pi_z,
                u_w: 0.5 * (w1.u + w2.u),
                v_w: 0.5 * (w1.v + w2.v),
            }
        })
        .collect();
    InterfaceFluxes { stage: data.stage, faces }
}

/// Momentum and energy rows `[x-momentum, y-momentum, energy]` of a +z flux.
pub fn exchanged_rows(h: &Conserved) -> [f64; 3] {
    [h[1], h[2], h[NVAR - 1]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{primitive_to_conserved, PrimitiveState};

    const MU1: f64 = 1.0 / 20000.0;
    const MU2: f64 = 1.0 / 5000.0;

    fn sides(dz1: f64, dz2: f64) -> (InterfaceSide, InterfaceSide) {
        let k = |mu: f64| mu * 2.5 / 0.72;
        (
            InterfaceSide { mu: MU1, kappa: k(MU1), dz: dz1 },
            InterfaceSide { mu: MU2, kappa: k(MU2), dz: dz2 },
        )
    }

    #[test]
    fn equal_media_degenerate_to_mu_over_dz() {
        let c = bulk_coefficients(0.3, 0.3, 0.1, 0.1, 0.05, 0.05);
        assert!((c.b_u - 0.3 / 0.05).abs() < 1e-13);
        assert!((c.b_t - 0.1 / 0.05).abs() < 1e-13);
    }

    #[test]
    fn convection_viscosities() {
        let c = bulk_coefficients(MU1, MU2, 1.0, 1.0, 0.05, 0.05);
        assert!((c.b_u - 1.6e-3).abs() < 1e-17);
        assert_eq!(c.b_u, c.b_v);
    }

    #[test]
    fn inviscid_side_decouples() {
        let c = bulk_coefficients(MU1, 0.0, 1.0, 0.0, 0.05, 0.05);
        assert_eq!(c.b_u, 0.0);
        assert_eq!(c.b_t, 0.0);
    }

    #[test]
    fn stage_guard() {
        let layer = vec![primitive_to_conserved(&PrimitiveState::from_rho_vel_t(1.0, [0.0; 3], 1.0, 1.4), 1.4); 3];
        let e = exchange_interface_data(2, &layer, 3, &layer, 1.4, false).unwrap_err();
        assert_eq!(e, CouplingError::StageMismatch { fast: 2, buffer: 3 });
    }

    #[test]
    fn normal_velocity_never_exchanged() {
        let w = PrimitiveState::from_rho_vel_t(1.0, [0.1, 0.2, 0.7], 1.0, 1.4);
        let layer = vec![primitive_to_conserved(&w, 1.4); 2];
        let d = exchange_interface_data(0, &layer, 0, &layer, 1.4, true).unwrap();
        assert!((d.side1[0].v - 0.2).abs() < 1e-15);
        let d2 = exchange_interface_data(0, &layer, 0, &layer, 1.4, false).unwrap();
        assert_eq!(d2.side2[1].v, 0.0);
    }

    #[test]
    fn zero_jump_zero_flux() {
        let s = InterfaceSample { u: 0.2, v: -0.1, t: 1.1 };
        let data = InterfaceData { stage: 0, side1: vec![s], side2: vec![s] };
        let (l, u) = sides(0.05, 0.025);
        let c = bulk_coefficients(l.mu, u.mu, l.kappa, u.kappa, l.dz, u.dz);
        let f = interface_fluxes(&data, &c, &l, &u);
        assert_eq!(f.faces[0].viscous_row(), [0.0; NVAR]);
    }

    #[test]
    fn warmer_upper_side_heats_lower() {
        let data = InterfaceData {
            stage: 0,
            side1: vec![InterfaceSample { u: 0.0, v: 0.0, t: 1.0 }],
            side2: vec![InterfaceSample { u: 1.0, v: 0.0, t: 1.2 }],
        };
        let (l, u) = sides(0.05, 0.05);
        let c = bulk_coefficients(l.mu, u.mu, l.kappa, u.kappa, l.dz, u.dz);
        let f = interface_fluxes(&data, &c, &l, &u).faces[0];
        assert!(f.pi_z < 0.0);
        assert!((f.sigma_xz - 1.6e-3).abs() < 1e-17);
        // the upward viscous row is positive energy into the lower side
        assert!(f.viscous_row()[4] > 0.0);
    }

    #[test]
    fn wall_states_agree_across_interface() {
        let s1 = InterfaceSample { u: 0.3, v: -0.2, t: 1.0 };
        let s2 = InterfaceSample { u: -0.1, v: 0.4, t: 1.3 };
        let (l, u) = sides(0.05, 0.025);
        let c = bulk_coefficients(l.mu, u.mu, l.kappa, u.kappa, l.dz, u.dz);
        let sx = c.b_u * (s2.u - s1.u);
        let sy = c.b_v * (s2.v - s1.v);
        let pz = -c.b_t * (s2.t - s1.t);
        let w1 = wall_states(&s1, sx, sy, pz, InterfaceSideId::Lower, &l);
        let w2 = wall_states(&s2, sx, sy, pz, InterfaceSideId::Upper, &u);
        assert!((w1.u - w2.u).abs() < 1e-15);
        assert!((w1.v - w2.v).abs() < 1e-15);
        assert!((w1.t - w2.t).abs() < 1e-15);
    }

    #[test]
    fn symmetric_media_wall_temperature_is_mean() {
        let s1 = InterfaceSample { u: 0.0, v: 0.0, t: 1.0 };
        let s2 = InterfaceSample { u: 0.0, v: 0.0, t: 1.4 };
        let m = InterfaceSide { mu: 1e-3, kappa: 2e-3, dz: 0.1 };
        let c = bulk_coefficients(m.mu, m.mu, m.kappa, m.kappa, m.dz, m.dz);
        let pz = -c.b_t * (s2.t - s1.t);
        let w = wall_states(&s1, 0.0, 0.0, pz, InterfaceSideId::Lower, &m);
        assert!((w.t - 1.2).abs() < 1e-15);
    }

    #[test]
    fn zero_fluxes_keep_cell_state() {
        let s = InterfaceSample { u: 0.3, v: 0.1, t: 0.9 };
        let (l, _) = sides(0.05, 0.05);
        assert_eq!(wall_states(&s, 0.0, 0.0, 0.0, InterfaceSideId::Lower, &l), s);
    }
}
