use super::CellGradient;
use crate::physics::{
    conserved_to_primitive, inviscid_flux, viscous_flux, Axis, Conserved, FluidParams, PhysicsError,
    PrimitiveState, NVAR,
};

/// Euler flux projected on `n`: `sum_d F_d n_d`.
pub fn normal_flux(w: &PrimitiveState, n: [f64; 3], gamma: f64) -> Conserved {
    let mut f = [0.0; NVAR];
    for axis in Axis::ALL {
        let nd = n[axis.index()];
        if nd == 0.0 {
            continue;
        }
        let fd = inviscid_flux(w, axis, gamma);
        for v in 0..NVAR {
            f[v] += fd[v] * nd;
        }
    }
    f
}

/// Roe-averaged state: `sqrt(rho)`-weighted velocity and enthalpy.
pub fn roe_average(l: &PrimitiveState, r: &PrimitiveState, gamma: f64) -> PrimitiveState {
    let sl = l.rho.sqrt();
    let sr = r.rho.sqrt();
    let inv = 1.0 / (sl + sr);
    let mut vel = [0.0; 3];
    for d in 0..3 {
        vel[d] = (sl * l.vel[d] + sr * r.vel[d]) * inv;
    }
    let h = (sl * l.enthalpy(gamma) + sr * r.enthalpy(gamma)) * inv;
    let ke = 0.5 * (vel[0] * vel[0] + vel[1] * vel[1] + vel[2] * vel[2]);
    let a2 = ((gamma - 1.0) * (h - ke)).max(0.0);
    let rho = sl * sr;
    // a^2 = gamma p / rho and T = gamma p / rho
    PrimitiveState { rho, vel, p: rho * a2 / gamma, t: a2 }
}

#[inline]
fn normal_speed(w: &PrimitiveState, n: [f64; 3], gamma: f64) -> f64 {
    let un = w.vel[0] * n[0] + w.vel[1] * n[1] + w.vel[2] * n[2];
    un.abs() + w.sound_speed(gamma)
}

/// Local Lax-Friedrichs flux through a face with unit normal `normal`
/// pointing from the left state to the right state.
pub fn lax_friedrichs_flux(
    q_l: &Conserved,
    q_r: &Conserved,
    normal: [f64; 3],
    gamma: f64,
) -> Result<Conserved, PhysicsError> {
    let wl = conserved_to_primitive(q_l, gamma)?;
    let wr = conserved_to_primitive(q_r, gamma)?;
    Ok(lax_friedrichs_primitive(q_l, q_r, &wl, &wr, normal, gamma))
}

#[inline]
pub(crate) fn lax_friedrichs_primitive(
    q_l: &Conserved,
    q_r: &Conserved,
    wl: &PrimitiveState,
    wr: &PrimitiveState,
    normal: [f64; 3],
    gamma: f64,
) -> Conserved {
    let roe = roe_average(wl, wr, gamma);
    let lambda = normal_speed(wl, normal, gamma)
        .max(normal_speed(wr, normal, gamma))
        .max(normal_speed(&roe, normal, gamma));
    let fl = normal_flux(wl, normal, gamma);
    let fr = normal_flux(wr, normal, gamma);
    let mut f = [0.0; NVAR];
    for v in 0..NVAR {
        f[v] = 0.5 * (fl[v] + fr[v]) + 0.5 * lambda * (q_l[v] - q_r[v]);
    }
    f
}

/// Linear extrapolation of two neighbouring cell averages to their shared
/// face along `axis`; `h` is the spacing along that axis.
pub fn reconstruct_face_states(
    q_left_cell: &Conserved,
    g_left: &CellGradient,
    q_right_cell: &Conserved,
    g_right: &CellGradient,
    axis: Axis,
    h: f64,
) -> (Conserved, Conserved) {
    let d = axis.index();
    let half = 0.5 * h;
    let mut l = *q_left_cell;
    let mut r = *q_right_cell;
    for v in 0..NVAR {
        l[v] += g_left.dq[v][d] * half;
        r[v] -= g_right.dq[v][d] * half;
    }
    (l, r)
}

/// Viscous flux through an `axis` face from common face states: averaged
/// velocity, compact normal gradients, averaged tangential gradients.
pub fn viscous_face_flux(
    w_left: &PrimitiveState,
    g_left: &CellGradient,
    w_right: &PrimitiveState,
    g_right: &CellGradient,
    axis: Axis,
    h: f64,
    params: &FluidParams,
) -> Conserved {
    if params.mu == 0.0 {
        return [0.0; NVAR];
    }
    let d = axis.index();
    let mut vel = [0.0; 3];
    let mut grad_u = [[0.0; 3]; 3];
    let mut grad_t = [0.0; 3];
    for a in 0..3 {
        vel[a] = 0.5 * (w_left.vel[a] + w_right.vel[a]);
        for e in 0..3 {
            grad_u[a][e] = if e == d {
                (w_right.vel[a] - w_left.vel[a]) / h
            } else {
                0.5 * (g_left.du[a][e] + g_right.du[a][e])
            };
        }
    }
    for e in 0..3 {
        grad_t[e] = if e == d {
            (w_right.t - w_left.t) / h
        } else {
            0.5 * (g_left.dt[e] + g_right.dt[e])
        };
    }
    viscous_flux(&vel, &grad_u, &grad_t, params, axis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::primitive_to_conserved;

    const G: f64 = 1.4;

    fn state(rho: f64, vel: [f64; 3], p: f64) -> Conserved {
        primitive_to_conserved(&PrimitiveState { rho, vel, p, t: G * p / rho }, G)
    }

    #[test]
    fn consistency() {
        let q = state(1.1, [0.3, -0.2, 0.1], 0.8);
        let f = lax_friedrichs_flux(&q, &q, [1.0, 0.0, 0.0], G).unwrap();
        let w = conserved_to_primitive(&q, G).unwrap();
        let exact = inviscid_flux(&w, Axis::X, G);
        for v in 0..NVAR {
            assert!((f[v] - exact[v]).abs() < 1e-15);
        }
    }

    #[test]
    fn antisymmetry() {
        let a = state(1.0, [0.1, 0.2, -0.3], 0.7);
        let b = state(0.7, [-0.2, 0.0, 0.4], 0.5);
        let f = lax_friedrichs_flux(&a, &b, [0.0, 0.0, 1.0], G).unwrap();
        let g = lax_friedrichs_flux(&b, &a, [0.0, 0.0, -1.0], G).unwrap();
        for v in 0..NVAR {
            assert!((f[v] + g[v]).abs() < 1e-15);
        }
    }

    #[test]
    fn roe_velocity_weighting() {
        let l = PrimitiveState::from_rho_vel_t(1.0, [0.0; 3], 1.0, G);
        let r = PrimitiveState::from_rho_vel_t(4.0, [3.0, 0.0, 0.0], 1.0, G);
        let roe = roe_average(&l, &r, G);
        assert!((roe.vel[0] - 2.0).abs() < 1e-15);
        assert!((roe.rho - 2.0).abs() < 1e-15);
    }

    #[test]
    fn roe_of_equal_states() {
        let w = PrimitiveState::from_rho_vel_t(1.3, [0.2, -0.1, 0.4], 1.1, G);
        let roe = roe_average(&w, &w, G);
        assert!((roe.rho - w.rho).abs() < 1e-15);
        assert!((roe.p - w.p).abs() < 1e-14);
        for d in 0..3 {
            assert!((roe.vel[d] - w.vel[d]).abs() < 1e-15);
        }
    }

    #[test]
    fn step_profile_reconstruction() {
        let h = 0.5;
        let cell = |r: f64| [r, 0.0, 0.0, 0.0, 2.0];
        let grad = |s: f64| {
            let mut g = CellGradient::default();
            g.dq[0][0] = s;
            g
        };
        // (1, 1, 2, 2): central gradients at the two middle cells are (2 - 1) / (2h)
        let s = 1.0 / (2.0 * h);
        let (l, r) = reconstruct_face_states(&cell(1.0), &grad(s), &cell(2.0), &grad(s), Axis::X, h);
        assert!((l[0] - 1.25).abs() < 1e-15);
        assert!((r[0] - 1.75).abs() < 1e-15);
    }

    #[test]
    fn linear_shear_stress() {
        let p = FluidParams::new(G, 2e-3, 0.72, 0.0).unwrap();
        let h = 0.1;
        let lo = PrimitiveState::from_rho_vel_t(1.0, [0.3, 0.0, 0.0], 1.0, G);
        let hi = PrimitiveState::from_rho_vel_t(1.0, [0.3 + h, 0.0, 0.0], 1.0, G);
        let mut g = CellGradient::default();
        g.du[0][2] = 1.0;
        let f = viscous_face_flux(&lo, &g, &hi, &g, Axis::Z, h, &p);
        assert!((f[1] - p.mu).abs() < 1e-15);
        assert_eq!(f[0], 0.0);
        assert_eq!(f[3], 0.0);
    }

    #[test]
    fn linear_temperature_heat_flux() {
        let p = FluidParams::new(G, 1e-3, 0.72, 0.0).unwrap();
        let h = 0.2;
        let lo = PrimitiveState::from_rho_vel_t(1.0, [0.0; 3], 1.0, G);
        let hi = PrimitiveState::from_rho_vel_t(1.0, [0.0; 3], 1.0 + h, G);
        let mut g = CellGradient::default();
        g.dt[0] = 1.0;
        let fx = viscous_face_flux(&lo, &g, &hi, &g, Axis::X, h, &p);
        assert!((fx[4] - p.kappa()).abs() < 1e-15);
        let fz = viscous_face_flux(&lo, &g, &lo, &g, Axis::Z, h, &p);
        assert_eq!(fz[4], 0.0);
    }
}
