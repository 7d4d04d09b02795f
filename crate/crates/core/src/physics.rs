//! Pointwise compressible Navier-Stokes physics in nondimensional form.
//!
//! Conserved variables are `(rho, rho u, rho v, rho w, rho E)`. The ideal-gas
//! law in the chosen scaling reads `p = rho T / gamma = rho e (gamma - 1)`
//! and the nondimensional specific heat is `cp = 1 / (gamma - 1)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of conserved variables.
pub const NVAR: usize = 5;

/// Cell-averaged conserved state `(rho, rho u, rho v, rho w, rho E)`.
pub type Conserved = [f64; NVAR];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X = 0,
    Y = 1,
    Z = 2,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("non-physical state: rho = {rho:e}, p = {p:e}")]
    NonPhysicalState { rho: f64, p: f64 },
    #[error("invalid fluid parameter: {0}")]
    InvalidParams(String),
}

/// Material constants of one fluid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidParams {
    pub gamma: f64,
    /// Nondimensional dynamic viscosity `mu* / Re_r`.
    pub mu: f64,
    pub prandtl: f64,
    /// z-component of the nondimensional gravity vector (negative points down).
    pub gravity_z: f64,
}

impl FluidParams {
    pub fn new(gamma: f64, mu: f64, prandtl: f64, gravity_z: f64) -> Result<Self, PhysicsError> {
        if !(gamma > 1.0) {
            return Err(PhysicsError::InvalidParams(format!("gamma = {gamma} must exceed 1")));
        }
        if !(prandtl > 0.0) {
            return Err(PhysicsError::InvalidParams(format!("Pr = {prandtl} must be positive")));
        }
        if !(mu >= 0.0) {
            return Err(PhysicsError::InvalidParams(format!("mu = {mu} must be nonnegative")));
        }
        if !gravity_z.is_finite() {
            return Err(PhysicsError::InvalidParams("gravity must be finite".into()));
        }
        Ok(Self { gamma, mu, prandtl, gravity_z })
    }

    #[inline]
    pub fn cp(&self) -> f64 {
        1.0 / (self.gamma - 1.0)
    }

    /// Heat conductivity `cp mu / Pr`.
    #[inline]
    pub fn kappa(&self) -> f64 {
        self.cp() * self.mu / self.prandtl
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimitiveState {
    pub rho: f64,
    pub vel: [f64; 3],
    pub p: f64,
    pub t: f64,
}

impl PrimitiveState {
    /// Builds a state from density, velocity and temperature.
    pub fn from_rho_vel_t(rho: f64, vel: [f64; 3], t: f64, gamma: f64) -> Self {
        Self { rho, vel, p: eos_pressure(rho, t, gamma), t }
    }

    pub fn is_valid(&self) -> bool {
        self.rho > 0.0 && self.p > 0.0 && self.t > 0.0
    }

    pub fn internal_energy(&self, gamma: f64) -> f64 {
        self.p / (self.rho * (gamma - 1.0))
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * (self.vel[0] * self.vel[0] + self.vel[1] * self.vel[1] + self.vel[2] * self.vel[2])
    }

    /// Total specific enthalpy `H = E + p / rho`.
    pub fn enthalpy(&self, gamma: f64) -> f64 {
        self.internal_energy(gamma) + self.kinetic_energy() + self.p / self.rho
    }

    pub fn sound_speed(&self, gamma: f64) -> f64 {
        (gamma * self.p / self.rho).sqrt()
    }

    /// Largest characteristic speed `|u_n| + a` along `axis`.
    pub fn spectral_radius(&self, axis: Axis, gamma: f64) -> f64 {
        self.vel[axis.index()].abs() + self.sound_speed(gamma)
    }
}

/// Ideal-gas pressure `p = rho T / gamma`.
#[inline]
pub fn eos_pressure(rho: f64, t: f64, gamma: f64) -> f64 {
    rho * t / gamma
}

pub fn conserved_to_primitive(q: &Conserved, gamma: f64) -> Result<PrimitiveState, PhysicsError> {
    let rho = q[0];
    if !(rho > 0.0) {
        return Err(PhysicsError::NonPhysicalState { rho, p: f64::NAN });
    }
    let vel = [q[1] / rho, q[2] / rho, q[3] / rho];
    let ke = 0.5 * (vel[0] * vel[0] + vel[1] * vel[1] + vel[2] * vel[2]);
    let e = q[4] / rho - ke;
    let p = rho * e * (gamma - 1.0);
    if !(p > 0.0) {
        return Err(PhysicsError::NonPhysicalState { rho, p });
    }
    Ok(PrimitiveState { rho, vel, p, t: gamma * p / rho })
}

pub fn primitive_to_conserved(w: &PrimitiveState, gamma: f64) -> Conserved {
    let rho = w.rho;
    [
        rho,
        rho * w.vel[0],
        rho * w.vel[1],
        rho * w.vel[2],
        w.p / (gamma - 1.0) + rho * w.kinetic_energy(),
    ]
}

/// Directional Euler flux `(rho u_n, rho u u_n + p e_n, rho u_n H)`.
pub fn inviscid_flux(w: &PrimitiveState, axis: Axis, gamma: f64) -> Conserved {
    let d = axis.index();
    let un = w.vel[d];
    let mass = w.rho * un;
    let mut f = [
        mass,
        mass * w.vel[0],
        mass * w.vel[1],
        mass * w.vel[2],
        mass * w.enthalpy(gamma),
    ];
    f[1 + d] += w.p;
    f
}

/// Deviatoric viscous stress `mu (grad u + grad u^T - 2/3 I div u)`.
///
/// `grad_u[a][d]` is `d u_a / d x_d`.
pub fn viscous_stress(grad_u: &[[f64; 3]; 3], mu: f64) -> [[f64; 3]; 3] {
    let div = grad_u[0][0] + grad_u[1][1] + grad_u[2][2];
    let mut s = [[0.0; 3]; 3];
    for a in 0..3 {
        for d in 0..3 {
            s[a][d] = mu * (grad_u[a][d] + grad_u[d][a]);
        }
        s[a][a] -= mu * (2.0 / 3.0) * div;
    }
    s
}

/// Viscous flux along `axis`: `(0, sigma_{., n}, u . sigma_n - Pi_n)` with
/// heat flux `Pi = -kappa grad T`.
pub fn viscous_flux(
    vel: &[f64; 3],
    grad_u: &[[f64; 3]; 3],
    grad_t: &[f64; 3],
    params: &FluidParams,
    axis: Axis,
) -> Conserved {
    let d = axis.index();
    let s = viscous_stress(grad_u, params.mu);
    let heat = -params.kappa() * grad_t[d];
    [
        0.0,
        s[0][d],
        s[1][d],
        s[2][d],
        vel[0] * s[0][d] + vel[1] * s[1][d] + vel[2] * s[2][d] - heat,
    ]
}

/// Gravity source `(0, rho g, rho g . u)` with gravity `(0, 0, g_z)`.
///
/// `g_z` is the signed value that also enters the hydrostatic profile, so a
/// negative `g_z` pulls downward and balances a pressure that decreases
/// with height.
pub fn gravity_source(q: &Conserved, gravity_z: f64) -> Conserved {
    // rho * g_z * w == g_z * (rho w)
    [0.0, 0.0, 0.0, q[0] * gravity_z, gravity_z * q[3]]
}

/// Reference scales used to strip dimensions from physical quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceScales {
    pub rho: f64,
    pub velocity: f64,
    pub temperature: f64,
    pub length: f64,
    pub mu: f64,
}

impl ReferenceScales {
    /// Reference-Mach convention: scales taken from the far-field state of
    /// one fluid, with `u_r` equal to its sound speed `sqrt(gamma R T)`.
    pub fn from_far_field(rho: f64, temperature: f64, mu: f64, length: f64, gamma: f64, gas_constant: f64) -> Self {
        Self {
            rho,
            velocity: (gamma * gas_constant * temperature).sqrt(),
            temperature,
            length,
            mu,
        }
    }

    pub fn reynolds(&self) -> f64 {
        self.rho * self.velocity * self.length / self.mu
    }

    pub fn time(&self) -> f64 {
        self.length / self.velocity
    }

    pub fn density(&self, rho: f64) -> f64 {
        rho / self.rho
    }

    pub fn pressure(&self, p: f64) -> f64 {
        p / (self.rho * self.velocity * self.velocity)
    }

    pub fn velocity(&self, u: f64) -> f64 {
        u / self.velocity
    }

    pub fn coordinate(&self, x: f64) -> f64 {
        x / self.length
    }

    pub fn dimensionless_time(&self, t: f64) -> f64 {
        t / self.time()
    }

    pub fn temperature(&self, t: f64) -> f64 {
        t / self.temperature
    }

    pub fn gravity(&self, g: f64) -> f64 {
        g / (self.velocity * self.velocity / self.length)
    }

    /// `mu_tilde = (mu / mu_r) / Re_r`.
    pub fn viscosity(&self, mu: f64) -> f64 {
        (mu / self.mu) / self.reynolds()
    }

    /// `cp_tilde = T_r cp / u_r^2`.
    pub fn specific_heat(&self, cp: f64) -> f64 {
        self.temperature * cp / (self.velocity * self.velocity)
    }
}
