//! Initial conditions and run configurations.
//!
//! Every scenario starts from the neutrally stratified base state
//!
//! ```text
//! Psi = 1 + g z / (cp (1 + dtheta / theta0))
//! T   = (1 + dtheta / theta0) Psi
//! p   = Psi^(gamma / (gamma - 1)) / gamma
//! rho = theta0 / (theta0 + dtheta) Psi^(1 / (gamma - 1))
//! ```
//!
//! with optional cosine potential-temperature bubbles, a horizontal jet and a
//! Gaussian vortex layered on top. The KHI and wind-driven setups are
//! parameterized substitutes: their exact published initial data is not
//! available, so only conservation properties are checked against them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{build_coupled_domain, ConservedField, CoupledState, DomainConfig, DomainError, StructuredGrid, SubdomainConfig};
use crate::integrator::{IntegrateOptions, Scheme};
use crate::physics::{primitive_to_conserved, FluidParams, PhysicsError, PrimitiveState};
use crate::spatial::{BoundaryKind, BoundarySpec, CoupledSystem, SpatialError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("invalid scenario configuration: {0}")]
    Config(String),
    #[error("Psi = {psi} <= 0 at z = {z}: the domain is too deep for the chosen gravity")]
    NegativePsi { z: f64, psi: f64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error(transparent)]
    Spatial(#[from] SpatialError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    ThermalConvection,
    Khi,
    ThermalBubble3d,
    WindDriven3d,
    Manufactured,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidConfig {
    pub gamma: f64,
    pub prandtl: f64,
    /// Nondimensional viscosity of the lower fluid.
    pub mu1: f64,
    pub mu2: f64,
    /// Signed gravity along z; negative pulls down.
    pub gravity: f64,
    /// Background potential temperature.
    pub theta0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub lateral: BoundaryKind,
    pub bottom: BoundaryKind,
    pub top: BoundaryKind,
}

/// Potential-temperature perturbation `A (1 + cos(pi r))` for `r <= radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bubble {
    /// 1 for the lower subdomain, 2 for the upper one.
    pub domain: u8,
    pub amplitude: f64,
    pub radius: f64,
    pub center: [f64; 3],
}

/// Horizontal jet `u = U sech^2((z - z_c) / width)` in the upper subdomain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Jet {
    pub amplitude: f64,
    pub center_z: f64,
    pub width: f64,
    /// Relative amplitude of a `cos(2 pi y / L_y)` modulation (3D only).
    #[serde(default)]
    pub spanwise_modulation: f64,
}

/// Gaussian vortex in the x-z plane of the lower subdomain, with tangential
/// speed `A (r / R) exp((1 - r^2 / R^2) / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vortex {
    pub amplitude: f64,
    pub radius: f64,
    /// `(x, z)` of the vortex axis.
    pub center: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Mprk,
    Rk2,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: SchemeName,
    /// Rate ratio of the multirate scheme.
    pub m: usize,
    pub dt: f64,
    pub t_end: f64,
    /// History cadence in steps (0 = every step).
    pub cadence: usize,
    /// Snapshot cadence in steps (0 = initial and final only).
    pub snapshot_every: usize,
    pub check_buffer: bool,
}

impl RunConfig {
    pub fn scheme(&self) -> Scheme {
        match self.scheme {
            SchemeName::Mprk => Scheme::Mprk { m: self.m },
            SchemeName::Rk2 => Scheme::Rk2,
            SchemeName::Rk4 => Scheme::Rk4,
        }
    }

    pub fn options(&self) -> IntegrateOptions {
        IntegrateOptions { dt: self.dt, t_end: self.t_end, cadence: self.cadence, check_buffer: self.check_buffer }
    }
}

/// Complete description of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub omega1: SubdomainConfig,
    pub omega2: SubdomainConfig,
    pub buffer_layers: usize,
    pub fluid: FluidConfig,
    pub boundaries: BoundaryConfig,
    #[serde(default)]
    pub bubbles: Vec<Bubble>,
    #[serde(default)]
    pub jet: Option<Jet>,
    #[serde(default)]
    pub vortex: Option<Vortex>,
    pub run: RunConfig,
}

impl ScenarioConfig {
    pub fn domain_config(&self) -> DomainConfig {
        DomainConfig { omega1: self.omega1.clone(), omega2: self.omega2.clone(), buffer_layers: self.buffer_layers }
    }

    pub fn params(&self) -> Result<(FluidParams, FluidParams), ScenarioError> {
        let f = &self.fluid;
        Ok((
            FluidParams::new(f.gamma, f.mu1, f.prandtl, f.gravity)?,
            FluidParams::new(f.gamma, f.mu2, f.prandtl, f.gravity)?,
        ))
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let f = &self.fluid;
        if !(f.theta0 > 0.0) {
            return Err(ScenarioError::Config(format!("theta0 = {} must be positive", f.theta0)));
        }
        for b in &self.bubbles {
            if !(b.radius > 0.0) {
                return Err(ScenarioError::Config(format!("bubble radius {} must be positive", b.radius)));
            }
            if b.domain != 1 && b.domain != 2 {
                return Err(ScenarioError::Config(format!("bubble domain {} is not 1 or 2", b.domain)));
            }
        }
        if let Some(j) = &self.jet {
            if !(j.width > 0.0) {
                return Err(ScenarioError::Config("jet width must be positive".into()));
            }
        }
        if let Some(v) = &self.vortex {
            if !(v.radius > 0.0) {
                return Err(ScenarioError::Config("vortex radius must be positive".into()));
            }
        }
        let r = &self.run;
        if r.scheme == SchemeName::Mprk && r.m == 0 {
            return Err(ScenarioError::Config("m must be at least 1".into()));
        }
        if !(r.dt > 0.0) || !(r.t_end >= 0.0) {
            return Err(ScenarioError::Config(format!("dt = {}, t_end = {}", r.dt, r.t_end)));
        }
        Ok(())
    }

    /// Boundary specs of both subdomains; the interface closes Ω₁ on top and
    /// Ω₂ at the bottom.
    pub fn boundary_specs(&self) -> Result<(BoundarySpec, BoundarySpec), ScenarioError> {
        let b = &self.boundaries;
        if b.bottom == BoundaryKind::Periodic || b.top == BoundaryKind::Periodic {
            return Err(ScenarioError::Config("vertical boundaries cannot be periodic".into()));
        }
        Ok((
            BoundarySpec::boxed(b.lateral, b.bottom, BoundaryKind::Interface)?,
            BoundarySpec::boxed(b.lateral, BoundaryKind::Interface, b.top)?,
        ))
    }

    pub fn build_system(&self) -> Result<CoupledSystem, ScenarioError> {
        self.validate()?;
        let domain = build_coupled_domain(&self.domain_config())?;
        let (p1, p2) = self.params()?;
        let (b1, b2) = self.boundary_specs()?;
        Ok(CoupledSystem::new(domain, p1, p2, b1, b2)?)
    }
}

/// Potential-temperature perturbation of subdomain `domain` at `x`.
fn delta_theta(bubbles: &[Bubble], domain: u8, x: [f64; 3], three_d: bool) -> f64 {
    bubbles
        .iter()
        .filter(|b| b.domain == domain)
        .map(|b| {
            let dy = if three_d { x[1] - b.center[1] } else { 0.0 };
            let r = ((x[0] - b.center[0]).powi(2) + dy * dy + (x[2] - b.center[2]).powi(2)).sqrt();
            if r <= b.radius {
                b.amplitude * (1.0 + (std::f64::consts::PI * r).cos())
            } else {
                0.0
            }
        })
        .sum()
}

/// Base-state density, temperature and pressure at height `z`.
pub fn stratified_state(fluid: &FluidConfig, z: f64, dtheta: f64) -> Result<(f64, f64, f64), ScenarioError> {
    let g = fluid.gamma;
    let cp = 1.0 / (g - 1.0);
    let ratio = 1.0 + dtheta / fluid.theta0;
    let psi = 1.0 + fluid.gravity * z / (cp * ratio);
    if !(psi > 0.0) {
        return Err(ScenarioError::NegativePsi { z, psi });
    }
    let t = ratio * psi;
    let p = psi.powf(g / (g - 1.0)) / g;
    let rho = fluid.theta0 / (fluid.theta0 + dtheta) * psi.powf(1.0 / (g - 1.0));
    Ok((rho, t, p))
}

fn velocity(cfg: &ScenarioConfig, grid: &StructuredGrid, domain: u8, x: [f64; 3]) -> [f64; 3] {
    let mut u = [0.0; 3];
    if domain == 2 {
        if let Some(j) = &cfg.jet {
            let s = 1.0 / ((x[2] - j.center_z) / j.width).cosh();
            let mut amp = j.amplitude * s * s;
            if grid.is_3d() && j.spanwise_modulation != 0.0 {
                let ly = grid.upper[1] - grid.lower[1];
                let phase = 2.0 * std::f64::consts::PI * (x[1] - grid.lower[1]) / ly;
                amp *= 1.0 + j.spanwise_modulation * phase.cos();
            }
            u[0] += amp;
        }
    }
    if domain == 1 {
        if let Some(v) = &cfg.vortex {
            let dx = x[0] - v.center[0];
            let dz = x[2] - v.center[1];
            let r2 = (dx * dx + dz * dz) / (v.radius * v.radius);
            let f = v.amplitude / v.radius * (0.5 * (1.0 - r2)).exp();
            u[0] += -f * dz;
            u[2] += f * dx;
        }
    }
    u
}

fn fill(cfg: &ScenarioConfig, grid: &StructuredGrid, domain: u8) -> Result<ConservedField, ScenarioError> {
    let gamma = cfg.fluid.gamma;
    let mut data = Vec::with_capacity(grid.len());
    for k in 0..grid.nz {
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let x = grid.center(i, j, k);
                let dtheta = delta_theta(&cfg.bubbles, domain, x, grid.is_3d());
                let (rho, t, p) = stratified_state(&cfg.fluid, x[2], dtheta)?;
                let w = PrimitiveState { rho, vel: velocity(cfg, grid, domain, x), p, t };
                data.push(primitive_to_conserved(&w, gamma));
            }
        }
    }
    Ok(ConservedField::from_vec(data))
}

/// Cell-center evaluation of the stratified base state plus every
/// configured perturbation.
pub fn initial_state(cfg: &ScenarioConfig) -> Result<CoupledState, ScenarioError> {
    cfg.validate()?;
    let domain = build_coupled_domain(&cfg.domain_config())?;
    let field1 = fill(cfg, &domain.grid1, 1)?;
    let field2 = fill(cfg, &domain.grid2, 2)?;
    Ok(CoupledState { field1, field2, t: 0.0 })
}

fn expect_dims(cfg: &ScenarioConfig, three_d: bool) -> Result<(), ScenarioError> {
    let is_3d = cfg.omega1.cells[1] > 1;
    if is_3d != three_d {
        return Err(ScenarioError::Config(format!(
            "scenario needs a {} grid",
            if three_d { "3D" } else { "2D" }
        )));
    }
    Ok(())
}

/// Stratified fluid with warm/cold cosine bubbles.
pub fn init_thermal_convection(cfg: &ScenarioConfig) -> Result<CoupledState, ScenarioError> {
    expect_dims(cfg, false)?;
    initial_state(cfg)
}

/// Stratified fluid with a jet in Ω₂ and a vortex in Ω₁.
pub fn init_khi(cfg: &ScenarioConfig) -> Result<CoupledState, ScenarioError> {
    expect_dims(cfg, false)?;
    initial_state(cfg)
}

pub fn init_thermal_bubble_3d(cfg: &ScenarioConfig) -> Result<CoupledState, ScenarioError> {
    expect_dims(cfg, true)?;
    initial_state(cfg)
}

pub fn init_wind_driven_3d(cfg: &ScenarioConfig) -> Result<CoupledState, ScenarioError> {
    expect_dims(cfg, true)?;
    initial_state(cfg)
}

/// Initial state for `cfg.kind`.
pub fn initialize(cfg: &ScenarioConfig) -> Result<CoupledState, ScenarioError> {
    match cfg.kind {
        ScenarioKind::ThermalConvection => init_thermal_convection(cfg),
        ScenarioKind::Khi => init_khi(cfg),
        ScenarioKind::ThermalBubble3d => init_thermal_bubble_3d(cfg),
        ScenarioKind::WindDriven3d => init_wind_driven_3d(cfg),
        ScenarioKind::Manufactured => initial_state(cfg),
    }
}

pub const PRESET_NAMES: [&str; 6] = ["khi2d", "convection2d", "convection2d-dual", "bubble3d", "wind3d", "manufactured"];

pub const CONVECTION_GRAVITY: f64 = -0.008_140_864_714;

fn sub(lower: [f64; 3], upper: [f64; 3], cells: [usize; 3]) -> SubdomainConfig {
    SubdomainConfig { lower, upper, cells }
}

fn convection_fluid() -> FluidConfig {
    FluidConfig {
        gamma: 1.4,
        prandtl: 0.72,
        mu1: 1.0 / 20000.0,
        mu2: 1.0 / 5000.0,
        gravity: CONVECTION_GRAVITY,
        theta0: 300.0,
    }
}

fn walls() -> BoundaryConfig {
    BoundaryConfig { lateral: BoundaryKind::Wall, bottom: BoundaryKind::Wall, top: BoundaryKind::Wall }
}

fn run(scheme: SchemeName, m: usize, dt: f64, t_end: f64) -> RunConfig {
    RunConfig { scheme, m, dt, t_end, cadence: 0, snapshot_every: 0, check_buffer: false }
}

/// Single warm bubble below the interface on `nx x nz1 / nx x nz2` elements
/// over `(-5, 5) x (-5, 0)` and `(-5, 5) x (0, 5)`.
pub fn convection_config(nx: usize, nz1: usize, nz2: usize) -> ScenarioConfig {
    ScenarioConfig {
        kind: ScenarioKind::ThermalConvection,
        omega1: sub([-5.0, 0.0, -5.0], [5.0, 1.0, 0.0], [nx, 1, nz1]),
        omega2: sub([-5.0, 0.0, 0.0], [5.0, 1.0, 5.0], [nx, 1, nz2]),
        buffer_layers: 6,
        fluid: convection_fluid(),
        boundaries: walls(),
        bubbles: vec![Bubble { domain: 1, amplitude: 0.25, radius: 2.5, center: [0.0, 0.0, -2.5] }],
        jet: None,
        vortex: None,
        run: run(SchemeName::Mprk, 2, 0.025, 25.0),
    }
}

/// KHI-type setup on `nx x nz` elements per subdomain over
/// `(0, 100) x (-50, 0)` and `(0, 100) x (0, 50)`, laterally periodic.
pub fn khi_config(nx: usize, nz: usize) -> ScenarioConfig {
    ScenarioConfig {
        kind: ScenarioKind::Khi,
        omega1: sub([0.0, 0.0, -50.0], [100.0, 1.0, 0.0], [nx, 1, nz]),
        omega2: sub([0.0, 0.0, 0.0], [100.0, 1.0, 50.0], [nx, 1, nz]),
        buffer_layers: 6,
        fluid: convection_fluid(),
        boundaries: BoundaryConfig { lateral: BoundaryKind::Periodic, bottom: BoundaryKind::Wall, top: BoundaryKind::Wall },
        bubbles: vec![],
        jet: Some(Jet { amplitude: 0.1, center_z: 10.0, width: 5.0, spanwise_modulation: 0.0 }),
        vortex: Some(Vortex { amplitude: 0.05, radius: 5.0, center: [50.0, -25.0] }),
        run: run(SchemeName::Mprk, 2, 0.25, 500.0),
    }
}

/// Wind-driven column `(0, 5)^2 x (0, 10)` with `nz_total` layers, the top
/// `slow_layers + buffer` of which form Ω₂.
pub fn wind_column_config(n: usize, nz_total: usize, slow_layers: usize, buffer: usize) -> ScenarioConfig {
    let h = 10.0 / nz_total as f64;
    let nz2 = slow_layers + buffer;
    let nz1 = nz_total - nz2;
    let zi = nz1 as f64 * h;
    ScenarioConfig {
        kind: ScenarioKind::WindDriven3d,
        omega1: sub([0.0, 0.0, 0.0], [5.0, 5.0, zi], [n, n, nz1]),
        omega2: sub([0.0, 0.0, zi], [5.0, 5.0, 10.0], [n, n, nz2]),
        buffer_layers: buffer,
        fluid: convection_fluid(),
        boundaries: BoundaryConfig { lateral: BoundaryKind::Periodic, bottom: BoundaryKind::Wall, top: BoundaryKind::Wall },
        bubbles: vec![],
        jet: Some(Jet { amplitude: 0.1, center_z: 10.0, width: 1.5, spanwise_modulation: 0.2 }),
        vortex: Some(Vortex { amplitude: 0.02, radius: 0.8, center: [2.5, 0.5 * zi] }),
        run: run(SchemeName::Mprk, 4, 0.01, 0.1),
    }
}

/// Named preset configuration.
pub fn preset(name: &str) -> Option<ScenarioConfig> {
    Some(match name {
        "convection2d" => convection_config(100, 100, 200),
        "convection2d-dual" => {
            let mut c = convection_config(100, 140, 240);
            c.omega1.lower[2] = -7.0;
            c.omega2.upper[2] = 3.0;
            c.bubbles = vec![
                Bubble { domain: 1, amplitude: 1.25, radius: 2.5, center: [0.0, 0.0, -2.5] },
                Bubble { domain: 2, amplitude: -7.5, radius: 1.0, center: [0.0, 0.0, 1.5] },
            ];
            c.run.m = 4;
            c
        }
        "khi2d" => khi_config(160, 80),
        "bubble3d" => ScenarioConfig {
            kind: ScenarioKind::ThermalBubble3d,
            omega1: sub([-5.0, -5.0, -16.0], [5.0, 5.0, 0.0], [20, 20, 40]),
            omega2: sub([-5.0, -5.0, 0.0], [5.0, 5.0, 2.0], [20, 20, 20]),
            buffer_layers: 6,
            fluid: convection_fluid(),
            boundaries: walls(),
            bubbles: vec![
                Bubble { domain: 1, amplitude: 7.5, radius: 2.5, center: [0.0, 0.0, -2.5] },
                Bubble { domain: 2, amplitude: -7.5, radius: 2.5, center: [0.0, 0.0, 1.0] },
            ],
            jet: None,
            vortex: None,
            run: run(SchemeName::Mprk, 4, 0.02, 2.0),
        },
        "wind3d" => wind_column_config(20, 50, 24, 6),
        "manufactured" => {
            let mut c = convection_config(20, 20, 40);
            c.kind = ScenarioKind::Manufactured;
            c.bubbles = vec![Bubble { domain: 1, amplitude: 0.5, radius: 1.0, center: [0.0, 0.0, -1.5] }];
            c.jet = Some(Jet { amplitude: 0.05, center_z: 1.0, width: 1.0, spanwise_modulation: 0.0 });
            c.run = run(SchemeName::Mprk, 4, 0.05, 1.0);
            c
        }
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{conserved_to_primitive, eos_pressure};

    #[test]
    fn surface_base_state() {
        let (rho, t, p) = stratified_state(&convection_fluid(), 0.0, 0.0).unwrap();
        assert_eq!((rho, t), (1.0, 1.0));
        assert!((p - 1.0 / 1.4).abs() < 1e-16);
    }

    #[test]
    fn eos_consistent_everywhere() {
        let cfg = convection_config(20, 20, 40);
        let s = init_thermal_convection(&cfg).unwrap();
        for q in s.field1.as_slice().iter().chain(s.field2.as_slice()) {
            let w = conserved_to_primitive(q, 1.4).unwrap();
            assert!((eos_pressure(w.rho, w.t, 1.4) - w.p).abs() < 1e-13);
        }
    }

    #[test]
    fn deep_domain_rejected() {
        let mut cfg = convection_config(4, 4, 8);
        cfg.omega2.upper[2] = 1000.0;
        let r = initial_state(&cfg);
        assert!(matches!(r, Err(ScenarioError::NegativePsi { .. })), "{r:?}");
    }

    #[test]
    fn velocity_only_perturbations_keep_mass() {
        let cfg = khi_config(16, 8);
        let mut calm = cfg.clone();
        calm.jet = None;
        calm.vortex = None;
        let d = build_coupled_domain(&cfg.domain_config()).unwrap();
        let a = init_khi(&cfg).unwrap();
        let b = init_khi(&calm).unwrap();
        assert_eq!(a.total_mass(&d), b.total_mass(&d));
        assert!(a.total_energy(&d) > b.total_energy(&d));
    }

    #[test]
    fn presets_are_valid() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            cfg.build_system().unwrap();
            let s = initialize(&cfg).unwrap();
            assert!(s.field1.validity_scan(1.4).is_ok(), "{name}");
            assert!(s.field2.validity_scan(1.4).is_ok(), "{name}");
        }
        assert!(preset("nope").is_none());
    }

    #[test]
    fn deterministic_construction() {
        let cfg = preset("convection2d-dual").unwrap();
        assert_eq!(initialize(&cfg).unwrap(), initialize(&cfg).unwrap());
    }

    #[test]
    fn wrong_dimension_rejected() {
        let cfg = preset("bubble3d").unwrap();
        assert!(init_thermal_convection(&cfg).is_err());
    }

    #[test]
    fn warm_bubble_is_lighter() {
        let cfg = convection_config(20, 20, 20);
        let d = build_coupled_domain(&cfg.domain_config()).unwrap();
        let s = initial_state(&cfg).unwrap();
        let inside = d.grid1.index(10, 0, 10);
        let mut calm = cfg.clone();
        calm.bubbles.clear();
        let c = initial_state(&calm).unwrap();
        assert!(s.field1.as_slice()[inside][0] < c.field1.as_slice()[inside][0]);
    }
}
