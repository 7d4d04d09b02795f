//! Verification studies: temporal self-convergence, work/speedup accounting,
//! conservation and buffer adequacy.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{
    coupled_l2_error, measured_speedup, serial_speedup, DiagnosticsError, GroupedError, SpeedupInputs,
};
use crate::domain::{CoupledState, RegionCounts};
use crate::integrator::{integrate, IntegrateOptions, IntegrationSummary, IntegratorError, RhsEvalLedger, Scheme};
use crate::scenarios::{initialize, wind_column_config, ScenarioConfig, ScenarioError};
use crate::spatial::CoupledSystem;

/// Largest stage mismatch at the buffer/slow seam still treated as equal.
pub const SEAM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("invalid study setup: {0}")]
    Config(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
}

fn run(
    system: &CoupledSystem,
    cfg: &ScenarioConfig,
    scheme: Scheme,
    options: &IntegrateOptions,
    hook: &mut dyn FnMut(usize, &CoupledState),
) -> Result<(CoupledState, IntegrationSummary), StudyError> {
    let mut state = initialize(cfg)?;
    let summary = integrate(system, &mut state, scheme, options, hook)?;
    Ok((state, summary))
}

fn options(dt: f64, t_end: f64) -> IntegrateOptions {
    IntegrateOptions { dt, t_end, cadence: 0, check_buffer: false }
}

/// Errors at one step size and the orders against the previous (coarser) one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub steps: usize,
    pub error: GroupedError,
    /// `log2(e_{2h} / e_h)` for density, momentum and energy.
    pub orders: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub m: usize,
    pub t_end: f64,
    pub reference_dt: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceStudy {
    /// Smallest and largest observed order over all variables and halvings.
    pub fn order_range(&self) -> (f64, f64) {
        self.rows
            .iter()
            .filter_map(|r| r.orders)
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), o| (lo.min(o), hi.max(o)))
    }
}

/// At least three step sizes, each half the previous one.
pub fn check_halving(dts: &[f64]) -> Result<(), StudyError> {
    if dts.len() < 3 {
        return Err(StudyError::Config(format!("need at least 3 step sizes, got {}", dts.len())));
    }
    for w in dts.windows(2) {
        if !(w[0] > 0.0) || ((w[0] / w[1]) - 2.0).abs() > 1e-12 {
            return Err(StudyError::Config(format!("step sizes {} and {} are not a halving", w[0], w[1])));
        }
    }
    Ok(())
}

/// Self-convergence of the multirate scheme with rate ratio `m` against a
/// classical RK4 reference at `reference_dt` (default: smallest dt / 10).
pub fn study_convergence(
    cfg: &ScenarioConfig,
    dts: &[f64],
    m: usize,
    t_end: f64,
    reference_dt: Option<f64>,
) -> Result<ConvergenceStudy, StudyError> {
    check_halving(dts)?;
    let ref_dt = reference_dt.unwrap_or(dts[dts.len() - 1] / 10.0);
    if !(ref_dt > 0.0) {
        return Err(StudyError::Config(format!("reference dt = {ref_dt}")));
    }
    let system = cfg.build_system()?;
    let mut jobs: Vec<(Scheme, f64)> = vec![(Scheme::Rk4, ref_dt)];
    jobs.extend(dts.iter().map(|&dt| (Scheme::Mprk { m }, dt)));
    let results: Vec<Result<(CoupledState, IntegrationSummary), StudyError>> = jobs
        .par_iter()
        .map(|&(scheme, dt)| run(&system, cfg, scheme, &options(dt, t_end), &mut |_, _| {}))
        .collect();
    let mut results = results.into_iter().collect::<Result<Vec<_>, _>>()?.into_iter();
    let (reference, _) = results.next().expect("reference run");
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(dts.len());
    for (&dt, (state, summary)) in dts.iter().zip(results) {
        let error = GroupedError::from_components(&coupled_l2_error(&state, &reference, &system.domain)?);
        let orders = rows.last().map(|prev| {
            let (a, b) = (prev.error.as_array(), error.as_array());
            [(a[0] / b[0]).log2(), (a[1] / b[1]).log2(), (a[2] / b[2]).log2()]
        });
        rows.push(ConvergenceRow { dt, steps: summary.steps, error, orders });
    }
    Ok(ConvergenceStudy { m, t_end, reference_dt: ref_dt, rows })
}

/// `N_SR (m (N_F + N_B) + N_S) == N_MPRK m N_total`: the element-evaluation
/// ratio equals the ideal serial speedup exactly.
pub fn eval_count_identity(m: usize, counts: &RegionCounts, sr: &RhsEvalLedger, mprk: &RhsEvalLedger) -> bool {
    let m = m as u128;
    let lhs = sr.total_elements() as u128 * (m * (counts.fast + counts.buffer) as u128 + counts.slow as u128);
    let rhs = mprk.total_elements() as u128 * m * counts.total as u128;
    lhs == rhs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupStudyConfig {
    /// Horizontal elements per direction.
    pub n: usize,
    pub nz_total: usize,
    pub buffer_layers: usize,
    /// Requested slow fractions `N_S / N_total`.
    pub splits: Vec<f64>,
    pub ms: Vec<usize>,
    /// Multirate steps per case; the single-rate run takes `m` times as many.
    pub slow_steps: usize,
    pub dt_slow: f64,
    /// Time both runs (serially) and report the wall-clock ratio.
    pub timed: bool,
}

impl Default for SpeedupStudyConfig {
    fn default() -> Self {
        Self {
            n: 20,
            nz_total: 50,
            buffer_layers: 6,
            splits: vec![0.24, 0.54, 0.84],
            ms: vec![2, 4, 8],
            slow_steps: 2,
            dt_slow: 0.05,
            timed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupCase {
    pub m: usize,
    pub requested_split: f64,
    pub slow_layers: usize,
    pub counts: RegionCounts,
    /// Realized `N_S / N_total`.
    pub split: f64,
    pub ideal: f64,
    pub eval_ratio: f64,
    pub identity_holds: bool,
    pub sr_ledger: RhsEvalLedger,
    pub mprk_ledger: RhsEvalLedger,
    pub wall_clock_ratio: Option<f64>,
}

/// Runs the base method at `dt_slow / m` and the multirate scheme at
/// `dt_slow` over the same interval on a wind-driven column and compares
/// element evaluations (and optionally wall clock) with the ideal speedup.
pub fn study_speedup(config: &SpeedupStudyConfig) -> Result<Vec<SpeedupCase>, StudyError> {
    if config.slow_steps == 0 || config.ms.is_empty() || config.splits.is_empty() {
        return Err(StudyError::Config("speedup study needs steps, rate ratios and splits".into()));
    }
    let mut out = Vec::new();
    for &split in &config.splits {
        if !(0.0..1.0).contains(&split) {
            return Err(StudyError::Config(format!("split {split} outside [0, 1)")));
        }
        let slow_layers = (split * config.nz_total as f64).round() as usize;
        if slow_layers + config.buffer_layers >= config.nz_total {
            return Err(StudyError::Config(format!(
                "split {split} leaves no fast layers in a column of {}",
                config.nz_total
            )));
        }
        let cfg = wind_column_config(config.n, config.nz_total, slow_layers, config.buffer_layers);
        let system = cfg.build_system()?;
        let counts = system.domain.counts();
        for &m in &config.ms {
            if m == 0 {
                return Err(StudyError::Config("m must be at least 1".into()));
            }
            let t_end = config.slow_steps as f64 * config.dt_slow;
            let t0 = Instant::now();
            let (_, sr) = run(&system, &cfg, Scheme::Rk2, &options(config.dt_slow / m as f64, t_end), &mut |_, _| {})?;
            let t_sr = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let (_, mp) = run(&system, &cfg, Scheme::Mprk { m }, &options(config.dt_slow, t_end), &mut |_, _| {})?;
            let t_mp = t1.elapsed().as_secs_f64();
            let measured = measured_speedup(&sr.ledger, &mp.ledger, config.timed.then_some((t_sr, t_mp)))?;
            out.push(SpeedupCase {
                m,
                requested_split: split,
                slow_layers,
                counts,
                split: counts.slow as f64 / counts.total as f64,
                ideal: serial_speedup(&SpeedupInputs::from_counts(m, &counts))?,
                eval_ratio: measured.eval_ratio,
                identity_holds: eval_count_identity(m, &counts, &sr.ledger, &mp.ledger),
                sr_ledger: sr.ledger,
                mprk_ledger: mp.ledger,
                wall_clock_ratio: measured.wall_clock_ratio,
            });
        }
    }
    Ok(out)
}

/// Conservation of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationCase {
    pub scheme: Scheme,
    pub steps: usize,
    /// Largest relative drift of the total mass.
    pub mass_drift: f64,
    /// Largest relative drift of the mass of Ω₁ and Ω₂ separately.
    pub domain_mass_drift: [f64; 2],
    pub energy_drift: f64,
    /// Largest per-step interface bookkeeping residual.
    pub max_interface_residual: f64,
    pub max_buffer_defect: Option<f64>,
}

/// Runs `cfg` with `scheme` for `steps` steps of `dt`, sampling the masses
/// after every step.
pub fn conservation_run(
    cfg: &ScenarioConfig,
    scheme: Scheme,
    dt: f64,
    steps: usize,
    check_buffer: bool,
) -> Result<ConservationCase, StudyError> {
    let system = cfg.build_system()?;
    let d = &system.domain;
    let mut m0: Option<[f64; 3]> = None;
    let mut e0 = 0.0;
    let mut worst = [0.0_f64; 3];
    let mut energy_drift = 0.0_f64;
    let opts = IntegrateOptions { dt, t_end: steps as f64 * dt, cadence: 1, check_buffer };
    let mut hook = |_: usize, s: &CoupledState| {
        let m1 = s.field1.mass(&d.grid1);
        let m2 = s.field2.mass(&d.grid2);
        let now = [m1 + m2, m1, m2];
        let e = s.total_energy(d);
        match m0 {
            None => {
                m0 = Some(now);
                e0 = e;
            }
            Some(base) => {
                for v in 0..3 {
                    worst[v] = worst[v].max(((now[v] - base[v]) / base[v]).abs());
                }
                energy_drift = energy_drift.max(((e - e0) / e0).abs());
            }
        }
    };
    let (_, summary) = run(&system, cfg, scheme, &opts, &mut hook)?;
    Ok(ConservationCase {
        scheme,
        steps: summary.steps,
        mass_drift: worst[0],
        domain_mass_drift: [worst[1], worst[2]],
        energy_drift,
        max_interface_residual: summary.max_interface_residual,
        max_buffer_defect: summary.max_buffer_defect,
    })
}

/// Conservation over several rate ratios, run concurrently.
pub fn study_conservation(
    cfg: &ScenarioConfig,
    ms: &[usize],
    dt: f64,
    steps: usize,
) -> Result<Vec<ConservationCase>, StudyError> {
    ms.par_iter()
        .map(|&m| conservation_run(cfg, Scheme::Mprk { m }, dt, steps, true))
        .collect()
}

/// Outcome of the buffer/slow seam stage-equality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BufferCheck {
    pub buffer_layers: usize,
    pub m: usize,
    pub max_defect: f64,
    pub adequate: bool,
    pub conservation: ConservationCase,
}

/// Runs `cfg` with `buffer_layers` buffer layers and rate ratio `m` and
/// checks that the seam stage states repeat with period `s`.
pub fn buffer_adequacy(
    cfg: &ScenarioConfig,
    buffer_layers: usize,
    m: usize,
    dt: f64,
    steps: usize,
) -> Result<BufferCheck, StudyError> {
    let mut cfg = cfg.clone();
    cfg.buffer_layers = buffer_layers;
    let conservation = conservation_run(&cfg, Scheme::Mprk { m }, dt, steps, true)?;
    let max_defect = conservation.max_buffer_defect.unwrap_or(0.0);
    Ok(BufferCheck { buffer_layers, m, max_defect, adequate: max_defect <= SEAM_TOLERANCE, conservation })
}
