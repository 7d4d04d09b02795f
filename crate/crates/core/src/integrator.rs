//! Time stepping: the multirate partitioned Runge-Kutta step over the fast,
//! buffer and slow regions, single-rate explicit RK steps on the whole
//! coupled system, and a fixed-step driver with diagnostic hooks.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::butcher::{generate_mprk, ButcherTableau, MprkTableauSet, TableauError};
use crate::coupling::CouplingError;
use crate::domain::{CoupledState, DomainError, Region};
use crate::physics::{Conserved, NVAR};
use crate::spatial::{CoupledSystem, FaceFluxSet, SpatialError, StageInputs};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegratorError {
    #[error("step {step}, stage {stage}, {region:?} region: {source}")]
    Rhs { step: usize, stage: usize, region: Region, source: SpatialError },
    #[error("step {step}, stage {stage}: {source}")]
    Coupling { step: usize, stage: usize, source: CouplingError },
    #[error("state after step {step} is non-physical at element {element} of domain {domain}")]
    NonPhysical { step: usize, domain: u8, element: usize },
    #[error("invalid integration setup: {0}")]
    Setup(String),
    #[error(transparent)]
    Tableau(#[from] TableauError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Exact tally of right-hand-side evaluations per region.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhsEvalLedger {
    pub fast_evals: u64,
    pub buffer_evals: u64,
    pub slow_evals: u64,
    /// Element evaluations, the work measure of the speedup model.
    pub fast_elements: u64,
    pub buffer_elements: u64,
    pub slow_elements: u64,
}

impl RhsEvalLedger {
    pub fn record(&mut self, region: Region, elements: u64) {
        match region {
            Region::Fast => {
                self.fast_evals += 1;
                self.fast_elements += elements;
            }
            Region::Buffer => {
                self.buffer_evals += 1;
                self.buffer_elements += elements;
            }
            Region::Slow => {
                self.slow_evals += 1;
                self.slow_elements += elements;
            }
        }
    }

    pub fn evals(&self, region: Region) -> u64 {
        match region {
            Region::Fast => self.fast_evals,
            Region::Buffer => self.buffer_evals,
            Region::Slow => self.slow_evals,
        }
    }

    pub fn elements(&self, region: Region) -> u64 {
        match region {
            Region::Fast => self.fast_elements,
            Region::Buffer => self.buffer_elements,
            Region::Slow => self.slow_elements,
        }
    }

    pub fn total_elements(&self) -> u64 {
        self.fast_elements + self.buffer_elements + self.slow_elements
    }

    pub fn merge(&mut self, other: &RhsEvalLedger) {
        self.fast_evals += other.fast_evals;
        self.buffer_evals += other.buffer_evals;
        self.slow_evals += other.slow_evals;
        self.fast_elements += other.fast_elements;
        self.buffer_elements += other.buffer_elements;
        self.slow_elements += other.slow_elements;
    }
}

/// Momentum and energy carried through the interface, `[rho u, rho v, rho E]`,
/// as gained by each side.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct InterfaceBalance {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

impl InterfaceBalance {
    /// Sum of what both sides gained; zero for a conservative exchange.
    pub fn residual(&self) -> [f64; 3] {
        [
            self.lower[0] + self.upper[0],
            self.lower[1] + self.upper[1],
            self.lower[2] + self.upper[2],
        ]
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.residual().iter().fold(0.0, |a, r| a.max(r.abs()))
    }

    fn accumulate(&mut self, w_lower: f64, w_upper: f64, area: f64, top1: &[Conserved], bottom2: &[Conserved]) {
        let (c1, c2) = (w_lower * area, w_upper * area);
        for (h1, h2) in top1.iter().zip(bottom2) {
            for (r, v) in [1, 2, NVAR - 1].into_iter().enumerate() {
                // the lower side loses +z flux through its top, the upper side gains it
                self.lower[r] -= c1 * h1[v];
                self.upper[r] += c2 * h2[v];
            }
        }
    }

    fn add(&mut self, other: &InterfaceBalance) {
        for r in 0..3 {
            self.lower[r] += other.lower[r];
            self.upper[r] += other.upper[r];
        }
    }
}

/// Diagnostics of one step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepReport {
    pub interface: InterfaceBalance,
    /// Largest seam defect `|Q2_i - Q2_{i mod s}|` over the buffer layers next
    /// to the slow region, when the buffer check is enabled.
    pub buffer_defect: Option<f64>,
}

/// `out = base + sum_j c_j r_j`, skipping zero coefficients. Every stage and
/// step update goes through this one routine so that equal tableaus give
/// bitwise equal results.
fn combine(base: &[Conserved], terms: &[(f64, &[Conserved])], out: &mut [Conserved]) {
    debug_assert_eq!(base.len(), out.len());
    out.par_iter_mut().enumerate().for_each(|(e, o)| {
        let mut acc = base[e];
        for (c, r) in terms {
            let re = &r[e];
            for v in 0..NVAR {
                acc[v] += c * re[v];
            }
        }
        *o = acc;
    });
}

fn terms<'a>(coeffs: impl Iterator<Item = (usize, f64)>, dt: f64, arrays: &'a [Vec<Conserved>]) -> Vec<(f64, &'a [Conserved])> {
    coeffs
        .filter(|(_, a)| *a != 0.0)
        .map(|(j, a)| (dt * a, arrays[j].as_slice()))
        .collect()
}

/// Stage states and tendencies of one multirate step.
///
/// Ω₂ stage states are stored for the whole subdomain: buffer layers hold
/// `Q^B_i` and slow layers `Q^S_i` (copies of `Q^S_{i mod s}` beyond the
/// first `s` stages).
#[derive(Debug, Clone)]
pub struct StageWorkspace {
    pub q1: Vec<Vec<Conserved>>,
    pub q2: Vec<Vec<Conserved>>,
    pub r_fast: Vec<Vec<Conserved>>,
    pub r_buffer: Vec<Vec<Conserved>>,
    pub r_slow: Vec<Vec<Conserved>>,
}

impl StageWorkspace {
    fn new(system: &CoupledSystem, stages: usize, slow_stages: usize) -> Self {
        let d = &system.domain;
        let z = [0.0; NVAR];
        let nb = system.region_len(Region::Buffer);
        let ns = system.region_len(Region::Slow);
        Self {
            q1: vec![vec![z; d.grid1.len()]; stages],
            q2: vec![vec![z; d.grid2.len()]; stages],
            r_fast: vec![vec![z; d.grid1.len()]; stages],
            r_buffer: vec![vec![z; nb]; stages],
            r_slow: vec![vec![z; ns]; slow_stages],
        }
    }

    /// Largest `|Q2_i - Q2_{i mod s}|` for `i >= s` over the Ω₂ layers `layers`.
    pub fn seam_defect(&self, s: usize, span: Range<usize>) -> f64 {
        let mut worst = 0.0_f64;
        for i in s..self.q2.len() {
            let a = &self.q2[i][span.clone()];
            let b = &self.q2[i % s][span.clone()];
            for (x, y) in a.iter().zip(b) {
                for v in 0..NVAR {
                    worst = worst.max((x[v] - y[v]).abs());
                }
            }
        }
        worst
    }
}

/// Buffer layers checked for stage repetition: the two next to the slow region.
pub fn seam_layers(buffer_layers: usize) -> Range<usize> {
    buffer_layers.saturating_sub(2)..buffer_layers
}

fn face_area(system: &CoupledSystem) -> f64 {
    let g = &system.domain.grid1;
    g.dx() * g.dy()
}

/// Multirate stepper with a reusable stage workspace.
#[derive(Debug, Clone)]
pub struct MprkIntegrator<'a> {
    system: &'a CoupledSystem,
    set: MprkTableauSet,
    ws: StageWorkspace,
    pub check_buffer: bool,
}

impl<'a> MprkIntegrator<'a> {
    pub fn new(system: &'a CoupledSystem, set: MprkTableauSet) -> Self {
        let ws = StageWorkspace::new(system, set.stages(), set.s);
        Self { system, set, ws, check_buffer: false }
    }

    pub fn tableaus(&self) -> &MprkTableauSet {
        &self.set
    }

    pub fn workspace(&self) -> &StageWorkspace {
        &self.ws
    }

    /// Advances `state` by `dt` following the multirate stage sequence.
    ///
    /// Per global stage `i`: buffer stage state, slow stage state (or the copy
    /// of stage `i mod s`), fast stage state, interface exchange, then the
    /// buffer, slow (first `s` stages only) and fast tendencies.
    pub fn step(
        &mut self,
        state: &mut CoupledState,
        dt: f64,
        step: usize,
        ledger: &mut RhsEvalLedger,
    ) -> Result<StepReport, IntegratorError> {
        let sys = self.system;
        let g2 = &sys.domain.grid2;
        let part = sys.domain.partition;
        let bspan = g2.layer_span(part.buffer_layer_range());
        let sspan = g2.layer_span(part.slow_layer_range());
        let n = self.set.stages();
        let s = self.set.s;
        let (fast, buffer, slow) = (&self.set.fast, &self.set.buffer, &self.set.slow);
        let ws = &mut self.ws;
        let q1n = state.field1.as_slice();
        let q2n = state.field2.as_slice();
        let area = face_area(sys);
        let mut report = StepReport::default();

        for i in 0..n {
            let tb = terms(buffer.a_row(i).iter().copied().enumerate(), dt, &ws.r_buffer);
            combine(&q2n[bspan.clone()], &tb, &mut ws.q2[i][bspan.clone()]);

            if i < s {
                let ts = terms(slow.a_row(i).iter().copied().enumerate(), dt, &ws.r_slow);
                combine(&q2n[sspan.clone()], &ts, &mut ws.q2[i][sspan.clone()]);
            } else {
                let (done, rest) = ws.q2.split_at_mut(i);
                rest[0][sspan.clone()].copy_from_slice(&done[i % s][sspan.clone()]);
            }

            let tf = terms(fast.a_row(i).iter().copied().enumerate(), dt, &ws.r_fast);
            combine(q1n, &tf, &mut ws.q1[i]);

            let fluxes = sys
                .exchange(i, &ws.q1[i], i, &ws.q2[i])
                .map_err(|source| IntegratorError::Coupling { step, stage: i, source })?;
            let rows = fluxes.viscous_rows();
            let inputs = StageInputs { omega1: &ws.q1[i], omega2: &ws.q2[i], interface: Some(&rows) };
            let wrap = |region| move |source| IntegratorError::Rhs { step, stage: i, region, source };

            let fb = sys
                .rhs_region(Region::Buffer, &inputs, &mut ws.r_buffer[i], ledger)
                .map_err(wrap(Region::Buffer))?;
            if i < s {
                sys.rhs_region(Region::Slow, &inputs, &mut ws.r_slow[i], ledger)
                    .map_err(wrap(Region::Slow))?;
            }
            let ff = sys
                .rhs_region(Region::Fast, &inputs, &mut ws.r_fast[i], ledger)
                .map_err(wrap(Region::Fast))?;
            accumulate_interface(&mut report.interface, dt * fast.b()[i], dt * buffer.b()[i], area, &ff, &fb, sys);
        }

        if self.check_buffer {
            report.buffer_defect = Some(ws.seam_defect(s, g2.layer_span(seam_layers(part.buffer_layers))));
        }

        let mut new1 = vec![[0.0; NVAR]; q1n.len()];
        let tf = terms(fast.b().iter().copied().enumerate(), dt, &ws.r_fast);
        combine(q1n, &tf, &mut new1);
        let mut new2 = vec![[0.0; NVAR]; q2n.len()];
        let tb = terms(buffer.b().iter().copied().enumerate(), dt, &ws.r_buffer);
        combine(&q2n[bspan.clone()], &tb, &mut new2[bspan.clone()]);
        let ts = terms(slow.b()[..s].iter().copied().enumerate(), dt, &ws.r_slow);
        combine(&q2n[sspan.clone()], &ts, &mut new2[sspan.clone()]);
        state.field1.as_mut_slice().copy_from_slice(&new1);
        state.field2.as_mut_slice().copy_from_slice(&new2);
        state.t += dt;
        Ok(report)
    }
}

fn accumulate_interface(
    balance: &mut InterfaceBalance,
    w_lower: f64,
    w_upper: f64,
    area: f64,
    lower: &FaceFluxSet,
    upper: &FaceFluxSet,
    sys: &CoupledSystem,
) {
    let top = lower.z_plane(sys.domain.grid1.nz);
    let bottom = upper.z_plane(0);
    balance.accumulate(w_lower, w_upper, area, top, bottom);
}

/// One multirate step of `state` (convenience wrapper allocating a workspace).
pub fn mprk_step(
    system: &CoupledSystem,
    state: &CoupledState,
    set: &MprkTableauSet,
    dt: f64,
    ledger: &mut RhsEvalLedger,
) -> Result<(CoupledState, StepReport), IntegratorError> {
    let mut out = state.clone();
    let report = MprkIntegrator::new(system, set.clone()).step(&mut out, dt, 0, ledger)?;
    Ok((out, report))
}

/// Single-rate explicit RK stepper on the monolithic coupled system: both
/// subdomains share every stage and exchange interface data at each one.
#[derive(Debug, Clone)]
pub struct SingleRateIntegrator<'a> {
    system: &'a CoupledSystem,
    tableau: ButcherTableau,
    q1: Vec<Vec<Conserved>>,
    q2: Vec<Vec<Conserved>>,
    r1: Vec<Vec<Conserved>>,
    r2: Vec<Vec<Conserved>>,
}

impl<'a> SingleRateIntegrator<'a> {
    pub fn new(system: &'a CoupledSystem, tableau: ButcherTableau) -> Self {
        let n = tableau.stages();
        let z = [0.0; NVAR];
        let l1 = system.domain.grid1.len();
        let l2 = system.domain.grid2.len();
        Self {
            system,
            tableau,
            q1: vec![vec![z; l1]; n],
            q2: vec![vec![z; l2]; n],
            r1: vec![vec![z; l1]; n],
            r2: vec![vec![z; l2]; n],
        }
    }

    pub fn step(
        &mut self,
        state: &mut CoupledState,
        dt: f64,
        step: usize,
        ledger: &mut RhsEvalLedger,
    ) -> Result<StepReport, IntegratorError> {
        let sys = self.system;
        let g2 = &sys.domain.grid2;
        let part = sys.domain.partition;
        let bspan = g2.layer_span(part.buffer_layer_range());
        let sspan = g2.layer_span(part.slow_layer_range());
        let tab = &self.tableau;
        let q1n = state.field1.as_slice();
        let q2n = state.field2.as_slice();
        let area = face_area(sys);
        let mut report = StepReport::default();

        for i in 0..tab.stages() {
            let row = || tab.a_row(i).iter().copied().enumerate();
            // Ω₂ is combined per region so the arithmetic matches the multirate step
            let t2 = terms(row(), dt, &self.r2);
            let bt: Vec<_> = t2.iter().map(|(c, r)| (*c, &r[bspan.clone()])).collect();
            combine(&q2n[bspan.clone()], &bt, &mut self.q2[i][bspan.clone()]);
            let st: Vec<_> = t2.iter().map(|(c, r)| (*c, &r[sspan.clone()])).collect();
            combine(&q2n[sspan.clone()], &st, &mut self.q2[i][sspan.clone()]);
            let t1 = terms(row(), dt, &self.r1);
            combine(q1n, &t1, &mut self.q1[i]);

            let fluxes = sys
                .exchange(i, &self.q1[i], i, &self.q2[i])
                .map_err(|source| IntegratorError::Coupling { step, stage: i, source })?;
            let rows = fluxes.viscous_rows();
            let inputs = StageInputs { omega1: &self.q1[i], omega2: &self.q2[i], interface: Some(&rows) };
            let wrap = |region| move |source| IntegratorError::Rhs { step, stage: i, region, source };
            // Ω₂ in a single sweep, as a plain single-rate solver would do it
            let fb = sys
                .operator2()
                .evaluate(&self.q2[i], Some(&rows), 0..g2.nz, &mut self.r2[i])
                .map_err(|source| {
                    let region = match &source {
                        SpatialError::NonPhysical { element, .. } | SpatialError::NonPhysicalFace { element, .. } => {
                            part.region_of_layer(g2.ijk(*element)[2])
                        }
                        _ => Region::Buffer,
                    };
                    IntegratorError::Rhs { step, stage: i, region, source }
                })?;
            ledger.record(Region::Buffer, sys.region_len(Region::Buffer) as u64);
            ledger.record(Region::Slow, sys.region_len(Region::Slow) as u64);
            let ff = sys
                .rhs_region(Region::Fast, &inputs, &mut self.r1[i], ledger)
                .map_err(wrap(Region::Fast))?;
            let w = dt * tab.b()[i];
            accumulate_interface(&mut report.interface, w, w, area, &ff, &fb, sys);
        }

        let bw = || tab.b().iter().copied().enumerate();
        let mut new1 = vec![[0.0; NVAR]; q1n.len()];
        combine(q1n, &terms(bw(), dt, &self.r1), &mut new1);
        let mut new2 = vec![[0.0; NVAR]; q2n.len()];
        let t2 = terms(bw(), dt, &self.r2);
        let bt: Vec<_> = t2.iter().map(|(c, r)| (*c, &r[bspan.clone()])).collect();
        combine(&q2n[bspan.clone()], &bt, &mut new2[bspan.clone()]);
        let st: Vec<_> = t2.iter().map(|(c, r)| (*c, &r[sspan.clone()])).collect();
        combine(&q2n[sspan.clone()], &st, &mut new2[sspan.clone()]);
        state.field1.as_mut_slice().copy_from_slice(&new1);
        state.field2.as_mut_slice().copy_from_slice(&new2);
        state.t += dt;
        Ok(report)
    }
}

/// One single-rate step with `tableau` (convenience wrapper).
pub fn single_rate_step(
    system: &CoupledSystem,
    state: &CoupledState,
    tableau: &ButcherTableau,
    dt: f64,
    ledger: &mut RhsEvalLedger,
) -> Result<(CoupledState, StepReport), IntegratorError> {
    let mut out = state.clone();
    let report = SingleRateIntegrator::new(system, tableau.clone()).step(&mut out, dt, 0, ledger)?;
    Ok((out, report))
}

/// Time integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Scheme {
    /// Multirate scheme over the base RK2 method with rate ratio `m`.
    Mprk { m: usize },
    Rk2,
    /// Classical fourth-order reference.
    Rk4,
}

impl Scheme {
    pub fn name(&self) -> String {
        match self {
            Scheme::Mprk { m } => format!("mprk(m={m})"),
            Scheme::Rk2 => "rk2".into(),
            Scheme::Rk4 => "rk4".into(),
        }
    }
}

/// Fixed-step integration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Hook cadence in steps; 0 and 1 both mean every step.
    pub cadence: usize,
    pub check_buffer: bool,
}

/// Outcome of [`integrate`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntegrationSummary {
    pub steps: usize,
    /// Distinct step sizes used, in order (the last one may be a truncated step).
    pub dt_sequence: Vec<(f64, usize)>,
    pub ledger: RhsEvalLedger,
    pub interface: InterfaceBalance,
    /// Largest per-step interface residual.
    pub max_interface_residual: f64,
    pub max_buffer_defect: Option<f64>,
}

/// Splits `[t0, t_end]` into steps of `dt`, the last one truncated to land
/// exactly on `t_end`. Returns the number of full steps and the partial step.
pub fn step_plan(t0: f64, t_end: f64, dt: f64) -> (usize, Option<f64>) {
    let span = t_end - t0;
    if span <= 0.0 {
        return (0, None);
    }
    let ratio = span / dt;
    let full = ratio.round();
    if (ratio - full).abs() <= 1e-9 * ratio.max(1.0) {
        return (full as usize, None);
    }
    let full = ratio.floor() as usize;
    let rest = t_end - (t0 + full as f64 * dt);
    (full, Some(rest))
}

enum Stepper<'a> {
    Multi(MprkIntegrator<'a>),
    Single(SingleRateIntegrator<'a>),
}

/// Advances `state` to `options.t_end` with `scheme`. `hook` sees the state at
/// step 0, every `cadence` steps and at the final step.
pub fn integrate(
    system: &CoupledSystem,
    state: &mut CoupledState,
    scheme: Scheme,
    options: &IntegrateOptions,
    hook: &mut dyn FnMut(usize, &CoupledState),
) -> Result<IntegrationSummary, IntegratorError> {
    if !(options.dt > 0.0) || !options.dt.is_finite() {
        return Err(IntegratorError::Setup(format!("dt = {} must be positive", options.dt)));
    }
    if !(options.t_end >= state.t) {
        return Err(IntegratorError::Setup(format!(
            "t_end = {} precedes the current time {}",
            options.t_end, state.t
        )));
    }
    state.check(&system.domain)?;
    let mut stepper = match scheme {
        Scheme::Mprk { m } => {
            let mut it = MprkIntegrator::new(system, generate_mprk(&ButcherTableau::base_rk2(), m)?);
            it.check_buffer = options.check_buffer;
            Stepper::Multi(it)
        }
        Scheme::Rk2 => Stepper::Single(SingleRateIntegrator::new(system, ButcherTableau::base_rk2())),
        Scheme::Rk4 => Stepper::Single(SingleRateIntegrator::new(system, ButcherTableau::classical_rk4())),
    };
    let cadence = options.cadence.max(1);
    let t0 = state.t;
    let (full, partial) = step_plan(t0, options.t_end, options.dt);
    let total = full + partial.is_some() as usize;
    let mut summary = IntegrationSummary::default();
    hook(0, state);
    for k in 0..total {
        let dt = if k < full { options.dt } else { partial.unwrap_or(options.dt) };
        let report = match &mut stepper {
            Stepper::Multi(it) => it.step(state, dt, k, &mut summary.ledger)?,
            Stepper::Single(it) => it.step(state, dt, k, &mut summary.ledger)?,
        };
        // land on grid times without accumulating round-off
        state.t = if k + 1 == total { options.t_end } else { t0 + (k + 1) as f64 * options.dt };
        summary.steps += 1;
        match summary.dt_sequence.last_mut() {
            Some((d, count)) if *d == dt => *count += 1,
            _ => summary.dt_sequence.push((dt, 1)),
        }
        summary.interface.add(&report.interface);
        summary.max_interface_residual = summary.max_interface_residual.max(report.interface.max_abs_residual());
        if let Some(d) = report.buffer_defect {
            summary.max_buffer_defect = Some(summary.max_buffer_defect.map_or(d, |m: f64| m.max(d)));
        }
        let step_no = k + 1;
        if step_no % cadence == 0 || step_no == total {
            if let Err((element, _)) = state.field1.validity_scan(system.gamma()) {
                return Err(IntegratorError::NonPhysical { step: k, domain: 1, element });
            }
            if let Err((element, _)) = state.field2.validity_scan(system.gamma()) {
                return Err(IntegratorError::NonPhysical { step: k, domain: 2, element });
            }
            hook(step_no, state);
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_exact_multiple() {
        assert_eq!(step_plan(0.0, 500.0, 0.25), (2000, None));
        assert_eq!(step_plan(0.0, 2.5, 0.025 / 8.0), (800, None));
        assert_eq!(step_plan(1.0, 1.0, 0.1), (0, None));
    }

    #[test]
    fn plan_partial_step() {
        let (n, p) = step_plan(0.0, 1.0, 0.3);
        assert_eq!(n, 3);
        assert!((p.unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn ledger_records() {
        let mut l = RhsEvalLedger::default();
        l.record(Region::Slow, 10);
        l.record(Region::Fast, 4);
        l.record(Region::Fast, 4);
        assert_eq!(l.evals(Region::Fast), 2);
        assert_eq!(l.elements(Region::Fast), 8);
        assert_eq!(l.total_elements(), 18);
    }

    #[test]
    fn combine_skips_nothing_it_should_not() {
        let base = vec![[1.0; NVAR]; 3];
        let r = vec![[2.0; NVAR]; 3];
        let mut out = vec![[0.0; NVAR]; 3];
        combine(&base, &[(0.5, &r)], &mut out);
        assert_eq!(out[2], [2.0; NVAR]);
        combine(&base, &[], &mut out);
        assert_eq!(out, base);
    }
}
