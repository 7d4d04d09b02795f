//! Conservation histories, L2 error norms and the multirate speedup models.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{ConservedField, CoupledDomain, CoupledState, RegionCounts, StructuredGrid};
use crate::integrator::RhsEvalLedger;
use crate::physics::{conserved_to_primitive, Axis, NVAR};

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("fields have {a} and {b} elements on a grid of {grid}")]
    GridMismatch { a: usize, b: usize, grid: usize },
    #[error("speedup inputs inconsistent: {0}")]
    Inputs(String),
    #[error("ledgers are not comparable: {0}")]
    LedgerMismatch(String),
}

/// `sqrt(sum_l |K| (a_l - b_l)^2)` per conserved variable.
pub fn l2_error(a: &ConservedField, b: &ConservedField, grid: &StructuredGrid) -> Result<[f64; NVAR], DiagnosticsError> {
    Ok(sqrt_all(l2_sum_squares(a, b, grid)?))
}

/// Volume-weighted squared differences `sum_l |K| (a_l - b_l)^2`, per variable.
pub fn l2_sum_squares(
    a: &ConservedField,
    b: &ConservedField,
    grid: &StructuredGrid,
) -> Result<[f64; NVAR], DiagnosticsError> {
    if a.len() != grid.len() || b.len() != grid.len() {
        return Err(DiagnosticsError::GridMismatch { a: a.len(), b: b.len(), grid: grid.len() });
    }
    let vol = grid.volume();
    // fixed-size chunks keep the summation order independent of the thread count
    let partial: Vec<[f64; NVAR]> = a
        .as_slice()
        .par_chunks(4096)
        .zip(b.as_slice().par_chunks(4096))
        .map(|(ca, cb)| {
            let mut s = [0.0; NVAR];
            for (x, y) in ca.iter().zip(cb) {
                for v in 0..NVAR {
                    let d = x[v] - y[v];
                    s[v] += d * d;
                }
            }
            s
        })
        .collect();
    let mut s = [0.0; NVAR];
    for p in partial {
        for v in 0..NVAR {
            s[v] += p[v];
        }
    }
    for v in &mut s {
        *v *= vol;
    }
    Ok(s)
}

fn sqrt_all(mut s: [f64; NVAR]) -> [f64; NVAR] {
    for v in &mut s {
        *v = v.sqrt();
    }
    s
}

/// Per-variable L2 difference summed over both subdomains.
pub fn coupled_l2_error(
    a: &CoupledState,
    b: &CoupledState,
    domain: &CoupledDomain,
) -> Result<[f64; NVAR], DiagnosticsError> {
    let s1 = l2_sum_squares(&a.field1, &b.field1, &domain.grid1)?;
    let s2 = l2_sum_squares(&a.field2, &b.field2, &domain.grid2)?;
    let mut s = [0.0; NVAR];
    for v in 0..NVAR {
        s[v] = s1[v] + s2[v];
    }
    Ok(sqrt_all(s))
}

/// Error norms grouped as density, momentum vector and total energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupedError {
    pub density: f64,
    pub momentum: f64,
    pub energy: f64,
}

impl GroupedError {
    pub fn from_components(e: &[f64; NVAR]) -> Self {
        Self {
            density: e[0],
            momentum: (e[1] * e[1] + e[2] * e[2] + e[3] * e[3]).sqrt(),
            energy: e[4],
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.density, self.momentum, self.energy]
    }
}

/// Counts entering the speedup model: slow, buffer, fast and total elements
/// (or per-process elements for the parallel model).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedupInputs {
    pub m: usize,
    pub slow: f64,
    pub buffer: f64,
    pub fast: f64,
    pub total: f64,
}

impl SpeedupInputs {
    pub fn from_counts(m: usize, c: &RegionCounts) -> Self {
        Self { m, slow: c.slow as f64, buffer: c.buffer as f64, fast: c.fast as f64, total: c.total as f64 }
    }

    /// Inputs with only the slow fraction `slow / total` known.
    pub fn from_ratio(m: usize, slow: f64, total: f64) -> Self {
        Self { m, slow, buffer: 0.0, fast: total - slow, total }
    }

    fn check(&self) -> Result<(), DiagnosticsError> {
        if self.m == 0 {
            return Err(DiagnosticsError::Inputs("m must be at least 1".into()));
        }
        if !(self.total > 0.0) || self.slow < 0.0 || self.slow > self.total {
            return Err(DiagnosticsError::Inputs(format!("slow = {}, total = {}", self.slow, self.total)));
        }
        Ok(())
    }
}

/// Ideal serial speedup `(1 + (1/m - 1) N_S / N_total)^-1` of the multirate
/// scheme over its base method run at the fast step size.
pub fn serial_speedup(inputs: &SpeedupInputs) -> Result<f64, DiagnosticsError> {
    inputs.check()?;
    let m = inputs.m as f64;
    Ok(1.0 / (1.0 + (1.0 / m - 1.0) * inputs.slow / inputs.total))
}

/// Ideal parallel speedup from per-process element counts. With one process
/// the counts are global and the value equals [`serial_speedup`].
pub fn parallel_speedup(inputs: &SpeedupInputs) -> Result<f64, DiagnosticsError> {
    serial_speedup(inputs)
}

/// Work ratio of a single-rate run and a multirate run over the same time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredSpeedup {
    /// Element-evaluation ratio `N_SR / N_MPRK`.
    pub eval_ratio: f64,
    pub sr_elements: u64,
    pub mprk_elements: u64,
    /// Wall-clock ratio when both runs were timed.
    pub wall_clock_ratio: Option<f64>,
}

pub fn measured_speedup(
    ledger_sr: &RhsEvalLedger,
    ledger_mprk: &RhsEvalLedger,
    timings: Option<(f64, f64)>,
) -> Result<MeasuredSpeedup, DiagnosticsError> {
    let sr = ledger_sr.total_elements();
    let mp = ledger_mprk.total_elements();
    if sr == 0 || mp == 0 {
        return Err(DiagnosticsError::LedgerMismatch("a ledger recorded no evaluations".into()));
    }
    if ledger_sr.fast_evals != ledger_sr.slow_evals || ledger_sr.fast_evals != ledger_sr.buffer_evals {
        return Err(DiagnosticsError::LedgerMismatch(
            "the single-rate ledger must evaluate every region equally often".into(),
        ));
    }
    Ok(MeasuredSpeedup {
        eval_ratio: sr as f64 / mp as f64,
        sr_elements: sr,
        mprk_elements: mp,
        wall_clock_ratio: timings.map(|(t_sr, t_mp)| t_sr / t_mp),
    })
}

/// One conservation record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
}

/// Total mass and energy over both subdomains in time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConservationHistory {
    pub records: Vec<ConservationRecord>,
}

impl ConservationHistory {
    pub fn record(&mut self, state: &CoupledState, domain: &CoupledDomain) {
        self.records.push(ConservationRecord {
            t: state.t,
            mass: state.total_mass(domain),
            energy: state.total_energy(domain),
        });
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `|mass(t) - mass(0)|` of every record.
    pub fn mass_drift(&self) -> Vec<f64> {
        let m0 = self.records.first().map_or(0.0, |r| r.mass);
        self.records.iter().map(|r| (r.mass - m0).abs()).collect()
    }

    pub fn energy_drift(&self) -> Vec<f64> {
        let e0 = self.records.first().map_or(0.0, |r| r.energy);
        self.records.iter().map(|r| (r.energy - e0).abs()).collect()
    }

    /// Largest `|mass(t) - mass(0)| / mass(0)`.
    pub fn max_relative_mass_drift(&self) -> f64 {
        let m0 = self.records.first().map_or(1.0, |r| r.mass.abs());
        self.mass_drift().into_iter().fold(0.0, f64::max) / m0
    }

    pub fn max_relative_energy_drift(&self) -> f64 {
        let e0 = self.records.first().map_or(1.0, |r| r.energy.abs());
        self.energy_drift().into_iter().fold(0.0, f64::max) / e0
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,mass,energy,mass_drift,energy_drift")?;
        let (md, ed) = (self.mass_drift(), self.energy_drift());
        for (i, r) in self.records.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", r.t, r.mass, r.energy, md[i], ed[i])?;
        }
        Ok(())
    }
}

/// `dt * max_elements sum_d (|u_d| + a) / h_d` over the active axes.
pub fn courant_number(field: &ConservedField, grid: &StructuredGrid, gamma: f64, dt: f64) -> f64 {
    let h = grid.spacing();
    let axes: Vec<Axis> = Axis::ALL.into_iter().filter(|a| *a != Axis::Y || grid.is_3d()).collect();
    let worst = field
        .as_slice()
        .par_iter()
        .map(|q| match conserved_to_primitive(q, gamma) {
            Ok(w) => axes.iter().map(|a| w.spectral_radius(*a, gamma) / h[a.index()]).sum::<f64>(),
            Err(_) => f64::INFINITY,
        })
        .reduce(|| 0.0, f64::max);
    dt * worst
}

/// Observed order `log2(e_coarse / e_fine)` of successive halvings.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(m: usize, slow: f64, total: f64) -> f64 {
        serial_speedup(&SpeedupInputs::from_ratio(m, slow, total)).unwrap()
    }

    #[test]
    fn serial_table_values() {
        assert!((ratio(8, 84.0, 100.0) - 3.77).abs() < 5e-3);
        assert!((ratio(2, 4.0, 100.0) - 1.02).abs() < 5e-3);
        assert_eq!(ratio(1, 30.0, 100.0), 1.0);
    }

    #[test]
    fn parallel_table_values() {
        let p = parallel_speedup(&SpeedupInputs::from_ratio(8, 705.0, 800.0)).unwrap();
        assert!((p - 4.37).abs() < 5e-3);
        assert_eq!(parallel_speedup(&SpeedupInputs::from_ratio(8, 0.0, 800.0)).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(serial_speedup(&SpeedupInputs::from_ratio(0, 1.0, 2.0)).is_err());
        assert!(serial_speedup(&SpeedupInputs::from_ratio(2, 3.0, 2.0)).is_err());
    }

    #[test]
    fn identical_fields_have_zero_error() {
        let g = StructuredGrid::new([0.0; 3], [1.0; 3], [3, 2, 2]).unwrap();
        let f = ConservedField::from_fn(&g, |i, j, k| [1.0 + (i + j + k) as f64, 0.0, 0.0, 0.0, 2.0]);
        assert_eq!(l2_error(&f, &f, &g).unwrap(), [0.0; NVAR]);
    }

    #[test]
    fn constant_difference_on_unit_volume() {
        let g = StructuredGrid::new([0.0; 3], [1.0; 3], [4, 1, 5]).unwrap();
        let a = ConservedField::from_fn(&g, |_, _, _| [1.0, 0.0, 0.0, 0.0, 2.0]);
        let b = ConservedField::from_fn(&g, |_, _, _| [1.5, 0.0, 0.0, 0.0, 2.0]);
        let e = l2_error(&a, &b, &g).unwrap();
        assert!((e[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn grid_mismatch() {
        let g = StructuredGrid::new([0.0; 3], [1.0; 3], [2, 1, 2]).unwrap();
        let a = ConservedField::zeros(4);
        let b = ConservedField::zeros(3);
        assert!(l2_error(&a, &b, &g).is_err());
    }

    #[test]
    fn orders_of_halvings() {
        let o = observed_orders(&[4.0, 1.0, 0.25]);
        assert_eq!(o, vec![2.0, 2.0]);
    }

    #[test]
    fn csv_layout() {
        let h = ConservationHistory {
            records: vec![
                ConservationRecord { t: 0.0, mass: 2.0, energy: 3.0 },
                ConservationRecord { t: 0.5, mass: 2.0, energy: 3.5 },
            ],
        };
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,mass,energy,mass_drift,energy_drift");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].ends_with("5.0000000000000000e-1"));
    }
}
