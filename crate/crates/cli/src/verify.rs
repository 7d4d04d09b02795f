//! Quick invariant suite behind `mprk verify`.

use anyhow::Result;
use mprk_core::domain::Region;
use mprk_core::integrator::{integrate, IntegrateOptions, Scheme};
use mprk_core::scenarios::{convection_config, initialize, khi_config, preset};
use mprk_core::spatial::StageInputs;
use mprk_core::studies::{buffer_adequacy, conservation_run, study_speedup, SpeedupStudyConfig};
use mprk_core::{generate_mprk, ButcherTableau, RhsEvalLedger, NVAR};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

fn tableaus() -> Result<Check> {
    let mut worst = 0.0_f64;
    let mut same_b = true;
    for m in [1, 2, 4, 8] {
        let set = generate_mprk(&ButcherTableau::base_rk2(), m)?;
        for t in [&set.fast, &set.buffer, &set.slow] {
            worst = worst.max((t.weight_sum() - 1.0).abs()).max((t.second_order_sum() - 0.5).abs());
        }
        same_b &= set.fast.b() == set.buffer.b();
    }
    Ok(check("order conditions", worst <= 1e-14 && same_b, format!("max defect {worst:.1e}")))
}

fn single_rate() -> Result<Check> {
    let cfg = convection_config(10, 10, 20);
    let system = cfg.build_system()?;
    let opts = IntegrateOptions { dt: 0.025, t_end: 0.5, cadence: 0, check_buffer: false };
    let mut a = initialize(&cfg)?;
    let mut b = a.clone();
    integrate(&system, &mut a, Scheme::Mprk { m: 1 }, &opts, &mut |_, _| {})?;
    integrate(&system, &mut b, Scheme::Rk2, &opts, &mut |_, _| {})?;
    let d = a.max_abs_diff(&b);
    Ok(check("single-rate reduction", d <= 1e-13, format!("max difference {d:.1e}")))
}

fn mass() -> Result<Check> {
    let cfg = khi_config(40, 20);
    let mut worst = 0.0_f64;
    for m in [1, 2, 4, 8] {
        worst = worst.max(conservation_run(&cfg, Scheme::Mprk { m }, 0.25, 40, false)?.mass_drift);
    }
    Ok(check("mass conservation", worst <= 1e-12, format!("max relative drift {worst:.1e}")))
}

fn interface() -> Result<Check> {
    let mut cfg = preset("convection2d-dual").expect("preset exists");
    cfg.omega1.cells = [20, 1, 28];
    cfg.omega2.cells = [20, 1, 48];
    let c = conservation_run(&cfg, Scheme::Mprk { m: 4 }, 0.025, 20, false)?;
    let pass = c.max_interface_residual == 0.0 && c.domain_mass_drift.iter().all(|&d| d <= 1e-12);
    Ok(check(
        "conservative interface",
        pass,
        format!("residual {:.1e}, mass drift {:.1e}/{:.1e}", c.max_interface_residual, c.domain_mass_drift[0], c.domain_mass_drift[1]),
    ))
}

fn split() -> Result<Check> {
    let mut cfg = preset("convection2d-dual").expect("preset exists");
    cfg.omega1.cells = [20, 1, 28];
    cfg.omega2.cells = [20, 1, 48];
    let system = cfg.build_system()?;
    let s = initialize(&cfg)?;
    let d = &system.domain;
    let rows = system.exchange(0, s.field1.as_slice(), 0, s.field2.as_slice())?.viscous_rows();
    let inputs = StageInputs { omega1: s.field1.as_slice(), omega2: s.field2.as_slice(), interface: Some(&rows) };
    let mut ledger = RhsEvalLedger::default();
    let mut parts = Vec::new();
    for region in [Region::Buffer, Region::Slow] {
        let mut out = vec![[0.0; NVAR]; system.region_len(region)];
        system.rhs_region(region, &inputs, &mut out, &mut ledger)?;
        parts.extend(out);
    }
    let mut o1 = vec![[0.0; NVAR]; d.grid1.len()];
    let mut o2 = vec![[0.0; NVAR]; d.grid2.len()];
    system.rhs_monolithic(s.field1.as_slice(), s.field2.as_slice(), &rows, &mut o1, &mut o2)?;
    let worst = parts
        .iter()
        .zip(&o2)
        .flat_map(|(a, b)| (0..NVAR).map(move |v| (a[v] - b[v]).abs()))
        .fold(0.0, f64::max);
    Ok(check("split transparency", worst <= 1e-14, format!("max difference {worst:.1e}")))
}

fn buffer() -> Result<Check> {
    let cfg = convection_config(10, 10, 20);
    let deep = buffer_adequacy(&cfg, 6, 8, 0.025, 2)?;
    let thin = buffer_adequacy(&cfg, 1, 8, 0.025, 2)?;
    Ok(check(
        "buffer seam check",
        deep.adequate && !thin.adequate,
        format!("6 layers {:.1e}, 1 layer {:.1e}", deep.max_defect, thin.max_defect),
    ))
}

fn speedup() -> Result<Check> {
    let c = SpeedupStudyConfig { n: 4, nz_total: 50, slow_steps: 1, ..Default::default() };
    let rows = study_speedup(&c)?;
    let ok = rows.iter().all(|r| r.identity_holds);
    Ok(check("eval-count identity", ok, format!("{} cases", rows.len())))
}

pub fn run_all() -> Result<Vec<Check>> {
    let suites: [fn() -> Result<Check>; 7] = [tableaus, single_rate, mass, interface, split, buffer, speedup];
    suites.iter().map(|f| f()).collect()
}
