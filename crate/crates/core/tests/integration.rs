use mprk_core::domain::{build_coupled_domain, Region};
use mprk_core::integrator::{integrate, IntegrateOptions, IntegratorError, Scheme};
use mprk_core::scenarios::{convection_config, initialize, preset, stratified_state, ScenarioConfig};
use mprk_core::studies::conservation_run;

fn opts(dt: f64, t_end: f64) -> IntegrateOptions {
    IntegrateOptions { dt, t_end, cadence: 0, check_buffer: false }
}

#[test]
fn hydrostatic_mass_matches_closed_form() {
    let base = convection_config(4, 4, 8);
    let f = base.fluid;
    let n = 1.0 / (f.gamma - 1.0);
    let cp = n;
    // integral of Psi^n over z, Psi = 1 + g z / cp
    let antider = |z: f64| (1.0 + f.gravity * z / cp).powf(n + 1.0) * cp / (f.gravity * (n + 1.0));
    let exact = 10.0 * (antider(5.0) - antider(-5.0));
    let mut errs = Vec::new();
    for nz in [8, 16, 32] {
        let mut cfg: ScenarioConfig = base.clone();
        cfg.bubbles.clear();
        cfg.omega1.cells[2] = nz;
        cfg.omega2.cells[2] = nz;
        let d = build_coupled_domain(&cfg.domain_config()).unwrap();
        let s = initialize(&cfg).unwrap();
        errs.push((s.total_mass(&d) - exact).abs());
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.05, "{errs:?}");
    }
    let (rho, _, _) = stratified_state(&f, 0.0, 0.0).unwrap();
    assert_eq!(rho, 1.0);
}

#[test]
fn ledger_counts_follow_rate_ratio() {
    let cfg = convection_config(10, 10, 20);
    let system = cfg.build_system().unwrap();
    let mut s = initialize(&cfg).unwrap();
    let summary = integrate(&system, &mut s, Scheme::Mprk { m: 4 }, &opts(0.025, 0.1), &mut |_, _| {}).unwrap();
    let l = summary.ledger;
    assert_eq!(summary.steps, 4);
    assert_eq!(l.evals(Region::Fast), 4 * 8);
    assert_eq!(l.evals(Region::Buffer), 4 * 8);
    assert_eq!(l.evals(Region::Slow), 4 * 2);
    assert_eq!(l.evals(Region::Fast), 4 * l.evals(Region::Slow));
}

#[test]
fn final_partial_step_lands_on_t_end() {
    let cfg = convection_config(8, 8, 8);
    let system = cfg.build_system().unwrap();
    let mut s = initialize(&cfg).unwrap();
    let mut seen = Vec::new();
    let summary = integrate(&system, &mut s, Scheme::Rk2, &opts(0.03, 0.1), &mut |k, st| seen.push((k, st.t))).unwrap();
    assert_eq!(s.t, 0.1);
    assert_eq!(summary.steps, 4);
    assert_eq!(summary.dt_sequence.len(), 2);
    assert!((summary.dt_sequence[1].0 - 0.01).abs() < 1e-15);
    assert_eq!(seen.first(), Some(&(0, 0.0)));
    assert_eq!(seen.last().map(|p| p.0), Some(4));
}

#[test]
fn zero_length_run_only_sees_initial_state() {
    let cfg = convection_config(8, 8, 8);
    let system = cfg.build_system().unwrap();
    let mut s = initialize(&cfg).unwrap();
    let before = s.clone();
    let mut calls = 0;
    let summary = integrate(&system, &mut s, Scheme::Mprk { m: 2 }, &opts(0.025, 0.0), &mut |_, _| calls += 1).unwrap();
    assert_eq!((summary.steps, calls), (0, 1));
    assert_eq!(s, before);
}

#[test]
fn nonphysical_state_reports_step() {
    let cfg = convection_config(8, 8, 8);
    let system = cfg.build_system().unwrap();
    let mut s = initialize(&cfg).unwrap();
    s.field2.as_mut_slice()[30][0] = -1.0;
    let err = integrate(&system, &mut s, Scheme::Mprk { m: 2 }, &opts(0.025, 0.1), &mut |_, _| {}).unwrap_err();
    match err {
        IntegratorError::Rhs { step, .. } => assert_eq!(step, 0),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn hydrostatic_rest_in_3d_stays_near_rest() {
    let mut cfg = preset("bubble3d").unwrap();
    cfg.bubbles.clear();
    cfg.omega1.cells = [4, 4, 12];
    cfg.omega2.cells = [4, 4, 8];
    let system = cfg.build_system().unwrap();
    let mut s = initialize(&cfg).unwrap();
    integrate(&system, &mut s, Scheme::Mprk { m: 2 }, &opts(0.05, 0.5), &mut |_, _| {}).unwrap();
    let speed = s
        .field1
        .as_slice()
        .iter()
        .chain(s.field2.as_slice())
        .map(|q| (q[1].abs() + q[2].abs() + q[3].abs()) / q[0])
        .fold(0.0, f64::max);
    assert!(speed < 1e-3, "{speed}");
}

#[test]
fn thermal_bubble_3d_conserves_mass() {
    let mut cfg = preset("bubble3d").unwrap();
    cfg.omega1.cells = [8, 8, 16];
    cfg.omega2.cells = [8, 8, 8];
    let case = conservation_run(&cfg, Scheme::Mprk { m: 4 }, 0.05, 10, true).unwrap();
    assert!(case.domain_mass_drift[0] < 1e-12 && case.domain_mass_drift[1] < 1e-12, "{case:?}");
    assert_eq!(case.max_interface_residual, 0.0);
    assert_eq!(case.max_buffer_defect, Some(0.0));
}

#[test]
fn wind_column_runs() {
    let mut cfg = preset("wind3d").unwrap();
    cfg.omega1.cells[0] = 6;
    cfg.omega1.cells[1] = 6;
    cfg.omega2.cells[0] = 6;
    cfg.omega2.cells[1] = 6;
    let case = conservation_run(&cfg, Scheme::Mprk { m: 4 }, 0.05, 4, false).unwrap();
    assert!(case.mass_drift < 1e-12);
}
