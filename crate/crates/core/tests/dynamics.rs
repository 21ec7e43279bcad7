use std::process::Command;

use hylos::evolve::{run, EvolveConfig, Scheme};
use hylos::groundstate::{find_ground_state, RadialProfile, ShootingTolerances};
use hylos::observables::{local_frequency_wavenumber, peak_position, FieldState, NsState};
use hylos::symmetry::{galilean_boost, lorentz_boost_initialdata, standing_wave};
use hylos::{Equation, ExternalPotential, Grid, NonlinearModel};
use num_complex::Complex64;

fn quartic_ns() -> (NonlinearModel, RadialProfile) {
    let m = NonlinearModel::power_focusing(2.0, 4.0, 1.0, Equation::Ns).unwrap();
    let p = find_ground_state(&m, 0.5, 1, &ShootingTolerances::default()).unwrap();
    (m, p)
}

fn double_power_nkg(dim: usize) -> (NonlinearModel, RadialProfile) {
    let m = NonlinearModel::double_power(4.0, 4.0, 6.0, 1.0, 0.05, Equation::Nkg).unwrap();
    let p = find_ground_state(&m, 1.2, dim, &ShootingTolerances::default()).unwrap();
    (m, p)
}

#[test]
fn galilean_covariance_of_evolution() {
    let (m, p) = quartic_ns();
    let grid = Grid::new(1, &[40.0], &[1024]).unwrap();
    let rest = match standing_wave(&p, &grid, &[0.0], 0.0).unwrap() {
        FieldState::Ns(s) => s,
        _ => unreachable!(),
    };
    let (v, x0, t) = (0.3, -2.0, 5.0);
    let cfg = EvolveConfig::new(Scheme::NsSplitstep, 1e-3, t).with_diagnostics_every(5000);
    let zero = ExternalPotential::Zero;

    let boosted = galilean_boost(&rest, &[v], &[x0]).unwrap();
    let a = run(&FieldState::Ns(boosted), &m, &zero, &cfg, &mut []).unwrap();

    let evolved = run(&FieldState::Ns(rest), &m, &zero, &cfg, &mut []).unwrap();
    let at_t = NsState::new(evolved.final_state.psi().clone(), t);
    let b = galilean_boost(&at_t, &[v], &[x0]).unwrap();

    let err = a.final_state.psi().sup_distance(&b.psi);
    assert!(err < 1e-5, "boost and evolution differ by {err}");
}

#[test]
fn lorentz_boosted_soliton_keeps_integrals_and_de_broglie_relation() {
    let (m, p) = double_power_nkg(1);
    let grid = Grid::new(1, &[40.0], &[1024]).unwrap();
    let v = 0.5;
    let (init, lp) = lorentz_boost_initialdata(&p, &grid, p.omega, v, &[-3.0], 0.0).unwrap();
    assert!((lp.k / lp.omega - v).abs() < 1e-15);
    let cfg = EvolveConfig::new(Scheme::NkgLeapfrog, 5e-4, 6.0)
        .with_diagnostics_every(1000)
        .with_snapshots_every(10);
    let traj = run(&FieldState::Kg(init), &m, &ExternalPotential::Zero, &cfg, &mut []).unwrap();
    let (first, last) = (&traj.rows[0], traj.rows.last().unwrap());
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    assert!(rel(last.energy, first.energy) < 1e-6);
    assert!(rel(last.charge, first.charge) < 1e-6);
    assert!(rel(last.momentum[0], first.momentum[0]) < 1e-6);

    // peak speed over the second half of the run
    let half = traj.snapshots.len() / 2;
    let (t0, x0) = (traj.snapshots[half].time(), peak_position(traj.snapshots[half].psi()).0);
    let end = traj.snapshots.last().unwrap();
    let speed = (peak_position(end.psi()).0 - x0) / (end.time() - t0);
    assert!((speed - v).abs() < 1e-3, "peak speed {speed}");

    // local k/ω at the moving peak
    let history: Vec<_> = traj.snapshots[half - 1..=half + 1]
        .iter()
        .map(|s| (s.time(), s.psi().clone()))
        .collect();
    let db = local_frequency_wavenumber(&history, 1e-3).unwrap();
    let (_, k_peak) = peak_position(&history[1].1);
    let ratio = db.k[0][k_peak] / db.omega[k_peak];
    assert!((ratio - v).abs() < 0.01 * v, "k/omega = {ratio}");
}

#[test]
fn leapfrog_phase_error_is_second_order() {
    let (m, p) = double_power_nkg(1);
    let grid = Grid::new(1, &[40.0], &[512]).unwrap();
    let init = standing_wave(&p, &grid, &[0.0], 0.0).unwrap();
    let t = 2.0;
    let error = |dt: f64| {
        let cfg = EvolveConfig::new(Scheme::NkgLeapfrog, dt, t).with_diagnostics_every(1 << 20);
        let traj = run(&init, &m, &ExternalPotential::Zero, &cfg, &mut []).unwrap();
        let want = init.psi().scaled(Complex64::from_polar(1.0, -p.omega * t));
        traj.final_state.psi().sup_distance(&want)
    };
    let (coarse, fine) = (error(0.02), error(0.01));
    let ratio = coarse / fine;
    assert!((3.5..4.5).contains(&ratio), "errors {coarse:e} {fine:e}, ratio {ratio}");
}

#[test]
fn radial_step_convergence_in_three_dimensions() {
    let m = NonlinearModel::power_focusing(2.0, 4.0, 1.0, Equation::Ns).unwrap();
    let solve = |h_r: f64| {
        let tol = ShootingTolerances { h_r, ..ShootingTolerances::default() };
        find_ground_state(&m, 0.5, 3, &tol).unwrap()
    };
    let (coarse, fine) = (solve(1e-3), solve(5e-4));
    let rel = (coarse.u0() - fine.u0()).abs() / fine.u0();
    assert!(rel < 1e-5, "u(0) moved by {rel:e}");
}

#[test]
fn accepted_profiles_are_positive_decreasing_and_decaying() {
    for (m, p) in [quartic_ns(), double_power_nkg(3)] {
        assert!(m.rest_energy() > 0.0);
        let live: Vec<usize> = (0..p.u.len()).filter(|&j| p.u[j] > 0.0).collect();
        assert_eq!(live.len(), p.u.len(), "profile must stay positive");
        assert!(p.u.windows(2).all(|w| w[1] < w[0]), "profile must decrease strictly");
        assert_eq!(p.du[0], 0.0);
        // r^{(N−1)/2}·u is bounded along the tail and ends far below u(0)
        let weight = |j: usize| p.r[j].powf(0.5 * (p.dim as f64 - 1.0)) * p.u[j];
        let tail_start = p.u.len() / 2;
        let sup = (tail_start..p.u.len()).map(weight).fold(0.0, f64::max);
        assert!(sup.is_finite() && sup <= weight(tail_start) * (1.0 + 1e-9));
        assert!(*p.u.last().unwrap() < 1e-8 * p.u0());
    }
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hylos")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn cli_exit_codes_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    let strict = dir.path().join("strict.toml");
    let broken = dir.path().join("broken.toml");
    let base = "experiment = \"groundstate\"\nmodel.family = \"power_focusing\"\nmodel.equation = \"ns\"\n\
                model.a = 2.0\nmodel.p = 4.0\nmodel.c = 1.0\ngroundstate.omega = 0.5\ngroundstate.dim = 1\n";
    std::fs::write(&good, base).unwrap();
    std::fs::write(&strict, format!("{base}groundstate.pohozaev_tol = 1e-300\n")).unwrap();
    std::fs::write(&broken, format!("{base}model.flavour = 1\n")).unwrap();

    let out = dir.path().join("out");
    let (code, stdout) = cli(&["experiment", "--config", good.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "PASS");
    assert!(out.join("profile.csv").exists());

    assert_eq!(cli(&["experiment", "--config", strict.to_str().unwrap()]).0, 2);
    assert_eq!(cli(&["validate", "--config", broken.to_str().unwrap()]).0, 1);
    assert_eq!(cli(&["validate", "--config", good.to_str().unwrap()]).0, 0);
    assert_eq!(cli(&["experiment", "nonsense", "--config", good.to_str().unwrap()]).0, 1);
}
