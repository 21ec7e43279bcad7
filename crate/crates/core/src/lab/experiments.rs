//! The lab experiments. Each reads a [`RunConfig`], writes CSV
//! series and a JSON manifest when given an output directory, and returns the
//! [`Report`] with its verdicts.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{HylosError, Result};
use crate::evolve::{run, semiclassical_initial_data, EvolveConfig, Trajectory, TrajectorySink};
use crate::grid::{ComplexField, Grid, Spectral};
use crate::groundstate::{find_ground_state, RadialProfile};
use crate::io;
use crate::lab::config::RunConfig;
use crate::lab::oracles::{newton_oracle, position_at};
use crate::lab::report::Report;
use crate::models::{Equation, ExternalPotential, NonlinearModel};
use crate::observables::{
    derrick_pohozaev_residual, fit_velocity, half_max_width, liapunov_value, peak_position, profile_energy_charge,
    FieldState, KgState, NsState, Observer,
};
use crate::symmetry::{galilean_boost, lorentz_boost_initialdata, lorentz_params, standing_wave};

pub const EXPERIMENTS: [&str; 6] = [
    "groundstate",
    "stability",
    "travel",
    "potential_dynamics",
    "relativity",
    "hylomorphy_scan",
];

/// Runs the experiment named in `name` (or in the config when `name` is None).
pub fn run_experiment(name: Option<&str>, cfg: &RunConfig, out: Option<&Path>) -> Result<Report> {
    let name = name
        .or(cfg.experiment.as_deref())
        .ok_or_else(|| HylosError::Config("no experiment named".into()))?;
    let mut cfg = cfg.clone();
    cfg.experiment = Some(name.to_string());
    cfg.validate()?;
    let mut report = Report::new(name, &cfg, out)?;
    match name {
        "groundstate" => experiment_groundstate(&cfg, &mut report)?,
        "stability" => experiment_stability(&cfg, &mut report)?,
        "travel" => experiment_travel(&cfg, &mut report)?,
        "potential_dynamics" => experiment_potential_dynamics(&cfg, &mut report)?,
        "relativity" => experiment_relativity(&cfg, &mut report)?,
        "hylomorphy_scan" => experiment_hylomorphy_scan(&cfg, &mut report)?,
        other => return Err(HylosError::Config(format!("unknown experiment `{other}`"))),
    }
    report.finish()?;
    Ok(report)
}

fn solve(cfg: &RunConfig) -> Result<(NonlinearModel, RadialProfile)> {
    let model = cfg.model()?;
    let gs = cfg.groundstate()?;
    let profile = find_ground_state(&model, gs.omega, cfg.dim()?, &gs.tolerances())?;
    Ok((model, profile))
}

fn observer(cfg: &RunConfig, grid: &Grid, model: &NonlinearModel) -> Result<Observer> {
    Ok(Observer::new(grid, *model, &cfg.potential.build()?))
}

fn write_rows(report: &mut Report, name: &str, traj: &Trajectory) -> Result<()> {
    if let Some(path) = report.artifact(name) {
        io::write_diagnostics(&path, &traj.rows)?;
    }
    Ok(())
}

fn first_state(state: FieldState) -> Result<NsState> {
    match state {
        FieldState::Ns(s) => Ok(s),
        FieldState::Kg(_) => Err(HylosError::EquationMismatch {
            expected: "ns",
            got: "nkg",
        }),
    }
}

/// Least-squares velocity over the last `window` rows.
fn fitted_velocity(traj: &Trajectory, window: usize) -> Result<Vec<f64>> {
    let dim = traj.final_state.psi().grid().dim();
    let start = traj.rows.len().saturating_sub(window.max(2));
    let rows = &traj.rows[start..];
    let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let points: Vec<Vec<f64>> = rows.iter().map(|r| r.center[..dim].to_vec()).collect();
    fit_velocity(&times, &points)
}

// ---------------------------------------------------------------- groundstate

pub fn experiment_groundstate(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let (model, profile) = solve(cfg)?;
    let g = crate::groundstate::effective_g(&model, profile.omega);
    let residual = derrick_pohozaev_residual(&profile, |s| g.value(s)).abs();
    let (energy, charge) = profile_energy_charge(&profile, &model)?;
    let e0 = model.rest_energy();
    let lambda = energy / charge;
    report.metric("omega", profile.omega);
    report.metric("u0", profile.u0());
    report.metric("sigma", profile.sigma);
    report.metric("energy", energy);
    report.metric("charge", charge);
    report.metric("lambda", lambda);
    report.metric("e0", e0);
    report.metric("pohozaev_residual", residual);
    let tol = cfg.groundstate()?.pohozaev_tol;
    report.verdict(
        "pohozaev",
        residual < tol,
        format!("|residual| = {residual:.3e} (limit {tol:.1e})"),
    );
    // not a solver gate: L²-supercritical powers have Λ > E₀ at every frequency
    report.finding("lambda_below_e0", lambda < e0, format!("Lambda = {lambda:.6} vs E0 = {e0:.6}"));
    report.metric("hylomorphic", if lambda < e0 { 1.0 } else { 0.0 });
    if cfg.grid.is_some() {
        let grid = cfg.grid()?;
        let state = standing_wave(&profile, &grid, &[0.0; 3][..grid.dim()], 0.0)?;
        let obs = observer(cfg, &grid, &model)?;
        let row = obs.diagnostics(&state)?;
        report.metric("grid_energy", row.energy);
        report.metric("grid_lambda", row.lambda);
        if let Some(path) = report.artifact("groundstate_field.csv") {
            io::write_snapshot(&path, state.psi())?;
        }
    }
    if let Some(path) = report.artifact("profile.csv") {
        io::write_profile(&path, &profile)?;
    }
    Ok(())
}

// ------------------------------------------------------------------ stability

/// Seeded band-limited complex noise normalized to unit L² norm.
pub fn band_limited_noise(grid: &Grid, modes: usize, seed: u64) -> Result<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spectral = Spectral::new(grid);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (k, c) in coeffs.iter_mut().enumerate() {
        let idx = grid.multi_index(k);
        let low = (0..grid.dim()).all(|a| {
            let n = grid.counts()[a];
            let j = idx[a].min(n - idx[a]);
            j <= modes
        });
        // draw for every mode so the sequence does not depend on the cutoff layout
        let (re, im): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if low {
            *c = Complex64::new(re, im);
        }
    }
    spectral.inverse(&mut coeffs);
    let norm = grid.integrate(&coeffs.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>())?.sqrt();
    if norm == 0.0 {
        return Err(HylosError::Degenerate("noise vanished".into()));
    }
    Ok(coeffs.into_iter().map(|z| z / norm).collect())
}

/// Adds `rel`·‖ψ‖ times a localized noise field to ψ (and the matching −iω
/// multiple to ∂ₜψ for Klein–Gordon states).
fn perturb(state: &FieldState, profile: &RadialProfile, rel: f64, modes: usize, seed: u64) -> Result<FieldState> {
    if rel == 0.0 {
        return Ok(state.clone());
    }
    let psi = state.psi();
    let grid = *psi.grid();
    let noise = band_limited_noise(&grid, modes, seed)?;
    // localize on the soliton so the perturbation does not seed the whole box
    let shaped: Vec<Complex64> = noise.iter().zip(psi.values()).map(|(n, z)| n * z.norm()).collect();
    let shaped_norm = grid.integrate(&shaped.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>())?.sqrt();
    let psi_norm = grid.integrate(&psi.abs_sqr())?.sqrt();
    let scale = rel * psi_norm / shaped_norm;
    let delta = ComplexField::new(grid, shaped.iter().map(|z| z * scale).collect())?;
    let new_psi = psi.add(&delta)?;
    Ok(match state {
        FieldState::Ns(s) => FieldState::Ns(NsState::new(new_psi, s.time)),
        FieldState::Kg(s) => {
            let dt = delta.scaled(Complex64::new(0.0, -profile.omega));
            FieldState::Kg(KgState::new(new_psi, s.psi_t.add(&dt)?, s.time)?)
        }
    })
}

/// Tracks min over time of max|ψ|.
struct PeakFloor {
    min_peak: f64,
    samples: Vec<(f64, f64)>,
    every: usize,
    count: usize,
}

impl PeakFloor {
    fn new(initial: f64, every: usize) -> Self {
        Self {
            min_peak: initial,
            samples: vec![(0.0, initial)],
            every: every.max(1),
            count: 0,
        }
    }
}

impl TrajectorySink for PeakFloor {
    fn step(&mut self, state: &FieldState) -> Result<bool> {
        let m = state.psi().max_abs();
        self.min_peak = self.min_peak.min(m);
        self.count += 1;
        if self.count.is_multiple_of(self.every) {
            self.samples.push((state.time(), m));
        }
        Ok(true)
    }
}

pub fn experiment_stability(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let (model, profile) = solve(cfg)?;
    let grid = cfg.grid()?;
    let evolve = cfg.evolve_config()?;
    let potential = cfg.potential.build()?;
    let spec = &cfg.stability;
    let obs = observer(cfg, &grid, &model)?;
    let center = vec![0.0; grid.dim()];
    let ground = standing_wave(&profile, &grid, &center, 0.0)?;
    let ground_row = obs.diagnostics(&ground)?;
    let (c_sigma, sigma) = (ground_row.energy, ground_row.charge);
    report.metric("c_sigma", c_sigma);
    report.metric("sigma", sigma);

    let evolve_from = |init: &FieldState| -> Result<(Trajectory, PeakFloor)> {
        let mut floor = PeakFloor::new(init.psi().max_abs(), evolve.diagnostic_every);
        let traj = run(init, &model, &potential, &evolve, &mut [&mut floor])?;
        Ok((traj, floor))
    };

    // perturbed ground state
    let init = perturb(&ground, &profile, spec.noise, spec.noise_modes, cfg.seed)?;
    let (traj, floor) = evolve_from(&init)?;
    let peak0 = init.psi().max_abs();
    let lyap: Vec<f64> = traj
        .rows
        .iter()
        .map(|r| liapunov_value(r.energy, r.charge, c_sigma, sigma))
        .collect();
    let lyap0 = lyap[0];
    let lyap_max = lyap.iter().copied().fold(0.0, f64::max);
    let dist = traj
        .rows
        .iter()
        .map(|r| (r.energy - c_sigma).abs().max((r.charge - sigma).abs()))
        .fold(0.0, f64::max);
    report.metric("liapunov_initial", lyap0);
    report.metric("liapunov_max", lyap_max);
    report.metric("eh_sup_distance", dist);
    report.metric("peak_initial", peak0);
    report.metric("peak_min", floor.min_peak);
    report.metric("peak_ratio_min", floor.min_peak / peak0);
    report.verdict(
        "liapunov_bounded",
        traj.completed() && lyap_max < spec.liapunov_factor * lyap0,
        format!("max {lyap_max:.3e} vs {}x initial {lyap0:.3e}", spec.liapunov_factor),
    );
    report.verdict(
        "peak_persists",
        traj.completed() && floor.min_peak > spec.peak_floor * peak0,
        format!("min peak ratio {:.4} (floor {})", floor.min_peak / peak0, spec.peak_floor),
    );
    write_rows(report, "stability.csv", &traj)?;
    if let Some(path) = report.artifact("stability_liapunov.csv") {
        let t: Vec<f64> = traj.rows.iter().map(|r| r.t).collect();
        io::write_columns(&path, &["t", "liapunov"], &[t, lyap])?;
    }
    if let Some(path) = report.artifact("stability_peak.csv") {
        let (t, m): (Vec<f64>, Vec<f64>) = floor.samples.iter().copied().unzip();
        io::write_columns(&path, &["t", "max_abs"], &[t, m])?;
    }

    // zero-noise drift
    if spec.noise != 0.0 {
        let (quiet, _) = evolve_from(&ground)?;
        let drift = quiet
            .rows
            .iter()
            .map(|r| (r.energy - c_sigma).abs().max((r.charge - sigma).abs()))
            .fold(0.0, f64::max);
        report.metric("zero_noise_drift", drift);
        report.verdict(
            "zero_noise_drift",
            quiet.completed() && drift < spec.zero_noise_drift,
            format!("{drift:.3e} (limit {:.1e})", spec.zero_noise_drift),
        );
    }

    // dispersing control: small Gaussian packet with Λ above E₀
    if spec.control {
        let (amp, width) = (spec.control_amplitude, spec.control_width);
        let psi = ComplexField::from_fn(grid, |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            Complex64::new(amp * (-0.5 * r2 / (width * width)).exp(), 0.0)
        });
        let control = match model.equation() {
            Equation::Ns => FieldState::Ns(NsState::new(psi, 0.0)),
            Equation::Nkg => {
                let w = model.rest_energy();
                let psi_t = psi.scaled(Complex64::new(0.0, -w));
                FieldState::Kg(KgState::new(psi, psi_t, 0.0)?)
            }
        };
        let lam = obs.diagnostics(&control)?.lambda;
        let peak = control.psi().max_abs();
        let (ctraj, cfloor) = evolve_from(&control)?;
        let ratio = ctraj.final_state.psi().max_abs() / peak;
        report.metric("control_lambda", lam);
        report.metric("control_final_peak_ratio", ratio);
        report.metric("control_min_peak_ratio", cfloor.min_peak / peak);
        report.verdict(
            "control_disperses",
            ratio < spec.peak_floor,
            format!("final peak ratio {ratio:.4} (floor {}), Lambda = {lam:.4}", spec.peak_floor),
        );
    }
    Ok(())
}

// --------------------------------------------------------------------- travel

fn boosted_initial(cfg: &RunConfig, model: &NonlinearModel, profile: &RadialProfile, grid: &Grid, v: &[f64]) -> Result<FieldState> {
    let boost = cfg.boost()?;
    boost.validate(model.equation())?;
    let dim = grid.dim();
    let mut center = boost.center.clone();
    center.resize(dim, 0.0);
    match model.equation() {
        Equation::Ns => {
            let rest = first_state(standing_wave(profile, grid, &center, boost.theta)?)?;
            Ok(FieldState::Ns(galilean_boost(&rest, v, &vec![0.0; dim])?))
        }
        Equation::Nkg => {
            if v.iter().skip(1).any(|c| *c != 0.0) {
                return Err(HylosError::Config("Lorentz boosts act along axis 1 only".into()));
            }
            let omega0 = if boost.omega0 != 0.0 { boost.omega0 } else { profile.omega };
            if omega0 != profile.omega {
                return Err(HylosError::Config(format!(
                    "boost.omega0 = {omega0} differs from the ground-state frequency {}",
                    profile.omega
                )));
            }
            let v1 = v.first().copied().unwrap_or(0.0);
            let (state, _) = lorentz_boost_initialdata(profile, grid, omega0, v1, &center, boost.theta)?;
            Ok(FieldState::Kg(state))
        }
    }
}

pub fn experiment_travel(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let (model, profile) = solve(cfg)?;
    let grid = cfg.grid()?;
    let evolve = cfg.evolve_config()?;
    let spec = &cfg.travel;
    let v = cfg.boost()?.v.clone();
    let init = boosted_initial(cfg, &model, &profile, &grid, &v)?;
    let traj = run(&init, &model, &cfg.potential.build()?, &evolve, &mut [])?;
    if !traj.completed() {
        report.verdict("completed", false, format!("{:?}", traj.termination));
        return Ok(());
    }
    let fitted = fitted_velocity(&traj, spec.fit_window)?;
    let last = traj.rows.last().expect("at least one row");
    let denom = match model.equation() {
        Equation::Ns => last.charge,
        Equation::Nkg => last.energy,
    };
    let identity: Vec<f64> = (0..grid.dim()).map(|a| last.momentum[a] / denom).collect();
    let speed = fitted.iter().map(|c| c * c).sum::<f64>().sqrt();
    let boost_speed = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    for a in 0..grid.dim() {
        report.metric(format!("fitted_velocity_{}", a + 1), fitted[a]);
        report.metric(format!("momentum_ratio_{}", a + 1), identity[a]);
    }
    report.metric("fitted_speed", speed);
    report.metric("boost_speed", boost_speed);
    report.metric("energy", last.energy);
    report.metric("charge", last.charge);
    let mismatch = fitted
        .iter()
        .zip(&identity)
        .map(|(f, i)| (f - i).abs())
        .fold(0.0, f64::max);
    report.metric("identity_mismatch", mismatch);
    let speed_err = fitted
        .iter()
        .enumerate()
        .map(|(a, f)| (f - v.get(a).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max);
    report.metric("speed_error", speed_err);
    if boost_speed == 0.0 {
        report.verdict(
            "at_rest",
            speed < spec.rest_tol,
            format!("fitted speed {speed:.3e} (limit {:.1e})", spec.rest_tol),
        );
    } else {
        report.verdict(
            "speed_matches_boost",
            speed_err < spec.speed_tol,
            format!("|fit - v| = {speed_err:.3e} (limit {:.1e})", spec.speed_tol),
        );
    }
    let (label, tol) = match model.equation() {
        Equation::Ns => ("velocity_equals_p_over_h", spec.ns_identity_tol),
        Equation::Nkg => ("velocity_equals_p_over_e", spec.nkg_identity_tol),
    };
    report.verdict(label, mismatch < tol, format!("mismatch {mismatch:.3e} (limit {tol:.1e})"));
    write_rows(report, "travel.csv", &traj)?;
    Ok(())
}

// ---------------------------------------------------------- potential dynamics

pub fn experiment_potential_dynamics(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let (model, profile) = solve(cfg)?;
    if model.equation() != Equation::Ns {
        return Err(HylosError::Config("potential_dynamics runs the Schrödinger equation".into()));
    }
    let grid = cfg.grid()?;
    let potential = cfg.potential.build()?;
    let spec = &cfg.semiclassical;
    let dim = grid.dim();
    let mut q0 = spec.q0.clone();
    let mut v0 = spec.v.clone();
    q0.resize(dim, 0.0);
    v0.resize(dim, 0.0);

    // the oracle sees only the analytic force, never the field code
    let kappa = match potential {
        ExternalPotential::Zero => 0.0,
        ExternalPotential::Harmonic { kappa } => kappa,
        ExternalPotential::Sampled { .. } => {
            return Err(HylosError::Config("potential_dynamics needs an analytic potential".into()))
        }
    };
    let period = if kappa > 0.0 { 2.0 * PI / kappa.sqrt() } else { 2.0 * PI };
    let t_end = spec.periods * period;
    let oracle = newton_oracle(&q0, &v0, |q| q.iter().map(|x| kappa * x).collect(), t_end, spec.oracle_dt);
    let amplitude = oracle
        .iter()
        .map(|s| s.q.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    report.metric("oracle_amplitude", amplitude);
    report.metric("t_end", t_end);

    let mut deviations = Vec::new();
    for (level, &h) in spec.h_ladder.iter().enumerate() {
        let scaling = cfg.scaling(h)?;
        let init = semiclassical_initial_data(&profile, &grid, &scaling, &q0, &v0)?;
        let dt_target = spec.dt_scale * h.powf(scaling.alpha - scaling.gamma_exp + 1.0);
        let steps = (t_end / dt_target).ceil().max(1.0) as usize;
        let dt = t_end / steps as f64;
        let evolve = EvolveConfig::new(crate::evolve::Scheme::NsSplitstep, dt, steps as f64 * dt)
            .with_diagnostics_every((steps / 400).max(1))
            .with_semiclassical(scaling);
        let traj = run(&FieldState::Ns(init), &model, &potential, &evolve, &mut [])?;
        if !traj.completed() {
            report.verdict(format!("level_{level}_completed"), false, format!("{:?}", traj.termination));
            return Ok(());
        }
        let mut dev = 0.0f64;
        let mut cols = vec![Vec::new(); 1 + 2 * dim];
        for row in &traj.rows {
            let q = position_at(&oracle, row.t);
            let d = (0..dim).map(|a| (row.center[a] - q[a]).powi(2)).sum::<f64>().sqrt();
            dev = dev.max(d);
            cols[0].push(row.t);
            for a in 0..dim {
                cols[1 + a].push(row.center[a]);
                cols[1 + dim + a].push(q[a]);
            }
        }
        report.metric(format!("h_{level}"), h);
        report.metric(format!("dt_{level}"), dt);
        report.metric(format!("max_deviation_{level}"), dev);
        deviations.push(dev);
        if let Some(path) = report.artifact(&format!("barycenter_h{level}.csv")) {
            let mut names = vec!["t".to_string()];
            names.extend((1..=dim).map(|a| format!("q{a}")));
            names.extend((1..=dim).map(|a| format!("oracle_q{a}")));
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            io::write_columns(&path, &refs, &cols)?;
        }
    }
    let decreasing = deviations.windows(2).all(|w| w[1] < w[0]);
    report.verdict(
        "deviation_decreases",
        decreasing,
        format!(
            "deviations [{}] down the ladder",
            deviations.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    );
    let finest = *deviations.last().unwrap_or(&f64::INFINITY);
    let bound = spec.amplitude_fraction * amplitude.max(grid.min_spacing());
    report.verdict(
        "finest_within_fraction",
        finest < bound,
        format!("{finest:.3e} vs {} of amplitude {amplitude:.3}", spec.amplitude_fraction),
    );
    Ok(())
}

// ----------------------------------------------------------------- relativity

/// Value of a field at a point along axis 1 on the grid line through node
/// `k`, by trigonometric interpolation of that line.
pub fn interpolate_axis1(field: &ComplexField, k: usize, x: f64) -> Complex64 {
    let grid = *field.grid();
    let n = grid.counts()[0];
    let base = grid.multi_index(k);
    let mut line: Vec<Complex64> = (0..n)
        .map(|i| {
            let mut idx = base;
            idx[0] = i;
            field.values()[grid.flat_index(idx)]
        })
        .collect();
    let len = grid.lengths()[0];
    let line_grid = Grid::new(1, &[len], &[n]).expect("axis of a valid grid");
    Spectral::new(&line_grid).forward(&mut line);
    let xi = x - grid.coord(0, 0);
    let wn = line_grid.wavenumbers(0);
    let mut out = Complex64::new(0.0, 0.0);
    for (j, c) in line.iter().enumerate() {
        out += if 2 * j == n {
            // split Nyquist mode: its real interpolant is a cosine
            c * (wn[j].abs() * xi).cos()
        } else {
            c * Complex64::from_polar(1.0, wn[j] * xi)
        };
    }
    out / n as f64
}

/// Samples peak position, the phase there, and the half-maximum width.
struct ClockProbe {
    every: usize,
    count: usize,
    times: Vec<f64>,
    peaks: Vec<f64>,
    phases: Vec<f64>,
    widths: Vec<f64>,
}

impl ClockProbe {
    fn new(every: usize) -> Self {
        Self {
            every: every.max(1),
            count: 0,
            times: Vec::new(),
            peaks: Vec::new(),
            phases: Vec::new(),
            widths: Vec::new(),
        }
    }

    fn record(&mut self, state: &FieldState) {
        let psi = state.psi();
        let (x, k) = peak_position(psi);
        let z = interpolate_axis1(psi, k, x);
        let mut phase = z.arg();
        if let Some(&prev) = self.phases.last() {
            // unwrap onto the branch closest to the previous sample
            phase += 2.0 * PI * ((prev - phase) / (2.0 * PI)).round();
        }
        self.times.push(state.time());
        self.peaks.push(x);
        self.phases.push(phase);
        self.widths.push(half_max_width(psi));
    }
}

impl TrajectorySink for ClockProbe {
    fn step(&mut self, state: &FieldState) -> Result<bool> {
        self.count += 1;
        if self.count.is_multiple_of(self.every) {
            self.record(state);
        }
        Ok(true)
    }
}

struct MovingRun {
    width: f64,
    clock: f64,
    fitted_speed: f64,
    energy: f64,
    momentum: f64,
    charge: f64,
    probe: ClockProbe,
}

fn slope(x: &[f64], y: &[f64]) -> Result<f64> {
    let pts: Vec<Vec<f64>> = y.iter().map(|v| vec![*v]).collect();
    Ok(fit_velocity(x, &pts)?[0])
}

fn moving_run(cfg: &RunConfig, model: &NonlinearModel, profile: &RadialProfile, grid: &Grid, v: f64) -> Result<MovingRun> {
    let evolve = cfg.evolve_config()?;
    let spec = &cfg.relativity;
    let mut vel = vec![0.0; grid.dim()];
    vel[0] = v;
    let init = boosted_initial(cfg, model, profile, grid, &vel)?;
    let every = (evolve.steps() / spec.clock_window.max(1)).max(1);
    let mut probe = ClockProbe::new(every);
    probe.record(&init);
    let traj = run(&init, model, &ExternalPotential::Zero, &evolve, &mut [&mut probe])?;
    if !traj.completed() {
        return Err(HylosError::InvalidArgument(format!("run at v = {v} ended early: {:?}", traj.termination)));
    }
    let n = probe.times.len();
    let start = n.saturating_sub(spec.clock_window);
    let clock = -slope(&probe.times[start..], &probe.phases[start..])?;
    let width = probe.widths[start..].iter().sum::<f64>() / (n - start) as f64;
    let fitted = fitted_velocity(&traj, cfg.travel.fit_window)?[0];
    let last = traj.rows.last().expect("rows");
    Ok(MovingRun {
        width,
        clock,
        fitted_speed: fitted,
        energy: last.energy,
        momentum: last.momentum[0],
        charge: last.charge,
        probe,
    })
}

pub fn experiment_relativity(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let (model, profile) = solve(cfg)?;
    let grid = cfg.grid()?;
    let spec = cfg.relativity.clone();
    match model.equation() {
        Equation::Ns => {
            let v = spec.ns_velocity;
            let mut vel = vec![0.0; grid.dim()];
            vel[0] = v;
            let init = boosted_initial(cfg, &model, &profile, &grid, &vel)?;
            let traj = run(&init, &model, &cfg.potential.build()?, &cfg.evolve_config()?, &mut [])?;
            let q_dot = fitted_velocity(&traj, cfg.travel.fit_window)?[0];
            let last = traj.rows.last().expect("rows");
            let mass = last.momentum[0] / q_dot;
            let err = (mass - last.charge).abs() / last.charge;
            report.metric("ns_velocity", v);
            report.metric("ns_fitted_velocity", q_dot);
            report.metric("ns_mass", mass);
            report.metric("ns_charge", last.charge);
            report.metric("ns_mass_rel_error", err);
            report.verdict(
                "ns_mass_equals_charge",
                err < spec.ns_mass_tol,
                format!("P/q' = {mass:.10}, H = {:.10}", last.charge),
            );
        }
        Equation::Nkg => {
            let omega0 = profile.omega;
            let rest = moving_run(cfg, &model, &profile, &grid, 0.0)?;
            report.metric("omega0", omega0);
            report.metric("rest_width", rest.width);
            report.metric("rest_clock", rest.clock);
            report.metric("rest_energy", rest.energy);
            for (j, &v) in spec.velocities.iter().enumerate() {
                let lp = lorentz_params(omega0, v)?;
                let m = moving_run(cfg, &model, &profile, &grid, v)?;
                let width_ratio = m.width / rest.width;
                let clock_ratio = m.clock / rest.clock;
                let inv_gamma = 1.0 / lp.gamma;
                let tag = format!("v{j}");
                report.metric(format!("{tag}_velocity"), v);
                report.metric(format!("{tag}_gamma"), lp.gamma);
                report.metric(format!("{tag}_omega"), lp.omega);
                report.metric(format!("{tag}_k"), lp.k);
                report.metric(format!("{tag}_width_ratio"), width_ratio);
                report.metric(format!("{tag}_clock_ratio"), clock_ratio);
                report.metric(format!("{tag}_fitted_velocity"), m.fitted_speed);
                report.metric(format!("{tag}_energy"), m.energy);
                report.metric(format!("{tag}_charge"), m.charge);
                report.metric(format!("{tag}_energy_over_rest"), m.energy / rest.energy);
                let width_err = (width_ratio - inv_gamma).abs() / inv_gamma;
                let clock_err = (clock_ratio - inv_gamma).abs() / inv_gamma;
                report.verdict(
                    format!("{tag}_width_contraction"),
                    width_err < spec.width_tol,
                    format!("ratio {width_ratio:.5} vs 1/gamma {inv_gamma:.5}"),
                );
                report.verdict(
                    format!("{tag}_time_dilation"),
                    clock_err < spec.clock_tol,
                    format!("ratio {clock_ratio:.5} vs 1/gamma {inv_gamma:.5}"),
                );
                if v != 0.0 {
                    let mass = m.momentum / m.fitted_speed;
                    let err = (mass - m.energy).abs() / m.energy;
                    report.metric(format!("{tag}_mass"), mass);
                    report.metric(format!("{tag}_mass_rel_error"), err);
                    report.verdict(
                        format!("{tag}_mass_equals_energy"),
                        err < spec.mass_tol,
                        format!("P/Q' = {mass:.6}, E = {:.6}", m.energy),
                    );
                }
                if let Some(path) = report.artifact(&format!("clock_{tag}.csv")) {
                    io::write_columns(
                        &path,
                        &["t", "peak", "phase", "width"],
                        &[m.probe.times.clone(), m.probe.peaks.clone(), m.probe.phases.clone(), m.probe.widths.clone()],
                    )?;
                }
            }
        }
    }
    Ok(())
}

// ------------------------------------------------------------ hylomorphy scan

/// Trapezoid bump: 1 for |x| ≤ R, linear down to 0 at |x| = R + 1.
pub fn trapezoid(r: f64, radius: f64) -> f64 {
    if r <= radius {
        1.0
    } else if r <= radius + 1.0 {
        radius + 1.0 - r
    } else {
        0.0
    }
}

pub fn experiment_hylomorphy_scan(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let model = cfg.model()?;
    let grid = cfg.grid()?;
    let obs = Observer::new(&grid, model, &ExternalPotential::Zero);
    let e0 = model.rest_energy();
    let spec = &cfg.scan;
    let half_box = grid.lengths().iter().copied().fold(f64::INFINITY, f64::min) / 2.0;
    let mut cols = vec![Vec::new(), Vec::new(), Vec::new()];
    let mut inf = f64::INFINITY;
    for &radius in &spec.radii {
        if radius + 1.0 >= half_box {
            return Err(HylosError::Config(format!("bump radius {radius} does not fit in the box")));
        }
        let bump = ComplexField::from_fn(grid, |x| {
            Complex64::new(trapezoid(x.iter().map(|v| v * v).sum::<f64>().sqrt(), radius), 0.0)
        });
        for &eps in &spec.eps {
            let psi = bump.scaled(Complex64::new(eps, 0.0));
            let lambda = match model.equation() {
                Equation::Ns => obs.hylomorphy_ratio_ns(&NsState::new(psi, 0.0))?,
                Equation::Nkg => {
                    // oscillating at the rest frequency √a
                    let psi_t = psi.scaled(Complex64::new(0.0, -model.a().sqrt()));
                    obs.hylomorphy_ratio_nkg(&KgState::new(psi, psi_t, 0.0)?)?
                }
            };
            inf = inf.min(lambda);
            cols[0].push(eps);
            cols[1].push(radius);
            cols[2].push(lambda);
        }
    }
    let rel = (inf - e0).abs() / e0;
    report.metric("e0", e0);
    report.metric("scan_infimum", inf);
    report.metric("scan_relative_gap", rel);
    report.verdict(
        "scan_reaches_e0",
        rel < spec.tolerance,
        format!("inf Lambda = {inf:.5}, E0 = {e0:.5}"),
    );
    if let Some(path) = report.artifact("scan.csv") {
        io::write_columns(&path, &["eps", "R", "lambda"], &cols)?;
    }

    let (_, profile) = solve(cfg)?;
    let state = standing_wave(&profile, &grid, &vec![0.0; grid.dim()], 0.0)?;
    let lambda = obs.diagnostics(&state)?.lambda;
    report.metric("groundstate_lambda", lambda);
    report.verdict(
        "groundstate_below_e0",
        lambda < e0,
        format!("Lambda = {lambda:.6} vs E0 = {e0:.6}"),
    );
    Ok(())
}

/// `hylos evolve`: ground state, optional boost, run, write series.
pub fn run_evolve(cfg: &RunConfig, out: Option<&Path>) -> Result<Report> {
    let mut cfg = cfg.clone();
    cfg.experiment = None;
    cfg.validate()?;
    let mut report = Report::new("evolve", &cfg, out)?;
    let (model, profile) = solve(&cfg)?;
    let grid = cfg.grid()?;
    let evolve = cfg.evolve_config()?;
    let init = if cfg.boost.is_some() {
        let v = cfg.boost()?.v.clone();
        boosted_initial(&cfg, &model, &profile, &grid, &v)?
    } else {
        standing_wave(&profile, &grid, &vec![0.0; grid.dim()], 0.0)?
    };
    let traj = run(&init, &model, &cfg.potential.build()?, &evolve, &mut [])?;
    let (first, last) = (&traj.rows[0], traj.rows.last().expect("rows"));
    report.metric("energy_drift", (last.energy - first.energy).abs() / first.energy.abs().max(f64::MIN_POSITIVE));
    report.metric("charge_drift", (last.charge - first.charge).abs() / first.charge.abs().max(f64::MIN_POSITIVE));
    report.metric("t_final", last.t);
    report.verdict("completed", traj.completed(), format!("{:?}", traj.termination));
    write_rows(&mut report, "diagnostics.csv", &traj)?;
    for (j, snap) in traj.snapshots.iter().enumerate() {
        if let Some(path) = report.artifact(&format!("snapshot_{j:05}.csv")) {
            io::write_snapshot(&path, snap.psi())?;
        }
    }
    report.finish()?;
    Ok(report)
}

/// `hylos groundstate`: the ground-state experiment.
pub fn run_groundstate(cfg: &RunConfig, out: Option<&Path>) -> Result<Report> {
    run_experiment(Some("groundstate"), cfg, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_shape() {
        assert_eq!(trapezoid(0.0, 2.0), 1.0);
        assert_eq!(trapezoid(2.5, 2.0), 0.5);
        assert_eq!(trapezoid(3.5, 2.0), 0.0);
    }

    #[test]
    fn noise_is_seeded_and_normalized() {
        let g = Grid::new(1, &[10.0], &[64]).unwrap();
        let a = band_limited_noise(&g, 4, 7).unwrap();
        let b = band_limited_noise(&g, 4, 7).unwrap();
        let c = band_limited_noise(&g, 4, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let n = g.integrate(&a.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>()).unwrap();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trig_interpolation_hits_nodes_and_band_limited_values() {
        let g = Grid::new(1, &[2.0 * PI], &[16]).unwrap();
        let f = ComplexField::from_fn(g, |x| Complex64::new(0.0, 3.0 * x[0]).exp() + 0.5 * x[0].cos());
        let z = interpolate_axis1(&f, 0, g.coord(0, 5));
        assert!((z - f.values()[5]).norm() < 1e-12);
        let x = 0.377;
        let want = Complex64::new(0.0, 3.0 * x).exp() + 0.5 * x.cos();
        assert!((interpolate_axis1(&f, 0, x) - want).norm() < 1e-12);
    }
}
