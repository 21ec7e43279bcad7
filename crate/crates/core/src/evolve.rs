//! Time integration: Strang split-step for Schrödinger fields and
//! velocity-Verlet leapfrog for Klein–Gordon fields, both spectral in space.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HylosError, Result};
use crate::grid::{ComplexField, Grid, Spectral, MAX_DIM};
use crate::groundstate::{sample_profile, RadialProfile};
use crate::models::{Equation, ExternalPotential, NonlinearModel, Semiclassical};
use crate::observables::{DiagnosticsRow, FieldState, KgState, NsState, Observer};

/// Abort when max|ψ| grows beyond this multiple of its initial value.
pub const BLOWUP_FACTOR: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    NsSplitstep,
    NkgLeapfrog,
}

impl Scheme {
    pub fn equation(self) -> Equation {
        match self {
            Scheme::NsSplitstep => Equation::Ns,
            Scheme::NkgLeapfrog => Equation::Nkg,
        }
    }

    pub fn for_equation(eq: Equation) -> Self {
        match eq {
            Equation::Ns => Scheme::NsSplitstep,
            Equation::Nkg => Scheme::NkgLeapfrog,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Steps between stored snapshots; 0 disables snapshots.
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default = "one")]
    pub diagnostic_every: usize,
    pub scheme: Scheme,
    #[serde(default)]
    pub semiclassical: Option<Semiclassical>,
}

fn one() -> usize {
    1
}

impl EvolveConfig {
    pub fn new(scheme: Scheme, dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            snapshot_every: 0,
            diagnostic_every: 1,
            scheme,
            semiclassical: None,
        }
    }

    pub fn with_diagnostics_every(mut self, n: usize) -> Self {
        self.diagnostic_every = n;
        self
    }

    pub fn with_snapshots_every(mut self, n: usize) -> Self {
        self.snapshot_every = n;
        self
    }

    pub fn with_semiclassical(mut self, sc: Semiclassical) -> Self {
        self.semiclassical = Some(sc);
        self
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(HylosError::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(HylosError::InvalidArgument(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if self.diagnostic_every == 0 {
            return Err(HylosError::InvalidArgument("diagnostic_every must be >= 1".into()));
        }
        let n = self.steps() as f64;
        if (n * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(self.dt) {
            return Err(HylosError::InvalidArgument(format!(
                "t_end {} is not a whole number of steps of {}",
                self.t_end, self.dt
            )));
        }
        if let Some(sc) = self.semiclassical {
            Semiclassical::new(sc.h, sc.alpha, sc.gamma_exp)?;
            if self.scheme != Scheme::NsSplitstep {
                return Err(HylosError::Config("semiclassical scaling applies to the Schrödinger scheme only".into()));
            }
        }
        Ok(())
    }
}

/// Split-step propagator for the (optionally rescaled) Schrödinger equation
/// i h ∂ₜψ = −(h²/2)Δψ + (1/(2h^α))W′(h^γψ) + Vψ.
#[derive(Clone, Debug)]
pub struct NsStepper {
    spectral: Spectral,
    model: NonlinearModel,
    potential: Vec<f64>,
    scaling: Semiclassical,
    dt: f64,
    linear: Vec<Complex64>,
}

impl NsStepper {
    pub fn new(
        grid: &Grid,
        model: &NonlinearModel,
        potential: &ExternalPotential,
        dt: f64,
        scaling: Semiclassical,
    ) -> Result<Self> {
        if model.equation() != Equation::Ns {
            return Err(HylosError::EquationMismatch {
                expected: Equation::Ns.name(),
                got: model.equation().name(),
            });
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(HylosError::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let spectral = Spectral::new(grid);
        let h = scaling.h;
        let linear = spectral
            .k_sqr()
            .iter()
            .map(|k2| Complex64::from_polar(1.0, -0.5 * dt * h * k2))
            .collect();
        Ok(Self {
            potential: potential.node_values(grid),
            spectral,
            model: *model,
            scaling,
            dt,
            linear,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Rotates each node by its local rate; |ψ| is invariant under this sub-flow.
    fn nonlinear_half(&self, values: &mut [Complex64]) {
        let sc = self.scaling;
        let amp = sc.h.powf(sc.gamma_exp);
        let coeff = 0.5 * sc.h.powf(sc.gamma_exp - sc.alpha - 1.0);
        let inv_h = 1.0 / sc.h;
        let half = 0.5 * self.dt;
        for (z, v) in values.iter_mut().zip(&self.potential) {
            let s = amp * z.norm();
            let rate = coeff * self.model.w_prime_over_s(s) + v * inv_h;
            *z *= Complex64::from_polar(1.0, -half * rate);
        }
    }

    pub fn step(&self, values: &mut [Complex64]) {
        self.nonlinear_half(values);
        self.spectral.forward(values);
        for (z, l) in values.iter_mut().zip(&self.linear) {
            *z *= l;
        }
        self.spectral.inverse(values);
        self.nonlinear_half(values);
    }
}

/// Velocity-Verlet propagator for ψ̈ = Δψ − W′(ψ).
#[derive(Clone, Debug)]
pub struct KgStepper {
    spectral: Spectral,
    model: NonlinearModel,
    dt: f64,
}

impl KgStepper {
    pub fn new(grid: &Grid, model: &NonlinearModel, dt: f64) -> Result<Self> {
        if model.equation() != Equation::Nkg {
            return Err(HylosError::EquationMismatch {
                expected: Equation::Nkg.name(),
                got: model.equation().name(),
            });
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(HylosError::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let spacing = grid.min_spacing();
        if dt >= spacing {
            return Err(HylosError::Cfl { dt, bound: spacing });
        }
        // leapfrog is stable for dt·ω_max < 2
        let omega_max = (grid.max_wavenumber().powi(2) + model.a().max(0.0)).sqrt();
        if dt * omega_max >= 2.0 {
            return Err(HylosError::Cfl {
                dt,
                bound: 2.0 / omega_max,
            });
        }
        Ok(Self {
            spectral: Spectral::new(grid),
            model: *model,
            dt,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn acceleration(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut acc = self.spectral.laplacian_values(psi);
        for (a, z) in acc.iter_mut().zip(psi) {
            *a -= z * self.model.w_prime_over_s(z.norm());
        }
        acc
    }

    /// One step given the acceleration at the current ψ; returns the new one.
    pub fn step(&self, psi: &mut [Complex64], psi_t: &mut [Complex64], acc: &[Complex64]) -> Vec<Complex64> {
        let half = 0.5 * self.dt;
        for ((z, zt), a) in psi.iter_mut().zip(psi_t.iter_mut()).zip(acc) {
            *zt += half * a;
            *z += self.dt * *zt;
        }
        let next = self.acceleration(psi);
        for (zt, a) in psi_t.iter_mut().zip(&next) {
            *zt += half * a;
        }
        next
    }
}

fn guard(values: &[Complex64], limit: f64, t: f64) -> Result<()> {
    let mut max_abs = 0.0f64;
    for z in values {
        let a = z.norm();
        if !a.is_finite() {
            return Err(HylosError::BlowUp { t, max_abs: f64::INFINITY });
        }
        max_abs = max_abs.max(a);
    }
    if max_abs > limit {
        return Err(HylosError::BlowUp { t, max_abs });
    }
    Ok(())
}

/// One Strang step of the Schrödinger flow.
pub fn step_ns(state: &NsState, model: &NonlinearModel, potential: &ExternalPotential, dt: f64) -> Result<NsState> {
    let stepper = NsStepper::new(state.grid(), model, potential, dt, Semiclassical::default())?;
    let mut values = state.psi.values().to_vec();
    stepper.step(&mut values);
    let t = state.time + dt;
    guard(&values, f64::INFINITY, t)?;
    Ok(NsState::new(ComplexField::new(*state.grid(), values)?, t))
}

/// One leapfrog step of the Klein–Gordon flow.
pub fn step_nkg(state: &KgState, model: &NonlinearModel, dt: f64) -> Result<KgState> {
    let stepper = KgStepper::new(state.grid(), model, dt)?;
    let mut psi = state.psi.values().to_vec();
    let mut psi_t = state.psi_t.values().to_vec();
    let acc = stepper.acceleration(&psi);
    stepper.step(&mut psi, &mut psi_t, &acc);
    let t = state.time + dt;
    guard(&psi, f64::INFINITY, t)?;
    guard(&psi_t, f64::INFINITY, t)?;
    let grid = *state.grid();
    KgState::new(ComplexField::new(grid, psi)?, ComplexField::new(grid, psi_t)?, t)
}

/// Receives diagnostics rows and snapshots while a run progresses.
pub trait TrajectorySink {
    fn diagnostics(&mut self, _row: &DiagnosticsRow) -> Result<()> {
        Ok(())
    }

    fn snapshot(&mut self, _state: &FieldState) -> Result<()> {
        Ok(())
    }

    /// Called after every step with the current state; return `false` to stop early.
    fn step(&mut self, _state: &FieldState) -> Result<bool> {
        Ok(true)
    }
}

/// How a run ended.
#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Completed,
    Stopped { t: f64 },
    BlowUp { t: f64, max_abs: f64 },
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub rows: Vec<DiagnosticsRow>,
    pub snapshots: Vec<FieldState>,
    pub final_state: FieldState,
    pub termination: Termination,
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        self.termination == Termination::Completed
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }
}

/// Integrates `initial` to `cfg.t_end`, emitting diagnostics every
/// `diagnostic_every` steps (and at the last step) and snapshots every
/// `snapshot_every` steps. A blow-up ends the run with a partial trajectory.
pub fn run(
    initial: &FieldState,
    model: &NonlinearModel,
    potential: &ExternalPotential,
    cfg: &EvolveConfig,
    sinks: &mut [&mut dyn TrajectorySink],
) -> Result<Trajectory> {
    cfg.validate()?;
    if cfg.scheme.equation() != initial.equation() || model.equation() != initial.equation() {
        return Err(HylosError::Config(format!(
            "scheme {:?}, model {} and state {} disagree",
            cfg.scheme,
            model.equation().name(),
            initial.equation().name()
        )));
    }
    if initial.equation() == Equation::Nkg && !potential.is_zero() {
        return Err(HylosError::Config("external potentials apply to the Schrödinger scheme only".into()));
    }
    let grid = *initial.psi().grid();
    let scaling = cfg.semiclassical.unwrap_or_default();
    let observer = Observer::new(&grid, *model, potential).with_scaling(scaling);
    let limit = BLOWUP_FACTOR * initial.psi().max_abs();
    let steps = cfg.steps();
    let t0 = initial.time();

    let mut traj = Trajectory {
        rows: Vec::new(),
        snapshots: Vec::new(),
        final_state: initial.clone(),
        termination: Termination::Completed,
    };
    let emit = |state: &FieldState, step: usize, traj: &mut Trajectory, sinks: &mut [&mut dyn TrajectorySink]| -> Result<()> {
        let last = step == steps;
        if step.is_multiple_of(cfg.diagnostic_every) || last {
            let row = observer.diagnostics(state)?;
            for s in sinks.iter_mut() {
                s.diagnostics(&row)?;
            }
            traj.rows.push(row);
        }
        if cfg.snapshot_every > 0 && step.is_multiple_of(cfg.snapshot_every) {
            for s in sinks.iter_mut() {
                s.snapshot(state)?;
            }
            traj.snapshots.push(state.clone());
        }
        Ok(())
    };
    emit(initial, 0, &mut traj, sinks)?;

    match initial {
        FieldState::Ns(s) => {
            let stepper = NsStepper::new(&grid, model, potential, cfg.dt, scaling)?;
            let mut values = s.psi.values().to_vec();
            for step in 1..=steps {
                stepper.step(&mut values);
                let t = t0 + step as f64 * cfg.dt;
                if let Err(HylosError::BlowUp { t, max_abs }) = guard(&values, limit, t) {
                    traj.termination = Termination::BlowUp { t, max_abs };
                    break;
                }
                let state = FieldState::Ns(NsState::new(ComplexField::new(grid, values.clone())?, t));
                emit(&state, step, &mut traj, sinks)?;
                let mut go = true;
                for sink in sinks.iter_mut() {
                    go &= sink.step(&state)?;
                }
                traj.final_state = state;
                if !go {
                    traj.termination = Termination::Stopped { t };
                    break;
                }
            }
        }
        FieldState::Kg(s) => {
            let stepper = KgStepper::new(&grid, model, cfg.dt)?;
            let mut psi = s.psi.values().to_vec();
            let mut psi_t = s.psi_t.values().to_vec();
            let mut acc = stepper.acceleration(&psi);
            for step in 1..=steps {
                acc = stepper.step(&mut psi, &mut psi_t, &acc);
                let t = t0 + step as f64 * cfg.dt;
                let blown = guard(&psi, limit, t).and_then(|_| guard(&psi_t, f64::INFINITY, t));
                if let Err(HylosError::BlowUp { t, max_abs }) = blown {
                    traj.termination = Termination::BlowUp { t, max_abs };
                    break;
                }
                let state = FieldState::Kg(KgState::new(
                    ComplexField::new(grid, psi.clone())?,
                    ComplexField::new(grid, psi_t.clone())?,
                    t,
                )?);
                emit(&state, step, &mut traj, sinks)?;
                let mut go = true;
                for sink in sinks.iter_mut() {
                    go &= sink.step(&state)?;
                }
                traj.final_state = state;
                if !go {
                    traj.termination = Termination::Stopped { t };
                    break;
                }
            }
        }
    }
    Ok(traj)
}

/// Rescaled initial datum h^{−γ}U((x − q₀)/h^β)e^{iv·x/h}.
pub fn semiclassical_initial_data(
    profile: &RadialProfile,
    grid: &Grid,
    scaling: &Semiclassical,
    q0: &[f64],
    v: &[f64],
) -> Result<NsState> {
    let beta = scaling.beta();
    let h = scaling.h;
    let stretch = [h.powf(-beta); MAX_DIM];
    let mut center = [0.0; MAX_DIM];
    center[..q0.len()].copy_from_slice(q0);
    let (values, _) = sample_profile(profile, grid, &center, &stretch)?;
    let amp = h.powf(-scaling.gamma_exp);
    let psi: Vec<Complex64> = values
        .iter()
        .enumerate()
        .map(|(k, u)| {
            let x = grid.point(k);
            let phase: f64 = v.iter().zip(x.iter()).map(|(vi, xi)| vi * xi).sum::<f64>() / h;
            Complex64::from_polar(amp * u, phase)
        })
        .collect();
    Ok(NsState::new(ComplexField::new(*grid, psi)?, 0.0))
}

/// Pointwise residual of ∂ₜ|ψ|² + ∇·j with j = Im(conj ψ ∇ψ), using a
/// centered time difference between `before` and `after` around `mid`.
pub fn continuity_residual(
    spectral: &Spectral,
    before: &ComplexField,
    mid: &ComplexField,
    after: &ComplexField,
    dt: f64,
) -> Result<Vec<f64>> {
    before.check_same_grid(mid)?;
    mid.check_same_grid(after)?;
    let grid = *mid.grid();
    let current: Vec<Vec<f64>> = (0..grid.dim())
        .map(|a| {
            spectral
                .derivative(mid.values(), a)
                .iter()
                .zip(mid.values())
                .map(|(d, z)| (z.conj() * d).im)
                .collect()
        })
        .collect();
    let div = spectral.divergence(&current);
    Ok(before
        .values()
        .iter()
        .zip(after.values())
        .zip(div)
        .map(|((b, a), d)| (a.norm_sqr() - b.norm_sqr()) / (2.0 * dt) + d)
        .collect())
}
