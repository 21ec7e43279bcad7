//! Solution-generating transforms: standing waves, gauge rotations,
//! translations, Galilean and Lorentz boosts.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HylosError, Result};
use crate::grid::{ComplexField, Grid, MAX_DIM};
use crate::groundstate::{sample_profile, RadialProfile};
use crate::models::Equation;
use crate::observables::{FieldState, KgState, NsState};

/// Boost parameters: velocity, rest frequency, center and phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoostSpec {
    #[serde(default)]
    pub v: Vec<f64>,
    #[serde(default)]
    pub omega0: f64,
    #[serde(default)]
    pub center: Vec<f64>,
    #[serde(default)]
    pub theta: f64,
}

impl BoostSpec {
    pub fn speed(&self) -> f64 {
        self.v.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn validate(&self, equation: Equation) -> Result<()> {
        if !self.v.iter().chain(&self.center).all(|c| c.is_finite()) || !self.theta.is_finite() {
            return Err(HylosError::NonFinite("boost parameters"));
        }
        if equation == Equation::Nkg && self.speed() >= 1.0 {
            return Err(HylosError::InvalidArgument(format!(
                "Klein-Gordon boost needs |v| < 1, got {}",
                self.speed()
            )));
        }
        Ok(())
    }
}

/// Frequency and wavevector of a Lorentz-boosted standing wave.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzParams {
    pub gamma: f64,
    pub omega: f64,
    pub k: f64,
}

/// Lorentz factor 1/√(1 − v²).
pub fn gamma(v: f64) -> Result<f64> {
    if !v.is_finite() || v.abs() >= 1.0 {
        return Err(HylosError::InvalidArgument(format!("|v| must be < 1, got {v}")));
    }
    Ok(1.0 / (1.0 - v * v).sqrt())
}

/// ω = γω₀ and k = γω₀v.
pub fn lorentz_params(omega0: f64, v: f64) -> Result<LorentzParams> {
    let g = gamma(v)?;
    Ok(LorentzParams {
        gamma: g,
        omega: g * omega0,
        k: g * omega0 * v,
    })
}

fn padded(v: &[f64]) -> [f64; MAX_DIM] {
    let mut out = [0.0; MAX_DIM];
    for (o, c) in out.iter_mut().zip(v) {
        *o = *c;
    }
    out
}

/// Standing wave at t = 0: u·e^{iθ}, plus ∂ₜψ = −iωψ for Klein–Gordon profiles.
pub fn standing_wave(profile: &RadialProfile, grid: &Grid, center: &[f64], theta: f64) -> Result<FieldState> {
    let (values, _) = sample_profile(profile, grid, &padded(center), &[1.0; MAX_DIM])?;
    let rot = Complex64::from_polar(1.0, theta);
    let psi = ComplexField::new(*grid, values.iter().map(|&u| rot * u).collect())?;
    Ok(match profile.equation {
        Equation::Ns => FieldState::Ns(NsState::new(psi, 0.0)),
        Equation::Nkg => {
            let psi_t = psi.scaled(Complex64::new(0.0, -profile.omega));
            FieldState::Kg(KgState::new(psi, psi_t, 0.0)?)
        }
    })
}

/// Global phase rotation ψ ↦ e^{iθ}ψ.
pub fn gauge_rotate(field: &ComplexField, theta: f64) -> ComplexField {
    field.scaled(Complex64::from_polar(1.0, theta))
}

/// Translation by an integer number of nodes along each axis (exact on the grid).
pub fn translate_nodes(field: &ComplexField, shift: &[isize]) -> ComplexField {
    let grid = *field.grid();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut idx = grid.multi_index(k);
        for (a, i) in idx.iter_mut().enumerate().take(grid.dim()) {
            let n = grid.counts()[a] as isize;
            let s = shift.get(a).copied().unwrap_or(0);
            *i = (*i as isize - s).rem_euclid(n) as usize;
        }
        *slot = field.values()[grid.flat_index(idx)];
    }
    ComplexField::new(grid, out).expect("translation keeps values finite")
}

/// Translation by an arbitrary vector through the Fourier shift theorem.
pub fn translate(field: &ComplexField, shift: &[f64], spectral: &crate::grid::Spectral) -> ComplexField {
    let grid = *field.grid();
    let wn: Vec<Vec<f64>> = (0..grid.dim()).map(|a| grid.wavenumbers(a)).collect();
    let values = spectral.apply_symbol(field.values(), |k| {
        let idx = grid.multi_index(k);
        let phase: f64 = (0..grid.dim())
            .map(|a| -wn[a][idx[a]] * shift.get(a).copied().unwrap_or(0.0))
            .sum();
        Complex64::from_polar(1.0, phase)
    });
    ComplexField::new(grid, values).expect("translation keeps values finite")
}

/// Galilean boost ψ(x) ↦ ψ(x − x₀)·e^{iv·x} at the state's time.
///
/// The time-dependent phase −½|v|²t of the full representation is applied
/// when `state.time` is nonzero, together with the shift x₀ + vt.
pub fn galilean_boost(state: &NsState, v: &[f64], x0: &[f64]) -> Result<NsState> {
    let grid = *state.grid();
    if v.len() > grid.dim() || x0.len() > grid.dim() {
        return Err(HylosError::InvalidArgument("boost vector longer than grid dimension".into()));
    }
    let t = state.time;
    let vv = padded(v);
    let shift: Vec<f64> = (0..grid.dim()).map(|a| padded(x0)[a] + vv[a] * t).collect();
    let spectral = crate::grid::Spectral::new(&grid);
    let moved = if shift.iter().all(|&s| s == 0.0) {
        state.psi.clone()
    } else {
        translate(&state.psi, &shift, &spectral)
    };
    let v2: f64 = vv.iter().map(|c| c * c).sum();
    let mut values = moved.into_values();
    for (k, z) in values.iter_mut().enumerate() {
        let x = grid.point(k);
        let phase: f64 = (0..grid.dim()).map(|a| vv[a] * x[a]).sum::<f64>() - 0.5 * v2 * t;
        *z *= Complex64::from_polar(1.0, phase);
    }
    Ok(NsState::new(ComplexField::new(grid, values)?, t))
}

/// Lorentz-boosted Klein–Gordon soliton along axis 1 at t = 0:
/// ψ = u(γ(x₁ − x₀₁), x₂, x₃)e^{i(kx₁ + θ)},
/// ∂ₜψ = [−γv u′ − iωu]e^{i(kx₁ + θ)} with u′ taken at the contracted argument.
pub fn lorentz_boost_initialdata(
    profile: &RadialProfile,
    grid: &Grid,
    omega0: f64,
    v: f64,
    x0: &[f64],
    theta: f64,
) -> Result<(KgState, LorentzParams)> {
    let lp = lorentz_params(omega0, v)?;
    let mut stretch = [1.0; MAX_DIM];
    stretch[0] = lp.gamma;
    let (values, grads) = sample_profile(profile, grid, &padded(x0), &stretch)?;
    let mut psi = Vec::with_capacity(grid.len());
    let mut psi_t = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let x1 = grid.point(k)[0];
        let carrier = Complex64::from_polar(1.0, lp.k * x1 + theta);
        let u = values[k];
        // ∂ₜ u(γ(x₁ − vt − x₀₁)) = −γv·(∂ξ₁ u)
        let du = grads[k][0];
        psi.push(carrier * u);
        psi_t.push(carrier * Complex64::new(-lp.gamma * v * du, -lp.omega * u));
    }
    let state = KgState::new(ComplexField::new(*grid, psi)?, ComplexField::new(*grid, psi_t)?, 0.0)?;
    Ok((state, lp))
}

/// ψ ↦ ψ·e^{−iE₀t}: maps a solution with the ½as² term removed onto the full one.
pub fn gauge_shift_frequency(state: &NsState, e0: f64, t: f64) -> NsState {
    NsState::new(gauge_rotate(&state.psi, -e0 * t), state.time)
}
