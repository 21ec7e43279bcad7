//! First integrals and hylomorphy diagnostics of NS and NKG states.

use num_complex::Complex64;

use crate::error::{HylosError, Result};
use crate::grid::{ComplexField, Grid, Spectral, MAX_DIM};
use crate::groundstate::RadialProfile;
use crate::models::{Equation, ExternalPotential, NonlinearModel, Semiclassical};

/// Schrödinger state ψ(t, ·).
#[derive(Clone, Debug, PartialEq)]
pub struct NsState {
    pub psi: ComplexField,
    pub time: f64,
}

impl NsState {
    pub fn new(psi: ComplexField, time: f64) -> Self {
        Self { psi, time }
    }

    pub fn grid(&self) -> &Grid {
        self.psi.grid()
    }
}

/// Klein–Gordon state (ψ, ∂ₜψ)(t, ·).
#[derive(Clone, Debug, PartialEq)]
pub struct KgState {
    pub psi: ComplexField,
    pub psi_t: ComplexField,
    pub time: f64,
}

impl KgState {
    pub fn new(psi: ComplexField, psi_t: ComplexField, time: f64) -> Result<Self> {
        psi.check_same_grid(&psi_t)?;
        Ok(Self { psi, psi_t, time })
    }

    pub fn grid(&self) -> &Grid {
        self.psi.grid()
    }
}

/// Either kind of state.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldState {
    Ns(NsState),
    Kg(KgState),
}

impl FieldState {
    pub fn time(&self) -> f64 {
        match self {
            FieldState::Ns(s) => s.time,
            FieldState::Kg(s) => s.time,
        }
    }

    pub fn psi(&self) -> &ComplexField {
        match self {
            FieldState::Ns(s) => &s.psi,
            FieldState::Kg(s) => &s.psi,
        }
    }

    pub fn equation(&self) -> Equation {
        match self {
            FieldState::Ns(_) => Equation::Ns,
            FieldState::Kg(_) => Equation::Nkg,
        }
    }
}

/// One timestamped record of first integrals and hylomorphy diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub energy: f64,
    pub charge: f64,
    pub momentum: [f64; MAX_DIM],
    pub angular_momentum: [f64; MAX_DIM],
    /// E/|H|; NaN when H = 0.
    pub lambda: f64,
    /// Barycenter (NS) or ergocenter (NKG).
    pub center: [f64; MAX_DIM],
    pub bound_mass: f64,
    pub leakage: f64,
}

pub const DIAGNOSTICS_HEADER: &str = "t,E,H,Px,Py,Pz,Mx,My,Mz,Lambda,qx,qy,qz,bound_mass,leakage";

impl DiagnosticsRow {
    pub fn to_csv(&self) -> String {
        let mut fields = vec![self.t, self.energy, self.charge];
        fields.extend_from_slice(&self.momentum);
        fields.extend_from_slice(&self.angular_momentum);
        fields.push(self.lambda);
        fields.extend_from_slice(&self.center);
        fields.push(self.bound_mass);
        fields.push(self.leakage);
        fields
            .iter()
            .map(|v| format!("{v:.16e}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_csv(line: &str) -> Result<Self> {
        let v: Vec<f64> = line
            .trim()
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| HylosError::Parse(format!("{s}: {e}"))))
            .collect::<Result<_>>()?;
        if v.len() != 15 {
            return Err(HylosError::Parse(format!("expected 15 columns, got {}", v.len())));
        }
        Ok(Self {
            t: v[0],
            energy: v[1],
            charge: v[2],
            momentum: [v[3], v[4], v[5]],
            angular_momentum: [v[6], v[7], v[8]],
            lambda: v[9],
            center: [v[10], v[11], v[12]],
            bound_mass: v[13],
            leakage: v[14],
        })
    }
}

fn require(model: &NonlinearModel, expected: Equation) -> Result<()> {
    if model.equation() != expected {
        return Err(HylosError::EquationMismatch {
            expected: expected.name(),
            got: model.equation().name(),
        });
    }
    Ok(())
}

/// Evaluates observables on one grid with cached transforms.
#[derive(Clone, Debug)]
pub struct Observer {
    spectral: Spectral,
    model: NonlinearModel,
    potential: Vec<f64>,
    scaling: Semiclassical,
}

impl Observer {
    pub fn new(grid: &Grid, model: NonlinearModel, potential: &ExternalPotential) -> Self {
        Self {
            spectral: Spectral::new(grid),
            model,
            potential: potential.node_values(grid),
            scaling: Semiclassical::default(),
        }
    }

    pub fn with_scaling(mut self, scaling: Semiclassical) -> Self {
        self.scaling = scaling;
        self
    }

    pub fn grid(&self) -> &Grid {
        self.spectral.grid()
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn model(&self) -> &NonlinearModel {
        &self.model
    }

    fn check_grid(&self, f: &ComplexField) -> Result<()> {
        if f.grid() != self.grid() {
            return Err(HylosError::InvalidArgument("state grid differs from observer grid".into()));
        }
        Ok(())
    }

    // ---- densities ----

    /// ρ_E = (h²/2)|∇ψ|² + h^{−α−γ}W(h^γ|ψ|) + V|ψ|².
    pub fn energy_density_ns(&self, psi: &ComplexField) -> Result<Vec<f64>> {
        require(&self.model, Equation::Ns)?;
        self.check_grid(psi)?;
        let sc = self.scaling;
        let kin = 0.5 * sc.h * sc.h;
        let amp = sc.h.powf(sc.gamma_exp);
        let pot = sc.h.powf(-sc.alpha - sc.gamma_exp);
        let grad2 = self.spectral.grad_sqr(psi.values());
        Ok(psi
            .values()
            .iter()
            .zip(grad2)
            .zip(&self.potential)
            .map(|((z, g2), v)| kin * g2 + pot * self.model.w(amp * z.norm()) + v * z.norm_sqr())
            .collect())
    }

    /// ρ_E = ½|ψ_t|² + ½|∇ψ|² + W(|ψ|).
    pub fn energy_density_nkg(&self, state: &KgState) -> Result<Vec<f64>> {
        require(&self.model, Equation::Nkg)?;
        self.check_grid(&state.psi)?;
        let grad2 = self.spectral.grad_sqr(state.psi.values());
        Ok(state
            .psi
            .values()
            .iter()
            .zip(state.psi_t.values())
            .zip(grad2)
            .map(|((z, zt), g2)| 0.5 * zt.norm_sqr() + 0.5 * g2 + self.model.w(z.norm()))
            .collect())
    }

    pub fn charge_density_nkg(&self, state: &KgState) -> Vec<f64> {
        state
            .psi
            .values()
            .iter()
            .zip(state.psi_t.values())
            .map(|(z, zt)| (zt * z.conj()).im)
            .collect()
    }

    /// Momentum densities h·Im(∂_a ψ · conj ψ), one vector per axis.
    pub fn momentum_density_ns(&self, psi: &ComplexField) -> Vec<Vec<f64>> {
        let h = self.scaling.h;
        (0..self.grid().dim())
            .map(|axis| {
                self.spectral
                    .derivative(psi.values(), axis)
                    .iter()
                    .zip(psi.values())
                    .map(|(d, z)| h * (d * z.conj()).im)
                    .collect()
            })
            .collect()
    }

    /// Momentum densities −Re(∂ₜψ · conj ∂_a ψ).
    pub fn momentum_density_nkg(&self, state: &KgState) -> Vec<Vec<f64>> {
        (0..self.grid().dim())
            .map(|axis| {
                self.spectral
                    .derivative(state.psi.values(), axis)
                    .iter()
                    .zip(state.psi_t.values())
                    .map(|(d, zt)| -(zt * d.conj()).re)
                    .collect()
            })
            .collect()
    }

    // ---- integrals ----

    pub fn energy_ns(&self, state: &NsState) -> Result<f64> {
        self.grid().integrate(&self.energy_density_ns(&state.psi)?)
    }

    pub fn energy_nkg(&self, state: &KgState) -> Result<f64> {
        self.grid().integrate(&self.energy_density_nkg(state)?)
    }

    pub fn charge_ns(&self, state: &NsState) -> Result<f64> {
        self.grid().integrate(&state.psi.abs_sqr())
    }

    /// Signed charge Im∫∂ₜψ·conj(ψ).
    pub fn charge_nkg(&self, state: &KgState) -> Result<f64> {
        self.grid().integrate(&self.charge_density_nkg(state))
    }

    pub fn momentum_ns(&self, state: &NsState) -> Result<Vec<f64>> {
        self.momentum_density_ns(&state.psi)
            .iter()
            .map(|d| self.grid().integrate(d))
            .collect()
    }

    pub fn momentum_nkg(&self, state: &KgState) -> Result<Vec<f64>> {
        self.momentum_density_nkg(state)
            .iter()
            .map(|d| self.grid().integrate(d))
            .collect()
    }

    /// ∫ x × (∇ψ ⊗ weight) with `pair(∂ψ, ψ, ψ_t)` giving the scalar density.
    fn angular<F>(&self, psi: &ComplexField, mut pair: F) -> Result<[f64; MAX_DIM]>
    where
        F: FnMut(usize, Complex64) -> f64,
    {
        let grid = *self.grid();
        if grid.dim() < 2 {
            return Err(HylosError::InvalidArgument("angular momentum needs dim >= 2".into()));
        }
        let derivs: Vec<Vec<Complex64>> = (0..grid.dim())
            .map(|axis| self.spectral.derivative(psi.values(), axis))
            .collect();
        let d = |axis: usize, k: usize| -> Complex64 {
            if axis < grid.dim() {
                derivs[axis][k]
            } else {
                Complex64::new(0.0, 0.0)
            }
        };
        let mut out = [0.0; MAX_DIM];
        for (comp, (j, l)) in [(1usize, 2usize), (2, 0), (0, 1)].into_iter().enumerate() {
            let dens: Vec<f64> = (0..grid.len())
                .map(|k| {
                    let x = grid.point(k);
                    let cross = d(l, k) * x[j] - d(j, k) * x[l];
                    pair(k, cross)
                })
                .collect();
            out[comp] = grid.integrate(&dens)?;
        }
        Ok(out)
    }

    /// M = h·Im∫(x × ∇ψ)·conj(ψ).
    pub fn angular_momentum_ns(&self, state: &NsState) -> Result<[f64; MAX_DIM]> {
        let h = self.scaling.h;
        let psi = state.psi.values();
        self.angular(&state.psi, |k, c| h * (c * psi[k].conj()).im)
    }

    /// M = Re∫(x × ∇ψ)·conj(∂ₜψ).
    pub fn angular_momentum_nkg(&self, state: &KgState) -> Result<[f64; MAX_DIM]> {
        let psi_t = state.psi_t.values();
        self.angular(&state.psi, |k, c| (c * psi_t[k].conj()).re)
    }

    fn weighted_center(&self, density: &[f64], total: f64) -> Result<Vec<f64>> {
        let grid = self.grid();
        (0..grid.dim())
            .map(|axis| {
                let moment: Vec<f64> = density
                    .iter()
                    .enumerate()
                    .map(|(k, d)| d * grid.point(k)[axis])
                    .collect();
                Ok(grid.integrate(&moment)? / total)
            })
            .collect()
    }

    /// q = ∫x|ψ|² / H.
    pub fn barycenter(&self, state: &NsState) -> Result<Vec<f64>> {
        let rho = state.psi.abs_sqr();
        let h = self.grid().integrate(&rho)?;
        if !(h > 0.0) {
            return Err(HylosError::Degenerate("barycenter of a zero-charge state".into()));
        }
        self.weighted_center(&rho, h)
    }

    /// Q = ∫x ρ_E / E.
    pub fn ergocenter(&self, state: &KgState) -> Result<Vec<f64>> {
        let rho = self.energy_density_nkg(state)?;
        let e = self.grid().integrate(&rho)?;
        if !(e > 0.0) {
            return Err(HylosError::Degenerate("ergocenter of a zero-energy state".into()));
        }
        self.weighted_center(&rho, e)
    }

    pub fn hylomorphy_ratio_ns(&self, state: &NsState) -> Result<f64> {
        ratio(self.energy_ns(state)?, self.charge_ns(state)?)
    }

    pub fn hylomorphy_ratio_nkg(&self, state: &KgState) -> Result<f64> {
        ratio(self.energy_nkg(state)?, self.charge_nkg(state)?)
    }

    /// β = [E₀|ρ_H| − ρ_E]⁺ pointwise.
    pub fn binding_density_ns(&self, state: &NsState) -> Result<Vec<f64>> {
        let e0 = self.model.rest_energy();
        let rho_e = self.energy_density_ns(&state.psi)?;
        Ok(state
            .psi
            .values()
            .iter()
            .zip(rho_e)
            .map(|(z, re)| (e0 * z.norm_sqr() - re).max(0.0))
            .collect())
    }

    pub fn binding_density_nkg(&self, state: &KgState) -> Result<Vec<f64>> {
        let e0 = self.model.rest_energy();
        let rho_e = self.energy_density_nkg(state)?;
        Ok(self
            .charge_density_nkg(state)
            .into_iter()
            .zip(rho_e)
            .map(|(rh, re)| (e0 * rh.abs() - re).max(0.0))
            .collect())
    }

    pub fn diagnostics(&self, state: &FieldState) -> Result<DiagnosticsRow> {
        let grid = *self.grid();
        let mut row = DiagnosticsRow {
            t: state.time(),
            energy: 0.0,
            charge: 0.0,
            momentum: [0.0; MAX_DIM],
            angular_momentum: [0.0; MAX_DIM],
            lambda: f64::NAN,
            center: [0.0; MAX_DIM],
            bound_mass: 0.0,
            leakage: state.psi().boundary_leakage(),
        };
        let (energy, charge, momentum, beta) = match state {
            FieldState::Ns(s) => {
                if grid.dim() >= 2 {
                    row.angular_momentum = self.angular_momentum_ns(s)?;
                }
                if let Ok(q) = self.barycenter(s) {
                    row.center[..q.len()].copy_from_slice(&q);
                }
                (
                    self.energy_ns(s)?,
                    self.charge_ns(s)?,
                    self.momentum_ns(s)?,
                    self.binding_density_ns(s)?,
                )
            }
            FieldState::Kg(s) => {
                if grid.dim() >= 2 {
                    row.angular_momentum = self.angular_momentum_nkg(s)?;
                }
                if let Ok(q) = self.ergocenter(s) {
                    row.center[..q.len()].copy_from_slice(&q);
                }
                (
                    self.energy_nkg(s)?,
                    self.charge_nkg(s)?,
                    self.momentum_nkg(s)?,
                    self.binding_density_nkg(s)?,
                )
            }
        };
        row.energy = energy;
        row.charge = charge;
        row.momentum[..momentum.len()].copy_from_slice(&momentum);
        if charge != 0.0 {
            row.lambda = energy / charge.abs();
        }
        row.bound_mass = grid.integrate(&beta)?;
        Ok(row)
    }
}

fn ratio(energy: f64, charge: f64) -> Result<f64> {
    if charge == 0.0 {
        return Err(HylosError::Degenerate("hylomorphy ratio of a zero-charge state".into()));
    }
    Ok(energy / charge.abs())
}

// ---- free-function API ----

pub fn energy_ns(state: &NsState, model: &NonlinearModel, potential: &ExternalPotential) -> Result<f64> {
    Observer::new(state.grid(), *model, potential).energy_ns(state)
}

pub fn energy_nkg(state: &KgState, model: &NonlinearModel) -> Result<f64> {
    Observer::new(state.grid(), *model, &ExternalPotential::Zero).energy_nkg(state)
}

pub fn hylenic_charge_ns(state: &NsState) -> Result<f64> {
    state.grid().integrate(&state.psi.abs_sqr())
}

pub fn hylenic_charge_nkg(state: &KgState) -> Result<f64> {
    let dens: Vec<f64> = state
        .psi
        .values()
        .iter()
        .zip(state.psi_t.values())
        .map(|(z, zt)| (zt * z.conj()).im)
        .collect();
    state.grid().integrate(&dens)
}

/// Liapunov value (E − c_σ)² + (H − σ)².
pub fn liapunov_value(energy: f64, charge: f64, c_sigma: f64, sigma: f64) -> f64 {
    (energy - c_sigma).powi(2) + (charge - sigma).powi(2)
}

/// Least-squares slope of each coordinate of `points` against `times`.
pub fn fit_velocity(times: &[f64], points: &[Vec<f64>]) -> Result<Vec<f64>> {
    if times.len() < 2 || times.len() != points.len() {
        return Err(HylosError::InvalidArgument("velocity fit needs >= 2 matching samples".into()));
    }
    let n = times.len() as f64;
    let t_mean = times.iter().sum::<f64>() / n;
    let stt: f64 = times.iter().map(|t| (t - t_mean).powi(2)).sum();
    if stt == 0.0 {
        return Err(HylosError::Degenerate("velocity fit over a single instant".into()));
    }
    let dim = points[0].len();
    Ok((0..dim)
        .map(|a| {
            let x_mean = points.iter().map(|p| p[a]).sum::<f64>() / n;
            times
                .iter()
                .zip(points)
                .map(|(t, p)| (t - t_mean) * (p[a] - x_mean))
                .sum::<f64>()
                / stt
        })
        .collect())
}

/// Normalized Derrick–Pohozaev residual
/// `[(½ − 1/N)∫|∇u|² + ∫G(u)] / ∫|∇u|²` over ℝᴺ by radial quadrature.
pub fn derrick_pohozaev_residual(profile: &RadialProfile, g: impl Fn(f64) -> f64) -> f64 {
    let dirichlet = profile.dirichlet();
    if dirichlet == 0.0 {
        return 0.0;
    }
    let potential = profile.radial_integral(|j| g(profile.u[j]));
    let coeff = 0.5 - 1.0 / profile.dim as f64;
    (coeff * dirichlet + potential) / dirichlet
}

/// Energy and |charge| of the standing wave built on a radial profile,
/// by radial quadrature.
pub fn profile_energy_charge(profile: &RadialProfile, model: &NonlinearModel) -> Result<(f64, f64)> {
    if profile.equation != model.equation() {
        return Err(HylosError::EquationMismatch {
            expected: profile.equation.name(),
            got: model.equation().name(),
        });
    }
    let w = profile.omega;
    let energy = match profile.equation {
        Equation::Ns => profile.radial_integral(|j| 0.5 * profile.du[j].powi(2) + model.w(profile.u[j])),
        Equation::Nkg => profile.radial_integral(|j| {
            0.5 * profile.du[j].powi(2) + model.w(profile.u[j]) + 0.5 * w * w * profile.u[j].powi(2)
        }),
    };
    let charge = match profile.equation {
        Equation::Ns => profile.sigma,
        Equation::Nkg => w.abs() * profile.sigma,
    };
    Ok((energy, charge))
}

/// Local frequency ω = −∂ₜS and wavenumber k = ∇S at the middle snapshot.
#[derive(Clone, Debug)]
pub struct LocalDeBroglie {
    pub omega: Vec<f64>,
    /// One vector per axis.
    pub k: Vec<Vec<f64>>,
    /// Nodes where the amplitude is above the phase floor.
    pub valid: Vec<bool>,
}

/// ω by centered differencing of the phase between the snapshots around the
/// middle one; k = Im(conj ψ ∇ψ)/|ψ|² at the middle snapshot.
pub fn local_frequency_wavenumber(
    history: &[(f64, ComplexField)],
    phase_floor: f64,
) -> Result<LocalDeBroglie> {
    if history.len() < 2 {
        return Err(HylosError::InvalidArgument("need at least two snapshots".into()));
    }
    let mid = history.len() / 2;
    let (lo, hi) = if history.len() >= 3 { (mid - 1, mid + 1) } else { (0, 1) };
    let (t0, f0) = &history[lo];
    let (t1, f1) = &history[hi];
    let (_, fm) = &history[mid];
    f0.check_same_grid(f1)?;
    let dt = t1 - t0;
    if !(dt > 0.0) {
        return Err(HylosError::InvalidArgument("snapshot times must increase".into()));
    }
    let grid = *fm.grid();
    let spectral = Spectral::new(&grid);
    let derivs: Vec<Vec<Complex64>> = (0..grid.dim()).map(|a| spectral.derivative(fm.values(), a)).collect();
    let n = grid.len();
    let mut valid = vec![false; n];
    let mut omega = vec![f64::NAN; n];
    let mut k = vec![vec![f64::NAN; n]; grid.dim()];
    for j in 0..n {
        let (a, b, c) = (f0.values()[j], f1.values()[j], fm.values()[j]);
        if a.norm() < phase_floor || b.norm() < phase_floor || c.norm() < phase_floor {
            continue;
        }
        valid[j] = true;
        omega[j] = -(b * a.conj()).arg() / dt;
        for axis in 0..grid.dim() {
            k[axis][j] = (c.conj() * derivs[axis][j]).im / c.norm_sqr();
        }
    }
    if !valid.iter().any(|&v| v) {
        return Err(HylosError::Degenerate("phase undefined at every node".into()));
    }
    Ok(LocalDeBroglie { omega, k, valid })
}

/// Peak of |ψ| along axis 1 through the maximum node, refined by a parabola
/// through the three nodes around it. Returns (position, |ψ| at the peak node index).
pub fn peak_position(field: &ComplexField) -> (f64, usize) {
    let grid = *field.grid();
    let (k_max, _) = field
        .values()
        .iter()
        .enumerate()
        .fold((0usize, -1.0), |best, (k, z)| {
            let a = z.norm();
            if a > best.1 {
                (k, a)
            } else {
                best
            }
        });
    let idx = grid.multi_index(k_max);
    let n = grid.counts()[0];
    let at = |i: usize| {
        let mut m = idx;
        m[0] = i % n;
        field.values()[grid.flat_index(m)].norm()
    };
    let (ym, y0, yp) = (at(idx[0] + n - 1), at(idx[0]), at(idx[0] + 1));
    let denom = ym - 2.0 * y0 + yp;
    let shift = if denom != 0.0 { 0.5 * (ym - yp) / denom } else { 0.0 };
    (grid.coord(0, idx[0]) + shift * grid.spacing(0), k_max)
}

/// Full width at half maximum of |ψ| along axis 1 through the peak node,
/// with linear interpolation at the crossings.
pub fn half_max_width(field: &ComplexField) -> f64 {
    let grid = *field.grid();
    let (_, k_max) = peak_position(field);
    let idx = grid.multi_index(k_max);
    let n = grid.counts()[0] as isize;
    let at = |i: isize| {
        let mut m = idx;
        m[0] = i.rem_euclid(n) as usize;
        field.values()[grid.flat_index(m)].norm()
    };
    let i0 = idx[0] as isize;
    let half = 0.5 * at(i0);
    let crossing = |dir: isize| -> f64 {
        let mut i = i0;
        while at(i + dir) >= half {
            i += dir;
            if (i - i0).abs() > n {
                break;
            }
        }
        let (a, b) = (at(i), at(i + dir));
        (i - i0) as f64 + dir as f64 * (a - half) / (a - b)
    };
    (crossing(1) + crossing(-1).abs()) * grid.spacing(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Equation;
    use std::f64::consts::PI;

    fn plane_wave(n: usize) -> (Grid, ComplexField) {
        let g = Grid::new(1, &[2.0 * PI], &[n]).unwrap();
        let f = ComplexField::from_fn(g, |x| Complex64::new(0.0, x[0]).exp());
        (g, f)
    }

    fn free_ns() -> NonlinearModel {
        NonlinearModel::power_focusing(2.0, 4.0, 0.0, Equation::Ns).unwrap()
    }

    fn sech_state() -> NsState {
        let g = Grid::new(1, &[40.0], &[1024]).unwrap();
        NsState::new(
            ComplexField::from_fn(g, |x| Complex64::new(2f64.sqrt() / x[0].cosh(), 0.0)),
            0.0,
        )
    }

    #[test]
    fn energy_ns_examples() {
        let (g, f) = plane_wave(64);
        let z = NsState::new(ComplexField::zeros(g), 0.0);
        assert_eq!(energy_ns(&z, &free_ns(), &ExternalPotential::Zero).unwrap(), 0.0);
        let e = energy_ns(&NsState::new(f, 0.0), &free_ns(), &ExternalPotential::Zero).unwrap();
        assert!((e - 3.0 * PI).abs() < 1e-12);
        let kg = NonlinearModel::power_focusing(1.0, 4.0, 1.0, Equation::Nkg).unwrap();
        assert!(matches!(
            energy_ns(&z, &kg, &ExternalPotential::Zero),
            Err(HylosError::EquationMismatch { .. })
        ));
    }

    #[test]
    fn energy_ns_of_sech_matches_closed_form() {
        // E = ∫½u′² + u² − ¼u⁴ with u = √2 sech: 2/3 + 4 − 4/3 = 10/3
        let m = NonlinearModel::power_focusing(2.0, 4.0, 1.0, Equation::Ns).unwrap();
        let e = energy_ns(&sech_state(), &m, &ExternalPotential::Zero).unwrap();
        assert!((e - 10.0 / 3.0).abs() < 1e-6, "{e}");
    }

    #[test]
    fn energy_nkg_examples() {
        let (g, f) = plane_wave(64);
        let m = NonlinearModel::power_focusing(1.0, 4.0, 0.0, Equation::Nkg).unwrap();
        let zero = KgState::new(ComplexField::zeros(g), ComplexField::zeros(g), 0.0).unwrap();
        assert_eq!(energy_nkg(&zero, &m).unwrap(), 0.0);
        let ft = f.scaled(Complex64::new(0.0, -1.0));
        let s = KgState::new(f, ft, 0.0).unwrap();
        assert!((energy_nkg(&s, &m).unwrap() - 3.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn charge_examples() {
        let (g, f) = plane_wave(64);
        assert!((hylenic_charge_ns(&NsState::new(f.clone(), 0.0)).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert_eq!(hylenic_charge_ns(&NsState::new(ComplexField::zeros(g), 0.0)).unwrap(), 0.0);
        assert!((hylenic_charge_ns(&sech_state()).unwrap() - 4.0).abs() < 1e-8);

        // standing wave (u, −iωu): H = −ωσ
        let u = sech_state().psi;
        let omega = 1.0;
        let s = KgState::new(u.clone(), u.scaled(Complex64::new(0.0, -omega)), 0.0).unwrap();
        assert!((hylenic_charge_nkg(&s).unwrap() + 4.0).abs() < 1e-8);
        let real = KgState::new(u.clone(), u.scaled(Complex64::new(0.7, 0.0)), 0.0).unwrap();
        assert_eq!(hylenic_charge_nkg(&real).unwrap(), 0.0);
        let rot = Complex64::from_polar(1.0, 1.1);
        let rotated = KgState::new(s.psi.scaled(rot), s.psi_t.scaled(rot), 0.0).unwrap();
        assert!((hylenic_charge_nkg(&rotated).unwrap() - hylenic_charge_nkg(&s).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn momentum_examples() {
        let (g, f) = plane_wave(64);
        let obs = Observer::new(&g, free_ns(), &ExternalPotential::Zero);
        let p = obs.momentum_ns(&NsState::new(f, 0.0)).unwrap();
        assert!((p[0] - 2.0 * PI).abs() < 1e-12);
        let s = sech_state();
        let obs = Observer::new(s.grid(), free_ns(), &ExternalPotential::Zero);
        assert!(obs.momentum_ns(&s).unwrap()[0].abs() < 1e-14);
    }

    #[test]
    fn angular_momentum_examples() {
        let g = Grid::new(2, &[16.0, 16.0], &[64, 64]).unwrap();
        let obs = Observer::new(&g, free_ns(), &ExternalPotential::Zero);
        let radial = NsState::new(
            ComplexField::from_fn(g, |x| Complex64::new((-(x[0] * x[0] + x[1] * x[1])).exp(), 0.0)),
            0.0,
        );
        assert!(obs.angular_momentum_ns(&radial).unwrap().iter().all(|m| m.abs() < 1e-14));

        let g2 = Grid::new(2, &[2.0 * PI, 2.0 * PI], &[32, 32]).unwrap();
        let obs2 = Observer::new(&g2, free_ns(), &ExternalPotential::Zero);
        let pw = NsState::new(ComplexField::from_fn(g2, |x| Complex64::new(0.0, x[0]).exp()), 0.0);
        // −∫x₂ dx over the box vanishes except for the half-open grid offset
        let m = obs2.angular_momentum_ns(&pw).unwrap();
        let offset: f64 = (0..32).map(|j| g2.coord(1, j)).sum::<f64>() * g2.spacing(1) * 2.0 * PI;
        assert!((m[2] + offset).abs() < 1e-10);

        // vortex-like state ψ = (x + iy)e^{−r²}: M_z = ∫r²e^{−2r²} = π/4
        let vortex = NsState::new(
            ComplexField::from_fn(g, |x| {
                Complex64::new(x[0], x[1]) * (-(x[0] * x[0] + x[1] * x[1])).exp()
            }),
            0.0,
        );
        let mv = obs.angular_momentum_ns(&vortex).unwrap();
        assert!((mv[2] - PI / 4.0).abs() < 1e-10, "{}", mv[2]);

        let g1 = Grid::new(1, &[10.0], &[16]).unwrap();
        let obs1 = Observer::new(&g1, free_ns(), &ExternalPotential::Zero);
        assert!(obs1
            .angular_momentum_ns(&NsState::new(ComplexField::zeros(g1), 0.0))
            .is_err());
    }

    #[test]
    fn rotated_state_has_rotated_angular_momentum() {
        let g = Grid::new(3, &[12.0; 3], &[16; 3]).unwrap();
        let obs = Observer::new(&g, free_ns(), &ExternalPotential::Zero);
        let f = |x: &[f64]| {
            let r2 = x[0] * x[0] + 0.8 * x[1] * x[1] + 1.2 * x[2] * x[2];
            Complex64::new(x[1] + 0.3, x[2] - 0.5 * x[0]) * (-0.5 * r2).exp()
        };
        let psi = ComplexField::from_fn(g, f);
        // rotation by 90° about axis 3: ψ′(x, y, z) = ψ(y, −x, z)
        let n = g.counts()[0];
        let mut rot = vec![Complex64::new(0.0, 0.0); g.len()];
        for (k, z) in rot.iter_mut().enumerate() {
            let [i, j, l] = g.multi_index(k);
            // y ↦ index j, −x ↦ index (n − i) mod n
            *z = psi.values()[g.flat_index([j, (n - i) % n, l])];
        }
        let rotated = ComplexField::new(g, rot).unwrap();
        let m = obs.angular_momentum_ns(&NsState::new(psi, 0.0)).unwrap();
        let mr = obs.angular_momentum_ns(&NsState::new(rotated, 0.0)).unwrap();
        // R(90° about z) maps (Mx, My, Mz) to (−My, Mx, Mz)
        assert!((mr[0] + m[1]).abs() < 1e-8);
        assert!((mr[1] - m[0]).abs() < 1e-8);
        assert!((mr[2] - m[2]).abs() < 1e-8);
        assert!(m.iter().any(|v| v.abs() > 1e-3));
    }

    #[test]
    fn barycenter_examples() {
        let s = sech_state();
        let obs = Observer::new(s.grid(), free_ns(), &ExternalPotential::Zero);
        let q = obs.barycenter(&s).unwrap();
        // half-open grid: the node set is symmetric up to the lone −L/2 node
        assert!(q[0].abs() < 1e-12);
        let g = *s.grid();
        let shifted = NsState::new(
            ComplexField::from_fn(g, |x| Complex64::new(2f64.sqrt() / (x[0] - 2.5).cosh(), 0.0)),
            0.0,
        );
        assert!((obs.barycenter(&shifted).unwrap()[0] - 2.5).abs() < g.spacing(0));
        assert!(obs.barycenter(&NsState::new(ComplexField::zeros(g), 0.0)).is_err());
    }

    #[test]
    fn hylomorphy_ratio_examples() {
        let (g, f) = plane_wave(64);
        let obs = Observer::new(&g, free_ns(), &ExternalPotential::Zero);
        let lam = obs.hylomorphy_ratio_ns(&NsState::new(f, 0.0)).unwrap();
        assert!((lam - 1.5).abs() < 1e-12);
        assert!(obs.hylomorphy_ratio_ns(&NsState::new(ComplexField::zeros(g), 0.0)).is_err());

        let m = NonlinearModel::power_focusing(2.0, 4.0, 1.0, Equation::Ns).unwrap();
        let s = sech_state();
        let obs = Observer::new(s.grid(), m, &ExternalPotential::Zero);
        let lam = obs.hylomorphy_ratio_ns(&s).unwrap();
        assert!(lam < m.rest_energy());
        let rotated = NsState::new(s.psi.scaled(Complex64::from_polar(1.0, 0.4)), 0.0);
        assert!((obs.hylomorphy_ratio_ns(&rotated).unwrap() - lam).abs() < 1e-12);
    }

    #[test]
    fn binding_density_examples() {
        let g = Grid::new(1, &[10.0], &[16]).unwrap();
        let m = NonlinearModel::power_focusing(2.0, 4.0, 1.0, Equation::Ns).unwrap();
        let obs = Observer::new(&g, m, &ExternalPotential::Zero);
        let zero = obs.binding_density_ns(&NsState::new(ComplexField::zeros(g), 0.0)).unwrap();
        assert!(zero.iter().all(|&b| b == 0.0));
        let two = NsState::new(ComplexField::from_fn(g, |_| Complex64::new(2.0, 0.0)), 0.0);
        let beta = obs.binding_density_ns(&two).unwrap();
        assert!(beta.iter().all(|&b| (b - 4.0).abs() < 1e-12));

        let s = sech_state();
        let obs = Observer::new(s.grid(), m, &ExternalPotential::Zero);
        let lam = obs.hylomorphy_ratio_ns(&s).unwrap();
        let h = obs.charge_ns(&s).unwrap();
        let bound = s.grid().integrate(&obs.binding_density_ns(&s).unwrap()).unwrap();
        assert!(bound >= h * (m.rest_energy() - lam));
        assert!(bound > 0.0);
    }

    #[test]
    fn liapunov_examples() {
        assert_eq!(liapunov_value(2.0, 3.0, 2.0, 3.0), 0.0);
        assert!(liapunov_value(2.1, 3.0, 2.0, 3.0) > 0.0);
    }

    #[test]
    fn fit_velocity_recovers_slope() {
        let t: Vec<f64> = (0..20).map(|j| j as f64 * 0.1).collect();
        let p: Vec<Vec<f64>> = t.iter().map(|t| vec![1.0 + 0.3 * t, -0.2 * t]).collect();
        let v = fit_velocity(&t, &p).unwrap();
        assert!((v[0] - 0.3).abs() < 1e-12 && (v[1] + 0.2).abs() < 1e-12);
        assert!(fit_velocity(&t[..1], &p[..1]).is_err());
    }

    #[test]
    fn diagnostics_row_roundtrip() {
        let row = DiagnosticsRow {
            t: 0.1,
            energy: 1.0 / 3.0,
            charge: 4.0,
            momentum: [0.1, 0.0, 0.0],
            angular_momentum: [0.0; 3],
            lambda: 0.25,
            center: [1.0, 0.0, 0.0],
            bound_mass: 2.0,
            leakage: 1e-9,
        };
        assert_eq!(DiagnosticsRow::from_csv(&row.to_csv()).unwrap(), row);
        assert_eq!(DIAGNOSTICS_HEADER.split(',').count(), 15);
    }

    #[test]
    fn de_broglie_of_plane_wave() {
        let g = Grid::new(1, &[2.0 * PI], &[32]).unwrap();
        let snaps: Vec<(f64, ComplexField)> = (0..3)
            .map(|j| {
                let t = j as f64 * 0.01;
                (t, ComplexField::from_fn(g, |x| Complex64::new(0.0, x[0] - t).exp()))
            })
            .collect();
        let db = local_frequency_wavenumber(&snaps, 1e-10).unwrap();
        assert!(db.omega.iter().all(|w| (w - 1.0).abs() < 1e-10));
        assert!(db.k[0].iter().all(|k| (k - 1.0).abs() < 1e-10));
        let zeros = vec![(0.0, ComplexField::zeros(g)), (0.1, ComplexField::zeros(g))];
        assert!(local_frequency_wavenumber(&zeros, 1e-10).is_err());
    }

    #[test]
    fn half_max_width_of_sech() {
        // |√2 sech x| drops to half at x = acosh 2
        let s = sech_state();
        let w = half_max_width(&s.psi);
        assert!((w - 2.0 * 2f64.acosh()).abs() < 2e-3, "{w}");
        let (x, _) = peak_position(&s.psi);
        assert!(x.abs() < 1e-6);
    }
}
