//! Browser bindings: ground-state profiles, a boosted soliton evolved in
//! place, and the Λ(ε, R) threshold scan.

use hylos::evolve::{run, EvolveConfig, Scheme};
use hylos::groundstate::{find_ground_state, RadialProfile, ShootingTolerances};
use hylos::lab::experiments::trapezoid;
use hylos::observables::{FieldState, KgState, NsState, Observer};
use hylos::symmetry::{galilean_boost, lorentz_boost_initialdata, standing_wave};
use hylos::{ComplexField, Equation, ExternalPotential, Grid, NonlinearModel};
use num_complex::Complex64;
use wasm_bindgen::prelude::*;

fn js(e: hylos::HylosError) -> JsError {
    JsError::new(&e.to_string())
}

fn equation(name: &str) -> Result<Equation, JsError> {
    match name {
        "ns" => Ok(Equation::Ns),
        "nkg" => Ok(Equation::Nkg),
        other => Err(JsError::new(&format!("unknown equation `{other}`"))),
    }
}

/// Power nonlinearity N(s) = −(c/p)sᵖ for NS, and the double power with a
/// small sextic for NKG so that W stays bounded below.
fn model(eq: Equation, a: f64, p: f64) -> Result<NonlinearModel, JsError> {
    match eq {
        Equation::Ns => NonlinearModel::power_focusing(a, p, 1.0, eq),
        Equation::Nkg => NonlinearModel::double_power(a, p, p + 2.0, 1.0, 0.05, eq),
    }
    .map_err(js)
}

/// Radial ground-state table with its first integrals.
#[wasm_bindgen]
pub struct Profile {
    inner: RadialProfile,
    energy: f64,
    charge: f64,
    e0: f64,
}

#[wasm_bindgen]
impl Profile {
    pub fn r(&self) -> Vec<f64> {
        self.inner.r.clone()
    }

    pub fn u(&self) -> Vec<f64> {
        self.inner.u.clone()
    }

    pub fn u0(&self) -> f64 {
        self.inner.u0()
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }

    pub fn lambda(&self) -> f64 {
        self.energy / self.charge
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }
}

#[wasm_bindgen]
pub fn ground_state(eq: &str, a: f64, p: f64, omega: f64, dim: usize) -> Result<Profile, JsError> {
    let m = model(equation(eq)?, a, p)?;
    let inner = find_ground_state(&m, omega, dim, &ShootingTolerances::default()).map_err(js)?;
    let (energy, charge) = hylos::observables::profile_energy_charge(&inner, &m).map_err(js)?;
    Ok(Profile { inner, energy, charge, e0: m.rest_energy() })
}

/// A 1D soliton boosted to speed `v` (Galilean for NS, Lorentz for NKG),
/// advanced in chunks so the page can draw a space-time picture.
#[wasm_bindgen]
pub struct Soliton {
    state: FieldState,
    model: NonlinearModel,
    observer: Observer,
    dt: f64,
}

#[wasm_bindgen]
impl Soliton {
    #[wasm_bindgen(constructor)]
    pub fn new(eq: &str, v: f64, length: f64, nodes: usize) -> Result<Soliton, JsError> {
        let eq = equation(eq)?;
        let grid = Grid::new(1, &[length], &[nodes]).map_err(js)?;
        let (m, omega) = match eq {
            Equation::Ns => (model(eq, 2.0, 4.0)?, 0.5),
            Equation::Nkg => (model(eq, 4.0, 4.0)?, 1.2),
        };
        let profile = find_ground_state(&m, omega, 1, &ShootingTolerances::default()).map_err(js)?;
        let x0 = [-0.25 * length];
        let state = match eq {
            Equation::Ns => {
                let rest = match standing_wave(&profile, &grid, &[0.0], 0.0).map_err(js)? {
                    FieldState::Ns(s) => s,
                    FieldState::Kg(_) => unreachable!("profile equation is NS"),
                };
                FieldState::Ns(galilean_boost(&rest, &[v], &x0).map_err(js)?)
            }
            Equation::Nkg => {
                FieldState::Kg(lorentz_boost_initialdata(&profile, &grid, omega, v, &x0, 0.0).map_err(js)?.0)
            }
        };
        let dt = match eq {
            Equation::Ns => 2e-3,
            Equation::Nkg => (0.5 * grid.spacing(0)).min(2e-3),
        };
        let observer = Observer::new(&grid, m, &ExternalPotential::Zero);
        Ok(Soliton { state, model: m, observer, dt })
    }

    /// Advances by `steps` time steps.
    pub fn advance(&mut self, steps: usize) -> Result<(), JsError> {
        let scheme = Scheme::for_equation(self.model.equation());
        let cfg = EvolveConfig::new(scheme, self.dt, steps as f64 * self.dt).with_diagnostics_every(steps.max(1));
        let traj = run(&self.state, &self.model, &ExternalPotential::Zero, &cfg, &mut []).map_err(js)?;
        self.state = traj.final_state;
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.state.time()
    }

    pub fn amplitude(&self) -> Vec<f64> {
        self.state.psi().values().iter().map(|z| z.norm()).collect()
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.state.psi().values().iter().map(|z| z.re).collect()
    }

    /// [E, H, Λ] at the current time.
    pub fn integrals(&self) -> Result<Vec<f64>, JsError> {
        let row = self.observer.diagnostics(&self.state).map_err(js)?;
        Ok(vec![row.energy, row.charge, row.lambda])
    }
}

/// Λ of ε·u_R for every (ε, R) pair, row-major in R. NKG states oscillate at
/// the rest frequency √a. The last entry is the threshold E₀.
#[wasm_bindgen]
pub fn threshold_scan(eq: &str, a: f64, eps: Vec<f64>, radii: Vec<f64>) -> Result<Vec<f64>, JsError> {
    let eq = equation(eq)?;
    let m = model(eq, a, 4.0)?;
    let length = 2.0 * (radii.iter().copied().fold(0.0, f64::max) + 1.0) + 16.0;
    let nodes = (length * 16.0).max(8.0).log2().ceil().exp2() as usize;
    let grid = Grid::new(1, &[length], &[nodes]).map_err(js)?;
    let obs = Observer::new(&grid, m, &ExternalPotential::Zero);
    let mut out = Vec::with_capacity(eps.len() * radii.len() + 1);
    for &radius in &radii {
        let bump = ComplexField::from_fn(grid, |x| Complex64::new(trapezoid(x[0].abs(), radius), 0.0));
        for &e in &eps {
            let psi = bump.scaled(Complex64::new(e, 0.0));
            let lambda = match eq {
                Equation::Ns => obs.hylomorphy_ratio_ns(&NsState::new(psi, 0.0)),
                Equation::Nkg => {
                    let psi_t = psi.scaled(Complex64::new(0.0, -a.sqrt()));
                    KgState::new(psi, psi_t, 0.0).and_then(|s| obs.hylomorphy_ratio_nkg(&s))
                }
            }
            .map_err(js)?;
            out.push(lambda);
        }
    }
    out.push(m.rest_energy());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_approaches_threshold() {
        let vals = threshold_scan("ns", 2.0, vec![1e-3], vec![16.0]).unwrap();
        let (lambda, e0) = (vals[0], vals[1]);
        assert_eq!(e0, 1.0);
        // gradient cost of the trapezoid ramp: 1/(2R + 2/3)
        assert!((lambda - e0 - 1.0 / (32.0 + 2.0 / 3.0)).abs() < 1e-3, "{lambda}");
    }

    #[test]
    fn soliton_moves_and_keeps_charge() {
        let mut s = Soliton::new("ns", 0.5, 40.0, 512).unwrap();
        let h0 = s.integrals().unwrap()[1];
        s.advance(500).unwrap();
        assert!((s.time() - 1.0).abs() < 1e-12);
        assert!((s.integrals().unwrap()[1] - h0).abs() < 1e-10);
        let k = grid_peak(&s.amplitude());
        let x = -20.0 + k as f64 * 40.0 / 512.0;
        assert!((x - (-10.0 + 0.5)).abs() < 0.2, "{x}");
    }

    fn grid_peak(a: &[f64]) -> usize {
        (0..a.len()).fold(0, |b, k| if a[k] > a[b] { k } else { b })
    }

    #[test]
    fn ground_state_is_hylomorphic_in_one_dimension() {
        let p = ground_state("ns", 2.0, 4.0, 0.5, 1).unwrap();
        assert!((p.u0() - 2f64.sqrt()).abs() < 1e-6);
        assert!(p.lambda() < p.e0());
    }
}
