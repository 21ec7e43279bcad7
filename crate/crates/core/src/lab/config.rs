//! Run configuration: a TOML file with dotted section keys such as
//! `grid.dim`, `model.family`, `boost.v` and `evolve.dt`. Unknown keys are
//! rejected. Every pass/fail threshold lives here with a default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HylosError, Result};
use crate::evolve::{EvolveConfig, Scheme};
use crate::grid::Grid;
use crate::groundstate::ShootingTolerances;
use crate::models::{Equation, ExternalPotential, Family, NonlinearModel, Semiclassical};
use crate::symmetry::BoostSpec;

/// A scalar applied to every axis, or one value per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerAxis<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Copy> PerAxis<T> {
    pub fn expand(&self, dim: usize) -> Vec<T> {
        match self {
            PerAxis::One(v) => vec![*v; dim],
            PerAxis::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub lengths: PerAxis<f64>,
    pub counts: PerAxis<usize>,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.dim, &self.lengths.expand(self.dim), &self.counts.expand(self.dim))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: String,
    pub equation: Equation,
    pub a: f64,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub c_p: Option<f64>,
    #[serde(default)]
    pub c_q: Option<f64>,
    #[serde(default)]
    pub require_positive: bool,
}

impl ModelSpec {
    pub fn build(&self) -> Result<NonlinearModel> {
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| HylosError::Config(format!("model.{key} is required for family {}", self.family)))
        };
        let family = match self.family.as_str() {
            "power_focusing" => Family::PowerFocusing {
                p: need(self.p, "p")?,
                c: self.c.unwrap_or(1.0),
            },
            "double_power" => Family::DoublePower {
                p: need(self.p, "p")?,
                q: need(self.q, "q")?,
                c_p: need(self.c_p, "c_p")?,
                c_q: need(self.c_q, "c_q")?,
            },
            "saturating_intro" | "saturating" => Family::SaturatingIntro,
            other => return Err(HylosError::Config(format!("unknown model.family `{other}`"))),
        };
        let model = NonlinearModel::new(self.a, family, self.equation)?;
        if self.require_positive {
            model.with_positivity(crate::models::DEFAULT_S_MAX)
        } else {
            Ok(model)
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(default = "zero_kind")]
    pub kind: String,
    #[serde(default)]
    pub kappa: f64,
}

fn zero_kind() -> String {
    "zero".into()
}

impl PotentialSpec {
    pub fn build(&self) -> Result<ExternalPotential> {
        match self.kind.as_str() {
            "zero" | "" => Ok(ExternalPotential::Zero),
            "harmonic" => ExternalPotential::harmonic(self.kappa),
            other => Err(HylosError::Config(format!("unknown potential.kind `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSpec {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default = "one")]
    pub diagnostic_every: usize,
    #[serde(default)]
    pub scheme: Option<Scheme>,
}

fn one() -> usize {
    1
}

impl EvolveSpec {
    pub fn build(&self, equation: Equation) -> Result<EvolveConfig> {
        let scheme = self.scheme.unwrap_or(Scheme::for_equation(equation));
        if scheme.equation() != equation {
            return Err(HylosError::Config(format!(
                "evolve.scheme {scheme:?} does not match model.equation {}",
                equation.name()
            )));
        }
        let cfg = EvolveConfig {
            dt: self.dt,
            t_end: self.t_end,
            snapshot_every: self.snapshot_every,
            diagnostic_every: self.diagnostic_every,
            scheme,
            semiclassical: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundStateSpec {
    pub omega: f64,
    /// Spatial dimension when no grid block is given.
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default = "d_h_r")]
    pub h_r: f64,
    #[serde(default = "d_r_max")]
    pub r_max: f64,
    #[serde(default = "d_u0_max")]
    pub u0_max: f64,
    /// Largest admissible Derrick–Pohozaev residual.
    #[serde(default = "d_pohozaev")]
    pub pohozaev_tol: f64,
}

fn d_h_r() -> f64 {
    crate::groundstate::DEFAULT_H_R
}
fn d_r_max() -> f64 {
    crate::groundstate::DEFAULT_R_MAX
}
fn d_u0_max() -> f64 {
    crate::groundstate::DEFAULT_U0_MAX
}
fn d_pohozaev() -> f64 {
    crate::groundstate::POHOZAEV_GATE
}

impl GroundStateSpec {
    pub fn tolerances(&self) -> ShootingTolerances {
        ShootingTolerances {
            h_r: self.h_r,
            r_max: self.r_max,
            u0_max: self.u0_max,
            ..ShootingTolerances::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilitySpec {
    /// Relative L² size of the seeded perturbation.
    pub noise: f64,
    /// Largest Fourier mode index used for the band-limited noise.
    pub noise_modes: usize,
    /// Run the dispersing wave-packet control next to the ground state.
    pub control: bool,
    pub control_amplitude: f64,
    pub control_width: f64,
    pub liapunov_factor: f64,
    pub peak_floor: f64,
    /// Largest admissible (E, H) drift of a zero-noise run.
    pub zero_noise_drift: f64,
}

impl Default for StabilitySpec {
    fn default() -> Self {
        Self {
            noise: 1e-2,
            noise_modes: 8,
            control: true,
            control_amplitude: 0.2,
            control_width: 1.0,
            liapunov_factor: 4.0,
            peak_floor: 0.5,
            zero_noise_drift: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TravelSpec {
    /// Snapshots in the velocity least-squares window.
    pub fit_window: usize,
    /// Largest admissible |fitted speed − boost speed|.
    pub speed_tol: f64,
    /// Largest admissible |fitted velocity − P/H| (NS).
    pub ns_identity_tol: f64,
    /// Largest admissible relative |fitted velocity − P/E| (NKG).
    pub nkg_identity_tol: f64,
    /// Speeds below this count as "not moving".
    pub rest_tol: f64,
}

impl Default for TravelSpec {
    fn default() -> Self {
        Self {
            fit_window: 50,
            speed_tol: 1e-3,
            ns_identity_tol: 1e-6,
            nkg_identity_tol: 1e-2,
            rest_tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RelativitySpec {
    pub velocities: Vec<f64>,
    /// Snapshots in the clock-phase regression.
    pub clock_window: usize,
    pub width_tol: f64,
    pub clock_tol: f64,
    pub mass_tol: f64,
    /// NS counterpart velocity and tolerance for P/q̇ = H.
    pub ns_velocity: f64,
    pub ns_mass_tol: f64,
}

impl Default for RelativitySpec {
    fn default() -> Self {
        Self {
            velocities: vec![0.3, 0.6],
            clock_window: 200,
            width_tol: 1e-2,
            clock_tol: 1e-2,
            mass_tol: 1e-2,
            ns_velocity: 0.3,
            ns_mass_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SemiclassicalSpec {
    pub h_ladder: Vec<f64>,
    pub alpha: f64,
    pub gamma_exp: f64,
    pub q0: Vec<f64>,
    pub v: Vec<f64>,
    pub periods: f64,
    /// dt = dt_scale · h^(α − γ + 1), resolving the internal frequency.
    pub dt_scale: f64,
    /// Finest-level deviation bound as a fraction of the oscillation amplitude.
    pub amplitude_fraction: f64,
    /// Time step of the point-particle oracle.
    pub oracle_dt: f64,
}

impl Default for SemiclassicalSpec {
    fn default() -> Self {
        Self {
            h_ladder: vec![0.5, 0.25, 0.125],
            alpha: 2.0,
            gamma_exp: 1.0,
            q0: vec![1.0],
            v: vec![0.0],
            periods: 2.0,
            dt_scale: 0.1,
            amplitude_fraction: 0.05,
            oracle_dt: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSpec {
    pub eps: Vec<f64>,
    pub radii: Vec<f64>,
    /// Relative distance of the scan infimum from E₀ counted as agreement.
    pub tolerance: f64,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            eps: vec![1e-3, 1e-2, 1e-1],
            radii: vec![2.0, 4.0, 8.0, 16.0],
            tolerance: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub boost: Option<BoostSpec>,
    #[serde(default)]
    pub evolve: Option<EvolveSpec>,
    #[serde(default)]
    pub groundstate: Option<GroundStateSpec>,
    #[serde(default)]
    pub stability: StabilitySpec,
    #[serde(default)]
    pub travel: TravelSpec,
    #[serde(default)]
    pub relativity: RelativitySpec,
    #[serde(default)]
    pub semiclassical: SemiclassicalSpec,
    #[serde(default)]
    pub scan: ScanSpec,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HylosError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HylosError::Config(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form, as lowercase hex.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn grid(&self) -> Result<Grid> {
        self.grid
            .as_ref()
            .ok_or_else(|| HylosError::Config("missing grid block".into()))?
            .build()
    }

    pub fn model(&self) -> Result<NonlinearModel> {
        self.model
            .as_ref()
            .ok_or_else(|| HylosError::Config("missing model block".into()))?
            .build()
    }

    pub fn groundstate(&self) -> Result<&GroundStateSpec> {
        self.groundstate
            .as_ref()
            .ok_or_else(|| HylosError::Config("missing groundstate block".into()))
    }

    pub fn evolve_config(&self) -> Result<EvolveConfig> {
        let eq = self.model()?.equation();
        self.evolve
            .as_ref()
            .ok_or_else(|| HylosError::Config("missing evolve block".into()))?
            .build(eq)
    }

    pub fn boost(&self) -> Result<&BoostSpec> {
        self.boost
            .as_ref()
            .ok_or_else(|| HylosError::Config("missing boost block".into()))
    }

    pub fn scaling(&self, h: f64) -> Result<Semiclassical> {
        Semiclassical::new(h, self.semiclassical.alpha, self.semiclassical.gamma_exp)
    }

    /// Dimension for ground-state work: the grid's, else `groundstate.dim`.
    pub fn dim(&self) -> Result<usize> {
        if let Some(g) = &self.grid {
            return Ok(g.dim);
        }
        self.groundstate()?
            .dim
            .ok_or_else(|| HylosError::Config("need grid.dim or groundstate.dim".into()))
    }

    /// Checks that every block the chosen experiment reads is present and valid.
    pub fn validate(&self) -> Result<()> {
        if let Some(m) = &self.model {
            m.build()?;
        }
        if let Some(g) = &self.grid {
            g.build()?;
        }
        self.potential.build()?;
        if let (Some(b), Some(m)) = (&self.boost, &self.model) {
            b.validate(m.equation)?;
        }
        if self.evolve.is_some() {
            self.evolve_config()?;
        }
        let Some(name) = self.experiment.as_deref() else {
            return Ok(());
        };
        let needs: &[&str] = match name {
            "groundstate" => &["model", "groundstate"],
            "stability" => &["model", "groundstate", "grid", "evolve"],
            "travel" => &["model", "groundstate", "grid", "evolve", "boost"],
            "potential_dynamics" => &["model", "groundstate", "grid"],
            "relativity" => &["model", "groundstate", "grid", "evolve"],
            "hylomorphy_scan" => &["model", "grid", "groundstate"],
            other => return Err(HylosError::Config(format!("unknown experiment `{other}`"))),
        };
        for block in needs {
            let present = match *block {
                "model" => self.model.is_some(),
                "groundstate" => self.groundstate.is_some(),
                "grid" => self.grid.is_some(),
                "evolve" => self.evolve.is_some(),
                "boost" => self.boost.is_some(),
                _ => true,
            };
            if !present {
                return Err(HylosError::Config(format!("experiment `{name}` needs a {block} block")));
            }
        }
        if needs.contains(&"groundstate") {
            self.dim()?;
        }
        if name == "potential_dynamics" {
            for &h in &self.semiclassical.h_ladder {
                self.scaling(h)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRAVEL: &str = r#"
experiment = "travel"
seed = 3
grid.dim = 1
grid.lengths = 40.0
grid.counts = 1024
model.family = "power_focusing"
model.equation = "ns"
model.a = 2.0
model.p = 4.0
model.c = 1.0
groundstate.omega = 0.5
boost.v = [0.3]
evolve.dt = 1e-3
evolve.t_end = 10.0
evolve.snapshot_every = 100
"#;

    #[test]
    fn dotted_keys_parse() {
        let c = RunConfig::from_toml(TRAVEL).unwrap();
        c.validate().unwrap();
        assert_eq!(c.grid().unwrap().counts(), &[1024]);
        assert_eq!(c.boost().unwrap().v, vec![0.3]);
        assert_eq!(c.evolve_config().unwrap().scheme, Scheme::NsSplitstep);
        assert_eq!(c.travel.fit_window, 50);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let bad = format!("{TRAVEL}\ngrid.spacing = 0.1\n");
        assert!(RunConfig::from_toml(&bad).is_err());
        assert!(RunConfig::from_toml("colour = 1").is_err());
    }

    #[test]
    fn missing_block_is_reported() {
        let c = RunConfig::from_toml("experiment = \"travel\"\n").unwrap();
        assert!(matches!(c.validate(), Err(HylosError::Config(_))));
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RunConfig::from_toml(TRAVEL).unwrap();
        let b = RunConfig::from_toml(TRAVEL).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let mut c = a.clone();
        c.seed = 4;
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn toml_roundtrip() {
        let a = RunConfig::from_toml(TRAVEL).unwrap();
        let back = RunConfig::from_toml(&a.to_toml().unwrap()).unwrap();
        assert_eq!(a, back);
    }
}
