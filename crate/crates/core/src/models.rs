//! Nonlinear potentials W(s) = ½·a·s² + N(s) and external potentials V(x).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HylosError, Result};
use crate::grid::{Grid, MAX_DIM};

/// Default upper end of amplitude scans.
pub const DEFAULT_S_MAX: f64 = 10.0;
/// Default step of amplitude scans.
pub const DEFAULT_SCAN_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Equation {
    Ns,
    Nkg,
}

impl Equation {
    pub fn name(self) -> &'static str {
        match self {
            Equation::Ns => "ns",
            Equation::Nkg => "nkg",
        }
    }
}

impl std::str::FromStr for Equation {
    type Err = HylosError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ns" => Ok(Equation::Ns),
            "nkg" => Ok(Equation::Nkg),
            other => Err(HylosError::Parse(format!("unknown equation `{other}`"))),
        }
    }
}

/// Built-in nonlinear parts N(s).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// N(s) = −(c/p)·sᵖ
    PowerFocusing { p: f64, c: f64 },
    /// N(s) = −(c_p/p)·sᵖ + (c_q/q)·s^q, q > p
    DoublePower { p: f64, q: f64, c_p: f64, c_q: f64 },
    /// W′(s) = a·s/(1+s), i.e. N(s) = a·(s − ln(1+s)) − ½·a·s²
    SaturatingIntro,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::PowerFocusing { .. } => "power_focusing",
            Family::DoublePower { .. } => "double_power",
            Family::SaturatingIntro => "saturating_intro",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonlinearModel {
    a: f64,
    family: Family,
    equation: Equation,
    require_positive: bool,
}

impl NonlinearModel {
    pub fn new(a: f64, family: Family, equation: Equation) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(HylosError::InvalidArgument(format!(
                "quadratic coefficient a = {a} must be nonnegative"
            )));
        }
        match family {
            Family::PowerFocusing { p, c } => {
                if !(p > 2.0 && c.is_finite()) {
                    return Err(HylosError::InvalidArgument(format!(
                        "power_focusing needs p > 2 (got p = {p})"
                    )));
                }
            }
            Family::DoublePower { p, q, c_p, c_q } => {
                if !(p > 2.0 && q > p && c_p.is_finite() && c_q.is_finite()) {
                    return Err(HylosError::InvalidArgument(format!(
                        "double_power needs 2 < p < q (got p = {p}, q = {q})"
                    )));
                }
            }
            Family::SaturatingIntro => {}
        }
        let model = Self {
            a,
            family,
            equation,
            require_positive: false,
        };
        // N(0) = 0 and N′(s)/s → 0 at the origin
        for s in [1e-4, 1e-6] {
            let ratio = (model.n_prime(s) / s).abs();
            if ratio > 1e-2 * (1.0 + a) {
                return Err(HylosError::InvalidArgument(format!(
                    "N′(s)/s = {ratio} does not vanish at s = {s}"
                )));
            }
        }
        Ok(model)
    }

    /// Mark the model as requiring W ≥ 0; fails if a scan finds W < 0.
    pub fn with_positivity(mut self, s_max: f64) -> Result<Self> {
        if let Some(s) = self.find_negative_w(s_max) {
            return Err(HylosError::InvalidArgument(format!(
                "positivity required but W({s}) = {} < 0",
                self.w(s)
            )));
        }
        self.require_positive = true;
        Ok(self)
    }

    pub fn power_focusing(a: f64, p: f64, c: f64, equation: Equation) -> Result<Self> {
        Self::new(a, Family::PowerFocusing { p, c }, equation)
    }

    pub fn double_power(a: f64, p: f64, q: f64, c_p: f64, c_q: f64, equation: Equation) -> Result<Self> {
        Self::new(a, Family::DoublePower { p, q, c_p, c_q }, equation)
    }

    pub fn saturating(a: f64, equation: Equation) -> Result<Self> {
        Self::new(a, Family::SaturatingIntro, equation)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn equation(&self) -> Equation {
        self.equation
    }

    pub fn requires_positive(&self) -> bool {
        self.require_positive
    }

    /// The nonlinear part N(s).
    pub fn n(&self, s: f64) -> f64 {
        match self.family {
            Family::PowerFocusing { p, c } => -(c / p) * s.powf(p),
            Family::DoublePower { p, q, c_p, c_q } => -(c_p / p) * s.powf(p) + (c_q / q) * s.powf(q),
            Family::SaturatingIntro => {
                // s − ln(1+s) − ½s², expanded near 0 to avoid cancellation
                if s < 1e-3 {
                    let s3 = s * s * s;
                    self.a * (-s3 / 3.0 + s3 * s / 4.0 - s3 * s * s / 5.0)
                } else {
                    self.a * (s - s.ln_1p() - 0.5 * s * s)
                }
            }
        }
    }

    pub fn n_prime(&self, s: f64) -> f64 {
        match self.family {
            Family::PowerFocusing { p, c } => -c * s.powf(p - 1.0),
            Family::DoublePower { p, q, c_p, c_q } => -c_p * s.powf(p - 1.0) + c_q * s.powf(q - 1.0),
            Family::SaturatingIntro => -self.a * s * s / (1.0 + s),
        }
    }

    pub fn w(&self, s: f64) -> f64 {
        0.5 * self.a * s * s + self.n(s)
    }

    /// F′(s) = a·s + N′(s).
    pub fn w_prime(&self, s: f64) -> f64 {
        s * self.w_prime_over_s(s)
    }

    /// F′(s)/s, with its limit a at s = 0.
    pub fn w_prime_over_s(&self, s: f64) -> f64 {
        match self.family {
            Family::PowerFocusing { p, c } => self.a - c * s.powf(p - 2.0),
            Family::DoublePower { p, q, c_p, c_q } => {
                self.a - c_p * s.powf(p - 2.0) + c_q * s.powf(q - 2.0)
            }
            Family::SaturatingIntro => self.a / (1.0 + s),
        }
    }

    /// W(s) for s ≥ 0.
    pub fn eval_w(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(HylosError::InvalidArgument(format!("W evaluated at s = {s} < 0")));
        }
        Ok(self.w(s))
    }

    /// Gauge-equivariant derivative W′(z) = F′(|z|)·z/|z|.
    pub fn eval_w_prime_complex(&self, z: Complex64) -> Complex64 {
        z * self.w_prime_over_s(z.norm())
    }

    /// E₀ = a/2 for NS, m = √a for NKG.
    pub fn rest_energy(&self) -> f64 {
        match self.equation {
            Equation::Ns => 0.5 * self.a,
            Equation::Nkg => self.a.sqrt(),
        }
    }

    fn scan(&self, s_max: f64) -> impl Iterator<Item = f64> {
        let steps = (s_max / DEFAULT_SCAN_STEP).round() as usize;
        (1..=steps).map(|j| j as f64 * DEFAULT_SCAN_STEP)
    }

    /// First s in (0, s_max] with N(s) < 0, if any.
    pub fn hylomorphy_witness(&self, s_max: f64) -> Option<f64> {
        self.scan(s_max).find(|&s| self.n(s) < 0.0)
    }

    /// First s in [0, s_max] with W(s) < 0, if any.
    pub fn find_negative_w(&self, s_max: f64) -> Option<f64> {
        self.scan(s_max).find(|&s| self.w(s) < 0.0)
    }

    /// inf of W(s)/s² over the scan, with the argmin.
    pub(crate) fn min_w_over_s2(&self, s_max: f64) -> (f64, f64) {
        self.scan(s_max)
            .map(|s| (self.w(s) / (s * s), s))
            .fold((f64::INFINITY, 0.0), |best, cur| if cur.0 < best.0 { cur } else { best })
    }
}

/// Semiclassical scaling of the NS equation
/// `i h ψ_t = −(h²/2)Δψ + (1/(2h^α))·W′(h^γ ψ) + Vψ`.
/// The identity scaling (h = 1, α = γ = 0) is the plain equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Semiclassical {
    pub h: f64,
    pub alpha: f64,
    pub gamma_exp: f64,
}

impl Default for Semiclassical {
    fn default() -> Self {
        Self {
            h: 1.0,
            alpha: 0.0,
            gamma_exp: 0.0,
        }
    }
}

impl Semiclassical {
    pub fn new(h: f64, alpha: f64, gamma_exp: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(HylosError::InvalidArgument(format!("h = {h} must be positive")));
        }
        if !(alpha > gamma_exp) {
            return Err(HylosError::InvalidArgument(format!(
                "semiclassical scaling needs alpha > gamma_exp (got {alpha} <= {gamma_exp})"
            )));
        }
        Ok(Self { h, alpha, gamma_exp })
    }

    /// Width exponent β = 1 + (α − γ)/2.
    pub fn beta(&self) -> f64 {
        1.0 + 0.5 * (self.alpha - self.gamma_exp)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::default()
    }
}

/// External potential V(x) ≥ 0.
#[derive(Clone, Debug, PartialEq)]
pub enum ExternalPotential {
    Zero,
    /// V = ½·κ·|x|²
    Harmonic { kappa: f64 },
    /// Node values on a grid, interpolated multilinearly between nodes.
    Sampled { grid: Grid, values: Vec<f64> },
}

impl ExternalPotential {
    pub fn harmonic(kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(HylosError::InvalidArgument(format!("harmonic κ = {kappa} must be ≥ 0")));
        }
        Ok(Self::Harmonic { kappa })
    }

    pub fn sampled(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(HylosError::InvalidArgument("sampled potential size mismatch".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(HylosError::InvalidArgument("sampled potential must be finite and ≥ 0".into()));
        }
        Ok(Self::Sampled { grid, values })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExternalPotential::Zero)
    }

    /// Values at every node of `grid`.
    pub fn node_values(&self, grid: &Grid) -> Vec<f64> {
        match self {
            ExternalPotential::Zero => vec![0.0; grid.len()],
            ExternalPotential::Harmonic { kappa } => (0..grid.len())
                .map(|k| {
                    let x = grid.point(k);
                    0.5 * kappa * x.iter().map(|v| v * v).sum::<f64>()
                })
                .collect(),
            ExternalPotential::Sampled { grid: own, values } => {
                if own == grid {
                    values.clone()
                } else {
                    (0..grid.len())
                        .map(|k| interp_sampled(own, values, &grid.point(k)))
                        .collect()
                }
            }
        }
    }

    /// V(x); `x` must lie inside `bbox`.
    pub fn eval(&self, bbox: &Grid, x: &[f64]) -> Result<f64> {
        if !bbox.contains(x) {
            return Err(HylosError::OutsideBox(x.to_vec()));
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            ExternalPotential::Zero => 0.0,
            ExternalPotential::Harmonic { kappa } => 0.5 * kappa * x.iter().map(|v| v * v).sum::<f64>(),
            ExternalPotential::Sampled { grid, values } => {
                let mut p = [0.0; MAX_DIM];
                p[..x.len().min(MAX_DIM)].copy_from_slice(&x[..x.len().min(MAX_DIM)]);
                interp_sampled(grid, values, &p)
            }
        }
    }

    /// ∇V(x): exact for analytic kinds, centered differences with the grid
    /// spacing for sampled potentials.
    pub fn grad(&self, bbox: &Grid, x: &[f64]) -> Result<Vec<f64>> {
        if !bbox.contains(x) {
            return Err(HylosError::OutsideBox(x.to_vec()));
        }
        Ok(match self {
            ExternalPotential::Zero => vec![0.0; x.len()],
            ExternalPotential::Harmonic { kappa } => x.iter().map(|v| kappa * v).collect(),
            ExternalPotential::Sampled { grid, .. } => (0..x.len())
                .map(|a| {
                    let h = grid.spacing(a);
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    xp[a] += h;
                    xm[a] -= h;
                    (self.eval_unchecked(&xp) - self.eval_unchecked(&xm)) / (2.0 * h)
                })
                .collect(),
        })
    }
}

fn interp_sampled(grid: &Grid, values: &[f64], x: &[f64; MAX_DIM]) -> f64 {
    let dim = grid.dim();
    let mut base = [0usize; MAX_DIM];
    let mut frac = [0.0; MAX_DIM];
    for a in 0..dim {
        let n = grid.counts()[a];
        let t = (x[a] + 0.5 * grid.lengths()[a]) / grid.spacing(a);
        let fl = t.floor();
        base[a] = (fl as i64).rem_euclid(n as i64) as usize;
        frac[a] = t - fl;
    }
    let mut acc = 0.0;
    for corner in 0..(1usize << dim) {
        let mut idx = [0usize; MAX_DIM];
        let mut weight = 1.0;
        for a in 0..dim {
            let bit = (corner >> a) & 1;
            idx[a] = (base[a] + bit) % grid.counts()[a];
            weight *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
        }
        acc += weight * values[grid.flat_index(idx)];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn quartic_ns() -> NonlinearModel {
        NonlinearModel::power_focusing(2.0, 4.0, 1.0, Equation::Ns).unwrap()
    }

    #[test]
    fn eval_w_examples() {
        // ½·2·1 − ¼·1
        assert!((quartic_ns().eval_w(1.0).unwrap() - 0.75).abs() < 1e-15);
        for m in [
            quartic_ns(),
            NonlinearModel::double_power(1.0, 4.0, 6.0, 1.0, 0.2, Equation::Nkg).unwrap(),
            NonlinearModel::saturating(1.0, Equation::Nkg).unwrap(),
        ] {
            assert_eq!(m.eval_w(0.0).unwrap(), 0.0);
        }
        let sat = NonlinearModel::saturating(1.0, Equation::Nkg).unwrap();
        assert!((sat.eval_w(2.0).unwrap() - (2.0 - 3f64.ln())).abs() < 1e-14);
        assert!(quartic_ns().eval_w(-0.1).is_err());
    }

    #[test]
    fn saturating_w_matches_quadrature_of_its_derivative() {
        // Simpson quadrature of s/(1+s) on [0, 2]
        let n = 2000;
        let h = 2.0 / n as f64;
        let f = |s: f64| s / (1.0 + s);
        let mut acc = f(0.0) + f(2.0);
        for j in 1..n {
            acc += if j % 2 == 1 { 4.0 } else { 2.0 } * f(j as f64 * h);
        }
        let quad = acc * h / 3.0;
        let sat = NonlinearModel::saturating(1.0, Equation::Nkg).unwrap();
        assert!((sat.w(2.0) - quad).abs() < 1e-12);
        assert!((quad - 0.901_387_711_331_89).abs() < 1e-10);
    }

    #[test]
    fn w_prime_complex_examples() {
        let m = quartic_ns();
        assert_eq!(m.eval_w_prime_complex(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
        let i = Complex64::new(0.0, 1.0);
        assert!((m.eval_w_prime_complex(i) - i).norm() < 1e-15);
        let rot = Complex64::from_polar(1.0, PI / 3.0);
        let lhs = m.eval_w_prime_complex(rot * 2.0);
        let rhs = rot * m.eval_w_prime_complex(Complex64::new(2.0, 0.0));
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn rest_energy_examples() {
        assert_eq!(NonlinearModel::power_focusing(2.0, 4.0, 1.0, Equation::Ns).unwrap().rest_energy(), 1.0);
        assert_eq!(NonlinearModel::power_focusing(1.0, 4.0, 1.0, Equation::Nkg).unwrap().rest_energy(), 1.0);
        assert_eq!(NonlinearModel::power_focusing(4.0, 4.0, 1.0, Equation::Nkg).unwrap().rest_energy(), 2.0);
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(NonlinearModel::power_focusing(-1.0, 4.0, 1.0, Equation::Ns).is_err());
        assert!(NonlinearModel::power_focusing(1.0, 2.0, 1.0, Equation::Ns).is_err());
        assert!(NonlinearModel::double_power(1.0, 4.0, 3.0, 1.0, 1.0, Equation::Nkg).is_err());
    }

    #[test]
    fn hylomorphy_scan_and_positivity() {
        assert!(quartic_ns().hylomorphy_witness(DEFAULT_S_MAX).is_some());
        assert!(NonlinearModel::saturating(1.0, Equation::Nkg)
            .unwrap()
            .hylomorphy_witness(DEFAULT_S_MAX)
            .is_some());
        let defocusing = NonlinearModel::power_focusing(2.0, 4.0, -1.0, Equation::Ns).unwrap();
        assert!(defocusing.hylomorphy_witness(DEFAULT_S_MAX).is_none());

        // c_q = 0.2 keeps 1 − s²/2 + s⁴/15 > 0
        let dp = NonlinearModel::double_power(1.0, 4.0, 6.0, 1.0, 0.2, Equation::Nkg)
            .unwrap()
            .with_positivity(DEFAULT_S_MAX)
            .unwrap();
        assert!(dp.requires_positive());
        assert!((0..=10_000).all(|j| dp.w(j as f64 * 1e-3) >= 0.0));
        assert!(NonlinearModel::power_focusing(1.0, 4.0, 1.0, Equation::Nkg)
            .unwrap()
            .with_positivity(DEFAULT_S_MAX)
            .is_err());
    }

    #[test]
    fn potential_examples() {
        let g3 = Grid::new(3, &[10.0; 3], &[8; 3]).unwrap();
        let v = ExternalPotential::harmonic(1.0).unwrap();
        assert_eq!(v.eval(&g3, &[2.0, 0.0, 0.0]).unwrap(), 2.0);
        assert_eq!(v.grad(&g3, &[2.0, 0.0, 0.0]).unwrap(), vec![2.0, 0.0, 0.0]);
        let z = ExternalPotential::Zero;
        assert_eq!(z.eval(&g3, &[1.0, -2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(z.grad(&g3, &[1.0, -2.0, 3.0]).unwrap(), vec![0.0; 3]);
        let g2 = Grid::new(2, &[10.0; 2], &[8; 2]).unwrap();
        let v2 = ExternalPotential::harmonic(0.25).unwrap();
        assert_eq!(v2.eval(&g2, &[0.0, 2.0]).unwrap(), 0.5);
        assert!(matches!(v.eval(&g3, &[6.0, 0.0, 0.0]), Err(HylosError::OutsideBox(_))));
    }

    #[test]
    fn sampled_potential_interpolates_and_differentiates() {
        let g = Grid::new(1, &[20.0], &[256]).unwrap();
        let vals = ExternalPotential::harmonic(1.0).unwrap().node_values(&g);
        let s = ExternalPotential::sampled(g, vals).unwrap();
        let x = 1.3;
        assert!((s.eval(&g, &[x]).unwrap() - 0.5 * x * x).abs() < 1e-3);
        assert!((s.grad(&g, &[x]).unwrap()[0] - x).abs() < 1e-2);
    }
}
