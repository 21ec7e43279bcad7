//! Radial ground states of −Δu + G′(u) = 0 by shooting and bisection.
//!
//! The radial ODE `u″ + ((N−1)/r)·u′ = G′(u)`, `u′(0) = 0`, is integrated
//! with a fixed-step fourth-order Runge–Kutta scheme. A shot from `u(0)` is
//! an *undershoot* when `u′` turns positive while `u > 0` and an
//! *overshoot* when `u` crosses zero; the ground state sits on the boundary
//! between the two and is located by bisection.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{HylosError, Result};
use crate::grid::{ComplexField, Grid, MAX_DIM};
use crate::models::{Equation, NonlinearModel, DEFAULT_S_MAX};
use crate::observables::derrick_pohozaev_residual;

pub const DEFAULT_H_R: f64 = 1e-3;
pub const DEFAULT_R_MAX: f64 = 30.0;
/// Largest shooting amplitude tried while bracketing.
pub const DEFAULT_U0_MAX: f64 = 100.0;
/// Tail must fall below this fraction of u(0).
pub const TAIL_RATIO: f64 = 1e-8;
/// Largest u/u(0) allowed where a sampled profile meets the box face.
pub const EMBED_TAIL_RATIO: f64 = 1e-5;
/// Acceptance gate on the normalized Derrick–Pohozaev residual.
pub const POHOZAEV_GATE: f64 = 1e-3;

const MATCH_RATIO: f64 = 1e-3;
const MAX_BISECTIONS: usize = 200;

/// G(s) for the static equation at frequency ω: `W − ω s²` (NS) or
/// `W − ½ ω² s²` (NKG).
#[derive(Clone, Copy, Debug)]
pub struct EffectiveG {
    model: NonlinearModel,
    omega: f64,
}

impl EffectiveG {
    pub fn new(model: NonlinearModel, omega: f64) -> Self {
        Self { model, omega }
    }

    pub fn model(&self) -> &NonlinearModel {
        &self.model
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    fn frequency_term(&self) -> f64 {
        match self.model.equation() {
            Equation::Ns => 2.0 * self.omega,
            Equation::Nkg => self.omega * self.omega,
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        self.model.w(s) - 0.5 * self.frequency_term() * s * s
    }

    pub fn deriv(&self, s: f64) -> f64 {
        self.model.w_prime(s) - self.frequency_term() * s
    }

    /// G″(0): the squared decay rate of the linear tail.
    pub fn mass_sq(&self) -> f64 {
        self.model.a() - self.frequency_term()
    }
}

pub fn effective_g(model: &NonlinearModel, omega: f64) -> EffectiveG {
    EffectiveG::new(*model, omega)
}

/// Open interval of frequencies for which standing waves exist.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyInterval {
    /// `f64::NEG_INFINITY` when unbounded below.
    pub lower: f64,
    pub upper: f64,
}

impl FrequencyInterval {
    pub fn contains(&self, omega: f64) -> bool {
        omega > self.lower && omega < self.upper
    }

    pub fn open_below(&self) -> bool {
        self.lower == f64::NEG_INFINITY
    }
}

/// `(E₁, E₀)` for NS, `(m₀, m)` for NKG, from a scan of W(s)/s² on (0, s_max].
pub fn admissible_frequencies(model: &NonlinearModel) -> Result<FrequencyInterval> {
    if model.hylomorphy_witness(DEFAULT_S_MAX).is_none() {
        return Err(HylosError::NoHylomorphy(format!(
            "N(s) >= 0 on (0, {DEFAULT_S_MAX}] for {}",
            model.family().name()
        )));
    }
    let (min_ratio, argmin) = model.min_w_over_s2(DEFAULT_S_MAX);
    let unbounded = (argmin - DEFAULT_S_MAX).abs() < 1e-9;
    let upper = model.rest_energy();
    let lower = match model.equation() {
        Equation::Ns if unbounded => f64::NEG_INFINITY,
        Equation::Ns => min_ratio,
        // ω ≥ 0 by gauge convention; m₀ = sqrt(inf 2W/s²) clamped at 0
        Equation::Nkg => (2.0 * min_ratio).max(0.0).sqrt(),
    };
    if !(lower < upper) {
        return Err(HylosError::NoHylomorphy("empty frequency interval".into()));
    }
    Ok(FrequencyInterval { lower, upper })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShotOutcome {
    /// u crossed zero with u′ < 0 at radius `r`.
    Overshoot { r: f64 },
    /// u′ turned positive with u > 0 at radius `r`.
    Undershoot { r: f64 },
    /// Reached r_max without either event.
    Converged,
}

#[derive(Clone, Debug)]
pub struct Shot {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub outcome: ShotOutcome,
}

#[inline]
fn radial_rhs(g_prime: &impl Fn(f64) -> f64, dim: usize, r: f64, u: f64, du: f64) -> f64 {
    if r == 0.0 {
        g_prime(u) / dim as f64
    } else {
        g_prime(u) - (dim as f64 - 1.0) / r * du
    }
}

/// Integrate `u″ + ((N−1)/r)u′ = G′(u)` from `u(0) = u0`, `u′(0) = 0` and
/// classify the trajectory.
///
/// Alongside (u, u′) the integrator carries `∫G′(u)u′ dr` and the friction
/// loss `∫((N−1)/r)u′² dr`; the radial energy balance
/// `½u′² − ∫G′u′ + ∫((N−1)/r)u′² = 0` is monitored and a drift above
/// `1e-4·(1 + u0²)` is reported as [`HylosError::StepTooLarge`].
pub fn shoot(g_prime: impl Fn(f64) -> f64, dim: usize, u0: f64, h_r: f64, r_max: f64) -> Result<Shot> {
    if !(u0 > 0.0 && h_r > 0.0 && r_max > h_r) || !(1..=3).contains(&dim) {
        return Err(HylosError::InvalidArgument(format!(
            "shoot needs u0 > 0, 0 < h_r < r_max, dim in 1..=3 (u0 = {u0}, h_r = {h_r}, r_max = {r_max}, dim = {dim})"
        )));
    }
    let n_steps = (r_max / h_r).ceil() as usize;
    let mut r_out = Vec::with_capacity(n_steps + 1);
    let mut u_out = Vec::with_capacity(n_steps + 1);
    let mut du_out = Vec::with_capacity(n_steps + 1);
    // state: u, u′, ∫G′u′, ∫((N−1)/r)u′²
    let mut y = [u0, 0.0, 0.0, 0.0];
    let nm1 = dim as f64 - 1.0;
    let deriv = |r: f64, y: &[f64; 4]| -> [f64; 4] {
        let acc = radial_rhs(&g_prime, dim, r, y[0], y[1]);
        let friction = if r == 0.0 { 0.0 } else { nm1 / r * y[1] * y[1] };
        [y[1], acc, g_prime(y[0]) * y[1], friction]
    };
    let tol = 1e-4 * (1.0 + u0 * u0);
    r_out.push(0.0);
    u_out.push(u0);
    du_out.push(0.0);
    let mut outcome = ShotOutcome::Converged;
    for step in 0..n_steps {
        let r = step as f64 * h_r;
        let k1 = deriv(r, &y);
        let y2 = add_scaled(&y, &k1, 0.5 * h_r);
        let k2 = deriv(r + 0.5 * h_r, &y2);
        let y3 = add_scaled(&y, &k2, 0.5 * h_r);
        let k3 = deriv(r + 0.5 * h_r, &y3);
        let y4 = add_scaled(&y, &k3, h_r);
        let k4 = deriv(r + h_r, &y4);
        for i in 0..4 {
            y[i] += h_r / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let r_next = (step + 1) as f64 * h_r;
        if !y.iter().all(|v| v.is_finite()) {
            return Err(HylosError::StepTooLarge { r: r_next });
        }
        let balance = 0.5 * y[1] * y[1] - y[2] + y[3];
        if balance.abs() > tol {
            return Err(HylosError::StepTooLarge { r: r_next });
        }
        r_out.push(r_next);
        u_out.push(y[0]);
        du_out.push(y[1]);
        if y[0] < 0.0 {
            outcome = ShotOutcome::Overshoot { r: r_next };
            break;
        }
        if y[1] > 0.0 {
            outcome = ShotOutcome::Undershoot { r: r_next };
            break;
        }
    }
    Ok(Shot {
        r: r_out,
        u: u_out,
        du: du_out,
        outcome,
    })
}

fn add_scaled(y: &[f64; 4], k: &[f64; 4], h: f64) -> [f64; 4] {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]]
}

/// Solver controls for [`find_ground_state`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootingTolerances {
    pub h_r: f64,
    pub r_max: f64,
    pub u0_max: f64,
    /// Bisection stops when the bracket is narrower than this times u0.
    pub bracket_rel: f64,
}

impl Default for ShootingTolerances {
    fn default() -> Self {
        Self {
            h_r: DEFAULT_H_R,
            r_max: DEFAULT_R_MAX,
            u0_max: DEFAULT_U0_MAX,
            bracket_rel: 1e-12,
        }
    }
}

/// Sampled radial profile u(r) on a uniform radial grid.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub dim: usize,
    pub h_r: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub omega: f64,
    pub equation: Equation,
    /// σ = ∫u² dx over ℝᴺ.
    pub sigma: f64,
}

/// Surface measure of the unit sphere in ℝᴺ (2 points in 1D).
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unreachable!("dimension checked at construction"),
    }
}

/// Composite Simpson rule on a uniform grid; the last interval of an even
/// node count is closed with the trapezoid rule.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = if n % 2 == 1 { n } else { n - 1 };
    let mut acc = 0.0;
    if m >= 3 {
        acc = values[0] + values[m - 1];
        for (j, v) in values.iter().enumerate().take(m - 1).skip(1) {
            acc += if j % 2 == 1 { 4.0 } else { 2.0 } * v;
        }
        acc *= h / 3.0;
    }
    if m != n {
        acc += 0.5 * h * (values[n - 2] + values[n - 1]);
    }
    acc
}

impl RadialProfile {
    pub fn u0(&self) -> f64 {
        self.u[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap_or(&0.0)
    }

    /// ∫ f(r) dx over ℝᴺ for a radial integrand given on the profile nodes.
    pub fn radial_integral(&self, f: impl Fn(usize) -> f64) -> f64 {
        let values: Vec<f64> = (0..self.r.len())
            .map(|j| f(j) * self.r[j].powi(self.dim as i32 - 1))
            .collect();
        sphere_area(self.dim) * simpson(&values, self.h_r)
    }

    pub fn charge(&self) -> f64 {
        self.radial_integral(|j| self.u[j] * self.u[j])
    }

    /// ∫|∇u|² dx.
    pub fn dirichlet(&self) -> f64 {
        self.radial_integral(|j| self.du[j] * self.du[j])
    }

    /// Cubic Hermite interpolation of u and u′ at radius `r`; zero beyond the table.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let r = r.abs();
        let last = self.r.len() - 1;
        if r >= self.r[last] {
            return (0.0, 0.0);
        }
        let j = ((r / self.h_r) as usize).min(last - 1);
        let h = self.h_r;
        let t = (r - self.r[j]) / h;
        let (y0, y1) = (self.u[j], self.u[j + 1]);
        let (m0, m1) = (self.du[j] * h, self.du[j + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let slope = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        (value, slope)
    }

    /// Largest r with u(r) ≥ `fraction`·u(0).
    pub fn radius_at_fraction(&self, fraction: f64) -> f64 {
        let target = fraction * self.u0();
        let j = self.u.iter().position(|&v| v < target).unwrap_or(self.u.len() - 1);
        if j == 0 {
            return 0.0;
        }
        let (ua, ub) = (self.u[j - 1], self.u[j]);
        self.r[j - 1] + self.h_r * (ua - target) / (ua - ub)
    }
}

/// Ground state at frequency `omega`: bisection on u(0) between an
/// undershoot and an overshoot, followed by tail matching and validation.
pub fn find_ground_state(
    model: &NonlinearModel,
    omega: f64,
    dim: usize,
    tol: &ShootingTolerances,
) -> Result<RadialProfile> {
    let g = EffectiveG::new(*model, omega);
    let kappa_sq = g.mass_sq();
    if !(kappa_sq > 0.0) {
        return Err(HylosError::BracketNotFound { u0_max: tol.u0_max });
    }
    let kappa = kappa_sq.sqrt();
    // room for the tail to drop below TAIL_RATIO
    let r_max = tol.r_max.max((TAIL_RATIO.recip().ln() + 6.0) / kappa);
    let gp = |s: f64| g.deriv(s);

    // bracket scan: the first overshoot above an undershoot
    let mut lo = None;
    let mut hi = None;
    for u0 in scan_candidates(&gp, tol.u0_max) {
        let shot = shoot(gp, dim, u0, tol.h_r, r_max)?;
        match shot.outcome {
            ShotOutcome::Undershoot { .. } => lo = Some(u0),
            ShotOutcome::Overshoot { .. } => {
                hi = Some(u0);
                break;
            }
            ShotOutcome::Converged => {
                lo = Some(u0);
                hi = Some(u0);
                break;
            }
        }
    }
    let (mut lo, mut hi) = match (lo, hi) {
        (Some(l), Some(h)) => (l, h),
        _ => return Err(HylosError::BracketNotFound { u0_max: tol.u0_max }),
    };

    let mut best = shoot(gp, dim, lo, tol.h_r, r_max)?;
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol.bracket_rel * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let shot = shoot(gp, dim, mid, tol.h_r, r_max)?;
        match shot.outcome {
            ShotOutcome::Overshoot { .. } => hi = mid,
            ShotOutcome::Undershoot { .. } => {
                lo = mid;
                best = shot;
            }
            ShotOutcome::Converged => {
                best = shot;
                break;
            }
        }
    }

    let profile = match_tail(best, dim, kappa, r_max, tol.h_r, omega, model.equation())?;
    validate_profile(&profile, &g)?;
    Ok(profile)
}

/// Trial values of u(0) in increasing order. Above the point where G′ turns
/// positive again after its negative stretch every shot undershoots at once,
/// so the scan stops there, closing in geometrically on that zero to catch the
/// narrow overshoot window of thin-walled states.
fn scan_candidates(gp: &impl Fn(f64) -> f64, u0_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut seen_negative = false;
    let mut u0 = 1e-2;
    while u0 <= u0_max {
        let slope = gp(u0);
        if slope < 0.0 {
            seen_negative = true;
        } else if seen_negative {
            // bisect the sign change of G′ between the last two candidates
            let (mut a, mut b) = (*out.last().unwrap_or(&u0), u0);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if gp(m) < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            let start = *out.last().unwrap_or(&a);
            for j in 1..=60 {
                let c = a - (a - start) * 0.5f64.powi(j);
                if c > start && c < a {
                    out.push(c);
                }
            }
            return out;
        }
        out.push(u0);
        u0 *= 1.02;
    }
    out
}

/// Keep the trajectory while it is reliable and continue it with the linear
/// decay `u_m (r_m/r)^{(N−1)/2} e^{−κ(r−r_m)}`.
fn match_tail(
    shot: Shot,
    dim: usize,
    kappa: f64,
    r_max: f64,
    h_r: f64,
    omega: f64,
    equation: Equation,
) -> Result<RadialProfile> {
    let u0 = shot.u[0];
    let target = MATCH_RATIO * u0;
    let m = shot
        .u
        .iter()
        .position(|&v| v <= target)
        .ok_or_else(|| HylosError::Degenerate("shooting trajectory never decayed".into()))?;
    let n_nodes = (r_max / h_r).ceil() as usize + 1;
    let mut r = Vec::with_capacity(n_nodes);
    let mut u = Vec::with_capacity(n_nodes);
    let mut du = Vec::with_capacity(n_nodes);
    let (r_m, u_m) = (shot.r[m], shot.u[m]);
    let half = 0.5 * (dim as f64 - 1.0);
    for j in 0..n_nodes {
        let rj = j as f64 * h_r;
        r.push(rj);
        if j <= m {
            u.push(shot.u[j]);
            du.push(shot.du[j]);
        } else {
            let v = u_m * (r_m / rj).powf(half) * (-kappa * (rj - r_m)).exp();
            u.push(v);
            du.push(-v * (kappa + half / rj));
        }
    }
    let mut profile = RadialProfile {
        dim,
        h_r,
        r,
        u,
        du,
        omega,
        equation,
        sigma: 0.0,
    };
    profile.sigma = profile.charge();
    Ok(profile)
}

fn validate_profile(profile: &RadialProfile, g: &EffectiveG) -> Result<()> {
    let u0 = profile.u0();
    let tail = *profile.u.last().unwrap();
    if tail >= TAIL_RATIO * u0 {
        return Err(HylosError::Degenerate(format!(
            "profile tail u(r_max)/u(0) = {:e} not below {TAIL_RATIO:e}",
            tail / u0
        )));
    }
    for w in profile.u.windows(2) {
        if !(w[1] < w[0] || (w[1] == 0.0 && w[0] == 0.0)) {
            return Err(HylosError::Degenerate("profile is not strictly decreasing".into()));
        }
    }
    let residual = derrick_pohozaev_residual(profile, |s| g.value(s));
    if residual.abs() >= POHOZAEV_GATE {
        return Err(HylosError::Degenerate(format!(
            "Derrick-Pohozaev residual {residual:e} exceeds gate {POHOZAEV_GATE:e}"
        )));
    }
    Ok(())
}

/// Sample `u(|ξ|)` with `ξ_a = stretch_a·(x_a − center_a)` on the grid
/// (minimum periodic image). Returns the values and ∂u/∂ξ_a per axis.
pub fn sample_profile(
    profile: &RadialProfile,
    grid: &Grid,
    center: &[f64],
    stretch: &[f64],
) -> Result<(Vec<f64>, Vec<[f64; MAX_DIM]>)> {
    if profile.dim != grid.dim() {
        return Err(HylosError::InvalidArgument(format!(
            "profile dimension {} does not match grid dimension {}",
            profile.dim,
            grid.dim()
        )));
    }
    // the profile seen at the nearest box face must be negligible
    let reach = (0..grid.dim())
        .map(|a| 0.5 * grid.lengths()[a] * stretch.get(a).copied().unwrap_or(1.0))
        .fold(f64::INFINITY, f64::min);
    let (edge, _) = profile.eval(reach);
    if edge > EMBED_TAIL_RATIO * profile.u0() {
        return Err(HylosError::TailTooFat {
            r: reach,
            ratio: edge / profile.u0(),
        });
    }
    let mut values = Vec::with_capacity(grid.len());
    let mut grads = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let d = grid.min_image(&grid.point(k), center);
        let mut xi = [0.0; MAX_DIM];
        for a in 0..grid.dim() {
            xi[a] = d[a] * stretch.get(a).copied().unwrap_or(1.0);
        }
        let rho = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (u, du) = profile.eval(rho);
        let mut grad = [0.0; MAX_DIM];
        if rho > 0.0 {
            for a in 0..grid.dim() {
                grad[a] = du * xi[a] / rho;
            }
        }
        values.push(u);
        grads.push(grad);
    }
    Ok((values, grads))
}

/// Embed u(|x − center|) as a real field.
pub fn profile_to_field(profile: &RadialProfile, grid: &Grid, center: &[f64]) -> Result<ComplexField> {
    let (values, _) = sample_profile(profile, grid, center, &[1.0; MAX_DIM])?;
    ComplexField::new(*grid, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
}
