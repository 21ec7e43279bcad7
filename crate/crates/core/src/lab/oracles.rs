//! Point-particle oracles. They use nothing from the field code, so comparing
//! against them is an independent cross-check.

/// Position, velocity and rest mass of a point particle at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleState {
    pub t: f64,
    pub q: Vec<f64>,
    pub v: Vec<f64>,
    pub m0: f64,
}

impl ParticleState {
    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.q.iter().chain(&self.v).all(|x| x.is_finite()) && self.m0.is_finite()
    }
}

fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| a * xi + yi).collect()
}

/// Newtonian motion q̈ = −∇V(q) with unit mass, integrated by classic RK4.
/// Returns every state from t = 0 to `t_end` inclusive.
pub fn newton_oracle(
    q0: &[f64],
    v0: &[f64],
    grad_v: impl Fn(&[f64]) -> Vec<f64>,
    t_end: f64,
    dt: f64,
) -> Vec<ParticleState> {
    assert_eq!(q0.len(), v0.len(), "position and velocity dimensions differ");
    assert!(dt > 0.0 && t_end >= 0.0, "need dt > 0 and t_end >= 0");
    let steps = (t_end / dt).round() as usize;
    let mut q = q0.to_vec();
    let mut v = v0.to_vec();
    let accel = |q: &[f64]| -> Vec<f64> { grad_v(q).into_iter().map(|g| -g).collect() };
    let mut out = Vec::with_capacity(steps + 1);
    out.push(ParticleState { t: 0.0, q: q.clone(), v: v.clone(), m0: 1.0 });
    for n in 1..=steps {
        let k1q = v.clone();
        let k1v = accel(&q);
        let q2 = axpy(0.5 * dt, &k1q, &q);
        let k2q = axpy(0.5 * dt, &k1v, &v);
        let k2v = accel(&q2);
        let q3 = axpy(0.5 * dt, &k2q, &q);
        let k3q = axpy(0.5 * dt, &k2v, &v);
        let k3v = accel(&q3);
        let q4 = axpy(dt, &k3q, &q);
        let k4q = axpy(dt, &k3v, &v);
        let k4v = accel(&q4);
        for i in 0..q.len() {
            q[i] += dt / 6.0 * (k1q[i] + 2.0 * k2q[i] + 2.0 * k3q[i] + k4q[i]);
            v[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        out.push(ParticleState { t: n as f64 * dt, q: q.clone(), v: v.clone(), m0: 1.0 });
    }
    out
}

/// Linear interpolation of the oracle position at time `t`.
pub fn position_at(traj: &[ParticleState], t: f64) -> Vec<f64> {
    let last = traj.len() - 1;
    if t <= traj[0].t {
        return traj[0].q.clone();
    }
    if t >= traj[last].t {
        return traj[last].q.clone();
    }
    let j = traj.partition_point(|s| s.t <= t) - 1;
    let (a, b) = (&traj[j], &traj[j + 1]);
    let w = (t - a.t) / (b.t - a.t);
    a.q.iter().zip(&b.q).map(|(x, y)| x + w * (y - x)).collect()
}

/// Relativistic energy √(m₀² + |p|²).
pub fn relativistic_energy(p: &[f64], m0: f64) -> f64 {
    (m0 * m0 + p.iter().map(|x| x * x).sum::<f64>()).sqrt()
}

/// Free relativistic particle: p is constant and q̇ = p/√(m₀² + |p|²).
pub fn relativistic_oracle(q0: &[f64], p0: &[f64], m0: f64, t_end: f64, dt: f64) -> Vec<ParticleState> {
    assert_eq!(q0.len(), p0.len(), "position and momentum dimensions differ");
    let e = relativistic_energy(p0, m0);
    let v: Vec<f64> = p0.iter().map(|p| p / e).collect();
    let steps = (t_end / dt).round() as usize;
    (0..=steps)
        .map(|n| {
            let t = n as f64 * dt;
            ParticleState {
                t,
                q: axpy(t, &v, q0),
                v: v.clone(),
                m0,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn harmonic_period() {
        let traj = newton_oracle(&[1.0, 0.0], &[0.0, 0.0], |q| q.to_vec(), 2.0 * PI, 1e-3);
        let end = traj.last().unwrap();
        assert!((end.t - 2.0 * PI).abs() < 1e-3);
        // the last step lands within dt of 2π; compare with the exact solution there
        assert!((end.q[0] - end.t.cos()).abs() < 1e-6);
        assert!(end.q[1].abs() < 1e-15);
    }

    #[test]
    fn free_motion_is_straight() {
        let traj = newton_oracle(&[1.0], &[0.5], |_| vec![0.0], 4.0, 0.01);
        for s in &traj {
            assert!((s.q[0] - (1.0 + 0.5 * s.t)).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_is_conserved_over_ten_periods() {
        let energy = |s: &ParticleState| 0.5 * s.v[0].powi(2) + 0.5 * s.q[0].powi(2);
        let traj = newton_oracle(&[1.0], &[0.0], |q| q.to_vec(), 20.0 * PI, 1e-3);
        let e0 = energy(&traj[0]);
        let drift = traj.iter().map(|s| (energy(s) - e0).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-8, "{drift}");
    }

    #[test]
    fn relativistic_examples() {
        let rest = relativistic_oracle(&[0.0], &[0.0], 1.0, 1.0, 0.1);
        assert!(rest.iter().all(|s| s.q[0] == 0.0));
        let moving = relativistic_oracle(&[0.0], &[0.75], 1.0, 1.0, 0.1);
        assert!((moving[0].v[0] - 0.6).abs() < 1e-15);
        assert!((relativistic_energy(&[0.75], 1.0) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn interpolated_position() {
        let traj = newton_oracle(&[0.0], &[1.0], |_| vec![0.0], 1.0, 0.1);
        assert!((position_at(&traj, 0.55)[0] - 0.55).abs() < 1e-12);
    }
}
