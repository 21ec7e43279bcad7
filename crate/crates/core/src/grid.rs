//! Periodic rectangular grids, complex fields and spectral calculus.
//!
//! Nodes are stored with axis 1 fastest: the flat index of node
//! `(i1, i2, i3)` is `i1 + n1 * (i2 + n2 * i3)`. Coordinates along each
//! axis run over `[-L/2, L/2)`.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlannerScalar};

use crate::error::{HylosError, Result};

pub const MAX_DIM: usize = 3;
const MIN_COUNT: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    lengths: [f64; MAX_DIM],
    counts: [usize; MAX_DIM],
}

impl Grid {
    pub fn new(dim: usize, lengths: &[f64], counts: &[usize]) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(HylosError::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if lengths.len() != dim || counts.len() != dim {
            return Err(HylosError::InvalidGrid(format!(
                "expected {dim} lengths and counts, got {} and {}",
                lengths.len(),
                counts.len()
            )));
        }
        let mut l = [1.0; MAX_DIM];
        let mut n = [1usize; MAX_DIM];
        for axis in 0..dim {
            let length = lengths[axis];
            let count = counts[axis];
            if !(length.is_finite() && length > 0.0) {
                return Err(HylosError::InvalidGrid(format!(
                    "axis {} length {length} is not positive",
                    axis + 1
                )));
            }
            if count < MIN_COUNT || !count.is_power_of_two() {
                return Err(HylosError::InvalidGrid(format!(
                    "axis {} count {count} is not a power of two >= {MIN_COUNT}",
                    axis + 1
                )));
            }
            l[axis] = length;
            n[axis] = count;
        }
        Ok(Self {
            dim,
            lengths: l,
            counts: n,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths[..self.dim]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts[..self.dim]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.counts[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim)
            .map(|a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.counts[..self.dim].iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths().iter().product()
    }

    /// Coordinate of index `i` along `axis`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        -0.5 * self.lengths[axis] + i as f64 * self.spacing(axis)
    }

    /// Stride of `axis` in the flat node ordering.
    pub fn stride(&self, axis: usize) -> usize {
        self.counts[..axis].iter().product()
    }

    pub fn flat_index(&self, idx: [usize; MAX_DIM]) -> usize {
        idx[0] + self.counts[0] * (idx[1] + self.counts[1] * idx[2])
    }

    pub fn multi_index(&self, flat: usize) -> [usize; MAX_DIM] {
        let i1 = flat % self.counts[0];
        let rest = flat / self.counts[0];
        let i2 = rest % self.counts[1];
        let i3 = rest / self.counts[1];
        [i1, i2, i3]
    }

    /// Node coordinates; unused axes are 0.
    pub fn point(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(flat);
        let mut x = [0.0; MAX_DIM];
        for (axis, xa) in x.iter_mut().enumerate().take(self.dim) {
            *xa = self.coord(axis, idx[axis]);
        }
        x
    }

    /// Coordinates along one axis for every node, in storage order.
    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        (0..self.len()).map(|k| self.point(k)[axis]).collect()
    }

    /// Angular wavenumbers of `axis` in transform order.
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        let n = self.counts[axis];
        let base = 2.0 * PI / self.lengths[axis];
        (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                base * m
            })
            .collect()
    }

    /// Largest |k| represented on the grid.
    pub fn max_wavenumber(&self) -> f64 {
        (0..self.dim)
            .map(|a| PI / self.spacing(a))
            .map(|k| k * k)
            .sum::<f64>()
            .sqrt()
    }

    /// Periodic trapezoid rule: node sum times the cell volume.
    pub fn integrate(&self, density: &[f64]) -> Result<f64> {
        if density.len() != self.len() {
            return Err(HylosError::InvalidArgument(format!(
                "density has {} samples, grid has {}",
                density.len(),
                self.len()
            )));
        }
        let mut sum = 0.0;
        for &d in density {
            if !d.is_finite() {
                return Err(HylosError::NonFinite("integrand"));
            }
            sum += d;
        }
        Ok(sum * self.cell_volume())
    }

    /// Whether `x` lies in the half-open box `[-L/2, L/2)` on every axis.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() >= self.dim
            && (0..self.dim).all(|a| {
                let h = 0.5 * self.lengths[a];
                x[a] >= -h && x[a] < h
            })
    }

    /// Flat indices of the nodes on the box faces (first or last index on some axis).
    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&k| {
                let idx = self.multi_index(k);
                (0..self.dim).any(|a| idx[a] == 0 || idx[a] == self.counts[a] - 1)
            })
            .collect()
    }

    /// Displacement `x - center` folded onto the minimum periodic image.
    pub fn min_image(&self, x: &[f64; MAX_DIM], center: &[f64]) -> [f64; MAX_DIM] {
        let mut d = [0.0; MAX_DIM];
        for a in 0..self.dim {
            let l = self.lengths[a];
            let c = center.get(a).copied().unwrap_or(0.0);
            let mut da = x[a] - c;
            da -= l * (da / l).round();
            d[a] = da;
        }
        d
    }
}

/// Complex scalar field sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(HylosError::InvalidArgument(format!(
                "field has {} samples, grid has {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(HylosError::NonFinite("field samples"));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::from_raw(grid, vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let x = grid.point(k);
                f(&x[..grid.dim()])
            })
            .collect();
        Self::from_raw(grid, values)
    }

    pub fn from_real(grid: Grid, re: &[f64]) -> Result<Self> {
        Self::new(grid, re.iter().map(|&r| Complex64::new(r, 0.0)).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn abs_sqr(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|z| z * c).collect())
    }

    /// Pointwise `self + other`; both fields must share a grid.
    pub fn add(&self, other: &ComplexField) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self::from_raw(
            self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn check_same_grid(&self, other: &ComplexField) -> Result<()> {
        if self.grid != other.grid {
            return Err(HylosError::InvalidArgument("fields live on different grids".into()));
        }
        Ok(())
    }

    /// Max over nodes of |self - other|.
    pub fn sup_distance(&self, other: &ComplexField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max|ψ| on the box faces divided by max|ψ|.
    pub fn boundary_leakage(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        self.grid
            .boundary_nodes()
            .into_iter()
            .map(|k| self.values[k].norm())
            .fold(0.0, f64::max)
            / peak
    }
}

/// Cached transforms for one grid.
#[derive(Clone)]
pub struct Spectral {
    grid: Grid,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    wavenumbers: Vec<Vec<f64>>,
    k_sqr: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        // the SIMD plans carry a small systematic norm bias per round trip
        let mut planner = FftPlannerScalar::<f64>::new();
        let mut forward = Vec::with_capacity(grid.dim());
        let mut inverse = Vec::with_capacity(grid.dim());
        let mut wavenumbers = Vec::with_capacity(grid.dim());
        for axis in 0..grid.dim() {
            forward.push(planner.plan_fft_forward(grid.counts[axis]));
            inverse.push(planner.plan_fft_inverse(grid.counts[axis]));
            wavenumbers.push(grid.wavenumbers(axis));
        }
        let k_sqr = (0..grid.len())
            .map(|flat| {
                let idx = grid.multi_index(flat);
                (0..grid.dim())
                    .map(|a| wavenumbers[a][idx[a]].powi(2))
                    .sum()
            })
            .collect();
        Self {
            grid: *grid,
            forward,
            inverse,
            wavenumbers,
            k_sqr,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// |k|² for every transform-space node.
    pub fn k_sqr(&self) -> &[f64] {
        &self.k_sqr
    }

    /// Wavenumber of `axis` at each transform-space node, with the Nyquist
    /// mode zeroed (odd-derivative convention).
    pub fn derivative_symbol(&self, axis: usize) -> Vec<f64> {
        let n = self.grid.counts[axis];
        (0..self.grid.len())
            .map(|flat| {
                let j = self.grid.multi_index(flat)[axis];
                if j == n / 2 {
                    0.0
                } else {
                    self.wavenumbers[axis][j]
                }
            })
            .collect()
    }

    fn transform(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        let grid = &self.grid;
        for (axis, plan) in plans.iter().enumerate() {
            let n = grid.counts[axis];
            let stride = grid.stride(axis);
            if stride == 1 {
                plan.process(data);
                continue;
            }
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            let block = stride * n;
            for outer in (0..data.len()).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (j, z) in line.iter_mut().enumerate() {
                        *z = data[base + j * stride];
                    }
                    plan.process(&mut line);
                    for (j, z) in line.iter().enumerate() {
                        data[base + j * stride] = *z;
                    }
                }
            }
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// Inverse transform including the 1/n normalization.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / self.grid.len() as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }

    /// Multiply the transform by a transform-space symbol and come back.
    pub fn apply_symbol(&self, field: &[Complex64], symbol: impl Fn(usize) -> Complex64) -> Vec<Complex64> {
        let mut data = field.to_vec();
        self.forward(&mut data);
        for (k, z) in data.iter_mut().enumerate() {
            *z *= symbol(k);
        }
        self.inverse(&mut data);
        data
    }

    pub fn derivative(&self, values: &[Complex64], axis: usize) -> Vec<Complex64> {
        let sym = self.derivative_symbol(axis);
        self.apply_symbol(values, |k| Complex64::new(0.0, sym[k]))
    }

    pub fn gradient(&self, field: &ComplexField) -> Vec<ComplexField> {
        (0..self.grid.dim())
            .map(|axis| ComplexField::from_raw(self.grid, self.derivative(&field.values, axis)))
            .collect()
    }

    pub fn laplacian_values(&self, values: &[Complex64]) -> Vec<Complex64> {
        self.apply_symbol(values, |k| Complex64::new(-self.k_sqr[k], 0.0))
    }

    pub fn laplacian(&self, field: &ComplexField) -> ComplexField {
        ComplexField::from_raw(self.grid, self.laplacian_values(&field.values))
    }

    /// Spectral divergence of a real vector field given per axis.
    pub fn divergence(&self, components: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for (axis, comp) in components.iter().enumerate().take(self.grid.dim()) {
            let values: Vec<Complex64> = comp.iter().map(|&r| Complex64::new(r, 0.0)).collect();
            let d = self.derivative(&values, axis);
            for (o, z) in out.iter_mut().zip(d) {
                *o += z.re;
            }
        }
        out
    }

    /// Σ_axes |∂_a ψ|² at every node.
    pub fn grad_sqr(&self, values: &[Complex64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for axis in 0..self.grid.dim() {
            for (o, z) in out.iter_mut().zip(self.derivative(values, axis)) {
                *o += z.norm_sqr();
            }
        }
        out
    }
}

/// Spectral gradient, one field per axis.
pub fn gradient(field: &ComplexField) -> Vec<ComplexField> {
    Spectral::new(field.grid()).gradient(field)
}

/// Spectral Laplacian (symbol −|k|²).
pub fn laplacian(field: &ComplexField) -> ComplexField {
    Spectral::new(field.grid()).laplacian(field)
}

/// Amplitude and phase of a complex field.
#[derive(Clone, Debug)]
pub struct PolarFields {
    pub amplitude: Vec<f64>,
    pub phase: Vec<f64>,
}

/// Default phase floor: 1e-10 times the field maximum.
pub fn default_phase_floor(field: &ComplexField) -> f64 {
    1e-10 * field.max_abs()
}

/// Split ψ into u = |ψ| and S = arg ψ. Below `phase_floor` the phase is
/// copied from the nearest node (in grid steps) that is above it.
pub fn polar_decompose(field: &ComplexField, phase_floor: f64) -> Result<PolarFields> {
    if !(phase_floor > 0.0) {
        return Err(HylosError::InvalidArgument("phase_floor must be positive".into()));
    }
    let grid = *field.grid();
    let n = grid.len();
    let amplitude: Vec<f64> = field.values.iter().map(|z| z.norm()).collect();
    let mut phase = vec![0.0; n];
    let mut assigned = vec![false; n];
    let mut queue = VecDeque::new();
    for k in 0..n {
        if amplitude[k] >= phase_floor {
            phase[k] = field.values[k].arg();
            assigned[k] = true;
            queue.push_back(k);
        }
    }
    if queue.is_empty() {
        return Err(HylosError::Degenerate(
            "field vanishes everywhere; phase undefined".into(),
        ));
    }
    // multi-source breadth-first fill over periodic neighbours
    while let Some(k) = queue.pop_front() {
        let idx = grid.multi_index(k);
        for axis in 0..grid.dim() {
            let count = grid.counts[axis];
            for step in [1, count - 1] {
                let mut nb = idx;
                nb[axis] = (idx[axis] + step) % count;
                let j = grid.flat_index(nb);
                if !assigned[j] {
                    assigned[j] = true;
                    phase[j] = phase[k];
                    queue.push_back(j);
                }
            }
        }
    }
    Ok(PolarFields { amplitude, phase })
}

pub fn polar_compose(grid: Grid, polar: &PolarFields) -> Result<ComplexField> {
    ComplexField::new(
        grid,
        polar
            .amplitude
            .iter()
            .zip(&polar.phase)
            .map(|(&u, &s)| Complex64::from_polar(u, s))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(l: f64, n: usize) -> Grid {
        Grid::new(1, &[l], &[n]).unwrap()
    }

    #[test]
    fn make_grid_examples() {
        let g = grid1(2.0 * PI, 64);
        assert_eq!(g.spacing(0), 2.0 * PI / 64.0);
        let g2 = Grid::new(2, &[20.0, 20.0], &[128, 128]).unwrap();
        assert_eq!(g2.len(), 16384);
        assert!(Grid::new(3, &[10.0; 3], &[7, 8, 8]).is_err());
        assert!(Grid::new(1, &[-1.0], &[8]).is_err());
        assert!(Grid::new(1, &[1.0], &[4]).is_err());
        assert!(Grid::new(4, &[1.0; 4], &[8; 4]).is_err());
    }

    #[test]
    fn coordinates_span_half_open_box() {
        let g = grid1(10.0, 8);
        assert_eq!(g.coord(0, 0), -5.0);
        assert!((g.coord(0, 7) - 3.75).abs() < 1e-15);
    }

    #[test]
    fn integrate_examples() {
        let g = grid1(2.0 * PI, 64);
        let ones = vec![1.0; 64];
        assert!((g.integrate(&ones).unwrap() - 2.0 * PI).abs() < 1e-13);
        let cos2: Vec<f64> = g.axis_coords(0).iter().map(|x| x.cos().powi(2)).collect();
        assert!((g.integrate(&cos2).unwrap() - PI).abs() < 1e-13);
        let mut bad = ones.clone();
        bad[3] = f64::NAN;
        assert!(g.integrate(&bad).is_err());
    }

    #[test]
    fn gradient_examples() {
        let g = grid1(2.0 * PI, 32);
        let f = ComplexField::from_fn(g, |x| Complex64::new(0.0, x[0]).exp());
        let d = gradient(&f);
        for (k, z) in d[0].values().iter().enumerate() {
            let x = g.coord(0, k);
            let want = Complex64::new(0.0, 1.0) * Complex64::new(0.0, x).exp();
            assert!((z - want).norm() < 1e-12);
        }
        let c = ComplexField::from_fn(g, |_| Complex64::new(3.0, -1.0));
        assert!(gradient(&c)[0].max_abs() < 1e-13);
        let mix = ComplexField::from_fn(g, |x| {
            Complex64::new(0.0, 2.0 * x[0]).exp() + Complex64::new(0.0, -x[0]).exp()
        });
        let dm = gradient(&mix);
        for (k, z) in dm[0].values().iter().enumerate() {
            let x = g.coord(0, k);
            let want = Complex64::new(0.0, 2.0) * Complex64::new(0.0, 2.0 * x).exp()
                - Complex64::new(0.0, 1.0) * Complex64::new(0.0, -x).exp();
            assert!((z - want).norm() < 1e-12);
        }
    }

    #[test]
    fn laplacian_examples() {
        let g = grid1(2.0 * PI, 32);
        let f = ComplexField::from_fn(g, |x| Complex64::new(0.0, x[0]).exp());
        assert!(laplacian(&f).add(&f).unwrap().max_abs() < 1e-12);
        let g2 = Grid::new(2, &[2.0 * PI, 2.0 * PI], &[16, 16]).unwrap();
        let f2 = ComplexField::from_fn(g2, |x| Complex64::new(0.0, x[0] + x[1]).exp());
        let l2 = laplacian(&f2);
        assert!(l2.add(&f2.scaled(Complex64::new(2.0, 0.0))).unwrap().max_abs() < 1e-12);
        let c = ComplexField::from_fn(g2, |_| Complex64::new(1.0, 1.0));
        assert!(laplacian(&c).max_abs() < 1e-13);
    }

    #[test]
    fn strided_axes_transform_correctly() {
        let g = Grid::new(3, &[2.0 * PI; 3], &[8, 16, 8]).unwrap();
        let f = ComplexField::from_fn(g, |x| Complex64::new(0.0, x[0] - 2.0 * x[1] + 3.0 * x[2]).exp());
        let d = gradient(&f);
        for (axis, factor) in [(0usize, 1.0), (1, -2.0), (2, 3.0)] {
            let want = f.scaled(Complex64::new(0.0, factor));
            assert!(d[axis].sup_distance(&want) < 1e-11, "axis {axis}");
        }
    }

    #[test]
    fn polar_examples() {
        let g = grid1(2.0 * PI, 64);
        let c = ComplexField::from_fn(g, |_| Complex64::from_polar(2.0, 0.5));
        let p = polar_decompose(&c, 1e-10).unwrap();
        assert!(p.amplitude.iter().all(|&u| (u - 2.0).abs() < 1e-15));
        assert!(p.phase.iter().all(|&s| (s - 0.5).abs() < 1e-15));

        let w = ComplexField::from_fn(g, |x| Complex64::new(0.0, x[0]).exp());
        let p = polar_decompose(&w, 1e-10).unwrap();
        for (k, &s) in p.phase.iter().enumerate() {
            let x = g.coord(0, k);
            let diff = (s - x).rem_euclid(2.0 * PI);
            assert!(diff < 1e-12 || (2.0 * PI - diff) < 1e-12);
        }

        let z = ComplexField::zeros(g);
        assert!(matches!(polar_decompose(&z, 1e-10), Err(HylosError::Degenerate(_))));
        assert!(polar_decompose(&w, 0.0).is_err());
    }

    #[test]
    fn polar_fill_copies_nearest_valid_phase() {
        let g = grid1(8.0, 8);
        let mut vals = vec![Complex64::new(0.0, 0.0); 8];
        vals[2] = Complex64::from_polar(1.0, 1.0);
        vals[6] = Complex64::from_polar(1.0, -2.0);
        let f = ComplexField::new(g, vals).unwrap();
        let p = polar_decompose(&f, 1e-6).unwrap();
        assert_eq!(p.phase[1], 1.0);
        assert_eq!(p.phase[3], 1.0);
        assert_eq!(p.phase[5], -2.0);
        assert_eq!(p.phase[7], -2.0);
    }

    #[test]
    fn leakage_of_localized_field_is_small() {
        let g = grid1(40.0, 256);
        let f = ComplexField::from_fn(g, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0));
        assert!(f.boundary_leakage() < 1e-100);
    }
}
