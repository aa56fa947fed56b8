//! Uniform truncated-line grid and the spectral kernels built on it.
//!
//! The real line is replaced by the periodic box `[-X, X)` sampled at `N`
//! nodes. Every profile handled by this crate decays like a Gaussian, so the
//! periodic FFT reproduces whole-line calculus up to the tail that is cut
//! off; [`tail_mass`] and [`periodic_defect`] make that tail observable.
//!
//! Fourier convention, used everywhere in the crate:
//!
//! ```text
//! f^(xi) = \int f(x) e^{-i xi x} dx   ~  dx * sum_j f(x_j) e^{-i xi x_j}
//! f(x)   = (1/2pi) \int f^(xi) e^{i xi x} dxi
//! ```

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::special::estar;

/// Relative tail or defect above which spectral operations refuse to run.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-6;

/// Seam defect above which a field is treated as a front rather than as
/// smooth periodic data.
pub(crate) const FRONT_DEFECT: f64 = 1e-10;

/// Fraction of the nodes (per side) inspected by [`tail_mass`].
const TAIL_FRACTION: f64 = 0.05;

/// Fraction of the wavenumber band treated as "high modes" by [`periodic_defect`].
const HIGH_MODE_FRACTION: f64 = 0.8;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Wavenumbers in FFT storage order.
    xi: Vec<f64>,
}

/// Uniform grid on `[-X, X)` with `N` nodes (a power of two, at least 16).
#[derive(Clone)]
pub struct SpectralGrid {
    half_width: f64,
    n: usize,
    plans: Arc<Plans>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("half_width", &self.half_width)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.half_width == other.half_width
    }
}

impl SpectralGrid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "node count must be a power of two >= 16, got {n}"
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let dxi = std::f64::consts::PI / half_width;
        let xi = (0..n).map(|k| mode_index(k, n) as f64 * dxi).collect();
        Ok(Self {
            half_width,
            n,
            plans: Arc::new(Plans { forward, inverse, xi }),
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn xi_spacing(&self) -> f64 {
        std::f64::consts::PI / self.half_width
    }

    /// Largest |xi| on the grid (the Nyquist mode).
    pub fn max_wavenumber(&self) -> f64 {
        self.xi_spacing() * (self.n / 2) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Wavenumbers in FFT storage order (`0, 1, .., N/2-1, -N/2, .., -1` times `pi/X`).
    pub fn wavenumbers(&self) -> &[f64] {
        &self.plans.xi
    }

    /// Wavenumbers sorted from `-N/2` to `N/2-1`.
    pub fn wavenumbers_centered(&self) -> Vec<f64> {
        let n = self.n as i64;
        (-n / 2..n / 2).map(|j| j as f64 * self.xi_spacing()).collect()
    }

    pub(crate) fn fft(&self, data: &mut [Complex64]) {
        self.plans.forward.process(data);
    }

    pub(crate) fn ifft(&self, data: &mut [Complex64]) {
        self.plans.inverse.process(data);
        let scale = 1.0 / self.n as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }

    /// Raw DFT of real samples, FFT storage order.
    pub(crate) fn dft(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft(&mut buf);
        buf
    }

    /// Applies the Fourier multiplier `m(xi)` to real samples and returns the
    /// real part. `nyquist` decides the multiplier used for the unpaired mode.
    pub(crate) fn apply_multiplier<F>(&self, values: &[f64], nyquist: Nyquist, m: F) -> Vec<f64>
    where
        F: Fn(f64) -> Complex64,
    {
        let mut buf = self.dft(values);
        let half = self.n / 2;
        for (k, c) in buf.iter_mut().enumerate() {
            if k == half {
                match nyquist {
                    Nyquist::Zero => *c = Complex64::new(0.0, 0.0),
                    Nyquist::Real => *c *= m(self.plans.xi[k]).re,
                }
            } else {
                *c *= m(self.plans.xi[k]);
            }
        }
        self.ifft(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}

/// Treatment of the unpaired Nyquist mode when applying a multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Nyquist {
    /// Drop it (odd-order derivatives).
    Zero,
    /// Keep it, scaled by the real part of the multiplier.
    Real,
}

fn mode_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Real samples on a [`SpectralGrid`] tagged with a time stamp.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: SpectralGrid,
    values: Vec<f64>,
    time: f64,
}

impl Field {
    pub fn new(grid: &SpectralGrid, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
            time,
        })
    }

    /// Samples `f` at the grid nodes, time stamp 1.
    pub fn from_fn(grid: &SpectralGrid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: grid.clone(),
            values: (0..grid.len()).map(|i| f(grid.node(i))).collect(),
            time: 1.0,
        }
    }

    pub fn zeros(grid: &SpectralGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &SpectralGrid, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.len()],
            time: 1.0,
        }
    }

    pub(crate) fn from_parts(grid: &SpectralGrid, values: Vec<f64>, time: f64) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid: grid.clone(),
            values,
            time,
        }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_parts(&self.grid, self.values.iter().map(|&v| f(v)).collect(), self.time)
    }

    /// Pointwise combination with another field on the same grid.
    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Field::from_parts(
            &self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            self.time,
        ))
    }

    /// Pointwise combination with the node coordinate.
    pub fn map_with_x(&self, f: impl Fn(f64, f64) -> f64) -> Field {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(self.grid.node(i), v))
            .collect();
        Field::from_parts(&self.grid, values, self.time)
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Value at the first node (`x = -X`).
    pub fn left(&self) -> f64 {
        self.values[0]
    }

    /// Value at the last node (`x = X - dx`), the stand-in for `x = +X`.
    pub fn right(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Continuous Fourier transform samples `f^(xi_j)` in FFT storage order.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let dx = self.grid.spacing();
        let x0 = -self.grid.half_width();
        let xi = self.grid.wavenumbers();
        self.grid
            .dft(&self.values)
            .into_iter()
            .zip(xi)
            .map(|(c, &k)| c * dx * Complex64::from_polar(1.0, -k * x0))
            .collect()
    }

    /// Spectral derivative without any boundary check.
    pub fn spectral_derivative(&self, order: u32) -> Field {
        let nyq = if order % 2 == 1 { Nyquist::Zero } else { Nyquist::Real };
        let values = self
            .grid
            .apply_multiplier(&self.values, nyq, |xi| Complex64::new(0.0, xi).powu(order));
        Field::from_parts(&self.grid, values, self.time)
    }

    /// Derivative of a field whose limits at `-X` and `+X` may differ.
    ///
    /// When the samples do not close up periodically, the front
    /// `l + (r - l) e_*(x / w)` is removed, the decaying remainder is
    /// differentiated spectrally and the front's derivative added back.
    pub fn front_derivative(&self, order: u32) -> Field {
        match Front::detect(self) {
            Some(front) => self.front_derivative_with(&front, order),
            None => self.spectral_derivative(order),
        }
    }

    pub(crate) fn front_derivative_with(&self, front: &Front, order: u32) -> Field {
        let rest = self
            .zip_with(&front.field(&self.grid), |a, b| a - b)
            .expect("same grid");
        let mut d = rest.spectral_derivative(order);
        for (i, v) in d.values.iter_mut().enumerate() {
            *v += front.derivative(self.grid.node(i), order);
        }
        d
    }
}

impl std::ops::Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.zip_with(rhs, |a, b| a + b)
            .expect("grid mismatch in Field addition")
    }
}

impl std::ops::Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.zip_with(rhs, |a, b| a - b)
            .expect("grid mismatch in Field subtraction")
    }
}

impl std::ops::Mul for &Field {
    type Output = Field;
    fn mul(self, rhs: &Field) -> Field {
        self.zip_with(rhs, |a, b| a * b)
            .expect("grid mismatch in Field product")
    }
}

impl std::ops::Mul<&Field> for f64 {
    type Output = Field;
    fn mul(self, rhs: &Field) -> Field {
        rhs.scale(self)
    }
}

/// Smooth step `left + jump * e_*(x / width)` matching a field's boundary values.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Front {
    pub left: f64,
    pub jump: f64,
    pub width: f64,
}

impl Front {
    pub fn of(f: &Field) -> Self {
        Self {
            left: f.left(),
            jump: f.right() - f.left(),
            width: front_width(f.grid()),
        }
    }

    /// The front of `f` if its samples have a periodic seam, `None` if `f`
    /// is already smooth as a periodic function.
    pub fn detect(f: &Field) -> Option<Self> {
        (periodic_defect(f) > FRONT_DEFECT).then(|| Self::of(f))
    }

    pub fn value(&self, x: f64) -> f64 {
        self.left + self.jump * estar(x / self.width)
    }

    pub fn field(&self, grid: &SpectralGrid) -> Field {
        Field::from_fn(grid, |x| self.value(x))
    }

    /// `d^k/dx^k` of the front. The Gaussian derivatives use Hermite recursion.
    pub fn derivative(&self, x: f64, order: u32) -> f64 {
        if order == 0 {
            return self.value(x);
        }
        let y = x / self.width;
        // g_m = d^m/dy^m e^{-y^2/4} obeys g_{m+1} = -(y/2) g_m - (m/2) g_{m-1}.
        let m = order - 1;
        let (mut g_prev, mut g) = (0.0, (-y * y / 4.0).exp());
        for j in 0..m {
            let next = -(y / 2.0) * g - (j as f64 / 2.0) * g_prev;
            g_prev = g;
            g = next;
        }
        let norm = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
        self.jump * norm * g / self.width.powi(order as i32)
    }
}

/// Width of the reference Gaussian used for fronts and mass splitting.
pub(crate) fn front_width(grid: &SpectralGrid) -> f64 {
    (grid.half_width() / 10.0).min(1.0)
}

pub fn make_grid(half_width: f64, n: usize) -> Result<SpectralGrid> {
    SpectralGrid::new(half_width, n)
}

/// Largest |f| over the outer 5% of nodes on either side, relative to max |f|.
pub fn tail_mass(f: &Field) -> f64 {
    let n = f.len();
    let k = ((TAIL_FRACTION * n as f64).ceil() as usize).max(1);
    let peak = f.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    let edge = f.values[..k]
        .iter()
        .chain(&f.values[n - k..])
        .fold(0.0f64, |m, v| m.max(v.abs()));
    edge / peak
}

/// Relative weight of the top 20% of the wavenumber band.
///
/// Smooth decaying or smooth periodic samples give values near machine
/// precision; a jump across the periodic seam or an unresolved feature does
/// not. This is the gate used by the spectral derivative.
pub fn periodic_defect(f: &Field) -> f64 {
    let spec = f.grid.dft(&f.values);
    let n = f.len() as f64;
    let cut = HIGH_MODE_FRACTION * n / 2.0;
    let mut peak = 0.0f64;
    let mut high = 0.0f64;
    for (k, c) in spec.iter().enumerate() {
        let a = c.norm();
        peak = peak.max(a);
        if (mode_index(k, f.len()) as f64).abs() > cut {
            high = high.max(a);
        }
    }
    if peak == 0.0 {
        0.0
    } else {
        high / peak
    }
}

/// Spectral derivative of order 1 to 4 via multiplication by `(i xi)^order`.
pub fn derivative(f: &Field, order: u32) -> Result<Field> {
    if !(1..=4).contains(&order) {
        return Err(Error::Parameter(format!("derivative order must be 1..=4, got {order}")));
    }
    let defect = periodic_defect(f);
    if defect > DEFAULT_TAIL_TOLERANCE {
        return Err(Error::BoundaryContamination {
            op: "derivative",
            defect,
            threshold: DEFAULT_TAIL_TOLERANCE,
        });
    }
    Ok(f.spectral_derivative(order))
}

/// Trapezoid sum `dx * sum f`; spectrally accurate for smooth decaying samples.
pub fn quadrature(f: &Field) -> f64 {
    f.grid.spacing() * f.values.iter().sum::<f64>()
}

/// `int_{-X}^x f(y) dy` at every node.
///
/// The mass is carried by a reference Gaussian with a closed-form primitive;
/// the mean-zero remainder is integrated spectrally (`1/(i xi)`, no `xi = 0`
/// division). The last node carries the full mass up to the cut-off tail.
pub fn cumint(f: &Field) -> Result<Field> {
    let peak = f.max_abs();
    if peak > 0.0 && f.left().abs() / peak > DEFAULT_TAIL_TOLERANCE {
        return Err(Error::Truncation {
            value: f.left().abs() / peak,
            threshold: DEFAULT_TAIL_TOLERANCE,
        });
    }
    Ok(cumint_unchecked(f))
}

pub(crate) fn cumint_unchecked(f: &Field) -> Field {
    let grid = f.grid();
    let mass = quadrature(f);
    let w = front_width(grid);
    let norm = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
    let x0 = -grid.half_width();
    let rest: Vec<f64> = f
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let y = grid.node(i) / w;
            v - mass * norm * (-y * y / 4.0).exp() / w
        })
        .collect();
    let prim = grid.apply_multiplier(&rest, Nyquist::Zero, |xi| {
        if xi == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -1.0 / xi)
        }
    });
    let base = prim[0];
    let e0 = estar(x0 / w);
    let values = prim
        .iter()
        .enumerate()
        .map(|(i, &p)| p - base + mass * (estar(grid.node(i) / w) - e0))
        .collect();
    Field::from_parts(grid, values, f.time)
}

/// `R_L f(z) = L f(L z)` sampled on the same grid, together with the clipped tail.
#[derive(Debug, Clone)]
pub struct Rescaled {
    pub field: Field,
    /// Relative size of `f` near `|x| = X`: the part assumed zero outside the box.
    pub clipped: f64,
}

/// Renormalization map `R_L`. Points with `|L z| >= X` are set to zero.
pub fn resample_scaled(f: &Field, scale: f64) -> Result<Rescaled> {
    if !(scale.is_finite() && scale >= 1.0) {
        return Err(Error::Parameter(format!("rescaling factor must be >= 1, got {scale}")));
    }
    let clipped = tail_mass(f);
    if scale > 1.0 && clipped > DEFAULT_TAIL_TOLERANCE {
        return Err(Error::Resolution {
            scale,
            clipped,
            threshold: DEFAULT_TAIL_TOLERANCE,
        });
    }
    Ok(Rescaled {
        field: rescale_unchecked(f, scale),
        clipped,
    })
}

pub(crate) fn rescale_unchecked(f: &Field, scale: f64) -> Field {
    if scale == 1.0 {
        return f.clone();
    }
    let grid = f.grid();
    let n = grid.len();
    let dx = grid.spacing();
    let x_max = grid.half_width();
    let targets: Vec<f64> = (0..n).map(|i| scale * grid.node(i)).collect();
    // Integer scales land on nodes; everything else goes through the interpolant.
    let on_nodes = targets.iter().all(|&y| {
        let s = (y + x_max) / dx;
        (y < -x_max || y >= x_max) || (s - s.round()).abs() < 1e-9
    });
    let sampled: Vec<f64> = if on_nodes {
        targets
            .iter()
            .map(|&y| {
                if y < -x_max || y >= x_max {
                    0.0
                } else {
                    f.values[((y + x_max) / dx).round() as usize]
                }
            })
            .collect()
    } else {
        let inside: Vec<f64> = targets
            .iter()
            .map(|&y| if y < -x_max || y >= x_max { f64::NAN } else { y })
            .collect();
        trig_interpolate(f, &inside)
            .into_iter()
            .map(|v| if v.is_nan() { 0.0 } else { v })
            .collect()
    };
    Field::from_parts(grid, sampled.into_iter().map(|v| scale * v).collect(), f.time)
}

/// Evaluates the trigonometric interpolant of `f` at arbitrary points.
/// NaN points are passed through.
pub fn trig_interpolate(f: &Field, points: &[f64]) -> Vec<f64> {
    let grid = f.grid();
    let n = grid.len();
    let coeffs = grid.dft(&f.values);
    let xi = grid.wavenumbers();
    let x0 = -grid.half_width();
    points
        .iter()
        .map(|&y| {
            if y.is_nan() {
                return f64::NAN;
            }
            let s = y - x0;
            let mut acc = 0.0;
            for k in 0..n {
                let c = coeffs[k];
                let phase = xi[k] * s;
                let term = c.re * phase.cos() - c.im * phase.sin();
                if k == n / 2 {
                    // Split the Nyquist mode evenly between +/- xi.
                    acc += c.re * phase.cos();
                } else {
                    acc += term;
                }
            }
            acc / n as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gauss(grid: &SpectralGrid) -> Field {
        Field::from_fn(grid, |x| (-x * x / 4.0).exp())
    }

    #[test]
    fn grid_arithmetic() {
        let g = make_grid(40.0, 1024).unwrap();
        assert_eq!(g.spacing(), 0.078125);
        assert!((g.xi_spacing() - PI / 40.0).abs() < 1e-15);
        assert_eq!(g.spacing() * g.len() as f64, 80.0);
        let g = make_grid(PI, 16).unwrap();
        assert!((g.max_wavenumber() - 8.0).abs() < 1e-12);
        let c = g.wavenumbers_centered();
        assert_eq!(c.len(), 16);
        assert!((c[0] + 8.0).abs() < 1e-12 && (c[15] - 7.0).abs() < 1e-12);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(matches!(make_grid(40.0, 1000), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(40.0, 8), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(0.0, 64), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(-1.0, 64), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn derivative_of_sine_and_constant() {
        let g = make_grid(PI, 16).unwrap();
        let s = Field::from_fn(&g, f64::sin);
        let d = derivative(&s, 1).unwrap();
        for (i, v) in d.values().iter().enumerate() {
            assert!((v - g.node(i).cos()).abs() < 1e-12);
        }
        let c = Field::constant(&g, 3.0);
        assert!(derivative(&c, 1).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn second_derivative_of_gaussian_at_origin() {
        let g = make_grid(40.0, 1024).unwrap();
        let d = derivative(&gauss(&g), 2).unwrap();
        assert!((d.values()[512] + 0.5).abs() < 1e-8);
    }

    #[test]
    fn derivative_rejects_fronts_and_bad_order() {
        let g = make_grid(40.0, 1024).unwrap();
        let front = Field::from_fn(&g, estar);
        assert!(matches!(
            derivative(&front, 1),
            Err(Error::BoundaryContamination { .. })
        ));
        assert!(derivative(&gauss(&g), 5).is_err());
    }

    #[test]
    fn front_derivative_matches_closed_form() {
        let g = make_grid(40.0, 1024).unwrap();
        let h = Field::from_fn(&g, |x| (1.0 + 3.0 * estar(x)).sqrt());
        let d = h.front_derivative(1);
        let norm = 1.0 / (4.0 * PI).sqrt();
        for (i, v) in d.values().iter().enumerate() {
            let x = g.node(i);
            let exact = 1.5 * norm * (-x * x / 4.0).exp() / (1.0 + 3.0 * estar(x)).sqrt();
            assert!((v - exact).abs() < 1e-11, "{x}: {v} vs {exact}");
        }
    }

    #[test]
    fn quadrature_values() {
        let g = make_grid(40.0, 1024).unwrap();
        assert!((quadrature(&gauss(&g)) - (4.0 * PI).sqrt()).abs() < 1e-8);
        let odd = Field::from_fn(&g, |x| x * (-x * x).exp());
        assert!(quadrature(&odd).abs() < 1e-12);
    }

    #[test]
    fn cumint_of_gaussian_derivative_is_error_function() {
        let g = make_grid(40.0, 1024).unwrap();
        let norm = 1.0 / (4.0 * PI).sqrt();
        let f = Field::from_fn(&g, |x| norm * (-x * x / 4.0).exp());
        let c = cumint(&f).unwrap();
        assert_eq!(c.values()[0], 0.0);
        for (i, v) in c.values().iter().enumerate() {
            assert!((v - estar(g.node(i))).abs() < 1e-8);
        }
    }

    #[test]
    fn cumint_rejects_left_mass() {
        let g = make_grid(40.0, 1024).unwrap();
        let f = Field::constant(&g, 1.0);
        assert!(matches!(cumint(&f), Err(Error::Truncation { .. })));
    }

    #[test]
    fn tail_mass_examples() {
        let g = make_grid(40.0, 1024).unwrap();
        assert!(tail_mass(&gauss(&g)) <= 1e-12);
        assert_eq!(tail_mass(&Field::constant(&g, 1.0)), 1.0);
        assert_eq!(tail_mass(&Field::zeros(&g)), 0.0);
    }

    #[test]
    fn rescale_identity_and_gaussian() {
        let g = make_grid(40.0, 1024).unwrap();
        let f = Field::from_fn(&g, |x| (-x * x).exp());
        let r1 = resample_scaled(&f, 1.0).unwrap();
        assert_eq!(r1.field.values(), f.values());
        let r2 = resample_scaled(&f, 2.0).unwrap();
        for (i, v) in r2.field.values().iter().enumerate() {
            let z = g.node(i);
            assert!((v - 2.0 * (-4.0 * z * z).exp()).abs() < 1e-8);
        }
        // a non-integer scale goes through the interpolant
        let r = resample_scaled(&f, 1.5).unwrap();
        for (i, v) in r.field.values().iter().enumerate() {
            let z = g.node(i);
            assert!((v - 1.5 * (-2.25 * z * z).exp()).abs() < 1e-8);
        }
        assert!(resample_scaled(&f, 0.5).is_err());
        assert!(matches!(
            resample_scaled(&Field::constant(&g, 1.0), 2.0),
            Err(Error::Resolution { .. })
        ));
    }

    #[test]
    fn rescale_commutes_with_derivative() {
        let g = make_grid(40.0, 1024).unwrap();
        let f = gauss(&g);
        let lhs = derivative(&resample_scaled(&f, 2.0).unwrap().field, 1).unwrap();
        let rhs = resample_scaled(&derivative(&f, 1).unwrap(), 2.0)
            .unwrap()
            .field
            .scale(2.0);
        assert!((&lhs - &rhs).max_abs() < 1e-8);
    }

    #[test]
    fn parseval_identity() {
        let g = make_grid(40.0, 1024).unwrap();
        let f = Field::from_fn(&g, |x| (x - 1.0) * (-x * x / 3.0).exp());
        let lhs = g.spacing() * f.values().iter().map(|v| v * v).sum::<f64>();
        let rhs = g.xi_spacing() / (2.0 * PI) * f.spectrum().iter().map(|c| c.norm_sqr()).sum::<f64>();
        assert!((lhs - rhs).abs() <= 1e-10 * lhs);
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        let g = make_grid(40.0, 1024).unwrap();
        let spec = gauss(&g).spectrum();
        for (c, &xi) in spec.iter().zip(g.wavenumbers()) {
            let exact = (4.0 * PI).sqrt() * (-xi * xi).exp();
            assert!((c.re - exact).abs() < 1e-10 && c.im.abs() < 1e-10);
        }
    }
}
