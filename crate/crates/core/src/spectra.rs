//! Wave trains of reaction-diffusion systems and their Bloch spectra.
//!
//! A wave train `u(t,x) = u0(k x - omega t)` solves
//! `k^2 D u0'' + omega u0' + f(u0) = 0` on the circle; the Bloch operator
//! `k^2 D (d + i xi/k)^2 + omega (d + i xi/k) + f'(u0)` decides its spectral stability.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::linear_fit;

pub trait Reaction: Send + Sync + std::fmt::Debug {
    fn dim(&self) -> usize;
    fn eval(&self, u: &[f64], out: &mut [f64]);
    /// Row-major `d x d` Jacobian.
    fn jacobian(&self, u: &[f64], out: &mut [f64]);
    /// Closed-form wave train `(profile on the nodes, omega)`, if the preset has one.
    fn wave_train_guess(&self, _k: f64, _thetas: &[f64]) -> Option<(Vec<Vec<f64>>, f64)> {
        None
    }
}

/// `lambda(r) = 1 - r^2`, `omega(r) = omega0 - q r^2`, `f(u) = lambda u - omega J u`.
///
/// With this orientation `r0 (cos t, sin t)` travels with `omega(k) = omega0 - q (1 - k^2)`.
#[derive(Debug, Clone, Copy)]
pub struct LambdaOmega {
    pub q: f64,
    pub omega0: f64,
}

impl Reaction for LambdaOmega {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, u: &[f64], out: &mut [f64]) {
        let r2 = u[0] * u[0] + u[1] * u[1];
        let lam = 1.0 - r2;
        let om = self.omega0 - self.q * r2;
        out[0] = lam * u[0] + om * u[1];
        out[1] = -om * u[0] + lam * u[1];
    }

    fn jacobian(&self, u: &[f64], out: &mut [f64]) {
        let (a, b) = (u[0], u[1]);
        let r2 = a * a + b * b;
        let lam = 1.0 - r2;
        let om = self.omega0 - self.q * r2;
        // d lam = -2u, d om = -2q u
        out[0] = lam - 2.0 * a * a - 2.0 * self.q * a * b;
        out[1] = om - 2.0 * a * b - 2.0 * self.q * b * b;
        out[2] = -om + 2.0 * self.q * a * a - 2.0 * a * b;
        out[3] = lam + 2.0 * self.q * a * b - 2.0 * b * b;
    }

    fn wave_train_guess(&self, k: f64, thetas: &[f64]) -> Option<(Vec<Vec<f64>>, f64)> {
        if !(k * k < 1.0) {
            return None;
        }
        let r0 = (1.0 - k * k).sqrt();
        let c = thetas.iter().map(|t| r0 * t.cos()).collect();
        let s = thetas.iter().map(|t| r0 * t.sin()).collect();
        Some((vec![c, s], self.omega0 - self.q * (1.0 - k * k)))
    }
}

#[derive(Debug, Clone)]
pub struct RDSystem {
    name: String,
    diffusion: DMatrix<f64>,
    reaction: Arc<dyn Reaction>,
}

impl RDSystem {
    pub fn new(name: &str, diffusion: DMatrix<f64>, reaction: Arc<dyn Reaction>) -> Result<Self> {
        let d = reaction.dim();
        if diffusion.nrows() != d || diffusion.ncols() != d {
            return Err(Error::Parameter(format!("diffusion matrix must be {d}x{d}")));
        }
        if (&diffusion - diffusion.transpose()).amax() > 1e-14 * diffusion.amax().max(1.0) {
            return Err(Error::Parameter("diffusion matrix must be symmetric".into()));
        }
        if diffusion.clone().cholesky().is_none() {
            return Err(Error::Parameter("diffusion matrix must be positive definite".into()));
        }
        Ok(Self {
            name: name.to_string(),
            diffusion,
            reaction,
        })
    }

    pub fn lambda_omega(q: f64, omega0: f64) -> Result<Self> {
        if !(q.is_finite() && omega0.is_finite()) {
            return Err(Error::Parameter("q and omega0 must be finite".into()));
        }
        Self::new(
            "lambda_omega",
            DMatrix::identity(2, 2),
            Arc::new(LambdaOmega { q, omega0 }),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.reaction.dim()
    }

    pub fn diffusion(&self) -> &DMatrix<f64> {
        &self.diffusion
    }

    pub fn reaction(&self) -> &dyn Reaction {
        self.reaction.as_ref()
    }
}

/// Collocation nodes `2 pi j / (2M+1)`.
pub fn collocation_nodes(modes: usize) -> Vec<f64> {
    let n = 2 * modes + 1;
    (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
}

/// Periodic differentiation matrix on an odd number of nodes.
fn diff_matrix(n: usize) -> DMatrix<f64> {
    let h = 2.0 * PI / n as f64;
    DMatrix::from_fn(n, n, |j, l| {
        if j == l {
            0.0
        } else {
            let k = j as i64 - l as i64;
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            0.5 * sign / (k as f64 * h / 2.0).sin()
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WaveTrain {
    pub k: f64,
    pub omega: f64,
    pub modes: usize,
    /// Profile per component on the collocation nodes.
    pub profile: Vec<Vec<f64>>,
    pub residual: f64,
    /// Residual before each Newton step and after the last one.
    pub residual_history: Vec<f64>,
}

impl WaveTrain {
    /// Closed-form wave train of a preset, without any Newton polishing.
    pub fn from_guess(sys: &RDSystem, k: f64, modes: usize) -> Result<Self> {
        let thetas = collocation_nodes(modes);
        let (profile, omega) = sys
            .reaction()
            .wave_train_guess(k, &thetas)
            .ok_or_else(|| Error::Parameter(format!("no closed-form wave train for k={k}")))?;
        let mut wt = Self {
            k,
            omega,
            modes,
            profile,
            residual: f64::NAN,
            residual_history: Vec::new(),
        };
        wt.residual = residual_norm(sys, &wt);
        Ok(wt)
    }

    pub fn nodes(&self) -> usize {
        2 * self.modes + 1
    }

    /// Coefficients `c_m`, `m = -M..=M`, with `u0 = sum c_m e^{i m theta}`.
    pub fn coefficients(&self) -> Vec<Vec<Complex64>> {
        let n = self.nodes();
        let m = self.modes as i64;
        self.profile
            .iter()
            .map(|u| {
                (-m..=m)
                    .map(|mm| {
                        u.iter()
                            .enumerate()
                            .map(|(j, v)| {
                                let th = 2.0 * PI * j as f64 / n as f64;
                                Complex64::from_polar(*v, -(mm as f64) * th)
                            })
                            .sum::<Complex64>()
                            / n as f64
                    })
                    .collect()
            })
            .collect()
    }

    /// Trigonometric interpolant of component `c` at `theta`.
    pub fn eval(&self, c: usize, theta: f64, coeffs: &[Vec<Complex64>]) -> f64 {
        let m = self.modes as i64;
        coeffs[c]
            .iter()
            .zip(-m..=m)
            .map(|(cm, mm)| (cm * Complex64::from_polar(1.0, mm as f64 * theta)).re)
            .sum()
    }

    /// `d u0 / d theta` on the nodes.
    pub fn derivative(&self) -> Vec<Vec<f64>> {
        let d1 = diff_matrix(self.nodes());
        self.profile
            .iter()
            .map(|u| (&d1 * DVector::from_column_slice(u)).as_slice().to_vec())
            .collect()
    }
}

fn stack(profile: &[Vec<f64>]) -> DVector<f64> {
    DVector::from_iterator(profile.iter().map(|v| v.len()).sum(), profile.iter().flatten().copied())
}

fn residual_vector(sys: &RDSystem, k: f64, omega: f64, profile: &[Vec<f64>], d1: &DMatrix<f64>) -> DVector<f64> {
    let d = sys.dim();
    let n = profile[0].len();
    let du: Vec<DVector<f64>> = profile.iter().map(|u| d1 * DVector::from_column_slice(u)).collect();
    let ddu: Vec<DVector<f64>> = du.iter().map(|v| d1 * v).collect();
    let mut out = DVector::zeros(d * n);
    let mut uj = vec![0.0; d];
    let mut fj = vec![0.0; d];
    for j in 0..n {
        for c in 0..d {
            uj[c] = profile[c][j];
        }
        sys.reaction().eval(&uj, &mut fj);
        for c in 0..d {
            let mut r = omega * du[c][j] + fj[c];
            for c2 in 0..d {
                r += k * k * sys.diffusion()[(c, c2)] * ddu[c2][j];
            }
            out[c * n + j] = r;
        }
    }
    out
}

/// Discrete `L^2(0, 2pi)` norm of the profile equation residual.
pub fn residual_norm(sys: &RDSystem, wt: &WaveTrain) -> f64 {
    let r = residual_vector(sys, wt.k, wt.omega, &wt.profile, &diff_matrix(wt.nodes()));
    (2.0 * PI / wt.nodes() as f64).sqrt() * r.norm()
}

fn jacobian_u(sys: &RDSystem, k: f64, omega: f64, profile: &[Vec<f64>], d1: &DMatrix<f64>) -> DMatrix<f64> {
    let d = sys.dim();
    let n = profile[0].len();
    let d2 = d1 * d1;
    let mut jac = DMatrix::zeros(d * n, d * n);
    for c in 0..d {
        for c2 in 0..d {
            let dcc = sys.diffusion()[(c, c2)];
            let mut block = jac.view_mut((c * n, c2 * n), (n, n));
            block += &d2 * (k * k * dcc);
            if c == c2 {
                block += d1 * omega;
            }
        }
    }
    let mut uj = vec![0.0; d];
    let mut jj = vec![0.0; d * d];
    for j in 0..n {
        for c in 0..d {
            uj[c] = profile[c][j];
        }
        sys.reaction().jacobian(&uj, &mut jj);
        for c in 0..d {
            for c2 in 0..d {
                jac[(c * n + j, c2 * n + j)] += jj[c * d + c2];
            }
        }
    }
    jac
}

pub const NEWTON_TOLERANCE: f64 = 1e-12;
pub const NEWTON_MAX_ITERATIONS: usize = 30;

/// Newton on `(profile, omega)` with the phase condition `<u - u_ref, u_ref'> = 0`.
pub fn solve_wavetrain(sys: &RDSystem, k: f64, guess: &WaveTrain) -> Result<WaveTrain> {
    let d = sys.dim();
    if guess.profile.len() != d {
        return Err(Error::Parameter(format!(
            "guess has {} components, system has {d}",
            guess.profile.len()
        )));
    }
    let n = guess.nodes();
    let d1 = diff_matrix(n);
    let w = 2.0 * PI / n as f64;
    let u_ref = stack(&guess.profile);
    let du_ref = stack(&guess.derivative());
    let mut profile = guess.profile.clone();
    let mut omega = guess.omega;
    let mut history = Vec::new();
    for _ in 0..=NEWTON_MAX_ITERATIONS {
        let r = residual_vector(sys, k, omega, &profile, &d1);
        let u = stack(&profile);
        let phase = w * (&u - &u_ref).dot(&du_ref);
        let norm = (w * r.norm_squared() + phase * phase).sqrt();
        history.push(norm);
        if !norm.is_finite() {
            break;
        }
        if norm <= NEWTON_TOLERANCE {
            let mut wt = WaveTrain {
                k,
                omega,
                modes: guess.modes,
                profile,
                residual: f64::NAN,
                residual_history: history,
            };
            wt.residual = residual_norm(sys, &wt);
            return Ok(wt);
        }
        let mut jac = DMatrix::zeros(d * n + 1, d * n + 1);
        jac.view_mut((0, 0), (d * n, d * n))
            .copy_from(&jacobian_u(sys, k, omega, &profile, &d1));
        let du: Vec<f64> = profile
            .iter()
            .flat_map(|c| (&d1 * DVector::from_column_slice(c)).as_slice().to_vec())
            .collect();
        for (i, v) in du.iter().enumerate() {
            jac[(i, d * n)] = *v;
        }
        for (i, v) in du_ref.iter().enumerate() {
            jac[(d * n, i)] = w * v;
        }
        let mut rhs = DVector::zeros(d * n + 1);
        rhs.rows_mut(0, d * n).copy_from(&r);
        rhs[d * n] = phase;
        let step = jac
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Newton("singular Jacobian".into()))?;
        for c in 0..d {
            for j in 0..n {
                profile[c][j] -= step[c * n + j];
            }
        }
        omega -= step[d * n];
    }
    Err(Error::Newton(format!(
        "no convergence after {NEWTON_MAX_ITERATIONS} iterations, residual history {history:?}"
    )))
}

/// Smallest singular values of the Newton Jacobian with and without the
/// phase condition (and the `omega` column).
pub fn kernel_check(sys: &RDSystem, wt: &WaveTrain) -> (f64, f64) {
    let n = wt.nodes();
    let d = sys.dim();
    let d1 = diff_matrix(n);
    let ju = jacobian_u(sys, wt.k, wt.omega, &wt.profile, &d1);
    let bare = ju.clone().singular_values().min();
    let w = 2.0 * PI / n as f64;
    let du = stack(&wt.derivative());
    let mut full = DMatrix::zeros(d * n + 1, d * n + 1);
    full.view_mut((0, 0), (d * n, d * n)).copy_from(&ju);
    for i in 0..d * n {
        full[(i, d * n)] = du[i];
        full[(d * n, i)] = w * du[i];
    }
    (full.singular_values().min(), bare)
}

/// Fourier coefficients `J_l`, `|l| <= 2M`, of `f'(u0(theta))`, row-major blocks.
fn jacobian_coefficients(sys: &RDSystem, wt: &WaveTrain) -> Vec<Vec<Complex64>> {
    let d = sys.dim();
    let m = wt.modes as i64;
    let nq = 4 * wt.modes + 1;
    let coeffs = wt.coefficients();
    let mut samples = vec![vec![0.0; d * d]; nq];
    let mut uj = vec![0.0; d];
    for (j, s) in samples.iter_mut().enumerate() {
        let th = 2.0 * PI * j as f64 / nq as f64;
        for (c, v) in uj.iter_mut().enumerate() {
            *v = wt.eval(c, th, &coeffs);
        }
        sys.reaction().jacobian(&uj, s);
    }
    (-2 * m..=2 * m)
        .map(|l| {
            (0..d * d)
                .map(|e| {
                    samples
                        .iter()
                        .enumerate()
                        .map(|(j, s)| {
                            let th = 2.0 * PI * j as f64 / nq as f64;
                            Complex64::from_polar(s[e], -(l as f64) * th)
                        })
                        .sum::<Complex64>()
                        / nq as f64
                })
                .collect()
        })
        .collect()
}

/// Bloch operator in the basis `e_c e^{i m theta}`, index `c (2M+1) + (m + M)`.
///
/// At `k = 0` the scalar shift `i omega xi / k` is dropped; it moves every
/// eigenvalue by the same imaginary amount.
pub fn bloch_operator(wt: &WaveTrain, sys: &RDSystem, xi: f64) -> DMatrix<Complex64> {
    let jc = jacobian_coefficients(sys, wt);
    bloch_from_coefficients(wt, sys, xi, &jc)
}

fn bloch_from_coefficients(wt: &WaveTrain, sys: &RDSystem, xi: f64, jc: &[Vec<Complex64>]) -> DMatrix<Complex64> {
    let d = sys.dim();
    let m = wt.modes as i64;
    let nm = wt.nodes();
    let k = wt.k;
    let mut op = DMatrix::from_element(d * nm, d * nm, Complex64::new(0.0, 0.0));
    for c in 0..d {
        for c2 in 0..d {
            for (a, ma) in (-m..=m).enumerate() {
                for (b, mb) in (-m..=m).enumerate() {
                    let mut v = jc[(ma - mb + 2 * m) as usize][c * d + c2];
                    if a == b {
                        let nu = k * ma as f64 + xi;
                        v -= sys.diffusion()[(c, c2)] * nu * nu;
                        if c == c2 {
                            let shift = if k != 0.0 { xi / k } else { 0.0 };
                            v += Complex64::new(0.0, wt.omega * (ma as f64 + shift));
                        }
                    }
                    op[(c * nm + a, c2 * nm + b)] = v;
                }
            }
        }
    }
    op
}

/// `(L(0), A1, A2)` with `L(xi) = L(0) + xi A1 + xi^2 A2`.
pub fn bloch_taylor(wt: &WaveTrain, sys: &RDSystem) -> (DMatrix<Complex64>, DMatrix<Complex64>, DMatrix<Complex64>) {
    let d = sys.dim();
    let m = wt.modes as i64;
    let nm = wt.nodes();
    let zero = Complex64::new(0.0, 0.0);
    let mut a1 = DMatrix::from_element(d * nm, d * nm, zero);
    let mut a2 = DMatrix::from_element(d * nm, d * nm, zero);
    for c in 0..d {
        for c2 in 0..d {
            let dcc = sys.diffusion()[(c, c2)];
            for (a, ma) in (-m..=m).enumerate() {
                let mut v = Complex64::new(-2.0 * dcc * wt.k * ma as f64, 0.0);
                if c == c2 && wt.k != 0.0 {
                    v += Complex64::new(0.0, wt.omega / wt.k);
                }
                a1[(c * nm + a, c2 * nm + a)] = v;
                a2[(c * nm + a, c2 * nm + a)] = Complex64::new(-dcc, 0.0);
            }
        }
    }
    (bloch_operator(wt, sys, 0.0), a1, a2)
}

/// Complex Schur eigenvalues. Highly degenerate spectra can stall the
/// shifted QR iteration, so a failed attempt is retried on `op - s I` for a
/// few generic shifts `s`.
pub fn eigenvalues(op: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let n = op.nrows();
    let scale = op.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    for s in [(0.0, 0.0), (0.1234, 0.0567), (-0.3141, 0.2718), (0.577, -0.7013)] {
        let shift = Complex64::new(s.0, s.1) * scale;
        let mut m = op.clone();
        for i in 0..n {
            m[(i, i)] -= shift;
        }
        if let Some(schur) = nalgebra::Schur::try_new(m, 1e-15, 100 * n) {
            let t = schur.unpack().1;
            return Ok((0..n).map(|i| t[(i, i)] + shift).collect());
        }
    }
    Err(Error::Newton("eigenvalue iteration did not converge".into()))
}

/// `points` equally spaced values on `[-k/2, k/2]`.
pub fn xi_grid(k: f64, points: usize) -> Vec<f64> {
    let h = k / (points - 1) as f64;
    (0..points).map(|i| -k / 2.0 + i as f64 * h).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ambiguity {
    pub xi_index: usize,
    pub curve: usize,
    pub gap: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone)]
pub struct EigenCurveSet {
    pub xi: Vec<f64>,
    /// `curves[j][i] = lambda_j(xi_i)`; curve 0 passes through the origin,
    /// the rest are ordered by decreasing maximal real part.
    pub curves: Vec<Vec<Complex64>>,
    pub ambiguities: Vec<Ambiguity>,
    pub k: f64,
}

impl EigenCurveSet {
    pub fn lambda1(&self) -> &[Complex64] {
        &self.curves[0]
    }

    /// Index of the grid point closest to `xi = 0`.
    pub fn center(&self) -> usize {
        let mut best = 0;
        for (i, x) in self.xi.iter().enumerate() {
            if x.abs() < self.xi[best].abs() {
                best = i;
            }
        }
        best
    }

    pub fn max_real(&self, j: usize) -> f64 {
        self.curves[j].iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rows `xi, j, re, im`.
    pub fn rows(&self) -> Vec<(f64, usize, f64, f64)> {
        let mut out = Vec::new();
        for (i, x) in self.xi.iter().enumerate() {
            for (j, c) in self.curves.iter().enumerate() {
                out.push((*x, j, c[i].re, c[i].im));
            }
        }
        out
    }
}

/// Greedy continuation: repeatedly pairs the globally closest
/// (previous value, new eigenvalue) couple.
fn match_step(prev: &[Complex64], next: &[Complex64]) -> Vec<usize> {
    let n = prev.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, p) in prev.iter().enumerate() {
        for (j, q) in next.iter().enumerate() {
            pairs.push(((p - q).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut assign = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut left = n;
    for (_, i, j) in pairs {
        if assign[i] == usize::MAX && !used[j] {
            assign[i] = j;
            used[j] = true;
            left -= 1;
            if left == 0 {
                break;
            }
        }
    }
    assign
}

pub fn eigencurves(wt: &WaveTrain, sys: &RDSystem, xi: &[f64]) -> Result<EigenCurveSet> {
    if xi.len() < 2 {
        return Err(Error::Parameter("need at least two xi points".into()));
    }
    let jc = jacobian_coefficients(sys, wt);
    let spectra: Vec<Vec<Complex64>> = xi
        .par_iter()
        .map(|&x| eigenvalues(&bloch_from_coefficients(wt, sys, x, &jc)))
        .collect::<Result<_>>()?;
    let n = spectra[0].len();
    let mut curves: Vec<Vec<Complex64>> = spectra[0].iter().map(|z| vec![*z]).collect();
    let mut slope = vec![0.0f64; n];
    let mut ambiguities = Vec::new();
    for i in 1..xi.len() {
        let h = (xi[i] - xi[i - 1]).abs();
        let prev: Vec<Complex64> = curves.iter().map(|c| c[i - 1]).collect();
        let assign = match_step(&prev, &spectra[i]);
        for (j, &a) in assign.iter().enumerate() {
            let jump = (spectra[i][a] - prev[j]).norm();
            slope[j] = slope[j].max(jump / h);
            let threshold = 10.0 * h * slope[j];
            let gap = spectra[i]
                .iter()
                .enumerate()
                .filter(|(b, _)| *b != a)
                .map(|(_, z)| (z - prev[j]).norm())
                .fold(f64::INFINITY, f64::min);
            if gap < threshold {
                ambiguities.push(Ambiguity {
                    xi_index: i,
                    curve: j,
                    gap,
                    threshold,
                });
            }
            curves[j].push(spectra[i][a]);
        }
    }
    let mut set = EigenCurveSet {
        xi: xi.to_vec(),
        curves,
        ambiguities,
        k: wt.k,
    };
    let c = set.center();
    let first = (0..n)
        .min_by(|&a, &b| set.curves[a][c].norm().total_cmp(&set.curves[b][c].norm()))
        .unwrap_or(0);
    let mut order: Vec<usize> = (0..n).filter(|&j| j != first).collect();
    order.sort_by(|&a, &b| set.max_real(b).total_cmp(&set.max_real(a)));
    order.insert(0, first);
    let mut rank = vec![0; n];
    for (r, &j) in order.iter().enumerate() {
        rank[j] = r;
    }
    set.curves = order.iter().map(|&j| set.curves[j].clone()).collect();
    for a in &mut set.ambiguities {
        a.curve = rank[a.curve];
    }
    Ok(set)
}

/// Window `|xi| <= LAMBDA2_WINDOW` for the curvature fit of `lambda_1`.
pub const LAMBDA2_WINDOW: f64 = 0.02;
pub const ZERO_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub k: f64,
    pub lambda1_at_zero: f64,
    /// Exactly one eigenvalue within `1e-6` of the origin at `xi = 0`.
    pub simple_zero: bool,
    pub lambda1_second_derivative: f64,
    pub xi0: f64,
    /// `min -Re lambda_1 / xi^2` over `0 < |xi| <= xi0`.
    pub alpha0: f64,
    /// `min -Re lambda_1` over `|xi| > xi0` (infinite when that range is empty).
    pub sigma_outer: f64,
    /// `min -Re lambda_j`, `j >= 2`, over the whole grid.
    pub sigma_rest: f64,
    pub sigma0: f64,
    pub max_re_lambda1: f64,
    pub ambiguities_on_lambda1: usize,
    pub pass: bool,
}

pub fn stability_report(curves: &EigenCurveSet) -> StabilityReport {
    let c = curves.center();
    let l1 = curves.lambda1();
    let xi0 = curves.k.abs() / 4.0;
    let near_zero = curves.curves.iter().filter(|cv| cv[c].norm() <= 1e-6).count();
    let (xs, ys): (Vec<f64>, Vec<f64>) = curves
        .xi
        .iter()
        .zip(l1)
        .filter(|(x, _)| x.abs() <= LAMBDA2_WINDOW + 1e-15)
        .map(|(x, z)| (x * x, z.re))
        .unzip();
    let lambda2 = linear_fit(&xs, &ys).map(|f| 2.0 * f.slope).unwrap_or(f64::NAN);
    let mut alpha0 = f64::INFINITY;
    let mut sigma_outer = f64::INFINITY;
    for (x, z) in curves.xi.iter().zip(l1) {
        if x.abs() <= xi0 {
            if x.abs() > 1e-14 {
                alpha0 = alpha0.min(-z.re / (x * x));
            }
        } else {
            sigma_outer = sigma_outer.min(-z.re);
        }
    }
    let sigma_rest = (1..curves.curves.len())
        .map(|j| -curves.max_real(j))
        .fold(f64::INFINITY, f64::min);
    let sigma0 = sigma_outer.min(sigma_rest);
    let ambiguities_on_lambda1 = curves.ambiguities.iter().filter(|a| a.curve == 0).count();
    let lambda1_at_zero = l1[c].norm();
    let pass = lambda1_at_zero <= ZERO_TOLERANCE && near_zero == 1 && lambda2 < 0.0 && alpha0 > 0.0 && sigma0 > 0.0;
    StabilityReport {
        k: curves.k,
        lambda1_at_zero,
        simple_zero: near_zero == 1,
        lambda1_second_derivative: lambda2,
        xi0,
        alpha0,
        sigma_outer,
        sigma_rest,
        sigma0,
        max_re_lambda1: curves.max_real(0),
        ambiguities_on_lambda1,
        pass,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dispersion {
    pub k: f64,
    pub omega: f64,
    /// `omega / k`; NaN at `k = 0`.
    pub c_p: f64,
    pub c_g: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Centered differences of `omega(k)` with step `h`; `alpha` by Richardson
/// extrapolation of `-Re lambda_1(xi) / xi^2` at `xi = 0.02, 0.01`.
pub fn dispersion_coefficients(sys: &RDSystem, k0: f64, h: f64, modes: usize) -> Result<Dispersion> {
    if !(h > 0.0) {
        return Err(Error::Parameter("finite-difference step must be positive".into()));
    }
    let solve = |k: f64| -> Result<WaveTrain> {
        let guess = WaveTrain::from_guess(sys, k, modes)?;
        solve_wavetrain(sys, k, &guess)
    };
    let w0 = solve(k0)?;
    let wp = solve(k0 + h)?;
    let wm = solve(k0 - h)?;
    let c_g = (wp.omega - wm.omega) / (2.0 * h);
    let beta = -0.5 * (wp.omega - 2.0 * w0.omega + wm.omega) / (h * h);
    let hx = LAMBDA2_WINDOW;
    let xs: Vec<f64> = (0..=8).map(|i| hx * i as f64 / 8.0).collect();
    let curves = eigencurves(&w0, sys, &xs)?;
    let l1 = curves.lambda1();
    let a_h = -l1[8].re / (hx * hx);
    let a_half = -l1[4].re / (hx * hx / 4.0);
    Ok(Dispersion {
        k: k0,
        omega: w0.omega,
        c_p: if k0 != 0.0 { w0.omega / k0 } else { f64::NAN },
        c_g,
        alpha: (4.0 * a_half - a_h) / 3.0,
        beta,
    })
}
