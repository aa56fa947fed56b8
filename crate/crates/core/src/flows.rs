//! The three semigroups: heat flow, Burgers flow (through Cole–Hopf) and the
//! linearized Burgers flow `a_t = a_xx + 2 (a b)_x`, the latter both through
//! the representation formula and by direct time stepping.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::colehopf::{dn_inv_with_derivative, CHContext};
use crate::error::{Error, Result};
use crate::grid::{cumint, front_width, quadrature, tail_mass, Field, Front, Nyquist, DEFAULT_TAIL_TOLERANCE};
use crate::norms::l2_norm;

/// Blow-up threshold of the direct integrator.
pub const BLOWUP_NORM: f64 = 1e6;

#[derive(Debug, Clone)]
pub struct FlowResult {
    pub field: Field,
    /// Snapshots at the requested intermediate times, if any.
    pub trajectory: Vec<Field>,
    pub mass_before: f64,
    pub mass_after: f64,
    pub tail_flag: bool,
}

impl FlowResult {
    pub fn mass_drift(&self) -> f64 {
        (self.mass_after - self.mass_before).abs()
    }
}

/// Heat semigroup `e^{s Lap}`.
///
/// Decaying and smooth periodic data are multiplied by `e^{-xi^2 s}` in
/// Fourier space. Data with a front keep the front in closed form:
/// `l + j e_*(x / w)` flows to `l + j e_*(x / sqrt(w^2 + s))`.
pub fn heat_propagate(f: &Field, s: f64) -> Field {
    assert!(s >= 0.0, "heat flow needs s >= 0, got {s}");
    if s == 0.0 {
        return f.clone();
    }
    match Front::detect(f) {
        None => heat_spectral(f, s),
        Some(front) => heat_with_front(f, &front, s),
    }
}

fn heat_spectral(f: &Field, s: f64) -> Field {
    let grid = f.grid();
    let v = grid.apply_multiplier(f.values(), Nyquist::Real, |xi| {
        Complex64::new((-xi * xi * s).exp(), 0.0)
    });
    Field::from_parts(grid, v, f.time() + s)
}

/// Heat flow of `f` with a prescribed front removed first. Linear in `f`
/// whenever the front depends linearly on it.
fn heat_with_front(f: &Field, front: &Front, s: f64) -> Field {
    let grid = f.grid();
    let rest = f - &front.field(grid);
    let mut out = heat_spectral(&rest, s);
    let moved = Front {
        width: (front.width * front.width + s).sqrt(),
        ..*front
    };
    let values = out
        .values()
        .iter()
        .zip(grid.nodes())
        .map(|(v, x)| v + moved.value(x))
        .collect();
    out = Field::from_parts(grid, values, out.time());
    out
}

/// Burgers flow from a fixed initial snapshot, evaluated at any later time.
///
/// `b(t) = h_x / h` with `h = e^{(t-1)Lap} e^{B0}` and
/// `h_x = e^{(t-1)Lap} (b0 e^{B0})`; the second is a decaying field, so no
/// differentiation of the front is needed.
#[derive(Debug, Clone)]
pub struct BurgersEvolver {
    h0: Field,
    hx0: Field,
    mass: f64,
}

impl BurgersEvolver {
    pub fn new(b0: &Field) -> Result<Self> {
        let ctx = CHContext::new(b0)?;
        Ok(Self {
            hx0: b0 * ctx.exp_int(),
            h0: ctx.exp_int().clone(),
            mass: ctx.mass(),
        })
    }

    /// `h(t)` and `h_x(t)`.
    pub fn heat_pair(&self, t: f64) -> (Field, Field) {
        let s = t - 1.0;
        (heat_propagate(&self.h0, s), heat_propagate(&self.hx0, s))
    }

    pub fn at(&self, t: f64) -> Result<Field> {
        if !(t >= 1.0) {
            return Err(Error::Parameter(format!("Burgers flow needs t >= 1, got {t}")));
        }
        let (h, hx) = self.heat_pair(t);
        Ok(hx.zip_with(&h, |d, v| d / v)?.with_time(t))
    }

    pub fn initial_mass(&self) -> f64 {
        self.mass
    }
}

/// `phi^B_t b0 = N^{-1} e^{(t-1)Lap} N b0`, with `b0` given at time 1.
pub fn burgers_flow(b0: &Field, t: f64) -> Result<FlowResult> {
    burgers_trajectory(b0, &[], t)
}

/// As [`burgers_flow`], also recording snapshots at `times`.
pub fn burgers_trajectory(b0: &Field, times: &[f64], t: f64) -> Result<FlowResult> {
    let ev = BurgersEvolver::new(b0)?;
    let field = ev.at(t)?;
    let trajectory = times.iter().map(|&s| ev.at(s)).collect::<Result<Vec<_>>>()?;
    Ok(FlowResult {
        mass_before: ev.initial_mass(),
        mass_after: quadrature(&field),
        tail_flag: tail_mass(&field) > DEFAULT_TAIL_TOLERANCE,
        field,
        trajectory,
    })
}

/// Linearized flow `Phi_b(t-1) g` through the representation formula
/// `(dN|_{b(t)})^{-1} e^{(t-1)Lap} dN|_{b0} g`.
pub fn linflow_rep(b0: &Field, g: &Field, t: f64) -> Result<Field> {
    LinearFlow::new(b0, t)?.apply(g)
}

/// `Phi_b(t-1)` with the Burgers snapshots precomputed, for repeated use.
#[derive(Debug, Clone)]
pub struct LinearFlow {
    start: CHContext,
    end: CHContext,
    t: f64,
}

impl LinearFlow {
    pub fn new(b0: &Field, t: f64) -> Result<Self> {
        let ev = BurgersEvolver::new(b0)?;
        let bt = ev.at(t)?;
        Ok(Self {
            start: CHContext::new(b0)?,
            end: CHContext::new(&bt)?,
            t,
        })
    }

    pub fn b_end(&self) -> &Field {
        self.end.b()
    }

    pub fn apply(&self, g: &Field) -> Result<Field> {
        let prim = cumint(g)?;
        Ok(self.apply_with_primitive(g, &prim))
    }

    fn apply_with_primitive(&self, g: &Field, prim: &Field) -> Field {
        let s = self.t - 1.0;
        let e0 = self.start.exp_int();
        let b0 = self.start.b();
        // dN g = e^{B0} G and its derivative e^{B0} (g + b0 G), both flowed.
        let n = e0 * prim;
        let nx = e0 * &(g + &(b0 * prim));
        // dN g rises from 0 to (int g) e^{int b0}; that front is linear in g.
        let front = Front {
            left: 0.0,
            jump: prim.right() * e0.right(),
            width: front_width(g.grid()),
        };
        let h = if s == 0.0 { n } else { heat_with_front(&n, &front, s) };
        let hx = if s == 0.0 { nx } else { heat_spectral(&nx, s) };
        dn_inv_with_derivative(&self.end, &h, &hx).with_time(self.t)
    }
}

/// Largest step accepted by [`linflow_direct`]: `0.5 dx / max |2 b0|`
/// (the advection speed of `2 (a b)_x` is `2 b`).
pub fn direct_step_bound(b0: &Field) -> f64 {
    let speed = 2.0 * b0.max_abs();
    if speed == 0.0 {
        f64::INFINITY
    } else {
        0.5 * b0.grid().spacing() / speed
    }
}

/// Method-of-lines oracle for `a_t = a_xx + 2 (a b)_x`: integrating factor
/// for the diffusion, Heun (RK2) for the advection, exact `b(s)` at every
/// stage.
pub fn linflow_direct(b0: &Field, g: &Field, t: f64, dt: f64) -> Result<Field> {
    if !(t >= 1.0) {
        return Err(Error::Parameter(format!("final time must be >= 1, got {t}")));
    }
    let bound = direct_step_bound(b0);
    if !(dt > 0.0 && dt <= bound) {
        return Err(Error::Parameter(format!("step dt={dt} outside (0, {bound:.3e}]")));
    }
    let steps = ((t - 1.0) / dt).round() as usize;
    if ((steps as f64) * dt - (t - 1.0)).abs() > 1e-9 * t {
        return Err(Error::Parameter(format!(
            "dt={dt} does not divide the interval [1, {t}]"
        )));
    }
    let ev = BurgersEvolver::new(b0)?;
    let grid = g.grid().clone();
    let decay = |v: &[f64]| grid.apply_multiplier(v, Nyquist::Real, |xi| Complex64::new((-xi * xi * dt).exp(), 0.0));
    let advect = |a: &[f64], b: &Field| -> Vec<f64> {
        let ab: Vec<f64> = a.iter().zip(b.values()).map(|(x, y)| 2.0 * x * y).collect();
        grid.apply_multiplier(&ab, Nyquist::Zero, |xi| Complex64::new(0.0, xi))
    };
    let mut a = g.values().to_vec();
    let mut b_now = b0.clone();
    for k in 0..steps {
        let s_next = 1.0 + (k + 1) as f64 * dt;
        let b_next = ev.at(s_next)?;
        let n0 = advect(&a, &b_now);
        let pred: Vec<f64> = a.iter().zip(&n0).map(|(x, n)| x + dt * n).collect();
        let pred = decay(&pred);
        let n1 = advect(&pred, &b_next);
        let base: Vec<f64> = a.iter().zip(&n0).map(|(x, n)| x + 0.5 * dt * n).collect();
        let base = decay(&base);
        a = base.iter().zip(&n1).map(|(x, n)| x + 0.5 * dt * n).collect();
        let norm = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !norm.is_finite() || norm > BLOWUP_NORM {
            return Err(Error::Unstable { time: s_next, norm });
        }
        b_now = b_next;
    }
    Field::new(&grid, a, t)
}

/// Richardson extrapolation `(4 a_{dt/2} - a_dt) / 3` of [`linflow_direct`].
pub fn linflow_direct_richardson(b0: &Field, g: &Field, t: f64, dt: f64) -> Result<Field> {
    let coarse = linflow_direct(b0, g, t, dt)?;
    let fine = linflow_direct(b0, g, t, dt / 2.0)?;
    Ok(&fine.scale(4.0 / 3.0) - &coarse.scale(1.0 / 3.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothingSample {
    pub t: f64,
    pub value: f64,
}

fn check_times(times: &[f64]) -> Result<()> {
    if let Some(&t) = times.iter().find(|&&t| !(t > 1.0 && t <= 2.0)) {
        return Err(Error::Parameter(format!("smoothing times must lie in (1, 2], got {t}")));
    }
    Ok(())
}

/// `(t-1)^{k/2} ||d_x^k Phi_b(t-1) a0||_{L2}` for a fixed `a0`.
pub fn smoothing_probe(b0: &Field, a0: &Field, k: u32, times: &[f64]) -> Result<Vec<SmoothingSample>> {
    check_times(times)?;
    times
        .par_iter()
        .map(|&t| {
            let mut u = linflow_rep(b0, a0, t)?;
            for _ in 0..k {
                u = u.front_derivative(1);
            }
            Ok(SmoothingSample {
                t,
                value: (t - 1.0).powf(k as f64 / 2.0) * l2_norm(&u),
            })
        })
        .collect()
}

/// `(t-1)^{3/4} ||Phi_b(t-1) d_x a0||_{L2}` for a fixed `a0`.
pub fn interpolation_probe(b0: &Field, a0: &Field, times: &[f64]) -> Result<Vec<SmoothingSample>> {
    check_times(times)?;
    let da = a0.front_derivative(1);
    times
        .par_iter()
        .map(|&t| {
            let u = linflow_rep(b0, &da, t)?;
            Ok(SmoothingSample {
                t,
                value: (t - 1.0).powf(0.75) * l2_norm(&u),
            })
        })
        .collect()
}

/// Operator norms behind the smoothing estimates, at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorSmoothing {
    pub t: f64,
    /// `(t-1)^{1/2} ||d_x Phi_b(t-1)||_{L2 -> L2}`
    pub gradient: f64,
    /// `(t-1)^{3/4} ||Phi_b(t-1) d_x||_{L1 -> L2}`
    pub interpolation: f64,
}

/// Nodes kept away from the box edge when probing with point masses.
const PROBE_MARGIN: f64 = 0.25;

/// Measures the two smoothing rates as operator norms of the discretized flow.
///
/// The `L2 -> L2` norm of `d_x Phi` is the top singular value of its matrix
/// (power iteration on `M^T M`). The `L1 -> L2` norm of `Phi d_x` is attained
/// on point masses, so it is the largest `L2` norm of `Phi d_x (e_j / dx)`
/// over nodes `j` with `|x_j| <= window`.
pub fn smoothing_operator_norms(b0: &Field, times: &[f64], window: f64) -> Result<Vec<OperatorSmoothing>> {
    check_times(times)?;
    let grid = b0.grid().clone();
    let n = grid.len();
    let dx = grid.spacing();
    let lo = -(1.0 - PROBE_MARGIN) * grid.half_width();
    let hi = (1.0 - PROBE_MARGIN) * grid.half_width();
    let cols: Vec<usize> = (0..n).filter(|&j| (lo..=hi).contains(&grid.node(j))).collect();
    let delta = |j: usize| {
        let mut v = vec![0.0; n];
        v[j] = 1.0 / dx;
        Field::from_parts(&grid, v, 1.0)
    };
    times
        .iter()
        .map(|&t| {
            let flow = LinearFlow::new(b0, t)?;
            let s = t - 1.0;
            let columns: Vec<Vec<f64>> = cols
                .par_iter()
                .map(|&j| {
                    let d = delta(j);
                    let prim = crate::grid::cumint_unchecked(&d);
                    flow.apply_with_primitive(&d, &prim).front_derivative(1).into_values()
                })
                .collect();
            // columns hold d_x Phi (e_j / dx); the operator on grid values is dx times that
            let m = DMatrix::from_fn(n, columns.len(), |i, c| dx * columns[c][i]);
            let gradient = s.sqrt() * top_singular_value(&m);
            let interpolation = cols
                .par_iter()
                .filter(|&&j| grid.node(j).abs() <= window)
                .map(|&j| {
                    let d = delta(j).spectral_derivative(1);
                    let prim = crate::grid::cumint_unchecked(&d);
                    l2_norm(&flow.apply_with_primitive(&d, &prim))
                })
                .reduce(|| 0.0, f64::max);
            Ok(OperatorSmoothing {
                t,
                gradient,
                interpolation: s.powf(0.75) * interpolation,
            })
        })
        .collect()
}

/// Largest singular value by power iteration on `M^T M`.
fn top_singular_value(m: &DMatrix<f64>) -> f64 {
    let mut v = nalgebra::DVector::from_fn(m.ncols(), |i, _| 1.0 + ((i * 7919) % 101) as f64 / 101.0);
    v /= v.norm();
    let mut sigma = 0.0;
    for _ in 0..200 {
        let w = m.tr_mul(&(m * &v));
        let next = w.norm().sqrt();
        v = w / (next * next);
        if (next - sigma).abs() <= 1e-10 * next {
            return next;
        }
        sigma = next;
    }
    sigma
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colehopf::{ch_forward, dn};
    use crate::grid::{derivative, make_grid, SpectralGrid};
    use crate::norms::{h22_norm, l1_norm, linf_norm};
    use crate::profiles::{burgers_selfsimilar, f_star, BurgersParams};
    use std::f64::consts::E;

    fn grid() -> SpectralGrid {
        make_grid(40.0, 1024).unwrap()
    }

    fn gauss_dx(g: &SpectralGrid) -> Field {
        Field::from_fn(g, |x| -x / 2.0 * (-x * x / 4.0).exp())
    }

    fn rel_l2(a: &Field, b: &Field) -> f64 {
        l2_norm(&(a - b)) / l2_norm(b)
    }

    fn fstar(a: f64, g: &SpectralGrid) -> Field {
        f_star(&BurgersParams::from_amplitude(a).unwrap(), g)
    }

    #[test]
    fn heat_of_gaussian() {
        let g = grid();
        let f = Field::from_fn(&g, |x| (-x * x / 4.0).exp());
        assert_eq!(heat_propagate(&f, 0.0).values(), f.values());
        let s = 3.0;
        let u = heat_propagate(&f, s);
        let exact = Field::from_fn(&g, |x| (-x * x / (4.0 * (1.0 + s))).exp() / (1.0 + s).sqrt());
        assert!((&u - &exact).max_abs() < 1e-8);
        assert!((quadrature(&u) - quadrature(&f)).abs() < 1e-12);
        assert!((u.time() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn heat_of_a_front() {
        let g = grid();
        let f = Field::from_fn(&g, |x| 2.0 + 3.0 * crate::special::estar(x / 0.5));
        let u = heat_propagate(&f, 2.0);
        let exact = Field::from_fn(&g, |x| 2.0 + 3.0 * crate::special::estar(x / 2.25f64.sqrt()));
        assert!((&u - &exact).max_abs() < 1e-10);
        let sine = Field::from_fn(&make_grid(std::f64::consts::PI, 64).unwrap(), f64::sin);
        let u = heat_propagate(&sine, 0.5);
        let exact = sine.map(|v| v * (-0.5f64).exp());
        assert!((&u - &exact).max_abs() < 1e-13);
    }

    #[test]
    fn burgers_flow_keeps_self_similarity() {
        let g = grid();
        let p = BurgersParams::from_amplitude(1.0).unwrap();
        let b0 = f_star(&p, &g);
        for t in [2.0, 4.0, 16.0] {
            let r = burgers_flow(&b0, t).unwrap();
            let exact = burgers_selfsimilar(&p, t, &g).unwrap();
            assert!((&r.field - &exact).max_abs() < 1e-7);
            assert!(r.mass_drift() < 1e-8);
            assert!(!r.tail_flag);
        }
    }

    #[test]
    fn burgers_decay_bounds() {
        let g = make_grid(120.0, 4096).unwrap();
        for a in [1.0, E * E - 1.0] {
            let b0 = fstar(a, &g);
            let m = l1_norm(&b0);
            let times = [1.0, 4.0, 16.0, 64.0];
            let r = burgers_trajectory(&b0, &times, 64.0).unwrap();
            let mut grad = Vec::new();
            for (b, t) in r.trajectory.iter().zip(times) {
                assert!(t.sqrt() * linf_norm(b) <= m * m.exp());
                grad.push(t.sqrt() * l1_norm(&derivative(b, 1).unwrap()));
            }
            let (lo, hi) = grad.iter().fold((f64::MAX, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
            assert!(hi / lo < 2.0, "{grad:?}");
        }
    }

    #[test]
    fn nonlinear_diagram_commutes() {
        let g = grid();
        let b0 = Field::from_fn(&g, |x| {
            0.8 * (-(x - 1.0).powi(2)).exp() + 0.3 * (-(x + 2.0).powi(2) / 3.0).exp()
        });
        let t = 3.0;
        let lhs = ch_forward(&burgers_flow(&b0, t).unwrap().field).unwrap();
        let rhs = heat_propagate(&ch_forward(&b0).unwrap(), t - 1.0);
        assert!((&lhs - &rhs).max_abs() / rhs.max_abs() < 1e-8);
    }

    #[test]
    fn representation_reduces_to_heat() {
        let g = grid();
        let a = gauss_dx(&g);
        let rep = linflow_rep(&Field::zeros(&g), &a, 2.5).unwrap();
        assert!((&rep - &heat_propagate(&a, 1.5)).max_abs() < 1e-10);
        let bump = Field::from_fn(&g, |x| (-(x - 0.5).powi(2)).exp());
        let out = linflow_rep(&fstar(1.0, &g), &bump, 2.0).unwrap();
        assert!((quadrature(&out) - quadrature(&bump)).abs() < 1e-8);
    }

    #[test]
    fn representation_matches_direct_integration() {
        let g = grid();
        let b0 = fstar(1.0, &g);
        let a = gauss_dx(&g);
        let rep = linflow_rep(&b0, &a, 2.0).unwrap();
        let direct = linflow_direct(&b0, &a, 2.0, 1e-3).unwrap();
        assert!(rel_l2(&rep, &direct) < 1e-4, "{}", rel_l2(&rep, &direct));
    }

    #[test]
    fn direct_integration_of_heat() {
        let g = grid();
        let f = Field::from_fn(&g, |x| (-x * x / 4.0).exp());
        let u = linflow_direct(&Field::zeros(&g), &f, 2.0, 1e-3).unwrap();
        let exact = Field::from_fn(&g, |x| (-x * x / 8.0).exp() / 2f64.sqrt());
        assert!((&u - &exact).max_abs() < 1e-6);
        assert!(linflow_direct(&fstar(1.0, &g), &f, 2.0, 1.0).is_err());
        assert!(linflow_direct(&Field::zeros(&g), &f, 2.0, 0.3).is_err());
    }

    #[test]
    fn direct_integration_is_second_order() {
        let g = grid();
        let b0 = fstar(2.0, &g);
        let a = gauss_dx(&g);
        let t = 1.5;
        let runs: Vec<Field> = [4e-3, 2e-3, 1e-3]
            .iter()
            .map(|&dt| linflow_direct(&b0, &a, t, dt).unwrap())
            .collect();
        let limit = &runs[2].scale(4.0 / 3.0) - &runs[1].scale(1.0 / 3.0);
        let e1 = l2_norm(&(&runs[0] - &limit));
        let e2 = l2_norm(&(&runs[1] - &limit));
        let ratio = e1 / e2;
        assert!((3.0..5.5).contains(&ratio), "ratio {ratio}");
        let rich = linflow_direct_richardson(&b0, &a, t, 2e-3).unwrap();
        assert!(rel_l2(&rich, &linflow_rep(&b0, &a, t).unwrap()) < 1e-6);
    }

    #[test]
    fn direct_flow_differentiates_burgers() {
        // (phi^B(b0 + e g) - phi^B(b0 - e g)) / 2e -> Phi_b g
        let g = grid();
        let b0 = fstar(1.0, &g);
        let a = gauss_dx(&g);
        let t = 2.0;
        let lin = linflow_direct(&b0, &a, t, 1e-3).unwrap();
        let errs: Vec<f64> = [1e-3, 5e-4]
            .iter()
            .map(|&e| {
                let plus = burgers_flow(&(&b0 + &a.scale(e)), t).unwrap().field;
                let minus = burgers_flow(&(&b0 - &a.scale(e)), t).unwrap().field;
                rel_l2(&(&plus - &minus).scale(0.5 / e), &lin)
            })
            .collect();
        assert!(errs.iter().all(|&e| e < 1e-4), "{errs:?}");
    }

    #[test]
    fn linear_flow_is_a_semigroup() {
        let g = grid();
        let b0 = fstar(1.0, &g);
        let a = gauss_dx(&g);
        let (t1, t2) = (1.7, 3.0);
        let a1 = linflow_rep(&b0, &a, t1).unwrap();
        let b1 = burgers_flow(&b0, t1).unwrap().field;
        let two_steps = linflow_rep(&b1, &a1, 1.0 + t2 - t1).unwrap();
        let one_step = linflow_rep(&b0, &a, t2).unwrap();
        assert!(rel_l2(&two_steps, &one_step) < 1e-6);
    }

    #[test]
    fn dn_image_solves_heat() {
        let g = grid();
        let b0 = fstar(1.0, &g);
        let a = gauss_dx(&g);
        let ev = BurgersEvolver::new(&b0).unwrap();
        let h_at = |t: f64| {
            let ctx = CHContext::new(&ev.at(t).unwrap()).unwrap();
            dn(&ctx, &linflow_rep(&b0, &a, t).unwrap()).unwrap()
        };
        let (t, dt) = (2.0, 1e-4);
        let ht = (&h_at(t + dt) - &h_at(t - dt)).scale(0.5 / dt);
        let hxx = derivative(&h_at(t), 2).unwrap();
        assert!(l2_norm(&(&ht - &hxx)) < 1e-4);
    }

    #[test]
    fn l1_bounds_of_linear_flow() {
        let g = grid();
        let b0 = fstar(1.0, &g);
        let a = Field::from_fn(&g, |x| (-x * x).exp() * (1.0 + x));
        for (j, k) in [(0u32, 0u32), (1, 0), (0, 1), (1, 1)] {
            let mut a0 = a.clone();
            for _ in 0..k {
                a0 = derivative(&a0, 1).unwrap();
            }
            let vals: Vec<f64> = (1..=6)
                .map(|m| {
                    let s = 2f64.powi(-m);
                    let mut u = linflow_rep(&b0, &a0, 1.0 + s).unwrap();
                    for _ in 0..j {
                        u = u.front_derivative(1);
                    }
                    s.powf((j + k) as f64 / 2.0) * l1_norm(&u)
                })
                .collect();
            assert!(vals.iter().all(|v| v.is_finite() && *v < 10.0), "{j},{k}: {vals:?}");
        }
    }

    #[test]
    fn weighted_norm_commutes_with_flow() {
        let g = make_grid(60.0, 2048).unwrap();
        let b0 = f_star(&BurgersParams::from_phase_offset(2.0).unwrap(), &g);
        let corpus = [
            gauss_dx(&g),
            Field::from_fn(&g, |x| {
                (-(x - 1.0).powi(2) / 2.0).exp() - (-(x + 1.0).powi(2) / 2.0).exp()
            }),
        ];
        for big_t in [2.0, 4.0] {
            for a in &corpus {
                let r = h22_norm(&linflow_rep(&b0, a, big_t).unwrap()) / h22_norm(a);
                assert!(r.is_finite() && r < 50.0, "T={big_t}: {r}");
            }
        }
    }

    #[test]
    fn smoothing_tables() {
        let g = make_grid(20.0, 1024).unwrap();
        let b0 = fstar(1.0, &g);
        let a0 = gauss_dx(&g);
        let times: Vec<f64> = (1..=8).map(|m| 1.0 + 2f64.powi(-m)).collect();
        let k0 = smoothing_probe(&b0, &a0, 0, &times).unwrap();
        assert!(k0.iter().all(|s| s.value <= 2.0 * l2_norm(&a0)));
        let k1 = smoothing_probe(&b0, &a0, 1, &times).unwrap();
        assert!(k1.iter().all(|s| s.value.is_finite() && s.value < 1.0));
        let ip = interpolation_probe(&b0, &a0, &times).unwrap();
        assert!(ip.iter().all(|s| s.value.is_finite() && s.value < 1.0));
        assert!(smoothing_probe(&b0, &a0, 1, &[3.0]).is_err());
    }

    #[test]
    fn operator_smoothing_rates_are_flat() {
        let g = make_grid(10.0, 512).unwrap();
        let b0 = fstar(1.0, &g);
        let times: Vec<f64> = (1..=4).map(|m| 1.0 + 2f64.powi(-m)).collect();
        let rows = smoothing_operator_norms(&b0, &times, 4.0).unwrap();
        let spread = |f: fn(&OperatorSmoothing) -> f64| {
            let v: Vec<f64> = rows.iter().map(f).collect();
            v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::MAX, f64::min)
        };
        assert!(spread(|r| r.gradient) < 2.0);
        assert!(spread(|r| r.interpolation) < 2.0, "{rows:?}");
        // heat-flow value of the gradient rate is (2e)^{-1/2}
        let heat = smoothing_operator_norms(&Field::zeros(&g), &times[..1], 4.0).unwrap();
        assert!((heat[0].gradient - (2.0 * E).sqrt().recip()).abs() < 0.02, "{heat:?}");
    }
}
