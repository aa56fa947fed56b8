//! Cole–Hopf map for `b_t = b_xx + (b^2)_x` and its linearization.
//!
//! ```text
//! N(b)        = exp(B),                 B = int_{-X}^x b
//! N^{-1}(h)   = h_x / h
//! dN|_b a     = e^{B} int_{-X}^x a
//! dN|_b^{-1} h = e^{-B} (h_x - b h)
//! ```
//!
//! `N` takes Burgers flow to heat flow, `dN|_b` takes the linearized flow
//! `a_t = a_xx + 2 (a b)_x` to heat flow.

use crate::error::{Error, Result};
use crate::flows::heat_propagate;
use crate::grid::{cumint, quadrature, Field};
use crate::norms::{l1_norm, l2_norm, linf_norm};

/// Allowed negativity of a Burgers snapshot, relative to its maximum.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-10;

/// A Burgers snapshot `b` with `B = int b` and `e^{+-B}` precomputed.
#[derive(Debug, Clone)]
pub struct CHContext {
    b: Field,
    cumulative: Field,
    exp_pos: Field,
    exp_neg: Field,
}

impl CHContext {
    pub fn new(b: &Field) -> Result<Self> {
        check_nonnegative(b)?;
        let cumulative = cumint(b)?;
        Ok(Self {
            b: b.clone(),
            exp_pos: cumulative.map(f64::exp),
            exp_neg: cumulative.map(|v| (-v).exp()),
            cumulative,
        })
    }

    pub fn b(&self) -> &Field {
        &self.b
    }

    pub fn cumulative(&self) -> &Field {
        &self.cumulative
    }

    /// `e^{B} = N(b)`.
    pub fn exp_int(&self) -> &Field {
        &self.exp_pos
    }

    /// `e^{-B}`.
    pub fn exp_neg_int(&self) -> &Field {
        &self.exp_neg
    }

    /// Total mass `int b`.
    pub fn mass(&self) -> f64 {
        quadrature(&self.b)
    }
}

fn check_nonnegative(b: &Field) -> Result<()> {
    let allowed = NEGATIVITY_TOLERANCE * b.max_abs().max(1.0);
    let min = b.min();
    if min < -allowed {
        return Err(Error::Domain(format!(
            "b takes the value {min:.3e} < 0; the map needs b >= 0"
        )));
    }
    Ok(())
}

/// `h = N(b) = exp(int b)`.
pub fn ch_forward(b: &Field) -> Result<Field> {
    Ok(CHContext::new(b)?.exp_pos)
}

/// `b = N^{-1}(h) = h_x / h`.
pub fn ch_inverse(h: &Field) -> Result<Field> {
    if let Some(i) = h.values().iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Domain(format!(
            "h = {} <= 0 at node {i}: singular quotient h_x/h",
            h.values()[i]
        )));
    }
    let hx = h.front_derivative(1);
    Ok(hx.zip_with(h, |d, v| d / v)?.with_time(h.time()))
}

/// `dN|_b a0 = e^{B} int a0`.
pub fn dn(ctx: &CHContext, a0: &Field) -> Result<Field> {
    let prim = cumint(a0)?;
    Ok((ctx.exp_int() * &prim).with_time(a0.time()))
}

/// `(dN|_b)^{-1} h = e^{-B} (h_x - b h)`.
pub fn dn_inv(ctx: &CHContext, h: &Field) -> Result<Field> {
    let hx = h.front_derivative(1);
    Ok(dn_inv_with_derivative(ctx, h, &hx).with_time(h.time()))
}

/// `dn_inv` when `h_x` is already known (e.g. as a heat flow of its own).
pub(crate) fn dn_inv_with_derivative(ctx: &CHContext, h: &Field, hx: &Field) -> Field {
    let b = ctx.b().values();
    let e = ctx.exp_neg_int().values();
    let values = (0..h.len())
        .map(|i| e[i] * (hx.values()[i] - b[i] * h.values()[i]))
        .collect();
    Field::new(h.grid(), values, h.time()).expect("finite inputs give finite output")
}

/// Commutator `S a0 = d_x Phi_b(t-1) a0 - Phi_b(t-1) d_x a0`, where `b0`, `bt`
/// are snapshots of one Burgers flow at times 1 and `t`.
///
/// With `A0 = int a0`, `P = e^{(t-1)Lap}(e^{B0} A0)`, `Q = e^{(t-1)Lap}(b0 e^{B0} A0)`:
///
/// ```text
/// S a0 = e^{-Bt} [ -bt P_x + (bt^2 - bt_x) P + Q_x - bt Q ]
/// ```
///
/// No derivative of `a0` appears.
pub fn commutator_s(b0: &Field, bt: &Field, a0: &Field, t: f64) -> Result<Field> {
    if !(t > 1.0) {
        return Err(Error::Parameter(format!("commutator needs t > 1, got {t}")));
    }
    let ctx0 = CHContext::new(b0)?;
    let ctxt = CHContext::new(bt)?;
    let n0 = dn(&ctx0, a0)?;
    let p = heat_propagate(&n0, t - 1.0);
    let q = heat_propagate(&(b0 * &n0), t - 1.0);
    let px = p.front_derivative(1);
    let qx = q.spectral_derivative(1);
    let btx = bt.front_derivative(1);
    let b = bt.values();
    let values = (0..a0.len())
        .map(|i| {
            let (pi, qi) = (p.values()[i], q.values()[i]);
            ctxt.exp_neg_int().values()[i]
                * (-b[i] * px.values()[i] + (b[i] * b[i] - btx.values()[i]) * pi + qx.values()[i] - b[i] * qi)
        })
        .collect();
    Field::new(a0.grid(), values, t)
}

/// `||a||_{L^p} + ||a||_{L^1}`, the norm on `L^p ∩ L^1`. `p = inf` allowed.
pub fn lp_cap_l1(a: &Field, p: f64) -> f64 {
    l1_norm(a) + lp(a, p)
}

fn lp(a: &Field, p: f64) -> f64 {
    if p.is_infinite() {
        linf_norm(a)
    } else if p == 2.0 {
        l2_norm(a)
    } else if p == 1.0 {
        l1_norm(a)
    } else {
        (a.grid().spacing() * a.values().iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
    }
}

/// `||d_x dN|_b a0||_{L^p} / ||a0||_{L^p ∩ L^1}`.
pub fn dn_operator_ratio(ctx: &CHContext, a0: &Field, p: f64) -> Result<f64> {
    let d = dn(ctx, a0)?.front_derivative(1);
    Ok(lp(&d, p) / lp_cap_l1(a0, p))
}

/// `||dN^{-1} h||_{L^1} / (||h_x||_{L^1} + ||h||_{L^inf})`.
pub fn dn_inv_operator_ratio(ctx: &CHContext, h: &Field) -> Result<f64> {
    let hx = h.front_derivative(1);
    let out = dn_inv_with_derivative(ctx, h, &hx);
    Ok(l1_norm(&out) / (l1_norm(&hx) + linf_norm(h)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::{burgers_flow, linflow_rep};
    use crate::grid::{make_grid, SpectralGrid};
    use crate::profiles::{f_star, BurgersParams};
    use crate::special::{estar, estar_prime};
    use std::f64::consts::E;

    fn grid() -> SpectralGrid {
        make_grid(40.0, 1024).unwrap()
    }

    fn max_err(a: &Field, b: &Field) -> f64 {
        (a - b).max_abs()
    }

    fn gauss_dx(g: &SpectralGrid, c: f64) -> Field {
        Field::from_fn(g, |x| -(x - c) / 2.0 * (-(x - c).powi(2) / 4.0).exp())
    }

    #[test]
    fn forward_map() {
        let g = grid();
        let one = ch_forward(&Field::zeros(&g)).unwrap();
        assert!(one.values().iter().all(|&v| v == 1.0));
        for a in [1.0, E * E - 1.0] {
            let p = BurgersParams::from_amplitude(a).unwrap();
            let h = ch_forward(&f_star(&p, &g)).unwrap();
            let exact = Field::from_fn(&g, |z| 1.0 + a * estar(z));
            assert!(max_err(&h, &exact) < 1e-8 * (1.0 + a));
            assert!((h.right() - (1.0 + a)).abs() < 1e-8 * (1.0 + a));
            assert!(h.min() >= 1.0 - 1e-10);
        }
        let neg = Field::from_fn(&g, |x| -(-x * x).exp());
        assert!(matches!(ch_forward(&neg), Err(Error::Domain(_))));
    }

    #[test]
    fn context_invariants() {
        let g = grid();
        let b = f_star(&BurgersParams::from_amplitude(3.0).unwrap(), &g);
        let ctx = CHContext::new(&b).unwrap();
        assert!((ctx.cumulative().right() - quadrature(&b)).abs() < 1e-10);
        assert!(ctx.exp_int().min() >= 1.0 - 1e-10);
    }

    #[test]
    fn inverse_map() {
        let g = grid();
        for a in [1.0, E * E - 1.0] {
            let p = BurgersParams::from_amplitude(a).unwrap();
            let f = f_star(&p, &g);
            let back = ch_inverse(&ch_forward(&f).unwrap()).unwrap();
            assert!(max_err(&back, &f) < 1e-10, "{}", max_err(&back, &f));
            let h = Field::from_fn(&g, |z| 1.0 + a * estar(z));
            assert!(max_err(&ch_inverse(&h).unwrap(), &f) < 1e-8);
        }
        let c = ch_inverse(&Field::constant(&g, 2.5)).unwrap();
        assert!(c.max_abs() < 1e-14);
        assert!(ch_inverse(&Field::zeros(&g)).is_err());
    }

    #[test]
    fn linearization_at_zero() {
        let g = grid();
        let ctx = CHContext::new(&Field::zeros(&g)).unwrap();
        let a = Field::from_fn(&g, estar_prime);
        let d = dn(&ctx, &a).unwrap();
        assert!(max_err(&d, &Field::from_fn(&g, estar)) < 1e-8);
        let h = gauss_dx(&g, 0.3);
        let inv = dn_inv(&ctx, &h).unwrap();
        assert!(max_err(&inv, &derivative_of(&h)) < 1e-12);
    }

    fn derivative_of(f: &Field) -> Field {
        crate::grid::derivative(f, 1).unwrap()
    }

    #[test]
    fn linearization_is_linear_and_invertible() {
        let g = grid();
        let b = f_star(&BurgersParams::from_amplitude(1.0).unwrap(), &g);
        let ctx = CHContext::new(&b).unwrap();
        let a = gauss_dx(&g, 0.7);
        let d1 = dn(&ctx, &a).unwrap();
        let d2 = dn(&ctx, &a.scale(2.0)).unwrap();
        assert!(max_err(&d2, &d1.scale(2.0)) < 1e-12);
        assert!(d1.right().abs() < 1e-8);
        let back = dn_inv(&ctx, &d1).unwrap();
        assert!(max_err(&back, &a) < 1e-9, "{}", max_err(&back, &a));
        // a non-mean-zero input leaves a front behind and still inverts
        let bump = Field::from_fn(&g, |x| (-(x - 1.0).powi(2)).exp());
        let back = dn_inv(&ctx, &dn(&ctx, &bump).unwrap()).unwrap();
        assert!(max_err(&back, &bump) < 1e-9);
    }

    #[test]
    fn first_commutator() {
        // d_x dN a - dN d_x a = b dN a
        let g = grid();
        let b = f_star(&BurgersParams::from_amplitude(2.0).unwrap(), &g);
        let ctx = CHContext::new(&b).unwrap();
        let a = Field::from_fn(&g, |x| (-(x + 0.5).powi(2) / 2.0).exp());
        let d = dn(&ctx, &a).unwrap();
        let lhs = &d.front_derivative(1) - &dn(&ctx, &derivative_of(&a)).unwrap();
        assert!(max_err(&lhs, &(&b * &d)) < 1e-8);
    }

    #[test]
    fn second_commutator() {
        // [d_x, dN^{-1}] h = e^{-B} (-b h_x - b_x h + b^2 h)
        let g = grid();
        let b = f_star(&BurgersParams::from_amplitude(2.0).unwrap(), &g);
        let ctx = CHContext::new(&b).unwrap();
        let h = Field::from_fn(&g, |x| 1.0 + estar(x - 1.0) + (-x * x).exp());
        let hx = h.front_derivative(1);
        let lhs = &dn_inv(&ctx, &h).unwrap().front_derivative(1) - &dn_inv(&ctx, &hx).unwrap();
        let bx = derivative_of(&b);
        let rhs = Field::new(
            &g,
            (0..g.len())
                .map(|i| {
                    let (bi, hi) = (b.values()[i], h.values()[i]);
                    ctx.exp_neg_int().values()[i] * (-bi * hx.values()[i] - bx.values()[i] * hi + bi * bi * hi)
                })
                .collect(),
            1.0,
        )
        .unwrap();
        assert!(max_err(&lhs, &rhs) < 1e-8, "{}", max_err(&lhs, &rhs));
    }

    #[test]
    fn commutator_s_vanishes_without_b() {
        let g = grid();
        let z = Field::zeros(&g);
        let s = commutator_s(&z, &z, &gauss_dx(&g, 0.0), 2.0).unwrap();
        assert!(s.max_abs() < 1e-14);
        assert!(commutator_s(&z, &z, &z, 1.0).is_err());
    }

    #[test]
    fn commutator_s_is_the_commutator() {
        let g = grid();
        let b0 = f_star(&BurgersParams::from_amplitude(1.0).unwrap(), &g);
        let t = 2.0;
        let bt = burgers_flow(&b0, t).unwrap().field;
        for a0 in [
            gauss_dx(&g, 0.5),
            Field::from_fn(&g, |x| (-(x - 1.0).powi(2) / 3.0).exp()),
        ] {
            let lhs = &linflow_rep(&b0, &a0, t).unwrap().front_derivative(1)
                - &linflow_rep(&b0, &derivative_of(&a0), t).unwrap();
            let s = commutator_s(&b0, &bt, &a0, t).unwrap();
            assert!(l2_norm(&(&lhs - &s)) < 1e-6, "{}", l2_norm(&(&lhs - &s)));
        }
    }

    #[test]
    fn commutator_s_gains_a_derivative() {
        // ||S a0||_{L2} / ||a0||_{L2 ∩ L1} stays bounded over increasingly oscillatory a0
        let g = grid();
        let b0 = f_star(&BurgersParams::from_amplitude(1.0).unwrap(), &g);
        let bt = burgers_flow(&b0, 2.0).unwrap().field;
        let ratios: Vec<f64> = [1.0, 4.0, 16.0]
            .iter()
            .map(|&k| {
                let a = Field::from_fn(&g, |x| (k * x).sin() * (-x * x / 4.0).exp());
                l2_norm(&commutator_s(&b0, &bt, &a, 2.0).unwrap()) / lp_cap_l1(&a, 2.0)
            })
            .collect();
        assert!(ratios.iter().all(|r| r.is_finite()));
        assert!(ratios[2] <= ratios[0], "{ratios:?}");
    }

    #[test]
    fn operator_bounds() {
        let g = make_grid(80.0, 2048).unwrap();
        for phi in [0.5, 2.0] {
            let p = BurgersParams::from_phase_offset(phi).unwrap();
            let b0 = f_star(&p, &g);
            let corpus = [
                gauss_dx(&g, 0.0),
                gauss_dx(&g, 2.0),
                Field::from_fn(&g, |x| (-(x * x) / 2.0).exp()),
            ];
            for t in [1.0, 2.0, 10.0] {
                let ctx = CHContext::new(&burgers_flow(&b0, t).unwrap().field).unwrap();
                for a in &corpus {
                    let h = dn(&ctx, a).unwrap();
                    let r = dn_inv_operator_ratio(&ctx, &h).unwrap();
                    assert!(r <= phi.exp() + 1.0, "phi={phi} t={t}: {r}");
                    for p in [1.0, 2.0, f64::INFINITY] {
                        let r = dn_operator_ratio(&ctx, a, p).unwrap();
                        assert!(r.is_finite() && r <= 2.0 * phi.exp(), "{r}");
                    }
                }
            }
        }
    }
}
