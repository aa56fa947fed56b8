//! Closed-form Burgers profiles.
//!
//! Everything here is for the normalized equation `u_t = u_xx + (u^2)_x`,
//! whose self-similar solution of mass `log(1 + A)` is
//! `t^{-1/2} f*_A(x / sqrt t)` with `f*_A = A e_*' / (1 + A e_*)`.
//! [`BurgersParams::to_general`] maps a normalized solution to
//! `u_t = alpha u_xx + beta (u^2)_x`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{tail_mass, Field, SpectralGrid, DEFAULT_TAIL_TOLERANCE};
use crate::norms::h22_norm;
use crate::special::{estar, estar_prime};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BurgersParams {
    amplitude: f64,
    phase_offset: f64,
    t0: f64,
    alpha: f64,
    beta: f64,
    delta: Option<f64>,
}

impl BurgersParams {
    pub fn from_amplitude(amplitude: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::Parameter(format!("amplitude A={amplitude} must be > 0")));
        }
        Ok(Self {
            amplitude,
            phase_offset: amplitude.ln_1p(),
            t0: 1.0,
            alpha: 1.0,
            beta: 1.0,
            delta: None,
        })
    }

    pub fn from_phase_offset(phase_offset: f64) -> Result<Self> {
        if !(phase_offset > 0.0 && phase_offset.is_finite()) {
            return Err(Error::Parameter(format!(
                "phase offset phi_d={phase_offset} must be > 0"
            )));
        }
        Ok(Self {
            amplitude: phase_offset.exp_m1(),
            phase_offset,
            ..Self::from_amplitude(1.0)?
        })
    }

    pub fn with_t0(mut self, t0: f64) -> Result<Self> {
        if !(t0 >= 1.0 && t0.is_finite()) {
            return Err(Error::Parameter(format!("T0={t0} must be >= 1")));
        }
        self.t0 = t0;
        Ok(self)
    }

    /// `T0 = (phi_d / delta)^2`, which makes `bbar(1)` of size `delta`.
    pub fn select_t0(self, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Parameter(format!("delta={delta} must lie in (0,1)")));
        }
        let mut p = self.with_t0((self.phase_offset / delta).powi(2))?;
        p.delta = Some(delta);
        Ok(p)
    }

    pub fn with_coefficients(mut self, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || beta == 0.0 || !beta.is_finite() {
            return Err(Error::Parameter(format!(
                "need alpha > 0 and beta != 0, got alpha={alpha}, beta={beta}"
            )));
        }
        self.alpha = alpha;
        self.beta = beta;
        Ok(self)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn phase_offset(&self) -> f64 {
        self.phase_offset
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta(&self) -> Option<f64> {
        self.delta
    }

    /// `f*_A(z)` at a point.
    pub fn f_star_at(&self, z: f64) -> f64 {
        let a = self.amplitude;
        a * estar_prime(z) / (1.0 + a * estar(z))
    }

    /// Value at `x` of the solution of `u_t = alpha u_xx + beta (u^2)_x`
    /// obtained from a normalized solution `normalized(y)`, `y = x / sqrt(alpha)`.
    pub fn to_general(&self, x: f64, normalized: impl Fn(f64) -> f64) -> f64 {
        self.alpha.sqrt() / self.beta * normalized(x / self.alpha.sqrt())
    }
}

fn check_tail(what: &'static str, f: Field) -> Result<Field> {
    let tail = tail_mass(&f);
    if tail > DEFAULT_TAIL_TOLERANCE {
        return Err(Error::Clipped {
            what,
            tail,
            threshold: DEFAULT_TAIL_TOLERANCE,
        });
    }
    Ok(f)
}

fn check_time(t: f64) -> Result<()> {
    if t >= 1.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("time t={t} must be >= 1")))
    }
}

/// `s^{-1/2} f*_A(x / sqrt s)`: the self-similar solution at time `s`.
fn similarity(p: &BurgersParams, s: f64, grid: &SpectralGrid) -> Field {
    let r = s.sqrt();
    Field::from_fn(grid, |x| p.f_star_at(x / r) / r)
}

pub fn f_star(p: &BurgersParams, grid: &SpectralGrid) -> Field {
    Field::from_fn(grid, |z| p.f_star_at(z))
}

/// `b(t, x) = t^{-1/2} f*_A(x / sqrt t)`.
pub fn burgers_selfsimilar(p: &BurgersParams, t: f64, grid: &SpectralGrid) -> Result<Field> {
    check_time(t)?;
    check_tail("burgers_selfsimilar", similarity(p, t, grid).with_time(t))
}

/// `bbar(t) = b(t - 1 + T0)`.
pub fn bbar(p: &BurgersParams, t: f64, grid: &SpectralGrid) -> Result<Field> {
    check_time(t)?;
    check_tail("bbar", similarity(p, t - 1.0 + p.t0, grid).with_time(t))
}

/// `bbar^(n)(t, z) = L^n bbar(L^{2n} t, L^n z)`, evaluated in closed form as
/// `s^{-1/2} f*_A(z / sqrt s)` with `s = (L^{2n} t + T0 - 1) / L^{2n}`.
pub fn bbar_n(p: &BurgersParams, scale: f64, n: u32, t: f64, grid: &SpectralGrid) -> Result<Field> {
    if !(scale > 1.0) {
        return Err(Error::Parameter(format!("scale L={scale} must be > 1")));
    }
    if !(t >= 1.0 && t <= scale * scale) {
        return Err(Error::Parameter(format!("t={t} must lie in [1, L^2]")));
    }
    let l2n = scale.powi(2 * n as i32);
    let s = t + (p.t0 - 1.0) / l2n;
    check_tail("bbar_n", similarity(p, s, grid).with_time(t))
}

/// Phase front `(alpha/beta) log(1 + A e_*(x / sqrt(alpha t)))`.
pub fn phi_star(p: &BurgersParams, t: f64, grid: &SpectralGrid) -> Result<Field> {
    check_time(t)?;
    let c = p.alpha / p.beta;
    let w = (p.alpha * t).sqrt();
    Ok(Field::from_fn(grid, |x| c * (p.amplitude * estar(x / w)).ln_1p()).with_time(t))
}

/// `|| sqrt(t) bbar(t, sqrt(t) z) - f*_A ||_{H^2(2)}`.
pub fn grow_distance(p: &BurgersParams, t: f64, grid: &SpectralGrid) -> Result<f64> {
    check_time(t)?;
    // sqrt(t) bbar(t, sqrt(t) z) is the similarity profile at s = (t - 1 + T0)/t.
    let scaled = check_tail("grow_distance", similarity(p, (t - 1.0 + p.t0) / t, grid))?;
    let diff = &scaled - &f_star(p, grid);
    Ok(h22_norm(&diff))
}
