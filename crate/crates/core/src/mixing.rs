//! Renormalization-group driver for the critical wavenumber equation
//!
//! ```text
//! u_t = u_zz + (u^2)_z + eps_n P(u),   t in [1, L^2]
//! u^(n+1)(1, z) = L u^(n)(L^2, L z),   eps_{n+1} = eps_n / L
//! ```
//!
//! `P` is one of two "irrelevant" total derivatives. Both pick up one power
//! of `1/L` per renormalization step, which is why `eps` shrinks.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{linear_fit, LinearFit};
use crate::flows::heat_propagate;
use crate::grid::{make_grid, quadrature, resample_scaled, tail_mass, Field, Nyquist, SpectralGrid};
use crate::norms::{h22_norm, l1xi1_norm};
use crate::profiles::{bbar, bbar_n, f_star, BurgersParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    None,
    /// `eps (u^3)_z`
    CubicFlux {
        eps0: f64,
    },
    /// `eps (u u_z)_z`
    QuadraticGradient {
        eps0: f64,
    },
}

impl Perturbation {
    pub fn eps0(&self) -> f64 {
        match *self {
            Perturbation::None => 0.0,
            Perturbation::CubicFlux { eps0 } | Perturbation::QuadraticGradient { eps0 } => eps0,
        }
    }

    /// Coefficient after `n` renormalization steps.
    pub fn eps_at(&self, scale: f64, n: u32) -> f64 {
        self.eps0() * scale.powi(-(n as i32))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Perturbation::None => "none",
            Perturbation::CubicFlux { .. } => "cubic_flux",
            Perturbation::QuadraticGradient { .. } => "quadratic_gradient",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Integrating factor + Heun.
    IfRk2,
    /// Integrating factor + classical RK4 (Lawson).
    IfRk4,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RGConfig {
    pub scale: f64,
    pub n_max: u32,
    pub params: BurgersParams,
    pub perturbation: Perturbation,
    /// Budget for `||u(1) - bbar(1)||_{H^2(2)}` at the start.
    pub rho_star: f64,
    pub sigma: f64,
    pub dt: f64,
    pub integrator: Integrator,
    pub half_width: f64,
    pub nodes: usize,
    /// Iterates `[lo, hi]` used for the decay fits.
    pub fit_window: (u32, u32),
}

impl RGConfig {
    /// `phi_d = 2`, `delta = 0.05` (`T0 = 1600`), `L = 2`, 14 steps on a box
    /// wide enough for the initial width `sqrt(T0) = 40`.
    pub fn standard(perturbation: Perturbation) -> Result<Self> {
        Ok(Self {
            scale: 2.0,
            n_max: 14,
            params: BurgersParams::from_phase_offset(2.0)?.select_t0(0.05)?,
            perturbation,
            rho_star: 1.0,
            sigma: 0.2,
            dt: 2e-3,
            integrator: Integrator::IfRk2,
            half_width: 512.0,
            nodes: 8192,
            fit_window: (4, 12),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if !(self.scale >= 2.0 && self.scale.is_finite()) {
            return bad(format!("L={} must be >= 2", self.scale));
        }
        if !(self.perturbation.eps0() >= 0.0) {
            return bad("eps0 must be >= 0".into());
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return bad(format!("sigma={} must lie in (0,1)", self.sigma));
        }
        if !(self.dt > 0.0 && self.dt < self.scale * self.scale - 1.0) {
            return bad(format!("dt={} out of range", self.dt));
        }
        if !(self.rho_star > 0.0) {
            return bad("rho_star must be > 0".into());
        }
        let (lo, hi) = self.fit_window;
        if lo >= hi || hi > self.n_max {
            return bad(format!("fit window [{lo},{hi}] must lie inside [0,{}]", self.n_max));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<SpectralGrid> {
        make_grid(self.half_width, self.nodes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RGRow {
    pub n: u32,
    /// Unrenormalized time `L^{2n}`.
    pub t: f64,
    /// `||u^(n)(1) - bbar^(n)(1)||_{H^2(2)}`
    pub rho: f64,
    /// `||u^(n)(1) - f*_A||_{H^2(2)} = ||sqrt t u(t, sqrt t .) - f*_A||`
    pub distance: f64,
    pub mass: f64,
    pub eps: f64,
    /// `||gamma^(n)(L^2)||_{H^2(2)}` of the step leaving iterate `n`.
    pub gamma: f64,
    /// `||R_L abar^(n)(L^2)||_{H^2(2)} / ||g^(n)||_{H^2(2)}` of that step.
    pub lce1: f64,
    /// `max |R_L bbar^(n)(L^2) - bbar^(n+1)(1)|`, rescaling bookkeeping check.
    pub bbar_consistency: f64,
}

#[derive(Debug, Clone)]
pub struct RGState {
    pub n: u32,
    pub u: Field,
    pub eps: f64,
    pub g: Field,
    pub series: Vec<RGRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InitReport {
    pub mass: f64,
    pub l1xi1: f64,
    pub rho0: f64,
}

fn row(cfg: &RGConfig, n: u32, u: &Field, g: &Field, eps: f64) -> RGRow {
    let fs = f_star(&cfg.params, u.grid());
    RGRow {
        n,
        t: cfg.scale.powi(2 * n as i32),
        rho: h22_norm(g),
        distance: h22_norm(&(u - &fs)),
        mass: quadrature(u),
        eps,
        gamma: f64::NAN,
        lce1: f64::NAN,
        bbar_consistency: f64::NAN,
    }
}

/// `u(1) = bbar(1) + w` for a mean-zero perturbation `w`.
pub fn init_data(cfg: &RGConfig, w: &Field) -> Result<(RGState, InitReport)> {
    cfg.validate()?;
    let grid = w.grid();
    let base = bbar(&cfg.params, 1.0, grid)?;
    let u = (&base + w).with_time(1.0);
    let mass = quadrature(&u);
    let phi = cfg.params.phase_offset();
    let allowed = 1e-8 * phi.max(1.0);
    if (mass - phi).abs() > allowed {
        return Err(Error::NotMeanZero {
            mean: mass - phi,
            allowed,
        });
    }
    let g = w.clone();
    let rho0 = h22_norm(&g);
    if rho0 > cfg.rho_star {
        return Err(Error::Parameter(format!(
            "initial distance {rho0:.3e} exceeds rho_star = {}",
            cfg.rho_star
        )));
    }
    let eps = cfg.perturbation.eps0();
    let first = row(cfg, 0, &u, &g, eps);
    Ok((
        RGState {
            n: 0,
            u,
            eps,
            g,
            series: vec![first],
        },
        InitReport {
            mass,
            l1xi1: l1xi1_norm(&base),
            rho0,
        },
    ))
}

/// Right-hand side without the diffusion: `(u^2)_z + eps P(u)`.
fn nonlinear(grid: &SpectralGrid, u: &[f64], eps: f64, p: Perturbation) -> Vec<f64> {
    let dz = |v: &[f64]| grid.apply_multiplier(v, Nyquist::Zero, |xi| Complex64::new(0.0, xi));
    let flux: Vec<f64> = match p {
        Perturbation::None => u.iter().map(|v| v * v).collect(),
        Perturbation::CubicFlux { .. } => u.iter().map(|v| v * v + eps * v * v * v).collect(),
        Perturbation::QuadraticGradient { .. } => {
            let uz = dz(u);
            u.iter().zip(&uz).map(|(v, d)| v * v + eps * v * d).collect()
        }
    };
    dz(&flux)
}

/// Integrates from local time `t0` to `t1` with a fixed number of steps.
pub fn integrate(
    u0: &Field,
    t0: f64,
    t1: f64,
    dt: f64,
    eps: f64,
    p: Perturbation,
    integrator: Integrator,
) -> Result<Field> {
    let grid = u0.grid().clone();
    let steps = ((t1 - t0) / dt).ceil().max(1.0) as usize;
    let h = (t1 - t0) / steps as f64;
    let decay =
        |v: &[f64], tau: f64| grid.apply_multiplier(v, Nyquist::Real, |xi| Complex64::new((-xi * xi * tau).exp(), 0.0));
    let axpy = |a: &[f64], b: &[f64], c: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + c * y).collect() };
    let start_norm = u0.max_abs().max(1e-300);
    let mut u = u0.values().to_vec();
    for k in 0..steps {
        u = match integrator {
            Integrator::IfRk2 => {
                let n0 = nonlinear(&grid, &u, eps, p);
                let pred = decay(&axpy(&u, &n0, h), h);
                let n1 = nonlinear(&grid, &pred, eps, p);
                axpy(&decay(&axpy(&u, &n0, 0.5 * h), h), &n1, 0.5 * h)
            }
            Integrator::IfRk4 => {
                // Lawson: v = e^{-t Lap} u satisfies v' = e^{-t Lap} N(e^{t Lap} v).
                let k1 = nonlinear(&grid, &u, eps, p);
                let half_u = decay(&u, 0.5 * h);
                let k1h = decay(&k1, 0.5 * h);
                let k2 = nonlinear(&grid, &axpy(&half_u, &k1h, 0.5 * h), eps, p);
                let k3 = nonlinear(&grid, &axpy(&half_u, &k2, 0.5 * h), eps, p);
                let k4_in = axpy(&decay(&u, h), &decay(&k3, 0.5 * h), h);
                let k4 = nonlinear(&grid, &k4_in, eps, p);
                let full_u = decay(&u, h);
                let a = decay(&k1, h);
                let bc: Vec<f64> = k2.iter().zip(&k3).map(|(x, y)| x + y).collect();
                let bc = decay(&bc, 0.5 * h);
                full_u
                    .iter()
                    .zip(&a)
                    .zip(&bc)
                    .zip(&k4)
                    .map(|(((v, a), bc), d)| v + h / 6.0 * (a + 2.0 * bc + d))
                    .collect()
            }
        };
        let norm = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !norm.is_finite() || norm > 1e6 * start_norm.max(1.0) {
            return Err(Error::Unstable {
                time: t0 + (k + 1) as f64 * h,
                norm,
            });
        }
    }
    Field::new(&grid, u, t1)
}

/// Flow of the current iterate over local times `[1, L^2]`.
pub fn evolve_interval(state: &RGState, cfg: &RGConfig) -> Result<Field> {
    let l2 = cfg.scale * cfg.scale;
    integrate(&state.u, 1.0, l2, cfg.dt, state.eps, cfg.perturbation, cfg.integrator)
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    /// `abar(L^2) = e^{(L^2-1)Lap} g`
    pub abar: Field,
    /// `gamma(L^2) = a(L^2) - abar(L^2)`
    pub gamma: Field,
    pub lce1: f64,
    pub gamma_norm: f64,
}

/// Splits `a = u - bbar^(n)` at local time `L^2` into its heat part and the rest.
pub fn decompose(state: &RGState, cfg: &RGConfig, u_end: &Field) -> Result<Decomposition> {
    let l = cfg.scale;
    let grid = u_end.grid();
    let b_end = bbar_n(&cfg.params, l, state.n, l * l, grid)?;
    let a_end = u_end - &b_end;
    let abar = heat_propagate(&state.g, l * l - 1.0);
    let gamma = &a_end - &abar;
    let gn = h22_norm(&state.g);
    let lce1 = if gn > 0.0 {
        h22_norm(&resample_scaled(&abar, l)?.field) / gn
    } else {
        0.0
    };
    Ok(Decomposition {
        gamma_norm: h22_norm(&gamma),
        abar,
        gamma,
        lce1,
    })
}

/// One RG step: flow over `[1, L^2]`, renormalize, update `eps` and `g`.
pub fn rg_step(state: RGState, cfg: &RGConfig) -> Result<RGState> {
    let l = cfg.scale;
    let grid = state.u.grid().clone();
    let u_end = evolve_interval(&state, cfg)?;
    let dec = decompose(&state, cfg, &u_end)?;
    let u = resample_scaled(&u_end, l)?.field.with_time(1.0);
    let n = state.n + 1;
    let b_next = bbar_n(&cfg.params, l, n, 1.0, &grid)?;
    let b_book = resample_scaled(&bbar_n(&cfg.params, l, state.n, l * l, &grid)?, l)?.field;
    let g = &u - &b_next;
    let eps = state.eps / l;
    let mut series = state.series;
    if let Some(last) = series.last_mut() {
        last.gamma = dec.gamma_norm;
        last.lce1 = dec.lce1;
        last.bbar_consistency = (&b_book - &b_next).max_abs();
    }
    series.push(row(cfg, n, &u, &g, eps));
    Ok(RGState { n, u, eps, g, series })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<RGRow>,
    /// `log rho` against `n log L` over the fit window.
    pub rho_fit: LinearFit,
    /// `log distance` against `log t` over the fit window.
    pub distance_fit: LinearFit,
    pub mass_drift: f64,
    pub final_rho: f64,
    pub tail_flag: bool,
}

impl ConvergenceReport {
    /// `rho` decays at least like `L^{-n(1 - sigma)}`.
    pub fn rho_criterion(&self, sigma: f64) -> bool {
        self.rho_fit.slope <= -(1.0 - sigma)
    }
}

fn fit_rows(
    rows: &[RGRow],
    window: (u32, u32),
    x: impl Fn(&RGRow) -> f64,
    y: impl Fn(&RGRow) -> f64,
) -> Result<LinearFit> {
    let sel: Vec<&RGRow> = rows.iter().filter(|r| r.n >= window.0 && r.n <= window.1).collect();
    let xs: Vec<f64> = sel.iter().map(|r| x(r)).collect();
    let ys: Vec<f64> = sel.iter().map(|r| y(r).ln()).collect();
    if ys.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("cannot fit a decay through zero values".into()));
    }
    linear_fit(&xs, &ys).ok_or_else(|| Error::Parameter("fit window holds fewer than two iterates".into()))
}

/// Runs `n_max` RG steps from `bbar(1) + w`.
pub fn run_mixing(cfg: &RGConfig, w: &Field) -> Result<ConvergenceReport> {
    let (mut state, _) = init_data(cfg, w)?;
    let mut tail_flag = false;
    for _ in 0..cfg.n_max {
        state = rg_step(state, cfg)?;
        tail_flag |= tail_mass(&state.u) > crate::grid::DEFAULT_TAIL_TOLERANCE;
    }
    let rows = state.series;
    let phi = cfg.params.phase_offset();
    let mass_drift = rows.iter().map(|r| (r.mass - phi).abs()).fold(0.0, f64::max);
    let ln_l = cfg.scale.ln();
    Ok(ConvergenceReport {
        rho_fit: fit_rows(&rows, cfg.fit_window, |r| r.n as f64 * ln_l, |r| r.rho)?,
        distance_fit: fit_rows(&rows, cfg.fit_window, |r| r.t.ln(), |r| r.distance)?,
        final_rho: rows.last().map(|r| r.rho).unwrap_or(f64::NAN),
        mass_drift,
        tail_flag,
        rows,
    })
}

/// `coef * d_x e^{-x^2/4}`, the standard mean-zero perturbation.
pub fn gaussian_kick(grid: &SpectralGrid, coef: f64) -> Field {
    Field::from_fn(grid, |x| -coef * x / 2.0 * (-x * x / 4.0).exp())
}
