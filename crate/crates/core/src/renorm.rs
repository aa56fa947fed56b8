//! Renormalization map `R_L f(z) = L f(L z)` and contraction measurements for
//! `R_L e^{(L^2-1)Lap}` and `R_L Phi_b(L^2-1)` on `H^2(2)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{loglog_fit, LinearFit};
use crate::flows::{heat_propagate, linflow_rep};
use crate::grid::{make_grid, quadrature, resample_scaled, Field, SpectralGrid};
use crate::norms::{h22_norm, l1_norm};
use crate::profiles::{bbar, BurgersParams};

/// Mean-zero gate: `|int g| <= MEAN_ZERO_TOLERANCE * ||g||_{L1}`.
pub const MEAN_ZERO_TOLERANCE: f64 = 1e-8;

fn check_mean_zero(g: &Field) -> Result<()> {
    let mean = quadrature(g);
    let allowed = MEAN_ZERO_TOLERANCE * l1_norm(g);
    if mean.abs() > allowed {
        return Err(Error::NotMeanZero { mean, allowed });
    }
    Ok(())
}

fn check_scale(scale: f64) -> Result<()> {
    if scale.is_finite() && scale >= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("scale L={scale} must be >= 1")))
    }
}

/// `||R_L e^{(L^2-1)Lap} g||_{H^2(2)} / ||g||_{H^2(2)}` for mean-zero `g`.
pub fn heat_contraction(g: &Field, scale: f64) -> Result<f64> {
    check_scale(scale)?;
    check_mean_zero(g)?;
    let u = heat_propagate(g, scale * scale - 1.0);
    Ok(h22_norm(&resample_scaled(&u, scale)?.field) / h22_norm(g))
}

/// `||R_L Phi_b(L^2-1) g||_{H^2(2)} / ||g||_{H^2(2)}` for mean-zero `g`, with
/// `b` the Burgers flow started from `bbar(1)` of `p`.
pub fn burgers_coercivity(p: &BurgersParams, g: &Field, scale: f64) -> Result<f64> {
    check_mean_zero(g)?;
    flow_ratio(p, g, scale)
}

/// The same ratio without the mean-zero gate, for demonstrating what goes
/// wrong when the hypothesis fails.
pub fn flow_ratio(p: &BurgersParams, g: &Field, scale: f64) -> Result<f64> {
    check_scale(scale)?;
    let b0 = bbar(p, 1.0, g.grid())?;
    let u = linflow_rep(&b0, g, scale * scale)?;
    Ok(h22_norm(&resample_scaled(&u, scale)?.field) / h22_norm(g))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RlReport {
    pub scale: f64,
    /// `||R_L f||_{H^2(2)} / ||f||_{H^2(2)}`
    pub h22_ratio: f64,
    /// `L^{5/2}`
    pub bound: f64,
    /// `max |d_x R_L f - L R_L d_x f|`
    pub commutation_residual: f64,
}

impl RlReport {
    pub fn bound_holds(&self) -> bool {
        self.h22_ratio <= self.bound
    }
}

/// Boundedness `||R_L f||_{H^2(2)} <= L^{5/2} ||f||_{H^2(2)}` and
/// commutation `d_x R_L = L R_L d_x`.
pub fn rl_properties_check(f: &Field, scale: f64) -> Result<RlReport> {
    let r = resample_scaled(f, scale)?.field;
    let lhs = r.spectral_derivative(1);
    let rhs = resample_scaled(&f.spectral_derivative(1), scale)?.field.scale(scale);
    Ok(RlReport {
        scale,
        h22_ratio: h22_norm(&r) / h22_norm(f),
        bound: scale.powf(2.5),
        commutation_residual: (&lhs - &rhs).max_abs(),
    })
}

/// Grid used for the flow over `[1, L^2]`: `X = max(40, 14 L)`, `dx <= 0.08`.
pub fn coercivity_grid(scale: f64) -> Result<SpectralGrid> {
    let x = (14.0 * scale).max(40.0);
    let mut n = 16usize;
    while 2.0 * x / n as f64 > 0.08 {
        n *= 2;
    }
    make_grid(x, n)
}

/// A mean-zero test function of the frozen corpus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusMember {
    pub id: String,
    /// `int x g != 0`. Members with vanishing first moment decay one order
    /// faster under heat flow and are excluded from slope fits.
    pub first_moment_generic: bool,
    shape: Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
enum Shape {
    /// `(x - c) e^{-(x-c)^2 / (2 s^2)}`
    OddGaussian {
        center: f64,
        width: f64,
        weight: f64,
    },
    /// `d^2/dx^2 e^{-x^2/4}`
    EvenHermite,
    /// `d/dx exp(-1 / (1 - (x/r)^2))`, supported on `|x| < r`
    BumpDerivative {
        radius: f64,
    },
    Sum(Vec<Shape>),
}

impl Shape {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Shape::OddGaussian { center, width, weight } => {
                let y = x - center;
                weight * y * (-y * y / (2.0 * width * width)).exp()
            }
            Shape::EvenHermite => (x * x / 4.0 - 0.5) * (-x * x / 4.0).exp() / 2.0,
            Shape::BumpDerivative { radius } => {
                let y = x / radius;
                if y.abs() >= 1.0 {
                    0.0
                } else {
                    let q = 1.0 - y * y;
                    -2.0 * y / (radius * q * q) * (-1.0 / q).exp()
                }
            }
            Shape::Sum(parts) => parts.iter().map(|s| s.eval(x)).sum(),
        }
    }
}

impl CorpusMember {
    pub fn sample(&self, grid: &SpectralGrid) -> Field {
        Field::from_fn(grid, |x| self.shape.eval(x))
    }
}

/// Default corpus: odd Gaussians of three widths, two translates, a compact
/// bump derivative, an even Hermite function and a seeded random mixture.
pub fn default_corpus(seed: u64) -> Vec<CorpusMember> {
    let odd = |id: &str, center: f64, width: f64| CorpusMember {
        id: id.to_string(),
        first_moment_generic: true,
        shape: Shape::OddGaussian {
            center,
            width,
            weight: 1.0,
        },
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mixture = (0..4)
        .map(|_| Shape::OddGaussian {
            center: rng.random_range(-2.0..2.0),
            width: rng.random_range(0.6..1.4),
            weight: rng.random_range(0.5..1.5),
        })
        .collect();
    vec![
        odd("odd_w0.7", 0.0, 0.7),
        odd("odd_w1.0", 0.0, 1.0),
        odd("odd_w1.5", 0.0, 1.5),
        odd("odd_shift+1.5", 1.5, 1.0),
        odd("odd_shift-2", -2.0, 1.0),
        CorpusMember {
            id: "bump_dx".into(),
            first_moment_generic: true,
            shape: Shape::BumpDerivative { radius: 2.0 },
        },
        CorpusMember {
            id: "hermite2".into(),
            first_moment_generic: false,
            shape: Shape::EvenHermite,
        },
        CorpusMember {
            id: format!("mix_seed{seed}"),
            first_moment_generic: true,
            shape: Shape::Sum(mixture),
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionRow {
    pub phi_d: f64,
    pub scale: f64,
    pub g_id: String,
    pub ratio: f64,
    /// `L * ratio`
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeRow {
    pub phi_d: f64,
    pub g_id: String,
    pub fit: LinearFit,
    pub in_slope_test: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionTable {
    pub scales: Vec<f64>,
    pub rows: Vec<ContractionRow>,
    pub slopes: Vec<SlopeRow>,
}

impl ContractionTable {
    /// Corpus-sup of `kappa` at each `L`, for one `phi_d`.
    pub fn sup_kappa(&self, phi_d: f64) -> Vec<(f64, f64)> {
        self.scales
            .iter()
            .map(|&l| {
                let k = self
                    .rows
                    .iter()
                    .filter(|r| r.phi_d == phi_d && r.scale == l)
                    .map(|r| r.kappa)
                    .fold(0.0, f64::max);
                (l, k)
            })
            .collect()
    }

    /// max/min of the corpus-sup `kappa` across `L`.
    pub fn kappa_spread(&self, phi_d: f64) -> f64 {
        let k: Vec<f64> = self.sup_kappa(phi_d).into_iter().map(|(_, k)| k).collect();
        k.iter().cloned().fold(0.0, f64::max) / k.iter().cloned().fold(f64::MAX, f64::min)
    }
}

/// Sweeps `burgers_coercivity` over `phi_d`, `L` and the corpus, with
/// `b = f*_A` (`T0 = 1`, the large-data case) and per-`L` grids.
pub fn coercivity_sweep(phi_ds: &[f64], scales: &[f64], corpus: &[CorpusMember]) -> Result<ContractionTable> {
    let grids = scales.iter().map(|&l| coercivity_grid(l)).collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(f64, usize, usize)> = phi_ds
        .iter()
        .flat_map(|&phi| (0..scales.len()).flat_map(move |li| (0..corpus.len()).map(move |gi| (phi, li, gi))))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(phi, li, gi)| {
            let p = BurgersParams::from_phase_offset(phi)?;
            let g = corpus[gi].sample(&grids[li]);
            let ratio = burgers_coercivity(&p, &g, scales[li])?;
            Ok(ContractionRow {
                phi_d: phi,
                scale: scales[li],
                g_id: corpus[gi].id.clone(),
                ratio,
                kappa: scales[li] * ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut slopes = Vec::new();
    for &phi in phi_ds {
        for member in corpus {
            let ratios: Vec<f64> = scales
                .iter()
                .map(|&l| {
                    rows.iter()
                        .find(|r| r.phi_d == phi && r.scale == l && r.g_id == member.id)
                        .map(|r| r.ratio)
                        .expect("every job produced a row")
                })
                .collect();
            if let Some(fit) = loglog_fit(scales, &ratios) {
                slopes.push(SlopeRow {
                    phi_d: phi,
                    g_id: member.id.clone(),
                    fit,
                    in_slope_test: member.first_moment_generic,
                });
            }
        }
    }
    Ok(ContractionTable {
        scales: scales.to_vec(),
        rows,
        slopes,
    })
}

/// Log-log slope of `flow_ratio` for the unit-mass Gaussian
/// `e^{-x^2/4} / sqrt(4 pi)`: the contraction is lost without mean zero.
pub fn unit_mean_slope(phi_d: f64, scales: &[f64]) -> Result<LinearFit> {
    let p = BurgersParams::from_phase_offset(phi_d)?;
    let ratios = scales
        .par_iter()
        .map(|&l| {
            let grid = coercivity_grid(l)?;
            let g = Field::from_fn(&grid, |x| (-x * x / 4.0).exp() / (4.0 * std::f64::consts::PI).sqrt());
            flow_ratio(&p, &g, l)
        })
        .collect::<Result<Vec<_>>>()?;
    loglog_fit(scales, &ratios).ok_or_else(|| Error::Parameter("need two distinct scales".into()))
}
