//! Least-squares line fits for decay exponents.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

/// Fits `y = slope * x + intercept`. Needs at least two distinct `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Some(LinearFit {
        slope,
        intercept,
        residual,
    })
}

/// Slope of `log y` against `log x`.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_line() {
        let f = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!(f.residual < 1e-14);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_none());
        let p = loglog_fit(&[2.0, 4.0, 8.0], &[0.5, 0.25, 0.125]).unwrap();
        assert!((p.slope + 1.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn recovers_any_line(a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let x: Vec<f64> = (0..6).map(|i| i as f64 * 0.7).collect();
            let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let f = linear_fit(&x, &y).unwrap();
            prop_assert!((f.slope - a).abs() < 1e-9);
            prop_assert!((f.intercept - b).abs() < 1e-9);
        }
    }
}
