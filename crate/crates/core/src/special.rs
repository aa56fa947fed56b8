//! Gaussian error function `e_*` and its derivative.

use std::f64::consts::PI;

/// `e_*(z) = (4 pi)^{-1/2} int_{-inf}^z e^{-s^2/4} ds = erfc(-z/2) / 2`.
pub fn estar(z: f64) -> f64 {
    0.5 * libm::erfc(-0.5 * z)
}

/// `e_*'(z) = (4 pi)^{-1/2} e^{-z^2/4}`.
pub fn estar_prime(z: f64) -> f64 {
    (-0.25 * z * z).exp() / (4.0 * PI).sqrt()
}
