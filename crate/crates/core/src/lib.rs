// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod colehopf;
pub mod error;
pub mod fit;
pub mod flows;
pub mod grid;
pub mod io;
pub mod mixing;
pub mod norms;
pub mod profiles;
pub mod renorm;
pub mod special;
pub mod spectra;

pub use error::{Error, Result};
pub use grid::{Field, SpectralGrid};
