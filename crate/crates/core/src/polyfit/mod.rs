//! Monomial-basis polynomial maps and least-squares identification of the
//! sampling map from delay-embedded data.

mod basis;
mod compose;
mod fit;
mod map;

pub use basis::{basis_len, evaluate_basis, monomial_basis, MultiIndex};
pub use compose::compose_linear_change;
pub use fit::{
    fit_nar, fit_nar_with_diagnostics, predict, residual_error, weighted_residual_error, FitDiagnostics,
    CONDITION_LIMIT,
};
pub use map::PolyMap;

use nalgebra::ComplexField;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Scalar field of a [`PolyMap`]: `f64` for fitted maps, `Complex64` after
/// diagonalization.
pub trait Coefficient: ComplexField<RealField = f64> + Copy {
    const FIELD: &'static str;

    fn from_parts(re: f64, im: f64) -> Result<Self>;
    fn parts(self) -> (f64, f64);
    fn into_complex(self) -> Complex64;
}

impl Coefficient for f64 {
    const FIELD: &'static str = "real";

    fn from_parts(re: f64, im: f64) -> Result<Self> {
        if im != 0.0 {
            return Err(Error::Serialization("imaginary part in real coefficient".into()));
        }
        Ok(re)
    }

    fn parts(self) -> (f64, f64) {
        (self, 0.0)
    }

    fn into_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Coefficient for Complex64 {
    const FIELD: &'static str = "complex";

    fn from_parts(re: f64, im: f64) -> Result<Self> {
        Ok(Complex64::new(re, im))
    }

    fn parts(self) -> (f64, f64) {
        (self.re, self.im)
    }

    fn into_complex(self) -> Complex64 {
        self
    }
}
