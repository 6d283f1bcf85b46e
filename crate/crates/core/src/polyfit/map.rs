use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::{basis_len, monomial_basis, MultiIndex};
use super::Coefficient;
use crate::error::{Error, Result};

const FORMAT_TAG: &str = "ssm-backbone/polymap";
const FORMAT_VERSION: u32 = 1;

/// Polynomial map `x ↦ K ψ(x)` without constant term, in the graded monomial
/// basis of [`monomial_basis`].
#[derive(Debug, Clone)]
pub struct PolyMap<T: Coefficient> {
    in_dim: usize,
    degree: u32,
    basis: Vec<MultiIndex>,
    index: HashMap<MultiIndex, usize>,
    coeffs: DMatrix<T>,
}

impl<T: Coefficient> PartialEq for PolyMap<T> {
    fn eq(&self, other: &Self) -> bool {
        self.in_dim == other.in_dim && self.degree == other.degree && self.coeffs == other.coeffs
    }
}

impl<T: Coefficient> PolyMap<T> {
    /// `coeffs` is `out_dim × N`, column `l` holding the coefficients of basis monomial `l`.
    pub fn new(in_dim: usize, degree: u32, coeffs: DMatrix<T>) -> Result<Self> {
        if in_dim == 0 || degree == 0 {
            return Err(Error::Config("polynomial map needs in_dim >= 1 and degree >= 1".into()));
        }
        let n = basis_len(in_dim, degree);
        if coeffs.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: coeffs.ncols(),
            });
        }
        let basis = monomial_basis(in_dim, degree);
        let index = basis.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        Ok(Self {
            in_dim,
            degree,
            basis,
            index,
            coeffs,
        })
    }

    pub fn zeros(in_dim: usize, out_dim: usize, degree: u32) -> Self {
        let n = basis_len(in_dim, degree);
        Self::new(in_dim, degree, DMatrix::zeros(out_dim, n)).expect("consistent shape")
    }

    /// Linear map `x ↦ A x` embedded in a degree-`degree` map.
    pub fn from_linear(a: &DMatrix<T>, degree: u32) -> Result<Self> {
        let mut map = Self::zeros(a.ncols(), a.nrows(), degree);
        map.coeffs.columns_mut(0, a.ncols()).copy_from(a);
        Ok(map)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn basis(&self) -> &[MultiIndex] {
        &self.basis
    }

    pub fn coeffs(&self) -> &DMatrix<T> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut DMatrix<T> {
        &mut self.coeffs
    }

    pub fn basis_index(&self, m: &MultiIndex) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Coefficient of `x^m` in output row `row`; zero for monomials outside the basis.
    pub fn coefficient(&self, row: usize, m: &MultiIndex) -> T {
        self.basis_index(m).map_or_else(T::zero, |l| self.coeffs[(row, l)])
    }

    pub fn set_coefficient(&mut self, row: usize, m: &MultiIndex, value: T) -> Result<()> {
        let l = self
            .basis_index(m)
            .ok_or_else(|| Error::Config(format!("monomial {m} not in basis")))?;
        self.coeffs[(row, l)] = value;
        Ok(())
    }

    /// The degree-one coefficient block (the Jacobian at the origin).
    pub fn linear_block(&self) -> DMatrix<T> {
        self.coeffs.columns(0, self.in_dim).into_owned()
    }

    /// Copy with the degree-one block set to zero.
    pub fn without_linear_part(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.columns_mut(0, self.in_dim).fill(T::zero());
        out
    }

    /// Evaluates `K ψ(x)`.
    pub fn eval(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.in_dim, "argument dimension");
        let psi = self.eval_basis(x);
        (0..self.out_dim())
            .map(|r| {
                self.coeffs
                    .row(r)
                    .iter()
                    .zip(&psi)
                    .fold(T::zero(), |acc, (&k, &p)| acc + k * p)
            })
            .collect()
    }

    /// Monomial values at `x`, built incrementally along the graded basis.
    pub fn eval_basis(&self, x: &[T]) -> Vec<T> {
        let mut psi = Vec::with_capacity(self.basis.len());
        for (l, m) in self.basis.iter().enumerate() {
            if l < self.in_dim {
                psi.push(x[l]);
            } else {
                psi.push(m.eval(x));
            }
        }
        psi
    }

    pub fn map_coeffs<U: Coefficient>(&self, f: impl Fn(T) -> U) -> PolyMap<U> {
        PolyMap {
            in_dim: self.in_dim,
            degree: self.degree,
            basis: self.basis.clone(),
            index: self.index.clone(),
            coeffs: self.coeffs.map(f),
        }
    }

    pub fn to_complex(&self) -> PolyMap<Complex64> {
        self.map_coeffs(Coefficient::into_complex)
    }

    pub fn to_json(&self) -> String {
        let file = PolyMapFile {
            format: FORMAT_TAG.into(),
            version: FORMAT_VERSION,
            scalar_field: T::FIELD.into(),
            in_dim: self.in_dim,
            out_dim: self.out_dim(),
            degree: self.degree,
            basis: self.basis.clone(),
            coeffs: encode_coeffs(&self.coeffs),
        };
        serde_json::to_string_pretty(&file).expect("polymap serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PolyMapFile = serde_json::from_str(text)?;
        Self::from_file(file)
    }

    pub(crate) fn from_file(file: PolyMapFile) -> Result<Self> {
        if file.format != FORMAT_TAG || file.version != FORMAT_VERSION {
            return Err(Error::Serialization(format!(
                "unsupported polymap format {} v{}",
                file.format, file.version
            )));
        }
        if file.scalar_field != T::FIELD {
            return Err(Error::Serialization(format!(
                "expected {} coefficients, file has {}",
                T::FIELD,
                file.scalar_field
            )));
        }
        let expected = monomial_basis(file.in_dim, file.degree);
        if file.basis != expected {
            return Err(Error::Serialization("basis rows are not in graded order".into()));
        }
        let coeffs = decode_coeffs::<T>(&file.coeffs, file.out_dim, expected.len())?;
        Self::new(file.in_dim, file.degree, coeffs)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct PolyMapFile {
    pub format: String,
    pub version: u32,
    pub scalar_field: String,
    pub in_dim: usize,
    pub out_dim: usize,
    pub degree: u32,
    pub basis: Vec<MultiIndex>,
    /// Row-major `[re, im]` pairs; real maps store `[re]`.
    pub coeffs: Vec<Vec<f64>>,
}

pub(crate) fn encode_coeffs<T: Coefficient>(m: &DMatrix<T>) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let (re, im) = m[(r, c)].parts();
            if T::FIELD == "real" {
                out.push(vec![re]);
            } else {
                out.push(vec![re, im]);
            }
        }
    }
    out
}

pub(crate) fn decode_coeffs<T: Coefficient>(data: &[Vec<f64>], rows: usize, cols: usize) -> Result<DMatrix<T>> {
    if data.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            expected: rows * cols,
            got: data.len(),
        });
    }
    let mut m = DMatrix::zeros(rows, cols);
    for (k, entry) in data.iter().enumerate() {
        let v = match entry.as_slice() {
            [re] => T::from_parts(*re, 0.0),
            [re, im] => T::from_parts(*re, *im),
            _ => return Err(Error::Serialization("coefficient must be [re] or [re, im]".into())),
        }?;
        m[(k / cols, k % cols)] = v;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_at_origin_and_identity() {
        let map = PolyMap::<f64>::from_linear(&DMatrix::identity(3, 3), 3).unwrap();
        assert_eq!(map.eval(&[0.0, 0.0, 0.0]), vec![0.0; 3]);
        assert_eq!(map.eval(&[0.5, -1.0, 2.0]), vec![0.5, -1.0, 2.0]);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mut map = PolyMap::<Complex64>::zeros(2, 2, 3);
        for (k, v) in map.coeffs_mut().iter_mut().enumerate() {
            *v = Complex64::new((k as f64).sqrt() / 7.0, -1.0 / (k as f64 + 3.0));
        }
        let back = PolyMap::<Complex64>::from_json(&map.to_json()).unwrap();
        assert_eq!(back, map);
        assert!(PolyMap::<f64>::from_json(&map.to_json()).is_err());
    }

    #[test]
    fn coefficient_lookup() {
        let mut map = PolyMap::<f64>::zeros(2, 1, 2);
        map.set_coefficient(0, &MultiIndex(vec![1, 1]), 3.0).unwrap();
        assert_eq!(map.eval(&[2.0, 5.0]), vec![30.0]);
        assert_eq!(map.coefficient(0, &MultiIndex(vec![0, 3])), 0.0);
    }
}
