use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::basis::basis_len;
use super::map::PolyMap;
use super::Coefficient;
use crate::error::{Error, Result};
use crate::signal_io::DelayDataset;

/// Largest accepted condition estimate of the column-equilibrated weighted
/// design matrix when no regularization is requested.
pub const CONDITION_LIMIT: f64 = 1e13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Condition estimate of the column-equilibrated weighted design matrix.
    pub condition: f64,
    pub pairs: usize,
    pub basis_len: usize,
    pub regularization: f64,
}

pub fn fit_nar(data: &DelayDataset, degree: u32, regularization: Option<f64>) -> Result<PolyMap<f64>> {
    fit_nar_with_diagnostics(data, degree, regularization).map(|(map, _)| map)
}

/// Least-squares fit of `ξ_{k+1} ≈ K ψ(ξ_k)`.
///
/// Minimizes `Σ_p M_p⁻¹ Σ_k |K ψ(ξ_k^p) − ξ_{k+1}^p|²`, whose normal equations
/// read `K P = Q`. Rather than forming `P` the weighted design matrix is
/// column-equilibrated and factored by Householder QR; the condition estimate
/// comes from the singular values of the triangular factor. A positive
/// `regularization` λ solves `K (P + λI) = Q` instead.
pub fn fit_nar_with_diagnostics(
    data: &DelayDataset,
    degree: u32,
    regularization: Option<f64>,
) -> Result<(PolyMap<f64>, FitDiagnostics)> {
    let lambda = regularization.unwrap_or(0.0);
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!(
            "regularization must be non-negative, got {lambda}"
        )));
    }
    if degree == 0 {
        return Err(Error::Config("polynomial degree must be at least 1".into()));
    }
    let dim = data.dim();
    let n_basis = basis_len(dim, degree);
    let pairs = data.len();
    if pairs < n_basis {
        return Err(Error::TooFewPairs {
            pairs,
            unknowns: n_basis,
        });
    }

    let template = PolyMap::<f64>::zeros(dim, dim, degree);
    let extra = if lambda > 0.0 { n_basis } else { 0 };
    let rows = pairs + extra;
    let mut design = DMatrix::<f64>::zeros(rows, n_basis);
    let mut target = DMatrix::<f64>::zeros(rows, dim);

    for (i, (state, succ)) in data.states.iter().zip(&data.successors).enumerate() {
        if state.len() != dim || succ.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: state.len().min(succ.len()),
            });
        }
        let weight = (data.lengths[data.source[i]] as f64).recip().sqrt();
        let psi = template.eval_basis(state);
        for (l, v) in psi.into_iter().enumerate() {
            design[(i, l)] = weight * v;
        }
        for (c, &v) in succ.iter().enumerate() {
            target[(i, c)] = weight * v;
        }
    }
    if design.iter().chain(target.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite values in training pairs".into()));
    }

    let scale: Vec<f64> = (0..n_basis)
        .map(|l| {
            let norm = design.column(l).rows(0, pairs).norm();
            if norm > 0.0 {
                norm
            } else {
                1.0
            }
        })
        .collect();
    for l in 0..n_basis {
        if extra > 0 {
            design[(pairs + l, l)] = lambda.sqrt();
        }
        design.column_mut(l).scale_mut(scale[l].recip());
    }

    let qr = design.qr();
    let r = qr.r();
    let sv = r.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if lambda == 0.0 && !(condition <= CONDITION_LIMIT) {
        return Err(Error::RankDeficient { condition });
    }

    qr.q_tr_mul(&mut target);
    let rhs = target.rows(0, n_basis).into_owned();
    let solved = r
        .solve_upper_triangular(&rhs)
        .ok_or(Error::RankDeficient { condition })?;

    let mut coeffs = DMatrix::<f64>::zeros(dim, n_basis);
    for l in 0..n_basis {
        for c in 0..dim {
            coeffs[(c, l)] = solved[(l, c)] / scale[l];
        }
    }
    let map = PolyMap::new(dim, degree, coeffs)?;
    Ok((
        map,
        FitDiagnostics {
            condition,
            pairs,
            basis_len: n_basis,
            regularization: lambda,
        },
    ))
}

/// `K ψ(x)` with a dimension check.
pub fn predict<T: Coefficient>(map: &PolyMap<T>, x: &[T]) -> Result<Vec<T>> {
    if x.len() != map.in_dim() {
        return Err(Error::DimensionMismatch {
            expected: map.in_dim(),
            got: x.len(),
        });
    }
    Ok(map.eval(x))
}

/// Unweighted sum of squared one-step residuals `Σ |F(ξ_k) − ξ_{k+1}|²`.
pub fn residual_error(map: &PolyMap<f64>, data: &DelayDataset) -> Result<f64> {
    residual_sum(map, data, |_| 1.0)
}

/// Residual with the per-trajectory `M_p⁻¹` weights minimized by [`fit_nar`].
pub fn weighted_residual_error(map: &PolyMap<f64>, data: &DelayDataset) -> Result<f64> {
    residual_sum(map, data, |p| (data.lengths[p] as f64).recip())
}

fn residual_sum(map: &PolyMap<f64>, data: &DelayDataset, weight: impl Fn(usize) -> f64) -> Result<f64> {
    if map.in_dim() != data.dim() || map.out_dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: map.in_dim(),
        });
    }
    let mut err = 0.0;
    for (i, (state, succ)) in data.states.iter().zip(&data.successors).enumerate() {
        let pred = map.eval(state);
        let sq: f64 = pred.iter().zip(succ).map(|(a, b)| (a - b) * (a - b)).sum();
        err += weight(data.source[i]) * sq;
    }
    Ok(err)
}
