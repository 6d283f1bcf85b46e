use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Flavor, SsmModel};
use crate::error::{Error, Result};
use crate::polyfit::PolyMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub eps: f64,
    /// Residual at `ρ = eps`.
    pub coarse: f64,
    /// Residual at `ρ = eps / 2`.
    pub fine: f64,
    /// `log₂(coarse / fine)`; about `order + 1` for a consistent model.
    pub slope: f64,
}

/// Largest invariance defect on the circle `|z| = rho`:
/// `|ΛW + G(W) − W(R)|` for maps, `|ΛW + G(W) − DW·R|` for flows.
pub fn invariance_residual(model: &SsmModel, g: &PolyMap<Complex64>, rho: f64, samples: usize) -> Result<f64> {
    if g.in_dim() != model.dim() || g.out_dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: g.in_dim(),
        });
    }
    if samples == 0 {
        return Err(Error::Config("residual needs at least one sample".into()));
    }
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let z = Complex64::from_polar(rho, 2.0 * PI * k as f64 / samples as f64);
        let w = model.evaluate_pair(z, z.conj());
        let gw = g.eval(&w);
        let (r1, r2) = model.reduced_pair(z, z.conj());
        let rhs = match model.flavor {
            Flavor::DiscreteMap => model.evaluate_pair(r1, r2),
            Flavor::ContinuousFlow => {
                let (d1, d2) = derivatives(model, z, z.conj());
                d1.iter().zip(&d2).map(|(a, b)| a * r1 + b * r2).collect()
            }
        };
        let defect = (0..model.dim())
            .map(|j| (model.eigenvalues[j] * w[j] + gw[j] - rhs[j]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(defect);
    }
    Ok(worst)
}

/// Step-halving test of [`invariance_residual`] at `eps` and `eps / 2`.
pub fn residual_slope(model: &SsmModel, g: &PolyMap<Complex64>, eps: f64, samples: usize) -> Result<ResidualReport> {
    let coarse = invariance_residual(model, g, eps, samples)?;
    let fine = invariance_residual(model, g, eps / 2.0, samples)?;
    Ok(ResidualReport {
        eps,
        coarse,
        fine,
        slope: (coarse / fine).log2(),
    })
}

fn derivatives(model: &SsmModel, z1: Complex64, z2: Complex64) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut d1 = vec![Complex64::new(0.0, 0.0); model.dim()];
    let mut d2 = d1.clone();
    for j in 0..model.dim() {
        for (s1, s2) in model.multi_indices() {
            let c = model.w(j, s1, s2);
            if s1 > 0 {
                d1[j] += c * s1 as f64 * z1.powu(s1 as u32 - 1) * z2.powu(s2 as u32);
            }
            if s2 > 0 {
                d2[j] += c * s2 as f64 * z1.powu(s1 as u32) * z2.powu(s2 as u32 - 1);
            }
        }
    }
    (d1, d2)
}
