//! Closed-form cubic SSM coefficients.

use num_complex::Complex64;

use super::{check_inputs, Denominator, Flavor, SsmModel};
use crate::error::{Error, Result};
use crate::polyfit::{MultiIndex, PolyMap};

/// Cubic parametrization and `β` of a sampling map `y ↦ Λy + G(y)`;
/// denominators `μ_ℓ^{s1} μ̄_ℓ^{s2} − μ_j`.
pub fn ssm_cubic_discrete(g: &PolyMap<Complex64>, mu: &[Complex64], mode: usize, tol: f64) -> Result<SsmModel> {
    cubic(g, mu, mode, tol, Flavor::DiscreteMap)
}

/// Cubic parametrization and `β` of a flow `ẏ = Λy + G(y)`;
/// denominators `s1 λ_ℓ + s2 λ̄_ℓ − λ_j`.
pub fn ssm_cubic_continuous(g: &PolyMap<Complex64>, lambda: &[Complex64], mode: usize, tol: f64) -> Result<SsmModel> {
    cubic(g, lambda, mode, tol, Flavor::ContinuousFlow)
}

pub(crate) fn combination(eig: &[Complex64], mode: usize, s1: usize, s2: usize, flavor: Flavor) -> Complex64 {
    let (a, b) = (eig[2 * mode], eig[2 * mode + 1]);
    match flavor {
        Flavor::DiscreteMap => a.powu(s1 as u32) * b.powu(s2 as u32),
        Flavor::ContinuousFlow => a * s1 as f64 + b * s2 as f64,
    }
}

/// `d = combination − eig_j`, checked against `tol · (1 + |eig_j|)` and recorded.
pub(crate) fn denominator(model: &mut SsmModel, s1: usize, s2: usize, j: usize, tol: f64) -> Result<Complex64> {
    let eig_j = model.eigenvalues[j];
    let d = combination(&model.eigenvalues, model.mode, s1, s2, model.flavor) - eig_j;
    let magnitude = d.norm();
    if magnitude < tol * (1.0 + eig_j.norm()) {
        return Err(Error::NearResonance { s1, s2, j, magnitude });
    }
    model.denominators.push(Denominator { s1, s2, j, magnitude });
    Ok(d)
}

fn cubic(g: &PolyMap<Complex64>, eig: &[Complex64], mode: usize, tol: f64, flavor: Flavor) -> Result<SsmModel> {
    check_inputs(g, eig)?;
    let mut model = SsmModel::linear(eig, mode, 3, flavor)?;
    let n = eig.len();
    let (a, b) = (2 * mode, 2 * mode + 1);
    let gc = |j: usize, terms: &[(usize, u32)]| {
        let m = terms.iter().fold(MultiIndex::zeros(n), |m, &(i, p)| m.bump(i, p));
        g.coefficient(j, &m)
    };
    let one = Complex64::new(1.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    let factor = |p: usize, q: usize| if p == q { two } else { one };

    // First-order slots are fixed by normalization; only the 1:1 gaps are checked.
    for j in 0..n {
        if j != a {
            denominator(&mut model, 1, 0, j, tol)?;
        }
        if j != b {
            denominator(&mut model, 0, 1, j, tol)?;
        }
    }

    let mut w20 = vec![Complex64::new(0.0, 0.0); n];
    let mut w11 = w20.clone();
    let mut w02 = w20.clone();
    for j in 0..n {
        w20[j] = gc(j, &[(a, 2)]) / denominator(&mut model, 2, 0, j, tol)?;
        w11[j] = gc(j, &[(a, 1), (b, 1)]) / denominator(&mut model, 1, 1, j, tol)?;
        w02[j] = gc(j, &[(b, 2)]) / denominator(&mut model, 0, 2, j, tol)?;
        model.set_w(j, 2, 0, w20[j]);
        model.set_w(j, 1, 1, w11[j]);
        model.set_w(j, 0, 2, w02[j]);
    }

    let mut n21 = vec![Complex64::new(0.0, 0.0); n];
    let mut n12 = n21.clone();
    for j in 0..n {
        let mut n30 = gc(j, &[(a, 3)]);
        let mut n03 = gc(j, &[(b, 3)]);
        n21[j] = gc(j, &[(a, 2), (b, 1)]);
        n12[j] = gc(j, &[(b, 2), (a, 1)]);
        for q in 0..n {
            let ga = factor(a, q) * gc(j, &[(a, 1), (q, 1)]);
            let gb = factor(b, q) * gc(j, &[(b, 1), (q, 1)]);
            n30 += ga * w20[q];
            n03 += gb * w02[q];
            n21[j] += ga * w11[q] + gb * w20[q];
            n12[j] += ga * w02[q] + gb * w11[q];
        }
        let w30 = n30 / denominator(&mut model, 3, 0, j, tol)?;
        let w03 = n03 / denominator(&mut model, 0, 3, j, tol)?;
        model.set_w(j, 3, 0, w30);
        model.set_w(j, 0, 3, w03);
        if j != a {
            let w21 = n21[j] / denominator(&mut model, 2, 1, j, tol)?;
            model.set_w(j, 2, 1, w21);
        }
        if j != b {
            let w12 = n12[j] / denominator(&mut model, 1, 2, j, tol)?;
            model.set_w(j, 1, 2, w12);
        }
    }
    model.reduced = vec![n21[a]];
    model.reduced_conj = vec![n12[b]];
    model.finish(g.degree());
    Ok(model)
}
