//! Order-by-order solution of the invariance equation to arbitrary order.

use num_complex::Complex64;

use super::bivariate::{exponents, slot, Biv};
use super::cubic::denominator;
use super::{check_inputs, Flavor, SsmModel};
use crate::error::Result;
use crate::polyfit::PolyMap;

/// Solves `ΛW + G∘W = W∘R` (maps) or `ΛW + G∘W = DW·R` (flows) up to `order`.
///
/// At order `n` the known part `C = [G∘W_{<n}]_n − [W_{<n}∘R_{<n}]_n` gives
/// `(μ_ℓ^{s1} μ̄_ℓ^{s2} − μ_j) w_j^s = C_j^s`. The near-resonant slots
/// `(m+1, m)` of coordinate `2ℓ` and `(m, m+1)` of `2ℓ+1` keep `w = 0` and
/// route `C` into the reduced coefficients instead.
pub fn ssm_recursive(
    g: &PolyMap<Complex64>,
    eigenvalues: &[Complex64],
    mode: usize,
    order: usize,
    flavor: Flavor,
    tol: f64,
) -> Result<SsmModel> {
    check_inputs(g, eigenvalues)?;
    let mut model = SsmModel::linear(eigenvalues, mode, order, flavor)?;
    let n = eigenvalues.len();
    let (a, b) = (2 * mode, 2 * mode + 1);
    for j in 0..n {
        if j != a {
            denominator(&mut model, 1, 0, j, tol)?;
        }
        if j != b {
            denominator(&mut model, 0, 1, j, tol)?;
        }
    }

    // Parent chain of the graded basis: monomial l = parent[l] · y_{var[l]}.
    let basis = g.basis();
    let chain: Vec<Option<(usize, usize)>> = basis
        .iter()
        .map(|m| {
            if m.degree() == 1 {
                return None;
            }
            let i = m.exponents().iter().position(|&e| e > 0).expect("nonzero degree");
            let mut parent = m.clone();
            parent.0[i] -= 1;
            Some((g.basis_index(&parent).expect("parent in basis"), i))
        })
        .collect();

    let mut w: Vec<Biv> = (0..n).map(|_| Biv::zero(order)).collect();
    w[a].set(1, 0, Complex64::new(1.0, 0.0));
    w[b].set(0, 1, Complex64::new(1.0, 0.0));
    let mut r1 = Biv::monomial(order, 1, 0, eigenvalues[a]);
    let mut r2 = Biv::monomial(order, 0, 1, eigenvalues[b]);

    for ord in 2..=order {
        let gw = compose_g(g, &chain, &w, ord);
        let known: Vec<Biv> = match flavor {
            Flavor::DiscreteMap => compose_w_r(&w, &r1, &r2, ord),
            Flavor::ContinuousFlow => w
                .iter()
                .map(|wj| {
                    let mut k = wj.d1().mul(&r1, ord);
                    k.add_scaled(&wj.d2().mul(&r2, ord), Complex64::new(1.0, 0.0));
                    k
                })
                .collect(),
        };
        for (s1, s2) in exponents(ord).into_iter().filter(|&(x, y)| x + y == ord) {
            for j in 0..n {
                let c = gw[j].get(s1, s2) - known[j].get(s1, s2);
                if j == a && s1 == s2 + 1 {
                    model.reduced[s2 - 1] = c;
                    r1.set(s1, s2, c);
                } else if j == b && s2 == s1 + 1 {
                    model.reduced_conj[s1 - 1] = c;
                    r2.set(s1, s2, c);
                } else {
                    let d = denominator(&mut model, s1, s2, j, tol)?;
                    let v = c / d;
                    w[j].set(s1, s2, v);
                    model.set_w(j, s1, s2, v);
                }
            }
        }
    }
    model.finish(g.degree());
    Ok(model)
}

/// `[G ∘ W]` truncated at `order`, each monomial built from its parent.
fn compose_g(g: &PolyMap<Complex64>, chain: &[Option<(usize, usize)>], w: &[Biv], order: usize) -> Vec<Biv> {
    let dim = w.len();
    let mut out: Vec<Biv> = (0..dim).map(|_| Biv::zero(order)).collect();
    let mut powers: Vec<Biv> = Vec::with_capacity(chain.len());
    for (l, link) in chain.iter().enumerate() {
        let p = match *link {
            None => w[l].clone(),
            Some((parent, var)) => {
                if g.basis()[l].degree() as usize > order {
                    break;
                }
                powers[parent].mul(&w[var], order)
            }
        };
        for (j, o) in out.iter_mut().enumerate() {
            let k = g.coeffs()[(j, l)];
            if k != Complex64::new(0.0, 0.0) {
                o.add_scaled(&p, k);
            }
        }
        powers.push(p);
    }
    out
}

/// `[W ∘ (R1, R2)]` truncated at `order`.
fn compose_w_r(w: &[Biv], r1: &Biv, r2: &Biv, order: usize) -> Vec<Biv> {
    let top = w[0].order.min(order);
    // pw[i]: R1^{s1} R2^{s2} for the i-th exponent pair.
    let exps = exponents(top);
    let mut pw: Vec<Biv> = Vec::with_capacity(exps.len());
    for &(s1, s2) in &exps {
        let p = if s1 + s2 == 0 {
            Biv::monomial(order, 0, 0, Complex64::new(1.0, 0.0))
        } else if s1 > 0 {
            pw[slot(s1 - 1, s2)].mul(r1, order)
        } else {
            pw[slot(s1, s2 - 1)].mul(r2, order)
        };
        pw.push(p);
    }
    w.iter()
        .map(|wj| {
            let mut acc = Biv::zero(order);
            for (i, &(s1, s2)) in exps.iter().enumerate().skip(1) {
                let k = wj.get(s1, s2);
                if k != Complex64::new(0.0, 0.0) {
                    acc.add_scaled(&pw[i], k);
                }
            }
            acc
        })
        .collect()
}
