//! Reference solver: the invariance residual is sampled on a torus in
//! `(z1, z2)`, its Taylor coefficients are read off with a 2-D DFT, and the
//! unknown coefficients are found by a generic dense linear solve.
//!
//! Orders 2 and 3 are solved jointly (the truncated residual is affine in
//! all of their unknowns); each higher order is then solved as one block
//! with the lower orders fixed.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{check_inputs, Flavor, SsmModel};
use crate::error::{Error, Result};
use crate::polyfit::PolyMap;

/// Assembled systems with a larger condition estimate count as singular.
pub const BRUTE_CONDITION_LIMIT: f64 = 1e12;

/// Largest torus radius; shrunk when the known coefficients grow quickly with order.
const MAX_RADIUS: f64 = 0.5;

#[derive(Clone, Copy, Debug)]
enum Unknown {
    W { j: usize, s1: usize, s2: usize },
    R1(usize),
    R2(usize),
}

#[derive(Clone)]
struct State {
    dim: usize,
    order: usize,
    /// w[j][(s1, s2)] stored densely as w[j][s1 * (order + 1) + s2].
    w: Vec<Vec<Complex64>>,
    r1: Vec<Complex64>,
    r2: Vec<Complex64>,
}

impl State {
    fn get(&self, u: Unknown) -> Complex64 {
        match u {
            Unknown::W { j, s1, s2 } => self.w[j][s1 * (self.order + 1) + s2],
            Unknown::R1(m) => self.r1[m - 1],
            Unknown::R2(m) => self.r2[m - 1],
        }
    }

    fn set(&mut self, u: Unknown, v: Complex64) {
        match u {
            Unknown::W { j, s1, s2 } => self.w[j][s1 * (self.order + 1) + s2] = v,
            Unknown::R1(m) => self.r1[m - 1] = v,
            Unknown::R2(m) => self.r2[m - 1] = v,
        }
    }
}

pub fn brute_force_homological(
    g: &PolyMap<Complex64>,
    eigenvalues: &[Complex64],
    mode: usize,
    order: usize,
    flavor: Flavor,
) -> Result<SsmModel> {
    check_inputs(g, eigenvalues)?;
    let mut model = SsmModel::linear(eigenvalues, mode, order, flavor)?;
    let dim = eigenvalues.len();
    let (a, b) = (2 * mode, 2 * mode + 1);
    let half = order.saturating_sub(1) / 2;
    let mut state = State {
        dim,
        order,
        w: vec![vec![Complex64::new(0.0, 0.0); (order + 1) * (order + 1)]; dim],
        r1: vec![Complex64::new(0.0, 0.0); half],
        r2: vec![Complex64::new(0.0, 0.0); half],
    };
    state.set(Unknown::W { j: a, s1: 1, s2: 0 }, Complex64::new(1.0, 0.0));
    state.set(Unknown::W { j: b, s1: 0, s2: 1 }, Complex64::new(1.0, 0.0));

    let mut blocks: Vec<Vec<usize>> = Vec::new();
    if order >= 2 {
        blocks.push((2..=order.min(3)).collect());
    }
    blocks.extend((4..=order).map(|d| vec![d]));

    for block in blocks {
        let hi = *block.iter().max().expect("non-empty block");
        let mut unknowns = Vec::new();
        let mut equations = Vec::new();
        for &d in &block {
            for s2 in 0..=d {
                let s1 = d - s2;
                for j in 0..dim {
                    equations.push((j, s1, s2));
                    let u = if j == a && s1 == s2 + 1 {
                        Unknown::R1(s2)
                    } else if j == b && s2 == s1 + 1 {
                        Unknown::R2(s1)
                    } else {
                        Unknown::W { j, s1, s2 }
                    };
                    unknowns.push(u);
                }
            }
        }
        let grid = (g.degree() as usize * hi).max(hi * hi).max(2 * hi) + 1;
        let radius = torus_radius(&state, block[0]);
        let residual = |s: &State| residual_coefficients(g, eigenvalues, mode, flavor, s, hi, grid, radius, &equations);

        let base = residual(&state);
        let k = unknowns.len();
        let mut mat = DMatrix::<Complex64>::zeros(k, k);
        for (col, &u) in unknowns.iter().enumerate() {
            let mut probe = state.clone();
            probe.set(u, Complex64::new(1.0, 0.0));
            let r = residual(&probe);
            for row in 0..k {
                mat[(row, col)] = r[row] - base[row];
            }
        }
        let sv = mat.clone().singular_values();
        let condition = if sv.min() > 0.0 {
            sv.max() / sv.min()
        } else {
            f64::INFINITY
        };
        if !(condition <= BRUTE_CONDITION_LIMIT) {
            return Err(Error::SingularSystem { condition });
        }
        let rhs = -DVector::from_vec(base);
        let x = mat.lu().solve(&rhs).ok_or(Error::SingularSystem { condition })?;
        for (i, &u) in unknowns.iter().enumerate() {
            state.set(u, x[i]);
        }
    }

    for j in 0..dim {
        for d in 2..=order {
            for s2 in 0..=d {
                let s1 = d - s2;
                model.set_w(j, s1, s2, state.get(Unknown::W { j, s1, s2 }));
            }
        }
    }
    // Resonant slots hold the reduced coefficients in `state`, not w.
    for m in 1..=half {
        model.set_w(a, m + 1, m, Complex64::new(0.0, 0.0));
        model.set_w(b, m, m + 1, Complex64::new(0.0, 0.0));
    }
    model.reduced = state.r1.clone();
    model.reduced_conj = state.r2.clone();
    model.finish(g.degree());
    Ok(model)
}

/// Radius at which the already-solved terms `w^{(d)} ρ^d`, `d < lo`, stay
/// below the linear ones, so the sampled residual is not dominated by
/// high-degree products.
fn torus_radius(s: &State, lo: usize) -> f64 {
    let mut radius = MAX_RADIUS;
    for d in 2..lo {
        let size = (0..s.dim)
            .flat_map(|j| (0..=d).map(move |s2| (j, d - s2, s2)))
            .map(|(j, s1, s2)| s.w[j][s1 * (s.order + 1) + s2].norm())
            .fold(0.0, f64::max);
        if size > 0.0 {
            radius = radius.min(MAX_RADIUS * size.powf(-1.0 / (d - 1) as f64));
        }
    }
    radius
}

/// Taylor coefficients of the invariance residual at `equations`, computed
/// from samples at `z1 = ρ e^{2πi p/N}`, `z2 = ρ e^{2πi q/N}`.
#[allow(clippy::too_many_arguments)]
fn residual_coefficients(
    g: &PolyMap<Complex64>,
    eig: &[Complex64],
    mode: usize,
    flavor: Flavor,
    s: &State,
    hi: usize,
    n: usize,
    radius: f64,
    equations: &[(usize, usize, usize)],
) -> Vec<Complex64> {
    let dim = s.dim;
    let roots: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
        .collect();
    let mut samples = vec![vec![Complex64::new(0.0, 0.0); n * n]; dim];
    for p in 0..n {
        for q in 0..n {
            let z1 = roots[p] * radius;
            let z2 = roots[q] * radius;
            let w = eval_w(s, hi, z1, z2);
            let gw = g.eval(&w);
            let (r1, r2) = eval_r(s, eig, mode, hi, z1, z2);
            let rhs = match flavor {
                Flavor::DiscreteMap => eval_w(s, hi, r1, r2),
                Flavor::ContinuousFlow => {
                    let (d1, d2) = eval_dw(s, hi, z1, z2);
                    (0..dim).map(|j| d1[j] * r1 + d2[j] * r2).collect()
                }
            };
            for j in 0..dim {
                samples[j][p * n + q] = eig[j] * w[j] + gw[j] - rhs[j];
            }
        }
    }
    equations
        .iter()
        .map(|&(j, s1, s2)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in 0..n {
                for q in 0..n {
                    let phase = roots[(s1 * p + s2 * q) % n].conj();
                    acc += samples[j][p * n + q] * phase;
                }
            }
            acc / (n * n) as f64 / radius.powi((s1 + s2) as i32)
        })
        .collect()
}

fn eval_w(s: &State, hi: usize, z1: Complex64, z2: Complex64) -> Vec<Complex64> {
    (0..s.dim)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for s1 in 0..=hi {
                for s2 in 0..=(hi - s1) {
                    let c = s.w[j][s1 * (s.order + 1) + s2];
                    if c != Complex64::new(0.0, 0.0) {
                        acc += c * z1.powu(s1 as u32) * z2.powu(s2 as u32);
                    }
                }
            }
            acc
        })
        .collect()
}

fn eval_dw(s: &State, hi: usize, z1: Complex64, z2: Complex64) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut d1 = vec![Complex64::new(0.0, 0.0); s.dim];
    let mut d2 = d1.clone();
    for j in 0..s.dim {
        for s1 in 0..=hi {
            for s2 in 0..=(hi - s1) {
                let c = s.w[j][s1 * (s.order + 1) + s2];
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                if s1 > 0 {
                    d1[j] += c * s1 as f64 * z1.powu(s1 as u32 - 1) * z2.powu(s2 as u32);
                }
                if s2 > 0 {
                    d2[j] += c * s2 as f64 * z1.powu(s1 as u32) * z2.powu(s2 as u32 - 1);
                }
            }
        }
    }
    (d1, d2)
}

fn eval_r(
    s: &State,
    eig: &[Complex64],
    mode: usize,
    hi: usize,
    z1: Complex64,
    z2: Complex64,
) -> (Complex64, Complex64) {
    let mut r1 = eig[2 * mode] * z1;
    let mut r2 = eig[2 * mode + 1] * z2;
    for m in 1..=s.r1.len() {
        if 2 * m + 1 > hi {
            break;
        }
        let common = (z1 * z2).powu(m as u32);
        r1 += s.r1[m - 1] * common * z1;
        r2 += s.r2[m - 1] * common * z2;
    }
    (r1, r2)
}
