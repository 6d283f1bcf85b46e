use nalgebra::DMatrix;
use num_complex::Complex64;

use super::map::PolyMap;
use super::Coefficient;
use crate::error::{Error, Result};

/// Tolerance on `‖V·V_inv − I‖_max`.
pub const INVERSE_TOL: f64 = 1e-10;

/// Coefficient table of `y ↦ V⁻¹ F(V y)` in the same graded basis.
///
/// Each monomial `(Vy)^m` is expanded from its parent `(Vy)^{m−e_i}` times
/// the linear form `(Vy)_i`, so every product is computed once.
pub fn compose_linear_change<T: Coefficient>(
    map: &PolyMap<T>,
    v: &DMatrix<Complex64>,
    v_inv: &DMatrix<Complex64>,
) -> Result<PolyMap<Complex64>> {
    let dim = map.in_dim();
    if map.out_dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: map.out_dim(),
        });
    }
    for m in [v, v_inv] {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: m.nrows().max(m.ncols()),
            });
        }
    }
    let defect = (v * v_inv - DMatrix::<Complex64>::identity(dim, dim))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if !(defect <= INVERSE_TOL) {
        return Err(Error::InconsistentInverse { defect });
    }

    let basis = map.basis();
    let n = basis.len();
    // successor[l][j]: basis position of basis[l] + e_j, if still within degree.
    let successor: Vec<Vec<Option<usize>>> = basis
        .iter()
        .map(|m| (0..dim).map(|j| map.basis_index(&m.clone().bump(j, 1))).collect())
        .collect();

    // Column l of `expand` holds the y-coefficients of (Vy)^{basis[l]}.
    let mut expand = DMatrix::<Complex64>::zeros(n, n);
    for (l, m) in basis.iter().enumerate() {
        if l < dim {
            for j in 0..dim {
                expand[(j, l)] = v[(l, j)];
            }
            continue;
        }
        let i = m.exponents().iter().position(|&e| e > 0).expect("degree >= 2");
        let mut parent = m.clone();
        parent.0[i] -= 1;
        let p = map.basis_index(&parent).expect("parent in basis");
        for a in 0..n {
            let c = expand[(a, p)];
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..dim {
                if v[(i, j)] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let target = successor[a][j].expect("product stays within degree");
                expand[(target, l)] += c * v[(i, j)];
            }
        }
    }

    let k = map.coeffs().map(Coefficient::into_complex);
    let coeffs = v_inv * (k * expand.transpose());
    PolyMap::new(dim, map.degree(), coeffs)
}
