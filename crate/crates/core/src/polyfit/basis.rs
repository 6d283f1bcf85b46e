use std::fmt;

use serde::{Deserialize, Serialize};

use super::Coefficient;

/// Exponent vector of a monomial `x^m = Π x_i^{m_i}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    /// `p` at position `i`, zero elsewhere.
    pub fn unit(dim: usize, i: usize, p: u32) -> Self {
        let mut m = Self::zeros(dim);
        m.0[i] = p;
        m
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// Adds `p` to the exponent at position `i`.
    pub fn bump(mut self, i: usize, p: u32) -> Self {
        self.0[i] += p;
        self
    }

    pub fn eval<T: Coefficient>(&self, x: &[T]) -> T {
        self.0
            .iter()
            .zip(x)
            .filter(|(&e, _)| e > 0)
            .fold(T::one(), |acc, (&e, &xi)| acc * pow_by_squaring(xi, e))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn pow_by_squaring<T: Coefficient>(mut base: T, mut exp: u32) -> T {
    let mut acc = T::one();
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        exp >>= 1;
        if exp > 0 {
            base = base * base;
        }
    }
    acc
}

/// All monomials of degree `1..=degree` in `dim` variables.
///
/// Graded order: lower total degree first; within one degree the exponent
/// vectors appear in descending lexicographic order, so the degree-one block
/// is `e_1, e_2, …, e_dim`.
pub fn monomial_basis(dim: usize, degree: u32) -> Vec<MultiIndex> {
    assert!(dim >= 1, "monomial basis needs at least one variable");
    let mut out = Vec::with_capacity(basis_len(dim, degree));
    for d in 1..=degree {
        let mut current = vec![0u32; dim];
        push_homogeneous(&mut out, &mut current, 0, d);
    }
    out
}

fn push_homogeneous(out: &mut Vec<MultiIndex>, current: &mut [u32], pos: usize, remaining: u32) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.to_vec()));
        current[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        push_homogeneous(out, current, pos + 1, remaining - e);
    }
    current[pos] = 0;
}

/// `C(dim + degree, degree) - 1`.
pub fn basis_len(dim: usize, degree: u32) -> usize {
    let degree = degree as usize;
    let mut c: usize = 1;
    for k in 1..=degree {
        c = c * (dim + k) / k;
    }
    c - 1
}

/// Values of every basis monomial at `x`.
pub fn evaluate_basis<T: Coefficient>(basis: &[MultiIndex], x: &[T]) -> Vec<T> {
    basis.iter().map(|m| m.eval(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(v: &[u32]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    #[test]
    fn dim2_degree2_order() {
        let b = monomial_basis(2, 2);
        assert_eq!(
            b,
            vec![idx(&[1, 0]), idx(&[0, 1]), idx(&[2, 0]), idx(&[1, 1]), idx(&[0, 2])]
        );
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(monomial_basis(4, 3).len(), 34);
        assert_eq!(monomial_basis(6, 3).len(), 83);
        for dim in 1..7 {
            for deg in 1..6 {
                assert_eq!(monomial_basis(dim, deg).len(), basis_len(dim, deg));
            }
        }
    }

    #[test]
    fn ordering_is_strict_and_graded() {
        let b = monomial_basis(4, 4);
        for w in b.windows(2) {
            let (a, c) = (&w[0], &w[1]);
            assert!(a.degree() <= c.degree());
            if a.degree() == c.degree() {
                assert!(a.0 > c.0, "{a} !> {c}");
            }
        }
        assert!(b.iter().all(|m| m.degree() >= 1));
    }

    #[test]
    fn evaluation_examples() {
        let b = monomial_basis(2, 2);
        assert_eq!(evaluate_basis(&b, &[2.0, 3.0]), vec![2.0, 3.0, 4.0, 6.0, 9.0]);
        assert!(evaluate_basis(&b, &[0.0, 0.0]).iter().all(|&v| v == 0.0));
        let b4 = monomial_basis(4, 3);
        let x = [0.3, -1.2, 2.5, 0.7];
        assert_eq!(&evaluate_basis(&b4, &x)[..4], &x);
    }

    #[test]
    fn pow_matches_powi() {
        for e in 0..12 {
            let v = pow_by_squaring(1.1f64, e);
            assert!((v - 1.1f64.powi(e as i32)).abs() < 1e-14 * v.abs().max(1.0));
        }
    }
}
