//! Truncated polynomials in two independent variables `(z1, z2)`, standing
//! for `(z, z̄)` on the SSM.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Position of `z1^s1 z2^s2` in a graded coefficient vector.
pub(crate) fn slot(s1: usize, s2: usize) -> usize {
    let d = s1 + s2;
    d * (d + 1) / 2 + s2
}

pub(crate) fn slots(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

/// Exponents of every slot up to `order`, in storage order.
pub(crate) fn exponents(order: usize) -> Vec<(usize, usize)> {
    (0..=order).flat_map(|d| (0..=d).map(move |s2| (d - s2, s2))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Biv {
    pub order: usize,
    pub c: Vec<Complex64>,
}

impl Biv {
    pub fn zero(order: usize) -> Self {
        Self {
            order,
            c: vec![ZERO; slots(order)],
        }
    }

    pub fn monomial(order: usize, s1: usize, s2: usize, value: Complex64) -> Self {
        let mut p = Self::zero(order);
        if s1 + s2 <= order {
            p.c[slot(s1, s2)] = value;
        }
        p
    }

    pub fn get(&self, s1: usize, s2: usize) -> Complex64 {
        if s1 + s2 > self.order {
            ZERO
        } else {
            self.c[slot(s1, s2)]
        }
    }

    pub fn set(&mut self, s1: usize, s2: usize, v: Complex64) {
        self.c[slot(s1, s2)] = v;
    }

    pub fn add_scaled(&mut self, other: &Biv, k: Complex64) {
        let n = self.c.len().min(other.c.len());
        for (a, b) in self.c[..n].iter_mut().zip(&other.c[..n]) {
            *a += k * b;
        }
    }

    /// Product truncated at `order`.
    pub fn mul(&self, other: &Biv, order: usize) -> Biv {
        let mut out = Biv::zero(order);
        let ea = exponents(self.order.min(order));
        let eb = exponents(other.order.min(order));
        for (ia, &(a1, a2)) in ea.iter().enumerate() {
            let x = self.c[ia];
            if x == ZERO {
                continue;
            }
            let da = a1 + a2;
            for (ib, &(b1, b2)) in eb.iter().enumerate() {
                if da + b1 + b2 > order {
                    break;
                }
                let y = other.c[ib];
                if y != ZERO {
                    out.c[slot(a1 + b1, a2 + b2)] += x * y;
                }
            }
        }
        out
    }

    /// `∂/∂z1`.
    pub fn d1(&self) -> Biv {
        let mut out = Biv::zero(self.order.saturating_sub(1));
        for (i, &(s1, s2)) in exponents(self.order).iter().enumerate() {
            if s1 > 0 {
                out.c[slot(s1 - 1, s2)] += self.c[i] * s1 as f64;
            }
        }
        out
    }

    /// `∂/∂z2`.
    pub fn d2(&self) -> Biv {
        let mut out = Biv::zero(self.order.saturating_sub(1));
        for (i, &(s1, s2)) in exponents(self.order).iter().enumerate() {
            if s2 > 0 {
                out.c[slot(s1, s2 - 1)] += self.c[i] * s2 as f64;
            }
        }
        out
    }
}
