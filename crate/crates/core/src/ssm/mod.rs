//! Two-dimensional spectral submanifolds: parametrization `W` and reduced
//! dynamics `R` from the invariance equation, for sampling maps and flows.
//!
//! Coordinates are the diagonal ones `y = V⁻¹ξ`; mode `l` (0-based) is the
//! pair of coordinates `(2l, 2l + 1)`. `z2` plays the role of `z̄`.

mod bivariate;
mod brute;
mod cubic;
mod recursive;
mod residual;

pub use brute::brute_force_homological;
pub use cubic::{ssm_cubic_continuous, ssm_cubic_discrete};
pub use recursive::ssm_recursive;
pub use residual::{invariance_residual, residual_slope, ResidualReport};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyfit::PolyMap;
use bivariate::{exponents, slot, slots};

/// Denominators below `tol · (1 + |μ_j|)` are treated as near-resonant.
pub const DEFAULT_DENOMINATOR_TOL: f64 = 1e-2;
/// The top reduced-dynamics term may reach this fraction of the linear term
/// inside the validity radius.
pub const VALIDITY_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    /// `F ∘ W = W ∘ R` with `F(y) = Λy + G(y)`.
    DiscreteMap,
    /// `ΛW + G ∘ W = DW · R`.
    ContinuousFlow,
}

/// One solved linear equation `d · w = rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Denominator {
    pub s1: usize,
    pub s2: usize,
    pub j: usize,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsmModel {
    /// 0-based pair index.
    pub mode: usize,
    pub order: usize,
    pub flavor: Flavor,
    /// `μ_j` for maps, `λ_j` for flows, in the paired layout of [`crate::spectral::SpectralData`].
    pub eigenvalues: Vec<Complex64>,
    /// `r_m`, the coefficient of `z^{m+1} z̄^m` in the first component of `R`
    /// (`β = r_1`, `γ = r_2`).
    pub reduced: Vec<Complex64>,
    /// Coefficient of `z^m z̄^{m+1}` in the second component; the conjugate of
    /// `reduced` whenever `G` is conjugate-symmetric.
    pub reduced_conj: Vec<Complex64>,
    /// Dense table `w_j^{(s1,s2)}`, see [`SsmModel::w`].
    w: Vec<Complex64>,
    pub denominators: Vec<Denominator>,
    pub validity_radius: f64,
    pub warnings: Vec<String>,
}

impl SsmModel {
    /// Order-one model: `W(z) = z e_{2l} + z̄ e_{2l+1}`, `R` linear.
    pub(crate) fn linear(eigenvalues: &[Complex64], mode: usize, order: usize, flavor: Flavor) -> Result<Self> {
        let dim = eigenvalues.len();
        if dim < 2 || !dim.is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: dim + dim % 2,
                got: dim,
            });
        }
        if 2 * mode + 1 >= dim {
            return Err(Error::InvalidMode(format!(
                "mode {} requested, only {} pair(s) available",
                mode + 1,
                dim / 2
            )));
        }
        if order == 0 {
            return Err(Error::Config("SSM order must be at least 1".into()));
        }
        let m = (order - 1) / 2;
        let mut model = Self {
            mode,
            order,
            flavor,
            eigenvalues: eigenvalues.to_vec(),
            reduced: vec![Complex64::new(0.0, 0.0); m],
            reduced_conj: vec![Complex64::new(0.0, 0.0); m],
            w: vec![Complex64::new(0.0, 0.0); dim * slots(order)],
            denominators: Vec::new(),
            validity_radius: 1.0,
            warnings: Vec::new(),
        };
        model.set_w(2 * mode, 1, 0, Complex64::new(1.0, 0.0));
        model.set_w(2 * mode + 1, 0, 1, Complex64::new(1.0, 0.0));
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `μ_ℓ` (or `λ_ℓ`) of the mode.
    pub fn mu(&self) -> Complex64 {
        self.eigenvalues[2 * self.mode]
    }

    pub fn beta(&self) -> Complex64 {
        self.reduced.first().copied().unwrap_or_default()
    }

    pub fn gamma(&self) -> Option<Complex64> {
        self.reduced.get(1).copied()
    }

    /// `w_j^{(s1,s2)}`; zero beyond the model order.
    pub fn w(&self, j: usize, s1: usize, s2: usize) -> Complex64 {
        if s1 + s2 > self.order {
            return Complex64::new(0.0, 0.0);
        }
        self.w[j * slots(self.order) + slot(s1, s2)]
    }

    pub(crate) fn set_w(&mut self, j: usize, s1: usize, s2: usize, v: Complex64) {
        let n = slots(self.order);
        self.w[j * n + slot(s1, s2)] = v;
    }

    /// All `(s1, s2)` with `1 ≤ s1 + s2 ≤ order`, graded.
    pub fn multi_indices(&self) -> Vec<(usize, usize)> {
        exponents(self.order).into_iter().skip(1).collect()
    }

    /// True for the slots whose near-resonant equation feeds `R` instead of `W`.
    pub fn is_resonant_slot(&self, j: usize, s1: usize, s2: usize) -> bool {
        (j == 2 * self.mode && s1 == s2 + 1 && s2 >= 1) || (j == 2 * self.mode + 1 && s2 == s1 + 1 && s1 >= 1)
    }

    /// `W(z1, z2)` with independent arguments.
    pub fn evaluate_pair(&self, z1: Complex64, z2: Complex64) -> Vec<Complex64> {
        let p1 = powers(z1, self.order);
        let p2 = powers(z2, self.order);
        let e = exponents(self.order);
        let n = slots(self.order);
        (0..self.dim())
            .map(|j| {
                e.iter()
                    .enumerate()
                    .skip(1)
                    .fold(Complex64::new(0.0, 0.0), |acc, (i, &(s1, s2))| {
                        acc + self.w[j * n + i] * p1[s1] * p2[s2]
                    })
            })
            .collect()
    }

    /// `y = W(z) = Σ w_j^s z^{s1} z̄^{s2}`.
    pub fn evaluate(&self, z: Complex64) -> Vec<Complex64> {
        let y = self.evaluate_pair(z, z.conj());
        if cfg!(debug_assertions) {
            let scale = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let defect = (0..self.dim() / 2)
                .map(|l| (y[2 * l + 1] - y[2 * l].conj()).norm())
                .fold(0.0, f64::max);
            if defect > 1e-8 * scale.max(f64::MIN_POSITIVE) {
                log::debug!("SSM output not conjugate-symmetric: defect {defect:.3e}");
            }
        }
        y
    }

    /// Both components of `R(z1, z2)`.
    pub fn reduced_pair(&self, z1: Complex64, z2: Complex64) -> (Complex64, Complex64) {
        let mut r1 = self.eigenvalues[2 * self.mode] * z1;
        let mut r2 = self.eigenvalues[2 * self.mode + 1] * z2;
        for (k, (a, b)) in self.reduced.iter().zip(&self.reduced_conj).enumerate() {
            let m = (k + 1) as u32;
            let common = z1.powu(m) * z2.powu(m);
            r1 += a * common * z1;
            r2 += b * common * z2;
        }
        (r1, r2)
    }

    /// `μ + β ρ² + γ ρ⁴ + …`, the polar multiplier of `R` at radius ρ.
    pub fn radial_factor(&self, rho: f64) -> Complex64 {
        let r2 = rho * rho;
        let mut acc = self.mu();
        let mut p = 1.0;
        for r in &self.reduced {
            p *= r2;
            acc += r * p;
        }
        acc
    }

    pub fn smallest_denominator(&self) -> Option<&Denominator> {
        self.denominators
            .iter()
            .min_by(|a, b| a.magnitude.total_cmp(&b.magnitude))
    }

    /// Largest violation of `w_{P(j)}^{(s2,s1)} = conj(w_j^{(s1,s2)})`, including the reduced coefficients.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for j in 0..self.dim() {
            let pj = j ^ 1;
            for (s1, s2) in self.multi_indices() {
                defect = defect.max((self.w(pj, s2, s1) - self.w(j, s1, s2).conj()).norm());
            }
        }
        for (a, b) in self.reduced.iter().zip(&self.reduced_conj) {
            defect = defect.max((a.conj() - b).norm());
        }
        for l in 0..self.dim() / 2 {
            defect = defect.max((self.eigenvalues[2 * l].conj() - self.eigenvalues[2 * l + 1]).norm());
        }
        defect
    }

    pub(crate) fn finish(&mut self, g_degree: u32) {
        self.validity_radius = validity_radius(self.mu(), &self.reduced);
        if self.order > g_degree as usize {
            let msg = format!(
                "SSM order {} exceeds the degree {} of the nonlinearity; higher terms are unresolved",
                self.order, g_degree
            );
            log::warn!("{msg}");
            self.warnings.push(msg);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SsmFile::from(self)).expect("ssm model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SsmFile = serde_json::from_str(text)?;
        file.try_into()
    }
}

fn powers(z: Complex64, n: usize) -> Vec<Complex64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(Complex64::new(1.0, 0.0));
    for k in 1..=n {
        p.push(p[k - 1] * z);
    }
    p
}

/// Radius at which the highest nonzero reduced term reaches
/// [`VALIDITY_FRACTION`] of the linear one; 1.0 for a linear model.
pub fn validity_radius(mu: Complex64, reduced: &[Complex64]) -> f64 {
    let linear = mu.norm();
    for (k, r) in reduced.iter().enumerate().rev() {
        if r.norm() > 0.0 {
            let power = 2.0 * (k + 1) as f64;
            return (VALIDITY_FRACTION * linear / r.norm()).powf(power.recip());
        }
    }
    1.0
}

pub(crate) fn check_inputs(g: &PolyMap<Complex64>, eigenvalues: &[Complex64]) -> Result<()> {
    let dim = eigenvalues.len();
    if g.in_dim() != dim || g.out_dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: g.in_dim(),
        });
    }
    let scale = g.coeffs().iter().map(|z| z.norm()).fold(1.0, f64::max);
    let linear = g.linear_block().iter().map(|z| z.norm()).fold(0.0, f64::max);
    if linear > 1e-12 * scale {
        return Err(Error::Config(format!(
            "nonlinearity G must have zero linear part (found {linear:.3e})"
        )));
    }
    Ok(())
}

/// Serialized layout: the polymap-style header plus mode metadata and the w table.
#[derive(Serialize, Deserialize)]
struct SsmFile {
    format: String,
    version: u32,
    mode: usize,
    order: usize,
    flavor: Flavor,
    eigenvalues: Vec<[f64; 2]>,
    beta: Option<[f64; 2]>,
    gamma: Option<[f64; 2]>,
    reduced: Vec<[f64; 2]>,
    reduced_conj: Vec<[f64; 2]>,
    /// Rows `[j, s1, s2, re, im]`.
    w: Vec<(usize, usize, usize, f64, f64)>,
    denominators: Vec<Denominator>,
    validity_radius: f64,
    warnings: Vec<String>,
}

const SSM_FORMAT: &str = "ssm-backbone/ssm";

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

impl From<&SsmModel> for SsmFile {
    fn from(m: &SsmModel) -> Self {
        let mut w = Vec::new();
        for j in 0..m.dim() {
            for (s1, s2) in m.multi_indices() {
                let v = m.w(j, s1, s2);
                w.push((j, s1, s2, v.re, v.im));
            }
        }
        Self {
            format: SSM_FORMAT.into(),
            version: 1,
            mode: m.mode,
            order: m.order,
            flavor: m.flavor,
            eigenvalues: m.eigenvalues.iter().copied().map(pair).collect(),
            beta: m.reduced.first().copied().map(pair),
            gamma: m.gamma().map(pair),
            reduced: m.reduced.iter().copied().map(pair).collect(),
            reduced_conj: m.reduced_conj.iter().copied().map(pair).collect(),
            w,
            denominators: m.denominators.clone(),
            validity_radius: m.validity_radius,
            warnings: m.warnings.clone(),
        }
    }
}

impl TryFrom<SsmFile> for SsmModel {
    type Error = Error;

    fn try_from(f: SsmFile) -> Result<Self> {
        if f.format != SSM_FORMAT || f.version != 1 {
            return Err(Error::Serialization(format!(
                "unsupported ssm format {} v{}",
                f.format, f.version
            )));
        }
        let c = |p: &[f64; 2]| Complex64::new(p[0], p[1]);
        let eig: Vec<Complex64> = f.eigenvalues.iter().map(c).collect();
        let mut m = SsmModel::linear(&eig, f.mode, f.order, f.flavor)?;
        if f.reduced.len() != m.reduced.len() || f.reduced_conj.len() != m.reduced.len() {
            return Err(Error::Serialization(
                "reduced coefficient count does not match order".into(),
            ));
        }
        m.reduced = f.reduced.iter().map(c).collect();
        m.reduced_conj = f.reduced_conj.iter().map(c).collect();
        for (j, s1, s2, re, im) in f.w {
            if j >= m.dim() || s1 + s2 == 0 || s1 + s2 > m.order {
                return Err(Error::Serialization(format!("w entry ({j}, {s1}, {s2}) out of range")));
            }
            m.set_w(j, s1, s2, Complex64::new(re, im));
        }
        m.denominators = f.denominators;
        m.validity_radius = f.validity_radius;
        m.warnings = f.warnings;
        Ok(m)
    }
}


#[cfg(test)]
mod tests_solvers;
