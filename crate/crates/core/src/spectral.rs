//! Eigen-analysis of the fitted linear part: conjugate pairing, modal
//! parameters, spectral quotients and resonance audits.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::linalg::Schur;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyfit::{Coefficient, PolyMap};

/// Eigenvector matrices with a larger condition estimate are rejected as near-defective.
pub const EIGENVECTOR_CONDITION_LIMIT: f64 = 1e10;
/// Largest accepted `‖A V − V diag(μ)‖ / ‖A‖`.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;
/// Default relative tolerance of [`resonance_audit`].
pub const DEFAULT_RESONANCE_TOL: f64 = 1e-2;
/// Relative distance within which a spectral-quotient ratio counts as an exact integer.
pub const QUOTIENT_SNAP: f64 = 1e-9;

/// Eigen-data of a real linear map with complex-conjugate spectrum.
///
/// Pairs are stored in consecutive slots `(2l, 2l + 1)` with the principal
/// member (`Im μ > 0`) first and `μ_{2l+1} = conj(μ_{2l})`; column `2l + 1`
/// of `v` is the elementwise conjugate of column `2l`. Pairs are sorted by
/// descending `|μ|`, so pair 0 is the slowest-decaying mode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralData {
    pub eigenvalues: Vec<Complex64>,
    pub v: DMatrix<Complex64>,
    pub v_inv: DMatrix<Complex64>,
    pub period: f64,
    pub pairing_quality: Vec<PairQuality>,
    /// Ratio of extreme singular values of `v`.
    pub condition: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairQuality {
    /// `‖A v − μ v‖ / ‖A‖` of the principal column.
    pub residual: f64,
    /// Distance between the conjugate of the principal eigenvalue and its partner as returned by the solver.
    pub conjugate_gap: f64,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn pairs(&self) -> usize {
        self.eigenvalues.len() / 2
    }

    /// Principal eigenvalue of pair `mode`.
    pub fn mu(&self, mode: usize) -> Complex64 {
        self.eigenvalues[2 * mode]
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.pairs() {
            return Err(Error::InvalidMode(format!(
                "mode {} requested, only {} pair(s) available",
                mode + 1,
                self.pairs()
            )));
        }
        Ok(())
    }

    /// `V diag(μ) V⁻¹`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let d = DMatrix::from_diagonal(&DVector::from_vec(self.eigenvalues.clone()));
        &self.v * d * &self.v_inv
    }

    /// Same spectrum with eigenvector columns rescaled: column pair `l` is
    /// multiplied by `(c_l, conj c_l)`.
    pub fn rescaled(&self, factors: &[Complex64]) -> Result<Self> {
        if factors.len() != self.pairs() {
            return Err(Error::DimensionMismatch {
                expected: self.pairs(),
                got: factors.len(),
            });
        }
        let mut out = self.clone();
        for (l, &c) in factors.iter().enumerate() {
            if c.norm() == 0.0 {
                return Err(Error::Config("eigenvector scale factor must be nonzero".into()));
            }
            out.v.column_mut(2 * l).apply(|z| *z *= c);
            out.v.column_mut(2 * l + 1).apply(|z| *z *= c.conj());
            out.v_inv.row_mut(2 * l).apply(|z| *z /= c);
            out.v_inv.row_mut(2 * l + 1).apply(|z| *z /= c.conj());
        }
        Ok(out)
    }
}

/// Undamped natural frequency, damping ratio and continuous eigenvalue of one pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModalParameters {
    pub omega: f64,
    pub zeta: f64,
    pub lambda: Complex64,
    /// Damped frequency `Im λ` in rad/s.
    pub damped_omega: f64,
    /// Largest damped frequency recoverable through the principal logarithm, `π / T`.
    pub nyquist_omega: f64,
}

/// The degree-one coefficient block of a map.
pub fn linear_part<T: Coefficient>(map: &PolyMap<T>) -> DMatrix<T> {
    map.linear_block()
}

/// Discrete eigenvalue `exp(λ T)` of a mode with natural frequency `omega` and damping ratio `zeta`.
pub fn mu_from_modal(omega: f64, zeta: f64, period: f64) -> Complex64 {
    (continuous_eigenvalue(omega, zeta) * period).exp()
}

/// `λ = −ζω + iω√(1−ζ²)`.
pub fn continuous_eigenvalue(omega: f64, zeta: f64) -> Complex64 {
    Complex64::new(-zeta * omega, omega * (1.0 - zeta * zeta).sqrt())
}

pub fn eigendecompose(a: &DMatrix<f64>, period: f64) -> Result<SpectralData> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::Config(format!("sampling period must be positive, got {period}")));
    }
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.ncols(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("matrix has non-finite entries".into()));
    }
    let a_norm = a.norm().max(f64::MIN_POSITIVE);
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Eigen("Schur iteration did not converge".into()))?;
    let eigs: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();

    let real_tol = 1e-10 * a_norm;
    if let Some(r) = eigs.iter().find(|z| z.im.abs() <= real_tol) {
        return Err(Error::RealEigenvalue { value: r.re });
    }
    let mut upper: Vec<Complex64> = eigs.iter().copied().filter(|z| z.im > 0.0).collect();
    let lower: Vec<Complex64> = eigs.iter().copied().filter(|z| z.im < 0.0).collect();
    if upper.len() != lower.len() || 2 * upper.len() != n {
        return Err(Error::Eigen("spectrum is not closed under conjugation".into()));
    }
    upper.sort_by(|x, y| y.norm().total_cmp(&x.norm()).then(x.arg().total_cmp(&y.arg())));

    let ac = a.map(|v| Complex64::new(v, 0.0));
    let mut eigenvalues = Vec::with_capacity(n);
    let mut v = DMatrix::<Complex64>::zeros(n, n);
    let mut pairing_quality = Vec::with_capacity(n / 2);
    for (l, &mu) in upper.iter().enumerate() {
        let col = null_vector(&ac, mu)?;
        let residual = (&ac * &col - &col * mu).norm() / a_norm;
        if !(residual <= EIGEN_RESIDUAL_TOL) {
            return Err(Error::Eigen(format!(
                "eigenvector residual {residual:.3e} for eigenvalue {mu}"
            )));
        }
        let conjugate_gap = lower
            .iter()
            .map(|z| (z - mu.conj()).norm())
            .fold(f64::INFINITY, f64::min);
        pairing_quality.push(PairQuality {
            residual,
            conjugate_gap,
        });
        eigenvalues.push(mu);
        eigenvalues.push(mu.conj());
        v.set_column(2 * l, &col);
        v.set_column(2 * l + 1, &col.map(|z| z.conj()));
    }

    let sv = v.clone().singular_values();
    let condition = sv.max() / sv.min();
    if !(condition <= EIGENVECTOR_CONDITION_LIMIT) {
        return Err(Error::Eigen(format!(
            "eigenvector matrix near-defective (condition {condition:.3e})"
        )));
    }
    let v_inv = v
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Eigen("eigenvector matrix is singular".into()))?;

    let mut warnings = Vec::new();
    for (l, mu) in upper.iter().enumerate() {
        if mu.norm() >= 1.0 {
            let msg = format!("mode {} is not asymptotically stable: |mu| = {:.6}", l + 1, mu.norm());
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
    Ok(SpectralData {
        eigenvalues,
        v,
        v_inv,
        period,
        pairing_quality,
        condition,
        warnings,
    })
}

/// Unit null vector of `A − μI` from the smallest singular triplet, with the
/// largest-magnitude component rotated to the positive real axis.
fn null_vector(a: &DMatrix<Complex64>, mu: Complex64) -> Result<DVector<Complex64>> {
    let n = a.nrows();
    let shifted = a - DMatrix::<Complex64>::identity(n, n) * mu;
    let svd = shifted.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Eigen("singular vectors unavailable".into()))?;
    let k = svd.singular_values.imin();
    let mut col: DVector<Complex64> = v_t.row(k).transpose().map(|z| z.conj());
    let norm = col.norm();
    if !(norm > 0.0) {
        return Err(Error::Eigen("zero eigenvector".into()));
    }
    col.unscale_mut(norm);
    let mut pivot = 0;
    for i in 1..n {
        if col[i].norm() > col[pivot].norm() * (1.0 + 1e-12) {
            pivot = i;
        }
    }
    let phase = col[pivot].conj() / col[pivot].norm();
    col.apply(|z| *z *= phase);
    col[pivot] = Complex64::new(col[pivot].norm(), 0.0);
    Ok(col)
}

/// `λ = Log μ / T`, `ω = |λ|`, `ζ = −Re λ / |λ|` for every pair.
///
/// Damped frequencies above `π / T` alias onto the principal branch and
/// cannot be recovered.
pub fn modal_parameters(spec: &SpectralData) -> Result<Vec<ModalParameters>> {
    (0..spec.pairs())
        .map(|l| modal_from_mu(spec.mu(l), spec.period))
        .collect()
}

pub fn modal_from_mu(mu: Complex64, period: f64) -> Result<ModalParameters> {
    if mu.im <= 0.0 {
        return Err(Error::RealEigenvalue { value: mu.re });
    }
    if mu.norm() >= 1.0 {
        return Err(Error::Eigen(format!(
            "|mu| = {} is not inside the unit circle",
            mu.norm()
        )));
    }
    let lambda = mu.ln() / period;
    let omega = lambda.norm();
    Ok(ModalParameters {
        omega,
        zeta: -lambda.re / omega,
        lambda,
        damped_omega: lambda.im,
        nyquist_omega: PI / period,
    })
}

/// Relative spectral quotient `σ = Int[min_{j∉ℓ} log|μ_j| / log|μ_ℓ|]`.
///
/// Ratios within [`QUOTIENT_SNAP`] of an integer are rounded to it before
/// truncation, so exact multiples are not lost to rounding.
pub fn spectral_quotient(spec: &SpectralData, mode: usize) -> Result<u32> {
    spec.check_mode(mode)?;
    let logs: Vec<f64> = (0..spec.pairs()).map(|l| spec.mu(l).norm().ln()).collect();
    quotient_from_logs(&logs, mode)
}

/// [`spectral_quotient`] from per-pair values of `log|μ|` (or decay rates `−Re λ`, up to sign).
pub fn quotient_from_logs(logs: &[f64], mode: usize) -> Result<u32> {
    if logs.len() < 2 {
        return Err(Error::Config("spectral quotient needs at least two mode pairs".into()));
    }
    let own = logs[mode];
    if own == 0.0 || !own.is_finite() {
        return Err(Error::ZeroDecayRate { mode: mode + 1 });
    }
    let fastest = logs
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != mode)
        .map(|(_, &x)| x)
        .fold(f64::INFINITY, f64::min);
    let ratio = fastest / own;
    let nearest = ratio.round();
    let snapped = if (ratio - nearest).abs() <= QUOTIENT_SNAP * nearest.abs().max(1.0) {
        nearest
    } else {
        ratio.floor()
    };
    Ok(snapped.max(0.0) as u32)
}

/// One tested product `μ_ℓ^{s1} μ̄_ℓ^{s2}` against eigenvalue `μ_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub s1: usize,
    pub s2: usize,
    /// 0-based coordinate index.
    pub j: usize,
    /// `|μ_ℓ^{s1} μ̄_ℓ^{s2} − μ_j|`.
    pub gap: f64,
    /// `gap / |μ_j|`.
    pub relative_gap: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// 0-based pair index.
    pub mode: usize,
    pub sigma: u32,
    pub tol: f64,
    pub max_order: usize,
    /// Products against coordinates outside the mode pair.
    pub external: Vec<AuditEntry>,
    /// Products against the pair itself; near-resonances here are expected
    /// (they produce the reduced-dynamics terms) and are informational.
    pub internal: Vec<AuditEntry>,
}

impl AuditReport {
    pub fn flags(&self) -> impl Iterator<Item = &AuditEntry> {
        self.external.iter().filter(|e| e.flagged)
    }

    pub fn passed(&self) -> bool {
        self.flags().next().is_none()
    }

    /// Smallest relative gap among external entries.
    pub fn smallest_gap(&self) -> Option<&AuditEntry> {
        self.external
            .iter()
            .min_by(|a, b| a.relative_gap.total_cmp(&b.relative_gap))
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "mode {}  sigma {}  orders 1..={}  tol {:e}",
            self.mode + 1,
            self.sigma,
            self.max_order,
            self.tol
        );
        let _ = writeln!(
            out,
            "{:>4} {:>4} {:>4} {:>14} {:>14}  flag",
            "s1", "s2", "j", "gap", "rel_gap"
        );
        for (kind, entries) in [("", &self.external), ("internal", &self.internal)] {
            for e in entries.iter().filter(|e| kind.is_empty() || e.flagged) {
                let flag = match (e.flagged, kind) {
                    (true, "") => "NEAR-RESONANT",
                    (true, _) => "internal",
                    _ => "",
                };
                let _ = writeln!(
                    out,
                    "{:>4} {:>4} {:>4} {:>14.6e} {:>14.6e}  {flag}",
                    e.s1,
                    e.s2,
                    e.j + 1,
                    e.gap,
                    e.relative_gap
                );
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("audit serializes")
    }
}

/// Checks `μ_ℓ^{s1} μ̄_ℓ^{s2} ≉ μ_j` for `1 ≤ s1 + s2 ≤ max(σ, 3)`.
pub fn resonance_audit(spec: &SpectralData, mode: usize, sigma: u32, tol: f64) -> Result<AuditReport> {
    spec.check_mode(mode)?;
    audit_eigenvalues(&spec.eigenvalues, mode, sigma, tol, |s1, s2| {
        let mu = spec.mu(mode);
        mu.powu(s1 as u32) * mu.conj().powu(s2 as u32)
    })
}

/// Continuous-time audit: `s1 λ_ℓ + s2 λ̄_ℓ ≉ λ_j`, gaps relative to `|λ_j|`.
pub fn resonance_audit_continuous(lambdas: &[Complex64], mode: usize, sigma: u32, tol: f64) -> Result<AuditReport> {
    if 2 * mode + 1 >= lambdas.len() {
        return Err(Error::InvalidMode(format!("mode {} out of range", mode + 1)));
    }
    let l = lambdas[2 * mode];
    audit_eigenvalues(lambdas, mode, sigma, tol, |s1, s2| l * s1 as f64 + l.conj() * s2 as f64)
}

fn audit_eigenvalues(
    eigs: &[Complex64],
    mode: usize,
    sigma: u32,
    tol: f64,
    product: impl Fn(usize, usize) -> Complex64,
) -> Result<AuditReport> {
    if !(tol >= 0.0) {
        return Err(Error::Config(format!(
            "resonance tolerance must be non-negative, got {tol}"
        )));
    }
    let max_order = (sigma as usize).max(3);
    let mut external = Vec::new();
    let mut internal = Vec::new();
    for order in 1..=max_order {
        for s2 in 0..=order {
            let s1 = order - s2;
            let p = product(s1, s2);
            for (j, &mu_j) in eigs.iter().enumerate() {
                let in_pair = j / 2 == mode;
                if in_pair && order == 1 {
                    continue;
                }
                let gap = (p - mu_j).norm();
                let relative_gap = gap / mu_j.norm();
                let entry = AuditEntry {
                    s1,
                    s2,
                    j,
                    gap,
                    relative_gap,
                    flagged: relative_gap < tol,
                };
                if in_pair {
                    internal.push(entry);
                } else {
                    external.push(entry);
                }
            }
        }
    }
    Ok(AuditReport {
        mode,
        sigma,
        tol,
        max_order,
        external,
        internal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rotation_scaling(rho: f64, theta: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(
            2,
            2,
            &[
                rho * theta.cos(),
                -rho * theta.sin(),
                rho * theta.sin(),
                rho * theta.cos(),
            ],
        )
    }

    /// Real matrix with prescribed conjugate pairs, built from a real block-diagonal form.
    fn from_pairs(mus: &[Complex64], mix: &DMatrix<f64>) -> DMatrix<f64> {
        let n = 2 * mus.len();
        let mut block = DMatrix::<f64>::zeros(n, n);
        for (l, mu) in mus.iter().enumerate() {
            block[(2 * l, 2 * l)] = mu.re;
            block[(2 * l, 2 * l + 1)] = -mu.im;
            block[(2 * l + 1, 2 * l)] = mu.im;
            block[(2 * l + 1, 2 * l + 1)] = mu.re;
        }
        mix * block * mix.clone().try_inverse().unwrap()
    }

    #[test]
    fn rotation_scaling_spectrum() {
        let spec = eigendecompose(&rotation_scaling(0.9, 0.3), 1.0).unwrap();
        let mu = Complex64::from_polar(0.9, 0.3);
        assert!((spec.eigenvalues[0] - mu).norm() < 1e-14);
        assert!((spec.eigenvalues[1] - mu.conj()).norm() < 1e-14);
        assert!(spec.warnings.is_empty());
    }

    #[test]
    fn unstable_pair_warns() {
        let spec = eigendecompose(&rotation_scaling(1.05, 0.7), 0.1).unwrap();
        assert_eq!(spec.warnings.len(), 1);
        assert!(modal_parameters(&spec).is_err());
    }

    #[test]
    fn real_eigenvalue_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.3]);
        assert!(matches!(eigendecompose(&a, 1.0), Err(Error::RealEigenvalue { .. })));
    }

    #[test]
    fn pairing_ordering_and_normalization() {
        let mus = [Complex64::from_polar(0.7, 1.1), Complex64::from_polar(0.95, 0.4)];
        let mix = DMatrix::from_fn(
            4,
            4,
            |i, j| if i == j { 2.0 } else { 0.3 * (i as f64 - j as f64 + 0.5) },
        );
        let a = from_pairs(&mus, &mix);
        let spec = eigendecompose(&a, 0.5).unwrap();
        assert!((spec.mu(0) - mus[1]).norm() < 1e-12);
        assert!((spec.mu(1) - mus[0]).norm() < 1e-12);
        for l in 0..2 {
            assert_eq!(spec.eigenvalues[2 * l + 1], spec.eigenvalues[2 * l].conj());
            let col = spec.v.column(2 * l);
            assert_eq!(spec.v.column(2 * l + 1), col.map(|z| z.conj()));
            assert!((col.norm() - 1.0).abs() < 1e-14);
            let big = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let pivot = col.iter().find(|z| z.norm() == big).unwrap();
            assert!(pivot.im == 0.0 && pivot.re > 0.0);
        }
        let back = spec.reconstruct();
        assert!((back.map(|z| z.re) - &a).norm() <= 1e-12 * a.norm());
        assert!(back.map(|z| z.im).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn quarter_turn_modal_parameters() {
        let t = 0.25;
        let spec = eigendecompose(&rotation_scaling(1.0 - 1e-15, PI / 2.0), t).unwrap();
        let m = modal_from_mu(c(0.0, 1.0 - 1e-15), t).unwrap();
        assert!((m.omega - PI / (2.0 * t)).abs() < 1e-12);
        assert!(m.zeta.abs() < 1e-12);
        assert_eq!(spec.pairs(), 1);
        assert!(modal_from_mu(c(0.5, 0.0), t).is_err());
    }

    #[test]
    fn modal_round_trip() {
        let t = 0.97656e-3;
        for (f, zeta) in [(47.4921, 0.1833), (167.1512, 0.0183), (368.4577, 0.0019)] {
            let omega = 2.0 * PI * f;
            let m = modal_from_mu(mu_from_modal(omega, zeta, t), t).unwrap();
            assert!((m.omega - omega).abs() <= 1e-12 * omega);
            assert!((m.zeta - zeta).abs() <= 1e-12);
        }
    }

    #[test]
    fn quotient_cases() {
        // Equal decay rates give σ = 1; an exact multiple survives rounding.
        assert_eq!(quotient_from_logs(&[-0.2, -0.2], 0).unwrap(), 1);
        let c = 0.003;
        let logs = [-c / 2.0 * 0.8, -3.0 * c / 2.0 * 0.8];
        assert_eq!(quotient_from_logs(&logs, 0).unwrap(), 3);
        assert_eq!(quotient_from_logs(&logs, 1).unwrap(), 0);
        assert!(matches!(
            quotient_from_logs(&[0.0, -1.0], 0),
            Err(Error::ZeroDecayRate { .. })
        ));
        assert!(quotient_from_logs(&[-1.0], 0).is_err());
    }

    #[test]
    fn audit_flags_constructed_resonances() {
        let m1 = Complex64::from_polar(0.9, 0.3);
        let m2 = m1 * m1 * m1.conj();
        let eigs = [m1, m1.conj(), m2, m2.conj()];
        let report = audit_eigenvalues(&eigs, 0, 1, 1e-2, |s1, s2| {
            m1.powu(s1 as u32) * m1.conj().powu(s2 as u32)
        })
        .unwrap();
        let flagged: Vec<_> = report.flags().map(|e| (e.s1, e.s2, e.j)).collect();
        assert!(flagged.contains(&(2, 1, 2)));
        let slow = Complex64::from_polar(0.999, 0.3);
        let eigs = [slow, slow.conj(), m2, m2.conj()];
        let report = audit_eigenvalues(&eigs, 0, 1, 1e-2, |s1, s2| {
            slow.powu(s1 as u32) * slow.conj().powu(s2 as u32)
        })
        .unwrap();
        assert!(report
            .internal
            .iter()
            .any(|e| e.flagged && e.s1 == 2 && e.s2 == 1 && e.j == 0));

        let dup = [m1, m1.conj(), m1 * 1.001, (m1 * 1.001).conj()];
        let report = audit_eigenvalues(&dup, 0, 1, 1e-2, |s1, s2| {
            m1.powu(s1 as u32) * m1.conj().powu(s2 as u32)
        })
        .unwrap();
        assert!(report.flags().any(|e| (e.s1, e.s2, e.j) == (1, 0, 2)));
        assert!(!report.passed());
    }
}
