//! Backbone curves: instantaneous frequency and amplitude along a
//! two-dimensional SSM, parametrized by the polar radius `ρ` of `z = ρe^{iθ}`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralData;
use crate::ssm::{Flavor, SsmModel};

pub const DEFAULT_GRID_POINTS: usize = 200;
pub const DEFAULT_QUADRATURE_NODES: usize = 256;
pub const MIN_QUADRATURE_NODES: usize = 64;

/// Scalar map applied to the first delay coordinate before taking the amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "coefficients")]
pub enum AmplitudeTransform {
    Identity,
    /// Velocity to displacement: divide by `ω(ρ)`.
    DivideByFrequency,
    /// `c0 + c1 x + c2 x² + …`.
    Polynomial(Vec<f64>),
}

impl AmplitudeTransform {
    fn apply(&self, x: Complex64, omega: f64) -> Complex64 {
        match self {
            AmplitudeTransform::Identity => x,
            AmplitudeTransform::DivideByFrequency => x / omega,
            AmplitudeTransform::Polynomial(c) => c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &k| acc * x + k),
        }
    }
}

impl FromStr for AmplitudeTransform {
    type Err = Error;

    /// `identity`, `divide-by-frequency`, or `poly:c0,c1,...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "identity" => Ok(AmplitudeTransform::Identity),
            "divide-by-frequency" => Ok(AmplitudeTransform::DivideByFrequency),
            _ => {
                let Some(list) = s.strip_prefix("poly:") else {
                    return Err(Error::Config(format!("unknown amplitude transform '{s}'")));
                };
                let coeffs = list
                    .split(',')
                    .map(|t| t.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::Config(format!("bad polynomial transform '{s}': {e}")))?;
                if coeffs.is_empty() {
                    return Err(Error::Config("empty polynomial transform".into()));
                }
                Ok(AmplitudeTransform::Polynomial(coeffs))
            }
        }
    }
}

impl fmt::Display for AmplitudeTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmplitudeTransform::Identity => write!(f, "identity"),
            AmplitudeTransform::DivideByFrequency => write!(f, "divide-by-frequency"),
            AmplitudeTransform::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                write!(f, "poly:{}", parts.join(","))
            }
        }
    }
}

/// Which amplitude goes into the `amp` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmpConvention {
    /// L₂ norm of the full vector `V W`.
    Nominal,
    /// First component of `V W` after the amplitude transform.
    Observed,
}

/// `ω(ρ)` at one radius; the discrete branch is unwrapped along `[0, ρ]`.
pub fn instantaneous_frequency(model: &SsmModel, rho: f64, period: f64) -> Result<f64> {
    if !(rho >= 0.0) {
        return Err(Error::Config(format!("radius must be non-negative, got {rho}")));
    }
    match model.flavor {
        Flavor::ContinuousFlow => Ok(model.radial_factor(rho).im),
        Flavor::DiscreteMap => {
            let steps = 64;
            let path: Vec<f64> = (0..=steps).map(|k| rho * k as f64 / steps as f64).collect();
            Ok(*frequency_curve(model, &path, period)?.last().expect("non-empty path"))
        }
    }
}

/// `ω` along an increasing grid starting anywhere in `[0, ∞)`, with the
/// discrete argument unwrapped from its value at `ρ = 0`.
pub fn frequency_curve(model: &SsmModel, rhos: &[f64], period: f64) -> Result<Vec<f64>> {
    if model.flavor == Flavor::ContinuousFlow {
        return Ok(rhos.iter().map(|&r| model.radial_factor(r).im).collect());
    }
    if !(period > 0.0) {
        return Err(Error::Config(format!("sampling period must be positive, got {period}")));
    }
    let scale = model.mu().norm();
    let mut previous = model.mu().arg();
    let mut last_rho = 0.0;
    let mut out = Vec::with_capacity(rhos.len());
    for &rho in rhos {
        // Refine large jumps so the branch is followed, not guessed.
        let pieces = (((rho - last_rho).abs() / 1e-2).ceil() as usize).clamp(1, 1000);
        for k in 1..=pieces {
            let r = last_rho + (rho - last_rho) * k as f64 / pieces as f64;
            let f = model.radial_factor(r);
            if f.norm() <= 1e-12 * scale {
                return Err(Error::DegenerateFrequency(format!("μ + βρ² + … vanishes near ρ = {r}")));
            }
            let mut phase = f.arg();
            phase += 2.0 * PI * ((previous - phase) / (2.0 * PI)).round();
            previous = phase;
        }
        last_rho = rho;
        out.push(previous / period);
    }
    Ok(out)
}

/// Mean-square of each component of `V W(ρe^{iθ}, ρe^{-iθ})` over `θ`,
/// computed exactly: only equal harmonics `s1 − s2` survive the average.
fn exact_mean_squares(model: &SsmModel, v: &DMatrix<Complex64>, rho: f64) -> Vec<f64> {
    let order = model.order as i64;
    let width = (2 * order + 1) as usize;
    let mut out = Vec::with_capacity(v.nrows());
    for i in 0..v.nrows() {
        let mut harmonics = vec![Complex64::new(0.0, 0.0); width];
        for (s1, s2) in model.multi_indices() {
            let c: Complex64 = (0..model.dim()).map(|j| v[(i, j)] * model.w(j, s1, s2)).sum();
            let k = (s1 as i64 - s2 as i64 + order) as usize;
            harmonics[k] += c * rho.powi((s1 + s2) as i32);
        }
        out.push(harmonics.iter().map(|h| h.norm_sqr()).sum());
    }
    out
}

fn check_v(model: &SsmModel, v: &DMatrix<Complex64>) -> Result<()> {
    if v.ncols() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: v.ncols(),
        });
    }
    Ok(())
}

/// `Amp(ρ) = √((1/2π)∮|V W(z(ρ,θ))|² dθ)`, evaluated in closed form.
pub fn nominal_amplitude(model: &SsmModel, v: &DMatrix<Complex64>, rho: f64) -> Result<f64> {
    check_v(model, v)?;
    Ok(exact_mean_squares(model, v, rho).iter().sum::<f64>().sqrt())
}

/// Trapezoid-rule version of [`nominal_amplitude`] with `nodes` points in `θ`.
pub fn nominal_amplitude_quadrature(model: &SsmModel, v: &DMatrix<Complex64>, rho: f64, nodes: usize) -> Result<f64> {
    check_v(model, v)?;
    check_nodes(nodes)?;
    let mean = circle_mean(model, rho, nodes, |w| {
        (0..v.nrows())
            .map(|i| (0..w.len()).map(|j| v[(i, j)] * w[j]).sum::<Complex64>().norm_sqr())
            .sum()
    });
    Ok(mean.sqrt())
}

/// Amplitude of `P(ξ₁)` with `ξ₁` the first component of `V W`, by quadrature.
pub fn observed_amplitude(
    model: &SsmModel,
    v: &DMatrix<Complex64>,
    rho: f64,
    period: f64,
    transform: &AmplitudeTransform,
    nodes: usize,
) -> Result<f64> {
    check_v(model, v)?;
    check_nodes(nodes)?;
    let omega = match transform {
        AmplitudeTransform::DivideByFrequency => {
            let w = instantaneous_frequency(model, rho, period)?;
            if w == 0.0 {
                return Err(Error::DegenerateFrequency(
                    "zero frequency in divide-by-frequency".into(),
                ));
            }
            w
        }
        _ => 1.0,
    };
    let mean = circle_mean(model, rho, nodes, |w| {
        let x: Complex64 = (0..w.len()).map(|j| v[(0, j)] * w[j]).sum();
        transform.apply(x, omega).norm_sqr()
    });
    Ok(mean.sqrt())
}

fn check_nodes(nodes: usize) -> Result<()> {
    if nodes < MIN_QUADRATURE_NODES {
        return Err(Error::Config(format!(
            "quadrature needs at least {MIN_QUADRATURE_NODES} nodes, got {nodes}"
        )));
    }
    Ok(())
}

fn circle_mean(model: &SsmModel, rho: f64, nodes: usize, f: impl Fn(&[Complex64]) -> f64) -> f64 {
    (0..nodes)
        .map(|k| {
            let z = Complex64::from_polar(rho, 2.0 * PI * k as f64 / nodes as f64);
            f(&model.evaluate_pair(z, z.conj()))
        })
        .sum::<f64>()
        / nodes as f64
}

/// Smallest `ρ ∈ [0, rho_max]` with nominal amplitude `target`, by bisection
/// after a coarse scan; `None` if the amplitude never reaches `target`.
pub fn rho_for_amplitude(model: &SsmModel, v: &DMatrix<Complex64>, target: f64, rho_max: f64) -> Result<Option<f64>> {
    check_v(model, v)?;
    let amp = |r: f64| exact_mean_squares(model, v, r).iter().sum::<f64>().sqrt();
    let scan = 400;
    let mut lo = 0.0;
    for k in 1..=scan {
        let hi = rho_max * k as f64 / scan as f64;
        if amp(hi) >= target {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if amp(m) >= target {
                    b = m;
                } else {
                    a = m;
                }
                if b - a <= f64::EPSILON * b {
                    break;
                }
            }
            return Ok(Some(0.5 * (a + b)));
        }
        lo = hi;
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackbonePoint {
    pub rho: f64,
    /// rad/s.
    pub omega: f64,
    pub nominal: f64,
    pub observed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackboneCurve {
    /// 0-based pair index.
    pub mode: usize,
    pub order: usize,
    pub flavor: Flavor,
    pub period: f64,
    pub convention: AmpConvention,
    pub transform: AmplitudeTransform,
    pub points: Vec<BackbonePoint>,
    pub validity_radius: f64,
    pub smallest_denominator: Option<f64>,
    pub warnings: Vec<String>,
}

impl BackboneCurve {
    pub fn amp(&self, i: usize) -> f64 {
        match self.convention {
            AmpConvention::Nominal => self.points[i].nominal,
            AmpConvention::Observed => self.points[i].observed,
        }
    }

    pub fn with_convention(mut self, convention: AmpConvention) -> Self {
        self.convention = convention;
        self
    }

    /// `ω` at amplitude `amp`, linearly interpolated along the first
    /// increasing stretch of the curve's amplitude.
    pub fn frequency_at_amplitude(&self, amp: f64) -> Option<f64> {
        for i in 1..self.points.len() {
            let (a0, a1) = (self.amp(i - 1), self.amp(i));
            if a1 < a0 {
                return None;
            }
            if amp >= a0 && amp <= a1 {
                let t = if a1 > a0 { (amp - a0) / (a1 - a0) } else { 0.0 };
                return Some(self.points[i - 1].omega + t * (self.points[i].omega - self.points[i - 1].omega));
            }
        }
        None
    }

    /// CSV with `#` metadata lines and columns `rho,omega_rad_s,omega_hz,amp`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Data(format!("writing backbone csv: {e}"));
        writeln!(out, "# mode: {}", self.mode + 1).map_err(io)?;
        writeln!(out, "# order: {}", self.order).map_err(io)?;
        writeln!(
            out,
            "# flavor: {}",
            serde_json::to_string(&self.flavor)?.trim_matches('"')
        )
        .map_err(io)?;
        writeln!(out, "# period: {:.16e}", self.period).map_err(io)?;
        writeln!(
            out,
            "# amplitude: {}",
            serde_json::to_string(&self.convention)?.trim_matches('"')
        )
        .map_err(io)?;
        writeln!(out, "# transform: {}", self.transform).map_err(io)?;
        writeln!(out, "# validity_radius: {:.16e}", self.validity_radius).map_err(io)?;
        if let Some(d) = self.smallest_denominator {
            writeln!(out, "# resonance_gap: {d:.16e}").map_err(io)?;
        }
        for w in &self.warnings {
            writeln!(out, "# warning: {w}").map_err(io)?;
        }
        writeln!(out, "rho,omega_rad_s,omega_hz,amp").map_err(io)?;
        for (i, p) in self.points.iter().enumerate() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                p.rho,
                p.omega,
                p.omega / (2.0 * PI),
                self.amp(i)
            )
            .map_err(io)?;
        }
        Ok(())
    }
}

/// `n` uniform radii on `[0, rho_max]`.
pub fn uniform_grid(rho_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| rho_max * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Frequency and both amplitudes at each radius of `rho_grid`.
pub fn backbone_curve(
    model: &SsmModel,
    spec: &SpectralData,
    rho_grid: &[f64],
    transform: &AmplitudeTransform,
) -> Result<BackboneCurve> {
    backbone_curve_with_v(model, &spec.v, spec.period, rho_grid, transform)
}

/// [`backbone_curve`] with an explicit coordinate matrix `V` and period.
pub fn backbone_curve_with_v(
    model: &SsmModel,
    v: &DMatrix<Complex64>,
    period: f64,
    rho_grid: &[f64],
    transform: &AmplitudeTransform,
) -> Result<BackboneCurve> {
    check_v(model, v)?;
    if rho_grid.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::Config("radius grid must be finite and non-negative".into()));
    }
    if rho_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("radius grid must be strictly increasing".into()));
    }
    let mut warnings = model.warnings.clone();
    if let Some(&top) = rho_grid.last() {
        if top > model.validity_radius {
            warnings.push(format!(
                "grid reaches ρ = {top:.4} beyond the validity radius {:.4}",
                model.validity_radius
            ));
        }
    }
    let omegas = frequency_curve(model, rho_grid, period)?;
    let points = rho_grid
        .iter()
        .zip(&omegas)
        .map(|(&rho, &omega)| {
            let nominal = nominal_amplitude(model, v, rho)?;
            let observed = match transform {
                AmplitudeTransform::Identity => exact_mean_squares(model, v, rho)[0].sqrt(),
                AmplitudeTransform::DivideByFrequency => exact_mean_squares(model, v, rho)[0].sqrt() / omega,
                other => observed_amplitude(model, v, rho, period, other, DEFAULT_QUADRATURE_NODES)?,
            };
            Ok(BackbonePoint {
                rho,
                omega,
                nominal,
                observed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BackboneCurve {
        mode: model.mode,
        order: model.order,
        flavor: model.flavor,
        period,
        convention: AmpConvention::Observed,
        transform: transform.clone(),
        points,
        validity_radius: model.validity_radius,
        smallest_denominator: model.smallest_denominator().map(|d| d.magnitude),
        warnings,
    })
}

/// Largest relative frequency difference of two curves at equal amplitude,
/// over `n` amplitudes spread across the range both cover (capped at
/// `amp_cap`). `None` when the ranges do not overlap.
pub fn curve_distance(a: &BackboneCurve, b: &BackboneCurve, amp_cap: f64, n: usize) -> Option<f64> {
    let top = |c: &BackboneCurve| {
        let mut hi: f64 = 0.0;
        for i in 0..c.points.len() {
            if i > 0 && c.amp(i) < c.amp(i - 1) {
                break;
            }
            hi = c.amp(i);
        }
        hi
    };
    let lo = a.amp(0).max(b.amp(0));
    let hi = top(a).min(top(b)).min(amp_cap);
    if a.points.is_empty() || b.points.is_empty() || !(hi > lo) || n < 2 {
        return None;
    }
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let amp = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        let (fa, fb) = (a.frequency_at_amplitude(amp)?, b.frequency_at_amplitude(amp)?);
        worst = worst.max((fa - fb).abs() / fa.abs());
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfit::PolyMap;
    use crate::ssm::{ssm_recursive, DEFAULT_DENOMINATOR_TOL};

    fn linear_model(mu: Complex64) -> SsmModel {
        let eig = [mu, mu.conj()];
        let g = PolyMap::<Complex64>::zeros(2, 2, 3);
        ssm_recursive(&g, &eig, 0, 3, Flavor::DiscreteMap, DEFAULT_DENOMINATOR_TOL).unwrap()
    }

    fn cubic_model() -> (SsmModel, PolyMap<Complex64>) {
        let mu = Complex64::from_polar(0.97, 0.4);
        let eig = [mu, mu.conj()];
        let mut g = PolyMap::<Complex64>::zeros(2, 2, 3);
        let c = Complex64::new(0.05, 0.2);
        // y1³-type and y1²y2 terms with their conjugate partners.
        g.set_coefficient(0, &crate::polyfit::MultiIndex(vec![2, 1]), c)
            .unwrap();
        g.set_coefficient(1, &crate::polyfit::MultiIndex(vec![1, 2]), c.conj())
            .unwrap();
        g.set_coefficient(0, &crate::polyfit::MultiIndex(vec![2, 0]), Complex64::new(0.1, -0.3))
            .unwrap();
        g.set_coefficient(1, &crate::polyfit::MultiIndex(vec![0, 2]), Complex64::new(0.1, 0.3))
            .unwrap();
        let m = ssm_recursive(&g, &eig, 0, 5, Flavor::DiscreteMap, DEFAULT_DENOMINATOR_TOL).unwrap();
        (m, g)
    }

    #[test]
    fn constant_frequency_without_nonlinearity() {
        let mu = Complex64::from_polar(0.99, 0.3);
        let m = linear_model(mu);
        for rho in [0.0, 0.1, 0.5] {
            assert!((instantaneous_frequency(&m, rho, 0.5).unwrap() - 0.6).abs() < 1e-14);
        }
    }

    #[test]
    fn identity_v_amplitude_is_root_two_rho() {
        let m = linear_model(Complex64::from_polar(0.99, 0.3));
        let v = DMatrix::<Complex64>::identity(2, 2);
        for rho in [0.0, 0.2, 1.3] {
            assert!((nominal_amplitude(&m, &v, rho).unwrap() - 2f64.sqrt() * rho).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_amplitude_matches_quadrature() {
        let (m, _) = cubic_model();
        let v = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.3, 0.8),
                Complex64::new(0.3, -0.8),
            ],
        );
        for rho in [0.05, 0.2, 0.4] {
            let exact = nominal_amplitude(&m, &v, rho).unwrap();
            let quad = nominal_amplitude_quadrature(&m, &v, rho, 256).unwrap();
            assert!((exact - quad).abs() <= 1e-8 * exact.max(1.0), "{exact} {quad}");
        }
    }

    #[test]
    fn identity_transform_uses_first_component() {
        let (m, _) = cubic_model();
        let v = DMatrix::<Complex64>::identity(2, 2);
        let rho = 0.3;
        let quad = observed_amplitude(&m, &v, rho, 1.0, &AmplitudeTransform::Identity, 256).unwrap();
        let exact = exact_mean_squares(&m, &v, rho)[0].sqrt();
        assert!((quad - exact).abs() < 1e-12);
    }

    #[test]
    fn divide_by_frequency_halves_at_omega_two() {
        let mu = Complex64::from_polar(0.99, 1.0);
        let m = linear_model(mu);
        let v = DMatrix::<Complex64>::identity(2, 2);
        // ω = arg μ / T = 2.
        let plain = observed_amplitude(&m, &v, 0.3, 0.5, &AmplitudeTransform::Identity, 64).unwrap();
        let scaled = observed_amplitude(&m, &v, 0.3, 0.5, &AmplitudeTransform::DivideByFrequency, 64).unwrap();
        assert!((scaled - plain / 2.0).abs() < 1e-14);
    }

    #[test]
    fn polynomial_transform_parses_and_applies() {
        let t: AmplitudeTransform = "poly:0,2".parse().unwrap();
        assert_eq!(t, AmplitudeTransform::Polynomial(vec![0.0, 2.0]));
        assert_eq!(t.to_string().parse::<AmplitudeTransform>().unwrap(), t);
        assert!("wavelet".parse::<AmplitudeTransform>().is_err());
        assert!(observed_amplitude(
            &linear_model(Complex64::new(0.0, 0.9)),
            &DMatrix::identity(2, 2),
            0.1,
            1.0,
            &t,
            10
        )
        .is_err());
    }

    #[test]
    fn frequency_unwraps_past_pi() {
        // arg μ near π with a positive-frequency β pushes the phase past π.
        let mu = Complex64::from_polar(0.99, PI - 0.2);
        let mut m = linear_model(mu);
        m.reduced[0] = mu * Complex64::new(0.0, 2.0);
        m.reduced_conj[0] = m.reduced[0].conj();
        let grid = uniform_grid(0.5, 11);
        let omegas = frequency_curve(&m, &grid, 1.0).unwrap();
        assert!(omegas.windows(2).all(|w| w[1] > w[0]), "{omegas:?}");
        assert!(omegas.last().unwrap() > &PI);
    }

    #[test]
    fn curve_basics() {
        let (m, _) = cubic_model();
        let v = DMatrix::<Complex64>::identity(2, 2);
        let empty = backbone_curve_with_v(&m, &v, 1.0, &[], &AmplitudeTransform::Identity).unwrap();
        assert!(empty.points.is_empty());
        let grid = uniform_grid(0.2, 21);
        let c = backbone_curve_with_v(&m, &v, 1.0, &grid, &AmplitudeTransform::Identity).unwrap();
        assert_eq!(c.points.len(), 21);
        assert!((c.points[0].omega - 0.4).abs() < 1e-14);
        assert_eq!(c.points[0].nominal, 0.0);
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().any(|l| l == "rho,omega_rad_s,omega_hz,amp"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 22);
        assert!(backbone_curve_with_v(&m, &v, 1.0, &[0.1, 0.1], &AmplitudeTransform::Identity).is_err());
    }

    #[test]
    fn rho_for_amplitude_inverts() {
        let (m, _) = cubic_model();
        let v = DMatrix::<Complex64>::identity(2, 2);
        let rho = rho_for_amplitude(&m, &v, 0.3, 0.5).unwrap().unwrap();
        assert!((nominal_amplitude(&m, &v, rho).unwrap() - 0.3).abs() < 1e-12);
        assert!(rho_for_amplitude(&m, &v, 100.0, 0.5).unwrap().is_none());
    }

    #[test]
    fn curve_distance_of_scaled_frequencies() {
        let (m, _) = cubic_model();
        let grid = uniform_grid(0.3, 50);
        let v = DMatrix::<Complex64>::identity(2, 2);
        let a = backbone_curve_with_v(&m, &v, 0.5, &grid, &AmplitudeTransform::Identity).unwrap();
        let mut b = a.clone();
        for p in &mut b.points {
            p.omega *= 1.003;
        }
        let d = curve_distance(&a, &b, f64::INFINITY, 40).unwrap();
        assert!((d - 0.003).abs() < 1e-12, "{d}");
        assert_eq!(curve_distance(&a, &a, f64::INFINITY, 40), Some(0.0));
        assert_eq!(curve_distance(&a, &a, -1.0, 40), None);
    }
}
