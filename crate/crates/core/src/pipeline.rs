//! End-to-end identification: shift, embed, fit, diagonalize, audit, solve
//! the SSM of each selected mode and sample its backbone curve.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use std::time::Instant;

use crate::backbone::{self, AmpConvention, AmplitudeTransform, BackboneCurve};
use crate::benchkit::{self, MechanicalParams, Observable};
use crate::error::{Error, Result};
use crate::polyfit::{compose_linear_change, fit_nar_with_diagnostics, FitDiagnostics, PolyMap};
use crate::signal_io::{build_delay_dataset, shift_to_fixed_point, SignalSet};
use crate::spectral::{
    eigendecompose, linear_part, modal_parameters, resonance_audit, spectral_quotient, AuditReport, ModalParameters,
    SpectralData, DEFAULT_RESONANCE_TOL,
};
use crate::ssm::{
    residual_slope, ssm_cubic_continuous, ssm_cubic_discrete, ssm_recursive, Flavor, SsmModel, DEFAULT_DENOMINATOR_TOL,
};

/// Relative window around a requested frequency in which a mode may be picked.
pub const FREQUENCY_WINDOW: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "values")]
pub enum ModeSelection {
    All,
    /// 1-based pair indices.
    Indices(Vec<usize>),
    /// Target damped frequencies in Hz.
    Frequencies(Vec<f64>),
}

impl FromStr for ModeSelection {
    type Err = Error;

    /// `all`, `1,2`, or `freq:47.5hz,160hz`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(ModeSelection::All);
        }
        if let Some(list) = s.strip_prefix("freq:") {
            let freqs = list
                .split(',')
                .map(|t| {
                    let t = t.trim().to_ascii_lowercase();
                    let t = t.strip_suffix("hz").unwrap_or(&t);
                    t.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|f| *f > 0.0)
                        .ok_or_else(|| Error::Config(format!("bad frequency '{t}' in mode selection")))
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(ModeSelection::Frequencies(freqs));
        }
        let idx = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&i| i >= 1)
                    .ok_or_else(|| Error::Config(format!("bad mode index '{}' (modes are 1-based)", t.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModeSelection::Indices(idx))
    }
}

impl ModeSelection {
    /// 0-based pair indices, in request order without duplicates.
    pub fn resolve(&self, spec: &SpectralData) -> Result<Vec<usize>> {
        let pairs = spec.pairs();
        let mut out: Vec<usize> = Vec::new();
        match self {
            ModeSelection::All => out.extend(0..pairs),
            ModeSelection::Indices(list) => {
                for &i in list {
                    if i == 0 || i > pairs {
                        return Err(Error::InvalidMode(format!(
                            "mode {i} requested, {pairs} pair(s) identified"
                        )));
                    }
                    if !out.contains(&(i - 1)) {
                        out.push(i - 1);
                    }
                }
            }
            ModeSelection::Frequencies(targets) => {
                let modal = modal_parameters(spec)?;
                for &f in targets {
                    let hz: Vec<f64> = modal.iter().map(|m| m.damped_omega / (2.0 * PI)).collect();
                    let best = (0..pairs)
                        .filter(|&l| (hz[l] - f).abs() <= FREQUENCY_WINDOW * f)
                        .min_by(|&a, &b| (hz[a] - f).abs().total_cmp(&(hz[b] - f).abs()))
                        .ok_or_else(|| {
                            Error::InvalidMode(format!(
                                "no mode within ±{:.0}% of {f} Hz (identified: {})",
                                100.0 * FREQUENCY_WINDOW,
                                hz.iter().map(|h| format!("{h:.4} Hz")).collect::<Vec<_>>().join(", ")
                            ))
                        })?;
                    if !out.contains(&best) {
                        out.push(best);
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub nu: usize,
    pub degree: u32,
    pub modes: ModeSelection,
    pub order: usize,
    /// Largest radius of the backbone grid; the model's validity radius when unset.
    pub rho_max: Option<f64>,
    pub grid_points: usize,
    pub transform: AmplitudeTransform,
    pub resonance_tol: f64,
    pub denominator_tol: f64,
    pub regularization: Option<f64>,
    /// Continue when the resonance audit flags a mode.
    pub force: bool,
    /// Equilibrium value of the signal; tail mean when unset.
    pub offset: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            nu: 3,
            degree: 3,
            modes: ModeSelection::All,
            order: 3,
            rho_max: None,
            grid_points: backbone::DEFAULT_GRID_POINTS,
            transform: AmplitudeTransform::Identity,
            resonance_tol: DEFAULT_RESONANCE_TOL,
            denominator_tol: DEFAULT_DENOMINATOR_TOL,
            regularization: None,
            force: false,
            offset: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nu < 1 {
            return Err(Error::Config("nu must be at least 1".into()));
        }
        if self.order < 1 {
            return Err(Error::Config("SSM order must be at least 1".into()));
        }
        if self.order >= 3 && self.degree < 3 {
            return Err(Error::Config(format!(
                "a cubic or higher SSM needs a fit of degree >= 3, got {}",
                self.degree
            )));
        }
        if self.degree < 1 {
            return Err(Error::Config("fit degree must be at least 1".into()));
        }
        if let Some(r) = self.rho_max {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Config(format!("rho_max must be positive, got {r}")));
            }
        }
        if !(self.resonance_tol >= 0.0 && self.denominator_tol >= 0.0) {
            return Err(Error::Config("tolerances must be non-negative".into()));
        }
        Ok(())
    }
}

/// Everything computed for one selected mode.
#[derive(Debug, Clone)]
pub struct ModeResult {
    /// 0-based pair index.
    pub mode: usize,
    pub modal: ModalParameters,
    pub sigma: u32,
    pub audit: AuditReport,
    pub ssm: SsmModel,
    pub curve: BackboneCurve,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub offset: f64,
    pub fit: PolyMap<f64>,
    pub diagnostics: FitDiagnostics,
    pub spectral: SpectralData,
    pub modal: Vec<ModalParameters>,
    /// `V⁻¹ F(V y) − Λ y`.
    pub nonlinearity: PolyMap<Complex64>,
    pub modes: Vec<ModeResult>,
    pub warnings: Vec<String>,
}

/// Fits the sampling map of the delay-embedded, equilibrium-shifted signals.
pub fn identify_map(signals: &SignalSet, config: &PipelineConfig) -> Result<(f64, PolyMap<f64>, FitDiagnostics)> {
    config.validate()?;
    let (shifted, offset) = shift_to_fixed_point(signals, config.offset).map_err(Error::at("shift"))?;
    let data = build_delay_dataset(&shifted, config.nu).map_err(Error::at("embed"))?;
    let (fit, diag) =
        fit_nar_with_diagnostics(&data, config.degree, config.regularization).map_err(Error::at("fit"))?;
    Ok((offset, fit, diag))
}

/// Eigen-data of the fitted map's linear part.
pub fn spectral_stage(fit: &PolyMap<f64>, period: f64) -> Result<SpectralData> {
    eigendecompose(&linear_part(fit), period).map_err(Error::at("spectral"))
}

/// `V⁻¹ F(V y)` with its linear part removed.
pub fn diagonal_nonlinearity(fit: &PolyMap<f64>, spec: &SpectralData) -> Result<PolyMap<Complex64>> {
    Ok(compose_linear_change(fit, &spec.v, &spec.v_inv)
        .map_err(Error::at("ssm"))?
        .without_linear_part())
}

/// SSM of one mode: closed form at cubic order, recursive otherwise.
pub fn ssm_stage(g: &PolyMap<Complex64>, spec: &SpectralData, mode: usize, order: usize, tol: f64) -> Result<SsmModel> {
    spec.check_mode(mode).map_err(Error::at("ssm"))?;
    let model = if order == 3 {
        ssm_cubic_discrete(g, &spec.eigenvalues, mode, tol)
    } else {
        ssm_recursive(g, &spec.eigenvalues, mode, order, Flavor::DiscreteMap, tol)
    };
    model.map_err(Error::at("ssm"))
}

/// Spectral quotient and resonance audit of one mode; an error when the
/// audit flags a near-resonance and `force` is off.
pub fn audit_stage(spec: &SpectralData, mode: usize, tol: f64, force: bool) -> Result<(u32, AuditReport)> {
    let sigma = spectral_quotient(spec, mode).map_err(Error::at("audit"))?;
    let report = resonance_audit(spec, mode, sigma, tol).map_err(Error::at("audit"))?;
    if !report.passed() {
        let flags = report.flags().count();
        if !force {
            return Err(Error::at("audit")(Error::ResonanceAudit { mode: mode + 1, flags }));
        }
        log::warn!("mode {}: {flags} near-resonance(s) ignored (--force)", mode + 1);
    }
    Ok((sigma, report))
}

/// Backbone of one mode on a uniform grid up to `rho_max` (default: validity radius).
pub fn backbone_stage(model: &SsmModel, spec: &SpectralData, config: &PipelineConfig) -> Result<BackboneCurve> {
    let rho_max = config.rho_max.unwrap_or(model.validity_radius);
    let grid = backbone::uniform_grid(rho_max, config.grid_points);
    backbone::backbone_curve(model, spec, &grid, &config.transform).map_err(Error::at("backbone"))
}

pub fn run_pipeline(signals: &SignalSet, config: &PipelineConfig) -> Result<PipelineOutput> {
    let (offset, fit, diagnostics) = identify_map(signals, config)?;
    let spectral = spectral_stage(&fit, signals.period)?;
    let modal = modal_parameters(&spectral).map_err(Error::at("spectral"))?;
    let nonlinearity = diagonal_nonlinearity(&fit, &spectral)?;
    let selected = config.modes.resolve(&spectral).map_err(Error::at("modes"))?;
    let mut warnings = spectral.warnings.clone();
    let mut modes = Vec::with_capacity(selected.len());
    for mode in selected {
        let (sigma, audit) = audit_stage(&spectral, mode, config.resonance_tol, config.force)?;
        let ssm = ssm_stage(&nonlinearity, &spectral, mode, config.order, config.denominator_tol)?;
        let curve = backbone_stage(&ssm, &spectral, config)?;
        warnings.extend(curve.warnings.iter().map(|w| format!("mode {}: {w}", mode + 1)));
        modes.push(ModeResult {
            mode,
            modal: modal[mode],
            sigma,
            audit,
            ssm,
            curve,
        });
    }
    Ok(PipelineOutput {
        offset,
        fit,
        diagnostics,
        spectral,
        modal,
        nonlinearity,
        modes,
        warnings,
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_curve(curve: &BackboneCurve, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    curve.write_csv(&mut buf)?;
    write_file(path, &buf)
}

/// Writes the fitted map, spectral data, and per-mode audit, SSM and
/// backbone files into `dir`; returns the paths written.
pub fn write_artifacts(output: &PipelineOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    let mut put = |name: String, contents: Vec<u8>| -> Result<()> {
        let path = dir.join(name);
        write_file(&path, &contents)?;
        written.push(path);
        Ok(())
    };
    put("fit.json".into(), output.fit.to_json().into_bytes())?;
    put(
        "spectral.json".into(),
        serde_json::to_string_pretty(&output.spectral)?.into_bytes(),
    )?;
    put(
        "modal.json".into(),
        serde_json::to_string_pretty(&output.modal)?.into_bytes(),
    )?;
    for m in &output.modes {
        let k = m.mode + 1;
        put(format!("audit_mode{k}.json"), m.audit.to_json().into_bytes())?;
        put(format!("ssm_mode{k}.json"), m.ssm.to_json().into_bytes())?;
        let mut buf = Vec::new();
        m.curve.write_csv(&mut buf)?;
        put(format!("backbone_mode{k}.csv"), buf)?;
        let mut buf = Vec::new();
        m.curve
            .clone()
            .with_convention(AmpConvention::Nominal)
            .write_csv(&mut buf)?;
        put(format!("backbone_mode{k}_nominal.csv"), buf)?;
    }
    Ok(written)
}

/// Coarse radius of the benchmark's step-halving test (paired with half of it).
pub const SLOPE_EPS: f64 = 1e-2;

/// Settings of the built-in oscillator benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub params: MechanicalParams,
    pub period: f64,
    pub samples: usize,
    pub substeps: usize,
    pub observable: Observable,
    pub pipeline: PipelineConfig,
    pub amp_cap: f64,
    pub frequency_tol: f64,
    pub spectrum_tol: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            params: MechanicalParams::default(),
            period: benchkit::DEFAULT_PERIOD,
            samples: benchkit::DEFAULT_SAMPLES,
            substeps: benchkit::DEFAULT_STEPS_PER_SAMPLE,
            observable: Observable::V1,
            pipeline: PipelineConfig {
                nu: 2,
                degree: 11,
                regularization: Some(1e-20),
                order: 5,
                modes: ModeSelection::Indices(vec![1, 2]),
                transform: AmplitudeTransform::DivideByFrequency,
                ..PipelineConfig::default()
            },
            amp_cap: 0.8,
            frequency_tol: 1e-2,
            spectrum_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub name: String,
    pub value: f64,
    /// `None` for informational rows.
    pub tolerance: Option<f64>,
    /// `value ≤ tolerance`, or `value ≥ tolerance` for lower bounds.
    pub lower_bound: bool,
    pub passed: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub rows: Vec<BenchRow>,
    pub curves: Vec<BackboneCurve>,
    pub fit_condition: f64,
}

impl BenchReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<52} {:>13} {:>13} {:>9}  result\n",
            "check", "value", "tolerance", "seconds"
        );
        for r in &self.rows {
            let (tol, result) = match r.tolerance {
                Some(t) => (
                    format!("{}{t:>11.1e}", if r.lower_bound { ">=" } else { "<=" }),
                    if r.passed { "PASS" } else { "FAIL" },
                ),
                None => ("-".to_string(), "info"),
            };
            out.push_str(&format!(
                "{:<52} {:>13.4e} {tol:>13} {:>9.2}  {result}\n",
                r.name, r.value, r.seconds
            ));
        }
        out
    }
}

fn row(name: impl Into<String>, value: f64, tolerance: f64, lower_bound: bool, seconds: f64) -> BenchRow {
    let passed = if lower_bound {
        value >= tolerance
    } else {
        value <= tolerance
    };
    BenchRow {
        name: name.into(),
        value,
        tolerance: Some(tolerance),
        lower_bound,
        passed,
        seconds,
    }
}

fn info_row(name: impl Into<String>, value: f64) -> BenchRow {
    BenchRow {
        name: name.into(),
        value,
        tolerance: None,
        lower_bound: false,
        passed: true,
        seconds: 0.0,
    }
}

/// Simulates the oscillator, runs the pipeline on the two modal decays and
/// compares the result with the closed-form spectrum, SSM and backbones.
/// Failed comparisons are report rows, not errors.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    let params = &config.params;
    let clock = Instant::now();
    let signals = benchkit::benchmark_signals(
        params,
        config.observable,
        config.period,
        config.samples,
        config.substeps,
    )?;
    let halved = benchkit::benchmark_signals(
        params,
        config.observable,
        config.period,
        config.samples,
        2 * config.substeps,
    )?;
    let integration_error = signals
        .trajectories
        .iter()
        .zip(&halved.trajectories)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    let mut rows = vec![row(
        "simulation error estimate (step halving)",
        integration_error,
        1e-8,
        false,
        clock.elapsed().as_secs_f64(),
    )];

    let clock = Instant::now();
    let output = run_pipeline(&signals, &config.pipeline)?;
    let seconds = clock.elapsed().as_secs_f64();
    let exact = params.eigenvalues();
    let spectrum_error = output
        .spectral
        .eigenvalues
        .iter()
        .zip(exact.iter())
        .map(|(mu, l)| (mu - (l * config.period).exp()).norm())
        .fold(0.0, f64::max);
    rows.push(row(
        "spectrum max |mu - exp(lambda T)|",
        spectrum_error,
        config.spectrum_tol,
        false,
        seconds,
    ));

    for m in &output.modes {
        let dev = benchkit::backbone_deviation(&m.curve, params, m.mode + 1, config.amp_cap)?;
        let mut r = row(
            format!(
                "mode {} backbone rel. freq. error (Amp <= {})",
                m.mode + 1,
                config.amp_cap
            ),
            dev.max_relative,
            config.frequency_tol,
            false,
            0.0,
        );
        r.passed &= dev.points > 0;
        rows.push(r);
        let omegas = m.curve.points.iter().map(|p| p.omega);
        let span = omegas.clone().fold(f64::NEG_INFINITY, f64::max) - omegas.fold(f64::INFINITY, f64::min);
        rows.push(info_row(
            format!("mode {} backbone relative frequency span", m.mode + 1),
            span / m.modal.damped_omega,
        ));
        rows.push(row(
            format!("mode {} backbone amplitude reached", m.mode + 1),
            dev.amp_reached,
            0.95 * config.amp_cap,
            true,
            0.0,
        ));
    }

    let clock = Instant::now();
    let g = benchkit::analytic_g(params);
    let mut worst: f64 = 0.0;
    for mode in [1, 2] {
        let table = benchkit::analytic_ssm_coefficients(params, mode)?;
        let solved = ssm_cubic_continuous(&g, &exact, mode - 1, config.pipeline.denominator_tol)?;
        worst = worst.max(coefficient_distance(&table, &solved));
    }
    rows.push(row(
        "closed-form cubic SSM vs analytic table",
        worst,
        1e-12,
        false,
        clock.elapsed().as_secs_f64(),
    ));

    let clock = Instant::now();
    for (order, bound) in [(3usize, 3.5), (5, 5.5)] {
        let model = ssm_stage(
            &output.nonlinearity,
            &output.spectral,
            0,
            order,
            config.pipeline.denominator_tol,
        )?;
        let slope = residual_slope(&model, &output.nonlinearity, SLOPE_EPS, 64)?.slope;
        rows.push(row(
            format!("order-{order} invariance residual slope (mode 1)"),
            slope,
            bound,
            true,
            clock.elapsed().as_secs_f64(),
        ));
    }

    Ok(BenchReport {
        config: config.clone(),
        rows,
        curves: output.modes.iter().map(|m| m.curve.clone()).collect(),
        fit_condition: output.diagnostics.condition,
    })
}

/// Largest relative difference of parametrization and reduced coefficients.
pub fn coefficient_distance(a: &SsmModel, b: &SsmModel) -> f64 {
    let mut worst: f64 = 0.0;
    let rel = |x: Complex64, y: Complex64| (x - y).norm() / x.norm().max(y.norm()).max(f64::MIN_POSITIVE);
    for j in 0..a.dim().min(b.dim()) {
        for (s1, s2) in a.multi_indices() {
            let (x, y) = (a.w(j, s1, s2), b.w(j, s1, s2));
            if x != y {
                worst = worst.max(rel(x, y));
            }
        }
    }
    for (x, y) in a.reduced.iter().zip(&b.reduced) {
        if x != y {
            worst = worst.max(rel(*x, *y));
        }
    }
    worst
}
