//! Config files and their merge with command-line flags.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use ssm_backbone::pipeline::{BenchConfig, PipelineConfig};
use ssm_backbone::{Error, Result};

use crate::args::{BenchArgs, CurveOpts, FitOpts, InputArgs, SsmOpts};

/// Settings of one identification run, as echoed into the manifest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub input: Vec<PathBuf>,
    pub period: Option<f64>,
    pub output: Option<PathBuf>,
    #[serde(flatten)]
    pub pipeline: PipelineConfig,
}

/// Reads TOML (`.toml`) or JSON (anything else).
pub fn load_file<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    if is_toml {
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    } else {
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

pub fn apply_input(run: &mut RunConfig, input: &InputArgs) {
    if !input.input.is_empty() {
        run.input = input.input.clone();
    }
    set(&mut run.period, input.period.map(Some));
    set(&mut run.pipeline.offset, input.offset.map(Some));
}

pub fn apply_fit(config: &mut PipelineConfig, fit: &FitOpts) {
    set(&mut config.nu, fit.nu);
    set(&mut config.degree, fit.degree);
    set(&mut config.regularization, fit.regularization.map(Some));
}

pub fn apply_ssm(config: &mut PipelineConfig, ssm: &SsmOpts) {
    set(&mut config.order, ssm.order);
    set(&mut config.resonance_tol, ssm.resonance_tol);
    set(&mut config.denominator_tol, ssm.denominator_tol);
    config.force |= ssm.force;
}

pub fn apply_curve(config: &mut PipelineConfig, curve: &CurveOpts) {
    set(&mut config.rho_max, curve.rho_max.map(Some));
    set(&mut config.grid_points, curve.grid_points);
    set(&mut config.transform, curve.transform.clone());
}

pub fn bench_config(args: &BenchArgs) -> Result<BenchConfig> {
    let mut config: BenchConfig = match &args.config {
        Some(path) => load_file(path)?,
        None => BenchConfig::default(),
    };
    set(&mut config.params.c, args.c);
    set(&mut config.params.k0, args.k0);
    set(&mut config.params.kappa, args.kappa);
    set(&mut config.period, args.period);
    set(&mut config.samples, args.samples);
    set(&mut config.substeps, args.substeps);
    set(&mut config.observable, args.observable);
    apply_fit(&mut config.pipeline, &args.fit);
    apply_ssm(&mut config.pipeline, &args.ssm);
    config.params.validate()?;
    config.pipeline.validate()?;
    Ok(config)
}
