use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;

use ssm_backbone::pipeline::{
    self, audit_stage, backbone_stage, diagonal_nonlinearity, identify_map, spectral_stage, ssm_stage, PipelineConfig,
    PipelineOutput,
};
use ssm_backbone::polyfit::PolyMap;
use ssm_backbone::signal_io::{build_delay_dataset, load_signals, shift_to_fixed_point, CsvLayout, SignalSet};
use ssm_backbone::spectral::{modal_parameters, resonance_audit, spectral_quotient, SpectralData};
use ssm_backbone::ssm::SsmModel;
use ssm_backbone::{Error, Result};

use crate::args::{BackboneArgs, BenchArgs, EmbedArgs, FitArgs, FitBackboneArgs, ModelArgs, SpectralArgs, SsmArgs};
use crate::config::{self, RunConfig};

pub const DEFAULT_OUTPUT_DIR: &str = "ssmb-out";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes to `path`, or stdout when `None`.
fn emit(path: Option<&Path>, contents: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, contents).map_err(io_err(p)),
        None => std::io::stdout()
            .write_all(contents)
            .map_err(|e| Error::Data(format!("writing stdout: {e}"))),
    }
}

fn load_inputs(paths: &[PathBuf], period: Option<f64>) -> Result<SignalSet> {
    if paths.is_empty() {
        return Err(Error::Config("no input file (use --input)".into()));
    }
    let layout = CsvLayout { period };
    let sets = paths
        .iter()
        .map(|p| load_signals(p, layout))
        .collect::<Result<Vec<_>>>()?;
    SignalSet::merge(sets)
}

fn run_config(config_file: Option<&Path>) -> Result<RunConfig> {
    match config_file {
        Some(path) => config::load_file(path),
        None => Ok(RunConfig::default()),
    }
}

pub fn fit_backbone(args: &FitBackboneArgs) -> Result<()> {
    let mut run = run_config(args.config.as_deref())?;
    config::apply_input(&mut run, &args.input);
    config::apply_fit(&mut run.pipeline, &args.fit);
    config::apply_ssm(&mut run.pipeline, &args.ssm);
    config::apply_curve(&mut run.pipeline, &args.curve);
    if let Some(m) = &args.modes {
        run.pipeline.modes = m.clone();
    }
    if let Some(o) = &args.output {
        run.output = Some(o.clone());
    }
    run.pipeline.validate()?;

    let signals = load_inputs(&run.input, run.period)?;
    let output = pipeline::run_pipeline(&signals, &run.pipeline)?;
    for w in &output.warnings {
        log::warn!("{w}");
    }
    let dir = run.output.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    let mut written = pipeline::write_artifacts(&output, &dir)?;
    let manifest_path = dir.join("manifest.json");
    written.push(manifest_path.clone());
    let manifest = manifest(&run, &signals, &output, &written);
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?).map_err(io_err(&manifest_path))?;

    for m in &output.modes {
        println!(
            "mode {}: {:.6} Hz, zeta {:.6}, sigma {}, validity radius {:.4e}, {} backbone points",
            m.mode + 1,
            m.modal.damped_omega / (2.0 * std::f64::consts::PI),
            m.modal.zeta,
            m.sigma,
            m.ssm.validity_radius,
            m.curve.points.len()
        );
    }
    println!("wrote {} files to {}", written.len(), dir.display());
    Ok(())
}

fn manifest(run: &RunConfig, signals: &SignalSet, output: &PipelineOutput, written: &[PathBuf]) -> serde_json::Value {
    let modes: Vec<_> = output
        .modes
        .iter()
        .map(|m| {
            let gap = m
                .audit
                .smallest_gap()
                .map(|e| json!({ "s1": e.s1, "s2": e.s2, "j": e.j + 1, "relative_gap": e.relative_gap }));
            json!({
                "mode": m.mode + 1,
                "damped_frequency_hz": m.modal.damped_omega / (2.0 * std::f64::consts::PI),
                "zeta": m.modal.zeta,
                "sigma": m.sigma,
                "audit_passed": m.audit.passed(),
                "smallest_external_gap": gap,
                "smallest_denominator": m.ssm.smallest_denominator().map(|d| d.magnitude),
                "validity_radius": m.ssm.validity_radius,
            })
        })
        .collect();
    json!({
        "tool": "ssmb",
        "version": env!("CARGO_PKG_VERSION"),
        "arguments": std::env::args().skip(1).collect::<Vec<_>>(),
        "config": run,
        "seed": null,
        "data": {
            "trajectories": signals.trajectories.len(),
            "samples": signals.trajectories.iter().map(Vec::len).collect::<Vec<_>>(),
            "labels": signals.labels,
            "period": signals.period,
            "offset": output.offset,
        },
        "fit": output.diagnostics,
        "spectral_warnings": output.spectral.warnings,
        "modes": modes,
        "warnings": output.warnings,
        "artifacts": written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    })
}

pub fn embed(args: &EmbedArgs) -> Result<()> {
    let signals = load_inputs(&args.input.input, args.input.period)?;
    let (shifted, offset) = shift_to_fixed_point(&signals, args.input.offset)?;
    let data = build_delay_dataset(&shifted, args.nu)?;
    let n = data.dim();
    let mut out = format!("# offset: {offset:.16e}\n# period: {:.16e}\n", signals.period);
    let head: Vec<String> = (1..=n)
        .map(|i| format!("x{i}"))
        .chain((1..=n).map(|i| format!("y{i}")))
        .chain(std::iter::once("trajectory".to_string()))
        .collect();
    out.push_str(&head.join(","));
    out.push('\n');
    for ((x, y), src) in data.states.iter().zip(&data.successors).zip(&data.source) {
        let row: Vec<String> = x.iter().chain(y).map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join(","));
        out.push_str(&format!(",{}\n", src + 1));
    }
    emit(args.output.as_deref(), out.as_bytes())
}

pub fn fit(args: &FitArgs) -> Result<()> {
    let mut run = run_config(args.config.as_deref())?;
    config::apply_input(&mut run, &args.input);
    config::apply_fit(&mut run.pipeline, &args.fit);
    let signals = load_inputs(&run.input, run.period)?;
    let (offset, map, diag) = identify_map(&signals, &run.pipeline)?;
    log::info!(
        "offset {offset:.6e}; {} pairs, {} basis functions, condition {:.3e}",
        diag.pairs,
        diag.basis_len,
        diag.condition
    );
    emit(args.output.as_deref(), map.to_json().as_bytes())
}

fn load_model(args: &ModelArgs) -> Result<(PolyMap<f64>, SpectralData)> {
    let text = fs::read_to_string(&args.model).map_err(io_err(&args.model))?;
    let map = PolyMap::<f64>::from_json(&text)?;
    let spec = spectral_stage(&map, args.period)?;
    Ok((map, spec))
}

pub fn spectral(args: &SpectralArgs) -> Result<()> {
    let (_, spec) = load_model(&args.model)?;
    let modal = modal_parameters(&spec)?;
    let tol = args.resonance_tol.unwrap_or(PipelineConfig::default().resonance_tol);
    let mut audits = Vec::new();
    for mode in 0..spec.pairs() {
        match spectral_quotient(&spec, mode).and_then(|sigma| resonance_audit(&spec, mode, sigma, tol)) {
            Ok(report) => {
                eprint!("{}", report.to_table());
                audits.push(serde_json::to_value(&report)?);
            }
            Err(e) => {
                log::warn!("mode {}: no audit ({e})", mode + 1);
                audits.push(json!({ "mode": mode, "error": e.to_string() }));
            }
        }
    }
    let out = json!({ "spectral": spec, "modal": modal, "audits": audits });
    emit(args.output.as_deref(), serde_json::to_string_pretty(&out)?.as_bytes())
}

fn solve_mode(map: &PolyMap<f64>, spec: &SpectralData, mode: usize, config: &PipelineConfig) -> Result<SsmModel> {
    if mode == 0 || mode > spec.pairs() {
        return Err(Error::InvalidMode(format!(
            "mode {mode} requested, {} pair(s) identified",
            spec.pairs()
        )));
    }
    audit_stage(spec, mode - 1, config.resonance_tol, config.force)?;
    let g = diagonal_nonlinearity(map, spec)?;
    ssm_stage(&g, spec, mode - 1, config.order, config.denominator_tol)
}

pub fn ssm(args: &SsmArgs) -> Result<()> {
    let mut config = PipelineConfig::default();
    config::apply_ssm(&mut config, &args.ssm);
    let (map, spec) = load_model(&args.model)?;
    let model = solve_mode(&map, &spec, args.mode, &config)?;
    for w in &model.warnings {
        log::warn!("{w}");
    }
    emit(args.output.as_deref(), model.to_json().as_bytes())
}

pub fn backbone(args: &BackboneArgs) -> Result<()> {
    let mut config = PipelineConfig::default();
    config::apply_ssm(&mut config, &args.ssm);
    config::apply_curve(&mut config, &args.curve);
    let (map, spec) = load_model(&args.model)?;
    let model = match &args.ssm_model {
        Some(path) => {
            let model = SsmModel::from_json(&fs::read_to_string(path).map_err(io_err(path))?)?;
            if model.eigenvalues.len() != spec.dim() {
                return Err(Error::DimensionMismatch {
                    expected: spec.dim(),
                    got: model.eigenvalues.len(),
                });
            }
            model
        }
        None => solve_mode(&map, &spec, args.mode, &config)?,
    };
    let curve = backbone_stage(&model, &spec, &config)?;
    for w in &curve.warnings {
        log::warn!("{w}");
    }
    let mut buf = Vec::new();
    curve.write_csv(&mut buf)?;
    emit(args.output.as_deref(), &buf)
}

pub fn bench(args: &BenchArgs) -> Result<()> {
    let config = config::bench_config(args)?;
    let report = pipeline::run_benchmark(&config)?;
    print!("{}", report.to_table());
    println!(
        "{}: {} of {} checks passed",
        if report.passed() { "PASS" } else { "FAIL" },
        report.rows.iter().filter(|r| r.passed).count(),
        report.rows.len()
    );
    if let Some(dir) = &args.output {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join("report.json");
        fs::write(&path, serde_json::to_string_pretty(&report)?).map_err(io_err(&path))?;
        for curve in &report.curves {
            pipeline::write_curve(curve, &dir.join(format!("backbone_mode{}.csv", curve.mode + 1)))?;
        }
    }
    Ok(())
}
