use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use ssm_backbone::backbone::AmplitudeTransform;
use ssm_backbone::benchkit::Observable;
use ssm_backbone::pipeline::ModeSelection;

#[derive(Debug, Parser)]
#[command(
    name = "ssmb",
    version,
    about = "Backbone curves of spectral submanifolds from decaying vibration signals"
)]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full identification and write all artifacts plus a manifest.
    FitBackbone(FitBackboneArgs),
    /// Write the delay-embedded training pairs as CSV.
    Embed(EmbedArgs),
    /// Fit the polynomial sampling map and write it as JSON.
    Fit(FitArgs),
    /// Eigen-data, modal parameters and resonance audits of a fitted map.
    Spectral(SpectralArgs),
    /// Solve the SSM of one mode of a fitted map.
    Ssm(SsmArgs),
    /// Backbone curve of one mode of a fitted map.
    Backbone(BackboneArgs),
    /// Simulate the two-mass oscillator, run the pipeline and compare with closed forms.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Signal CSV file(s); trajectories of all files are pooled.
    #[arg(short, long = "input", num_args = 1..)]
    pub input: Vec<PathBuf>,

    /// Sampling period in seconds (required for files without a time column).
    #[arg(long)]
    pub period: Option<f64>,

    /// Equilibrium value subtracted from the signal (default: tail mean).
    #[arg(long, allow_hyphen_values = true)]
    pub offset: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitOpts {
    /// Delay-embedding half dimension; the state has 2·nu coordinates.
    #[arg(long)]
    pub nu: Option<usize>,

    /// Polynomial degree of the fitted map.
    #[arg(long)]
    pub degree: Option<u32>,

    /// Ridge parameter of the least-squares fit.
    #[arg(long)]
    pub regularization: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SsmOpts {
    /// SSM expansion order (3 uses the closed form).
    #[arg(long)]
    pub order: Option<usize>,

    /// Relative gap below which a spectral product counts as resonant.
    #[arg(long)]
    pub resonance_tol: Option<f64>,

    /// Smallest accepted homological denominator.
    #[arg(long)]
    pub denominator_tol: Option<f64>,

    /// Continue when the resonance audit flags a mode.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct CurveOpts {
    /// Largest parametrization radius of the backbone grid (default: validity radius).
    #[arg(long)]
    pub rho_max: Option<f64>,

    /// Number of grid points.
    #[arg(long)]
    pub grid_points: Option<usize>,

    /// Amplitude transform: identity, divide-by-frequency or poly:c0,c1,...
    #[arg(long)]
    pub transform: Option<AmplitudeTransform>,
}

#[derive(Debug, Args)]
pub struct FitBackboneArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// TOML or JSON file with defaults; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub fit: FitOpts,

    /// Modes to analyse: all, 1,2 (1-based) or freq:47.5hz,160hz.
    #[arg(long)]
    pub modes: Option<ModeSelection>,

    #[command(flatten)]
    pub ssm: SsmOpts,

    #[command(flatten)]
    pub curve: CurveOpts,

    /// Output directory.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long, default_value_t = 3)]
    pub nu: usize,

    /// Output file (default: stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub fit: FitOpts,

    /// Output file (default: stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Fitted map as written by `fit`.
    #[arg(short, long)]
    pub model: PathBuf,

    /// Sampling period of the data the map was fitted to.
    #[arg(long)]
    pub period: f64,
}

#[derive(Debug, Args)]
pub struct SpectralArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    #[arg(long)]
    pub resonance_tol: Option<f64>,

    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SsmArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// 1-based mode index.
    #[arg(long, default_value_t = 1)]
    pub mode: usize,

    #[command(flatten)]
    pub ssm: SsmOpts,

    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BackboneArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// 1-based mode index.
    #[arg(long, default_value_t = 1)]
    pub mode: usize,

    /// Previously solved SSM (from `ssm`); solved from the map when absent.
    #[arg(long)]
    pub ssm_model: Option<PathBuf>,

    #[command(flatten)]
    pub ssm: SsmOpts,

    #[command(flatten)]
    pub curve: CurveOpts,

    /// Output CSV (default: stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// TOML or JSON benchmark settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Damping coefficient.
    #[arg(long)]
    pub c: Option<f64>,

    /// Linear stiffness.
    #[arg(long)]
    pub k0: Option<f64>,

    /// Cubic stiffness.
    #[arg(long)]
    pub kappa: Option<f64>,

    /// Sampling period in seconds.
    #[arg(long)]
    pub period: Option<f64>,

    /// Samples per trajectory.
    #[arg(long)]
    pub samples: Option<usize>,

    /// RK4 steps per sampling period.
    #[arg(long)]
    pub substeps: Option<usize>,

    /// Measured coordinate: x1, x2, v1 or v2.
    #[arg(long)]
    pub observable: Option<Observable>,

    #[command(flatten)]
    pub fit: FitOpts,

    #[command(flatten)]
    pub ssm: SsmOpts,

    /// Directory for the report and backbone CSVs.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}
