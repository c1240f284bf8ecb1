use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Angle-averaging triangle transformation toolkit.
#[derive(Debug, Parser)]
#[command(name = "tritrans", version, args_override_self = true)]
pub struct Cli {
    /// TOML file with default flag values (top-level keys for global flags,
    /// one table per subcommand).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Degeneracy threshold in radians: every angle must lie in (eps, π - eps).
    #[arg(long, global = true, value_name = "RAD")]
    pub eps_deg: Option<f64>,

    /// Angle sums within this distance of π are rescaled onto π.
    #[arg(long, global = true, value_name = "RAD")]
    pub sum_repair_tol: Option<f64>,

    /// Step count above which closed-form iteration switches to deviation form.
    #[arg(long, global = true, value_name = "N")]
    pub closed_form_cap: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the trajectory T^0..T^n of an angle triple.
    Iterate(IterateArgs),
    /// Predict the quality after the given step counts without iterating.
    Predict(PredictArgs),
    /// Run the ruler-and-compass construction on a triangle in the plane.
    Construct(ConstructArgs),
    /// Smooth an N-simple mesh (N triangles sharing one inner vertex).
    SimpleMesh(SimpleMeshArgs),
    /// Write a per-triangle quality report for an OFF/OBJ mesh.
    Analyze(AnalyzeArgs),
    /// Render an OFF/OBJ mesh to SVG, coloured by triangle quality.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct AngleInput {
    /// Three angles, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true, required = true)]
    pub angles: Vec<f64>,
    /// Read and print angles in degrees instead of radians.
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Debug, Args)]
pub struct IterateArgs {
    #[command(flatten)]
    pub input: AngleInput,
    #[arg(long, default_value_t = 10)]
    pub steps: u64,
    /// Compute every row from the closed form instead of by repetition.
    #[arg(long)]
    pub closed_form: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub input: AngleInput,
    /// Step counts, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub steps: Vec<u64>,
    /// Also print the even-step formula in its originally printed form.
    #[arg(long)]
    pub paper_literal: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    /// Vertices as x1,y1,x2,y2,x3,y3.
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true, required = true)]
    pub points: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    /// Rescale every image back to the input area about its centroid.
    #[arg(long)]
    pub rescale: bool,
    #[arg(long)]
    pub json: bool,
    /// Write all iterates into one SVG file.
    #[arg(long, value_name = "PATH")]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimpleMeshArgs {
    /// Angle-mesh JSON: {"N": n, "triangles": [{"alpha", "beta", "gamma"}, ...]}.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["n", "optimal", "random"])]
    pub input: Option<PathBuf>,
    /// Number of triangles around the inner vertex.
    #[arg(long)]
    pub n: Option<usize>,
    /// Start from the optimal mesh.
    #[arg(long, requires = "n", conflicts_with = "random")]
    pub optimal: bool,
    /// Start from a random admissible mesh with this seed.
    #[arg(long, value_name = "SEED", requires = "n")]
    pub random: Option<u64>,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    #[arg(long)]
    pub json: bool,
    /// Reconstruct the final mesh and render it.
    #[arg(long, value_name = "PATH")]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub colormap: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Off,
    Obj,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub mesh: PathBuf,
    /// Defaults to the file extension.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Steps at which to predict quality, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub steps: Vec<u64>,
    /// JSON report path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value_t = tritrans_core::mesh_io::DEFAULT_HISTOGRAM_BINS)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    pub mesh: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// "default", "grayscale" or a list of q:#rrggbb stops.
    #[arg(long)]
    pub colormap: Option<String>,
}
