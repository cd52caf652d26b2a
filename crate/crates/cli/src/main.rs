//! `symflow` batch driver: every analysis writes one CSV report.

mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "symflow", version, about = "Symbolic dynamics and Markov coding for geodesic flows")]
pub struct Cli {
    /// Write the report here instead of stdout.
    #[arg(short, long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Subshift of finite type: entropy, irreducibility, period, orbits.
    Sft(SftArgs),
    /// Pressure, equilibrium states and Gibbs checks for a potential.
    Thermo(ThermoArgs),
    /// Suspension flow over an SFT.
    Flow(FlowArgs),
    /// Geodesic flow of a metric graph.
    Graph(GraphArgs),
    /// Regularity lemmas for good rectangles in the hyperbolic plane.
    HypVerify(HypArgs),
    /// Markov coding of a section family.
    Code(CodeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SftOp {
    Entropy,
    Irreducibility,
    Period,
    Orbits,
    Words,
    Distance,
}

#[derive(Debug, Args)]
pub struct SftArgs {
    #[arg(value_enum)]
    pub op: SftOp,
    /// Transition matrix file.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Largest word length or period.
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    /// First window for `distance` (space-separated symbols, odd length).
    #[arg(long)]
    pub x: Option<String>,
    /// Second window for `distance`.
    #[arg(long)]
    pub y: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ThermoOp {
    Pressure,
    Equilibrium,
    Gibbs,
    Derivative,
    Variance,
    Cylinder,
    Recode,
}

#[derive(Debug, Args)]
pub struct ThermoArgs {
    #[arg(value_enum)]
    pub op: ThermoOp,
    #[arg(long)]
    pub matrix: PathBuf,
    /// Potential file; zero when omitted.
    #[arg(long)]
    pub phi: Option<PathBuf>,
    /// Observable for `derivative` and `variance`.
    #[arg(long)]
    pub psi: Option<PathBuf>,
    /// Longest word for `gibbs`.
    #[arg(long, default_value_t = 12)]
    pub n_max: usize,
    /// Word for `cylinder`.
    #[arg(long)]
    pub word: Option<String>,
    /// Where `recode` writes the recoded matrix.
    #[arg(long)]
    pub matrix_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FlowOp {
    Entropy,
    Zeta,
    Mixing,
    Measure,
    Orbit,
    Clt,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(value_enum)]
    pub op: FlowOp,
    #[arg(long)]
    pub matrix: PathBuf,
    /// Roof function file (potential format).
    #[arg(long, conflicts_with = "roof_const")]
    pub roof: Option<PathBuf>,
    /// Constant roof value.
    #[arg(long)]
    pub roof_const: Option<f64>,
    /// Base potential for `measure` and `clt`; zero when omitted.
    #[arg(long)]
    pub phi: Option<PathBuf>,
    /// Observable for `clt`.
    #[arg(long)]
    pub psi: Option<PathBuf>,
    /// Real parts of the zeta probe grid.
    #[arg(long, value_delimiter = ',', default_value = "1.5")]
    pub re: Vec<f64>,
    /// Imaginary parts of the zeta probe grid.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub im: Vec<f64>,
    /// Period cutoff for `zeta` and `mixing`.
    #[arg(long, default_value_t = 30.0)]
    pub l_max: f64,
    /// Periodic word for `orbit`.
    #[arg(long)]
    pub word: Option<String>,
    /// Starting height for `orbit`.
    #[arg(long, default_value_t = 0.0)]
    pub height: f64,
    /// Flow time for `orbit`.
    #[arg(long, default_value_t = 0.0)]
    pub time: f64,
    #[arg(long, default_value_t = 2000.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GraphOp {
    Code,
    Geodesics,
    Arithmetic,
    Bm,
    Sections,
    Poincare,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[arg(value_enum)]
    pub op: GraphOp,
    /// Graph file ("vertices N" then "edge u v length" lines).
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value = "8")]
    pub l_max: String,
    /// Section scale as a multiple of the systole.
    #[arg(long, default_value = "1/10")]
    pub alpha_frac: String,
    /// Where `code` writes the edge-shift matrix.
    #[arg(long)]
    pub matrix_out: Option<PathBuf>,
    /// Where `code` writes the roof table.
    #[arg(long)]
    pub roof_out: Option<PathBuf>,
    /// Directed-edge window for `poincare`.
    #[arg(long)]
    pub window: Option<String>,
    /// Position of the current edge in the window.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Offset along the current edge.
    #[arg(long, default_value = "0")]
    pub offset: String,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["lemma", "rect"])))]
pub struct HypArgs {
    /// Lemma id, or `all`.
    #[arg(long)]
    pub lemma: Option<String>,
    /// Rectangle spec to build and sample instead of running lemmas.
    #[arg(long)]
    pub rect: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 10.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 9)]
    pub grid: usize,
    #[arg(long, default_value_t = 3.0)]
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CodeOp {
    Predicates,
    Sigma,
    Semiconjugacy,
    Regularity,
}

#[derive(Debug, Args)]
pub struct CodeArgs {
    #[arg(value_enum)]
    pub op: CodeOp,
    /// Metric graph whose exact section family is coded.
    #[arg(long, required_unless_present = "tube")]
    pub graph: Option<PathBuf>,
    /// Use a sampled family of rectangles along one hyperbolic geodesic,
    /// given as "minus,plus,sections,shrink" (angles in radians).
    #[arg(long, conflicts_with = "graph")]
    pub tube: Option<String>,
    #[arg(long, default_value = "1/10")]
    pub alpha_frac: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Flow horizon for `semiconjugacy`.
    #[arg(long, default_value = "5")]
    pub horizon: String,
    /// Where `sigma` writes the transition matrix.
    #[arg(long)]
    pub matrix_out: Option<PathBuf>,
    /// Where `sigma` writes the roof table.
    #[arg(long)]
    pub roof_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run::run(&cli) {
        Ok(run::Outcome::Pass) => ExitCode::SUCCESS,
        Ok(run::Outcome::Fail) => ExitCode::from(1),
        Err(run::Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(run::Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
