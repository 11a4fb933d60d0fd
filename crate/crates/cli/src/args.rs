use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "qcmc", version, about = "Path-integral jump processes, centering distance geometry and restricted-space Monte Carlo")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the first ten raw generator words for a seed.
    RngSelftest(RngArgs),
    /// Discrete Brownian bridges.
    #[command(subcommand)]
    Bridge(BridgeCommand),
    /// Two-particle jump processes.
    #[command(subcommand)]
    Process(ProcessCommand),
    /// Re-run the reference tables.
    #[command(subcommand)]
    Table(TableCommand),
    /// Relative-entropy diagnostics.
    #[command(subcommand)]
    Entropy(EntropyCommand),
    /// Embed a graph by centering, then vibrant centering if needed.
    Embed(EmbedArgs),
    /// Realize the orientation constraints of a graph by linear programming.
    Realize(RealizeArgs),
    /// Restricted-space Metropolis sampling.
    #[command(subcommand)]
    Mc(McCommand),
    /// Non-equilibrium polymer demonstration.
    #[command(subcommand)]
    Polymer(PolymerCommand),
    /// Linear programming.
    #[command(subcommand)]
    Lp(LpCommand),
    /// Write a bundled example instance.
    Export(ExportArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct RngArgs {
    #[arg(long, default_value_t = 5489)]
    pub seed: u32,
}

#[derive(Debug, Subcommand)]
pub enum BridgeCommand {
    /// Sample bridges and write their points as CSV.
    Sample(BridgeArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct BridgeArgs {
    /// Copies per bridge.
    #[arg(long = "K")]
    pub copies: usize,
    /// Spatial dimension.
    #[arg(long = "d", default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ProcessCommand {
    /// Run one process and write its counters as a single CSV row.
    Run(ProcessArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum KindArg {
    #[value(name = "N")]
    N,
    #[value(name = "W")]
    W,
}

#[derive(Debug, Args, Serialize)]
pub struct ProcessArgs {
    #[arg(long, value_enum, ignore_case = true)]
    pub kind: KindArg,
    #[arg(long = "K")]
    pub copies: usize,
    /// Offset between the compared copies.
    #[arg(long = "j", default_value_t = 1)]
    pub offset: usize,
    /// Pick the two copies uniformly among all pairs (kind N only).
    #[arg(long)]
    pub pair_mode: bool,
    /// Forward-branch probability; fractions such as `2/3` are accepted.
    #[arg(long, value_parser = parse_fraction)]
    pub alpha: f64,
    #[arg(long)]
    pub jumps: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u32,
    /// Initial separation of the particles (default depends on K).
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum TableCommand {
    /// Re-run every row of a reference table at scaled jump counts.
    Reproduce(TableArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct TableArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub table: u32,
    /// Fraction of the reference jump counts to run.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the comparison against the reference values here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum EntropyCommand {
    /// Relative entropy of the single-slit against the double-slit pattern.
    Slit(SlitArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SlitArgs {
    /// Slit-spacing ratio.
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    /// Absolute accuracy in bits.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct EmbedArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u32,
    /// Radius multipliers of the vibrant stages, ending at 1.
    #[arg(long, value_delimiter = ',', default_value = "100,10,1")]
    pub stages: Vec<f64>,
    /// Noise factor of vibrant centering.
    #[arg(long = "c", default_value_t = 1.1)]
    pub noise: f64,
    /// Speed-up cap of vibrant centering.
    #[arg(long = "C", default_value_t = 10.0)]
    pub cap: f64,
    /// Step budget of the centering phase and of each vibrant stage.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_steps: usize,
    /// Final conformation CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Centering trace CSV (default: `<out>` with a `.trace.csv` suffix).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct RealizeArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum McCommand {
    /// Sample a graph with trial moves that stay in the restricted space.
    Run(McArgs),
    /// Realize, settle and sample a helix built from a configuration file.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct McArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Potential configuration (`kT`, `lj_epsilon`, `lj_sigma`, `lj_cutoff`, `noise`, `cap`).
    #[arg(long)]
    pub potential: Option<PathBuf>,
    #[arg(long)]
    pub sweeps: usize,
    #[arg(long = "kT")]
    pub kt: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u32,
    #[arg(long)]
    pub out_conf: PathBuf,
    #[arg(long)]
    pub out_report: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PipelineArgs {
    /// Helix configuration; the built-in defaults are used without it.
    #[arg(long)]
    pub helix_config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u32,
    #[arg(long)]
    pub out_conf: PathBuf,
    #[arg(long)]
    pub out_report: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum PolymerCommand {
    /// Run the bead-driven polymer for several seeds.
    Demo(PolymerArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct PolymerArgs {
    /// Atoms in the chain.
    #[arg(long = "n")]
    pub atoms: Option<usize>,
    /// Copies per atom.
    #[arg(long = "K")]
    pub copies: Option<usize>,
    /// Pinning cycles per seed.
    #[arg(long)]
    pub sweeps: Option<usize>,
    /// Trial moves per cycle (default 50 per coordinate).
    #[arg(long)]
    pub inner_steps: Option<usize>,
    /// Number of seeds, counted up from `--seed`.
    #[arg(long, default_value_t = 8)]
    pub seeds: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u32,
    #[arg(long, value_parser = parse_fraction)]
    pub alpha: Option<f64>,
    /// Hold the last atom in place.
    #[arg(long)]
    pub fix_last: bool,
    /// Swap which bead is pinned to the nearer copy.
    #[arg(long)]
    pub flip: bool,
    /// Configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum LpCommand {
    /// Solve a linear program given in the line-oriented text format.
    Solve(LpArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct LpArgs {
    #[arg(long = "mps-lite")]
    pub file: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum Instance {
    /// Regular tetrahedron with a squashed start.
    K4,
    /// Planar instance where chirality blocks plain centering.
    Jam,
    /// Five-residue threonine chain (orientation constraints only).
    Thr5,
    /// Seven-residue alanine helix with hydrogen-bond edges.
    Ala7,
}

#[derive(Debug, Args, Serialize)]
pub struct ExportArgs {
    #[arg(long, value_enum)]
    pub instance: Instance,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

/// Parses a decimal number or a fraction `p/q`.
pub fn parse_fraction(s: &str) -> Result<f64, String> {
    let value = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
            if q == 0.0 {
                return Err(format!("zero denominator in {s:?}"));
            }
            p / q
        }
        None => s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("not a finite number: {s:?}"))
    }
}
