mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "dynsparse", version, about = "Dynamic sparsifiers, expander decompositions and flows")]
pub struct Cli {
    /// Key-value file of defaults for any long flag; flags on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for independent seeds and experiments.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a graph or an update trace.
    Gen(GenArgs),
    /// Decompose a graph into edge-disjoint expanders.
    Decompose(DecomposeArgs),
    /// Replay deletions through expander pruning and check its contracts.
    Prune(PruneArgs),
    /// Maintain a sparsifier over an update trace.
    Maintain(MaintainArgs),
    /// Run the resampling sparsifier against adaptive adversaries.
    Trace(TraceArgs),
    /// Time maintenance pipelines on random traces.
    Bench(BenchArgs),
    /// Check that one graph sparsifies another.
    Verify(VerifyArgs),
    /// Approximate vertex-capacitated multicommodity flow.
    Flow(FlowArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Explicit expander on `n` vertices with degree about `d`.
    Expander,
    /// Margulis graph on `k × k` vertices.
    Margulis,
    /// `m` uniform random edges.
    Random,
    /// Union of `k` random Hamiltonian cycles.
    Cycles,
    /// `m` random edges with log-uniform weights in `[1, W]`.
    Weighted,
    /// Mixed insert/delete trace, JSON lines.
    Trace,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    pub family: Family,
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    #[arg(long, default_value_t = 40)]
    pub m: usize,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Largest weight; defaults to e² for `weighted` and 1 for `trace`.
    #[arg(long = "max-weight")]
    pub max_weight: Option<f64>,
    /// Starting graph of a generated trace.
    #[arg(long)]
    pub g: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub events: usize,
    /// Probability that a trace event deletes (when an edge exists).
    #[arg(long = "delete-frac", default_value_t = 0.5)]
    pub delete_frac: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecomposeMode {
    /// Vertex partition with certified padded parts.
    Base,
    /// Edge-disjoint expanders covering every edge.
    Edges,
    /// Min-degree decomposition with degree-split companions.
    Uniform,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub g: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    pub phi: f64,
    #[arg(long, value_enum, default_value = "edges")]
    pub mode: DecomposeMode,
    /// Directory receiving one edge list per cluster and `manifest.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PruneModeArg {
    Amortized,
    Uniform,
    Worstcase,
}

#[derive(Args, Debug)]
pub struct PruneArgs {
    #[arg(long, value_enum)]
    pub mode: PruneModeArg,
    #[arg(long)]
    pub g: PathBuf,
    /// Deletion trace; without it every edge is deleted in random order.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, default_value_t = 0.2)]
    pub phi: f64,
    #[arg(long, default_value_t = 16)]
    pub gamma: usize,
    /// Deletion budget, or `none` to lift it.
    #[arg(long)]
    pub budget: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum KindArg {
    Cut,
    Spanner,
    Spectral,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaintainMode {
    /// Bucketed dynamic decomposition with periodic rebuilds.
    Amortized,
    /// Worst-case pruning with a growing output between rebuilds.
    Growing,
    /// Staggered rebuild copies over growing outputs.
    #[value(alias = "worstcase")]
    Phased,
    /// Sparsification tree over merge sparsifiers.
    Eppstein,
    /// Weight rounding only; the output keeps every edge.
    Merge,
}

#[derive(Args, Debug)]
pub struct MaintainArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value = "amortized")]
    pub mode: MaintainMode,
    /// Initial graph; without it the trace starts from an empty graph.
    #[arg(long)]
    pub g: Option<PathBuf>,
    #[arg(long)]
    pub trace: PathBuf,
    /// Vertex count of the empty starting graph; inferred from the trace by default.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub phi: f64,
    /// Verify every k-th event; 0 disables verification.
    #[arg(long = "verify-every", default_value_t = 1)]
    pub verify_every: usize,
    /// Metrics CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Final verification report JSON; goes to stdout when only `--out` is set.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum InfoArg {
    Output,
    Randomness,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyArg {
    Bulk,
    RoundRobin,
}

#[derive(Args, Debug)]
pub struct TraceArgs {
    /// `cycles:n:k`, `random:n:m`, `margulis:k`, `explicit:n:d` or `weighted:n:m:W`.
    #[arg(long, default_value = "cycles:16:30")]
    pub graph: String,
    /// `oblivious`, `isolation[:v]`, `matching-cut`, `cut-drain` or `all`.
    #[arg(long, default_value = "all")]
    pub strategy: String,
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long, default_value_t = 40)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.3)]
    pub phi: f64,
    #[arg(long, value_enum, default_value = "randomness")]
    pub info: InfoArg,
    #[arg(long, value_enum, default_value = "bulk")]
    pub policy: PolicyArg,
    #[arg(long = "verify-every", default_value_t = 1)]
    pub verify_every: usize,
    #[arg(long = "max-failure-rate", default_value_t = 0.02)]
    pub max_failure_rate: f64,
    /// Directory receiving one metrics CSV and one event trace per run.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "cut")]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value = "amortized")]
    pub mode: MaintainMode,
    #[arg(long, default_value = "weighted:32:96:7.389")]
    pub graph: String,
    #[arg(long, default_value_t = 100)]
    pub events: usize,
    #[arg(long, default_value_t = 4)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub phi: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutModeArg {
    Auto,
    Exact,
    Sampled,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub g: PathBuf,
    #[arg(long)]
    pub h: PathBuf,
    /// Accuracy: every ratio must lie in `[e^-eps, e^eps]`.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Spanner stretch limit.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long = "cut-mode", value_enum, default_value = "auto")]
    pub cut_mode: CutModeArg,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowMode {
    Throughput,
    Concurrent,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpArg {
    Exact,
    Spanner,
}

#[derive(Args, Debug)]
pub struct FlowArgs {
    #[arg(long, value_enum)]
    pub mode: FlowMode,
    #[arg(long)]
    pub g: PathBuf,
    /// Vertex capacities, one `v c` line each; unlisted vertices get 1.
    #[arg(long)]
    pub caps: Option<PathBuf>,
    /// Demand pairs, one `s t [demand]` line each.
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, value_enum, default_value = "exact")]
    pub sp: SpArg,
    /// Stretch of the spanner shortest-path oracle.
    #[arg(long, default_value_t = 2.0)]
    pub stretch: f64,
    /// Demand scale for concurrent flow; estimated when absent.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Also round to one path per commodity.
    #[arg(long)]
    pub round: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Result of a command that ran to completion.
#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
}

fn main() -> ExitCode {
    let args = match config::merge(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
