use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

#[derive(Debug, Parser)]
#[command(name = "qvar", version, about = "Variation norms, analyticity diagnostics and empirical ergodic inequalities on finite L^p models")]
pub struct Cli {
    /// Worker threads for parallel sections (default: hardware parallelism)
    #[arg(long, global = true, env = "QVAR_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Strong q-variation of a scalar sequence
    Vnorm(VnormArgs),
    /// Oscillation norm of a scalar sequence relative to a block partition
    Onorm(OnormArgs),
    /// Number of tau-jumps of a scalar sequence
    Jumps(JumpsArgs),
    /// Operator p-norm and regular norm
    Opnorm(OpnormArgs),
    /// Analyticity report: difference profile, resolvent estimate, spectral Stolz test
    Analytic(AnalyticArgs),
    /// Grid lower estimate of sup |z-1| ||(z-T)^{-1}|| over |z| > 1
    Ritt(RittArgs),
    /// Containment of the numerical range in the Stolz region B_gamma
    Nrange(NrangeArgs),
    /// Grid suprema of ||T_t|| and ||t A T_t|| for T_t = exp(tA)
    Semigroup(SemigroupArgs),
    /// Subordinated semigroup exp(-t(-A)^alpha)
    Subordinate(SubordinateArgs),
    /// Empirical constant of a variational inequality across truncations
    Verify(VerifyArgs),
    /// Empirical constants over a decreasing list of q at one truncation
    Sweep(SweepArgs),
    /// Pointwise distance of a family from its limit along a schedule
    Convergence(ConvergenceArgs),
    /// Telescoping identities for differences, or the cyclic transference check
    IdentityCheck(IdentityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ZooName {
    LazySymmetricWalk,
    RotationShift,
    Convolution,
    RandomPositiveContraction,
    DiagonalNormal,
}

/// Where the operator comes from: a named zoo member or a matrix file.
#[derive(Debug, Clone, Args)]
pub struct OperatorSource {
    /// Named test operator on a uniform probability space
    #[arg(long, value_enum, conflicts_with = "op")]
    pub zoo: Option<ZooName>,
    /// Dimension for lazy_symmetric_walk, rotation_shift and random_positive_contraction
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Probability vector for the convolution operator
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub nu: Option<Vec<f64>>,
    /// Eigenvalues for diagonal_normal, e.g. 1,0.5,0.2+0.1i
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub spectrum: Option<Vec<Complex64>>,
    /// Seed for random_positive_contraction
    #[arg(long, default_value_t = 0)]
    pub op_seed: u64,
    /// Matrix file: CSV (N real or 2N re,im columns per row) or JSON
    #[arg(long)]
    pub op: Option<PathBuf>,
    /// Atom masses for --op (CSV or JSON array); uniform if absent
    #[arg(long, requires = "op")]
    pub weights: Option<PathBuf>,
}

/// How a generator is obtained from the operator source.
#[derive(Debug, Clone, Args)]
pub struct GeneratorSource {
    #[command(flatten)]
    pub source: OperatorSource,
    /// Treat the matrix as the generator A itself instead of using A = T - I
    #[arg(long)]
    pub generator: bool,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Write the JSON report here instead of stdout
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Also write the command's CSV table here
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VnormArgs {
    /// Sequence file, one `re` or `re,im` per line
    #[arg(long)]
    pub input: PathBuf,
    /// Variation exponent q >= 1
    #[arg(long)]
    pub q: f64,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct OnormArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// `singletons`, `dyadic`, or comma-separated increasing block boundaries starting at 0
    #[arg(long, default_value = "dyadic")]
    pub blocks: String,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct JumpsArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Jump threshold tau > 0
    #[arg(long)]
    pub tau: f64,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct OpnormArgs {
    #[command(flatten)]
    pub source: OperatorSource,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub source: OperatorSource,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Length of the difference profile n ||T^n - T^{n-1}||; with --op, --N sets it when this is absent
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Radii |z| > 1 of the resolvent grid
    #[arg(long, value_delimiter = ',', default_value = "1.5,1.1,1.01,1.001")]
    pub radii: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    pub angles: usize,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct RittArgs {
    #[command(flatten)]
    pub source: OperatorSource,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, value_delimiter = ',', default_value = "1.5,1.1,1.01,1.001")]
    pub radii: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    pub angles: usize,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct NrangeArgs {
    #[command(flatten)]
    pub source: OperatorSource,
    /// Half-opening angle gamma in (0, pi/2)
    #[arg(long)]
    pub gamma: f64,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct SemigroupArgs {
    #[command(flatten)]
    pub source: GeneratorSource,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Time grid 10^lo .. 10^hi
    #[arg(long, default_value_t = -3, allow_hyphen_values = true)]
    pub lo_exp: i32,
    #[arg(long, default_value_t = 3, allow_hyphen_values = true)]
    pub hi_exp: i32,
    #[arg(long, default_value_t = 200)]
    pub per_decade: usize,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Spectral,
    Quadrature,
}

#[derive(Debug, Args)]
pub struct SubordinateArgs {
    #[command(flatten)]
    pub source: GeneratorSource,
    /// Stable index in (0, 1); the quadrature method needs 1/2
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long)]
    pub t: f64,
    #[arg(long, value_enum, default_value_t = Method::Spectral)]
    pub method: Method,
    /// Initial quadrature panels
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
    /// Exponent for the regular norm of the result
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Also compute the analytic profile of the subordinated semigroup on the default grid
    #[arg(long)]
    pub profile: bool,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Theorem {
    /// Ergodic averages M_n(T), v^q norm
    Averages,
    /// Powers T^n, v^q norm
    Powers,
    /// Weighted differences n^m T^n (T - I)^m, v^q norm
    Differences,
    /// Ergodic averages M_n(T), oscillation norm
    Oscillation,
    /// Continuous averages M_t on a time grid, v^q norm
    ContinuousAverages,
    /// Semigroup T_t on a time grid, v^q norm
    ContinuousPowers,
    /// Ergodic averages with the jump bound checked on the witness
    Jumps,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Sample budget of the witness search
    #[arg(long, default_value_t = 500)]
    pub budget: usize,
    #[arg(long, default_value_t = 20)]
    pub ascent_steps: usize,
    #[arg(long)]
    pub seed: u64,
    /// Difference order for the differences family
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    /// Grid spacing for continuous families
    #[arg(long, default_value_t = 0.25)]
    pub dt: f64,
    /// Blocks for the oscillation norm: `singletons`, `dyadic`, or boundaries
    #[arg(long, default_value = "singletons")]
    pub blocks: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub theorem: Theorem,
    #[command(flatten)]
    pub source: GeneratorSource,
    #[arg(long, default_value_t = 3.0)]
    pub q: f64,
    #[arg(long, value_delimiter = ',', default_value = "64,128,256,512")]
    pub truncations: Vec<usize>,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Family to sweep (oscillation and jumps are not sweep families)
    #[arg(long, value_enum, default_value_t = Theorem::Averages)]
    pub theorem: Theorem,
    #[command(flatten)]
    pub source: GeneratorSource,
    /// Strictly decreasing q values, all > 2
    #[arg(long, value_delimiter = ',', default_value = "4,3,2.5,2.2")]
    pub qs: Vec<f64>,
    #[arg(long, default_value_t = 256)]
    pub truncation: usize,
    /// Append an oscillation-norm row (q = 2) using --blocks
    #[arg(long)]
    pub o2: bool,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "kebab-case")]
pub enum ConvergenceModeArg {
    Powers,
    Averages,
    ContinuousPowers,
    ContinuousAverages,
    TToZero,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub source: GeneratorSource,
    #[arg(long, value_enum)]
    pub mode: ConvergenceModeArg,
    /// Starting vector (one `re` or `re,im` per line); the first unit vector if absent
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Explicit schedule; defaults to 2^k for k = 0..=k-max (or 2^-k for t-to-zero)
    #[arg(long, value_delimiter = ',')]
    pub schedule: Option<Vec<f64>>,
    #[arg(long, default_value_t = 10)]
    pub k_max: u32,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "kebab-case")]
pub enum IdentityName {
    /// Delta_N^m - Delta_n^m equals the sum of Delta_j^{m+1}, n <= j < N
    TelescopingSum,
    /// Weighted rearrangement of n^m Delta_{2n+1}^m
    TelescopingWeighted,
    /// ||sum h_j U^j||_2 against sup |h^| for the cyclic shift U on Z_N
    Transference,
}

#[derive(Debug, Args)]
pub struct IdentityArgs {
    #[arg(long, value_enum)]
    pub identity: IdentityName,
    #[command(flatten)]
    pub source: OperatorSource,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub m: i32,
    /// Lower index n
    #[arg(long = "n", default_value_t = 1)]
    pub small_n: usize,
    /// Upper index for telescoping-sum
    #[arg(long, default_value_t = 4)]
    pub big_n: usize,
    /// Kernel support for transference
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub offsets: Option<Vec<i64>>,
    /// Kernel values for transference, e.g. 0.5,0.25+0.1i
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Option<Vec<Complex64>>,
    #[command(flatten)]
    pub out: Output,
}
