//! `discrim` — construct channel-discrimination instances, estimate the
//! distinguishability norm chain, simulate discrimination protocols and run
//! the Haar-average study from the command line.
//!
//! Exit codes: 0 success, 2 I/O / parse / usage error, 3 internal
//! consistency violation in a norm chain, 4 unsupported request (no protocol
//! registered for the family, or the instance is not perfectly
//! discriminable).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use discrim_core::channels::{
    qubit_example, read_pair_spec, weyl_flagged, werner_holevo, ChannelPair, Family,
};
use discrim_core::haar::{closed_form_sum, mc_ne_integral, HaarSampler};
use discrim_core::locc::{
    flagged_protocol, locc_lower_bound, random_binary_protocol, transcript_count,
    DiscriminationInstance, ProtocolTree,
};
use discrim_core::norms::{
    diamond_norm, ne_norm, norm_chain_with, ppt_norm, ChainConfig, ChainReport, ChainRow,
    NormKind,
};
use discrim_core::Error as CoreError;

const EXIT_IO: u8 = 2;
const EXIT_CHAIN: u8 = 3;
const EXIT_UNSUPPORTED: u8 = 4;

#[derive(Parser)]
#[command(
    name = "discrim",
    version,
    about = "Distinguishability norms and discrimination protocols for pairs of quantum channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the five-norm chain NE ≤ LOCC ≤ SEP ≤ PPT ≤ DIAMOND
    Norms(NormsArgs),
    /// Build the family's discrimination protocol and report its success
    Protocol(ProtocolArgs),
    /// Haar-average study of the binary-channel objective
    Haar(HaarArgs),
    /// Write the deterministic reproduction tables
    Reproduce(ReproduceArgs),
}

/// Flags that select the channel pair: either a named family with numeric
/// parameters, or a JSON spec file. Exactly one source must be given.
#[derive(Args)]
struct InstanceArgs {
    /// Named family: werner-holevo | weyl-flagged | random-binary | qubit-example
    #[arg(long, conflicts_with = "spec")]
    family: Option<String>,

    /// Dimension parameter of the family
    #[arg(long)]
    d: Option<usize>,

    /// Variant selector (qubit-example: 2 or 3)
    #[arg(long)]
    n: Option<usize>,

    /// Number of random unitaries (random-binary)
    #[arg(long = "N")]
    n_unitaries: Option<usize>,

    /// JSON channel-pair spec file
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Args)]
struct NormsArgs {
    #[command(flatten)]
    instance: InstanceArgs,

    /// Restarts for the NE seesaw (diamond and PPT get proportionally fewer)
    #[arg(long, default_value_t = 32)]
    restarts: usize,

    /// Seed for every randomised sub-estimator
    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Override the pinch / consistency tolerance of the chain report
    #[arg(long)]
    tol: Option<f64>,

    /// Output format (default: aligned table on stdout)
    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Also write the output to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProtocolArgs {
    #[command(flatten)]
    instance: InstanceArgs,

    /// Seed used when the family draws random unitaries
    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Also write the output to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HaarArgs {
    /// Even channel dimension
    #[arg(long)]
    d: usize,

    /// Monte-Carlo sample count
    #[arg(long, default_value_t = 100_000)]
    samples: usize,

    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Also write the output to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Monte-Carlo sample count for the Haar table
    #[arg(long, default_value_t = 100_000)]
    samples: usize,

    /// Output file for the reproduction tables
    #[arg(long, default_value = "reproduction.txt")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// A failure carrying the process exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Failure {
        Failure::new(EXIT_IO, message)
    }
}

/// Errors raised while building an instance are the user's fault (bad path,
/// bad JSON, bad parameters), so they all map to the I/O code.
fn build_failure(err: CoreError) -> Failure {
    Failure::new(EXIT_IO, err.to_string())
}

/// Errors raised while running a command: chain violations keep their
/// dedicated code, impossible protocol requests map to "unsupported",
/// anything else is an I/O-class failure.
fn run_failure(err: CoreError) -> Failure {
    let code = match err {
        CoreError::ChainViolation(_) => EXIT_CHAIN,
        CoreError::NotPerfectlyDiscriminable(_) | CoreError::BadFamily(_) => EXIT_UNSUPPORTED,
        _ => EXIT_IO,
    };
    Failure::new(code, err.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Norms(args) => cmd_norms(&args),
        Command::Protocol(args) => cmd_protocol(&args),
        Command::Haar(args) => cmd_haar(&args),
        Command::Reproduce(args) => cmd_reproduce(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

// ---------------------------------------------------------------------------
// instance construction

/// Build the channel pair named by the flags. Random-binary instances draw
/// their unitaries from `HaarSampler::new(seed, d)` in index order, so the
/// same `--seed` always yields the same pair.
fn build_pair(args: &InstanceArgs, seed: u64) -> Result<ChannelPair, Failure> {
    if let Some(path) = &args.spec {
        return read_pair_spec(path).map_err(build_failure);
    }
    let family = args
        .family
        .as_deref()
        .ok_or_else(|| Failure::usage("pass either --family or --spec"))?;
    match family {
        "werner-holevo" => {
            let d = require(args.d, "--d", family)?;
            werner_holevo(d).map_err(build_failure)
        }
        "weyl-flagged" => {
            let d = require(args.d, "--d", family)?;
            weyl_flagged(d).map_err(build_failure)
        }
        "qubit-example" => {
            let n = require(args.n, "--n", family)?;
            qubit_example(n).map_err(build_failure)
        }
        "random-binary" => {
            let d = require(args.d, "--d", family)?;
            let n = require(args.n_unitaries, "--N", family)?;
            if n == 0 {
                return Err(Failure::usage("--N must be at least 1"));
            }
            let mut sampler = HaarSampler::new(seed, d);
            let unitaries: Vec<_> = (0..n).map(|_| sampler.unitary(d)).collect();
            discrim_core::channels::random_binary_channels(d, &unitaries).map_err(build_failure)
        }
        other => Err(Failure::usage(format!(
            "unknown family '{other}' (expected werner-holevo, weyl-flagged, random-binary or qubit-example)"
        ))),
    }
}

fn require(value: Option<usize>, flag: &str, family: &str) -> Result<usize, Failure> {
    value.ok_or_else(|| Failure::usage(format!("family '{family}' needs {flag}")))
}

fn describe(pair: &ChannelPair) -> String {
    let params = match &pair.family {
        Family::WernerHolevo { d } | Family::WeylFlagged { d } => format!(" (d={d})"),
        Family::Flagged { n_flags } => format!(" ({n_flags} flags)"),
        Family::RandomBinary { d, unitaries } => format!(" (d={d}, N={})", unitaries.len()),
        Family::QubitExample { variant } => format!(" (variant {variant})"),
        Family::Custom => String::new(),
    };
    format!(
        "{}{params}, {} -> {}",
        pair.family.name(),
        pair.dim_in(),
        pair.dim_out()
    )
}

// ---------------------------------------------------------------------------
// norms

fn cmd_norms(args: &NormsArgs) -> Result<(), Failure> {
    if args.restarts == 0 {
        return Err(Failure::usage("--restarts must be at least 1"));
    }
    let pair = build_pair(&args.instance, args.seed)?;
    let mut config = ChainConfig {
        seed: args.seed,
        ne_restarts: args.restarts,
        diamond_restarts: args.restarts.div_ceil(4).max(2),
        ppt_restarts: args.restarts.div_ceil(8).max(2),
        ..ChainConfig::default()
    };
    if let Some(tol) = args.tol {
        if !(tol > 0.0) {
            return Err(Failure::usage("--tol must be positive"));
        }
        config.exact_match = tol;
        config.chain_slack = tol;
    }
    let report = norm_chain_with(&pair, &config).map_err(run_failure)?;

    let text = match args.format {
        None => render_table(&pair, &report),
        Some(Format::Csv) => render_csv(&report),
        Some(Format::Json) => {
            let mut json =
                serde_json::to_string_pretty(&report).map_err(|e| run_failure(e.into()))?;
            json.push('\n');
            json
        }
    };
    emit(&text, args.out.as_deref())
}

/// The single direction word for a row: `exact`, or the bound direction with
/// a protocol annotation when an explicit protocol certified it.
fn direction_text(row: &ChainRow) -> String {
    if row.exact {
        return "exact".into();
    }
    let base = if row.lower.is_some() { "lower" } else { "upper" };
    if row.sources.iter().any(|s| s == "protocol") {
        format!("{base}(certified by protocol)")
    } else {
        base.into()
    }
}

/// Largest residual among the estimates that were computed for this norm
/// directly, or `None` when the row only inherited chain bounds.
fn row_residual(report: &ChainReport, kind: NormKind) -> Option<f64> {
    report
        .estimates
        .iter()
        .filter(|e| e.norm == kind)
        .map(|e| e.residual)
        .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
}

fn render_table(pair: &ChannelPair, report: &ChainReport) -> String {
    let mut out = format!("instance: {}\n", describe(pair));
    let _ = writeln!(
        out,
        "{:<8} {:<14} {:<30} {:<40} {:<10} {:>9}",
        "norm", "value", "direction", "method", "residual", "wall[ms]"
    );
    for row in &report.rows {
        let residual = row_residual(report, row.norm)
            .map(|r| format!("{r:.2e}"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:<8} {:<14.9} {:<30} {:<40} {:<10} {:>9.1}",
            row.norm.label(),
            row.representative(),
            direction_text(row),
            row.sources.join("+"),
            residual,
            row.wall_ms
        );
    }
    out
}

/// CSV columns: norm, value, direction, method, residual. Wall time is
/// deliberately left out so repeated runs with one seed diff clean.
fn render_csv(report: &ChainReport) -> String {
    let mut out = String::from("norm,value,direction,method,residual\n");
    for row in &report.rows {
        let residual = row_residual(report, row.norm)
            .map(|r| format!("{r:.3e}"))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{:.9},{},{},{}",
            row.norm.label(),
            row.representative(),
            direction_text(row),
            row.sources.join("+"),
            residual
        );
    }
    out
}

// ---------------------------------------------------------------------------
// protocol

fn cmd_protocol(args: &ProtocolArgs) -> Result<(), Failure> {
    let pair = build_pair(&args.instance, args.seed)?;
    let (tree, instance) = build_protocol(&pair).map_err(run_failure)?;
    let p = instance.success_probability(&tree).map_err(run_failure)?;

    let mut text = format!("instance: {}\n", describe(&pair));
    let _ = writeln!(text, "success probability: {p:.9}");
    let _ = writeln!(text, "locc lower bound:    {:.9}", locc_lower_bound(p));
    let _ = writeln!(text, "transcripts:         {}", transcript_count(&tree.root));
    emit(&text, args.out.as_deref())
}

/// The registered protocol for the family, evaluated on the maximally
/// entangled input. Families without one are an unsupported request.
fn build_protocol(
    pair: &ChannelPair,
) -> Result<(ProtocolTree, DiscriminationInstance), CoreError> {
    match &pair.family {
        Family::Flagged { .. } | Family::WeylFlagged { .. } => {
            let instance = DiscriminationInstance::maximally_entangled(pair.clone())?;
            let tree = flagged_protocol(pair, &instance.input, instance.dim_z)?;
            Ok((tree, instance))
        }
        Family::RandomBinary { .. } | Family::QubitExample { .. } => {
            let instance = DiscriminationInstance::maximally_entangled(pair.clone())?;
            let tree = random_binary_protocol(pair)?;
            Ok((tree, instance))
        }
        Family::WernerHolevo { .. } | Family::Custom => Err(CoreError::BadFamily(format!(
            "no protocol registered for family '{}'",
            pair.family.name()
        ))),
    }
}

// ---------------------------------------------------------------------------
// haar

fn cmd_haar(args: &HaarArgs) -> Result<(), Failure> {
    if args.d == 0 || args.d % 2 != 0 {
        return Err(Failure::usage("--d must be even and positive"));
    }
    if args.samples == 0 {
        return Err(Failure::usage("--samples must be at least 1"));
    }
    let text = haar_csv(&[args.d], args.samples, args.seed).map_err(run_failure)?;
    emit(&text, args.out.as_deref())
}

/// One CSV row per dimension: the Monte-Carlo estimate of the Haar integral,
/// its standard error, the closed-form partial sum, the √(2/(πd)) asymptote
/// and the mc/sum ratio. The ratio is reported, never asserted: the printed
/// sum and the integral differ by a constant factor that the study documents.
fn haar_csv(dims: &[usize], samples: usize, seed: u64) -> Result<String, CoreError> {
    let mut out = String::from("d,mc_integral,stderr,closed_form_sum,asymptote,ratio\n");
    for &d in dims {
        let mc = mc_ne_integral(d, samples, None, seed)?;
        let sum = closed_form_sum(d)?;
        let asymptote = (2.0 / (std::f64::consts::PI * d as f64)).sqrt();
        let _ = writeln!(
            out,
            "{d},{:.9},{:.9},{:.9},{:.9},{:.9}",
            mc.mean,
            mc.stderr,
            sum,
            asymptote,
            mc.mean / sum
        );
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// reproduce

fn cmd_reproduce(args: &ReproduceArgs) -> Result<(), Failure> {
    if args.samples == 0 {
        return Err(Failure::usage("--samples must be at least 1"));
    }
    let text = reproduction_tables(args.seed, args.samples).map_err(run_failure)?;
    print!("{text}");
    std::fs::write(&args.out, &text).map_err(|e| {
        Failure::new(
            EXIT_IO,
            format!("cannot write {}: {e}", args.out.display()),
        )
    })?;
    Ok(())
}

/// The full reproduction suite: Werner-Holevo norms for d = 2..5, the two
/// qubit examples, the Weyl instances for d = 2,3 and the Haar study. Every
/// number is deterministic given the seed.
fn reproduction_tables(seed: u64, samples: usize) -> Result<String, CoreError> {
    let mut out = String::new();

    let _ = writeln!(out, "# werner-holevo");
    let _ = writeln!(out, "d,ne,ppt,diamond");
    for d in 2..=5 {
        let pair = werner_holevo(d)?;
        let ne = ne_norm(&pair, 16, seed)?;
        let ppt = ppt_norm(&pair, 2, seed ^ 0x9977)?;
        let diamond = diamond_norm(&pair, 4, seed ^ 0xD1AD)?;
        let _ = writeln!(
            out,
            "{d},{:.9},{:.9},{:.9}",
            ne.value, ppt.value, diamond.value
        );
    }

    let _ = writeln!(out, "\n# qubit-example");
    let _ = writeln!(out, "variant,ne,locc_lower,diamond");
    for variant in [2, 3] {
        let pair = qubit_example(variant)?;
        let ne = ne_norm(&pair, 16, seed)?;
        let instance = DiscriminationInstance::maximally_entangled(pair.clone())?;
        let tree = random_binary_protocol(&pair)?;
        let p = instance.success_probability(&tree)?;
        let diamond = diamond_norm(&pair, 4, seed ^ 0xD1AD)?;
        let _ = writeln!(
            out,
            "{variant},{:.9},{:.9},{:.9}",
            ne.value,
            locc_lower_bound(p),
            diamond.value
        );
    }

    let _ = writeln!(out, "\n# weyl-flagged");
    let _ = writeln!(out, "d,ne_estimate,ne_bound,protocol_success");
    for d in 2..=3 {
        let pair = weyl_flagged(d)?;
        let ne = ne_norm(&pair, 16, seed)?;
        let bound = 2.0 * (d as f64 / (d as f64 + 1.0)).sqrt();
        let instance = DiscriminationInstance::maximally_entangled(pair.clone())?;
        let tree = flagged_protocol(&pair, &instance.input, instance.dim_z)?;
        let p = instance.success_probability(&tree)?;
        let _ = writeln!(out, "{d},{:.9},{:.9},{:.9}", ne.value, bound, p);
    }

    let _ = writeln!(out, "\n# haar");
    out.push_str(&haar_csv(&[2, 4, 8], samples, seed)?);
    Ok(out)
}

// ---------------------------------------------------------------------------
// output plumbing

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    print!("{text}");
    if let Some(path) = out {
        std::fs::write(path, text)
            .map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}
