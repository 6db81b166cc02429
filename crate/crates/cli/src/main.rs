use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use clusternet::complex::{build_complex, check_compatibility, network_dimension, ComplexError};
use clusternet::io::{read_manifest, read_matrix, read_sweep_spec, InputError};
use clusternet::padic::{verify_correspondence, PadicError};
use clusternet::phylo::{sweep, PhyloError, SweepGrid};
use clusternet::{
    build_dendrogram, export, merge_dendrograms, parse_rational, ClusterNetwork, DistanceMatrix,
    MetricId, NetworkError,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "clusternet", version, about = "Cluster trees, networks and complexes from families of metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write run metadata (arguments, version, time) to this file.
    #[arg(long, global = true, value_name = "PATH")]
    emit_meta: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster tree of one distance matrix (`-` reads stdin).
    Cluster {
        input: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cluster network of several distance matrices over the same labels.
    Network {
        #[arg(required = true)]
        inputs: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simplicial complex of the network for a subfamily of metrics.
    Complex {
        #[arg(required = true)]
        inputs: Vec<String>,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Dimension of the network for a subfamily of metrics.
    Dimension {
        #[arg(required = true)]
        inputs: Vec<String>,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check the chain/norm correspondence around the standard p-adic lattice.
    PadicVerify {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        d: usize,
        /// Weights such as `3/5,4/5`, nondecreasing, in (1/p, 1].
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<String>,
        #[arg(long, default_value_t = 8)]
        precision: u32,
        /// Also build the reordering network on (Z/p^m)^d and report its dimension.
        #[arg(long, value_name = "M")]
        window: Option<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cluster network of weighted marker sums over a grid of weights.
    PhyloSweep {
        manifest: PathBuf,
        #[arg(long)]
        sweep: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FamilyArgs {
    /// Metric ids of the subfamily (defaults to all).
    #[arg(long, value_delimiter = ',')]
    r: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
}

enum Failure {
    Input(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn report(&self) -> String {
        let (kind, message) = match self {
            Failure::Input(m) => ("input", m),
            Failure::Internal(m) => ("internal", m),
        };
        let body = serde_json::json!({ "error": { "kind": kind, "message": message } });
        format!("{body}\n")
    }
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<NetworkError> for Failure {
    fn from(e: NetworkError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<PhyloError> for Failure {
    fn from(e: PhyloError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<ComplexError> for Failure {
    fn from(e: ComplexError) -> Self {
        match e {
            ComplexError::Network(inner) => inner.into(),
            other => Failure::Internal(other.to_string()),
        }
    }
}

impl From<PadicError> for Failure {
    fn from(e: PadicError) -> Self {
        match e {
            PadicError::Precision => {
                Failure::Input("precision exhausted; rerun with a larger --precision".into())
            }
            PadicError::Singular | PadicError::DivisionByZero | PadicError::InvalidChain(_) => {
                Failure::Internal(e.to_string())
            }
            other => Failure::Input(other.to_string()),
        }
    }
}

fn read_input(source: &str) -> Result<DistanceMatrix, Failure> {
    if source == "-" {
        let mut text = String::new();
        io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::Input(format!("stdin: {e}")))?;
        Ok(read_matrix(text.as_bytes())?)
    } else {
        Ok(clusternet::io::read_matrix_path(Path::new(source))?)
    }
}

fn metric_id(source: &str) -> MetricId {
    if source == "-" {
        return MetricId::new("stdin");
    }
    let path = Path::new(source);
    let stem = path.file_stem().map_or_else(|| source.into(), |s| s.to_string_lossy());
    MetricId::new(stem.into_owned())
}

fn load_network(inputs: &[String]) -> Result<ClusterNetwork, Failure> {
    if inputs.iter().filter(|s| *s == "-").count() > 1 {
        return Err(Failure::Input("stdin can be read only once".into()));
    }
    let mut trees = Vec::with_capacity(inputs.len());
    let mut ids = Vec::with_capacity(inputs.len());
    for source in inputs {
        let matrix = read_input(source)?;
        let tree = build_dendrogram(&matrix).map_err(|e| Failure::Internal(e.to_string()))?;
        trees.push(tree);
        ids.push(metric_id(source));
    }
    Ok(merge_dendrograms(&trees, &ids)?)
}

fn subfamily(net: &ClusterNetwork, family: &FamilyArgs) -> Vec<MetricId> {
    if family.r.is_empty() {
        net.metrics().to_vec()
    } else {
        family.r.iter().map(MetricId::new).collect()
    }
}

fn network_output(net: &ClusterNetwork, format: Format) -> String {
    match format {
        Format::Json => export::network_json(net),
        Format::Dot => export::network_dot(net),
    }
}

fn json_only(format: Format, command: &str) -> Result<(), Failure> {
    match format {
        Format::Json => Ok(()),
        Format::Dot => Err(Failure::Input(format!("{command} has no DOT output"))),
    }
}

#[derive(Serialize)]
struct SweepDoc<'a> {
    #[serde(flatten)]
    network: export::NetworkDoc<'a>,
    assignments: Vec<Assignment<'a>>,
}

#[derive(Serialize)]
struct Assignment<'a> {
    weights: &'a str,
    metric: &'a MetricId,
}

/// Returns the rendered output and whether it reports a failed check.
fn run(command: &Command) -> Result<(String, bool), Failure> {
    match command {
        Command::Cluster { input, output } => {
            let net = load_network(std::slice::from_ref(input))?;
            Ok((network_output(&net, output.format), true))
        }
        Command::Network { inputs, output } => {
            let net = load_network(inputs)?;
            Ok((network_output(&net, output.format), true))
        }
        Command::Complex {
            inputs,
            family,
            output,
        } => {
            let net = load_network(inputs)?;
            let r = subfamily(&net, family);
            let complex = build_complex(&net, &r)?;
            let text = match output.format {
                Format::Dot => export::complex_dot(&net, &complex),
                Format::Json => {
                    let dimension = network_dimension(&net, &r)?;
                    let compatibility = check_compatibility(&net);
                    export::complex_json(&net, &complex, &dimension, &compatibility)
                }
            };
            Ok((text, true))
        }
        Command::Dimension {
            inputs,
            family,
            output,
        } => {
            json_only(output.format, "dimension")?;
            let net = load_network(inputs)?;
            let r = subfamily(&net, family);
            let report = network_dimension(&net, &r)?;
            Ok((export::dimension_json(&net, &report), true))
        }
        Command::PadicVerify {
            p,
            d,
            q,
            precision,
            window,
            output,
        } => {
            json_only(output.format, "padic-verify")?;
            let weights = q
                .iter()
                .map(|s| parse_rational(s).map_err(|e| Failure::Input(format!("--q: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let report = verify_correspondence(*p, *d, &weights, *precision, *window)?;
            Ok((export::to_json(&report), report.passed))
        }
        Command::PhyloSweep {
            manifest,
            sweep: spec_path,
            output,
        } => {
            let markers = read_manifest(manifest)?;
            let spec = read_sweep_spec(spec_path)?;
            let grid = SweepGrid::from_spec(&spec, markers.len())?;
            let result = sweep(&markers, &grid)?;
            let text = match output.format {
                Format::Dot => export::network_dot(&result.network),
                Format::Json => export::to_json(&SweepDoc {
                    network: export::network_doc(&result.network),
                    assignments: result
                        .assignments
                        .iter()
                        .map(|(w, m)| Assignment {
                            weights: w,
                            metric: m,
                        })
                        .collect(),
                }),
            };
            Ok((text, true))
        }
    }
}

fn output_args(command: &Command) -> &OutputArgs {
    match command {
        Command::Cluster { output, .. }
        | Command::Network { output, .. }
        | Command::Complex { output, .. }
        | Command::Dimension { output, .. }
        | Command::PadicVerify { output, .. }
        | Command::PhyloSweep { output, .. } => output,
    }
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Cluster { .. } => "cluster",
        Command::Network { .. } => "network",
        Command::Complex { .. } => "complex",
        Command::Dimension { .. } => "dimension",
        Command::PadicVerify { .. } => "padic-verify",
        Command::PhyloSweep { .. } => "phylo-sweep",
    }
}

fn write_output(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Internal(format!("stdout: {e}"))),
    }
}

fn write_meta(path: &Path, command: &Command, code: u8) -> Result<(), Failure> {
    let seconds = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let meta = serde_json::json!({
        "tool": "clusternet",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": command_name(command),
        "args": std::env::args().skip(1).collect::<Vec<_>>(),
        "exit_code": code,
        "unix_time": seconds,
    });
    fs::write(path, format!("{meta:#}\n"))
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let failure = Failure::Input(e.kind().to_string() + ": " + e.to_string().trim());
            eprint!("{}", failure.report());
            return ExitCode::from(2);
        }
    };

    let result = run(&cli.command).and_then(|(text, passed)| {
        write_output(&text, output_args(&cli.command).out.as_deref())?;
        if passed {
            Ok(())
        } else {
            Err(Failure::Internal("verification failed; see the report".into()))
        }
    });
    let code = match &result {
        Ok(()) => 0,
        Err(f) => {
            eprint!("{}", f.report());
            f.code()
        }
    };
    if let Some(path) = &cli.emit_meta {
        if let Err(f) = write_meta(path, &cli.command, code) {
            eprint!("{}", f.report());
        }
    }
    ExitCode::from(code)
}
