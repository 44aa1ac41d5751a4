//! `itlog`: command-line front end for weight gradings, Harder-Narasimhan
//! and weight filtrations, flow simulation, asymptotic forms and exponent fits.
//!
//! Every result embeds the input document, a SHA-256 of the input file, the
//! tool version and the options used, so `itlog verify` can recompute it.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub mod commands;
pub mod schema;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Failure of a run; the exit status is 1 for bad input and 2 for a failed
/// computation or verification.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("computation failed: {0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::BadInput(_) => 1,
            CliError::Compute(_) => 2,
        }
    }
}

impl From<itlog_core::Error> for CliError {
    fn from(e: itlog_core::Error) -> Self {
        use itlog_core::Error as E;
        match e {
            E::Parse(_) | E::Invalid(_) | E::InvalidGraph(_) | E::NotALattice(_) | E::NoBounds(_) => {
                CliError::BadInput(e.to_string())
            }
            _ => CliError::Compute(e.to_string()),
        }
    }
}

impl From<itlog_flow::Error> for CliError {
    fn from(e: itlog_flow::Error) -> Self {
        use itlog_flow::Error as E;
        match e {
            E::Core(inner) => inner.into(),
            E::Parse(_) | E::Invalid(_) | E::ShapeMismatch(_) | E::Io(_) => CliError::BadInput(e.to_string()),
            _ => CliError::Compute(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "itlog", version, about = "Iterated weight filtrations and the asymptotics of metric gradient flows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Weight grading of a DAG with its KKT certificate.
    GradeDag(CommonArgs),
    /// Harder-Narasimhan filtration of a polarized lattice.
    Hn(HnArgs),
    /// Weight filtration of a weighted lattice or of a DAG's subgraph lattice.
    Weight(LatticeArgs),
    /// Iterated weight filtration.
    Iterate(LatticeArgs),
    /// Integrate the metric flow and write eigenvalue trajectories as CSV.
    Simulate(SimulateArgs),
    /// Asymptotic solution of a thin representation and its residual decay.
    Asymptotic(AsymptoticArgs),
    /// Iterated-log exponent fits of a trajectory CSV.
    Fit(FitArgs),
    /// Recompute a result file written by this tool and compare.
    Verify(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GradeDag(_) => "grade-dag",
            Command::Hn(_) => "hn",
            Command::Weight(_) => "weight",
            Command::Iterate(_) => "iterate",
            Command::Simulate(_) => "simulate",
            Command::Asymptotic(_) => "asymptotic",
            Command::Fit(_) => "fit",
            Command::Verify(_) => "verify",
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::GradeDag(c) | Command::Verify(c) => c,
            Command::Hn(a) => &a.common,
            Command::Weight(a) | Command::Iterate(a) => &a.common,
            Command::Simulate(a) => &a.common,
            Command::Asymptotic(a) => &a.common,
            Command::Fit(a) => &a.common,
        }
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct CommonArgs {
    /// Input file.
    #[arg(required_unless_present = "schema")]
    #[serde(skip)]
    pub input: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    /// Print the input schema and exit.
    #[arg(long)]
    #[serde(skip)]
    pub schema: bool,
    /// Print rationals as "p/q" strings instead of rounded decimals.
    #[arg(long)]
    pub exact: bool,
    /// Cap on worker threads (all computations currently run on one).
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct HnArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Polarization file `{"class_z": {...}}`.
    #[arg(long)]
    #[serde(skip)]
    pub z: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct LatticeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Class weights `{"class_weights": {...}}` for lattice input; unit
    /// weights when absent. Ignored for DAG input.
    #[arg(long)]
    #[serde(skip)]
    pub x: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Start time.
    #[arg(long, default_value_t = 1.0)]
    pub t0: f64,
    /// Initial metric: `identity`, or `normalized` (h₀ = K*K from the
    /// asymptotic construction, thin representations only).
    #[arg(long, value_enum, default_value_t = Start::Identity)]
    pub start: Start,
    #[arg(long, default_value_t = 1e6)]
    pub t_max: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
    #[arg(long, default_value_t = 100)]
    pub samples_per_decade: usize,
    /// Significant digits after the point in the CSV.
    #[arg(long, default_value_t = 12)]
    pub precision: usize,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    Identity,
    Normalized,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Largest accepted filtration depth.
    #[arg(long, default_value_t = itlog_flow::asymptotic::MAX_DEPTH)]
    pub depth: usize,
    /// Residual sampling interval.
    #[arg(long, default_value_t = 1e3)]
    pub t_lo: f64,
    #[arg(long, default_value_t = 1e8)]
    pub t_hi: f64,
    #[arg(long, default_value_t = 60)]
    pub samples: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct FitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Number of iterated logarithms in the basis.
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
    /// Bootstrap seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// DAG or thin quiver whose iterated filtration groups the columns for
    /// per-level fits.
    #[arg(long)]
    #[serde(skip)]
    pub model: Option<PathBuf>,
}

/// Source of a flow: a DAG (thin representation) or a quiver representation.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Model {
    Dag(itlog_core::io::DagDoc),
    Quiver(itlog_flow::quiver::QuiverDoc),
}

/// Input documents as embedded in result files.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Embedded {
    Model(Model),
    Lattice { lattice: itlog_core::io::LatticeDoc, x: Option<itlog_core::io::XDoc> },
    Polarized { lattice: itlog_core::io::LatticeDoc, polarization: itlog_core::io::PolarizationDoc },
    Table { csv: String, model: Option<Model> },
}

/// Marker opening the metadata line of CSV outputs.
pub const CSV_META_PREFIX: &str = "# itlog ";

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::BadInput(format!("cannot read {}: {e}", path.display())))
}

fn text(bytes: &[u8], path: &Path) -> CliResult<String> {
    String::from_utf8(bytes.to_vec()).map_err(|_| CliError::BadInput(format!("{} is not UTF-8", path.display())))
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(s: &str, what: &str) -> CliResult<T> {
    serde_json::from_str(s).map_err(|e| CliError::BadInput(format!("{what} does not match its schema: {e}")))
}

/// A DAG document or a quiver document, distinguished by their fields.
pub fn parse_model(s: &str) -> CliResult<Model> {
    if let Ok(d) = serde_json::from_str(s) {
        return Ok(Model::Dag(d));
    }
    serde_json::from_str(s)
        .map(Model::Quiver)
        .map_err(|e| CliError::BadInput(format!("input is neither a DAG nor a quiver document: {e}")))
}

fn meta(command: &str, hashes: Value, options: Value) -> Value {
    json!({
        "tool": "itlog",
        "version": VERSION,
        "command": command,
        "input_sha256": hashes,
        "options": options,
    })
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("argument structs serialize")
}

fn main_input(c: &CommonArgs) -> CliResult<(&Path, Vec<u8>)> {
    let p = c.input.as_deref().ok_or_else(|| CliError::BadInput("an input file is required".into()))?;
    Ok((p, read_file(p)?))
}

fn validate(cmd: &Command) -> CliResult<()> {
    let bad = |m: &str| Err(CliError::BadInput(m.into()));
    if cmd.common().threads == 0 {
        return bad("--threads must be at least 1");
    }
    match cmd {
        Command::Simulate(a) => {
            if !(a.t0 > 0.0 && a.t_max > a.t0) {
                return bad("need 0 < --t0 < --t-max");
            }
            if !(a.rtol > 0.0 && a.atol > 0.0) {
                return bad("tolerances must be positive");
            }
            if a.samples_per_decade == 0 || a.precision == 0 || a.precision > 17 {
                return bad("--samples-per-decade must be positive and --precision in 1..=17");
            }
        }
        Command::Asymptotic(a) => {
            if !(a.t_lo > 0.0 && a.t_hi > a.t_lo) || a.samples < 2 {
                return bad("need 0 < --t-lo < --t-hi and at least 2 samples");
            }
        }
        Command::Fit(a) => {
            if a.depth == 0 || a.depth > 3 {
                return bad("--depth must be 1, 2 or 3");
            }
        }
        _ => {}
    }
    Ok(())
}

/// Runs one command and returns the text it writes.
pub fn run(cmd: &Command) -> CliResult<String> {
    if cmd.common().schema {
        return Ok(schema::schema(cmd.name()).to_string());
    }
    validate(cmd)?;
    let name = cmd.name();
    match cmd {
        Command::GradeDag(c) => {
            let (p, bytes) = main_input(c)?;
            let doc = parse_json(&text(&bytes, p)?, "DAG document")?;
            let input = Embedded::Model(Model::Dag(doc));
            json_output(name, json!(sha256_hex(&bytes)), to_value(c), input, |i| commands::compute(name, i, &to_value(c)))
        }
        Command::Hn(a) => {
            let (p, bytes) = main_input(&a.common)?;
            let zp = a.z.as_deref().ok_or_else(|| CliError::BadInput("--z <polarization file> is required".into()))?;
            let zbytes = read_file(zp)?;
            let input = Embedded::Polarized {
                lattice: parse_json(&text(&bytes, p)?, "lattice document")?,
                polarization: parse_json(&text(&zbytes, zp)?, "polarization document")?,
            };
            let hashes = json!({"lattice": sha256_hex(&bytes), "polarization": sha256_hex(&zbytes)});
            json_output(name, hashes, to_value(a), input, |i| commands::compute(name, i, &to_value(a)))
        }
        Command::Weight(a) | Command::Iterate(a) => {
            let (p, bytes) = main_input(&a.common)?;
            let s = text(&bytes, p)?;
            let mut hashes = json!({"input": sha256_hex(&bytes)});
            let input = if let Ok(d) = serde_json::from_str(&s) {
                Embedded::Model(Model::Dag(d))
            } else {
                let lattice = parse_json(&s, "DAG or lattice document")?;
                let x = match &a.x {
                    Some(xp) => {
                        let xb = read_file(xp)?;
                        hashes["x"] = json!(sha256_hex(&xb));
                        Some(parse_json(&text(&xb, xp)?, "class-weight document")?)
                    }
                    None => None,
                };
                Embedded::Lattice { lattice, x }
            };
            json_output(name, hashes, to_value(a), input, |i| commands::compute(name, i, &to_value(a)))
        }
        Command::Simulate(a) => {
            let (p, bytes) = main_input(&a.common)?;
            let input = Embedded::Model(parse_model(&text(&bytes, p)?)?);
            let body = commands::simulate_csv(&input, a)?;
            let head = json!({
                "meta": meta(name, json!(sha256_hex(&bytes)), to_value(a)),
                "input": input,
            });
            Ok(format!("{CSV_META_PREFIX}{head}\n{body}"))
        }
        Command::Asymptotic(a) => {
            let (p, bytes) = main_input(&a.common)?;
            let input = Embedded::Model(parse_model(&text(&bytes, p)?)?);
            json_output(name, json!(sha256_hex(&bytes)), to_value(a), input, |i| commands::compute(name, i, &to_value(a)))
        }
        Command::Fit(a) => {
            let (p, bytes) = main_input(&a.common)?;
            let csv = text(&bytes, p)?;
            let mut hashes = json!({"table": sha256_hex(&bytes)});
            let model = match &a.model {
                Some(mp) => {
                    let mb = read_file(mp)?;
                    hashes["model"] = json!(sha256_hex(&mb));
                    Some(parse_model(&text(&mb, mp)?)?)
                }
                None => None,
            };
            let input = Embedded::Table { csv, model };
            json_output(name, hashes, to_value(a), input, |i| commands::compute(name, i, &to_value(a)))
        }
        Command::Verify(c) => {
            let (p, bytes) = main_input(c)?;
            commands::verify(&text(&bytes, p)?, sha256_hex(&bytes), c)
        }
    }
}

fn json_output(
    name: &str,
    hashes: Value,
    options: Value,
    input: Embedded,
    compute: impl FnOnce(&Embedded) -> CliResult<Value>,
) -> CliResult<String> {
    let result = compute(&input)?;
    let doc = json!({
        "meta": meta(name, hashes, options),
        "input": input,
        "result": result,
    });
    Ok(format!("{}\n", serde_json::to_string_pretty(&doc).expect("values serialize")))
}

/// Parses arguments, runs, writes the output and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(out) => {
            let written = match &cli.command.common().output {
                Some(p) if !cli.command.common().schema => std::fs::write(p, out.as_bytes()),
                _ => {
                    use std::io::Write;
                    std::io::stdout().write_all(out.as_bytes())
                }
            };
            match written {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("itlog: cannot write output: {e}");
                    2
                }
            }
        }
        Err(e) => {
            eprintln!("itlog {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
