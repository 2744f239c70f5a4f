//! Command-line front end: compile, split, simulate, run the protocol,
//! and post-process, with a manifest written next to every output file.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use blindfactor::builder::{shor_circuit, shor_circuit_with_encoding, CompiledEncoding};
use blindfactor::circuit::gate_census;
use blindfactor::counting::{bitstring_size_bound, component_count_bound, max_depth, s_prime};
use blindfactor::partition::optimize_with_budget;
use blindfactor::protocol::{run_protocol, ProtocolConfig, Verdict};
use blindfactor::shor::{factors_from_period, recover_period};
use blindfactor::{Circuit, StateVector};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "blindfactor",
    version = concat!(env!("CARGO_PKG_VERSION"), " (circuit schema 1)"),
    about = "Blind delegated period finding: build, split, simulate, verify"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a period-finding circuit (num, base, siz1, siz2)
    Build(BuildArgs),
    /// Split a circuit at the latest-possible first non-Clifford layer
    Partition(PartitionArgs),
    /// Exact outcome distribution of a circuit on |0...0>
    Simulate(SimulateArgs),
    /// Run the multi-round two-server verification protocol
    Protocol(ProtocolArgs),
    /// Count distinct depth-1 components on n qubits and the codec bounds
    Enumerate(EnumerateArgs),
    /// Recover a period and factors from a measured outcome
    Postprocess(PostprocessArgs),
}

#[derive(clap::Args)]
struct BuildArgs {
    /// Modulus to factor (num)
    #[arg(long = "N")]
    n: u64,
    /// Coprime base whose multiplicative order is sought (base)
    #[arg(long)]
    a: u64,
    /// First-register qubits (siz1)
    #[arg(long)]
    t: usize,
    /// Second-register qubits (siz2)
    #[arg(long = "L")]
    l: usize,
    /// Comma-separated codewords for orbit positions 0..r, overriding the
    /// binary default
    #[arg(long, value_delimiter = ',')]
    encoding: Option<Vec<usize>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct PartitionArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Clifford stage (A executes its reverse)
    #[arg(long)]
    out_a: PathBuf,
    /// Remainder holding every non-Clifford gate
    #[arg(long)]
    out_b: PathBuf,
    #[arg(long)]
    report: PathBuf,
    /// Equivalence-check budget for the reordering search above 9 layers
    #[arg(long, default_value_t = 1_000_000)]
    budget: usize,
    /// Include maxDep(N, a) in the report
    #[arg(long = "N")]
    n: Option<u64>,
    #[arg(long)]
    a: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Register {
    First,
    All,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Register::First)]
    register: Register,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ProtocolArgs {
    #[arg(long = "N")]
    n: u64,
    #[arg(long)]
    a: u64,
    #[arg(long)]
    t: usize,
    #[arg(long = "L")]
    l: usize,
    /// Probability of a computational round
    #[arg(long, default_value_t = 0.25)]
    eta: f64,
    #[arg(long, env = "BLINDFACTOR_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    max_rounds: usize,
    /// honest | chsh-classical | depolarizing:p | bit-flip:p
    #[arg(long, default_value = "honest")]
    adversary_a: String,
    #[arg(long, default_value = "honest")]
    adversary_b: String,
    /// Skip the offset/multiple period-recovery scan
    #[arg(long)]
    no_heuristic: bool,
    #[arg(long)]
    chsh_batch: Option<usize>,
    #[arg(long)]
    trial_budget: Option<usize>,
    #[arg(long)]
    tomography_batch: Option<usize>,
    /// Transcript JSON path
    #[arg(long)]
    out: PathBuf,
    /// Optional per-subprotocol statistics CSV
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(clap::Args)]
struct EnumerateArgs {
    #[arg(long)]
    n: usize,
}

#[derive(clap::Args)]
struct PostprocessArgs {
    #[arg(long)]
    y: u64,
    #[arg(long)]
    t: u32,
    #[arg(long = "N")]
    n: u64,
    #[arg(long)]
    a: u64,
    /// Scan period candidates near and beyond the convergents
    #[arg(long)]
    heuristic: bool,
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    flags: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    library_version: &'static str,
    schema_version: u32,
}

fn write_with_manifest(out: &Path, contents: &str, manifest: &RunManifest) -> Result<(), String> {
    fs::write(out, contents).map_err(|e| format!("{}: {e}", out.display()))?;
    let path = manifest_path(out);
    let body = serde_json::to_string_pretty(manifest).expect("manifest serialization");
    fs::write(&path, body).map_err(|e| format!("{}: {e}", path.display()))
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn manifest(
    command: &str,
    flags: serde_json::Value,
    seed: Option<u64>,
    inputs: &[&Path],
    outputs: &[&Path],
) -> RunManifest {
    RunManifest {
        command: command.into(),
        flags,
        seed,
        inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        library_version: env!("CARGO_PKG_VERSION"),
        schema_version: SCHEMA_VERSION,
    }
}

fn read_circuit(path: &Path) -> Result<Circuit, String> {
    let json = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Circuit::from_json(&json).map_err(|e| format!("{}: {e}", path.display()))
}

fn census_json(circuit: &Circuit) -> serde_json::Value {
    let census = gate_census(circuit);
    json!({
        "counts": census.counts,
        "non_clifford": census.non_clifford,
        "depth": circuit.components.len(),
    })
}

fn cmd_build(args: &BuildArgs) -> Result<i32, String> {
    let circuit = match &args.encoding {
        None => shor_circuit(args.n, args.a, args.t, args.l),
        Some(codewords) => {
            let encoding =
                CompiledEncoding::with_codewords(args.n, args.a, codewords.clone(), args.l)
                    .map_err(|e| e.to_string())?;
            shor_circuit_with_encoding(args.t, &encoding)
        }
    }
    .map_err(|e| e.to_string())?;
    let m = manifest(
        "build",
        json!({"N": args.n, "a": args.a, "t": args.t, "L": args.l, "encoding": args.encoding}),
        None,
        &[],
        &[&args.out],
    );
    write_with_manifest(&args.out, &circuit.to_json(), &m)?;
    println!(
        "wrote {} ({} qubits, depth {})",
        args.out.display(),
        circuit.n,
        circuit.components.len()
    );
    Ok(0)
}

fn cmd_partition(args: &PartitionArgs) -> Result<i32, String> {
    let circuit = read_circuit(&args.input)?;
    let partition = optimize_with_budget(&circuit, args.budget).map_err(|e| e.to_string())?;
    let mut report = json!({
        "d": circuit.components.len(),
        "d_star_greater": partition.d_star,
        "optimal": partition.optimal,
        "census": census_json(&circuit),
        "census_a": census_json(&partition.c_less),
        "census_b": census_json(&partition.c_greater),
    });
    if let (Some(n), Some(a)) = (args.n, args.a) {
        report["max_dep"] = json!(max_depth(n, a));
    }
    let flags = json!({
        "in": args.input.display().to_string(),
        "budget": args.budget,
        "N": args.n,
        "a": args.a,
    });
    let m = manifest(
        "partition",
        flags,
        None,
        &[&args.input],
        &[&args.out_a, &args.out_b, &args.report],
    );
    write_with_manifest(&args.out_a, &partition.c_less.to_json(), &m)?;
    write_with_manifest(&args.out_b, &partition.c_greater.to_json(), &m)?;
    write_with_manifest(
        &args.report,
        &serde_json::to_string_pretty(&report).expect("report serialization"),
        &m,
    )?;
    println!(
        "d = {}, d*_> = {}, non-Clifford gates in B: {}",
        circuit.components.len(),
        partition.d_star,
        gate_census(&partition.c_greater).non_clifford
    );
    Ok(0)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<i32, String> {
    let circuit = read_circuit(&args.input)?;
    let mut state = StateVector::zero(circuit.n).map_err(|e| e.to_string())?;
    state.apply_circuit(&circuit, 0).map_err(|e| e.to_string())?;
    let qubits: Vec<usize> = match args.register {
        Register::First => (0..circuit.t).collect(),
        Register::All => (0..circuit.n).collect(),
    };
    let csv = state.distribution(&qubits).to_csv();
    match &args.out {
        None => print!("{csv}"),
        Some(out) => {
            let flags = json!({
                "in": args.input.display().to_string(),
                "register": if args.register == Register::First { "first" } else { "all" },
                "format": "csv",
            });
            let m = manifest("simulate", flags, None, &[&args.input], &[out]);
            write_with_manifest(out, &csv, &m)?;
        }
    }
    Ok(0)
}

fn cmd_protocol(args: &ProtocolArgs) -> Result<i32, String> {
    let mut config = ProtocolConfig::new(args.n, args.a, args.t, args.l);
    config.eta = args.eta;
    config.seed = args.seed;
    config.max_rounds = args.max_rounds;
    config.behavior_a = args.adversary_a.parse().map_err(|e| format!("{e}"))?;
    config.behavior_b = args.adversary_b.parse().map_err(|e| format!("{e}"))?;
    config.heuristic = !args.no_heuristic;
    if let Some(v) = args.chsh_batch {
        config.chsh_batch = v;
    }
    if let Some(v) = args.trial_budget {
        config.trial_budget = v;
    }
    if let Some(v) = args.tomography_batch {
        config.tomography_batch = v;
    }
    let transcript = run_protocol(&config).map_err(|e| e.to_string())?;

    let flags = serde_json::to_value(&config).expect("config serialization");
    let mut outputs: Vec<&Path> = vec![&args.out];
    if let Some(summary) = &args.summary {
        outputs.push(summary);
    }
    let m = manifest("protocol", flags, Some(args.seed), &[], &outputs);
    write_with_manifest(&args.out, &transcript.to_json(), &m)?;
    if let Some(summary) = &args.summary {
        write_with_manifest(summary, &transcript.summary_csv(), &m)?;
    }
    match &transcript.verdict {
        Verdict::Factors { p, q, period } => {
            println!("verdict: factors {p} x {q} (period {period})");
            Ok(0)
        }
        Verdict::Dishonest { server } => {
            println!("verdict: dishonest({server:?})");
            Ok(1)
        }
        Verdict::Exhausted => {
            println!("verdict: exhausted after {} rounds", args.max_rounds);
            Ok(1)
        }
    }
}

fn cmd_enumerate(args: &EnumerateArgs) -> Result<i32, String> {
    if args.n == 0 || args.n > 64 {
        return Err("n must be in 1..=64".into());
    }
    println!("n = {}", args.n);
    println!("s' = {}", s_prime(args.n));
    println!("component_count_bound = {}", component_count_bound(args.n));
    println!(
        "bitstring_size_bound_bits = {}",
        bitstring_size_bound(args.n)
    );
    Ok(0)
}

fn cmd_postprocess(args: &PostprocessArgs) -> Result<i32, String> {
    if args.y >> args.t != 0 {
        return Err(format!("y = {} does not fit in {} bits", args.y, args.t));
    }
    match recover_period(args.y, args.t, args.a, args.n, args.heuristic) {
        None => {
            println!("no valid period for y = {}", args.y);
            Ok(1)
        }
        Some(r) => {
            println!("r = {r}");
            match factors_from_period(r, args.a, args.n).map_err(|e| e.to_string())? {
                Some((p, q)) => {
                    println!("factors: {p} x {q}");
                    Ok(0)
                }
                None => {
                    println!("period is valid but yields only trivial divisors");
                    Ok(1)
                }
            }
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Partition(args) => cmd_partition(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Protocol(args) => cmd_protocol(args),
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Postprocess(args) => cmd_postprocess(args),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(message) => {
            eprintln!("error: {message}");
            std::process::exit(2);
        }
    }
}
