//! `teleprobe`: plan, measure, scan, tomograph and benchmark from the shell.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{Format, RunConfig};
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "teleprobe", version, about = "Density-matrix elements by logical-qubit teleportation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compile the measurement plan for one element.
    Plan(CommonArgs),
    /// Recover one element.
    Measure(CommonArgs),
    /// Populations, support, then every support coherence.
    Scan(CommonArgs),
    /// Pauli tomography baseline.
    Tomo(CommonArgs),
    /// Scan and tomography side by side.
    Compare(CommonArgs),
    /// Characterize teleporter classes with the four logical test states.
    Bench(CommonArgs),
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    emit_config: bool,

    /// epr, fig5, ghzN, mixedN or basis:BITS.
    #[arg(long)]
    state: Option<String>,
    /// JSON state: {"num_qubits", "amplitudes"} or {"num_qubits", "entries"}.
    #[arg(long)]
    state_file: Option<PathBuf>,
    /// Ry angle of the `fig5` state, degrees.
    #[arg(long)]
    theta: Option<f64>,
    /// Rz angle of the `fig5` state, degrees.
    #[arg(long)]
    phi: Option<f64>,

    /// Register size.
    #[arg(long = "n")]
    num_qubits: Option<usize>,
    /// Row bitstring, qubit 1 first.
    #[arg(long)]
    m: Option<String>,
    /// Column bitstring, qubit 1 first.
    #[arg(long = "nn")]
    n: Option<String>,
    /// Teleporter class for `bench`, as the bitstring m ⊕ n.
    #[arg(long)]
    class: Option<String>,

    /// Exact branch probabilities instead of shots.
    #[arg(long, conflicts_with = "shots")]
    exact: bool,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,

    /// Werner parameter of the GHZ resource.
    #[arg(long)]
    werner_p: Option<f64>,
    /// White-noise weight on the system state.
    #[arg(long)]
    depolarizing: Option<f64>,
    /// Divide this resource fidelity out of the estimates.
    #[arg(long = "p")]
    p_correction: Option<f64>,

    /// Population threshold for the scan support.
    #[arg(long)]
    threshold: Option<f64>,
    /// One teleporter setting per class instead of per element.
    #[arg(long)]
    reuse_branches: bool,
    /// Include the full branch table.
    #[arg(long)]
    dump_branches: bool,
    /// Entrywise tolerance for `compare`.
    #[arg(long)]
    tol: Option<f64>,
    /// Fit the Werner parameter to this average output fidelity.
    #[arg(long)]
    fit: Option<f64>,

    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Default directory for outputs when --out is absent.
    #[arg(long, env = "TELEPROBE_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field.clone() { $target = v; })*
            };
        }
        set!(theta => cfg.theta, phi => cfg.phi, shots => cfg.shots, seed => cfg.seed,
             werner_p => cfg.noise.ghz_werner_p, depolarizing => cfg.noise.system_depolarizing,
             p_correction => cfg.p_correction, threshold => cfg.threshold, tol => cfg.tol,
             format => cfg.format);
        if self.state.is_some() || self.state_file.is_some() {
            cfg.state = self.state.clone();
            cfg.state_file = self.state_file.clone();
        }
        macro_rules! set_opt {
            ($($field:ident),*) => {
                $(if self.$field.is_some() { cfg.$field = self.$field.clone(); })*
            };
        }
        set_opt!(num_qubits, m, n, class, fit);
        if self.exact {
            cfg.shots = 0;
        }
        cfg.reuse_branches |= self.reuse_branches;
        cfg.dump_branches |= self.dump_branches;
        cfg.noise.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, args) = match &cli.command {
        Command::Plan(a) => ("plan", a),
        Command::Measure(a) => ("measure", a),
        Command::Scan(a) => ("scan", a),
        Command::Tomo(a) => ("tomo", a),
        Command::Compare(a) => ("compare", a),
        Command::Bench(a) => ("bench", a),
    };
    let cfg = args.resolve()?;
    if args.emit_config {
        return output::emit(&output::to_json(&cfg)?, None);
    }
    let report = match cli.command {
        Command::Plan(_) => commands::plan(&cfg),
        Command::Measure(_) => commands::measure(&cfg),
        Command::Scan(_) => commands::scan(&cfg),
        Command::Tomo(_) => commands::tomo(&cfg),
        Command::Compare(_) => commands::compare(&cfg),
        Command::Bench(_) => commands::bench(&cfg),
    }?;
    let text = match cfg.format {
        Format::Json => output::to_json(&commands::Envelope::new(name, &cfg, &report.json))?,
        Format::Csv => output::to_csv(&report.csv_header, &report.csv_rows)?,
    };
    let file = format!("{name}.{}", cfg.format.extension());
    let dest = output::destination(args.out.as_deref(), args.out_dir.as_deref(), &file);
    output::emit(&text, dest.as_deref())?;
    report.verdict
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
