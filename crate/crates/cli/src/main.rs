//! `entpump` — run entanglement pumping sweeps from the command line.
//!
//! Subcommands:
//! - `bell` / `ghz`: build a sweep from flags and write `populations.csv`
//!   plus `report.json` into the output directory.
//! - `run <config.json>`: same, but with every field read from a JSON file.
//! - `table --system bell|ghz`: print the ancilla-pattern -> target-state
//!   table for the chosen system.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use entpump::experiment::{
    load_config, run_experiment, ExperimentConfig, MapKind, NoiseOverrides, System,
};
use entpump::pauli::{branch_label, simultaneous_eigenstate, Sign};

#[derive(Parser)]
#[command(name = "entpump", version, about = "Dissipative Bell/GHZ state preparation sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a two-qubit Bell-state pump
    Bell(SweepArgs),
    /// Sweep a four-qubit GHZ-state pump
    Ghz(SweepArgs),
    /// Run a sweep described by a JSON config file
    Run {
        /// Path to the experiment config (JSON)
        config: PathBuf,
        /// Output directory for populations.csv and report.json
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the ancilla-pattern to target-state table
    Table {
        /// Which system to tabulate
        #[arg(long, value_parser = ["bell", "ghz"])]
        system: String,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// Ancilla initialization bits, one per map (e.g. 00 or 0110)
    #[arg(long)]
    ancilla: Option<String>,
    /// Comma-separated pump maps (bell: zz,xx; ghz: z12,z23,z34,xxxx)
    #[arg(long, value_delimiter = ',')]
    maps: Option<Vec<MapKind>>,
    /// Number of evenly spaced steps covering p in [0, 1]
    #[arg(long, default_value_t = 20, conflicts_with = "p_list")]
    p_steps: usize,
    /// Explicit comma-separated list of p values
    #[arg(long, value_delimiter = ',')]
    p_list: Option<Vec<f64>>,
    /// Sample this many shots per prepared basis state
    #[arg(long, conflicts_with = "exact")]
    shots: Option<u64>,
    /// Compute exact populations from the density matrix (default)
    #[arg(long)]
    exact: bool,
    /// Noise preset: ideal or hardware-like
    #[arg(long, default_value = "ideal")]
    noise: String,
    /// Apply readout-error mitigation to sampled counts
    #[arg(long)]
    mitigate: bool,
    /// Base RNG seed for shot sampling
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for populations.csv and report.json
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn parse_ancilla(text: &str) -> Result<Vec<u8>, String> {
    text.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(format!("--ancilla must be a bit string, got `{other}`")),
        })
        .collect()
}

fn build_config(system: System, args: &SweepArgs) -> Result<ExperimentConfig, String> {
    let maps = args.maps.clone().unwrap_or_else(|| match system {
        System::Bell => vec![MapKind::Zz, MapKind::Xx],
        System::Ghz => vec![MapKind::Z12, MapKind::Z23, MapKind::Z34, MapKind::Xxxx],
    });
    let ancilla_bits = match &args.ancilla {
        Some(text) => parse_ancilla(text)?,
        None => vec![0; maps.len()],
    };
    let p_grid = match &args.p_list {
        Some(list) => list.clone(),
        None => {
            if args.p_steps == 0 {
                return Err("--p-steps must be at least 1".into());
            }
            (0..=args.p_steps)
                .map(|i| i as f64 / args.p_steps as f64)
                .collect()
        }
    };
    let config = ExperimentConfig {
        system,
        maps,
        ancilla_bits,
        p_grid,
        shots: args.shots,
        noise: args.noise.clone(),
        noise_overrides: None::<NoiseOverrides>,
        mitigate: args.mitigate,
        seed: args.seed,
    };
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

fn print_table(system: System) {
    let (stabs, signs_per_map): (Vec<_>, usize) = match system {
        System::Bell => (entpump::pauli::bell_stabilizers(), 2),
        System::Ghz => (entpump::pauli::ghz_stabilizers(), 4),
    };
    println!("ancilla  target");
    for pattern in 0..(1u32 << signs_per_map) {
        let signs: Vec<Sign> = (0..signs_per_map)
            .map(|i| Sign::from_bit(((pattern >> (signs_per_map - 1 - i)) & 1) as u8))
            .collect();
        let state = simultaneous_eigenstate(&stabs, &signs)
            .expect("stabilizer set fixes a unique state");
        let bits: String = signs.iter().map(|s| char::from(b'0' + s.bit())).collect();
        println!("{bits:<8} ({})/sqrt(2)", branch_label(&state).unwrap());
    }
}

fn execute(cli: Cli) -> Result<(), String> {
    let (config, out) = match cli.command {
        Command::Bell(args) => (build_config(System::Bell, &args)?, args.out),
        Command::Ghz(args) => (build_config(System::Ghz, &args)?, args.out),
        Command::Run { config, out } => (load_config(&config).map_err(|e| e.to_string())?, out),
        Command::Table { system } => {
            print_table(if system == "bell" { System::Bell } else { System::Ghz });
            return Ok(());
        }
    };
    let artifacts = run_experiment(&config, &out).map_err(|e| e.to_string())?;
    println!("wrote {}", artifacts.csv_path.display());
    println!("wrote {}", artifacts.json_path.display());
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
