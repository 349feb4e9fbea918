//! `kamjet`: batch experiments on frequency arithmetic, jets, normal forms
//! and orbit scans. Every run prints JSON to stdout whose `config` field
//! can be passed back through `kamjet run --config`.

mod config;
mod error;
mod exec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use kamjet::arithmetic::{Descriptor, IndexNorm, MapDescriptor};
use kamjet::birkhoff::{CoordinateMode, SolveOrder};
use kamjet::torusverify::{Scheme, TorusOptions};

use config::{parse_config, read_text, Command, ExperimentConfig, Mode};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "kamjet", version, about = "Small-divisor arithmetic, Poisson jets and KAM-type normal forms")]
struct Cli {
    /// Coefficient field for exact-capable commands.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Rational)]
    mode: Mode,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory for CSV tables.
    #[arg(long, global = true, env = "KAMJET_OUT", default_value = "kamjet-out")]
    out: PathBuf,
    #[command(subcommand)]
    cmd: Sub,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NormArg {
    Euclidean,
    Sup,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CoordsArg {
    Real,
    Morse,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolveArg {
    PerDegree,
    PerMonomial,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeArg {
    Yoshida4,
    Midpoint,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// σ(α)_k for k = 0..kmax.
    Sigma {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        alpha: Vec<String>,
        #[arg(long = "kmax", default_value_t = 8)]
        k_max: u32,
        #[arg(long, value_enum, default_value_t = NormArg::Euclidean)]
        norm: NormArg,
    },
    /// Bruno partial sum of σ(α).
    Bruno {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        alpha: Vec<String>,
        #[arg(long = "kmax", default_value_t = 8)]
        k_max: u32,
    },
    /// Shortest vector of the flowed lattice.
    Lattice {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        alpha: Vec<String>,
        #[arg(long, conflicts_with_all = ["a", "i_norm"])]
        t: Option<f64>,
        /// With --i-norm: derive (ε, t) for the short-vector estimate.
        #[arg(long, requires = "i_norm")]
        a: Option<f64>,
        #[arg(long = "i-norm", requires = "a")]
        i_norm: Option<f64>,
        #[arg(long = "coeff-bound", default_value_t = 20)]
        coeff_bound: i64,
    },
    /// Monte-Carlo fraction of a ball mapped into the Diophantine class.
    Density {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        x0: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long = "kmax", default_value_t = 8)]
        k_max: u32,
        /// Map descriptor as JSON; identity by default.
        #[arg(long)]
        map: Option<String>,
        /// Decay descriptor for a as JSON; σ of the image point by default.
        #[arg(long)]
        a: Option<String>,
        /// Decay descriptor for ρ as JSON; 2^{-6k} by default.
        #[arg(long)]
        rho: Option<String>,
        /// CSV file name inside the output directory.
        #[arg(long, default_value = "density.csv")]
        csv: String,
    },
    /// Resonant strips meeting a ball around α.
    Strips {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        alpha: Vec<String>,
        #[arg(long)]
        r: f64,
        #[arg(long = "kmax", default_value_t = 6)]
        k_max: u32,
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        rho: Option<String>,
    },
    /// Birkhoff normal form of an elliptic Hamiltonian.
    Birkhoff {
        /// Jet file (text or JSON).
        #[arg(long)]
        input: PathBuf,
        /// Normalization degree 2l.
        #[arg(long)]
        order: u32,
        #[arg(long, value_enum, default_value_t = CoordsArg::Real)]
        coords: CoordsArg,
        #[arg(long, value_enum, default_value_t = SolveArg::PerDegree)]
        solve: SolveArg,
    },
    /// KAM iteration.
    Kam {
        #[command(subcommand)]
        action: KamAction,
    },
    /// Numerical orbit classification.
    Torus {
        #[command(subcommand)]
        action: TorusAction,
    },
    /// Condensed summary of earlier artifacts.
    Report { inputs: Vec<PathBuf> },
    /// Re-run a configuration (bare or as recorded in an artifact header).
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum KamAction {
    /// Emit the stage trace as JSON-lines.
    Run {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        stages: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum TorusAction {
    Scan {
        /// Hamiltonian jet file (float coefficients).
        #[arg(long = "H")]
        hamiltonian: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        windows: Option<usize>,
        #[arg(long, value_enum, default_value_t = SchemeArg::Yoshida4)]
        scheme: SchemeArg,
        #[arg(long = "csv-prefix", default_value = "torus")]
        csv_prefix: String,
    },
}

fn json_arg<T: serde::de::DeserializeOwned>(name: &str, s: Option<String>) -> Result<Option<T>, CliError> {
    s.map(|s| serde_json::from_str(&s).map_err(|e| CliError::Schema(format!("--{name}: {e}")))).transpose()
}

fn default_rho() -> Descriptor {
    Descriptor::Geometric { c: 1.0, ratio: 2f64.powi(-6) }
}

fn build_command(sub: Sub) -> Result<Command, CliError> {
    Ok(match sub {
        Sub::Sigma { alpha, k_max, norm } => Command::Sigma {
            alpha,
            k_max,
            norm: match norm {
                NormArg::Euclidean => IndexNorm::Euclidean,
                NormArg::Sup => IndexNorm::Sup,
            },
        },
        Sub::Bruno { alpha, k_max } => Command::Bruno { alpha, k_max },
        Sub::Lattice { alpha, t, a, i_norm, coeff_bound } => {
            Command::Lattice { alpha, t, lemma: a.zip(i_norm), coeff_bound }
        }
        Sub::Density { x0, r, samples, k_max, map, a, rho, csv } => Command::Density {
            map: json_arg::<MapDescriptor>("map", map)?.unwrap_or(MapDescriptor::Identity),
            x0,
            a: json_arg("a", a)?,
            rho: json_arg("rho", rho)?.unwrap_or_else(default_rho),
            r,
            samples,
            k_max,
            csv,
        },
        Sub::Strips { alpha, r, k_max, a, rho } => Command::Strips {
            alpha,
            a: json_arg("a", a)?,
            rho: json_arg("rho", rho)?.unwrap_or_else(default_rho),
            r,
            k_max,
        },
        Sub::Birkhoff { input, order, coords, solve } => Command::Birkhoff {
            input,
            order,
            coords: match coords {
                CoordsArg::Real => CoordinateMode::RealElliptic,
                CoordsArg::Morse => CoordinateMode::ComplexMorse,
            },
            solve: match solve {
                SolveArg::PerDegree => SolveOrder::PerDegree,
                SolveArg::PerMonomial => SolveOrder::PerMonomial,
            },
        },
        Sub::Kam { action: KamAction::Run { problem, stages } } => Command::Kam { problem, stages },
        Sub::Torus { action: TorusAction::Scan { hamiltonian, r, samples, dt, steps, windows, scheme, csv_prefix } } => {
            let mut options = TorusOptions::default();
            options.dt = dt.unwrap_or(options.dt);
            options.steps = steps.unwrap_or(options.steps);
            options.windows = windows.unwrap_or(options.windows);
            options.scheme = match scheme {
                SchemeArg::Yoshida4 => Scheme::Yoshida4,
                SchemeArg::Midpoint => Scheme::Midpoint,
            };
            Command::Torus { hamiltonian, r, samples, options, csv_prefix }
        }
        Sub::Report { inputs } => Command::Report { inputs },
        Sub::Run { .. } => unreachable!("handled before building a command"),
    })
}

fn run(cli: Cli) -> Result<String, CliError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Schema(format!("--jobs: {e}")))?;
    }
    let cfg = match cli.cmd {
        Sub::Run { config } => parse_config(&read_text(&config)?)?,
        sub => ExperimentConfig { mode: cli.mode, seed: cli.seed, out_dir: cli.out, command: build_command(sub)? },
    };
    Ok(exec::execute(&cfg)?.render())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("{}", e.to_json());
            ExitCode::from(e.code() as u8)
        }
    }
}
