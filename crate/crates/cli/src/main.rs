use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

use polypoisson::report::{emit_report, Format};

#[derive(Parser, Debug)]
#[command(name = "polypoisson", version, about = "Exact checks of Poisson structures on twisted polygons")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Dimension of the polygon vertices.
    #[arg(long, global = true, default_value_t = 2)]
    pub nu: usize,
    /// Period of the polygon.
    #[arg(long = "N", global = true, default_value_t = 5)]
    pub n: usize,
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// `special`, `zero` or `file:PATH`.
    #[arg(long, global = true, default_value = "special")]
    pub phi: String,
    /// `file:PATH` with a periodic sequence; defaults to β ≡ 1.
    #[arg(long, global = true)]
    pub beta: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 3)]
    pub trials: usize,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "text", value_parser = parse_format)]
    pub format: Format,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: polypoisson::Error| e.to_string())
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Yang-Baxter residual of the default r-matrix.
    VerifyYbe,
    /// Jacobi identity, momentum, quasi-periodicity and antisymmetry of the polygon bracket.
    VerifyW,
    /// Build a named tensor and compare it with the chain-rule bracket.
    Derive {
        name: String,
        /// Write the tensor as JSON.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Solve for the special φ^(k).
    Phi,
    /// Dirac reduction of the Toda tensor to ρ = β.
    ReduceDirac,
    /// Pushforward of the Toda tensor under the lattice Miura map.
    Pushforward,
    /// Casimir and linearity checks for every k.
    Theorem,
    /// Compatibility of the extended Toda pencil.
    Compat,
    /// Runge-Kutta integration of the Toda flow.
    Flow {
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1.0)]
        time: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Write the trajectory as CSV.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// The full acceptance suite.
    Suite,
}

fn configure_threads() {
    if let Ok(v) = std::env::var("POLYPOISSON_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let c = &cli.common;
    let result = match cli.verb {
        Verb::VerifyYbe => commands::verify_ybe(c),
        Verb::VerifyW => commands::verify_w(c),
        Verb::Derive { ref name, ref emit } => commands::derive(c, name, emit.as_deref()),
        Verb::Phi => commands::phi(c),
        Verb::ReduceDirac => commands::reduce_dirac(c),
        Verb::Pushforward => commands::pushforward(c),
        Verb::Theorem => commands::theorem(c),
        Verb::Compat => commands::compat(c),
        Verb::Flow { dt, time, tol, ref trajectory } => commands::flow(c, dt, time, tol, trajectory.as_deref()),
        Verb::Suite => Ok(commands::Outcome::docs(polypoisson::report::run_suite(c.seed))),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(commands::CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(commands::CliError::Io(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for line in &outcome.preamble {
        println!("{line}");
    }
    match emit_report(&outcome.docs, c.format, c.out.as_deref()) {
        Ok(text) if c.out.is_none() => print!("{text}"),
        Ok(_) => {}
        Err(e) => {
            eprintln!("error: cannot write report: {e}");
            return ExitCode::from(2);
        }
    }
    if outcome.docs.iter().all(|d| d.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
