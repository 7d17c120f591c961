use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod output;
mod run;

use config::{CommandKind, Format, Method, RunConfig};

/// Experiments on the probability simplex and its square-root sphere.
#[derive(Debug, Parser)]
#[command(name = "simplexgeo", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Cmd>,

    /// Truncation dimension N.
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Objective coefficients: uniform | geometric:<r> (c_n = r^n) | explicit:<v,...> | file:<path>.
    #[arg(long = "c", global = true, value_name = "SPEC")]
    c_spec: Option<String>,
    /// Initial distribution, normalized to unit sum (default uniform).
    #[arg(long = "p0", global = true, value_name = "SPEC")]
    p0_spec: Option<String>,
    /// Initial velocity, projected onto the zero-sum hyperplane.
    #[arg(long = "v0", global = true, value_name = "SPEC")]
    v0_spec: Option<String>,
    /// Root exponent q > 1 (default 2).
    #[arg(long, global = true)]
    q: Option<f64>,
    /// Final time (default 10).
    #[arg(long, global = true)]
    t_max: Option<f64>,
    /// Time step (default 0.01).
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Vertex-gap tolerance for lp (default 1e-8).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    method: Option<Method>,
    /// Random trials for isometry / integrability (default 10).
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true, env = "SIMPLEXGEO_SEED")]
    seed: Option<u64>,
    /// Output file, replaced atomically. Nothing is written without it.
    #[arg(long = "out", global = true, value_name = "PATH")]
    out_path: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// JSON file with RunConfig fields in snake case; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Omit the generated_at field from JSON output.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Cmd {
    /// Gradient flow of a linear objective (closed form or RK4).
    Flow,
    /// e-geodesic from p0 with velocity v0 (or the gradient of c).
    Geodesic,
    /// Solve max <c, p> over the simplex by following the flow.
    Lp,
    /// Square-root isometry and q-root identity on random tangents.
    Isometry,
    /// Poisson brackets of the quadratic first integrals.
    Bracket,
    /// Seeded integrability suite.
    Integrability,
    /// Every property suite at the given dimension.
    CheckAll,
}

impl From<Cmd> for CommandKind {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Flow => Self::Flow,
            Cmd::Geodesic => Self::Geodesic,
            Cmd::Lp => Self::Lp,
            Cmd::Isometry => Self::Isometry,
            Cmd::Bracket => Self::Bracket,
            Cmd::Integrability => Self::Integrability,
            Cmd::CheckAll => Self::CheckAll,
        }
    }
}

impl Cli {
    fn into_config(self) -> Result<RunConfig, config::ConfigError> {
        let flags = RunConfig {
            command: self.command.map(Into::into),
            dim: self.dim,
            c_spec: self.c_spec,
            p0_spec: self.p0_spec,
            v0_spec: self.v0_spec,
            q: self.q,
            t_max: self.t_max,
            dt: self.dt,
            tol: self.tol,
            method: self.method,
            seed: self.seed,
            trials: self.trials,
            out_path: self.out_path,
            format: self.format,
            no_timestamp: self.no_timestamp.then_some(true),
        };
        match self.config {
            Some(path) => Ok(flags.over(RunConfig::from_file(&path)?)),
            None => Ok(flags),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.into_config().map_err(run::RunError::from).and_then(|cfg| {
        let outcome = run::execute(&cfg)?;
        Ok((cfg, outcome))
    }) {
        Ok((cfg, outcome)) => {
            for line in &outcome.details {
                println!("{line}");
            }
            if let Some(path) = &cfg.out_path {
                let command = cfg.command.map_or("", |c| c.name());
                if let Err(e) = output::write_atomic(path, &outcome.artifact.render(command, &cfg)) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            }
            println!("{}", outcome.summary);
            if outcome.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let kind = if e.exit_code() == 2 { "config error" } else { "error" };
            eprintln!("{kind}: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
