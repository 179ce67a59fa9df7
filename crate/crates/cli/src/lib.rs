//! Command-line front end for the `calabi` geometry library.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons reject NaN on purpose

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod verify;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{Header, RunConfig};
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "calabi",
    version,
    about = "Calabi metric geometry on conformal volume factors"
)]
pub struct Cli {
    /// Quadrature domain: a node count (normalized domain) or a domain JSON file.
    #[arg(long, global = true)]
    pub domain: Option<String>,
    /// Tolerance on the mass constraint of input factors.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Runge-Kutta step for Jacobi integration.
    #[arg(long, global = true, default_value_t = calabi::connection::DEFAULT_ODE_STEP)]
    pub step: f64,
    /// Finite-difference step for curvature checks.
    #[arg(long = "fd-delta", global = true, default_value_t = calabi::connection::DEFAULT_FD_STEP)]
    pub fd_delta: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Emit JSON instead of CSV where both are available.
    #[arg(long, global = true)]
    pub json: bool,
    /// Rescale the domain weights to total volume 1/4.
    #[arg(long, global = true)]
    pub normalize: bool,
    /// Directory for file outputs.
    #[arg(long, global = true, env = "CALABI_OUT_DIR", default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the minimizing geodesic between two densities.
    Interpolate {
        u0: PathBuf,
        u1: PathBuf,
        #[arg(long, default_value_t = 11)]
        frames: usize,
    },
    /// Run the invariant suite and print a JSON report.
    Verify {
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Pairwise geodesic distance matrix.
    Distance {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Weighted Karcher mean.
    Mean {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Comma-separated weights summing to one.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        /// Stop once the residual norm falls below this.
        #[arg(long, default_value_t = 1e-12)]
        residual: f64,
        #[arg(long = "max-iter", default_value_t = 200)]
        max_iter: usize,
        /// Write the mean to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sample the geodesic with given initial point and velocity.
    Geodesic {
        u0: PathBuf,
        v0: PathBuf,
        #[arg(long, default_value_t = 11)]
        frames: usize,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
    },
    /// Exponential map.
    Exp { u0: PathBuf, v0: PathBuf },
    /// Logarithm map.
    Log { u0: PathBuf, u1: PathBuf },
    /// Conjugate point scan along a geodesic.
    Jacobi { u0: PathBuf, v0: PathBuf },
    /// Diameter and boundary sequences.
    Sequences {
        #[arg(long = "k-max", default_value_t = 8)]
        k_max: u32,
    },
    /// Geodesic of the gradient metric on a periodic grid.
    GridGeodesic {
        potential: PathBuf,
        velocity: PathBuf,
        #[arg(long, default_value_t = 11)]
        frames: usize,
        #[arg(long = "t-end", default_value_t = 1.0)]
        t_end: f64,
    },
}

impl Cli {
    pub fn config(&self) -> RunConfig {
        RunConfig {
            constraint_eps: self.tol,
            ode_step: self.step,
            fd_delta: self.fd_delta,
            normalize: self.normalize,
            seed: self.seed,
            out_dir: self.out.clone(),
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes())?;
    Ok(())
}

pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    let cfg = cli.config();
    cfg.validate()?;
    let dom = cli.domain.as_deref();
    let pair = |a: &PathBuf, b: &PathBuf| -> CliResult<_> {
        let mut p = io::load_points(&[a.clone(), b.clone()], dom, &cfg)?;
        let second = p.pop().expect("two points");
        Ok((p.pop().expect("two points"), second))
    };
    let with_velocity = |u: &PathBuf, v: &PathBuf| -> CliResult<_> {
        let u0 = io::load_points(std::slice::from_ref(u), dom, &cfg)?.remove(0);
        let v0 = io::load_tangent(v, &u0, &cfg)?;
        Ok((u0, v0))
    };
    match &cli.command {
        Command::Interpolate { u0, u1, frames } => {
            let (a, b) = pair(u0, u1)?;
            emit(
                out,
                &commands::interpolate(&a, &b, *frames, &cfg.out_dir, &cfg)?,
            )
        }
        Command::Verify { report } => {
            let domain = io::load_domain(dom, "1024", &cfg)?;
            let r = verify::run(domain, &cfg)?;
            let text = io::to_json(&r);
            if let Some(path) = report {
                io::write_file(path, &text)?;
            }
            emit(out, &text)?;
            let failed = r.failures();
            if failed.is_empty() {
                Ok(())
            } else {
                let names: Vec<&str> = failed.iter().map(|c| c.name.as_str()).collect();
                Err(CliError::Verification(format!(
                    "failed checks: {}",
                    names.join(", ")
                )))
            }
        }
        Command::Distance { inputs } => {
            let points = io::load_points(inputs, dom, &cfg)?;
            emit(
                out,
                &commands::distance_cmd(points, inputs, cli.json, &cfg)?,
            )
        }
        Command::Mean {
            inputs,
            weights,
            residual,
            max_iter,
            output,
        } => {
            let points = io::load_points(inputs, dom, &cfg)?;
            let text = commands::mean_cmd(points, weights.clone(), *residual, *max_iter, &cfg)?;
            match output {
                Some(path) => io::write_file(path, &text),
                None => emit(out, &text),
            }
        }
        Command::Geodesic {
            u0,
            v0,
            frames,
            t_end,
        } => {
            let (u, v) = with_velocity(u0, v0)?;
            emit(out, &commands::geodesic_cmd(&u, &v, *frames, *t_end, &cfg)?)
        }
        Command::Exp { u0, v0 } => {
            let (u, v) = with_velocity(u0, v0)?;
            emit(out, &commands::exp_cmd(&u, &v, &cfg)?)
        }
        Command::Log { u0, u1 } => {
            let (a, b) = pair(u0, u1)?;
            emit(out, &commands::log_cmd(&a, &b, &cfg)?)
        }
        Command::Jacobi { u0, v0 } => {
            let (u, v) = with_velocity(u0, v0)?;
            emit(out, &commands::jacobi_cmd(&u, &v, &cfg)?)
        }
        Command::Sequences { k_max } => {
            let domain = io::load_domain(dom, "1024", &cfg)?;
            emit(out, &commands::sequences_cmd(domain, *k_max, &cfg)?)
        }
        Command::GridGeodesic {
            potential,
            velocity,
            frames,
            t_end,
        } => emit(
            out,
            &commands::grid_geodesic_cmd(potential, velocity, *frames, *t_end, &cfg)?,
        ),
    }
}
