//! Command-line grammar and validation into a [`RunConfig`].

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use delaunay_core::ModelConstants;
use serde::Serialize;

use crate::failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "delaunay-lab", version, about = "Radial solutions of the critical biharmonic equation")]
pub struct Cli {
    /// Print the validated configuration as JSON and exit without running.
    #[arg(long, global = true)]
    pub echo_config: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form constants of the equation.
    Constants {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        json: bool,
    },
    /// Integrates the radial ODE from a phase state; writes CSV.
    #[command(allow_negative_numbers = true)]
    Integrate {
        #[arg(long)]
        n: u32,
        /// Initial v; defaults to the constant solution l.
        #[arg(long)]
        v0: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        v1: f64,
        #[arg(long, default_value_t = 0.0)]
        v2: f64,
        #[arg(long, default_value_t = 0.0)]
        v3: f64,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
        #[arg(long, default_value_t = 1e-12)]
        atol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Linearizations at the two stationary points.
    Eigen {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        json: bool,
    },
    /// Symmetric periodic orbit with half period T; writes JSON.
    #[command(allow_negative_numbers = true)]
    FindPeriodic {
        #[arg(long)]
        n: u32,
        #[arg(long = "T")]
        half_period: f64,
        #[arg(long, value_enum, default_value_t = SeedMode::Linear)]
        seed_mode: SeedMode,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
        #[arg(long, default_value_t = 512)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Continuation in T over equally spaced half periods; writes CSV.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[arg(long)]
        n: u32,
        #[arg(long = "T-from")]
        t_from: f64,
        #[arg(long = "T-to")]
        t_to: f64,
        /// Number of half periods, endpoints included.
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
        #[arg(long, default_value_t = 512)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pointwise certificates for an orbit JSON file.
    Certify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Samples of the explicit bubble solution; writes CSV.
    #[command(allow_negative_numbers = true)]
    Bubble {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        t_from: f64,
        #[arg(long)]
        t_to: f64,
        #[arg(long)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedMode {
    Linear,
    MountainPass,
}

/// A fully validated invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Constants {
        n: u32,
        json: bool,
    },
    Integrate {
        n: u32,
        v0: f64,
        v1: f64,
        v2: f64,
        v3: f64,
        t0: f64,
        t_end: f64,
        rtol: f64,
        atol: f64,
        out: Option<PathBuf>,
    },
    Eigen {
        n: u32,
        json: bool,
    },
    FindPeriodic {
        n: u32,
        #[serde(rename = "T")]
        half_period: f64,
        seed_mode: SeedMode,
        rtol: f64,
        grid: usize,
        out: Option<PathBuf>,
    },
    Sweep {
        n: u32,
        #[serde(rename = "T_from")]
        t_from: f64,
        #[serde(rename = "T_to")]
        t_to: f64,
        steps: usize,
        rtol: f64,
        grid: usize,
        out: Option<PathBuf>,
    },
    Certify {
        input: PathBuf,
        report: Option<PathBuf>,
    },
    Bubble {
        n: u32,
        t_from: f64,
        t_to: f64,
        points: usize,
        out: Option<PathBuf>,
    },
}

fn constants(n: u32) -> Result<ModelConstants, Failure> {
    ModelConstants::new(n).map_err(|e| Failure::Validation(format!("--n: {e}")))
}

fn finite(flag: &str, x: f64) -> Result<f64, Failure> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Failure::Validation(format!("{flag}: {x} is not finite")))
    }
}

fn positive(flag: &str, x: f64) -> Result<f64, Failure> {
    if finite(flag, x)? > 0.0 {
        Ok(x)
    } else {
        Err(Failure::Validation(format!("{flag}: {x} must be positive")))
    }
}

fn grid(flag: &str, g: usize) -> Result<usize, Failure> {
    if g >= 8 && g.is_multiple_of(2) {
        Ok(g)
    } else {
        Err(Failure::Validation(format!("{flag}: {g} must be even and at least 8")))
    }
}

impl Command {
    pub fn validate(self) -> Result<RunConfig, Failure> {
        Ok(match self {
            Command::Constants { n, json } => {
                constants(n)?;
                RunConfig::Constants { n, json }
            }
            Command::Integrate { n, v0, v1, v2, v3, t0, t_end, rtol, atol, out } => {
                let c = constants(n)?;
                let v0 = finite("--v0", v0.unwrap_or(c.l))?;
                if v0 < 0.0 {
                    return Err(Failure::Validation(format!("--v0: {v0} must be nonnegative")));
                }
                let (t0, t_end) = (finite("--t0", t0)?, finite("--t-end", t_end)?);
                if t0 == t_end {
                    return Err(Failure::Validation("--t-end must differ from --t0".into()));
                }
                RunConfig::Integrate {
                    n,
                    v0,
                    v1: finite("--v1", v1)?,
                    v2: finite("--v2", v2)?,
                    v3: finite("--v3", v3)?,
                    t0,
                    t_end,
                    rtol: positive("--rtol", rtol)?,
                    atol: positive("--atol", atol)?,
                    out,
                }
            }
            Command::Eigen { n, json } => {
                constants(n)?;
                RunConfig::Eigen { n, json }
            }
            Command::FindPeriodic { n, half_period, seed_mode, rtol, grid: g, out } => {
                constants(n)?;
                let half_period = positive("--T", half_period)?;
                if seed_mode == SeedMode::MountainPass
                    && half_period < delaunay_core::periodic::mountain_pass::MIN_HALF_PERIOD
                {
                    return Err(Failure::Validation(format!(
                        "--T: mountain-pass seeding needs T >= {}",
                        delaunay_core::periodic::mountain_pass::MIN_HALF_PERIOD
                    )));
                }
                RunConfig::FindPeriodic {
                    n,
                    half_period,
                    seed_mode,
                    rtol: positive("--rtol", rtol)?,
                    grid: grid("--grid", g)?,
                    out,
                }
            }
            Command::Sweep { n, t_from, t_to, steps, rtol, grid: g, out } => {
                constants(n)?;
                let (t_from, t_to) = (positive("--T-from", t_from)?, positive("--T-to", t_to)?);
                if t_from != t_to && steps < 2 {
                    return Err(Failure::Validation(format!("--steps: {steps} must be at least 2")));
                }
                RunConfig::Sweep {
                    n,
                    t_from,
                    t_to,
                    steps,
                    rtol: positive("--rtol", rtol)?,
                    grid: grid("--grid", g)?,
                    out,
                }
            }
            Command::Certify { input, report } => RunConfig::Certify { input, report },
            Command::Bubble { n, t_from, t_to, points, out } => {
                constants(n)?;
                let (t_from, t_to) = (finite("--t-from", t_from)?, finite("--t-to", t_to)?);
                if points == 0 {
                    return Err(Failure::Validation("--points must be at least 1".into()));
                }
                if t_from > t_to {
                    return Err(Failure::Validation("--t-from must not exceed --t-to".into()));
                }
                RunConfig::Bubble { n, t_from, t_to, points, out }
            }
        })
    }
}
