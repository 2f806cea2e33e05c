//! Execution of a validated [`RunConfig`].

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use delaunay_core::certify::{certify_orbit, energy_drift};
use delaunay_core::io::{
    bubble_csv, format_float, report_json, sweep_csv, to_json, trajectory_csv, ConstantsRecord, EigenRecord,
    LinearizationRecord, OrbitRecord,
};
use delaunay_core::periodic::{
    center_branch_orbit, continue_in_t, mountain_pass_initialize, solve_symmetric_orbit, ShootingOptions,
};
use delaunay_core::{integrate, linearize_at_o, linearize_at_p, ModelConstants, PhaseState};

use crate::args::{RunConfig, SeedMode};
use crate::failure::{Failure, EXIT_CERTIFICATE_FAILED};

/// Grid size of the mountain-pass relaxation.
pub const MOUNTAIN_PASS_GRID: usize = 129;

/// What a successful command prints and its exit code.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, exit_code: 0 }
    }
}

fn model(n: u32) -> Result<ModelConstants, Failure> {
    ModelConstants::new(n).map_err(|e| Failure::Validation(e.to_string()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

/// Writes `data` to `out` and returns `summary`, or returns `data` itself.
fn deliver(out: &Option<std::path::PathBuf>, data: String, summary: String) -> Result<Outcome, Failure> {
    match out {
        Some(path) => {
            write_file(path, &data)?;
            Ok(Outcome::ok(summary))
        }
        None => Ok(Outcome::ok(data)),
    }
}

fn shooting_options(rtol: f64, grid: usize) -> Result<ShootingOptions, Failure> {
    let mut opts = ShootingOptions::with_rtol(rtol)?;
    opts.grid_size = grid;
    Ok(opts)
}

pub fn run(config: &RunConfig) -> Result<Outcome, Failure> {
    match config {
        RunConfig::Constants { n, json } => {
            let rec = ConstantsRecord::from(&model(*n)?);
            if *json {
                return Ok(Outcome::ok(to_json(&rec)));
            }
            let mut s = format!("n  = {}\n", rec.n);
            for (name, x) in [
                ("p", rec.p),
                ("K2", rec.k2),
                ("K0", rec.k0),
                ("l", rec.l),
                ("L", rec.big_l),
                ("cn", rec.cn),
                ("C2", rec.c2),
                ("C3", rec.c3),
                ("C4", rec.c4),
                ("Gl", rec.gl),
            ] {
                let _ = writeln!(s, "{name:<2} = {}", format_float(x));
            }
            Ok(Outcome::ok(s))
        }
        RunConfig::Integrate { n, v0, v1, v2, v3, t0, t_end, rtol, atol, out } => {
            let c = model(*n)?;
            let traj = integrate(PhaseState::new(*t0, *v0, *v1, *v2, *v3), *t_end, *rtol, *atol, &c)?;
            let summary = format!(
                "{} samples on [{}, {}], energy drift {}\n",
                traj.len(),
                t0,
                t_end,
                format_float(energy_drift(&traj))
            );
            deliver(out, trajectory_csv(&traj), summary)
        }
        RunConfig::Eigen { n, json } => {
            let c = model(*n)?;
            let lins = [linearize_at_o(&c), linearize_at_p(&c)];
            let rec = EigenRecord { n: *n, linearizations: lins.iter().map(LinearizationRecord::from).collect() };
            if *json {
                return Ok(Outcome::ok(to_json(&rec)));
            }
            let mut s = String::new();
            for lin in &rec.linearizations {
                let _ = writeln!(s, "{:?}:", lin.point);
                for [re, im] in &lin.eigenvalues {
                    let _ = writeln!(s, "  {} {:+e}i", format_float(*re), im);
                }
            }
            Ok(Outcome::ok(s))
        }
        RunConfig::FindPeriodic { n, half_period, seed_mode, rtol, grid, out } => {
            let c = model(*n)?;
            let opts = shooting_options(*rtol, *grid)?;
            let orbit = match seed_mode {
                SeedMode::Linear => center_branch_orbit(&c, *half_period, &opts)?,
                SeedMode::MountainPass => {
                    let (_, seed) = mountain_pass_initialize(&c, *half_period, MOUNTAIN_PASS_GRID)?;
                    solve_symmetric_orbit(&c, *half_period, &seed, &opts)?
                }
            };
            let summary = format!(
                "T = {}, a = {}, b = {}, amplitude = {}, residual = {}, closure gap = {}, iterations = {}\n",
                format_float(orbit.half_period),
                format_float(orbit.a),
                format_float(orbit.b),
                format_float(orbit.amplitude),
                format_float(orbit.residual),
                format_float(orbit.closure_gap),
                orbit.iterations
            );
            deliver(out, to_json(&OrbitRecord::from(&orbit)), summary)
        }
        RunConfig::Sweep { n, t_from, t_to, steps, rtol, grid, out } => {
            let c = model(*n)?;
            let family = continue_in_t(&c, *t_from, *t_to, *steps, &shooting_options(*rtol, *grid)?)?;
            let converged = family.converged().count();
            let last = family.last_good.map_or_else(|| "none".to_string(), format_float);
            let summary = format!("{converged} of {} orbits converged, last good T = {last}\n", family.members.len());
            deliver(out, sweep_csv(&family), summary)
        }
        RunConfig::Certify { input, report } => {
            let text = fs::read_to_string(input).map_err(|e| Failure::io(input, e))?;
            let orbit = OrbitRecord::parse(&text)
                .and_then(|r| r.to_solution())
                .map_err(|e| Failure::Validation(format!("{}: {e}", input.display())))?;
            let certs = certify_orbit(&orbit);
            if let Some(path) = report {
                write_file(path, &report_json(&certs))?;
            }
            let mut s = String::new();
            for cert in &certs {
                let _ = writeln!(
                    s,
                    "{} {} margin {} at t = {}",
                    if cert.passed { "PASS" } else { "FAIL" },
                    cert.name,
                    format_float(cert.worst_margin),
                    format_float(cert.worst_location)
                );
            }
            let all = certs.iter().all(|c| c.passed);
            let exit_code = if all { 0 } else { EXIT_CERTIFICATE_FAILED };
            Ok(Outcome { stdout: s, exit_code })
        }
        RunConfig::Bubble { n, t_from, t_to, points, out } => {
            let c = model(*n)?;
            let summary = format!("{points} bubble samples on [{t_from}, {t_to}]\n");
            deliver(out, bubble_csv(&c, *t_from, *t_to, *points), summary)
        }
    }
}
