//! Following the family of periodic orbits that bifurcates from the
//! constant solution.
//!
//! Small orbits are found with the amplitude pinned and the half period free,
//! starting from the linear center mode. Once the branch has moved away from
//! the linear half period, natural-parameter continuation in `T` takes over.

use crate::constants::ModelConstants;
use crate::dynamics::{PhaseState, State};
use crate::error::PeriodicError;
use crate::spectra::{center_frequency, linear_half_period};

use super::shooting::{
    finish_pinned, newton_orbit, segment_count, solve_with_pinned_amplitude, OrbitSeed, OrbitSolution, ShootingOptions,
};

/// Largest half-period increment of one continuation step.
pub const MAX_T_STEP: f64 = 0.2;
const MIN_T_STEP: f64 = 1e-3;
/// The amplitude march hands over to `T` continuation once the half period
/// has moved this far (relative) from the linear one.
const HANDOVER: f64 = 0.1;
const MAX_MARCH_STEPS: usize = 400;

fn cosine_nodes(c: &ModelConstants, eps: f64, half_period: f64, segments: usize) -> Vec<State> {
    let k = std::f64::consts::PI / half_period;
    let h = half_period / segments as f64;
    (0..segments)
        .map(|i| {
            let (s, co) = (k * i as f64 * h).sin_cos();
            [c.l + eps * co, -eps * k * s, -eps * k * k * co, eps * k * k * k * s]
        })
        .collect()
}

fn lerp_nodes(p: &[State], q: &[State], w: f64) -> Vec<State> {
    p.iter()
        .zip(q)
        .map(|(x, y)| {
            let mut o = [0.0; 4];
            for j in 0..4 {
                o[j] = y[j] + w * (y[j] - x[j]);
            }
            o
        })
        .collect()
}

/// Walks along the center branch with the amplitude `a = l + eps` pinned
/// until the half period has moved past `stop` (in the direction of
/// `target`).
fn amplitude_march(c: &ModelConstants, target: f64, opts: &ShootingOptions) -> Result<OrbitSolution, PeriodicError> {
    let t_lin = linear_half_period(c);
    let omega = center_frequency(c);
    let up = target >= t_lin;
    let stop = if up { target.min(t_lin * (1.0 + HANDOVER)) } else { target.max(t_lin * (1.0 - HANDOVER)) };
    let segments = segment_count(t_lin.max(stop) * 1.05, opts.max_segment);
    let reached = |t: f64| if up { t >= stop } else { t <= stop };

    let scale = c.l;
    let mut d_eps = 2e-3 * scale;
    let max_d_eps = 2e-2 * scale;
    let min_d_eps = 1e-6 * scale;

    // (eps, T, nodes) of the last two members
    let mut hist: Vec<(f64, f64, Vec<State>)> = Vec::new();
    let mut eps = d_eps;
    let mut guess_t = t_lin;
    let mut guess_nodes = cosine_nodes(c, eps, t_lin, segments);
    guess_nodes[0][2] = -eps * omega * omega;

    for _ in 0..MAX_MARCH_STEPS {
        match solve_with_pinned_amplitude(c, c.l + eps, guess_t, &guess_nodes, segments, opts) {
            Ok((t, nodes, _)) if t > 0.5 * t_lin && t < 4.0 * t_lin.max(stop) => {
                hist.push((eps, t, nodes));
                if hist.len() > 2 {
                    hist.remove(0);
                }
                if reached(t) {
                    let (_, t, nodes) = hist.pop().expect("non-empty");
                    return finish_pinned(c, t, &nodes, opts);
                }
                if (up && t < t_lin * (1.0 - HANDOVER)) || (!up && t > t_lin * (1.0 + HANDOVER)) {
                    return Err(PeriodicError::InvalidRequest(format!(
                        "the center branch moves away from half period {target}"
                    )));
                }
                d_eps = (d_eps * 1.5).min(max_d_eps);
            }
            _ => {
                d_eps *= 0.5;
                if d_eps < min_d_eps {
                    return Err(PeriodicError::NoConvergence { iterations: 0, residual: f64::NAN });
                }
            }
        }
        let base = hist.last().map(|h| h.0).unwrap_or(0.0);
        eps = base + d_eps;
        match hist.as_slice() {
            [p, q] => {
                let w = (eps - q.0) / (q.0 - p.0);
                guess_t = q.1 + w * (q.1 - p.1);
                guess_nodes = lerp_nodes(&p.2, &q.2, w);
            }
            [q] => {
                guess_t = q.1;
                guess_nodes = q.2.clone();
                let shift = eps / q.0;
                for s in guess_nodes.iter_mut() {
                    s[0] = c.l + (s[0] - c.l) * shift;
                    for x in s.iter_mut().skip(1) {
                        *x *= shift;
                    }
                }
            }
            _ => {
                guess_t = t_lin;
                guess_nodes = cosine_nodes(c, eps, t_lin, segments);
                guess_nodes[0][2] = -eps * omega * omega;
            }
        }
        guess_nodes[0][0] = c.l + eps;
    }
    Err(PeriodicError::NoConvergence { iterations: MAX_MARCH_STEPS, residual: f64::NAN })
}

/// Seed at `target` obtained by linear extrapolation of two orbits in `T`,
/// each profile rescaled to the target half period first.
fn extrapolated_seed(prev: &OrbitSolution, last: &OrbitSolution, target: f64) -> OrbitSeed {
    let p = prev.rescaled_profile(target);
    let q = last.rescaled_profile(target);
    if p.len() != q.len() || last.half_period == prev.half_period {
        return last.rescaled_seed(target);
    }
    let w = (target - last.half_period) / (last.half_period - prev.half_period);
    let profile: Vec<PhaseState> = p
        .iter()
        .zip(&q)
        .map(|(x, y)| {
            PhaseState::new(
                y.t,
                y.v + w * (y.v - x.v),
                y.v1 + w * (y.v1 - x.v1),
                y.v2 + w * (y.v2 - x.v2),
                y.v3 + w * (y.v3 - x.v3),
            )
        })
        .collect();
    OrbitSeed { a: profile[0].v, b: profile[0].v2, profile: Some(profile) }
}

/// Continues from the latest orbit(s) in `path` to `target`, subdividing
/// the step as needed. `path` keeps the last two converged members.
fn advance(
    c: &ModelConstants,
    path: &mut Vec<OrbitSolution>,
    target: f64,
    opts: &ShootingOptions,
) -> Result<OrbitSolution, PeriodicError> {
    let mut step = MAX_T_STEP;
    loop {
        let last = path.last().expect("non-empty path");
        let gap = target - last.half_period;
        if gap.abs() <= 1e-14 * target.abs().max(1.0) {
            return Ok(last.clone());
        }
        let t_next = if gap.abs() <= step { target } else { last.half_period + step * gap.signum() };
        let seed = match path.len() {
            n if n >= 2 => extrapolated_seed(&path[n - 2], &path[n - 1], t_next),
            _ => last.rescaled_seed(t_next),
        };
        match newton_orbit(c, t_next, &seed, opts) {
            Ok(orbit) => {
                path.push(orbit);
                if path.len() > 2 {
                    path.remove(0);
                }
                step = (step * 1.5).min(MAX_T_STEP);
            }
            Err(e) => {
                step *= 0.5;
                if step < MIN_T_STEP {
                    return Err(e);
                }
            }
        }
    }
}

/// Pins `a = seed.a`, solves for the half period of the orbit with that
/// amplitude, then continues it in `T` to `half_period`.
pub(crate) fn from_pinned_amplitude(
    c: &ModelConstants,
    half_period: f64,
    seed: &OrbitSeed,
    opts: &ShootingOptions,
) -> Result<OrbitSolution, PeriodicError> {
    let segments = segment_count(half_period, opts.max_segment);
    let h = half_period / segments as f64;
    let mut nodes = vec![[seed.a, 0.0, seed.b, 0.0]];
    for k in 1..segments {
        nodes.push(seed.node_state(k as f64 * h, half_period, c));
    }
    let (t, nodes, _) = solve_with_pinned_amplitude(c, seed.a, half_period, &nodes, segments, opts)?;
    if !(t > 0.0) {
        return Err(PeriodicError::NoConvergence { iterations: 0, residual: f64::NAN });
    }
    let first = finish_pinned(c, t, &nodes, opts)?;
    advance(c, &mut vec![first], half_period, opts)
}

/// Symmetric periodic orbit with half period `T` on the branch through the
/// linear center mode.
pub fn center_branch_orbit(
    c: &ModelConstants,
    half_period: f64,
    opts: &ShootingOptions,
) -> Result<OrbitSolution, PeriodicError> {
    if !(half_period > 0.0) || !half_period.is_finite() {
        return Err(PeriodicError::InvalidRequest(format!("half period {half_period} must be positive")));
    }
    let first = amplitude_march(c, half_period, opts)?;
    let mut path = vec![first];
    advance(c, &mut path, half_period, opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMember {
    pub half_period: f64,
    pub outcome: Result<OrbitSolution, PeriodicError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub members: Vec<FamilyMember>,
    /// Largest-index half period reached with a converged orbit.
    pub last_good: Option<f64>,
}

impl Family {
    pub fn converged(&self) -> impl Iterator<Item = &OrbitSolution> {
        self.members.iter().filter_map(|m| m.outcome.as_ref().ok())
    }
}

/// Natural-parameter continuation over `steps` equally spaced half periods
/// from `t_start` to `t_end`. The first failure ends the branch; it is
/// recorded as the final member.
pub fn continue_in_t(
    c: &ModelConstants,
    t_start: f64,
    t_end: f64,
    steps: usize,
    opts: &ShootingOptions,
) -> Result<Family, PeriodicError> {
    for t in [t_start, t_end] {
        if !(t > 0.0) || !t.is_finite() {
            return Err(PeriodicError::InvalidRequest(format!("half period {t} must be positive")));
        }
    }
    let values: Vec<f64> = if t_start == t_end {
        vec![t_start]
    } else {
        if steps < 2 {
            return Err(PeriodicError::InvalidRequest(format!("steps = {steps} must be at least 2")));
        }
        (0..steps).map(|i| t_start + (t_end - t_start) * i as f64 / (steps - 1) as f64).collect()
    };

    let mut members = Vec::with_capacity(values.len());
    let mut last_good = None;
    let mut path: Vec<OrbitSolution> = Vec::new();
    for &t in &values {
        let outcome = if path.is_empty() { center_branch_orbit(c, t, opts) } else { advance(c, &mut path, t, opts) };
        let ok = outcome.is_ok();
        if let Ok(orbit) = &outcome {
            last_good = Some(t);
            if path.last().map(|p| p.half_period) != Some(orbit.half_period) {
                path.push(orbit.clone());
                if path.len() > 2 {
                    path.remove(0);
                }
            }
        }
        members.push(FamilyMember { half_period: t, outcome });
        if !ok {
            break;
        }
    }
    Ok(Family { members, last_good })
}
