//! Pointwise certificates for sampled solutions.
//!
//! Every inequality is checked in `v` coordinates after dividing out the
//! positive factor `e^{-nt/2}` shared by all its terms, so margins do not
//! under- or overflow at large `|t|`.

use serde::{Deserialize, Serialize};

use crate::constants::ModelConstants;
use crate::dynamics::{PhaseState, Trajectory};
use crate::error::CertifyError;
use crate::periodic::OrbitSolution;

/// Relative slack allowed below zero, in units of the largest term.
pub const RELATIVE_SLACK: f64 = 1e-12;
/// Energy drift allowed along an orbit grid, relative to `max(1, |Ẽ|)`.
pub const ENERGY_SLACK: f64 = 1e-6;
/// `|v''|` below this at a critical point leaves the extremum unclassified.
pub const DEGENERATE_CURVATURE: f64 = 1e-10;
const BISECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub name: String,
    pub passed: bool,
    /// Smallest slack over the samples; positive means the inequality holds.
    pub worst_margin: f64,
    pub worst_location: f64,
    pub tolerance: f64,
}

impl Certificate {
    /// Folds `(t, margin, scale)` triples; the tolerance is
    /// [`RELATIVE_SLACK`] times the largest scale.
    fn from_margins(name: &str, points: impl IntoIterator<Item = (f64, f64, f64)>) -> Self {
        let mut worst = (f64::NAN, f64::INFINITY);
        let mut scale: f64 = 0.0;
        for (t, m, s) in points {
            if m < worst.1 || worst.0.is_nan() {
                worst = (t, m);
            }
            scale = scale.max(s.abs());
        }
        if worst.0.is_nan() {
            worst = (0.0, 0.0);
        }
        let tolerance = RELATIVE_SLACK * scale;
        Self {
            name: name.to_string(),
            passed: worst.1 >= -tolerance,
            worst_margin: worst.1,
            worst_location: worst.0,
            tolerance,
        }
    }
}

/// Margin reported at samples where `v <= 0`, where the inequalities are
/// undefined.
const UNDEFINED_MARGIN: f64 = f64::MIN;

/// `B = v'' + 2v' - (n(n-4)/4) v`, with `Δu = e^{-nt/2} B`.
pub fn laplacian_bracket(s: &PhaseState, c: &ModelConstants) -> f64 {
    s.v2 + 2.0 * s.v1 - c.k0.sqrt() * s.v
}

fn gradient_term(s: &PhaseState, c: &ModelConstants) -> f64 {
    let g = s.v1 - c.half_gap() * s.v;
    2.0 / (c.n - 4) as f64 * g * g / s.v
}

fn laplacian_power(v: f64, c: &ModelConstants) -> f64 {
    v.powf(c.n as f64 / (c.n - 4) as f64)
}

pub fn check_laplacian_negative(states: &[PhaseState], c: &ModelConstants) -> Certificate {
    let k = c.k0.sqrt();
    Certificate::from_margins(
        "laplacian_negative",
        states.iter().map(|s| {
            let scale = s.v2.abs() + 2.0 * s.v1.abs() + k * s.v.abs();
            (s.t, -laplacian_bracket(s, c), scale)
        }),
    )
}

/// `-Δu >= √((n-4)/n) u^{n/(n-4)}`.
pub fn check_power_lower_bound(states: &[PhaseState], c: &ModelConstants) -> Certificate {
    let n = c.n as f64;
    let coef = ((n - 4.0) / n).sqrt();
    Certificate::from_margins(
        "power_lower_bound",
        states.iter().map(|s| {
            if !(s.v > 0.0) {
                return (s.t, UNDEFINED_MARGIN, 0.0);
            }
            let b = laplacian_bracket(s, c);
            let p = coef * laplacian_power(s.v, c);
            (s.t, -b - p, b.abs().max(p))
        }),
    )
}

/// `-Δu >= √(n(n-4)/(n²-4)) u^{n/(n-4)} + (2/(n-4)) |∇u|²/u`.
pub fn check_gradient_power_lower_bound(states: &[PhaseState], c: &ModelConstants) -> Certificate {
    let n = c.n as f64;
    let coef = (n * (n - 4.0) / (n * n - 4.0)).sqrt();
    Certificate::from_margins(
        "gradient_power_lower_bound",
        states.iter().map(|s| {
            if !(s.v > 0.0) {
                return (s.t, UNDEFINED_MARGIN, 0.0);
            }
            let b = laplacian_bracket(s, c);
            let p = coef * laplacian_power(s.v, c);
            let g = gradient_term(s, c);
            (s.t, -b - p - g, b.abs().max(p).max(g))
        }),
    )
}

/// Scalar curvature of `u^{4/(n-4)} δ` at the point described by `s`:
/// `R_g = (4(n-1)/(n-4)) v^{-n/(n-4)} (-B - (2/(n-4)) (v' - a v)²/v)`.
/// It does not depend on `t`.
pub fn scalar_curvature(s: &PhaseState, c: &ModelConstants) -> Result<f64, CertifyError> {
    if !(s.v > 0.0) {
        return Err(CertifyError::Domain { t: s.t, v: s.v });
    }
    let n = c.n as f64;
    let q = -laplacian_bracket(s, c) - gradient_term(s, c);
    Ok(4.0 * (n - 1.0) / (n - 4.0) * q / laplacian_power(s.v, c))
}

pub fn check_scalar_curvature_positive(states: &[PhaseState], c: &ModelConstants) -> Certificate {
    let n = c.n as f64;
    Certificate::from_margins(
        "scalar_curvature_positive",
        states.iter().map(|s| match scalar_curvature(s, c) {
            Ok(r) => {
                let b = laplacian_bracket(s, c).abs() + gradient_term(s, c);
                (s.t, r, 4.0 * (n - 1.0) / (n - 4.0) * b / laplacian_power(s.v, c))
            }
            Err(_) => (s.t, UNDEFINED_MARGIN, 0.0),
        }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WParams {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
}

impl WParams {
    pub fn new(alpha: f64, beta: f64, epsilon: f64, c: &ModelConstants) -> Result<Self, CertifyError> {
        let limit = c.n as f64 / (c.n - 4) as f64;
        if !(alpha < limit) || !alpha.is_finite() {
            return Err(CertifyError::InvalidParams(format!("alpha = {alpha} must be below n/(n-4) = {limit}")));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() || !beta.is_finite() {
            return Err(CertifyError::InvalidParams(format!("epsilon = {epsilon} must be >= 0, beta finite")));
        }
        Ok(Self { alpha, beta, epsilon })
    }
}

/// `w = Δu + α (u + ε)^{-1} |∇u|² + β u^{n/(n-4)}` at radius `r = e^t`.
pub fn w_function(s: &PhaseState, params: &WParams, c: &ModelConstants) -> Result<f64, CertifyError> {
    let params = WParams::new(params.alpha, params.beta, params.epsilon, c)?;
    if !(s.v > 0.0) {
        return Err(CertifyError::Domain { t: s.t, v: s.v });
    }
    let n = c.n as f64;
    let a = c.half_gap();
    let decay = (-n * s.t / 2.0).exp();
    let u = (-a * s.t).exp() * s.v;
    let g = s.v1 - a * s.v;
    let grad_sq = (-(n - 2.0) * s.t).exp() * g * g;
    Ok(decay * laplacian_bracket(s, c)
        + params.alpha * grad_sq / (u + params.epsilon)
        + params.beta * decay * laplacian_power(s.v, c))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignChanges {
    pub count: usize,
    pub times: Vec<f64>,
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Roots of `g` along the trajectory: strict sign changes between samples
/// (exact zeros are skipped over), each refined by bisection on the dense
/// output.
fn roots<G: Fn(&PhaseState) -> f64>(traj: &Trajectory, g: G) -> Vec<f64> {
    let mut out = Vec::new();
    let mut last: Option<(f64, bool)> = None;
    for s in traj.samples() {
        let val = g(s);
        if val == 0.0 || !val.is_finite() {
            continue;
        }
        let pos = val > 0.0;
        if let Some((t0, p0)) = last {
            if p0 != pos {
                out.push(bisect(|t| g(&traj.state_at(t)), t0, s.t));
            }
        }
        last = Some((s.t, pos));
    }
    out
}

pub fn count_sign_changes(traj: &Trajectory, level: f64) -> SignChanges {
    let times = roots(traj, |s| s.v - level);
    SignChanges { count: times.len(), times }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtremumKind {
    Max,
    Min,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub t: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

pub fn classify_extrema(traj: &Trajectory) -> Vec<Extremum> {
    roots(traj, |s| s.v1)
        .into_iter()
        .map(|t| {
            let s = traj.state_at(t);
            let kind = if s.v2.abs() < DEGENERATE_CURVATURE {
                ExtremumKind::Inconclusive
            } else if s.v2 < 0.0 {
                ExtremumKind::Max
            } else {
                ExtremumKind::Min
            };
            Extremum { t, value: s.v, kind }
        })
        .collect()
}

fn in_period(t: f64, period: f64) -> bool {
    (0.0..period).contains(&t)
}

/// Sign changes of `v - level` within one period `[0, 2T)` of an orbit.
pub fn orbit_sign_changes(orbit: &OrbitSolution, level: f64) -> SignChanges {
    let all = count_sign_changes(&orbit.padded_trajectory(4), level);
    let times: Vec<f64> = all.times.into_iter().filter(|t| in_period(*t, orbit.period())).collect();
    SignChanges { count: times.len(), times }
}

/// Extrema within one period `[0, 2T)` of an orbit.
pub fn orbit_extrema(orbit: &OrbitSolution) -> Vec<Extremum> {
    classify_extrema(&orbit.padded_trajectory(4)).into_iter().filter(|e| in_period(e.t, orbit.period())).collect()
}

/// Maxima above `l` and minima below it; inconclusive extrema are skipped.
pub fn check_extrema_straddle(extrema: &[Extremum], c: &ModelConstants) -> Certificate {
    Certificate::from_margins(
        "extrema_straddle_constant",
        extrema.iter().filter_map(|e| match e.kind {
            ExtremumKind::Max => Some((e.t, e.value - c.l, e.value.abs().max(c.l))),
            ExtremumKind::Min => Some((e.t, c.l - e.value, e.value.abs().max(c.l))),
            ExtremumKind::Inconclusive => None,
        }),
    )
}

/// `max |Ẽ(t) - Ẽ(t_0)|` over the samples.
pub fn energy_drift(traj: &Trajectory) -> f64 {
    let e = traj.energy();
    e.iter().fold(0.0, |m, x| m.max((x - e[0]).abs()))
}

pub fn check_energy_conserved(traj: &Trajectory) -> Certificate {
    let e = traj.energy();
    let allowed = ENERGY_SLACK * e[0].abs().max(1.0);
    let mut cert = Certificate::from_margins(
        "energy_conserved",
        traj.samples().iter().zip(e).map(|(s, x)| (s.t, allowed - (x - e[0]).abs(), allowed)),
    );
    cert.tolerance = 0.0;
    cert.passed = cert.worst_margin >= 0.0;
    cert
}

/// The full suite on a sampled trajectory.
pub fn certify_trajectory(traj: &Trajectory) -> Vec<Certificate> {
    let c = traj.meta.constants;
    let s = traj.samples();
    vec![
        check_laplacian_negative(s, &c),
        check_power_lower_bound(s, &c),
        check_gradient_power_lower_bound(s, &c),
        check_scalar_curvature_positive(s, &c),
        check_extrema_straddle(&classify_extrema(traj), &c),
        check_energy_conserved(traj),
    ]
}

/// The full suite on one period of an orbit.
pub fn certify_orbit(orbit: &OrbitSolution) -> Vec<Certificate> {
    let c = orbit.constants;
    let s = &orbit.grid;
    vec![
        check_laplacian_negative(s, &c),
        check_power_lower_bound(s, &c),
        check_gradient_power_lower_bound(s, &c),
        check_scalar_curvature_positive(s, &c),
        check_extrema_straddle(&orbit_extrema(orbit), &c),
        check_energy_conserved(&orbit.trajectory()),
    ]
}
