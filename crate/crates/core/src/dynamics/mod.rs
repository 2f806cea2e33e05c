//! The fourth-order ODE, its first-order coordinates, the conserved energy
//! and adaptive integration.
//!
//! The primary state is `(v, v', v'', v''')`. The shifted coordinates
//! `w` (where `w2 = 0` exactly when `u'(r) = 0`) are provided as a verified
//! change of variables together with their own vector field.

pub mod integrator;

use serde::{Deserialize, Serialize};

pub use integrator::{Dopri5, State, StepStats, Tolerances, VectorField};

use crate::constants::ModelConstants;
use crate::error::DynamicsError;

/// `v` and its first three derivatives at log-radius `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub t: f64,
    pub v: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

impl PhaseState {
    pub const fn new(t: f64, v: f64, v1: f64, v2: f64, v3: f64) -> Self {
        Self { t, v, v1, v2, v3 }
    }

    pub fn from_state(t: f64, y: State) -> Self {
        Self::new(t, y[0], y[1], y[2], y[3])
    }

    pub fn state(&self) -> State {
        [self.v, self.v1, self.v2, self.v3]
    }

    /// Image under the time reversal `t -> -t`, which maps solutions to
    /// solutions.
    pub fn reversed(&self) -> Self {
        Self::new(-self.t, self.v, -self.v1, self.v2, -self.v3)
    }

    /// Same state reflected about `center`: `t -> 2 center - t`.
    pub fn reflected_about(&self, center: f64) -> Self {
        Self::new(2.0 * center - self.t, self.v, -self.v1, self.v2, -self.v3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WCoordinates {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
}

impl WCoordinates {
    pub fn as_array(&self) -> State {
        [self.w1, self.w2, self.w3, self.w4]
    }

    pub fn from_array(w: State) -> Self {
        Self { w1: w[0], w2: w[1], w3: w[2], w4: w[3] }
    }
}

/// `(v', v'', v''', v'''')` with `v'''' = v^p - K2 v'' - K0 v`.
pub fn rhs(s: &PhaseState, c: &ModelConstants) -> Result<State, DynamicsError> {
    rhs_state(s.t, &s.state(), c)
}

fn rhs_state(t: f64, y: &State, c: &ModelConstants) -> Result<State, DynamicsError> {
    let f = c.source(y[0]).ok_or(DynamicsError::Domain { t, v: y[0] })?;
    Ok([y[1], y[2], y[3], f - c.k2 * y[2]])
}

/// Fourth derivative implied by the ODE.
pub fn fourth_derivative(s: &PhaseState, c: &ModelConstants) -> Result<f64, DynamicsError> {
    Ok(rhs(s, c)?[3])
}

pub fn to_w(s: &PhaseState, c: &ModelConstants) -> WCoordinates {
    let a = c.half_gap();
    WCoordinates { w1: s.v, w2: s.v1 - a * s.v, w3: s.v2 - a * s.v1, w4: s.v3 - a * s.v2 }
}

pub fn from_w(t: f64, w: &WCoordinates, c: &ModelConstants) -> PhaseState {
    let a = c.half_gap();
    let v = w.w1;
    let v1 = w.w2 + a * v;
    let v2 = w.w3 + a * v1;
    let v3 = w.w4 + a * v2;
    PhaseState::new(t, v, v1, v2, v3)
}

/// Vector field of the first-order system in `w` coordinates.
pub fn w_rhs(w: &WCoordinates, c: &ModelConstants) -> Result<State, DynamicsError> {
    let a = c.half_gap();
    let p = c.nonlinearity(w.w1).ok_or(DynamicsError::Domain { t: f64::NAN, v: w.w1 })?;
    Ok([a * w.w1 + w.w2, w.w3, w.w4, c.c2 * w.w2 + c.c3 * w.w3 + c.c4 * w.w4 + p])
}

/// Conserved energy
/// `½v''² − (K2/2)v'² − (K0/2)v² + ((n−4)/(2n)) v^(2n/(n−4)) − v'v'''`.
pub fn energy(s: &PhaseState, c: &ModelConstants) -> Result<f64, DynamicsError> {
    if s.v < 0.0 {
        return Err(DynamicsError::Domain { t: s.t, v: s.v });
    }
    Ok(energy_unchecked(&s.state(), c))
}

fn energy_unchecked(y: &State, c: &ModelConstants) -> f64 {
    0.5 * y[2] * y[2] - 0.5 * c.k2 * y[1] * y[1] + c.potential_g(y[0]) - y[1] * y[3]
}

/// The ODE as a [`VectorField`] with the blow-up guard
/// `0 <= v <= 10 L e^{|t|}`.
#[derive(Debug, Clone, Copy)]
pub struct RadialFlow<'a> {
    pub c: &'a ModelConstants,
    pub guarded: bool,
}

impl<'a> RadialFlow<'a> {
    pub fn new(c: &'a ModelConstants) -> Self {
        Self { c, guarded: true }
    }
}

impl VectorField for RadialFlow<'_> {
    fn eval(&self, y: &State) -> Result<State, DynamicsError> {
        rhs_state(f64::NAN, y, self.c)
    }

    fn check(&self, t: f64, y: &State) -> Result<(), DynamicsError> {
        if !self.guarded {
            return Ok(());
        }
        if y[0] < 0.0 {
            return Err(DynamicsError::Domain { t, v: y[0] });
        }
        let bound = 10.0 * self.c.big_l * t.abs().exp();
        if !(y[0].abs() <= bound) || y.iter().any(|x| !x.is_finite()) {
            return Err(DynamicsError::BlowUp { t, v: y[0] });
        }
        Ok(())
    }
}

/// The first-order system in `w` coordinates.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedFlow<'a> {
    pub c: &'a ModelConstants,
}

impl VectorField for ShiftedFlow<'_> {
    fn eval(&self, y: &State) -> Result<State, DynamicsError> {
        w_rhs(&WCoordinates::from_array(*y), self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryMeta {
    pub constants: ModelConstants,
    pub tolerances: Tolerances,
    pub accepted: usize,
    pub rejected: usize,
}

/// Samples at accepted steps with energy per sample and cubic Hermite dense
/// output between them.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<PhaseState>,
    energy: Vec<f64>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    /// Builds a trajectory from samples ordered by strictly increasing `t`.
    pub fn from_samples(samples: Vec<PhaseState>, meta: TrajectoryMeta) -> Result<Self, DynamicsError> {
        if samples.is_empty() {
            return Err(DynamicsError::InvalidRequest("empty trajectory".into()));
        }
        if samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(DynamicsError::InvalidRequest("sample times must strictly increase".into()));
        }
        let c = meta.constants;
        let energy = samples.iter().map(|s| energy_unchecked(&s.state(), &c)).collect();
        Ok(Self { samples, energy, meta })
    }

    pub fn samples(&self) -> &[PhaseState] {
        &self.samples
    }

    pub fn energy(&self) -> &[f64] {
        &self.energy
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn t_end(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    /// Dense output at `t` (clamped to the sampled range).
    pub fn state_at(&self, t: f64) -> PhaseState {
        let s = &self.samples;
        if t <= s[0].t {
            return s[0];
        }
        if t >= s[s.len() - 1].t {
            return s[s.len() - 1];
        }
        let i = s.partition_point(|x| x.t <= t) - 1;
        hermite_state(&s[i], &s[i + 1], t, &self.meta.constants)
    }
}

/// Cubic Hermite interpolation of every component, using the next component
/// (and the ODE for `v'''`) as the derivative.
pub(crate) fn hermite_state(a: &PhaseState, b: &PhaseState, t: f64, c: &ModelConstants) -> PhaseState {
    let h = b.t - a.t;
    let x = (t - a.t) / h;
    let h00 = (1.0 + 2.0 * x) * (1.0 - x) * (1.0 - x);
    let h10 = x * (1.0 - x) * (1.0 - x);
    let h01 = x * x * (3.0 - 2.0 * x);
    let h11 = x * x * (x - 1.0);
    let da = rhs_state(a.t, &a.state(), c).unwrap_or([a.v1, a.v2, a.v3, 0.0]);
    let db = rhs_state(b.t, &b.state(), c).unwrap_or([b.v1, b.v2, b.v3, 0.0]);
    let ya = a.state();
    let yb = b.state();
    let mut y = [0.0; 4];
    for i in 0..4 {
        y[i] = h00 * ya[i] + h10 * h * da[i] + h01 * yb[i] + h11 * h * db[i];
    }
    PhaseState::from_state(t, y)
}

/// Integrates from `start` to `t_end`, recording every accepted step.
pub fn integrate(
    start: PhaseState,
    t_end: f64,
    rtol: f64,
    atol: f64,
    c: &ModelConstants,
) -> Result<Trajectory, DynamicsError> {
    let tol = Tolerances::new(rtol, atol)?;
    if !(t_end != start.t) || !t_end.is_finite() {
        return Err(DynamicsError::InvalidRequest(format!(
            "t_end = {t_end} must differ from the start time {}",
            start.t
        )));
    }
    let flow = RadialFlow::new(c);
    flow.check(start.t, &start.state())?;
    let mut samples = vec![start];
    let (_, stats) = Dopri5::new(tol).solve(&flow, start.t, start.state(), t_end, |t, y| {
        samples.push(PhaseState::from_state(t, *y));
    })?;
    if t_end < start.t {
        samples.reverse();
    }
    let meta = TrajectoryMeta { constants: *c, tolerances: tol, accepted: stats.accepted, rejected: stats.rejected };
    Trajectory::from_samples(samples, meta)
}

/// End state after flowing `y0` for time `dt` (no sample storage).
pub fn flow_state(y0: State, t0: f64, dt: f64, tol: Tolerances, c: &ModelConstants) -> Result<State, DynamicsError> {
    let flow = RadialFlow::new(c);
    Ok(Dopri5::new(tol).solve(&flow, t0, y0, t0 + dt, |_, _| {})?.0)
}
