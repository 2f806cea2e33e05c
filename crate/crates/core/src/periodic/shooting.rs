//! Symmetric periodic orbits by multiple shooting.
//!
//! An even solution about `t = 0` that is also even about `t = T` is
//! `2T`-periodic. It starts at `(a, 0, b, 0)` and must satisfy
//! `v'(T) = v'''(T) = 0`. The half period is split into `M` segments of
//! length at most [`ShootingOptions::max_segment`]; the interior node
//! states are extra unknowns tied together by continuity residuals.

use nalgebra::{DMatrix, DVector};

use crate::constants::ModelConstants;
use crate::dynamics::{energy, flow_state, PhaseState, State, Tolerances, Trajectory, TrajectoryMeta};
use crate::error::{DynamicsError, PeriodicError};

use super::newton::{damped_newton, inf_norm, NewtonOptions};

/// Newton solutions with peak-to-trough amplitude below this are reported
/// as the constant solution.
pub const TRIVIAL_AMPLITUDE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    pub tol: Tolerances,
    pub newton: NewtonOptions,
    pub max_segment: f64,
    /// Relative forward-difference step for the Jacobian.
    pub fd_step: f64,
    pub grid_size: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances { rtol: 1e-10, atol: 1e-12 },
            newton: NewtonOptions::default(),
            max_segment: 0.75,
            fd_step: 1e-7,
            grid_size: 512,
        }
    }
}

impl ShootingOptions {
    pub fn with_rtol(rtol: f64) -> Result<Self, PeriodicError> {
        Ok(Self { tol: Tolerances::new(rtol, (rtol * 1e-2).min(1e-12))?, ..Self::default() })
    }

    fn validate(&self) -> Result<(), PeriodicError> {
        if self.grid_size < 8 || !self.grid_size.is_multiple_of(2) {
            return Err(PeriodicError::InvalidRequest(format!(
                "grid size {} must be even and at least 8",
                self.grid_size
            )));
        }
        if !(self.max_segment > 0.0) || !(self.fd_step > 0.0) {
            return Err(PeriodicError::InvalidRequest("segment length and FD step must be positive".into()));
        }
        Ok(())
    }
}

/// Starting data for the Newton iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSeed {
    pub a: f64,
    pub b: f64,
    /// Optional approximate profile on `[0, T]` used to seed interior nodes.
    pub profile: Option<Vec<PhaseState>>,
}

impl OrbitSeed {
    /// Seed with interior nodes taken from the cosine profile
    /// `l + (a - l) cos(pi t / T)`.
    pub fn from_endpoints(a: f64, b: f64) -> Self {
        Self { a, b, profile: None }
    }

    pub(crate) fn node_state(&self, t: f64, half_period: f64, c: &ModelConstants) -> State {
        if let Some(profile) = &self.profile {
            return interpolate_profile(profile, t);
        }
        let k = std::f64::consts::PI / half_period;
        let eps = self.a - c.l;
        let (s, co) = (k * t).sin_cos();
        [c.l + eps * co, -eps * k * s, -eps * k * k * co, eps * k * k * k * s]
    }
}

fn interpolate_profile(profile: &[PhaseState], t: f64) -> State {
    let i = profile.partition_point(|s| s.t <= t);
    if i == 0 {
        return profile[0].state();
    }
    if i >= profile.len() {
        return profile[profile.len() - 1].state();
    }
    let (p, q) = (&profile[i - 1], &profile[i]);
    let w = if q.t > p.t { (t - p.t) / (q.t - p.t) } else { 0.0 };
    let (ps, qs) = (p.state(), q.state());
    let mut out = [0.0; 4];
    for j in 0..4 {
        out[j] = ps[j] + w * (qs[j] - ps[j]);
    }
    out
}

/// Final state after integrating `(a, 0, b, 0)` over `[0, T]`.
pub fn shoot(a: f64, b: f64, c: &ModelConstants, half_period: f64, rtol: f64) -> Result<PhaseState, DynamicsError> {
    if !(half_period > 0.0) {
        return Err(DynamicsError::InvalidRequest(format!("half period {half_period} must be positive")));
    }
    let tol = Tolerances::new(rtol, (rtol * 1e-2).min(1e-12))?;
    let y = flow_state([a, 0.0, b, 0.0], 0.0, half_period, tol, c)?;
    Ok(PhaseState::from_state(half_period, y))
}

/// Which scalar is held fixed while the rest are solved for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Pinned {
    /// Unknowns `[a, b, nodes]`.
    HalfPeriod(f64),
    /// Unknowns `[b, T, nodes]`.
    Amplitude(f64),
}

pub(crate) struct MultipleShooting<'a> {
    pub c: &'a ModelConstants,
    pub segments: usize,
    pub pinned: Pinned,
    pub tol: Tolerances,
    pub fd_step: f64,
}

impl MultipleShooting<'_> {
    pub fn dim(&self) -> usize {
        2 + 4 * (self.segments - 1)
    }

    /// `(T, a, b)` encoded in `x`.
    pub fn head(&self, x: &DVector<f64>) -> (f64, f64, f64) {
        match self.pinned {
            Pinned::HalfPeriod(t) => (t, x[0], x[1]),
            Pinned::Amplitude(a) => (x[1], a, x[0]),
        }
    }

    pub fn node(&self, x: &DVector<f64>, k: usize) -> State {
        if k == 0 {
            let (_, a, b) = self.head(x);
            return [a, 0.0, b, 0.0];
        }
        let o = 2 + 4 * (k - 1);
        [x[o], x[o + 1], x[o + 2], x[o + 3]]
    }

    pub fn pack(&self, half_period: f64, nodes: &[State]) -> DVector<f64> {
        let mut x = DVector::zeros(self.dim());
        match self.pinned {
            Pinned::HalfPeriod(_) => {
                x[0] = nodes[0][0];
                x[1] = nodes[0][2];
            }
            Pinned::Amplitude(_) => {
                x[0] = nodes[0][2];
                x[1] = half_period;
            }
        }
        for (k, s) in nodes.iter().enumerate().skip(1) {
            let o = 2 + 4 * (k - 1);
            x.rows_mut(o, 4).copy_from_slice(s);
        }
        x
    }

    fn segment_end(&self, start: &State, k: usize, h: f64) -> Result<State, DynamicsError> {
        flow_state(*start, k as f64 * h, h, self.tol, self.c)
    }

    fn write_rows(&self, r: &mut DVector<f64>, k: usize, end: &State, x: &DVector<f64>) {
        if k + 1 < self.segments {
            let next = self.node(x, k + 1);
            for j in 0..4 {
                r[4 * k + j] = end[j] - next[j];
            }
        } else {
            r[4 * k] = end[1];
            r[4 * k + 1] = end[3];
        }
    }

    pub fn residual(&self, x: &DVector<f64>) -> Result<DVector<f64>, DynamicsError> {
        let (t, _, _) = self.head(x);
        if !(t > 0.0) {
            return Err(DynamicsError::InvalidRequest("non-positive half period".into()));
        }
        let h = t / self.segments as f64;
        let mut r = DVector::zeros(self.dim());
        for k in 0..self.segments {
            let end = self.segment_end(&self.node(x, k), k, h)?;
            self.write_rows(&mut r, k, &end, x);
        }
        Ok(r)
    }

    /// Forward-difference Jacobian exploiting the block structure: a node
    /// unknown only moves its own segment and the previous continuity row.
    pub fn jacobian(&self, x: &DVector<f64>, r0: &DVector<f64>) -> Result<DMatrix<f64>, DynamicsError> {
        let n = self.dim();
        let (t, _, _) = self.head(x);
        let h = t / self.segments as f64;
        let mut jac = DMatrix::zeros(n, n);
        let delta = |v: f64| self.fd_step * v.abs().max(1.0);

        // head columns
        for col in 0..2 {
            let d = delta(x[col]);
            let mut xp = x.clone();
            xp[col] += d;
            let rp = match (self.pinned, col) {
                (Pinned::Amplitude(_), 1) => self.residual(&xp)?,
                _ => {
                    let mut rp = r0.clone();
                    let end = self.segment_end(&self.node(&xp, 0), 0, h)?;
                    self.write_rows(&mut rp, 0, &end, &xp);
                    rp
                }
            };
            jac.set_column(col, &((rp - r0) / d));
        }
        // node columns
        for k in 1..self.segments {
            let start = self.node(x, k);
            let base = self.segment_end(&start, k, h)?;
            for j in 0..4 {
                let col = 2 + 4 * (k - 1) + j;
                let d = delta(start[j]);
                let mut sp = start;
                sp[j] += d;
                let end = self.segment_end(&sp, k, h)?;
                let rows = if k + 1 < self.segments { 4 } else { 2 };
                for i in 0..rows {
                    let (ep, e0) =
                        if k + 1 < self.segments { (end[i], base[i]) } else { (end[2 * i + 1], base[2 * i + 1]) };
                    jac[(4 * k + i, col)] = (ep - e0) / d;
                }
                // continuity row of the previous segment
                jac[(4 * (k - 1) + j, col)] = -1.0;
            }
        }
        Ok(jac)
    }
}

/// Residual tolerance in units of `max(1, l)`; orbit values scale with `l`.
fn scaled_newton(c: &ModelConstants, opts: &ShootingOptions) -> NewtonOptions {
    NewtonOptions { residual_tol: opts.newton.residual_tol * c.l.max(1.0), ..opts.newton }
}

/// Number of segments for a half period `T`.
pub(crate) fn segment_count(half_period: f64, max_segment: f64) -> usize {
    ((half_period / max_segment).ceil() as usize).max(1)
}

/// A converged symmetric periodic orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSolution {
    pub constants: ModelConstants,
    /// Half period `T`; the full period is `2T`.
    pub half_period: f64,
    pub a: f64,
    pub b: f64,
    /// Uniform samples on `[0, 2T)`.
    pub grid: Vec<PhaseState>,
    pub residual: f64,
    /// Largest mismatch when the full period is re-integrated segment by
    /// segment from the node states, including the wrap back to `t = 0`.
    pub closure_gap: f64,
    pub amplitude: f64,
    pub energy_level: f64,
    pub iterations: usize,
    /// Multiple-shooting node states on `[0, T)`.
    pub nodes: Vec<State>,
}

impl OrbitSolution {
    pub fn period(&self) -> f64 {
        2.0 * self.half_period
    }

    /// The first half `[0, T]` of the grid, as seed profile for a nearby
    /// half period `target` (time and derivatives rescaled).
    pub fn rescaled_profile(&self, target: f64) -> Vec<PhaseState> {
        let sigma = self.half_period / target;
        let half = self.grid.len() / 2;
        self.grid[..=half.min(self.grid.len() - 1)]
            .iter()
            .map(|s| PhaseState::new(s.t / sigma, s.v, s.v1 * sigma, s.v2 * sigma * sigma, s.v3 * sigma.powi(3)))
            .collect()
    }

    pub fn rescaled_seed(&self, target: f64) -> OrbitSeed {
        let sigma = self.half_period / target;
        OrbitSeed { a: self.a, b: self.b * sigma * sigma, profile: Some(self.rescaled_profile(target)) }
    }

    /// One full period `[0, 2T]` as a trajectory (the last sample repeats
    /// the first, shifted by `2T`).
    pub fn trajectory(&self) -> Trajectory {
        self.padded_trajectory(0)
    }

    /// The periodic extension over `[-pad dt, 2T + pad dt]`, `dt` the grid
    /// spacing, so that events at `t = 0` are interior.
    pub fn padded_trajectory(&self, pad: usize) -> Trajectory {
        let n = self.grid.len();
        let period = self.period();
        let pad = pad.min(n - 1);
        let mut samples = Vec::with_capacity(n + 2 * pad + 1);
        for s in &self.grid[n - pad..] {
            samples.push(PhaseState { t: s.t - period, ..*s });
        }
        samples.extend_from_slice(&self.grid);
        for s in &self.grid[..=pad] {
            samples.push(PhaseState { t: s.t + period, ..*s });
        }
        let meta =
            TrajectoryMeta { constants: self.constants, tolerances: Tolerances::default(), accepted: 0, rejected: 0 };
        Trajectory::from_samples(samples, meta).expect("grid times increase")
    }

    /// Min and max of `v` over the grid.
    pub fn range(&self) -> (f64, f64) {
        self.grid.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.v), hi.max(s.v)))
    }
}

fn reflect(y: &State) -> State {
    [y[0], -y[1], y[2], -y[3]]
}

pub(crate) fn assemble(
    ms: &MultipleShooting<'_>,
    x: &DVector<f64>,
    residual: f64,
    iterations: usize,
    grid_size: usize,
) -> Result<OrbitSolution, PeriodicError> {
    let c = ms.c;
    let (t_half, a, b) = ms.head(x);
    let m = ms.segments;
    let h = t_half / m as f64;
    let nodes: Vec<State> = (0..m).map(|k| ms.node(x, k)).collect();

    // first half of the grid, integrating inside each segment from its node
    let half = grid_size / 2;
    let dt = 2.0 * t_half / grid_size as f64;
    let mut first = Vec::with_capacity(half + 1);
    for i in 0..=half {
        let t = i as f64 * dt;
        let k = ((t / h).floor() as usize).min(m - 1);
        let local = t - k as f64 * h;
        let y = if local == 0.0 { nodes[k] } else { flow_state(nodes[k], k as f64 * h, local, ms.tol, c)? };
        first.push(PhaseState::from_state(t, y));
    }
    let mut grid = first[..half].to_vec();
    for i in half..grid_size {
        let t = i as f64 * dt;
        let mirror = &first[grid_size - i];
        let y = reflect(&mirror.state());
        grid.push(PhaseState::from_state(t, y));
    }

    let (lo, hi) = grid.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.v), hi.max(s.v)));
    let amplitude = hi - lo;
    if amplitude < TRIVIAL_AMPLITUDE {
        return Err(PeriodicError::TrivialRoot { amplitude });
    }
    if lo <= 0.0 {
        return Err(PeriodicError::NotPositive { min_v: lo });
    }

    // full-period node chain: s_0..s_{M-1}, then the reflected chain back
    let end_of_half = flow_state(nodes[m - 1], (m - 1) as f64 * h, h, ms.tol, c)?;
    let mut chain = nodes.clone();
    chain.push(reflect(&end_of_half));
    for k in (1..m).rev() {
        chain.push(reflect(&nodes[k]));
    }
    let mut closure_gap: f64 = 0.0;
    for j in 0..chain.len() {
        let next = if j + 1 < chain.len() { chain[j + 1] } else { chain[0] };
        let end = flow_state(chain[j], j as f64 * h, h, ms.tol, c)?;
        for i in 0..4 {
            closure_gap = closure_gap.max((end[i] - next[i]).abs());
        }
    }

    let energy_level = energy(&PhaseState::new(0.0, a, 0.0, b, 0.0), c)?;
    Ok(OrbitSolution {
        constants: *c,
        half_period: t_half,
        a,
        b,
        grid,
        residual,
        closure_gap,
        amplitude,
        energy_level,
        iterations,
        nodes,
    })
}

/// Solves for a symmetric `2T`-periodic orbit starting from `seed`.
///
/// When Newton falls onto the constant solution from a nonconstant seed,
/// the seed amplitude is pinned instead, the half period solved for, and
/// the resulting orbit continued in `T` back to `half_period`.
pub fn solve_symmetric_orbit(
    c: &ModelConstants,
    half_period: f64,
    seed: &OrbitSeed,
    opts: &ShootingOptions,
) -> Result<OrbitSolution, PeriodicError> {
    match newton_orbit(c, half_period, seed, opts) {
        Err(e @ PeriodicError::TrivialRoot { .. }) if (seed.a - c.l).abs() > TRIVIAL_AMPLITUDE => {
            super::continuation::from_pinned_amplitude(c, half_period, seed, opts).map_err(|_| e)
        }
        other => other,
    }
}

/// Damped Newton on `[a, b, nodes]` with `T` fixed.
pub(crate) fn newton_orbit(
    c: &ModelConstants,
    half_period: f64,
    seed: &OrbitSeed,
    opts: &ShootingOptions,
) -> Result<OrbitSolution, PeriodicError> {
    opts.validate()?;
    if !(half_period > 0.0) || !half_period.is_finite() {
        return Err(PeriodicError::InvalidRequest(format!("half period {half_period} must be positive")));
    }
    if !(seed.a > 0.0) || !seed.a.is_finite() || !seed.b.is_finite() {
        return Err(PeriodicError::InvalidRequest(format!("seed ({}, {}) is not admissible", seed.a, seed.b)));
    }
    let m = segment_count(half_period, opts.max_segment);
    let ms = MultipleShooting {
        c,
        segments: m,
        pinned: Pinned::HalfPeriod(half_period),
        tol: opts.tol,
        fd_step: opts.fd_step,
    };
    let h = half_period / m as f64;
    let mut nodes = vec![[seed.a, 0.0, seed.b, 0.0]];
    for k in 1..m {
        nodes.push(seed.node_state(k as f64 * h, half_period, c));
    }
    let x0 = ms.pack(half_period, &nodes);
    let out = damped_newton(x0, |x| ms.residual(x), |x, r| ms.jacobian(x, r), &scaled_newton(c, opts))?;
    assemble(&ms, &out.x, out.residual, out.iterations, opts.grid_size)
}

/// Solves with the amplitude `a` pinned and the half period free. Used to
/// walk away from the constant solution along the center branch.
pub(crate) fn solve_with_pinned_amplitude(
    c: &ModelConstants,
    a: f64,
    guess_half_period: f64,
    guess_nodes: &[State],
    segments: usize,
    opts: &ShootingOptions,
) -> Result<(f64, Vec<State>, f64), PeriodicError> {
    let ms = MultipleShooting { c, segments, pinned: Pinned::Amplitude(a), tol: opts.tol, fd_step: opts.fd_step };
    let x0 = ms.pack(guess_half_period, guess_nodes);
    let out = damped_newton(x0, |x| ms.residual(x), |x, r| ms.jacobian(x, r), &scaled_newton(c, opts))?;
    let (t, _, _) = ms.head(&out.x);
    let nodes = (0..segments).map(|k| ms.node(&out.x, k)).collect();
    Ok((t, nodes, inf_norm(&ms.residual(&out.x)?)))
}

/// Converts a pinned-amplitude solution into a full [`OrbitSolution`].
pub(crate) fn finish_pinned(
    c: &ModelConstants,
    half_period: f64,
    nodes: &[State],
    opts: &ShootingOptions,
) -> Result<OrbitSolution, PeriodicError> {
    let ms = MultipleShooting {
        c,
        segments: nodes.len(),
        pinned: Pinned::HalfPeriod(half_period),
        tol: opts.tol,
        fd_step: opts.fd_step,
    };
    let x = ms.pack(half_period, nodes);
    let r = inf_norm(&ms.residual(&x)?);
    assemble(&ms, &x, r, 0, opts.grid_size)
}
