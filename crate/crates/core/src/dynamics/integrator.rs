//! Dormand-Prince 5(4) with a PI step-size controller.

use crate::error::DynamicsError;

pub type State = [f64; 4];

/// Autonomous right-hand side `y' = f(y)` with an optional admissibility
/// check run on every accepted state.
pub trait VectorField {
    fn eval(&self, y: &State) -> Result<State, DynamicsError>;

    fn check(&self, _t: f64, _y: &State) -> Result<(), DynamicsError> {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Result<Self, DynamicsError> {
        if !(rtol > 0.0) || !(atol > 0.0) {
            return Err(DynamicsError::InvalidRequest(format!(
                "tolerances must be positive (rtol={rtol}, atol={atol})"
            )));
        }
        Ok(Self { rtol, atol })
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

pub const MIN_STEP: f64 = 1e-14;
const MAX_STEPS: usize = 2_000_000;

// Dormand-Prince tableau
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// error coefficients: 5th-order minus embedded 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (w, k) in terms {
            acc += w * k[i];
        }
        *o += h * acc;
    }
    out
}

/// Adaptive integrator. Calls `on_step(t, y)` after every accepted step,
/// including the final one landing exactly on `t_end`.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub tol: Tolerances,
}

impl Dopri5 {
    pub fn new(tol: Tolerances) -> Self {
        Self { tol }
    }

    fn error_norm(&self, y: &State, y_new: &State, err: &State) -> f64 {
        let mut acc = 0.0;
        for i in 0..4 {
            let sc = self.tol.atol + self.tol.rtol * y[i].abs().max(y_new[i].abs());
            let r = err[i] / sc;
            acc += r * r;
        }
        (acc / 4.0).sqrt()
    }

    fn initial_step<F: VectorField>(&self, f: &F, y0: &State, f0: &State, span: f64) -> Result<f64, DynamicsError> {
        let sc: Vec<f64> = y0.iter().map(|y| self.tol.atol + self.tol.rtol * y.abs()).collect();
        let d0 = (y0.iter().zip(&sc).map(|(y, s)| (y / s).powi(2)).sum::<f64>() / 4.0).sqrt();
        let d1 = (f0.iter().zip(&sc).map(|(y, s)| (y / s).powi(2)).sum::<f64>() / 4.0).sqrt();
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(span.abs());
        let y1 = axpy(y0, h0, &[(1.0, f0)]);
        let f1 = match f.eval(&y1) {
            Ok(v) => v,
            Err(_) => return Ok(h0 * 1e-3),
        };
        let d2 = (f1.iter().zip(f0).zip(&sc).map(|((a, b), s)| ((a - b) / s).powi(2)).sum::<f64>() / 4.0).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        Ok((100.0 * h0).min(h1).min(span.abs()))
    }

    /// Integrates from `(t0, y0)` to `t_end` (either direction).
    pub fn solve<F, S>(
        &self,
        f: &F,
        t0: f64,
        y0: State,
        t_end: f64,
        mut on_step: S,
    ) -> Result<(State, StepStats), DynamicsError>
    where
        F: VectorField,
        S: FnMut(f64, &State),
    {
        let span = t_end - t0;
        if !span.is_finite() {
            return Err(DynamicsError::InvalidRequest("non-finite time span".into()));
        }
        let mut stats = StepStats::default();
        if span == 0.0 {
            return Ok((y0, stats));
        }
        let dir = span.signum();
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f.eval(&y)?;
        stats.evaluations += 1;
        let mut h = self.initial_step(f, &y, &k1, span)?;
        stats.evaluations += 1;

        const BETA: f64 = 0.04;
        const EXPO1: f64 = 0.2 - BETA * 0.75;
        const SAFE: f64 = 0.9;
        let mut fac_old: f64 = 1e-4;
        let mut last_rejected = false;

        loop {
            if stats.accepted + stats.rejected > MAX_STEPS {
                return Err(DynamicsError::StepUnderflow { t, h });
            }
            let remaining = (t_end - t) * dir;
            let mut last = false;
            if h >= remaining {
                h = remaining;
                last = true;
            }
            if h < MIN_STEP && !last {
                return Err(DynamicsError::StepUnderflow { t, h });
            }
            let hs = h * dir;

            let stage = (|| -> Result<(State, State, State), DynamicsError> {
                let k2 = f.eval(&axpy(&y, hs, &[(A21, &k1)]))?;
                let k3 = f.eval(&axpy(&y, hs, &[(A31, &k1), (A32, &k2)]))?;
                let k4 = f.eval(&axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
                let k5 = f.eval(&axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
                let k6 = f.eval(&axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
                let y_new = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
                let k7 = f.eval(&y_new)?;
                let mut err = [0.0; 4];
                for i in 0..4 {
                    err[i] = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                }
                Ok((y_new, k7, err))
            })();
            stats.evaluations += 6;

            let (y_new, k7, err) = match stage {
                Ok(v) => v,
                Err(DynamicsError::Domain { v, .. }) => {
                    // a stage stepped outside v >= 0; retry with a smaller step
                    stats.rejected += 1;
                    h *= 0.25;
                    last_rejected = true;
                    if h < MIN_STEP {
                        return Err(DynamicsError::Domain { t, v });
                    }
                    continue;
                }
                Err(e) => return Err(e),
            };

            let en = self.error_norm(&y, &y_new, &err);
            if !en.is_finite() {
                stats.rejected += 1;
                h *= 0.2;
                last_rejected = true;
                continue;
            }
            let fac11 = en.powf(EXPO1);
            let mut fac = fac11 / fac_old.powf(BETA);
            fac = (fac / SAFE).clamp(0.1, 5.0);
            let h_new = h / fac;

            if en <= 1.0 {
                fac_old = en.max(1e-4);
                stats.accepted += 1;
                t = if last { t_end } else { t + hs };
                y = y_new;
                k1 = k7;
                f.check(t, &y)?;
                on_step(t, &y);
                if last {
                    return Ok((y, stats));
                }
                h = if last_rejected { h_new.min(h) } else { h_new };
                last_rejected = false;
            } else {
                stats.rejected += 1;
                h /= (fac11 / SAFE).min(5.0);
                last_rejected = true;
            }
        }
    }
}
