//! Dimension-dependent constants of the radial critical biharmonic problem.
//!
//! After the substitution `v(t) = r^((n-4)/2) u(r)`, `t = ln r`, positive radial
//! solutions of `Δ²u = u^((n+4)/(n-4))` become solutions of the autonomous ODE
//!
//! ```text
//! v'''' + K2 v'' + K0 v = v^p,    p = (n+4)/(n-4)
//! ```
//!
//! Everything in this module is a closed form in `n`. Integer and rational
//! pieces are formed exactly in `u64`/`i64` and converted to `f64` once.

use crate::error::ConstantsError;
use crate::PhaseState;

/// Largest dimension accepted by [`ModelConstants::new`]. Keeps every exact
/// integer intermediate (at most `n^4`) well inside the `f64` mantissa.
pub const MAX_DIMENSION: u32 = 4096;

/// Closed-form constants for a fixed dimension `n >= 5`.
///
/// Immutable after construction; `Copy` so it can be handed to worker threads
/// freely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConstants {
    pub n: u32,
    /// Critical exponent `(n+4)/(n-4)`.
    pub p: f64,
    pub k2: f64,
    pub k0: f64,
    /// Constant (singular) solution `K0^((n-4)/8)`.
    pub l: f64,
    /// Upper level of the admissible band, the positive zero of `F`.
    pub big_l: f64,
    /// Bubble amplitude `[n(n-4)(n-2)(n+2)]^((n-4)/8)`.
    pub cn: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// `G(l) = -(2/n) K0^(n/4)`, the energy of the constant solution.
    pub gl: f64,
}

/// `x^(num/den)` as `exp((num/den) ln x)`, with exact fast paths for the
/// exponents `1/2` and `1`.
pub(crate) fn ratio_pow(x: f64, num: u64, den: u64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if 2 * num == den {
        return x.sqrt();
    }
    if num == den {
        return x;
    }
    ((num as f64 / den as f64) * x.ln()).exp()
}

impl ModelConstants {
    pub fn new(n: u32) -> Result<Self, ConstantsError> {
        if n < 5 {
            return Err(ConstantsError::DimensionTooSmall(n));
        }
        if n > MAX_DIMENSION {
            return Err(ConstantsError::DimensionTooLarge(n));
        }
        let m = n as u64;
        let nm4 = m - 4;

        // exact integer numerators
        let k2_num = (m * m - 4 * m + 8) as i64; // K2 = -k2_num / 2
        let k0_num = m * m * nm4 * nm4; // K0 = k0_num / 16
        let c2_num = m * m * nm4; // C2 = 2 K0 / (n-4) = n^2 (n-4) / 8
        let band_num = m * m * m * nm4; // (n/(n-4)) K0 = n^3 (n-4) / 16
        let bubble_base = m * nm4 * (m - 2) * (m + 2);

        let k0 = k0_num as f64 / 16.0;
        let l = ratio_pow(k0, nm4, 8);
        let big_l = ratio_pow(band_num as f64 / 16.0, nm4, 8);
        let cn = ratio_pow(bubble_base as f64, nm4, 8);
        let gl = -(2.0 / n as f64) * ratio_pow(k0, m, 4);

        Ok(Self {
            n,
            p: (m + 4) as f64 / nm4 as f64,
            k2: -(k2_num as f64) / 2.0,
            k0,
            l,
            big_l,
            cn,
            c2: c2_num as f64 / 8.0,
            c3: (m * m) as f64 / 4.0,
            c4: -(nm4 as f64) / 2.0,
            gl,
        })
    }

    /// `(n-4)/2`, the weight relating `v` to `u` and the shift in the
    /// first-order coordinates.
    pub fn half_gap(&self) -> f64 {
        (self.n - 4) as f64 / 2.0
    }

    /// Exponent of the potential term, `2n/(n-4)`.
    pub fn potential_exponent(&self) -> f64 {
        (2 * self.n) as f64 / (self.n - 4) as f64
    }

    /// `v^p`. Integer exponents go through `powi` and are defined for
    /// negative `v`; fractional ones return `None` there.
    pub fn nonlinearity(&self, v: f64) -> Option<f64> {
        if (8 % (self.n - 4)) == 0 {
            let p = (self.n + 4) / (self.n - 4);
            Some(v.powi(p as i32))
        } else if v >= 0.0 {
            Some(v.powf(self.p))
        } else {
            None
        }
    }

    /// `G(s) = -(K0/2) s^2 + ((n-4)/(2n)) s^(2n/(n-4))`.
    pub fn potential_g(&self, s: f64) -> f64 {
        let nm4 = (self.n - 4) as f64;
        -0.5 * self.k0 * s * s + nm4 / (2.0 * self.n as f64) * s.abs().powf(self.potential_exponent())
    }

    /// `F = -G`; positive on `(0, L)`, zero at both ends.
    pub fn potential_f(&self, s: f64) -> f64 {
        -self.potential_g(s)
    }

    /// `F'(s) = K0 s - s^p`.
    /// `v^p − K0·v`, returned as exactly zero at the equilibria `0` and `l`.
    pub fn source(&self, v: f64) -> Option<f64> {
        if v == self.l {
            return Some(0.0);
        }
        Some(self.nonlinearity(v)? - self.k0 * v)
    }

    pub fn potential_f_prime(&self, s: f64) -> f64 {
        self.k0 * s - s.abs().powf(self.p)
    }

    /// The constant solution `l`.
    pub fn singular_v(&self) -> f64 {
        self.l
    }

    /// Emden-Fowler profile of the regular bubble, `c_n (2 cosh t)^(-(n-4)/2)`.
    pub fn bubble_v(&self, t: f64) -> f64 {
        // ln(2 cosh t) = |t| + ln(1 + e^{-2|t|}) stays finite for large |t|
        let at = t.abs();
        let log_2cosh = at + (-2.0 * at).exp().ln_1p();
        self.cn * (-self.half_gap() * log_2cosh).exp()
    }

    /// Bubble value and its first four derivatives at `t`.
    ///
    /// Every derivative has the form `P_k(tanh t) v(t)` with
    /// `P_{k+1}(s) = (1 - s^2) P_k'(s) - a s P_k(s)`, `a = (n-4)/2`.
    pub fn bubble_jet(&self, t: f64) -> [f64; 5] {
        let a = self.half_gap();
        let s = t.tanh();
        let v = self.bubble_v(t);
        let mut poly = vec![1.0_f64];
        let mut out = [0.0; 5];
        out[0] = v;
        for slot in out.iter_mut().skip(1) {
            poly = next_bubble_poly(&poly, a);
            *slot = eval_poly(&poly, s) * v;
        }
        out
    }

    /// Bubble phase state `(v, v', v'', v''')` at `t`.
    pub fn bubble_state(&self, t: f64) -> PhaseState {
        let j = self.bubble_jet(t);
        PhaseState::new(t, j[0], j[1], j[2], j[3])
    }
}

fn next_bubble_poly(poly: &[f64], a: f64) -> Vec<f64> {
    // (1 - s^2) P'(s) - a s P(s)
    let mut out = vec![0.0; poly.len() + 1];
    for (k, &c) in poly.iter().enumerate().skip(1) {
        let d = c * k as f64;
        out[k - 1] += d;
        out[k + 1] -= d;
    }
    for (k, &c) in poly.iter().enumerate() {
        out[k + 1] -= a * c;
    }
    out
}

fn eval_poly(poly: &[f64], s: f64) -> f64 {
    poly.iter().rev().fold(0.0, |acc, &c| acc * s + c)
}

/// Coefficient of the radial singular solution `K1^(1/(p-1)) |x|^(-4/(p-1))`
/// of `Δ²u = u^p` for a general exponent `p > 1`.
pub fn compute_k1(n: u32, p: f64) -> Result<f64, ConstantsError> {
    if !(p > 1.0) {
        return Err(ConstantsError::ExponentNotAboveOne(p));
    }
    let n = n as f64;
    let q = p - 1.0;
    let bracket =
        (n - 2.0) * (n - 4.0) * q.powi(3) + 2.0 * (n * n - 10.0 * n + 20.0) * q * q - 16.0 * (n - 4.0) * q + 32.0;
    Ok(8.0 * bracket / q.powi(4))
}
