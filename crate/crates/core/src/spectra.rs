//! Linearizations of the first-order system at its two stationary points.
//!
//! Both characteristic polynomials are biquadratic, `x^4 + K2 x^2 + c0`, so
//! every eigenvalue is a closed-form radical; no general eigensolver is used.

use nalgebra::{Complex, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::constants::ModelConstants;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Equilibrium {
    /// The trivial state `w = 0`.
    O,
    /// The constant solution `v = l`.
    P,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    pub point: Equilibrium,
    pub matrix: Matrix4<f64>,
    pub eigenvalues: [Complex<f64>; 4],
    /// Coefficients of the characteristic quartic, highest degree first.
    pub char_poly_coeffs: [f64; 5],
}

impl Linearization {
    /// Eigenvector of the companion-like matrix for eigenvalue `lambda`:
    /// `x = (1, lambda - a, lambda (lambda - a), lambda^2 (lambda - a))`.
    pub fn eigenvector(&self, lambda: Complex<f64>, c: &ModelConstants) -> Vector4<Complex<f64>> {
        let shift = lambda - Complex::new(c.half_gap(), 0.0);
        Vector4::new(Complex::new(1.0, 0.0), shift, lambda * shift, lambda * lambda * shift)
    }

    /// Evaluates the characteristic polynomial at `x`.
    pub fn char_poly(&self, x: Complex<f64>) -> Complex<f64> {
        self.char_poly_coeffs.iter().fold(Complex::new(0.0, 0.0), |acc, &k| acc * x + Complex::new(k, 0.0))
    }
}

fn shifted_matrix(c: &ModelConstants, corner: f64) -> Matrix4<f64> {
    let a = c.half_gap();
    Matrix4::new(
        a, 1.0, 0.0, 0.0, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        corner, c.c2, c.c3, c.c4,
    )
}

pub fn linearize_at_o(c: &ModelConstants) -> Linearization {
    let n = c.n as f64;
    let re = |x: f64| Complex::new(x, 0.0);
    Linearization {
        point: Equilibrium::O,
        matrix: shifted_matrix(c, 0.0),
        eigenvalues: [re(n / 2.0), re(-n / 2.0), re((n - 4.0) / 2.0), re(-(n - 4.0) / 2.0)],
        char_poly_coeffs: [1.0, 0.0, c.k2, 0.0, c.k0],
    }
}

/// `√(n⁴ − 64n + 64)`, the discriminant radical shared by the eigenvalues at P.
fn p_radical(n: u32) -> f64 {
    let m = n as u64;
    ((m * m * m * m + 64 - 64 * m) as f64).sqrt()
}

pub fn linearize_at_p(c: &ModelConstants) -> Linearization {
    let m = c.n as u64;
    let trace_term = (m * m - 4 * m + 8) as f64;
    let rad = p_radical(c.n);
    let mu1 = (trace_term + rad).sqrt() / 2.0;
    let omega = center_frequency(c);
    Linearization {
        point: Equilibrium::P,
        matrix: shifted_matrix(c, c.p * c.k0),
        eigenvalues: [
            Complex::new(mu1, 0.0),
            Complex::new(-mu1, 0.0),
            Complex::new(0.0, omega),
            Complex::new(0.0, -omega),
        ],
        char_poly_coeffs: [1.0, 0.0, c.k2, 0.0, -8.0 / (c.n - 4) as f64 * c.k0],
    }
}

/// Frequency of the linear oscillation about the constant solution,
/// `ω = √(√(n⁴−64n+64) − (n²−4n+8)) / 2`.
pub fn center_frequency(c: &ModelConstants) -> f64 {
    let m = c.n as u64;
    let trace_term = (m * m - 4 * m + 8) as f64;
    (p_radical(c.n) - trace_term).sqrt() / 2.0
}

/// Half-period `π/ω` of the linear center mode.
pub fn linear_half_period(c: &ModelConstants) -> f64 {
    std::f64::consts::PI / center_frequency(c)
}

/// Roots of `x^4 + b x^2 + c0` through the quadratic formula in `x^2`.
pub fn biquadratic_roots(b: f64, c0: f64) -> [Complex<f64>; 4] {
    let disc = Complex::new(b * b - 4.0 * c0, 0.0).sqrt();
    // numerically stable pair
    let q = if b >= 0.0 { -0.5 * (Complex::new(b, 0.0) + disc) } else { -0.5 * (Complex::new(b, 0.0) - disc) };
    let z1 = q;
    let z2 = if q.norm() > 0.0 { Complex::new(c0, 0.0) / q } else { Complex::new(0.0, 0.0) };
    let r1 = z1.sqrt();
    let r2 = z2.sqrt();
    [r1, -r1, r2, -r2]
}

/// Classifies an eigenvalue as purely imaginary (|re| below 1e-12, im != 0).
pub fn is_purely_imaginary(z: Complex<f64>) -> bool {
    z.re.abs() <= 1e-12 && z.im != 0.0
}
