//! File formats. Every float is written with 17 significant digits
//! (`{:.16e}`), so parsing and re-serializing reproduces the same bytes.

use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;
use thiserror::Error;

use crate::certify::Certificate;
use crate::constants::ModelConstants;
use crate::dynamics::{PhaseState, Trajectory};
use crate::periodic::{Family, OrbitSolution};
use crate::spectra::{Equilibrium, Linearization};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid content: {0}")]
    Invalid(String),
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Compact JSON with fixed 17-digit floats.
#[derive(Debug, Clone, Copy, Default)]
pub struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes `value` followed by a newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits);
    value.serialize(&mut ser).expect("in-memory serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRecord {
    pub n: u32,
    pub p: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
    #[serde(rename = "K0")]
    pub k0: f64,
    pub l: f64,
    #[serde(rename = "L")]
    pub big_l: f64,
    pub cn: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    #[serde(rename = "C4")]
    pub c4: f64,
    #[serde(rename = "Gl")]
    pub gl: f64,
}

impl From<&ModelConstants> for ConstantsRecord {
    fn from(c: &ModelConstants) -> Self {
        Self {
            n: c.n,
            p: c.p,
            k2: c.k2,
            k0: c.k0,
            l: c.l,
            big_l: c.big_l,
            cn: c.cn,
            c2: c.c2,
            c3: c.c3,
            c4: c.c4,
            gl: c.gl,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizationRecord {
    pub point: Equilibrium,
    /// Row-major 4x4 matrix.
    pub matrix: Vec<f64>,
    pub char_poly_coeffs: Vec<f64>,
    /// `[re, im]` pairs.
    pub eigenvalues: Vec<[f64; 2]>,
}

impl From<&Linearization> for LinearizationRecord {
    fn from(lin: &Linearization) -> Self {
        let mut matrix = Vec::with_capacity(16);
        for i in 0..4 {
            for j in 0..4 {
                matrix.push(lin.matrix[(i, j)]);
            }
        }
        Self {
            point: lin.point,
            matrix,
            char_poly_coeffs: lin.char_poly_coeffs.to_vec(),
            eigenvalues: lin.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    pub n: u32,
    pub linearizations: Vec<LinearizationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub v3: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub n: u32,
    #[serde(rename = "T")]
    pub half_period: f64,
    pub a: f64,
    pub b: f64,
    pub residual: f64,
    pub closure_gap: f64,
    pub amplitude: f64,
    pub energy_level: f64,
    pub grid: GridRecord,
}

impl From<&OrbitSolution> for OrbitRecord {
    fn from(o: &OrbitSolution) -> Self {
        let col = |f: fn(&PhaseState) -> f64| o.grid.iter().map(f).collect::<Vec<f64>>();
        Self {
            n: o.constants.n,
            half_period: o.half_period,
            a: o.a,
            b: o.b,
            residual: o.residual,
            closure_gap: o.closure_gap,
            amplitude: o.amplitude,
            energy_level: o.energy_level,
            grid: GridRecord {
                t: col(|s| s.t),
                v: col(|s| s.v),
                v1: col(|s| s.v1),
                v2: col(|s| s.v2),
                v3: col(|s| s.v3),
            },
        }
    }
}

impl OrbitRecord {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let rec: Self = serde_json::from_str(text)?;
        rec.validate()?;
        Ok(rec)
    }

    fn validate(&self) -> Result<(), FormatError> {
        let g = &self.grid;
        let len = g.t.len();
        if len < 2 || [g.v.len(), g.v1.len(), g.v2.len(), g.v3.len()].iter().any(|&k| k != len) {
            return Err(FormatError::Invalid("grid columns must share a length of at least 2".into()));
        }
        if g.t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FormatError::Invalid("grid times must strictly increase".into()));
        }
        if !(self.half_period > 0.0) || !(g.t[len - 1] < 2.0 * self.half_period) {
            return Err(FormatError::Invalid("grid must lie in [0, 2T) with T > 0".into()));
        }
        Ok(())
    }

    /// Rebuilds the orbit (without shooting nodes).
    pub fn to_solution(&self) -> Result<OrbitSolution, FormatError> {
        self.validate()?;
        let c = ModelConstants::new(self.n).map_err(|e| FormatError::Invalid(e.to_string()))?;
        let g = &self.grid;
        let grid = (0..g.t.len()).map(|i| PhaseState::new(g.t[i], g.v[i], g.v1[i], g.v2[i], g.v3[i])).collect();
        Ok(OrbitSolution {
            constants: c,
            half_period: self.half_period,
            a: self.a,
            b: self.b,
            grid,
            residual: self.residual,
            closure_gap: self.closure_gap,
            amplitude: self.amplitude,
            energy_level: self.energy_level,
            iterations: 0,
            nodes: Vec::new(),
        })
    }
}

fn csv_row(out: &mut String, values: &[f64]) {
    let row: Vec<String> = values.iter().map(|x| format_float(*x)).collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

/// Columns `t, v, v1, v2, v3, energy`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,v,v1,v2,v3,energy\n");
    for (s, e) in traj.samples().iter().zip(traj.energy()) {
        csv_row(&mut out, &[s.t, s.v, s.v1, s.v2, s.v3, *e]);
    }
    out
}

/// Columns `t, v, v1, v2, v3` at `points` equally spaced times.
pub fn bubble_csv(c: &ModelConstants, t_from: f64, t_to: f64, points: usize) -> String {
    let mut out = String::from("t,v,v1,v2,v3\n");
    for i in 0..points {
        let t = if points == 1 { t_from } else { t_from + (t_to - t_from) * i as f64 / (points - 1) as f64 };
        let s = c.bubble_state(t);
        csv_row(&mut out, &[s.t, s.v, s.v1, s.v2, s.v3]);
    }
    out
}

/// Columns `T, a, b, amplitude, energy_level, residual, converged`; failed
/// members carry `NaN` values and `converged = 0`.
pub fn sweep_csv(family: &Family) -> String {
    let mut out = String::from("T,a,b,amplitude,energy_level,residual,converged\n");
    for m in &family.members {
        let (vals, ok) = match &m.outcome {
            Ok(o) => ([o.a, o.b, o.amplitude, o.energy_level, o.residual], 1),
            Err(_) => ([f64::NAN; 5], 0),
        };
        let row: Vec<String> = std::iter::once(m.half_period)
            .chain(vals)
            .map(format_float)
            .chain(std::iter::once(ok.to_string()))
            .collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn report_json(certificates: &[Certificate]) -> String {
    to_json(&certificates)
}
