//! Mountain-pass seeds for the periodic problem.
//!
//! On `[0, T]` with Neumann-type symmetry (`v' = v''' = 0` at both ends) the
//! ODE is the Euler-Lagrange equation of
//!
//! ```text
//! J(v) = ∫ ½ v''² − (K2/2) v'² + F(v) dt,   F = −G.
//! ```
//!
//! `J(0) = J(L) = 0` with a positive ridge in between. A discrete path from
//! `0` to the constant `L` is relaxed by repeatedly pushing its highest node
//! down a preconditioned gradient, refining the path where neighbouring
//! nodes drift apart. The highest node approximates a saddle of `J`, which
//! is handed to Newton as a seed.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::constants::ModelConstants;
use crate::dynamics::PhaseState;
use crate::error::PeriodicError;

use super::shooting::OrbitSeed;

pub const MIN_GRID: usize = 65;
/// Shortest half period for which the initial path fits.
pub const MIN_HALF_PERIOD: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MountainPassOptions {
    pub grid_size: usize,
    pub max_iterations: usize,
    /// Stop once the preconditioned gradient norm at the peak falls below
    /// this fraction of `‖l‖` in the same norm.
    pub gradient_tol: f64,
    pub max_path_nodes: usize,
    /// Neighbouring path nodes further apart than this multiple of `L`
    /// (sup norm) get a midpoint inserted.
    pub refine_spacing: f64,
}

impl Default for MountainPassOptions {
    fn default() -> Self {
        Self { grid_size: 129, max_iterations: 20_000, gradient_tol: 1e-2, max_path_nodes: 4000, refine_spacing: 0.2 }
    }
}

/// Discretized functional on a uniform grid of `[0, T]`.
struct Discrete<'a> {
    c: &'a ModelConstants,
    h: f64,
    weights: Vec<f64>,
    d1: DMatrix<f64>,
    d2: DMatrix<f64>,
    /// `D2ᵀWD2 − K2 D1ᵀWD1`.
    stiffness: DMatrix<f64>,
}

fn difference_matrices(n: usize, h: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut d1 = DMatrix::zeros(n, n);
    let mut d2 = DMatrix::zeros(n, n);
    for i in 0..n {
        // mirrored neighbours: v[-1] = v[1], v[n] = v[n-2]
        let lo = if i == 0 { 1 } else { i - 1 };
        let hi = if i == n - 1 { n - 2 } else { i + 1 };
        if i != 0 && i != n - 1 {
            d1[(i, hi)] += 0.5 / h;
            d1[(i, lo)] -= 0.5 / h;
        }
        d2[(i, hi)] += 1.0 / (h * h);
        d2[(i, lo)] += 1.0 / (h * h);
        d2[(i, i)] -= 2.0 / (h * h);
    }
    (d1, d2)
}

impl<'a> Discrete<'a> {
    fn new(c: &'a ModelConstants, half_period: f64, n: usize) -> Self {
        let h = half_period / (n - 1) as f64;
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        let (d1, d2) = difference_matrices(n, h);
        let w = DMatrix::from_diagonal(&DVector::from_vec(weights.clone()));
        let stiffness = d2.transpose() * &w * &d2 - (d1.transpose() * &w * &d1) * c.k2;
        Self { c, h, weights, d1, d2, stiffness }
    }

    fn value(&self, v: &DVector<f64>) -> f64 {
        // differences first, so constant profiles have exactly zero derivatives
        let dv = &self.d1 * v;
        let ddv = &self.d2 * v;
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * (0.5 * ddv[i] * ddv[i] - 0.5 * self.c.k2 * dv[i] * dv[i] + self.c.potential_f(v[i])))
            .sum()
    }

    fn gradient(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut g = &self.stiffness * v;
        for i in 0..v.len() {
            g[i] += self.weights[i] * self.c.potential_f_prime(v[i]);
        }
        g
    }
}

/// Discrete `J` of a profile sampled uniformly on `[0, T]` (endpoints
/// included), using mirrored difference stencils and trapezoid weights.
/// Relative slack on the upper band edge `L`.
const BAND_SLACK: f64 = 1e-12;

pub fn functional_j(profile: &[f64], half_period: f64, c: &ModelConstants) -> Result<f64, PeriodicError> {
    if profile.len() < 9 {
        return Err(PeriodicError::InvalidRequest(format!("profile needs at least 9 samples, got {}", profile.len())));
    }
    if !(half_period > 0.0) || !half_period.is_finite() {
        return Err(PeriodicError::InvalidRequest(format!("half period {half_period} must be positive")));
    }
    let top = c.big_l * (1.0 + BAND_SLACK);
    if let Some((index, &value)) = profile.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && **v <= top)) {
        return Err(PeriodicError::OutsideBand { index, value });
    }
    let d = Discrete::new(c, half_period, profile.len());
    Ok(d.value(&DVector::from_column_slice(profile)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MountainPass {
    /// Sample times on `[0, T]`.
    pub grid: Vec<f64>,
    /// Path nodes, from `0` to the constant `L`.
    pub path: Vec<Vec<f64>>,
    /// `J` along the path.
    pub values: Vec<f64>,
    /// Index of the highest node.
    pub peak: usize,
    pub iterations: usize,
    pub gradient_norm: f64,
}

impl MountainPass {
    pub fn peak_profile(&self) -> &[f64] {
        &self.path[self.peak]
    }

    pub fn peak_value(&self) -> f64 {
        self.values[self.peak]
    }
}

fn bump(s: f64) -> f64 {
    0.5 * (1.0 + (std::f64::consts::PI * s.clamp(0.0, 1.0)).cos())
}

/// Three-stage initial path: grow a bump of width one at the left end up to
/// `L`, slide its front across the interval, then lift the remaining tail.
fn initial_path(grid: &[f64], half_period: f64, big_l: f64) -> Vec<DVector<f64>> {
    let n = grid.len();
    let mut path = Vec::new();
    let stage1 = 12;
    for k in 0..=stage1 {
        let s = k as f64 / stage1 as f64;
        path.push(DVector::from_iterator(n, grid.iter().map(|&x| big_l * s * bump(x))));
    }
    let span = half_period - 1.0;
    let stage2 = ((span * 8.0).ceil() as usize).max(4);
    for k in 1..=stage2 {
        let front = span * k as f64 / stage2 as f64;
        path.push(DVector::from_iterator(
            n,
            grid.iter().map(|&x| if x <= front { big_l } else { big_l * bump(x - front) }),
        ));
    }
    let stage3 = 12;
    for k in 1..=stage3 {
        let s = k as f64 / stage3 as f64;
        path.push(DVector::from_iterator(
            n,
            grid.iter().map(|&x| if x <= span { big_l } else { big_l * ((1.0 - s) * bump(x - span) + s) }),
        ));
    }
    path
}

fn sup_distance(p: &DVector<f64>, q: &DVector<f64>) -> f64 {
    p.iter().zip(q.iter()).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

/// Preconditioned gradient restricted to the components not pinned at a
/// bound of the band `[0, L]` by a gradient pointing outward.
fn descent_direction(
    metric: &DMatrix<f64>,
    chol: &Cholesky<f64, Dyn>,
    v: &DVector<f64>,
    grad: &DVector<f64>,
    big_l: f64,
) -> Result<DVector<f64>, PeriodicError> {
    let free: Vec<usize> =
        (0..v.len()).filter(|&k| !((v[k] >= big_l && grad[k] < 0.0) || (v[k] <= 0.0 && grad[k] > 0.0))).collect();
    if free.len() == v.len() {
        return Ok(chol.solve(grad));
    }
    let mut dir = DVector::zeros(v.len());
    if free.is_empty() {
        return Ok(dir);
    }
    let sub = metric.select_rows(free.iter()).select_columns(free.iter());
    let g = grad.select_rows(free.iter());
    let d = Cholesky::new(sub).ok_or(PeriodicError::SingularJacobian)?.solve(&g);
    for (k, &idx) in free.iter().enumerate() {
        dir[idx] = d[k];
    }
    Ok(dir)
}

/// Armijo step along `-dir`, projected onto the band. Returns the accepted
/// step length.
fn projected_step(
    d: &Discrete<'_>,
    v: &mut DVector<f64>,
    value: &mut f64,
    grad: &DVector<f64>,
    dir: &DVector<f64>,
    last_tau: f64,
    big_l: f64,
) -> Option<f64> {
    let mut tau = (last_tau * 2.0).min(1.0);
    while tau > 1e-10 {
        let trial = (&*v - dir * tau).map(|x| x.clamp(0.0, big_l));
        let tv = d.value(&trial);
        let predicted = grad.dot(&(&*v - &trial));
        if predicted > 0.0 && tv < *value - 1e-4 * predicted {
            *v = trial;
            *value = tv;
            return Some(tau);
        }
        tau *= 0.5;
    }
    None
}

/// Relaxes the initial path until its peak is a critical point of `J` to
/// the requested tolerance.
pub fn mountain_pass_path(
    c: &ModelConstants,
    half_period: f64,
    opts: &MountainPassOptions,
) -> Result<MountainPass, PeriodicError> {
    if !(half_period >= MIN_HALF_PERIOD) || !half_period.is_finite() {
        return Err(PeriodicError::InvalidRequest(format!(
            "half period {half_period} is below {MIN_HALF_PERIOD}; the initial path does not fit"
        )));
    }
    if opts.grid_size < MIN_GRID {
        return Err(PeriodicError::InvalidRequest(format!(
            "grid size {} is below the minimum {MIN_GRID}",
            opts.grid_size
        )));
    }
    let n = opts.grid_size;
    let d = Discrete::new(c, half_period, n);
    let grid: Vec<f64> = (0..n).map(|i| i as f64 * d.h).collect();
    let metric = &d.stiffness + DMatrix::from_diagonal(&DVector::from_vec(d.weights.clone())) * c.k0;
    let chol: Cholesky<f64, Dyn> = Cholesky::new(metric.clone()).ok_or(PeriodicError::SingularJacobian)?;
    let ones = DVector::from_element(n, c.l);
    let reference = ones.dot(&(&metric * &ones)).sqrt();
    let gtol = opts.gradient_tol * reference;

    let mut path = initial_path(&grid, half_period, c.big_l);
    let mut values: Vec<f64> = path.iter().map(|p| d.value(p)).collect();
    let mut steps: Vec<f64> = vec![1.0; path.len()];
    let refine = opts.refine_spacing * c.big_l;

    let argmax = |vals: &[f64]| {
        vals.iter().enumerate().skip(1).take(vals.len() - 2).fold((1, f64::NEG_INFINITY), |acc, (i, &v)| {
            if v > acc.1 {
                (i, v)
            } else {
                acc
            }
        })
    };

    let mut gnorm = f64::INFINITY;
    for it in 0..opts.max_iterations {
        let (i, _) = argmax(&values);
        let grad = d.gradient(&path[i]);
        let dir = descent_direction(&metric, &chol, &path[i], &grad, c.big_l)?;
        gnorm = grad.dot(&dir).max(0.0).sqrt();
        if gnorm <= gtol {
            return Ok(MountainPass {
                grid,
                values,
                path: path.into_iter().map(|p| p.iter().copied().collect()).collect(),
                peak: i,
                iterations: it,
                gradient_norm: gnorm,
            });
        }
        // the peak moves first, then its neighbours
        let mut moved_any = false;
        for k in [i, i - 1, i + 1] {
            if k == 0 || k + 1 == path.len() {
                continue;
            }
            let (g, dk) = if k == i {
                (grad.clone(), dir.clone())
            } else {
                let g = d.gradient(&path[k]);
                let dk = descent_direction(&metric, &chol, &path[k], &g, c.big_l)?;
                (g, dk)
            };
            if let Some(tau) = projected_step(&d, &mut path[k], &mut values[k], &g, &dk, steps[k], c.big_l) {
                steps[k] = tau;
                moved_any = true;
            } else if k == i {
                steps[k] = 1e-10;
            }
        }
        if !moved_any {
            return Err(PeriodicError::RelaxationStalled { iterations: it, gradient: gnorm });
        }
        if path.len() >= opts.max_path_nodes {
            // refinement exhausted: the discrete path can no longer stay connected
            return Err(PeriodicError::RelaxationStalled { iterations: it, gradient: gnorm });
        }
        // keep the path fine around the moved nodes
        let mut k = i.saturating_sub(2);
        while k + 1 < path.len() && k <= i + 2 {
            if path.len() < opts.max_path_nodes && sup_distance(&path[k], &path[k + 1]) > refine {
                let mid = (&path[k] + &path[k + 1]) * 0.5;
                let mv = d.value(&mid);
                path.insert(k + 1, mid);
                values.insert(k + 1, mv);
                steps.insert(k + 1, 1.0);
            } else {
                k += 1;
            }
        }
    }
    Err(PeriodicError::RelaxationStalled { iterations: opts.max_iterations, gradient: gnorm })
}

/// Newton seed from a sampled profile: derivatives by mirrored central
/// differences (odd derivatives vanish at both ends).
pub fn seed_from_profile(profile: &[f64], half_period: f64) -> OrbitSeed {
    let n = profile.len();
    let h = half_period / (n - 1) as f64;
    let at = |v: &[f64], i: isize| -> f64 {
        let j = if i < 0 {
            -i
        } else if i >= n as isize {
            2 * (n as isize - 1) - i
        } else {
            i
        };
        v[j as usize]
    };
    let v1: Vec<f64> = (0..n as isize)
        .map(
            |i| if i == 0 || i == n as isize - 1 { 0.0 } else { (at(profile, i + 1) - at(profile, i - 1)) / (2.0 * h) },
        )
        .collect();
    let v2: Vec<f64> =
        (0..n as isize).map(|i| (at(profile, i + 1) - 2.0 * at(profile, i) + at(profile, i - 1)) / (h * h)).collect();
    let v3: Vec<f64> = (0..n as isize)
        .map(|i| if i == 0 || i == n as isize - 1 { 0.0 } else { (at(&v2, i + 1) - at(&v2, i - 1)) / (2.0 * h) })
        .collect();
    let states: Vec<PhaseState> =
        (0..n).map(|i| PhaseState::new(i as f64 * h, profile[i], v1[i], v2[i], v3[i])).collect();
    OrbitSeed { a: profile[0], b: v2[0], profile: Some(states) }
}

/// Runs the relaxation and returns the path together with the seed built
/// from its peak.
pub fn mountain_pass_initialize(
    c: &ModelConstants,
    half_period: f64,
    grid_size: usize,
) -> Result<(MountainPass, OrbitSeed), PeriodicError> {
    let opts = MountainPassOptions { grid_size, ..MountainPassOptions::default() };
    let mp = mountain_pass_path(c, half_period, &opts)?;
    let seed = seed_from_profile(mp.peak_profile(), half_period);
    Ok((mp, seed))
}
