//! Acceptance criteria: one PASS/FAIL line per criterion, exit status 1 if
//! any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use delaunay_core::certify::{
    certify_orbit, check_extrema_straddle, count_sign_changes, energy_drift, orbit_extrema, orbit_sign_changes,
    scalar_curvature,
};
use delaunay_core::dynamics::{flow_state, fourth_derivative, Tolerances};
use delaunay_core::periodic::{
    center_branch_orbit, continue_in_t, mountain_pass_initialize, solve_symmetric_orbit, OrbitSolution, ShootingOptions,
};
use delaunay_core::spectra::{biquadratic_roots, center_frequency, is_purely_imaginary, linear_half_period};
use delaunay_core::{compute_k1, integrate, linearize_at_o, linearize_at_p, ModelConstants, PhaseState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn c(n: u32) -> ModelConstants {
    ModelConstants::new(n).unwrap()
}

fn constants_and_closed_forms() -> Verdict {
    let mut worst_k1 = 0.0_f64;
    let mut worst_o = 0.0_f64;
    let mut worst_p = 0.0_f64;
    let mut imaginary = true;
    for n in 5..=16 {
        let m = c(n);
        let k1 = compute_k1(n, (n + 4) as f64 / (n - 4) as f64).unwrap();
        worst_k1 = worst_k1.max((k1 - m.k0).abs() / m.k0);
        let nf = n as f64;
        let mut closed: Vec<f64> = vec![nf / 2.0, -nf / 2.0, (nf - 4.0) / 2.0, -(nf - 4.0) / 2.0];
        let mut oracle: Vec<f64> = biquadratic_roots(m.k2, m.k0).iter().map(|z| z.re).collect();
        let mut computed: Vec<f64> = linearize_at_o(&m).eigenvalues.iter().map(|z| z.re).collect();
        for v in [&mut closed, &mut oracle, &mut computed] {
            v.sort_by(f64::total_cmp);
        }
        for i in 0..4 {
            worst_o = worst_o.max((closed[i] - oracle[i]).abs()).max((computed[i] - oracle[i]).abs());
        }
        let lin = linearize_at_p(&m);
        let oracle = biquadratic_roots(m.k2, -8.0 * m.k0 / (nf - 4.0));
        for z in &lin.eigenvalues {
            let nearest = oracle.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min);
            worst_p = worst_p.max(nearest);
        }
        imaginary &= lin.eigenvalues.iter().filter(|z| is_purely_imaginary(**z)).count() == 2;
    }
    let omega = center_frequency(&c(5));
    let anchor_err = (omega - 1.245937).abs();
    let ok = worst_k1 <= 1e-10 && worst_o <= 1e-12 && worst_p <= 1e-12 && imaginary && anchor_err <= 1e-6;
    verdict(
        ok,
        format!(
            "K1 rel {worst_k1:.1e}, O eig {worst_o:.1e}, P eig {worst_p:.1e}, center pair {imaginary}, \
             omega(5) = {omega:.15} vs anchor 1.245937 (|diff| {anchor_err:.1e}, tol 1e-6)"
        ),
    )
}

fn explicit_solution_residuals() -> Verdict {
    let m = c(5);
    let mut worst = 0.0_f64;
    for i in 0..1001 {
        let t = -10.0 + 20.0 * i as f64 / 1000.0;
        let jet = m.bubble_jet(t);
        let rhs = fourth_derivative(&m.bubble_state(t), &m).unwrap();
        worst = worst.max((jet[4] - rhs).abs());
    }
    let constant = fourth_derivative(&PhaseState::new(0.0, m.l, 0.0, 0.0, 0.0), &m).unwrap().abs();
    verdict(
        worst < 1e-8 && constant <= 4.0 * f64::EPSILON * m.k0 * m.l,
        format!("bubble {worst:.2e}, constant {constant:.1e}"),
    )
}

fn conservation() -> Verdict {
    let dims = [5, 6, 7, 9, 13];
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_517);
    let mut worst = 0.0_f64;
    let mut failures = 0;
    let mut first_failure = String::new();
    for k in 0..100 {
        let m = c(dims[k % dims.len()]);
        let s = PhaseState::new(
            0.0,
            rng.gen_range(0.05..0.95) * m.big_l,
            rng.gen_range(-0.1..0.1) * m.l,
            rng.gen_range(-0.1..0.1) * m.l,
            rng.gen_range(-0.1..0.1) * m.l,
        );
        match integrate(s, 20.0, 1e-10, 1e-12, &m) {
            Ok(traj) => worst = worst.max(energy_drift(&traj)),
            Err(e) => {
                if failures == 0 {
                    first_failure = format!("; first: n={} v0={:.4}: {e}", m.n, s.v);
                }
                failures += 1;
            }
        }
    }
    verdict(
        failures == 0 && worst < 1e-6,
        format!("max drift {worst:.2e} over completed runs, {failures}/100 runs left the band{first_failure}"),
    )
}

fn desk_scale_orbit() -> Verdict {
    let m = c(5);
    let opts = ShootingOptions::with_rtol(1e-10).unwrap();
    let linear = center_branch_orbit(&m, 6.0, &opts);
    let varia =
        mountain_pass_initialize(&m, 6.0, 129).and_then(|(_, seed)| solve_symmetric_orbit(&m, 6.0, &seed, &opts));
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, r) in [("linear", linear), ("mountain-pass", varia)] {
        match r {
            Ok(o) => {
                let (lo, _) = o.range();
                let straddle = check_extrema_straddle(&orbit_extrema(&o), &m);
                let crossings = orbit_sign_changes(&o, m.l).count;
                let good = o.residual < 1e-9
                    && o.closure_gap < 1e-6
                    && o.amplitude > 1e-3
                    && lo > 0.0
                    && straddle.passed
                    && crossings == 2;
                ok &= good;
                notes.push(format!(
                    "{name}: a {:.6}, residual {:.1e}, gap {:.1e}, amplitude {:.4}, crossings {crossings}",
                    o.a, o.residual, o.closure_gap, o.amplitude
                ));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("{name}: {e}"));
            }
        }
    }
    verdict(ok, notes.join("; "))
}

fn center_frequency_consistency() -> Verdict {
    let m = c(5);
    let target = std::f64::consts::PI / center_frequency(&m);
    let fam = continue_in_t(&m, 2.7, 6.0, 34, &ShootingOptions::default()).unwrap();
    let pts: Vec<(f64, f64)> = fam.converged().take(5).map(|o| (o.half_period, o.amplitude * o.amplitude)).collect();
    // least-squares line through (T, amplitude^2)
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / k, sy / k);
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let root = mx - my * sxx / sxy;
    let root_err = (root - target).abs() / target;

    let small = center_branch_orbit(&m, linear_half_period(&m) * 1.005, &ShootingOptions::default()).unwrap();
    let times = count_sign_changes(&small.padded_trajectory(small.grid.len()), m.l).times;
    let linear = 2.0 * std::f64::consts::PI / center_frequency(&m);
    let period_err = if times.len() >= 3 { ((times[2] - times[0]) - linear).abs() / linear } else { f64::INFINITY };
    verdict(
        pts.len() == 5 && root_err < 0.05 && period_err < 0.01,
        format!(
            "extrapolated root {root:.4} vs {target:.4} ({:.2}%), period error {:.3}%",
            100.0 * root_err,
            100.0 * period_err
        ),
    )
}

fn u_near(s: &PhaseState, r: f64, m: &ModelConstants) -> f64 {
    let tol = Tolerances::new(1e-13, 1e-15).unwrap();
    let dt = (r / s.t.exp()).ln();
    let y = if dt == 0.0 { s.state() } else { flow_state(s.state(), s.t, dt, tol, m).unwrap() };
    r.powf(-m.half_gap()) * y[0]
}

/// Scalar curvature of `u^{4/(n-4)} δ` by central differences in `r`.
fn curvature_by_differences(s: &PhaseState, m: &ModelConstants) -> f64 {
    let n = m.n as f64;
    let e = (n - 2.0) / (n - 4.0);
    let r = s.t.exp();
    let h = 1e-4 * r;
    let f = |x: f64| u_near(s, x, m).powf(e);
    let (fp, f0, fm) = (f(r + h), f(r), f(r - h));
    let lap = (fp - 2.0 * f0 + fm) / (h * h) + (n - 1.0) / r * (fp - fm) / (2.0 * h);
    -4.0 * (n - 1.0) / (n - 2.0) * u_near(s, r, m).powf(-(n + 2.0) / (n - 4.0)) * lap
}

fn certified_sweeps() -> Verdict {
    let mut orbits: Vec<OrbitSolution> = Vec::new();
    for (n, from) in [(5, 2.7), (6, 2.0)] {
        let fam = continue_in_t(&c(n), from, 6.0, 16, &ShootingOptions::default()).unwrap();
        orbits.extend(fam.converged().cloned());
    }
    let mut worst = f64::INFINITY;
    let mut failed = 0;
    let mut points = 0;
    let mut disagreements = 0;
    for o in &orbits {
        for cert in certify_orbit(o) {
            worst = worst.min(cert.worst_margin);
            if !cert.passed || cert.worst_margin < -1e-12 {
                failed += 1;
            }
        }
        for s in o.grid.iter().step_by(16) {
            let fd = curvature_by_differences(s, &o.constants);
            let r = scalar_curvature(s, &o.constants).unwrap();
            points += 1;
            if (fd > 0.0) != (r > 0.0) {
                disagreements += 1;
            }
        }
    }
    verdict(
        orbits.len() >= 30 && failed == 0 && disagreements == 0,
        format!(
            "{} orbits, {failed} failed certificates, worst margin {worst:.3e}, curvature sign disagreements {disagreements}/{points}",
            orbits.len()
        ),
    )
}

fn perturbed_trajectory() -> Verdict {
    let m = c(5);
    match integrate(PhaseState::new(0.0, m.l + 0.05, 0.0, 0.01, 0.0), 60.0, 1e-10, 1e-12, &m) {
        Ok(traj) => {
            let sc = count_sign_changes(&traj, m.l);
            verdict(sc.count >= 10, format!("{} sign changes of v - l on [0, 60]", sc.count))
        }
        Err(e) => verdict(false, format!("trajectory did not reach t = 60: {e}")),
    }
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_delaunay-lab")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let runs: [(&str, Vec<&str>); 5] = [
        ("constants.json", vec!["constants", "--n", "7", "--json"]),
        ("eigen.json", vec!["eigen", "--n", "5", "--json"]),
        ("orbit.json", vec!["find-periodic", "--n", "5", "--T", "6", "--seed-mode", "mountain-pass"]),
        ("sweep.csv", vec!["sweep", "--n", "6", "--T-from", "2.5", "--T-to", "4", "--steps", "4"]),
        ("traj.csv", vec!["integrate", "--n", "5", "--v0", "1.06", "--v2", "-0.01", "--t-end", "-2"]),
    ];
    let mut mismatched = Vec::new();
    for (file, args) in &runs {
        let mut artifacts = Vec::new();
        for round in 0..2 {
            let path = dir.path().join(format!("{round}-{file}"));
            let mut full: Vec<&str> = args.clone();
            let p = path.to_str().unwrap();
            let uses_out = !matches!(args[0], "constants" | "eigen");
            if uses_out {
                full.extend(["--out", p]);
            }
            let (code, stdout) = run_cli(&full);
            let bytes = if uses_out { std::fs::read(Path::new(p)).unwrap_or_default() } else { stdout };
            artifacts.push((code, bytes));
        }
        if artifacts[0] != artifacts[1] || artifacts[0].0 != 0 || artifacts[0].1.is_empty() {
            mismatched.push(*file);
        }
    }
    verdict(mismatched.is_empty(), format!("{} artifacts compared, mismatched: {mismatched:?}", runs.len()))
}

fn main() {
    type Check = fn() -> Verdict;
    let criteria: [(&str, Check, Option<Duration>); 8] = [
        ("constants and closed forms", constants_and_closed_forms, Some(Duration::from_secs(1))),
        ("explicit-solution residuals", explicit_solution_residuals, Some(Duration::from_secs(1))),
        ("first-integral conservation", conservation, Some(Duration::from_secs(30))),
        ("desk-scale periodic orbit", desk_scale_orbit, Some(Duration::from_secs(10))),
        ("center-frequency consistency", center_frequency_consistency, Some(Duration::from_secs(60))),
        ("certificates on sweeps", certified_sweeps, Some(Duration::from_secs(60))),
        ("perturbed trajectory oscillates", perturbed_trajectory, Some(Duration::from_secs(5))),
        ("CLI determinism", determinism, None),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed < b);
        let passed = v.passed && in_time;
        if !passed {
            failed += 1;
        }
        let budget = budget.map_or_else(|| "none".to_string(), |b| format!("{}s", b.as_secs()));
        println!(
            "criterion {} [{}] {name}: {} ({:.2}s, budget {budget})",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
