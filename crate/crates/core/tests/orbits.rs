use delaunay_core::certify::{certify_orbit, energy_drift, orbit_extrema, orbit_sign_changes, ExtremumKind};
use delaunay_core::dynamics::{flow_state, Tolerances};
use delaunay_core::periodic::{
    center_branch_orbit, continue_in_t, functional_j, mountain_pass_initialize, shoot, solve_symmetric_orbit,
    OrbitSeed, OrbitSolution, ShootingOptions,
};
use delaunay_core::spectra::{center_frequency, linear_half_period};
use delaunay_core::{DynamicsError, ModelConstants, PeriodicError};

fn c5() -> ModelConstants {
    ModelConstants::new(5).unwrap()
}

fn assert_orbit_invariants(o: &OrbitSolution) {
    let c = &o.constants;
    assert!(o.residual < 1e-9 * c.l.max(1.0), "residual {}", o.residual);
    assert!(o.closure_gap < 1e-6, "closure {}", o.closure_gap);
    assert!(o.amplitude > 1e-3);
    let (lo, hi) = o.range();
    assert!(lo > 0.0 && lo < c.l && hi > c.l);
    assert!(energy_drift(&o.trajectory()) < 1e-6 * o.energy_level.abs().max(1.0));
    // even about t = 0 and t = T
    let m = o.grid.len();
    for k in 1..m / 2 {
        let (p, q) = (&o.grid[k], &o.grid[m - k]);
        assert!((p.v - q.v).abs() < 1e-6 && (p.v1 + q.v1).abs() < 1e-6);
        assert!((p.v2 - q.v2).abs() < 1e-6 && (p.v3 + q.v3).abs() < 1e-6);
    }
    assert!(o.grid[m / 2].v1.abs() < 1e-6 && o.grid[m / 2].v3.abs() < 1e-6);
    assert!(o.grid[0].v1 == 0.0 && o.grid[0].v3 == 0.0);
}

#[test]
fn constant_solution_shoots_true_for_every_half_period() {
    let c = c5();
    for t in [0.5, 2.0, 6.0, 11.0] {
        let end = shoot(c.l, 0.0, &c, t, 1e-10).unwrap();
        assert_eq!((end.v1, end.v3), (0.0, 0.0));
    }
}

#[test]
fn linear_mode_shoots_true_to_second_order() {
    let c = c5();
    let omega = center_frequency(&c);
    let t = linear_half_period(&c);
    let miss = |eps: f64| {
        let end = shoot(c.l + eps, -eps * omega * omega, &c, t, 1e-12).unwrap();
        end.v1.abs().max(end.v3.abs())
    };
    let (r3, r4) = (miss(1e-3), miss(1e-4));
    // a tenfold smaller amplitude gives a hundredfold smaller miss
    let ratio = r3 / r4;
    assert!(ratio > 90.0 && ratio < 110.0, "{ratio}");
    assert!(r4 < 1e4 * 1e-8, "{r4}");
}

#[test]
fn off_orbit_shot_misses() {
    let c = c5();
    let end = shoot(c.l + 0.1, 0.0, &c, 1.5, 1e-10).unwrap();
    assert!(end.v1.is_finite() && end.v3.is_finite() && end.v1.abs() + end.v3.abs() > 1e-3);
    // over a longer half period the same shot leaves the band
    assert!(matches!(shoot(c.l + 0.1, 0.0, &c, 6.0, 1e-10), Err(DynamicsError::BlowUp { .. })));
}

#[test]
fn seed_at_constant_is_a_trivial_root() {
    let c = c5();
    let r = solve_symmetric_orbit(&c, 6.0, &OrbitSeed::from_endpoints(c.l, 0.0), &ShootingOptions::default());
    assert!(matches!(r, Err(PeriodicError::TrivialRoot { .. })), "{r:?}");
}

#[test]
fn linear_seed_near_the_bifurcation_finds_a_small_orbit() {
    let c = c5();
    let omega = center_frequency(&c);
    let t = linear_half_period(&c) * 1.02;
    let eps = 0.05;
    let seed = OrbitSeed::from_endpoints(c.l + eps, -eps * omega * omega);
    let o = solve_symmetric_orbit(&c, t, &seed, &ShootingOptions::default()).unwrap();
    assert_orbit_invariants(&o);
}

#[test]
fn both_seed_modes_reach_the_same_orbit() {
    let c = c5();
    let opts = ShootingOptions::default();
    let linear = center_branch_orbit(&c, 6.0, &opts).unwrap();
    let (mp, seed) = mountain_pass_initialize(&c, 6.0, 129).unwrap();
    let j = mp.peak_value();
    assert!(j > 0.0 && j < c.potential_f(c.l) * 6.0, "J(seed) = {j}");
    let varia = solve_symmetric_orbit(&c, 6.0, &seed, &opts).unwrap();
    assert!(varia.iterations <= 30, "{} iterations", varia.iterations);
    for o in [&linear, &varia] {
        assert_orbit_invariants(o);
        assert_eq!(orbit_sign_changes(o, c.l).count, 2);
        let ext = orbit_extrema(o);
        assert_eq!(ext.iter().filter(|e| e.kind == ExtremumKind::Max).count(), 1);
        assert_eq!(ext.iter().filter(|e| e.kind == ExtremumKind::Min).count(), 1);
        assert!(certify_orbit(o).iter().all(|cert| cert.passed));
    }
    assert!((linear.a - varia.a).abs() < 1e-7 && (linear.b - varia.b).abs() < 1e-6);
    // the converged orbit lies above the seed's mountain-pass level
    let half: Vec<f64> = varia.grid[..=varia.grid.len() / 2].iter().map(|s| s.v).collect();
    let j_orbit = functional_j(&half, 6.0, &c).unwrap();
    assert!(j_orbit > 0.0 && j_orbit < c.potential_f(c.l) * 6.0);
}

#[test]
fn short_half_periods_are_rejected_by_the_initializer() {
    let c = c5();
    assert!(matches!(mountain_pass_initialize(&c, 0.5, 129), Err(PeriodicError::InvalidRequest(_))));
}

#[test]
fn grid_agrees_with_short_reintegrations() {
    let c = c5();
    let o = center_branch_orbit(&c, 6.0, &ShootingOptions::default()).unwrap();
    let tol = Tolerances::new(1e-12, 1e-14).unwrap();
    let stride = 32;
    let m = o.grid.len();
    for k in (0..m).step_by(stride) {
        let (p, q) = (&o.grid[k], &o.grid[(k + stride) % m]);
        let end = flow_state(p.state(), p.t, o.period() / m as f64 * stride as f64, tol, &c).unwrap();
        let want = q.state();
        for i in 0..4 {
            assert!((end[i] - want[i]).abs() < 1e-6, "k={k} i={i}: {} vs {}", end[i], want[i]);
        }
    }
}

#[test]
fn sign_changes_survive_grid_refinement() {
    let c = c5();
    for t in [3.0, 6.0] {
        let coarse = center_branch_orbit(&c, t, &ShootingOptions::default()).unwrap();
        let opts = ShootingOptions { grid_size: 2048, ..ShootingOptions::default() };
        let fine = center_branch_orbit(&c, t, &opts).unwrap();
        let a = orbit_sign_changes(&coarse, c.l);
        let b = orbit_sign_changes(&fine, c.l);
        assert_eq!(a.count, b.count);
        for (x, y) in a.times.iter().zip(&b.times) {
            assert!((x - y).abs() < 1e-6, "{x} vs {y}");
        }
    }
}

#[test]
fn single_value_family_matches_direct_solve() {
    let c = c5();
    let opts = ShootingOptions::default();
    let fam = continue_in_t(&c, 4.0, 4.0, 2, &opts).unwrap();
    assert_eq!(fam.members.len(), 1);
    let direct = center_branch_orbit(&c, 4.0, &opts).unwrap();
    assert_eq!(fam.members[0].outcome.as_ref().unwrap(), &direct);
    assert_eq!(fam.last_good, Some(4.0));
}

#[test]
fn continuation_rejects_bad_ranges() {
    let c = c5();
    let opts = ShootingOptions::default();
    assert!(continue_in_t(&c, 0.0, 3.0, 5, &opts).is_err());
    assert!(continue_in_t(&c, 3.0, 4.0, 1, &opts).is_err());
}

#[test]
fn amplitude_grows_monotonically_away_from_the_center() {
    let c = c5();
    let fam = continue_in_t(&c, 2.7, 6.0, 34, &ShootingOptions::default()).unwrap();
    assert_eq!(fam.last_good, Some(6.0));
    let amps: Vec<f64> = fam.converged().map(|o| o.amplitude).collect();
    assert_eq!(amps.len(), 34);
    assert!(amps.windows(2).all(|w| w[1] > w[0]));
    for o in fam.converged() {
        assert_orbit_invariants(o);
    }
}

#[test]
fn small_orbits_oscillate_at_the_linear_frequency() {
    let c = c5();
    let o = center_branch_orbit(&c, linear_half_period(&c) * 1.005, &ShootingOptions::default()).unwrap();
    assert!(o.amplitude < 0.2, "{}", o.amplitude);
    // the period measured from every other crossing of l
    let traj = o.padded_trajectory(o.grid.len());
    let times = delaunay_core::certify::count_sign_changes(&traj, c.l).times;
    assert!(times.len() >= 3);
    let measured = times[2] - times[0];
    let linear = 2.0 * std::f64::consts::PI / center_frequency(&c);
    assert!((measured - linear).abs() < 0.01 * linear, "{measured} vs {linear}");
}
