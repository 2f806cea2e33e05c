//! Symmetric periodic solutions: shooting, continuation along the center
//! branch and mountain-pass seeding.

pub mod continuation;
pub mod mountain_pass;
pub mod newton;
pub mod shooting;

pub use continuation::{center_branch_orbit, continue_in_t, Family, FamilyMember};
pub use mountain_pass::{
    functional_j, mountain_pass_initialize, mountain_pass_path, seed_from_profile, MountainPass, MountainPassOptions,
};
pub use newton::NewtonOptions;
pub use shooting::{shoot, solve_symmetric_orbit, OrbitSeed, OrbitSolution, ShootingOptions, TRIVIAL_AMPLITUDE};
