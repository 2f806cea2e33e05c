//! Radial solutions of the critical fourth-order equation `Δ²u = u^((n+4)/(n-4))`
//! in Emden-Fowler variables: constants, dynamics, spectra, periodic orbits
//! and pointwise certificates.

pub mod certify;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod periodic;
pub mod spectra;

pub use certify::Certificate;
pub use constants::{compute_k1, ModelConstants};
pub use dynamics::{energy, integrate, PhaseState, Trajectory, WCoordinates};
pub use error::{CertifyError, ConstantsError, DynamicsError, PeriodicError};
pub use periodic::{OrbitSeed, OrbitSolution};
pub use spectra::{linearize_at_o, linearize_at_p, Equilibrium, Linearization};
