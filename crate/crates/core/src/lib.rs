//! Relativistic decay of moving unstable particles: survival amplitude
//! quadrature, instantaneous observables and their asymptotic laws.

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod grid;
pub mod interp;
pub mod mdd;
pub mod observables;
pub mod quadrature;
pub mod scaling;

pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use mdd::{make_breit_wigner, make_toy_mdd, MassDistribution};
pub use quadrature::{AmplitudeValue, Kinematics, QuadratureConfig};
