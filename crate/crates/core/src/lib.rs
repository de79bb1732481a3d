//! Numerical laboratory for generalized coherent and squeezed states with
//! time-dependent dispersion.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod expm;
pub mod grid;
pub mod hydro;
mod interp;
pub mod potential;
pub mod operators;
pub mod profile;
pub mod propagator;
pub mod report;
pub mod sampler;
pub mod scenario;
pub mod state;
pub mod synthesis;

pub use error::{Error, Result};
pub use grid::{observables, Grid1D, Observables, PhysConstants, WaveFunction};
pub use potential::{PotentialKind, PotentialModel};
pub use profile::StateProfile;
pub use state::{assemble_state, TrajectoryState};
pub use hydro::{decompose, HydroFields};
pub use dynamics::{integrate, DispersionLaw, TrajectoryRecord};
pub use synthesis::SynthesizedPotential;
pub use report::{InvariantReport, Status};
pub use scenario::{run, ScenarioConfig, ScenarioKind, ScenarioOutcome};
