//! Simulation and verification toolkit for the Benjamin–Bona–Mahony
//! equation `u_t − u_xxt + u_x + u u_x = 0` with localized interior damping
//! or dissipative boundary feedback.

pub mod error;
pub mod field;
pub mod operators;
pub mod timestep;
pub mod diagnostics;
pub mod initial;
pub mod oracle;
pub mod verify;

pub use error::{BbmError, Result};
pub use field::{Field1D, Grid, IntervalGrid, SobolevIndex, TorusGrid};
pub use operators::{DampingProfile, FeedbackCoefficients, Model, RhsOptions, Variant};
pub use diagnostics::{EnergyLedger, EnergyRecord};
pub use timestep::{integrate, IntegrationConfig, Integrator, PicardSettings, Run, Trajectory};
pub use initial::InitialCondition;
