//! Multigrid reduction in time for 1D hyperbolic conservation laws.
//!
//! Finite-volume WENO discretisations with Lax-Friedrichs or Roe fluxes,
//! explicit SSP Runge-Kutta steppers, matched Lax-Friedrichs coarse
//! propagators for Burgers, a nonlinear (FAS) MGRIT solver and an experiment
//! harness that writes convergence tables as CSV.

pub mod error;
pub mod flux;
pub mod grid;
pub mod harness;
pub mod mgrit;
pub mod models;
pub mod serial;
pub mod stepper;
pub mod weno;

pub use error::{Error, Result};
pub use flux::{FluxConfig, FluxKind, RhsOperator, SemiDiscreteOperator};
pub use grid::{rel_l2_spacetime_error, SpaceTimeTrajectory, SpatialGrid, StateField, TemporalGrid};
pub use mgrit::{mgrit_solve, ConvergenceRecord, CycleType, MgritConfig, Relaxation, RestrictionGuess};
pub use models::ConservationModel;
pub use serial::{solve_serial, InitialCondition, SerialRun};
pub use stepper::{make_stepper, Propagator, StepperKind, StepperSpec, TimeStepper};
pub use weno::{build_tables, WenoConfig, WenoTables};
