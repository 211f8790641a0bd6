//! Simulation core for an adiabatic controlled-NOT gate on charge qubits.
//!
//! The library is organized bottom-up:
//!
//! - [`units`]: physical constants and energy-unit conversions between SI
//!   and the dimensionless natural units (`hbar = 1`) used by the dynamics.
//! - [`schedules`]: piecewise pulse profiles, the gate schedule container
//!   and its invariants, the controlled-NOT schedule builder, and the
//!   operating-regime checks.
//! - [`dynamics`]: Hamiltonian assembly and unitary propagation with
//!   automatic step-size convergence control.
//! - [`gate`]: Landau-Zener sweep analysis, gate truth-table and phase
//!   diagnostics, phase calibration, and the interference readout model.
//! - [`device`]: electrostatics and tunneling formulas mapping a concrete
//!   junction-array device onto the dimensionless gate parameters.
//!
//! All ingredients are plain value types; everything is immutable after
//! construction and freely shareable across threads.

pub mod device;
pub mod dynamics;
pub mod error;
pub mod gate;
pub mod schedules;
pub mod units;

pub use error::{Error, Result};
