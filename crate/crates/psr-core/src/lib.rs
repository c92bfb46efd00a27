//! Desk-scale simulator and tuning toolkit for pulsed-series-resonance (PSR)
//! clock distribution networks.
//!
//! Clock branches are modeled as switched series-RLC tanks. The crate covers
//! the whole pipeline: netlist parsing and elaboration, closed-form tank math,
//! fixed-step transient simulation with energy accounting, behavioral circuit
//! elements (pulse generator, PSR drivers, pulsed flip-flops), inductor
//! matching for skew reduction, and comparative power/skew/Monte-Carlo
//! analyses of conventional vs. resonant architectures.

pub mod analysis;
pub mod calib;
pub mod elements;
pub mod error;
pub mod netlist;
pub mod pipeline;
pub mod rlc;
pub mod transient;
pub mod tuning;
pub mod units;

pub use calib::Calibration;
pub use error::{CoreError, Result};
pub use netlist::{BranchSpec, SimNetwork, TreeSpec, VariationSpec};
pub use rlc::{RlcTank, SwingResult, TankMetrics, TankState};
pub use transient::{EnergyLedger, SimConfig, SwitchSchedule, Waveform};
