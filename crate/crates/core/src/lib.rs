//! Broadband excitation and rotation sequences built from a reduced-angle
//! Fourier waveform interleaved with refocusing double sweeps.

pub mod composer;
pub mod config;
pub mod error;
pub mod figures;
pub mod fourier;
pub mod sequence;
pub mod simulator;
pub mod su2;
pub mod sweep;
pub mod verify;

pub use composer::{excitation_sequence, hard_pulse_sequence, rotation_sequence, RefocusPolicy};
pub use config::RunConfig;
pub use error::{Error, Result};
pub use figures::{figure_run, Figure};
pub use fourier::{coefficients, series_value, waveform, CoefficientSet, DesignParams};
pub use sequence::{PulseSequence, Segment, UnitScale};
pub use simulator::{excitation_profile, rotation_profile, sequence_propagator, OffsetGrid, OffsetProfile, SweepMode};
pub use su2::{distance_up_to_phase, Spinor, Su2};
pub use sweep::{chirp_propagator, ChirpSpec, IdealInversionSpec};
