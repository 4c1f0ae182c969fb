//! Adiabatic inversions and the double-sweep refocusing block.
//!
//! An inversion `Θ(ω)` is either ideal, `Rz(α(ω))·Rx(π)·Rz(β(ω))`, or a
//! constant-amplitude linear chirp integrated numerically. Two identical
//! inversions around a free delay `τ` give `Θ·exp(-iωτ Iz)·Θ ∝ exp(+iωτ Iz)`
//! whatever `α` and `β` are, which undoes `τ` worth of forward precession.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::sequence::Segment;
use crate::su2::{x_rotation, z_rotation, Spinor, Su2};

/// Default bound on the phase any single chirp substep may accumulate.
pub const DEFAULT_MAX_PHASE_STEP: f64 = 0.05;

/// Default sweep endpoints, five times the normalized band edge.
pub const DEFAULT_SWEEP_RANGE: (f64, f64) = (-5.0, 5.0);

/// Linear frequency sweep from `f_start` to `f_end` over `duration`, at
/// constant rf `amplitude`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChirpSpec {
    pub f_start: f64,
    pub f_end: f64,
    pub duration: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticityReport {
    pub sweep_rate: f64,
    pub amplitude_sq: f64,
    pub ratio: f64,
}

impl ChirpSpec {
    pub fn new(f_start: f64, f_end: f64, duration: f64, amplitude: f64) -> Result<Self> {
        let spec = Self {
            f_start,
            f_end,
            duration,
            amplitude,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// A sweep over the default range.
    pub fn standard(duration: f64, amplitude: f64) -> Result<Self> {
        Self::new(DEFAULT_SWEEP_RANGE.0, DEFAULT_SWEEP_RANGE.1, duration, amplitude)
    }

    pub fn validate(&self) -> Result<()> {
        finite("chirp f_start", self.f_start)?;
        finite("chirp f_end", self.f_end)?;
        finite("chirp duration", self.duration)?;
        finite("chirp amplitude", self.amplitude)?;
        if self.duration <= 0.0 {
            return Err(Error::InvalidSweep(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if self.f_start == self.f_end {
            return Err(Error::InvalidSweep("sweep range is empty".into()));
        }
        if self.amplitude < 0.0 {
            return Err(Error::InvalidSweep(format!(
                "amplitude must be nonnegative, got {}",
                self.amplitude
            )));
        }
        Ok(())
    }

    pub fn sweep_rate(&self) -> f64 {
        (self.f_end - self.f_start).abs() / self.duration
    }

    /// Instantaneous rf frequency at time `t` into the sweep.
    pub fn frequency(&self, t: f64) -> f64 {
        self.f_start + (self.f_end - self.f_start) * t / self.duration
    }

    /// Accumulated rf phase at time `t`.
    pub fn phase(&self, t: f64) -> f64 {
        self.f_start * t + (self.f_end - self.f_start) * t * t / (2.0 * self.duration)
    }

    pub fn adiabaticity_report(&self) -> AdiabaticityReport {
        let sweep_rate = self.sweep_rate();
        let amplitude_sq = self.amplitude * self.amplitude;
        AdiabaticityReport {
            sweep_rate,
            amplitude_sq,
            ratio: amplitude_sq / sweep_rate,
        }
    }
}

/// Propagator of a chirp at `offset`.
///
/// Integration runs in the frame that follows the rf phase, where the
/// generator `(A, 0, ω − f(t))` is linear in time, using fourth-order Magnus
/// substeps; the result is rotated back into the fixed rotating frame. Each
/// substep accumulates at most `max_phase_step` of offset, rf and nutation
/// phase combined.
pub fn chirp_propagator(spec: &ChirpSpec, offset: f64, max_phase_step: f64) -> Result<Su2> {
    spec.validate()?;
    let offset = finite("offset", offset)?;
    let max_phase_step = finite("max_phase_step", max_phase_step)?;
    if max_phase_step <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "max_phase_step must be positive, got {max_phase_step}"
        )));
    }

    let bound = offset.abs() + spec.f_start.abs().max(spec.f_end.abs()) + spec.amplitude;
    let steps = (spec.duration * bound / max_phase_step).ceil().max(1.0) as usize;
    let h = spec.duration / steps as f64;
    let rate = (spec.f_end - spec.f_start) / spec.duration;
    // second Magnus term for a generator with constant slope (0, 0, -rate)
    let transverse_correction = -rate * spec.amplitude * h * h / 12.0;

    let mut frame = Su2::identity();
    for i in 0..steps {
        let t_mid = (i as f64 + 0.5) * h;
        let detuning = offset - spec.frequency(t_mid);
        let step = Su2::from_generator([spec.amplitude, transverse_correction, detuning], h);
        frame = step * frame;
    }
    Ok(z_rotation(spec.phase(spec.duration)) * frame)
}

/// `−z` component of the Bloch vector after `u` acts on `+z`; 1 is a perfect
/// inversion.
pub fn inversion_efficiency(u: &Su2) -> f64 {
    -u.apply(&Spinor::up()).to_bloch().z
}

/// `intercept + slope·ω`, in radians.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearAngle {
    pub intercept: f64,
    pub slope: f64,
}

impl LinearAngle {
    pub fn constant(angle: f64) -> Self {
        Self {
            intercept: angle,
            slope: 0.0,
        }
    }

    pub fn at(&self, offset: f64) -> f64 {
        self.intercept + self.slope * offset
    }
}

/// Ideal inversion with offset-dependent outer Euler angles.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IdealInversionSpec {
    pub alpha: LinearAngle,
    pub beta: LinearAngle,
}

pub fn ideal_inversion(spec: &IdealInversionSpec, offset: f64) -> Su2 {
    z_rotation(spec.alpha.at(offset)) * x_rotation(PI) * z_rotation(spec.beta.at(offset))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Inversion {
    Chirp(ChirpSpec),
    Ideal(IdealInversionSpec),
}

impl Inversion {
    pub fn propagator(&self, offset: f64, max_phase_step: f64) -> Result<Su2> {
        match self {
            Inversion::Chirp(spec) => chirp_propagator(spec, offset, max_phase_step),
            Inversion::Ideal(spec) => Ok(ideal_inversion(spec, offset)),
        }
    }
}

/// Inversion, free delay, the same inversion again.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleSweepBlock {
    pub inversion: Inversion,
    pub delay: f64,
}

impl DoubleSweepBlock {
    pub fn new(inversion: Inversion, delay: f64) -> Result<Self> {
        finite("delay", delay)?;
        if delay < 0.0 {
            return Err(Error::InvalidSweep(format!("negative delay {delay}")));
        }
        Ok(Self { inversion, delay })
    }

    /// The block as emitted segments. Ideal inversions have no waveform and
    /// yield `None`.
    pub fn segments(&self) -> Option<[Segment; 3]> {
        match self.inversion {
            Inversion::Chirp(spec) => Some([
                Segment::Chirp(spec),
                Segment::Delay { duration: self.delay },
                Segment::Chirp(spec),
            ]),
            Inversion::Ideal(_) => None,
        }
    }
}

pub fn double_sweep(block: &DoubleSweepBlock, offset: f64, max_phase_step: f64) -> Result<Su2> {
    let inversion = block.inversion.propagator(offset, max_phase_step)?;
    Ok(inversion * z_rotation(offset * block.delay) * inversion)
}
