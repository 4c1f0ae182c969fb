//! Broadband excitation and x-rotation schedules.
//!
//! Writing `U` for a reduced-angle waveform block and `Δ(τ)` for a double sweep
//! with delay `τ`, the operator products (rightmost acts first) are
//!
//! ```text
//! excitation: Δ(T/2) · U · (Δ(T) · U)^(n-1)
//! rotation:   Δ(T/2) · U · (Δ(T) · U)^(n-1) · Δ(T/2)
//! ```
//!
//! and sequences are emitted in time order, i.e. read right to left.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::fourier::{coefficients, waveform, DesignParams};
use crate::sequence::{PulseSequence, Segment};
use crate::sweep::{ChirpSpec, DoubleSweepBlock, Inversion};

/// How the refocusing window `T` of each waveform block is chosen. Delays are
/// `T/2` and `T`; when `T` exceeds the waveform length the waveform is centred
/// in its window with free-evolution padding on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefocusPolicy {
    /// `T` is the waveform length `(2M + 2)·π/N`.
    Waveform,
    /// `T = 2Mπ`.
    TwoMPi,
    Fixed(f64),
}

impl RefocusPolicy {
    pub fn window(&self, p: &DesignParams) -> Result<f64> {
        let natural = p.waveform_duration();
        let t = match self {
            RefocusPolicy::Waveform => return Ok(natural),
            RefocusPolicy::TwoMPi => 2.0 * p.harmonics as f64 * PI,
            RefocusPolicy::Fixed(t) => finite("refocus_T", *t)?,
        };
        if t < natural {
            return Err(Error::InvalidDesign(format!(
                "refocus window {t} is shorter than the waveform ({natural})"
            )));
        }
        Ok(t)
    }

    pub fn name(&self) -> String {
        match self {
            RefocusPolicy::Waveform => "waveform".into(),
            RefocusPolicy::TwoMPi => "two_m_pi".into(),
            RefocusPolicy::Fixed(t) => format!("{t}"),
        }
    }
}

/// The sweep amplitude matching a design: `1/(2n)`.
pub fn nominal_amplitude(p: &DesignParams) -> f64 {
    0.5 / p.blocks as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Excitation,
    Rotation,
}

fn block_segments(p: &DesignParams, window: f64) -> Result<Vec<Segment>> {
    let wave = waveform(&coefficients(p), p)?;
    let pad = 0.5 * (window - wave.total_duration());
    let mut out = Vec::with_capacity(wave.segments.len() + 2);
    if pad > 0.0 {
        out.push(Segment::Delay { duration: pad });
    }
    out.extend(wave.segments);
    if pad > 0.0 {
        out.push(Segment::Delay { duration: pad });
    }
    Ok(out)
}

fn sweep_segments(sweep: &ChirpSpec, delay: f64) -> Result<[Segment; 3]> {
    DoubleSweepBlock::new(Inversion::Chirp(*sweep), delay)?
        .segments()
        .ok_or_else(|| Error::InvalidSequence("chirp block without segments".into()))
}

fn build(family: Family, p: &DesignParams, sweep: &ChirpSpec, policy: RefocusPolicy) -> Result<PulseSequence> {
    p.validate()?;
    sweep.validate()?;
    let window = policy.window(p)?;
    let block = block_segments(p, window)?;

    let mut segments = Vec::new();
    if family == Family::Rotation {
        segments.extend(sweep_segments(sweep, 0.5 * window)?);
    }
    segments.extend_from_slice(&block);
    for _ in 1..p.blocks {
        segments.extend(sweep_segments(sweep, window)?);
        segments.extend_from_slice(&block);
    }
    segments.extend(sweep_segments(sweep, 0.5 * window)?);

    let family_name = match family {
        Family::Excitation => "excitation",
        Family::Rotation => "rotation",
    };
    let label = format!(
        "{family_name}_n{}_N{}_M{}_sweep{}to{}_{}u_A{:.4}_T{}",
        p.blocks,
        p.slices,
        p.harmonics,
        sweep.f_start,
        sweep.f_end,
        sweep.duration,
        sweep.amplitude,
        policy.name()
    );
    PulseSequence::new(label, Some(*p), segments)
}

/// Broadband excitation from `+z` to `-y`.
pub fn excitation_sequence(p: &DesignParams, sweep: &ChirpSpec, policy: RefocusPolicy) -> Result<PulseSequence> {
    build(Family::Excitation, p, sweep, policy)
}

/// Broadband π/2 rotation about x: the excitation schedule preceded by one more
/// double sweep with delay `T/2`.
pub fn rotation_sequence(p: &DesignParams, sweep: &ChirpSpec, policy: RefocusPolicy) -> Result<PulseSequence> {
    build(Family::Rotation, p, sweep, policy)
}

/// A single x-phase rectangular pulse of flip angle `flip`.
pub fn hard_pulse_sequence(amplitude: f64, flip: f64) -> Result<PulseSequence> {
    finite("amplitude", amplitude)?;
    finite("flip", flip)?;
    if amplitude <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "hard pulse amplitude must be positive, got {amplitude}"
        )));
    }
    if flip < 0.0 {
        return Err(Error::InvalidArgument(format!("negative flip angle {flip}")));
    }
    PulseSequence::new(
        format!("hard_A{amplitude:.4}_flip{:.1}deg", flip.to_degrees()),
        None,
        vec![Segment::ConstantRf {
            amplitude,
            phase: 0.0,
            duration: flip / amplitude,
        }],
    )
}
