//! Offset-resolved propagation of pulse sequences.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::fourier::{series_value, waveform, CoefficientSet, DesignParams};
use crate::sequence::{PulseSequence, Segment, UnitScale};
use crate::su2::{distance_up_to_phase, prop_const, z_rotation, BlochVector, Spinor, Su2};
use crate::sweep::{chirp_propagator, ideal_inversion, ChirpSpec, IdealInversionSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl OffsetGrid {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        let grid = Self { min, max, points };
        grid.validate()?;
        Ok(grid)
    }

    /// 201 points over the normalized band.
    pub fn standard() -> Self {
        Self {
            min: -1.0,
            max: 1.0,
            points: 201,
        }
    }

    pub fn validate(&self) -> Result<()> {
        finite("grid min", self.min)?;
        finite("grid max", self.max)?;
        if self.points < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 points, got {}",
                self.points
            )));
        }
        if self.max <= self.min {
            return Err(Error::InvalidArgument(format!(
                "grid max {} must exceed min {}",
                self.max, self.min
            )));
        }
        Ok(())
    }

    /// The `i`-th offset. Depends only on `i/(points-1)`, so refining a grid
    /// reproduces shared offsets bit for bit.
    pub fn offset(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            return self.max;
        }
        let t = i as f64 / (self.points - 1) as f64;
        self.min + (self.max - self.min) * t
    }

    pub fn offsets(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.offset(i)).collect()
    }
}

/// How chirp segments are turned into propagators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SweepMode {
    /// Every chirp is replaced by an ideal inversion.
    IdealSweeps { inversion: IdealInversionSpec },
    /// Chirps are integrated with the given substep bound.
    IntegratedSweeps { max_phase_step: f64 },
}

impl SweepMode {
    pub fn ideal() -> Self {
        SweepMode::IdealSweeps {
            inversion: IdealInversionSpec::default(),
        }
    }

    pub fn integrated(max_phase_step: f64) -> Self {
        SweepMode::IntegratedSweeps { max_phase_step }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepMode::IdealSweeps { .. } => "ideal",
            SweepMode::IntegratedSweeps { .. } => "integrated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    PlusZ,
    PlusY,
}

impl InitialState {
    pub fn spinor(&self) -> Spinor {
        match self {
            InitialState::PlusZ => Spinor::up(),
            InitialState::PlusY => Spinor::plus_y(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// Time-ordered product of the segment propagators at one offset.
pub fn sequence_propagator(seq: &PulseSequence, offset: f64, mode: &SweepMode) -> Result<Su2> {
    let offset = finite("offset", offset)?;
    // Chirps within one sequence repeat; integrate each distinct one once.
    let mut chirps: Vec<(ChirpSpec, Su2)> = Vec::new();
    let mut total = Su2::identity();
    for seg in &seq.segments {
        let step = match seg {
            Segment::ConstantRf {
                amplitude,
                phase,
                duration,
            } => prop_const(offset, *amplitude, *phase, *duration)?,
            Segment::Delay { duration } => z_rotation(offset * duration),
            Segment::Chirp(spec) => match mode {
                SweepMode::IdealSweeps { inversion } => ideal_inversion(inversion, offset),
                SweepMode::IntegratedSweeps { max_phase_step } => match chirps.iter().find(|(s, _)| s == spec) {
                    Some((_, u)) => *u,
                    None => {
                        let u = chirp_propagator(spec, offset, *max_phase_step)?;
                        chirps.push((*spec, u));
                        u
                    }
                },
            },
        };
        total = step * total;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub offset: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ProfileRow {
    pub fn bloch(&self) -> BlochVector {
        BlochVector {
            x: self.x,
            y: self.y,
            z: self.z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMeta {
    pub label: String,
    pub initial_state: InitialState,
    pub mode: SweepMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetProfile {
    pub meta: ProfileMeta,
    pub rows: Vec<ProfileRow>,
}

impl OffsetProfile {
    /// Smallest value of `observable` over rows with `|offset| ≤ bound`.
    pub fn min_within(&self, bound: f64, observable: impl Fn(&ProfileRow) -> f64) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.offset.abs() <= bound + 1e-12)
            .map(observable)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv<W: Write>(&self, scale: &UnitScale, mut out: W) -> std::io::Result<()> {
        writeln!(out, "offset_norm,offset_khz,x,y,z")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.offset,
                scale.offset_khz(r.offset),
                r.x,
                r.y,
                r.z
            )?;
        }
        Ok(())
    }
}

pub fn profile(
    seq: &PulseSequence,
    grid: &OffsetGrid,
    mode: &SweepMode,
    initial: InitialState,
    execution: Execution,
) -> Result<OffsetProfile> {
    grid.validate()?;
    let start = initial.spinor();
    let row = |i: usize| -> Result<ProfileRow> {
        let offset = grid.offset(i);
        let b = sequence_propagator(seq, offset, mode)?.apply(&start).to_bloch();
        Ok(ProfileRow {
            offset,
            x: b.x,
            y: b.y,
            z: b.z,
        })
    };
    let rows = match execution {
        Execution::Serial => (0..grid.points).map(row).collect::<Result<Vec<_>>>()?,
        Execution::Parallel => (0..grid.points).into_par_iter().map(row).collect::<Result<Vec<_>>>()?,
    };
    Ok(OffsetProfile {
        meta: ProfileMeta {
            label: seq.label.clone(),
            initial_state: initial,
            mode: *mode,
        },
        rows,
    })
}

/// Profile from `+z`; read the excitation off `-y`.
pub fn excitation_profile(seq: &PulseSequence, grid: &OffsetGrid, mode: &SweepMode) -> Result<OffsetProfile> {
    profile(seq, grid, mode, InitialState::PlusZ, Execution::Parallel)
}

/// Profile from `+y`; read the rotation off `z`.
pub fn rotation_profile(seq: &PulseSequence, grid: &OffsetGrid, mode: &SweepMode) -> Result<OffsetProfile> {
    profile(seq, grid, mode, InitialState::PlusY, Execution::Parallel)
}

fn require_bare_waveform(seq: &PulseSequence) -> Result<()> {
    if seq.segments.iter().any(Segment::is_chirp) {
        return Err(Error::InvalidSequence(format!(
            "`{}` contains sweeps; expected a bare waveform",
            seq.label
        )));
    }
    if seq.total_duration() <= 0.0 {
        return Err(Error::InvalidSequence(format!("`{}` has zero duration", seq.label)));
    }
    Ok(())
}

/// Per-offset `1 − b·b̂`, where `b` is the Bloch vector reached from `+z` and
/// `b̂ = (sin(ωT/2), −cos(ωT/2), 0)` is the linearly dephased equator state
/// predicted for a waveform of length `T`.
pub fn dephased_state_deviations(seq: &PulseSequence, grid: &OffsetGrid) -> Result<Vec<(f64, f64)>> {
    require_bare_waveform(seq)?;
    grid.validate()?;
    let t = seq.total_duration();
    let mode = SweepMode::ideal();
    grid.offsets()
        .into_iter()
        .map(|w| {
            let b = sequence_propagator(seq, w, &mode)?.apply(&Spinor::up()).to_bloch();
            let (s, c) = (0.5 * w * t).sin_cos();
            let predicted = BlochVector { x: s, y: -c, z: 0.0 };
            Ok((w, 1.0 - b.dot(&predicted)))
        })
        .collect()
}

pub fn dephased_state_check(seq: &PulseSequence, grid: &OffsetGrid) -> Result<f64> {
    Ok(dephased_state_deviations(seq, grid)?
        .into_iter()
        .map(|(_, d)| d)
        .fold(0.0, f64::max))
}

/// First-order closed form of a symmetric x-phase waveform of length `T`:
/// `Rz(ωT) · exp(−iθ(cos(ωT/2)·Ix − sin(ωT/2)·Iy))`, with `θ` the cosine-series
/// flip angle at `ω`.
pub fn first_order_propagator(c: &CoefficientSet, p: &DesignParams, offset: f64) -> Su2 {
    let t = p.waveform_duration();
    let theta = series_value(c, p, offset);
    let (s, co) = (0.5 * offset * t).sin_cos();
    z_rotation(offset * t) * Su2::from_generator([co, -s, 0.0], theta)
}

/// Distance between the exact waveform propagator and its first-order closed
/// form, per offset.
pub fn approximation_error(c: &CoefficientSet, p: &DesignParams, grid: &OffsetGrid) -> Result<Vec<(f64, f64)>> {
    let seq = waveform(c, p)?;
    require_bare_waveform(&seq)?;
    grid.validate()?;
    let mode = SweepMode::ideal();
    grid.offsets()
        .into_iter()
        .map(|w| {
            let exact = sequence_propagator(&seq, w, &mode)?;
            Ok((w, distance_up_to_phase(&exact, &first_order_propagator(c, p, w))))
        })
        .collect()
}
