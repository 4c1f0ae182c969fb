//! Symmetric Fourier design of x-phase excitation waveforms.
//!
//! The waveform is a train of `2M + 2` constant x-phase slices of length
//! `Δt = π/N` with amplitudes `(u_M, …, u_1, u_0, u_0, u_1, …, u_M)`. To first
//! order its flip angle at offset `ω` is the cosine series
//! `2Δt Σ_k u_k cos(kωΔt)`, and the coefficients are chosen so that this
//! series approximates a rectangle of height `θ` on `|ωΔt| ≤ π/N`, i.e. on the
//! normalized band `ω ∈ [-1, 1]`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::{PulseSequence, Segment};

/// Design inputs: `slices` sets `Δt = π/slices`, `harmonics` is the cutoff
/// `M`, and `blocks` is the number of reduced-angle blocks `n`, each with
/// flip-angle target `π/(2n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    pub slices: usize,
    pub harmonics: usize,
    pub blocks: usize,
    pub theta_target: f64,
}

impl DesignParams {
    pub fn new(slices: usize, harmonics: usize, blocks: usize) -> Result<Self> {
        let p = Self {
            slices,
            harmonics,
            blocks,
            theta_target: if blocks > 0 {
                FRAC_PI_2 / blocks as f64
            } else {
                f64::NAN
            },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.slices == 0 {
            return Err(Error::InvalidDesign("slices (N) must be positive".into()));
        }
        if self.harmonics == 0 {
            return Err(Error::InvalidDesign("harmonics (M) must be positive".into()));
        }
        if self.harmonics > self.slices {
            return Err(Error::InvalidDesign(format!(
                "harmonics M = {} exceeds slices N = {}",
                self.harmonics, self.slices
            )));
        }
        if self.blocks == 0 {
            return Err(Error::InvalidDesign("blocks (n) must be positive".into()));
        }
        let expected = FRAC_PI_2 / self.blocks as f64;
        if !self.theta_target.is_finite() || (self.theta_target - expected).abs() > 1e-12 {
            return Err(Error::InvalidDesign(format!(
                "theta_target {} is not pi/(2n) = {expected} for n = {}",
                self.theta_target, self.blocks
            )));
        }
        Ok(())
    }

    /// Slice length `Δt = π/N`.
    pub fn slice_duration(&self) -> f64 {
        PI / self.slices as f64
    }

    /// Length of the emitted waveform, `(2M + 2)·Δt`.
    pub fn waveform_duration(&self) -> f64 {
        (2 * self.harmonics + 2) as f64 * self.slice_duration()
    }

    /// Ratio of the flip-angle target to π/2.
    fn scale(&self) -> f64 {
        self.theta_target / FRAC_PI_2
    }
}

/// Coefficients `u_0 … u_M`; `u_{-k} = u_k` is implied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub values: Vec<f64>,
}

impl CoefficientSet {
    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn coefficients(p: &DesignParams) -> CoefficientSet {
    let n = p.slices as f64;
    let scale = p.scale();
    let values = (0..=p.harmonics)
        .map(|k| {
            if k == 0 {
                0.25 * scale
            } else {
                let arg = k as f64 * PI / n;
                scale * arg.sin() / (2.0 * arg)
            }
        })
        .collect();
    CoefficientSet { values }
}

/// The x-phase slice train for `c`.
pub fn waveform(c: &CoefficientSet, p: &DesignParams) -> Result<PulseSequence> {
    if c.values.len() != p.harmonics + 1 {
        return Err(Error::InvalidDesign(format!(
            "{} coefficients for M = {}",
            c.values.len(),
            p.harmonics
        )));
    }
    let dt = p.slice_duration();
    let slice = |amplitude: f64| Segment::ConstantRf {
        amplitude,
        phase: 0.0,
        duration: dt,
    };
    let segments = c
        .values
        .iter()
        .rev()
        .chain(c.values.iter())
        .map(|&u| slice(u))
        .collect();
    PulseSequence::new(
        format!("waveform_n{}_N{}_M{}", p.blocks, p.slices, p.harmonics),
        Some(*p),
        segments,
    )
}

/// First-order flip angle `2Δt Σ_k u_k cos(k·ω·Δt)` at normalized `offset`.
pub fn series_value(c: &CoefficientSet, p: &DesignParams, offset: f64) -> f64 {
    let dt = p.slice_duration();
    let x = offset * dt;
    2.0 * dt
        * c.values
            .iter()
            .enumerate()
            .map(|(k, u)| u * (k as f64 * x).cos())
            .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignRow {
    pub offset: f64,
    pub series_value_rad: f64,
    pub deviation_rad: f64,
}

/// Series value and its deviation `theta_target − value` at each offset.
pub fn design_report(c: &CoefficientSet, p: &DesignParams, offsets: &[f64]) -> Vec<DesignRow> {
    offsets
        .iter()
        .map(|&offset| {
            let value = series_value(c, p, offset);
            DesignRow {
                offset,
                series_value_rad: value,
                deviation_rad: p.theta_target - value,
            }
        })
        .collect()
}

pub fn write_design_csv<W: Write>(rows: &[DesignRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "offset,series_value_rad,deviation_rad")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.offset, r.series_value_rad, r.deviation_rad)?;
    }
    Ok(())
}
