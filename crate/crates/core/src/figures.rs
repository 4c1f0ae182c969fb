//! Named reproduction runs and the file outputs shared with ad hoc runs.
//!
//! Each run writes `<stem>_<mode>.csv` plus `<stem>_<mode>.manifest.json`;
//! the manifest embeds the config text that regenerates the CSV.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::composer::{excitation_sequence, hard_pulse_sequence, rotation_sequence};
use crate::config::{AmplitudePolicy, ModeKind, RunConfig};
use crate::error::{Error, Result};
use crate::fourier::{coefficients, design_report, write_design_csv, CoefficientSet, DesignParams};
use crate::sequence::{PulseSequence, UnitScale};
use crate::simulator::{profile, Execution, InitialState, OffsetProfile, SweepMode};
use crate::sweep::{AdiabaticityReport, ChirpSpec};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Excitation,
    Rotation,
    Hard,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Excitation => "excitation",
            Family::Rotation => "rotation",
            Family::Hard => "hard",
        }
    }

    pub fn initial_state(&self) -> InitialState {
        match self {
            Family::Rotation => InitialState::PlusY,
            Family::Excitation | Family::Hard => InitialState::PlusZ,
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "excitation" => Ok(Family::Excitation),
            "rotation" => Ok(Family::Rotation),
            "hard" => Ok(Family::Hard),
            _ => Err(Error::InvalidArgument(format!(
                "unknown family `{s}`; expected excitation, rotation or hard"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2Left,
    Fig2Right,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig4a,
    Fig4b,
    Fig4c,
    Hard90,
}

impl Figure {
    pub const ALL: [Figure; 9] = [
        Figure::Fig2Left,
        Figure::Fig2Right,
        Figure::Fig3a,
        Figure::Fig3b,
        Figure::Fig3c,
        Figure::Fig4a,
        Figure::Fig4b,
        Figure::Fig4c,
        Figure::Hard90,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Figure::Fig2Left => "fig2_left",
            Figure::Fig2Right => "fig2_right",
            Figure::Fig3a => "fig3a",
            Figure::Fig3b => "fig3b",
            Figure::Fig3c => "fig3c",
            Figure::Fig4a => "fig4a",
            Figure::Fig4b => "fig4b",
            Figure::Fig4c => "fig4c",
            Figure::Hard90 => "hard90",
        }
    }

    /// `None` for the design-only panel.
    pub fn family(&self) -> Option<Family> {
        match self {
            Figure::Fig2Left => None,
            Figure::Fig2Right | Figure::Fig3a | Figure::Fig3b | Figure::Fig3c => Some(Family::Excitation),
            Figure::Fig4a | Figure::Fig4b | Figure::Fig4c => Some(Family::Rotation),
            Figure::Hard90 => Some(Family::Hard),
        }
    }

    /// `(blocks, sweep duration)`.
    fn schedule(&self) -> (usize, f64) {
        match self {
            Figure::Fig2Left | Figure::Fig2Right | Figure::Fig3a | Figure::Hard90 => (1, 300.0),
            Figure::Fig3b => (2, 1000.0),
            Figure::Fig3c => (3, 2000.0),
            Figure::Fig4a => (1, 1000.0),
            Figure::Fig4b => (2, 1200.0),
            Figure::Fig4c => (3, 2400.0),
        }
    }

    /// The figure's parameters layered over `base`. Design, sweep and mode
    /// are fixed by the figure; grid, step, refocus policy, scale and output
    /// location come from `base`.
    pub fn config(&self, base: &RunConfig) -> RunConfig {
        let (blocks, duration) = self.schedule();
        let mut c = base.clone();
        c.slices = 20;
        c.harmonics = 10;
        c.blocks = blocks;
        c.sweep_start = -5.0;
        c.sweep_end = 5.0;
        c.sweep_duration = duration;
        c.sweep_amplitude = AmplitudePolicy::Nominal;
        c.mode = match self {
            Figure::Fig2Left | Figure::Fig2Right => ModeKind::Ideal,
            _ => ModeKind::Integrated,
        };
        if *self == Figure::Hard90 {
            c.hard_amplitude = 0.5;
            c.hard_flip_deg = 90.0;
        }
        c
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFigure {
                name: s.to_string(),
                valid: Figure::ALL.iter().map(|f| f.name()).collect::<Vec<_>>().join(", "),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub name: String,
    pub label: String,
    pub family: Option<Family>,
    /// Config file text that regenerates this run.
    pub config_text: String,
    pub config: RunConfig,
    pub design: Option<DesignParams>,
    pub chirp: Option<ChirpSpec>,
    pub adiabaticity: Option<AdiabaticityReport>,
    pub unit_scale: UnitScale,
    pub bandwidth_khz: (f64, f64),
    pub mode: Option<SweepMode>,
    pub max_phase_step: f64,
    pub refocus_policy: Option<String>,
    pub refocus_window: Option<f64>,
    pub initial_state: Option<InitialState>,
    pub segment_count: usize,
    pub chirp_segments: usize,
    pub total_duration_units: f64,
    pub physical_duration_ms: f64,
    pub physical_duration_us: f64,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub manifest: Manifest,
    pub files: Vec<PathBuf>,
    pub profile: Option<OffsetProfile>,
}

fn io_err(path: &Path, e: impl fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Error::Serialization(e.to_string()))
}

/// The sequence a profile run simulates.
pub fn build_sequence(config: &RunConfig, family: Family) -> Result<PulseSequence> {
    config.validate()?;
    match family {
        Family::Hard => hard_pulse_sequence(config.hard_amplitude, config.hard_flip()),
        Family::Excitation => excitation_sequence(&config.design()?, &config.chirp()?, config.refocus_t),
        Family::Rotation => rotation_sequence(&config.design()?, &config.chirp()?, config.refocus_t),
    }
}

/// Simulates one family and writes its CSV and manifest under `stem`
/// (the sequence label when `None`).
pub fn run_profile(config: &RunConfig, family: Family, stem: Option<&str>) -> Result<RunOutput> {
    let seq = build_sequence(config, family)?;
    let grid = config.grid()?;
    let mode = config.sweep_mode();
    let execution = if config.parallel {
        Execution::Parallel
    } else {
        Execution::Serial
    };
    let prof = profile(&seq, &grid, &mode, family.initial_state(), execution)?;
    let scale = config.unit_scale(seq.peak_amplitude)?;

    let stem = format!("{}_{}", stem.unwrap_or(&seq.label), mode.name());
    let csv_path = config.output_dir.join(format!("{stem}.csv"));
    let manifest_path = config.output_dir.join(format!("{stem}.manifest.json"));

    let mut csv = Vec::new();
    prof.write_csv(&scale, &mut csv).map_err(|e| io_err(&csv_path, e))?;

    let (chirp, design, window) = match family {
        Family::Hard => (None, None, None),
        _ => {
            let p = config.design()?;
            (Some(config.chirp()?), Some(p), Some(config.refocus_t.window(&p)?))
        }
    };
    let ms = seq.physical_duration_ms(&scale);
    let manifest = Manifest {
        tool_version: TOOL_VERSION.to_string(),
        name: stem.clone(),
        label: seq.label.clone(),
        family: Some(family),
        config_text: config.to_text(),
        config: config.clone(),
        design,
        chirp,
        adiabaticity: chirp.map(|c| c.adiabaticity_report()),
        unit_scale: scale,
        bandwidth_khz: scale.bandwidth_physical(),
        mode: Some(mode),
        max_phase_step: config.max_phase_step,
        refocus_policy: window.map(|_| config.refocus_t.name()),
        refocus_window: window,
        initial_state: Some(family.initial_state()),
        segment_count: seq.segments.len(),
        chirp_segments: seq.chirp_count(),
        total_duration_units: seq.total_duration(),
        physical_duration_ms: ms,
        physical_duration_us: ms * 1e3,
        outputs: vec![format!("{stem}.csv")],
    };
    write_file(&csv_path, &csv)?;
    write_file(&manifest_path, to_json(&manifest)?.as_bytes())?;
    Ok(RunOutput {
        manifest,
        files: vec![csv_path, manifest_path],
        profile: Some(prof),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFile {
    pub design: DesignParams,
    pub coefficients: CoefficientSet,
    pub peak_amplitude: f64,
    pub slice_duration: f64,
    pub waveform_duration: f64,
}

/// Writes the coefficient JSON and the series-value table over the grid.
pub fn run_design(config: &RunConfig, stem: Option<&str>) -> Result<RunOutput> {
    config.validate()?;
    let p = config.design()?;
    let c = coefficients(&p);
    let rows = design_report(&c, &p, &config.grid()?.offsets());
    let stem = format!(
        "{}_design",
        stem.map(str::to_string)
            .unwrap_or_else(|| format!("design_n{}_N{}_M{}", p.blocks, p.slices, p.harmonics))
    );
    let csv_path = config.output_dir.join(format!("{stem}.csv"));
    let coef_path = config.output_dir.join(format!("{stem}.coefficients.json"));
    let manifest_path = config.output_dir.join(format!("{stem}.manifest.json"));

    let mut csv = Vec::new();
    write_design_csv(&rows, &mut csv).map_err(|e| io_err(&csv_path, e))?;
    let file = CoefficientFile {
        design: p,
        peak_amplitude: c.peak(),
        coefficients: c,
        slice_duration: p.slice_duration(),
        waveform_duration: p.waveform_duration(),
    };
    let scale = config.unit_scale(file.peak_amplitude)?;
    let manifest = Manifest {
        tool_version: TOOL_VERSION.to_string(),
        name: stem.clone(),
        label: format!("design_n{}_N{}_M{}", p.blocks, p.slices, p.harmonics),
        family: None,
        config_text: config.to_text(),
        config: config.clone(),
        design: Some(p),
        chirp: None,
        adiabaticity: None,
        unit_scale: scale,
        bandwidth_khz: scale.bandwidth_physical(),
        mode: None,
        max_phase_step: config.max_phase_step,
        refocus_policy: None,
        refocus_window: None,
        initial_state: None,
        segment_count: 2 * p.harmonics + 2,
        chirp_segments: 0,
        total_duration_units: p.waveform_duration(),
        physical_duration_ms: p.waveform_duration() * scale.seconds_per_unit() * 1e3,
        physical_duration_us: p.waveform_duration() * scale.seconds_per_unit() * 1e6,
        outputs: vec![format!("{stem}.csv"), format!("{stem}.coefficients.json")],
    };
    write_file(&csv_path, &csv)?;
    write_file(&coef_path, to_json(&file)?.as_bytes())?;
    write_file(&manifest_path, to_json(&manifest)?.as_bytes())?;
    Ok(RunOutput {
        manifest,
        files: vec![csv_path, coef_path, manifest_path],
        profile: None,
    })
}

/// Runs a named figure with its parameters layered over `base`.
pub fn figure_run(figure: Figure, base: &RunConfig) -> Result<RunOutput> {
    let config = figure.config(base);
    match figure.family() {
        None => run_design(&config, Some(figure.name())),
        Some(family) => run_profile(&config, family, Some(figure.name())),
    }
}
