//! Run configuration: flat `key = value` text, layered over defaults.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::composer::{nominal_amplitude, RefocusPolicy};
use crate::error::{Error, Result};
use crate::fourier::DesignParams;
use crate::sequence::UnitScale;
use crate::simulator::{OffsetGrid, SweepMode};
use crate::sweep::{ChirpSpec, IdealInversionSpec, LinearAngle, DEFAULT_MAX_PHASE_STEP, DEFAULT_SWEEP_RANGE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudePolicy {
    /// `1/(2n)`, the waveform's amplitude limit.
    Nominal,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Ideal,
    Integrated,
}

pub const KEYS: &[&str] = &[
    "slices",
    "harmonics",
    "blocks",
    "sweep_start",
    "sweep_end",
    "sweep_duration",
    "sweep_amplitude",
    "refocus_T",
    "peak_khz",
    "grid_min",
    "grid_max",
    "grid_points",
    "mode",
    "max_phase_step",
    "ideal_alpha0",
    "ideal_alpha1",
    "ideal_beta0",
    "ideal_beta1",
    "hard_amplitude",
    "hard_flip_deg",
    "parallel",
    "output_dir",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub slices: usize,
    pub harmonics: usize,
    pub blocks: usize,
    pub sweep_start: f64,
    pub sweep_end: f64,
    pub sweep_duration: f64,
    pub sweep_amplitude: AmplitudePolicy,
    pub refocus_t: RefocusPolicy,
    pub peak_khz: f64,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,
    pub mode: ModeKind,
    pub max_phase_step: f64,
    pub ideal_alpha0: f64,
    pub ideal_alpha1: f64,
    pub ideal_beta0: f64,
    pub ideal_beta1: f64,
    pub hard_amplitude: f64,
    pub hard_flip_deg: f64,
    /// Execution strategy only; results do not depend on it, so manifests omit it.
    #[serde(skip, default = "default_parallel")]
    pub parallel: bool,
    #[serde(skip, default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_parallel() -> bool {
    true
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            slices: 20,
            harmonics: 10,
            blocks: 1,
            sweep_start: DEFAULT_SWEEP_RANGE.0,
            sweep_end: DEFAULT_SWEEP_RANGE.1,
            sweep_duration: 300.0,
            sweep_amplitude: AmplitudePolicy::Nominal,
            refocus_t: RefocusPolicy::Waveform,
            peak_khz: 10.0,
            grid_min: -1.0,
            grid_max: 1.0,
            grid_points: 201,
            mode: ModeKind::Integrated,
            max_phase_step: DEFAULT_MAX_PHASE_STEP,
            ideal_alpha0: 0.0,
            ideal_alpha1: 0.0,
            ideal_beta0: 0.0,
            ideal_beta1: 0.0,
            hard_amplitude: 0.5,
            hard_flip_deg: 90.0,
            parallel: default_parallel(),
            output_dir: default_output_dir(),
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    let v: f64 = value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: expected a number, got `{value}`")))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("`{key}`: non-finite value `{value}`")));
    }
    Ok(v)
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: expected a non-negative integer, got `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("`{key}`: expected true or false, got `{value}`"))),
    }
}

impl RunConfig {
    /// Defaults overlaid with the contents of a config file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    /// Applies `key = value` lines; `#` starts a comment. A key may appear
    /// at most once.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut seen = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            if seen.contains(&key) {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
            seen.push(key);
            self.set(key, value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "slices" => self.slices = parse_usize(key, value)?,
            "harmonics" => self.harmonics = parse_usize(key, value)?,
            "blocks" => self.blocks = parse_usize(key, value)?,
            "sweep_start" => self.sweep_start = parse_f64(key, value)?,
            "sweep_end" => self.sweep_end = parse_f64(key, value)?,
            "sweep_duration" => self.sweep_duration = parse_f64(key, value)?,
            "sweep_amplitude" => {
                self.sweep_amplitude = match value {
                    "nominal" => AmplitudePolicy::Nominal,
                    v => AmplitudePolicy::Fixed(parse_f64(key, v)?),
                }
            }
            "refocus_T" => {
                self.refocus_t = match value {
                    "waveform" => RefocusPolicy::Waveform,
                    "two_m_pi" => RefocusPolicy::TwoMPi,
                    v => RefocusPolicy::Fixed(parse_f64(key, v)?),
                }
            }
            "peak_khz" => self.peak_khz = parse_f64(key, value)?,
            "grid_min" => self.grid_min = parse_f64(key, value)?,
            "grid_max" => self.grid_max = parse_f64(key, value)?,
            "grid_points" => self.grid_points = parse_usize(key, value)?,
            "mode" => {
                self.mode = match value {
                    "ideal" => ModeKind::Ideal,
                    "integrated" => ModeKind::Integrated,
                    v => {
                        return Err(Error::Config(format!(
                            "`mode`: expected ideal or integrated, got `{v}`"
                        )))
                    }
                }
            }
            "max_phase_step" => self.max_phase_step = parse_f64(key, value)?,
            "ideal_alpha0" => self.ideal_alpha0 = parse_f64(key, value)?,
            "ideal_alpha1" => self.ideal_alpha1 = parse_f64(key, value)?,
            "ideal_beta0" => self.ideal_beta0 = parse_f64(key, value)?,
            "ideal_beta1" => self.ideal_beta1 = parse_f64(key, value)?,
            "hard_amplitude" => self.hard_amplitude = parse_f64(key, value)?,
            "hard_flip_deg" => self.hard_flip_deg = parse_f64(key, value)?,
            "parallel" => self.parallel = parse_bool(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            _ => {
                return Err(Error::Config(format!(
                    "unknown key `{key}`; valid keys: {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Config file text that reproduces every result-affecting setting.
    pub fn to_text(&self) -> String {
        let amplitude = match self.sweep_amplitude {
            AmplitudePolicy::Nominal => "nominal".to_string(),
            AmplitudePolicy::Fixed(a) => a.to_string(),
        };
        let mode = match self.mode {
            ModeKind::Ideal => "ideal",
            ModeKind::Integrated => "integrated",
        };
        [
            ("slices", self.slices.to_string()),
            ("harmonics", self.harmonics.to_string()),
            ("blocks", self.blocks.to_string()),
            ("sweep_start", self.sweep_start.to_string()),
            ("sweep_end", self.sweep_end.to_string()),
            ("sweep_duration", self.sweep_duration.to_string()),
            ("sweep_amplitude", amplitude),
            ("refocus_T", self.refocus_t.name()),
            ("peak_khz", self.peak_khz.to_string()),
            ("grid_min", self.grid_min.to_string()),
            ("grid_max", self.grid_max.to_string()),
            ("grid_points", self.grid_points.to_string()),
            ("mode", mode.to_string()),
            ("max_phase_step", self.max_phase_step.to_string()),
            ("ideal_alpha0", self.ideal_alpha0.to_string()),
            ("ideal_alpha1", self.ideal_alpha1.to_string()),
            ("ideal_beta0", self.ideal_beta0.to_string()),
            ("ideal_beta1", self.ideal_beta1.to_string()),
            ("hard_amplitude", self.hard_amplitude.to_string()),
            ("hard_flip_deg", self.hard_flip_deg.to_string()),
        ]
        .iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect()
    }

    pub fn design(&self) -> Result<DesignParams> {
        DesignParams::new(self.slices, self.harmonics, self.blocks)
    }

    pub fn chirp(&self) -> Result<ChirpSpec> {
        let amplitude = match self.sweep_amplitude {
            AmplitudePolicy::Nominal => nominal_amplitude(&self.design()?),
            AmplitudePolicy::Fixed(a) => a,
        };
        ChirpSpec::new(self.sweep_start, self.sweep_end, self.sweep_duration, amplitude)
    }

    pub fn grid(&self) -> Result<OffsetGrid> {
        OffsetGrid::new(self.grid_min, self.grid_max, self.grid_points)
    }

    pub fn sweep_mode(&self) -> SweepMode {
        match self.mode {
            ModeKind::Ideal => SweepMode::IdealSweeps {
                inversion: IdealInversionSpec {
                    alpha: LinearAngle {
                        intercept: self.ideal_alpha0,
                        slope: self.ideal_alpha1,
                    },
                    beta: LinearAngle {
                        intercept: self.ideal_beta0,
                        slope: self.ideal_beta1,
                    },
                },
            },
            ModeKind::Integrated => SweepMode::integrated(self.max_phase_step),
        }
    }

    pub fn mode_name(&self) -> &'static str {
        self.sweep_mode().name()
    }

    pub fn hard_flip(&self) -> f64 {
        self.hard_flip_deg * PI / 180.0
    }

    pub fn unit_scale(&self, peak_amplitude: f64) -> Result<UnitScale> {
        UnitScale::new(self.peak_khz, peak_amplitude)
    }

    /// Checks every downstream precondition without building anything large.
    pub fn validate(&self) -> Result<()> {
        let p = self.design()?;
        self.chirp()?;
        self.grid()?;
        self.refocus_t.window(&p)?;
        if self.peak_khz.is_nan() || self.peak_khz <= 0.0 {
            return Err(Error::Config(format!(
                "peak_khz must be positive, got {}",
                self.peak_khz
            )));
        }
        if self.max_phase_step.is_nan() || self.max_phase_step <= 0.0 {
            return Err(Error::Config(format!(
                "max_phase_step must be positive, got {}",
                self.max_phase_step
            )));
        }
        if self.hard_amplitude.is_nan() || self.hard_amplitude <= 0.0 {
            return Err(Error::Config(format!(
                "hard_amplitude must be positive, got {}",
                self.hard_amplitude
            )));
        }
        if self.hard_flip_deg.is_nan() || self.hard_flip_deg < 0.0 {
            return Err(Error::Config(format!(
                "hard_flip_deg must be non-negative, got {}",
                self.hard_flip_deg
            )));
        }
        Ok(())
    }
}
