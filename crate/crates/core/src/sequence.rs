//! Time-ordered pulse schedules and their physical units.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::fourier::DesignParams;
use crate::sweep::ChirpSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    ConstantRf { amplitude: f64, phase: f64, duration: f64 },
    Chirp(ChirpSpec),
    Delay { duration: f64 },
}

impl Segment {
    pub fn duration(&self) -> f64 {
        match self {
            Segment::ConstantRf { duration, .. } | Segment::Delay { duration } => *duration,
            Segment::Chirp(spec) => spec.duration,
        }
    }

    /// rf amplitude; zero for delays.
    pub fn amplitude(&self) -> f64 {
        match self {
            Segment::ConstantRf { amplitude, .. } => *amplitude,
            Segment::Chirp(spec) => spec.amplitude,
            Segment::Delay { .. } => 0.0,
        }
    }

    pub fn is_chirp(&self) -> bool {
        matches!(self, Segment::Chirp(_))
    }

    fn validate(&self) -> Result<()> {
        match self {
            Segment::ConstantRf {
                amplitude,
                phase,
                duration,
            } => {
                finite("segment amplitude", *amplitude)?;
                finite("segment phase", *phase)?;
                finite("segment duration", *duration)?;
                if *amplitude < 0.0 || *duration < 0.0 {
                    return Err(Error::InvalidSequence(format!(
                        "negative amplitude or duration in {self:?}"
                    )));
                }
            }
            Segment::Chirp(spec) => spec.validate()?,
            Segment::Delay { duration } => {
                finite("delay duration", *duration)?;
                if *duration < 0.0 {
                    return Err(Error::InvalidSequence(format!("negative delay {duration}")));
                }
            }
        }
        Ok(())
    }
}

/// Segments in emission order: the first element acts first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub label: String,
    pub design: Option<DesignParams>,
    pub peak_amplitude: f64,
    pub segments: Vec<Segment>,
}

impl PulseSequence {
    pub fn new(label: impl Into<String>, design: Option<DesignParams>, segments: Vec<Segment>) -> Result<Self> {
        for s in &segments {
            s.validate()?;
        }
        let peak_amplitude = segments.iter().map(Segment::amplitude).fold(0.0, f64::max);
        Ok(Self {
            label: label.into(),
            design,
            peak_amplitude,
            segments,
        })
    }

    pub fn empty(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            design: None,
            peak_amplitude: 0.0,
            segments: Vec::new(),
        }
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    pub fn physical_duration_ms(&self, scale: &UnitScale) -> f64 {
        self.total_duration() * scale.seconds_per_unit() * 1e3
    }

    pub fn chirp_count(&self) -> usize {
        self.segments.iter().filter(|s| s.is_chirp()).count()
    }

    /// `self` followed in time by `later`.
    pub fn then(&self, later: &PulseSequence) -> PulseSequence {
        let mut segments = self.segments.clone();
        segments.extend_from_slice(&later.segments);
        PulseSequence {
            label: format!("{}+{}", self.label, later.label),
            design: self.design.or(later.design),
            peak_amplitude: self.peak_amplitude.max(later.peak_amplitude),
            segments,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Parses and re-validates a sequence manifest.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: PulseSequence = serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        let rebuilt = PulseSequence::new(raw.label.clone(), raw.design, raw.segments.clone())?;
        if rebuilt.peak_amplitude != raw.peak_amplitude {
            return Err(Error::InvalidSequence(format!(
                "peak_amplitude {} does not match segments ({})",
                raw.peak_amplitude, rebuilt.peak_amplitude
            )));
        }
        Ok(raw)
    }

    /// Samples amplitude and phase at the midpoint of each `dwell` interval.
    pub fn amplitude_phase_points(&self, dwell: f64) -> Result<AmplitudePhasePoints> {
        finite("dwell", dwell)?;
        if dwell <= 0.0 {
            return Err(Error::InvalidArgument(format!("dwell must be positive, got {dwell}")));
        }
        let total = self.total_duration();
        let count = (total / dwell).ceil() as usize;
        let mut points = Vec::with_capacity(count);
        let mut seg_iter = self.segments.iter();
        let mut current = seg_iter.next();
        let mut seg_start = 0.0;
        for i in 0..count {
            let t = (i as f64 + 0.5) * dwell;
            while let Some(seg) = current {
                if t < seg_start + seg.duration() {
                    break;
                }
                seg_start += seg.duration();
                current = seg_iter.next();
            }
            let point = match current {
                Some(Segment::ConstantRf { amplitude, phase, .. }) => (*amplitude, *phase),
                Some(Segment::Chirp(spec)) => (spec.amplitude, spec.phase(t - seg_start).rem_euclid(2.0 * PI)),
                Some(Segment::Delay { .. }) | None => (0.0, 0.0),
            };
            points.push(point);
        }
        Ok(AmplitudePhasePoints { dwell, points })
    }
}

/// Uniformly sampled `(amplitude, phase)` pairs for export.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudePhasePoints {
    pub dwell: f64,
    pub points: Vec<(f64, f64)>,
}

impl AmplitudePhasePoints {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# points: {}", self.points.len());
        let _ = writeln!(out, "# dwell: {}", self.dwell);
        let _ = writeln!(out, "# amplitude phase_rad");
        for (a, p) in &self.points {
            let _ = writeln!(out, "{a} {p}");
        }
        out
    }
}

/// Anchors the normalized units to hardware: `peak_amplitude` corresponds to
/// an rf amplitude of `peak_khz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitScale {
    pub peak_khz: f64,
    pub peak_amplitude: f64,
}

impl UnitScale {
    pub fn new(peak_khz: f64, peak_amplitude: f64) -> Result<Self> {
        finite("peak_khz", peak_khz)?;
        finite("peak_amplitude", peak_amplitude)?;
        if peak_khz <= 0.0 || peak_amplitude <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "unit scale needs positive peak_khz and peak_amplitude, got {peak_khz}, {peak_amplitude}"
            )));
        }
        Ok(Self {
            peak_khz,
            peak_amplitude,
        })
    }

    /// kHz per normalized unit of angular frequency.
    pub fn khz_per_unit(&self) -> f64 {
        self.peak_khz / self.peak_amplitude
    }

    pub fn seconds_per_unit(&self) -> f64 {
        1.0 / (2.0 * PI * 1e3 * self.khz_per_unit())
    }

    pub fn offset_khz(&self, offset: f64) -> f64 {
        offset * self.khz_per_unit()
    }

    /// The normalized band `[-1, 1]` in kHz.
    pub fn bandwidth_physical(&self) -> (f64, f64) {
        let edge = self.khz_per_unit();
        (-edge, edge)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chirp(d: f64) -> Segment {
        Segment::Chirp(ChirpSpec::standard(d, 0.5).unwrap())
    }

    #[test]
    fn peak_and_duration_bookkeeping() {
        let s = PulseSequence::new(
            "t",
            None,
            vec![
                Segment::ConstantRf {
                    amplitude: 0.3,
                    phase: 0.0,
                    duration: 2.0,
                },
                chirp(300.0),
                Segment::Delay { duration: 5.0 },
            ],
        )
        .unwrap();
        assert_eq!(s.peak_amplitude, 0.5);
        assert_eq!(s.total_duration(), 307.0);
        assert_eq!(s.chirp_count(), 1);
    }

    #[test]
    fn rejects_invalid_segments() {
        assert!(PulseSequence::new("t", None, vec![Segment::Delay { duration: -1.0 }]).is_err());
        assert!(PulseSequence::new(
            "t",
            None,
            vec![Segment::ConstantRf {
                amplitude: f64::NAN,
                phase: 0.0,
                duration: 1.0
            }]
        )
        .is_err());
    }

    #[test]
    fn two_reference_chirps_in_milliseconds() {
        let s = PulseSequence::new("t", None, vec![chirp(300.0), chirp(300.0)]).unwrap();
        let ms = s.physical_duration_ms(&UnitScale::new(10.0, 0.5).unwrap());
        assert!((ms - 600.0 / (2.0 * PI * 20_000.0) * 1e3).abs() < 1e-12);
        assert!((ms - 4.7746).abs() < 1e-4);
    }

    #[test]
    fn zero_length_delay_is_zero_ms() {
        let s = PulseSequence::new("t", None, vec![Segment::Delay { duration: 0.0 }]).unwrap();
        assert_eq!(s.physical_duration_ms(&UnitScale::new(10.0, 0.5).unwrap()), 0.0);
    }

    #[test]
    fn bandwidths() {
        for (a, edge) in [(0.5, 20.0), (0.25, 40.0), (1.0 / 6.0, 60.0)] {
            let (lo, hi) = UnitScale::new(10.0, a).unwrap().bandwidth_physical();
            assert!((hi - edge).abs() < 1e-9 && (lo + edge).abs() < 1e-9);
        }
        assert!(UnitScale::new(0.0, 0.5).is_err());
    }

    #[test]
    fn concatenation_adds_durations() {
        let a = PulseSequence::new("a", None, vec![chirp(10.0)]).unwrap();
        let b = PulseSequence::new("b", None, vec![Segment::Delay { duration: 4.0 }]).unwrap();
        let ab = a.then(&b);
        assert_eq!(ab.total_duration(), a.total_duration() + b.total_duration());
        assert_eq!(ab.segments.len(), 2);
        assert_eq!(ab.peak_amplitude, 0.5);
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let s = PulseSequence::new(
            "rt",
            Some(DesignParams::new(20, 10, 3).unwrap()),
            vec![
                Segment::ConstantRf {
                    amplitude: 0.1 / 3.0,
                    phase: 0.1,
                    duration: PI / 20.0,
                },
                chirp(2000.0 / 3.0),
                Segment::Delay {
                    duration: 11.0 * PI / 20.0,
                },
            ],
        )
        .unwrap();
        let back = PulseSequence::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(s.to_json().unwrap().contains("\"kind\": \"chirp\""));
    }

    #[test]
    fn json_with_inconsistent_peak_is_rejected() {
        let s = PulseSequence::new("x", None, vec![chirp(10.0)]).unwrap();
        let text = s
            .to_json()
            .unwrap()
            .replace("\"peak_amplitude\": 0.5", "\"peak_amplitude\": 0.7");
        assert!(PulseSequence::from_json(&text).is_err());
    }

    #[test]
    fn point_list_samples_segments() {
        let s = PulseSequence::new(
            "p",
            None,
            vec![
                Segment::ConstantRf {
                    amplitude: 0.25,
                    phase: 0.0,
                    duration: 1.0,
                },
                Segment::Delay { duration: 1.0 },
            ],
        )
        .unwrap();
        let pts = s.amplitude_phase_points(0.5).unwrap();
        assert_eq!(pts.points, vec![(0.25, 0.0), (0.25, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let text = pts.to_text();
        assert!(text.starts_with("# points: 4\n# dwell: 0.5\n"));
        assert!(s.amplitude_phase_points(0.0).is_err());
    }
}
