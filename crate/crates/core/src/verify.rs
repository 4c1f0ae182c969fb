//! Invariant suites with a machine-readable pass/fail report.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::composer::{excitation_sequence, nominal_amplitude, rotation_sequence};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::figures::{build_sequence, Family, Figure};
use crate::fourier::{coefficients, CoefficientSet, DesignParams};
use crate::simulator::{profile, Execution, InitialState, SweepMode};
use crate::su2::{distance_up_to_phase, z_rotation, Su2};
use crate::sweep::{
    chirp_propagator, double_sweep, inversion_efficiency, AdiabaticityReport, ChirpSpec, DoubleSweepBlock,
    IdealInversionSpec, Inversion, LinearAngle,
};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre integral of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(16);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|j| {
            let mid = a + (j as f64 + 0.5) * h;
            x.iter().zip(&w).map(|(xi, wi)| wi * f(mid + 0.5 * h * xi)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

/// Rectangle of height `θ` on `|x| ≤ π/N`, the target in `x = ωΔt`.
fn target(p: &DesignParams, x: f64) -> f64 {
    if x.abs() <= PI / p.slices as f64 {
        p.theta_target
    } else {
        0.0
    }
}

/// Integral over `[-π, π]`, split at the rectangle's edges.
fn integrate_period(p: &DesignParams, f: impl Fn(f64) -> f64 + Copy) -> f64 {
    let edge = PI / p.slices as f64;
    integrate(f, -PI, -edge, 64) + integrate(f, -edge, edge, 64) + integrate(f, edge, PI, 64)
}

/// Waveform coefficients from a numerical cosine transform of the target:
/// the series `2Δt Σ u_k cos(kx)` equals `a_0/2 + Σ a_k cos(kx)`.
pub fn quadrature_coefficients(p: &DesignParams) -> Vec<f64> {
    let dt = p.slice_duration();
    (0..=p.harmonics)
        .map(|k| {
            let a_k = integrate_period(p, |x| (k as f64 * x).cos() * target(p, x)) / PI;
            if k == 0 {
                a_k / (4.0 * dt)
            } else {
                a_k / (2.0 * dt)
            }
        })
        .collect()
}

/// `∫ (s(x) − target(x))² dx` over one period, `s` the truncated series.
pub fn fit_residual(c: &CoefficientSet, p: &DesignParams) -> f64 {
    let dt = p.slice_duration();
    let s = |x: f64| {
        2.0 * dt
            * c.values
                .iter()
                .enumerate()
                .map(|(k, u)| u * (k as f64 * x).cos())
                .sum::<f64>()
    };
    integrate_period(p, |x| (s(x) - target(p, x)).powi(2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: value < threshold,
            value,
            threshold,
            detail: detail.into(),
        }
    }

    fn at_least(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: value >= threshold,
            value,
            threshold,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRatio {
    pub name: String,
    pub chirp: ChirpSpec,
    pub report: AdiabaticityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
    pub adiabaticity: Vec<SweepRatio>,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Checked in place of the designed coefficients.
    pub coefficients: Option<CoefficientSet>,
    /// Also simulate the six broadband figure runs against their thresholds.
    pub profiles: bool,
    pub seed: u64,
    pub cases: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            coefficients: None,
            profiles: false,
            seed: 0x5eed,
            cases: 1000,
        }
    }
}

/// Largest distance between an ideal double sweep and `z_rotation(−ωτ)` over
/// random gauges, offsets in `[-1, 1]` and delays in `[0, 100]`.
pub fn refocusing_identity_error(seed: u64, cases: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let spec = IdealInversionSpec {
            alpha: LinearAngle {
                intercept: rng.gen_range(-PI..PI),
                slope: rng.gen_range(-5.0..5.0),
            },
            beta: LinearAngle {
                intercept: rng.gen_range(-PI..PI),
                slope: rng.gen_range(-5.0..5.0),
            },
        };
        let w = rng.gen_range(-1.0..=1.0);
        let tau = rng.gen_range(0.0..=100.0);
        let block = DoubleSweepBlock::new(Inversion::Ideal(spec), tau)?;
        let u = double_sweep(&block, w, 1.0)?;
        worst = worst.max(distance_up_to_phase(&u, &z_rotation(-w * tau)));
    }
    Ok(worst)
}

/// Largest Euler ZXZ round-trip distance over Haar-ish random unitaries.
pub fn euler_round_trip_error(seed: u64, cases: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n < 1e-3 {
            continue;
        }
        let u = Su2::from_cayley_klein(Complex64::new(q[0] / n, q[1] / n), Complex64::new(q[2] / n, q[3] / n))?;
        worst = worst.max(distance_up_to_phase(&u, &u.euler_zxz().to_su2()));
    }
    Ok(worst)
}

fn chirp_offsets(config: &RunConfig) -> Vec<f64> {
    let (lo, hi) = (config.grid_min, config.grid_max);
    (0..11).map(|i| lo + (hi - lo) * i as f64 / 10.0).collect()
}

/// Runs the invariant suites for `config`.
pub fn run_verify(config: &RunConfig, opts: &VerifyOptions) -> Result<VerifyReport> {
    config.validate()?;
    let p = config.design()?;
    let mut checks = Vec::new();

    let c = opts.coefficients.clone().unwrap_or_else(|| coefficients(&p));
    let oracle = quadrature_coefficients(&p);
    let fourier_err = if c.values.len() == oracle.len() {
        c.values
            .iter()
            .zip(&oracle)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    checks.push(Check::at_most(
        "fourier_oracle",
        fourier_err,
        1e-10,
        format!("max |u_k − quadrature| over k = 0..{}", p.harmonics),
    ));

    let residuals: Vec<f64> = (1..=p.harmonics)
        .map(|m| {
            let q = DesignParams { harmonics: m, ..p };
            fit_residual(&coefficients(&q), &q)
        })
        .collect();
    let worst_rise = residuals
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::at_most(
        "fit_residual_monotone",
        worst_rise,
        1e-12,
        "largest increase of the squared fit residual as M grows",
    ));

    checks.push(Check::at_most(
        "refocusing_identity",
        refocusing_identity_error(opts.seed, opts.cases)?,
        1e-9,
        format!("{} random gauges, offsets and delays", opts.cases),
    ));
    checks.push(Check::at_most(
        "euler_round_trip",
        euler_round_trip_error(opts.seed, opts.cases)?,
        1e-9,
        format!("{} random unitaries", opts.cases),
    ));

    let chirp = config.chirp()?;
    let mut halving: f64 = 0.0;
    let mut efficiency = f64::INFINITY;
    for w in chirp_offsets(config) {
        let coarse = chirp_propagator(&chirp, w, config.max_phase_step)?;
        let fine = chirp_propagator(&chirp, w, 0.5 * config.max_phase_step)?;
        halving = halving.max(distance_up_to_phase(&coarse, &fine));
        if w.abs() <= 1.0 {
            efficiency = efficiency.min(inversion_efficiency(&coarse));
        }
    }
    checks.push(Check::at_most(
        "chirp_step_halving",
        halving,
        1e-6,
        "propagator distance when max_phase_step is halved",
    ));
    checks.push(Check::at_least(
        "chirp_inversion_efficiency",
        efficiency,
        0.95,
        "min −z from +z over |ω| ≤ 1 on 11 offsets",
    ));

    let exc = excitation_sequence(&p, &chirp, config.refocus_t)?;
    let rot = rotation_sequence(&p, &chirp, config.refocus_t)?;
    let limit = nominal_amplitude(&p);
    checks.push(Check::at_most(
        "amplitude_limit",
        exc.peak_amplitude.max(rot.peak_amplitude) - limit,
        1e-9,
        format!("peak amplitude minus 1/(2n) = {limit}"),
    ));

    if opts.profiles {
        for figure in [
            Figure::Fig3a,
            Figure::Fig3b,
            Figure::Fig3c,
            Figure::Fig4a,
            Figure::Fig4b,
            Figure::Fig4c,
        ] {
            let fc = figure.config(config);
            let family = figure.family().unwrap_or(Family::Excitation);
            let seq = build_sequence(&fc, family)?;
            let prof = profile(
                &seq,
                &fc.grid()?,
                &fc.sweep_mode(),
                family.initial_state(),
                Execution::Parallel,
            )?;
            let worst = match family {
                Family::Rotation => prof.min_within(0.9, |r| r.z),
                _ => prof.min_within(0.9, |r| -r.y),
            };
            checks.push(Check::at_least(
                &format!("{}_profile", figure.name()),
                worst,
                0.8,
                format!("min over |ω| ≤ 0.9 of {}", seq.label),
            ));
        }
        let fc = Figure::Fig2Right.config(config);
        let seq = build_sequence(&fc, Family::Excitation)?;
        let prof = profile(
            &seq,
            &fc.grid()?,
            &SweepMode::ideal(),
            InitialState::PlusZ,
            Execution::Parallel,
        )?;
        checks.push(Check::at_least(
            "fig2_right_inner",
            prof.min_within(0.5, |r| -r.y),
            0.95,
            "ideal sweeps, min −y over |ω| ≤ 0.5",
        ));
        checks.push(Check::at_least(
            "fig2_right_full",
            prof.min_within(1.0, |r| -r.y),
            0.75,
            "ideal sweeps, min −y over |ω| ≤ 1",
        ));
    }

    let mut adiabaticity = vec![SweepRatio {
        name: "configured".into(),
        chirp,
        report: chirp.adiabaticity_report(),
    }];
    for figure in [
        Figure::Fig3a,
        Figure::Fig3b,
        Figure::Fig3c,
        Figure::Fig4a,
        Figure::Fig4b,
        Figure::Fig4c,
    ] {
        let spec = figure.config(config).chirp()?;
        adiabaticity.push(SweepRatio {
            name: figure.name().into(),
            chirp: spec,
            report: spec.adiabaticity_report(),
        });
    }

    Ok(VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
        adiabaticity,
    })
}
