use dsweep_core::composer::{excitation_sequence, rotation_sequence, RefocusPolicy};
use dsweep_core::fourier::{coefficients, waveform, DesignParams};
use dsweep_core::sequence::PulseSequence;
use dsweep_core::simulator::{excitation_profile, sequence_propagator, OffsetGrid, SweepMode};
use dsweep_core::su2::{distance_up_to_phase, Su2};
use dsweep_core::sweep::{double_sweep, ChirpSpec, DoubleSweepBlock, IdealInversionSpec, Inversion};

fn design(n: usize) -> DesignParams {
    DesignParams::new(20, 10, n).unwrap()
}

fn block(p: &DesignParams, w: f64) -> Su2 {
    let wave = waveform(&coefficients(p), p).unwrap();
    sequence_propagator(&wave, w, &SweepMode::ideal()).unwrap()
}

/// Operator product written right to left, rightmost acting first.
fn product(factors: &[Su2]) -> Su2 {
    factors.iter().fold(Su2::identity(), |acc, f| acc * *f)
}

#[test]
fn emitted_schedules_match_operator_products() {
    let ideal = Inversion::Ideal(IdealInversionSpec::default());
    for n in 1..=3 {
        let p = design(n);
        let t = p.waveform_duration();
        let sweep = ChirpSpec::standard(300.0, 0.5 / n as f64).unwrap();
        let exc = excitation_sequence(&p, &sweep, RefocusPolicy::Waveform).unwrap();
        let rot = rotation_sequence(&p, &sweep, RefocusPolicy::Waveform).unwrap();
        for w in [-0.8, 0.0, 0.35] {
            let u = block(&p, w);
            let d = |tau: f64| double_sweep(&DoubleSweepBlock::new(ideal, tau).unwrap(), w, 0.05).unwrap();
            let mut factors = vec![d(0.5 * t), u];
            for _ in 1..n {
                factors.push(d(t));
                factors.push(u);
            }
            let exc_expected = product(&factors);
            factors.push(d(0.5 * t));
            let rot_expected = product(&factors);
            let exc_got = sequence_propagator(&exc, w, &SweepMode::ideal()).unwrap();
            let rot_got = sequence_propagator(&rot, w, &SweepMode::ideal()).unwrap();
            assert!(distance_up_to_phase(&exc_got, &exc_expected) < 1e-12, "n={n} ω={w}");
            assert!(distance_up_to_phase(&rot_got, &rot_expected) < 1e-12, "n={n} ω={w}");
        }
    }
}

fn gap_to_ideal(p: &DesignParams, sweep: ChirpSpec, grid: &OffsetGrid) -> f64 {
    let seq = excitation_sequence(p, &sweep, RefocusPolicy::Waveform).unwrap();
    let ideal = excitation_profile(&seq, grid, &SweepMode::ideal()).unwrap();
    let real = excitation_profile(&seq, grid, &SweepMode::integrated(0.05)).unwrap();
    real.rows
        .iter()
        .zip(&ideal.rows)
        .map(|(a, b)| ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt())
        .fold(0.0, f64::max)
}

#[test]
fn integrated_profiles_approach_ideal_as_sweeps_slow() {
    // Range widens with duration so the tilt of the field at the sweep edges,
    // about A/f_end, vanishes along with the rate.
    let p = design(1);
    let grid = OffsetGrid::new(-1.0, 1.0, 21).unwrap();
    let gaps: Vec<f64> = [1.0, 2.0, 4.0]
        .iter()
        .map(|&k| {
            gap_to_ideal(
                &p,
                ChirpSpec::new(-5.0 * k, 5.0 * k, 300.0 * k * k, 0.5).unwrap(),
                &grid,
            )
        })
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    assert!(gaps[2] < 0.1, "{gaps:?}");
}

#[test]
fn fixed_range_sweeps_keep_an_edge_tilt_floor() {
    // With the range pinned at [-5, 5] slowing the sweep does not remove the
    // mismatch between +z and the initial effective field.
    let p = design(1);
    let grid = OffsetGrid::new(-1.0, 1.0, 21).unwrap();
    let gaps: Vec<f64> = [300.0, 1000.0, 3000.0]
        .iter()
        .map(|&d| gap_to_ideal(&p, ChirpSpec::standard(d, 0.5).unwrap(), &grid))
        .collect();
    assert!(gaps[1] < gaps[0], "{gaps:?}");
    assert!(gaps.iter().all(|g| *g > 0.2), "{gaps:?}");
}

#[test]
fn refined_grid_reproduces_shared_offsets_bitwise() {
    let p = design(2);
    let seq = excitation_sequence(&p, &ChirpSpec::standard(1000.0, 0.25).unwrap(), RefocusPolicy::Waveform).unwrap();
    let coarse = excitation_profile(
        &seq,
        &OffsetGrid::new(-1.0, 1.0, 11).unwrap(),
        &SweepMode::integrated(0.05),
    )
    .unwrap();
    let fine = excitation_profile(
        &seq,
        &OffsetGrid::new(-1.0, 1.0, 21).unwrap(),
        &SweepMode::integrated(0.05),
    )
    .unwrap();
    for (i, r) in coarse.rows.iter().enumerate() {
        assert_eq!(*r, fine.rows[2 * i]);
    }
}

#[test]
fn durations_add_under_concatenation() {
    let p = design(2);
    let sweep = ChirpSpec::standard(1000.0, 0.25).unwrap();
    let a = excitation_sequence(&p, &sweep, RefocusPolicy::TwoMPi).unwrap();
    let b = rotation_sequence(&p, &sweep, RefocusPolicy::Waveform).unwrap();
    let ab = a.then(&b);
    assert!((ab.total_duration() - a.total_duration() - b.total_duration()).abs() < 1e-9);
    let direct: f64 = a.segments.iter().chain(&b.segments).map(|s| s.duration()).sum();
    assert_eq!(ab.total_duration(), direct);
}

#[test]
fn composed_sequences_round_trip_through_json() {
    let p = design(3);
    let seq = rotation_sequence(
        &p,
        &ChirpSpec::standard(2400.0, 0.5 / 3.0).unwrap(),
        RefocusPolicy::TwoMPi,
    )
    .unwrap();
    let back = PulseSequence::from_json(&seq.to_json().unwrap()).unwrap();
    assert_eq!(back, seq);
}
