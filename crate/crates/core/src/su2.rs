//! Spin-1/2 states and SU(2) propagators.
//!
//! Spin operators are `I = σ/2`, evolution is `exp(-i H t)`, and the spinor
//! `(1, 0)` is the +z state. A propagator is stored in Cayley–Klein form
//!
//! ```text
//!     U = [[ a, -b* ],
//!          [ b,  a* ]]      |a|² + |b|² = 1
//! ```
//!
//! so the determinant is 1 by construction and products stay in SU(2).

use std::f64::consts::PI;
use std::ops::{Mul, Neg};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Sine/cosine of the half angle below which an Euler decomposition is
/// treated as degenerate (pure z rotation, or π rotation about a transverse axis).
const EULER_DEGENERATE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spinor {
    c0: Complex64,
    c1: Complex64,
}

impl Spinor {
    /// Builds a spinor from two amplitudes, normalizing them.
    pub fn new(c0: Complex64, c1: Complex64) -> Result<Self> {
        let norm = (c0.norm_sqr() + c1.norm_sqr()).sqrt();
        if !norm.is_finite() {
            return Err(Error::NonFinite("spinor amplitude"));
        }
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero spinor".into()));
        }
        Ok(Self {
            c0: c0 / norm,
            c1: c1 / norm,
        })
    }

    /// The +z state `(1, 0)`.
    pub fn up() -> Self {
        Self { c0: ONE, c1: ZERO }
    }

    /// The +y state `(1, i)/√2`.
    pub fn plus_y() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            c0: Complex64::new(h, 0.0),
            c1: Complex64::new(0.0, h),
        }
    }

    pub fn c0(&self) -> Complex64 {
        self.c0
    }

    pub fn c1(&self) -> Complex64 {
        self.c1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c0.norm_sqr() + self.c1.norm_sqr()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Spinor) -> Complex64 {
        self.c0.conj() * other.c0 + self.c1.conj() * other.c1
    }

    pub fn to_bloch(&self) -> BlochVector {
        let p = self.c0.conj() * self.c1;
        BlochVector {
            x: 2.0 * p.re,
            y: 2.0 * p.im,
            z: self.c0.norm_sqr() - self.c1.norm_sqr(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }
}

/// A special-unitary 2×2 propagator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Su2 {
    a: Complex64,
    b: Complex64,
}

impl Su2 {
    pub fn identity() -> Self {
        Self { a: ONE, b: ZERO }
    }

    /// Builds `[[a, -b*], [b, a*]]`, rejecting pairs that are not unit-norm
    /// within 1e-10.
    pub fn from_cayley_klein(a: Complex64, b: Complex64) -> Result<Self> {
        let n = a.norm_sqr() + b.norm_sqr();
        if !n.is_finite() {
            return Err(Error::NonFinite("cayley-klein parameter"));
        }
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "|a|^2 + |b|^2 = {n}, not a special unitary"
            )));
        }
        Ok(Self { a, b })
    }

    /// `exp(-i t (v·I))` for a constant rotation vector `v`, via the
    /// closed-form axis-angle formula.
    pub fn from_generator(v: [f64; 3], t: f64) -> Self {
        let rate = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let half = 0.5 * rate * t;
        let (sin_half, cos_half) = half.sin_cos();
        // sin(|v| t / 2) / |v|, continuous through |v| = 0
        let s = if rate > 0.0 { sin_half / rate } else { 0.5 * t };
        Self {
            a: Complex64::new(cos_half, -s * v[2]),
            b: Complex64::new(s * v[1], -s * v[0]),
        }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// Row-major matrix entries.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.a, -self.b.conj()], [self.b, self.a.conj()]]
    }

    pub fn det(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }

    /// Largest entry of `U·U† − 1` in absolute value.
    pub fn unitarity_error(&self) -> f64 {
        let m = self.matrix();
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = m[i][0] * m[j][0].conj() + m[i][1] * m[j][1].conj();
                if i == j {
                    acc -= ONE;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    pub fn dagger(&self) -> Self {
        Self {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    pub fn trace(&self) -> Complex64 {
        Complex64::new(2.0 * self.a.re, 0.0)
    }

    pub fn apply(&self, s: &Spinor) -> Spinor {
        Spinor {
            c0: self.a * s.c0 - self.b.conj() * s.c1,
            c1: self.b * s.c0 + self.a.conj() * s.c1,
        }
    }

    /// ZXZ Euler angles with `θ ∈ [0, π]`. At `θ ∈ {0, π}` the gauge is fixed
    /// by `β = 0`.
    pub fn euler_zxz(&self) -> EulerZxz {
        // Rz(α)Rx(θ)Rz(β) has a = cos(θ/2) e^{-i(α+β)/2}, b = -i sin(θ/2) e^{i(α-β)/2}
        let cos_half = self.a.norm();
        let sin_half = self.b.norm();
        let theta = 2.0 * sin_half.atan2(cos_half);
        let sum_phase = -2.0 * self.a.arg();
        let diff_phase = 2.0 * (Complex64::i() * self.b).arg();
        let (alpha, beta) = if sin_half < EULER_DEGENERATE {
            (sum_phase, 0.0)
        } else if cos_half < EULER_DEGENERATE {
            (diff_phase, 0.0)
        } else {
            (0.5 * (sum_phase + diff_phase), 0.5 * (sum_phase - diff_phase))
        };
        EulerZxz {
            alpha: wrap_angle(alpha),
            theta,
            beta: wrap_angle(beta),
        }
    }
}

impl Mul for Su2 {
    type Output = Su2;

    /// Matrix product: `rhs` acts first.
    fn mul(self, rhs: Su2) -> Su2 {
        Su2 {
            a: self.a * rhs.a - self.b.conj() * rhs.b,
            b: self.b * rhs.a + self.a.conj() * rhs.b,
        }
    }
}

impl Neg for Su2 {
    type Output = Su2;

    fn neg(self) -> Su2 {
        Su2 { a: -self.a, b: -self.b }
    }
}

/// Angles of `Rz(alpha)·Rx(theta)·Rz(beta)`, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerZxz {
    pub alpha: f64,
    pub theta: f64,
    pub beta: f64,
}

impl EulerZxz {
    pub fn to_su2(&self) -> Su2 {
        z_rotation(self.alpha) * x_rotation(self.theta) * z_rotation(self.beta)
    }
}

/// Propagator of the constant generator `ω·Iz + A(cos φ·Ix + sin φ·Iy)`
/// over `duration`.
pub fn prop_const(offset: f64, amplitude: f64, phase: f64, duration: f64) -> Result<Su2> {
    let offset = finite("offset", offset)?;
    let amplitude = finite("amplitude", amplitude)?;
    let phase = finite("phase", phase)?;
    let duration = finite("duration", duration)?;
    if amplitude < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "amplitude must be nonnegative, got {amplitude}"
        )));
    }
    if duration < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "duration must be nonnegative, got {duration}"
        )));
    }
    let (sin_p, cos_p) = phase.sin_cos();
    Ok(Su2::from_generator(
        [amplitude * cos_p, amplitude * sin_p, offset],
        duration,
    ))
}

/// `exp(-i·angle·Iz)`.
pub fn z_rotation(angle: f64) -> Su2 {
    let (s, c) = (0.5 * angle).sin_cos();
    Su2 {
        a: Complex64::new(c, -s),
        b: ZERO,
    }
}

/// `exp(-i·angle·Ix)`.
pub fn x_rotation(angle: f64) -> Su2 {
    let (s, c) = (0.5 * angle).sin_cos();
    Su2 {
        a: Complex64::new(c, 0.0),
        b: Complex64::new(0.0, -s),
    }
}

/// Product of `factors` as written, so the last element acts first.
pub fn compose(factors: &[Su2]) -> Result<Su2> {
    let (first, rest) = factors.split_first().ok_or(Error::EmptyComposition)?;
    Ok(rest.iter().fold(*first, |acc, u| acc * *u))
}

/// `1 − |tr(U†V)|/2`: zero iff `U = e^{iγ}V`.
pub fn distance_up_to_phase(u: &Su2, v: &Su2) -> f64 {
    let overlap = 2.0 * (u.a.conj() * v.a + u.b.conj() * v.b).re;
    (1.0 - 0.5 * overlap.abs()).max(0.0)
}

fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn assert_close(a: Complex64, b: Complex64, tol: f64) {
        assert!((a - b).norm() < tol, "{a} vs {b}");
    }

    fn assert_matrix(u: &Su2, expected: [[Complex64; 2]; 2], tol: f64) {
        let m = u.matrix();
        for i in 0..2 {
            for j in 0..2 {
                assert_close(m[i][j], expected[i][j], tol);
            }
        }
    }

    fn random_su2(rng: &mut ChaCha8Rng) -> Su2 {
        loop {
            let q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-3 && n <= 1.0 {
                return Su2::from_cayley_klein(Complex64::new(q[0] / n, q[1] / n), Complex64::new(q[2] / n, q[3] / n))
                    .unwrap();
            }
        }
    }

    #[test]
    fn zero_duration_is_identity() {
        let u = prop_const(0.0, 3.7, 0.0, 0.0).unwrap();
        assert_eq!(u, Su2::identity());
    }

    #[test]
    fn on_resonance_ninety_degree_x_pulse() {
        let u = prop_const(0.0, FRAC_PI_2, 0.0, 1.0).unwrap();
        let b = u.apply(&Spinor::up()).to_bloch();
        assert!(b.x.abs() < 1e-12 && (b.y + 1.0).abs() < 1e-12 && b.z.abs() < 1e-12);
    }

    #[test]
    fn free_evolution_is_diagonal_phase() {
        let u = prop_const(1.0, 0.0, 0.0, PI).unwrap();
        let e = Complex64::new(0.0, -FRAC_PI_2).exp();
        assert_matrix(&u, [[e, ZERO], [ZERO, e.conj()]], 1e-12);
    }

    #[test]
    fn prop_const_matches_rotation_helpers() {
        assert!(distance_up_to_phase(&prop_const(0.0, 2.0, 0.0, 0.6).unwrap(), &x_rotation(1.2)) < 1e-15);
        assert!(distance_up_to_phase(&prop_const(2.0, 0.0, 0.0, 0.6).unwrap(), &z_rotation(1.2)) < 1e-15);
    }

    #[test]
    fn prop_const_rejects_bad_inputs() {
        assert!(matches!(prop_const(f64::NAN, 1.0, 0.0, 1.0), Err(Error::NonFinite(_))));
        assert!(matches!(
            prop_const(0.0, f64::INFINITY, 0.0, 1.0),
            Err(Error::NonFinite(_))
        ));
        assert!(prop_const(0.0, -1.0, 0.0, 1.0).is_err());
        assert!(prop_const(0.0, 1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn rotation_closed_forms() {
        let minus_one = [[-ONE, ZERO], [ZERO, -ONE]];
        assert_matrix(&x_rotation(2.0 * PI), minus_one, 1e-15);
        assert_eq!(z_rotation(0.0), Su2::identity());
        assert_matrix(&(x_rotation(PI) * x_rotation(PI)), minus_one, 1e-15);
    }

    #[test]
    fn compose_examples() {
        let u = prop_const(0.3, 0.7, 1.1, 2.0).unwrap();
        assert_eq!(compose(&[u]).unwrap(), u);
        assert!(distance_up_to_phase(&compose(&[u, u.dagger()]).unwrap(), &Su2::identity()) < 1e-10);
        let m = compose(&[u, u.dagger()]).unwrap().matrix();
        assert_close(m[0][0], ONE, 1e-10);
        assert!(distance_up_to_phase(&compose(&[z_rotation(0.4), z_rotation(1.9)]).unwrap(), &z_rotation(2.3)) < 1e-15);
        assert_eq!(compose(&[]), Err(Error::EmptyComposition));
    }

    #[test]
    fn apply_and_bloch_examples() {
        let s = Spinor::new(Complex64::new(0.6, 0.1), Complex64::new(-0.2, 0.7)).unwrap();
        assert_eq!(Su2::identity().apply(&s), s);
        assert_eq!(Spinor::up().to_bloch(), BlochVector { x: 0.0, y: 0.0, z: 1.0 });
        let excited = Spinor::new(Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(0.0, -FRAC_1_SQRT_2))
            .unwrap()
            .to_bloch();
        assert!(excited.x.abs() < 1e-15 && (excited.y + 1.0).abs() < 1e-15 && excited.z.abs() < 1e-15);
        let y = Spinor::plus_y().to_bloch();
        assert!((y.y - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spinor_rejects_zero() {
        assert!(Spinor::new(ZERO, ZERO).is_err());
    }

    #[test]
    fn euler_of_x_pi() {
        let e = x_rotation(PI).euler_zxz();
        assert!((e.theta - PI).abs() < 1e-15);
        assert!(e.alpha.abs() < 1e-15 && e.beta == 0.0);
    }

    #[test]
    fn euler_of_z_rotation_folds_into_alpha() {
        for c in [0.0, 0.4, -2.5, 3.0, 5.5] {
            let e = z_rotation(c).euler_zxz();
            assert_eq!(e.theta, 0.0);
            assert_eq!(e.beta, 0.0);
            let diff = wrap_angle(e.alpha + e.beta - c);
            assert!(diff.abs() < 1e-12, "c={c}: {e:?}");
        }
    }

    #[test]
    fn euler_round_trip_of_offset_pulse() {
        let u = prop_const(0.3, 0.5, 0.0, 4.0).unwrap();
        let e = u.euler_zxz();
        assert!((0.0..=PI).contains(&e.theta));
        assert!(distance_up_to_phase(&e.to_su2(), &u) < 1e-9);
    }

    #[test]
    fn euler_round_trip_ten_thousand_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let u = random_su2(&mut rng);
            let e = u.euler_zxz();
            assert!((0.0..=PI).contains(&e.theta));
            worst = worst.max(distance_up_to_phase(&e.to_su2(), &u));
        }
        assert!(worst < 1e-9, "worst = {worst}");
    }

    #[test]
    fn distance_examples() {
        let u = prop_const(0.2, 0.9, 0.4, 1.7).unwrap();
        assert!(distance_up_to_phase(&u, &u) < 1e-15);
        assert!(distance_up_to_phase(&u, &-u) < 1e-15);
        assert!((distance_up_to_phase(&Su2::identity(), &x_rotation(PI)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cayley_klein_validation() {
        assert!(Su2::from_cayley_klein(ONE, ONE).is_err());
        assert!(Su2::from_cayley_klein(Complex64::new(f64::NAN, 0.0), ZERO).is_err());
    }

    proptest! {
        #[test]
        fn prop_const_is_special_unitary(
            w in -50.0f64..50.0, a in 0.0f64..10.0, p in -7.0f64..7.0, t in 0.0f64..100.0
        ) {
            let u = prop_const(w, a, p, t).unwrap();
            prop_assert!(u.unitarity_error() < 1e-10);
            prop_assert!((u.det() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn compose_respects_time_order(
            w1 in -3.0f64..3.0, a1 in 0.0f64..2.0, p1 in -3.0f64..3.0,
            w2 in -3.0f64..3.0, a2 in 0.0f64..2.0, p2 in -3.0f64..3.0,
        ) {
            let first = prop_const(w1, a1, p1, 1.3).unwrap();
            let second = prop_const(w2, a2, p2, 0.7).unwrap();
            let s = Spinor::plus_y();
            // later factor on the left
            let a = compose(&[second, first]).unwrap().apply(&s);
            let b = second.apply(&first.apply(&s));
            prop_assert!((a.c0() - b.c0()).norm() < 1e-12 && (a.c1() - b.c1()).norm() < 1e-12);
        }

        #[test]
        fn constant_generator_semigroup(
            w in -5.0f64..5.0, a in 0.0f64..3.0, p in -3.0f64..3.0,
            t1 in 0.0f64..20.0, t2 in 0.0f64..20.0,
        ) {
            let whole = prop_const(w, a, p, t1 + t2).unwrap();
            let split = compose(&[prop_const(w, a, p, t2).unwrap(), prop_const(w, a, p, t1).unwrap()]).unwrap();
            let m1 = whole.matrix();
            let m2 = split.matrix();
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!((m1[i][j] - m2[i][j]).norm() < 1e-10);
                }
            }
        }

        #[test]
        fn apply_preserves_norm(
            w in -5.0f64..5.0, a in 0.0f64..3.0, p in -3.0f64..3.0, t in 0.0f64..50.0,
            re0 in -1.0f64..1.0, im0 in -1.0f64..1.0, re1 in -1.0f64..1.0, im1 in -1.0f64..1.0,
        ) {
            prop_assume!(re0.abs() + im0.abs() + re1.abs() + im1.abs() > 1e-3);
            let s = Spinor::new(Complex64::new(re0, im0), Complex64::new(re1, im1)).unwrap();
            let out = prop_const(w, a, p, t).unwrap().apply(&s);
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
            prop_assert!((out.to_bloch().norm() - 1.0).abs() < 1e-10);
        }
    }
}
