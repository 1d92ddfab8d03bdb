//! Single-qubit linear algebra: canonical states, the Hadamard gate and its
//! fractional powers via spectral decomposition, Born-rule measurement, and
//! state comparison.
//!
//! The protocol only ever needs the exponent lattice k/3 (k an integer), so
//! fractional powers are represented by [`ThirdExponent`] and realized by
//! [`h_power`]. Under the real-branch convention `(-1)^(1/3) = -1` the whole
//! lattice collapses to parity: `H^(k/3) = H^(k mod 2)`. [`h_power_spectral`]
//! builds the same operator from the eigendecomposition of H and is kept as
//! an independent cross-check of that collapse.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::Add;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::SeededRng;

/// Complex amplitude scalar. Finite by convention (no NaN/Inf enter through
/// the public constructors used by the protocol).
pub type ComplexScalar = Complex64;

/// Default tolerance for state-vector norms.
pub const STATE_NORM_TOL: f64 = 1e-9;
/// Default tolerance for gate-identity residuals (Frobenius norm).
pub const GATE_IDENTITY_TOL: f64 = 1e-12;

/// The four preparation states used for payload and decoy particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PrepLabel {
    Zero,
    One,
    Plus,
    Minus,
}

impl PrepLabel {
    pub const ALL: [PrepLabel; 4] = [
        PrepLabel::Zero,
        PrepLabel::One,
        PrepLabel::Plus,
        PrepLabel::Minus,
    ];

    /// The basis this label is an eigenstate of.
    pub fn basis(self) -> MeasBasis {
        match self {
            PrepLabel::Zero | PrepLabel::One => MeasBasis::Z,
            PrepLabel::Plus | PrepLabel::Minus => MeasBasis::X,
        }
    }

    /// One-character display form: `0`, `1`, `+`, `-`.
    pub fn symbol(self) -> char {
        match self {
            PrepLabel::Zero => '0',
            PrepLabel::One => '1',
            PrepLabel::Plus => '+',
            PrepLabel::Minus => '-',
        }
    }

    /// Draws one of the four labels uniformly.
    pub fn sample(rng: &mut SeededRng) -> Self {
        Self::ALL[rng.random_range(0..4)]
    }
}

/// Measurement basis: computational (Z) or Hadamard (X).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasBasis {
    Z,
    X,
}

impl MeasBasis {
    /// The two eigenstates of this basis, in (+1, -1)-outcome order.
    pub fn eigenstates(self) -> (PrepLabel, PrepLabel) {
        match self {
            MeasBasis::Z => (PrepLabel::Zero, PrepLabel::One),
            MeasBasis::X => (PrepLabel::Plus, PrepLabel::Minus),
        }
    }
}

/// A normalized two-amplitude state vector `a0|0> + a1|1>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub a0: ComplexScalar,
    pub a1: ComplexScalar,
}

impl QubitState {
    pub fn new(a0: ComplexScalar, a1: ComplexScalar) -> Self {
        Self { a0, a1 }
    }

    /// `|a0|^2 + |a1|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.a0.norm_sqr() + self.a1.norm_sqr()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &QubitState) -> ComplexScalar {
        self.a0.conj() * other.a0 + self.a1.conj() * other.a1
    }
}

/// The exact amplitudes of a preparation label.
pub fn canonical_state(label: PrepLabel) -> QubitState {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    match label {
        PrepLabel::Zero => QubitState::new(one, zero),
        PrepLabel::One => QubitState::new(zero, one),
        PrepLabel::Plus => QubitState::new(h, h),
        PrepLabel::Minus => QubitState::new(h, -h),
    }
}

/// `|<a|b>|^2` for normalized states.
pub fn fidelity(a: &QubitState, b: &QubitState) -> f64 {
    a.inner(b).norm_sqr()
}

/// Equality predicate that ignores an overall phase: true iff
/// `fidelity(a, b) >= 1 - tol`.
pub fn equal_up_to_global_phase(a: &QubitState, b: &QubitState, tol: f64) -> bool {
    fidelity(a, b) >= 1.0 - tol
}

/// A 2x2 complex matrix, row-major. All gates produced by this module are
/// unitary within [`STATE_NORM_TOL`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gate2 {
    pub m00: ComplexScalar,
    pub m01: ComplexScalar,
    pub m10: ComplexScalar,
    pub m11: ComplexScalar,
}

impl Gate2 {
    pub fn identity() -> Self {
        Self {
            m00: Complex64::new(1.0, 0.0),
            m01: Complex64::new(0.0, 0.0),
            m10: Complex64::new(0.0, 0.0),
            m11: Complex64::new(1.0, 0.0),
        }
    }

    /// The literal Hadamard matrix `(1/sqrt 2) [[1, 1], [1, -1]]`.
    pub fn hadamard() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self {
            m00: h,
            m01: h,
            m10: h,
            m11: -h,
        }
    }

    /// Matrix-vector product `self * s`. Preserves the norm when `self` is
    /// unitary.
    pub fn apply(&self, s: &QubitState) -> QubitState {
        QubitState::new(
            self.m00 * s.a0 + self.m01 * s.a1,
            self.m10 * s.a0 + self.m11 * s.a1,
        )
    }

    /// Matrix product `self * other` (apply `other` first).
    pub fn mul(&self, other: &Gate2) -> Gate2 {
        Gate2 {
            m00: self.m00 * other.m00 + self.m01 * other.m10,
            m01: self.m00 * other.m01 + self.m01 * other.m11,
            m10: self.m10 * other.m00 + self.m11 * other.m10,
            m11: self.m10 * other.m01 + self.m11 * other.m11,
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Gate2 {
        Gate2 {
            m00: self.m00.conj(),
            m01: self.m10.conj(),
            m10: self.m01.conj(),
            m11: self.m11.conj(),
        }
    }

    /// Frobenius norm of `self - other`.
    pub fn distance(&self, other: &Gate2) -> f64 {
        ((self.m00 - other.m00).norm_sqr()
            + (self.m01 - other.m01).norm_sqr()
            + (self.m10 - other.m10).norm_sqr()
            + (self.m11 - other.m11).norm_sqr())
        .sqrt()
    }

    /// `|| M^dag M - I ||_F`.
    pub fn unitarity_residual(&self) -> f64 {
        self.dagger().mul(self).distance(&Gate2::identity())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }
}

/// An integer numerator `k` denoting the Hadamard exponent `k/3`. An integer
/// exponent `r` contributes numerator `3r`; addition of exponents is addition
/// of numerators.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct ThirdExponent(pub i64);

impl ThirdExponent {
    pub fn new(numerator: i64) -> Self {
        Self(numerator)
    }

    /// The integer exponent `r`, i.e. numerator `3r`.
    pub fn from_integer(r: i64) -> Self {
        Self(3 * r)
    }

    pub fn numerator(self) -> i64 {
        self.0
    }

    /// True iff the real-branch power is the identity.
    pub fn is_even(self) -> bool {
        self.0.rem_euclid(2) == 0
    }
}

impl Add for ThirdExponent {
    type Output = ThirdExponent;

    fn add(self, rhs: ThirdExponent) -> ThirdExponent {
        ThirdExponent(self.0 + rhs.0)
    }
}

/// Normalized eigenvectors of H for eigenvalues +1 and -1, proportional to
/// the unnormalized pair `(sqrt2 - 1, 3 - 2*sqrt2)` and `(3 - 2*sqrt2, 1 - sqrt2)`.
pub fn hadamard_eigensystem() -> (QubitState, QubitState) {
    let s2 = 2f64.sqrt();
    let y1 = (s2 - 1.0, 3.0 - 2.0 * s2);
    let y2 = (3.0 - 2.0 * s2, 1.0 - s2);
    let n1 = (y1.0 * y1.0 + y1.1 * y1.1).sqrt();
    let n2 = (y2.0 * y2.0 + y2.1 * y2.1).sqrt();
    (
        QubitState::new(
            Complex64::new(y1.0 / n1, 0.0),
            Complex64::new(y1.1 / n1, 0.0),
        ),
        QubitState::new(
            Complex64::new(y2.0 / n2, 0.0),
            Complex64::new(y2.1 / n2, 0.0),
        ),
    )
}

fn projector(v: &QubitState) -> Gate2 {
    Gate2 {
        m00: v.a0 * v.a0.conj(),
        m01: v.a0 * v.a1.conj(),
        m10: v.a1 * v.a0.conj(),
        m11: v.a1 * v.a1.conj(),
    }
}

/// `H^(k/3)` under the real-branch convention `(-1)^(1/3) = -1`: the
/// eigenvalue -1 is raised to the sign `(-1)^k`, so the power collapses to
/// `H^(k mod 2)`. This is the production path; it returns the exact identity
/// or the literal Hadamard matrix.
pub fn h_power(e: ThirdExponent) -> Gate2 {
    if e.is_even() {
        Gate2::identity()
    } else {
        Gate2::hadamard()
    }
}

/// `H^(k/3)` assembled from the spectral decomposition: `P+ + s P-` with
/// `s = (-1)^k`. Agrees with [`h_power`] within [`GATE_IDENTITY_TOL`]; kept
/// as an independent route for validating the parity collapse.
pub fn h_power_spectral(e: ThirdExponent) -> Gate2 {
    let (v_plus, v_minus) = hadamard_eigensystem();
    let p_plus = projector(&v_plus);
    let p_minus = projector(&v_minus);
    let s = if e.is_even() { 1.0 } else { -1.0 };
    Gate2 {
        m00: p_plus.m00 + s * p_minus.m00,
        m01: p_plus.m01 + s * p_minus.m01,
        m10: p_plus.m10 + s * p_minus.m10,
        m11: p_plus.m11 + s * p_minus.m11,
    }
}

/// Born-rule measurement in the given basis. Returns the outcome label and
/// the post-measurement state (the corresponding basis eigenstate).
/// Deterministic given the rng state.
pub fn measure(
    s: &QubitState,
    basis: MeasBasis,
    rng: &mut SeededRng,
) -> (PrepLabel, QubitState) {
    let (first, second) = basis.eigenstates();
    let p_first = fidelity(&canonical_state(first), s).clamp(0.0, 1.0);
    let u: f64 = rng.random();
    let outcome = if u < p_first { first } else { second };
    (outcome, canonical_state(outcome))
}
