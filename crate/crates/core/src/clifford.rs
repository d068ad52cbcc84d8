//! 2×2 complex matrices and the Pauli matrices.
//!
//! A square-root increment `a·Φ` squares to `a²·sgn(dW)`, which carries the
//! spurious shift `μ0²·sgn(dW)`. Splitting the increment across two
//! anticommuting matrices,
//!
//! ```text
//! dX = σ_i · a · Φ + i σ_k · μ0 · Φ
//! ```
//!
//! gives `dX² = (a² − μ0²)·Φ²·I` because the cross terms `σ_iσ_k + σ_kσ_i`
//! vanish, removing the shift.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2C {
    pub m: [[Complex64; 2]; 2],
}

impl Matrix2C {
    pub const fn new(m: [[Complex64; 2]; 2]) -> Self {
        Self { m }
    }

    pub const fn zero() -> Self {
        Self::new([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Self::new([[ONE, ZERO], [ZERO, ONE]])
    }

    /// `c·I`.
    pub fn scalar(c: Complex64) -> Self {
        Self::new([[c, ZERO], [ZERO, c]])
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let m = self.m;
        Self::new([[m[0][0] * c, m[0][1] * c], [m[1][0] * c, m[1][1] * c]])
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `Some(c)` if the matrix is exactly `c·I`.
    pub fn as_scalar(&self) -> Option<Complex64> {
        let m = self.m;
        (m[0][1] == ZERO && m[1][0] == ZERO && m[0][0] == m[1][1]).then_some(m[0][0])
    }
}

impl Add for Matrix2C {
    type Output = Matrix2C;
    fn add(self, rhs: Self) -> Self {
        let (a, b) = (self.m, rhs.m);
        Self::new([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Matrix2C {
    type Output = Matrix2C;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for Matrix2C {
    type Output = Matrix2C;
    fn neg(self) -> Self {
        self.scale(-ONE)
    }
}

impl Mul for Matrix2C {
    type Output = Matrix2C;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (self.m, rhs.m);
        Self::new([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Mul<Complex64> for Matrix2C {
    type Output = Matrix2C;
    fn mul(self, rhs: Complex64) -> Self {
        self.scale(rhs)
    }
}

/// Selects σ1, σ2 or σ3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum PauliIndex {
    X,
    Y,
    Z,
}

impl PauliIndex {
    pub const ALL: [PauliIndex; 3] = [PauliIndex::X, PauliIndex::Y, PauliIndex::Z];

    pub fn new(index: u8) -> Result<Self> {
        match index {
            1 => Ok(PauliIndex::X),
            2 => Ok(PauliIndex::Y),
            3 => Ok(PauliIndex::Z),
            _ => invalid(format!("Pauli index must be 1, 2 or 3, got {index}")),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            PauliIndex::X => 1,
            PauliIndex::Y => 2,
            PauliIndex::Z => 3,
        }
    }
}

impl TryFrom<u8> for PauliIndex {
    type Error = crate::Error;
    fn try_from(v: u8) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PauliIndex> for u8 {
    fn from(p: PauliIndex) -> u8 {
        p.index()
    }
}

pub fn pauli(p: PauliIndex) -> Matrix2C {
    match p {
        PauliIndex::X => Matrix2C::new([[ZERO, ONE], [ONE, ZERO]]),
        PauliIndex::Y => Matrix2C::new([[ZERO, -I], [I, ZERO]]),
        PauliIndex::Z => Matrix2C::new([[ONE, ZERO], [ZERO, -ONE]]),
    }
}

/// `a·b + b·a`.
pub fn anticommutator(a: &Matrix2C, b: &Matrix2C) -> Matrix2C {
    *a * *b + *b * *a
}

/// Two anticommuting generators squaring to the identity.
///
/// The embedding below is written against this trait so that a larger
/// representation (e.g. 4×4 Dirac matrices) can be dropped in.
pub trait AnticommutingPair {
    type Matrix: Copy + Add<Output = Self::Matrix> + Mul<Complex64, Output = Self::Matrix>;

    fn first(&self) -> Self::Matrix;
    fn second(&self) -> Self::Matrix;
}

/// An ordered pair `(σ_i, σ_k)` with `i != k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliPair {
    i: PauliIndex,
    k: PauliIndex,
}

impl PauliPair {
    pub fn new(i: PauliIndex, k: PauliIndex) -> Result<Self> {
        if i == k {
            return invalid(format!(
                "Pauli pair needs distinct indices, got ({0}, {0})",
                i.index()
            ));
        }
        Ok(Self { i, k })
    }

    pub fn indices(&self) -> (PauliIndex, PauliIndex) {
        (self.i, self.k)
    }
}

impl Default for PauliPair {
    /// `(σ1, σ2)`.
    fn default() -> Self {
        Self {
            i: PauliIndex::X,
            k: PauliIndex::Y,
        }
    }
}

impl AnticommutingPair for PauliPair {
    type Matrix = Matrix2C;

    fn first(&self) -> Matrix2C {
        pauli(self.i)
    }

    fn second(&self) -> Matrix2C {
        pauli(self.k)
    }
}

/// `first·scalar_part·phi + i·second·mu0·phi` for any anticommuting pair.
pub fn embed_in<P: AnticommutingPair>(
    pair: &P,
    scalar_part: Complex64,
    mu0: f64,
    phi: Complex64,
) -> P::Matrix {
    pair.first() * (scalar_part * phi) + pair.second() * (I * mu0 * phi)
}

/// Clifford-embedded square-root increment with Pauli generators.
///
/// `phi` must be exactly `1` or `i`, and `mu0` must be nonzero.
pub fn embed_sqrt_increment(
    scalar_part: Complex64,
    mu0: f64,
    i_idx: PauliIndex,
    k_idx: PauliIndex,
    phi: Complex64,
) -> Result<Matrix2C> {
    let pair = PauliPair::new(i_idx, k_idx)?;
    if mu0 == 0.0 || !mu0.is_finite() {
        return invalid(format!("mu0 must be finite and nonzero, got {mu0}"));
    }
    if phi != ONE && phi != I {
        return invalid(format!("phi must be 1 or i, got {phi}"));
    }
    Ok(embed_in(&pair, scalar_part, mu0, phi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_conventions() {
        assert_eq!(
            pauli(PauliIndex::Z),
            Matrix2C::new([[ONE, ZERO], [ZERO, -ONE]])
        );
        for p in PauliIndex::ALL {
            assert_eq!(pauli(p) * pauli(p), Matrix2C::identity());
        }
        assert!(PauliIndex::new(0).is_err());
        assert!(PauliIndex::new(4).is_err());
    }

    #[test]
    fn anticommutator_examples() {
        let x = pauli(PauliIndex::X);
        let y = pauli(PauliIndex::Y);
        assert_eq!(anticommutator(&x, &y), Matrix2C::zero());
        assert_eq!(
            anticommutator(&x, &x),
            Matrix2C::scalar(Complex64::new(2.0, 0.0))
        );
        let m = Matrix2C::new([
            [Complex64::new(1.5, -0.25), Complex64::new(0.0, 3.0)],
            [Complex64::new(-2.0, 0.5), Complex64::new(0.125, 0.0)],
        ]);
        assert_eq!(
            anticommutator(&Matrix2C::identity(), &m),
            m.scale(Complex64::new(2.0, 0.0))
        );
    }

    #[test]
    fn equal_indices_rejected() {
        let r = embed_sqrt_increment(ONE, 0.5, PauliIndex::X, PauliIndex::X, ONE);
        assert!(r.is_err());
    }

    #[test]
    fn bad_phi_and_mu0_rejected() {
        assert!(embed_sqrt_increment(
            ONE,
            0.5,
            PauliIndex::X,
            PauliIndex::Y,
            Complex64::new(0.5, 0.5)
        )
        .is_err());
        assert!(embed_sqrt_increment(ONE, 0.0, PauliIndex::X, PauliIndex::Y, ONE).is_err());
    }

    #[test]
    fn scalar_part_equal_to_mu0_squares_to_zero() {
        for (i, k) in [(1, 2), (2, 3), (3, 1), (2, 1)] {
            let (i, k) = (PauliIndex::new(i).unwrap(), PauliIndex::new(k).unwrap());
            let m = embed_sqrt_increment(Complex64::new(0.5, 0.0), 0.5, i, k, ONE).unwrap();
            assert_eq!((m * m).as_scalar(), Some(ZERO));
        }
    }

    #[test]
    fn embedded_square_matches_the_scalar_expansion() {
        // (σ_i a Φ + i σ_k μ0 Φ)² = (a² − μ0²) Φ² I, expanded by hand.
        let mu0 = 0.5;
        let a = 0.539_f64;
        for phi in [ONE, I] {
            let m = embed_sqrt_increment(
                Complex64::new(a, 0.0),
                mu0,
                PauliIndex::X,
                PauliIndex::Y,
                phi,
            )
            .unwrap();
            let expect = (a * a - mu0 * mu0) * phi * phi;
            let sq = m * m;
            assert!((sq - Matrix2C::scalar(expect)).max_norm() < 1e-15);
        }
    }
}
