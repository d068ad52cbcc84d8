//! Euler–Maruyama integration of the square-root process.
//!
//! One step of the scalar process is
//!
//! ```text
//! dX = (μ0 + |dW|/(2μ0) − dt/(8μ0³)) · Φ½(dW)
//! ```
//!
//! and, at `μ0 = 1/2` with a drift constant `β`,
//!
//! ```text
//! dX = (1/2 + |dW| + (−1 + β·sgn dW)·dt) · Φ½(dW).
//! ```
//!
//! The bracket is the Itô expansion of `sqrt(μ0² + |dW|)`; see [`ito`] for a
//! symbolic check. Steps are integrated with every term retained; the Itô
//! rules only enter derivations and tests.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clifford::{embed_in, Matrix2C, PauliPair};
use crate::error::{invalid, Result};
use crate::paths::{
    alloc_ensemble, fill_wiener, hex_string, make_lane_rng, phi_half_of, sgn, RealPathEnsemble,
    SeedSpec, TimeGrid,
};

/// Scale factor `mu0` and drift constant `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqrtParams {
    mu0: f64,
    beta: f64,
}

impl Default for SqrtParams {
    fn default() -> Self {
        Self {
            mu0: 0.5,
            beta: 0.0,
        }
    }
}

impl SqrtParams {
    pub fn new(mu0: f64, beta: f64) -> Result<Self> {
        if mu0 == 0.0 || !mu0.is_finite() {
            return invalid(format!("mu0 must be finite and nonzero, got {mu0}"));
        }
        if !beta.is_finite() {
            return invalid(format!("beta must be finite, got {beta}"));
        }
        Ok(Self { mu0, beta })
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Whether the drifted form applies (`mu0 == 1/2`).
    pub fn is_drifted_form(&self) -> bool {
        self.mu0 == 0.5
    }

    /// The step used by the integrators: the drifted form at `mu0 = 1/2`,
    /// otherwise the scalar form (which has no `beta` term).
    fn check_integrable(&self) -> Result<()> {
        if !self.is_drifted_form() && self.beta != 0.0 {
            return invalid(format!(
                "beta = {} requires mu0 = 0.5; the drift term is only defined for that scale (got mu0 = {})",
                self.beta, self.mu0
            ));
        }
        Ok(())
    }

    #[inline]
    fn step(&self, dw: f64, dt: f64) -> Complex64 {
        let phi = phi_half_of(dw);
        if self.is_drifted_form() {
            Complex64::new(drifted_bracket(dw, dt, self.beta), 0.0) * phi
        } else {
            Complex64::new(sqrt_bracket(dw, dt, self.mu0), 0.0) * phi
        }
    }
}

/// `μ0 + |dw|/(2μ0) − dt/(8μ0³)`.
#[inline]
pub fn sqrt_bracket(dw: f64, dt: f64, mu0: f64) -> f64 {
    let abs_dw = dw * sgn(dw).as_f64();
    mu0 + abs_dw * (0.5 / mu0) - dt * (0.125 / (mu0 * mu0 * mu0))
}

/// `1/2 + |dw| + (−1 + β·sgn dw)·dt`.
#[inline]
pub fn drifted_bracket(dw: f64, dt: f64, beta: f64) -> f64 {
    let s = sgn(dw).as_f64();
    0.5 + dw * s + (-1.0 + beta * s) * dt
}

/// `sqrt(μ0² + |dw|)`, the untruncated root whose Itô expansion is
/// [`sqrt_bracket`].
#[inline]
pub fn exact_root(dw: f64, mu0: f64) -> f64 {
    (mu0 * mu0 + dw.abs()).sqrt()
}

pub fn sqrt_step_scalar(dw: f64, dt: f64, params: &SqrtParams, phi: Complex64) -> Complex64 {
    debug_assert_eq!(phi, phi_half_of(dw), "phi must come from sgn(dw)");
    Complex64::new(sqrt_bracket(dw, dt, params.mu0), 0.0) * phi
}

pub fn sqrt_step_drifted(
    dw: f64,
    dt: f64,
    params: &SqrtParams,
    phi: Complex64,
) -> Result<Complex64> {
    if !params.is_drifted_form() {
        return invalid(format!(
            "the drifted step is defined at mu0 = 0.5 only (got {}); use sqrt_step_scalar",
            params.mu0
        ));
    }
    debug_assert_eq!(phi, phi_half_of(dw), "phi must come from sgn(dw)");
    Ok(Complex64::new(drifted_bracket(dw, dt, params.beta), 0.0) * phi)
}

/// Clifford-embedded step built on the exact root; squares to `dw·I`.
pub fn embedded_step_exact(dw: f64, mu0: f64, pair: &PauliPair) -> Matrix2C {
    embed_in(
        pair,
        Complex64::new(exact_root(dw, mu0), 0.0),
        mu0,
        phi_half_of(dw),
    )
}

/// Clifford-embedded Euler–Maruyama step; squares to `dw·I` up to
/// Itô-vanishing terms.
pub fn embedded_step_ito(dw: f64, dt: f64, mu0: f64, pair: &PauliPair) -> Matrix2C {
    embed_in(
        pair,
        Complex64::new(sqrt_bracket(dw, dt, mu0), 0.0),
        mu0,
        phi_half_of(dw),
    )
}

/// `(scalar step)² − dw − μ0²·sgn(dw)`.
pub fn scalar_square_residual(dw: f64, dt: f64, mu0: f64) -> Complex64 {
    let z = Complex64::new(sqrt_bracket(dw, dt, mu0), 0.0) * phi_half_of(dw);
    z * z - Complex64::new(dw + mu0 * mu0 * sgn(dw).as_f64(), 0.0)
}

/// The residual of [`scalar_square_residual`] written out: only terms that
/// vanish under `dW² = dt`, `dW·dt = 0`, `dt² = 0` survive.
pub fn predicted_square_residual(dw: f64, dt: f64, mu0: f64) -> f64 {
    let m2 = mu0 * mu0;
    let s = sgn(dw).as_f64();
    s * ((dw * dw - dt) / (4.0 * m2) - dw.abs() * dt / (8.0 * m2 * m2)
        + dt * dt / (64.0 * m2 * m2 * m2))
}

/// `n_paths` complex paths stored as increments, row-major by path.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPathEnsemble {
    grid: TimeGrid,
    n_paths: usize,
    increments: Vec<Complex64>,
}

impl ComplexPathEnsemble {
    pub fn from_paths(grid: &TimeGrid, paths: &[Vec<Complex64>]) -> Result<Self> {
        if paths.is_empty() {
            return invalid("ensemble needs at least one path");
        }
        let mut increments = Vec::with_capacity(paths.len() * grid.n_steps());
        for (p, row) in paths.iter().enumerate() {
            if row.len() != grid.n_steps() {
                return invalid(format!(
                    "path {p} has {} steps, expected {}",
                    row.len(),
                    grid.n_steps()
                ));
            }
            increments.extend_from_slice(row);
        }
        Ok(Self {
            grid: *grid,
            n_paths: paths.len(),
            increments,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn increments(&self, path: usize) -> &[Complex64] {
        let n = self.grid.n_steps();
        &self.increments[path * n..(path + 1) * n]
    }

    /// All increments, path-major.
    pub fn all_increments(&self) -> &[Complex64] {
        &self.increments
    }

    /// Cumulative values `X(t_k)`, `k = 0..=n_steps`, starting at 0.
    pub fn values(&self, path: usize) -> Vec<Complex64> {
        let inc = self.increments(path);
        let mut out = Vec::with_capacity(inc.len() + 1);
        let mut acc = Complex64::new(0.0, 0.0);
        out.push(acc);
        for &d in inc {
            acc += d;
            out.push(acc);
        }
        out
    }

    /// `X(T)` for every path.
    pub fn final_values(&self) -> Vec<Complex64> {
        (0..self.n_paths)
            .map(|p| self.increments(p).iter().sum())
            .collect()
    }

    /// SHA-256 of the increments (re then im, little-endian f64), hex encoded.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for z in &self.increments {
            h.update(z.re.to_le_bytes());
            h.update(z.im.to_le_bytes());
        }
        hex_string(&h.finalize())
    }
}

/// Integrates paths `0..n_paths` of `master_seed`. Each path draws its own
/// Wiener increments on lane 0, so this equals
/// [`integrate_sqrt_driven`] applied to `RealPathEnsemble::sample` with the
/// same seed.
pub fn integrate_sqrt(
    grid: &TimeGrid,
    n_paths: usize,
    params: &SqrtParams,
    master_seed: u64,
) -> Result<ComplexPathEnsemble> {
    params.check_integrable()?;
    if n_paths == 0 {
        return invalid("n_paths must be at least 1");
    }
    let n = grid.n_steps();
    let dt = grid.dt();
    let mut increments = alloc_ensemble::<Complex64>(n_paths, n)?;
    increments.par_chunks_mut(n).enumerate().for_each_init(
        || vec![0.0; n],
        |dw, (p, row)| {
            let mut rng = make_lane_rng(SeedSpec::new(master_seed, p as u64), 0);
            fill_wiener(dt, &mut rng, dw);
            for (out, &d) in row.iter_mut().zip(dw.iter()) {
                *out = params.step(d, dt);
            }
        },
    );
    Ok(ComplexPathEnsemble {
        grid: *grid,
        n_paths,
        increments,
    })
}

/// Integrates the square-root process driven by existing Wiener paths.
pub fn integrate_sqrt_driven(
    wiener: &RealPathEnsemble,
    params: &SqrtParams,
) -> Result<ComplexPathEnsemble> {
    params.check_integrable()?;
    let grid = *wiener.grid();
    let n = grid.n_steps();
    let dt = grid.dt();
    let mut increments = alloc_ensemble::<Complex64>(wiener.n_paths(), n)?;
    increments
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(p, row)| {
            for (out, &d) in row.iter_mut().zip(wiener.increments(p)) {
                *out = params.step(d, dt);
            }
        });
    Ok(ComplexPathEnsemble {
        grid,
        n_paths: wiener.n_paths(),
        increments,
    })
}

/// Coefficients `(κ, ξ, ζ, η)` of one Clifford direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionCoeffs {
    pub kappa: f64,
    pub xi: f64,
    pub zeta: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralProcessCoeffs {
    directions: Vec<DirectionCoeffs>,
}

impl GeneralProcessCoeffs {
    pub fn new(directions: Vec<DirectionCoeffs>) -> Result<Self> {
        if directions.is_empty() {
            return invalid("at least one direction is required");
        }
        for (a, c) in directions.iter().enumerate() {
            if ![c.kappa, c.xi, c.zeta, c.eta].iter().all(|v| v.is_finite()) {
                return invalid(format!("direction {a} has a non-finite coefficient"));
            }
        }
        Ok(Self { directions })
    }

    pub fn directions(&self) -> &[DirectionCoeffs] {
        &self.directions
    }
}

/// Scalar standing in for the chirality factor in the general process.
pub const CHIRALITY_WEIGHT: f64 = 1.0;

/// `(κ + ξ·dw·b + ζ·dt + i·η·g5)·Φ` with `b = sgn(dw)` and `Φ = Φ(b)`.
#[inline]
pub fn general_step(c: &DirectionCoeffs, dw: f64, dt: f64) -> Complex64 {
    let b = sgn(dw).as_f64();
    let re = c.kappa + c.xi * (dw * b) + c.zeta * dt;
    (Complex64::new(re, 0.0) + Complex64::new(0.0, c.eta * CHIRALITY_WEIGHT)) * phi_half_of(dw)
}

/// Increments along one Clifford direction. The generator matrix of the
/// direction is carried as the label, not multiplied in.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionEnsemble {
    pub direction: usize,
    pub ensemble: ComplexPathEnsemble,
}

/// Integrates every direction of the general process. Direction `A` draws
/// its Wiener increments from lane `A` of each path's seed, so direction 0
/// shares its driver with [`integrate_sqrt`].
pub fn integrate_general(
    grid: &TimeGrid,
    n_paths: usize,
    coeffs: &GeneralProcessCoeffs,
    master_seed: u64,
) -> Result<Vec<DirectionEnsemble>> {
    if n_paths == 0 {
        return invalid("n_paths must be at least 1");
    }
    let n = grid.n_steps();
    let dt = grid.dt();
    coeffs
        .directions
        .iter()
        .enumerate()
        .map(|(a, c)| {
            let mut increments = alloc_ensemble::<Complex64>(n_paths, n)?;
            increments.par_chunks_mut(n).enumerate().for_each_init(
                || vec![0.0; n],
                |dw, (p, row)| {
                    let mut rng = make_lane_rng(SeedSpec::new(master_seed, p as u64), a as u64);
                    fill_wiener(dt, &mut rng, dw);
                    for (out, &d) in row.iter_mut().zip(dw.iter()) {
                        *out = general_step(c, d, dt);
                    }
                },
            );
            Ok(DirectionEnsemble {
                direction: a,
                ensemble: ComplexPathEnsemble {
                    grid: *grid,
                    n_paths,
                    increments,
                },
            })
        })
        .collect()
}

/// Summary of the scalar-square residual over an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftArtifactReport {
    /// Smallest `C` with `|residual| <= C·dt` on every step.
    pub c_fit: f64,
    pub max_residual: f64,
    /// Mean of `residual / dt`; tends to 0 because `E[dW²] = dt`.
    pub mean_residual_over_dt: f64,
    /// Largest gap between the residual and [`predicted_square_residual`].
    pub max_prediction_error: f64,
    /// Largest imaginary part of any residual.
    pub max_imaginary: f64,
    pub n_steps: usize,
}

/// Measures how far the scalar square-root step is from recovering `dW`
/// once the `μ0²·sgn(dW)` shift has been taken out.
pub fn scalar_shift_artifact(wiener: &RealPathEnsemble, mu0: f64) -> Result<ShiftArtifactReport> {
    if mu0 == 0.0 || !mu0.is_finite() {
        return invalid(format!("mu0 must be finite and nonzero, got {mu0}"));
    }
    let dt = wiener.grid().dt();
    let mut rep = ShiftArtifactReport {
        c_fit: 0.0,
        max_residual: 0.0,
        mean_residual_over_dt: 0.0,
        max_prediction_error: 0.0,
        max_imaginary: 0.0,
        n_steps: 0,
    };
    let mut sum = 0.0;
    for p in 0..wiener.n_paths() {
        for &dw in wiener.increments(p) {
            let r = scalar_square_residual(dw, dt, mu0);
            rep.max_residual = rep.max_residual.max(r.re.abs());
            rep.max_imaginary = rep.max_imaginary.max(r.im.abs());
            rep.max_prediction_error = rep
                .max_prediction_error
                .max((r.re - predicted_square_residual(dw, dt, mu0)).abs());
            sum += r.re / dt;
            rep.n_steps += 1;
        }
    }
    rep.c_fit = rep.max_residual / dt;
    rep.mean_residual_over_dt = sum / rep.n_steps as f64;
    Ok(rep)
}

/// Truncated stochastic algebra spanned by `{1, |dW|, dt}` under the Itô
/// rules `|dW|² = dt`, `|dW|·dt = 0`, `dt² = 0`.
pub mod ito {
    use std::ops::{Add, Mul, Sub};

    /// `constant + noise·|dW| + drift·dt`.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct ItoScalar {
        pub constant: f64,
        pub noise: f64,
        pub drift: f64,
    }

    impl ItoScalar {
        pub const fn new(constant: f64, noise: f64, drift: f64) -> Self {
            Self {
                constant,
                noise,
                drift,
            }
        }

        pub const fn constant(c: f64) -> Self {
            Self::new(c, 0.0, 0.0)
        }

        pub const ABS_DW: ItoScalar = ItoScalar::new(0.0, 1.0, 0.0);
        pub const DT: ItoScalar = ItoScalar::new(0.0, 0.0, 1.0);

        pub fn scale(self, c: f64) -> Self {
            Self::new(self.constant * c, self.noise * c, self.drift * c)
        }

        pub fn eval(self, abs_dw: f64, dt: f64) -> f64 {
            self.constant + self.noise * abs_dw + self.drift * dt
        }
    }

    impl Add for ItoScalar {
        type Output = ItoScalar;
        fn add(self, o: Self) -> Self {
            Self::new(
                self.constant + o.constant,
                self.noise + o.noise,
                self.drift + o.drift,
            )
        }
    }

    impl Sub for ItoScalar {
        type Output = ItoScalar;
        fn sub(self, o: Self) -> Self {
            self + o.scale(-1.0)
        }
    }

    impl Mul for ItoScalar {
        type Output = ItoScalar;
        fn mul(self, o: Self) -> Self {
            Self::new(
                self.constant * o.constant,
                self.constant * o.noise + self.noise * o.constant,
                self.constant * o.drift + self.drift * o.constant + self.noise * o.noise,
            )
        }
    }

    /// The scalar bracket `μ0 + |dW|/(2μ0) − dt/(8μ0³)`.
    pub fn sqrt_bracket(mu0: f64) -> ItoScalar {
        ItoScalar::constant(mu0) + ItoScalar::ABS_DW.scale(0.5 / mu0)
            - ItoScalar::DT.scale(0.125 / (mu0 * mu0 * mu0))
    }

    /// The drifted bracket `1/2 + |dW| + (−1 + β·s)·dt` for a fixed sign `s`.
    pub fn drifted_bracket(beta: f64, s: f64) -> ItoScalar {
        ItoScalar::constant(0.5) + ItoScalar::ABS_DW + ItoScalar::DT.scale(-1.0 + beta * s)
    }
}
