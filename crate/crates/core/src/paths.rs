//! Seeded random streams and the elementary processes built on them.
//!
//! Every path draws from its own ChaCha8 stream, keyed by the master seed and
//! selected by the path index, so a path's increments never depend on how many
//! other paths exist or on which thread generated them. Normals come from the
//! Box–Muller transform: each pair of consecutive increments consumes exactly
//! two 64-bit words, which keeps step `k` of a path at a fixed stream offset.
//!
//! The sign convention is `sgn(0) = +1`.

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};

/// Name of the generator recorded in run manifests.
pub const RNG_NAME: &str = "chacha8-stream+box-muller";

/// Uniform time discretization of `[t0, t0 + n_steps * dt]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t0: f64,
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    /// Grid starting at `t0 = 0`.
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        Self::with_origin(0.0, dt, n_steps)
    }

    pub fn with_origin(t0: f64, dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return invalid(format!("dt must be positive and finite, got {dt}"));
        }
        if n_steps == 0 {
            return invalid("n_steps must be at least 1");
        }
        if !t0.is_finite() || !(dt * n_steps as f64).is_finite() {
            return invalid("time horizon must be finite");
        }
        Ok(Self { t0, dt, n_steps })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Total horizon `T = n_steps * dt`.
    pub fn horizon(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    /// Time of grid node `k` (`0..=n_steps`).
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }
}

/// Identifies one path's random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub path_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, path_index: u64) -> Self {
        Self {
            master_seed,
            path_index,
        }
    }
}

/// A per-path random stream.
#[derive(Debug, Clone)]
pub struct PathRng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

/// Stream for `seed` on lane 0, the lane used for Wiener drivers.
pub fn make_rng(seed: SeedSpec) -> PathRng {
    make_lane_rng(seed, 0)
}

/// Stream for `seed` on an auxiliary lane. Distinct lanes are keyed
/// separately, so lane `a` of a path is independent of lane `b`.
pub fn make_lane_rng(seed: SeedSpec, lane: u64) -> PathRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&lane.to_le_bytes());
    let mut inner = ChaCha8Rng::from_seed(key);
    inner.set_stream(seed.path_index);
    PathRng { inner, spare: None }
}

impl PathRng {
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `(0, 1]`.
    fn open_unit(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[0, 1)`.
    fn half_open_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw. Draws are produced in Box–Muller pairs.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.open_unit();
        let u2 = self.half_open_unit();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

/// Per-step Wiener increments on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerIncrements {
    grid: TimeGrid,
    dw: Vec<f64>,
}

impl WienerIncrements {
    /// Wraps explicit increments; the length must match the grid.
    pub fn from_raw(grid: TimeGrid, dw: Vec<f64>) -> Result<Self> {
        if dw.len() != grid.n_steps() {
            return invalid(format!(
                "expected {} increments, got {}",
                grid.n_steps(),
                dw.len()
            ));
        }
        Ok(Self { grid, dw })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dw(&self) -> &[f64] {
        &self.dw
    }

    /// Sampled path `W(t_k)`, `k = 0..=n_steps`, with `W(t0) = 0`.
    pub fn cumulative(&self) -> Vec<f64> {
        cumulative_real(&self.dw)
    }
}

pub(crate) fn cumulative_real(increments: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(increments.len() + 1);
    let mut acc = 0.0;
    out.push(acc);
    for &d in increments {
        acc += d;
        out.push(acc);
    }
    out
}

/// Fills `out` with `N(0, dt)` draws from `rng`.
pub(crate) fn fill_wiener(dt: f64, rng: &mut PathRng, out: &mut [f64]) {
    let scale = dt.sqrt();
    for d in out.iter_mut() {
        *d = rng.standard_normal() * scale;
    }
}

pub fn sample_wiener(grid: &TimeGrid, rng: &mut PathRng) -> WienerIncrements {
    let mut dw = vec![0.0; grid.n_steps()];
    fill_wiener(grid.dt(), rng, &mut dw);
    WienerIncrements { grid: *grid, dw }
}

/// A value of `sgn`, restricted to `{+1, -1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `sgn(x)` with the tie-break `sgn(0) = +1` (also `sgn(-0.0) = +1`).
#[inline]
pub fn sgn(x: f64) -> Sign {
    if x >= 0.0 {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignSequence {
    signs: Vec<Sign>,
}

impl SignSequence {
    pub fn new(signs: Vec<Sign>) -> Self {
        Self { signs }
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.signs.iter().map(|s| s.as_f64()).collect()
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }
}

pub fn sign_of(w: &WienerIncrements) -> SignSequence {
    SignSequence::new(w.dw.iter().map(|&d| sgn(d)).collect())
}

pub fn abs_of(w: &WienerIncrements) -> Vec<f64> {
    w.dw.iter().map(|d| d.abs()).collect()
}

/// A sequence with every element exactly `1` or `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiSequence {
    phi: Vec<Complex64>,
}

impl PhiSequence {
    pub fn values(&self) -> &[Complex64] {
        &self.phi
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}

/// `(1 + b)/2 + i (1 - b)/2`.
#[inline]
pub fn phi_of_sign(b: Sign) -> Complex64 {
    let b = b.as_f64();
    Complex64::new((1.0 + b) / 2.0, (1.0 - b) / 2.0)
}

/// `(1 - i)/2 * sgn(dw) + (1 + i)/2`.
#[inline]
pub fn phi_half_of(dw: f64) -> Complex64 {
    Complex64::new(0.5, -0.5) * sgn(dw).as_f64() + Complex64::new(0.5, 0.5)
}

pub fn phi_from_bernoulli(b: &SignSequence) -> PhiSequence {
    PhiSequence {
        phi: b.signs.iter().map(|&s| phi_of_sign(s)).collect(),
    }
}

pub fn phi_half(w: &WienerIncrements) -> PhiSequence {
    PhiSequence {
        phi: w.dw.iter().map(|&d| phi_half_of(d)).collect(),
    }
}

/// Allocates a zeroed `n_paths x n_steps` buffer, surfacing exhaustion as an error.
pub(crate) fn alloc_ensemble<T: Clone + Default>(n_paths: usize, n_steps: usize) -> Result<Vec<T>> {
    let too_big = || Error::Allocation {
        n_paths,
        n_steps,
        bytes: n_paths
            .saturating_mul(n_steps)
            .saturating_mul(std::mem::size_of::<T>()),
    };
    let len = n_paths.checked_mul(n_steps).ok_or_else(too_big)?;
    let mut buf = Vec::new();
    buf.try_reserve_exact(len).map_err(|_| too_big())?;
    buf.resize(len, T::default());
    Ok(buf)
}

/// `n_paths` Wiener paths stored as increments, row-major by path.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPathEnsemble {
    grid: TimeGrid,
    n_paths: usize,
    increments: Vec<f64>,
}

impl RealPathEnsemble {
    /// Samples paths `0..n_paths` of `master_seed`. Parallel over paths;
    /// the result does not depend on the thread count.
    pub fn sample(grid: &TimeGrid, n_paths: usize, master_seed: u64) -> Result<Self> {
        if n_paths == 0 {
            return invalid("n_paths must be at least 1");
        }
        let n = grid.n_steps();
        let mut increments = alloc_ensemble::<f64>(n_paths, n)?;
        increments
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(p, row)| {
                let mut rng = make_rng(SeedSpec::new(master_seed, p as u64));
                fill_wiener(grid.dt(), &mut rng, row);
            });
        Ok(Self {
            grid: *grid,
            n_paths,
            increments,
        })
    }

    /// Builds an ensemble from explicit per-path increments.
    pub fn from_paths(grid: &TimeGrid, paths: &[Vec<f64>]) -> Result<Self> {
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

    pub fn increments(&self, path: usize) -> &[f64] {
        let n = self.grid.n_steps();
        &self.increments[path * n..(path + 1) * n]
    }

    pub fn path(&self, path: usize) -> WienerIncrements {
        WienerIncrements {
            grid: self.grid,
            dw: self.increments(path).to_vec(),
        }
    }

    /// Cumulative values `W(t_k)` of one path, starting at 0.
    pub fn values(&self, path: usize) -> Vec<f64> {
        cumulative_real(self.increments(path))
    }

    /// `W(T)` for every path.
    pub fn final_values(&self) -> Vec<f64> {
        (0..self.n_paths)
            .map(|p| self.increments(p).iter().sum())
            .collect()
    }

    /// SHA-256 of the increments (little-endian f64, path-major), hex encoded.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for d in &self.increments {
            h.update(d.to_le_bytes());
        }
        hex_string(&h.finalize())
    }
}

pub(crate) fn hex_string(bytes: &[u8]) -> String {
    use std::fmt::Write;
    bytes
        .iter()
        .fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}
