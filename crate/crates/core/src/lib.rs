//! Complex-valued "square root of a Wiener process" simulation.
//!
//! The crate builds the process `dX` with `(dX)² = dW` out of elementary
//! pieces and checks, by Monte Carlo, that its diffusion is governed by a
//! Fokker–Planck equation with an imaginary diffusion coefficient.
//!
//! * [`paths`]: seeded per-path random streams, Wiener increments, the
//!   sign/modulus decomposition of `dW` and the `{1, i}`-valued Φ processes.
//! * [`clifford`]: 2×2 complex matrices and the Pauli embedding that removes
//!   the `μ0²·sgn(dW)` shift from the square of the scalar process.
//! * [`process`]: Euler–Maruyama integration of the scalar, drifted and
//!   general square-root processes.
//! * [`stats`]: pseudo-variance estimators, reference-table statistics,
//!   histograms and Gaussian fits.
//! * [`kernels`]: heat and Schrödinger kernels, the Wick rotation, and a
//!   Crank–Nicolson solver for the complex Fokker–Planck equation.
//!
//! ```
//! use sqrtwiener::paths::TimeGrid;
//! use sqrtwiener::process::{integrate_sqrt, SqrtParams};
//! use sqrtwiener::stats::complex_mean;
//!
//! let grid = TimeGrid::new(0.001, 200).unwrap();
//! let ens = integrate_sqrt(&grid, 50, &SqrtParams::default(), 7).unwrap();
//! let mean = complex_mean(ens.all_increments()).unwrap();
//! // each step is about (1/2)·Φ with Φ ∈ {1, i} equally likely
//! assert!((mean.value.re - 0.26).abs() < 0.02);
//! assert!((mean.value.im - 0.26).abs() < 0.02);
//! ```

pub mod clifford;
mod error;
pub mod kernels;
pub mod paths;
pub mod process;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Version tag written into every output schema.
pub const ARTIFACT_VERSION: &str = concat!("sqrtwiener/", env!("CARGO_PKG_VERSION"), "/schema-1");

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/paths.md")]
    pub struct Paths;
    #[doc = include_str!("../../../book/src/clifford.md")]
    pub struct Clifford;
    #[doc = include_str!("../../../book/src/process.md")]
    pub struct Process;
    #[doc = include_str!("../../../book/src/statistics.md")]
    pub struct Statistics;
    #[doc = include_str!("../../../book/src/kernels.md")]
    pub struct Kernels;
    #[doc = include_str!("../../../book/src/fokker_planck.md")]
    pub struct FokkerPlanck;
}
