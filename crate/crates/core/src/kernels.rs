//! Heat and Schrödinger kernels, the Wick rotation between them, and a
//! Crank–Nicolson solver for the complex Fokker–Planck equation
//!
//! ```text
//! ∂ψ/∂t = −μ ∂ψ/∂x + D ∂²ψ/∂x²,   μ, D ∈ ℂ.
//! ```
//!
//! For the square-root process `μ = (1+i)/2 − β(1−i)/2` and `D = −i/4`. The
//! drift is taken with the sign of the measured increment mean, so a packet
//! started at `x0` has its complex first moment at `x0 + μt`.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::process::SqrtParams;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest total amplification of any grid mode that [`fp_evolve`] accepts.
pub const MAX_MODAL_GROWTH: f64 = 1e6;

/// Boundary values must be below this fraction of the peak modulus.
pub const BOUNDARY_TOLERANCE: f64 = 1e-8;

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "t must be positive and finite, got {t}"
        )));
    }
    Ok(())
}

/// `(4πit)^{−1/2} exp(i x²/4t)` on the principal branch.
pub fn schrodinger_kernel(x: f64, t: f64) -> Result<Complex64> {
    check_time(t)?;
    let prefactor = Complex64::new(0.0, 4.0 * PI * t).sqrt().inv();
    Ok(prefactor * (I * (x * x / (4.0 * t))).exp())
}

/// `(4πt)^{−1/2} exp(−x²/4t)`.
pub fn heat_kernel(x: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok((4.0 * PI * t).powf(-0.5) * (-x * x / (4.0 * t)).exp())
}

/// `cos(iθ′) + i sin(iθ′)` with `θ′ = x²/4t − π/4`, the phase factor of the
/// Schrödinger kernel after `t → −it`. Evaluated as `exp(i·iθ′)`, which is
/// the same function without the cosh/sinh cancellation.
pub fn wick_bracket(x: f64, t: f64) -> Result<Complex64> {
    check_time(t)?;
    let arg = I * (x * x / (4.0 * t) - FRAC_PI_4);
    Ok((I * arg).exp())
}

/// Real factor that cancels the `e^{π/4}` the rotation produces from the
/// kernel's `−π/4` phase.
pub const WICK_NORMALIZATION: f64 = 0.455_938_127_765_996_2; // exp(-π/4)

/// The Wick-rotated Schrödinger kernel; equals [`heat_kernel`].
pub fn wick_rotate_kernel(x: f64, t: f64) -> Result<f64> {
    let bracket = wick_bracket(x, t)?;
    Ok(((4.0 * PI * t).powf(-0.5) * bracket * WICK_NORMALIZATION).re)
}

/// A complex sample in polar form. The phase is kept unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub rho: f64,
    pub theta: f64,
}

impl KernelSample {
    pub fn new(rho: f64, theta: f64) -> Result<Self> {
        if !(rho >= 0.0) || !theta.is_finite() {
            return invalid(format!(
                "need rho >= 0 and finite theta, got ({rho}, {theta})"
            ));
        }
        Ok(Self { rho, theta })
    }

    /// Polar form of `z` with the principal phase in `(−π, π]`. Callers that
    /// know a continuous phase should use [`KernelSample::new`] instead.
    pub fn from_complex(z: Complex64) -> Self {
        Self {
            rho: z.norm(),
            theta: z.arg(),
        }
    }
}

/// Sample-level Wick rotation `ρe^{iθ} ↦ ρ·e^{−(θ + π/4)}`: the image of a
/// Schrödinger-kernel value is the heat-kernel value at the same `(x, t)`.
pub fn wick_rotate_samples(samples: &[KernelSample]) -> Vec<f64> {
    samples
        .iter()
        .map(|s| s.rho * (-(s.theta + FRAC_PI_4)).exp())
        .collect()
}

/// Drift and diffusion of the complex Fokker–Planck equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FPParams {
    pub drift: Complex64,
    pub diffusion: Complex64,
    pub beta: f64,
}

impl FPParams {
    pub fn new(drift: Complex64, diffusion: Complex64) -> Self {
        Self {
            drift,
            diffusion,
            beta: 0.0,
        }
    }

    /// `μ = (1+i)/2 − β(1−i)/2`, `D = −i/4`.
    pub fn from_sqrt_params(p: &SqrtParams) -> Self {
        let beta = p.beta();
        Self {
            drift: Complex64::new(0.5, 0.5) - Complex64::new(0.5, -0.5) * beta,
            diffusion: Complex64::new(0.0, -0.25),
            beta,
        }
    }
}

/// `(4πDt)^{−1/2} exp(−(x − μt)²/(4Dt))`, principal branch.
pub fn fp_analytic_solution(x: f64, t: f64, p: &FPParams) -> Result<Complex64> {
    check_time(t)?;
    if p.diffusion == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("diffusion must be nonzero".into()));
    }
    let four_dt = p.diffusion * (4.0 * t);
    let shift = Complex64::new(x, 0.0) - p.drift * t;
    Ok((four_dt * PI).sqrt().inv() * (-(shift * shift) / four_dt).exp())
}

/// Exact solution from the initial packet `exp(−(x − x0)²/(2 s0²))`.
pub fn gaussian_packet(x: f64, t: f64, x0: f64, s0: f64, p: &FPParams) -> Complex64 {
    let s2 = Complex64::new(s0 * s0, 0.0);
    let var = s2 + p.diffusion * (2.0 * t);
    let shift = Complex64::new(x - x0, 0.0) - p.drift * t;
    (s2 / var).sqrt() * (-(shift * shift) / (var * 2.0)).exp()
}

/// Complex values on a uniform grid over `[x_min, x_max]`, endpoints included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub x_min: f64,
    pub x_max: f64,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(x_min: f64, x_max: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return invalid(format!("need finite x_min < x_max, got [{x_min}, {x_max}]"));
        }
        if values.len() < 3 {
            return invalid("a grid function needs at least 3 points");
        }
        Ok(Self {
            x_min,
            x_max,
            values,
        })
    }

    pub fn from_fn(
        x_min: f64,
        x_max: f64,
        n_points: usize,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        if n_points < 3 {
            return invalid("a grid function needs at least 3 points");
        }
        let dx = (x_max - x_min) / (n_points - 1) as f64;
        Self::new(
            x_min,
            x_max,
            (0..n_points).map(|j| f(x_min + j as f64 * dx)).collect(),
        )
    }

    pub fn n_points(&self) -> usize {
        self.values.len()
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points() - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_points()).map(|j| self.x(j)).collect()
    }

    /// Trapezoidal `∫ψ dx`.
    pub fn integral(&self) -> Complex64 {
        mass(&self.values, self.dx())
    }

    /// `∫xψ dx / ∫ψ dx`.
    pub fn first_moment(&self) -> Complex64 {
        let m1: Complex64 = self
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| v * self.x(j))
            .sum();
        m1 * self.dx() / self.integral()
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn mass(values: &[Complex64], dx: f64) -> Complex64 {
    let n = values.len();
    let inner: Complex64 = values[1..n - 1].iter().sum();
    (inner + (values[0] + values[n - 1]) * 0.5) * dx
}

/// Largest `|g(k)|^n_steps` over grid wavenumbers for the Crank–Nicolson
/// amplification factor `g = (1 + dt·λ/2)/(1 − dt·λ/2)`.
pub fn max_modal_growth(p: &FPParams, dx: f64, dt: f64, n_steps: usize) -> f64 {
    const SAMPLES: usize = 4096;
    let mut worst = f64::NEG_INFINITY;
    for s in 0..=SAMPLES {
        let th = PI * s as f64 / SAMPLES as f64;
        let lambda =
            -p.drift * I * (th.sin() / dx) + p.diffusion * ((2.0 * th.cos() - 2.0) / (dx * dx));
        let g = (1.0 + lambda * (dt / 2.0)) / (1.0 - lambda * (dt / 2.0));
        worst = worst.max(g.norm().ln());
    }
    (worst * n_steps as f64).exp()
}

fn check_solver_config(
    initial: &GridFunction,
    p: &FPParams,
    dt: f64,
    n_steps: usize,
) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Config(format!(
            "dt must be positive and finite, got {dt}"
        )));
    }
    if !(p.drift.is_finite() && p.diffusion.is_finite()) {
        return Err(Error::Config("drift and diffusion must be finite".into()));
    }
    if p.diffusion.re < 0.0 {
        return Err(Error::Config(format!(
            "diffusion real part must be >= 0 (got {}); backward diffusion is ill-posed",
            p.diffusion.re
        )));
    }
    let dx = initial.dx();
    let courant = p.drift.norm() * dt / dx;
    if courant > 0.5 {
        return Err(Error::Config(format!(
            "advective Courant number |mu|*dt/dx = {courant:.4} exceeds 1/2"
        )));
    }
    let growth = max_modal_growth(p, dx, dt, n_steps);
    if growth > MAX_MODAL_GROWTH {
        return Err(Error::Config(format!(
            "modal growth bound violated: a grid mode is amplified by {growth:.3e} (limit {MAX_MODAL_GROWTH:e})"
        )));
    }
    let peak = initial.max_modulus();
    let n = initial.n_points();
    let edge = [0, 1, n - 2, n - 1]
        .iter()
        .map(|&j| initial.values[j].norm())
        .fold(0.0, f64::max);
    if !(peak > 0.0) || edge > BOUNDARY_TOLERANCE * peak {
        return Err(Error::Config(format!(
            "domain width bound violated: boundary modulus {edge:.3e} exceeds {BOUNDARY_TOLERANCE:e} of the peak {peak:.3e}"
        )));
    }
    Ok(())
}

/// Constant-coefficient tridiagonal system with a precomputed Thomas
/// factorization.
struct Tridiagonal {
    lower: Complex64,
    /// Modified upper coefficients `c'_j`.
    c_prime: Vec<Complex64>,
    /// `1 / (b − a c'_{j−1})`.
    inv_denom: Vec<Complex64>,
}

impl Tridiagonal {
    fn new(lower: Complex64, diag: Complex64, upper: Complex64, n: usize) -> Self {
        let mut c_prime = Vec::with_capacity(n);
        let mut inv_denom = Vec::with_capacity(n);
        let mut prev = Complex64::new(0.0, 0.0);
        for _ in 0..n {
            let inv = (diag - lower * prev).inv();
            prev = upper * inv;
            c_prime.push(prev);
            inv_denom.push(inv);
        }
        Self {
            lower,
            c_prime,
            inv_denom,
        }
    }

    fn solve(&self, rhs: &mut [Complex64]) {
        let n = rhs.len();
        let mut prev = Complex64::new(0.0, 0.0);
        for j in 0..n {
            prev = (rhs[j] - self.lower * prev) * self.inv_denom[j];
            rhs[j] = prev;
        }
        for j in (0..n.saturating_sub(1)).rev() {
            rhs[j] = rhs[j] - self.c_prime[j] * rhs[j + 1];
        }
    }
}

/// Crank–Nicolson evolution with zero boundary values.
pub fn fp_evolve(
    initial: &GridFunction,
    p: &FPParams,
    dt: f64,
    n_steps: usize,
) -> Result<GridFunction> {
    fp_evolve_observed(initial, p, dt, n_steps, |_, _| {})
}

/// [`fp_evolve`], calling `observe(step, values)` after every step.
pub fn fp_evolve_observed(
    initial: &GridFunction,
    p: &FPParams,
    dt: f64,
    n_steps: usize,
    mut observe: impl FnMut(usize, &[Complex64]),
) -> Result<GridFunction> {
    check_solver_config(initial, p, dt, n_steps)?;
    let dx = initial.dx();
    let n = initial.n_points();
    let adv = p.drift / (2.0 * dx);
    let dif = p.diffusion / (dx * dx);
    // L ψ_j = a ψ_{j−1} + b ψ_j + c ψ_{j+1}
    let (a, b, c) = (adv + dif, dif * -2.0, -adv + dif);
    let h = dt / 2.0;
    let system = Tridiagonal::new(-a * h, 1.0 - b * h, -c * h, n - 2);

    let mut psi = initial.values.clone();
    psi[0] = Complex64::new(0.0, 0.0);
    psi[n - 1] = Complex64::new(0.0, 0.0);
    let mut rhs = vec![Complex64::new(0.0, 0.0); n - 2];
    for step in 1..=n_steps {
        for j in 1..n - 1 {
            rhs[j - 1] = psi[j] + (a * psi[j - 1] + b * psi[j] + c * psi[j + 1]) * h;
        }
        system.solve(&mut rhs);
        psi[1..n - 1].copy_from_slice(&rhs);
        observe(step, &psi);
    }
    GridFunction::new(initial.x_min, initial.x_max, psi)
}

/// Domain `[c − 10σ, c + 10σ]` around the packet's final position, where
/// `σ` is the final modulus width of a packet of initial width `s0`.
pub fn default_domain(x0: f64, s0: f64, p: &FPParams, t_final: f64) -> (f64, f64) {
    let var = Complex64::new(s0 * s0, 0.0) + p.diffusion * (2.0 * t_final);
    let sigma = (var.norm_sqr() / var.re).sqrt().max(s0);
    let center = x0 + p.drift.re * t_final;
    (center - 10.0 * sigma, center + 10.0 * sigma)
}

/// Default number of grid points for [`default_domain`].
pub const DEFAULT_POINTS: usize = 2048;

/// One refinement level of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLevel {
    pub n_points: usize,
    pub dt: f64,
    /// Max-norm error against [`gaussian_packet`].
    pub error: f64,
    /// Largest per-step change of `|∫ψ dx|`.
    pub max_mass_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub levels: Vec<ConvergenceLevel>,
    /// `error_L / error_{L+1}`.
    pub error_ratios: Vec<f64>,
    /// `‖u_L − u_{L+1}‖ / ‖u_{L+1} − u_{L+2}‖` on the coarsest grid's nodes.
    pub self_ratios: Vec<f64>,
}

/// Evolves the packet `exp(−(x − x0)²/(2 s0²))` to `t_final` on successively
/// halved `dx` and `dt`. Level `L` uses `(base_points − 1)·2^L + 1` points
/// and `base_steps·2^L` steps so that grids nest.
#[allow(clippy::too_many_arguments)]
pub fn fp_convergence(
    p: &FPParams,
    x0: f64,
    s0: f64,
    t_final: f64,
    domain: (f64, f64),
    base_points: usize,
    base_steps: usize,
    levels: usize,
) -> Result<ConvergenceStudy> {
    if levels < 2 || base_steps == 0 {
        return invalid("a convergence study needs at least 2 levels and 1 step");
    }
    let mut out = Vec::with_capacity(levels);
    let mut coarse_samples: Vec<Vec<Complex64>> = Vec::with_capacity(levels);
    for level in 0..levels {
        let scale = 1usize << level;
        let n = (base_points - 1) * scale + 1;
        let steps = base_steps * scale;
        let dt = t_final / steps as f64;
        let init = GridFunction::from_fn(domain.0, domain.1, n, |x| {
            Complex64::new((-(x - x0) * (x - x0) / (2.0 * s0 * s0)).exp(), 0.0)
        })?;
        let dx = init.dx();
        let mut prev_mass = init.integral();
        let mut drift = 0.0_f64;
        let fin = fp_evolve_observed(&init, p, dt, steps, |_, v| {
            let m = mass(v, dx);
            drift = drift.max((m - prev_mass).norm());
            prev_mass = m;
        })?;
        let error = fin
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| (v - gaussian_packet(fin.x(j), t_final, x0, s0, p)).norm())
            .fold(0.0, f64::max);
        coarse_samples.push(fin.values.iter().step_by(scale).copied().collect());
        out.push(ConvergenceLevel {
            n_points: n,
            dt,
            error,
            max_mass_drift: drift,
        });
    }
    let error_ratios = out.windows(2).map(|w| w[0].error / w[1].error).collect();
    let diffs: Vec<f64> = coarse_samples
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        })
        .collect();
    let self_ratios = diffs.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(ConvergenceStudy {
        levels: out,
        error_ratios,
        self_ratios,
    })
}
