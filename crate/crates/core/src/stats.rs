//! Ensemble estimators, histograms and Gaussian fits.
//!
//! Complex variances are pseudo-variances, `E[Z²] − (E[Z])²`, squaring
//! without conjugation. Standard errors of means are analytic
//! (`sd/√n` per component); standard errors of variance-like quantities use
//! batch means over up to [`BATCHES`] equal batches.
//!
//! Ensemble reductions first compute one summary per path, then put the
//! summaries into a canonical order keyed by a hash of their contents and
//! fold them pairwise. The output therefore does not depend on the order in
//! which paths are stored or on how they were scheduled.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::paths::RealPathEnsemble;
use crate::process::{ComplexPathEnsemble, SqrtParams};

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 100;

/// An estimate with a component-wise standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexStat {
    pub value: Complex64,
    /// `None` when the sample is too small to estimate it.
    pub stderr: Option<Complex64>,
    pub n: usize,
}

impl ComplexStat {
    fn scaled(self, c: f64) -> Self {
        Self {
            value: self.value * c,
            stderr: self.stderr.map(|e| e * c.abs()),
            n: self.n,
        }
    }

    /// Whether each component of `value` is within `k` standard errors of
    /// `target`, allowing a few ulps of rounding for components whose
    /// standard error is itself at rounding level.
    pub fn within_stderrs(&self, target: Complex64, k: f64) -> bool {
        let slack = 8.0 * f64::EPSILON * self.value.norm().max(target.norm());
        match self.stderr {
            Some(e) => {
                (self.value.re - target.re).abs() <= k * e.re + slack
                    && (self.value.im - target.im).abs() <= k * e.im + slack
            }
            None => false,
        }
    }
}

/// Which convention produced a set of numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorTag {
    /// Increment statistics divided by the process scale (`dt` for the
    /// Wiener process, `μ0` and `μ0²` for the square-root process).
    IncrementNormalized,
    /// Per-path time averages of the sampled path, averaged over paths.
    PathTemporal,
    /// The conventions under which the published reference values come out:
    /// `D = √var / 2` for the Wiener row, `var = D = σ²/2` for the
    /// square-root row.
    PublishedConvention,
}

impl EstimatorTag {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorTag::IncrementNormalized => "increment-normalized",
            EstimatorTag::PathTemporal => "path-temporal",
            EstimatorTag::PublishedConvention => "published-convention",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: ComplexStat,
    pub pseudo_variance: ComplexStat,
    pub diffusion: ComplexStat,
    pub estimator_tag: EstimatorTag,
}

/// Running complex moments: mean, pseudo-M2 `Σ(z − z̄)²`, and the
/// per-component M2s needed for standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Moments {
    n: usize,
    mean: Complex64,
    m2: Complex64,
    m2_re: f64,
    m2_im: f64,
}

impl Moments {
    const EMPTY: Moments = Moments {
        n: 0,
        mean: Complex64::new(0.0, 0.0),
        m2: Complex64::new(0.0, 0.0),
        m2_re: 0.0,
        m2_im: 0.0,
    };

    /// Two-pass moments of a slice.
    fn of(samples: &[Complex64]) -> Self {
        if samples.is_empty() {
            return Self::EMPTY;
        }
        let n = samples.len();
        let mean = tree_sum(samples) / n as f64;
        let mut m2 = Complex64::new(0.0, 0.0);
        let (mut m2_re, mut m2_im) = (0.0, 0.0);
        for z in samples {
            let d = z - mean;
            m2 += d * d;
            m2_re += d.re * d.re;
            m2_im += d.im * d.im;
        }
        Self {
            n,
            mean,
            m2,
            m2_re,
            m2_im,
        }
    }

    fn of_real(samples: &[f64]) -> Self {
        let z: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::of(&z)
    }

    /// Pairwise (Chan et al.) merge.
    fn merge(a: Self, b: Self) -> Self {
        if a.n == 0 {
            return b;
        }
        if b.n == 0 {
            return a;
        }
        let n = a.n + b.n;
        let (na, nb, nf) = (a.n as f64, b.n as f64, n as f64);
        let d = b.mean - a.mean;
        let w = na * nb / nf;
        Self {
            n,
            mean: a.mean + d * (nb / nf),
            m2: a.m2 + b.m2 + d * d * w,
            m2_re: a.m2_re + b.m2_re + d.re * d.re * w,
            m2_im: a.m2_im + b.m2_im + d.im * d.im * w,
        }
    }

    fn pseudo_variance(&self) -> Complex64 {
        self.m2 / (self.n as f64 - 1.0)
    }

    fn mean_stat(&self) -> ComplexStat {
        let stderr = (self.n >= 2).then(|| {
            let k = 1.0 / ((self.n as f64 - 1.0) * self.n as f64);
            Complex64::new((self.m2_re * k).sqrt(), (self.m2_im * k).sqrt())
        });
        ComplexStat {
            value: self.mean,
            stderr,
            n: self.n,
        }
    }
}

fn tree_sum(x: &[Complex64]) -> Complex64 {
    if x.len() <= 8 {
        return x.iter().sum();
    }
    let (a, b) = x.split_at(x.len() / 2);
    tree_sum(a) + tree_sum(b)
}

/// Fixed-shape pairwise fold.
fn tree_reduce<T: Copy>(items: &[T], identity: T, f: &impl Fn(T, T) -> T) -> T {
    match items.len() {
        0 => identity,
        1 => items[0],
        n => {
            let (a, b) = items.split_at(n / 2);
            f(tree_reduce(a, identity, f), tree_reduce(b, identity, f))
        }
    }
}

/// Standard error of the mean of a set of batch estimates.
fn batch_stderr(estimates: &[Complex64]) -> Option<Complex64> {
    let k = estimates.len();
    if k < 2 {
        return None;
    }
    let m = Moments::of(estimates);
    let kf = k as f64;
    Some(Complex64::new(
        (m.m2_re / (kf - 1.0)).sqrt() / kf.sqrt(),
        (m.m2_im / (kf - 1.0)).sqrt() / kf.sqrt(),
    ))
}

/// Splits `len` items into `min(BATCHES, len)` contiguous equal batches,
/// dropping the remainder.
fn batch_ranges(len: usize) -> Vec<std::ops::Range<usize>> {
    let k = BATCHES.min(len);
    if k == 0 {
        return Vec::new();
    }
    let size = len / k;
    (0..k).map(|b| b * size..(b + 1) * size).collect()
}

pub fn complex_mean(samples: &[Complex64]) -> Result<ComplexStat> {
    if samples.is_empty() {
        return invalid("mean of an empty sample");
    }
    Ok(Moments::of(samples).mean_stat())
}

/// `(1/(n−1)) Σ (z − z̄)²` without conjugation; stderr from batch means.
pub fn complex_pseudo_variance(samples: &[Complex64]) -> Result<ComplexStat> {
    if samples.len() < 2 {
        return invalid(format!(
            "pseudo-variance needs at least 2 samples, got {}",
            samples.len()
        ));
    }
    let value = Moments::of(samples).pseudo_variance();
    let estimates: Vec<Complex64> = batch_ranges(samples.len())
        .into_iter()
        .filter(|r| r.len() >= 2)
        .map(|r| Moments::of(&samples[r]).pseudo_variance())
        .collect();
    Ok(ComplexStat {
        value,
        stderr: batch_stderr(&estimates),
        n: samples.len(),
    })
}

/// Closed-form mean and pseudo-variance of one square-root increment.
///
/// Each step is `a(s)·Φ(s)` with `a(s) = A_s + B·|dW|`, `s = sgn dW`
/// independent of `|dW|`, `E|dW| = √(2dt/π)` and `E dW² = dt`.
pub fn sqrt_increment_expectation(params: &SqrtParams, dt: f64) -> (Complex64, Complex64) {
    let m1 = (2.0 * dt / std::f64::consts::PI).sqrt();
    let (a_plus, a_minus, b) = if params.is_drifted_form() {
        let beta = params.beta();
        (0.5 + (-1.0 + beta) * dt, 0.5 + (-1.0 - beta) * dt, 1.0)
    } else {
        let mu0 = params.mu0();
        let a = mu0 - dt * 0.125 / (mu0 * mu0 * mu0);
        (a, a, 0.5 / mu0)
    };
    let first = |a: f64| a + b * m1;
    let second = |a: f64| a * a + 2.0 * a * b * m1 + b * b * dt;
    let mean = Complex64::new(first(a_plus), first(a_minus)) * 0.5;
    let e_sq = (second(a_plus) - second(a_minus)) * 0.5;
    (mean, Complex64::new(e_sq, 0.0) - mean * mean)
}

/// Exact expectation of the per-path temporal variance of `W` over the
/// `n_steps + 1` grid nodes (including `W(0) = 0`).
pub fn brownian_temporal_variance_expectation(dt: f64, n_steps: usize) -> f64 {
    let n = n_steps as f64;
    // E[mean of W²] − E[(mean of W)²] with Σ_{j,k} min(j,k) = N(N+1)(2N+1)/6
    dt * n / 2.0 - dt * n * (2.0 * n + 1.0) / (6.0 * (n + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessKind {
    Brownian,
    SquareRoot,
}

impl ProcessKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProcessKind::Brownian => "brownian",
            ProcessKind::SquareRoot => "square-root",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub process: ProcessKind,
    pub stats: SummaryStats,
}

/// Means, variances and diffusion coefficients of both processes under
/// every estimator convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1 {
    pub rows: Vec<Table1Row>,
}

impl Table1 {
    pub fn get(&self, process: ProcessKind, tag: EstimatorTag) -> Option<&SummaryStats> {
        self.rows
            .iter()
            .find(|r| r.process == process && r.stats.estimator_tag == tag)
            .map(|r| &r.stats)
    }
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn content_key(bits: &[u64]) -> u64 {
    bits.iter()
        .fold(0x9e37_79b9_7f4a_7c15, |h, &b| mix64(h ^ b).rotate_left(17))
}

/// Sorts by content hash, breaking ties on the raw bits.
fn canonical_order<T>(items: &mut [T], bits: impl Fn(&T) -> Vec<u64>) {
    items.sort_by_cached_key(|t| {
        let b = bits(t);
        (content_key(&b), b)
    });
}

#[derive(Debug, Clone, Copy)]
struct BrownianPath {
    temporal_mean: f64,
    temporal_var: f64,
    inc: Moments,
}

fn moments_bits(m: &Moments) -> [u64; 4] {
    [
        m.mean.re.to_bits(),
        m.mean.im.to_bits(),
        m.m2.re.to_bits(),
        m.m2.im.to_bits(),
    ]
}

fn brownian_path(values: &[f64], increments: &[f64]) -> BrownianPath {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / n;
    BrownianPath {
        temporal_mean: mean,
        temporal_var: var,
        inc: Moments::of_real(increments),
    }
}

fn real_stat(values: &[f64]) -> ComplexStat {
    let z: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut s = Moments::of(&z).mean_stat();
    s.stderr = s.stderr.map(|e| Complex64::new(e.re, 0.0));
    s
}

/// Mean of `values` with a batch-means standard error.
fn batched_real_stat(values: &[f64]) -> ComplexStat {
    let mut s = real_stat(values);
    let estimates: Vec<Complex64> = batch_ranges(values.len())
        .into_iter()
        .map(|r| Complex64::new(values[r.clone()].iter().sum::<f64>() / r.len() as f64, 0.0))
        .collect();
    s.stderr = batch_stderr(&estimates).map(|e| Complex64::new(e.re, 0.0));
    s
}

/// Pseudo-variance of pooled increments with a batch-means stderr over
/// batches of paths.
fn pooled_variance(per_path: &[Moments]) -> (Moments, ComplexStat) {
    let merge = |a, b| Moments::merge(a, b);
    let pooled = tree_reduce(per_path, Moments::EMPTY, &merge);
    let estimates: Vec<Complex64> = batch_ranges(per_path.len())
        .into_iter()
        .map(|r| tree_reduce(&per_path[r], Moments::EMPTY, &merge))
        .filter(|m| m.n >= 2)
        .map(|m| m.pseudo_variance())
        .collect();
    let var = ComplexStat {
        value: pooled.pseudo_variance(),
        stderr: batch_stderr(&estimates),
        n: pooled.n,
    };
    (pooled, var)
}

fn with_tag(
    mean: ComplexStat,
    var: ComplexStat,
    diffusion: ComplexStat,
    tag: EstimatorTag,
) -> SummaryStats {
    SummaryStats {
        mean,
        pseudo_variance: var,
        diffusion,
        estimator_tag: tag,
    }
}

fn brownian_rows(wiener: &RealPathEnsemble) -> Vec<SummaryStats> {
    let dt = wiener.grid().dt();
    let mut paths: Vec<BrownianPath> = (0..wiener.n_paths())
        .map(|p| brownian_path(&wiener.values(p), wiener.increments(p)))
        .collect();
    canonical_order(&mut paths, |b| {
        let mut v = vec![b.temporal_mean.to_bits(), b.temporal_var.to_bits()];
        v.extend(moments_bits(&b.inc));
        v
    });

    let means: Vec<f64> = paths.iter().map(|b| b.temporal_mean).collect();
    let vars: Vec<f64> = paths.iter().map(|b| b.temporal_var).collect();
    let mean = real_stat(&means);
    let var = batched_real_stat(&vars);

    let half_var = var.scaled(0.5);
    let v = var.value.re;
    let root_d = ComplexStat {
        value: Complex64::new(v.sqrt() / 2.0, 0.0),
        stderr: var
            .stderr
            .map(|e| Complex64::new(e.re / (4.0 * v.sqrt()), 0.0)),
        n: var.n,
    };

    let inc: Vec<Moments> = paths.iter().map(|b| b.inc).collect();
    let (pooled, inc_var) = pooled_variance(&inc);
    let inc_var = inc_var.scaled(1.0 / dt);
    let inc_mean = pooled.mean_stat().scaled(1.0 / dt);

    vec![
        with_tag(mean, var, half_var, EstimatorTag::PathTemporal),
        with_tag(mean, var, root_d, EstimatorTag::PublishedConvention),
        with_tag(
            inc_mean,
            inc_var,
            inc_var.scaled(0.5),
            EstimatorTag::IncrementNormalized,
        ),
    ]
}

fn sqrt_rows(ens: &ComplexPathEnsemble, params: &SqrtParams) -> Vec<SummaryStats> {
    let mut per_path: Vec<Moments> = (0..ens.n_paths())
        .map(|p| Moments::of(ens.increments(p)))
        .collect();
    canonical_order(&mut per_path, |m| moments_bits(m).to_vec());
    let (pooled, var) = pooled_variance(&per_path);
    let mu0 = params.mu0();
    let mean = pooled.mean_stat().scaled(1.0 / mu0);
    let var = var.scaled(1.0 / (mu0 * mu0));
    let half = var.scaled(0.5);
    vec![
        with_tag(mean, var, half, EstimatorTag::IncrementNormalized),
        with_tag(mean, half, half, EstimatorTag::PublishedConvention),
    ]
}

/// Reference-table statistics for a Wiener ensemble and a square-root
/// ensemble on the same grid.
///
/// Wiener rows: `path-temporal` (time mean and variance of `W` per path,
/// averaged over paths; `D = var/2`), `published-convention` (same, with
/// `D = √var/2`) and `increment-normalized` (`mean(ΔW)/Δt`,
/// `Var(ΔW)/Δt`, `D = Var(ΔW)/(2Δt)`).
///
/// Square-root rows: `increment-normalized` (increment mean over `μ0`,
/// pseudo-variance over `μ0²`, `D` half of that) and `published-convention`
/// (variance and `D` both half the normalized pseudo-variance).
pub fn table1_statistics(
    wiener: &RealPathEnsemble,
    sqrt_ens: &ComplexPathEnsemble,
    params: &SqrtParams,
) -> Result<Table1> {
    if wiener.grid() != sqrt_ens.grid() || wiener.n_paths() != sqrt_ens.n_paths() {
        return invalid(format!(
            "ensemble shapes differ: wiener {}x{} (dt {}), square-root {}x{} (dt {})",
            wiener.n_paths(),
            wiener.grid().n_steps(),
            wiener.grid().dt(),
            sqrt_ens.n_paths(),
            sqrt_ens.grid().n_steps(),
            sqrt_ens.grid().dt()
        ));
    }
    if wiener.n_paths() < 2 {
        return invalid("at least 2 paths are needed");
    }
    let mut rows: Vec<Table1Row> = brownian_rows(wiener)
        .into_iter()
        .map(|stats| Table1Row {
            process: ProcessKind::Brownian,
            stats,
        })
        .collect();
    rows.extend(
        sqrt_rows(sqrt_ens, params)
            .into_iter()
            .map(|stats| Table1Row {
                process: ProcessKind::SquareRoot,
                stats,
            }),
    );
    Ok(Table1 { rows })
}

/// Per-path time mean and pseudo-variance of the square-root increments.
pub fn per_path_increment_stats(ens: &ComplexPathEnsemble) -> Vec<(Complex64, Complex64)> {
    (0..ens.n_paths())
        .map(|p| {
            let m = Moments::of(ens.increments(p));
            (
                m.mean,
                if m.n >= 2 {
                    m.pseudo_variance()
                } else {
                    Complex64::new(0.0, 0.0)
                },
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    Counts,
    Density,
}

/// Uniform-bin histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub normalization: Normalization,
}

impl Histogram {
    pub fn n_samples(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Bar heights under the histogram's normalization.
    pub fn heights(&self) -> Vec<f64> {
        match self.normalization {
            Normalization::Counts => self.counts.iter().map(|&c| c as f64).collect(),
            Normalization::Density => {
                let n = self.n_samples() as f64;
                self.counts
                    .iter()
                    .zip(self.widths())
                    .map(|(&c, w)| c as f64 / (n * w))
                    .collect()
            }
        }
    }

    /// `Σ height·width`.
    pub fn integral(&self) -> f64 {
        self.heights()
            .iter()
            .zip(self.widths())
            .map(|(h, w)| h * w)
            .sum()
    }
}

/// Sturges' rule, `⌈log2 n⌉ + 1`.
pub fn sturges_bins(n: usize) -> usize {
    if n <= 1 {
        1
    } else {
        (n as f64).log2().ceil() as usize + 1
    }
}

/// Bins span `[min, max]`; intervals are half-open except the last, which is
/// closed. A constant sample is spread over `[x − 0.5, x + 0.5]`.
pub fn build_histogram(
    samples: &[f64],
    n_bins: usize,
    normalization: Normalization,
) -> Result<Histogram> {
    if samples.is_empty() {
        return invalid("histogram of an empty sample");
    }
    if n_bins == 0 {
        return invalid("n_bins must be at least 1");
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return invalid("histogram samples must be finite");
    }
    let mut lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / n_bins as f64;
    let mut bin_edges: Vec<f64> = (0..n_bins).map(|i| lo + i as f64 * width).collect();
    bin_edges.push(hi);
    let mut counts = vec![0u64; n_bins];
    for &x in samples {
        let mut b = ((x - lo) / width).floor() as usize;
        if b >= n_bins {
            b = n_bins - 1;
        }
        // guard against rounding in the edge arithmetic
        while b > 0 && x < bin_edges[b] {
            b -= 1;
        }
        while b + 1 < n_bins && x >= bin_edges[b + 1] {
            b += 1;
        }
        counts[b] += 1;
    }
    Ok(Histogram {
        bin_edges,
        counts,
        normalization,
    })
}

/// Parameters of `A·exp(−(x − c)²/(2s²))` and the fit's coefficient of
/// determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub amplitude: f64,
    pub center: f64,
    pub sigma: f64,
    pub r_squared: f64,
}

/// Least-squares Gaussian fit to a histogram's bin centers and heights.
pub fn gaussian_fit(h: &Histogram) -> Result<GaussianFit> {
    let non_empty = h.counts.iter().filter(|&&c| c > 0).count();
    if non_empty < 4 {
        return Err(Error::FitFailure(format!(
            "need at least 4 non-empty bins, got {non_empty}"
        )));
    }
    fit_gaussian_points(&h.centers(), &h.heights())
}

fn gauss(p: &[f64; 3], x: f64) -> f64 {
    let u = (x - p[1]) / p[2];
    p[0] * (-0.5 * u * u).exp()
}

fn sse(p: &[f64; 3], xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| (y - gauss(p, x)).powi(2))
        .sum()
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Levenberg–Marquardt Gaussian fit to `(x, y)` pairs.
pub fn fit_gaussian_points(xs: &[f64], ys: &[f64]) -> Result<GaussianFit> {
    let fail = |m: &str| Err(Error::FitFailure(m.to_string()));
    if xs.len() != ys.len() || xs.len() < 4 {
        return fail("need at least 4 points of matching length");
    }
    let n = ys.len() as f64;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sst: f64 = ys.iter().map(|y| (y - y_mean).powi(2)).sum();
    let scale: f64 = ys.iter().map(|y| y * y).sum();
    if !(sst > 1e-20 * scale) {
        return fail("data are constant; no peak to fit");
    }
    let wsum: f64 = ys.iter().map(|y| y.max(0.0)).sum();
    if !(wsum > 0.0) {
        return fail("no positive mass");
    }
    let c0 = xs.iter().zip(ys).map(|(x, y)| x * y.max(0.0)).sum::<f64>() / wsum;
    let s0 = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - c0).powi(2) * y.max(0.0))
        .sum::<f64>()
        / wsum)
        .sqrt();
    let a0 = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(s0 > 0.0) {
        return fail("all mass in a single point");
    }

    let mut p = [a0, c0, s0];
    let mut cost = sse(&p, xs, ys);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (&x, &y) in xs.iter().zip(ys) {
            let u = (x - p[1]) / p[2];
            let e = (-0.5 * u * u).exp();
            let j = [e, p[0] * e * u / p[2], p[0] * e * u * u / p[2]];
            let r = y - p[0] * e;
            for a in 0..3 {
                jtr[a] += j[a] * r;
                for b in 0..3 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut m = jtj;
            for (a, row) in m.iter_mut().enumerate() {
                row[a] += lambda * jtj[a][a].max(1e-300);
            }
            let Some(step) = solve3(m, jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
            let trial_cost = sse(&trial, xs, ys);
            if trial[2] != 0.0 && trial_cost.is_finite() && trial_cost <= cost {
                let rel = (cost - trial_cost) / cost.max(1e-300);
                p = trial;
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-12);
                improved = rel > 1e-14;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let sigma = p[2].abs();
    if !sigma.is_finite() || !p[0].is_finite() || !p[1].is_finite() {
        return fail("fit diverged");
    }
    Ok(GaussianFit {
        amplitude: p[0],
        center: p[1],
        sigma,
        r_squared: 1.0 - cost / sst,
    })
}
