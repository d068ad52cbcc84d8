use std::path::PathBuf;

use num_complex::Complex64;
use serde::Serialize;
use sqrtwiener::kernels::{
    default_domain, fp_convergence, fp_evolve_observed, gaussian_packet, heat_kernel,
    schrodinger_kernel, wick_bracket, wick_rotate_kernel, wick_rotate_samples, ConvergenceStudy,
    FPParams, GridFunction, KernelSample,
};
use sqrtwiener::paths::{make_lane_rng, RealPathEnsemble, SeedSpec, TimeGrid};
use sqrtwiener::process::{
    integrate_sqrt, integrate_sqrt_driven, scalar_shift_artifact, ShiftArtifactReport, SqrtParams,
};
use sqrtwiener::stats::{
    build_histogram, gaussian_fit, per_path_increment_stats, sqrt_increment_expectation,
    sturges_bins, table1_statistics, ComplexStat, EstimatorTag, GaussianFit, Histogram,
    Normalization, ProcessKind, Table1, Table1Row,
};

use crate::args::{Cli, Command, FpArgs, FpMode, KernelArgs, SimulateArgs, WickSource};
use crate::config::{ConfigFile, RunConfig, OUTPUT_DIR_ENV};
use crate::manifest::RunManifest;
use crate::output::Outputs;
use crate::reference::{PublishedRow, Quoted, PUBLISHED};
use crate::{CliError, CliResult};

/// Lane of the per-path generator reserved for the kernel identity check.
const IDENTITY_LANE: u64 = 1 << 32;

/// Resolves the configuration and runs `cli.command` on a pool of
/// `--threads` workers. Returns the path of the written manifest.
pub fn run(cli: &Cli) -> CliResult<PathBuf> {
    let file = cli
        .common
        .config
        .as_deref()
        .map(ConfigFile::load)
        .transpose()?;
    let config = RunConfig::resolve(
        &cli.common.overrides(),
        file.as_ref(),
        std::env::var_os(OUTPUT_DIR_ENV),
    )?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.common.threads {
        if n == 0 {
            return Err(CliError::Config(
                "threads: must be at least 1 (got 0)".into(),
            ));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Simulate(a) => simulate(&config, a),
        Command::Table1 => table1(&config),
        Command::Kernels(a) => kernels(&config, a),
        Command::Fpsolve(a) => fpsolve(&config, a),
    })
}

fn params_of(c: &RunConfig) -> CliResult<(TimeGrid, SqrtParams)> {
    Ok((
        TimeGrid::new(c.dt, c.n_steps)?,
        SqrtParams::new(c.mu0, c.beta)?,
    ))
}

pub fn simulate(config: &RunConfig, args: &SimulateArgs) -> CliResult<PathBuf> {
    let (grid, params) = params_of(config)?;
    let mut manifest = RunManifest::new("simulate", config);
    let mut out = Outputs::create(&config.output_dir, "simulate")?;
    let ens = integrate_sqrt(&grid, config.n_paths, &params, config.seed)?;
    manifest.increment_digest = Some(ens.digest());
    let n_write = args
        .write_paths
        .unwrap_or(config.n_paths)
        .min(config.n_paths);
    out.csv(
        "ensemble.csv",
        &["path_index", "step_index", "re", "im"],
        n_write * config.n_steps,
        config.compress,
        |w| {
            for p in 0..n_write {
                for (k, z) in ens.increments(p).iter().enumerate() {
                    writeln!(w, "{p},{k},{},{}", z.re, z.im)?;
                }
            }
            Ok(())
        },
    )?;
    out.finish(&mut manifest)
}

/// Histogram of one sample set with its Gaussian fit.
#[derive(Debug, Clone, Serialize)]
pub struct FittedHistogram {
    pub samples: String,
    pub histogram: Histogram,
    pub fit: Option<GaussianFit>,
    pub fit_error: Option<String>,
}

fn fitted(samples: &str, xs: &[f64], bins: Option<usize>) -> CliResult<FittedHistogram> {
    let bins = bins.unwrap_or_else(|| sturges_bins(xs.len()));
    let histogram = build_histogram(xs, bins, Normalization::Density)?;
    let (fit, fit_error) = match gaussian_fit(&histogram) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(FittedHistogram {
        samples: samples.to_string(),
        histogram,
        fit,
        fit_error,
    })
}

fn histogram_csv(out: &mut Outputs, name: &str, h: &FittedHistogram) -> CliResult<String> {
    let hist = &h.histogram;
    let heights = hist.heights();
    let fit = h.fit;
    out.csv(
        name,
        &["bin_lo", "bin_hi", "count", "density", "fit"],
        hist.counts.len(),
        false,
        |w| {
            for (b, count) in hist.counts.iter().enumerate() {
                let (lo, hi) = (hist.bin_edges[b], hist.bin_edges[b + 1]);
                let x = 0.5 * (lo + hi);
                let f = fit.map_or(f64::NAN, |f| {
                    f.amplitude * (-(x - f.center).powi(2) / (2.0 * f.sigma * f.sigma)).exp()
                });
                writeln!(w, "{lo},{hi},{count},{},{f}", heights[b])?;
            }
            Ok(())
        },
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub process: ProcessKind,
    pub estimator_tag: EstimatorTag,
    pub quantity: &'static str,
    pub measured: ComplexStat,
    pub published: Quoted,
    pub difference: Complex64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Discrepancy {
    /// Closed-form increment mean divided by μ0.
    pub expected_mean: Complex64,
    /// Closed-form pseudo-variance divided by μ0².
    pub expected_pseudo_variance: Complex64,
    /// Part of each mean component contributed by the `|dW|` term.
    pub abs_dw_contribution: f64,
    /// Part of each mean component contributed by the `dt` terms.
    pub dt_contribution: Complex64,
    pub measured_mean: Complex64,
    pub published_mean: Complex64,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerPathShapes {
    pub mean_re: FittedHistogram,
    pub mean_im: FittedHistogram,
    pub variance_re: FittedHistogram,
    pub variance_im: FittedHistogram,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Report {
    pub manifest: RunManifest,
    pub rows: Vec<Table1Row>,
    pub published: Vec<PublishedRow>,
    pub comparison: Vec<Comparison>,
    pub brownian_temporal_variance_expectation: f64,
    pub discrepancy: Discrepancy,
    pub shift_artifact: ShiftArtifactReport,
    pub per_path: PerPathShapes,
}

fn compare(table: &Table1) -> Vec<Comparison> {
    let mut out = Vec::new();
    for p in PUBLISHED {
        if let Some(s) = table.get(p.process, p.estimator_tag) {
            for (quantity, measured, published) in [
                ("mean", s.mean, p.mean),
                ("variance", s.pseudo_variance, p.variance),
                ("diffusion", s.diffusion, p.diffusion),
            ] {
                out.push(Comparison {
                    process: p.process,
                    estimator_tag: p.estimator_tag,
                    quantity,
                    measured,
                    published,
                    difference: measured.value - published.value,
                });
            }
        }
    }
    out
}

fn discrepancy(table: &Table1, params: &SqrtParams, dt: f64) -> Discrepancy {
    let mu0 = params.mu0();
    let (mean, pv) = sqrt_increment_expectation(params, dt);
    let abs_dw = (2.0 * dt / std::f64::consts::PI).sqrt();
    let (b, dt_plus, dt_minus) = if params.is_drifted_form() {
        (
            1.0,
            (-1.0 + params.beta()) * dt,
            (-1.0 - params.beta()) * dt,
        )
    } else {
        let d = -dt * 0.125 / (mu0 * mu0 * mu0);
        (0.5 / mu0, d, d)
    };
    let measured_mean = table
        .get(ProcessKind::SquareRoot, EstimatorTag::IncrementNormalized)
        .map_or(Complex64::new(f64::NAN, f64::NAN), |s| s.mean.value);
    Discrepancy {
        expected_mean: mean / mu0,
        expected_pseudo_variance: pv / (mu0 * mu0),
        abs_dw_contribution: 0.5 * b * abs_dw / mu0,
        dt_contribution: Complex64::new(dt_plus, dt_minus) * (0.5 / mu0),
        measured_mean,
        published_mean: PUBLISHED[1].mean.value,
        note: format!(
            "Each step is a(s)*Phi(s) with a(s) containing b*|dW|; E|dW| = sqrt(2 dt/pi) = {abs_dw:.5} \
             adds {:.5} to each normalized mean component. Without it the normalized mean would be {:.5}, \
             close to the published value; with it the expectation is {:.5}+{:.5}i.",
            0.5 * b * abs_dw / mu0,
            (mean.re - 0.5 * b * abs_dw) / mu0,
            mean.re / mu0,
            mean.im / mu0
        ),
    }
}

pub fn table1(config: &RunConfig) -> CliResult<PathBuf> {
    let (grid, params) = params_of(config)?;
    let mut manifest = RunManifest::new("table1", config);
    let mut out = Outputs::create(&config.output_dir, "table1")?;
    let wiener = RealPathEnsemble::sample(&grid, config.n_paths, config.seed)?;
    let sq = integrate_sqrt_driven(&wiener, &params)?;
    manifest.wiener_digest = Some(wiener.digest());
    manifest.increment_digest = Some(sq.digest());
    let table = table1_statistics(&wiener, &sq, &params)?;

    out.csv(
        "table1.csv",
        &[
            "row",
            "estimator_tag",
            "mean_re",
            "mean_im",
            "stderr_re",
            "stderr_im",
            "var_re",
            "var_im",
            "D_re",
            "D_im",
        ],
        table.rows.len(),
        false,
        |w| {
            for r in &table.rows {
                let s = &r.stats;
                let se = s.mean.stderr.unwrap_or(Complex64::new(f64::NAN, f64::NAN));
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.process.as_str(),
                    s.estimator_tag.as_str(),
                    s.mean.value.re,
                    s.mean.value.im,
                    se.re,
                    se.im,
                    s.pseudo_variance.value.re,
                    s.pseudo_variance.value.im,
                    s.diffusion.value.re,
                    s.diffusion.value.im
                )?;
            }
            Ok(())
        },
    )?;

    let mu0 = params.mu0();
    let per_path = per_path_increment_stats(&sq);
    let pick = |f: fn(&(Complex64, Complex64)) -> f64| per_path.iter().map(f).collect::<Vec<f64>>();
    let m1 = mu0;
    let m2 = mu0 * mu0;
    let per_path = PerPathShapes {
        mean_re: fitted(
            "per-path time mean of dX / mu0, real part",
            &pick(|s| s.0.re).iter().map(|v| v / m1).collect::<Vec<_>>(),
            None,
        )?,
        mean_im: fitted(
            "per-path time mean of dX / mu0, imaginary part",
            &pick(|s| s.0.im).iter().map(|v| v / m1).collect::<Vec<_>>(),
            None,
        )?,
        variance_re: fitted(
            "per-path pseudo-variance of dX / mu0^2, real part",
            &pick(|s| s.1.re).iter().map(|v| v / m2).collect::<Vec<_>>(),
            None,
        )?,
        variance_im: fitted(
            "per-path pseudo-variance of dX / mu0^2, imaginary part",
            &pick(|s| s.1.im).iter().map(|v| v / m2).collect::<Vec<_>>(),
            None,
        )?,
    };
    for (name, h) in [
        ("per_path_mean_re.csv", &per_path.mean_re),
        ("per_path_mean_im.csv", &per_path.mean_im),
        ("per_path_variance_re.csv", &per_path.variance_re),
        ("per_path_variance_im.csv", &per_path.variance_im),
    ] {
        histogram_csv(&mut out, name, h)?;
    }

    let report = Table1Report {
        manifest: manifest.clone(),
        comparison: compare(&table),
        published: PUBLISHED.to_vec(),
        brownian_temporal_variance_expectation:
            sqrtwiener::stats::brownian_temporal_variance_expectation(grid.dt(), grid.n_steps()),
        discrepancy: discrepancy(&table, &params, grid.dt()),
        shift_artifact: scalar_shift_artifact(&wiener, mu0)?,
        rows: table.rows,
        per_path,
    };
    out.json("table1.json", &report)?;
    out.finish(&mut manifest)
}

#[derive(Debug, Clone, Serialize)]
pub struct WickIdentity {
    pub points: usize,
    pub max_abs_wick_minus_heat: f64,
    pub max_abs_bracket_imaginary: f64,
    /// Largest gap between the sample map and the analytic map on the curve grid.
    pub max_abs_sample_map_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelsReport {
    pub manifest: RunManifest,
    pub t: f64,
    pub x_range: (f64, f64),
    pub curve_max_abs_wick_minus_heat: f64,
    pub curve_l2_wick_minus_heat: f64,
    pub identity: WickIdentity,
    pub wick_source: WickSource,
    /// Histogram of `W(T)` with its fit.
    pub heat_histogram: FittedHistogram,
    /// Largest gap between the `W(T)` density and the heat kernel at `T/2`.
    pub heat_histogram_max_density_error: f64,
    /// Histogram of the Wick-rotated square-root samples with its fit.
    pub wick_histogram: FittedHistogram,
    /// Fitted center of `wick_histogram` over its standard error `σ/√n`.
    pub wick_center_in_stderrs: Option<f64>,
    pub wick_center_shifted: bool,
}

fn uniform(rng: &mut sqrtwiener::paths::PathRng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn curve_csv(out: &mut Outputs, name: &str, xs: &[f64], zs: &[Complex64]) -> CliResult<String> {
    out.csv(name, &["x", "re", "im", "modulus"], xs.len(), false, |w| {
        for (x, z) in xs.iter().zip(zs) {
            writeln!(w, "{x},{},{},{}", z.re, z.im, z.norm())?;
        }
        Ok(())
    })
}

pub fn kernels(config: &RunConfig, args: &KernelArgs) -> CliResult<PathBuf> {
    let t = args.t;
    if !(t > 0.0) || !t.is_finite() {
        return Err(CliError::Config(format!(
            "t: must be positive and finite (got {t})"
        )));
    }
    if !(args.x_max > args.x_min) || args.x_points < 2 {
        return Err(CliError::Config(format!(
            "x_min/x_max/x_points: need x_min < x_max and at least 2 points (got [{}, {}], {})",
            args.x_min, args.x_max, args.x_points
        )));
    }
    let (grid, params) = params_of(config)?;
    let mut manifest = RunManifest::new("kernels", config);
    let mut out = Outputs::create(&config.output_dir, "kernels")?;

    let step = (args.x_max - args.x_min) / (args.x_points - 1) as f64;
    let xs: Vec<f64> = (0..args.x_points)
        .map(|j| args.x_min + j as f64 * step)
        .collect();
    let schr: Vec<Complex64> = xs
        .iter()
        .map(|&x| schrodinger_kernel(x, t))
        .collect::<Result<_, _>>()?;
    let heat: Vec<f64> = xs
        .iter()
        .map(|&x| heat_kernel(x, t))
        .collect::<Result<_, _>>()?;
    let wick: Vec<f64> = xs
        .iter()
        .map(|&x| wick_rotate_kernel(x, t))
        .collect::<Result<_, _>>()?;
    let real = |v: &[f64]| {
        v.iter()
            .map(|&r| Complex64::new(r, 0.0))
            .collect::<Vec<_>>()
    };
    curve_csv(&mut out, "kernel_schrodinger.csv", &xs, &schr)?;
    curve_csv(&mut out, "kernel_heat.csv", &xs, &real(&heat))?;
    curve_csv(&mut out, "kernel_wick.csv", &xs, &real(&wick))?;
    let diffs: Vec<f64> = wick.iter().zip(&heat).map(|(w, h)| (w - h).abs()).collect();
    let curve_max = diffs.iter().copied().fold(0.0, f64::max);
    let curve_l2 = (diffs.iter().map(|d| d * d).sum::<f64>() * step).sqrt();

    let mut rng = make_lane_rng(SeedSpec::new(config.seed, 0), IDENTITY_LANE);
    let mut identity = WickIdentity {
        points: args.identity_points,
        max_abs_wick_minus_heat: 0.0,
        max_abs_bracket_imaginary: 0.0,
        max_abs_sample_map_error: 0.0,
    };
    for _ in 0..args.identity_points {
        let x = args.x_min + (args.x_max - args.x_min) * uniform(&mut rng);
        let tt = t * (0.05 + 4.95 * uniform(&mut rng));
        let d = (wick_rotate_kernel(x, tt)? - heat_kernel(x, tt)?).abs();
        identity.max_abs_wick_minus_heat = identity.max_abs_wick_minus_heat.max(d);
        identity.max_abs_bracket_imaginary = identity
            .max_abs_bracket_imaginary
            .max(wick_bracket(x, tt)?.im.abs());
    }
    let samples: Vec<KernelSample> = xs
        .iter()
        .zip(&schr)
        .map(|(&x, z)| KernelSample::new(z.norm(), x * x / (4.0 * t) - std::f64::consts::FRAC_PI_4))
        .collect::<Result<_, _>>()?;
    identity.max_abs_sample_map_error = wick_rotate_samples(&samples)
        .iter()
        .zip(&wick)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let wiener = RealPathEnsemble::sample(&grid, config.n_paths, config.seed)?;
    manifest.wiener_digest = Some(wiener.digest());
    let w_final = wiener.final_values();
    let heat_histogram = fitted("W(T)", &w_final, args.bins)?;
    let horizon = grid.horizon();
    let heat_err = heat_histogram
        .histogram
        .centers()
        .iter()
        .zip(heat_histogram.histogram.heights())
        .map(|(&x, h)| Ok((h - heat_kernel(x, horizon / 2.0)?).abs()))
        .collect::<CliResult<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let sq = integrate_sqrt_driven(&wiener, &params)?;
    drop(wiener);
    manifest.increment_digest = Some(sq.digest());
    let finals = sq.final_values();
    drop(sq);
    let samples: Vec<KernelSample> = finals
        .iter()
        .map(|z| match args.wick_source {
            // the phase of z² is twice that of z, kept without reduction
            WickSource::SquaredValues => KernelSample::new(z.norm_sqr(), 2.0 * z.arg()),
            WickSource::Values => KernelSample::new(z.norm(), z.arg()),
        })
        .collect::<Result<_, _>>()?;
    let rotated = wick_rotate_samples(&samples);
    let label = match args.wick_source {
        WickSource::SquaredValues => "Wick-rotated X(T)^2",
        WickSource::Values => "Wick-rotated X(T)",
    };
    let wick_histogram = fitted(label, &rotated, args.bins)?;
    let center_z = wick_histogram
        .fit
        .map(|f| f.center / (f.sigma / (rotated.len() as f64).sqrt()));

    histogram_csv(&mut out, "histogram_heat.csv", &heat_histogram)?;
    histogram_csv(&mut out, "histogram_wick.csv", &wick_histogram)?;
    let report = KernelsReport {
        manifest: manifest.clone(),
        t,
        x_range: (args.x_min, args.x_max),
        curve_max_abs_wick_minus_heat: curve_max,
        curve_l2_wick_minus_heat: curve_l2,
        identity,
        wick_source: args.wick_source,
        heat_histogram,
        heat_histogram_max_density_error: heat_err,
        wick_histogram,
        wick_center_in_stderrs: center_z,
        wick_center_shifted: center_z.is_some_and(|z| z.abs() > 3.0),
    };
    out.json("kernels.json", &report)?;
    out.finish(&mut manifest)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileReport {
    pub file: String,
    pub analytic_file: String,
    pub t: f64,
    pub max_error: f64,
    pub l2_error: f64,
    pub first_moment: Complex64,
    pub expected_first_moment: Complex64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FpReport {
    pub manifest: RunManifest,
    pub mode: FpMode,
    pub params: FPParams,
    pub x0: f64,
    pub s0: f64,
    pub domain: (f64, f64),
    pub n_points: usize,
    pub dt: f64,
    pub n_steps: usize,
    pub profiles: Vec<ProfileReport>,
    /// Largest per-step change of `|∫ψ dx|`.
    pub max_mass_drift_per_step: f64,
    pub convergence: Option<ConvergenceStudy>,
}

pub fn fpsolve(config: &RunConfig, args: &FpArgs) -> CliResult<PathBuf> {
    let (_, params) = params_of(config)?;
    let cfg_err = |m: String| Err(CliError::Config(m));
    if !(args.t_final > 0.0) || !args.t_final.is_finite() {
        return cfg_err(format!(
            "t_final: must be positive and finite (got {})",
            args.t_final
        ));
    }
    if !(args.s0 > 0.0) || !args.s0.is_finite() || !args.x0.is_finite() {
        return cfg_err(format!(
            "s0/x0: need finite x0 and s0 > 0 (got {}, {})",
            args.x0, args.s0
        ));
    }
    if args.points < 3 || args.time_steps == 0 {
        return cfg_err(format!(
            "points/time_steps: need at least 3 points and 1 step (got {}, {})",
            args.points, args.time_steps
        ));
    }
    let p = match args.mode {
        FpMode::SquareRoot => FPParams::from_sqrt_params(&params),
        FpMode::Heat => FPParams::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
        FpMode::Schrodinger => FPParams::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, -0.25)),
    };
    let dt = args.t_final / args.time_steps as f64;
    let mut wanted: Vec<usize> = if args.profile_times.is_empty() {
        vec![args.time_steps]
    } else {
        let mut v = Vec::new();
        for &t in &args.profile_times {
            if !(t > 0.0) || t > args.t_final * (1.0 + 1e-12) {
                return cfg_err(format!(
                    "profile_times: {t} is outside (0, t_final = {}]",
                    args.t_final
                ));
            }
            v.push(((t / dt).round() as usize).max(1));
        }
        v
    };
    wanted.sort_unstable();
    wanted.dedup();

    let mut manifest = RunManifest::new("fpsolve", config);
    let mut out = Outputs::create(&config.output_dir, "fpsolve")?;
    let domain = default_domain(args.x0, args.s0, &p, args.t_final);
    let (x0, s0) = (args.x0, args.s0);
    let init = GridFunction::from_fn(domain.0, domain.1, args.points, |x| {
        Complex64::new((-(x - x0) * (x - x0) / (2.0 * s0 * s0)).exp(), 0.0)
    })?;
    let dx = init.dx();
    let mut prev_mass = init.integral();
    let mut drift = 0.0_f64;
    let mut snapshots = Vec::new();
    fp_evolve_observed(&init, &p, dt, args.time_steps, |step, v| {
        let g = GridFunction::new(domain.0, domain.1, v.to_vec()).expect("same grid");
        let m = g.integral();
        drift = drift.max((m - prev_mass).norm());
        prev_mass = m;
        if wanted.binary_search(&step).is_ok() {
            snapshots.push((step, g));
        }
    })?;

    let xs = init.xs();
    let mut profiles = Vec::new();
    for (i, (step, g)) in snapshots.iter().enumerate() {
        let t = *step as f64 * dt;
        let exact: Vec<Complex64> = xs
            .iter()
            .map(|&x| gaussian_packet(x, t, x0, s0, &p))
            .collect();
        let errs: Vec<f64> = g
            .values
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).norm())
            .collect();
        let file = curve_csv(&mut out, &format!("fp_profile_{i}.csv"), &xs, &g.values)?;
        let analytic_file = curve_csv(&mut out, &format!("fp_analytic_{i}.csv"), &xs, &exact)?;
        profiles.push(ProfileReport {
            file,
            analytic_file,
            t,
            max_error: errs.iter().copied().fold(0.0, f64::max),
            l2_error: (errs.iter().map(|e| e * e).sum::<f64>() * dx).sqrt(),
            first_moment: g.first_moment(),
            expected_first_moment: p.drift * t + x0,
        });
    }
    let convergence = if args.levels >= 2 {
        Some(fp_convergence(
            &p,
            x0,
            s0,
            args.t_final,
            domain,
            args.base_points,
            args.base_steps,
            args.levels,
        )?)
    } else {
        None
    };
    let report = FpReport {
        manifest: manifest.clone(),
        mode: args.mode,
        params: p,
        x0,
        s0,
        domain,
        n_points: args.points,
        dt,
        n_steps: args.time_steps,
        profiles,
        max_mass_drift_per_step: drift,
        convergence,
    };
    out.json("fpsolve.json", &report)?;
    out.finish(&mut manifest)
}
