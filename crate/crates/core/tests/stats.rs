use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use sqrtwiener::paths::{make_rng, phi_half, sample_wiener, RealPathEnsemble, SeedSpec, TimeGrid};
use sqrtwiener::process::{integrate_sqrt_driven, ComplexPathEnsemble, SqrtParams};
use sqrtwiener::stats::*;
use sqrtwiener::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn mean_examples() {
    let m = complex_mean(&[c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
    assert_eq!(m.value, c(0.5, 0.5));
    let one = complex_mean(&[c(2.0, -3.0)]).unwrap();
    assert_eq!(one.value, c(2.0, -3.0));
    assert_eq!(one.stderr, None);
    assert!(matches!(complex_mean(&[]), Err(Error::InvalidArgument(_))));
}

#[test]
fn pseudo_variance_examples() {
    let v = complex_pseudo_variance(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
    assert!((v.value - c(2.0, 0.0)).norm() < 1e-15);
    let v = complex_pseudo_variance(&[c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
    assert!((v.value - c(0.0, -1.0)).norm() < 1e-15);
    assert!(complex_pseudo_variance(&[c(1.0, 0.0)]).is_err());
}

/// Exact law of Φ½: 1 or i with probability 1/2 each.
fn two_point_oracle() -> (Complex64, Complex64) {
    let mean = (c(1.0, 0.0) + c(0.0, 1.0)) * 0.5;
    let second = (c(1.0, 0.0) * c(1.0, 0.0) + c(0.0, 1.0) * c(0.0, 1.0)) * 0.5;
    (mean, second - mean * mean)
}

#[test]
fn phi_half_stream_has_bernoulli_moments() {
    let (mean, pv) = two_point_oracle();
    assert_eq!(mean, c(0.5, 0.5));
    assert_eq!(pv, c(0.0, -0.5));
    let grid = TimeGrid::new(0.001, 1_000_000).unwrap();
    let w = sample_wiener(&grid, &mut make_rng(SeedSpec::new(77, 0)));
    let phi = phi_half(&w);
    let m = complex_mean(phi.values()).unwrap();
    let v = complex_pseudo_variance(phi.values()).unwrap();
    assert!(m.within_stderrs(mean, 3.0), "{m:?}");
    assert!(v.within_stderrs(pv, 3.0), "{v:?}");
}

#[test]
fn increment_expectation_matches_monte_carlo() {
    let dt = 0.001;
    let grid = TimeGrid::new(dt, 1000).unwrap();
    for params in [
        SqrtParams::default(),
        SqrtParams::new(0.5, 2.0).unwrap(),
        SqrtParams::new(1.5, 0.0).unwrap(),
    ] {
        let w = RealPathEnsemble::sample(&grid, 2000, 31).unwrap();
        let ens = integrate_sqrt_driven(&w, &params).unwrap();
        let (mean, pv) = sqrt_increment_expectation(&params, dt);
        let m = complex_mean(ens.all_increments()).unwrap();
        let v = complex_pseudo_variance(ens.all_increments()).unwrap();
        assert!(m.within_stderrs(mean, 4.0), "{params:?}: {m:?} vs {mean}");
        assert!(v.within_stderrs(pv, 4.0), "{params:?}: {v:?} vs {pv}");
    }
    // at the default scale the normalized mean carries the E|dW| term
    let (mean, pv) = sqrt_increment_expectation(&SqrtParams::default(), dt);
    let e_abs = (2.0 * dt / std::f64::consts::PI).sqrt();
    assert!((mean.re / 0.5 - (0.5 - dt + e_abs)).abs() < 1e-15);
    assert!(
        (mean.re / 0.5 - 0.524_231).abs() < 1e-5,
        "{}",
        mean.re / 0.5
    );
    assert!((pv.im / 0.25 + 0.549_64).abs() < 1e-4, "{}", pv.im / 0.25);
}

fn temporal_variance_brute_force(m: usize, n: usize, dt: f64) -> (f64, f64) {
    let mut rng = rand::rngs::StdRng::seed_from_u64(2718);
    let normal = Normal::new(0.0, dt.sqrt()).unwrap();
    let mut vars = Vec::with_capacity(m);
    let mut w = vec![0.0; n + 1];
    for _ in 0..m {
        for k in 0..n {
            w[k + 1] = w[k] + normal.sample(&mut rng);
        }
        let mean = w.iter().sum::<f64>() / (n + 1) as f64;
        vars.push(w.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n + 1) as f64);
    }
    let mean = vars.iter().sum::<f64>() / m as f64;
    let sd = (vars.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1) as f64).sqrt();
    (mean, sd / (m as f64).sqrt())
}

#[test]
fn temporal_variance_expectation_against_brute_force() {
    let (dt, n) = (0.001, 1000);
    let exact = brownian_temporal_variance_expectation(dt, n);
    assert!((exact - 1.0 / 6.0).abs() < 2e-4);
    let (mc, se) = temporal_variance_brute_force(100_000, n, dt);
    assert!((mc - exact).abs() < 3.0 * se, "{mc} ± {se} vs {exact}");
    assert!((mc - 1.0 / 6.0).abs() < 3.0 * se + 2e-4);
}

fn protocol_ensembles(m: usize, n: usize, seed: u64) -> (RealPathEnsemble, ComplexPathEnsemble) {
    let grid = TimeGrid::new(0.001, n).unwrap();
    let w = RealPathEnsemble::sample(&grid, m, seed).unwrap();
    let s = integrate_sqrt_driven(&w, &SqrtParams::default()).unwrap();
    (w, s)
}

#[test]
fn brownian_temporal_variance_near_one_sixth_at_protocol_size() {
    let (w, s) = protocol_ensembles(20_000, 1000, 12);
    let t = table1_statistics(&w, &s, &SqrtParams::default()).unwrap();
    let row = t
        .get(ProcessKind::Brownian, EstimatorTag::PathTemporal)
        .unwrap();
    let var = row.pseudo_variance;
    assert!(var.within_stderrs(c(1.0 / 6.0, 0.0), 3.0), "{var:?}");
    assert_eq!(var.value.im, 0.0);
    assert!(row.mean.value.re.abs() < 0.012);
}

#[test]
fn table1_covers_every_convention_with_consistent_diffusions() {
    let (w, s) = protocol_ensembles(400, 500, 3);
    let t = table1_statistics(&w, &s, &SqrtParams::default()).unwrap();
    assert_eq!(t.rows.len(), 5);
    let b_temp = t
        .get(ProcessKind::Brownian, EstimatorTag::PathTemporal)
        .unwrap();
    let b_pub = t
        .get(ProcessKind::Brownian, EstimatorTag::PublishedConvention)
        .unwrap();
    let b_inc = t
        .get(ProcessKind::Brownian, EstimatorTag::IncrementNormalized)
        .unwrap();
    assert_eq!(b_temp.pseudo_variance.value, b_pub.pseudo_variance.value);
    assert!((b_temp.diffusion.value.re - b_temp.pseudo_variance.value.re / 2.0).abs() < 1e-15);
    assert!((b_pub.diffusion.value.re - b_pub.pseudo_variance.value.re.sqrt() / 2.0).abs() < 1e-15);
    assert!((b_inc.pseudo_variance.value.re - 1.0).abs() < 0.02);
    assert!((b_inc.diffusion.value.re - 0.5).abs() < 0.01);

    let s_inc = t
        .get(ProcessKind::SquareRoot, EstimatorTag::IncrementNormalized)
        .unwrap();
    let s_pub = t
        .get(ProcessKind::SquareRoot, EstimatorTag::PublishedConvention)
        .unwrap();
    assert_eq!(s_inc.mean.value, s_pub.mean.value);
    let half = s_inc.pseudo_variance.value * 0.5;
    assert!((s_inc.diffusion.value - half).norm() < 1e-15);
    assert!((s_pub.pseudo_variance.value - half).norm() < 1e-15);
    assert!((s_pub.diffusion.value - half).norm() < 1e-15);
    for row in &t.rows {
        for stat in [
            row.stats.mean,
            row.stats.pseudo_variance,
            row.stats.diffusion,
        ] {
            let e = stat.stderr.expect("stderr present");
            assert!(e.re >= 0.0 && e.im >= 0.0);
        }
    }
}

#[test]
fn table1_is_invariant_under_path_permutation() {
    let (w, s) = protocol_ensembles(257, 64, 21);
    let base = table1_statistics(&w, &s, &SqrtParams::default()).unwrap();
    let mut order: Vec<usize> = (0..257).collect();
    let mut rng = rand::rngs::StdRng::seed_from_u64(1);
    use rand::seq::SliceRandom;
    for _ in 0..3 {
        order.shuffle(&mut rng);
        let wp: Vec<Vec<f64>> = order.iter().map(|&p| w.increments(p).to_vec()).collect();
        let sp: Vec<Vec<Complex64>> = order.iter().map(|&p| s.increments(p).to_vec()).collect();
        let w2 = RealPathEnsemble::from_paths(w.grid(), &wp).unwrap();
        let s2 = ComplexPathEnsemble::from_paths(s.grid(), &sp).unwrap();
        let permuted = table1_statistics(&w2, &s2, &SqrtParams::default()).unwrap();
        assert_eq!(base, permuted);
    }
}

#[test]
fn table1_rejects_mismatched_shapes() {
    let (w, _) = protocol_ensembles(10, 20, 1);
    let (_, s) = protocol_ensembles(11, 20, 1);
    assert!(matches!(
        table1_statistics(&w, &s, &SqrtParams::default()),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn histogram_examples() {
    let h = build_histogram(&[0.0, 1.0, 2.0, 3.0], 2, Normalization::Counts).unwrap();
    assert_eq!(h.counts, vec![2, 2]);
    assert_eq!(h.bin_edges, vec![0.0, 1.5, 3.0]);
    let xs: Vec<f64> = (0..1000).map(|k| (k as f64 * 0.37).sin()).collect();
    let d = build_histogram(&xs, 17, Normalization::Density).unwrap();
    assert!((d.integral() - 1.0).abs() < 1e-9);
    assert_eq!(d.counts.len(), d.bin_edges.len() - 1);
    assert!(build_histogram(&[], 3, Normalization::Counts).is_err());
    assert!(build_histogram(&[1.0], 0, Normalization::Counts).is_err());
    assert_eq!(sturges_bins(1024), 11);
}

#[test]
fn gaussian_fit_recovers_standard_normal() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(8);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let xs: Vec<f64> = (0..1_000_000).map(|_| normal.sample(&mut rng)).collect();
    let h = build_histogram(&xs, 60, Normalization::Density).unwrap();
    let fit = gaussian_fit(&h).unwrap();
    assert!(fit.center.abs() < 0.01, "{fit:?}");
    assert!((fit.sigma - 1.0).abs() < 0.01, "{fit:?}");
    assert!(fit.r_squared > 0.999);
}

#[test]
fn gaussian_fit_failures() {
    let single = Histogram {
        bin_edges: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
        counts: vec![0, 0, 9, 0, 0],
        normalization: Normalization::Counts,
    };
    assert!(matches!(gaussian_fit(&single), Err(Error::FitFailure(_))));
    let flat = Histogram {
        bin_edges: (0..=10).map(f64::from).collect(),
        counts: vec![7; 10],
        normalization: Normalization::Counts,
    };
    assert!(matches!(gaussian_fit(&flat), Err(Error::FitFailure(_))));
}

#[test]
fn per_path_brownian_means_look_normal() {
    let grid = TimeGrid::new(0.001, 1000).unwrap();
    let w = RealPathEnsemble::sample(&grid, 20_000, 6).unwrap();
    let means: Vec<f64> = (0..w.n_paths())
        .map(|p| w.values(p).iter().sum::<f64>() / 1001.0)
        .collect();
    let h = build_histogram(&means, sturges_bins(means.len()), Normalization::Density).unwrap();
    let fit = gaussian_fit(&h).unwrap();
    assert!(fit.r_squared > 0.99, "{fit:?}");
    // Var of the time mean of W on [0, 1] is 1/3
    assert!((fit.sigma - (1.0f64 / 3.0).sqrt()).abs() < 0.03, "{fit:?}");
}

proptest! {
    #[test]
    fn pseudo_variance_of_real_data_is_sample_variance(xs in proptest::collection::vec(-100.0f64..100.0, 2..300)) {
        let z: Vec<Complex64> = xs.iter().map(|&x| c(x, 0.0)).collect();
        let v = complex_pseudo_variance(&z).unwrap().value;
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        prop_assert!((v.re - var).abs() <= 1e-12 * (1.0 + var));
        prop_assert_eq!(v.im, 0.0);
    }

    #[test]
    fn density_histograms_integrate_to_one(
        xs in proptest::collection::vec(-1e3f64..1e3, 1..400),
        bins in 1usize..64,
    ) {
        let h = build_histogram(&xs, bins, Normalization::Density).unwrap();
        prop_assert!((h.integral() - 1.0).abs() < 1e-9);
        prop_assert_eq!(h.n_samples(), xs.len() as u64);
    }
}
