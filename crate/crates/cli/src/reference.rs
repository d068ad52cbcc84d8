//! Published reference values for the 20000-path, 1000-step protocol at
//! `dt = 0.001`, `μ0 = 1/2`, `β = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sqrtwiener::stats::{EstimatorTag, ProcessKind};

/// A reported value with its quoted uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quoted {
    pub value: Complex64,
    pub stderr: Complex64,
}

const fn q(re: f64, im: f64, se_re: f64, se_im: f64) -> Quoted {
    Quoted {
        value: Complex64::new(re, im),
        stderr: Complex64::new(se_re, se_im),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PublishedRow {
    pub process: ProcessKind,
    /// Convention under which our estimators reproduce the reported numbers.
    pub estimator_tag: EstimatorTag,
    pub mean: Quoted,
    pub variance: Quoted,
    pub diffusion: Quoted,
}

pub const PUBLISHED: [PublishedRow; 2] = [
    PublishedRow {
        process: ProcessKind::Brownian,
        estimator_tag: EstimatorTag::PublishedConvention,
        mean: q(-0.001, 0.0, 0.004, 0.0),
        variance: q(0.1667, 0.0, 0.0011, 0.0),
        diffusion: q(0.2041, 0.0, 0.0013, 0.0),
    },
    PublishedRow {
        process: ProcessKind::SquareRoot,
        estimator_tag: EstimatorTag::PublishedConvention,
        mean: q(0.4986, 0.5016, 0.0025, 0.0025),
        variance: q(0.0, -0.2491, 4e-7, 0.0013),
        diffusion: q(0.0, -0.249, 0.0, 0.001),
    },
];
