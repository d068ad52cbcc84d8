//! Run configuration: defaults, JSON config files, environment and flags.
//!
//! Precedence is flags, then the `--config` file, then
//! [`OUTPUT_DIR_ENV`] (output directory only), then defaults.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sqrtwiener::paths::RNG_NAME;

use crate::{CliError, CliResult};

/// Optional override of the default output directory.
pub const OUTPUT_DIR_ENV: &str = "SQRTWIENER_OUTPUT_DIR";

pub const DEFAULT_PATHS: usize = 20_000;
pub const DEFAULT_STEPS: usize = 1000;
pub const DEFAULT_DT: f64 = 0.001;
pub const DEFAULT_MU0: f64 = 0.5;
pub const DEFAULT_BETA: f64 = 0.0;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUTPUT_DIR: &str = "sqrtwiener-out";

/// Effective configuration of one run; echoed into every manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub dt: f64,
    pub mu0: f64,
    pub beta: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub rng_name: String,
    /// Gzip ensemble CSVs above [`crate::output::COMPRESS_ROWS`] rows.
    pub compress: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_paths: DEFAULT_PATHS,
            n_steps: DEFAULT_STEPS,
            dt: DEFAULT_DT,
            mu0: DEFAULT_MU0,
            beta: DEFAULT_BETA,
            seed: DEFAULT_SEED,
            output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
            rng_name: RNG_NAME.to_string(),
            compress: true,
        }
    }
}

/// Contents of a `--config` JSON file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n_paths: Option<usize>,
    pub n_steps: Option<usize>,
    pub dt: Option<f64>,
    pub mu0: Option<f64>,
    pub beta: Option<f64>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub rng_name: Option<String>,
    pub compress: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Values given on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub n_paths: Option<usize>,
    pub n_steps: Option<usize>,
    pub dt: Option<f64>,
    pub mu0: Option<f64>,
    pub beta: Option<f64>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub no_compress: bool,
}

impl RunConfig {
    /// Layers `file`, the environment value and `flags` over the defaults
    /// and validates the result.
    pub fn resolve(
        flags: &Overrides,
        file: Option<&ConfigFile>,
        env_output_dir: Option<OsString>,
    ) -> CliResult<Self> {
        let mut c = RunConfig::default();
        if let Some(dir) = env_output_dir.filter(|d| !d.is_empty()) {
            c.output_dir = PathBuf::from(dir);
        }
        if let Some(f) = file {
            macro_rules! take {
                ($($field:ident),*) => { $(if let Some(v) = f.$field.clone() { c.$field = v; })* };
            }
            take!(n_paths, n_steps, dt, mu0, beta, seed, output_dir, rng_name, compress);
        }
        macro_rules! take_flag {
            ($($field:ident),*) => { $(if let Some(v) = flags.$field.clone() { c.$field = v; })* };
        }
        take_flag!(n_paths, n_steps, dt, mu0, beta, seed, output_dir);
        if flags.no_compress {
            c.compress = false;
        }
        c.validate()?;
        Ok(c)
    }

    /// Field-level checks; the message names the offending field.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |field: &str, why: String| Err(CliError::Config(format!("{field}: {why}")));
        if self.n_paths == 0 {
            return bad("n_paths", "must be at least 1 (got 0)".into());
        }
        if self.n_steps == 0 {
            return bad("n_steps", "must be at least 1 (got 0)".into());
        }
        if self.n_paths.checked_mul(self.n_steps).is_none() {
            return bad(
                "n_paths",
                format!(
                    "n_paths x n_steps overflows ({} x {})",
                    self.n_paths, self.n_steps
                ),
            );
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(
                "dt",
                format!("must be positive and finite (got {})", self.dt),
            );
        }
        if !(self.dt * self.n_steps as f64).is_finite() {
            return bad(
                "dt",
                format!("horizon n_steps * dt is not finite (dt = {})", self.dt),
            );
        }
        if self.mu0 == 0.0 || !self.mu0.is_finite() {
            return bad(
                "mu0",
                format!("must be finite and nonzero (got {})", self.mu0),
            );
        }
        if !self.beta.is_finite() {
            return bad("beta", format!("must be finite (got {})", self.beta));
        }
        if self.beta != 0.0 && self.mu0 != 0.5 {
            return bad(
                "beta",
                format!(
                    "a nonzero beta ({}) requires mu0 = 0.5 (got mu0 = {})",
                    self.beta, self.mu0
                ),
            );
        }
        if self.rng_name != RNG_NAME {
            return bad(
                "rng_name",
                format!(
                    "only \"{RNG_NAME}\" is available (got \"{}\")",
                    self.rng_name
                ),
            );
        }
        if self.output_dir.as_os_str().is_empty() {
            return bad("output_dir", "must not be empty".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_reference_protocol() {
        let c = RunConfig::default();
        assert_eq!(c.n_paths, 20_000);
        assert_eq!(c.n_steps, 1000);
        assert_eq!(c.dt, 0.001);
        assert_eq!(c.mu0, 0.5);
        assert_eq!(c.beta, 0.0);
        assert_eq!(c.rng_name, RNG_NAME);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn precedence_flags_over_file_over_env() {
        let file = ConfigFile {
            n_paths: Some(10),
            n_steps: Some(20),
            output_dir: Some("from-file".into()),
            ..Default::default()
        };
        let flags = Overrides {
            n_paths: Some(5),
            ..Default::default()
        };
        let c = RunConfig::resolve(&flags, Some(&file), Some("from-env".into())).unwrap();
        assert_eq!((c.n_paths, c.n_steps), (5, 20));
        assert_eq!(c.output_dir, PathBuf::from("from-file"));

        let c = RunConfig::resolve(&Overrides::default(), None, Some("from-env".into())).unwrap();
        assert_eq!(c.output_dir, PathBuf::from("from-env"));
        let flags = Overrides {
            output_dir: Some("from-flag".into()),
            no_compress: true,
            ..Default::default()
        };
        let c = RunConfig::resolve(&flags, None, Some("from-env".into())).unwrap();
        assert_eq!(c.output_dir, PathBuf::from("from-flag"));
        assert!(!c.compress);
    }

    #[test]
    fn messages_name_the_field() {
        let cases: [(Overrides, &str); 5] = [
            (
                Overrides {
                    n_steps: Some(0),
                    ..Default::default()
                },
                "n_steps",
            ),
            (
                Overrides {
                    n_paths: Some(0),
                    ..Default::default()
                },
                "n_paths",
            ),
            (
                Overrides {
                    dt: Some(-1.0),
                    ..Default::default()
                },
                "dt",
            ),
            (
                Overrides {
                    mu0: Some(0.0),
                    ..Default::default()
                },
                "mu0",
            ),
            (
                Overrides {
                    mu0: Some(2.0),
                    beta: Some(1.0),
                    ..Default::default()
                },
                "beta",
            ),
        ];
        for (flags, field) in cases {
            match RunConfig::resolve(&flags, None, None) {
                Err(CliError::Config(m)) => assert!(m.starts_with(field), "{m}"),
                other => panic!("{other:?}"),
            }
        }
        let file = ConfigFile {
            rng_name: Some("mt19937".into()),
            ..Default::default()
        };
        assert!(RunConfig::resolve(&Overrides::default(), Some(&file), None).is_err());
    }

    #[test]
    fn unknown_config_keys_rejected() {
        assert!(serde_json::from_str::<ConfigFile>(r#"{"n_path": 3}"#).is_err());
        let f: ConfigFile = serde_json::from_str(r#"{"n_paths": 3, "seed": 9}"#).unwrap();
        assert_eq!((f.n_paths, f.seed), (Some(3), Some(9)));
    }
}
