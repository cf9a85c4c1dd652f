//! Settings resolved from flags, an optional config file and defaults, in that order.

use crate::Failure;
use fhn_zerohopf::fhn::DEFAULT_FAMILY_TOL;
use fhn_zerohopf::ode::IntegratorConfig;
use fhn_zerohopf::quadrature::QuadratureConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "FHN_ZH_CONFIG";

/// Flat `key = value` file; every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub tol: Option<f64>,
    pub quad_nodes: Option<usize>,
    pub jobs: Option<usize>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_step: Option<f64>,
    pub max_time: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::Usage(format!("bad config {}: {e}", path.display())))
    }

    /// `--config`, else the environment variable, else nothing.
    pub fn resolve(flag: Option<&Path>) -> Result<(Self, Option<PathBuf>), Failure> {
        let path = flag.map(Path::to_path_buf).or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        match path {
            Some(p) => Ok((Self::load(&p)?, Some(p))),
            None => Ok((Self::default(), None)),
        }
    }
}

/// Flag values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub quad_nodes: Option<usize>,
    pub jobs: Option<usize>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_step: Option<f64>,
    pub max_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub quadrature: QuadratureConfig,
    pub integrator: IntegratorConfig,
    /// Equality tolerance used by `classify`.
    pub family_tol: f64,
    pub jobs: usize,
    pub config_file: Option<PathBuf>,
}

impl Settings {
    /// `tol` is the equality tolerance for `classify` and the quadrature
    /// tolerance everywhere else.
    pub fn resolve(flags: &Overrides, file: &FileConfig, config_file: Option<PathBuf>, tol_is_family: bool) -> Result<Self, Failure> {
        let mut quadrature = QuadratureConfig::default();
        let mut integrator = IntegratorConfig::default();
        let mut family_tol = DEFAULT_FAMILY_TOL;
        if let Some(t) = flags.tol.or(file.tol) {
            if !(t > 0.0) {
                return Err(Failure::Usage(format!("--tol must be positive (got {t})")));
            }
            if tol_is_family {
                family_tol = t;
            } else {
                quadrature.tol = t;
            }
        }
        if let Some(n) = flags.quad_nodes.or(file.quad_nodes) {
            if n < 4 || !n.is_power_of_two() {
                return Err(Failure::Usage(format!("--quad-nodes must be a power of two >= 4 (got {n})")));
            }
            quadrature.nodes = n;
            quadrature.max_nodes = quadrature.max_nodes.max(n);
        }
        if let Some(v) = flags.rel_tol.or(file.rel_tol) {
            integrator.rel_tol = v;
        }
        if let Some(v) = flags.abs_tol.or(file.abs_tol) {
            integrator.abs_tol = v;
        }
        if let Some(v) = flags.max_step.or(file.max_step) {
            integrator.max_step = v;
        }
        if let Some(v) = flags.max_time.or(file.max_time) {
            integrator.max_time = v;
        }
        integrator.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        let jobs = flags.jobs.or(file.jobs).unwrap_or(1);
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        Ok(Self { quadrature, integrator, family_tol, jobs, config_file })
    }

    pub fn pool(&self) -> Result<rayon::ThreadPool, Failure> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| Failure::Numerical(format!("thread pool: {e}")))
    }
}
