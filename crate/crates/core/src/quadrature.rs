//! Composite Simpson quadrature on uniform grids.
//!
//! The averaging engine evaluates the integrand once on the finest grid and
//! reads the half grid off the even nodes, so the Richardson estimate costs no
//! extra evaluations.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Starting number of intervals (a power of two).
    pub nodes: usize,
    pub max_nodes: usize,
    /// Error estimate must satisfy `est <= tol * (1 + |value|)`.
    pub tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { nodes: 512, max_nodes: 8192, tol: 1e-10 }
    }
}

/// Simpson's rule over `values` sampled at uniform spacing `h`.
/// `values.len() - 1` must be even.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    debug_assert!(n >= 2 && n.is_multiple_of(2));
    let mut odd = 0.0;
    let mut even = 0.0;
    for (k, v) in values.iter().enumerate().take(n).skip(1) {
        if k % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (values[0] + values[n] + 4.0 * odd + 2.0 * even)
}

/// Running integral `∫₀^{s_k}` at every node.
///
/// Even nodes use Simpson panels; odd nodes add a single-interval quadratic
/// (5, 8, -1)/12 rule on top of the preceding even node.
pub fn cumulative_simpson(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len() - 1;
    debug_assert!(n >= 2 && n.is_multiple_of(2));
    let mut out = vec![0.0; n + 1];
    let mut k = 0;
    while k < n {
        let (f0, f1, f2) = (values[k], values[k + 1], values[k + 2]);
        out[k + 1] = out[k] + h / 12.0 * (5.0 * f0 + 8.0 * f1 - f2);
        out[k + 2] = out[k] + h / 3.0 * (f0 + 4.0 * f1 + f2);
        k += 2;
    }
    out
}

/// Every second sample, i.e. the same function on the half grid.
pub fn coarsen(values: &[f64]) -> Vec<f64> {
    values.iter().step_by(2).copied().collect()
}
