//! First- and second-order averaging for T-periodic systems
//!
//! ```text
//! x' = ε F(t, x) + ε² G(t, x) + O(ε³)
//! f(z) = (1/T) ∫₀ᵀ F(s, z) ds
//! g(z) = (1/T) ∫₀ᵀ [ D_z F(s, z) ∫₀ˢ F(t, z) dt + G(s, z) ] ds
//! ```
//!
//! Simple zeros of `f` (or of `g` when `f ≡ 0`) continue to T-periodic
//! solutions for small ε; the eigenvalues of the averaged Jacobian at the
//! zero give the stability of that solution.

use crate::error::{Error, Result};
use crate::newton::{self, NewtonOptions};
use crate::quadrature::{cumulative_simpson, simpson, QuadratureConfig};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// One evaluation of the periodic perturbation at `(t, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    /// `D_x F`, row `i` = gradient of `F_i`.
    pub df: DMatrix<f64>,
}

/// A system `x' = ε F(t, x) + ε² G(t, x)` with period `T` in `t`.
///
/// Implementations must be callable concurrently.
pub trait PeriodicSystem: Send + Sync {
    fn dim(&self) -> usize;
    fn period(&self) -> f64;
    fn first_order(&self, t: f64, x: &[f64]) -> Vec<f64>;

    fn second_order(&self, _t: f64, _x: &[f64]) -> Vec<f64> {
        vec![0.0; self.dim()]
    }

    /// Analytic `D_x F` when available.
    fn first_order_jacobian(&self, _t: f64, _x: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    /// `F`, `G` and `D_x F` at once. The default falls back to a fourth-order
    /// central difference when no analytic Jacobian is provided.
    fn sample(&self, t: f64, x: &[f64]) -> Sample {
        let f = self.first_order(t, x);
        let g = self.second_order(t, x);
        let df = self
            .first_order_jacobian(t, x)
            .unwrap_or_else(|| fd_jacobian_4th(|y| self.first_order(t, y), x));
        Sample { f, g, df }
    }
}

/// Fourth-order central-difference Jacobian, step `1e-3 (1 + |x_j|)`.
pub fn fd_jacobian_4th(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let m = f(x).len();
    let mut jac = DMatrix::zeros(m, n);
    let mut y = x.to_vec();
    for j in 0..n {
        let h = 1e-3 * (1.0 + x[j].abs());
        let mut at = |k: f64| {
            y[j] = x[j] + k * h;
            let v = f(&y);
            y[j] = x[j];
            v
        };
        let (p2, p1, m1, m2) = (at(2.0), at(1.0), at(-1.0), at(-2.0));
        for i in 0..m {
            jac[(i, j)] = (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h);
        }
    }
    jac
}

type VecFn = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;
type MatFn = Arc<dyn Fn(f64, &[f64]) -> DMatrix<f64> + Send + Sync>;

/// A [`PeriodicSystem`] assembled from closures.
#[derive(Clone)]
pub struct FnSystem {
    dim: usize,
    period: f64,
    f: VecFn,
    g: Option<VecFn>,
    df: Option<MatFn>,
}

impl FnSystem {
    pub fn new(
        dim: usize,
        period: f64,
        f: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { dim, period, f: Arc::new(f), g: None, df: None }
    }

    pub fn with_second_order(mut self, g: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.g = Some(Arc::new(g));
        self
    }

    pub fn with_jacobian(mut self, df: impl Fn(f64, &[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.df = Some(Arc::new(df));
        self
    }
}

impl PeriodicSystem for FnSystem {
    fn dim(&self) -> usize {
        self.dim
    }
    fn period(&self) -> f64 {
        self.period
    }
    fn first_order(&self, t: f64, x: &[f64]) -> Vec<f64> {
        (self.f)(t, x)
    }
    fn second_order(&self, t: f64, x: &[f64]) -> Vec<f64> {
        match &self.g {
            Some(g) => g(t, x),
            None => vec![0.0; self.dim],
        }
    }
    fn first_order_jacobian(&self, t: f64, x: &[f64]) -> Option<DMatrix<f64>> {
        self.df.as_ref().map(|df| df(t, x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    First,
    Second,
}

fn grid_samples(sys: &dyn PeriodicSystem, z: &[f64], n: usize) -> Vec<Sample> {
    let h = sys.period() / n as f64;
    (0..=n).map(|k| sys.sample(k as f64 * h, z)).collect()
}

fn component(samples: &[Sample], i: usize, pick: impl Fn(&Sample) -> &Vec<f64>) -> Vec<f64> {
    samples.iter().map(|s| pick(s)[i]).collect()
}

fn second_order_integral(samples: &[Sample], dim: usize, h: f64) -> Vec<f64> {
    let inner: Vec<Vec<f64>> = (0..dim)
        .map(|j| cumulative_simpson(&component(samples, j, |s| &s.f), h))
        .collect();
    (0..dim)
        .map(|i| {
            let integrand: Vec<f64> = samples
                .iter()
                .enumerate()
                .map(|(k, s)| s.g[i] + (0..dim).map(|j| s.df[(i, j)] * inner[j][k]).sum::<f64>())
                .collect();
            simpson(&integrand, h)
        })
        .collect()
}

fn first_order_integral(samples: &[Sample], dim: usize, h: f64) -> Vec<f64> {
    (0..dim).map(|i| simpson(&component(samples, i, |s| &s.f), h)).collect()
}

fn converged(fine: &[f64], coarse: &[f64], tol: f64) -> (bool, f64) {
    let est = fine
        .iter()
        .zip(coarse)
        .map(|(a, b)| (a - b).abs() / 15.0)
        .fold(0.0, f64::max);
    let scale = fine.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    (est <= tol * (1.0 + scale), est)
}

fn average_with(
    sys: &dyn PeriodicSystem,
    z: &[f64],
    cfg: &QuadratureConfig,
    integral: fn(&[Sample], usize, f64) -> Vec<f64>,
) -> Result<Vec<f64>> {
    let dim = sys.dim();
    let period = sys.period();
    let mut n = cfg.nodes.max(4);
    loop {
        let samples = grid_samples(sys, z, n);
        let h = period / n as f64;
        let fine = integral(&samples, dim, h);
        let coarse_samples: Vec<Sample> = samples.iter().step_by(2).cloned().collect();
        let coarse = integral(&coarse_samples, dim, 2.0 * h);
        let (ok, est) = converged(&fine, &coarse, cfg.tol * period);
        if ok {
            return Ok(fine.into_iter().map(|v| v / period).collect());
        }
        if 2 * n > cfg.max_nodes {
            return Err(Error::QuadratureNotConverged { estimate: est / period, nodes: n, tol: cfg.tol });
        }
        n *= 2;
    }
}

/// `f(z) = (1/T) ∫₀ᵀ F(s, z) ds`.
pub fn average_first(sys: &dyn PeriodicSystem, z: &[f64], cfg: &QuadratureConfig) -> Result<Vec<f64>> {
    average_with(sys, z, cfg, first_order_integral)
}

/// `g(z)`, with the inner integral accumulated on the same grid.
pub fn average_second(sys: &dyn PeriodicSystem, z: &[f64], cfg: &QuadratureConfig) -> Result<Vec<f64>> {
    average_with(sys, z, cfg, second_order_integral)
}

pub fn averaged_map(sys: &dyn PeriodicSystem, order: Order, z: &[f64], cfg: &QuadratureConfig) -> Result<Vec<f64>> {
    match order {
        Order::First => average_first(sys, z, cfg),
        Order::Second => average_second(sys, z, cfg),
    }
}

/// Jacobian of the averaged map. First order averages `D_z F` directly;
/// second order differences `g` centrally with step `1e-5 (1 + |z_j|)`.
pub fn averaged_jacobian(
    sys: &dyn PeriodicSystem,
    order: Order,
    z: &[f64],
    cfg: &QuadratureConfig,
) -> Result<DMatrix<f64>> {
    match order {
        Order::First => {
            let dim = sys.dim();
            let n = cfg.nodes.max(4);
            let h = sys.period() / n as f64;
            let samples = grid_samples(sys, z, n);
            let mut jac = DMatrix::zeros(dim, dim);
            for i in 0..dim {
                for j in 0..dim {
                    let col: Vec<f64> = samples.iter().map(|s| s.df[(i, j)]).collect();
                    jac[(i, j)] = simpson(&col, h) / sys.period();
                }
            }
            Ok(jac)
        }
        Order::Second => newton::fd_jacobian(&|y: &[f64]| average_second(sys, y, cfg), z, 1e-5),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedZero {
    pub z: Vec<f64>,
    pub order: Order,
    pub jac: Vec<Vec<f64>>,
    pub jac_det: f64,
    pub jac_eigenvalues: Vec<Complex64>,
    pub residual: f64,
}

impl AveragedZero {
    pub fn jacobian_matrix(&self) -> DMatrix<f64> {
        let n = self.jac.len();
        DMatrix::from_fn(n, n, |i, j| self.jac[i][j])
    }
}

/// Where Newton starts.
#[derive(Debug, Clone, PartialEq)]
pub enum Seeds {
    Points(Vec<Vec<f64>>),
    /// Midpoints of a `counts[0] × counts[1] × …` grid over `[lo, hi]`.
    Grid { lo: Vec<f64>, hi: Vec<f64>, counts: Vec<usize> },
}

impl Seeds {
    pub fn points(&self) -> Vec<Vec<f64>> {
        match self {
            Seeds::Points(p) => p.clone(),
            Seeds::Grid { lo, hi, counts } => {
                let mut out = vec![Vec::new()];
                for d in 0..lo.len() {
                    let step = (hi[d] - lo[d]) / counts[d] as f64;
                    out = out
                        .into_iter()
                        .flat_map(|prefix| {
                            (0..counts[d]).map(move |k| {
                                let mut p = prefix.clone();
                                p.push(lo[d] + (k as f64 + 0.5) * step);
                                p
                            })
                        })
                        .collect();
                }
                out
            }
        }
    }

    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Seeds::Grid { lo, hi, .. } => (lo.clone(), hi.clone()),
            Seeds::Points(pts) => {
                let n = pts.first().map_or(0, |p| p.len());
                let mut lo = vec![f64::INFINITY; n];
                let mut hi = vec![f64::NEG_INFINITY; n];
                for p in pts {
                    for d in 0..n {
                        lo[d] = lo[d].min(p[d]);
                        hi[d] = hi[d].max(p[d]);
                    }
                }
                for d in 0..n {
                    let pad = 0.5 * (1.0 + (hi[d] - lo[d]).abs());
                    lo[d] -= pad;
                    hi[d] += pad;
                }
                (lo, hi)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSearch {
    pub quadrature: QuadratureConfig,
    pub newton: NewtonOptions,
    /// Coordinates that must be strictly positive (e.g. a radius).
    pub positive: Vec<bool>,
    pub tol_det: f64,
    /// Largest first-order defect tolerated before second-order averaging.
    pub first_order_tol: f64,
    /// Number of random probes of `f ≡ 0`.
    pub first_order_probes: usize,
    pub dedup_rel: f64,
    pub max_residual: f64,
}

impl Default for ZeroSearch {
    fn default() -> Self {
        Self {
            quadrature: QuadratureConfig::default(),
            newton: NewtonOptions::default(),
            positive: Vec::new(),
            tol_det: 1e-8,
            first_order_tol: 1e-8,
            first_order_probes: 8,
            dedup_rel: 1e-6,
            max_residual: 1e-9,
        }
    }
}

/// Largest `|f|` over random points of the box.
pub fn first_order_defect(
    sys: &dyn PeriodicSystem,
    lo: &[f64],
    hi: &[f64],
    probes: usize,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0_f64;
    for _ in 0..probes {
        let z: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| rng.gen_range(*l..=*h)).collect();
        let f = average_first(sys, &z, cfg)?;
        worst = f.iter().fold(worst, |m, v| m.max(v.abs()));
    }
    Ok(worst)
}

/// Nondegenerate zeros of the averaged map reachable by Newton from `seeds`.
///
/// An empty result is a normal outcome. For [`Order::Second`] the first-order
/// average is probed first and [`Error::FirstOrderNotZero`] is returned when it
/// does not vanish.
pub fn find_averaged_zeros(
    sys: &dyn PeriodicSystem,
    order: Order,
    seeds: &Seeds,
    opts: &ZeroSearch,
) -> Result<Vec<AveragedZero>> {
    if order == Order::Second {
        let (mut lo, hi) = seeds.bounding_box();
        for (d, positive) in opts.positive.iter().enumerate() {
            if *positive && lo[d] <= 0.0 {
                lo[d] = hi[d].clamp(1e-6, 1e-3);
            }
        }
        let defect = first_order_defect(sys, &lo, &hi, opts.first_order_probes.max(8), &opts.quadrature)?;
        if defect > opts.first_order_tol {
            return Err(Error::FirstOrderNotZero { defect });
        }
    }

    let starts = seeds.points();
    let admissible = |z: &[f64]| {
        opts.positive
            .iter()
            .zip(z)
            .all(|(pos, v)| !*pos || *v > 0.0)
    };
    let solutions: Vec<Vec<f64>> = starts
        .par_iter()
        .filter_map(|s| {
            let f = |y: &[f64]| {
                if !admissible(y) {
                    return Err(Error::Domain("outside admissible region".into()));
                }
                averaged_map(sys, order, y, &opts.quadrature)
            };
            newton::solve(f, s, &opts.newton).ok().map(|o| o.x)
        })
        .collect();

    let mut unique: Vec<Vec<f64>> = Vec::new();
    for z in solutions {
        let dup = unique.iter().any(|u| {
            let dist = u.iter().zip(&z).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let scale = u.iter().map(|a| a * a).sum::<f64>().sqrt();
            dist <= opts.dedup_rel * (1.0 + scale)
        });
        if !dup {
            unique.push(z);
        }
    }

    let mut out = Vec::new();
    for z in unique {
        if !admissible(&z) {
            continue;
        }
        let zero = describe_zero(sys, order, &z, &opts.quadrature)?;
        if zero.residual <= opts.max_residual && zero.jac_det.abs() > opts.tol_det {
            out.push(zero);
        }
    }
    out.sort_by(|a, b| {
        a.z.iter()
            .zip(&b.z)
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal))
            .find(|o| *o != std::cmp::Ordering::Equal)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

/// Residual, Jacobian and spectrum of the averaged map at `z`.
pub fn describe_zero(sys: &dyn PeriodicSystem, order: Order, z: &[f64], cfg: &QuadratureConfig) -> Result<AveragedZero> {
    let value = averaged_map(sys, order, z, cfg)?;
    let residual = value.iter().map(|v| v * v).sum::<f64>().sqrt();
    let jac = averaged_jacobian(sys, order, z, cfg)?;
    let n = jac.nrows();
    let eig = nalgebra::Schur::try_new(jac.clone(), f64::EPSILON, 1000)
        .map(|s| s.complex_eigenvalues())
        .ok_or_else(|| Error::Domain("eigenvalues of the averaged Jacobian did not converge".into()))?;
    Ok(AveragedZero {
        z: z.to_vec(),
        order,
        jac: (0..n).map(|i| (0..n).map(|j| jac[(i, j)]).collect()).collect(),
        jac_det: jac.determinant(),
        jac_eigenvalues: eig.iter().copied().collect(),
        residual,
    })
}

/// Stability type of a periodic orbit, shared by the averaging and Floquet analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Attracting,
    Repelling,
    SaddleLike,
    Marginal,
}

pub const DEFAULT_TOL_MARGINAL: f64 = 1e-7;

/// Classification from the real parts of the averaged Jacobian eigenvalues,
/// assuming ε > 0.
pub fn stability_of_zero(az: &AveragedZero, tol_marginal: f64) -> Stability {
    classify_real_parts(az.jac_eigenvalues.iter().map(|l| l.re), tol_marginal)
}

pub(crate) fn classify_real_parts(parts: impl Iterator<Item = f64>, tol: f64) -> Stability {
    let (mut neg, mut pos) = (0, 0);
    for re in parts {
        if re.abs() < tol {
            return Stability::Marginal;
        }
        if re < 0.0 {
            neg += 1;
        } else {
            pos += 1;
        }
    }
    match (neg, pos) {
        (_, 0) => Stability::Attracting,
        (0, _) => Stability::Repelling,
        _ => Stability::SaddleLike,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn cosine_forcing_averages_out() {
        let sys = FnSystem::new(1, 2.0 * PI, |t, x| vec![-x[0] + t.cos()]);
        assert!(average_first(&sys, &[0.0], &cfg()).unwrap()[0].abs() < 1e-14);
        assert!((average_first(&sys, &[0.8], &cfg()).unwrap()[0] + 0.8).abs() < 1e-14);
    }

    #[test]
    fn sine_squared_forcing() {
        let sys = FnSystem::new(1, 2.0 * PI, |t, x| vec![t.sin().powi(2) * x[0]]);
        let f = average_first(&sys, &[1.3], &cfg()).unwrap();
        assert!((f[0] - 0.65).abs() < 1e-13);
    }

    #[test]
    fn second_order_only_g() {
        let sys = FnSystem::new(1, 2.0 * PI, |_, _| vec![0.0]).with_second_order(|_, x| vec![x[0] * x[0]]);
        let g = average_second(&sys, &[1.7], &cfg()).unwrap();
        assert!((g[0] - 2.89).abs() < 1e-13);
    }

    #[test]
    fn second_order_vanishes_for_state_independent_forcing() {
        let sys = FnSystem::new(1, 2.0 * PI, |t, _| vec![t.cos()]);
        assert!(average_second(&sys, &[0.4], &cfg()).unwrap()[0].abs() < 1e-14);
    }

    #[test]
    fn second_order_known_value() {
        // (1/2π) ∫ (cos s + 1)(sin s + s) ds = π, so g(x) = π x
        let sys = FnSystem::new(1, 2.0 * PI, |t, x| vec![x[0] * (t.cos() + 1.0)]);
        let g = average_second(&sys, &[2.0], &cfg()).unwrap();
        assert!((g[0] - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn quadrature_not_converged_reported() {
        let sys = FnSystem::new(1, 1.0, |t, _| vec![(t - 0.3).abs().sqrt()]);
        let tight = QuadratureConfig { nodes: 16, max_nodes: 64, tol: 1e-14 };
        assert!(matches!(average_first(&sys, &[0.0], &tight), Err(Error::QuadratureNotConverged { .. })));
    }

    #[test]
    fn linear_zero() {
        let sys = FnSystem::new(1, 2.0 * PI, |_, x| vec![-x[0]]);
        let zeros = find_averaged_zeros(&sys, Order::First, &Seeds::Points(vec![vec![0.7]]), &ZeroSearch::default()).unwrap();
        assert_eq!(zeros.len(), 1);
        assert!(zeros[0].z[0].abs() < 1e-12);
        assert!((zeros[0].jac[0][0] + 1.0).abs() < 1e-12);
        assert_eq!(stability_of_zero(&zeros[0], DEFAULT_TOL_MARGINAL), Stability::Attracting);
    }

    #[test]
    fn positivity_mask_discards_zero() {
        let sys = FnSystem::new(1, 2.0 * PI, |_, x| vec![x[0] * x[0] - 1.0]);
        let search = ZeroSearch { positive: vec![true], ..ZeroSearch::default() };
        let zeros = find_averaged_zeros(&sys, Order::First, &Seeds::Points(vec![vec![0.5], vec![2.0]]), &search).unwrap();
        assert_eq!(zeros.len(), 1);
        assert!((zeros[0].z[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn second_order_requires_vanishing_first() {
        let sys = FnSystem::new(1, 2.0 * PI, |_, x| vec![x[0] - 0.5]);
        let err = find_averaged_zeros(&sys, Order::Second, &Seeds::Points(vec![vec![1.0]]), &ZeroSearch::default());
        assert!(matches!(err, Err(Error::FirstOrderNotZero { .. })));
    }

    #[test]
    fn grid_seeds_enumerate_midpoints() {
        let s = Seeds::Grid { lo: vec![0.0, -1.0], hi: vec![1.0, 1.0], counts: vec![2, 2] };
        assert_eq!(s.points(), vec![vec![0.25, -0.5], vec![0.25, 0.5], vec![0.75, -0.5], vec![0.75, 0.5]]);
    }

    #[test]
    fn stability_labels() {
        let mk = |ev: Vec<f64>| AveragedZero {
            z: vec![0.0; ev.len()],
            order: Order::First,
            jac: vec![],
            jac_det: 1.0,
            jac_eigenvalues: ev.into_iter().map(|r| Complex64::new(r, 0.0)).collect(),
            residual: 0.0,
        };
        assert_eq!(stability_of_zero(&mk(vec![-1.0, -2.0]), 1e-7), Stability::Attracting);
        assert_eq!(stability_of_zero(&mk(vec![-1.0, 2.0]), 1e-7), Stability::SaddleLike);
        assert_eq!(stability_of_zero(&mk(vec![1.0, 2.0]), 1e-7), Stability::Repelling);
        assert_eq!(stability_of_zero(&mk(vec![1e-9, 2.0]), 1e-7), Stability::Marginal);
    }

    #[test]
    fn analytic_and_fd_jacobian_agree_in_g() {
        let f = |t: f64, x: &[f64]| vec![x[0] * x[1] * t.cos() + x[1] * x[1] * t.sin(), x[0].powi(2) * (2.0 * t).cos() - x[1]];
        let df = |t: f64, x: &[f64]| {
            DMatrix::from_row_slice(
                2,
                2,
                &[x[1] * t.cos(), x[0] * t.cos() + 2.0 * x[1] * t.sin(), 2.0 * x[0] * (2.0 * t).cos(), -1.0],
            )
        };
        let fd = FnSystem::new(2, 2.0 * PI, f);
        let an = FnSystem::new(2, 2.0 * PI, f).with_jacobian(df);
        let z = [0.7, -1.2];
        let a = average_second(&an, &z, &cfg()).unwrap();
        let b = average_second(&fd, &z, &cfg()).unwrap();
        assert!((a[0] - b[0]).abs() < 1e-6 && (a[1] - b[1]).abs() < 1e-6);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]
            #[test]
            fn average_first_is_linear(k1 in -3.0..3.0f64, k2 in -3.0..3.0f64, z in -2.0..2.0f64) {
                let f1 = |t: f64, x: &[f64]| vec![x[0] * t.sin().powi(2) + t.cos()];
                let f2 = |t: f64, x: &[f64]| vec![x[0].powi(2) * (1.0 + t.cos())];
                let combo = FnSystem::new(1, 2.0 * PI, move |t, x| vec![k1 * f1(t, x)[0] + k2 * f2(t, x)[0]]);
                let a = average_first(&FnSystem::new(1, 2.0 * PI, f1), &[z], &cfg()).unwrap()[0];
                let b = average_first(&FnSystem::new(1, 2.0 * PI, f2), &[z], &cfg()).unwrap()[0];
                let c = average_first(&combo, &[z], &cfg()).unwrap()[0];
                prop_assert!((c - k1 * a - k2 * b).abs() < 1e-12);
            }

            #[test]
            fn refining_quadrature_changes_little(z in -2.0..2.0f64) {
                let sys = FnSystem::new(1, 2.0 * PI, |t, x| vec![x[0] * (t.cos() + 0.3) + (x[0] * t.sin()).powi(2)]);
                let coarse = QuadratureConfig { nodes: 512, ..cfg() };
                let fine = QuadratureConfig { nodes: 1024, ..cfg() };
                let a = average_second(&sys, &[z], &coarse).unwrap()[0];
                let b = average_second(&sys, &[z], &fine).unwrap()[0];
                prop_assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
            }
        }
    }
}
