//! Averaged zeros of the reduced systems, turned into orbit predictions.

use super::{PerturbationT1, PerturbationT2, PerturbationT34, ReducedSystem, Theorem};
use crate::averaging::{
    average_second, find_averaged_zeros, first_order_defect, stability_of_zero, AveragedZero, Order, Seeds,
    Stability, ZeroSearch, DEFAULT_TOL_MARGINAL,
};
use crate::error::{Error, Result};
use crate::fhn::{Params, State};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A named quantity with the verdict of the test applied to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    /// Non-finite values serialize as `null` and read back as NaN.
    #[serde(deserialize_with = "nan_from_null")]
    pub value: f64,
    pub satisfied: bool,
}

fn nan_from_null<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl Condition {
    pub fn new(name: &str, value: f64, satisfied: bool) -> Self {
        Self { name: name.to_string(), value, satisfied }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitPrediction {
    pub theorem: Theorem,
    pub eps: f64,
    pub params: Params,
    /// The equilibrium the orbit is born from, at this ε.
    pub centre: State,
    pub omega: f64,
    pub rw_star: [f64; 2],
    pub conditions: Vec<Condition>,
    /// Printed closed form where one exists, otherwise the quadrature value.
    pub jac_det_value: f64,
    pub jac_det_quadrature: f64,
    pub averaged_eigenvalues: Vec<Complex64>,
    pub initial_condition: State,
    pub approx_period: f64,
    pub stability: Stability,
    pub gamma_aux: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub theorem: Theorem,
    pub eps: f64,
    pub params: Params,
    pub centre: State,
    pub omega: f64,
    pub sigma: Option<f64>,
    pub gamma_aux: Option<f64>,
    pub conditions: Vec<Condition>,
    pub orbits: Vec<OrbitPrediction>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictOptions {
    pub search: ZeroSearch,
    /// Half-width of the `w` scan.
    pub w_max: f64,
    pub w_cells: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub max_roots: usize,
    pub tol_marginal: f64,
}

impl Default for PredictOptions {
    fn default() -> Self {
        Self {
            search: ZeroSearch { positive: vec![true, false], ..ZeroSearch::default() },
            w_max: 50.0,
            w_cells: 2000,
            r_min: 1e-3,
            r_max: 10.0,
            max_roots: 3,
            tol_marginal: DEFAULT_TOL_MARGINAL,
        }
    }
}

impl PredictOptions {
    fn search(&self) -> ZeroSearch {
        let mut s = self.search.clone();
        s.positive = vec![true, false];
        s
    }
}

fn flip(s: Stability) -> Stability {
    match s {
        Stability::Attracting => Stability::Repelling,
        Stability::Repelling => Stability::Attracting,
        other => other,
    }
}

fn prediction(
    sys: &ReducedSystem,
    z: &AveragedZero,
    conditions: Vec<Condition>,
    jac_det_value: f64,
    tol_marginal: f64,
) -> OrbitPrediction {
    let (r, w) = (z.z[0], z.z[1]);
    let mut stability = stability_of_zero(z, tol_marginal);
    if sys.time_orientation(z.order == Order::Second) < 0.0 {
        stability = flip(stability);
    }
    OrbitPrediction {
        theorem: sys.theorem,
        eps: sys.eps,
        params: sys.params(),
        centre: sys.equilibrium(),
        omega: sys.omega,
        rw_star: [r, w],
        conditions,
        jac_det_value,
        jac_det_quadrature: z.jac_det,
        averaged_eigenvalues: z.jac_eigenvalues.clone(),
        initial_condition: sys.embed(r, w),
        approx_period: sys.approx_period(r, w),
        stability,
        gamma_aux: sys.gamma_aux,
    }
}

fn set(sys: &ReducedSystem, conditions: Vec<Condition>, orbits: Vec<OrbitPrediction>) -> PredictionSet {
    PredictionSet {
        theorem: sys.theorem,
        eps: sys.eps,
        params: sys.params(),
        centre: sys.equilibrium(),
        omega: sys.omega,
        sigma: sys.sigma,
        gamma_aux: sys.gamma_aux,
        conditions,
        orbits,
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

/// Zero-Hopf orbit at the origin from first-order averaging (at most one).
pub fn predict_orbits_t1(p: &PerturbationT1, opts: &PredictOptions) -> Result<PredictionSet> {
    p.validate()?;
    let sys = p.build()?;
    let gamma = p.gamma_aux();
    let branch = p.d * (1.0 - p.d);
    let closed = p.closed_form_zero();
    let mut conditions = vec![
        Condition::new("one_over_d_minus_omega_sq", 1.0 / p.d - p.omega * p.omega, true),
        Condition::new("gamma_aux_positive", gamma, gamma > 0.0),
        Condition::new("d_times_one_minus_d", branch, branch != 0.0),
        Condition::new("statement_inequality", p.statement_condition(), p.statement_condition() > 0.0),
        Condition::new("jac_det_closed_form", p.jac_det_closed_form(), p.jac_det_closed_form() != 0.0),
    ];

    let mut seeds = Seeds::Grid {
        lo: vec![opts.r_min, -5.0],
        hi: vec![opts.r_max, 5.0],
        counts: vec![4, 4],
    }
    .points();
    if let Some((r, w)) = closed {
        seeds.insert(0, vec![r, w]);
    }
    let zeros = find_averaged_zeros(&sys, Order::First, &Seeds::Points(seeds), &opts.search())?;
    conditions.push(Condition::new("averaged_zero_count", zeros.len() as f64, !zeros.is_empty()));

    let orbits = zeros
        .iter()
        .map(|z| {
            let mut c = Vec::new();
            if let Some((r, w)) = closed {
                c.push(Condition::new("closed_form_r_star", r, close(z.z[0], r, 1e-7)));
                // the zero of the printed (f₁, f₂) is the printed r* over √2
                let r2 = r / std::f64::consts::SQRT_2;
                c.push(Condition::new("closed_form_r_star_over_sqrt2", r2, close(z.z[0], r2, 1e-7)));
                c.push(Condition::new("closed_form_w_star", w, close(z.z[1], w, 1e-7)));
            }
            c.push(Condition::new("r_star_positive", z.z[0], z.z[0] > 0.0));
            prediction(&sys, z, c, p.jac_det_closed_form(), opts.tol_marginal)
        })
        .collect();
    Ok(set(&sys, conditions, orbits))
}

/// Zero-Hopf orbit at the origin from second-order averaging (at most one).
pub fn predict_orbits_t2(p: &PerturbationT2, opts: &PredictOptions) -> Result<PredictionSet> {
    p.validate()?;
    p.check_nondegenerate()?;
    let sys = p.build()?;
    let mut conditions = vec![
        Condition::new("beta1_minus_gamma1_omega_sq", p.beta1 - p.gamma1 * p.omega * p.omega, true),
        Condition::new("discriminant", p.discriminant(), p.discriminant() > 0.0),
        Condition::new(
            "discriminant_beta2_squared_reading",
            p.discriminant_squared_reading(),
            p.discriminant_squared_reading() > 0.0,
        ),
        Condition::new("gamma1_nonzero", p.gamma1, p.gamma1 != 0.0),
        Condition::new("omega_not_one", p.omega, p.omega != 1.0),
    ];
    check_first_order(&sys, opts, &mut conditions)?;

    let closed = p.closed_form_zero();
    let mut seeds = second_order_candidates(&sys, opts, &mut conditions)?;
    if let Some((r, w)) = closed {
        seeds.insert(0, [r, w]);
    }
    let zeros = polish(&sys, &seeds, opts)?;
    conditions.push(Condition::new("averaged_zero_count", zeros.len() as f64, !zeros.is_empty()));

    let orbits = zeros
        .iter()
        .map(|z| {
            let mut c = Vec::new();
            if let Some((r, w)) = closed {
                c.push(Condition::new("closed_form_r_star", r, close(z.z[0], r, 1e-7)));
                c.push(Condition::new("closed_form_w_star", w, close(z.z[1], w, 1e-7)));
            }
            c.push(Condition::new(
                "jac_det_rederived",
                p.jac_det_rederived(),
                close(z.jac_det, p.jac_det_rederived(), 1e-6),
            ));
            c.push(Condition::new("r_star_positive", z.z[0], z.z[0] > 0.0));
            prediction(&sys, z, c, p.jac_det_closed_form(), opts.tol_marginal)
        })
        .collect();
    Ok(set(&sys, conditions, orbits))
}

/// Orbits born at `P±` from second-order averaging (at most `max_roots`).
pub fn predict_orbits_t34(p: &PerturbationT34, opts: &PredictOptions) -> Result<PredictionSet> {
    p.validate()?;
    let sys = p.build()?;
    let mut conditions = vec![
        Condition::new("d_alpha0_plus_one", p.d * p.alpha0 + 1.0, (p.d * p.alpha0 + 1.0).abs() <= 1e-12),
        Condition::new(
            "alpha0_gamma1_plus_beta1",
            p.alpha0 * p.gamma1 + p.beta1,
            (p.alpha0 * p.gamma1 + p.beta1).abs() <= 1e-12,
        ),
        Condition::new("quadratic_alpha0", p.quadratic_condition(), p.quadratic_condition() < 0.0),
        Condition::new("sigma_printed", p.sigma_printed(), p.sigma_printed() > 0.0),
        Condition::new("sigma_used", sys.sigma.unwrap_or(f64::NAN), sys.sigma.is_some_and(|s| s > 0.0)),
        Condition::new(
            "centre_x_at_eps0",
            sys.equilibrium_at(0.0).x,
            sys.equilibrium_at(0.0).x.abs() <= 1e-12,
        ),
    ];
    check_first_order(&sys, opts, &mut conditions)?;
    let seeds = second_order_candidates(&sys, opts, &mut conditions)?;
    let mut zeros = polish(&sys, &seeds, opts)?;
    let found = zeros.len();
    zeros.truncate(opts.max_roots);
    conditions.push(Condition::new("averaged_zero_count", found as f64, found <= opts.max_roots));

    let orbits = zeros
        .iter()
        .map(|z| {
            let mut c = vec![Condition::new("r_star_positive", z.z[0], z.z[0] > 0.0)];
            match p.printed_r_star(z.z[1]) {
                Some(r) => c.push(Condition::new("printed_r_star", r, close(r, z.z[0], 1e-6))),
                None => c.push(Condition::new("printed_r_star", f64::NAN, false)),
            }
            prediction(&sys, z, c, z.jac_det, opts.tol_marginal)
        })
        .collect();
    Ok(set(&sys, conditions, orbits))
}

fn check_first_order(sys: &ReducedSystem, opts: &PredictOptions, conditions: &mut Vec<Condition>) -> Result<f64> {
    let q = &opts.search.quadrature;
    let defect = first_order_defect(sys, &[0.1, -2.0], &[3.0, 2.0], opts.search.first_order_probes.max(8), q)?;
    let ok = defect <= opts.search.first_order_tol;
    conditions.push(Condition::new("first_order_defect", defect, ok));
    if !ok {
        return Err(Error::FirstOrderNotZero { defect });
    }
    Ok(defect)
}

fn polish(sys: &ReducedSystem, seeds: &[[f64; 2]], opts: &PredictOptions) -> Result<Vec<AveragedZero>> {
    if seeds.is_empty() {
        return Ok(Vec::new());
    }
    let pts = seeds.iter().map(|s| s.to_vec()).collect();
    find_averaged_zeros(sys, Order::Second, &Seeds::Points(pts), &opts.search())
}

/// Affine model `g₁(r, w) / r ≈ A + B w + C r²`, checked at two extra points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G1Model {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub valid: bool,
}

impl G1Model {
    pub fn fit(g1_over_r: impl Fn(f64, f64) -> Result<f64>) -> Result<Self> {
        let v10 = g1_over_r(1.0, 0.0)?;
        let v11 = g1_over_r(1.0, 1.0)?;
        let v20 = g1_over_r(2.0, 0.0)?;
        let c = (v20 - v10) / 3.0;
        let a = v10 - c;
        let b = v11 - v10;
        let scale = 1.0 + a.abs() + b.abs() + c.abs();
        let mut valid = true;
        for &(r, w) in &[(1.5, -0.7), (0.6, 1.3)] {
            let model = a + b * w + c * r * r;
            if (g1_over_r(r, w)? - model).abs() > 1e-7 * scale * (1.0 + w.abs() + r * r) {
                valid = false;
            }
        }
        Ok(Self { a, b, c, valid })
    }

    fn c_negligible(&self) -> bool {
        self.c.abs() <= 1e-8 * (1.0 + self.a.abs() + self.b.abs())
    }
}

/// Seed points for the zeros of `g`, following the curve `g₁ = 0` with `r > 0`
/// and locating sign changes of `g₂` along it.
fn second_order_candidates(
    sys: &ReducedSystem,
    opts: &PredictOptions,
    conditions: &mut Vec<Condition>,
) -> Result<Vec<[f64; 2]>> {
    let q = opts.search.quadrature;
    let g = |r: f64, w: f64| average_second(sys, &[r, w], &q);
    let model = G1Model::fit(|r, w| Ok(g(r, w)?[0] / r))?;
    conditions.push(Condition::new("g1_model_valid", 0.0, model.valid));
    if !model.valid {
        let grid = Seeds::Grid {
            lo: vec![opts.r_min, -opts.w_max],
            hi: vec![opts.r_max, opts.w_max],
            counts: vec![6, 40],
        };
        return Ok(grid.points().into_iter().map(|p| [p[0], p[1]]).collect());
    }

    let mut out = Vec::new();
    if model.c_negligible() {
        conditions.push(Condition::new("g1_r_squared_coefficient", model.c, true));
        if model.b.abs() <= 1e-12 * (1.0 + model.a.abs()) {
            conditions.push(Condition::new("g1_w_coefficient", model.b, false));
            return Ok(out);
        }
        let w = -model.a / model.b;
        // g₂(r, w*) = P + Q r² in every case met so far; scan when it is not
        let g2 = |r: f64| -> Result<f64> { Ok(g(r, w)?[1]) };
        let (q1, q2) = (g2(1.0)?, g2(2.0)?);
        let qq = (q2 - q1) / 3.0;
        let pp = q1 - qq;
        let scale = 1.0 + pp.abs() + qq.abs();
        let mut quadratic = true;
        for r in [0.5, 1.7] {
            quadratic &= (g2(r)? - (pp + qq * r * r)).abs() <= 1e-7 * scale * (1.0 + r * r);
        }
        if quadratic {
            if qq != 0.0 && -pp / qq > 0.0 {
                out.push([(-pp / qq).sqrt(), w]);
            }
        } else {
            for r in scan_roots(&|r| g2(r).ok(), opts.r_min, opts.r_max, opts.w_cells)? {
                out.push([r, w]);
            }
        }
        return Ok(out);
    }

    conditions.push(Condition::new("g1_r_squared_coefficient", model.c, true));
    let r_of = |w: f64| {
        let r2 = -(model.a + model.b * w) / model.c;
        (r2 > 0.0).then(|| r2.sqrt())
    };
    let h = 2.0 * opts.w_max / opts.w_cells as f64;
    let along = |w: f64| r_of(w).and_then(|r| g(r, w).ok().map(|v| v[1]));
    for w in scan_roots(&along, -opts.w_max, opts.w_max, opts.w_cells)? {
        // the factor w of g₂(r*(w), w) is not an orbit
        if w.abs() < 0.5 * h {
            continue;
        }
        if let Some(r) = r_of(w) {
            out.push([r, w]);
        }
    }
    Ok(out)
}

/// Sign changes of `f` on a uniform grid, refined by bisection.
fn scan_roots(f: &dyn Fn(f64) -> Option<f64>, lo: f64, hi: f64, cells: usize) -> Result<Vec<f64>> {
    let h = (hi - lo) / cells as f64;
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..=cells {
        let x = lo + k as f64 * h;
        let v = f(x);
        if let (Some((xp, vp)), Some(vc)) = (prev, v) {
            if vc == 0.0 {
                roots.push(x);
            } else if vp * vc < 0.0 {
                let (mut a, mut b, mut fa) = (xp, x, vp);
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    match f(m) {
                        Some(fm) if fm * fa > 0.0 => {
                            a = m;
                            fa = fm;
                        }
                        Some(_) => b = m,
                        None => break,
                    }
                }
                roots.push(0.5 * (a + b));
            }
        }
        prev = v.map(|vc| (x, vc));
    }
    Ok(roots)
}
