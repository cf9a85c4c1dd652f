//! Poincaré return maps, Newton shooting for periodic orbits, and Floquet multipliers.

use crate::averaging::Stability;
use crate::error::{Error, Result};
use crate::fhn::{vector_field, Params, State};
use crate::ode::{fhn_rhs, flow_with_monodromy, integrate_system, IntegratorConfig, Step, Stepper};
use crate::reduction::OrbitPrediction;
use nalgebra::{Matrix3, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Smallest admissible `|⟨f, n⟩|` at a crossing.
pub const MIN_NORMAL_VELOCITY: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareSection {
    pub anchor: State,
    /// Unit normal.
    pub normal: State,
    /// `+1` counts crossings along the normal, `-1` against it.
    pub direction: f64,
}

impl PoincareSection {
    pub fn new(anchor: State, normal: State, direction: f64) -> Result<Self> {
        let n = normal.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Domain("section normal must be a nonzero finite vector".into()));
        }
        if direction != 1.0 && direction != -1.0 {
            return Err(Error::Domain("section direction must be +1 or -1".into()));
        }
        Ok(Self { anchor, normal: normal * (1.0 / n), direction })
    }

    /// Plane through `point` orthogonal to the flow there.
    pub fn through_flow(p: &Params, point: State) -> Result<Self> {
        Self::new(point, vector_field(p, &point), 1.0)
    }

    pub fn signed_distance(&self, s: &State) -> f64 {
        (*s - self.anchor).dot(&self.normal)
    }
}

fn state_of(y: &[f64]) -> State {
    State::new(y[0], y[1], y[2])
}

/// First oriented return of the orbit through `s0` to `sec`.
///
/// The crossing is bracketed on the Hermite dense output and then corrected
/// by Newton steps that re-integrate from the start of the bracketing step.
pub fn poincare_map(p: &Params, sec: &PoincareSection, s0: State, cfg: &IntegratorConfig) -> Result<(State, f64)> {
    cfg.validate()?;
    let rhs = fhn_rhs(p);
    let mut st = Stepper::new(&rhs, 0.0, &s0.to_array(), 1.0, *cfg);
    let g = |y: &[f64]| sec.direction * sec.signed_distance(&state_of(y));
    while st.time() < cfg.max_time {
        let step = st.step(cfg.max_time)?;
        let (g0, g1) = (g(&step.y0), g(&step.y1));
        if g0 < 0.0 && g1 >= 0.0 {
            return locate_crossing(p, sec, &step, cfg);
        }
    }
    Err(Error::NoReturn { max_time: cfg.max_time })
}

fn locate_crossing(p: &Params, sec: &PoincareSection, step: &Step, cfg: &IntegratorConfig) -> Result<(State, f64)> {
    let g = |t: f64| sec.signed_distance(&state_of(&step.interpolate(t)));
    let (mut lo, mut hi) = (step.t0, step.t1);
    let mut glo = g(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if (gm < 0.0) == (glo < 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * (1.0 + hi.abs()) {
            break;
        }
    }
    let mut t = 0.5 * (lo + hi);
    let mut x = state_of(&step.interpolate(t));
    for _ in 0..8 {
        x = if t > step.t0 {
            let traj = integrate_system(fhn_rhs(p), &step.y0, step.t0, t, cfg)?;
            state_of(traj.final_state())
        } else {
            state_of(&step.y0)
        };
        let vn = vector_field(p, &x).dot(&sec.normal);
        if vn.abs() < MIN_NORMAL_VELOCITY {
            return Err(Error::TangentialCrossing { normal_velocity: vn });
        }
        let dt = -sec.signed_distance(&x) / vn;
        t += dt;
        if dt.abs() <= 1e-12 * (1.0 + t.abs()) {
            break;
        }
    }
    let vn = vector_field(p, &x).dot(&sec.normal);
    if vn.abs() < MIN_NORMAL_VELOCITY {
        return Err(Error::TangentialCrossing { normal_velocity: vn });
    }
    Ok((x, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingOptions {
    pub max_steps: usize,
    /// Converged when `‖φ_T(s) - s‖` falls below this.
    pub tol: f64,
    /// Accepted on stagnation when the residual is already below this.
    pub stall_tol: f64,
    /// Tolerance on `| |μ| - 1 |` below which a multiplier counts as marginal.
    pub tol_marginal: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self { max_steps: 30, tol: 1e-10, stall_tol: 1e-9, tol_marginal: 1e-7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub initial: State,
    pub period: f64,
    /// `‖φ_T(s) - s‖`
    pub residual: f64,
    pub floquet: [Complex64; 3],
    pub stability: Stability,
    pub newton_steps: usize,
    /// `min |μ - 1|`
    pub trivial_multiplier_defect: f64,
    /// `|det M - exp((c - bd) T)|`
    pub abel_liouville_defect: f64,
}

fn monodromy_matrix(m: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[i][j])
}

/// Eigenvalues of the monodromy matrix, ordered by `(Re, Im)`.
pub fn multipliers_of(m: &[[f64; 3]; 3]) -> [Complex64; 3] {
    let mm = monodromy_matrix(m);
    let mut out = crate::cubic::matrix_eigenvalues(&mm).unwrap_or_else(|| {
        let minors = mm[(0, 0)] * mm[(1, 1)] - mm[(0, 1)] * mm[(1, 0)] + mm[(0, 0)] * mm[(2, 2)]
            - mm[(0, 2)] * mm[(2, 0)]
            + mm[(1, 1)] * mm[(2, 2)]
            - mm[(1, 2)] * mm[(2, 1)];
        crate::cubic::eigenvalues_cubic(&crate::cubic::CubicCoeffs::monic(-mm.trace(), minors, -mm.determinant()))
    });
    crate::cubic::sort_roots(&mut out);
    out
}

/// Stability from the multipliers other than the one closest to 1.
pub fn floquet_stability(mu: &[Complex64; 3], tol_marginal: f64) -> Stability {
    let trivial = (0..3)
        .min_by(|&i, &j| (mu[i] - 1.0).norm().total_cmp(&(mu[j] - 1.0).norm()))
        .unwrap_or(0);
    let logs = (0..3).filter(|&i| i != trivial).map(|i| mu[i].norm() - 1.0);
    crate::averaging::classify_real_parts(logs, tol_marginal)
}

/// Floquet multipliers of a converged orbit, recomputed from the variational equations.
pub fn floquet_multipliers(p: &Params, orbit: &PeriodicOrbit, cfg: &IntegratorConfig) -> Result<[Complex64; 3]> {
    let (_, m) = flow_with_monodromy(p, orbit.initial, orbit.period, cfg)?;
    Ok(multipliers_of(&m))
}

/// Newton shooting on `(φ_T(s) - s, ⟨s - guess, f(guess)⟩)` in the unknowns `(s, T)`.
pub fn refine_periodic(
    p: &Params,
    guess: State,
    t_guess: f64,
    cfg: &IntegratorConfig,
    opts: &ShootingOptions,
) -> Result<PeriodicOrbit> {
    if !(t_guess > 0.0) {
        return Err(Error::Domain(format!("period guess must be positive (got {t_guess})")));
    }
    let fg = vector_field(p, &guess);
    let residual_of = |s: State, t: f64| -> Result<(Vector4<f64>, State, [[f64; 3]; 3])> {
        let (end, m) = flow_with_monodromy(p, s, t, cfg)?;
        let d = end - s;
        let phase = (s - guess).dot(&fg);
        Ok((Vector4::new(d.x, d.y, d.z, phase), end, m))
    };

    let (mut s, mut t) = (guess, t_guess);
    let (mut res, mut end, mut m) = residual_of(s, t)?;
    let mut norm = res.norm();
    let mut steps = 0;
    loop {
        let defect = (end - s).norm();
        if defect < opts.tol && res[3].abs() < opts.tol {
            break;
        }
        if steps >= opts.max_steps {
            return Err(Error::ShootingDiverged { steps, residual: defect });
        }
        steps += 1;
        let fe = vector_field(p, &end);
        let mut jac = Matrix4::zeros();
        for i in 0..3 {
            for j in 0..3 {
                jac[(i, j)] = m[i][j] - if i == j { 1.0 } else { 0.0 };
            }
        }
        let fe_arr = fe.to_array();
        let fg_arr = fg.to_array();
        for i in 0..3 {
            jac[(i, 3)] = fe_arr[i];
            jac[(3, i)] = fg_arr[i];
        }
        let delta = jac
            .lu()
            .solve(&(-res))
            .ok_or(Error::ShootingDiverged { steps, residual: defect })?;

        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda >= 1.0 / 64.0 {
            let sn = s + State::new(delta[0], delta[1], delta[2]) * lambda;
            let tn = t + lambda * delta[3];
            if tn > 0.0 {
                if let Ok((rn, en, mn)) = residual_of(sn, tn) {
                    if rn.norm() < norm {
                        s = sn;
                        t = tn;
                        res = rn;
                        end = en;
                        m = mn;
                        norm = rn.norm();
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            if defect < opts.stall_tol {
                break;
            }
            return Err(Error::ShootingDiverged { steps, residual: defect });
        }
    }

    let residual = (end - s).norm();
    let floquet = multipliers_of(&m);
    let trivial = floquet.iter().map(|mu| (mu - 1.0).norm()).fold(f64::INFINITY, f64::min);
    let det = monodromy_matrix(&m).determinant();
    let abel = (det - (p.divergence() * t).exp()).abs();
    Ok(PeriodicOrbit {
        initial: s,
        period: t,
        residual,
        floquet,
        stability: floquet_stability(&floquet, opts.tol_marginal),
        newton_steps: steps,
        trivial_multiplier_defect: trivial,
        abel_liouville_defect: abel,
    })
}

/// Shooting from a prediction's embedded initial condition and approximate period.
pub fn verify_prediction(
    pred: &OrbitPrediction,
    cfg: &IntegratorConfig,
    opts: &ShootingOptions,
) -> Result<PeriodicOrbit> {
    if pred.eps == 0.0 {
        return Err(Error::Domain("prediction has ε = 0: there is no perturbation to verify".into()));
    }
    refine_periodic(&pred.params, pred.initial_condition, pred.approx_period, cfg, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    // b = c = 0: y is frozen and x'' = x (x - 1)(x - a) + y is conservative
    fn conservative() -> Params {
        Params::new(-1.0, 0.0, 0.0, 1.0)
    }

    #[test]
    fn section_normalises() {
        let sec = PoincareSection::new(State::ORIGIN, State::new(0.0, 0.0, 2.0), 1.0).unwrap();
        assert!((sec.normal.norm() - 1.0).abs() < 1e-15);
        assert!(PoincareSection::new(State::ORIGIN, State::ORIGIN, 1.0).is_err());
    }

    #[test]
    fn return_map_of_conservative_oscillator() {
        // b = c = 0: y is constant and (x, z) is a Hamiltonian oscillator, so
        // every orbit near the origin is closed and the return point is the start
        let p = conservative();
        let s0 = State::new(0.05, 0.0, 0.0);
        let sec = PoincareSection::through_flow(&p, s0).unwrap();
        let (ret, t) = poincare_map(&p, &sec, s0, &IntegratorConfig::default()).unwrap();
        assert!(ret.distance(&s0) < 1e-9, "{}", ret.distance(&s0));
        assert!((t - 2.0 * std::f64::consts::PI).abs() < 0.05);
        assert!(sec.signed_distance(&ret).abs() < 1e-12);
    }

    #[test]
    fn no_return_is_reported() {
        // x' = z, z' grows: the orbit escapes along the unstable direction
        let p = Params::new(2.0, 0.0, 1.0, 1.0);
        let s0 = State::new(0.0, 0.0, 0.1);
        let sec = PoincareSection::through_flow(&p, s0).unwrap();
        let cfg = IntegratorConfig { max_time: 5.0, ..Default::default() };
        assert!(poincare_map(&p, &sec, s0, &cfg).is_err());
    }

    #[test]
    fn floquet_classification() {
        let one = Complex64::new(1.0, 0.0);
        let mk = |a: f64, b: f64| [Complex64::new(a, 0.0), one, Complex64::new(b, 0.0)];
        assert_eq!(floquet_stability(&mk(0.5, 0.9), 1e-7), Stability::Attracting);
        assert_eq!(floquet_stability(&mk(1.5, 0.9), 1e-7), Stability::SaddleLike);
        assert_eq!(floquet_stability(&mk(1.5, 2.0), 1e-7), Stability::Repelling);
    }

    #[test]
    fn shooting_rejects_bad_period() {
        let p = conservative();
        assert!(matches!(
            refine_periodic(&p, State::new(0.1, 0.0, 0.0), -1.0, &IntegratorConfig::default(), &ShootingOptions::default()),
            Err(Error::Domain(_))
        ));
    }
}
