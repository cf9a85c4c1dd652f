//! Adaptive Dormand–Prince 5(4) integration with cubic Hermite dense output.

use crate::error::{Error, Result};
use crate::fhn::{jacobian, vector_field, Params, State};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Longest admissible integration span.
    pub max_time: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_step: 1.0, max_time: 1e4 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.max_step > 0.0 && self.max_time > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain("integrator tolerances, max_step and max_time must be positive".into()))
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One accepted step with endpoint derivatives, enough for Hermite interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub t0: f64,
    pub t1: f64,
    pub y0: Vec<f64>,
    pub y1: Vec<f64>,
    pub f0: Vec<f64>,
    pub f1: Vec<f64>,
}

impl Step {
    /// Cubic Hermite interpolant at `t` within the step.
    pub fn interpolate(&self, t: f64) -> Vec<f64> {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        (0..self.y0.len())
            .map(|i| h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i])
            .collect()
    }
}

/// Step-by-step Dormand–Prince driver for `y' = f(t, y)`.
pub struct Stepper<F> {
    f: F,
    t: f64,
    y: Vec<f64>,
    fy: Vec<f64>,
    h: f64,
    dir: f64,
    cfg: IntegratorConfig,
}

fn err_weight(cfg: &IntegratorConfig, a: f64, b: f64) -> f64 {
    cfg.abs_tol + cfg.rel_tol * a.abs().max(b.abs())
}

impl<F: Fn(f64, &[f64], &mut [f64])> Stepper<F> {
    /// `dir` is +1 for forward and -1 for backward integration.
    pub fn new(f: F, t0: f64, y0: &[f64], dir: f64, cfg: IntegratorConfig) -> Self {
        let n = y0.len();
        let mut fy = vec![0.0; n];
        f(t0, y0, &mut fy);
        // Hairer's starting step heuristic
        let d0 = rms(y0.iter().map(|v| v / err_weight(&cfg, *v, *v)));
        let d1 = rms(y0.iter().zip(&fy).map(|(v, dv)| dv / err_weight(&cfg, *v, *v)));
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(cfg.max_step);
        let y1: Vec<f64> = y0.iter().zip(&fy).map(|(v, dv)| v + dir * h0 * dv).collect();
        let mut f1 = vec![0.0; n];
        f(t0 + dir * h0, &y1, &mut f1);
        let d2 = rms(y0.iter().zip(f1.iter().zip(&fy)).map(|(v, (a, b))| (a - b) / err_weight(&cfg, *v, *v))) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        let h = (100.0 * h0).min(h1).min(cfg.max_step);
        Self { f, t: t0, y: y0.to_vec(), fy, h, dir, cfg }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64] {
        &self.y
    }

    /// Take one accepted step, never passing `t_stop`.
    pub fn step(&mut self, t_stop: f64) -> Result<Step> {
        let n = self.y.len();
        let mut k = vec![vec![0.0; n]; 7];
        let mut ytmp = vec![0.0; n];
        loop {
            let remaining = (t_stop - self.t) * self.dir;
            let mut h = self.h.min(self.cfg.max_step);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            if h <= 1e-14 * (1.0 + self.t.abs()) && !last {
                return Err(Error::StepSizeUnderflow { t: self.t });
            }
            let hs = self.dir * h;
            k[0].copy_from_slice(&self.fy);
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = self.y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += hs * A[s][j] * kj[i];
                    }
                    ytmp[i] = acc;
                }
                (self.f)(self.t + C[s] * hs, &ytmp, &mut k[s]);
            }
            // ytmp now holds the fifth-order solution (FSAL stage)
            let mut err = 0.0;
            for i in 0..n {
                let mut e = 0.0;
                for (s, ks) in k.iter().enumerate() {
                    e += E[s] * ks[i];
                }
                let w = err_weight(&self.cfg, self.y[i], ytmp[i]);
                err += (hs * e / w).powi(2);
            }
            let err = (err / n as f64).sqrt();
            if !err.is_finite() {
                self.h = h * 0.2;
                if self.h <= 1e-14 * (1.0 + self.t.abs()) {
                    return Err(Error::StepSizeUnderflow { t: self.t });
                }
                continue;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                let t1 = if last { t_stop } else { self.t + hs };
                let step = Step {
                    t0: self.t,
                    t1,
                    y0: self.y.clone(),
                    y1: ytmp.clone(),
                    f0: self.fy.clone(),
                    f1: k[6].clone(),
                };
                self.t = t1;
                self.y.copy_from_slice(&ytmp);
                self.fy.copy_from_slice(&k[6]);
                if !last || fac < 1.0 {
                    self.h = h * fac;
                }
                return Ok(step);
            }
            self.h = h * fac.min(1.0);
            if self.h <= 1e-14 * (1.0 + self.t.abs()) {
                return Err(Error::StepSizeUnderflow { t: self.t });
            }
        }
    }
}

fn rms(it: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for v in it {
        s += v * v;
        n += 1;
    }
    (s / n.max(1) as f64).sqrt()
}

/// Accepted steps of one integration, with dense output.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<Step>,
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.steps.first().map_or(0.0, |s| s.t0)
    }

    pub fn t_end(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.t1)
    }

    pub fn final_state(&self) -> &[f64] {
        &self.steps.last().expect("trajectory has at least one step").y1
    }

    /// Dense output at `t` (clamped to the integrated span).
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let forward = self.t_end() >= self.t_start();
        let idx = self
            .steps
            .partition_point(|s| if forward { s.t1 < t } else { s.t1 > t })
            .min(self.steps.len() - 1);
        self.steps[idx].interpolate(t)
    }
}

/// Integrate a general system from `t0` to `t1` (either direction).
pub fn integrate_system<F>(f: F, y0: &[f64], t0: f64, t1: f64, cfg: &IntegratorConfig) -> Result<Trajectory>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    cfg.validate()?;
    let span = (t1 - t0).abs();
    if span > cfg.max_time {
        return Err(Error::MaxTimeExceeded { span, max_time: cfg.max_time });
    }
    if span == 0.0 {
        let mut fy = vec![0.0; y0.len()];
        f(t0, y0, &mut fy);
        let step = Step { t0, t1, y0: y0.to_vec(), y1: y0.to_vec(), f0: fy.clone(), f1: fy };
        return Ok(Trajectory { steps: vec![step] });
    }
    let dir = (t1 - t0).signum();
    let mut st = Stepper::new(f, t0, y0, dir, *cfg);
    let mut steps = Vec::new();
    while (t1 - st.time()) * dir > 0.0 {
        steps.push(st.step(t1)?);
    }
    Ok(Trajectory { steps })
}

pub fn fhn_rhs(p: &Params) -> impl Fn(f64, &[f64], &mut [f64]) + '_ {
    move |_, y, dy| {
        let v = vector_field(p, &State::new(y[0], y[1], y[2]));
        dy[0] = v.x;
        dy[1] = v.y;
        dy[2] = v.z;
    }
}

/// Flow plus variational equations: `y[0..3]` is the state, `y[3..12]` the
/// row-major fundamental matrix.
pub fn fhn_variational_rhs(p: &Params) -> impl Fn(f64, &[f64], &mut [f64]) + '_ {
    move |_, y, dy| {
        let s = State::new(y[0], y[1], y[2]);
        let v = vector_field(p, &s);
        dy[0] = v.x;
        dy[1] = v.y;
        dy[2] = v.z;
        let j = jacobian(p, &s);
        for r in 0..3 {
            for c in 0..3 {
                dy[3 + 3 * r + c] = (0..3).map(|k| j[r][k] * y[3 + 3 * k + c]).sum();
            }
        }
    }
}

/// Trajectory of the FitzHugh–Nagumo flow from `s0` over `t_span`.
pub fn integrate(p: &Params, s0: State, t_span: (f64, f64), cfg: &IntegratorConfig) -> Result<Trajectory> {
    integrate_system(fhn_rhs(p), &s0.to_array(), t_span.0, t_span.1, cfg)
}

/// Flow map `φ_T(s0)` together with its Jacobian.
pub fn flow_with_monodromy(p: &Params, s0: State, t: f64, cfg: &IntegratorConfig) -> Result<(State, [[f64; 3]; 3])> {
    let mut y0 = vec![0.0; 12];
    y0[..3].copy_from_slice(&s0.to_array());
    y0[3] = 1.0;
    y0[7] = 1.0;
    y0[11] = 1.0;
    let traj = integrate_system(fhn_variational_rhs(p), &y0, 0.0, t, cfg)?;
    let y = traj.final_state();
    let mut m = [[0.0; 3]; 3];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = y[3 + 3 * r + c];
        }
    }
    Ok((State::new(y[0], y[1], y[2]), m))
}

pub fn flow(p: &Params, s0: State, t: f64, cfg: &IntegratorConfig) -> Result<State> {
    let traj = integrate(p, s0, (0.0, t), cfg)?;
    let y = traj.final_state();
    Ok(State::new(y[0], y[1], y[2]))
}
