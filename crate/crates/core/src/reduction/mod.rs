//! Reduction of a zero-Hopf unfolding to a 2π-periodic system in `(r, w)`.
//!
//! The equilibrium `x_e(ε)` is moved to the origin, coordinates are scaled
//! by ε, the linear change `(X, Y, Z) = P (u, v, w)` brings the linear part to
//! its real Jordan form, and cylindrical coordinates `u = r cos θ`,
//! `v = r sin θ` are taken with θ as the new time:
//!
//! ```text
//! dr/dθ = ε F₁(θ, r, w) + ε² G₁(θ, r, w) + O(ε³)
//! dw/dθ = ε F₂(θ, r, w) + ε² G₂(θ, r, w) + O(ε³)
//! ```
//!
//! `F` and `G` are never transcribed. Every step runs on truncated power
//! series in ε, and the ε¹ and ε² coefficients of `(ṙ/θ̇, ẇ/θ̇)` are read off.

mod families;
mod predict;

pub use families::*;
pub use predict::*;

use crate::averaging::{PeriodicSystem, Sample};
use crate::error::{Error, Result};
use crate::fhn::{vector_field, Params, State};
use crate::quadrature::simpson;
use crate::series::{Dual2, Scalar, Series, ORDER};
use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    T1,
    T2,
    T3,
    T4,
}

impl Theorem {
    pub fn as_str(self) -> &'static str {
        match self {
            Theorem::T1 => "t1",
            Theorem::T2 => "t2",
            Theorem::T3 => "t3",
            Theorem::T4 => "t4",
        }
    }
}

impl std::str::FromStr for Theorem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t1" => Ok(Theorem::T1),
            "t2" => Ok(Theorem::T2),
            "t3" => Ok(Theorem::T3),
            "t4" => Ok(Theorem::T4),
            other => Err(Error::Domain(format!("unknown theorem '{other}'"))),
        }
    }
}

/// Which equilibrium the reduction is centred on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Centre {
    Origin,
    /// `x = ((1 + a) + √((a-1)² - 4/d)) / 2`
    Plus,
    /// `x = ((1 + a) - √((a-1)² - 4/d)) / 2`
    Minus,
}

/// The `(r, w)` system of one unfolding at a fixed ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedSystem {
    pub theorem: Theorem,
    /// ε-coefficients of `a`, `b`, `c`.
    pub a: [f64; ORDER],
    pub b: [f64; ORDER],
    pub c: [f64; ORDER],
    pub d: f64,
    pub centre: Centre,
    pub omega: f64,
    pub p: [[f64; 3]; 3],
    pub p_inv: [[f64; 3]; 3],
    pub eps: f64,
    pub sigma: Option<f64>,
    pub gamma_aux: Option<f64>,
    /// `θ̇` at ε = 0; its sign fixes the direction of θ relative to time.
    pub theta_rate: f64,
    xe: [f64; ORDER],
}

fn poly_eval(c: &[f64; ORDER], eps: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * eps + v)
}

fn centre_sign(centre: Centre) -> f64 {
    match centre {
        Centre::Origin => 0.0,
        Centre::Plus => 1.0,
        Centre::Minus => -1.0,
    }
}

impl ReducedSystem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        theorem: Theorem,
        a: [f64; ORDER],
        b: [f64; ORDER],
        c: [f64; ORDER],
        d: f64,
        centre: Centre,
        omega: f64,
        p: [[f64; 3]; 3],
        eps: f64,
    ) -> Result<Self> {
        let pm = Matrix3::from_fn(|i, j| p[i][j]);
        let inv = pm
            .try_inverse()
            .ok_or_else(|| Error::Domain("change-of-variables matrix is singular".into()))?;
        let p_inv = [[inv[(0, 0)], inv[(0, 1)], inv[(0, 2)]], [inv[(1, 0)], inv[(1, 1)], inv[(1, 2)]], [
            inv[(2, 0)],
            inv[(2, 1)],
            inv[(2, 2)],
        ]];
        let xe = match centre {
            Centre::Origin => [0.0; ORDER],
            _ => {
                if d == 0.0 {
                    return Err(Error::Domain("d = 0: P± are undefined".into()));
                }
                let a_s = Series::<f64>::poly(&a);
                let disc = (a_s + (-1.0)) * (a_s + (-1.0)) + (-4.0 / d);
                if !(disc.c[0] > 0.0) {
                    return Err(Error::Domain(format!(
                        "P± are not distinct at ε = 0 ((a-1)² - 4/d = {})",
                        disc.c[0]
                    )));
                }
                let x = (a_s + 1.0 + disc.sqrt() * centre_sign(centre)) * 0.5;
                x.c
            }
        };
        let mut sys = Self {
            theorem,
            a,
            b,
            c,
            d,
            centre,
            omega,
            p,
            p_inv,
            eps,
            sigma: None,
            gamma_aux: None,
            theta_rate: 0.0,
            xe,
        };
        sys.check_jordan_form()?;
        Ok(sys)
    }

    /// Confirms that at ε = 0 the linear part is a rotation at rate ±ω in
    /// `(u, v)` and vanishes in `w`.
    fn check_jordan_form(&mut self) -> Result<()> {
        let mut rate = None;
        for &(theta, r, w) in &[(0.3, 1.0, 0.0), (2.1, 0.5, 0.7), (4.0, 2.0, -1.3)] {
            let (rd, td, wd) = self.rate_series::<f64>(theta, r, w);
            let scale = 1.0 + r + w.abs();
            if rd.c[0].abs() > 1e-9 * scale || wd.c[0].abs() > 1e-9 * scale {
                return Err(Error::Domain("linear change does not reach the Jordan form".into()));
            }
            match rate {
                None => rate = Some(td.c[0]),
                Some(prev) if (prev - td.c[0]).abs() > 1e-9 * (1.0 + prev.abs()) => {
                    return Err(Error::Domain("angular rate is not constant at ε = 0".into()))
                }
                _ => {}
            }
        }
        let rate = rate.unwrap_or(0.0);
        if (rate.abs() - self.omega).abs() > 1e-8 * (1.0 + self.omega) {
            return Err(Error::Domain(format!("angular rate {rate} does not match ω = {}", self.omega)));
        }
        self.theta_rate = rate;
        Ok(())
    }

    pub fn params_at(&self, eps: f64) -> Params {
        Params::new(poly_eval(&self.a, eps), poly_eval(&self.b, eps), poly_eval(&self.c, eps), self.d)
    }

    pub fn params(&self) -> Params {
        self.params_at(self.eps)
    }

    /// The centre equilibrium at a given ε, evaluated exactly.
    pub fn equilibrium_at(&self, eps: f64) -> State {
        match self.centre {
            Centre::Origin => State::ORIGIN,
            centre => {
                let a = poly_eval(&self.a, eps);
                let root = ((a - 1.0).powi(2) - 4.0 / self.d).max(0.0).sqrt();
                let x = 0.5 * (1.0 + a + centre_sign(centre) * root);
                State::new(x, x / self.d, 0.0)
            }
        }
    }

    pub fn equilibrium(&self) -> State {
        self.equilibrium_at(self.eps)
    }

    /// `x_e(ε) + ε P (r cos θ, r sin θ, w)`.
    pub fn to_state(&self, theta: f64, r: f64, w: f64) -> State {
        let u = [r * theta.cos(), r * theta.sin(), w];
        let x = |i: usize| (0..3).map(|j| self.p[i][j] * u[j]).sum::<f64>();
        self.equilibrium() + State::new(x(0), x(1), x(2)) * self.eps
    }

    /// Inverse of [`Self::to_state`]: `(θ, r, w)` with θ in `(-π, π]`.
    pub fn to_cylindrical(&self, s: &State) -> (f64, f64, f64) {
        let rel = (*s - self.equilibrium()) * (1.0 / self.eps);
        let v = rel.to_array();
        let uvw: Vec<f64> = (0..3).map(|i| (0..3).map(|j| self.p_inv[i][j] * v[j]).sum()).collect();
        (uvw[1].atan2(uvw[0]), uvw[0].hypot(uvw[1]), uvw[2])
    }

    /// `(ṙ, θ̇, ẇ)` of the full system at the stored ε.
    pub fn exact_rates(&self, theta: f64, r: f64, w: f64) -> (f64, f64, f64) {
        let p = self.params();
        let f = vector_field(&p, &self.to_state(theta, r, w)).to_array();
        let ud: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| self.p_inv[i][j] * f[j]).sum::<f64>() / self.eps)
            .collect();
        let (cs, sn) = (theta.cos(), theta.sin());
        (cs * ud[0] + sn * ud[1], (cs * ud[1] - sn * ud[0]) / r, ud[2])
    }

    /// `(dr/dθ, dw/dθ)` at the stored ε, without truncation.
    pub fn exact_field(&self, theta: f64, r: f64, w: f64) -> [f64; 2] {
        let (rd, td, wd) = self.exact_rates(theta, r, w);
        [rd / td, wd / td]
    }

    /// Time for θ to sweep 2π with `(r, w)` frozen.
    pub fn approx_period(&self, r: f64, w: f64) -> f64 {
        if self.eps == 0.0 {
            return 2.0 * PI / self.theta_rate.abs();
        }
        let n = 512;
        let h = 2.0 * PI / n as f64;
        let vals: Vec<f64> = (0..=n)
            .map(|k| 1.0 / self.exact_rates(k as f64 * h, r, w).1.abs())
            .collect();
        simpson(&vals, h)
    }

    /// Initial condition in `(x, y, z)` for a zero `(r*, w*)`, taken at θ = 0.
    pub fn embed(&self, r: f64, w: f64) -> State {
        self.to_state(0.0, r, w)
    }

    /// `+1` when θ advances with time for the given sign of ε.
    pub fn time_orientation(&self, second_order: bool) -> f64 {
        let eps_sign = if second_order { 1.0 } else { self.eps.signum() };
        eps_sign * self.theta_rate.signum()
    }

    /// `(ṙ, θ̇, ẇ)` as series in ε.
    fn rate_series<T: Scalar>(&self, theta: f64, r: T, w: T) -> (Series<T>, Series<T>, Series<T>) {
        let (cs, sn) = (theta.cos(), theta.sin());
        let big: Vec<T> = (0..3)
            .map(|i| r * (self.p[i][0] * cs + self.p[i][1] * sn) + w * self.p[i][2])
            .collect();
        let zero = T::from_f64(0.0);
        let mut x = Series::<T>::poly(&self.xe);
        x.c[1] = x.c[1] + big[0];
        let mut y = Series::<T>::poly(&self.xe.map(|v| v / self.d));
        y.c[1] = y.c[1] + big[1];
        let mut z = Series::<T>::constant(zero);
        z.c[1] = big[2];
        let a = Series::<T>::poly(&self.a);
        let b = Series::<T>::poly(&self.b);
        let c = Series::<T>::poly(&self.c);

        let f = [
            z,
            b * (x - y * self.d),
            x * (x + (-1.0)) * (x - a) + y + c * z,
        ];
        let ud: Vec<Series<T>> = (0..3)
            .map(|i| (f[0] * self.p_inv[i][0] + f[1] * self.p_inv[i][1] + f[2] * self.p_inv[i][2]).shift_down())
            .collect();
        let rd = ud[0] * cs + ud[1] * sn;
        let td = (ud[1] * cs - ud[0] * sn).mul_scalar(T::from_f64(1.0) / r);
        (rd, td, ud[2])
    }

    /// Series of `(dr/dθ, dw/dθ)`; coefficient 1 is `F`, coefficient 2 is `G`.
    pub fn field_series<T: Scalar>(&self, theta: f64, r: T, w: T) -> [Series<T>; 2] {
        let (rd, td, wd) = self.rate_series(theta, r, w);
        let inv = td.recip();
        [rd * inv, wd * inv]
    }

    /// `ε F + ε² G` at the stored ε.
    pub fn truncated_field(&self, theta: f64, r: f64, w: f64) -> [f64; 2] {
        let h = self.field_series::<f64>(theta, r, w);
        let e = self.eps;
        [e * h[0].c[1] + e * e * h[0].c[2], e * h[1].c[1] + e * e * h[1].c[2]]
    }
}

impl PeriodicSystem for ReducedSystem {
    fn dim(&self) -> usize {
        2
    }

    fn period(&self) -> f64 {
        2.0 * PI
    }

    fn first_order(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let h = self.field_series::<f64>(t, x[0], x[1]);
        vec![h[0].c[1], h[1].c[1]]
    }

    fn second_order(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let h = self.field_series::<f64>(t, x[0], x[1]);
        vec![h[0].c[2], h[1].c[2]]
    }

    fn first_order_jacobian(&self, t: f64, x: &[f64]) -> Option<DMatrix<f64>> {
        Some(self.sample(t, x).df)
    }

    fn sample(&self, t: f64, x: &[f64]) -> Sample {
        let h = self.field_series(t, Dual2::variable(x[0], 0), Dual2::variable(x[1], 1));
        let f1 = h[0].c[1];
        let f2 = h[1].c[1];
        Sample {
            f: vec![f1.v, f2.v],
            g: vec![h[0].c[2].v, h[1].c[2].v],
            df: DMatrix::from_row_slice(2, 2, &[f1.d[0], f1.d[1], f2.d[0], f2.d[1]]),
        }
    }
}

#[cfg(test)]
mod tests;
