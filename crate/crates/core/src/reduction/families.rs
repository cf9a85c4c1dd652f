//! The three unfoldings and the printed closed forms used as cross-checks.

use super::{Centre, Condition, ReducedSystem, Theorem};
use crate::error::{Error, Result};
use crate::fhn::Branch;
use crate::series::ORDER;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Unfolding of the origin along family (i):
/// `(a, b, c) = (-1/d + εα, β₀ + εβ₁, β₀d + εγ)` with `β₀ = √(1/d - ω²)/d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationT1 {
    pub d: f64,
    pub omega: f64,
    pub alpha: f64,
    pub beta1: f64,
    pub gamma: f64,
    pub eps: f64,
}

impl PerturbationT1 {
    /// `√(1/d - ω²)`
    pub fn s(&self) -> f64 {
        (1.0 / self.d - self.omega * self.omega).sqrt()
    }

    pub fn beta0(&self) -> f64 {
        self.s() / self.d
    }

    pub fn validate(&self) -> Result<()> {
        let PerturbationT1 { d, omega, .. } = *self;
        if d == 0.0 || d == 1.0 {
            return Err(Error::Domain(format!("d must differ from 0 and 1 (d = {d})")));
        }
        if !(omega > 0.0) {
            return Err(Error::Domain(format!("ω must be positive (ω = {omega})")));
        }
        let gap = 1.0 / d - omega * omega;
        if !(gap > 0.0) {
            return Err(Error::Domain(format!("1/d - ω² must be positive (got {gap})")));
        }
        Ok(())
    }

    /// The domain requirements as a table, whether or not they hold.
    pub fn domain_conditions(&self) -> Vec<Condition> {
        let gap = 1.0 / self.d - self.omega * self.omega;
        vec![
            Condition::new("d_not_zero_or_one", self.d, self.d != 0.0 && self.d != 1.0),
            Condition::new("omega_positive", self.omega, self.omega > 0.0),
            Condition::new("one_over_d_minus_omega_sq", gap, gap > 0.0),
        ]
    }

    pub fn build(&self) -> Result<ReducedSystem> {
        self.validate()?;
        let PerturbationT1 { d, omega: w, .. } = *self;
        let s = self.s();
        let b0 = self.beta0();
        let w2 = w * w;
        let p = [
            [-1.0 / w2, 0.0, s / w2],
            [1.0 - 1.0 / (d * w2), -s / w, s / (d * w2)],
            [0.0, 1.0 / w, 0.0],
        ];
        let mut sys = ReducedSystem::new(
            Theorem::T1,
            coeffs(&[-1.0 / d, self.alpha]),
            coeffs(&[b0, self.beta1]),
            coeffs(&[b0 * d, self.gamma]),
            d,
            Centre::Origin,
            w,
            p,
            self.eps,
        )?;
        sys.gamma_aux = Some(self.gamma_aux());
        Ok(sys)
    }

    /// `Γ = [γ²ω⁴ + α²(ω² - 1/d)] / (ω² - 1/d)`
    pub fn gamma_aux(&self) -> f64 {
        let w2 = self.omega * self.omega;
        let gap = w2 - 1.0 / self.d;
        (self.gamma * self.gamma * w2 * w2 + self.alpha * self.alpha * gap) / gap
    }

    /// `β₀² d⁴ α² - (1 - β₀² d³)² γ²`, the positivity condition as stated for the theorem.
    pub fn statement_condition(&self) -> f64 {
        let b0 = self.beta0();
        let d = self.d;
        b0 * b0 * d.powi(4) * self.alpha * self.alpha - (1.0 - b0 * b0 * d.powi(3)).powi(2) * self.gamma * self.gamma
    }

    /// The printed first-order averages `(f₁, f₂)`.
    pub fn averaged_f(&self, r0: f64, w0: f64) -> Result<(f64, f64)> {
        self.validate()?;
        let (d, w, al, ga) = (self.d, self.omega, self.alpha, self.gamma);
        let s = self.s();
        let w2 = w * w;
        let k = 1.0 / (2.0 * d * d * w.powi(5));
        let f1 = r0 * k * (d * d * (ga * w2 * w2 - al * w2 * s) + 2.0 * w0 * (d - 1.0) * (1.0 - d * w2));
        let f2 = k
            * (d * d * (2.0 * w2 * (al * s + w0) * w0 - r0 * r0)
                + d * (r0 * r0 - 2.0 * (w2 + 1.0) * w0 * w0)
                + 2.0 * w0 * w0);
        Ok((f1, f2))
    }

    /// The printed zero `(r*, w*)`, with `r*` made positive by the branch sign
    /// of `d(1 - d)`. `None` when `Γ <= 0`.
    pub fn closed_form_zero(&self) -> Option<(f64, f64)> {
        let g = self.gamma_aux();
        if self.validate().is_err() || !(g > 0.0) {
            return None;
        }
        let (d, w) = (self.d, self.omega);
        let w2 = w * w;
        let r = (d * w2 / (1.0 - d)).abs() * g.sqrt();
        let wstar = d * d * w2 * (self.gamma * w2 - self.alpha * self.s()) / (2.0 * (d - 1.0) * (d * w2 - 1.0));
        Some((r, wstar))
    }

    /// Printed Jacobian determinant at the zero, `(d/ω⁶)(1/d - ω²) Γ`.
    pub fn jac_det_closed_form(&self) -> f64 {
        let w2 = self.omega * self.omega;
        self.d / w2.powi(3) * (1.0 / self.d - w2) * self.gamma_aux()
    }
}

/// Unfolding of the origin along family (ii):
/// `(a, b, c) = (-ω² + εα₁ + ε²α₂, εβ₁ + ε²β₂, εγ₁ + ε²γ₂)`, `d = 1/ω²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationT2 {
    pub omega: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub eps: f64,
}

impl PerturbationT2 {
    /// The second-order regime: `β₁ = γ₁ω²`.
    pub fn new(omega: f64, alpha1: f64, alpha2: f64, beta2: f64, gamma1: f64, gamma2: f64, eps: f64) -> Self {
        Self { omega, alpha1, alpha2, beta1: gamma1 * omega * omega, beta2, gamma1, gamma2, eps }
    }

    pub fn d(&self) -> f64 {
        1.0 / (self.omega * self.omega)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) {
            return Err(Error::Domain(format!("ω must be positive (ω = {})", self.omega)));
        }
        Ok(())
    }

    pub fn domain_conditions(&self) -> Vec<Condition> {
        vec![
            Condition::new("omega_positive", self.omega, self.omega > 0.0),
            Condition::new("omega_not_one", self.omega, self.omega != 1.0),
            Condition::new("gamma1_nonzero", self.gamma1, self.gamma1 != 0.0),
        ]
    }

    /// `γ₁ ≠ 0` and `ω ≠ 1`, needed to solve `g = 0`.
    pub fn check_nondegenerate(&self) -> Result<()> {
        if self.gamma1 == 0.0 {
            return Err(Error::DegenerateFamily("γ₁ = 0: the second-order average is degenerate".into()));
        }
        if self.omega == 1.0 {
            return Err(Error::DegenerateFamily("ω = 1: the second-order average is degenerate".into()));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<ReducedSystem> {
        self.validate()?;
        let w = self.omega;
        let p = [[0.0, 1.0 / w, 1.0 / (w * w)], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]];
        ReducedSystem::new(
            Theorem::T2,
            coeffs(&[-w * w, self.alpha1, self.alpha2]),
            coeffs(&[0.0, self.beta1, self.beta2]),
            coeffs(&[0.0, self.gamma1, self.gamma2]),
            self.d(),
            Centre::Origin,
            w,
            p,
            self.eps,
        )
    }

    /// `α₁²γ₁² - (γ₂ω² - β₂)²`
    pub fn discriminant(&self) -> f64 {
        let w2 = self.omega * self.omega;
        (self.alpha1 * self.gamma1).powi(2) - (self.gamma2 * w2 - self.beta2).powi(2)
    }

    /// The discriminant read with `β₂²` in place of `β₂`.
    pub fn discriminant_squared_reading(&self) -> f64 {
        let w2 = self.omega * self.omega;
        (self.alpha1 * self.gamma1).powi(2) - (self.gamma2 * w2 - self.beta2 * self.beta2).powi(2)
    }

    /// The printed second-order averages `(g₁, g₂)`.
    pub fn averaged_g(&self, r0: f64, w0: f64) -> Result<(f64, f64)> {
        self.validate()?;
        let (w, a1, g1, b2, g2) = (self.omega, self.alpha1, self.gamma1, self.beta2, self.gamma2);
        let w2 = w * w;
        let k = 1.0 / (2.0 * w.powi(5));
        let v1 = r0 * k * (g2 * w2 * w2 - w2 * (b2 + g1 * (a1 + 2.0 * w0)) + 2.0 * g1 * w0);
        let v2 = g1 * k * (r0 * r0 * w2 * (w2 - 1.0) + 2.0 * w0 * w0 * (w2 - 1.0) + 2.0 * a1 * w2 * w0);
        Ok((v1, v2))
    }

    /// The printed zero, read with `(γ₂ω² - β₂)`. `None` when the discriminant
    /// is not positive or the family is degenerate.
    pub fn closed_form_zero(&self) -> Option<(f64, f64)> {
        let disc = self.discriminant();
        if self.validate().is_err() || self.check_nondegenerate().is_err() || !(disc > 0.0) {
            return None;
        }
        let (w, g1) = (self.omega, self.gamma1);
        let w2 = w * w;
        let r = w / (2f64.sqrt() * g1.abs() * (w2 - 1.0).abs()) * disc.sqrt();
        let wstar = -w2 * (self.alpha1 * g1 + self.beta2 - self.gamma2 * w2) / (2.0 * g1 * (w2 - 1.0));
        Some((r, wstar))
    }

    /// Printed Jacobian determinant at the zero, `disc / ω⁶`.
    pub fn jac_det_closed_form(&self) -> f64 {
        self.discriminant() / self.omega.powi(6)
    }

    /// Determinant obtained by differentiating the printed `(g₁, g₂)`
    /// directly: `disc / (2ω⁶)`.
    pub fn jac_det_rederived(&self) -> f64 {
        self.discriminant() / (2.0 * self.omega.powi(6))
    }
}

/// Unfolding at `P±` with `(a, b, c) = (α₀ + εα₁ + ε²α₂, εβ₁ + ε²β₂, εγ₁ + ε²γ₂)`.
///
/// `sign` selects the theorem: `Plus` for `α₀ ∈ (-1, (√5-3)/2)`, `Minus` for
/// `α₀ ∈ (-(√5+3)/2, -1)`. The reduction is centred on the member of `P±`
/// that merges with the origin at ε = 0, which is where the first-order
/// average vanishes under `d = -1/α₀`, `γ₁ = -β₁/α₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationT34 {
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub d: f64,
    pub eps: f64,
    pub sign: Branch,
}

impl PerturbationT34 {
    /// Parameters on the branch `d = -1/α₀`, `γ₁ = -β₁/α₀`.
    #[allow(clippy::too_many_arguments)]
    pub fn sol1(alpha0: f64, alpha1: f64, alpha2: f64, beta1: f64, beta2: f64, gamma2: f64, eps: f64, sign: Branch) -> Self {
        Self { alpha0, alpha1, alpha2, beta1, beta2, gamma1: -beta1 / alpha0, gamma2, d: -1.0 / alpha0, eps, sign }
    }

    pub fn theorem(&self) -> Theorem {
        match self.sign {
            Branch::Plus => Theorem::T3,
            Branch::Minus => Theorem::T4,
        }
    }

    /// Admissible `α₀` interval for the chosen sign.
    pub fn interval(&self) -> (f64, f64) {
        let r5 = 5f64.sqrt();
        match self.sign {
            Branch::Plus => (-1.0, (r5 - 3.0) / 2.0),
            Branch::Minus => (-(r5 + 3.0) / 2.0, -1.0),
        }
    }

    /// `2α₀² + 6α₀ + 1`, required negative.
    pub fn quadratic_condition(&self) -> f64 {
        2.0 * self.alpha0 * self.alpha0 + 6.0 * self.alpha0 + 1.0
    }

    /// `d (α₀ - 1)² - 4`; zero on the singular branch `d = 4/(α₀ - 1)²`.
    pub fn sol2_defect(&self) -> f64 {
        self.d * (self.alpha0 - 1.0).powi(2) - 4.0
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.interval();
        let a0 = self.alpha0;
        if !(a0 > lo && a0 < hi) {
            return Err(Error::Domain(format!("α₀ = {a0} outside ({lo}, {hi})")));
        }
        let q = self.quadratic_condition();
        if !(q < 0.0) {
            return Err(Error::Domain(format!("2α₀² + 6α₀ + 1 = {q} is not negative")));
        }
        if self.sol2_defect().abs() <= 1e-12 * (1.0 + self.d.abs()) {
            return Err(Error::Domain(
                "d = 4/(α₀-1)² makes P± coincide at ε = 0 and the change of variables singular".into(),
            ));
        }
        if !(self.d > 0.0) || self.sol2_defect() < 0.0 {
            return Err(Error::Domain(format!("P± do not exist at ε = 0 (d = {})", self.d)));
        }
        Ok(())
    }

    pub fn domain_conditions(&self) -> Vec<Condition> {
        let (lo, hi) = self.interval();
        let a0 = self.alpha0;
        let q = self.quadratic_condition();
        let sol2 = self.sol2_defect();
        vec![
            Condition::new("alpha0_in_interval", a0, a0 > lo && a0 < hi),
            Condition::new("quadratic_alpha0", q, q < 0.0),
            Condition::new("d_positive", self.d, self.d > 0.0),
            Condition::new("pm_distinct_at_eps0", sol2, sol2 > 1e-12 * (1.0 + self.d.abs())),
        ]
    }

    /// `σ` as printed: `6 - d(α₀-1)² - (α₀+1)√(d[d(α₀-1)² - 4])`.
    pub fn sigma_printed(&self) -> f64 {
        let d = self.d;
        let a0 = self.alpha0;
        6.0 - d * (a0 - 1.0).powi(2) - (a0 + 1.0) * (d * (d * (a0 - 1.0).powi(2) - 4.0)).max(0.0).sqrt()
    }

    /// Member of `P±` (principal square root) closest to the origin at ε = 0.
    pub fn centre(&self) -> Centre {
        let root = ((self.alpha0 - 1.0).powi(2) - 4.0 / self.d).max(0.0).sqrt();
        let plus = 0.5 * (1.0 + self.alpha0 + root);
        let minus = 0.5 * (1.0 + self.alpha0 - root);
        if plus.abs() < minus.abs() {
            Centre::Plus
        } else {
            Centre::Minus
        }
    }

    pub fn build(&self) -> Result<ReducedSystem> {
        self.validate()?;
        let centre = self.centre();
        let root = ((self.alpha0 - 1.0).powi(2) - 4.0 / self.d).sqrt();
        let sgn = if centre == Centre::Plus { 1.0 } else { -1.0 };
        let x0 = 0.5 * (1.0 + self.alpha0 + sgn * root);
        // at ε = 0, b = c = 0 and the characteristic polynomial is λ³ - g'(x₀) λ
        let gp = 3.0 * x0 * x0 - 2.0 * (1.0 + self.alpha0) * x0 + self.alpha0;
        let w2 = -gp;
        if !(w2 > 0.0) {
            return Err(Error::Domain(format!("no purely imaginary pair at the centre (ω² = {w2})")));
        }
        let sigma = 2.0 * self.d * w2;
        let p = [
            [0.0, 1.0, 2.0 * self.d / sigma],
            [0.0, 0.0, 1.0],
            [(sigma / (2.0 * self.d)).sqrt(), 0.0, 0.0],
        ];
        let mut sys = ReducedSystem::new(
            self.theorem(),
            coeffs(&[self.alpha0, self.alpha1, self.alpha2]),
            coeffs(&[0.0, self.beta1, self.beta2]),
            coeffs(&[0.0, self.gamma1, self.gamma2]),
            self.d,
            centre,
            w2.sqrt(),
            p,
            self.eps,
        )?;
        sys.sigma = Some(sigma);
        Ok(sys)
    }

    /// The printed `r*(w)` (with the garbled `6 0β₂` read as `60β₂`).
    /// `None` where it is not real.
    pub fn printed_r_star(&self, w: f64) -> Option<f64> {
        let (a0, a1, b1, b2, g2) = (self.alpha0, self.alpha1, self.beta1, self.beta2, self.gamma2);
        let q = -a0 * a0 - 3.0 * a0 - 1.0;
        if q < 0.0 {
            return None;
        }
        let s = q.sqrt();
        let inner = 2.0 * a0.powi(8) * g2
            + 18.0 * a0.powi(7) * g2
            + 2.0 * a0.powi(6) * (a1 * b2 + b2 + 30.0 * g2)
            + a0.powi(5) * (5.0 * a1 * b1 + 12.0 * b2 + 90.0 * g2)
            + a0 * a0 * (2.0 * (-3.0 * PI * b1 * b1 * s + b2 + g2) - a1 * b1)
            - a0 * b1 * (4.0 * PI * b1 * s + a1)
            - PI * s * b1 * b1
            + a0.powi(4) * (-PI * b1 * b1 * s + a1 * b1 + 22.0 * b2 + 60.0 * g2)
            + 2.0 * a0.powi(3) * (-2.0 * PI * b1 * b1 * s + 2.0 * a1 * b1 + 60.0 * b2 + 9.0 * g2)
            - 8.0 * (a0.powi(3) + 2.0 * a0 * a0 + 2.0 * a0 + 1.0) * a0 * b1 * w;
        let den = s * inner;
        let r = 6.0 * (a0 + 1.0).powi(4) * b1 * b1 * w / den;
        r.is_finite().then_some(r)
    }
}

fn coeffs(v: &[f64]) -> [f64; ORDER] {
    let mut c = [0.0; ORDER];
    c[..v.len()].copy_from_slice(v);
    c
}
