//! Roots of monic real cubics.
//!
//! Cardano's formula (trigonometric form when all three roots are real) is
//! the primary path. Every result is cross-checked against the eigenvalues of
//! the companion matrix and the companion result wins when the two disagree
//! by more than [`FALLBACK_DISCREPANCY`].

use nalgebra::{Matrix3, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Disagreement between Cardano and the companion matrix that triggers the fallback.
pub const FALLBACK_DISCREPANCY: f64 = 1e-7;

/// Coefficients of `c3 λ³ + c2 λ² + c1 λ + c0` with `c3 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicCoeffs {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl CubicCoeffs {
    pub fn monic(c2: f64, c1: f64, c0: f64) -> Self {
        Self { c3: 1.0, c2, c1, c0 }
    }

    pub fn eval(&self, lambda: Complex64) -> Complex64 {
        ((lambda * self.c3 + self.c2) * lambda + self.c1) * lambda + self.c0
    }

    fn derivative(&self, lambda: Complex64) -> Complex64 {
        (lambda * (3.0 * self.c3) + 2.0 * self.c2) * lambda + self.c1
    }

    pub fn max_coeff_magnitude(&self) -> f64 {
        [self.c3, self.c2, self.c1, self.c0]
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn companion(&self) -> Matrix3<f64> {
        Matrix3::new(
            -self.c2, -self.c1, -self.c0, //
            1.0, 0.0, 0.0, //
            0.0, 1.0, 0.0,
        )
    }
}

/// Lexicographic (Re, Im) ordering.
pub fn sort_roots(roots: &mut [Complex64]) {
    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// Roots of a monic cubic, sorted by (Re, Im).
pub fn eigenvalues_cubic(c: &CubicCoeffs) -> [Complex64; 3] {
    debug_assert!(c.c3 == 1.0, "cubic must be monic");
    let mut cardano = cardano_roots(c);
    for r in cardano.iter_mut() {
        *r = polish(c, *r);
    }
    sort_roots(&mut cardano);

    let mut companion = companion_roots(c);
    sort_roots(&mut companion);

    if max_matching_distance(&cardano, &companion) > FALLBACK_DISCREPANCY * (1.0 + c.max_coeff_magnitude()) {
        companion
    } else {
        cardano
    }
}

/// Eigenvalues of a 3x3 matrix by a bounded real Schur iteration.
pub fn matrix_eigenvalues(m: &Matrix3<f64>) -> Option<[Complex64; 3]> {
    let ev = Schur::try_new(*m, f64::EPSILON, 1000)?.complex_eigenvalues();
    Some([ev[0], ev[1], ev[2]])
}

/// Eigenvalues of the companion matrix, unsorted. Falls back to polished
/// Cardano roots when the Schur iteration does not converge.
pub fn companion_roots(c: &CubicCoeffs) -> [Complex64; 3] {
    matrix_eigenvalues(&c.companion()).unwrap_or_else(|| cardano_roots(c).map(|r| polish(c, r)))
}

fn cardano_roots(c: &CubicCoeffs) -> [Complex64; 3] {
    let (a2, a1, a0) = (c.c2 / c.c3, c.c1 / c.c3, c.c0 / c.c3);
    // λ = t - a2/3 gives t³ + p t + q = 0
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    let disc = q * q / 4.0 + p * p * p / 27.0;

    if p == 0.0 && q == 0.0 {
        let t = Complex64::new(-shift, 0.0);
        return [t, t, t];
    }

    if disc > 0.0 {
        let sq = disc.sqrt();
        let u = (-q / 2.0 + sq).cbrt();
        let v = (-q / 2.0 - sq).cbrt();
        let re = -(u + v) / 2.0 - shift;
        let im = 3f64.sqrt() * (u - v) / 2.0;
        [
            Complex64::new(u + v - shift, 0.0),
            Complex64::new(re, im),
            Complex64::new(re, -im),
        ]
    } else {
        // three real roots (p < 0 here)
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (k, root) in out.iter_mut().enumerate() {
            *root = Complex64::new(m * (phi - 2.0 * PI * k as f64 / 3.0).cos() - shift, 0.0);
        }
        out
    }
}

fn polish(c: &CubicCoeffs, mut lambda: Complex64) -> Complex64 {
    for _ in 0..3 {
        let d = c.derivative(lambda);
        if d.norm() < 1e-14 {
            break;
        }
        let step = c.eval(lambda) / d;
        let next = lambda - step;
        if c.eval(next).norm() >= c.eval(lambda).norm() {
            break;
        }
        lambda = next;
    }
    // real-coefficient cubics: keep real roots real
    if lambda.im.abs() < 1e-14 * (1.0 + lambda.re.abs()) {
        lambda.im = 0.0;
    }
    lambda
}

/// Largest distance under the best one-to-one matching of two sorted root triples.
fn max_matching_distance(a: &[Complex64; 3], b: &[Complex64; 3]) -> f64 {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS
        .iter()
        .map(|p| (0..3).map(|i| (a[i] - b[p[i]]).norm()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}
