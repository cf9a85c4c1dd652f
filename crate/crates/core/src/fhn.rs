//! The FitzHugh–Nagumo travelling-wave system
//!
//! ```text
//! x' = z
//! y' = b (x - d y)
//! z' = x (x - 1)(x - a) + y + c z
//! ```
//!
//! together with its equilibria, characteristic polynomials and the
//! zero-Hopf families at the origin and at `P±`.
//!
//! When `b = 0` the equilibrium set is the whole curve `x(x-1)(x-a) + y = 0`;
//! only the distinguished points (origin, `P±`, coincident point) are reported.

use crate::cubic::{eigenvalues_cubic, CubicCoeffs};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default absolute tolerance on the defining equalities of a zero-Hopf family.
pub const DEFAULT_FAMILY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Params {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// `d (a - 1)² - 4`; `P±` exist iff `d > 0` and this is positive.
    pub fn discriminant(&self) -> f64 {
        self.d * (self.a - 1.0).powi(2) - 4.0
    }

    /// Tolerance under which the discriminant counts as zero.
    pub fn discriminant_tol(&self) -> f64 {
        1e-9 * (1.0 + (self.d * (self.a - 1.0).powi(2)).abs())
    }

    /// Divergence of the vector field (constant in phase space).
    pub fn divergence(&self) -> f64 {
        self.c - self.b * self.d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl State {
    pub const ORIGIN: State = State { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(&self, other: &State) -> f64 {
        (*self - *other).norm()
    }

    pub fn dot(&self, other: &State) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }
}

impl std::ops::Add for State {
    type Output = State;
    fn add(self, o: State) -> State {
        State::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for State {
    type Output = State;
    fn sub(self, o: State) -> State {
        State::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Mul<f64> for State {
    type Output = State;
    fn mul(self, k: f64) -> State {
        State::new(self.x * k, self.y * k, self.z * k)
    }
}

pub fn vector_field(p: &Params, s: &State) -> State {
    State::new(
        s.z,
        p.b * (s.x - p.d * s.y),
        s.x * (s.x - 1.0) * (s.x - p.a) + s.y + p.c * s.z,
    )
}

/// Jacobian of [`vector_field`], row-major.
pub fn jacobian(p: &Params, s: &State) -> [[f64; 3]; 3] {
    [
        [0.0, 0.0, 1.0],
        [p.b, -p.b * p.d, 0.0],
        [cubic_slope(p.a, s.x), 1.0, p.c],
    ]
}

/// Derivative of `x (x - 1)(x - a)`.
fn cubic_slope(a: f64, x: f64) -> f64 {
    3.0 * x * x - 2.0 * (1.0 + a) * x + a
}

/// Characteristic polynomial of the linearisation at an arbitrary point.
pub fn char_poly_at(p: &Params, s: &State) -> CubicCoeffs {
    let g = cubic_slope(p.a, s.x);
    CubicCoeffs::monic(
        -(p.c - p.b * p.d),
        -(g + p.b * p.c * p.d),
        -p.b * (1.0 + p.d * g),
    )
}

pub fn char_poly_origin(p: &Params) -> CubicCoeffs {
    CubicCoeffs::monic(
        -(p.c - p.b * p.d),
        -(p.a + p.b * p.c * p.d),
        -p.b * (1.0 + p.a * p.d),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// `(a-1)² d ± (a+1) √(d[(a-1)² d - 4])`, the quantity shared by `p±`.
fn pm_core(p: &Params, branch: Branch) -> f64 {
    let dd = p.d * (p.a - 1.0).powi(2);
    let root = (p.d * (dd - 4.0)).max(0.0).sqrt();
    dd + branch.sign() * (p.a + 1.0) * root
}

/// Characteristic polynomial at `P±`.
pub fn char_poly_pm(p: &Params, branch: Branch) -> Result<CubicCoeffs> {
    let disc = p.discriminant();
    if !(p.d > 0.0) || disc < -p.discriminant_tol() {
        return Err(Error::Domain(format!(
            "P± do not exist: d = {}, d(a-1)^2 - 4 = {disc}",
            p.d
        )));
    }
    let core = pm_core(p, branch);
    Ok(CubicCoeffs::monic(
        -(p.c - p.b * p.d),
        -(core + 2.0 * p.b * p.c * p.d * p.d - 6.0) / (2.0 * p.d),
        -p.b / 2.0 * (core - 4.0),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquilibriumKind {
    Origin,
    PPlus,
    PMinus,
    Coincident,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub location: State,
    pub kind: EquilibriumKind,
    pub eigenvalues: [Complex64; 3],
    pub discriminant: f64,
}

/// Location of `P±`, or the coincident point when the square root is (numerically) zero.
pub fn pm_location(p: &Params, branch: Branch) -> State {
    let root = ((p.a - 1.0).powi(2) - 4.0 / p.d).max(0.0).sqrt();
    let x = (1.0 + p.a) / 2.0 + branch.sign() * root / 2.0;
    State::new(x, x / p.d, 0.0)
}

pub fn equilibria(p: &Params) -> Vec<Equilibrium> {
    let disc = p.discriminant();
    let make = |location: State, kind| Equilibrium {
        location,
        kind,
        eigenvalues: eigenvalues_cubic(&char_poly_at(p, &location)),
        discriminant: disc,
    };
    let mut out = vec![make(State::ORIGIN, EquilibriumKind::Origin)];
    if p.d > 0.0 {
        if disc.abs() <= p.discriminant_tol() {
            let x = (1.0 + p.a) / 2.0;
            out.push(make(State::new(x, x / p.d, 0.0), EquilibriumKind::Coincident));
        } else if disc > 0.0 {
            out.push(make(pm_location(p, Branch::Plus), EquilibriumKind::PPlus));
            out.push(make(pm_location(p, Branch::Minus), EquilibriumKind::PMinus));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyTag {
    OriginI,
    OriginII,
    PPlusI,
    PPlusII,
    PPlusIII,
    PMinusI,
    PMinusII,
    PMinusIII,
    CoincidentI,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 9] = [
        FamilyTag::OriginI,
        FamilyTag::OriginII,
        FamilyTag::PPlusI,
        FamilyTag::PPlusII,
        FamilyTag::PPlusIII,
        FamilyTag::PMinusI,
        FamilyTag::PMinusII,
        FamilyTag::PMinusIII,
        FamilyTag::CoincidentI,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Defect {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroHopfFamily {
    pub tag: FamilyTag,
    pub equilibrium: EquilibriumKind,
    pub location: State,
    pub omega: f64,
    pub residuals: Vec<Defect>,
}

fn defect(name: &str, value: f64) -> Defect {
    Defect { name: name.to_string(), value }
}

/// All zero-Hopf families matched by `p`.
///
/// Equalities are tested as `|defect| <= tol`, strict inequalities strictly.
/// Items (ii)/(iii) at `P±` force `d(a-1)² = 4`, so they are matched on the
/// coincident point, where `P+ = P-`.
pub fn classify_zero_hopf(p: &Params, tol: f64) -> Vec<ZeroHopfFamily> {
    let mut out = Vec::new();
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    let within = |v: f64| v.abs() <= tol;

    // origin (i): ad + 1 = 0, bd - c = 0, d(1 - b²d³) > 0
    let ad1 = a * d + 1.0;
    let bdc = b * d - c;
    if within(ad1) && within(bdc) && d * (1.0 - b * b * d.powi(3)) > 0.0 {
        let w2 = -(a + b * c * d);
        if w2 > 0.0 {
            out.push(ZeroHopfFamily {
                tag: FamilyTag::OriginI,
                equilibrium: EquilibriumKind::Origin,
                location: State::ORIGIN,
                omega: w2.sqrt(),
                residuals: vec![defect("a*d+1", ad1), defect("b*d-c", bdc)],
            });
        }
    }

    // origin (ii): b = c = 0, a < 0
    if within(b) && within(c) && a < 0.0 {
        out.push(ZeroHopfFamily {
            tag: FamilyTag::OriginII,
            equilibrium: EquilibriumKind::Origin,
            location: State::ORIGIN,
            omega: (-a).sqrt(),
            residuals: vec![defect("b", b), defect("c", c)],
        });
    }

    if !(d > 0.0) {
        return out;
    }
    let disc = p.discriminant();
    let coincident = disc.abs() <= p.discriminant_tol();

    // P± (i): b = c = 0 and core± - 6 < 0
    if disc > 0.0 && !coincident && within(b) && within(c) {
        for (branch, tag, kind) in [
            (Branch::Plus, FamilyTag::PPlusI, EquilibriumKind::PPlus),
            (Branch::Minus, FamilyTag::PMinusI, EquilibriumKind::PMinus),
        ] {
            let bracket = pm_core(p, branch) - 6.0;
            if bracket < 0.0 {
                let w2 = -(bracket + 2.0 * b * c * d * d) / (2.0 * d);
                if w2 > 0.0 {
                    out.push(ZeroHopfFamily {
                        tag,
                        equilibrium: kind,
                        location: pm_location(p, branch),
                        omega: w2.sqrt(),
                        residuals: vec![defect("b", b), defect("c", c)],
                    });
                }
            }
        }
    }

    // coincident-point families: bd - c = 0 and 1 - b²d³ > 0
    if within(bdc) && 1.0 - b * b * d.powi(3) > 0.0 {
        let w2 = (1.0 - b * c * d * d) / d;
        if w2 > 0.0 {
            let x = (1.0 + a) / 2.0;
            let location = State::new(x, x / d, 0.0);
            let omega = w2.sqrt();
            let root_d = d.sqrt();
            let minus_root = a - 1.0 + 2.0 / root_d;
            let plus_root = a - 1.0 - 2.0 / root_d;
            let mut push = |tag, extra: Defect| {
                out.push(ZeroHopfFamily {
                    tag,
                    equilibrium: EquilibriumKind::Coincident,
                    location,
                    omega,
                    residuals: vec![extra, defect("b*d-c", bdc)],
                });
            };
            if within(minus_root) {
                push(FamilyTag::PPlusII, defect("a-1+2/sqrt(d)", minus_root));
                push(FamilyTag::PMinusII, defect("a-1+2/sqrt(d)", minus_root));
            }
            if within(plus_root) {
                push(FamilyTag::PPlusIII, defect("a-1-2/sqrt(d)", plus_root));
                push(FamilyTag::PMinusIII, defect("a-1-2/sqrt(d)", plus_root));
            }
            if coincident {
                push(FamilyTag::CoincidentI, defect("d(a-1)^2-4", disc));
            }
        }
    }
    out
}

/// Largest distance from the eigenvalues at `location` to the set `{0, +iω, -iω}`.
pub fn zero_hopf_eigen_defect(p: &Params, location: &State, omega: f64) -> f64 {
    let targets = [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, omega),
        Complex64::new(0.0, -omega),
    ];
    let ev = eigenvalues_cubic(&char_poly_at(p, location));
    ev.iter()
        .map(|l| targets.iter().map(|t| (l - t).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}
