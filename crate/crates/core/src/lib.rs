//! Zero-Hopf bifurcations of the FitzHugh–Nagumo system
//!
//! ```text
//! x' = z
//! y' = b (x - d y)
//! z' = x (x - 1)(x - a) + y + c z
//! ```
//!
//! [`fhn`] classifies equilibria, [`averaging`] implements first- and
//! second-order averaging for periodic systems, [`reduction`] turns each
//! zero-Hopf unfolding into such a system and predicts the periodic orbits,
//! and [`orbit`] checks the predictions by shooting on the full flow.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod averaging;
pub mod cubic;
pub mod error;
pub mod fhn;
pub mod newton;
pub mod ode;
pub mod orbit;
pub mod quadrature;
pub mod reduction;
pub mod series;

pub use averaging::{AveragedZero, Order, PeriodicSystem, Stability};
pub use error::{Error, Result};
pub use fhn::{Equilibrium, EquilibriumKind, FamilyTag, Params, State, ZeroHopfFamily};
pub use orbit::PeriodicOrbit;
pub use reduction::{OrbitPrediction, PredictionSet, Theorem};
