use crate::config::Settings;
use crate::Failure;
use clap::Args;
use fhn_zerohopf::error::Error;
use fhn_zerohopf::fhn::{classify_zero_hopf, equilibria, Branch, Equilibrium, Params, State, ZeroHopfFamily};
use fhn_zerohopf::orbit::{refine_periodic, verify_prediction, PeriodicOrbit, ShootingOptions};
use fhn_zerohopf::reduction::{
    predict_orbits_t1, predict_orbits_t2, predict_orbits_t34, Condition, OrbitPrediction, PerturbationT1,
    PerturbationT2, PerturbationT34, PredictOptions, PredictionSet, Theorem,
};
use fhn_zerohopf::Stability;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub c: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub d: f64,
}

impl ParamArgs {
    pub fn params(&self) -> Params {
        Params::new(self.a, self.b, self.c, self.d)
    }
}

/// Unfolding parameters; which ones are required depends on the theorem.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct FamilyArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub d: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
}

/// `(required, optional)` flag names per theorem.
pub fn family_flags(t: Theorem) -> (&'static [&'static str], &'static [&'static str]) {
    match t {
        Theorem::T1 => (&["d", "omega", "alpha", "gamma", "eps"], &["beta1"]),
        Theorem::T2 => (&["omega", "alpha1", "gamma1", "eps"], &["alpha2", "beta2", "gamma2"]),
        Theorem::T3 | Theorem::T4 => (&["alpha0", "alpha1", "beta1", "beta2", "gamma2", "eps"], &["alpha2"]),
    }
}

impl FamilyArgs {
    fn slots(&mut self) -> [(&'static str, &mut Option<f64>); 12] {
        [
            ("d", &mut self.d),
            ("omega", &mut self.omega),
            ("alpha", &mut self.alpha),
            ("gamma", &mut self.gamma),
            ("alpha0", &mut self.alpha0),
            ("alpha1", &mut self.alpha1),
            ("alpha2", &mut self.alpha2),
            ("beta1", &mut self.beta1),
            ("beta2", &mut self.beta2),
            ("gamma1", &mut self.gamma1),
            ("gamma2", &mut self.gamma2),
            ("eps", &mut self.eps),
        ]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.clone().slots().into_iter().find(|(n, _)| *n == name).and_then(|(_, v)| *v)
    }

    pub fn set(&mut self, name: &str, value: f64) -> bool {
        match self.slots().into_iter().find(|(n, _)| *n == name) {
            Some((_, slot)) => {
                *slot = Some(value);
                true
            }
            None => false,
        }
    }

    pub fn family(&self, t: Theorem) -> Result<Family, Failure> {
        let (required, optional) = family_flags(t);
        let mut copy = self.clone();
        for (name, value) in copy.slots() {
            if value.is_some() && !required.contains(&name) && !optional.contains(&name) {
                return Err(Failure::Usage(format!("--{name} is not a parameter of {}", t.as_str())));
            }
        }
        let missing: Vec<_> = required.iter().filter(|n| self.get(n).is_none()).map(|n| format!("--{n}")).collect();
        if !missing.is_empty() {
            return Err(Failure::Usage(format!("{} needs {}", t.as_str(), missing.join(", "))));
        }
        let v = |n: &str| self.get(n).unwrap_or(0.0);
        Ok(match t {
            Theorem::T1 => Family::T1(PerturbationT1 {
                d: v("d"),
                omega: v("omega"),
                alpha: v("alpha"),
                beta1: v("beta1"),
                gamma: v("gamma"),
                eps: v("eps"),
            }),
            Theorem::T2 => Family::T2(PerturbationT2::new(
                v("omega"),
                v("alpha1"),
                v("alpha2"),
                v("beta2"),
                v("gamma1"),
                v("gamma2"),
                v("eps"),
            )),
            Theorem::T3 | Theorem::T4 => Family::T34(PerturbationT34::sol1(
                v("alpha0"),
                v("alpha1"),
                v("alpha2"),
                v("beta1"),
                v("beta2"),
                v("gamma2"),
                v("eps"),
                if t == Theorem::T3 { Branch::Plus } else { Branch::Minus },
            )),
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(untagged)]
pub enum Family {
    T1(PerturbationT1),
    T2(PerturbationT2),
    T34(PerturbationT34),
}

impl Family {
    pub fn domain_conditions(&self) -> Vec<Condition> {
        match self {
            Family::T1(p) => p.domain_conditions(),
            Family::T2(p) => p.domain_conditions(),
            Family::T34(p) => p.domain_conditions(),
        }
    }

    pub fn predict(&self, opts: &PredictOptions) -> Result<PredictionSet, Failure> {
        let out = match self {
            Family::T1(p) => predict_orbits_t1(p, opts),
            Family::T2(p) => predict_orbits_t2(p, opts),
            Family::T34(p) => predict_orbits_t34(p, opts),
        };
        out.map_err(|e| Failure::from_core(e, self.domain_conditions()))
    }
}

pub fn predict_options(settings: &Settings) -> PredictOptions {
    let mut opts = PredictOptions::default();
    opts.search.quadrature = settings.quadrature;
    opts
}

#[derive(Debug, Serialize)]
pub struct EquilibriaResults {
    pub discriminant: f64,
    pub equilibria: Vec<Equilibrium>,
}

pub fn cmd_equilibria(p: &ParamArgs) -> EquilibriaResults {
    let params = p.params();
    EquilibriaResults { discriminant: params.discriminant(), equilibria: equilibria(&params) }
}

#[derive(Debug, Serialize)]
pub struct ClassifyResults {
    pub families: Vec<ZeroHopfFamily>,
}

pub fn cmd_classify(p: &ParamArgs, settings: &Settings) -> ClassifyResults {
    ClassifyResults { families: classify_zero_hopf(&p.params(), settings.family_tol) }
}

#[derive(Debug, Serialize)]
pub struct PredictInputs {
    pub theorem: Theorem,
    pub family: Family,
}

pub fn cmd_predict(family: &Family, settings: &Settings) -> Result<PredictionSet, Failure> {
    family.predict(&predict_options(settings))
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// Report written by `predict` (`-` for standard input).
    #[arg(long, conflicts_with_all = ["a", "x"])]
    pub input: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true, requires_all = ["b", "c", "d", "x", "y", "z", "period"])]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub d: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires = "a")]
    pub x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub y: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub z: Option<f64>,
    #[arg(long)]
    pub period: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct VerifiedOrbit {
    pub index: usize,
    pub found: bool,
    pub orbit: Option<PeriodicOrbit>,
    pub error: Option<String>,
    pub distance_to_prediction: Option<f64>,
    pub predicted_stability: Option<Stability>,
    pub stability_match: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct VerifyResults {
    pub found: usize,
    pub orbits: Vec<VerifiedOrbit>,
}

#[derive(Debug, Deserialize)]
struct PredictReportIn {
    results: Option<PredictionSet>,
}

enum Target {
    Predicted(OrbitPrediction),
    Explicit { params: Params, guess: State, period: f64 },
}

fn read_input(path: &PathBuf) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Usage(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
    }
}

/// Predictions from a `predict` report, or one explicit guess.
pub fn verify_targets(args: &VerifyArgs) -> Result<Vec<OrbitPrediction>, Failure> {
    match &args.input {
        Some(path) => {
            let text = read_input(path)?;
            let report: PredictReportIn = serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("{} is not a predict report: {e}", path.display())))?;
            let set = report
                .results
                .ok_or_else(|| Failure::Usage(format!("{} carries no predictions", path.display())))?;
            Ok(set.orbits)
        }
        None => Ok(Vec::new()),
    }
}

pub fn cmd_verify(args: &VerifyArgs, settings: &Settings) -> Result<VerifyResults, Failure> {
    let targets: Vec<Target> = if args.input.is_some() {
        let preds = verify_targets(args)?;
        if let Some(p) = preds.iter().find(|p| p.eps == 0.0) {
            return Err(Failure::from_core(
                Error::Domain("prediction has ε = 0: there is no perturbation to verify".into()),
                vec![Condition::new("eps_nonzero", p.eps, false)],
            ));
        }
        preds.into_iter().map(Target::Predicted).collect()
    } else {
        match (args.a, args.b, args.c, args.d, args.x, args.y, args.z, args.period) {
            (Some(a), Some(b), Some(c), Some(d), Some(x), Some(y), Some(z), Some(period)) => {
                vec![Target::Explicit { params: Params::new(a, b, c, d), guess: State::new(x, y, z), period }]
            }
            _ => {
                return Err(Failure::Usage(
                    "verify needs --input or all of --a --b --c --d --x --y --z --period".into(),
                ))
            }
        }
    };

    let cfg = settings.integrator;
    let opts = ShootingOptions::default();
    let pool = settings.pool()?;
    let orbits: Vec<VerifiedOrbit> = pool.install(|| {
        targets
            .par_iter()
            .enumerate()
            .map(|(index, t)| {
                let (res, pred) = match t {
                    Target::Predicted(p) => (verify_prediction(p, &cfg, &opts), Some(p)),
                    Target::Explicit { params, guess, period } => {
                        (refine_periodic(params, *guess, *period, &cfg, &opts), None)
                    }
                };
                match res {
                    Ok(orbit) => VerifiedOrbit {
                        index,
                        found: true,
                        distance_to_prediction: pred.map(|p| orbit.initial.distance(&p.initial_condition)),
                        predicted_stability: pred.map(|p| p.stability),
                        stability_match: pred.map(|p| p.stability == orbit.stability),
                        orbit: Some(orbit),
                        error: None,
                    },
                    Err(e) => VerifiedOrbit {
                        index,
                        found: false,
                        orbit: None,
                        error: Some(e.to_string()),
                        distance_to_prediction: None,
                        predicted_stability: pred.map(|p| p.stability),
                        stability_match: None,
                    },
                }
            })
            .collect()
    });
    Ok(VerifyResults { found: orbits.iter().filter(|o| o.found).count(), orbits })
}
