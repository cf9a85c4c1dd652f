use super::*;
use crate::averaging::{average_first, average_second, PeriodicSystem};
use crate::error::Error;
use crate::fhn::{jacobian, vector_field, Branch};
use crate::quadrature::QuadratureConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn t1_example(eps: f64) -> PerturbationT1 {
    PerturbationT1 { d: 0.5, omega: 0.5, alpha: 1.0, beta1: 0.0, gamma: 1.0, eps }
}

fn t2_example(eps: f64) -> PerturbationT2 {
    PerturbationT2::new(0.5, 2.0, 0.0, 0.0, 1.0, 0.0, eps)
}

fn t34_sample(b2: f64, g2: f64, eps: f64) -> PerturbationT34 {
    PerturbationT34::sol1(-0.8, 1.0, 0.0, 1.0, b2, g2, eps, Branch::Plus)
}

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

#[test]
fn rotation_rate_matches_omega() {
    let s1 = t1_example(0.01).build().unwrap();
    assert!((s1.theta_rate.abs() - 0.5).abs() < 1e-12);
    let s2 = t2_example(0.01).build().unwrap();
    assert!((s2.theta_rate.abs() - 0.5).abs() < 1e-12);
    let s3 = t34_sample(-1.0, -2.0, 0.01).build().unwrap();
    assert!((s3.theta_rate.abs() - 0.8f64.sqrt()).abs() < 1e-12);
    assert_eq!(s3.sigma, Some(2.0));
}

#[test]
fn third_column_spans_the_kernel() {
    // P e₃ is the eigenvector of eigenvalue 0 of the linear part at ε = 0
    for (sys, centre) in [
        (t1_example(0.01).build().unwrap(), State::ORIGIN),
        (t2_example(0.01).build().unwrap(), State::ORIGIN),
    ] {
        let j = jacobian(&sys.params_at(0.0), &centre);
        let v = [sys.p[0][2], sys.p[1][2], sys.p[2][2]];
        for row in j {
            let dot: f64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
            assert!(dot.abs() < 1e-12, "{dot}");
        }
    }
}

#[test]
fn embedding_round_trips() {
    let sys = t34_sample(1.0, 2.0, 0.003).build().unwrap();
    assert!(sys.to_state(1.0, 0.0, 0.0).distance(&sys.equilibrium()) < 1e-15);
    let eq = sys.equilibrium();
    assert!(vector_field(&sys.params(), &eq).norm() < 1e-14);
    let (th, r, w) = sys.to_cylindrical(&sys.to_state(0.7, 1.3, -0.4));
    assert!((th - 0.7).abs() < 1e-10 && (r - 1.3).abs() < 1e-10 && (w + 0.4).abs() < 1e-10);
}

fn truncation_error(sys: &ReducedSystem) -> f64 {
    (0..16)
        .flat_map(|k| {
            let th = k as f64 * 0.4;
            let exact = sys.exact_field(th, 0.8, 0.3);
            let approx = sys.truncated_field(th, 0.8, 0.3);
            [(exact[0] - approx[0]).abs(), (exact[1] - approx[1]).abs()]
        })
        .fold(0.0, f64::max)
}

#[test]
fn truncated_field_error_is_third_order() {
    let builders: [fn(f64) -> ReducedSystem; 3] = [
        |e| t1_example(e).build().unwrap(),
        |e| t2_example(e).build().unwrap(),
        |e| t34_sample(-1.0, -2.0, e).build().unwrap(),
    ];
    for build in builders {
        let big = truncation_error(&build(1e-3));
        let small = truncation_error(&build(5e-4));
        let ratio = big / small;
        assert!((6.0..10.0).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn t1_first_average_matches_closed_form() {
    let p = t1_example(0.01);
    let sys = p.build().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let (r, w) = (rng.gen_range(0.1..3.0), rng.gen_range(-2.0..2.0));
        let q = average_first(&sys, &[r, w], &cfg()).unwrap();
        let (f1, f2) = p.averaged_f(r, w).unwrap();
        assert!((q[0] - f1).abs() < 1e-8 && (q[1] - f2).abs() < 1e-8, "({r}, {w})");
    }
}

#[test]
fn t1_closed_form_ignores_beta1() {
    // the printed averages carry no β₁ term; quadrature does
    let p = PerturbationT1 { beta1: 0.7, ..t1_example(0.01) };
    let sys = p.build().unwrap();
    let q = average_first(&sys, &[1.0, 0.5], &cfg()).unwrap();
    let (f1, f2) = p.averaged_f(1.0, 0.5).unwrap();
    assert!((q[0] - f1).abs() + (q[1] - f2).abs() > 1e-3);
}

#[test]
fn t2_first_average_vanishes_and_second_matches_closed_form() {
    let p = PerturbationT2::new(0.5, 2.0, 0.3, -0.4, 1.0, 0.6, 0.01);
    let sys = p.build().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let (r, w) = (rng.gen_range(0.1..3.0), rng.gen_range(-2.0..2.0));
        let f = average_first(&sys, &[r, w], &cfg()).unwrap();
        assert!(f[0].abs() < 1e-10 && f[1].abs() < 1e-10);
        let g = average_second(&sys, &[r, w], &cfg()).unwrap();
        let (g1, g2) = p.averaged_g(r, w).unwrap();
        assert!(
            (g[0] - g1).abs() < 1e-8 * (1.0 + g1.abs()) && (g[1] - g2).abs() < 1e-8 * (1.0 + g2.abs()),
            "({r}, {w}): {g:?} vs ({g1}, {g2})"
        );
    }
}

#[test]
fn t1_example_zero() {
    let p = t1_example(0.01);
    assert!((p.gamma_aux() - 27.0 / 28.0).abs() < 1e-15);
    let (r, w) = p.closed_form_zero().unwrap();
    assert!((r - 0.25 * (27.0f64 / 28.0).sqrt()).abs() < 1e-15);
    let set = predict_orbits_t1(&p, &PredictOptions::default()).unwrap();
    assert_eq!(set.orbits.len(), 1);
    let o = &set.orbits[0];
    // the quadrature zero sits at r*/√2 with the printed w*
    assert!((o.rw_star[0] - r / 2f64.sqrt()).abs() < 1e-7);
    assert!((o.rw_star[1] - w).abs() < 1e-7);
    assert!((o.jac_det_quadrature - o.jac_det_value).abs() < 1e-6);
}

#[test]
fn t1_vanishing_gamma_gives_nothing() {
    let p = PerturbationT1 { d: 0.5, omega: 1.0, alpha: 1.0, beta1: 0.0, gamma: 1.0, eps: 0.01 };
    assert!(p.gamma_aux().abs() < 1e-15);
    assert!(p.closed_form_zero().is_none());
    assert!(predict_orbits_t1(&p, &PredictOptions::default()).unwrap().orbits.is_empty());
}

#[test]
fn t2_example_zero() {
    let p = t2_example(0.005);
    let (r, w) = p.closed_form_zero().unwrap();
    assert!((w - 1.0 / 3.0).abs() < 1e-15);
    let set = predict_orbits_t2(&p, &PredictOptions::default()).unwrap();
    assert_eq!(set.orbits.len(), 1);
    let o = &set.orbits[0];
    assert!((o.rw_star[0] - r).abs() < 1e-7 && (o.rw_star[1] - w).abs() < 1e-7);
    assert!((o.jac_det_quadrature - p.jac_det_rederived()).abs() < 1e-6 * (1.0 + p.jac_det_rederived().abs()));
}

#[test]
fn t2_negative_discriminant_gives_nothing() {
    let p = PerturbationT2::new(0.5, 0.1, 0.0, 1.0, 1.0, 0.0, 0.01);
    assert!(p.discriminant() < 0.0);
    assert!(p.closed_form_zero().is_none());
    assert!(predict_orbits_t2(&p, &PredictOptions::default()).unwrap().orbits.is_empty());
}

#[test]
fn t2_degenerate_family_rejected() {
    let p = PerturbationT2::new(1.0, 2.0, 0.0, 0.0, 1.0, 0.0, 0.01);
    assert!(matches!(predict_orbits_t2(&p, &PredictOptions::default()), Err(Error::DegenerateFamily(_))));
}

#[test]
fn t34_off_branch_first_average_does_not_vanish() {
    let mut p = t34_sample(-1.0, -2.0, 0.01);
    p.gamma1 += 0.5;
    assert!(matches!(
        predict_orbits_t34(&p, &PredictOptions::default()),
        Err(Error::FirstOrderNotZero { .. })
    ));
}

#[test]
fn t34_centre_merges_with_origin() {
    let sys = t34_sample(-1.0, -2.0, 0.01).build().unwrap();
    assert!(sys.equilibrium_at(0.0).norm() < 1e-15);
    assert_eq!(sys.centre, Centre::Minus);
    let t4 = PerturbationT34::sol1(-1.5, 1.0, 0.0, 1.0, 1.0, 1.0, 0.01, Branch::Minus).build().unwrap();
    assert!(t4.equilibrium_at(0.0).norm() < 1e-15);
    assert_eq!(t4.centre, Centre::Plus);
}

#[test]
fn t34_domain_checks() {
    let p = PerturbationT34::sol1(-0.1, 1.0, 0.0, 1.0, 1.0, 1.0, 0.01, Branch::Plus);
    assert!(matches!(p.validate(), Err(Error::Domain(_))));
    let p = PerturbationT34::sol1(-0.8, 1.0, 0.0, 1.0, 1.0, 1.0, 0.01, Branch::Minus);
    assert!(matches!(p.validate(), Err(Error::Domain(_))));
}

#[test]
fn prediction_counts_stable_under_refinement() {
    let coarse = PredictOptions::default();
    let mut fine = PredictOptions::default();
    fine.search.quadrature.nodes = 2048;
    fine.w_cells = 4000;
    for (b2, g2) in [(-1.0, -2.0), (1.0, 2.0), (1.0, -10.0)] {
        let p = t34_sample(b2, g2, 0.002);
        let a = predict_orbits_t34(&p, &coarse).unwrap();
        let b = predict_orbits_t34(&p, &fine).unwrap();
        assert_eq!(a.orbits.len(), b.orbits.len());
        for (x, y) in a.orbits.iter().zip(&b.orbits) {
            assert!((x.rw_star[0] - y.rw_star[0]).abs() < 1e-7 && (x.rw_star[1] - y.rw_star[1]).abs() < 1e-7);
        }
    }
}

#[test]
fn theorem_names_parse() {
    for t in [Theorem::T1, Theorem::T2, Theorem::T3, Theorem::T4] {
        assert_eq!(t.as_str().parse::<Theorem>().unwrap(), t);
    }
    assert!("t5".parse::<Theorem>().is_err());
}

#[test]
fn reduced_system_is_two_dimensional_and_periodic() {
    let sys = t1_example(0.01).build().unwrap();
    assert_eq!(sys.dim(), 2);
    let a = sys.first_order(0.3, &[1.0, 0.2]);
    let b = sys.first_order(0.3 + sys.period(), &[1.0, 0.2]);
    assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
}

#[test]
fn domain_tables_flag_violations() {
    let bad = PerturbationT1 { d: 1.0, ..t1_example(0.01) };
    assert!(bad.domain_conditions().iter().any(|c| !c.satisfied));
    assert!(t1_example(0.01).domain_conditions().iter().all(|c| c.satisfied));
    let p = PerturbationT34::sol1(-0.1, 1.0, 0.0, 1.0, 1.0, 1.0, 0.01, Branch::Plus);
    assert!(p.domain_conditions().iter().any(|c| c.name == "alpha0_in_interval" && !c.satisfied));
    assert!(t34_sample(-1.0, -2.0, 0.01).domain_conditions().iter().all(|c| c.satisfied));
}
