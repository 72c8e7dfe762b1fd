use std::collections::HashSet;

use zoaudit::audit::{
    audit_theorem, eps_lower_bound, run_distinguisher, AuditParams, AuditVerdict, EventSpec,
    Theorem,
};
use zoaudit::descent::{run_descent, Init};
use zoaudit::estimators::EstimatorSpec;
use zoaudit::losses::{linear_pair, LossSpec, Side};
use zoaudit::stream::StreamId;
use zoaudit::Error;

fn thm3(trials: u64, seed: u64) -> AuditParams {
    let mut p = AuditParams::new(Theorem::Thm3, EstimatorSpec::spsa(), 2);
    p.trials = trials;
    p.master_seed = seed;
    p
}

#[test]
fn distinguisher_on_the_linear_pair() {
    let p = thm3(100_000, 3);
    let spec = LossSpec::new(linear_pair(100, 2, 100.0, 0).unwrap(), 2).unwrap();
    let est = EstimatorSpec::spsa();
    let event = EventSpec::CoordAtLeast {
        i_star: 0,
        threshold: 0.02,
    };
    let out = run_distinguisher(
        |side, rng| Ok(run_descent(&spec.build_loss(side), &est, &p.descent, rng)?.last().to_vec()),
        &event,
        p.trials,
        0.01,
        p.master_seed,
        0,
    )
    .unwrap();
    let c1 = 1.0 / 96.0;
    let se = (c1 * (1.0 - c1) / p.trials as f64).sqrt();
    assert!(out.x_prime.p_hat >= c1 - 3.0 * se, "{:?}", out.x_prime);
    assert_eq!(out.x.hits, 0);
}

#[test]
fn thm3_default_audit_is_a_violation() {
    let r = audit_theorem(&thm3(100_000, 1)).unwrap();
    assert_eq!(r.verdict, AuditVerdict::Violation);
    let b = r.theory.as_ref().unwrap();
    assert_eq!(r.delta, b.delta_max / 2.0);
    assert!(r.eps_lb.unwrap() >= 5.0);
    let eps = r.eps_lb.unwrap();
    assert!(r.p.lo >= eps.exp() * r.q.hi + r.delta - 1e-12);
}

#[test]
fn same_seed_same_report() {
    let p = thm3(5_000, 11);
    assert_eq!(audit_theorem(&p).unwrap(), audit_theorem(&p).unwrap());
    let mut other = p.clone();
    other.master_seed = 12;
    assert_ne!(audit_theorem(&p).unwrap().p, audit_theorem(&other).unwrap().p);
}

#[test]
fn certificate_does_not_weaken_with_more_trials() {
    // Gaussian start far enough from the threshold that q stays at zero hits;
    // then eps_lb = ln((p.lo - delta) / q.hi) grows as q.hi shrinks.
    for seed in [1, 2, 3] {
        let mut prev = f64::NEG_INFINITY;
        for trials in [5_000, 10_000, 20_000] {
            let r = audit_theorem(&thm3(trials, seed)).unwrap();
            let eps = r.eps_lb.unwrap();
            assert!(eps >= prev - 0.05, "seed {seed}: {eps} after {prev}");
            prev = eps;
        }
    }
}

#[test]
fn additive_noise_mechanism_is_not_caught_by_the_singleton() {
    let mut p = AuditParams::new(Theorem::Thm2, EstimatorSpec::spsa().with_additive_noise(1.0), 2);
    p.trials = 5_000;
    let r = audit_theorem(&p).unwrap();
    assert_eq!(r.verdict, AuditVerdict::NoViolationDetected);
    assert_eq!(r.p.hits, 0);
    assert_eq!(eps_lower_bound(&r.p, &r.q, r.delta), None);
}

#[test]
fn thm2_requires_the_start_inside_the_ball() {
    let mut p = AuditParams::new(Theorem::Thm2, EstimatorSpec::spsa(), 2);
    p.descent.init = Init::Fixed {
        point: vec![2.0, 0.0],
    };
    match audit_theorem(&p) {
        Err(Error::Hypothesis(v)) => assert!(v[0].starts_with("|w0| < D"), "{v:?}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn trial_streams_never_collide() {
    let mut keys = HashSet::new();
    for domain in 0..3 {
        for side in Side::BOTH {
            for trial in 0..5_000 {
                assert!(keys.insert(StreamId::new(7, domain, side.tag(), trial).key()));
            }
        }
    }
}
