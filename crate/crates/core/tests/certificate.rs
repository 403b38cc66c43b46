//! Certificate and monitor behaviour on configured problems.

use blowcert_core::certifier::{certify, certify_config, disposition, monitor, Disposition};
use blowcert_core::config::{parse_config_str, SimConfig};
use blowcert_core::solver::{initial_data, run};
use blowcert_core::thresholds::{certificate_constants, momentum_k1, ExponentParams, Theorem};
use blowcert_core::Error;

fn drift(nu: f64, q: f64, n: usize, cells: usize) -> SimConfig {
    parse_config_str(&format!(
        r#"{{"grid": {{"n": {n}, "cells": [{cells}], "L": 8.0}},
        "model": {{"model": "power_law", "nu": {nu}, "q": {q}, "A": 1.0, "gamma": 1.4}},
        "t_end": 0.1, "support_threshold": 0.05,
        "initial_condition": {{"name": "gaussian_drift", "u0": 0.5, "velocity_width": 0.7, "background": 0.02}}}}"#
    ))
    .unwrap()
}

#[test]
fn drift_certificate_is_locked() {
    let cert = certify_config(&drift(1.0, 2.5, 3, 32)).unwrap();
    assert_eq!(cert.theorem, Theorem::Fluid);
    assert_eq!(cert.c.unwrap().to_bits(), 0x3ec39c039875b932, "C = {:e}", cert.c.unwrap());
    assert_eq!(cert.t_star.unwrap().to_bits(), 0x41753fa8c4d9ab03);
    assert_eq!(cert.t_star.unwrap(), cert.e0 / cert.c.unwrap());
    let again = certify_config(&drift(1.0, 2.5, 3, 32)).unwrap();
    assert_eq!(serde_json::to_string(&again).unwrap(), serde_json::to_string(&cert).unwrap());
}

fn params() -> ExponentParams {
    ExponentParams {
        n: 3,
        gamma: 1.4,
        a: 1.0,
        nu: 1.0,
        q: 2.5,
        eta: 0.0,
    }
}

#[test]
fn decay_rate_is_homogeneous_in_initial_energy() {
    let p = params();
    let (m, mom, e0) = (3.0, [0.4, -0.1, 0.2], 7.0);
    let a = certificate_constants(&p, m, &mom, e0, false).unwrap();
    let b = certificate_constants(&p, m, &mom, 2.0 * e0, false).unwrap();
    let degree = -(3.0 - p.q) / (3.0 * (p.gamma - 1.0));
    assert!((b.c / a.c / 2f64.powf(degree) - 1.0).abs() < 1e-12);
}

#[test]
fn lifespan_bound_moves_with_momentum_and_k1() {
    let p = params();
    let (m, e0) = (3.0, 7.0);
    let base = certificate_constants(&p, m, &[0.5, 0.0, 0.0], e0, false).unwrap();
    let more_p = certificate_constants(&p, m, &[0.5 * 1.001, 0.0, 0.0], e0, false).unwrap();
    assert!(more_p.t_star < base.t_star);
    // K1 depends on the mass alone among the inputs held here.
    for dm in [1e-3, -1e-3] {
        let k1 = momentum_k1(3, p.gamma, p.q, m + dm, p.a).unwrap();
        let t = certificate_constants(&p, m + dm, &[0.5, 0.0, 0.0], e0, false).unwrap().t_star;
        assert_eq!(k1 > base.k1, t > base.t_star);
        assert_ne!(k1, base.k1);
    }
}

#[test]
fn colliding_bumps_have_no_certificate() {
    let config = parse_config_str(
        r#"{"grid": {"n": 3, "cells": [24], "L": 8.0},
        "model": {"model": "power_law", "nu": 1.0, "q": 2.5, "A": 1.0, "gamma": 1.4},
        "t_end": 0.1,
        "initial_condition": {"name": "colliding_bumps", "u0": 0.5, "separation": 3.0}}"#,
    )
    .unwrap();
    let cert = certify_config(&config).unwrap();
    assert!(cert.c.is_none() && cert.t_star.is_none());
    assert_eq!(cert.reason.as_deref(), Some("momentum_nonzero = false"));
    assert_eq!(disposition(&cert, None, None), Disposition::HypothesisFailed);
}

#[test]
fn q_equal_to_dimension_parses_but_is_not_certified() {
    let config = drift(1.0, 3.0, 3, 16);
    let cert = certify_config(&config).unwrap();
    assert_eq!(disposition(&cert, None, None), Disposition::HypothesisFailed);
    assert!(cert.hypotheses.failed_hypotheses().contains(&"in_q_range"));
}

#[test]
fn mhd_loop_uses_the_mhd_theorem() {
    let config = parse_config_str(
        r#"{"grid": {"n": 3, "cells": [24], "L": 8.0},
        "model": {"model": "power_law", "nu": 1.0, "q": 2.5, "A": 1.0, "gamma": 1.4},
        "eta": 0.01, "t_end": 0.1, "support_threshold": 0.05,
        "initial_condition": {"name": "mhd_loop", "u0": 0.5, "background": 0.02, "b0": 0.3, "loop_radius": 2.0}}"#,
    )
    .unwrap();
    let cert = certify_config(&config).unwrap();
    assert_eq!(cert.theorem, Theorem::Mhd);
    let (state, _) = initial_data(&config).unwrap();
    let fluid = certify(&config.exponent_params(), &blowcert_core::fields::FluidState { h: None, ..state }, false)
        .unwrap();
    assert!(cert.e0 > fluid.e0);
}

#[test]
fn short_run_is_certified_consistent() {
    let config = drift(0.2, 2.5, 3, 24);
    let out = run(&config).unwrap();
    let cert = certify_config(&config).unwrap();
    let report = monitor(&out.series, &cert, &config.exponent_params()).unwrap();
    assert_eq!(disposition(&cert, Some(&report), Some(&out.status)), Disposition::CertifiedConsistent);
    assert!(report.summary.min_chain_ratio.unwrap() >= 0.9);
    assert!(report.summary.max_line_excess.unwrap() <= 0.0);
}

#[test]
fn monitor_rejects_foreign_parameters() {
    let config = drift(0.2, 2.5, 2, 16);
    let out = run(&config).unwrap();
    let cert = certify_config(&config).unwrap();
    let other = ExponentParams { q: 2.4, ..config.exponent_params() };
    assert!(matches!(monitor(&out.series, &cert, &other), Err(Error::Mismatch(_))));
}
