//! Cross-module properties over the whole corpus.

use num_complex::Complex64;
use proptest::prelude::*;

use tauberkit::corpus;
use tauberkit::engine::{self, EngineConfig};
use tauberkit::estimator;
use tauberkit::quadrature::{laplace, stieltjes, QuadratureOptions};
use tauberkit::specialfn::{h_j, h_j_bound};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn g_respects_conjugation_on_every_exemplar() {
    for e in corpus::all() {
        let cfg = EngineConfig::for_function(&e.f, e.mu()).unwrap();
        for (re, im) in [(0.1, 0.5), (0.4, -2.0), (0.02, 7.0)] {
            let z = Complex64::new(re * e.mu(), im);
            let g = engine::g_eval(&e.f, &e.law, &cfg, z).unwrap();
            let gc = engine::g_eval(&e.f, &e.law, &cfg, z.conj()).unwrap();
            assert!((gc - g.conj()).norm() <= 1e-10 * (1.0 + g.norm()), "{}", e.name);
        }
    }
}

#[test]
fn g_routes_agree_at_ten_points() {
    let e = corpus::by_name("mixture_gamma").unwrap();
    let cfg = EngineConfig::for_function(&e.f, e.mu()).unwrap();
    for k in 0..10 {
        let z = Complex64::new(0.05 + 0.09 * k as f64, -3.0 + 0.6 * k as f64);
        let a = engine::g_eval(&e.f, &e.law, &cfg, z).unwrap();
        let b = engine::g_eval_definition(&e.f, &e.law, &cfg, z).unwrap();
        assert!((a - b).norm() <= 1e-7 * (1.0 + a.norm()), "{z}: {a} vs {b}");
    }
}

#[test]
fn ab_inequalities_hold_on_scanned_points() {
    let cfg = EngineConfig::default();
    for e in corpus::all() {
        for k in [2, 5, 8, 11] {
            let sigma = 2f64.powi(-k) * e.mu().min(1.0);
            for t in [1.0, 10.0] {
                let d = engine::diagnostics_ab(&e.model, &cfg, sigma, t).unwrap();
                assert!(d.a_j <= d.a_bound * (1.0 + 1e-9), "{} {d:?}", e.name);
                assert!(d.b_j <= d.b_bound * (1.0 + 1e-9), "{} {d:?}", e.name);
                let hb = h_j_bound(sigma, e.j(), t).unwrap();
                assert!(h_j(sigma, e.j(), t).unwrap() <= hb * (1.0 + 1e-9));
            }
        }
    }
}

#[test]
fn ab_terms_vanish_along_sigma() {
    let cfg = EngineConfig::default();
    for name in ["shifted_gamma_j05", "shifted_gamma_j2", "mixture_gamma"] {
        let e = corpus::by_name(name).unwrap();
        let first = engine::diagnostics_ab(&e.model, &cfg, 0.25 * e.mu().min(1.0), 5.0).unwrap();
        let last = engine::diagnostics_ab(&e.model, &cfg, 2f64.powi(-12) * e.mu().min(1.0), 5.0).unwrap();
        assert!(last.a_j < 0.05 * first.a_j, "{name}: {first:?} {last:?}");
        assert!(last.b_j < 0.05 * first.b_j, "{name}: {first:?} {last:?}");
    }
}

#[test]
fn rho_is_positive_and_envelope_calibrates() {
    let e = corpus::by_name("shifted_gamma_j2").unwrap();
    let cfg = EngineConfig::default();
    let ts = [20.0, 40.0, 80.0];
    let c = engine::calibrate_envelope_constant(&e.f, &e.law, &cfg, &ts).unwrap();
    assert!(c.is_finite() && c > 0.0);
    let mut cal = cfg.clone();
    cal.envelope_constant = c * (1.0 + 1e-9);
    for t in ts {
        let env = engine::envelope(&e.f, &e.law, &cal, t).unwrap();
        assert!(env.lower <= env.phi && env.phi <= env.upper, "{env:?}");
    }
}

#[test]
fn estimator_round_trip_on_every_exemplar() {
    let mut failures = Vec::new();
    for e in corpus::all() {
        let fit = estimator::fit_decay_law(&e.f, [10.0 / e.mu(), 100.0 / e.mu()]).unwrap();
        let (dm, dj, dd) = (rel(fit.law.mu, e.mu()), rel(fit.law.j, e.j()), rel(fit.law.d, e.law.d));
        if !(dm <= 0.01 && dj <= 0.05 && dd <= 0.05) {
            failures.push(format!("{}: mu {dm:.2e}, j {dj:.2e}, D {dd:.2e}", e.name));
        }
    }
    assert!(failures.is_empty(), "round trip misses: {failures:?}");
}

#[test]
fn fitted_law_passes_its_ratio_table() {
    let mut failures = Vec::new();
    for e in corpus::all() {
        let window = [10.0 / e.mu(), 100.0 / e.mu()];
        let fit = estimator::fit_decay_law(&e.f, window).unwrap();
        let grid = engine::log_grid(window[0], 2.0 * window[1], 40).unwrap();
        let rep = estimator::ratio_table(&e.f, &fit.law, &grid).unwrap();
        if !rep.pass {
            failures.push(format!("{}: last ratio {:.4}", e.name, rep.ratios.last().unwrap()));
        }
    }
    assert!(failures.is_empty(), "ratio tables failing: {failures:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn parts_identity_holds(idx in 0usize..corpus::NAMES.len(), u in 0.05f64..0.95, im in -5.0f64..5.0) {
        let e = corpus::by_name(corpus::NAMES[idx]).unwrap();
        let opts = QuadratureOptions::default();
        let z = Complex64::new(u * e.mu(), im);
        let l = laplace(&e.f, z, &opts).unwrap().value;
        let s = stieltjes(&e.f, z, &opts).unwrap().value;
        prop_assert!((s + e.f.phi0() + z * l).norm() <= 1e-7 * (1.0 + l.norm()));
    }

    #[test]
    fn exact_ratio_deviation_shrinks(idx in 0usize..corpus::NAMES.len(), x in 1.0f64..10.0) {
        let e = corpus::by_name(corpus::NAMES[idx]).unwrap();
        let t = 10.0 * x / e.mu();
        let rep = estimator::ratio_table(&e.f, &e.law, &[t, 2.0 * t]).unwrap();
        prop_assert!((rep.ratios[1] - 1.0).abs() <= (rep.ratios[0] - 1.0).abs() + 1e-12);
    }
}
