//! Acceptance criteria 1 to 9. Each test prints one `criterion N: PASS|FAIL`
//! line followed by its evidence, then asserts.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tauberkit::corpus::{self, Exemplar};
use tauberkit::engine::{self, EngineConfig};
use tauberkit::estimator;
use tauberkit::model::{AsymptoticLaw, DecayFunction, Verdict};
use tauberkit::quadrature::{alpha_transform, laplace, stieltjes, QuadratureOptions};
use tauberkit::specialfn::{h_1_closed_form, h_j, h_j_bound, h_j_direct};
use tauberkit::Error;

fn report(n: u32, pass: bool, details: &[String]) {
    println!("criterion {n}: {}", if pass { "PASS" } else { "FAIL" });
    for d in details {
        println!("    {d}");
    }
}

fn random_strip_points(rng: &mut ChaCha8Rng, mu: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(0.05 * mu..=0.95 * mu), rng.gen_range(-5.0..=5.0)))
        .collect()
}

#[test]
fn criterion_1_transform_oracles() {
    let start = Instant::now();
    let opts = QuadratureOptions::default();
    let mut details = Vec::new();
    let mut pass = true;
    for name in ["shifted_gamma_j2", "half_power", "mixture_exp"] {
        let e = corpus::by_name(name).unwrap();
        let mut worst: f64 = 0.0;
        for z in corpus::strip_grid(e.mu()) {
            let exact = e.exact_transform(z);
            let q = laplace(&e.f, z, &opts).unwrap().value;
            worst = worst.max((q - exact).norm() / exact.norm());
        }
        pass &= worst <= 1e-8;
        details.push(format!("{name}: worst relative gap {worst:.2e}"));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 30.0;
    details.push(format!("runtime {secs:.2} s"));
    report(1, pass, &details);
    assert!(pass);
}

#[test]
fn criterion_2_h1_closed_form() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let sigma = 10f64.powf(rng.gen_range(-4.0..0.0));
        let t = 10f64.powf(rng.gen_range(-1.0..2.0));
        let closed = h_1_closed_form(sigma, t);
        let direct = h_j_direct(sigma, 1.0, t).unwrap();
        worst = worst.max((closed - direct).abs() / closed.abs());
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-10 && secs < 5.0;
    report(2, pass, &[format!("worst relative gap {worst:.2e} over 100 points"), format!("runtime {secs:.2} s")]);
    assert!(pass);
}

#[test]
fn criterion_3_regime_bounds() {
    let mut details = Vec::new();
    let mut pass = true;
    let sigmas = [1e-6, 1e-3, 0.1, 1.0, 10.0];
    let ts = [0.01, 1.0, 100.0, 1e4];
    for j in [2.0, 2.5, 5.0] {
        let worst = sigmas
            .iter()
            .flat_map(|s| ts.iter().map(move |t| h_j(*s, j, *t).unwrap()))
            .fold(0.0, f64::max);
        pass &= worst <= PI * (1.0 + 1e-9);
        details.push(format!("j = {j}: max h_j {worst:.6} vs pi"));
    }
    for j in [1.2, 1.5, 1.9] {
        let bound = 2f64.powf(4.0 - 2.0 * j) * PI.powf(j - 1.0) / (j - 1.0);
        let worst = sigmas
            .iter()
            .flat_map(|s| ts.iter().map(move |t| h_j(*s, j, *t).unwrap()))
            .fold(0.0, f64::max);
        pass &= worst <= bound * (1.0 + 1e-9);
        details.push(format!("j = {j}: max h_j {worst:.6} vs bound {bound:.6}"));
    }
    for j in [0.3, 0.7] {
        let t = 1.0;
        let ratios: Vec<f64> = (4..=20)
            .map(|k| {
                let s = 2f64.powi(-k);
                h_j(s, j, t).unwrap() / s.powf(j - 1.0)
            })
            .collect();
        let last = &ratios[ratios.len() - 5..];
        let growth = last.iter().cloned().fold(0.0, f64::max) / last[0];
        let dominated = (4..=20).all(|k| {
            let s = 2f64.powi(-k);
            h_j(s, j, t).unwrap() <= h_j_bound(s, j, t).unwrap() * (1.0 + 1e-9)
        });
        pass &= growth <= 1.05 && dominated;
        details.push(format!(
            "j = {j}: h_j/sigma^(j-1) growth over last five {growth:.4}, bound dominance {dominated}"
        ));
    }
    report(3, pass, &details);
    assert!(pass);
}

#[test]
fn criterion_4_identity_suite() {
    let opts = QuadratureOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut details = Vec::new();
    let mut pass = true;
    for e in corpus::all() {
        let cfg = EngineConfig::for_function(&e.f, e.mu()).unwrap();
        let (mut parts, mut routes): (f64, f64) = (0.0, 0.0);
        for z in random_strip_points(&mut rng, e.mu(), 20) {
            let l = laplace(&e.f, z, &opts).unwrap().value;
            let s = stieltjes(&e.f, z, &opts).unwrap().value;
            parts = parts.max((s + e.f.phi0() + z * l).norm() / (1.0 + l.norm()));
            match alpha_transform(&e.f, cfg.a, z, &opts) {
                Ok(a) => routes = routes.max(a.route_gap.unwrap_or(f64::INFINITY)),
                Err(Error::ConsistencyFailure { gap, .. }) => routes = routes.max(gap),
                Err(other) => panic!("{}: {other}", e.name),
            }
        }
        pass &= parts <= 1e-7 && routes <= 1e-7;
        details.push(format!("{}: parts identity {parts:.2e}, alpha routes {routes:.2e}", e.name));
    }
    report(4, pass, &details);
    assert!(pass);
}

fn eta_limit(e: &Exemplar, ts: &[f64]) -> Vec<Vec<f64>> {
    let cfg = EngineConfig::for_function(&e.f, e.mu()).unwrap();
    let per_sigma: Vec<Vec<f64>> = (2..=12)
        .map(|k| engine::eta_profile(&e.f, &e.law, &cfg, 2f64.powi(-k), ts).unwrap())
        .collect();
    // Transpose to one sequence per T.
    (0..ts.len()).map(|i| per_sigma.iter().map(|row| row[i]).collect()).collect()
}

#[test]
fn criterion_5_eta_limit() {
    let start = Instant::now();
    let ts = [1.0, 10.0, 64.0];
    let mut details = Vec::new();
    let mut pass = true;
    for e in corpus::all() {
        for (t, seq) in ts.iter().zip(eta_limit(&e, &ts)) {
            let n = seq.len();
            let ratio = seq[n - 1] / seq[0];
            let decreasing = seq[n - 3..].windows(2).all(|w| w[1] < w[0]);
            let ok = ratio < 0.05 && decreasing;
            pass &= ok;
            details.push(format!(
                "{} T = {t}: eta(2^-12)/eta(2^-2) = {ratio:.4}, last three decreasing {decreasing}{}",
                e.name,
                if ok { "" } else { "  <-- fails" }
            ));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 120.0;
    details.push(format!("runtime {secs:.2} s"));
    report(5, pass, &details);
    assert!(pass);
}

#[test]
fn criterion_6_asymptotic_ratio() {
    let mut details = Vec::new();
    let mut pass = true;
    for e in corpus::all() {
        let t_max = 100.0 * e.shift.max(1.0 / e.mu());
        let grid = engine::log_grid(10.0 / e.mu(), t_max, 60).unwrap();
        let rep = estimator::ratio_table(&e.f, &e.law, &grid).unwrap();
        let dev = (rep.ratios.last().unwrap() - 1.0).abs();
        pass &= rep.pass;
        details.push(format!(
            "{}: |ratio - 1| = {dev:.4} at t = {t_max}, trend ok {}{}",
            e.name,
            rep.warnings.is_empty(),
            if rep.pass { "" } else { "  <-- fails" }
        ));
    }
    report(6, pass, &details);
    assert!(pass);
}

#[test]
fn criterion_7_condition_checkers() {
    let cfg = EngineConfig::default();
    let mut details = Vec::new();
    let mut pass = true;
    let mut item = |label: String, ok: bool, details: &mut Vec<String>| {
        pass &= ok;
        details.push(format!("{label}: {}", if ok { "ok" } else { "FAILED" }));
    };

    for name in ["shifted_gamma_j05", "shifted_gamma_j1", "shifted_gamma_j2", "half_power"] {
        let e = corpus::by_name(name).unwrap();
        let r = engine::check_loglim(&e.model, 10.0, &cfg).unwrap();
        item(format!("check_loglim passes on {name} (verdict {:?})", r.verdict), r.passed(), &mut details);
    }
    let m = corpus::counterexample_model(1.0, 1.0).unwrap();
    let r = engine::check_loglim(&m, 10.0, &cfg).unwrap();
    item(
        format!("check_loglim fails on the counterexample with j = 1 (verdict {:?})", r.verdict),
        r.verdict == Verdict::Fail,
        &mut details,
    );

    let e = corpus::by_name("shifted_gamma_j2").unwrap();
    let k = engine::lipschitz_margin(&e.model, 0.5, 2.0, &cfg);
    let mut fine = cfg.clone();
    fine.lipschitz_tau_points = 2 * cfg.lipschitz_tau_points - 1;
    fine.lipschitz_lines = cfg.lipschitz_lines + 4;
    let k_fine = engine::lipschitz_margin(&e.model, 0.5, 2.0, &fine);
    let stable = match (&k, &k_fine) {
        (Ok(a), Ok(b)) => a.is_finite() && (a - b).abs() <= 1e-3 * b,
        _ => false,
    };
    item(format!("lipschitz_margin finite and stable on shifted_gamma_j2 ({k:?} vs {k_fine:?})"), stable, &mut details);
    let e = corpus::by_name("half_power").unwrap();
    let r = engine::lipschitz_margin(&e.model, 0.5, 2.0, &cfg);
    item(
        "lipschitz_margin suggests reclassifying half_power".into(),
        matches!(r, Err(Error::ReclassifySuggested { .. })),
        &mut details,
    );

    let e = corpus::by_name("shifted_gamma_j1").unwrap();
    let r = engine::check_dk(&e.f, &e.law, 10.0, &cfg).unwrap();
    item(format!("check_dk passes on shifted_gamma_j1 (verdict {:?})", r.verdict), r.passed(), &mut details);
    let perturbed = AsymptoticLaw::new(1.1 * e.law.d, e.law.j, e.law.mu).unwrap();
    let r = engine::check_dk(&e.f, &perturbed, 10.0, &cfg).unwrap();
    item(
        format!("check_dk fails with D perturbed by +10% (verdict {:?})", r.verdict),
        r.verdict == Verdict::Fail,
        &mut details,
    );

    let e = corpus::by_name("shifted_gamma_j2").unwrap();
    let r = engine::check_bounded_h(&e.f, &e.law, 10.0, &cfg).unwrap();
    item(
        format!(
            "check_bounded_h passes on shifted_gamma_j2 (verdict {:?}, sup|H| first {:.3e} last {:.3e})",
            r.verdict,
            r.observed[0],
            r.observed[r.observed.len() - 1]
        ),
        r.passed(),
        &mut details,
    );
    let e = corpus::by_name("shifted_gamma_j1").unwrap();
    item(
        "check_bounded_h rejects j = 1".into(),
        matches!(engine::check_bounded_h(&e.f, &e.law, 10.0, &cfg), Err(Error::HypothesisViolation(_))),
        &mut details,
    );

    report(7, pass, &details);
    assert!(pass);
}

#[test]
fn criterion_8_estimator_round_trip() {
    let e = corpus::shifted_gamma(0.7, 1.5, 2.0).unwrap();
    let t: Vec<f64> = (0..2000).map(|i| 80.0 * i as f64 / 1999.0).collect();
    let phi: Vec<f64> = t.iter().map(|t| e.f.eval(*t)).collect();
    let f = DecayFunction::sampled(t, phi).unwrap();
    let fit = estimator::fit_decay_law(&f, [10.0, 80.0]).unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / b;
    let (dm, dj, dd) = (rel(fit.law.mu, e.law.mu), rel(fit.law.j, e.law.j), rel(fit.law.d, e.law.d));
    let pass = dm <= 0.01 && dj <= 0.05 && dd <= 0.05;
    report(
        8,
        pass,
        &[
            "fit window [10, 80] of 2000 samples on [0, 80]".to_string(),
            format!("mu {:.6} (rel {dm:.2e}), j {:.6} (rel {dj:.2e}), D {:.6} (rel {dd:.2e})", fit.law.mu, fit.law.j, fit.law.d),
        ],
    );
    assert!(pass);
}

#[test]
fn criterion_9_rho_machinery() {
    let cfg = EngineConfig::default();
    let grid_ok = cfg.t_grid[0] == 64.0 && cfg.t_grid.iter().all(|t| *t >= 64.0);
    let rejects_low = cfg.clone().with_t_grid(vec![63.0, 100.0]).is_err();
    let e = corpus::by_name("exp_decay").unwrap();
    let rhos: Vec<_> = [50.0, 100.0, 200.0]
        .iter()
        .map(|t| engine::rho(&e.f, &e.law, &cfg, *t).unwrap())
        .collect();
    let monotone = rhos.windows(2).all(|w| w[1].rho <= w[0].rho + 1e-3);
    let pass = grid_ok && rejects_low && monotone && rhos.iter().all(|r| r.argmin_t >= 64.0);
    let mut details = vec![format!(
        "smallest T {} (a = 1), grid below 64 rejected {rejects_low}",
        cfg.t_grid[0]
    )];
    for r in &rhos {
        details.push(format!("rho({}) = {:.6e} at T = {:.4e}", r.t, r.rho, r.argmin_t));
    }
    report(9, pass, &details);
    assert!(pass);
}
