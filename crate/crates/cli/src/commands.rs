use std::fs::File;
use std::io::BufReader;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde_json::json;

use tauberkit::corpus::{self, Exemplar};
use tauberkit::engine::{self, EngineConfig};
use tauberkit::estimator;
use tauberkit::model::{self, AsymptoticLaw, DecayFunction, SingularityModel, Verdict};
use tauberkit::quadrature::{alpha_transform, laplace, stieltjes, QuadratureOptions, ROUTE_TOL};
use tauberkit::specialfn::{g_j, h_j, h_j_bound, RegimeJ};
use tauberkit::Error;

use crate::cli::{Condition, CorpusAction, GlobalOpts};
use crate::report::{num, Report};

pub const COUNTEREXAMPLE: &str = "loglim_counterexample";

/// Tolerance overrides shared by every command.
pub struct Settings {
    pub global: GlobalOpts,
}

impl Settings {
    fn quadrature(&self) -> QuadratureOptions {
        let opts = QuadratureOptions::default();
        match self.global.tol {
            Some(t) => opts.with_rel_tol(t),
            None => opts,
        }
    }

    fn engine(&self, base: EngineConfig) -> Result<EngineConfig> {
        let mut cfg = base;
        if let Some((k0, k1)) = self.global.sigma_seq {
            cfg = cfg.with_sigma_range(k0, k1)?;
        }
        if let Some(g) = self.global.t_grid {
            cfg = cfg.with_t_grid(engine::log_grid(g.lo, g.hi, g.n)?)?;
        }
        if let Some(t) = self.global.tol {
            cfg.quadrature = cfg.quadrature.with_rel_tol(t);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn exemplar_engine(&self, e: &Exemplar) -> Result<EngineConfig> {
        self.engine(EngineConfig::for_function(&e.f, e.mu())?)
    }
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn law_json(law: &AsymptoticLaw) -> serde_json::Value {
    json!({ "d": law.d, "j": law.j, "mu": law.mu })
}

// ---- verify-corpus ----

struct Check {
    name: &'static str,
    value: f64,
    threshold: f64,
}

fn corpus_checks(e: &Exemplar, opts: &QuadratureOptions) -> Result<Vec<Check>> {
    let grid: Vec<f64> = (0..=300).map(|i| i as f64 * 0.1 / e.mu().min(1.0)).collect();
    let monotone = model::validate_nonincreasing(&e.f, &grid, 0.0)?;
    let nu = e.f.nu_certificate().context("exemplar without ν certificate")?;
    let nu_excess = model::estimate_min_nu(&e.f, &grid)? - nu;
    let predicted = engine::predict(&e.model)?;
    let a = EngineConfig::for_function(&e.f, e.mu())?.a;

    let mut oracle = 0f64;
    let mut representation = 0f64;
    let mut parts = 0f64;
    let mut routes = 0f64;
    for z in corpus::strip_grid(e.mu()) {
        let exact = e.exact_transform(z);
        let q = laplace(&e.f, z, opts)?.value;
        oracle = oracle.max((q - exact).norm() / (1.0 + exact.norm()));
        representation = representation.max((e.model.representation(z) - exact).norm() / (1.0 + exact.norm()));
        let s = stieltjes(&e.f, z, opts)?.value;
        parts = parts.max((s + e.f.phi0() + z * q).norm() / (1.0 + q.norm()));
        let alpha = alpha_transform(&e.f, a, z, opts)?;
        routes = routes.max(alpha.route_gap.unwrap_or(0.0));
    }
    Ok(vec![
        Check { name: "laplace_oracle", value: oracle, threshold: 1e-8 },
        Check { name: "representation", value: representation, threshold: 1e-9 },
        Check { name: "parts_identity", value: parts, threshold: ROUTE_TOL },
        Check { name: "alpha_routes", value: routes, threshold: ROUTE_TOL },
        Check { name: "nonincreasing", value: if monotone { 0.0 } else { 1.0 }, threshold: 0.0 },
        Check { name: "nu_certificate", value: nu_excess.max(0.0), threshold: 1e-9 },
        Check { name: "predicted_d", value: (predicted.d - e.law.d).abs(), threshold: 1e-10 },
    ])
}

pub fn verify_corpus(s: &Settings) -> Result<Report> {
    let opts = s.quadrature();
    let exemplars = corpus::all();
    let results: Vec<Result<Vec<Check>>> = exemplars.par_iter().map(|e| corpus_checks(e, &opts)).collect();

    let mut rep = Report::new("verify-corpus", vec!["exemplar", "check", "value", "threshold", "pass"]);
    let mut entries = Vec::new();
    for (e, checks) in exemplars.iter().zip(results) {
        let checks = checks.with_context(|| format!("exemplar {}", e.name))?;
        for c in checks {
            let ok = c.value <= c.threshold;
            rep.pass &= ok;
            rep.row(vec![e.name.clone(), c.name.into(), num(c.value), num(c.threshold), ok.to_string()]);
            entries.push(json!({
                "exemplar": e.name, "check": c.name, "value": c.value,
                "threshold": c.threshold, "pass": ok,
            }));
        }
    }
    rep.set("checks", entries)?;
    Ok(rep)
}

// ---- analyze ----

pub fn analyze(
    input: &std::path::Path,
    window: (f64, f64),
    ratio_tol: f64,
    ratio_grid: Option<crate::cli::Grid>,
) -> Result<Report> {
    let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let f = model::read_samples_csv(BufReader::new(file))
        .with_context(|| format!("reading {}", input.display()))?;
    let fit = estimator::fit_decay_law(&f, [window.0, window.1])?;
    let grid = match ratio_grid {
        Some(g) => engine::log_grid(g.lo, g.hi, g.n)?,
        None => engine::log_grid(window.0, window.1, 20)?,
    };
    let table = estimator::ratio_table_with_tolerance(&f, &fit.law, &grid, ratio_tol)?;

    let mut rep = Report::new("analyze", vec!["t", "phi", "predicted", "ratio"]);
    rep.pass = table.pass && !fit.inconclusive;
    for (t, r) in table.t_grid.iter().zip(&table.ratios) {
        rep.row(vec![num(*t), num(f.eval(*t)), num(fit.law.predict(*t)), num(*r)]);
    }
    rep.set("input", input.display().to_string())?;
    rep.set("law", law_json(&fit.law))?;
    rep.set("fit", &fit)?;
    rep.set(
        "ratio_table",
        json!({
            "t": table.t_grid, "ratio": table.ratios, "pass": table.pass,
            "tolerance": table.tolerance, "warnings": table.warnings,
        }),
    )?;
    Ok(rep)
}

// ---- check ----

enum Target {
    Exemplar(Box<Exemplar>),
    Counterexample(SingularityModel),
}

impl Target {
    fn resolve(name: &str, j: Option<f64>) -> Result<Self> {
        if name == COUNTEREXAMPLE {
            return Ok(Self::Counterexample(corpus::counterexample_model(1.0, j.unwrap_or(1.0))?));
        }
        if j.is_some() {
            bail!(Error::InvalidInput(format!("--j only applies to {COUNTEREXAMPLE}")));
        }
        Ok(Self::Exemplar(Box::new(corpus::by_name(name)?)))
    }

    fn model(&self) -> &SingularityModel {
        match self {
            Self::Exemplar(e) => &e.model,
            Self::Counterexample(m) => m,
        }
    }

    fn function(&self) -> Result<(&DecayFunction, &AsymptoticLaw)> {
        match self {
            Self::Exemplar(e) => Ok((&e.f, &e.law)),
            Self::Counterexample(_) => bail!(Error::InvalidInput(format!(
                "{COUNTEREXAMPLE} has no decay function; use loglim, lipschitz or ab"
            ))),
        }
    }

    fn config(&self, s: &Settings) -> Result<EngineConfig> {
        match self {
            Self::Exemplar(e) => s.exemplar_engine(e),
            Self::Counterexample(_) => s.engine(EngineConfig::default()),
        }
    }
}

pub fn check(s: &Settings, exemplar: &str, condition: Condition, t: f64, beta: f64, j: Option<f64>) -> Result<Report> {
    let target = Target::resolve(exemplar, j)?;
    let cfg = target.config(s)?;
    let model = target.model();
    let report = match condition {
        Condition::Loglim => Some(engine::check_loglim(model, t, &cfg)?),
        Condition::Dk => {
            let (f, law) = target.function()?;
            Some(engine::check_dk(f, law, t, &cfg)?)
        }
        Condition::BoundedH => {
            let (f, law) = target.function()?;
            Some(engine::check_bounded_h(f, law, t, &cfg)?)
        }
        Condition::Lipschitz | Condition::Ab => None,
    };

    let mut rep = Report::new("check", vec!["sigma", "observed", "verdict"]);
    rep.set("exemplar", exemplar)?;
    rep.set("T", t)?;
    if let Some(r) = report {
        rep.pass = r.passed();
        for (sg, o) in r.sigma_sequence.iter().zip(&r.observed) {
            rep.row(vec![num(*sg), num(*o), verdict_str(r.verdict).into()]);
        }
        rep.set("condition", &r.condition)?;
        rep.set("report", &r)?;
        return Ok(rep);
    }
    match condition {
        Condition::Lipschitz => lipschitz(&mut rep, model, beta, t, &cfg)?,
        Condition::Ab => ab(&mut rep, model, t, &cfg)?,
        _ => unreachable!("handled above"),
    }
    Ok(rep)
}

fn lipschitz(rep: &mut Report, model: &SingularityModel, beta: f64, t: f64, cfg: &EngineConfig) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        bail!(Error::InvalidInput(format!("--beta must lie in (0, 1), got {beta}")));
    }
    rep.header = vec!["condition", "value", "verdict"];
    rep.set("condition", "lipschitz")?;
    rep.set("beta", beta * model.mu)?;
    match engine::lipschitz_margin(model, beta * model.mu, t, cfg) {
        Ok(k) => {
            rep.row(vec!["lipschitz".into(), num(k), "pass".into()]);
            rep.set("lipschitz_constant", k)?;
            rep.set("verdict", Verdict::Pass)?;
        }
        Err(Error::ReclassifySuggested { growth, estimates }) => {
            rep.pass = false;
            rep.row(vec!["lipschitz".into(), num(growth), "reclassify".into()]);
            rep.set("verdict", Verdict::Fail)?;
            rep.set("reclassify", json!({ "growth": growth, "estimates": estimates }))?;
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn ab(rep: &mut Report, model: &SingularityModel, t: f64, cfg: &EngineConfig) -> Result<()> {
    let rows: Vec<_> = cfg
        .sigma_sequence
        .par_iter()
        .map(|&sg| engine::diagnostics_ab(model, cfg, sg * model.mu.min(1.0), t))
        .collect::<tauberkit::Result<_>>()?;
    rep.header = vec!["sigma", "a_j", "a_bound", "b_j", "b_bound"];
    let mut bounded = true;
    for d in &rows {
        bounded &= d.a_j <= d.a_bound * (1.0 + 1e-9) && d.b_j <= d.b_bound * (1.0 + 1e-9);
        rep.row(vec![num(d.sigma), num(d.a_j), num(d.a_bound), num(d.b_j), num(d.b_bound)]);
    }
    let a: Vec<f64> = rows.iter().map(|d| d.a_j).collect();
    let b: Vec<f64> = rows.iter().map(|d| d.b_j).collect();
    let (va, vb) = (engine::limit_verdict(&a, cfg), engine::limit_verdict(&b, cfg));
    rep.pass = bounded && va == Verdict::Pass && vb == Verdict::Pass;
    rep.set("condition", "ab")?;
    rep.set("bounds_hold", bounded)?;
    rep.set("a_verdict", va)?;
    rep.set("b_verdict", vb)?;
    rep.set("diagnostics", &rows)?;
    Ok(())
}

// ---- eta-scan ----

pub fn eta_scan(s: &Settings, exemplar: &str, ts: &[f64]) -> Result<Report> {
    let e = corpus::by_name(exemplar)?;
    let cfg = s.exemplar_engine(&e)?;
    let sigmas: Vec<f64> = cfg.sigma_sequence.iter().map(|sg| sg * e.mu().min(1.0)).collect();
    let mut sorted = ts.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    if sorted.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        bail!(Error::InvalidInput("--T values must be positive".into()));
    }
    let profiles: Vec<Vec<f64>> = sigmas
        .par_iter()
        .map(|&sg| engine::eta_profile(&e.f, &e.law, &cfg, sg, &sorted))
        .collect::<tauberkit::Result<_>>()?;

    let mut rep = Report::new("eta-scan", vec!["sigma", "T", "eta"]);
    let mut entries = Vec::new();
    for (sg, prof) in sigmas.iter().zip(&profiles) {
        for (t, eta) in sorted.iter().zip(prof) {
            rep.row(vec![num(*sg), num(*t), num(*eta)]);
            entries.push(json!({ "sigma": sg, "T": t, "eta": eta }));
        }
    }
    let mut verdicts = Vec::new();
    for (k, t) in sorted.iter().enumerate() {
        let column: Vec<f64> = profiles.iter().map(|p| p[k]).collect();
        let v = engine::limit_verdict(&column, &cfg);
        rep.pass &= v == Verdict::Pass;
        verdicts.push(json!({ "T": t, "verdict": v, "decay": column.last().unwrap() / column[0] }));
    }
    rep.set("exemplar", exemplar)?;
    rep.set("a", cfg.a)?;
    rep.set("entries", entries)?;
    rep.set("verdicts", verdicts)?;
    Ok(rep)
}

// ---- rho ----

pub fn rho(s: &Settings, exemplar: &str, times: &[f64], constant: Option<f64>) -> Result<Report> {
    let e = corpus::by_name(exemplar)?;
    let mut cfg = s.exemplar_engine(&e)?;
    if let Some(c) = constant {
        if !(c > 0.0 && c.is_finite()) {
            bail!(Error::InvalidInput(format!("--C must be positive, got {c}")));
        }
        cfg.envelope_constant = c;
    }
    let entries: Vec<_> = times
        .par_iter()
        .map(|&t| {
            let r = engine::rho(&e.f, &e.law, &cfg, t)?;
            let (lower, upper) = engine::envelope_band(&e.law, r.rho, cfg.envelope_constant, t);
            Ok((r, lower, upper, e.f.eval(t)))
        })
        .collect::<tauberkit::Result<_>>()?;

    let mut rep = Report::new("rho", vec!["t", "rho", "argmin_T", "lower", "upper", "phi"]);
    let mut out = Vec::new();
    for (r, lower, upper, phi) in &entries {
        rep.row(vec![num(r.t), num(r.rho), num(r.argmin_t), num(*lower), num(*upper), num(*phi)]);
        out.push(json!({
            "t": r.t, "rho": r.rho, "argmin_T": r.argmin_t,
            "lower": lower, "upper": upper, "phi": phi,
        }));
    }
    rep.set("exemplar", exemplar)?;
    rep.set("envelope_constant", cfg.envelope_constant)?;
    rep.set("law", law_json(&e.law))?;
    rep.set("entries", out)?;
    Ok(rep)
}

// ---- specialfn ----

pub fn specialfn(s: &Settings, js: &[f64]) -> Result<Report> {
    let (k0, k1) = s.global.sigma_seq.unwrap_or((2, 14));
    let ts = match s.global.t_grid {
        Some(g) => engine::log_grid(g.lo, g.hi, g.n)?,
        None => vec![0.1, 1.0, 10.0, 100.0],
    };
    let mut rep = Report::new("specialfn", vec!["j", "regime", "sigma", "T", "g_j", "h_j", "h_j_bound", "dominated"]);
    let mut out = Vec::new();
    for &j in js {
        let regime = RegimeJ::new(j)?.regime;
        let regime_name = serde_json::to_value(regime)?.as_str().unwrap_or_default().to_string();
        for k in k0..=k1 {
            let sigma = 2f64.powi(-k);
            let g = g_j(sigma, j)?;
            for &t in &ts {
                let h = h_j(sigma, j, t)?;
                let hb = h_j_bound(sigma, j, t)?;
                let ok = h <= hb * (1.0 + 1e-9);
                rep.pass &= ok;
                rep.row(vec![num(j), regime_name.clone(), num(sigma), num(t), num(g), num(h), num(hb), ok.to_string()]);
                out.push(json!({
                    "j": j, "regime": regime, "sigma": sigma, "T": t,
                    "g_j": g, "h_j": h, "h_j_bound": hb, "dominated": ok,
                }));
            }
        }
    }
    rep.set("entries", out)?;
    Ok(rep)
}

// ---- corpus ----

pub fn corpus(action: &CorpusAction) -> Result<Report> {
    match action {
        CorpusAction::List => {
            let mut rep = Report::new("corpus list", vec!["name", "mu", "j", "d", "phi0", "nu", "shift"]);
            let mut out = Vec::new();
            for e in corpus::all() {
                let nu = e.f.nu_certificate().unwrap_or(f64::NAN);
                rep.row(vec![
                    e.name.clone(), num(e.mu()), num(e.j()), num(e.law.d),
                    num(e.f.phi0()), num(nu), num(e.shift),
                ]);
                out.push(json!({
                    "name": e.name, "law": law_json(&e.law), "phi0": e.f.phi0(),
                    "nu": nu, "shift": e.shift, "f_class": e.model.f_class,
                    "provenance": e.provenance,
                }));
            }
            rep.set("exemplars", out)?;
            Ok(rep)
        }
        CorpusAction::Dump { name, t_max, samples } => {
            let e = corpus::by_name(name)?;
            let t_max = t_max.unwrap_or(100.0 / e.mu());
            if !(t_max > 0.0 && t_max.is_finite()) || *samples < 2 {
                bail!(Error::InvalidInput("need --t-max > 0 and --samples >= 2".into()));
            }
            let n = *samples;
            let t: Vec<f64> = (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect();
            let phi: Vec<f64> = t.par_iter().map(|&x| e.f.eval(x)).collect();
            let mut rep = Report::new("corpus dump", vec!["t", "phi"]);
            for (a, b) in t.iter().zip(&phi) {
                rep.row(vec![num(*a), num(*b)]);
            }
            rep.set("name", &e.name)?;
            rep.set("law", law_json(&e.law))?;
            rep.set("provenance", &e.provenance)?;
            rep.set("samples", json!({ "t": t, "phi": phi }))?;
            Ok(rep)
        }
    }
}
