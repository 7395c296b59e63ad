//! The Tauberian engine: law prediction, the effective error machinery
//! `G`, `η`, `ρ` and the envelope, the `A_j`/`B_j` split, and numerical
//! checkers for each hypothesis regime.
//!
//! Checker verdicts are numerical evidence along finite σ sequences, never
//! proofs.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{
    AsymptoticLaw, ConditionReport, DecayFunction, EnvelopeEntry, EvaluationRegion, RhoEntry, SingularityModel,
    Verdict,
};
use crate::quadrature::{alpha_transform, integrate, QuadratureOptions};
use crate::specialfn::{g_j, h_j};

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Rounding allowance, in units of machine epsilon, for quantities obtained
/// by cancelling two terms.
const CANCELLATION_ULPS: f64 = 1e3;

fn dyadic(k0: i32, k1: i32) -> Vec<f64> {
    (k0..=k1).map(|k| 2f64.powi(-k)).collect()
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || n == 0 {
        return Err(invalid(format!("log grid needs 0 < lo <= hi and n >= 1, got [{lo}, {hi}] x {n}")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (l0, l1) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..n).map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp()).collect();
    g[0] = lo;
    g[n - 1] = hi;
    Ok(g)
}

/// Smallest admissible `T` for shift `a`.
pub fn min_admissible_t(a: f64) -> f64 {
    32.0 * (a + 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Shift with `mu + a > nu`.
    pub a: f64,
    /// Decreasing σ values for `η` scans and the `H` checkers.
    pub sigma_sequence: Vec<f64>,
    /// Decreasing σ values for the `g_j` limit check. Longer than
    /// `sigma_sequence` because moduli like `√σ |log σ|` decay slowly.
    pub loglim_sigma_sequence: Vec<f64>,
    /// Candidate `T` values for the `ρ` infimum, all `>= 32(a+1)`.
    pub t_grid: Vec<f64>,
    /// The `O(ρ)` constant of the envelope.
    pub envelope_constant: f64,
    /// Points of the τ grid used for suprema over `|τ| <= T`.
    pub tau_grid_points: usize,
    /// Pass when the final observation is below this fraction of the first.
    pub decay_fraction: f64,
    /// Fail when the last three observations stay above this fraction.
    pub fail_fraction: f64,
    /// Observations below this are treated as exact zeros.
    pub zero_floor: f64,
    /// Relative change allowed between refinements for "stable" verdicts.
    pub stability_tol: f64,
    /// Number of lines approaching `Re z = mu` in the Lipschitz scan.
    pub lipschitz_lines: usize,
    /// τ points per line in the Lipschitz scan.
    pub lipschitz_tau_points: usize,
    pub quadrature: QuadratureOptions,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self::new(1.0).expect("a = 1 is admissible")
    }
}

impl EngineConfig {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(invalid(format!("shift a must be positive, got {a}")));
        }
        Ok(Self {
            a,
            sigma_sequence: dyadic(2, 14),
            loglim_sigma_sequence: dyadic(2, 24),
            t_grid: log_grid(min_admissible_t(a), 1e6, 40)?,
            envelope_constant: 1.0,
            tau_grid_points: 513,
            decay_fraction: 0.05,
            fail_fraction: 0.5,
            zero_floor: 1e-13,
            stability_tol: 0.05,
            lipschitz_lines: 12,
            lipschitz_tau_points: 65,
            quadrature: QuadratureOptions {
                rel_tol: 1e-8,
                abs_tol: 1e-15,
                max_subdivisions: 20_000,
                ..Default::default()
            },
        })
    }

    /// Config with `a = max(1, nu - mu + 1)`, so `mu + a > nu` holds.
    pub fn for_function(f: &DecayFunction, mu: f64) -> Result<Self> {
        let a = f.nu_certificate().map_or(1.0, |nu| (nu - mu + 1.0).max(1.0));
        Self::new(a)
    }

    /// Replaces both σ sequences by `2^{-k}`, `k = k0..=k1`.
    pub fn with_sigma_range(mut self, k0: i32, k1: i32) -> Result<Self> {
        if k0 >= k1 || k0 < 0 {
            return Err(invalid(format!("sigma range needs 0 <= k0 < k1, got {k0}:{k1}")));
        }
        self.sigma_sequence = dyadic(k0, k1);
        self.loglim_sigma_sequence = dyadic(k0, k1);
        Ok(self)
    }

    pub fn with_t_grid(mut self, grid: Vec<f64>) -> Result<Self> {
        self.t_grid = grid;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(invalid(format!("shift a must be positive, got {}", self.a)));
        }
        for (name, seq) in [("sigma_sequence", &self.sigma_sequence), ("loglim_sigma_sequence", &self.loglim_sigma_sequence)] {
            if seq.len() < 3 {
                return Err(invalid(format!("{name} needs at least three values")));
            }
            if seq.iter().any(|s| !(*s > 0.0 && s.is_finite())) || seq.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(invalid(format!("{name} must be positive and strictly decreasing")));
            }
        }
        let t_min = min_admissible_t(self.a);
        if self.t_grid.is_empty() {
            return Err(invalid("T grid is empty"));
        }
        if let Some(bad) = self.t_grid.iter().find(|t| !(**t >= t_min * (1.0 - 1e-12)) || !t.is_finite()) {
            return Err(invalid(format!("T grid value {bad} is below 32(a+1) = {t_min}")));
        }
        if self.t_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("T grid must be strictly increasing"));
        }
        if !(self.envelope_constant >= 0.0) {
            return Err(invalid("envelope constant must be non-negative"));
        }
        if self.tau_grid_points < 3 || self.lipschitz_tau_points < 3 {
            return Err(invalid("τ grids need at least three points"));
        }
        if self.lipschitz_lines < 4 {
            return Err(invalid("Lipschitz scan needs at least four lines"));
        }
        if !(self.decay_fraction > 0.0 && self.fail_fraction > self.decay_fraction) {
            return Err(invalid("need 0 < decay_fraction < fail_fraction"));
        }
        self.quadrature.validate()
    }

    fn check_sigmas(&self, seq: &[f64], mu: f64) -> Result<()> {
        if let Some(s) = seq.iter().find(|s| !(**s < 0.5 * mu)) {
            return Err(invalid(format!("sigma = {s} must lie in (0, mu/2) with mu = {mu}")));
        }
        Ok(())
    }
}

/// The law `(F(mu), j, mu)` of a model.
pub fn predict(model: &SingularityModel) -> Result<AsymptoticLaw> {
    let fm = model.f(Complex64::new(model.mu, 0.0));
    if !fm.re.is_finite() || !fm.im.is_finite() {
        return Err(Error::ModelInconsistency(format!("F(mu) is not finite: {fm}")));
    }
    if fm.im.abs() > 1e-9 * fm.norm() {
        return Err(Error::ModelInconsistency(format!(
            "F(mu) = {fm} has a significant imaginary part"
        )));
    }
    if fm.re < 0.0 {
        return Err(Error::ModelInconsistency(format!("F(mu) = {} is negative", fm.re)));
    }
    AsymptoticLaw::new(fm.re, model.j, model.mu)
}

fn check_g_point(law: &AsymptoticLaw, z: Complex64) -> Result<()> {
    if !(z.re > 0.0 && z.re < law.mu) {
        return Err(Error::OutOfRegion(format!("G needs 0 < Re z < mu = {}, got z = {z}", law.mu)));
    }
    Ok(())
}

/// `G(z) = ∫ e^{(mu-z)t} phi dt - phi(0)/(a+z) - D/z^j` with principal `z^j`.
pub fn g_eval(f: &DecayFunction, law: &AsymptoticLaw, cfg: &EngineConfig, z: Complex64) -> Result<Complex64> {
    check_g_point(law, z)?;
    let lap = f.transform(Complex64::new(law.mu, 0.0) - z, &cfg.quadrature)?;
    Ok(lap - f.phi0() / (cfg.a + z) - law.d * z.powf(-law.j))
}

/// `G(z)` from its definition `(a+z)^{-1} ∫ e^{-(a+z)t} dα(t) - D/z^j`; a
/// cross-check of [`g_eval`].
pub fn g_eval_definition(
    f: &DecayFunction,
    law: &AsymptoticLaw,
    cfg: &EngineConfig,
    z: Complex64,
) -> Result<Complex64> {
    check_g_point(law, z)?;
    let f = f.clone().with_mu_hint(law.mu);
    let alpha = alpha_transform(&f, cfg.a, z, &cfg.quadrature)?;
    Ok(alpha.value / (cfg.a + z) - law.d * z.powf(-law.j))
}

fn eta_integrand<'a>(
    f: &'a DecayFunction,
    law: &'a AsymptoticLaw,
    cfg: &'a EngineConfig,
    sigma: f64,
) -> impl Fn(f64) -> f64 + 'a {
    move |tau: f64| {
        let g2 = g_eval(f, law, cfg, Complex64::new(2.0 * sigma, tau));
        let g1 = g_eval(f, law, cfg, Complex64::new(sigma, tau));
        match (g2, g1) {
            (Ok(a), Ok(b)) => (a - b).norm(),
            _ => f64::NAN,
        }
    }
}

fn eta_opts(cfg: &EngineConfig) -> QuadratureOptions {
    cfg.quadrature
}

/// Breakpoints on `[lo, hi]` refined geometrically towards `τ = 0` at the
/// scale `sigma`.
fn tau_breakpoints(lo: f64, hi: f64, sigma: f64) -> Vec<f64> {
    let mut pts = vec![lo];
    let mut p = sigma;
    while p < hi {
        if p > lo {
            pts.push(p);
        }
        p *= 4.0;
    }
    pts.push(hi);
    pts
}

fn check_eta_args(law: &AsymptoticLaw, sigma: f64, t: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < 0.5 * law.mu) {
        return Err(invalid(format!("eta needs 0 < sigma < mu/2, got sigma = {sigma}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("eta needs T >= 0, got {t}")));
    }
    Ok(())
}

/// `∫_{lo}^{hi} |G(2σ+iτ) - G(σ+iτ)| dτ` for `0 <= lo < hi`.
fn eta_piece(f: &DecayFunction, law: &AsymptoticLaw, cfg: &EngineConfig, sigma: f64, lo: f64, hi: f64) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let est = integrate(eta_integrand(f, law, cfg, sigma), &tau_breakpoints(lo, hi, sigma), &eta_opts(cfg))?;
    if !est.value.is_finite() {
        return Err(Error::DomainViolation(format!("G could not be evaluated at sigma = {sigma}")));
    }
    Ok(est.value)
}

/// `η(σ, T) = σ^{j-1} ∫_{-T}^{T} |G(2σ+iτ) - G(σ+iτ)| dτ`.
///
/// For real `phi`, `G(conj z) = conj G(z)`, so the integral is twice the
/// integral over `[0, T]`.
pub fn eta(f: &DecayFunction, law: &AsymptoticLaw, cfg: &EngineConfig, sigma: f64, t: f64) -> Result<f64> {
    check_eta_args(law, sigma, t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * sigma.powf(law.j - 1.0) * eta_piece(f, law, cfg, sigma, 0.0, t)?)
}

/// `η(σ, T)` for every `T` of an increasing list, integrating each gap once.
pub fn eta_profile(
    f: &DecayFunction,
    law: &AsymptoticLaw,
    cfg: &EngineConfig,
    sigma: f64,
    ts: &[f64],
) -> Result<Vec<f64>> {
    if ts.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("T values must be strictly increasing"));
    }
    for t in ts {
        check_eta_args(law, sigma, *t)?;
    }
    let mut knots = vec![0.0];
    knots.extend_from_slice(ts);
    let pieces: Vec<Result<f64>> = knots
        .par_windows(2)
        .map(|w| eta_piece(f, law, cfg, sigma, w[0], w[1]))
        .collect();
    let scale = 2.0 * sigma.powf(law.j - 1.0);
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(ts.len());
    for p in pieces {
        acc += p?;
        out.push(scale * acc);
    }
    Ok(out)
}

/// `ρ(t) = inf_{T >= 32(a+1)} { 1/T + η(1/t, T) + (Tt)^{-j} }` over the
/// configured grid, refined by golden-section search around the best grid
/// point. Any value returned is an upper bound for the infimum.
pub fn rho(f: &DecayFunction, law: &AsymptoticLaw, cfg: &EngineConfig, t: f64) -> Result<RhoEntry> {
    cfg.validate()?;
    if !(t >= 1.0 && t.is_finite()) {
        return Err(invalid(format!("rho needs t >= 1, got {t}")));
    }
    let sigma = 1.0 / t;
    let grid = &cfg.t_grid;
    let etas = eta_profile(f, law, cfg, sigma, grid)?;
    let objective = |big_t: f64, eta: f64| 1.0 / big_t + eta + (big_t * t).powf(-law.j);
    let values: Vec<f64> = grid.iter().zip(&etas).map(|(bt, e)| objective(*bt, *e)).collect();
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("grid is non-empty");
    let mut result = RhoEntry {
        t,
        rho: values[best],
        argmin_t: grid[best],
    };
    if grid.len() < 2 {
        return Ok(result);
    }
    // Golden-section search in log T between the neighbours of the best point.
    let lo_idx = best.saturating_sub(1);
    let hi_idx = (best + 1).min(grid.len() - 1);
    let base_t = grid[lo_idx];
    let base_eta = etas[lo_idx];
    let eval = |log_t: f64| -> Result<(f64, f64)> {
        let bt = log_t.exp().clamp(grid[lo_idx], grid[hi_idx]);
        let e = base_eta + 2.0 * sigma.powf(law.j - 1.0) * eta_piece(f, law, cfg, sigma, base_t, bt)?;
        Ok((bt, objective(bt, e)))
    };
    let (mut a, mut b) = (grid[lo_idx].ln(), grid[hi_idx].ln());
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    for _ in 0..30 {
        if (b - a).abs() < 1e-6 {
            break;
        }
        if fc.1 < fd.1 {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = eval(d)?;
        }
    }
    for (bt, v) in [fc, fd] {
        if v < result.rho {
            result.rho = v;
            result.argmin_t = bt;
        }
    }
    Ok(result)
}

/// Band `(D/Γ(j) ± C ρ) t^{j-1} e^{-mu t}` with the lower edge clamped at 0.
pub fn envelope_band(law: &AsymptoticLaw, rho: f64, constant: f64, t: f64) -> (f64, f64) {
    let shape = ((law.j - 1.0) * t.ln() - law.mu * t).exp();
    let amp = law.amplitude();
    (((amp - constant * rho) * shape).max(0.0), (amp + constant * rho) * shape)
}

/// The envelope for `phi(t)` implied by the effective theorem, with
/// `C = cfg.envelope_constant`.
pub fn envelope(f: &DecayFunction, law: &AsymptoticLaw, cfg: &EngineConfig, t: f64) -> Result<EnvelopeEntry> {
    let r = rho(f, law, cfg, t)?;
    let (lower, upper) = envelope_band(law, r.rho, cfg.envelope_constant, t);
    Ok(EnvelopeEntry {
        t,
        lower,
        upper,
        phi: f.eval(t),
    })
}

/// Smallest `C` for which `phi(t)` lies in the envelope at every given `t`.
pub fn calibrate_envelope_constant(
    f: &DecayFunction,
    law: &AsymptoticLaw,
    cfg: &EngineConfig,
    ts: &[f64],
) -> Result<f64> {
    let mut c: f64 = 0.0;
    for &t in ts {
        let r = rho(f, law, cfg, t)?;
        let shape = ((law.j - 1.0) * t.ln() - law.mu * t).exp();
        let gap = (f.eval(t) / shape - law.amplitude()).abs();
        c = c.max(gap / r.rho);
    }
    Ok(c)
}

/// Trend verdict for a sequence that should tend to zero.
pub fn limit_verdict(values: &[f64], cfg: &EngineConfig) -> Verdict {
    if values.iter().any(|v| !v.is_finite()) || values.len() < 3 {
        return Verdict::Inconclusive;
    }
    if values.iter().all(|v| *v <= cfg.zero_floor) {
        return Verdict::Pass;
    }
    let first = values[0];
    let n = values.len();
    let tail = &values[n - 3..];
    let decreasing = tail.windows(2).all(|w| w[1] < w[0]) || tail.iter().all(|v| *v <= cfg.zero_floor);
    if values[n - 1] < cfg.decay_fraction * first && decreasing {
        return Verdict::Pass;
    }
    let floor = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    if first > cfg.zero_floor && floor >= cfg.fail_fraction * first {
        return Verdict::Fail;
    }
    Verdict::Inconclusive
}

/// Symmetric τ grid on `[-t, t]`.
fn tau_grid(t: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| -t + 2.0 * t * i as f64 / (n - 1) as f64).collect()
}

/// Supremum of `g` over `[-t, t]`: a parallel grid scan followed by a
/// golden-section refinement around the grid maximizer. NaN values are
/// propagated.
pub fn sup_over_tau(g: impl Fn(f64) -> f64 + Sync, t: f64, n: usize) -> f64 {
    if t == 0.0 {
        return g(0.0);
    }
    let grid = tau_grid(t, n.max(3));
    let values: Vec<f64> = grid.par_iter().map(|tau| g(*tau)).collect();
    if values.iter().any(|v| v.is_nan()) {
        return f64::NAN;
    }
    let (best, mut sup) = values
        .iter()
        .cloned()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid is non-empty");
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(grid.len() - 1)];
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..40 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - GOLDEN * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + GOLDEN * (b - a);
            gd = g(d);
        }
    }
    for v in [gc, gd] {
        if v.is_nan() {
            return f64::NAN;
        }
        sup = sup.max(v);
    }
    sup
}

fn check_strip_height(model: &SingularityModel, t: f64) -> Result<()> {
    if !(t > 0.0 && t <= model.t_max) {
        return Err(invalid(format!("T = {t} must lie in (0, T_max = {}]", model.t_max)));
    }
    Ok(())
}

/// Limit condition `|g_j(σ)| sup_{|τ|<=T} |F(mu-2σ-iτ) - F(mu-σ-iτ)| -> 0`
/// along `cfg.loglim_sigma_sequence`.
pub fn check_loglim(model: &SingularityModel, t: f64, cfg: &EngineConfig) -> Result<ConditionReport> {
    cfg.validate()?;
    check_strip_height(model, t)?;
    let sigmas = cfg.loglim_sigma_sequence.clone();
    cfg.check_sigmas(&sigmas, model.mu)?;
    let mu = model.mu;
    let mut observed = Vec::with_capacity(sigmas.len());
    let mut notes = Vec::new();
    for &s in &sigmas {
        let diff = sup_over_tau(
            |tau| (model.f(Complex64::new(mu - 2.0 * s, -tau)) - model.f(Complex64::new(mu - s, -tau))).norm(),
            t,
            cfg.tau_grid_points,
        );
        if diff.is_nan() {
            notes.push(format!("F could not be evaluated near sigma = {s:e}"));
        }
        observed.push(g_j(s, model.j)?.abs() * diff);
    }
    let verdict = limit_verdict(&observed, cfg);
    notes.push(format!(
        "|g_j(sigma)| times the sup over {} tau points with golden refinement; T = {t}",
        cfg.tau_grid_points
    ));
    notes.push("tested for finitely many T only".to_string());
    Ok(ConditionReport {
        condition: "loglim".into(),
        sigma_sequence: sigmas.clone(),
        observed,
        verdict,
        region: EvaluationRegion {
            beta: mu - 2.0 * sigmas[0],
            mu,
            half_height: t,
        },
        notes,
    })
}

/// Lipschitz constant of `F` on `beta <= Re z <= mu, |Im z| <= T` from
/// central differences on lines `Re z = mu - δ_m`, `δ_m = (mu-beta)/2^{m+1}`.
///
/// Difference quotients that keep growing towards `Re z = mu` (the last three
/// line-to-line ratios all above 1.1) yield
/// [`Error::ReclassifySuggested`]: `F` is then likely only continuous there.
pub fn lipschitz_margin(model: &SingularityModel, beta: f64, t: f64, cfg: &EngineConfig) -> Result<f64> {
    cfg.validate()?;
    let mu = model.mu;
    if !(beta > 0.0 && beta < mu) {
        return Err(invalid(format!("beta must lie in (0, mu), got {beta}")));
    }
    check_strip_height(model, t)?;
    let mut estimates = Vec::with_capacity(cfg.lipschitz_lines + 1);
    let lines: Vec<f64> = std::iter::once(mu - beta)
        .chain((0..cfg.lipschitz_lines).map(|m| (mu - beta) / 2f64.powi(m as i32 + 1)))
        .collect();
    for delta in lines {
        let h = 0.25 * delta;
        let x = mu - delta;
        let k = sup_over_tau(
            |tau| {
                let up = model.f(Complex64::new(x + h, tau));
                let down = model.f(Complex64::new(x - h, tau));
                (up - down).norm() / (2.0 * h)
            },
            t,
            cfg.lipschitz_tau_points,
        );
        if !k.is_finite() {
            return Err(Error::DomainViolation(format!("difference quotient not finite at Re z = {x}")));
        }
        estimates.push(k);
    }
    let growth: Vec<f64> = estimates
        .windows(2)
        .map(|w| if w[0] > 1e-300 { w[1] / w[0] } else { 1.0 })
        .collect();
    let last = &growth[growth.len() - 3..];
    if last.iter().all(|g| *g > 1.1) {
        return Err(Error::ReclassifySuggested {
            growth: last[last.len() - 1],
            estimates,
        });
    }
    Ok(estimates.iter().cloned().fold(0.0, f64::max))
}

/// `L(z) - D/(mu-z)^j`, the remainder that the limit conditions on `H` look at.
fn h_remainder(f: &DecayFunction, law: &AsymptoticLaw, cfg: &EngineConfig, z: Complex64) -> Result<Complex64> {
    let lap = f.transform(z, &cfg.quadrature)?;
    Ok(lap - law.d * (Complex64::new(law.mu, 0.0) - z).powf(-law.j))
}

fn h_sup(f: &DecayFunction, law: &AsymptoticLaw, cfg: &EngineConfig, sigma: f64, t: f64) -> f64 {
    sup_over_tau(
        |tau| {
            h_remainder(f, law, cfg, Complex64::new(law.mu - sigma, tau))
                .map(|v| v.norm())
                .unwrap_or(f64::NAN)
        },
        t,
        cfg.tau_grid_points,
    )
}

fn check_h_hypothesis(law: &AsymptoticLaw, t: f64, needs: &str, ok: bool) -> Result<()> {
    if !ok {
        return Err(Error::HypothesisViolation(format!("{needs}, got j = {}", law.j)));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("T must be positive, got {t}")));
    }
    Ok(())
}

/// Uniform convergence of `H(z) = L(z) - D/(mu-z)^j` as `Re z -> mu`, seen
/// through the successive line gaps
/// `sup_τ |H(mu-σ_{k+1}-iτ) - H(mu-σ_k-iτ)|`. Requires `j >= 1`.
pub fn check_dk(f: &DecayFunction, law: &AsymptoticLaw, t: f64, cfg: &EngineConfig) -> Result<ConditionReport> {
    check_h_hypothesis(law, t, "the uniform-limit condition needs j >= 1", law.j >= 1.0)?;
    cfg.validate()?;
    let sigmas = cfg.sigma_sequence.clone();
    cfg.check_sigmas(&sigmas, law.mu)?;
    let mu = law.mu;
    let mut observed = Vec::with_capacity(sigmas.len() - 1);
    let mut notes = Vec::new();
    let mut rounding_hits = 0;
    for w in sigmas.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        let gap = sup_over_tau(
            |tau| {
                let a = h_remainder(f, law, cfg, Complex64::new(mu - s1, -tau));
                let b = h_remainder(f, law, cfg, Complex64::new(mu - s0, -tau));
                match (a, b) {
                    (Ok(a), Ok(b)) => (a - b).norm(),
                    _ => f64::NAN,
                }
            },
            t,
            cfg.tau_grid_points,
        );
        if gap.is_nan() {
            notes.push(format!("transform failed between sigma = {s0:e} and {s1:e}"));
        }
        // H is a difference of two terms of size D/σ^j; gaps below their
        // rounding level carry no information.
        let rounding = CANCELLATION_ULPS * f64::EPSILON * law.d * s1.powf(-law.j);
        if gap <= rounding {
            rounding_hits += 1;
            observed.push(0.0);
        } else {
            observed.push(gap);
        }
    }
    if rounding_hits > 0 {
        notes.push(format!("{rounding_hits} gaps at rounding level recorded as 0"));
    }
    let verdict = limit_verdict(&observed, cfg);
    notes.push(format!("observed[k] pairs sigma[k] with sigma[k+1]; T = {t}"));
    Ok(ConditionReport {
        condition: "dk".into(),
        sigma_sequence: sigmas.clone(),
        observed,
        verdict,
        region: EvaluationRegion {
            beta: mu - sigmas[0],
            mu,
            half_height: t,
        },
        notes,
    })
}

/// Boundedness of `H(z) = L(z) - D/(mu-z)^j` near `Re z = mu` for `j > 1`:
/// pass when `sup_τ |H|` on the lines `Re z = mu - σ_k` settles (the last
/// three relative changes within `stability_tol`), fail when it keeps
/// growing.
pub fn check_bounded_h(f: &DecayFunction, law: &AsymptoticLaw, t: f64, cfg: &EngineConfig) -> Result<ConditionReport> {
    check_h_hypothesis(law, t, "the bounded-H shortcut needs j > 1", law.j > 1.0)?;
    cfg.validate()?;
    let sigmas = cfg.sigma_sequence.clone();
    cfg.check_sigmas(&sigmas, law.mu)?;
    let observed: Vec<f64> = sigmas.iter().map(|s| h_sup(f, law, cfg, *s, t)).collect();
    let mut notes = Vec::new();
    let n = observed.len();
    let verdict = if observed.iter().any(|v| !v.is_finite()) {
        notes.push("H could not be evaluated on every line".into());
        Verdict::Inconclusive
    } else {
        let changes: Vec<f64> = observed[n - 4..]
            .windows(2)
            .map(|w| (w[1] - w[0]).abs() / w[1].abs().max(cfg.zero_floor))
            .collect();
        let increasing = observed[n - 4..].windows(2).all(|w| w[1] > w[0]);
        if changes.iter().all(|c| *c <= cfg.stability_tol) {
            Verdict::Pass
        } else if increasing && observed[n - 1] > 2.0 * observed[0] {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    };
    notes.push(format!("observed[k] = sup over |tau| <= {t} of |H(mu - sigma_k - i tau)|"));
    Ok(ConditionReport {
        condition: "bounded_h".into(),
        sigma_sequence: sigmas.clone(),
        observed,
        verdict,
        region: EvaluationRegion {
            beta: law.mu - sigmas[0],
            mu: law.mu,
            half_height: t,
        },
        notes,
    })
}

/// The two halves of the η bound and their a-priori bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbDiagnostics {
    pub sigma: f64,
    pub t: f64,
    pub a_j: f64,
    pub b_j: f64,
    /// `sup_τ |F(mu-2σ-iτ) - F(mu-σ-iτ)| · h_j(σ)`.
    pub a_bound: f64,
    /// `j (sup_{|τ|<=√σ} |F(mu-2σ-iτ) - F(mu)| · h_{j+1}(σ) + 4 C_1 I_j)`.
    ///
    /// The factor `j` multiplies: `|(2σ+iτ)^{-j} - (σ+iτ)^{-j}|` is at most
    /// `j σ (σ² + τ²)^{-(j+1)/2}`, and dividing by `j` instead fails for
    /// `j > 1` (at `τ = 0`, `j = 2` the kernel is `12/σ²` while `σ^{-2}`
    /// times `j` is `16/σ²` and divided by `j` only `4/σ²`).
    pub b_bound: f64,
    /// Strip maximum of `|F|` entering `b_bound`.
    pub c1: f64,
    pub i_j: f64,
}

/// `I_j = ∫_{arctan(√σ/σ)}^{arctan(T/σ)} (cos u)^{j-1} du`, zero when
/// `T <= √σ`.
fn i_j(sigma: f64, j: f64, t: f64, opts: &QuadratureOptions) -> Result<f64> {
    let root = sigma.sqrt();
    if t <= root {
        return Ok(0.0);
    }
    // With v = π/2 - u the integrand is (sin v)^{j-1} on [arctan(σ/T), arctan(σ/√σ)];
    // integrate in log v to resolve the endpoint growth for j < 1.
    let lo = (sigma / t).atan().ln();
    let hi = (sigma / root).atan().ln();
    let est = integrate(
        |s: f64| {
            let v = s.exp();
            v.sin().powf(j - 1.0) * v
        },
        &[lo, 0.5 * (lo + hi), hi],
        opts,
    )?;
    Ok(est.value)
}

/// `A_j(σ)` and `B_j(σ)` by quadrature in τ together with their bounds.
pub fn diagnostics_ab(model: &SingularityModel, cfg: &EngineConfig, sigma: f64, t: f64) -> Result<AbDiagnostics> {
    cfg.validate()?;
    check_strip_height(model, t)?;
    let (mu, j) = (model.mu, model.j);
    if !(sigma > 0.0 && sigma < 0.5 * mu) {
        return Err(invalid(format!("sigma must lie in (0, mu/2), got {sigma}")));
    }
    let f_mu = model.f(Complex64::new(mu, 0.0));
    let near = |tau: f64| model.f(Complex64::new(mu - 2.0 * sigma, -tau));
    let far = |tau: f64| model.f(Complex64::new(mu - sigma, -tau));
    let opts = eta_opts(cfg);
    let pts = tau_breakpoints(0.0, t, sigma);
    let both = |g: &(dyn Fn(f64) -> f64 + Sync)| -> Result<f64> {
        let pos = integrate(g, &pts, &opts)?.value;
        let neg = integrate(|x: f64| g(-x), &pts, &opts)?.value;
        Ok(pos + neg)
    };
    let scale = sigma.powf(j - 1.0);
    let a_j = scale * both(&|tau| (near(tau) - far(tau)).norm() * Complex64::new(sigma, tau).norm().powf(-j))?;
    let kernel = |tau: f64| {
        (Complex64::new(2.0 * sigma, tau).powf(-j) - Complex64::new(sigma, tau).powf(-j)).norm()
    };
    let b_j = scale * both(&|tau| (near(tau) - f_mu).norm() * kernel(tau))?;
    let sup_diff = sup_over_tau(|tau| (near(tau) - far(tau)).norm(), t, cfg.tau_grid_points);
    let a_bound = sup_diff * h_j(sigma, j, t)?;
    let root = sigma.sqrt().min(t);
    let sup_near = sup_over_tau(|tau| (near(tau) - f_mu).norm(), root, cfg.tau_grid_points);
    let c1 = sup_over_tau(|tau| near(tau).norm(), t, cfg.tau_grid_points).max(f_mu.norm());
    let ij = i_j(sigma, j, t, &opts)?;
    let b_bound = j * (sup_near * h_j(sigma, j + 1.0, t)? + 4.0 * c1 * ij);
    Ok(AbDiagnostics {
        sigma,
        t,
        a_j,
        b_j,
        a_bound,
        b_bound,
        c1,
        i_j: ij,
    })
}
