//! Domain types: decay functions, singularity models, asymptotic laws and the
//! reports produced by the checkers.

use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{self, QuadratureOptions};
use crate::specialfn;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Default relative monotonicity tolerance for closed-form functions.
pub const CLOSED_FORM_MONOTONE_TOL: f64 = 1e-12;
/// Default relative monotonicity tolerance for sampled data.
pub const SAMPLED_MONOTONE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    ClosedForm,
    /// Samples on a strictly increasing grid starting at `t = 0`, evaluated by
    /// piecewise-linear interpolation and extrapolated exponentially past the
    /// last sample.
    Sampled { t: Vec<f64>, phi: Vec<f64> },
}

/// A positive, non-increasing function on `[0, ∞)`.
#[derive(Clone)]
pub struct DecayFunction {
    name: String,
    eval: Option<RealFn>,
    derivative: Option<RealFn>,
    exact_transform: Option<ComplexFn>,
    kind: Kind,
    nu_certificate: Option<f64>,
    phi0: f64,
    mu_hint: Option<f64>,
}

impl fmt::Debug for DecayFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DecayFunction")
            .field("name", &self.name)
            .field("kind", &match self.kind {
                Kind::ClosedForm => "closed-form",
                Kind::Sampled { .. } => "sampled",
            })
            .field("phi0", &self.phi0)
            .field("nu_certificate", &self.nu_certificate)
            .field("mu_hint", &self.mu_hint)
            .field("exact_transform", &self.exact_transform.is_some())
            .finish()
    }
}

impl DecayFunction {
    pub fn closed_form(name: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let phi0 = eval(0.0);
        Self {
            name: name.into(),
            eval: Some(Arc::new(eval)),
            derivative: None,
            exact_transform: None,
            kind: Kind::ClosedForm,
            nu_certificate: None,
            phi0,
            mu_hint: None,
        }
    }

    /// Builds a sampled function. The first sample must sit at `t = 0`, the
    /// grid must be strictly increasing and the values non-negative and
    /// non-increasing up to [`SAMPLED_MONOTONE_TOL`].
    pub fn sampled(t: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        if t.is_empty() || t.len() != phi.len() {
            return Err(invalid("sampled data needs equally many t and phi values (at least one)"));
        }
        if t[0] != 0.0 {
            return Err(invalid(format!("first sample must be at t = 0, got t = {}", t[0])));
        }
        if t.iter().chain(phi.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("sampled data must be finite"));
        }
        if let Some(k) = t.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(invalid(format!("t must be strictly increasing (samples {} and {})", k, k + 1)));
        }
        if let Some(k) = phi.iter().position(|&p| p < 0.0) {
            return Err(Error::DomainViolation(format!("negative phi at sample {k}")));
        }
        if let Some(k) = phi
            .windows(2)
            .position(|w| w[1] > w[0] + SAMPLED_MONOTONE_TOL * w[0].max(f64::MIN_POSITIVE))
        {
            return Err(Error::DomainViolation(format!(
                "phi increases between samples {} and {} (t = {})",
                k,
                k + 1,
                t[k + 1]
            )));
        }
        let phi0 = phi[0];
        Ok(Self {
            name: "sampled".into(),
            eval: None,
            derivative: None,
            exact_transform: None,
            kind: Kind::Sampled { t, phi },
            nu_certificate: None,
            phi0,
            mu_hint: None,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_derivative(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn with_exact_transform(mut self, tr: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        self.exact_transform = Some(Arc::new(tr));
        self
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu_certificate = Some(nu);
        self
    }

    pub fn with_mu_hint(mut self, mu: f64) -> Self {
        self.mu_hint = Some(mu);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    pub fn nu_certificate(&self) -> Option<f64> {
        self.nu_certificate
    }

    pub fn mu_hint(&self) -> Option<f64> {
        self.mu_hint
    }

    pub fn has_exact_transform(&self) -> bool {
        self.exact_transform.is_some()
    }

    pub fn default_monotone_tol(&self) -> f64 {
        match self.kind {
            Kind::ClosedForm => CLOSED_FORM_MONOTONE_TOL,
            Kind::Sampled { .. } => SAMPLED_MONOTONE_TOL,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::ClosedForm => (self.eval.as_ref().expect("closed form has an evaluator"))(t),
            Kind::Sampled { t: ts, phi } => {
                if t <= 0.0 {
                    return phi[0];
                }
                let last = ts.len() - 1;
                if t >= ts[last] {
                    let rate = self.extrapolation_rate();
                    return phi[last] * (-rate * (t - ts[last])).exp();
                }
                let k = ts.partition_point(|&s| s <= t) - 1;
                let w = (t - ts[k]) / (ts[k + 1] - ts[k]);
                phi[k] + w * (phi[k + 1] - phi[k])
            }
        }
    }

    /// `phi'(t)`: the supplied derivative, the interpolant's slope for sampled
    /// data, or a central difference.
    pub fn derivative(&self, t: f64) -> f64 {
        if let Some(d) = &self.derivative {
            return d(t);
        }
        match &self.kind {
            Kind::Sampled { t: ts, phi } => {
                let last = ts.len() - 1;
                if last == 0 || t >= ts[last] {
                    return -self.extrapolation_rate() * self.eval(t);
                }
                let k = (ts.partition_point(|&s| s <= t.max(0.0)) - 1).min(last - 1);
                (phi[k + 1] - phi[k]) / (ts[k + 1] - ts[k])
            }
            Kind::ClosedForm => {
                let h = 1e-5 * t.abs().max(1.0);
                if t - h < 0.0 {
                    (-3.0 * self.eval(t) + 4.0 * self.eval(t + h) - self.eval(t + 2.0 * h)) / (2.0 * h)
                } else {
                    (self.eval(t + h) - self.eval(t - h)) / (2.0 * h)
                }
            }
        }
    }

    /// Local logarithmic decay rate `-phi'(t)/phi(t)`.
    pub fn log_decay_rate(&self, t: f64) -> f64 {
        let p = self.eval(t);
        if p <= 0.0 {
            return f64::INFINITY;
        }
        -self.derivative(t) / p
    }

    /// Rate of the exponential tail used past the last sample: `mu_hint` when
    /// present, otherwise the logarithmic slope of the last sample interval.
    pub fn extrapolation_rate(&self) -> f64 {
        if let Some(mu) = self.mu_hint {
            return mu;
        }
        match &self.kind {
            Kind::Sampled { t, phi } if t.len() >= 2 => {
                let n = t.len();
                if phi[n - 1] <= 0.0 || phi[n - 2] <= 0.0 {
                    return f64::INFINITY;
                }
                ((phi[n - 2].ln() - phi[n - 1].ln()) / (t[n - 1] - t[n - 2])).max(0.0)
            }
            _ => 0.0,
        }
    }

    pub fn exact_transform(&self, z: Complex64) -> Option<Complex64> {
        self.exact_transform.as_ref().map(|tr| tr(z))
    }

    /// `∫_0^∞ e^{zt} phi(t) dt`, exactly when a closed form is attached and by
    /// quadrature otherwise.
    pub fn transform(&self, z: Complex64, opts: &QuadratureOptions) -> Result<Complex64> {
        match &self.exact_transform {
            Some(tr) => Ok(tr(z)),
            None => quadrature::laplace(self, z, opts).map(|e| e.value),
        }
    }
}

/// Regularity class of `F` in the singularity representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FClass {
    HolomorphicAtMu,
    ContinuousOnly,
    DkLimit,
}

/// `∫ e^{zt} phi dt = F(z)/(mu - z)^j + H(z)` on the strip `0 < Re z < mu`.
#[derive(Clone)]
pub struct SingularityModel {
    pub mu: f64,
    pub j: f64,
    f: ComplexFn,
    h: ComplexFn,
    pub f_class: FClass,
    pub t_max: f64,
}

impl fmt::Debug for SingularityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SingularityModel")
            .field("mu", &self.mu)
            .field("j", &self.j)
            .field("f_class", &self.f_class)
            .field("t_max", &self.t_max)
            .finish()
    }
}

impl SingularityModel {
    pub fn new(mu: f64, j: f64, f: ComplexFn, h: ComplexFn, f_class: FClass, t_max: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(invalid(format!("mu must be positive and finite, got {mu}")));
        }
        if !(j > 0.0 && j.is_finite()) {
            return Err(invalid(format!("j must be positive and finite, got {j}")));
        }
        if !(t_max > 0.0) {
            return Err(invalid(format!("strip half-height must be positive, got {t_max}")));
        }
        Ok(Self {
            mu,
            j,
            f,
            h,
            f_class,
            t_max,
        })
    }

    pub fn f(&self, z: Complex64) -> Complex64 {
        (self.f)(z)
    }

    pub fn h(&self, z: Complex64) -> Complex64 {
        (self.h)(z)
    }

    pub fn f_evaluator(&self) -> ComplexFn {
        Arc::clone(&self.f)
    }

    pub fn h_evaluator(&self) -> ComplexFn {
        Arc::clone(&self.h)
    }

    /// The right-hand side `F(z)/(mu - z)^j + H(z)` (principal branch).
    pub fn representation(&self, z: Complex64) -> Complex64 {
        self.f(z) / (Complex64::new(self.mu, 0.0) - z).powf(self.j) + self.h(z)
    }

    /// Largest `|F(z1) - F(z2)|` between neighbours of a grid over the closed
    /// strip `beta <= Re z <= mu, |Im z| <= t`, with the mesh width. A crude
    /// continuity check: the gap shrinks with the mesh for continuous `F`.
    pub fn continuity_gap(&self, beta: f64, t: f64, n: usize) -> (f64, f64) {
        let n = n.max(2);
        let re = |i: usize| beta + (self.mu - beta) * i as f64 / (n - 1) as f64;
        let im = |k: usize| -t + 2.0 * t * k as f64 / (n - 1) as f64;
        let mut gap: f64 = 0.0;
        for i in 0..n {
            for k in 0..n {
                let v = self.f(Complex64::new(re(i), im(k)));
                if i + 1 < n {
                    gap = gap.max((self.f(Complex64::new(re(i + 1), im(k))) - v).norm());
                }
                if k + 1 < n {
                    gap = gap.max((self.f(Complex64::new(re(i), im(k + 1))) - v).norm());
                }
            }
        }
        let mesh = ((self.mu - beta) / (n - 1) as f64).max(2.0 * t / (n - 1) as f64);
        (gap, mesh)
    }
}

/// `phi(t) ~ D / Γ(j) · t^{j-1} e^{-mu t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticLaw {
    pub d: f64,
    pub j: f64,
    pub mu: f64,
}

impl AsymptoticLaw {
    pub fn new(d: f64, j: f64, mu: f64) -> Result<Self> {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(invalid(format!("leading constant D must be finite and >= 0, got {d}")));
        }
        if !(j > 0.0 && j.is_finite()) {
            return Err(invalid(format!("exponent j must be positive, got {j}")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(invalid(format!("rate mu must be positive, got {mu}")));
        }
        Ok(Self { d, j, mu })
    }

    /// `D / Γ(j)`.
    pub fn amplitude(&self) -> f64 {
        self.d / specialfn::gamma_unchecked(self.j)
    }

    pub fn predict(&self, t: f64) -> f64 {
        self.amplitude() * t.powf(self.j - 1.0) * (-self.mu * t).exp()
    }

    /// Natural log of the prediction; finite where [`predict`](Self::predict) underflows.
    pub fn ln_predict(&self, t: f64) -> f64 {
        self.amplitude().ln() + (self.j - 1.0) * t.ln() - self.mu * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// The compact strip `beta <= Re z <= mu, |Im z| <= half_height` a report was
/// evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRegion {
    pub beta: f64,
    pub mu: f64,
    pub half_height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: String,
    pub sigma_sequence: Vec<f64>,
    pub observed: Vec<f64>,
    pub verdict: Verdict,
    pub region: EvaluationRegion,
    pub notes: Vec<String>,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaEntry {
    pub sigma: f64,
    pub t: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoEntry {
    pub t: f64,
    pub rho: f64,
    pub argmin_t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeEntry {
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub t_grid: Vec<f64>,
    pub ratios: Vec<f64>,
    pub eta_table: Vec<EtaEntry>,
    pub rho: Vec<RhoEntry>,
    pub envelope: Vec<EnvelopeEntry>,
    pub pass: bool,
    pub tolerance: f64,
    pub warnings: Vec<String>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("empty grid"));
    }
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(invalid("grid points must be finite and non-negative"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("grid must be strictly increasing"));
    }
    Ok(())
}

/// True iff `phi(t_{k+1}) <= phi(t_k) + tol` for consecutive grid points.
pub fn validate_nonincreasing(f: &DecayFunction, grid: &[f64], tol: f64) -> Result<bool> {
    check_grid(grid)?;
    if !(tol >= 0.0) {
        return Err(invalid("tolerance must be non-negative"));
    }
    let values: Vec<f64> = grid.iter().map(|&t| f.eval(t)).collect();
    if let Some(k) = values.iter().position(|v| !(*v >= 0.0)) {
        return Err(Error::DomainViolation(format!("phi({}) = {} is negative", grid[k], values[k])));
    }
    Ok(values.windows(2).all(|w| w[1] <= w[0] + tol))
}

/// Smallest `nu >= 0` making `e^{nu t} phi(t)` non-decreasing across the grid.
pub fn estimate_min_nu(f: &DecayFunction, grid: &[f64]) -> Result<f64> {
    check_grid(grid)?;
    let mut logs = Vec::with_capacity(grid.len());
    for &t in grid {
        let p = f.eval(t);
        if !(p > 0.0) {
            return Err(Error::CannotCertify(format!("phi({t}) = {p} has no logarithm")));
        }
        logs.push(p.ln());
    }
    let nu = grid
        .windows(2)
        .zip(logs.windows(2))
        .map(|(t, l)| (l[0] - l[1]) / (t[1] - t[0]))
        .fold(0.0f64, f64::max);
    Ok(nu)
}

/// Reads `t,phi` samples (header required) into a sampled function.
pub fn read_samples_csv<R: Read>(reader: R) -> Result<DecayFunction> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Csv {
        line: 1,
        message: e.to_string(),
    })?;
    if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "phi" {
        return Err(Error::Csv {
            line: 1,
            message: format!("expected header `t,phi`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut t = Vec::new();
    let mut phi = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Csv {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 2 {
            return Err(Error::Csv {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let parse = |s: &str, what: &str| {
            s.parse::<f64>().map_err(|_| Error::Csv {
                line,
                message: format!("cannot parse {what} value `{s}`"),
            })
        };
        t.push(parse(&record[0], "t")?);
        phi.push(parse(&record[1], "phi")?);
    }
    if t.is_empty() {
        return Err(Error::Csv {
            line: 2,
            message: "no samples".into(),
        });
    }
    DecayFunction::sampled(t, phi).map_err(|e| match e {
        Error::InvalidInput(m) | Error::DomainViolation(m) => Error::Csv { line: 0, message: m },
        other => other,
    })
}

pub fn write_samples_csv<W: Write>(writer: W, t: &[f64], phi: &[f64]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| invalid(format!("csv write failed: {e}"));
    wtr.write_record(["t", "phi"]).map_err(io)?;
    for (a, b) in t.iter().zip(phi) {
        wtr.write_record([a.to_string(), b.to_string()]).map_err(io)?;
    }
    wtr.flush().map_err(|e| invalid(format!("csv write failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn exp_decay() -> DecayFunction {
        DecayFunction::closed_form("exp", |t| (-t).exp())
    }

    #[test]
    fn nonincreasing_examples() {
        assert!(validate_nonincreasing(&exp_decay(), &[0.0, 1.0, 2.0], 0.0).unwrap());
        let bump = DecayFunction::closed_form("bump", |t| t * (-t).exp());
        assert!(!validate_nonincreasing(&bump, &[0.0, 0.5, 1.0, 2.0], 0.0).unwrap());
        let one = DecayFunction::closed_form("one", |_| 1.0);
        assert!(validate_nonincreasing(&one, &[0.0, 3.0, 7.0], 0.0).unwrap());
    }

    #[test]
    fn nonincreasing_errors() {
        assert!(matches!(
            validate_nonincreasing(&exp_decay(), &[], 0.0),
            Err(Error::InvalidInput(_))
        ));
        let neg = DecayFunction::closed_form("neg", |t| -t);
        assert!(matches!(
            validate_nonincreasing(&neg, &[0.0, 1.0], 0.0),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn min_nu_examples() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let f = DecayFunction::closed_form("e2", |t| (-2.0 * t).exp());
        assert_relative_eq!(estimate_min_nu(&f, &grid).unwrap(), 2.0, max_relative = 1e-12);
        let g = DecayFunction::closed_form("shift", |t| (t + 1.0) * (-(t + 1.0)).exp());
        assert!(estimate_min_nu(&g, &grid).unwrap() <= 1.0);
        let one = DecayFunction::closed_form("one", |_| 1.0);
        assert_eq!(estimate_min_nu(&one, &grid).unwrap(), 0.0);
        let zero = DecayFunction::closed_form("zero", |t| if t > 5.0 { 0.0 } else { 1.0 });
        assert!(matches!(estimate_min_nu(&zero, &grid), Err(Error::CannotCertify(_))));
    }

    #[test]
    fn sampled_construction_rules() {
        assert!(DecayFunction::sampled(vec![0.5, 1.0], vec![1.0, 0.5]).is_err());
        assert!(DecayFunction::sampled(vec![0.0, 1.0, 1.0], vec![1.0, 0.5, 0.4]).is_err());
        assert!(matches!(
            DecayFunction::sampled(vec![0.0, 1.0], vec![1.0, 1.1]),
            Err(Error::DomainViolation(_))
        ));
        let f = DecayFunction::sampled(vec![0.0, 1.0, 2.0], vec![1.0, 0.5, 0.25]).unwrap();
        assert_eq!(f.phi0(), 1.0);
        assert_relative_eq!(f.eval(0.5), 0.75);
        assert_relative_eq!(f.extrapolation_rate(), 2f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(f.eval(3.0), 0.125, max_relative = 1e-14);
        assert_relative_eq!(f.derivative(1.5), -0.25);
    }

    #[test]
    fn csv_round_trip_and_diagnostics() {
        let t = vec![0.0, 0.5, 1.25];
        let phi = vec![1.0, 0.6065306597126334, 0.28650479686019015];
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &t, &phi).unwrap();
        let f = read_samples_csv(buf.as_slice()).unwrap();
        match f.kind() {
            Kind::Sampled { t: t2, phi: p2 } => {
                assert_eq!(t2, &t);
                assert_eq!(p2, &phi);
            }
            Kind::ClosedForm => panic!("expected samples"),
        }
        let bad = "t,phi\n0,1\n1,abc\n";
        match read_samples_csv(bad.as_bytes()) {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(read_samples_csv("x,y\n0,1\n".as_bytes()), Err(Error::Csv { line: 1, .. })));
    }

    #[test]
    fn law_prediction() {
        let law = AsymptoticLaw::new(1.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(law.predict(3.0), 3.0 * (-3.0f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(law.ln_predict(900.0), 900f64.ln() - 900.0, max_relative = 1e-14);
        assert!(AsymptoticLaw::new(-1.0, 1.0, 1.0).is_err());
        assert!(AsymptoticLaw::new(1.0, 0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn nonincreasing_is_monotone_in_tol(rate in 0.0f64..3.0, wiggle in 0.0f64..0.1, tol in 0.0f64..0.05, extra in 0.0f64..1.0) {
            let f = DecayFunction::closed_form("w", move |t| (-rate * t).exp() * (1.0 + wiggle * (5.0 * t).sin()).max(0.0));
            let grid: Vec<f64> = (0..60).map(|i| i as f64 * 0.05).collect();
            if validate_nonincreasing(&f, &grid, tol).unwrap() {
                prop_assert!(validate_nonincreasing(&f, &grid, tol + extra).unwrap());
            }
        }

        #[test]
        fn sampled_interpolant_stays_monotone(steps in proptest::collection::vec(0.0f64..0.3, 2..40), probe in 0.0f64..1.0) {
            let mut phi = vec![1.0];
            for s in &steps {
                let last = *phi.last().unwrap();
                phi.push(last * (-s).exp());
            }
            let t: Vec<f64> = (0..phi.len()).map(|i| i as f64 * 0.5).collect();
            let f = DecayFunction::sampled(t.clone(), phi).unwrap();
            let t_end = *t.last().unwrap() + 2.0;
            let a = probe * t_end;
            let b = a + 0.1;
            prop_assert!(f.eval(b) <= f.eval(a) + 1e-15);
        }
    }
}
