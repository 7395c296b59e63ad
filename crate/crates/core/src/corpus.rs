//! Closed-form exemplars with exact transforms and known singularity data.
//!
//! | name | phi(t) | mu | j |
//! |---|---|---|---|
//! | `exp_decay` | `e^{-t}` | 1 | 1 |
//! | `shifted_gamma_j1` | `e^{-(t+1)}` | 1 | 1 |
//! | `shifted_gamma_j2` | `(t+1) e^{-(t+1)}` | 1 | 2 |
//! | `shifted_gamma_j05` | `(t+1)^{-1/2} e^{-2(t+1)}` | 2 | 1/2 |
//! | `shifted_gamma_j15` | `(t+2)^{1/2} e^{-0.7(t+2)}` | 0.7 | 3/2 |
//! | `half_power` | `e^{-(t+1)} (1 + (t+1)^{-1/2})` | 1 | 1 |
//! | `mixture_exp` | `e^{-t} + e^{-2t}` | 1 | 1 |
//! | `mixture_gamma` | `2 (t+1) e^{-(t+1)} + e^{-3t}` | 1 | 2 |
//!
//! The half-power family does not extend below `j = 1/2`: a square-root
//! modulus of continuity times `σ^{j-1}` no longer vanishes there.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::engine;
use crate::error::{invalid, Result};
use crate::model::{AsymptoticLaw, ComplexFn, DecayFunction, FClass, SingularityModel};
use crate::specialfn::{gamma, lower_incomplete_gamma_scaled, upper_incomplete_gamma};

/// Default strip half-height of the exemplar models.
pub const STRIP_HALF_HEIGHT: f64 = 1e3;

/// Family and parameters an exemplar was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Provenance {
    ShiftedGamma { mu: f64, j: f64, c: f64 },
    HalfPower { mu: f64, c: f64 },
    Mixture { first: Box<Provenance>, second: Box<Provenance>, w1: f64, w2: f64 },
}

#[derive(Clone, Debug)]
pub struct Exemplar {
    pub name: String,
    pub f: DecayFunction,
    pub model: SingularityModel,
    pub law: AsymptoticLaw,
    /// The shift `c` of the leading family; sets the time scale of the
    /// pre-asymptotic regime.
    pub shift: f64,
    pub provenance: Provenance,
}

impl Exemplar {
    /// The closed-form transform `∫ e^{zt} phi(t) dt`.
    pub fn exact_transform(&self, z: Complex64) -> Complex64 {
        self.f.exact_transform(z).expect("exemplars carry exact transforms")
    }

    pub fn mu(&self) -> f64 {
        self.model.mu
    }

    pub fn j(&self) -> f64 {
        self.model.j
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        let name = name.into();
        self.f = self.f.with_name(name.clone());
        self.name = name;
        self
    }
}

fn unwrap_special(v: Result<Complex64>) -> Complex64 {
    v.unwrap_or(Complex64::new(f64::NAN, f64::NAN))
}

/// `phi(t) = (t + c)^{j-1} e^{-mu (t + c)}`.
///
/// The exact transform is `e^{-zc} Γ(j, c(mu - z)) / (mu - z)^j`. It is split
/// as `F(z) = Γ(j) e^{-zc}` and `H(z) = -c^j e^{-zc} γ*(j, c(mu - z))` with
/// the entire `γ*(s, x) = x^{-s} γ(s, x)`, so both parts are holomorphic
/// through `z = mu` for every `j`.
pub fn shifted_gamma(mu: f64, j: f64, c: f64) -> Result<Exemplar> {
    if !(mu > 0.0 && mu.is_finite()) || !(j > 0.0 && j.is_finite()) || !c.is_finite() {
        return Err(invalid(format!("shifted_gamma needs mu > 0, j > 0, finite c; got ({mu}, {j}, {c})")));
    }
    let threshold = ((j - 1.0) / mu).max(0.0);
    if c < threshold * (1.0 - 1e-12) || c < 0.0 {
        return Err(invalid(format!(
            "shift c = {c} below the monotonicity threshold {threshold} for (mu, j) = ({mu}, {j})"
        )));
    }
    if j < 1.0 && c <= 0.0 {
        return Err(invalid("j < 1 needs a positive shift c"));
    }
    let gj = gamma(j)?;
    let phi = move |t: f64| (t + c).powf(j - 1.0) * (-mu * (t + c)).exp();
    let dphi = move |t: f64| phi(t) * ((j - 1.0) / (t + c) - mu);
    let transform = move |z: Complex64| {
        let w = Complex64::new(mu, 0.0) - z;
        let upper = if c == 0.0 {
            Complex64::new(gj, 0.0)
        } else {
            unwrap_special(upper_incomplete_gamma(j, c * w))
        };
        (-z * c).exp() * upper / w.powf(j)
    };
    let nu = if j >= 1.0 { mu } else { mu + (1.0 - j) / c };
    let f = DecayFunction::closed_form(format!("shifted_gamma({mu},{j},{c})"), phi)
        .with_derivative(dphi)
        .with_exact_transform(transform)
        .with_nu(nu)
        .with_mu_hint(mu);
    let f_eval: ComplexFn = Arc::new(move |z: Complex64| gj * (-z * c).exp());
    let h_eval: ComplexFn = Arc::new(move |z: Complex64| {
        if c == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let w = Complex64::new(mu, 0.0) - z;
        -c.powf(j) * (-z * c).exp() * unwrap_special(lower_incomplete_gamma_scaled(j, c * w))
    });
    let model = SingularityModel::new(mu, j, f_eval, h_eval, FClass::HolomorphicAtMu, STRIP_HALF_HEIGHT)?;
    let law = engine::predict(&model)?;
    Ok(Exemplar {
        name: format!("shifted_gamma({mu},{j},{c})"),
        f,
        model,
        law,
        shift: c,
        provenance: Provenance::ShiftedGamma { mu, j, c },
    })
}

/// `phi = w1 phi1 + w2 phi2` with the singularity of `e1` leading.
pub fn mixture(e1: &Exemplar, e2: &Exemplar, w1: f64, w2: f64) -> Result<Exemplar> {
    if !(w1 > 0.0 && w2 > 0.0) {
        return Err(invalid("mixture weights must be positive"));
    }
    if !(e1.mu() < e2.mu()) {
        return Err(invalid(format!(
            "mixture needs mu1 < mu2 strictly (got {} and {})",
            e1.mu(),
            e2.mu()
        )));
    }
    let (f1, f2) = (e1.f.clone(), e2.f.clone());
    let (d1, d2) = (e1.f.clone(), e2.f.clone());
    let (t1, t2) = (e1.f.clone(), e2.f.clone());
    let nu = e1
        .f
        .nu_certificate()
        .zip(e2.f.nu_certificate())
        .map(|(a, b)| a.max(b));
    let mut f = DecayFunction::closed_form(format!("mixture({},{})", e1.name, e2.name), move |t| {
        w1 * f1.eval(t) + w2 * f2.eval(t)
    })
    .with_derivative(move |t| w1 * d1.derivative(t) + w2 * d2.derivative(t))
    .with_exact_transform(move |z| {
        w1 * t1.exact_transform(z).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
            + w2 * t2.exact_transform(z).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    })
    .with_mu_hint(e1.mu());
    if let Some(nu) = nu {
        f = f.with_nu(nu);
    }
    let m1 = e1.model.clone();
    let m1h = e1.model.clone();
    let second = e2.f.clone();
    let f_eval: ComplexFn = Arc::new(move |z| w1 * m1.f(z));
    let h_eval: ComplexFn = Arc::new(move |z| {
        w1 * m1h.h(z) + w2 * second.exact_transform(z).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    });
    let model = SingularityModel::new(e1.mu(), e1.j(), f_eval, h_eval, e1.model.f_class, e1.model.t_max)?;
    let law = engine::predict(&model)?;
    Ok(Exemplar {
        name: format!("mixture({},{})", e1.name, e2.name),
        f,
        model,
        law,
        shift: e1.shift,
        provenance: Provenance::Mixture {
            first: Box::new(e1.provenance.clone()),
            second: Box::new(e2.provenance.clone()),
            w1,
            w2,
        },
    })
}

/// `phi(t) = e^{-mu(t+c)} + (t+c)^{-1/2} e^{-mu(t+c)}` with `j = 1` and
/// `F(z) = e^{-zc} [Γ(1, c(mu-z)) + (mu-z)^{1/2} Γ(1/2, c(mu-z))]`, which is
/// continuous but not holomorphic at `z = mu`.
pub fn half_power(mu: f64, c: f64) -> Result<Exemplar> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(invalid(format!("half_power needs mu > 0, got {mu}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid(format!("half_power needs c > 0, got {c}")));
    }
    let phi = move |t: f64| (-mu * (t + c)).exp() * (1.0 + (t + c).powf(-0.5));
    let dphi = move |t: f64| {
        let u = t + c;
        (-mu * u).exp() * (-mu * (1.0 + u.powf(-0.5)) - 0.5 * u.powf(-1.5))
    };
    let f_of = move |z: Complex64| {
        let w = Complex64::new(mu, 0.0) - z;
        let x = c * w;
        (-z * c).exp() * ((-x).exp() + w.sqrt() * unwrap_special(upper_incomplete_gamma(0.5, x)))
    };
    let transform = move |z: Complex64| {
        let w = Complex64::new(mu, 0.0) - z;
        let x = c * w;
        (-z * c).exp() * ((-x).exp() / w + unwrap_special(upper_incomplete_gamma(0.5, x)) / w.sqrt())
    };
    // log-derivative of (1 + u^{-1/2}) is largest in magnitude at u = c.
    let nu = mu + 1.0 / (2.0 * c * (1.0 + c.sqrt()));
    let f = DecayFunction::closed_form(format!("half_power({mu},{c})"), phi)
        .with_derivative(dphi)
        .with_exact_transform(transform)
        .with_nu(nu)
        .with_mu_hint(mu);
    let model = SingularityModel::new(
        mu,
        1.0,
        Arc::new(f_of),
        Arc::new(|_| Complex64::new(0.0, 0.0)),
        FClass::ContinuousOnly,
        STRIP_HALF_HEIGHT,
    )?;
    let law = engine::predict(&model)?;
    Ok(Exemplar {
        name: format!("half_power({mu},{c})"),
        f,
        model,
        law,
        shift: c,
        provenance: Provenance::HalfPower { mu, c },
    })
}

/// An evaluator that is continuous on the closed strip yet violates the
/// `g_1` limit condition.
///
/// With `s = mu - Re z`, `F = 1 + A(s) cos(π log2 s)` and
/// `A(s) = 1 / (1 + |ln s|)`, `F = 1` for `s <= 0`. Doubling `s` flips the
/// cosine, so at dyadic `σ`
/// `|F(mu - 2σ) - F(mu - σ)| = A(2σ) + A(σ) ≈ 2/|ln σ|` and
/// `|g_1(σ)|` times that difference tends to 2. `A -> 0` keeps `F`
/// continuous at `Re z = mu`. For `j > 1` the same difference still tends to
/// zero, only at the slow rate `1/|ln σ|`.
pub fn loglim_counterexample(mu: f64) -> Result<ComplexFn> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(invalid(format!("counterexample needs mu > 0, got {mu}")));
    }
    Ok(Arc::new(move |z: Complex64| {
        let s = mu - z.re;
        if s <= 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let amp = 1.0 / (1.0 + s.ln().abs());
        Complex64::new(1.0 + amp * (std::f64::consts::PI * s.log2()).cos(), 0.0)
    }))
}

/// Wraps the counterexample evaluator into a model with exponent `j`.
pub fn counterexample_model(mu: f64, j: f64) -> Result<SingularityModel> {
    SingularityModel::new(
        mu,
        j,
        loglim_counterexample(mu)?,
        Arc::new(|_| Complex64::new(0.0, 0.0)),
        FClass::ContinuousOnly,
        STRIP_HALF_HEIGHT,
    )
}

/// Names accepted by [`by_name`], in registry order.
pub const NAMES: [&str; 8] = [
    "exp_decay",
    "shifted_gamma_j1",
    "shifted_gamma_j2",
    "shifted_gamma_j05",
    "shifted_gamma_j15",
    "half_power",
    "mixture_exp",
    "mixture_gamma",
];

pub fn by_name(name: &str) -> Result<Exemplar> {
    let e = match name {
        "exp_decay" => shifted_gamma(1.0, 1.0, 0.0)?,
        "shifted_gamma_j1" => shifted_gamma(1.0, 1.0, 1.0)?,
        "shifted_gamma_j2" => shifted_gamma(1.0, 2.0, 1.0)?,
        "shifted_gamma_j05" => shifted_gamma(2.0, 0.5, 1.0)?,
        "shifted_gamma_j15" => shifted_gamma(0.7, 1.5, 2.0)?,
        "half_power" => half_power(1.0, 1.0)?,
        "mixture_exp" => mixture(&shifted_gamma(1.0, 1.0, 0.0)?, &shifted_gamma(2.0, 1.0, 0.0)?, 1.0, 1.0)?,
        "mixture_gamma" => mixture(&shifted_gamma(1.0, 2.0, 1.0)?, &shifted_gamma(3.0, 1.0, 0.0)?, 2.0, 1.0)?,
        other => {
            return Err(invalid(format!(
                "unknown exemplar `{other}` (known: {})",
                NAMES.join(", ")
            )))
        }
    };
    Ok(e.with_name(name))
}

/// Every registered exemplar.
pub fn all() -> Vec<Exemplar> {
    NAMES
        .iter()
        .map(|n| by_name(n).expect("registry entries are valid"))
        .collect()
}

/// The `5 x 5` strip grid `Re z ∈ [0.05 mu, 0.95 mu]`, `Im z ∈ [-5, 5]`.
pub fn strip_grid(mu: f64) -> Vec<Complex64> {
    let mut pts = Vec::with_capacity(25);
    for i in 0..5 {
        let re = mu * (0.05 + 0.9 * i as f64 / 4.0);
        for k in 0..5 {
            pts.push(Complex64::new(re, -5.0 + 2.5 * k as f64));
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{estimate_min_nu, validate_nonincreasing};
    use crate::quadrature::{laplace, QuadratureOptions};
    use approx::assert_relative_eq;

    #[test]
    fn exp_decay_is_the_trivial_member() {
        let e = shifted_gamma(1.0, 1.0, 0.0).unwrap();
        let z = Complex64::new(0.25, 0.5);
        let exact = 1.0 / (Complex64::new(1.0, 0.0) - z);
        assert!((e.exact_transform(z) - exact).norm() < 1e-15);
        assert_relative_eq!(e.law.d, 1.0);
        assert_relative_eq!(e.f.phi0(), 1.0);
    }

    #[test]
    fn shifted_j2_documented_values() {
        let e = shifted_gamma(1.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(e.f.phi0(), (-1.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(e.law.d, (-1.0f64).exp(), max_relative = 1e-14);
        let v = e.exact_transform(Complex64::new(0.3, 0.0));
        assert!((v.re - 1.2763).abs() < 1e-4, "{v}");
        let q = laplace(&e.f, Complex64::new(0.3, 0.0), &QuadratureOptions::default()).unwrap().value;
        assert_relative_eq!(q.re, v.re, max_relative = 1e-10);
    }

    #[test]
    fn shifted_j05_nu_certificate() {
        let e = shifted_gamma(2.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(e.f.nu_certificate().unwrap(), 2.5);
        let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
        assert!(estimate_min_nu(&e.f, &grid).unwrap() <= 2.5 + 1e-12);
    }

    #[test]
    fn shifted_gamma_rejects_non_monotone_shift() {
        assert!(shifted_gamma(1.0, 2.0, 0.5).is_err());
        assert!(shifted_gamma(1.0, 0.5, 0.0).is_err());
        assert!(shifted_gamma(-1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn mixture_examples() {
        let m = by_name("mixture_exp").unwrap();
        assert_relative_eq!(m.law.d, 1.0, max_relative = 1e-14);
        let z = Complex64::new(0.4, 1.0);
        let h = m.model.h(z);
        assert!((h - 1.0 / (Complex64::new(2.0, 0.0) - z)).norm() < 1e-14);
        let g = by_name("mixture_gamma").unwrap();
        assert_relative_eq!(g.law.d, 2.0 * (-1.0f64).exp(), max_relative = 1e-14);
        let a = shifted_gamma(3.0, 1.0, 0.0).unwrap();
        let b = shifted_gamma(1.0, 2.0, 1.0).unwrap();
        assert!(mixture(&a, &b, 1.0, 1.0).is_err());
        assert!(mixture(&b, &b, 1.0, 1.0).is_err());
        assert!(mixture(&b, &a, 0.0, 1.0).is_err());
    }

    #[test]
    fn half_power_documented_values() {
        let e = half_power(1.0, 1.0).unwrap();
        assert_relative_eq!(e.law.d, (-1.0f64).exp(), max_relative = 1e-14);
        assert_eq!(e.model.f_class, FClass::ContinuousOnly);
        assert!(half_power(1.0, 0.0).is_err());
    }

    #[test]
    fn counterexample_is_continuous_at_the_boundary() {
        let f = loglim_counterexample(1.0).unwrap();
        for k in 2..40 {
            let s = 2f64.powi(-k);
            let v = f(Complex64::new(1.0 - s, 3.0));
            assert!((v - 1.0).norm() <= 1.0 / (1.0 + s.ln().abs()) + 1e-15);
        }
        let model = counterexample_model(1.0, 1.0).unwrap();
        let (coarse, _) = model.continuity_gap(0.5, 1.0, 9);
        let (fine, _) = model.continuity_gap(0.5, 1.0, 65);
        assert!(fine < coarse);
    }

    #[test]
    fn registry_invariants() {
        let opts = QuadratureOptions::default();
        for e in all() {
            let grid: Vec<f64> = (0..=300).map(|i| i as f64 * 0.1).collect();
            assert!(validate_nonincreasing(&e.f, &grid, 0.0).unwrap(), "{}", e.name);
            let nu = e.f.nu_certificate().unwrap();
            assert!(estimate_min_nu(&e.f, &grid).unwrap() <= nu + 1e-9, "{}", e.name);
            assert!((engine::predict(&e.model).unwrap().d - e.law.d).abs() <= 1e-10);
            for z in strip_grid(e.mu()) {
                let exact = e.exact_transform(z);
                let rep = e.model.representation(z);
                assert!((exact - rep).norm() <= 1e-9 * (1.0 + exact.norm()), "{} at {z}", e.name);
            }
            let z = Complex64::new(0.5 * e.mu(), 1.0);
            let q = laplace(&e.f, z, &opts).unwrap().value;
            assert!((q - e.exact_transform(z)).norm() <= 1e-8 * (1.0 + q.norm()), "{}", e.name);
        }
    }

    #[test]
    fn unknown_name_is_rejected() {
        assert!(by_name("nope").is_err());
    }
}
