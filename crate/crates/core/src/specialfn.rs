//! Γ, the incomplete Γ used by the exemplar transforms, the gauge `g_j` and
//! the kernel integral `h_j` with its regime bounds.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, integrate_semi_infinite, QuadratureOptions};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ for positive arguments without validation. Integers up to 20 are exact.
pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if x == x.floor() && (1.0..=20.0).contains(&x) {
        return (1..x as u64).map(|k| k as f64).product();
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    // Split the power so large arguments overflow as late as possible.
    let half = t.powf(0.5 * (x + 0.5));
    (2.0 * PI).sqrt() * half * half * (-t).exp() * acc
}

/// Γ(j) for `j > 0`.
pub fn gamma(j: f64) -> Result<f64> {
    if !(j > 0.0) || !j.is_finite() {
        return Err(invalid(format!("gamma needs a positive finite argument, got {j}")));
    }
    let g = gamma_unchecked(j);
    if !g.is_finite() {
        return Err(Error::DomainViolation(format!("gamma({j}) overflows")));
    }
    Ok(g)
}

/// `x^{-s} γ(s, x) = Σ (-x)^n / (n! (s + n))`, entire in `x`. Only used for
/// `|x| <= 1`.
fn lower_scaled_series(s: f64, x: Complex64) -> Complex64 {
    let mut sum = Complex64::new(1.0 / s, 0.0);
    let mut power = Complex64::new(1.0, 0.0);
    for n in 1..200 {
        power *= -x / n as f64;
        let term = power / (s + n as f64);
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

fn on_negative_axis(x: Complex64) -> bool {
    x.im == 0.0 && x.re < 0.0
}

/// `∫_0^∞ (x + r)^{s-1} e^{-r} dr` along the horizontal ray from `x`.
fn ray_integral(s: f64, x: Complex64) -> Result<Complex64> {
    let scale = (x + 1.0).norm().powf(s - 1.0).max(1e-300);
    let opts = QuadratureOptions {
        rel_tol: 1e-14,
        abs_tol: 1e-17 * scale,
        ..Default::default()
    };
    let integrand = |r: f64| (x + r).powf(s - 1.0) * (-r).exp();
    let tail = |b: f64| {
        let m = (x + b).norm();
        let rate = if s > 1.0 { 1.0 - (s - 1.0) / m } else { 1.0 };
        if rate > 0.0 {
            m.powf(s - 1.0) * (-b).exp() / rate
        } else {
            f64::INFINITY
        }
    };
    integrate_semi_infinite(integrand, 0.0, tail, 2.0, &opts).map(|e| e.value)
}

/// Upper incomplete gamma `Γ(s, x) = ∫_x^∞ u^{s-1} e^{-u} du` for complex `x`
/// off the negative real axis, principal branch.
///
/// Small arguments (`|x| <= 1`) use `Γ(s) - x^s γ*(s, x)` with the entire
/// series `γ*`; larger ones integrate along the ray from `x` to `x + ∞`.
pub fn upper_incomplete_gamma(s: f64, x: Complex64) -> Result<Complex64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(invalid(format!("incomplete gamma needs s > 0, got {s}")));
    }
    if !x.re.is_finite() || !x.im.is_finite() {
        return Err(invalid("incomplete gamma argument must be finite"));
    }
    if x == Complex64::new(0.0, 0.0) {
        return gamma(s).map(|g| Complex64::new(g, 0.0));
    }
    if s == s.floor() && s <= 20.0 {
        // Γ(n, x) = (n-1)! e^{-x} Σ_{k<n} x^k / k!
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..s as u32 {
            term *= x / k as f64;
            sum += term;
        }
        return Ok(gamma_unchecked(s) * (-x).exp() * sum);
    }
    if x.norm() <= 1.0 {
        let g = gamma(s)?;
        return Ok(g - x.powf(s) * lower_scaled_series(s, x));
    }
    if on_negative_axis(x) {
        return Err(invalid("incomplete gamma argument on the negative real axis"));
    }
    let value = (-x).exp() * ray_integral(s, x)?;
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::DomainViolation(format!("incomplete gamma overflows at s = {s}, x = {x}")));
    }
    Ok(value)
}

/// `x^{-s} γ(s, x)`, the entire part of the lower incomplete gamma.
pub fn lower_incomplete_gamma_scaled(s: f64, x: Complex64) -> Result<Complex64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(invalid(format!("incomplete gamma needs s > 0, got {s}")));
    }
    if x.norm() <= 1.0 {
        return Ok(lower_scaled_series(s, x));
    }
    let g = gamma(s)?;
    Ok((g - upper_incomplete_gamma(s, x)?) * x.powf(-s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `0 < j < 1`
    Below1,
    /// `j = 1`
    One,
    /// `1 < j < 2`
    Between1And2,
    /// `j >= 2`
    AtLeast2,
}

/// A validated exponent together with its regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeJ {
    pub j: f64,
    pub regime: Regime,
}

impl RegimeJ {
    pub fn new(j: f64) -> Result<Self> {
        if !(j > 0.0) || !j.is_finite() {
            return Err(invalid(format!("j must be positive and finite, got {j}")));
        }
        let regime = if j < 1.0 {
            Regime::Below1
        } else if j == 1.0 {
            Regime::One
        } else if j < 2.0 {
            Regime::Between1And2
        } else {
            Regime::AtLeast2
        };
        Ok(Self { j, regime })
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    Ok(())
}

/// The gauge `g_j(σ)`: `σ^{j-1}` below one, `log σ` at one, `1` above.
///
/// `g_1` is negative for `σ < 1`; limit checks compare against `|g_j|`.
pub fn g_j(sigma: f64, j: f64) -> Result<f64> {
    check_sigma(sigma)?;
    let r = RegimeJ::new(j)?;
    Ok(match r.regime {
        Regime::Below1 => sigma.powf(j - 1.0),
        Regime::One => sigma.ln(),
        Regime::Between1And2 | Regime::AtLeast2 => 1.0,
    })
}

fn check_h_args(sigma: f64, j: f64, t: f64) -> Result<RegimeJ> {
    check_sigma(sigma)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("T must be positive, got {t}")));
    }
    RegimeJ::new(j)
}

fn h_opts() -> QuadratureOptions {
    QuadratureOptions {
        rel_tol: 1e-13,
        abs_tol: 1e-300,
        ..Default::default()
    }
}

/// The closed form of `h_1`.
pub fn h_1_closed_form(sigma: f64, t: f64) -> f64 {
    2.0 * (((t * t + sigma * sigma).sqrt() + t) / sigma).ln()
}

/// `h_j(σ) = σ^{j-1} ∫_{-T}^{T} (σ² + τ²)^{-j/2} dτ`.
///
/// Evaluated through `τ = σ tan t`: the closed form at `j = 1`, the cosine
/// integral for `j >= 2`, and for `j < 2` the sine form
/// `2 ∫_{arctan(σ/T)}^{π/2} (sin u)^{j-2} du` on a logarithmic variable so the
/// endpoint growth stays resolved.
pub fn h_j(sigma: f64, j: f64, t: f64) -> Result<f64> {
    let r = check_h_args(sigma, j, t)?;
    let theta = (t / sigma).atan();
    match r.regime {
        Regime::One => Ok(h_1_closed_form(sigma, t)),
        Regime::AtLeast2 => {
            if j == 2.0 {
                return Ok(2.0 * theta);
            }
            let est = integrate(|u: f64| u.cos().powf(j - 2.0), &[0.0, 0.5 * theta, theta], &h_opts())?;
            Ok(2.0 * est.value)
        }
        Regime::Below1 | Regime::Between1And2 => {
            let lo = (sigma / t).atan().ln();
            let hi = FRAC_PI_2.ln();
            let n = ((hi - lo) / 2.0).ceil().max(1.0) as usize;
            let pts: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
            let est = integrate(
                |s: f64| {
                    let u = s.exp();
                    u.sin().powf(j - 2.0) * u
                },
                &pts,
                &h_opts(),
            )?;
            Ok(2.0 * est.value)
        }
    }
}

/// Direct quadrature of the defining integral of `h_j` in `τ`, with panels
/// refined geometrically around the peak at `τ = 0`.
pub fn h_j_direct(sigma: f64, j: f64, t: f64) -> Result<f64> {
    check_h_args(sigma, j, t)?;
    let mut pts = vec![0.0];
    let mut p = sigma;
    while p < t {
        pts.push(p);
        p *= 4.0;
    }
    pts.push(t);
    let est = integrate(
        |tau: f64| (sigma * sigma + tau * tau).powf(-0.5 * j),
        &pts,
        &h_opts(),
    )?;
    Ok(sigma.powf(j - 1.0) * 2.0 * est.value)
}

/// Regime bound on `h_j`: `π` for `j >= 2`, `2^{4-2j} π^{j-1} / (j - 1)` for
/// `1 < j < 2`, the explicit sine-comparison bound for `j < 1` and the closed
/// form at `j = 1`.
pub fn h_j_bound(sigma: f64, j: f64, t: f64) -> Result<f64> {
    let r = check_h_args(sigma, j, t)?;
    Ok(match r.regime {
        Regime::AtLeast2 => PI,
        Regime::Between1And2 => 2f64.powf(4.0 - 2.0 * j) * PI.powf(j - 1.0) / (j - 1.0),
        Regime::One => h_1_closed_form(sigma, t),
        Regime::Below1 => {
            // π/2 - arctan(T/σ) = arctan(σ/T), written stably.
            let gap = (sigma / t).atan();
            2f64.powf(3.0 - j) / (1.0 - j) * (gap.powf(j - 1.0) - FRAC_PI_2.powf(j - 1.0))
        }
    })
}
