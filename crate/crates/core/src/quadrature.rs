//! Adaptive quadrature and the one-sided transforms of a decay function.
//!
//! Every integral on `[0, ∞)` is split at a cut point `t_cut` where a
//! certified tail bound drops below the absolute tolerance; the head is
//! integrated by globally adaptive bisection with a 15-point Gauss–Kronrod
//! rule per panel. Complex integrands carry per-component error estimates.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{DecayFunction, Kind};

/// Relative agreement required between the two routes of [`alpha_transform`].
pub const ROUTE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Largest admissible tail cut. Reaching it without a small enough tail
    /// bound is reported as a divergence risk.
    pub max_horizon: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-14,
            max_subdivisions: 50_000,
            max_horizon: 1e7,
        }
    }
}

impl QuadratureOptions {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(invalid("quadrature tolerances must be positive"));
        }
        if self.max_subdivisions < 1 {
            return Err(invalid("max_subdivisions must be at least 1"));
        }
        if !(self.max_horizon > 0.0) {
            return Err(invalid("max_horizon must be positive"));
        }
        Ok(())
    }
}

/// Value types the integrator can accumulate.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    /// Largest absolute component, used for per-component error control.
    fn component_max(self) -> f64;
    /// Componentwise absolute value.
    fn abs_components(self) -> Self;
    fn magnitude(self) -> f64;
    fn to_complex(self) -> Complex64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn component_max(self) -> f64 {
        self.abs()
    }
    fn abs_components(self) -> Self {
        self.abs()
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn component_max(self) -> f64 {
        self.re.abs().max(self.im.abs())
    }
    fn abs_components(self) -> Self {
        Complex64::new(self.re.abs(), self.im.abs())
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

/// An integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate<V> {
    pub value: V,
    pub abs_error: f64,
    pub evaluations: usize,
    /// Cut point of the head integral for semi-infinite ranges.
    pub t_cut: Option<f64>,
}

// 15-point Kronrod abscissae and weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
    abs_value: V,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<V: QuadValue, F: Fn(f64) -> V>(f: &F, a: f64, b: f64) -> Panel<V> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs_components() * WGK[7];
    for i in 0..7 {
        let dx = half * XGK[i];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let pair = f1 + f2;
        kronrod = kronrod + pair * WGK[i];
        abs_sum = abs_sum + (f1.abs_components() + f2.abs_components()) * WGK[i];
        if i % 2 == 1 {
            gauss = gauss + pair * WG[i / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).component_max();
    Panel {
        a,
        b,
        value,
        error,
        abs_value: abs_sum * half.abs(),
    }
}

/// Globally adaptive integration over consecutive panels given by
/// `breakpoints` (at least two, strictly increasing).
pub fn integrate<V, F>(f: F, breakpoints: &[f64], opts: &QuadratureOptions) -> Result<Estimate<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    opts.validate()?;
    if breakpoints.len() < 2 {
        return Err(invalid("integration needs at least two breakpoints"));
    }
    if breakpoints.windows(2).any(|w| !(w[1] > w[0])) || breakpoints.iter().any(|x| !x.is_finite()) {
        return Err(invalid("breakpoints must be finite and strictly increasing"));
    }

    let mut heap = BinaryHeap::with_capacity(breakpoints.len() * 2);
    let mut total = V::zero();
    let mut total_err = 0.0;
    let mut total_abs = V::zero();
    for w in breakpoints.windows(2) {
        let p = gk15(&f, w[0], w[1]);
        total = total + p.value;
        total_err += p.error;
        total_abs = total_abs + p.abs_value;
        heap.push(p);
    }
    let mut evaluations = 15 * (breakpoints.len() - 1);
    let mut subdivisions = 0usize;

    let tolerance = |total: V, total_abs: V| {
        let round_off = 50.0 * f64::EPSILON * total_abs.component_max();
        opts.abs_tol.max(opts.rel_tol * total.magnitude()).max(round_off)
    };

    while total_err > tolerance(total, total_abs) {
        if subdivisions >= opts.max_subdivisions {
            return Err(Error::AccuracyFailure {
                estimate: total.to_complex(),
                abs_error: total_err,
                requested: tolerance(total, total_abs),
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Panel cannot be split further in floating point; keep its estimate.
            heap.push(Panel { error: 0.0, ..worst });
            total_err -= worst.error;
            continue;
        }
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        evaluations += 30;
        subdivisions += 1;
        total = total - worst.value + left.value + right.value;
        total_abs = total_abs - worst.abs_value + left.abs_value + right.abs_value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Re-sum periodically to keep the running error free of drift.
        if subdivisions.is_multiple_of(256) {
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }

    Ok(Estimate {
        value: total,
        abs_error: total_err.max(0.0),
        evaluations,
        t_cut: None,
    })
}

/// Integrates `f` over `[start, ∞)`.
///
/// `tail_bound(b)` must bound `|∫_b^∞ f|`; the cut is the first point of a
/// geometric sequence where the bound falls below the absolute tolerance.
/// `panel_width` fixes the initial mesh of the head.
pub fn integrate_semi_infinite<V, F, B>(
    f: F,
    start: f64,
    tail_bound: B,
    panel_width: f64,
    opts: &QuadratureOptions,
) -> Result<Estimate<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V,
    B: Fn(f64) -> f64,
{
    opts.validate()?;
    let mut b = start + 1.0;
    let mut tail = tail_bound(b);
    while !(tail <= opts.abs_tol) {
        if b > opts.max_horizon {
            return Err(Error::DivergenceRisk {
                re_z: f64::NAN,
                mu: f64::NAN,
            });
        }
        b = start + (b - start) * 1.5;
        tail = tail_bound(b);
    }
    let breakpoints = mesh(start, b, panel_width);
    let mut est = integrate(f, &breakpoints, opts)?;
    est.abs_error += tail;
    est.t_cut = Some(b);
    Ok(est)
}

/// Uniform mesh of `[a, b]` with panels no wider than `width` (at least 4
/// and at most 20000 panels).
pub(crate) fn mesh(a: f64, b: f64, width: f64) -> Vec<f64> {
    let n = ((b - a) / width.max(1e-300)).ceil().clamp(4.0, 20_000.0) as usize;
    let mut pts: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    pts[n] = b;
    pts
}

fn mu_of(f: &DecayFunction) -> Option<f64> {
    f.mu_hint()
}

fn check_strip(f: &DecayFunction, z: Complex64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(invalid("transform argument must be finite"));
    }
    if let Some(mu) = mu_of(f) {
        if z.re >= mu {
            return Err(Error::DivergenceRisk { re_z: z.re, mu });
        }
    }
    Ok(())
}

/// Decay rate of `e^{x t} phi(t)` usable for a tail bound at `b`.
///
/// The local logarithmic rate is capped by `mu - x` when the abscissa is
/// known, which keeps the bound valid when the local rate overshoots.
fn tail_rate(f: &DecayFunction, x: f64, b: f64) -> f64 {
    let local = f.log_decay_rate(b) - x;
    match mu_of(f) {
        Some(mu) => local.min(mu - x),
        None => local,
    }
}

/// `e^{zt} v` evaluated as `±e^{zt + ln|v|}`, so neither factor overflows
/// far out in the tail.
fn weighted(z: Complex64, t: f64, v: f64) -> Complex64 {
    if v == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    (z * t + v.abs().ln()).exp() * v.signum()
}

fn oscillation_width(im: f64) -> f64 {
    if im.abs() < 1e-12 {
        4.0
    } else {
        (std::f64::consts::PI / im.abs()).min(4.0)
    }
}

/// One-sided transform `∫_0^∞ e^{z t} phi(t) dt`, for `Re z` below the decay
/// rate.
pub fn laplace(f: &DecayFunction, z: Complex64, opts: &QuadratureOptions) -> Result<Estimate<Complex64>> {
    check_strip(f, z)?;
    match f.kind() {
        Kind::Sampled { t, phi } => laplace_sampled(f, t, phi, z, opts),
        Kind::ClosedForm => {
            let x = z.re;
            let integrand = |t: f64| weighted(z, t, f.eval(t));
            let tail = |b: f64| {
                let phi_b = f.eval(b);
                if phi_b == 0.0 {
                    return 0.0;
                }
                let rate = tail_rate(f, x, b);
                if rate > 0.0 {
                    (x * b + phi_b.ln()).exp() / rate
                } else {
                    f64::INFINITY
                }
            };
            integrate_semi_infinite(integrand, 0.0, tail, oscillation_width(z.im), opts).map_err(|e| match e {
                Error::DivergenceRisk { .. } => Error::DivergenceRisk {
                    re_z: z.re,
                    mu: mu_of(f).unwrap_or(f64::NAN),
                },
                other => other,
            })
        }
    }
}

fn sampled_breakpoints(t: &[f64], im: f64) -> Vec<f64> {
    let width = oscillation_width(im);
    let mut pts = Vec::with_capacity(t.len());
    for w in t.windows(2) {
        let seg = mesh(w[0], w[1], width);
        // At least one panel per sample interval; refine only wide ones.
        let seg = if w[1] - w[0] <= width { vec![w[0], w[1]] } else { seg };
        if pts.last() == Some(&seg[0]) {
            pts.extend_from_slice(&seg[1..]);
        } else {
            pts.extend_from_slice(&seg);
        }
    }
    pts
}

fn laplace_sampled(
    f: &DecayFunction,
    t: &[f64],
    phi: &[f64],
    z: Complex64,
    opts: &QuadratureOptions,
) -> Result<Estimate<Complex64>> {
    let t_last = *t.last().expect("sampled function has samples");
    let phi_last = *phi.last().expect("sampled function has samples");
    let rate = f.extrapolation_rate();
    let tail = if phi_last == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        if z.re >= rate {
            return Err(Error::DivergenceRisk { re_z: z.re, mu: rate });
        }
        phi_last * (z * t_last).exp() / (rate - z)
    };
    let mut est = if t.len() >= 2 {
        integrate(|s: f64| weighted(z, s, f.eval(s)), &sampled_breakpoints(t, z.im), opts)?
    } else {
        Estimate {
            value: Complex64::new(0.0, 0.0),
            abs_error: 0.0,
            evaluations: 0,
            t_cut: None,
        }
    };
    est.value += tail;
    est.t_cut = Some(t_last);
    Ok(est)
}

/// `(e^w - 1) / w`, stable near `w = 0`.
fn exprel(w: Complex64) -> Complex64 {
    if w.norm() < 1e-3 {
        Complex64::new(1.0, 0.0) + w * (0.5 + w * (1.0 / 6.0 + w / 24.0))
    } else {
        (w.exp() - 1.0) / w
    }
}

/// Laplace–Stieltjes transform `∫_0^∞ e^{z t} dphi(t)`.
///
/// Closed-form functions integrate `e^{zt} phi'(t)`; sampled functions sum the
/// measure of the piecewise-linear interpolant segment by segment, which is
/// the limit of the Riemann–Stieltjes refinement.
pub fn stieltjes(f: &DecayFunction, z: Complex64, opts: &QuadratureOptions) -> Result<Estimate<Complex64>> {
    check_strip(f, z)?;
    match f.kind() {
        Kind::Sampled { t, phi } => {
            if phi.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-9) + 1e-300) {
                return Err(Error::DomainViolation("sampled data is not non-increasing".into()));
            }
            let mut sum = Complex64::new(0.0, 0.0);
            for (tw, pw) in t.windows(2).zip(phi.windows(2)) {
                let h = tw[1] - tw[0];
                let slope = (pw[1] - pw[0]) / h;
                sum += slope * h * (z * tw[0]).exp() * exprel(z * h);
            }
            let t_last = *t.last().expect("sampled function has samples");
            let phi_last = *phi.last().expect("sampled function has samples");
            if phi_last > 0.0 {
                let rate = f.extrapolation_rate();
                if z.re >= rate {
                    return Err(Error::DivergenceRisk { re_z: z.re, mu: rate });
                }
                sum += -rate * phi_last * (z * t_last).exp() / (rate - z);
            }
            Ok(Estimate {
                value: sum,
                abs_error: f64::EPSILON * sum.norm() * t.len() as f64,
                evaluations: t.len(),
                t_cut: Some(t_last),
            })
        }
        Kind::ClosedForm => {
            let x = z.re;
            let integrand = |t: f64| weighted(z, t, f.derivative(t));
            let tail = |b: f64| {
                let phi_b = f.eval(b);
                if phi_b == 0.0 {
                    return 0.0;
                }
                let rate = tail_rate(f, x, b);
                if rate > 0.0 {
                    // Integration by parts: |∫_b^∞ e^{xt} dphi| <= e^{xb} phi(b) (1 + |x| / rate).
                    (x * b + phi_b.ln()).exp() * (1.0 + x.abs() / rate)
                } else {
                    f64::INFINITY
                }
            };
            integrate_semi_infinite(integrand, 0.0, tail, oscillation_width(z.im), opts).map_err(|e| match e {
                Error::DivergenceRisk { .. } => Error::DivergenceRisk {
                    re_z: z.re,
                    mu: mu_of(f).unwrap_or(f64::NAN),
                },
                other => other,
            })
        }
    }
}

/// Both evaluation routes of `∫_0^∞ e^{-(a+z)t} dα(t)` with
/// `α(t) = e^{(mu+a)t} phi(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaTransform {
    /// `-phi(0) + (a + z) ∫ e^{(mu-z)t} phi(t) dt`, valid for all `Re z > 0`.
    pub value: Complex64,
    /// `(mu + a) ∫ e^{(mu-z)t} phi dt + ∫ e^{(mu-z)t} dphi`, computed when
    /// `0 < Re z < mu`.
    pub split_route: Option<Complex64>,
    /// Relative gap between the two routes when both exist.
    pub route_gap: Option<f64>,
}

/// Transform of the increasing function `α(t) = e^{(mu+a)t} phi(t)`.
pub fn alpha_transform(
    f: &DecayFunction,
    a: f64,
    z: Complex64,
    opts: &QuadratureOptions,
) -> Result<AlphaTransform> {
    let mu = f
        .mu_hint()
        .ok_or_else(|| invalid("alpha_transform needs the decay rate mu (mu_hint)"))?;
    if !(a > 0.0) {
        return Err(invalid("shift a must be positive"));
    }
    if let Some(nu) = f.nu_certificate() {
        if !(mu + a > nu) {
            return Err(invalid(format!("need mu + a > nu, got mu + a = {}, nu = {nu}", mu + a)));
        }
    }
    if !(z.re > 0.0) {
        return Err(Error::OutOfRegion(format!("Re z = {} must be positive", z.re)));
    }
    let w = Complex64::new(mu, 0.0) - z;
    let lap = laplace(f, w, opts)?.value;
    let value = -f.phi0() + (a + z) * lap;
    if z.re >= mu {
        return Ok(AlphaTransform {
            value,
            split_route: None,
            route_gap: None,
        });
    }
    let st = stieltjes(f, w, opts)?.value;
    let split = (mu + a) * lap + st;
    let gap = (split - value).norm() / value.norm().max(1e-300);
    if gap > ROUTE_TOL {
        return Err(Error::ConsistencyFailure {
            first: value,
            second: split,
            gap,
        });
    }
    Ok(AlphaTransform {
        value,
        split_route: Some(split),
        route_gap: Some(gap),
    })
}
