//! Optimal Poincaré constants known in closed form or as the first zero of
//! an explicit function, together with their saturating functions.

use std::f64::consts::PI;

use crate::dist::{DistributionSpec, Family, Interval};
use crate::error::{Error, Result};
use crate::estimate::{Method, PoincareEstimate, SaturatingFunction};
use crate::fem::{self, FemOptions};
use crate::specfun::{self, bessel_j0, bessel_j0_first_zero, bessel_j1, hermite_eval, kummer_m};

/// An exact constant and, when the spectral gap is an eigenvalue, its
/// saturating function.
#[derive(Debug, Clone)]
pub struct ExactResult {
    pub estimate: PoincareEstimate,
    pub saturating: Option<SaturatingFunction>,
}

impl ExactResult {
    fn rescaled(self, location: f64, scale: f64) -> Self {
        Self {
            estimate: self.estimate.scaled(scale * scale),
            saturating: self.saturating.map(|f| f.rescaled(location, scale)),
        }
    }
}

/// Relative precision attributed to constants obtained by root finding.
const ROOT_RELATIVE_ERROR: f64 = 1e-12;
/// FEM agreement required of a Kummer root.
const CROSS_CHECK_LIMIT: f64 = 1e-4;
const CROSS_CHECK_TOL: f64 = 1e-8;

fn check_interval(a: f64, b: f64) -> Result<()> {
    if a.is_nan() || b.is_nan() || !(a < b) {
        return Err(Error::Argument(format!("need a < b, got [{a}, {b}]")));
    }
    if a.is_finite() && b.is_finite() && b - a < 1e-8 * a.abs().max(1.0) {
        return Err(Error::Argument(format!(
            "interval [{a}, {b}] is too narrow for a reliable constant"
        )));
    }
    Ok(())
}

/// Uniform law on [a, b]: (b - a)²/π², saturated by a sine.
pub fn uniform_constant(a: f64, b: f64) -> Result<ExactResult> {
    check_interval(a, b)?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Argument("uniform law needs a bounded interval".into()));
    }
    let half = 0.5 * (b - a);
    let std = DistributionSpec::standard(Family::Uniform);
    let f = SaturatingFunction::closed_form(&std, |z| (0.5 * PI * z).sin(), |z| 0.5 * PI * (0.5 * PI * z).cos())?;
    let result = ExactResult {
        estimate: PoincareEstimate::new(4.0 / (PI * PI), Method::ClosedForm, 0.0),
        saturating: Some(f),
    };
    Ok(result.rescaled(0.5 * (a + b), half))
}

/// Double exponential law `½e^{-|x|}` restricted to [a, b] (either end may
/// be infinite).
pub fn truncated_doubleexp_constant(a: f64, b: f64) -> Result<ExactResult> {
    check_interval(a, b)?;
    if !(a.is_finite() && b.is_finite()) {
        // half-lines and the line all have gap 1/4, the bottom of the
        // essential spectrum; no eigenfunction attains it
        return Ok(ExactResult {
            estimate: PoincareEstimate::new(4.0, Method::ClosedForm, 0.0),
            saturating: None,
        });
    }
    let law = DistributionSpec::standard(Family::DoubleExponential).truncated(a, b)?;
    if a >= 0.0 || b <= 0.0 {
        // for b <= 0 use the mirror image [-b, -a] and reflect back
        let (lo, hi, sign) = if a >= 0.0 { (a, b, 1.0) } else { (-b, -a, -1.0) };
        let omega = PI / (hi - lo);
        let f = move |x: f64| {
            let y = sign * x;
            let t = omega * (y - lo);
            sign * (0.5 * y).exp() * (-omega * t.cos() + 0.5 * t.sin())
        };
        let df = move |x: f64| {
            let y = sign * x;
            (0.5 * y).exp() * (0.25 + omega * omega) * (omega * (y - lo)).sin()
        };
        let sat = SaturatingFunction::closed_form(&law, f, df)?;
        return Ok(ExactResult {
            estimate: PoincareEstimate::new(1.0 / (0.25 + omega * omega), Method::ClosedForm, 0.0),
            saturating: Some(sat),
        });
    }

    let (la, lb) = (a.abs(), b.abs());
    let limit = (PI / la).min(PI / lb);
    let secular = move |x: f64| 1.0 / (la * x).tan() + 1.0 / (lb * x).tan() + 1.0 / x;
    let omega = specfun::first_zero(secular, limit * 1e-9, limit * (1.0 - 1e-12), limit / 2000.0)?;
    let cot_a = 1.0 / (omega * a).tan();
    let big_a = omega * cot_a - 0.5;
    let big_b = 0.5 * cot_a + omega;
    let coefficients = move |x: f64| {
        let s = if x >= 0.0 { 1.0 } else { -1.0 };
        let bs = big_b - 0.5 * (s + 1.0) * big_a / omega;
        (s, bs)
    };
    let f_raw = move |x: f64| {
        let (_, bs) = coefficients(x);
        (0.5 * x.abs()).exp() * (big_a * (omega * x).cos() + bs * (omega * x).sin())
    };
    let df_raw = move |x: f64| {
        let (s, bs) = coefficients(x);
        let (c, sn) = ((omega * x).cos(), (omega * x).sin());
        (0.5 * x.abs()).exp() * ((0.5 * s * big_a + bs * omega) * c + (0.5 * s * bs - big_a * omega) * sn)
    };
    let orient = if f_raw(b) >= f_raw(a) { 1.0 } else { -1.0 };
    let sat = SaturatingFunction::closed_form(&law, move |x| orient * f_raw(x), move |x| orient * df_raw(x))?;
    let value = 1.0 / (0.25 + omega * omega);
    Ok(ExactResult {
        estimate: PoincareEstimate::new(value, Method::FirstZero, value * ROOT_RELATIVE_ERROR),
        saturating: Some(sat),
    })
}

/// Symmetric triangular law on [-1, 1]: 1/r₁² with r₁ the first zero of J₀.
pub fn triangular_constant() -> Result<ExactResult> {
    let r1 = bessel_j0_first_zero();
    let law = DistributionSpec::standard(Family::Triangular);
    let f = move |x: f64| x.signum() * bessel_j0(r1 * (1.0 - x.abs()));
    let df = move |x: f64| r1 * bessel_j1(r1 * (1.0 - x.abs()));
    let sat = SaturatingFunction::closed_form(&law, f, df)?;
    let value = 1.0 / (r1 * r1);
    Ok(ExactResult {
        estimate: PoincareEstimate::new(value, Method::FirstZero, value * ROOT_RELATIVE_ERROR),
        saturating: Some(sat),
    })
}

/// Even and odd Kummer solutions of `u'' - t u' + (λ - 1) u = 0`, the
/// equation satisfied by the derivative of a truncated-normal eigenfunction.
#[derive(Debug, Clone, Copy)]
struct KummerPair {
    lambda: f64,
}

impl KummerPair {
    /// h0(t) = M((1-λ)/2, 1/2, t²/2)
    fn h0(&self, t: f64) -> f64 {
        kummer_m(0.5 * (1.0 - self.lambda), 0.5, 0.5 * t * t).unwrap_or(f64::NAN)
    }

    /// h1(t) = M((2-λ)/2, 3/2, t²/2); the odd solution is t·h1(t)
    fn h1(&self, t: f64) -> f64 {
        kummer_m(0.5 * (2.0 - self.lambda), 1.5, 0.5 * t * t).unwrap_or(f64::NAN)
    }

    /// Sums of absolute series terms behind h0(t) and h1(t).
    fn magnitudes(&self, t: f64) -> (f64, f64) {
        let z = 0.5 * t * t;
        let mag = |a1: f64, b1: f64| specfun::kummer_m_with_magnitude(a1, b1, z).map_or(f64::INFINITY, |r| r.1);
        (mag(0.5 * (1.0 - self.lambda), 0.5), mag(0.5 * (2.0 - self.lambda), 1.5))
    }

    fn dh0(&self, t: f64) -> f64 {
        let a = 0.5 * (1.0 - self.lambda);
        2.0 * a * t * kummer_m(a + 1.0, 1.5, 0.5 * t * t).unwrap_or(f64::NAN)
    }

    fn dh1(&self, t: f64) -> f64 {
        let a = 0.5 * (2.0 - self.lambda);
        (2.0 * a / 3.0) * t * kummer_m(a + 1.0, 2.5, 0.5 * t * t).unwrap_or(f64::NAN)
    }

    fn determinant(&self, a: f64, b: f64) -> f64 {
        b * self.h0(a) * self.h1(b) - a * self.h0(b) * self.h1(a)
    }
}

/// Standard normal law restricted to the bounded interval [a, b].
///
/// The gap is the first λ > 0 for which the Dirichlet problem for the
/// derivative has a nontrivial solution. The root is bracketed by a scan up
/// to ten times the inverse variance and confirmed by finite elements.
pub fn truncated_normal_constant(a: f64, b: f64) -> Result<ExactResult> {
    check_interval(a, b)?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Argument(format!(
            "[{a}, {b}] is unbounded; use the finite-element limit"
        )));
    }
    let law = DistributionSpec::standard(Family::Normal).truncated(a, b)?;
    let lambda = kummer_gap(&law, a, b)?;

    let (fem_estimate, fem_saturating) = fem::poincare_fem_with(&law, &FemOptions::with_tol(CROSS_CHECK_TOL))?;
    let value = 1.0 / lambda;
    let relative = ((fem_estimate.value - value) / value).abs();
    if relative > CROSS_CHECK_LIMIT {
        return Err(Error::CrossValidation {
            exact: value,
            fem: fem_estimate.value,
            relative,
        });
    }

    // far in the tails the Kummer combination cancels badly; the
    // finite-element eigenfunction is then the more accurate of the two
    let sat = kummer_saturating(&law, a, b, lambda)?.unwrap_or(fem_saturating);
    Ok(ExactResult {
        estimate: PoincareEstimate::new(value, Method::FirstZero, value * ROOT_RELATIVE_ERROR),
        saturating: Some(sat),
    })
}

fn kummer_gap(law: &DistributionSpec, a: f64, b: f64) -> Result<f64> {
    let variance = law.interval_moments()?.variance;
    let lambda_max = 10.0 / variance;
    let step = (lambda_max / 1e5).max(0.01);
    let symmetric = (a + b).abs() <= 1e-14 * b.abs();
    if symmetric {
        specfun::first_zero(|l| KummerPair { lambda: l }.h0(b), 1e-6, lambda_max, step)
    } else {
        specfun::first_zero(|l| KummerPair { lambda: l }.determinant(a, b), 1e-6, lambda_max, step)
    }
}

/// Largest tolerated ratio between the Kummer terms and their combination.
const KUMMER_CANCELLATION_LIMIT: f64 = 100.0;

/// Closed-form saturating function, or `None` when evaluating it on [a, b]
/// would lose more than two digits to cancellation.
fn kummer_saturating(law: &DistributionSpec, a: f64, b: f64, lambda: f64) -> Result<Option<SaturatingFunction>> {
    let k = KummerPair { lambda };
    // u = c0·h0 + c1·t·h1 vanishing at one end; take the better conditioned end
    let from_a = (a * k.h1(a), -k.h0(a));
    let from_b = (b * k.h1(b), -k.h0(b));
    let norm = |c: (f64, f64)| c.0.hypot(c.1);
    let (c0, c1) = if norm(from_a) >= norm(from_b) { from_a } else { from_b };
    let u = move |t: f64| c0 * k.h0(t) + c1 * t * k.h1(t);
    let (mut terms, mut peak) = (0.0f64, 0.0f64);
    for j in 0..=64 {
        let t = a + (b - a) * j as f64 / 64.0;
        let (m0, m1) = k.magnitudes(t);
        terms = terms.max((c0 * m0).abs() + (c1 * t * m1).abs());
        peak = peak.max(u(t).abs());
    }
    if !(terms <= KUMMER_CANCELLATION_LIMIT * peak) {
        return Ok(None);
    }
    let du = move |t: f64| c0 * k.dh0(t) + c1 * (k.h1(t) + t * k.dh1(t));
    let orient = if u(0.5 * (a + b)) >= 0.0 { 1.0 } else { -1.0 };
    let f = move |t: f64| orient * (t * u(t) - du(t)) / lambda;
    let df = move |t: f64| orient * u(t);
    let sat = SaturatingFunction::closed_form(law, f, df)?;
    if !sat.rayleigh().is_finite() {
        return Err(Error::Numerical(format!(
            "saturating function on [{a}, {b}] could not be evaluated"
        )));
    }
    Ok(Some(sat))
}

/// Interval between the i-th and (i+1)-th zeros (1-based, ascending) of the
/// Hermite polynomial He_n, on which the truncated standard normal has gap
/// n + 1 and saturating function He_{n+1}.
pub fn hermite_interval_constant(n: usize, i: usize) -> Result<(Interval, ExactResult)> {
    if n < 2 || i == 0 || i >= n {
        return Err(Error::Argument(format!(
            "interior interval index must satisfy 1 <= i <= n - 1, got n = {n}, i = {i}"
        )));
    }
    let zeros = specfun::hermite_zeros(n)?;
    let interval = Interval::new(zeros[i - 1], zeros[i])?;
    let law = DistributionSpec::standard(Family::Normal).truncated(interval.lo, interval.hi)?;
    let mid = 0.5 * (interval.lo + interval.hi);
    let orient = if hermite_eval(n, mid) >= 0.0 { 1.0 } else { -1.0 };
    let np1 = (n + 1) as f64;
    let sat = SaturatingFunction::closed_form(
        &law,
        move |x| orient * hermite_eval(n + 1, x),
        move |x| orient * np1 * hermite_eval(n, x),
    )?;
    Ok((
        interval,
        ExactResult {
            estimate: PoincareEstimate::new(1.0 / np1, Method::ClosedForm, 0.0),
            saturating: Some(sat),
        },
    ))
}

/// Dispatches to the exact solver for the law, or returns
/// [`Error::NotApplicable`] so callers can fall back to finite elements.
pub fn exact_constant(d: &DistributionSpec) -> Result<ExactResult> {
    let (std, _) = d.standardize();
    let Interval { lo: a, hi: b } = std.support();
    let standard = match d.family() {
        Family::Uniform => uniform_constant(a, b)?,
        Family::Triangular => {
            if a > -1.0 || b < 1.0 {
                return Err(not_applicable(d, "no closed form for a truncated triangular law"));
            }
            triangular_constant()?
        }
        Family::DoubleExponential => truncated_doubleexp_constant(a, b)?,
        // e^{-x} on [0, ∞) is the double exponential restricted there
        Family::Exponential => truncated_doubleexp_constant(a.max(0.0), b)?,
        Family::Normal => match (a.is_finite(), b.is_finite()) {
            (true, true) => truncated_normal_constant(a, b)?,
            (false, false) => {
                let sat = SaturatingFunction::closed_form(&std, |x| x, |_| 1.0)?;
                ExactResult {
                    estimate: PoincareEstimate::new(1.0, Method::ClosedForm, 0.0),
                    saturating: Some(sat),
                }
            }
            _ => return Err(not_applicable(d, "half-line normal has no closed form")),
        },
        Family::Logistic | Family::Gumbel => return Err(not_applicable(d, "no closed form")),
    };
    Ok(standard.rescaled(d.location(), d.scale()))
}

fn not_applicable(d: &DistributionSpec, why: &str) -> Error {
    Error::NotApplicable(format!("{d}: {why}"))
}
