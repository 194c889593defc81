//! Cheap two-sided bounds on the Poincaré constant.
//!
//! Suprema over the support are taken on the quantile grid
//! `x_k = F⁻¹((k + ½)/N)`, refined by golden-section search around the grid
//! argmax and, when the argmax is an extreme grid point, continued outward
//! into the tail by halving the remaining mass.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::dist::{DistributionSpec, Family, Interval};
use crate::error::{Error, Result};
use crate::quad;
use crate::specfun::bessel_j0_first_zero;

/// Number of quantile-grid points.
pub const GRID_POINTS: usize = 2001;

const GOLDEN_ITERATIONS: usize = 100;
const TAIL_HALVINGS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    Muckenhoupt,
    TransportDoubleexp,
    TransportLogistic,
    SymmetricRestriction,
    BoundedPerturbation,
    BakryEmery,
    Variance,
    Chen,
}

impl fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundMethod::Muckenhoupt => "muckenhoupt",
            BoundMethod::TransportDoubleexp => "transport_doubleexp",
            BoundMethod::TransportLogistic => "transport_logistic",
            BoundMethod::SymmetricRestriction => "symmetric_restriction",
            BoundMethod::BoundedPerturbation => "bounded_perturbation",
            BoundMethod::BakryEmery => "bakry_emery",
            BoundMethod::Variance => "variance",
            BoundMethod::Chen => "chen",
        })
    }
}

/// Interval `[lower, upper]` known to contain C_P. A side a method does not
/// provide is 0 or +∞.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub lower: f64,
    pub upper: f64,
    pub method: BoundMethod,
    pub details: BTreeMap<String, f64>,
}

impl BoundReport {
    fn upper(method: BoundMethod, upper: f64) -> Self {
        Self {
            lower: 0.0,
            upper,
            method,
            details: BTreeMap::new(),
        }
    }

    fn lower(method: BoundMethod, lower: f64) -> Self {
        Self {
            lower,
            upper: f64::INFINITY,
            method,
            details: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    pub fn contains(&self, c: f64, slack: f64) -> bool {
        self.lower <= c * (1.0 + slack) && c <= self.upper * (1.0 + slack)
    }
}

fn grid_probability(k: usize) -> f64 {
    (k as f64 + 0.5) / GRID_POINTS as f64
}

/// Maximum of a unimodal `f` on [lo, hi].
fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERATIONS {
        if b - a <= 1e-15 * a.abs().max(b.abs()).max(1e-300) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn inverse_density_integral(d: &DistributionSpec, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    quad::gl8().integrate(|x| 1.0 / d.pdf(x), a, b)
}

/// One-sided Muckenhoupt functional: sup over x beyond the median of
/// (tail mass past x) × ∫ 1/ρ between the median and x.
fn muckenhoupt_side(d: &DistributionSpec, upper: bool) -> Result<(f64, f64)> {
    let m = d.median();
    let half = GRID_POINTS / 2;
    // grid points ordered outward from the median
    let masses: Vec<f64> = (1..=half).map(|j| grid_probability(half - j)).collect();
    let tail = |x: f64| if upper { d.sf(x) } else { d.cdf(x) };
    let mut xs = vec![m];
    let mut cum = vec![0.0];
    let mut values = vec![0.0];
    let push = |x: f64, xs: &mut Vec<f64>, cum: &mut Vec<f64>, values: &mut Vec<f64>| -> Result<()> {
        let prev = *xs.last().unwrap();
        let (a, b) = if upper { (prev, x) } else { (x, prev) };
        let c = cum.last().unwrap() + inverse_density_integral(d, a, b);
        if !c.is_finite() {
            return Err(Error::Divergence(format!(
                "no Poincaré inequality detected: ∫1/ρ diverges near {x}"
            )));
        }
        xs.push(x);
        cum.push(c);
        values.push(tail(x) * c);
        Ok(())
    };
    for &q in &masses {
        push(d.tail_quantile(q, upper), &mut xs, &mut cum, &mut values)?;
    }
    let argmax = |values: &[f64]| {
        values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc })
    };
    let (mut best_i, mut best) = argmax(&values);
    if best_i == values.len() - 1 {
        let mut q = masses[masses.len() - 1];
        for _ in 0..TAIL_HALVINGS {
            q *= 0.5;
            let x = d.tail_quantile(q, upper);
            if x == *xs.last().unwrap() || q == 0.0 {
                break;
            }
            push(x, &mut xs, &mut cum, &mut values)?;
            let v = *values.last().unwrap();
            if v > best {
                let gain = (v - best) / v;
                best = v;
                best_i = values.len() - 1;
                if gain < 1e-15 {
                    break;
                }
            } else {
                break;
            }
        }
        if best > 1e300 {
            return Err(Error::Divergence("no Poincaré inequality detected: tail functional unbounded".into()));
        }
    }
    let lo_i = best_i.saturating_sub(1);
    let hi_i = (best_i + 1).min(xs.len() - 1);
    let (x0, c0) = (xs[lo_i], cum[lo_i]);
    let profile = |x: f64| {
        let (a, b) = if upper { (x0, x) } else { (x, x0) };
        tail(x) * (c0 + inverse_density_integral(d, a, b))
    };
    let (xr, vr) = if hi_i > lo_i {
        golden_max(profile, xs[lo_i].min(xs[hi_i]), xs[lo_i].max(xs[hi_i]))
    } else {
        (xs[best_i], best)
    };
    Ok(if vr > best { (vr, xr) } else { (best, xs[best_i]) })
}

/// Two-sided Muckenhoupt bracket `½ max(A₋, A₊) ≤ C_P ≤ 4 max(A₋, A₊)`.
pub fn muckenhoupt(d: &DistributionSpec) -> Result<BoundReport> {
    let (a_plus, x_plus) = muckenhoupt_side(d, true)?;
    let (a_minus, x_minus) = muckenhoupt_side(d, false)?;
    let a = a_plus.max(a_minus);
    Ok(BoundReport {
        lower: 0.5 * a,
        upper: 4.0 * a,
        method: BoundMethod::Muckenhoupt,
        details: BTreeMap::new(),
    }
    .with("A_minus", a_minus)
    .with("A_plus", a_plus)
    .with("median", d.median())
    .with("argmax_minus", x_minus)
    .with("argmax_plus", x_plus))
}

/// Supremum of `h` over the support, on the quantile grid with tail
/// continuation and golden-section refinement.
fn grid_sup<H: Fn(f64) -> f64>(d: &DistributionSpec, h: H) -> Result<(f64, f64)> {
    let xs: Vec<f64> = (0..GRID_POINTS).map(|k| d.quantile_unchecked(grid_probability(k))).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| h(x)).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence("no Poincaré inequality detected: ratio is not finite".into()));
    }
    let (mut best_i, mut best) = vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let mut best_x = xs[best_i];
    let n = xs.len();
    if best_i == 0 || best_i == n - 1 {
        let upper = best_i == n - 1;
        let mut q = grid_probability(0);
        let mut prev_x = xs[best_i];
        for _ in 0..TAIL_HALVINGS {
            q *= 0.5;
            let x = d.tail_quantile(q, upper);
            if x == prev_x || q == 0.0 {
                break;
            }
            let v = h(x);
            if !v.is_finite() || v > 1e300 {
                return Err(Error::Divergence(format!(
                    "no Poincaré inequality detected: ratio unbounded near {x}"
                )));
            }
            if v <= best {
                break;
            }
            let gain = (v - best) / v;
            best = v;
            best_x = x;
            prev_x = x;
            if gain < 1e-15 {
                break;
            }
        }
        if best_x != xs[best_i] {
            return Ok((best, best_x));
        }
        best_i = best_i.min(n - 1);
    }
    let lo = xs[best_i.saturating_sub(1)];
    let hi = xs[(best_i + 1).min(n - 1)];
    let (xr, vr) = golden_max(&h, lo, hi);
    Ok(if vr > best { (vr, xr) } else { (best, best_x) })
}

/// Monotone transport from the double exponential law:
/// `C_P ≤ 4 (sup min(F, 1 - F)/ρ)²`.
pub fn transport_doubleexp_bound(d: &DistributionSpec) -> Result<f64> {
    Ok(transport_doubleexp_report(d)?.upper)
}

/// Monotone transport from the logistic law: `C_P ≤ 4 (sup F(1 - F)/ρ)²`.
pub fn transport_logistic_bound(d: &DistributionSpec) -> Result<f64> {
    Ok(transport_logistic_report(d)?.upper)
}

pub fn transport_doubleexp_report(d: &DistributionSpec) -> Result<BoundReport> {
    let (s, x) = grid_sup(d, |x| d.cdf(x).min(d.sf(x)) / d.pdf(x))?;
    Ok(BoundReport::upper(BoundMethod::TransportDoubleexp, 4.0 * s * s)
        .with("lipschitz", s)
        .with("argmax", x))
}

pub fn transport_logistic_report(d: &DistributionSpec) -> Result<BoundReport> {
    let (s, x) = grid_sup(d, |x| d.cdf(x) * d.sf(x) / d.pdf(x))?;
    Ok(BoundReport::upper(BoundMethod::TransportLogistic, 4.0 * s * s)
        .with("lipschitz", s)
        .with("argmax", x))
}

/// Poincaré constant of an untruncated law when it is known in closed form.
pub fn parent_constant(family: Family, scale: f64) -> Option<f64> {
    let standard = match family {
        Family::Normal => 1.0,
        Family::DoubleExponential | Family::Logistic => 4.0,
        Family::Triangular => bessel_j0_first_zero().powi(-2),
        Family::Uniform => 4.0 / (PI * PI),
        Family::Exponential => 4.0,
        Family::Gumbel => return None,
    };
    Some(standard * scale * scale)
}

/// `C_P(parent|I) ≤ μ(I)² C_P(parent)` for a parent with mode 0 and an
/// interval that keeps the mass of the negative half-line.
pub fn symmetric_restriction_bound(parent: &DistributionSpec, interval: Interval, parent_cp: f64) -> Result<f64> {
    let mode = match parent.family() {
        Family::Exponential => parent.support().lo.max(parent.location()),
        _ => parent.location(),
    };
    if mode.abs() > 1e-12 * parent.scale() {
        return Err(Error::Precondition(format!("parent {parent} does not have its mode at 0")));
    }
    let restricted = parent.truncated(interval.lo, interval.hi)?;
    let (m_parent, m_restricted) = (parent.cdf(0.0), restricted.cdf(0.0));
    if (m_parent - m_restricted).abs() > 1e-10 {
        return Err(Error::Precondition(format!(
            "mass of the negative half-line changes from {m_parent} to {m_restricted} under restriction to {interval}"
        )));
    }
    let mass = interval_mass(parent, interval);
    Ok(mass * mass * parent_cp)
}

fn interval_mass(d: &DistributionSpec, i: Interval) -> f64 {
    let lower = d.cdf(i.lo);
    if lower < 0.5 {
        d.cdf(i.hi) - lower
    } else {
        d.sf(i.lo) - d.sf(i.hi)
    }
}

/// `C_P(N(0,1)|[-b, b]) ≤ 4b²/π²`, the constant of the uniform law on [-b, b].
pub fn gaussian_symmetric_uniform_bound(b: f64) -> Result<f64> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::Argument(format!("half-width must be positive, got {b}")));
    }
    Ok(4.0 * b * b / (PI * PI))
}

/// `C_P(e^{-ψ}μ / Z) ≤ e^{osc ψ} C_P(μ)`.
pub fn bounded_perturbation_bound(base_cp: f64, osc: f64) -> Result<f64> {
    if !(osc >= 0.0) {
        return Err(Error::Argument(format!("oscillation must be nonnegative, got {osc}")));
    }
    Ok(osc.exp() * base_cp)
}

/// Curvature bound `C_P ≤ 1/inf V''`.
pub fn bakry_emery_bound(d: &DistributionSpec) -> Result<f64> {
    if !d.interior_kinks().is_empty() {
        return Err(Error::NotApplicable(format!("potential of {d} is not twice differentiable")));
    }
    let Interval { lo, hi } = d.support();
    let mut points: Vec<f64> = (0..GRID_POINTS).map(|k| d.quantile_unchecked(grid_probability(k))).collect();
    // extreme points where the curvature of the listed families is smallest
    points.push(if lo.is_finite() { lo } else { d.tail_quantile(1e-300, false) });
    points.push(if hi.is_finite() { hi } else { d.tail_quantile(1e-300, true) });
    let mut inf = f64::INFINITY;
    for x in points {
        match d.potential_unchecked(x).second {
            Some(v) if v.is_finite() => inf = inf.min(v),
            Some(_) => {}
            None => return Err(Error::NotApplicable(format!("potential of {d} has no second derivative at {x}"))),
        }
    }
    if !(inf > 0.0) {
        return Err(Error::NotApplicable(format!(
            "potential of {d} is not uniformly convex (inf V'' = {inf})"
        )));
    }
    Ok(1.0 / inf)
}

/// `C_P ≥ Var_μ`, equality for the standard normal.
pub fn variance_lower_bound(d: &DistributionSpec) -> Result<f64> {
    Ok(d.interval_moments()?.variance)
}

/// Lower bound on the spectral gap from a test function with derivative
/// `g_prime > 0`: the grid infimum of `(-Lg)'/g'`, with `(-Lg)' = -g''' + V''g' + V'g''`
/// approximated by central differences on `grid`.
pub fn chen_lower_gap<G: Fn(f64) -> f64>(d: &DistributionSpec, grid: &[f64], g_prime: G) -> Result<f64> {
    if grid.len() < 3 {
        return Err(Error::Argument("grid needs at least three points".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Argument("grid must be strictly increasing".into()));
    }
    let u: Vec<f64> = grid.iter().map(|&x| g_prime(x)).collect();
    if let Some((x, v)) = grid.iter().zip(&u).find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::Precondition(format!("g' must be positive on the grid, got {v} at {x}")));
    }
    let support = d.support();
    let mut inf = f64::INFINITY;
    for i in 1..grid.len() - 1 {
        let x = grid[i];
        if !(support.lo < x && x < support.hi) {
            continue;
        }
        let pot = d.potential_unchecked(x);
        let Some(v2) = pot.second else { continue };
        let (hl, hr) = (x - grid[i - 1], grid[i + 1] - x);
        let du = (u[i + 1] * hl * hl - u[i - 1] * hr * hr + u[i] * (hr * hr - hl * hl)) / (hl * hr * (hl + hr));
        let d2u = 2.0 * (u[i + 1] * hl - u[i] * (hl + hr) + u[i - 1] * hr) / (hl * hr * (hl + hr));
        let ratio = v2 + (pot.first * du - d2u) / u[i];
        inf = inf.min(ratio);
    }
    if !inf.is_finite() {
        return Err(Error::Precondition("no interior grid point with a smooth potential".into()));
    }
    Ok(inf)
}

/// Every bound that applies to `d` without extra input.
pub fn all_bounds(d: &DistributionSpec) -> Result<Vec<BoundReport>> {
    let mut out = vec![
        muckenhoupt(d)?,
        transport_doubleexp_report(d)?,
        transport_logistic_report(d)?,
        BoundReport::lower(BoundMethod::Variance, variance_lower_bound(d)?),
    ];
    match bakry_emery_bound(d) {
        Ok(c) => out.push(BoundReport::upper(BoundMethod::BakryEmery, c)),
        Err(Error::NotApplicable(_)) => {}
        Err(e) => return Err(e),
    }
    if let Some(t) = d.truncation() {
        let parent = DistributionSpec::new(d.family(), d.location(), d.scale())?;
        if let Some(cp) = parent_constant(d.family(), d.scale()) {
            if let Ok(c) = symmetric_restriction_bound(&parent, t, cp) {
                out.push(
                    BoundReport::upper(BoundMethod::SymmetricRestriction, c).with("parent_constant", cp),
                );
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::triangular_constant;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn muckenhoupt_uniform() {
        let d = DistributionSpec::new(Family::Uniform, 0.5, 0.5).unwrap();
        let r = muckenhoupt(&d).unwrap();
        assert!(close(r.details["A_plus"], 1.0 / 16.0, 1e-12));
        assert!(close(r.details["A_minus"], 1.0 / 16.0, 1e-12));
        assert!(close(r.lower, 1.0 / 32.0, 1e-12) && close(r.upper, 0.25, 1e-12));
        assert!(r.contains(1.0 / (PI * PI), 0.0));
    }

    #[test]
    fn muckenhoupt_exponential_reaches_tail() {
        let d = DistributionSpec::standard(Family::Exponential);
        let r = muckenhoupt(&d).unwrap();
        assert!(close(r.details["A_plus"], 1.0, 1e-9), "{:?}", r.details);
        assert!(close(r.lower, 0.5, 1e-9) && close(r.upper, 4.0, 1e-8));
    }

    #[test]
    fn muckenhoupt_triangular_brackets_exact() {
        let r = muckenhoupt(&DistributionSpec::standard(Family::Triangular)).unwrap();
        assert!(r.contains(0.1729, 0.0));
    }

    #[test]
    fn transport_examples() {
        let tri = DistributionSpec::standard(Family::Triangular);
        assert!(close(transport_doubleexp_bound(&tri).unwrap(), 1.0, 1e-9));
        assert!(close(transport_logistic_bound(&tri).unwrap(), 0.296, 5e-4));
        let n = DistributionSpec::standard(Family::Normal);
        assert!(close(transport_doubleexp_bound(&n).unwrap(), 2.0 * PI, 1e-9));
        let nt = n.truncated(-1.875, f64::INFINITY).unwrap();
        assert!(close(transport_doubleexp_bound(&nt).unwrap(), 5.912, 5e-3));
        let l = DistributionSpec::standard(Family::Logistic);
        assert!(close(transport_logistic_bound(&l).unwrap(), 4.0, 1e-9));
        let g = DistributionSpec::standard(Family::Gumbel).truncated(-0.919, 3.561).unwrap();
        assert!(close(transport_logistic_bound(&g).unwrap(), 2.418, 5e-3));
    }

    #[test]
    fn transport_ordering() {
        for fam in Family::ALL {
            let d = DistributionSpec::standard(fam);
            assert!(transport_logistic_bound(&d).unwrap() <= transport_doubleexp_bound(&d).unwrap() + 1e-12);
        }
    }

    #[test]
    fn symmetric_restriction_examples() {
        let n = DistributionSpec::standard(Family::Normal);
        let i = Interval::new(-3.0, 3.0).unwrap();
        let b = symmetric_restriction_bound(&n, i, 1.0).unwrap();
        assert!(close(b, 0.9946, 1e-4));
        let de = DistributionSpec::standard(Family::DoubleExponential);
        let b = symmetric_restriction_bound(&de, Interval::new(-2.0, 2.0).unwrap(), 4.0).unwrap();
        let mass = 1.0 - (-2.0f64).exp();
        assert!(close(b, 4.0 * mass * mass, 1e-14));
        assert_eq!(symmetric_restriction_bound(&n, Interval::REAL_LINE, 1.0).unwrap(), 1.0);
        let bad = symmetric_restriction_bound(&n, Interval::new(-1.0, 3.0).unwrap(), 1.0);
        assert!(matches!(bad, Err(Error::Precondition(_))));
        let shifted = DistributionSpec::new(Family::Normal, 1.0, 1.0).unwrap();
        assert!(matches!(symmetric_restriction_bound(&shifted, i, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn gaussian_and_perturbation_examples() {
        assert!(close(gaussian_symmetric_uniform_bound(PI / 2.0).unwrap(), 1.0, 1e-15));
        assert!(close(gaussian_symmetric_uniform_bound(1.0).unwrap(), 0.4053, 1e-4));
        assert!(gaussian_symmetric_uniform_bound(1.0).unwrap() > 1.0 / 3.0);
        assert!(close(gaussian_symmetric_uniform_bound(3.0).unwrap(), 3.648, 1e-3));
        assert_eq!(bounded_perturbation_bound(0.7, 0.0).unwrap(), 0.7);
        assert!(close(bounded_perturbation_bound(0.7, 2f64.ln()).unwrap(), 1.4, 1e-15));
        assert!(bounded_perturbation_bound(1.0, -1.0).is_err());

        // normal on [-b, b] as a perturbation of the uniform law there
        let b = 1.5;
        let base = 4.0 * b * b / (PI * PI);
        let bound = bounded_perturbation_bound(base, b * b / 2.0).unwrap();
        let exact = crate::exact::truncated_normal_constant(-b, b).unwrap().estimate.value;
        assert!(bound >= exact);
    }

    #[test]
    fn bakry_emery_examples() {
        assert!(close(bakry_emery_bound(&DistributionSpec::standard(Family::Normal)).unwrap(), 1.0, 1e-15));
        let n = DistributionSpec::new(Family::Normal, 3.0, 2.5).unwrap();
        assert!(close(bakry_emery_bound(&n).unwrap(), 6.25, 1e-12));
        let de = DistributionSpec::standard(Family::DoubleExponential);
        assert!(matches!(bakry_emery_bound(&de), Err(Error::NotApplicable(_))));
        let u = DistributionSpec::standard(Family::Uniform);
        assert!(matches!(bakry_emery_bound(&u), Err(Error::NotApplicable(_))));
        let l = DistributionSpec::standard(Family::Logistic).truncated(-1.0, 2.0).unwrap();
        let v2 = |z: f64| {
            let t = (0.5 * z).tanh();
            0.5 * (1.0 - t * t)
        };
        assert!(close(bakry_emery_bound(&l).unwrap(), 1.0 / v2(2.0), 1e-12));
    }

    #[test]
    fn variance_examples() {
        let tri = DistributionSpec::standard(Family::Triangular);
        assert!(close(variance_lower_bound(&tri).unwrap(), 1.0 / 6.0, 1e-12));
        assert!(close(variance_lower_bound(&DistributionSpec::standard(Family::Normal)).unwrap(), 1.0, 1e-12));
        let g = DistributionSpec::standard(Family::Gumbel).truncated(-0.919, 3.561).unwrap();
        assert!(close(variance_lower_bound(&g).unwrap(), 1.012, 5e-3));
    }

    #[test]
    fn chen_examples() {
        let grid: Vec<f64> = (0..=2000).map(|i| -3.0 + 6.0 * i as f64 / 2000.0).collect();
        let n = DistributionSpec::standard(Family::Normal);
        assert!(close(chen_lower_gap(&n, &grid, |_| 1.0).unwrap(), 1.0, 1e-12));

        let u = DistributionSpec::new(Family::Uniform, 0.5, 0.5).unwrap();
        let grid: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
        let gap = chen_lower_gap(&u, &grid, |x| PI * (PI * x).sin()).unwrap();
        assert!(close(gap, PI * PI, 1e-4));

        let tri = DistributionSpec::standard(Family::Triangular);
        let sat = triangular_constant().unwrap().saturating.unwrap();
        let grid: Vec<f64> = (1..2000).map(|i| -1.0 + i as f64 * 1e-3).collect();
        let gap = chen_lower_gap(&tri, &grid, |x| sat.derivative(x)).unwrap();
        let r1 = bessel_j0_first_zero();
        assert!(close(gap, r1 * r1, 1e-3), "{gap}");

        assert!(matches!(chen_lower_gap(&n, &[-1.0, 0.0, 1.0], |x| x), Err(Error::Precondition(_))));
    }

    #[test]
    fn all_bounds_sandwich_triangular() {
        let tri = DistributionSpec::standard(Family::Triangular);
        let c = triangular_constant().unwrap().estimate.value;
        for r in all_bounds(&tri).unwrap() {
            assert!(r.contains(c, 1e-9), "{r:?}");
        }
    }
}
