//! Gauss–Legendre rules and an adaptive integrator built on them.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the rule by Newton iteration on P_n, seeded with the
    /// Tricomi approximation of each root.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over [a, b] with this fixed rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Shared 5-point rule (finite-element assembly).
pub fn gl5() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(5))
}

/// Shared 8-point rule (cell integrals in bound computations).
pub fn gl8() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(8))
}

/// Shared 64-point rule (adaptive integration).
pub fn gl64() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(64))
}

const MAX_DEPTH: usize = 40;
const MAX_PANELS: usize = 200_000;

/// Adaptive 64-point Gauss–Legendre integration of `f` over a finite [a, b].
///
/// A panel is accepted when the whole-panel estimate agrees with the sum of
/// its two halves to `abs_tol`, or to `rel_tol` times a crude estimate of
/// ∫|f| over [a, b] (so cancelling integrands do not chase a zero target).
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    adaptive_piecewise(f, &[a, b], rel_tol, abs_tol)
}

struct Refiner<'a, F> {
    f: &'a F,
    rule: &'static GaussLegendre,
    panels: usize,
    /// Disagreement left on panels that reached the depth limit, typically
    /// rounding noise in the integrand.
    unresolved: f64,
}

impl<F: Fn(f64) -> f64> Refiner<'_, F> {
    fn refine(&mut self, a: f64, b: f64, whole: f64, tol: f64, depth: usize) -> Result<f64> {
        let mid = 0.5 * (a + b);
        let left = self.rule.integrate(self.f, a, mid);
        let right = self.rule.integrate(self.f, mid, b);
        let split = left + right;
        let diff = (split - whole).abs();
        if diff <= tol || !diff.is_finite() {
            return Ok(split);
        }
        if depth >= MAX_DEPTH || mid <= a || mid >= b {
            self.unresolved += diff;
            return Ok(split);
        }
        self.panels += 2;
        if self.panels > MAX_PANELS {
            return Err(Error::Numerical(format!(
                "adaptive quadrature did not converge on [{a}, {b}] (panel disagreement {diff:.3e})"
            )));
        }
        let l = self.refine(a, mid, left, 0.5 * tol, depth + 1)?;
        let r = self.refine(mid, b, right, 0.5 * tol, depth + 1)?;
        Ok(l + r)
    }
}

/// Adaptive integration over consecutive panels delimited by `breaks`.
pub fn adaptive_piecewise<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], rel_tol: f64, abs_tol: f64) -> Result<f64> {
    if let (Some(a), Some(b)) = (breaks.first(), breaks.last()) {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Numerical(format!(
                "adaptive quadrature needs finite limits, got [{a}, {b}]"
            )));
        }
    }
    let rule = gl64();
    let wholes: Vec<f64> = breaks.windows(2).map(|w| rule.integrate(f, w[0], w[1])).collect();
    let magnitude: f64 = breaks
        .windows(2)
        .map(|w| rule.integrate(|x| f(x).abs(), w[0], w[1]))
        .sum();
    let mut refiner = Refiner {
        f,
        rule,
        panels: 0,
        unresolved: 0.0,
    };
    let budget = abs_tol.max(rel_tol * magnitude);
    let mut total = 0.0;
    for (w, whole) in breaks.windows(2).zip(wholes) {
        if w[0] == w[1] {
            continue;
        }
        let share = (w[1] - w[0]) / (breaks[breaks.len() - 1] - breaks[0]);
        let tol = budget * share.max(1e-3);
        total += refiner.refine(w[0], w[1], whole, tol, 0)?;
    }
    if !total.is_finite() {
        return Err(Error::Numerical("non-finite integral".into()));
    }
    if refiner.unresolved > budget {
        return Err(Error::Numerical(format!(
            "adaptive quadrature left {:.3e} unresolved, above the tolerance {budget:.3e}",
            refiner.unresolved
        )));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_point_rule_matches_tabulated_values() {
        let r = gl5();
        assert!((r.nodes[4] - 0.906_179_845_938_664).abs() < 1e-14);
        assert!((r.nodes[3] - 0.538_469_310_105_683).abs() < 1e-14);
        assert!((r.weights[2] - 128.0 / 225.0).abs() < 1e-14);
        assert!((r.weights[4] - 0.236_926_885_056_189_1).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 8, 17, 64] {
            let s: f64 = GaussLegendre::new(n).weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}: {s}");
        }
    }

    #[test]
    fn five_points_exact_for_degree_nine() {
        let v = gl5().integrate(|x| x.powi(9) + x.powi(8), 0.0, 1.0);
        assert!((v - (0.1 + 1.0 / 9.0)).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let f = |x: f64| (-(x * x) / 2.0).exp();
        let v = adaptive(&f, -40.0, 40.0, 1e-13, 1e-15).unwrap();
        assert!((v - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn adaptive_rejects_infinite_limits() {
        assert!(adaptive(&|x: f64| x, 0.0, f64::INFINITY, 1e-10, 0.0).is_err());
    }

    #[test]
    fn adaptive_terminates_on_cancelling_integrand() {
        let f = |x: f64| (3.0 * x).sin();
        let v = adaptive_piecewise(&f, &[-1.0, -0.3, 0.3, 1.0], 1e-13, 1e-300).unwrap();
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn adaptive_accepts_jump_at_depth_limit() {
        let f = |x: f64| if x < 1.0 / 3.0 { 0.0 } else { 1.0 };
        let v = adaptive(&f, 0.0, 1.0, 1e-10, 0.0).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-10);
    }
}
