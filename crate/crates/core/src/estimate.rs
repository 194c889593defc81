//! Result types shared by the exact and finite-element solvers.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::dist::{DistributionSpec, Interval};
use crate::error::Result;
use crate::quad;

/// How a Poincaré constant was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    FirstZero,
    Fem,
    Limit,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed_form",
            Method::FirstZero => "first_zero",
            Method::Fem => "fem",
            Method::Limit => "limit",
        })
    }
}

/// An optimal Poincaré constant C_P and the matching spectral gap 1/C_P.
///
/// `error_estimate` is an absolute error in the units of `value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoincareEstimate {
    pub value: f64,
    pub method: Method,
    pub error_estimate: f64,
    pub spectral_gap: f64,
}

impl PoincareEstimate {
    pub fn new(value: f64, method: Method, error_estimate: f64) -> Self {
        debug_assert!(value > 0.0);
        Self {
            value,
            method,
            error_estimate: error_estimate.abs(),
            spectral_gap: 1.0 / value,
        }
    }

    pub fn from_gap(spectral_gap: f64, method: Method, error_estimate: f64) -> Self {
        Self {
            value: 1.0 / spectral_gap,
            method,
            error_estimate: error_estimate.abs(),
            spectral_gap,
        }
    }

    /// Constant of the affine image with squared scale `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            method: self.method,
            error_estimate: self.error_estimate * factor,
            spectral_gap: self.spectral_gap / factor,
        }
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    ClosedForm {
        f: RealFn,
        df: RealFn,
        location: f64,
        scale: f64,
    },
    Sampled {
        nodes: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SaturatingKind {
    ClosedForm,
    Sampled,
}

/// A centered, increasing function attaining equality in the Poincaré
/// inequality, with its Rayleigh ratio ∫f'²dμ / ∫f²dμ.
#[derive(Clone)]
pub struct SaturatingFunction {
    repr: Repr,
    support: Interval,
    offset: f64,
    rayleigh: f64,
}

impl fmt::Debug for SaturatingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SaturatingFunction")
            .field("kind", &self.kind())
            .field("support", &self.support)
            .field("rayleigh", &self.rayleigh)
            .finish()
    }
}

impl SaturatingFunction {
    /// Wraps a closed-form extremal `f` (with derivative `df`) for the law
    /// `d`. The mean under `d` is subtracted and the Rayleigh ratio is
    /// computed by quadrature.
    pub fn closed_form<F, G>(d: &DistributionSpec, f: F, df: G) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let mut s = Self {
            repr: Repr::ClosedForm {
                f: Arc::new(f),
                df: Arc::new(df),
                location: 0.0,
                scale: 1.0,
            },
            support: d.support(),
            offset: 0.0,
            rayleigh: f64::NAN,
        };
        s.offset = d.expectation(|x| s.eval(x), 1e-13)?;
        s.rayleigh = s.rayleigh_quotient(d)?;
        Ok(s)
    }

    /// Piecewise-linear function through `(nodes, values)` with a known
    /// Rayleigh ratio (the discrete eigenvalue).
    pub fn sampled(nodes: Vec<f64>, values: Vec<f64>, rayleigh: f64) -> Self {
        assert_eq!(nodes.len(), values.len());
        assert!(nodes.len() >= 2);
        let support = Interval {
            lo: nodes[0],
            hi: nodes[nodes.len() - 1],
        };
        Self {
            repr: Repr::Sampled { nodes, values },
            support,
            offset: 0.0,
            rayleigh,
        }
    }

    pub fn kind(&self) -> SaturatingKind {
        match self.repr {
            Repr::ClosedForm { .. } => SaturatingKind::ClosedForm,
            Repr::Sampled { .. } => SaturatingKind::Sampled,
        }
    }

    pub fn support(&self) -> Interval {
        self.support
    }

    pub fn rayleigh(&self) -> f64 {
        self.rayleigh
    }

    /// Nodal data of a sampled function.
    pub fn samples(&self) -> Option<(&[f64], &[f64])> {
        match &self.repr {
            Repr::Sampled { nodes, values } => Some((nodes, values)),
            Repr::ClosedForm { .. } => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let raw = match &self.repr {
            Repr::ClosedForm { f, location, scale, .. } => f((x - location) / scale),
            Repr::Sampled { nodes, values } => {
                let i = element_index(nodes, x);
                let t = (x - nodes[i]) / (nodes[i + 1] - nodes[i]);
                values[i] + t * (values[i + 1] - values[i])
            }
        };
        raw - self.offset
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::ClosedForm { df, location, scale, .. } => df((x - location) / scale) / scale,
            Repr::Sampled { nodes, values } => {
                let i = element_index(nodes, x);
                (values[i + 1] - values[i]) / (nodes[i + 1] - nodes[i])
            }
        }
    }

    /// The same function transported by x -> location + scale * x.
    pub fn rescaled(&self, location: f64, scale: f64) -> Self {
        let repr = match &self.repr {
            Repr::ClosedForm {
                f,
                df,
                location: l0,
                scale: s0,
            } => Repr::ClosedForm {
                f: f.clone(),
                df: df.clone(),
                location: location + scale * l0,
                scale: scale * s0,
            },
            Repr::Sampled { nodes, values } => Repr::Sampled {
                nodes: nodes.iter().map(|x| location + scale * x).collect(),
                values: values.clone(),
            },
        };
        Self {
            repr,
            support: Interval {
                lo: location + scale * self.support.lo,
                hi: location + scale * self.support.hi,
            },
            offset: self.offset,
            rayleigh: self.rayleigh / (scale * scale),
        }
    }

    /// ∫f dμ under `d`.
    pub fn mean_under(&self, d: &DistributionSpec) -> Result<f64> {
        self.integrate_against(d, |x| self.eval(x))
    }

    /// ∫f'² dμ / Var_μ(f), by quadrature.
    pub fn rayleigh_quotient(&self, d: &DistributionSpec) -> Result<f64> {
        let mean = self.mean_under(d)?;
        let num = self.integrate_against(d, |x| self.derivative(x).powi(2))?;
        let den = self.integrate_against(d, |x| (self.eval(x) - mean).powi(2))?;
        Ok(num / den)
    }

    /// Minimum relative increment over `n` equispaced points, negative when
    /// the function fails to increase somewhere.
    pub fn is_strictly_increasing(&self, n: usize) -> bool {
        if let Some((_, values)) = self.samples() {
            return values.windows(2).all(|w| w[1] > w[0]);
        }
        let Interval { lo, hi } = self.support;
        let mut prev = self.eval(lo);
        (1..=n).all(|k| {
            let x = lo + (hi - lo) * k as f64 / n as f64;
            let v = self.eval(x);
            let ok = v > prev;
            prev = v;
            ok
        })
    }

    fn integrate_against<G: Fn(f64) -> f64>(&self, d: &DistributionSpec, g: G) -> Result<f64> {
        match &self.repr {
            Repr::Sampled { nodes, .. } => {
                // element-wise Gauss–Legendre, exact for P1 data up to the density
                let rule = quad::gl8();
                Ok(nodes
                    .windows(2)
                    .map(|w| rule.integrate(|x| g(x) * d.pdf(x), w[0], w[1]))
                    .sum())
            }
            Repr::ClosedForm { .. } => d.expectation(g, 1e-12),
        }
    }
}

fn element_index(nodes: &[f64], x: f64) -> usize {
    let n = nodes.len();
    match nodes.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => i.min(n - 2),
        Err(0) => 0,
        Err(i) => (i - 1).min(n - 2),
    }
}
