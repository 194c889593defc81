//! `constant` and `bounds` commands.

use clap::ValueEnum;
use poincare::bounds::{self, BoundReport};
use poincare::fem::{self, FemOptions};
use poincare::{exact, DistributionSpec, Error, PoincareEstimate};
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};
use crate::format::json_num;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    /// Exact if available, else finite elements (or their limit), else bounds.
    Auto,
    Exact,
    Fem,
    /// Report the tightest upper bound as the value.
    Bounds,
}

#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub method: MethodChoice,
    pub tol: f64,
    pub max_elements: usize,
    pub precision: usize,
}

/// Reads a spec from a file path, `-` for stdin, or inline JSON.
pub fn read_spec(arg: &str) -> CliResult<DistributionSpec> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else if arg == "-" {
        std::io::read_to_string(std::io::stdin()).map_err(|e| CliError::Input(format!("stdin: {e}")))?
    } else {
        std::fs::read_to_string(arg).map_err(|e| CliError::Input(format!("{arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("distribution spec: {e}")))
}

/// Outcome of the method cascade.
pub struct Computed {
    pub value: f64,
    pub method: String,
    pub error_estimate: Option<f64>,
    pub warning: Option<String>,
}

impl Computed {
    fn from_estimate(e: PoincareEstimate) -> Self {
        Self {
            value: e.value,
            method: e.method.to_string(),
            error_estimate: Some(e.error_estimate),
            warning: None,
        }
    }
}

fn by_fem(d: &DistributionSpec, s: &Settings) -> poincare::Result<PoincareEstimate> {
    if d.is_bounded() {
        let opts = FemOptions {
            max_elements: s.max_elements,
            ..FemOptions::with_tol(s.tol)
        };
        Ok(fem::poincare_fem_with(d, &opts)?.0)
    } else {
        fem::unbounded_limit(d, s.tol.max(poincare::LIMIT_TOL))
    }
}

fn tightest_upper(reports: &[BoundReport]) -> Option<&BoundReport> {
    reports
        .iter()
        .filter(|r| r.upper.is_finite())
        .min_by(|a, b| a.upper.total_cmp(&b.upper))
}

fn bounds_only(reports: &poincare::Result<Vec<BoundReport>>, reason: Option<&Error>) -> CliResult<Computed> {
    let reports = match reports {
        Ok(r) => r,
        Err(e) => return Err(reason.cloned().unwrap_or_else(|| e.clone()).into()),
    };
    let best = tightest_upper(reports).ok_or_else(|| {
        CliError::Core(reason.cloned().unwrap_or_else(|| Error::Numerical("no finite upper bound".into())))
    })?;
    let why = reason.map_or(String::new(), |e| format!("{e}; "));
    Ok(Computed {
        value: best.upper,
        method: format!("bound:{}", best.method),
        error_estimate: None,
        warning: Some(format!("{why}value is the tightest upper bound, not the optimal constant")),
    })
}

/// Runs the requested method, falling back as `auto` prescribes.
pub fn compute(d: &DistributionSpec, s: &Settings, reports: &poincare::Result<Vec<BoundReport>>) -> CliResult<Computed> {
    match s.method {
        MethodChoice::Exact => Ok(Computed::from_estimate(exact::exact_constant(d)?.estimate)),
        MethodChoice::Fem => Ok(Computed::from_estimate(by_fem(d, s)?)),
        MethodChoice::Bounds => bounds_only(reports, None),
        MethodChoice::Auto => {
            let first = match exact::exact_constant(d) {
                Ok(r) => return Ok(Computed::from_estimate(r.estimate)),
                Err(Error::NotApplicable(_)) => by_fem(d, s),
                Err(e) => Err(e),
            };
            match first {
                Ok(e) => Ok(Computed::from_estimate(e)),
                Err(e @ (Error::Convergence(_) | Error::Resource(_) | Error::Numerical(_) | Error::Precondition(_))) => {
                    bounds_only(reports, Some(&e))
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

/// JSON object `{method: {lower, upper, details...}}`.
pub fn bounds_json(reports: &[BoundReport], digits: usize) -> Value {
    let mut out = Map::new();
    for r in reports {
        let mut entry = Map::new();
        entry.insert("lower".into(), json_num(r.lower, digits));
        entry.insert("upper".into(), json_num(r.upper, digits));
        for (k, v) in &r.details {
            entry.insert(k.clone(), json_num(*v, digits));
        }
        out.insert(r.method.to_string(), Value::Object(entry));
    }
    Value::Object(out)
}

pub fn constant_json(d: &DistributionSpec, s: &Settings) -> CliResult<Value> {
    let reports = bounds::all_bounds(d);
    let c = compute(d, s, &reports)?;
    let digits = s.precision;
    let mut out = json!({
        "spec": d,
        "value": json_num(c.value, digits),
        "method": c.method,
        "error_estimate": c.error_estimate.map_or(Value::Null, |e| json_num(e, digits)),
        "spectral_gap": json_num(1.0 / c.value, digits),
    });
    out["bounds"] = match &reports {
        Ok(r) => bounds_json(r, digits),
        Err(e) => json!({ "error": e.to_string() }),
    };
    if let Some(w) = c.warning {
        out["warning"] = Value::String(w);
    }
    Ok(out)
}

pub fn bounds_command_json(d: &DistributionSpec, digits: usize) -> CliResult<Value> {
    let reports = bounds::all_bounds(d)?;
    let lower = reports.iter().map(|r| r.lower).fold(0.0, f64::max);
    let upper = reports.iter().map(|r| r.upper).fold(f64::INFINITY, f64::min);
    Ok(json!({
        "spec": d,
        "lower": json_num(lower, digits),
        "upper": json_num(upper, digits),
        "bounds": bounds_json(&reports, digits),
    }))
}
