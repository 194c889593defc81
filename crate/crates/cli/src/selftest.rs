//! `selftest` command: recomputes published reference values.

use std::f64::consts::PI;

use poincare::bounds;
use poincare::fem;
use poincare::sa;
use poincare::{poincare_constant, DistributionSpec, Family};

use crate::error::CliResult;

pub struct Check {
    pub name: String,
    pub got: Option<f64>,
    pub want: f64,
    pub tol: f64,
    pub note: String,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.got.is_some_and(|g| (g - self.want).abs() <= self.tol)
    }
}

fn check(name: &str, got: poincare::Result<f64>, want: f64, tol: f64) -> Check {
    let (got, note) = match got {
        Ok(v) => (Some(v), String::new()),
        Err(e) => (None, e.to_string()),
    };
    Check {
        name: name.into(),
        got,
        want,
        tol,
        note,
    }
}

fn constant(d: poincare::Result<DistributionSpec>) -> poincare::Result<f64> {
    Ok(poincare_constant(&d?, 1e-8)?.value)
}

/// Input name, DGSM ν, constant, expected DGSM bound (output variance 0.369).
const RIVER_STUDY: [(&str, f64, f64); 5] = [
    ("Ks11", 5.695e-3, 0.625),
    ("Ks12", 2.728e-4, 0.029),
    ("dZ11", 1.089e-1, 0.288),
    ("dZ12", 6.592e-3, 0.017),
    ("Q", 3.553e-5, 0.235),
];
const RIVER_VARIANCE: f64 = 0.369;

pub fn run() -> Vec<Check> {
    let std = DistributionSpec::standard;
    let mut out = vec![
        check("uniform [-1/2, 1/2]", constant(DistributionSpec::new(Family::Uniform, 0.0, 0.5)), 1.0 / (PI * PI), 1e-12),
        check(
            "normal limit",
            fem::unbounded_limit(&std(Family::Normal), poincare::LIMIT_TOL).map(|e| e.value),
            1.0,
            1e-3,
        ),
        check("double exponential", constant(Ok(std(Family::DoubleExponential))), 4.0, 4e-3),
        check(
            "exponential on [0.5, 3]",
            constant(std(Family::Exponential).truncated(0.5, 3.0)),
            1.0 / (0.25 + (PI / 2.5).powi(2)),
            1e-10,
        ),
        check("triangular", constant(Ok(std(Family::Triangular))), 0.1729, 1e-4),
    ];

    let block = [
        ("triangular", Ok(std(Family::Triangular)), [1.0, 0.296, 0.173, 0.167]),
        ("N(0,1) on [-1.875, inf)", std(Family::Normal).truncated(-1.875, f64::INFINITY), [5.912, 1.484, 0.892, 0.862]),
        ("G(0,1) on [-0.919, 3.561]", std(Family::Gumbel).truncated(-0.919, 3.561), [6.956, 2.418, 1.257, 1.012]),
    ];
    for (name, d, want) in block {
        let labels = ["doubleexp transport", "logistic transport", "constant", "variance"];
        for (k, (label, w)) in labels.iter().zip(want).enumerate() {
            let got = d.clone().and_then(|d| match k {
                0 => bounds::transport_doubleexp_bound(&d),
                1 => bounds::transport_logistic_bound(&d),
                2 => poincare_constant(&d, 1e-6).map(|e| e.value),
                _ => bounds::variance_lower_bound(&d),
            });
            out.push(check(&format!("{name} {label}"), got, w, 0.005));
        }
    }

    let c_ks = constant(DistributionSpec::new(Family::Uniform, 30.0, 10.0));
    let c_dz = constant(std(Family::Normal).truncated(-3.0, 3.0));
    let c_q = constant(DistributionSpec::new(Family::Normal, 0.0, 50.0).and_then(|d| d.truncated(-150.0, 150.0)));
    out.push(check("uniform [20, 40]", c_ks.clone(), 40.528, 1e-3));
    out.push(check("N(0,1) on [-3, 3]", c_dz.clone(), 0.976, 1e-3));
    out.push(check("N(0,50^2) on [-150, 150]", c_q.clone(), 2441.071, 2.5));
    for (name, nu, want) in RIVER_STUDY {
        let c = match name {
            "Ks11" | "Ks12" => c_ks.clone(),
            "Q" => c_q.clone(),
            _ => c_dz.clone(),
        };
        let got = c.and_then(|c| sa::dgsm_upper_bound(c, nu, RIVER_VARIANCE));
        out.push(check(&format!("DGSM bound {name}"), got, want, 0.002));
    }
    out
}

pub fn render(checks: &[Check]) -> CliResult<(String, usize)> {
    let mut text = String::new();
    let mut failed = 0;
    for c in checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        failed += usize::from(!c.passed());
        let got = c.got.map_or_else(|| "error".to_string(), |g| format!("{g:.6}"));
        text.push_str(&format!("{status}  {:<40} got {got:<14} want {} ± {:e}", c.name, c.want, c.tol));
        if !c.note.is_empty() {
            text.push_str(&format!("  ({})", c.note));
        }
        text.push('\n');
    }
    text.push_str(&format!("{} of {} checks passed\n", checks.len() - failed, checks.len()));
    Ok((text, failed))
}
