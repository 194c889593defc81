//! End-to-end acceptance checks. Runs without the libtest harness so the
//! criteria execute in order and each prints exactly one PASS/FAIL line.

use std::f64::consts::PI;
use std::io::Write;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use poincare::bounds::{self, BoundMethod};
use poincare::error::Result;
use poincare::exact;
use poincare::fem;
use poincare::sa::{self, FnModel, Input, StudyOptions};
use poincare::{poincare_constant, DistributionSpec, Family};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(name: &str, got: f64, want: f64, tol: f64) -> std::result::Result<(), String> {
    ensure((got - want).abs() <= tol, || format!("{name}: got {got:.10}, want {want} ± {tol:e}"))
}

fn within(elapsed: Duration, limit_secs: u64) -> std::result::Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_secs as f64, || {
        format!("took {:.1} s, limit {limit_secs} s", elapsed.as_secs_f64())
    })
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn closed_forms() -> Check {
    let start = Instant::now();
    let uniform = DistributionSpec::new(Family::Uniform, 0.0, 0.5).map_err(err)?;
    let c = poincare_constant(&uniform, 1e-8).map_err(err)?.value;
    close("uniform [-1/2, 1/2]", c, 1.0 / (PI * PI), 1e-12)?;

    let normal = DistributionSpec::standard(Family::Normal);
    let c = fem::unbounded_limit(&normal, poincare::LIMIT_TOL).map_err(err)?.value;
    close("N(0,1) limit", c, 1.0, 1e-3)?;

    let laplace = DistributionSpec::standard(Family::DoubleExponential);
    let c = poincare_constant(&laplace, 1e-8).map_err(err)?.value;
    close("double exponential", c, 4.0, 4e-3)?;

    for (a, b) in [(0.0, 1.0), (0.5, 3.0), (2.0, 2.25), (0.0, 10.0), (1.0, 40.0)] {
        let d = DistributionSpec::standard(Family::Exponential).truncated(a, b).map_err(err)?;
        let c = poincare_constant(&d, 1e-8).map_err(err)?.value;
        let w = PI / (b - a);
        close(&format!("exponential on [{a}, {b}]"), c, 1.0 / (0.25 + w * w), 1e-10)?;
    }

    let tri = DistributionSpec::standard(Family::Triangular);
    let c = poincare_constant(&tri, 1e-8).map_err(err)?.value;
    close("triangular", c, 0.1729, 1e-4)?;
    within(start.elapsed(), 30)?;
    Ok(format!("{:.2} s", start.elapsed().as_secs_f64()))
}

fn bound_block() -> Check {
    let start = Instant::now();
    let cases = [
        ("triangular", DistributionSpec::standard(Family::Triangular), [1.0, 0.296, 0.173, 0.167]),
        (
            "normal on [-1.875, inf)",
            DistributionSpec::standard(Family::Normal).truncated(-1.875, f64::INFINITY).map_err(err)?,
            [5.912, 1.484, 0.892, 0.862],
        ),
        (
            "gumbel on [-0.919, 3.561]",
            DistributionSpec::standard(Family::Gumbel).truncated(-0.919, 3.561).map_err(err)?,
            [6.956, 2.418, 1.257, 1.012],
        ),
    ];
    for (name, d, want) in cases {
        let got = [
            bounds::transport_doubleexp_bound(&d).map_err(err)?,
            bounds::transport_logistic_bound(&d).map_err(err)?,
            poincare_constant(&d, 1e-6).map_err(err)?.value,
            bounds::variance_lower_bound(&d).map_err(err)?,
        ];
        for (label, (g, w)) in ["doubleexp transport", "logistic transport", "constant", "variance"]
            .iter()
            .zip(got.iter().zip(want))
        {
            close(&format!("{name} {label}"), *g, w, 0.005)?;
        }
    }
    within(start.elapsed(), 120)?;
    Ok(format!("12 values, {:.2} s", start.elapsed().as_secs_f64()))
}

#[derive(Deserialize)]
struct RiverStudy {
    output_variance: f64,
    inputs: Vec<RiverInput>,
    expected_bounds: Vec<f64>,
}

#[derive(Deserialize)]
struct RiverInput {
    name: String,
    nu: f64,
    law: DistributionSpec,
}

fn river_constants() -> Check {
    let uniform = DistributionSpec::new(Family::Uniform, 30.0, 10.0).map_err(err)?;
    let c = poincare_constant(&uniform, 1e-8).map_err(err)?.value;
    close("uniform [20, 40]", c, 40.528, 1e-3)?;

    let dz = DistributionSpec::standard(Family::Normal).truncated(-3.0, 3.0).map_err(err)?;
    let c_dz = poincare_constant(&dz, 1e-8).map_err(err)?.value;
    close("N(0,1) on [-3, 3]", c_dz, 0.976, 1e-3)?;

    let q = DistributionSpec::new(Family::Normal, 0.0, 50.0).map_err(err)?.truncated(-150.0, 150.0).map_err(err)?;
    let c_q = poincare_constant(&q, 1e-8).map_err(err)?.value;
    close("N(0,50^2) on [-150, 150]", c_q, 2441.071, 2.5)?;
    ensure((c_q / (2500.0 * c_dz) - 1.0).abs() <= 1e-9, || {
        format!("scaling: {c_q} vs 2500 x {c_dz}")
    })?;

    let study: RiverStudy =
        serde_json::from_str(include_str!("fixtures/river_study.json")).map_err(err)?;
    for (inp, want) in study.inputs.iter().zip(&study.expected_bounds) {
        let c = poincare_constant(&inp.law, 1e-8).map_err(err)?.value;
        let bound = sa::dgsm_upper_bound(c, inp.nu, study.output_variance).map_err(err)?;
        close(&format!("bound of {}", inp.name), bound, *want, 0.002)?;
    }
    Ok(format!("C = {c:.3}, {c_dz:.4}, {c_q:.3}"))
}

fn hermite_sweep() -> Check {
    let start = Instant::now();
    let mut count = 0;
    for n in 2..=20usize {
        for i in 1..n {
            let (iv, _) = exact::hermite_interval_constant(n, i).map_err(err)?;
            let c = exact::truncated_normal_constant(iv.lo, iv.hi).map_err(err)?.estimate.value;
            close(&format!("He_{n} interval {i}"), c, 1.0 / (n as f64 + 1.0), 1e-8)?;
            count += 1;
        }
    }
    within(start.elapsed(), 60)?;
    Ok(format!("{count} intervals, {:.2} s", start.elapsed().as_secs_f64()))
}

fn fem_order() -> Check {
    let d = DistributionSpec::new(Family::Uniform, 0.5, 0.5).map_err(err)?;
    let exact_gap = PI * PI;
    let mut errors = Vec::new();
    for n in [250, 500, 1000] {
        let (_, sol) = fem::solve_distribution(&d, n, false).map_err(err)?;
        ensure(sol.lambda0.abs() <= 1e-8 * sol.lambda1, || {
            format!("n = {n}: lambda0 = {:e} vs lambda1 = {}", sol.lambda0, sol.lambda1)
        })?;
        ensure(sol.u1.windows(2).all(|w| w[1] > w[0]), || format!("n = {n}: u1 not strictly increasing"))?;
        errors.push((sol.lambda1 - exact_gap).abs());
    }
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    for p in &orders {
        ensure((1.8..=2.2).contains(p), || format!("observed order {p:.4} outside [1.8, 2.2]"))?;
    }
    Ok(format!("orders {:.4}, {:.4}", orders[0], orders[1]))
}

/// Bounded truncation of a random law, cut at random parent quantiles.
fn random_truncated(rng: &mut ChaCha8Rng) -> Result<DistributionSpec> {
    let family = Family::ALL[rng.random_range(0..Family::ALL.len())];
    let parent = DistributionSpec::new(family, rng.random_range(-3.0..3.0), rng.random_range(0.3..4.0))?;
    let lo = parent.quantile(rng.random_range(0.001..0.45))?;
    let hi = parent.quantile(rng.random_range(0.55..0.999))?;
    parent.truncated(lo, hi)
}

fn sandwich() -> Check {
    const SLACK: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(20_251_019);
    let mut checked = 0;
    for k in 0..200 {
        let d = random_truncated(&mut rng).map_err(err)?;
        let c = poincare_constant(&d, 1e-8).map_err(|e| format!("case {k} ({d}): {e}"))?.value;
        let reports = bounds::all_bounds(&d).map_err(|e| format!("case {k} ({d}): {e}"))?;
        for r in &reports {
            ensure(r.contains(c, SLACK), || {
                format!("case {k} ({d}): C = {c} outside {} [{}, {}]", r.method, r.lower, r.upper)
            })?;
            checked += 1;
        }
        let upper = |m: BoundMethod| reports.iter().find(|r| r.method == m).map(|r| r.upper).unwrap();
        let (logistic, laplace) = (upper(BoundMethod::TransportLogistic), upper(BoundMethod::TransportDoubleexp));
        ensure(logistic <= laplace * (1.0 + SLACK), || {
            format!("case {k} ({d}): logistic transport {logistic} > doubleexp transport {laplace}")
        })?;
    }
    Ok(format!("200 laws, {checked} bound checks"))
}

fn flood_ranking() -> Check {
    let start = Instant::now();
    let report = sa::screening_study(&sa::flood_model(), &sa::flood_inputs(), &StudyOptions::new(10_000, 42), 0.05)
        .map_err(err)?;
    let line = |name: &str| report.input(name).unwrap();
    let active: Vec<&str> = report.ranking().into_iter().filter(|n| line(n).active).collect();
    let order: Vec<&str> = active.iter().copied().filter(|n| ["Q", "Hd", "Zv", "Ks"].contains(n)).collect();
    ensure(order == ["Q", "Hd", "Zv", "Ks"], || format!("active ranking {active:?}"))?;
    for r in &report.inputs {
        let sd = r.sobol_sd.hypot(r.bound_sd);
        ensure(r.upper_bound >= r.total_sobol - 3.0 * sd, || {
            format!("{}: bound {} < total index {} - 3 x {sd}", r.name, r.upper_bound, r.total_sobol)
        })?;
    }
    ensure(line("Cb").upper_bound < 0.05, || format!("Cb bound {}", line("Cb").upper_bound))?;
    for name in ["Zm", "L", "B", "Cb"] {
        ensure(!line(name).active, || format!("{name} active with bound {}", line(name).upper_bound))?;
    }
    within(start.elapsed(), 120)?;
    Ok(format!("ranking {active:?}, {:.2} s", start.elapsed().as_secs_f64()))
}

/// Random polynomial of total degree at most three with its gradient.
struct Polynomial {
    linear: Vec<f64>,
    square: Vec<f64>,
    cubic: Vec<f64>,
    cross: Vec<(usize, usize, f64)>,
}

impl Polynomial {
    fn random(rng: &mut ChaCha8Rng, d: usize) -> Self {
        let mut coef = |p: f64| if rng.random_bool(p) { rng.random_range(-2.0..2.0) } else { 0.0 };
        let linear = (0..d).map(|_| coef(0.9)).collect();
        let square = (0..d).map(|_| coef(0.5)).collect();
        let cubic = (0..d).map(|_| coef(0.3)).collect();
        let mut cross = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                let c = coef(0.4);
                if c != 0.0 {
                    cross.push((i, j, c));
                }
            }
        }
        Self { linear, square, cubic, cross }
    }

    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mut v = 0.0;
        let mut g = vec![0.0; x.len()];
        for i in 0..x.len() {
            v += self.linear[i] * x[i] + self.square[i] * x[i] * x[i] + self.cubic[i] * x[i].powi(3);
            g[i] += self.linear[i] + 2.0 * self.square[i] * x[i] + 3.0 * self.cubic[i] * x[i] * x[i];
        }
        for &(i, j, c) in &self.cross {
            v += c * x[i] * x[j];
            g[i] += c * x[j];
            g[j] += c * x[i];
        }
        (v, g)
    }
}

fn dgsm_validity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for k in 0..20 {
        let d = rng.random_range(2..=4usize);
        let inputs: Vec<Input> = (0..d)
            .map(|i| random_truncated(&mut rng).map(|law| Input::new(format!("x{i}"), law)))
            .collect::<Result<_>>()
            .map_err(err)?;
        let poly = Polynomial::random(&mut rng, d);
        let model = FnModel::new(d, |x: &[f64]| Ok(poly.eval(x)));
        let report = sa::screening_study(&model, &inputs, &StudyOptions::new(4096, 100 + k), 0.0)
            .map_err(|e| format!("model {k}: {e}"))?;
        if report.degenerate {
            continue;
        }
        for r in &report.inputs {
            let sd = r.sobol_sd.hypot(r.bound_sd);
            ensure(r.total_sobol <= r.upper_bound + 3.0 * sd, || {
                format!("model {k}, {}: total index {} > bound {} + 3 x {sd}", r.name, r.total_sobol, r.upper_bound)
            })?;
            checked += 1;
        }
    }

    let coeffs = [1.0, -0.5, 2.0];
    let scales = [1.0, 3.0, 0.25];
    let inputs: Vec<Input> = scales
        .iter()
        .enumerate()
        .map(|(i, &s)| DistributionSpec::new(Family::Normal, 0.0, s).map(|law| Input::new(format!("x{i}"), law)))
        .collect::<Result<_>>()
        .map_err(err)?;
    let model = FnModel::new(3, |x: &[f64]| {
        Ok((x.iter().zip(coeffs).map(|(x, a)| a * x).sum(), coeffs.to_vec()))
    });
    let report = sa::screening_study(&model, &inputs, &StudyOptions::new(10_000, 11), 0.0).map_err(err)?;
    for r in &report.inputs {
        let sd = r.sobol_sd.hypot(r.bound_sd);
        ensure((r.upper_bound - r.total_sobol).abs() <= 3.0 * sd, || {
            format!("linear-Gaussian {}: bound {} vs total index {} (sd {sd})", r.name, r.upper_bound, r.total_sobol)
        })?;
    }
    Ok(format!("{checked} inputs over 20 models, linear-Gaussian tight"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("closed-form constants", closed_forms),
        ("bound block", bound_block),
        ("river study constants and bounds", river_constants),
        ("Hermite interval sweep", hermite_sweep),
        ("FEM convergence order", fem_order),
        ("bound sandwich", sandwich),
        ("flood screening ranking", flood_ranking),
        ("DGSM bound validity", dgsm_validity),
    ];
    let mut failed = 0;
    let mut out = std::io::stdout();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let line = match run() {
            Ok(info) => format!("criterion {}: PASS  {name} ({info})", k + 1),
            Err(why) => {
                failed += 1;
                format!("criterion {}: FAIL  {name}: {why}", k + 1)
            }
        };
        writeln!(out, "{line}").unwrap();
    }
    writeln!(out, "acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len()).unwrap();
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
