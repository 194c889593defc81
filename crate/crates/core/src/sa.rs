//! Derivative-based global sensitivity measures, total Sobol indices and the
//! DGSM upper bound `S_i^T ≤ C_i ν_i / D`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::estimate::{Method, PoincareEstimate};

/// A differentiable function of `dimension()` independent inputs.
pub trait Model: Sync {
    fn dimension(&self) -> usize;

    /// Value and gradient at `x`.
    fn evaluate(&self, x: &[f64]) -> Result<(f64, Vec<f64>)>;
}

/// Model built from a closure.
pub struct FnModel<F> {
    dimension: usize,
    f: F,
}

impl<F> FnModel<F>
where
    F: Fn(&[f64]) -> Result<(f64, Vec<f64>)> + Sync,
{
    pub fn new(dimension: usize, f: F) -> Self {
        Self { dimension, f }
    }
}

impl<F> Model for FnModel<F>
where
    F: Fn(&[f64]) -> Result<(f64, Vec<f64>)> + Sync,
{
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        (self.f)(x)
    }
}

/// Maximal annual overflow of a dyke, `S = H + Z_v - H_d - C_b` with
/// `H = (Q / (B K_s sqrt((Z_m - Z_v)/L)))^0.6`.
///
/// Inputs in order: Q, K_s, Z_v, Z_m, H_d, C_b, L, B.
#[derive(Debug, Clone, Copy, Default)]
pub struct FloodModel;

pub const FLOOD_INPUT_NAMES: [&str; 8] = ["Q", "Ks", "Zv", "Zm", "Hd", "Cb", "L", "B"];

impl FloodModel {
    pub fn water_height(x: &[f64]) -> Result<f64> {
        let [q, ks, zv, zm, _, _, l, b] = x else {
            return Err(Error::Argument(format!("flood model takes 8 inputs, got {}", x.len())));
        };
        if !(zm > zv) {
            return Err(Error::Domain(format!("upstream level {zm} must exceed downstream level {zv}")));
        }
        if !(*q > 0.0 && *ks > 0.0 && *b > 0.0 && *l > 0.0) {
            return Err(Error::Domain("Q, Ks, B and L must be positive".into()));
        }
        Ok((q / (b * ks * ((zm - zv) / l).sqrt())).powf(0.6))
    }
}

impl Model for FloodModel {
    fn dimension(&self) -> usize {
        8
    }

    fn evaluate(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let h = Self::water_height(x)?;
        let (q, ks, zv, zm, hd, cb, l, b) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]);
        let s = h + zv - hd - cb;
        let dz = zm - zv;
        let grad = vec![
            0.6 * h / q,
            -0.6 * h / ks,
            1.0 + 0.3 * h / dz,
            -0.3 * h / dz,
            -1.0,
            -1.0,
            0.3 * h / l,
            -0.6 * h / b,
        ];
        Ok((s, grad))
    }
}

pub fn flood_model() -> FloodModel {
    FloodModel
}

/// A named input law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Input {
    pub name: String,
    pub dist: DistributionSpec,
}

impl Input {
    pub fn new(name: impl Into<String>, dist: DistributionSpec) -> Self {
        Self {
            name: name.into(),
            dist,
        }
    }
}

/// Input laws of the flood model.
pub fn flood_inputs() -> Vec<Input> {
    let tri = |lo: f64, hi: f64| DistributionSpec::new(Family::Triangular, 0.5 * (lo + hi), 0.5 * (hi - lo)).unwrap();
    let dists = [
        DistributionSpec::new(Family::Gumbel, 1013.0, 558.0).unwrap().truncated(500.0, 3000.0).unwrap(),
        DistributionSpec::new(Family::Normal, 30.0, 8.0).unwrap().truncated(15.0, f64::INFINITY).unwrap(),
        tri(49.0, 51.0),
        tri(54.0, 56.0),
        DistributionSpec::new(Family::Uniform, 8.0, 1.0).unwrap(),
        tri(55.0, 56.0),
        tri(4990.0, 5010.0),
        tri(295.0, 305.0),
    ];
    FLOOD_INPUT_NAMES.iter().zip(dists).map(|(n, d)| Input::new(*n, d)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Halton points with a seed-derived random digital shift.
    #[default]
    Halton,
    MonteCarlo,
}

/// Sample size and randomness of a study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    pub n: usize,
    pub seed: u64,
    pub sampling: Sampling,
    pub bootstrap: usize,
}

impl StudyOptions {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            sampling: Sampling::Halton,
            bootstrap: 500,
        }
    }
}

const PRIMES: [u64; 60] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107,
    109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229,
    233, 239, 241, 251, 257, 263, 269, 271, 277, 281,
];

/// Halton sequence in the first `dim` prime bases, each coordinate shifted
/// digit-wise (mod base) by seed-derived random digits.
#[derive(Debug, Clone)]
pub struct Halton {
    bases: Vec<u64>,
    shifts: Vec<Vec<u64>>,
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 || dim > PRIMES.len() {
            return Err(Error::Argument(format!(
                "Halton dimension must be in 1..={}, got {dim}",
                PRIMES.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bases = PRIMES[..dim].to_vec();
        let shifts = bases
            .iter()
            .map(|&b| {
                let digits = (64.0 / (b as f64).log2()).ceil() as usize + 1;
                (0..digits).map(|_| rng.random_range(0..b)).collect()
            })
            .collect();
        Ok(Self { bases, shifts })
    }

    pub fn dimension(&self) -> usize {
        self.bases.len()
    }

    /// Point number `index` (use indices from 1).
    pub fn point(&self, index: u64) -> Vec<f64> {
        self.bases
            .iter()
            .zip(&self.shifts)
            .map(|(&b, shift)| {
                let mut i = index;
                let mut u = 0.0;
                let mut scale = 1.0 / b as f64;
                for &r in shift {
                    let digit = (i % b + r) % b;
                    u += digit as f64 * scale;
                    i /= b;
                    scale /= b as f64;
                }
                u.clamp(f64::EPSILON * 0.5, 1.0 - f64::EPSILON * 0.5)
            })
            .collect()
    }
}

/// Uniform points in (0,1)^dim, row by row.
fn unit_sample(dim: usize, opts: &StudyOptions) -> Result<Vec<Vec<f64>>> {
    match opts.sampling {
        Sampling::Halton => {
            let h = Halton::new(dim, opts.seed)?;
            Ok((1..=opts.n as u64).map(|i| h.point(i)).collect())
        }
        Sampling::MonteCarlo => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            Ok((0..opts.n)
                .map(|_| {
                    (0..dim)
                        .map(|_| rng.random_range(f64::EPSILON * 0.5..1.0 - f64::EPSILON * 0.5))
                        .collect()
                })
                .collect())
        }
    }
}

fn check_study(model: &dyn Model, inputs: &[Input], opts: &StudyOptions) -> Result<()> {
    if model.dimension() != inputs.len() {
        return Err(Error::Argument(format!(
            "model has {} inputs but {} laws were given",
            model.dimension(),
            inputs.len()
        )));
    }
    if opts.n < 100 {
        return Err(Error::Argument(format!("sample size must be at least 100, got {}", opts.n)));
    }
    if opts.bootstrap < 2 {
        return Err(Error::Argument("bootstrap needs at least two resamples".into()));
    }
    Ok(())
}

/// Model outputs on the pick-freeze design.
struct Design {
    /// f(A_j)
    fa: Vec<f64>,
    /// f(B_j)
    fb: Vec<f64>,
    /// f(A_j with coordinate i taken from B_j), indexed [i][j]
    fab: Vec<Vec<f64>>,
    /// squared gradient of f at A_j, indexed [i][j]
    grad2: Vec<Vec<f64>>,
}

fn evaluate_design(model: &dyn Model, inputs: &[Input], opts: &StudyOptions, with_sobol: bool) -> Result<Design> {
    let d = inputs.len();
    let width = if with_sobol { 2 * d } else { d };
    let unit = unit_sample(width, opts)?;
    let map = |u: &[f64]| -> Vec<f64> {
        u.iter()
            .zip(inputs.iter().cycle())
            .map(|(&p, inp)| inp.dist.quantile_unchecked(p))
            .collect()
    };
    let eval = |j: usize, x: &[f64]| model.evaluate(x).map_err(|e| tag(e, j));

    struct Row {
        fa: f64,
        grad2: Vec<f64>,
        fb: f64,
        fab: Vec<f64>,
    }
    let rows: Vec<Row> = unit
        .par_iter()
        .enumerate()
        .map(|(j, u)| -> Result<Row> {
            let x = map(u);
            let (a, b) = x.split_at(d);
            let (fa, grad) = eval(j, a)?;
            if grad.len() != d {
                return Err(Error::Model {
                    index: j,
                    message: format!("gradient has {} components, expected {d}", grad.len()),
                });
            }
            let grad2 = grad.iter().map(|g| g * g).collect();
            if !with_sobol {
                return Ok(Row {
                    fa,
                    grad2,
                    fb: f64::NAN,
                    fab: Vec::new(),
                });
            }
            let fb = eval(j, b)?.0;
            let mut fab = Vec::with_capacity(d);
            let mut mixed = a.to_vec();
            for i in 0..d {
                mixed[i] = b[i];
                fab.push(eval(j, &mixed)?.0);
                mixed[i] = a[i];
            }
            Ok(Row { fa, grad2, fb, fab })
        })
        .collect::<Result<_>>()?;

    let n = rows.len();
    let mut design = Design {
        fa: Vec::with_capacity(n),
        fb: Vec::with_capacity(n),
        fab: vec![Vec::with_capacity(n); if with_sobol { d } else { 0 }],
        grad2: vec![Vec::with_capacity(n); d],
    };
    for row in rows {
        design.fa.push(row.fa);
        design.fb.push(row.fb);
        for (i, g) in row.grad2.into_iter().enumerate() {
            design.grad2[i].push(g);
        }
        for (i, v) in row.fab.into_iter().enumerate() {
            design.fab[i].push(v);
        }
    }
    Ok(design)
}

fn tag(e: Error, index: usize) -> Error {
    match e {
        Error::Model { .. } => e,
        other => Error::Model {
            index,
            message: other.to_string(),
        },
    }
}

/// Point estimates computed from a (re)sample of design rows.
struct Statistics {
    nu: Vec<f64>,
    variance: f64,
    total: Vec<f64>,
}

fn statistics(design: &Design, rows: &[usize], with_sobol: bool) -> Statistics {
    let n = rows.len() as f64;
    let nu = design
        .grad2
        .iter()
        .map(|g| rows.iter().map(|&j| g[j]).sum::<f64>() / n)
        .collect();
    if !with_sobol {
        return Statistics {
            nu,
            variance: f64::NAN,
            total: Vec::new(),
        };
    }
    // variance from the pooled A and B outputs
    let mean = rows.iter().map(|&j| design.fa[j] + design.fb[j]).sum::<f64>() / (2.0 * n);
    let variance = rows
        .iter()
        .map(|&j| (design.fa[j] - mean).powi(2) + (design.fb[j] - mean).powi(2))
        .sum::<f64>()
        / (2.0 * n - 1.0);
    let total = design
        .fab
        .iter()
        .map(|fab| rows.iter().map(|&j| (design.fa[j] - fab[j]).powi(2)).sum::<f64>() / (2.0 * n))
        .collect();
    Statistics { nu, variance, total }
}

/// Sample standard deviation.
fn std_dev(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn bootstrap_samples(n: usize, opts: &StudyOptions) -> Vec<Vec<usize>> {
    (0..opts.bootstrap)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xb007_57a9_0000_0000);
            rng.set_stream(r as u64 + 1);
            (0..n).map(|_| rng.random_range(0..n)).collect()
        })
        .collect()
}

/// Estimate with bootstrap standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub sd: f64,
}

/// Monte Carlo DGSM `ν_i = E[(∂f/∂x_i)²]` for every input.
pub fn estimate_dgsm(model: &dyn Model, inputs: &[Input], opts: &StudyOptions) -> Result<Vec<Estimate>> {
    check_study(model, inputs, opts)?;
    let design = evaluate_design(model, inputs, opts, false)?;
    let all: Vec<usize> = (0..opts.n).collect();
    let point = statistics(&design, &all, false);
    let boot: Vec<Statistics> = bootstrap_samples(opts.n, opts)
        .par_iter()
        .map(|rows| statistics(&design, rows, false))
        .collect();
    Ok((0..inputs.len())
        .map(|i| Estimate {
            value: point.nu[i],
            sd: std_dev(&boot.iter().map(|s| s.nu[i]).collect::<Vec<_>>()),
        })
        .collect())
}

/// Jansen pick-freeze estimates of the total Sobol indices.
///
/// A model with (numerically) constant output yields zeros.
pub fn estimate_total_sobol(model: &dyn Model, inputs: &[Input], opts: &StudyOptions) -> Result<Vec<Estimate>> {
    check_study(model, inputs, opts)?;
    let report = screening_core(model, inputs, opts, &vec![0.0; inputs.len()])?;
    Ok(report
        .into_iter()
        .map(|r| Estimate {
            value: r.total_sobol,
            sd: r.sobol_sd,
        })
        .collect())
}

/// `C ν / D`, the DGSM upper bound on a total Sobol index.
pub fn dgsm_upper_bound(constant: f64, nu: f64, variance: f64) -> Result<f64> {
    if !(variance > 0.0) {
        return Err(Error::Argument(format!("output variance must be positive, got {variance}")));
    }
    if !(constant >= 0.0 && nu >= 0.0) {
        return Err(Error::Argument(format!(
            "constant and DGSM must be nonnegative, got {constant} and {nu}"
        )));
    }
    Ok(constant * nu / variance)
}

/// Per-input line of a screening study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputReport {
    pub name: String,
    pub nu: f64,
    pub nu_sd: f64,
    pub total_sobol: f64,
    pub sobol_sd: f64,
    pub poincare: f64,
    pub poincare_method: Option<Method>,
    pub upper_bound: f64,
    pub bound_sd: f64,
    pub active: bool,
}

/// Output of [`screening_study`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreeningReport {
    pub inputs: Vec<InputReport>,
    pub variance: f64,
    pub variance_sd: f64,
    /// Output variance vanished; indices and bounds are reported as 0.
    pub degenerate: bool,
    pub n: usize,
    pub bootstrap: usize,
    pub seed: u64,
    pub sampling: Sampling,
    pub threshold: f64,
}

impl ScreeningReport {
    /// Names of the inputs sorted by decreasing upper bound.
    pub fn ranking(&self) -> Vec<&str> {
        let mut idx: Vec<&InputReport> = self.inputs.iter().collect();
        idx.sort_by(|a, b| b.upper_bound.total_cmp(&a.upper_bound));
        idx.into_iter().map(|r| r.name.as_str()).collect()
    }

    pub fn input(&self, name: &str) -> Option<&InputReport> {
        self.inputs.iter().find(|r| r.name == name)
    }
}

struct CoreLine {
    nu: Estimate,
    total_sobol: f64,
    sobol_sd: f64,
    upper_bound: f64,
    bound_sd: f64,
    variance: Estimate,
    degenerate: bool,
}

fn screening_core(model: &dyn Model, inputs: &[Input], opts: &StudyOptions, constants: &[f64]) -> Result<Vec<CoreLine>> {
    let design = evaluate_design(model, inputs, opts, true)?;
    let all: Vec<usize> = (0..opts.n).collect();
    let point = statistics(&design, &all, true);
    let scale = design.fa.iter().chain(&design.fb).fold(0.0f64, |m, v| m.max(v.abs()));
    let degenerate = !(point.variance > 1e-24 * scale.max(f64::MIN_POSITIVE).powi(2));
    let boot: Vec<Statistics> = bootstrap_samples(opts.n, opts)
        .par_iter()
        .map(|rows| statistics(&design, rows, true))
        .collect();
    let variance = Estimate {
        value: point.variance,
        sd: std_dev(&boot.iter().map(|s| s.variance).collect::<Vec<_>>()),
    };
    let ratio = |num: f64, den: f64| if degenerate { 0.0 } else { num / den };
    Ok((0..inputs.len())
        .map(|i| {
            let nu = Estimate {
                value: point.nu[i],
                sd: std_dev(&boot.iter().map(|s| s.nu[i]).collect::<Vec<_>>()),
            };
            let sobol_boot: Vec<f64> = boot.iter().map(|s| ratio(s.total[i], s.variance)).collect();
            let bound_boot: Vec<f64> = boot.iter().map(|s| ratio(constants[i] * s.nu[i], s.variance)).collect();
            CoreLine {
                nu,
                total_sobol: ratio(point.total[i], point.variance),
                sobol_sd: if degenerate { 0.0 } else { std_dev(&sobol_boot) },
                upper_bound: ratio(constants[i] * point.nu[i], point.variance),
                bound_sd: if degenerate { 0.0 } else { std_dev(&bound_boot) },
                variance,
                degenerate,
            }
        })
        .collect())
}

/// Computes Poincaré constants of every input, DGSMs, total Sobol indices and
/// the DGSM upper bounds, flagging as inactive the inputs whose bound is
/// below `threshold`.
pub fn screening_study(model: &dyn Model, inputs: &[Input], opts: &StudyOptions, threshold: f64) -> Result<ScreeningReport> {
    check_study(model, inputs, opts)?;
    let constants: Vec<PoincareEstimate> = inputs
        .par_iter()
        .map(|inp| crate::poincare_constant(&inp.dist, 1e-6))
        .collect::<Vec<_>>()
        .into_iter()
        .zip(inputs)
        .map(|(r, inp)| r.map_err(|e| Error::Numerical(format!("Poincaré constant of input {}: {e}", inp.name))))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = constants.iter().map(|c| c.value).collect();
    let lines = screening_core(model, inputs, opts, &values)?;
    let (variance, degenerate) = lines
        .first()
        .map(|l| (l.variance, l.degenerate))
        .unwrap_or((Estimate { value: 0.0, sd: 0.0 }, true));
    let reports = lines
        .into_iter()
        .zip(inputs)
        .zip(&constants)
        .map(|((l, inp), c)| InputReport {
            name: inp.name.clone(),
            nu: l.nu.value,
            nu_sd: l.nu.sd,
            total_sobol: l.total_sobol,
            sobol_sd: l.sobol_sd,
            poincare: c.value,
            poincare_method: Some(c.method),
            upper_bound: l.upper_bound,
            bound_sd: l.bound_sd,
            active: l.upper_bound >= threshold,
        })
        .collect();
    Ok(ScreeningReport {
        inputs: reports,
        variance: variance.value,
        variance_sd: variance.sd,
        degenerate,
        n: opts.n,
        bootstrap: opts.bootstrap,
        seed: opts.seed,
        sampling: opts.sampling,
        threshold,
    })
}
