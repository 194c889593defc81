//! P1 finite elements for the Neumann spectral gap of a weighted interval.
//!
//! The weak eigenproblem `∫f'g'dμ + ∫fg dμ = θ ∫fg dμ` (θ = λ + 1) is
//! discretised on hat functions into the pencil `K u = θ M u` with
//! tridiagonal K and M. The two smallest pencil eigenvalues are isolated by
//! inertia-counting bisection on LDLᵀ factorisations of `K - θM`
//! (Sylvester's law of inertia), and the eigenvector of the second one by
//! inverse iteration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::estimate::{Method, PoincareEstimate, SaturatingFunction};
use crate::quad;

/// Node coordinates of a 1-D mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<f64>,
    graded: bool,
}

impl Mesh {
    /// `n` equal elements on [a, b].
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        check_bounds(a, b, n)?;
        let h = (b - a) / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|i| a + h * i as f64).collect();
        nodes[n] = b;
        Ok(Self { nodes, graded: false })
    }

    /// About `n` elements on [a, b] with a node placed exactly on every
    /// interior breakpoint; each sub-segment is uniform.
    pub fn with_breakpoints(a: f64, b: f64, n: usize, breakpoints: &[f64]) -> Result<Self> {
        check_bounds(a, b, n)?;
        let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&x| a < x && x < b).collect();
        if cuts.is_empty() {
            return Self::uniform(a, b, n);
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        cuts.dedup();
        let mut edges = vec![a];
        edges.extend(cuts);
        edges.push(b);
        let mut nodes = vec![a];
        for w in edges.windows(2) {
            let m = ((n as f64) * (w[1] - w[0]) / (b - a)).round().max(1.0) as usize;
            let h = (w[1] - w[0]) / m as f64;
            nodes.extend((1..m).map(|i| w[0] + h * i as f64));
            nodes.push(w[1]);
        }
        Ok(Self { nodes, graded: true })
    }

    /// Mesh on the support of `d` with nodes on the density's kinks.
    pub fn for_distribution(d: &DistributionSpec, n: usize) -> Result<Self> {
        let s = d.support();
        if !s.is_bounded() {
            return Err(Error::Precondition(format!(
                "support {s} is unbounded; use unbounded_limit"
            )));
        }
        Self::with_breakpoints(s.lo, s.hi, n, &d.interior_kinks())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_graded(&self) -> bool {
        self.graded
    }
}

fn check_bounds(a: f64, b: f64, n: usize) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::Argument(format!("mesh needs finite a < b, got [{a}, {b}]")));
    }
    if n == 0 {
        return Err(Error::Argument("mesh needs at least one element".into()));
    }
    Ok(())
}

/// Symmetric tridiagonal matrix stored by diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.off[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul(x))
    }
}

/// Shifted stiffness matrix `K = A + M` and mass matrix `M` of the pencil.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSystem {
    pub stiffness: SymTridiagonal,
    pub mass: SymTridiagonal,
    pub lumped: bool,
}

impl SpectralSystem {
    /// Stiffness part `A = K - M`: positive semidefinite, constants in its kernel.
    pub fn gradient_part(&self) -> SymTridiagonal {
        SymTridiagonal {
            diag: self.stiffness.diag.iter().zip(&self.mass.diag).map(|(k, m)| k - m).collect(),
            off: self.stiffness.off.iter().zip(&self.mass.off).map(|(k, m)| k - m).collect(),
        }
    }
}

/// Assembles the pencil for the law `d` on `mesh`, one 5-point Gauss–Legendre
/// rule per element, elements accumulated in ascending order.
///
/// With `lumped`, M is replaced by its row sums and the same diagonal M is
/// used inside K, so that constants stay exact eigenvectors with θ = 1.
pub fn assemble(d: &DistributionSpec, mesh: &Mesh, lumped: bool) -> Result<SpectralSystem> {
    let nodes = mesh.nodes();
    let n = nodes.len();
    let rule = quad::gl5();
    let mut grad = SymTridiagonal::zeros(n);
    let mut mass = SymTridiagonal::zeros(n);
    for e in 0..n - 1 {
        let (x0, x1) = (nodes[e], nodes[e + 1]);
        let h = x1 - x0;
        let jac = 0.5 * h;
        let (mut m00, mut m01, mut m11, mut w_rho) = (0.0, 0.0, 0.0, 0.0);
        for (xi, w) in rule.nodes.iter().zip(&rule.weights) {
            let x = x0 + jac * (1.0 + xi);
            let rho = d.pdf(x);
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(Error::Precondition(format!(
                    "density is {rho} at quadrature node {x}; shrink the interval or use unbounded_limit"
                )));
            }
            let wr = w * jac * rho;
            let (p0, p1) = (0.5 * (1.0 - xi), 0.5 * (1.0 + xi));
            m00 += wr * p0 * p0;
            m01 += wr * p0 * p1;
            m11 += wr * p1 * p1;
            w_rho += wr;
        }
        let a = w_rho / (h * h);
        grad.diag[e] += a;
        grad.diag[e + 1] += a;
        grad.off[e] -= a;
        if lumped {
            mass.diag[e] += m00 + m01;
            mass.diag[e + 1] += m01 + m11;
        } else {
            mass.diag[e] += m00;
            mass.diag[e + 1] += m11;
            mass.off[e] += m01;
        }
    }
    let stiffness = SymTridiagonal {
        diag: grad.diag.iter().zip(&mass.diag).map(|(a, m)| a + m).collect(),
        off: grad.off.iter().zip(&mass.off).map(|(a, m)| a + m).collect(),
    };
    Ok(SpectralSystem {
        stiffness,
        mass,
        lumped,
    })
}

/// First two eigenpairs of the discrete Neumann problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSolution {
    /// Smallest eigenvalue, zero up to rounding.
    pub lambda0: f64,
    /// Discrete spectral gap.
    pub lambda1: f64,
    /// Nodal values of the second eigenvector, increasing and M-orthogonal
    /// to constants, scaled to unit max-norm.
    pub u1: Vec<f64>,
    /// ‖K u1 - θ1 M u1‖∞ / ‖u1‖∞.
    pub residual: f64,
}

const BISECTION_LIMIT: usize = 200;
const INVERSE_ITERATIONS: usize = 3;
const INVERSE_ITERATION_SEED: u64 = 0x5eed_1e55;

/// Number of pencil eigenvalues strictly below θ: the count of negative
/// pivots in the LDLᵀ factorisation of K - θM.
pub fn eigenvalues_below(sys: &SpectralSystem, theta: f64) -> usize {
    let k = &sys.stiffness;
    let m = &sys.mass;
    let n = k.dim();
    let mut count = 0;
    let mut q = k.diag[0] - theta * m.diag[0];
    for i in 0..n {
        if i > 0 {
            let e = k.off[i - 1] - theta * m.off[i - 1];
            let prev = if q == 0.0 { f64::MIN_POSITIVE } else { q };
            q = (k.diag[i] - theta * m.diag[i]) - e * e / prev;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn bisect_eigenvalue(sys: &SpectralSystem, index: usize, hi: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, hi);
    for _ in 0..BISECTION_LIMIT {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 2.0 * f64::EPSILON * hi || mid <= lo || mid >= hi {
            return Ok(0.5 * (lo + hi));
        }
        if eigenvalues_below(sys, mid) <= index {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numerical(format!(
        "bisection for pencil eigenvalue {index} did not converge in {BISECTION_LIMIT} steps"
    )))
}

/// Computes λ0 ≈ 0, the spectral gap λ1 and its eigenvector.
pub fn solve_gap(sys: &SpectralSystem) -> Result<SpectralSolution> {
    let n = sys.stiffness.dim();
    if n < 3 {
        return Err(Error::Argument("need at least two elements".into()));
    }
    let mut upper = 2.0;
    while eigenvalues_below(sys, upper) < 2 {
        upper *= 2.0;
        if !upper.is_finite() {
            return Err(Error::Numerical("no upper bracket for the second eigenvalue".into()));
        }
    }
    let theta0 = bisect_eigenvalue(sys, 0, upper)?;
    let theta1 = bisect_eigenvalue(sys, 1, upper)?;
    if !(theta1 > theta0) {
        return Err(Error::Numerical(format!(
            "bisection did not separate the first two eigenvalues ({theta0}, {theta1})"
        )));
    }

    let mut u = random_start(n);
    for _ in 0..INVERSE_ITERATIONS {
        remove_constant(sys, &mut u);
        let rhs = sys.mass.mul(&u);
        u = shifted_solve(sys, theta1, &rhs);
        normalize_max(&mut u);
    }
    remove_constant(sys, &mut u);
    normalize_max(&mut u);
    if u[n - 1] < u[0] {
        u.iter_mut().for_each(|v| *v = -*v);
    }

    let ku = sys.stiffness.mul(&u);
    let mu = sys.mass.mul(&u);
    let residual = ku
        .iter()
        .zip(&mu)
        .map(|(k, m)| (k - theta1 * m).abs())
        .fold(0.0, f64::max)
        / u.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    Ok(SpectralSolution {
        lambda0: theta0 - 1.0,
        lambda1: theta1 - 1.0,
        u1: u,
        residual,
    })
}

fn random_start(n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(INVERSE_ITERATION_SEED);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Projects out the constant vector in the M-inner product.
fn remove_constant(sys: &SpectralSystem, u: &mut [f64]) {
    let ones = vec![1.0; u.len()];
    let m1 = sys.mass.mul(&ones);
    let c = dot(u, &m1) / m1.iter().sum::<f64>();
    u.iter_mut().for_each(|v| *v -= c);
}

fn normalize_max(u: &mut [f64]) {
    let m = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m > 0.0 {
        u.iter_mut().for_each(|v| *v /= m);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves (K - σM) x = rhs by tridiagonal LU with partial pivoting.
fn shifted_solve(sys: &SpectralSystem, sigma: f64, rhs: &[f64]) -> Vec<f64> {
    let k = &sys.stiffness;
    let m = &sys.mass;
    let n = k.dim();
    let mut dl: Vec<f64> = (0..n - 1).map(|i| k.off[i] - sigma * m.off[i]).collect();
    let mut d: Vec<f64> = (0..n).map(|i| k.diag[i] - sigma * m.diag[i]).collect();
    let mut du = dl.clone();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut ipiv_swapped = vec![false; n];
    let scale = d.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * scale;

    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let fact = dl[i] / d[i];
            dl[i] = fact;
            d[i + 1] -= fact * du[i];
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            let temp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = temp - fact * d[i + 1];
            if i + 1 < n - 1 {
                du2[i] = du[i + 1];
                du[i + 1] *= -fact;
            }
            ipiv_swapped[i] = true;
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }

    let mut x = rhs.to_vec();
    for i in 0..n - 1 {
        if ipiv_swapped[i] {
            x.swap(i, i + 1);
        }
        x[i + 1] -= dl[i] * x[i];
    }
    x[n - 1] /= d[n - 1];
    if n >= 2 {
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    x
}

/// Knobs of the refinement loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FemOptions {
    /// Relative tolerance on successive spectral gaps.
    pub tol: f64,
    pub initial_elements: usize,
    pub max_elements: usize,
    pub lumped: bool,
}

impl Default for FemOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            initial_elements: 500,
            max_elements: 1 << 20,
            lumped: false,
        }
    }
}

impl FemOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Solves the discrete problem for the law `d` with `n` elements.
pub fn solve_distribution(d: &DistributionSpec, n: usize, lumped: bool) -> Result<(Mesh, SpectralSolution)> {
    let mesh = Mesh::for_distribution(d, n)?;
    let sys = assemble(d, &mesh, lumped)?;
    let sol = solve_gap(&sys)?;
    Ok((mesh, sol))
}

/// Poincaré constant of a law with bounded support by mesh doubling.
pub fn poincare_fem(d: &DistributionSpec, tol: f64) -> Result<(PoincareEstimate, SaturatingFunction)> {
    poincare_fem_with(d, &FemOptions::with_tol(tol))
}

/// Doubles the element count from `initial_elements` until successive gaps
/// agree to `tol` (relative), then Richardson-extrapolates the last pair
/// assuming O(h²) convergence.
pub fn poincare_fem_with(d: &DistributionSpec, opts: &FemOptions) -> Result<(PoincareEstimate, SaturatingFunction)> {
    if !d.is_bounded() {
        return Err(Error::Precondition(format!(
            "{d} has unbounded support; use unbounded_limit"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let (std, factor) = d.standardize();
    let mut n = opts.initial_elements.max(2);
    if 2 * n > opts.max_elements {
        return Err(Error::Resource(format!(
            "{} elements exceed the limit of {}",
            2 * n,
            opts.max_elements
        )));
    }
    let (_, coarse) = solve_distribution(&std, n, opts.lumped)?;
    let mut coarse_gap = coarse.lambda1;
    loop {
        let (mesh, fine) = solve_distribution(&std, 2 * n, opts.lumped)?;
        let rel = (coarse_gap - fine.lambda1).abs() / fine.lambda1;
        if rel <= opts.tol {
            let extrapolated = (4.0 * fine.lambda1 - coarse_gap) / 3.0;
            let gap = if extrapolated > 0.0 { extrapolated } else { fine.lambda1 };
            let estimate = PoincareEstimate::from_gap(gap, Method::Fem, rel / gap).scaled(factor);
            let saturating = SaturatingFunction::sampled(mesh.nodes().to_vec(), fine.u1, fine.lambda1)
                .rescaled(d.location(), d.scale());
            return Ok((estimate, saturating));
        }
        n *= 2;
        if 2 * n > opts.max_elements {
            return Err(Error::Resource(format!(
                "no convergence to relative {} before {} elements (last change {rel:.3e})",
                opts.tol, opts.max_elements
            )));
        }
        coarse_gap = fine.lambda1;
    }
}

/// Tail masses cut off when exhausting an unbounded support.
pub const EXHAUSTION_MASSES: [f64; 4] = [1e-3, 1e-4, 1e-5, 1e-6];

/// Constant of a law with at least one infinite support end, as the limit
/// of the constants of its restrictions to growing bounded intervals.
///
/// Each infinite end is replaced by the quantile leaving mass ε outside, for
/// ε in [`EXHAUSTION_MASSES`]; the last two values must agree to `10·tol`
/// relative. Returns the last value with its increment as error.
pub fn unbounded_limit(d: &DistributionSpec, tol: f64) -> Result<PoincareEstimate> {
    let s = d.support();
    if s.is_bounded() {
        return Err(Error::Argument(format!("{d} has bounded support; call poincare_fem")));
    }
    let mut history: Vec<f64> = Vec::with_capacity(EXHAUSTION_MASSES.len());
    for eps in EXHAUSTION_MASSES {
        let lo = if s.lo.is_finite() { s.lo } else { d.quantile(eps)? };
        let hi = if s.hi.is_finite() { s.hi } else { d.quantile(1.0 - eps)? };
        let restricted = d.truncated(lo, hi)?;
        let (est, _) = poincare_fem(&restricted, tol)?;
        history.push(est.value);
    }
    let last = history[history.len() - 1];
    let prev = history[history.len() - 2];
    let increment = (last - prev).abs();
    if increment > 10.0 * tol * last {
        return Err(Error::Convergence(format!(
            "constants along the exhaustion {history:?} still moving by {increment:.3e} at mass 1e-6"
        )));
    }
    Ok(PoincareEstimate::new(last, Method::Limit, increment))
}
