//! Special functions and the first-zero search used by the semi-analytical
//! solvers.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const KUMMER_MAX_TERMS: usize = 10_000;

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Kummer's confluent hypergeometric function M(a1, b1, z) = 1F1(a1; b1; z)
/// for z >= 0, summed from x_0 = 1 with
/// x_{p+1} / x_p = (p + a1) z / ((p + b1)(p + 1)).
///
/// When `a1` is a nonpositive integer the series is a polynomial and is
/// summed exactly to its last term.
pub fn kummer_m(a1: f64, b1: f64, z: f64) -> Result<f64> {
    kummer_m_with_magnitude(a1, b1, z).map(|(m, _)| m)
}

/// [`kummer_m`] together with the sum of the absolute values of the series
/// terms. Their ratio bounds the digits lost to cancellation.
pub fn kummer_m_with_magnitude(a1: f64, b1: f64, z: f64) -> Result<(f64, f64)> {
    if b1 <= 0.0 && b1.fract() == 0.0 {
        return Err(Error::Argument(format!("b1 = {b1} is a nonpositive integer")));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Argument(format!("kummer_m needs finite z >= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok((1.0, 1.0));
    }
    let polynomial_degree = (a1 <= 0.0 && a1.fract() == 0.0).then(|| (-a1) as usize);
    let mut term = 1.0;
    let mut acc = CompensatedSum::default();
    acc.add(term);
    let mut peak = 1.0f64;
    let mut magnitude = 1.0;
    for p in 0..KUMMER_MAX_TERMS {
        if polynomial_degree == Some(p) {
            return Ok((acc.value(), magnitude));
        }
        let pf = p as f64;
        term *= (pf + a1) * z / ((pf + b1) * (pf + 1.0));
        acc.add(term);
        peak = peak.max(term.abs());
        magnitude += term.abs();
        // terms decay monotonically once p exceeds both |a1| and z
        let past_peak = pf + 1.0 > z && pf + 1.0 > a1.abs();
        if past_peak && term.abs() <= 1e-17 * acc.value().abs().max(peak * 1e-3) {
            return Ok((acc.value(), magnitude));
        }
        if !term.is_finite() {
            break;
        }
    }
    Err(Error::Numerical(format!(
        "Kummer series M({a1}, {b1}, {z}) did not converge in {KUMMER_MAX_TERMS} terms"
    )))
}

/// Bessel J0 by its ascending series sum_k (-1)^k (x/2)^{2k} / (k!)^2.
///
/// Accurate to about 1e-15 absolute for |x| <= 12, the only range this crate
/// needs.
pub fn bessel_j0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut acc = CompensatedSum::default();
    acc.add(term);
    for k in 1..200 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        acc.add(term);
        if term.abs() < 1e-18 && kf > q.sqrt() {
            break;
        }
    }
    acc.value()
}

/// Bessel J1 by its ascending series (derivative of the triangular
/// saturating function, since J0' = -J1).
pub fn bessel_j1(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 0.5 * x;
    let mut acc = CompensatedSum::default();
    acc.add(term);
    for k in 1..200 {
        let kf = k as f64;
        term *= -q / (kf * (kf + 1.0));
        acc.add(term);
        if term.abs() < 1e-18 && kf > q.sqrt() {
            break;
        }
    }
    acc.value()
}

/// First positive zero r1 of J0 (about 2.404826).
pub fn bessel_j0_first_zero() -> f64 {
    static R1: OnceLock<f64> = OnceLock::new();
    *R1.get_or_init(|| first_zero(bessel_j0, 2.0, 3.0, 1e-3).expect("J0 changes sign on [2, 3]"))
}

/// Probabilists' Hermite polynomial He_n by H_{n+1} = x H_n - n H_{n-1}.
pub fn hermite_eval(n: usize, x: f64) -> f64 {
    let mut h0 = 1.0;
    if n == 0 {
        return h0;
    }
    let mut h1 = x;
    for k in 1..n {
        let h2 = x * h1 - k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// The `n` real zeros of He_n in ascending order.
///
/// Zeros of He_{k-1} bracket those of He_k (interlacing), so each zero is
/// isolated in its own bracket and polished by bisection.
pub fn hermite_zeros(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Argument("hermite_zeros needs n >= 1".into()));
    }
    if n > 100 {
        return Err(Error::Argument(format!("hermite degree {n} exceeds the supported maximum 100")));
    }
    let mut zeros: Vec<f64> = vec![0.0];
    for k in 2..=n {
        let outer = 2.0 * (k as f64).sqrt() + 1.0;
        let mut edges = Vec::with_capacity(k + 1);
        edges.push(-outer);
        edges.extend_from_slice(&zeros);
        edges.push(outer);
        zeros = edges
            .windows(2)
            .map(|w| bisect(|x| hermite_eval(k, x), w[0], w[1]))
            .collect();
    }
    Ok(zeros)
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Interval on which a continuous function changes sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl RootBracket {
    pub fn new(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        if !(lo < hi) || !(f_lo * f_hi < 0.0) {
            return Err(Error::Argument(format!(
                "[{lo}, {hi}] with f = ({f_lo}, {f_hi}) is not a sign-change bracket"
            )));
        }
        Ok(Self { lo, hi, f_lo, f_hi })
    }

    /// Brent's method; the returned root is relative-accurate to ~1e-15.
    pub fn refine<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        brent(&f, self.lo, self.hi, self.f_lo, self.f_hi)
    }
}

fn brent<F: Fn(f64) -> f64>(f: &F, a0: f64, b0: f64, fa0: f64, fb0: f64) -> f64 {
    let (mut a, mut b, mut fa, mut fb) = (a0, b0, fa0, fb0);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..300 {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 1e-300;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return b;
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    b
}

/// Smallest root of `f` on [lo, hi].
///
/// Scans from `lo` in steps of `step` for the first exact zero or sign
/// change, then refines the bracketing cell with Brent's method. A sign
/// change across a pole (the refined point does not shrink |f|) is skipped
/// and the scan continues.
pub fn first_zero<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, step: f64) -> Result<f64> {
    if !(lo < hi) || !(step > 0.0) {
        return Err(Error::Argument(format!("first_zero needs lo < hi and step > 0 (got [{lo}, {hi}], step {step})")));
    }
    let mut x0 = lo;
    let mut f0 = f(x0);
    if f0 == 0.0 {
        return Ok(x0);
    }
    let mut k = 0u64;
    while x0 < hi {
        k += 1;
        let x1 = (lo + k as f64 * step).min(hi);
        let f1 = f(x1);
        if f1 == 0.0 {
            return Ok(x1);
        }
        if f0.is_finite() && f1.is_finite() && (f0 < 0.0) != (f1 < 0.0) {
            let root = RootBracket::new(x0, x1, f0, f1)?.refine(&f);
            if f(root).abs() <= f0.abs().max(f1.abs()) {
                return Ok(root);
            }
        }
        x0 = x1;
        f0 = f1;
    }
    Err(Error::NoRoot { lo, hi })
}

/// Default scan step: one two-thousandth of the search interval.
pub fn default_step(lo: f64, hi: f64) -> f64 {
    (hi - lo) / 2000.0
}
