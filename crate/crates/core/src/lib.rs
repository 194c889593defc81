//! Optimal Poincaré constants of one-dimensional (truncated) distributions,
//! two-sided bounds on them, and their use in derivative-based global
//! sensitivity analysis.

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dist;
pub mod error;
pub mod estimate;
pub mod exact;
pub mod fem;
pub mod quad;
pub mod sa;
pub mod specfun;

pub use dist::{DistributionSpec, Family, Interval, IntervalMoments, Potential};
pub use error::{Error, Result};
pub use estimate::{Method, PoincareEstimate, SaturatingFunction, SaturatingKind};

/// Default tolerance of the exhaustion limit on unbounded supports.
pub const LIMIT_TOL: f64 = 1e-4;

/// Optimal constant of `d`: exact when a closed form or first-zero
/// characterisation exists, otherwise finite elements on a bounded support
/// or the exhaustion limit on an unbounded one. `tol` is the relative
/// refinement tolerance of the numerical routes; the exhaustion limit uses
/// at least [`LIMIT_TOL`].
pub fn poincare_constant(d: &DistributionSpec, tol: f64) -> Result<PoincareEstimate> {
    match exact::exact_constant(d) {
        Ok(r) => Ok(r.estimate),
        Err(Error::NotApplicable(_)) if d.is_bounded() => Ok(fem::poincare_fem(d, tol)?.0),
        Err(Error::NotApplicable(_)) => fem::unbounded_limit(d, tol.max(LIMIT_TOL)),
        Err(e) => Err(e),
    }
}
