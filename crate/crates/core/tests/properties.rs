use poincare::bounds;
use poincare::exact;
use poincare::fem;
use poincare::{poincare_constant, DistributionSpec, Family};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Family> {
    (0..Family::ALL.len()).prop_map(|i| Family::ALL[i])
}

/// Law cut at the parent quantiles `p_lo < p_hi`.
fn cut(family: Family, loc: f64, scale: f64, p_lo: f64, p_hi: f64) -> DistributionSpec {
    let parent = DistributionSpec::new(family, loc, scale).unwrap();
    parent
        .truncated(parent.quantile(p_lo).unwrap(), parent.quantile(p_hi).unwrap())
        .unwrap()
}

fn bounded_law() -> impl Strategy<Value = DistributionSpec> {
    (family(), -5.0..5.0f64, 0.2..5.0f64, 0.001..0.45f64, 0.55..0.999f64)
        .prop_map(|(f, loc, scale, lo, hi)| cut(f, loc, scale, lo, hi))
}

/// Any law, truncated or not, on either side.
fn any_law() -> impl Strategy<Value = DistributionSpec> {
    (family(), -5.0..5.0f64, 0.2..5.0f64, prop::option::of(0.001..0.45f64), prop::option::of(0.55..0.999f64))
        .prop_map(|(f, loc, scale, lo, hi)| {
            let parent = DistributionSpec::new(f, loc, scale).unwrap();
            let a = lo.map_or(f64::NEG_INFINITY, |p| parent.quantile(p).unwrap());
            let b = hi.map_or(f64::INFINITY, |p| parent.quantile(p).unwrap());
            parent.truncated(a, b).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn density_is_normalised(d in any_law()) {
        let total = d.expectation(|_| 1.0, 1e-12).unwrap();
        prop_assert!((total - 1.0).abs() < 1e-8, "{d}: {total}");
    }

    #[test]
    fn cdf_is_monotone_and_inverted_by_quantile(d in any_law(), ps in prop::collection::vec(0.001..0.999f64, 2..20)) {
        let mut xs: Vec<f64> = ps.iter().map(|&p| d.quantile(p).unwrap()).collect();
        xs.sort_by(f64::total_cmp);
        let cdfs: Vec<f64> = xs.iter().map(|&x| d.cdf(x)).collect();
        prop_assert!(cdfs.windows(2).all(|w| w[0] <= w[1]));
        for (&x, &p) in xs.iter().zip(&cdfs) {
            let back = d.quantile(p).unwrap();
            prop_assert!((back - x).abs() <= 1e-8 * d.scale().max(x.abs()), "{d}: {x} -> {p} -> {back}");
        }
    }

    #[test]
    fn potential_derivative_matches_central_differences(d in any_law(), p in 0.02..0.98f64) {
        let x = d.quantile(p).unwrap();
        let h_max = 1e-3 * d.scale();
        let near_kink = d.interior_kinks().iter().any(|k| (k - x).abs() < 2.0 * h_max);
        let near_end = (x - d.support().lo).abs() < 2.0 * h_max || (d.support().hi - x).abs() < 2.0 * h_max;
        prop_assume!(!near_kink && !near_end);
        let v = |t: f64| d.potential(t).unwrap().value;
        let first = d.potential(x).unwrap().first;
        let errs: Vec<f64> = [1e-3, 1e-4]
            .iter()
            .map(|&r| {
                let h = r * d.scale();
                ((v(x + h) - v(x - h)) / (2.0 * h) - first).abs()
            })
            .collect();
        // O(h²) error: the finer step is no worse than the coarse one, up to rounding
        let curvature = d.potential(x).unwrap().second.unwrap_or(1.0).abs().max(1.0) / (d.scale() * d.scale());
        prop_assert!(errs[0] <= 1e-4 * curvature.max(first.abs()) + 1e-6 / d.scale(), "{d} at {x}: {errs:?}");
        prop_assert!(errs[1] <= errs[0] + 1e-6 / d.scale(), "{d} at {x}: {errs:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn restriction_never_increases_the_constant(
        fam in family(),
        loc in -3.0..3.0f64,
        scale in 0.3..3.0f64,
        outer in (0.001..0.3f64, 0.7..0.999f64),
        shrink in (0.0..1.0f64, 0.0..1.0f64),
    ) {
        let (lo, hi) = outer;
        // inner quantiles stay inside the outer ones and keep some width
        let ilo = lo + shrink.0 * (0.45 - lo);
        let ihi = hi - shrink.1 * (hi - 0.55);
        let big = cut(fam, loc, scale, lo, hi);
        let small = cut(fam, loc, scale, ilo, ihi);
        let cb = poincare_constant(&big, 1e-8).unwrap().value;
        let cs = poincare_constant(&small, 1e-8).unwrap().value;
        prop_assert!(cs <= cb * (1.0 + 1e-6), "{small}: {cs} > {big}: {cb}");
    }

    #[test]
    fn exact_constants_scale_with_squared_scale(
        fam in prop::sample::select(vec![Family::Uniform, Family::Normal, Family::DoubleExponential, Family::Exponential]),
        a in -2.0..0.5f64,
        width in 0.2..3.0f64,
        loc in -10.0..10.0f64,
        scale in 0.1..10.0f64,
    ) {
        let standard = DistributionSpec::standard(fam);
        let (lo, hi) = match fam {
            Family::Uniform => (a.max(-1.0), (a.max(-1.0) + width).min(1.0)),
            Family::Exponential => (a.abs(), a.abs() + width),
            _ => (a, a + width),
        };
        prop_assume!(hi - lo > 0.05);
        let unit = exact::exact_constant(&standard.truncated(lo, hi).unwrap()).unwrap().estimate.value;
        let moved = DistributionSpec::new(fam, loc, scale)
            .unwrap()
            .truncated(loc + scale * lo, loc + scale * hi)
            .unwrap();
        let c = exact::exact_constant(&moved).unwrap().estimate.value;
        prop_assert!((c / (scale * scale * unit) - 1.0).abs() < 1e-9, "{moved}: {c} vs {}", scale * scale * unit);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn saturating_functions_are_centered_monotone_and_optimal(
        fam in prop::sample::select(vec![Family::Uniform, Family::Normal, Family::DoubleExponential, Family::Exponential]),
        a in -2.0..1.0f64,
        width in 0.3..3.0f64,
    ) {
        let (lo, hi) = match fam {
            Family::Uniform => {
                let lo = a.clamp(-1.0, 0.5);
                (lo, (lo + width).min(1.0))
            }
            Family::Exponential => (a.abs(), a.abs() + width),
            _ => (a, a + width),
        };
        let d = DistributionSpec::standard(fam).truncated(lo, hi).unwrap();
        let r = exact::exact_constant(&d).unwrap();
        let sat = r.saturating.unwrap();
        let mean = sat.mean_under(&d).unwrap();
        let spread = sat.eval(hi).abs().max(sat.eval(lo).abs());
        prop_assert!(mean.abs() <= 1e-8 * spread.max(1.0), "{d}: mean {mean}");
        prop_assert!(sat.is_strictly_increasing(200), "{d}");
        let rq = sat.rayleigh_quotient(&d).unwrap();
        let gap = r.estimate.spectral_gap;
        prop_assert!((rq / gap - 1.0).abs() < 1e-6, "{d}: Rayleigh {rq} vs gap {gap}");
    }

    #[test]
    fn bounds_sandwich_the_constant(d in bounded_law()) {
        let c = poincare_constant(&d, 1e-8).unwrap().value;
        let reports = bounds::all_bounds(&d).unwrap();
        for r in &reports {
            prop_assert!(r.lower <= r.upper);
            prop_assert!(r.contains(c, 1e-6), "{d}: {c} outside {} [{}, {}]", r.method, r.lower, r.upper);
        }
        let logistic = bounds::transport_logistic_bound(&d).unwrap();
        let laplace = bounds::transport_doubleexp_bound(&d).unwrap();
        prop_assert!(logistic <= laplace * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn exhaustion_constants_increase(
        fam in prop::sample::select(vec![Family::Normal, Family::Logistic, Family::DoubleExponential, Family::Gumbel]),
        loc in -2.0..2.0f64,
        scale in 0.5..2.0f64,
    ) {
        let parent = DistributionSpec::new(fam, loc, scale).unwrap();
        let values: Vec<f64> = fem::EXHAUSTION_MASSES
            .iter()
            .map(|&eps| {
                let lo = parent.quantile(eps / 2.0).unwrap();
                let hi = parent.quantile(1.0 - eps / 2.0).unwrap();
                fem::poincare_fem(&parent.truncated(lo, hi).unwrap(), 1e-8).unwrap().0.value
            })
            .collect();
        prop_assert!(values.windows(2).all(|w| w[0] < w[1] * (1.0 + 1e-6)), "{parent}: {values:?}");
    }
}
