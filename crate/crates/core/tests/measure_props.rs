use hausdorff::measure::{integrate, lp_norm, Integral, MeasureSpace, Point, QuadratureSpec};
use hausdorff::Error;
use hausdorff::sum::pairwise_dot;
use proptest::prelude::*;

fn ulps_apart(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    if a.signum() != b.signum() {
        return u64::MAX;
    }
    (a.abs().to_bits() as i64 - b.abs().to_bits() as i64).unsigned_abs()
}

fn smooth(a: f64, b: f64, c: f64) -> impl Fn(&Point) -> f64 + Sync {
    move |p: &Point| {
        let t = p.scalar().unwrap();
        a + b * (c * t).sin() + t * t
    }
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(3.0), Just(4.5), Just(f64::INFINITY)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lp_norm_homogeneous_continuous(
        a in -2.0..2.0f64, b in -2.0..2.0f64, c in 0.5..6.0f64,
        k in -8i32..8, p in exponent(),
    ) {
        // Exact power-of-two scalings are bit-transparent.
        let space = MeasureSpace::interval(0.0, 2.0).unwrap();
        let quad = QuadratureSpec::default().with_budget(256).with_rel_tol(1.0);
        let f = smooth(a, b, c);
        let s = 2f64.powi(k);
        let base = lp_norm(&space, &f, p, &quad).unwrap().value;
        let scaled = lp_norm(&space, |x| s * f(x), p, &quad).unwrap().value;
        prop_assert!(ulps_apart(scaled, s * base) <= 2, "{scaled} vs {}", s * base);
    }

    #[test]
    fn lp_norm_homogeneous_continuous_any_scale(
        a in -2.0..2.0f64, b in -2.0..2.0f64, c in 0.5..6.0f64,
        s in prop_oneof![-100.0..-0.01f64, 0.01..100.0f64], p in exponent(),
    ) {
        // Per-node rounding of s·f does not cancel, so allow a few ulps.
        let space = MeasureSpace::interval(0.0, 2.0).unwrap();
        let quad = QuadratureSpec::default().with_budget(256).with_rel_tol(1.0);
        let f = smooth(a, b, c);
        let base = lp_norm(&space, &f, p, &quad).unwrap().value;
        let scaled = lp_norm(&space, |x| s * f(x), p, &quad).unwrap().value;
        prop_assert!(ulps_apart(scaled, s.abs() * base) <= 16, "{scaled} vs {}", s.abs() * base);
    }

    #[test]
    fn lp_norm_homogeneous_discrete(
        values in prop::collection::vec(-10.0..10.0f64, 1..40),
        c in prop_oneof![-100.0..-0.01f64, 0.01..100.0f64],
        p in exponent(),
    ) {
        let n = values.len() as i64;
        let space = MeasureSpace::counting((0..n).collect()).unwrap();
        let quad = QuadratureSpec::default();
        let f = |x: &Point| values[x.index().unwrap() as usize];
        let base = lp_norm(&space, f, p, &quad).unwrap().value;
        let scaled = lp_norm(&space, |x| c * f(x), p, &quad).unwrap().value;
        prop_assert!(ulps_apart(scaled, c.abs() * base) <= 2, "{scaled} vs {}", c.abs() * base);
    }

    #[test]
    fn integrate_monotone(
        a in -2.0..2.0f64, b in -2.0..2.0f64, c in 0.5..6.0f64,
        gap in 0.0..1.0f64, bump in 0.0..3.0f64,
    ) {
        let space = MeasureSpace::interval(0.0, 1.0).unwrap();
        let quad = QuadratureSpec::default().with_budget(512).with_rel_tol(1.0);
        let f = smooth(a, b, c);
        let g = |x: &Point| f(x) + gap + bump * x.scalar().unwrap();
        let lo = integrate(&space, &f, &quad).unwrap().value;
        let hi = integrate(&space, g, &quad).unwrap().value;
        prop_assert!(lo <= hi, "{lo} > {hi}");
    }

    #[test]
    fn discrete_integral_is_the_finite_sum(
        values in prop::collection::vec(-5.0..5.0f64, 1..30),
        weights in prop::collection::vec(0.01..3.0f64, 30),
    ) {
        let n = values.len();
        let idx: Vec<i64> = (0..n as i64).map(|i| 3 * i - 7).collect();
        let pos = |x: &Point| ((x.index().unwrap() + 7) / 3) as usize;
        let f = |x: &Point| values[pos(x)];
        let quad = QuadratureSpec::default();

        let counting = MeasureSpace::counting(idx.clone()).unwrap();
        let got = integrate(&counting, f, &quad).unwrap();
        prop_assert_eq!(got.value.to_bits(), pairwise_dot(&vec![1.0; n], &values).to_bits());
        prop_assert_eq!(got.error_estimate, 0.0);

        let w = weights[..n].to_vec();
        let weighted = MeasureSpace::weighted_counting(idx, w.clone()).unwrap();
        let got = integrate(&weighted, f, &quad).unwrap();
        prop_assert_eq!(got.value.to_bits(), pairwise_dot(&w, &values).to_bits());

        let group = MeasureSpace::finite_group(n as u64).unwrap();
        let g = |x: &Point| values[x.index().unwrap() as usize];
        let got = integrate(&group, g, &quad).unwrap();
        prop_assert_eq!(got.value.to_bits(), (pairwise_dot(&vec![1.0; n], &values) / n as f64).to_bits());
    }
}

/// The value and estimate, also when the tolerance check rejected them.
fn with_estimate(r: hausdorff::Result<Integral>) -> Integral {
    match r {
        Ok(i) => i,
        Err(Error::ToleranceNotMet { value, error_estimate, .. }) => Integral { value, error_estimate },
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn refinement_consistency() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
    let space = MeasureSpace::interval(0.0, 1.0).unwrap();
    let (mut trials, mut consistent) = (0, 0);
    while trials < 500 {
        let (w, phase, a): (f64, f64, f64) = (rng.gen_range(1.0..60.0), rng.gen_range(0.0..6.3), rng.gen_range(-2.0..2.0));
        let (b, c): (f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(0.0..20.0));
        let f = move |x: &Point| {
            let t = x.scalar().unwrap();
            a * (w * t + phase).cos() + (b * t).exp() + 1.0 / (1.0 + (c * (t - 0.5)).powi(2))
        };
        let budget = [16, 32, 64][rng.gen_range(0..3)];
        let quad = QuadratureSpec::default().uniform().with_rel_tol(1.0);
        let coarse = with_estimate(integrate(&space, f, &quad.clone().with_budget(budget)));
        // Once both levels agree to rounding the comparison is a coin flip.
        if coarse.error_estimate <= 1e-12 * coarse.value.abs() {
            continue;
        }
        let fine = with_estimate(integrate(&space, f, &quad.with_budget(2 * budget)));
        trials += 1;
        if (fine.value - coarse.value).abs() < coarse.error_estimate {
            consistent += 1;
        }
    }
    let rate = consistent as f64 / trials as f64;
    assert!(rate >= 0.95, "refinement consistent in only {rate:.3} of trials");
}
