use hausdorff::kernel::{conjugacy_r, mixed_norm, one_var_norm, probe_points, Exponent, Exponents, Kernel, Regime};
use hausdorff::measure::{MeasureSpace, Point, QuadratureSpec};
use hausdorff::Result;
use num_rational::Ratio;
use proptest::prelude::*;

fn ulps_apart(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    (a.abs().to_bits() as i64 - b.abs().to_bits() as i64).unsigned_abs()
}

fn exponent_pair() -> impl Strategy<Value = Exponents> {
    let finite = prop_oneof![Just((1, 1)), Just((4, 3)), Just((3, 2)), Just((2, 1)), Just((3, 1)), Just((5, 1))];
    (finite.clone(), finite, 0u8..4).prop_filter_map("admissible", |((a, b), (c, d), shape)| {
        let (p, q) = (Exponent::ratio(a, b), Exponent::ratio(c, d));
        let pair = match shape {
            0 => (p.min(q), p.max(q)),
            1 => (p, Exponent::Infinite),
            2 => (p, p),
            _ => (Exponent::Infinite, Exponent::Infinite),
        };
        Exponents::new(pair.0, pair.1).ok()
    })
}

fn power_modulus(u: &Point) -> Result<f64> {
    Ok(u.scalar().unwrap().abs())
}

fn index_modulus(u: &Point) -> Result<f64> {
    Ok(2f64.powi(u.index().unwrap() as i32))
}

/// `Φ(u, x) = a·u^α (1 + b·x)` on `(0,1) × (0,1)`.
fn smooth_kernel(a: f64, alpha: f64, b: f64) -> Kernel {
    Kernel::two_variable("smooth", move |u: &Point, x: &Point| {
        a * u.scalar().unwrap().powf(alpha) * (1.0 + b * x.scalar().unwrap())
    })
}

fn table_kernel(values: Vec<f64>, cols: usize) -> Kernel {
    Kernel::two_variable("table", move |u: &Point, x: &Point| {
        values[u.index().unwrap() as usize * cols + x.index().unwrap() as usize]
    })
}

fn quad() -> QuadratureSpec {
    QuadratureSpec::default().with_budget(512).with_rel_tol(1e-3)
}

#[test]
fn conjugacy_identities_on_sweep_grid() {
    let mut checked = 0;
    for a in 1..=24i64 {
        for b in 1..=6i64 {
            let p = Ratio::new(a, b);
            if p < Ratio::from_integer(1) {
                continue;
            }
            let mut qs: Vec<Exponent> = (1..=24i64)
                .flat_map(|c| (1..=6i64).map(move |d| Exponent::ratio(c, d)))
                .collect();
            qs.push(Exponent::Infinite);
            for q in qs {
                let Ok(e) = Exponents::new(Exponent::Finite(p), q) else { continue };
                let c = conjugacy_r(&e);
                assert_eq!(c.reciprocal_sum(), Ratio::from_integer(1), "{e}");
                assert_eq!(c.p_times_r_conj(&e), q, "{e}");
                checked += 1;
            }
        }
    }
    let inf = Exponents::new(Exponent::Infinite, Exponent::Infinite).unwrap();
    let c = conjugacy_r(&inf);
    assert_eq!(c.reciprocal_sum(), Ratio::from_integer(1));
    assert_eq!(c.p_times_r_conj(&inf), Exponent::Infinite);
    assert!(checked > 1000);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn homogeneous_discrete(
        values in prop::collection::vec(-4.0..4.0f64, 24),
        c in prop_oneof![-50.0..-0.02f64, 0.02..50.0f64],
        e in exponent_pair(),
    ) {
        let omega = MeasureSpace::counting((0..4).collect()).unwrap();
        let s = MeasureSpace::counting((0..6).collect()).unwrap();
        let k = table_kernel(values, 6);
        let q = QuadratureSpec::default();
        let base = mixed_norm(&k, &omega, &s, &index_modulus, &e, &q).unwrap().value;
        let scaled = mixed_norm(&k.scaled(c), &omega, &s, &index_modulus, &e, &q).unwrap().value;
        prop_assert!(ulps_apart(scaled, c.abs() * base) <= 2, "{e}: {scaled} vs {}", c.abs() * base);
    }

    #[test]
    fn homogeneous_continuous(
        a in 0.5..2.0f64, alpha in 0.3..1.5f64, b in -0.9..2.0f64,
        k in -10i32..10, negate in any::<bool>(),
        e in exponent_pair(),
    ) {
        let unit = MeasureSpace::interval(0.0, 1.0).unwrap();
        let kern = smooth_kernel(a, alpha, b);
        let c = if negate { -2f64.powi(k) } else { 2f64.powi(k) };
        let base = mixed_norm(&kern, &unit, &unit, &power_modulus, &e, &quad()).unwrap().value;
        let scaled = mixed_norm(&kern.scaled(c), &unit, &unit, &power_modulus, &e, &quad()).unwrap().value;
        prop_assert!(ulps_apart(scaled, c.abs() * base) <= 2, "{e}: {scaled} vs {}", c.abs() * base);
    }

    #[test]
    fn homogeneous_continuous_any_scale(
        a in 0.5..2.0f64, alpha in 0.3..1.5f64, b in -0.9..2.0f64,
        c in prop_oneof![-50.0..-0.02f64, 0.02..50.0f64],
        e in exponent_pair(),
    ) {
        // Every node rounds c·Φ on its own, so a long quadrature sum drifts by a few ulps.
        let unit = MeasureSpace::interval(0.0, 1.0).unwrap();
        let k = smooth_kernel(a, alpha, b);
        let base = mixed_norm(&k, &unit, &unit, &power_modulus, &e, &quad()).unwrap().value;
        let scaled = mixed_norm(&k.scaled(c), &unit, &unit, &power_modulus, &e, &quad()).unwrap().value;
        prop_assert!(ulps_apart(scaled, c.abs() * base) <= 16, "{e}: {scaled} vs {}", c.abs() * base);
    }

    #[test]
    fn monotone_in_kernel(
        a in 0.5..2.0f64, alpha in 0.3..1.5f64, b in 0.0..2.0f64,
        shrink in 0.0..1.0f64, wiggle in 0.5..8.0f64,
        e in exponent_pair(),
    ) {
        let unit = MeasureSpace::interval(0.0, 1.0).unwrap();
        let big = smooth_kernel(a, alpha, b);
        let small = {
            let big = big.clone();
            Kernel::two_variable("small", move |u: &Point, x: &Point| {
                shrink * (wiggle * x.scalar().unwrap()).sin() * big.evaluate(u, x)
            })
        };
        for u in probe_points(&unit, 9) {
            for x in probe_points(&unit, 9) {
                prop_assert!(small.evaluate(&u, &x).abs() <= big.evaluate(&u, &x).abs());
            }
        }
        let q = quad();
        let lo = mixed_norm(&small, &unit, &unit, &power_modulus, &e, &q).unwrap();
        let hi = mixed_norm(&big, &unit, &unit, &power_modulus, &e, &q).unwrap();
        let tol = lo.error_estimate + hi.error_estimate + 1e-3 * hi.value;
        prop_assert!(lo.value <= hi.value + tol, "{e}: {} > {}", lo.value, hi.value);
    }

    #[test]
    fn regimes_consistent_on_probability_space(
        a in 0.5..2.0f64, alpha in 0.3..1.5f64,
        e in exponent_pair(),
    ) {
        // On ν(S) = 1 a one-variable kernel has ‖Φ(u, ·)‖_{L^s} = |Φ(u)| for every s.
        let unit = MeasureSpace::interval(0.0, 1.0).unwrap();
        let two = Kernel::two_variable("two", move |u: &Point, _: &Point| a * u.scalar().unwrap().powf(alpha));
        let one = Kernel::one_variable("one", move |u: &Point| a * u.scalar().unwrap().powf(alpha));
        let q = quad();
        let mixed = mixed_norm(&two, &unit, &unit, &power_modulus, &e, &q).unwrap();
        let weight = match e.regime() {
            Regime::Mixed => e.q(),
            Regime::Diagonal => e.p(),
            Regime::SourceSup | Regime::BothInfinite => Exponent::Infinite,
        };
        let reduced = one_var_norm(&one, &unit, &power_modulus, weight, &q).unwrap();
        let tol = mixed.error_estimate + reduced.error_estimate + 1e-9 * reduced.value;
        prop_assert!((mixed.value - reduced.value).abs() <= tol, "{e}: {} vs {}", mixed.value, reduced.value);
    }
}
