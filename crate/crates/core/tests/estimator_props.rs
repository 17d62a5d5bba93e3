use hausdorff::bounds::theoretical_bound;
use hausdorff::estimator::{
    ascent_norm, empirical_norm_continuous, empirical_norm_discrete, empirical_norm_matrix, norm_1, norm_inf,
    spectral_norm, weighted_matrix, AscentOptions, TestFamily,
};
use hausdorff::instances::{random_discrete_instance, InstanceShape};
use hausdorff::kernel::Regime;
use hausdorff::maps::MapFamily;
use hausdorff::measure::{MeasureSpace, QuadratureSpec};
use hausdorff::operator::{to_matrix, OperatorInstance};
use hausdorff::{Exponent, Exponents, Kernel};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn cesaro(p: i64) -> OperatorInstance {
    let s = MeasureSpace::interval(0.0, f64::INFINITY).unwrap();
    let fam = MapFamily::scalar_dilation(s.clone(), s.clone()).unwrap();
    let e = Exponents::new(Exponent::int(p), Exponent::int(p)).unwrap();
    OperatorInstance::new(MeasureSpace::interval(0.0, 1.0).unwrap(), s.clone(), s, fam, Kernel::constant(1.0), e).unwrap()
}

fn cesaro_quad() -> QuadratureSpec {
    QuadratureSpec::default().with_budget(1024).with_truncation(1e-200, 1e8)
}

fn regime() -> impl Strategy<Value = Regime> {
    prop::sample::select(Regime::ALL.to_vec())
}

/// Ratios `‖Hf‖₂/‖f‖₂` for `f = t^{-(1/2 − ε)}` on `(0, 1]`, computed in 50-digit
/// arithmetic with the same truncation window `[1e-200, 1e8]`.
const CESARO_P2: [(f64, f64); 4] = [(0.2, 1.690309), (0.1, 1.825742), (0.05, 1.906925), (0.02, 1.961161)];

#[test]
fn cesaro_ratio_increases_as_eps_shrinks() {
    let op = cesaro(2);
    let mut previous = 0.0;
    for (eps, expected) in CESARO_P2 {
        let alpha = 0.5 - eps;
        let fam = TestFamily::TruncatedPower {
            alpha: (alpha, alpha),
            support: (0.0, 1.0),
        };
        let lb = empirical_norm_continuous(&op, &[fam], 1, 0, &cesaro_quad()).unwrap();
        assert!((lb.value - expected).abs() < 1e-4, "eps={eps}: {} vs {expected}", lb.value);
        assert!(lb.value > previous, "eps={eps}: {} after {previous}", lb.value);
        previous = lb.value;
    }
    assert!((1.95..2.0).contains(&previous));
}

#[test]
fn continuous_search_is_reproducible() {
    let op = cesaro(2);
    let families = [
        TestFamily::TruncatedPower {
            alpha: (0.3, 0.48),
            support: (0.0, 1.0),
        },
        TestFamily::GaussianBump {
            center: (0.5, 3.0),
            width: (0.2, 2.0),
        },
    ];
    let quad = QuadratureSpec::default().with_budget(256).with_truncation(1e-60, 1e6).with_rel_tol(1e-3);
    let a = empirical_norm_continuous(&op, &families, 6, 11, &quad).unwrap();
    let b = empirical_norm_continuous(&op, &families, 6, 11, &quad).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert!(a.value > 1.0 && a.value < 2.0, "{a:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn same_seed_same_witness(shape in prop_oneof![Just(InstanceShape::Cyclic), Just(InstanceShape::Shells)], regime in regime(), seed in any::<u64>()) {
        let op = random_discrete_instance(shape, regime, seed).unwrap();
        let opts = AscentOptions::default().with_seed(seed);
        let a = empirical_norm_discrete(&op, &opts).unwrap();
        let b = empirical_norm_discrete(&op, &opts).unwrap();
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        prop_assert_eq!(a.witness.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.witness.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn grid_search_below_matrix_norm_and_bound(shape in prop_oneof![Just(InstanceShape::Cyclic), Just(InstanceShape::Shells)], regime in regime(), seed in any::<u64>()) {
        let op = random_discrete_instance(shape, regime, seed).unwrap();
        let quad = QuadratureSpec::default();
        let grid = empirical_norm_continuous(&op, &[TestFamily::GridVector], 8, seed, &quad).unwrap();
        let b = weighted_matrix(&op, &to_matrix(&op).unwrap()).unwrap();
        let matrix = hausdorff::estimator::empirical_norm_between(
            &b, op.exponents.q(), op.exponents.p(), &AscentOptions::default().with_seed(seed),
        ).unwrap();
        let bound = theoretical_bound(&op, &quad).unwrap().finite().unwrap();
        prop_assert!(grid.value <= matrix.value + 1e-9);
        prop_assert!(grid.value <= bound + 1e-6 && matrix.value <= bound + 1e-6);
    }

    #[test]
    fn ascent_reaches_closed_forms(entries in prop::collection::vec(-1.0..1.0f64, 25), seed in any::<u64>()) {
        let b = DMatrix::from_row_slice(5, 5, &entries);
        let opts = AscentOptions::default().with_seed(seed);
        let cases = [
            (1.0, norm_1(&b).value),
            (2.0, spectral_norm(&b, seed).unwrap().value),
            (f64::INFINITY, norm_inf(&b).value),
        ];
        for (p, exact) in cases {
            let found = ascent_norm(&b, p, p, &opts).value;
            prop_assert!((found - exact).abs() <= 1e-6, "p={p}: ascent {found} vs {exact}");
        }
        let dispatched = empirical_norm_matrix(&b, Exponent::int(2), &opts).unwrap();
        prop_assert!(dispatched.exact);
    }
}
