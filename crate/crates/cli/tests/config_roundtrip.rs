use hausdorff_cli::config::{
    parse_config, EstimatorSpec, ExponentValue, ExponentsSpec, FamilySpec, GroupMeasure, KernelSpec, MatrixSpec,
    ProbeSpec, QuadratureOverrides, ScenarioConfig, SpaceSpec, TestFamilySpec,
};
use hausdorff_cli::expr::Expr;
use hausdorff_cli::scenarios;
use proptest::prelude::*;

#[test]
fn builtin_scenarios_round_trip() {
    for name in scenarios::names() {
        let cfg = scenarios::load(name).unwrap();
        let again = parse_config(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again, "{name}");
    }
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, Just(0.0), Just(1e-200)]
}

fn bound() -> impl Strategy<Value = f64> {
    prop_oneof![finite(), Just(f64::INFINITY), Just(f64::NEG_INFINITY)]
}

fn space() -> impl Strategy<Value = SpaceSpec> {
    prop_oneof![
        (bound(), bound(), any::<bool>()).prop_map(|(lo, hi, closed)| SpaceSpec::Interval { lo, hi, closed }),
        prop::collection::vec((bound(), bound()), 1..4).prop_map(|v| SpaceSpec::Box {
            lo: v.iter().map(|p| p.0).collect(),
            hi: v.iter().map(|p| p.1).collect(),
        }),
        prop::collection::vec(-50i64..50, 0..6).prop_map(|indices| SpaceSpec::Counting { indices }),
        prop::collection::vec((-50i64..50, finite()), 0..6).prop_map(|v| SpaceSpec::Weighted {
            indices: v.iter().map(|p| p.0).collect(),
            weights: v.iter().map(|p| p.1).collect(),
        }),
        (1u64..100, any::<bool>()).prop_map(|(order, haar)| SpaceSpec::Group {
            order,
            measure: if haar { GroupMeasure::Haar } else { GroupMeasure::Counting },
        }),
        (-9i64..9, -9i64..9).prop_map(|(lo, hi)| SpaceSpec::Range { lo, hi }),
    ]
}

fn family() -> impl Strategy<Value = FamilySpec> {
    prop_oneof![
        Just(FamilySpec::ScalarDilation),
        prop::collection::vec((-5i64..5, prop::collection::vec(prop::collection::vec(finite(), 2), 2)), 0..3)
            .prop_map(|m| FamilySpec::MatrixDilation {
                matrices: m.into_iter().map(|(index, rows)| MatrixSpec { index, rows }).collect(),
            }),
        (finite(), prop::collection::vec(-5i64..5, 0..4))
            .prop_map(|(base, indices)| FamilySpec::PowerDilation { base, indices }),
        prop::collection::vec(1i64..30, 0..4).prop_map(|multipliers| FamilySpec::Cyclic { multipliers }),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    prop::sample::select(vec!["1", "u*x", "2^(-abs(u))", "exp(-t) * sin(pi*x1)", "-u^2^0.5"])
        .prop_map(|s| Expr::parse(s).unwrap())
}

fn kernel() -> impl Strategy<Value = KernelSpec> {
    let flag = prop::option::of(any::<bool>());
    prop_oneof![
        (expr(), flag.clone()).prop_map(|(e, nonnegative)| KernelSpec { expr: Some(e), nonnegative, ..Default::default() }),
        Just(KernelSpec { builtin: Some("one".into()), ..Default::default() }),
        (prop::collection::vec(finite(), 1..5), flag)
            .prop_map(|(phi, nonnegative)| KernelSpec { phi: Some(phi), nonnegative, ..Default::default() }),
        prop::collection::vec(prop::collection::vec(finite(), 3), 1..3)
            .prop_map(|t| KernelSpec { table: Some(t), ..Default::default() }),
    ]
}

fn exponent() -> impl Strategy<Value = ExponentValue> {
    prop_oneof![
        (1i64..20).prop_map(ExponentValue::Int),
        prop_oneof![1.0..20.0f64, Just(f64::INFINITY)].prop_map(ExponentValue::Float),
        prop::sample::select(vec!["inf", "7/2", "5/4"]).prop_map(|s| ExponentValue::Text(s.into())),
    ]
}

fn quadrature() -> impl Strategy<Value = QuadratureOverrides> {
    (
        prop::option::of(2usize..5000),
        prop::option::of(2usize..500),
        prop::option::of(prop::sample::select(vec!["uniform".to_string(), "geometric".to_string()])),
        prop::option::of(0.01..0.99f64),
        prop::option::of((1e-300..1e-3f64, 1.0..1e12f64).prop_map(|(a, b)| [a, b])),
        prop::option::of(1e-12..1e-2f64),
        prop::option::of(prop::collection::vec(finite(), 0..4)),
    )
        .prop_map(|(node_budget, axis_budget, grading, ratio, truncation, rel_tol, breakpoints)| QuadratureOverrides {
            node_budget,
            axis_budget,
            grading,
            ratio,
            truncation,
            rel_tol,
            breakpoints,
        })
}

fn pair() -> impl Strategy<Value = [f64; 2]> {
    (finite(), finite()).prop_map(|(a, b)| [a, b])
}

fn test_family() -> impl Strategy<Value = TestFamilySpec> {
    prop_oneof![
        (pair(), pair()).prop_map(|(a, s)| TestFamilySpec::TruncatedPower { alpha: Some(a), eps: None, support: s }),
        (prop::collection::vec(0.0..0.5f64, 1..4), pair())
            .prop_map(|(e, s)| TestFamilySpec::TruncatedPower { alpha: None, eps: Some(e), support: s }),
        (prop::collection::vec(finite(), 2..5), pair())
            .prop_map(|(breakpoints, levels)| TestFamilySpec::Step { breakpoints, levels }),
        (pair(), pair()).prop_map(|(center, width)| TestFamilySpec::Gaussian { center, width }),
        Just(TestFamilySpec::Grid),
        (finite(), -50i64..0, 0i64..50).prop_map(|(base, a, b)| TestFamilySpec::Shells { base, window: [a, b] }),
    ]
}

fn config() -> impl Strategy<Value = ScenarioConfig> {
    (
        prop::option::of("[a-zA-Z0-9 ,.()_'-]{0,30}"),
        (space(), space(), space()),
        family(),
        kernel(),
        (exponent(), exponent()),
        quadrature(),
        (prop::option::of(1usize..100), prop::option::of(any::<u64>()), prop::collection::vec(test_family(), 0..3)),
        prop::option::of((expr(), finite(), prop::collection::vec(1e-9..1.0f64, 1..4))),
    )
        .prop_map(|(description, (omega, source, target), family, kernel, (p, q), quadrature, est, probe)| ScenarioConfig {
            schema_version: 1,
            description,
            omega,
            source,
            target,
            family,
            kernel,
            exponents: ExponentsSpec { p, q },
            quadrature,
            estimator: EstimatorSpec { budget: est.0, seed: est.1, families: est.2 },
            probe: probe.map(|(function, x, eps)| ProbeSpec { function, x, eps }),
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Serialization is lossless, valid or not.
    #[test]
    fn toml_round_trip(cfg in config()) {
        let text = cfg.to_toml();
        let again: ScenarioConfig = toml::from_str(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(cfg, again);
    }
}
