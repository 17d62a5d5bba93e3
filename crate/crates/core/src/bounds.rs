//! The mixed-norm upper bound on `‖H‖_{L^q → L^p}` and its special cases.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel::{mixed_norm, modulus_weight, outer_integral, probe_points, Exponent, Regime};
use crate::maps::{abs_det, MapKind};
use crate::measure::{Integral, MeasureKind, Point, QuadratureSpec};
use crate::operator::{Function, OperatorInstance};
use crate::sum::{pairwise_dot, pairwise_sum};

#[derive(Clone, Debug, PartialEq)]
pub enum BoundValue {
    Finite(Integral),
    /// The mixed norm is infinite, so no bound is claimed.
    Divergent { partial_values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundResult {
    pub value: BoundValue,
    pub regime: Regime,
    pub formula: String,
}

impl BoundResult {
    pub fn finite(&self) -> Option<f64> {
        match &self.value {
            BoundValue::Finite(i) => Some(i.value),
            BoundValue::Divergent { .. } => None,
        }
    }

    pub fn error_estimate(&self) -> f64 {
        match &self.value {
            BoundValue::Finite(i) => i.error_estimate,
            BoundValue::Divergent { .. } => f64::INFINITY,
        }
    }
}

impl fmt::Display for BoundResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            BoundValue::Finite(i) => write!(f, "{} (±{:e}) [{}] {}", i.value, i.error_estimate, self.regime, self.formula),
            BoundValue::Divergent { partial_values } => {
                write!(f, "divergent {partial_values:?} [{}] {}", self.regime, self.formula)
            }
        }
    }
}

fn formula(regime: Regime) -> &'static str {
    match regime {
        Regime::Mixed => "∫_Ω ‖Φ(u,·)‖_{L^{pr}(ν)} m(u)^{-1/q} dμ(u), r = q/(q-p)",
        Regime::SourceSup => "∫_Ω ‖Φ(u,·)‖_{L^p(ν)} dμ(u)",
        Regime::Diagonal => "∫_Ω ‖Φ(u,·)‖_{L^∞(ν)} m(u)^{-1/p} dμ(u)",
        Regime::BothInfinite => "sup_x ∫_Ω |Φ(u,x)| dμ(u)",
    }
}

fn wrap(regime: Regime, formula: String, r: Result<Integral>) -> Result<BoundResult> {
    let value = match r {
        Ok(i) => BoundValue::Finite(i),
        Err(Error::Divergent { partial_values }) => BoundValue::Divergent { partial_values },
        Err(e) => return Err(e),
    };
    Ok(BoundResult { value, regime, formula })
}

/// `‖Φ‖^{(p,q)}_{μ,ν,m}` for the instance's exponents.
pub fn theoretical_bound(op: &OperatorInstance, quad: &QuadratureSpec) -> Result<BoundResult> {
    let regime = op.exponents.regime();
    let m = |u: &Point| op.family.agreement_factor(u);
    let r = mixed_norm(&op.kernel, &op.omega, &op.target, &m, &op.exponents, quad);
    wrap(regime, formula(regime).to_string(), r)
}

/// The bound with a declared majorant `|Φ(u, x)| ≤ φ(u)` in place of `Φ`
/// (only meaningful for `p = q`). The majorant is checked on a probe grid.
pub fn bound_with_majorant(op: &OperatorInstance, majorant: &Function, quad: &QuadratureSpec) -> Result<BoundResult> {
    let p = op.exponents.p();
    if op.exponents.q() != p {
        return Err(Error::InvalidArgument("a majorant bound needs p = q".into()));
    }
    let xs = probe_points(&op.target, 9);
    for u in probe_points(&op.omega, 9) {
        let bound = majorant.evaluate(&u);
        for x in &xs {
            let v = op.kernel.evaluate(&u, x).abs();
            if v > bound {
                return Err(Error::HypothesesViolated(format!(
                    "|Φ({u}, {x})| = {v} exceeds majorant {bound}"
                )));
            }
        }
    }
    let r = outer_integral(&op.omega, quad, |u| {
        let w = match p {
            Exponent::Infinite => 1.0,
            _ => modulus_weight(op.family.agreement_factor(u)?, p),
        };
        Ok(majorant.evaluate(u).abs() * w)
    });
    let regime = op.exponents.regime();
    wrap(regime, format!("∫_Ω |φ(u)| m(u)^{{-1/{p}}} dμ(u), φ = {}", majorant.description()), r)
}

/// `Σ_k |φ(k)| |det A_k|^{-1/p}` over `(k, φ(k), A_k)`.
///
/// Summed in the given order with the same pairwise tree as the generic
/// bound, so a matrix-dilation instance over the same indices agrees bit for
/// bit.
pub fn discrete_hausdorff_bound(terms: &[(i64, f64, DMatrix<f64>)], p: Exponent) -> Result<f64> {
    let mut values = Vec::with_capacity(terms.len());
    for (k, phi, a) in terms {
        if !a.is_square() {
            return Err(Error::InvalidArgument(format!("matrix {k} is not square")));
        }
        let det = abs_det(a);
        if det == 0.0 {
            return Err(Error::SingularMatrix { index: *k });
        }
        values.push(phi.abs() * modulus_weight(det, p));
    }
    Ok(pairwise_dot(&vec![1.0; values.len()], &values))
}

/// `‖Φ‖_{L¹(μ)}`, the exact norm of an automorphism-averaging operator on a
/// finite group with normalized Haar measure and a one-variable `Φ ≥ 0`.
pub fn exact_norm_compact_group(op: &OperatorInstance) -> Result<f64> {
    for s in [&op.source, &op.target] {
        if s.kind != MeasureKind::NormalizedHaarFinite {
            return Err(Error::HypothesesViolated(format!(
                "{} does not carry normalized Haar measure",
                s.carrier
            )));
        }
    }
    if op.source != op.target {
        return Err(Error::HypothesesViolated("source and target groups differ".into()));
    }
    if !matches!(op.family.kind(), MapKind::CyclicAutomorphism { .. } | MapKind::Custom { .. }) {
        return Err(Error::HypothesesViolated("family must act by group automorphisms".into()));
    }
    let (Some(us), Some(mu), Some(xs)) = (op.omega.points(), op.omega.point_masses(), op.target.points()) else {
        return Err(Error::Unsupported("exact group norm needs a discrete parameter space".into()));
    };
    let mut phi = Vec::with_capacity(us.len());
    for u in &us {
        let first = op.kernel.evaluate(u, &xs[0]);
        if first < 0.0 {
            return Err(Error::HypothesesViolated(format!("Φ({u}) = {first} is negative")));
        }
        if xs.iter().any(|x| op.kernel.evaluate(u, x).to_bits() != first.to_bits()) {
            return Err(Error::HypothesesViolated(format!("Φ({u}, x) depends on x")));
        }
        phi.push(first);
    }
    Ok(pairwise_dot(&mu, &phi))
}

/// `‖Φ‖_{L¹(μ)}` of a one-variable kernel on a discrete `Ω` (plain sum, no modulus).
pub fn kernel_l1_discrete(op: &OperatorInstance) -> Result<f64> {
    let (Some(us), Some(mu)) = (op.omega.points(), op.omega.point_masses()) else {
        return Err(Error::NotFiniteDiscrete("Ω is continuous".into()));
    };
    let terms: Vec<f64> = us.iter().zip(&mu).map(|(u, w)| w * op.kernel.evaluate_one(u).abs()).collect();
    Ok(pairwise_sum(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Exponents, Kernel};
    use crate::maps::MapFamily;
    use crate::measure::MeasureSpace;

    fn e(p: Exponent, q: Exponent) -> Exponents {
        Exponents::new(p, q).unwrap()
    }

    fn cesaro(p: i64) -> OperatorInstance {
        let s = MeasureSpace::interval(0.0, f64::INFINITY).unwrap();
        let fam = MapFamily::scalar_dilation(s.clone(), s.clone()).unwrap();
        OperatorInstance::new(
            MeasureSpace::interval(0.0, 1.0).unwrap(),
            s.clone(),
            s,
            fam,
            Kernel::constant(1.0),
            e(Exponent::int(p), Exponent::int(p)),
        )
        .unwrap()
    }

    fn z(n: u64, mults: Vec<i64>, weights: Vec<f64>) -> OperatorInstance {
        let g = MeasureSpace::finite_group(n).unwrap();
        let fam = MapFamily::cyclic(n, mults.clone(), g.clone(), g.clone()).unwrap();
        let table: Vec<(i64, f64)> = mults.iter().copied().zip(weights).collect();
        let k = Kernel::one_variable("table", move |u| {
            table.iter().find(|(k, _)| Some(*k) == u.index()).map_or(0.0, |(_, w)| *w)
        })
        .with_nonnegative(true);
        OperatorInstance::new(
            MeasureSpace::counting(mults).unwrap(),
            g.clone(),
            g,
            fam,
            k,
            e(Exponent::int(2), Exponent::int(2)),
        )
        .unwrap()
    }

    #[test]
    fn cesaro_bounds() {
        let quad = QuadratureSpec::default();
        let b = theoretical_bound(&cesaro(2), &quad).unwrap();
        assert!((b.finite().unwrap() - 2.0).abs() < 1e-6, "{b}");
        assert_eq!(b.regime, Regime::Diagonal);
        let b = theoretical_bound(&cesaro(3), &quad).unwrap();
        assert!((b.finite().unwrap() - 1.5).abs() < 1e-6, "{b}");
        let b = theoretical_bound(&cesaro(1), &quad).unwrap();
        assert!(matches!(b.value, BoundValue::Divergent { .. }));
    }

    #[test]
    fn cyclic_bound_and_exact_norm() {
        let op = z(5, vec![1, 2], vec![0.3, 0.7]);
        let b = theoretical_bound(&op, &QuadratureSpec::default()).unwrap();
        assert_eq!(b.finite(), Some(1.0));
        assert_eq!(exact_norm_compact_group(&op).unwrap(), 1.0);
        assert_eq!(exact_norm_compact_group(&z(5, vec![1], vec![2.5])).unwrap(), 2.5);
        assert_eq!(exact_norm_compact_group(&z(7, vec![1, 2, 3], vec![1.0; 3])).unwrap(), 3.0);
    }

    #[test]
    fn exact_norm_hypotheses() {
        let op = z(5, vec![1, 2], vec![0.3, -0.7]);
        assert!(matches!(exact_norm_compact_group(&op), Err(Error::HypothesesViolated(_))));
        let op = op.with_kernel(Kernel::two_variable("x", |_, x| x.index().unwrap() as f64));
        assert!(matches!(exact_norm_compact_group(&op), Err(Error::HypothesesViolated(_))));
    }

    #[test]
    fn discrete_hausdorff_examples() {
        let id2 = DMatrix::<f64>::identity(2, 2);
        let p2 = Exponent::int(2);
        assert_eq!(discrete_hausdorff_bound(&[(0, 1.0, id2.clone())], p2).unwrap(), 1.0);
        let two = DMatrix::from_diagonal_element(2, 2, 2.0);
        assert_eq!(
            discrete_hausdorff_bound(&[(0, 1.0, id2.clone()), (1, 1.0, two)], p2).unwrap(),
            1.5
        );
        assert_eq!(discrete_hausdorff_bound(&[(0, -3.25, id2)], Exponent::Infinite).unwrap(), 3.25);
        let singular = DMatrix::<f64>::zeros(2, 2);
        assert_eq!(
            discrete_hausdorff_bound(&[(4, 1.0, singular)], p2),
            Err(Error::SingularMatrix { index: 4 })
        );
    }

    #[test]
    fn majorant_bound() {
        let op = cesaro(2).with_kernel(Kernel::two_variable("u/(1+x)", |u, x| {
            u.scalar().unwrap() / (1.0 + x.scalar().unwrap())
        }));
        let phi = Function::new("u", |u| u.scalar().unwrap());
        let b = bound_with_majorant(&op, &phi, &QuadratureSpec::default()).unwrap();
        // ∫_0^1 u · u^{-1/2} du = 2/3
        assert!((b.finite().unwrap() - 2.0 / 3.0).abs() < 1e-6);
        let too_small = Function::new("u/4", |u| u.scalar().unwrap() / 4.0);
        assert!(bound_with_majorant(&op, &too_small, &QuadratureSpec::default()).is_err());
    }
}
