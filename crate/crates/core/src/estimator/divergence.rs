use crate::error::{Error, Result};
use crate::kernel::DIVERGENCE_GROWTH;
use crate::measure::{Carrier, MeasureSpace, Point, QuadratureRule, QuadratureSpec};
use crate::operator::{Function, OperatorInstance};

#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceReport {
    pub eps: Vec<f64>,
    /// `∫_{eps}^{hi} Φ(u, x) f(A(u)x) dμ(u)` per `eps`.
    pub values: Vec<f64>,
    /// Every refinement grew the value by at least 10%.
    pub monotone_growth: bool,
}

/// Truncated values of `(Hf)(x)` as the lower cut-off of `Ω` shrinks.
pub fn divergence_probe(
    op: &OperatorInstance,
    f: &Function,
    x: &Point,
    eps_sequence: &[f64],
    quad: &QuadratureSpec,
) -> Result<DivergenceReport> {
    let Carrier::Interval { lo, hi, .. } = op.omega.carrier else {
        return Err(Error::Unsupported("divergence probe needs an interval parameter space".into()));
    };
    if eps_sequence.is_empty() || eps_sequence.iter().any(|e| !(*e > lo && *e < hi)) {
        return Err(Error::InvalidArgument(format!("eps values must lie inside ({lo}, {hi})")));
    }
    if eps_sequence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("eps sequence must be strictly decreasing".into()));
    }
    // A bounded cut-off interval needs no truncation window.
    let quad = if hi.is_finite() {
        QuadratureSpec {
            truncation: None,
            ..quad.clone()
        }
    } else {
        quad.clone()
    };
    let mut values = Vec::with_capacity(eps_sequence.len());
    for &eps in eps_sequence {
        let cut = MeasureSpace::interval(eps, hi)?;
        let rule = QuadratureRule::new(&cut, &quad)?;
        let v = rule.integrate(|u| {
            let y = op.family.apply_map(u, x)?;
            Ok(op.kernel.evaluate(u, x) * f.evaluate(&y))
        })?;
        values.push(v.value);
    }
    let monotone_growth = values.len() >= 2 && values.windows(2).all(|w| w[0] > 0.0 && w[1] >= DIVERGENCE_GROWTH * w[0]);
    Ok(DivergenceReport {
        eps: eps_sequence.to_vec(),
        values,
        monotone_growth,
    })
}
