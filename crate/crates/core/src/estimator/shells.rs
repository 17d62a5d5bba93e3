use std::ops::RangeInclusive;

use super::matrix::{empirical_norm_discrete, AscentOptions};
use super::LowerBound;
use crate::error::{Error, Result};
use crate::maps::shell_lattice;
use crate::measure::Carrier;
use crate::operator::OperatorInstance;

/// Lower bound for a dilation instance `A_k = ±base^{n_k} I` on all of `R^d`,
/// restricted to radial functions that are constant on the shells
/// `base^j ≤ |x| < base^{j+1}`, `j ∈ window`.
///
/// On that subspace the operator is exactly a weighted shift matrix, so its
/// norm (with the output cut to the window) is a true lower bound.
pub fn shell_estimate(
    op: &OperatorInstance,
    base: f64,
    window: RangeInclusive<i64>,
    opts: &AscentOptions,
) -> Result<LowerBound> {
    let whole_space = match &op.target.carrier {
        Carrier::Box { lo, hi } => lo.iter().chain(hi).all(|b| b.is_infinite()),
        Carrier::Interval { lo, hi, .. } => lo.is_infinite() && hi.is_infinite(),
        _ => false,
    };
    if !whole_space || op.source != op.target {
        return Err(Error::Unsupported("shell discretization needs S = S′ = R^d".into()));
    }
    if !op.kernel.is_one_variable() {
        return Err(Error::Unsupported("shell discretization needs a one-variable kernel".into()));
    }
    if !op.omega.is_discrete() {
        return Err(Error::Unsupported("shell discretization needs a discrete Ω".into()));
    }
    let shifts = op.family.scalar_power_shifts(base)?;
    let lattice = shell_lattice(base, op.target.dimension(), &shifts, window)?;
    let discrete = OperatorInstance::new(
        op.omega.clone(),
        lattice.source,
        lattice.target,
        lattice.family,
        op.kernel.clone(),
        op.exponents,
    )?;
    let mut lb = empirical_norm_discrete(&discrete, opts)?;
    lb.label = format!("radial shells ({})", lb.label);
    Ok(lb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::discrete_hausdorff_bound;
    use crate::kernel::{Exponent, Exponents, Kernel};
    use crate::maps::MapFamily;
    use crate::measure::MeasureSpace;
    use nalgebra::DMatrix;

    #[test]
    fn shell_estimate_below_bound_and_close() {
        let plane = MeasureSpace::box_lebesgue(vec![f64::NEG_INFINITY; 2], vec![f64::INFINITY; 2]).unwrap();
        let mats: Vec<(i64, DMatrix<f64>)> =
            (-1..=1).map(|k| (k, DMatrix::from_diagonal_element(2, 2, 2f64.powi(k as i32)))).collect();
        let fam = MapFamily::matrix_dilation(mats.clone(), plane.clone(), plane.clone()).unwrap();
        let kernel = Kernel::one_variable("1", |_| 1.0);
        let e = Exponents::new(Exponent::int(2), Exponent::int(2)).unwrap();
        let op = OperatorInstance::new(MeasureSpace::counting(vec![-1, 0, 1]).unwrap(), plane.clone(), plane, fam, kernel, e)
            .unwrap();
        let terms: Vec<_> = mats.into_iter().map(|(k, a)| (k, 1.0, a)).collect();
        let bound = discrete_hausdorff_bound(&terms, Exponent::int(2)).unwrap();
        let lb = shell_estimate(&op, 2.0, -40..=40, &AscentOptions::default()).unwrap();
        assert!(lb.value <= bound, "{} > {bound}", lb.value);
        assert!(lb.value > 0.99 * bound, "{} vs {bound}", lb.value);
    }
}
