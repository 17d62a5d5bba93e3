//! Evaluation of `(Hf)(x) = ∫_Ω Φ(u, x) f(A(u)x) dμ(u)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{Exponents, Kernel};
use crate::maps::{MapFamily, MapKind};
use crate::measure::{Carrier, Integral, MeasureSpace, Point, QuadratureRule, QuadratureSpec};
use crate::sum::pairwise_sum;

/// Declared support of a [`Function`]; evaluation outside it returns 0.
#[derive(Clone, Debug, PartialEq)]
pub enum Support {
    /// Closed interval `[lo, hi]`.
    Interval(f64, f64),
    Points(Vec<i64>),
}

impl Support {
    fn contains(&self, x: &Point) -> bool {
        match self {
            Support::Interval(lo, hi) => x.scalar().is_some_and(|t| *lo <= t && t <= *hi),
            Support::Points(ix) => x.index().is_some_and(|k| ix.contains(&k)),
        }
    }
}

pub type FunctionFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// A real function on `S′`.
#[derive(Clone)]
pub struct Function {
    eval: FunctionFn,
    support: Option<Support>,
    description: String,
}

impl fmt::Debug for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Function")
            .field("description", &self.description)
            .field("support", &self.support)
            .finish()
    }
}

impl Function {
    pub fn new<F>(description: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Point) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            support: None,
            description: description.into(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("{c}"), move |_| c)
    }

    /// Indicator of a set of indices.
    pub fn indicator(points: Vec<i64>) -> Self {
        Self::new(format!("1_{points:?}"), |_| 1.0).with_support(Support::Points(points))
    }

    /// Values on the points of a discrete space, in carrier order.
    pub fn from_values(space: &MeasureSpace, values: Vec<f64>) -> Result<Self> {
        let n = space
            .points()
            .ok_or_else(|| Error::NotFiniteDiscrete(format!("grid vector on {}", space.carrier)))?
            .len();
        if values.len() != n {
            return Err(Error::InvalidArgument(format!("{} values for {n} points", values.len())));
        }
        let space = space.clone();
        Ok(Self::new("grid vector", move |x| space.position(x).map_or(0.0, |i| values[i])))
    }

    pub fn with_support(mut self, support: Support) -> Self {
        self.support = Some(support);
        self
    }

    pub fn support(&self) -> Option<&Support> {
        self.support.as_ref()
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn evaluate(&self, x: &Point) -> f64 {
        match &self.support {
            Some(s) if !s.contains(x) => 0.0,
            _ => (self.eval)(x),
        }
    }

    /// `a·self + b·other`; the support is the union (dropped if the kinds differ).
    pub fn combine(&self, a: f64, other: &Function, b: f64) -> Function {
        let (f, g) = (self.clone(), other.clone());
        let support = match (&self.support, &other.support) {
            (Some(Support::Interval(a0, a1)), Some(Support::Interval(b0, b1))) => {
                Some(Support::Interval(a0.min(*b0), a1.max(*b1)))
            }
            (Some(Support::Points(x)), Some(Support::Points(y))) => {
                let mut all: Vec<i64> = x.iter().chain(y).copied().collect();
                all.sort_unstable();
                all.dedup();
                Some(Support::Points(all))
            }
            _ => None,
        };
        Function {
            eval: Arc::new(move |x| a * f.evaluate(x) + b * g.evaluate(x)),
            support,
            description: format!("{a}*({}) + {b}*({})", self.description, other.description),
        }
    }
}

/// A Hausdorff-type operator from `L^q(S′, ν′)` to `L^p(S, ν)`.
#[derive(Clone, Debug)]
pub struct OperatorInstance {
    pub omega: MeasureSpace,
    /// `(S′, ν′)`, where `f` lives.
    pub source: MeasureSpace,
    /// `(S, ν)`, where `Hf` lives.
    pub target: MeasureSpace,
    pub family: MapFamily,
    pub kernel: Kernel,
    pub exponents: Exponents,
}

impl OperatorInstance {
    pub fn new(
        omega: MeasureSpace,
        source: MeasureSpace,
        target: MeasureSpace,
        family: MapFamily,
        kernel: Kernel,
        exponents: Exponents,
    ) -> Result<Self> {
        if family.domain() != &target {
            return Err(Error::InvalidSpace("map family domain must be the target space S".into()));
        }
        if family.codomain() != &source {
            return Err(Error::InvalidSpace("map family codomain must be the source space S′".into()));
        }
        Ok(Self {
            omega,
            source,
            target,
            family,
            kernel,
            exponents,
        })
    }

    pub fn with_exponents(&self, exponents: Exponents) -> Self {
        Self {
            exponents,
            ..self.clone()
        }
    }

    pub fn with_kernel(&self, kernel: Kernel) -> Self {
        Self { kernel, ..self.clone() }
    }

    pub fn is_finite_discrete(&self) -> bool {
        self.omega.is_discrete() && self.source.is_discrete() && self.target.is_discrete()
    }

    /// `Ω`, shrunk for 1-D dilations so that `u·x` stays inside the support
    /// of `f`. `None` when the shrunk range is empty.
    fn parameter_space(&self, f: &Function, x: &Point) -> Result<Option<MeasureSpace>> {
        let (MapKind::ScalarDilation, Some(Support::Interval(a, b)), Carrier::Interval { lo, hi, .. }) =
            (self.family.kind(), f.support(), &self.omega.carrier)
        else {
            return Ok(Some(self.omega.clone()));
        };
        let t = match x.scalar() {
            Some(t) if t != 0.0 => t,
            _ => return Ok(Some(self.omega.clone())),
        };
        let (u0, u1) = if t > 0.0 { (a / t, b / t) } else { (b / t, a / t) };
        let (l, h) = (lo.max(u0), hi.min(u1));
        if l >= h {
            return Ok(None);
        }
        if l == *lo && h == *hi {
            return Ok(Some(self.omega.clone()));
        }
        MeasureSpace::interval(l, h).map(Some)
    }
}

/// `(Hf)(x)` with a Richardson estimate (exact for discrete `Ω`).
pub fn apply(op: &OperatorInstance, f: &Function, x: &Point, quad: &QuadratureSpec) -> Result<Integral> {
    if !op.target.contains(x) {
        return Err(Error::OutOfCarrier {
            point: x.to_string(),
            carrier: op.target.carrier.to_string(),
        });
    }
    let Some(omega) = op.parameter_space(f, x)? else {
        return Ok(Integral::exact(0.0));
    };
    let rule = QuadratureRule::new(&omega, quad)?;
    rule.integrate(|u| {
        let y = op.family.apply_map(u, x)?;
        Ok(op.kernel.evaluate(u, x) * f.evaluate(&y))
    })
}

/// `Hf` on every grid point, in grid order.
pub fn apply_grid(op: &OperatorInstance, f: &Function, grid: &[Point], quad: &QuadratureSpec) -> Result<Vec<Integral>> {
    grid.par_iter().map(|x| apply(op, f, x, quad)).collect()
}

/// `H(re + i·im)(x)`, computed part by part.
pub fn apply_complex(
    op: &OperatorInstance,
    re: &Function,
    im: &Function,
    x: &Point,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    Ok(Complex64::new(apply(op, re, x, quad)?.value, apply(op, im, x, quad)?.value))
}

/// `M[x, x′] = Σ_{u: A(u)x = x′} Φ(u, x) μ({u})`, rows indexed by `S`,
/// columns by `S′`.
pub fn to_matrix(op: &OperatorInstance) -> Result<DMatrix<f64>> {
    let (Some(us), Some(mu), Some(xs), Some(cols)) = (
        op.omega.points(),
        op.omega.point_masses(),
        op.target.points(),
        op.source.points(),
    ) else {
        return Err(Error::NotFiniteDiscrete(
            "matrix form needs discrete Ω, S and S′".into(),
        ));
    };
    let rows: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|x| {
            let mut row = vec![0.0; cols.len()];
            for (u, w) in us.iter().zip(&mu) {
                let y = op.family.apply_map(u, x)?;
                let j = op.source.position(&y).ok_or_else(|| Error::OutOfCarrier {
                    point: y.to_string(),
                    carrier: op.source.carrier.to_string(),
                })?;
                row[j] += op.kernel.evaluate(u, x) * w;
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(xs.len(), cols.len(), |i, j| rows[i][j]))
}

/// `M f` with each row reduced pairwise.
pub fn matrix_apply(m: &DMatrix<f64>, f: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| {
            let terms: Vec<f64> = (0..m.ncols()).map(|j| m[(i, j)] * f[j]).collect();
            pairwise_sum(&terms)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Exponent;

    fn cesaro() -> OperatorInstance {
        let half_line = MeasureSpace::interval(0.0, f64::INFINITY).unwrap();
        let omega = MeasureSpace::interval(0.0, 1.0).unwrap();
        let family = MapFamily::scalar_dilation(half_line.clone(), half_line.clone()).unwrap();
        let e = Exponents::new(Exponent::int(2), Exponent::int(2)).unwrap();
        OperatorInstance::new(omega, half_line.clone(), half_line, family, Kernel::constant(1.0), e).unwrap()
    }

    fn z5() -> OperatorInstance {
        let g = MeasureSpace::finite_group(5).unwrap();
        let omega = MeasureSpace::counting(vec![1, 2]).unwrap();
        let family = MapFamily::cyclic(5, vec![1, 2], g.clone(), g.clone()).unwrap();
        let kernel = Kernel::one_variable("0.3/0.7", |u| if u.index() == Some(1) { 0.3 } else { 0.7 });
        let e = Exponents::new(Exponent::int(2), Exponent::int(2)).unwrap();
        OperatorInstance::new(omega, g.clone(), g, family, kernel, e).unwrap()
    }

    #[test]
    fn cesaro_values() {
        let op = cesaro();
        let quad = QuadratureSpec::default();
        let one = apply(&op, &Function::constant(1.0), &Point::Real(3.0), &quad).unwrap();
        assert!((one.value - 1.0).abs() < 1e-14);
        let id = Function::new("t", |p| p.scalar().unwrap());
        let v = apply(&op, &id, &Point::Real(2.0), &quad).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12);
        let grid = [Point::Real(1.0), Point::Real(2.0)];
        let out: Vec<f64> = apply_grid(&op, &id, &grid, &quad).unwrap().iter().map(|i| i.value).collect();
        assert!((out[0] - 0.5).abs() < 1e-12 && (out[1] - 1.0).abs() < 1e-12);
        assert!(apply_grid(&op, &id, &[], &quad).unwrap().is_empty());
    }

    #[test]
    fn support_restricts_parameter_range() {
        let op = cesaro();
        // f = 1 on [0, 1]: (Hf)(x) = min(1, 1/x).
        let f = Function::constant(1.0).with_support(Support::Interval(0.0, 1.0));
        let v = apply(&op, &f, &Point::Real(4.0), &QuadratureSpec::default()).unwrap();
        assert!((v.value - 0.25).abs() < 1e-14, "{v:?}");
    }

    #[test]
    fn cyclic_apply_and_matrix() {
        let op = z5();
        let v = apply(&op, &Function::indicator(vec![0]), &Point::Index(0), &QuadratureSpec::default()).unwrap();
        assert_eq!(v, Integral::exact(1.0));
        let m = to_matrix(&op).unwrap();
        assert_eq!(m[(0, 0)], 1.0);
        assert_eq!(m[(1, 1)], 0.3);
        assert_eq!(m[(1, 2)], 0.7);
        assert_eq!(m[(3, 1)], 0.7);
    }

    #[test]
    fn identity_and_empty_matrices() {
        let g = MeasureSpace::finite_group(2).unwrap();
        let fam = MapFamily::cyclic(2, vec![1], g.clone(), g.clone()).unwrap();
        let e = Exponents::new(Exponent::int(1), Exponent::int(1)).unwrap();
        let op = OperatorInstance::new(
            MeasureSpace::counting(vec![1]).unwrap(),
            g.clone(),
            g.clone(),
            fam.clone(),
            Kernel::constant(1.0),
            e,
        )
        .unwrap();
        assert_eq!(to_matrix(&op).unwrap(), DMatrix::identity(2, 2));
        let empty = OperatorInstance {
            omega: MeasureSpace::counting(vec![]).unwrap(),
            ..op
        };
        assert_eq!(to_matrix(&empty).unwrap(), DMatrix::zeros(2, 2));
    }

    #[test]
    fn matrix_needs_discrete_spaces() {
        assert!(matches!(to_matrix(&cesaro()), Err(Error::NotFiniteDiscrete(_))));
    }

    #[test]
    fn complex_parts() {
        let op = cesaro();
        let z = apply_complex(
            &op,
            &Function::constant(1.0),
            &Function::constant(-2.0),
            &Point::Real(1.0),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((z - Complex64::new(1.0, -2.0)).norm() < 1e-13);
    }

    #[test]
    fn mismatched_spaces_rejected() {
        let op = z5();
        let other = MeasureSpace::finite_group(7).unwrap();
        let r = OperatorInstance::new(op.omega, other.clone(), other, op.family, op.kernel, op.exponents);
        assert!(matches!(r, Err(Error::InvalidSpace(_))));
    }
}
