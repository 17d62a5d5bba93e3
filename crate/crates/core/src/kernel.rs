//! Kernels `Φ(u, x)`, exponent pairs and the mixed norms.
//!
//! Exponents are exact rationals (or `∞`), so the conjugacy identities
//! `1/r + 1/r′ = 1` and `p·r′ = q` hold without rounding.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::measure::{Integral, MeasureSpace, Point, QuadratureRule, QuadratureSpec};

type Q = Ratio<i64>;

/// An extended rational in `(0, ∞]`, used for `p`, `q`, `r` and `r′`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(Q),
    Infinite,
}

impl Exponent {
    pub fn int(n: i64) -> Self {
        Exponent::Finite(Q::from_integer(n))
    }

    pub fn ratio(numer: i64, denom: i64) -> Self {
        Exponent::Finite(Q::new(numer, denom))
    }

    /// Exact conversion for dyadic values that fit, closest small rational otherwise.
    pub fn from_f64(x: f64) -> Result<Self> {
        if x == f64::INFINITY {
            return Ok(Exponent::Infinite);
        }
        if !x.is_finite() {
            return Err(Error::InvalidExponents(format!("{x} is not an exponent")));
        }
        if let Some(q) = dyadic(x) {
            return Ok(Exponent::Finite(q));
        }
        Q::approximate_float(x)
            .map(Exponent::Finite)
            .ok_or_else(|| Error::InvalidExponents(format!("{x} has no rational approximation")))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn value(&self) -> f64 {
        match self {
            Exponent::Finite(q) => *q.numer() as f64 / *q.denom() as f64,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    /// `1/e` with `1/∞ = 0`.
    pub fn reciprocal(&self) -> Q {
        match self {
            Exponent::Finite(q) => q.recip(),
            Exponent::Infinite => Q::zero(),
        }
    }

    /// Product in the extended rationals (operands are positive).
    pub fn mul(&self, other: &Exponent) -> Exponent {
        match (self, other) {
            (Exponent::Finite(a), Exponent::Finite(b)) => Exponent::Finite(a * b),
            _ => Exponent::Infinite,
        }
    }
}

fn dyadic(x: f64) -> Option<Q> {
    if x == 0.0 {
        return Some(Q::zero());
    }
    for shift in 0..=40u32 {
        let scaled = x * (1u64 << shift) as f64;
        if scaled.fract() == 0.0 && scaled.abs() < 9.0e15 {
            return Some(Q::new(scaled as i64, 1i64 << shift));
        }
    }
    None
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Exponent::Finite(a), Exponent::Finite(b)) => a.cmp(b),
            (Exponent::Finite(_), Exponent::Infinite) => Ordering::Less,
            (Exponent::Infinite, Exponent::Finite(_)) => Ordering::Greater,
            (Exponent::Infinite, Exponent::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(q) if q.is_integer() => write!(f, "{}", q.numer()),
            Exponent::Finite(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    /// Accepts `inf`, integers, `a/b` and plain decimals such as `2.5`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidExponents(format!("cannot parse exponent {s:?}"));
        if s == "inf" {
            return Ok(Exponent::Infinite);
        }
        if let Some((a, b)) = s.split_once('/') {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0 {
                return Err(bad());
            }
            return Ok(Exponent::ratio(a, b));
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 12 || !frac.bytes().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let negative = int.starts_with('-');
            let whole: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
            let denom = 10i64.pow(frac.len() as u32);
            let part: i64 = frac.parse().map_err(|_| bad())?;
            let numer = whole.abs() * denom + part;
            return Ok(Exponent::ratio(if negative { -numer } else { numer }, denom));
        }
        s.parse::<i64>().map(Exponent::int).map_err(|_| bad())
    }
}

/// Which of the four mixed norms applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `∞ > q > p`
    Mixed,
    /// `q = ∞ > p`
    SourceSup,
    /// `p = q < ∞`
    Diagonal,
    /// `p = q = ∞`
    BothInfinite,
}

impl Regime {
    pub fn tag(&self) -> &'static str {
        match self {
            Regime::Mixed => "p<q<inf",
            Regime::SourceSup => "q=inf>p",
            Regime::Diagonal => "p=q<inf",
            Regime::BothInfinite => "p=q=inf",
        }
    }

    pub const ALL: [Regime; 4] = [Regime::Mixed, Regime::SourceSup, Regime::Diagonal, Regime::BothInfinite];
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// An admissible pair: `∞ > q ≥ p ≥ 1`, `q = ∞ > p ≥ 1`, or `p = q = ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Exponents {
    p: Exponent,
    q: Exponent,
}

impl Exponents {
    pub fn new(p: Exponent, q: Exponent) -> Result<Self> {
        let one = Exponent::int(1);
        if p < one {
            return Err(Error::InvalidExponents(format!("p = {p} is below 1")));
        }
        let ok = match (p, q) {
            (Exponent::Infinite, Exponent::Infinite) => true,
            (Exponent::Infinite, Exponent::Finite(_)) => false,
            (Exponent::Finite(_), Exponent::Infinite) => true,
            (Exponent::Finite(a), Exponent::Finite(b)) => b >= a,
        };
        if !ok {
            return Err(Error::InvalidExponents(format!("(p, q) = ({p}, {q}) needs q >= p")));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn q(&self) -> Exponent {
        self.q
    }

    pub fn regime(&self) -> Regime {
        match (self.p, self.q) {
            (Exponent::Infinite, _) => Regime::BothInfinite,
            (_, Exponent::Infinite) => Regime::SourceSup,
            (a, b) if a == b => Regime::Diagonal,
            _ => Regime::Mixed,
        }
    }
}

impl fmt::Display for Exponents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} q={}", self.p, self.q)
    }
}

/// `r(p, q)` and its conjugate `r′`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Conjugacy {
    pub r: Exponent,
    pub r_conj: Exponent,
}

impl Conjugacy {
    /// `p·r′`, equal to `q` for every admissible pair.
    pub fn p_times_r_conj(&self, e: &Exponents) -> Exponent {
        e.p.mul(&self.r_conj)
    }

    /// `1/r + 1/r′`, equal to 1.
    pub fn reciprocal_sum(&self) -> Q {
        self.r.reciprocal() + self.r_conj.reciprocal()
    }
}

pub fn conjugacy_r(e: &Exponents) -> Conjugacy {
    let r = match (e.p, e.q) {
        (_, Exponent::Infinite) if e.p != e.q => Exponent::int(1),
        (a, b) if a == b => Exponent::Infinite,
        (Exponent::Finite(p), Exponent::Finite(q)) => Exponent::Finite(q / (q - p)),
        _ => unreachable!("admissible pairs are covered above"),
    };
    let r_conj = match r {
        Exponent::Infinite => Exponent::int(1),
        Exponent::Finite(x) if x.is_one() => Exponent::Infinite,
        Exponent::Finite(x) => Exponent::Finite(x / (x - Q::one())),
    };
    Conjugacy { r, r_conj }
}

/// `m^{-1/e}`, with `m^{-1/∞} = 1`. Every caller goes through here so equal
/// inputs produce equal bits.
pub fn modulus_weight(m: f64, e: Exponent) -> f64 {
    match e {
        Exponent::Infinite => 1.0,
        Exponent::Finite(_) => m.powf(-1.0 / e.value()),
    }
}

pub type KernelFn = Arc<dyn Fn(&Point, &Point) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct Kernel {
    eval: KernelFn,
    one_variable: bool,
    nonnegative: bool,
    description: String,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("description", &self.description)
            .field("one_variable", &self.one_variable)
            .field("nonnegative", &self.nonnegative)
            .finish()
    }
}

/// Placeholder `x` for one-variable kernels.
const ANY_X: Point = Point::Index(0);

impl Kernel {
    /// Flags are taken on trust; use [`Kernel::validated`] to spot-check them.
    pub fn new(description: impl Into<String>, eval: KernelFn, one_variable: bool, nonnegative: bool) -> Self {
        Self {
            eval,
            one_variable,
            nonnegative,
            description: description.into(),
        }
    }

    pub fn two_variable<F>(description: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Point, &Point) -> f64 + Send + Sync + 'static,
    {
        Self::new(description, Arc::new(f), false, false)
    }

    pub fn one_variable<F>(description: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Point) -> f64 + Send + Sync + 'static,
    {
        Self::new(description, Arc::new(move |u: &Point, _: &Point| f(u)), true, false)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("{c}"), Arc::new(move |_: &Point, _: &Point| c), true, c >= 0.0)
    }

    pub fn with_nonnegative(mut self, flag: bool) -> Self {
        self.nonnegative = flag;
        self
    }

    /// `c·Φ`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            eval: Arc::new(move |u, x| c * inner(u, x)),
            one_variable: self.one_variable,
            nonnegative: self.nonnegative && c >= 0.0,
            description: format!("{c}*({})", self.description),
        }
    }

    pub fn evaluate(&self, u: &Point, x: &Point) -> f64 {
        (self.eval)(u, x)
    }

    /// `φ(u)` for a one-variable kernel.
    pub fn evaluate_one(&self, u: &Point) -> f64 {
        (self.eval)(u, &ANY_X)
    }

    pub fn is_one_variable(&self) -> bool {
        self.one_variable
    }

    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Spot-check the flags on a probe grid of `omega × s`.
    pub fn validated(self, omega: &MeasureSpace, s: &MeasureSpace) -> Result<Self> {
        let us = probe_points(omega, 9);
        let xs = probe_points(s, 9);
        for u in &us {
            let first = self.evaluate(u, &xs[0]);
            for x in &xs {
                let v = self.evaluate(u, x);
                if self.nonnegative && v < 0.0 {
                    return Err(Error::HypothesesViolated(format!(
                        "kernel {} is negative at u={u}, x={x}",
                        self.description
                    )));
                }
                if self.one_variable && v.to_bits() != first.to_bits() {
                    return Err(Error::HypothesesViolated(format!(
                        "kernel {} depends on x at u={u}",
                        self.description
                    )));
                }
            }
        }
        Ok(self)
    }
}

/// A small grid inside `space` for spot checks: every point of a discrete
/// carrier (thinned to at most 64), or `per_axis` interior points per axis.
pub fn probe_points(space: &MeasureSpace, per_axis: usize) -> Vec<Point> {
    use crate::measure::Carrier;
    if let Some(points) = space.points() {
        let step = points.len().div_ceil(64).max(1);
        return points.into_iter().step_by(step).collect();
    }
    let axis = |lo: f64, hi: f64| -> Vec<f64> {
        let (a, b) = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => (lo, hi),
            (true, false) => (lo, lo + 10.0),
            (false, true) => (hi - 10.0, hi),
            (false, false) => (-5.0, 5.0),
        };
        (1..=per_axis).map(|i| a + (b - a) * i as f64 / (per_axis + 1) as f64).collect()
    };
    match &space.carrier {
        Carrier::Interval { lo, hi, .. } => axis(*lo, *hi).into_iter().map(Point::Real).collect(),
        Carrier::Box { lo, hi } => {
            let mut out = vec![Vec::new()];
            for (a, b) in lo.iter().zip(hi) {
                let ticks = axis(*a, *b);
                out = out
                    .into_iter()
                    .flat_map(|p| {
                        ticks.iter().map(move |t| {
                            let mut q = p.clone();
                            q.push(*t);
                            q
                        })
                    })
                    .collect();
            }
            out.into_iter().map(Point::Vector).collect()
        }
        _ => unreachable!("discrete carriers handled above"),
    }
}

/// Growth factor per refinement that marks an outer integral as divergent.
pub const DIVERGENCE_GROWTH: f64 = 1.1;

/// Outer integral over `Ω` with the divergence check: the rule carries four
/// levels (budgets `N/8 … N`) and the integral is declared divergent when
/// each of the three refinements grows the value by at least 10%.
pub fn outer_integral<G>(omega: &MeasureSpace, quad: &QuadratureSpec, g: G) -> Result<Integral>
where
    G: Fn(&Point) -> Result<f64> + Sync,
{
    let rule = QuadratureRule::with_levels(omega, quad, 4)?;
    if rule.is_exact() {
        return rule.integrate(g);
    }
    let mut values = rule.level_values(&g)?;
    values.reverse();
    if values.windows(2).all(|w| w[0] > 0.0 && w[1] >= DIVERGENCE_GROWTH * w[0]) {
        return Err(Error::Divergent { partial_values: values });
    }
    let n = values.len();
    let (fine, coarse) = (values[n - 1], values[n - 2]);
    rule.check(fine, (fine - coarse).abs(), fine.abs())
}

/// `‖Φ‖^{(p,q)}` for the regime of `e`. `m` is the agreement factor.
pub fn mixed_norm(
    kernel: &Kernel,
    omega: &MeasureSpace,
    s: &MeasureSpace,
    m: &(dyn Fn(&Point) -> Result<f64> + Sync),
    e: &Exponents,
    quad: &QuadratureSpec,
) -> Result<Integral> {
    // Built lazily: one-variable kernels in cases (c) and (d) never touch S.
    let inner = || QuadratureRule::new(s, quad);
    match e.regime() {
        Regime::Mixed | Regime::SourceSup => {
            // Case (a) uses L^{pr}; case (b) has r = 1 and no modulus weight.
            let c = conjugacy_r(e);
            let s_exp = e.p().mul(&c.r).value();
            let weight_exp = if e.regime() == Regime::Mixed { e.q() } else { Exponent::Infinite };
            let inner = inner()?;
            let unit = if kernel.is_one_variable() {
                Some(inner.lp_norm(|_| Ok(1.0), s_exp)?.value)
            } else {
                None
            };
            outer_integral(omega, quad, |u| {
                let norm = match unit {
                    Some(unit) => kernel.evaluate_one(u).abs() * unit,
                    None => inner.lp_norm(|x| Ok(kernel.evaluate(u, x)), s_exp)?.value,
                };
                let w = match weight_exp {
                    Exponent::Infinite => 1.0,
                    q => modulus_weight(m(u)?, q),
                };
                Ok(norm * w)
            })
        }
        Regime::Diagonal => {
            let inner = if kernel.is_one_variable() { None } else { Some(inner()?) };
            outer_integral(omega, quad, |u| {
                let sup = match &inner {
                    None => kernel.evaluate_one(u).abs(),
                    Some(rule) => rule.sup_abs(|x| Ok(kernel.evaluate(u, x)))?,
                };
                Ok(sup * modulus_weight(m(u)?, e.p()))
            })
        }
        Regime::BothInfinite => {
            if kernel.is_one_variable() {
                return outer_integral(omega, quad, |u| Ok(kernel.evaluate_one(u).abs()));
            }
            let inner = inner()?;
            let mut best = Integral::exact(0.0);
            for x in inner.sup_points() {
                let v = outer_integral(omega, quad, |u| Ok(kernel.evaluate(u, x).abs()))?;
                if v.value > best.value {
                    best.value = v.value;
                }
                best.error_estimate = best.error_estimate.max(v.error_estimate);
            }
            Ok(best)
        }
    }
}

/// `‖φ‖^{(p)}_{m,μ} = ∫ |φ(u)| m(u)^{-1/p} dμ(u)`; the plain `L¹(μ)` norm at `p = ∞`.
pub fn one_var_norm(
    kernel: &Kernel,
    omega: &MeasureSpace,
    m: &(dyn Fn(&Point) -> Result<f64> + Sync),
    p: Exponent,
    quad: &QuadratureSpec,
) -> Result<Integral> {
    if !kernel.is_one_variable() {
        return Err(Error::HypothesesViolated(format!(
            "kernel {} is not one-variable",
            kernel.description()
        )));
    }
    outer_integral(omega, quad, |u| {
        let w = match p {
            Exponent::Infinite => 1.0,
            _ => modulus_weight(m(u)?, p),
        };
        Ok(kernel.evaluate_one(u).abs() * w)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(p: Exponent, q: Exponent) -> Exponents {
        Exponents::new(p, q).unwrap()
    }

    #[test]
    fn conjugacy_examples() {
        let c = conjugacy_r(&pair(Exponent::int(2), Exponent::int(4)));
        assert_eq!((c.r, c.r_conj), (Exponent::int(2), Exponent::int(2)));
        assert_eq!(c.p_times_r_conj(&pair(Exponent::int(2), Exponent::int(4))), Exponent::int(4));
        assert_eq!(conjugacy_r(&pair(Exponent::int(3), Exponent::int(3))).r, Exponent::Infinite);
        let c = conjugacy_r(&pair(Exponent::int(2), Exponent::Infinite));
        assert_eq!((c.r, c.r_conj), (Exponent::int(1), Exponent::Infinite));
    }

    #[test]
    fn admissibility() {
        assert!(Exponents::new(Exponent::int(3), Exponent::int(2)).is_err());
        assert!(Exponents::new(Exponent::ratio(1, 2), Exponent::int(2)).is_err());
        assert!(Exponents::new(Exponent::Infinite, Exponent::int(2)).is_err());
        assert!(Exponents::new(Exponent::Infinite, Exponent::Infinite).is_ok());
        assert!(Exponents::new(Exponent::int(1), Exponent::Infinite).is_ok());
    }

    #[test]
    fn parsing() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinite);
        assert_eq!("2.5".parse::<Exponent>().unwrap(), Exponent::ratio(5, 2));
        assert_eq!("7/3".parse::<Exponent>().unwrap(), Exponent::ratio(7, 3));
        assert_eq!("4".parse::<Exponent>().unwrap(), Exponent::int(4));
        assert!("infinity".parse::<Exponent>().is_err());
        assert!("1/0".parse::<Exponent>().is_err());
        assert_eq!(Exponent::from_f64(1.25).unwrap(), Exponent::ratio(5, 4));
        assert_eq!(Exponent::ratio(5, 4).to_string(), "5/4");
    }

    fn dilation_m(u: &Point) -> Result<f64> {
        Ok(u.scalar().unwrap())
    }

    #[test]
    fn cesaro_mixed_norms() {
        let omega = MeasureSpace::interval(0.0, 1.0).unwrap();
        let s = MeasureSpace::interval(0.0, f64::INFINITY).unwrap();
        let quad = QuadratureSpec::default();
        let k = Kernel::constant(1.0);
        let two = pair(Exponent::int(2), Exponent::int(2));
        let v = mixed_norm(&k, &omega, &s, &dilation_m, &two, &quad).unwrap();
        assert!((v.value - 2.0).abs() < 1e-6, "{v:?}");
        let inf = pair(Exponent::Infinite, Exponent::Infinite);
        let v = mixed_norm(&k, &omega, &s, &dilation_m, &inf, &quad).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_variable_mixed_norm() {
        let unit = MeasureSpace::interval(0.0, 1.0).unwrap();
        let k = Kernel::two_variable("u*x", |u, x| u.scalar().unwrap() * x.scalar().unwrap());
        let e = pair(Exponent::int(1), Exponent::int(2));
        let v = mixed_norm(&k, &unit, &unit, &|_| Ok(1.0), &e, &QuadratureSpec::default()).unwrap();
        assert!((v.value - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-6, "{v:?}");
    }

    #[test]
    fn one_var_examples() {
        let omega = MeasureSpace::interval(0.0, 1.0).unwrap();
        let quad = QuadratureSpec::default();
        let k = Kernel::constant(1.0);
        let v = one_var_norm(&k, &omega, &dilation_m, Exponent::int(2), &quad).unwrap();
        assert!((v.value - 2.0).abs() < 1e-6);
        let v = one_var_norm(&k, &omega, &|_| Ok(1.0), Exponent::Infinite, &quad).unwrap();
        assert!((v.value - 1.0).abs() < 1e-14);

        let z = MeasureSpace::counting((-30..=30).collect()).unwrap();
        let geo = Kernel::one_variable("2^-|k|", |u| 2f64.powi(-(u.index().unwrap().abs() as i32)));
        for p in [Exponent::int(1), Exponent::int(3), Exponent::Infinite] {
            let v = one_var_norm(&geo, &z, &|_| Ok(1.0), p, &quad).unwrap();
            assert_eq!(v.value, 3.0 - 2f64.powi(-29));
        }
    }

    #[test]
    fn divergence_detected() {
        let omega = MeasureSpace::interval(0.0, 1.0).unwrap();
        let k = Kernel::constant(1.0);
        let e = pair(Exponent::int(1), Exponent::int(1));
        let err = mixed_norm(&k, &omega, &omega, &dilation_m, &e, &QuadratureSpec::default()).unwrap_err();
        match err {
            Error::Divergent { partial_values } => {
                assert_eq!(partial_values.len(), 4);
                assert!(partial_values.windows(2).all(|w| w[1] > w[0]));
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn flag_validation() {
        let omega = MeasureSpace::interval(0.0, 1.0).unwrap();
        let bad = Kernel::two_variable("u-x", |u, x| u.scalar().unwrap() - x.scalar().unwrap()).with_nonnegative(true);
        assert!(matches!(bad.validated(&omega, &omega), Err(Error::HypothesesViolated(_))));
        let lying = Kernel::new("x", Arc::new(|_: &Point, x: &Point| x.scalar().unwrap()), true, false);
        assert!(lying.validated(&omega, &omega).is_err());
        assert!(Kernel::constant(2.0).validated(&omega, &omega).is_ok());
    }
}
