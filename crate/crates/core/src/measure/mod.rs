//! Measure spaces, quadrature and `L^p` norms.
//!
//! Continuous carriers are integrated with composite 8-point Gauss–Legendre
//! panels. The panel layout depends on [`QuadratureSpec`]: uniform panels,
//! geometric grading toward the lower endpoint (for integrable power
//! singularities such as `u^{-1/p}`), or log-spaced panels when a truncation
//! window is active and the window stays positive. Every continuous result
//! carries a Richardson estimate: the same rule evaluated at half the node
//! budget.
//!
//! Discrete carriers are summed exactly. Normalized Haar measure on a finite
//! group divides the plain sum by the order, so the total mass is exactly 1.

mod gauss;
mod rule;

use std::fmt;

use crate::error::{Error, Result};

pub use gauss::{gauss_legendre, PANEL_ORDER};
pub use rule::{NodeSet, QuadratureRule};

/// A point of a carrier: a real, a vector in `R^d`, or an integer index
/// (also used for elements `0..n` of a cyclic group).
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Real(f64),
    Vector(Vec<f64>),
    Index(i64),
}

impl Point {
    /// Scalar value of a real or index point.
    pub fn scalar(&self) -> Option<f64> {
        match self {
            Point::Real(x) => Some(*x),
            Point::Index(k) => Some(*k as f64),
            Point::Vector(v) if v.len() == 1 => Some(v[0]),
            Point::Vector(_) => None,
        }
    }

    pub fn index(&self) -> Option<i64> {
        match self {
            Point::Index(k) => Some(*k),
            _ => None,
        }
    }

    /// Coordinates as a vector (a real is a 1-vector).
    pub fn coords(&self) -> Vec<f64> {
        match self {
            Point::Real(x) => vec![*x],
            Point::Vector(v) => v.clone(),
            Point::Index(k) => vec![*k as f64],
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Real(x) => write!(f, "{x}"),
            Point::Index(k) => write!(f, "#{k}"),
            Point::Vector(v) => {
                write!(f, "(")?;
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Carrier {
    /// `[lo, hi]`; either bound may be infinite. `open_endpoints` marks the
    /// endpoints as excluded, which keeps them off the sup grid.
    Interval { lo: f64, hi: f64, open_endpoints: bool },
    /// Axis-aligned box in `R^d`, bounds may be infinite.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Finite index set, strictly ascending.
    CountableIndex(Vec<i64>),
    /// Cyclic group `Z_n`, elements `0..n`.
    FiniteGroup { order: u64 },
}

impl fmt::Display for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Carrier::Interval { lo, hi, open_endpoints } => {
                if *open_endpoints {
                    write!(f, "({lo}, {hi})")
                } else {
                    write!(f, "[{lo}, {hi}]")
                }
            }
            Carrier::Box { lo, hi } => write!(f, "box {lo:?}..{hi:?}"),
            Carrier::CountableIndex(ix) if ix.len() <= 8 => write!(f, "index set {ix:?}"),
            Carrier::CountableIndex(ix) => match (ix.first(), ix.last()) {
                (Some(a), Some(b)) if (b - a) as usize + 1 == ix.len() => write!(f, "index set {{{a}..{b}}}"),
                (Some(a), Some(b)) => write!(f, "index set in {{{a}..{b}}} ({} points)", ix.len()),
                _ => write!(f, "empty index set"),
            },
            Carrier::FiniteGroup { order } => write!(f, "Z_{order}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureKind {
    Lebesgue,
    Counting,
    /// Point masses aligned with the index list.
    WeightedCounting(Vec<f64>),
    NormalizedHaarFinite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureSpace {
    pub carrier: Carrier,
    pub kind: MeasureKind,
    /// Always true for the supported kinds.
    pub sigma_finite: bool,
}

impl MeasureSpace {
    pub fn new(carrier: Carrier, kind: MeasureKind) -> Result<Self> {
        match (&carrier, &kind) {
            (Carrier::Interval { lo, hi, .. }, MeasureKind::Lebesgue) => {
                if lo.is_nan() || hi.is_nan() || lo >= hi {
                    return Err(Error::InvalidSpace(format!("interval needs lo < hi, got [{lo}, {hi}]")));
                }
            }
            (Carrier::Box { lo, hi }, MeasureKind::Lebesgue) => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return Err(Error::InvalidSpace("box bounds must have the same positive dimension".into()));
                }
                if lo.iter().zip(hi).any(|(a, b)| a.is_nan() || b.is_nan() || a >= b) {
                    return Err(Error::InvalidSpace("box needs lo < hi componentwise".into()));
                }
            }
            (Carrier::CountableIndex(ix), MeasureKind::Counting) => check_indices(ix)?,
            (Carrier::CountableIndex(ix), MeasureKind::WeightedCounting(w)) => {
                check_indices(ix)?;
                if w.len() != ix.len() {
                    return Err(Error::InvalidSpace(format!(
                        "{} weights for {} indices",
                        w.len(),
                        ix.len()
                    )));
                }
                if w.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(Error::InvalidSpace("weights must be positive and finite".into()));
                }
            }
            (Carrier::FiniteGroup { order }, MeasureKind::NormalizedHaarFinite | MeasureKind::Counting) => {
                if *order == 0 {
                    return Err(Error::InvalidSpace("group order must be positive".into()));
                }
            }
            (c, k) => {
                return Err(Error::InvalidSpace(format!("measure {k:?} is not supported on {c}")));
            }
        }
        Ok(Self {
            carrier,
            kind,
            sigma_finite: true,
        })
    }

    /// Lebesgue measure on the open interval `(lo, hi)`.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(Carrier::Interval { lo, hi, open_endpoints: true }, MeasureKind::Lebesgue)
    }

    pub fn closed_interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(Carrier::Interval { lo, hi, open_endpoints: false }, MeasureKind::Lebesgue)
    }

    pub fn box_lebesgue(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        Self::new(Carrier::Box { lo, hi }, MeasureKind::Lebesgue)
    }

    pub fn counting(indices: Vec<i64>) -> Result<Self> {
        Self::new(Carrier::CountableIndex(indices), MeasureKind::Counting)
    }

    pub fn weighted_counting(indices: Vec<i64>, weights: Vec<f64>) -> Result<Self> {
        Self::new(Carrier::CountableIndex(indices), MeasureKind::WeightedCounting(weights))
    }

    /// `Z_n` with normalized Haar measure (mass `1/n` per element).
    pub fn finite_group(order: u64) -> Result<Self> {
        Self::new(Carrier::FiniteGroup { order }, MeasureKind::NormalizedHaarFinite)
    }

    pub fn dimension(&self) -> usize {
        match &self.carrier {
            Carrier::Box { lo, .. } => lo.len(),
            _ => 1,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.carrier, Carrier::CountableIndex(_) | Carrier::FiniteGroup { .. })
    }

    /// All points of a discrete carrier, in summation order.
    pub fn points(&self) -> Option<Vec<Point>> {
        match &self.carrier {
            Carrier::CountableIndex(ix) => Some(ix.iter().map(|&k| Point::Index(k)).collect()),
            Carrier::FiniteGroup { order } => Some((0..*order as i64).map(Point::Index).collect()),
            _ => None,
        }
    }

    /// Point masses of a discrete carrier, aligned with [`Self::points`].
    pub fn point_masses(&self) -> Option<Vec<f64>> {
        let n = self.points()?.len();
        Some(match &self.kind {
            MeasureKind::WeightedCounting(w) => w.clone(),
            MeasureKind::NormalizedHaarFinite => vec![1.0 / n as f64; n],
            _ => vec![1.0; n],
        })
    }

    /// Position of a point inside a discrete carrier.
    pub fn position(&self, p: &Point) -> Option<usize> {
        let k = p.index()?;
        match &self.carrier {
            Carrier::CountableIndex(ix) => ix.binary_search(&k).ok(),
            Carrier::FiniteGroup { order } => (0..*order as i64).contains(&k).then_some(k as usize),
            _ => None,
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match (&self.carrier, p) {
            (Carrier::Interval { lo, hi, .. }, Point::Real(x)) => *lo <= *x && *x <= *hi,
            (Carrier::Interval { lo, hi, .. }, Point::Vector(v)) if v.len() == 1 => *lo <= v[0] && v[0] <= *hi,
            (Carrier::Box { lo, hi }, Point::Vector(v)) => {
                v.len() == lo.len() && v.iter().zip(lo.iter().zip(hi)).all(|(x, (a, b))| a <= x && x <= b)
            }
            (Carrier::Box { lo, hi }, Point::Real(x)) => lo.len() == 1 && lo[0] <= *x && *x <= hi[0],
            (Carrier::CountableIndex(_) | Carrier::FiniteGroup { .. }, Point::Index(_)) => self.position(p).is_some(),
            _ => false,
        }
    }

    /// Total mass; infinite for unbounded Lebesgue carriers.
    pub fn total_mass(&self) -> f64 {
        match (&self.carrier, &self.kind) {
            (_, MeasureKind::NormalizedHaarFinite) => 1.0,
            (Carrier::Interval { lo, hi, .. }, _) => hi - lo,
            (Carrier::Box { lo, hi }, _) => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
            (_, MeasureKind::WeightedCounting(w)) => crate::sum::pairwise_sum(w),
            (Carrier::CountableIndex(ix), _) => ix.len() as f64,
            (Carrier::FiniteGroup { order }, _) => *order as f64,
        }
    }
}

fn check_indices(ix: &[i64]) -> Result<()> {
    if ix.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSpace("indices must be strictly ascending".into()));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Grading {
    Uniform,
    /// Panels `[lo + w·r^{k+1}, lo + w·r^k]` toward the lower endpoint.
    Geometric { ratio: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncation {
    pub eps_low: f64,
    pub cap_high: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Nodes for 1-D carriers.
    pub node_budget: usize,
    /// Nodes per axis for boxes.
    pub axis_budget: usize,
    pub grading: Grading,
    pub truncation: Option<Truncation>,
    pub target_rel_tol: f64,
    /// Interior points where 1-D integrands may kink or jump; panels never
    /// straddle them.
    pub breakpoints: Vec<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            node_budget: 4096,
            axis_budget: 256,
            grading: Grading::Geometric { ratio: 0.5 },
            truncation: None,
            target_rel_tol: 1e-6,
            breakpoints: Vec::new(),
        }
    }
}

impl QuadratureSpec {
    pub fn with_budget(mut self, n: usize) -> Self {
        self.node_budget = n;
        self
    }

    pub fn with_axis_budget(mut self, n: usize) -> Self {
        self.axis_budget = n;
        self
    }

    pub fn uniform(mut self) -> Self {
        self.grading = Grading::Uniform;
        self
    }

    pub fn geometric(mut self, ratio: f64) -> Self {
        self.grading = Grading::Geometric { ratio };
        self
    }

    pub fn with_truncation(mut self, eps_low: f64, cap_high: f64) -> Self {
        self.truncation = Some(Truncation { eps_low, cap_high });
        self
    }

    pub fn with_rel_tol(mut self, tol: f64) -> Self {
        self.target_rel_tol = tol;
        self
    }

    pub fn with_breakpoints(mut self, points: Vec<f64>) -> Self {
        self.breakpoints = points;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_budget < 2 || self.axis_budget < 2 {
            return Err(Error::InvalidQuadrature("node budgets must be at least 2".into()));
        }
        if !(self.target_rel_tol.is_finite() && self.target_rel_tol > 0.0) {
            return Err(Error::InvalidQuadrature("target_rel_tol must be positive".into()));
        }
        if let Grading::Geometric { ratio } = self.grading {
            if !(ratio > 0.0 && ratio < 1.0) {
                return Err(Error::InvalidQuadrature(format!("geometric ratio {ratio} outside (0, 1)")));
            }
        }
        if let Some(t) = self.truncation {
            if !(t.eps_low > 0.0 && t.eps_low.is_finite() && t.cap_high.is_finite() && t.cap_high > t.eps_low) {
                return Err(Error::InvalidQuadrature(format!(
                    "truncation needs 0 < eps_low < cap_high < inf, got [{}, {}]",
                    t.eps_low, t.cap_high
                )));
            }
        }
        if self.breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidQuadrature("breakpoints must be finite".into()));
        }
        Ok(())
    }
}

/// A quadrature value with its Richardson error estimate (zero for exact sums).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
}

impl Integral {
    pub fn exact(value: f64) -> Self {
        Self { value, error_estimate: 0.0 }
    }
}

/// `∫ integrand dν` over `space`.
pub fn integrate<F>(space: &MeasureSpace, integrand: F, quad: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(&Point) -> f64 + Sync,
{
    QuadratureRule::new(space, quad)?.integrate(|p| Ok(integrand(p)))
}

/// `(∫ |f|^p dν)^{1/p}`; `p = f64::INFINITY` gives the max over the sup grid.
pub fn lp_norm<F>(space: &MeasureSpace, f: F, p: f64, quad: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(&Point) -> f64 + Sync,
{
    QuadratureRule::new(space, quad)?.lp_norm(|x| Ok(f(x)), p)
}
