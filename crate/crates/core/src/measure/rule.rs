use rayon::prelude::*;

use super::gauss::{panel_rule, PANEL_ORDER};
use super::{Carrier, Grading, MeasureKind, MeasureSpace, Point, QuadratureSpec};
use crate::error::{Error, Result};
use crate::measure::Integral;
use crate::sum::{pairwise_dot, pairwise_sum};

const PAR_THRESHOLD: usize = 4096;

/// Nodes and weights of one refinement level. The weighted sum is divided by
/// `divisor` (the group order for normalized Haar measure, otherwise 1).
#[derive(Clone, Debug)]
pub struct NodeSet {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub divisor: f64,
}

/// Precomputed quadrature for one space. Level 0 is the full budget, level
/// `i` uses `budget >> i`; discrete spaces have a single exact level.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    levels: Vec<NodeSet>,
    sup_points: Vec<Point>,
    exact: bool,
    rel_tol: f64,
}

enum Panel {
    Linear(f64, f64),
    Log(f64, f64),
}

struct Line {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Panel boundaries that belong to the carrier.
    boundaries: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(space: &MeasureSpace, quad: &QuadratureSpec) -> Result<Self> {
        Self::with_levels(space, quad, 2)
    }

    /// A rule carrying `levels` successively halved budgets (continuous
    /// carriers only; discrete carriers always have one exact level).
    pub fn with_levels(space: &MeasureSpace, quad: &QuadratureSpec, levels: usize) -> Result<Self> {
        quad.validate()?;
        let levels = levels.max(1);
        if let (Some(points), Some(masses)) = (space.points(), space.point_masses()) {
            let n = points.len();
            let set = match space.kind {
                MeasureKind::NormalizedHaarFinite => NodeSet {
                    points: points.clone(),
                    weights: vec![1.0; n],
                    divisor: n as f64,
                },
                _ => NodeSet {
                    points: points.clone(),
                    weights: masses,
                    divisor: 1.0,
                },
            };
            return Ok(Self {
                levels: vec![set],
                sup_points: points,
                exact: true,
                rel_tol: quad.target_rel_tol,
            });
        }

        let mut sets = Vec::with_capacity(levels);
        let mut sup_points = Vec::new();
        for level in 0..levels {
            match &space.carrier {
                Carrier::Interval { lo, hi, open_endpoints } => {
                    let budget = (quad.node_budget >> level).max(PANEL_ORDER);
                    let line = line_rule(*lo, *hi, *open_endpoints, budget, quad, &quad.breakpoints, &space.carrier)?;
                    if level == 0 {
                        sup_points = line
                            .nodes
                            .iter()
                            .chain(&line.boundaries)
                            .map(|&x| Point::Real(x))
                            .collect();
                    }
                    sets.push(NodeSet {
                        points: line.nodes.into_iter().map(Point::Real).collect(),
                        weights: line.weights,
                        divisor: 1.0,
                    });
                }
                Carrier::Box { lo, hi } => {
                    let budget = (quad.axis_budget >> level).max(PANEL_ORDER);
                    let axes = lo
                        .iter()
                        .zip(hi)
                        .map(|(&a, &b)| line_rule(a, b, true, budget, quad, &[], &space.carrier))
                        .collect::<Result<Vec<_>>>()?;
                    let set = tensor(&axes);
                    if level == 0 {
                        sup_points = set.points.clone();
                    }
                    sets.push(set);
                }
                _ => unreachable!("discrete carriers handled above"),
            }
        }
        Ok(Self {
            levels: sets,
            sup_points,
            exact: false,
            rel_tol: quad.target_rel_tol,
        })
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn fine(&self) -> &NodeSet {
        &self.levels[0]
    }

    pub fn level(&self, i: usize) -> &NodeSet {
        &self.levels[i]
    }

    /// Points used for grid essential suprema: the finest nodes plus panel
    /// boundaries that lie in the carrier.
    pub fn sup_points(&self) -> &[Point] {
        &self.sup_points
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    /// Raw weighted sums per level, finest first, without any tolerance check.
    pub fn level_values<F>(&self, f: F) -> Result<Vec<f64>>
    where
        F: Fn(&Point) -> Result<f64> + Sync,
    {
        self.levels
            .iter()
            .map(|set| {
                let v = eval_all(&set.points, &f)?;
                Ok(pairwise_dot(&set.weights, &v) / set.divisor)
            })
            .collect()
    }

    /// Integral over the space with a Richardson estimate from levels 0 and 1.
    pub fn integrate<F>(&self, f: F) -> Result<Integral>
    where
        F: Fn(&Point) -> Result<f64> + Sync,
    {
        let fine = &self.levels[0];
        let v0 = eval_all(&fine.points, &f)?;
        let value = pairwise_dot(&fine.weights, &v0) / fine.divisor;
        if self.exact || self.levels.len() < 2 {
            return Ok(Integral::exact(value));
        }
        let abs: Vec<f64> = fine.weights.iter().zip(&v0).map(|(w, v)| (w * v).abs()).collect();
        let abs_sum = pairwise_sum(&abs);
        let coarse = &self.levels[1];
        let v1 = eval_all(&coarse.points, &f)?;
        let coarse_value = pairwise_dot(&coarse.weights, &v1) / coarse.divisor;
        let error_estimate = (value - coarse_value).abs();
        self.check(value, error_estimate, abs_sum)
    }

    /// `(∫|f|^p)^{1/p}` for `p ≥ 1`, or the sup-grid maximum for `p = ∞`.
    pub fn lp_norm<F>(&self, f: F, p: f64) -> Result<Integral>
    where
        F: Fn(&Point) -> Result<f64> + Sync,
    {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidArgument(format!("L^p norm needs p >= 1, got {p}")));
        }
        if p.is_infinite() {
            return self.sup_abs(f).map(Integral::exact);
        }
        let used = if self.exact { 1 } else { 2.min(self.levels.len()) };
        let values = self.levels[..used]
            .iter()
            .map(|set| Ok(eval_all(&set.points, &f)?.into_iter().map(f64::abs).collect::<Vec<_>>()))
            .collect::<Result<Vec<_>>>()?;
        let scale = values.iter().flatten().fold(0.0f64, |m, v| m.max(*v));
        if scale == 0.0 {
            return Ok(Integral::exact(0.0));
        }
        let norms: Vec<f64> = self.levels[..used]
            .iter()
            .zip(&values)
            .map(|(set, v)| {
                let powered: Vec<f64> = v.iter().map(|x| (x / scale).powf(p)).collect();
                scale * (pairwise_dot(&set.weights, &powered) / set.divisor).powf(1.0 / p)
            })
            .collect();
        if used == 1 {
            return Ok(Integral::exact(norms[0]));
        }
        let error_estimate = (norms[0] - norms[1]).abs();
        self.check(norms[0], error_estimate, norms[0])
    }

    /// Maximum of `|f|` over [`Self::sup_points`].
    pub fn sup_abs<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&Point) -> Result<f64> + Sync,
    {
        let v = eval_all(&self.sup_points, &f)?;
        Ok(v.into_iter().fold(0.0f64, |m, x| m.max(x.abs())))
    }

    /// Accept `value` if `error_estimate` is within the relative tolerance or
    /// below the rounding floor `64ε·abs_scale`.
    pub fn check(&self, value: f64, error_estimate: f64, abs_scale: f64) -> Result<Integral> {
        let tolerance = self.rel_tol * value.abs();
        let floor = 64.0 * f64::EPSILON * abs_scale;
        if error_estimate <= tolerance || error_estimate <= floor {
            Ok(Integral { value, error_estimate })
        } else {
            Err(Error::ToleranceNotMet {
                value,
                error_estimate,
                tolerance,
            })
        }
    }
}

fn eval_all<F>(points: &[Point], f: &F) -> Result<Vec<f64>>
where
    F: Fn(&Point) -> Result<f64> + Sync,
{
    let raw: Vec<Result<f64>> = if points.len() >= PAR_THRESHOLD {
        points.par_iter().map(f).collect()
    } else {
        points.iter().map(f).collect()
    };
    raw.into_iter()
        .zip(points)
        .map(|(v, p)| {
            let v = v?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFiniteSample {
                    at: p.to_string(),
                    value: v,
                })
            }
        })
        .collect()
}

fn line_rule(
    lo: f64,
    hi: f64,
    open: bool,
    budget: usize,
    quad: &QuadratureSpec,
    breakpoints: &[f64],
    carrier: &Carrier,
) -> Result<Line> {
    let (a, b, log_spaced) = match quad.truncation {
        Some(t) => {
            let a = if lo == f64::NEG_INFINITY {
                -t.cap_high
            } else if lo >= 0.0 {
                lo.max(t.eps_low)
            } else {
                lo
            };
            let b = if hi == f64::INFINITY { t.cap_high } else { hi.min(t.cap_high) };
            if a >= b {
                return Err(Error::InvalidQuadrature(format!(
                    "truncation window [{a}, {b}] is empty on {carrier}"
                )));
            }
            (a, b, a > 0.0)
        }
        None => {
            if lo.is_infinite() || hi.is_infinite() {
                return Err(Error::TruncationRequired(carrier.to_string()));
            }
            (lo, hi, false)
        }
    };

    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);
    let pieces = edges.len() - 1;
    let per_piece = (budget / pieces).max(PANEL_ORDER);
    let panel_count = (per_piece / PANEL_ORDER).max(1);

    let mut panels = Vec::new();
    for w in edges.windows(2) {
        let (c, d) = (w[0], w[1]);
        if log_spaced {
            let (sc, sd) = (c.ln(), d.ln());
            let h = (sd - sc) / panel_count as f64;
            for i in 0..panel_count {
                let s0 = sc + h * i as f64;
                let s1 = if i + 1 == panel_count { sd } else { s0 + h };
                panels.push(Panel::Log(s0, s1));
            }
            continue;
        }
        match quad.grading {
            Grading::Uniform => {
                let h = (d - c) / panel_count as f64;
                for i in 0..panel_count {
                    let x0 = c + h * i as f64;
                    let x1 = if i + 1 == panel_count { d } else { x0 + h };
                    panels.push(Panel::Linear(x0, x1));
                }
            }
            Grading::Geometric { ratio } => {
                let width = d - c;
                // Panels narrower than this carry no information.
                let floor = (c.abs() * 1e-14).max(1e-290);
                let max_levels = ((floor / width).ln() / ratio.ln()).floor().max(1.0) as usize;
                let levels = panel_count.min(max_levels);
                let mut upper = d;
                for k in 0..levels {
                    let lower = c + width * ratio.powi(k as i32 + 1);
                    panels.push(Panel::Linear(lower, upper));
                    upper = lower;
                }
                panels.push(Panel::Linear(c, upper));
            }
        }
    }

    let (gx, gw) = panel_rule();
    let mut nodes = Vec::with_capacity(panels.len() * PANEL_ORDER);
    let mut weights = Vec::with_capacity(panels.len() * PANEL_ORDER);
    let mut boundaries = Vec::with_capacity(panels.len() + 1);
    for panel in &panels {
        match *panel {
            Panel::Linear(x0, x1) => {
                let mid = 0.5 * (x0 + x1);
                let half = 0.5 * (x1 - x0);
                for (t, w) in gx.iter().zip(gw) {
                    nodes.push(mid + half * t);
                    weights.push(half * w);
                }
                boundaries.push(x0);
                boundaries.push(x1);
            }
            Panel::Log(s0, s1) => {
                let mid = 0.5 * (s0 + s1);
                let half = 0.5 * (s1 - s0);
                for (t, w) in gx.iter().zip(gw) {
                    let x = (mid + half * t).exp();
                    nodes.push(x);
                    weights.push(half * w * x);
                }
                boundaries.push(s0.exp());
                boundaries.push(s1.exp());
            }
        }
    }
    boundaries.retain(|&x| (x > lo && x < hi) || (!open && (x == lo || x == hi)));
    boundaries.sort_by(f64::total_cmp);
    boundaries.dedup();
    Ok(Line {
        nodes,
        weights,
        boundaries,
    })
}

fn tensor(axes: &[Line]) -> NodeSet {
    let mut points = vec![Vec::with_capacity(axes.len())];
    let mut weights = vec![1.0];
    for axis in axes {
        let mut next_points = Vec::with_capacity(points.len() * axis.nodes.len());
        let mut next_weights = Vec::with_capacity(points.len() * axis.nodes.len());
        for (p, w) in points.iter().zip(&weights) {
            for (x, wx) in axis.nodes.iter().zip(&axis.weights) {
                let mut q = p.clone();
                q.push(*x);
                next_points.push(q);
                next_weights.push(w * wx);
            }
        }
        points = next_points;
        weights = next_weights;
    }
    NodeSet {
        points: points.into_iter().map(Point::Vector).collect(),
        weights,
        divisor: 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_rule_covers_interval() {
        let s = MeasureSpace::interval(0.0, 1.0).unwrap();
        let rule = QuadratureRule::new(&s, &QuadratureSpec::default()).unwrap();
        let total: f64 = rule.fine().weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!(rule.fine().points.iter().all(|p| s.contains(p)));
    }

    #[test]
    fn halving_budget_halves_levels() {
        let s = MeasureSpace::interval(0.0, 1.0).unwrap();
        let rule = QuadratureRule::with_levels(&s, &QuadratureSpec::default().with_budget(1024), 4).unwrap();
        let sizes: Vec<usize> = (0..4).map(|i| rule.level(i).points.len()).collect();
        // geometric levels plus the final panel adjacent to the endpoint
        assert_eq!(sizes, vec![1032, 520, 264, 136]);
    }

    #[test]
    fn log_spaced_power_law() {
        let s = MeasureSpace::interval(0.0, f64::INFINITY).unwrap();
        let quad = QuadratureSpec::default().with_truncation(1e-200, 1.0);
        let rule = QuadratureRule::new(&s, &quad).unwrap();
        // ∫_{1e-200}^{1} t^{-0.9} dt = 10 (1 - 1e-20)
        let v = rule.integrate(|p| Ok(p.scalar().unwrap().powf(-0.9))).unwrap();
        assert!((v.value - 10.0).abs() < 1e-9, "{v:?}");
    }

    #[test]
    fn breakpoints_split_budget() {
        let s = MeasureSpace::interval(0.0, 2.0).unwrap();
        let quad = QuadratureSpec::default().uniform().with_budget(64).with_breakpoints(vec![1.0, 1.0, 5.0]);
        let rule = QuadratureRule::new(&s, &quad).unwrap();
        assert_eq!(rule.fine().points.len(), 64);
        assert!(rule.sup_points().contains(&Point::Real(1.0)));
    }
}
