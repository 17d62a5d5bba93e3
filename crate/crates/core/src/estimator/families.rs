//! Parametric test functions and the ratio search over them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::matrix::{empirical_norm_discrete, AscentOptions};
use super::LowerBound;
use crate::error::{Error, Result};
use crate::maps::MapKind;
use crate::measure::{Carrier, MeasureSpace, QuadratureRule, QuadratureSpec};
use crate::operator::{apply, Function, OperatorInstance, Support};

#[derive(Clone, Debug, PartialEq)]
pub enum TestFamily {
    /// `t^{-α}` on `support`, zero elsewhere; `α` ranges over `alpha`.
    /// A zero lower support end is raised to the quadrature's `eps_low`.
    TruncatedPower { alpha: (f64, f64), support: (f64, f64) },
    /// Piecewise constant between consecutive `breakpoints`, each level in `levels`.
    StepFunction { breakpoints: Vec<f64>, levels: (f64, f64) },
    /// `exp(-((t - c)/w)^2)` with `c` in `center` and `w` in `width`.
    GaussianBump { center: (f64, f64), width: (f64, f64) },
    /// Arbitrary vectors on a finite discrete space; searched by matrix ascent.
    GridVector,
}

impl TestFamily {
    pub fn name(&self) -> &'static str {
        match self {
            TestFamily::TruncatedPower { .. } => "TruncatedPower",
            TestFamily::StepFunction { .. } => "StepFunction",
            TestFamily::GaussianBump { .. } => "GaussianBump",
            TestFamily::GridVector => "GridVector",
        }
    }

    /// Box constraints on the parameter vector.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        match self {
            TestFamily::TruncatedPower { alpha, .. } => vec![*alpha],
            TestFamily::StepFunction { breakpoints, levels } => vec![*levels; breakpoints.len().saturating_sub(1)],
            TestFamily::GaussianBump { center, width } => vec![*center, *width],
            TestFamily::GridVector => Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("{}: {msg}", self.name())));
        if self.bounds().iter().any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
            return bad("parameter bounds need finite lo <= hi");
        }
        match self {
            TestFamily::TruncatedPower { support: (a, b), .. } if !(*a >= 0.0 && a < b) => {
                bad("support needs 0 <= lo < hi")
            }
            TestFamily::StepFunction { breakpoints, .. }
                if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| !(w[0] < w[1])) =>
            {
                bad("breakpoints must be strictly increasing, at least two")
            }
            TestFamily::GaussianBump { width: (w, _), .. } if *w <= 0.0 => bad("width must be positive"),
            _ => Ok(()),
        }
    }

    /// The member with parameters `params`.
    pub fn member(&self, params: &[f64], quad: &QuadratureSpec) -> Function {
        match self {
            TestFamily::TruncatedPower { support: (a, b), .. } => {
                let alpha = params[0];
                let lo = self.power_floor(*a, quad);
                Function::new(format!("t^-{alpha} on [{lo}, {b}]"), move |t| {
                    t.scalar().map_or(0.0, |t| t.powf(-alpha))
                })
                .with_support(Support::Interval(lo, *b))
            }
            TestFamily::StepFunction { breakpoints, .. } => {
                let edges = breakpoints.clone();
                let levels = params.to_vec();
                let (lo, hi) = (edges[0], edges[edges.len() - 1]);
                Function::new(format!("steps {levels:?}"), move |t| {
                    let Some(t) = t.scalar() else { return 0.0 };
                    let i = edges.partition_point(|e| *e <= t).saturating_sub(1);
                    levels[i.min(levels.len() - 1)]
                })
                .with_support(Support::Interval(lo, hi))
            }
            TestFamily::GaussianBump { .. } => {
                let (c, w) = (params[0], params[1]);
                Function::new(format!("exp(-((t-{c})/{w})^2)"), move |t| {
                    t.scalar().map_or(0.0, |t| (-((t - c) / w).powi(2)).exp())
                })
            }
            TestFamily::GridVector => Function::constant(0.0),
        }
    }

    fn power_floor(&self, a: f64, quad: &QuadratureSpec) -> f64 {
        match quad.truncation {
            Some(t) => a.max(t.eps_low),
            None => a,
        }
    }

    /// Points where members may kink or jump.
    fn kinks(&self, quad: &QuadratureSpec) -> Vec<f64> {
        match self {
            TestFamily::TruncatedPower { support: (a, b), .. } => vec![self.power_floor(*a, quad), *b],
            TestFamily::StepFunction { breakpoints, .. } => breakpoints.clone(),
            _ => Vec::new(),
        }
    }
}

/// Kinks of `Hf` for a 1-D dilation: `k/a` and `k/b` for each kink `k` of `f`
/// and each finite nonzero endpoint of `Ω = (a, b)`.
fn image_kinks(op: &OperatorInstance, kinks: &[f64]) -> Vec<f64> {
    let mut out = kinks.to_vec();
    if let (MapKind::ScalarDilation, Carrier::Interval { lo, hi, .. }) = (op.family.kind(), &op.omega.carrier) {
        for k in kinks {
            for e in [lo, hi] {
                if e.is_finite() && *e != 0.0 {
                    out.push(k / e);
                }
            }
        }
    }
    out.retain(|x| x.is_finite());
    out
}

struct Evaluator<'a> {
    op: &'a OperatorInstance,
    quad: &'a QuadratureSpec,
    target: QuadratureRule,
    source: QuadratureRule,
}

impl<'a> Evaluator<'a> {
    fn new(op: &'a OperatorInstance, family: &TestFamily, quad: &'a QuadratureSpec) -> Result<Self> {
        let kinks = image_kinks(op, &family.kinks(quad));
        let mut outer = quad.clone();
        outer.breakpoints.extend(kinks);
        Ok(Self {
            op,
            quad,
            target: QuadratureRule::new(&op.target, &outer)?,
            source: QuadratureRule::new(&op.source, &outer)?,
        })
    }

    /// `‖Hf‖_p / ‖f‖_q`.
    fn ratio(&self, f: &Function) -> Result<f64> {
        let den = self.source.lp_norm(|x| Ok(f.evaluate(x)), self.op.exponents.q().value())?.value;
        if !(den > 0.0 && den.is_finite()) {
            return Err(Error::InvalidArgument(format!("{} has L^q norm {den}", f.description())));
        }
        let num = self
            .target
            .lp_norm(|x| Ok(apply(self.op, f, x, self.quad)?.value), self.op.exponents.p().value())?
            .value;
        Ok(num / den)
    }
}

/// Maximize `‖Hf‖_p / ‖f‖_q` over each family: a seeded Halton sweep, then
/// coordinate ascent from the best sweep point. `budget` caps the ratio
/// evaluations per family. Candidates whose quadrature fails are skipped.
pub fn empirical_norm_continuous(
    op: &OperatorInstance,
    families: &[TestFamily],
    budget: usize,
    seed: u64,
    quad: &QuadratureSpec,
) -> Result<LowerBound> {
    if families.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut best: Option<LowerBound> = None;
    let mut first_error = None;
    for family in families {
        family.validate()?;
        let found = if *family == TestFamily::GridVector {
            empirical_norm_discrete(op, &AscentOptions::default().with_seed(seed)).map(|mut lb| {
                lb.label = format!("GridVector ({})", lb.label);
                lb
            })
        } else {
            search_family(op, family, budget, seed, quad)
        };
        match found {
            Ok(lb) => {
                if best.as_ref().is_none_or(|b| lb.value > b.value) {
                    best = Some(lb);
                }
            }
            Err(e) => {
                log::warn!("test family {} failed: {e}", family.name());
                first_error.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_error.expect("some family ran"))
}

fn search_family(
    op: &OperatorInstance,
    family: &TestFamily,
    budget: usize,
    seed: u64,
    quad: &QuadratureSpec,
) -> Result<LowerBound> {
    let evaluator = Evaluator::new(op, family, quad)?;
    let first_error = std::sync::Mutex::new(None);
    let eval = |params: &[f64]| -> Option<f64> {
        let r = evaluator.ratio(&family.member(params, quad)).and_then(|v| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFiniteSample {
                    at: format!("{params:?}"),
                    value: v,
                })
            }
        });
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                log::debug!("{} at {params:?}: {e}", family.name());
                first_error.lock().expect("poisoned").get_or_insert(e);
                None
            }
        }
    };
    let bounds = family.bounds();
    let budget = budget.max(1);
    let sweep = halton_sweep(&bounds, (budget / 2).max(1), seed);
    let values: Vec<Option<f64>> = sweep.par_iter().map(|p| eval(p)).collect();
    let mut used = sweep.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for (p, v) in sweep.iter().zip(&values) {
        if let Some(v) = v {
            if best.as_ref().is_none_or(|(b, _)| *v > *b) {
                best = Some((*v, p.clone()));
            }
        }
    }
    let Some((mut value, mut x)) = best else {
        return Err(first_error.into_inner().expect("poisoned").expect("every candidate failed"));
    };

    let mut steps: Vec<f64> = bounds.iter().map(|(a, b)| (b - a) / 4.0).collect();
    'ascent: while used < budget {
        let mut improved = false;
        for i in 0..bounds.len() {
            for sign in [1.0, -1.0] {
                if used >= budget {
                    break 'ascent;
                }
                let mut cand = x.clone();
                cand[i] = (x[i] + sign * steps[i]).clamp(bounds[i].0, bounds[i].1);
                if cand[i] == x[i] {
                    continue;
                }
                used += 1;
                if let Some(v) = eval(&cand) {
                    if v > value {
                        value = v;
                        x = cand;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            let mut alive = false;
            for (s, (a, b)) in steps.iter_mut().zip(&bounds) {
                *s *= 0.5;
                alive |= *s > 1e-9 * (b - a);
            }
            if !alive {
                break;
            }
        }
    }
    Ok(LowerBound::approximate(value, x, family.name()))
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base as u64) as f64 * inv;
        i /= base as u64;
        inv /= b;
    }
    out
}

/// `n` points of a Halton sequence in the parameter box, rotated by a seeded
/// random shift.
fn halton_sweep(bounds: &[(f64, f64)], n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = bounds.iter().map(|_| rng.gen::<f64>()).collect();
    (1..=n as u64)
        .map(|i| {
            bounds
                .iter()
                .enumerate()
                .map(|(d, (a, b))| {
                    let h = (radical_inverse(i, PRIMES[d % PRIMES.len()]) + shift[d]).fract();
                    a + (b - a) * h
                })
                .collect()
        })
        .collect()
}

/// `‖f‖` of every family member at its parameter-box corners must be finite.
pub fn check_family(family: &TestFamily, source: &MeasureSpace, q: f64, quad: &QuadratureSpec) -> Result<()> {
    family.validate()?;
    if *family == TestFamily::GridVector {
        return if source.is_discrete() {
            Ok(())
        } else {
            Err(Error::NotFiniteDiscrete("GridVector needs a discrete source space".into()))
        };
    }
    let bounds = family.bounds();
    let rule = QuadratureRule::new(source, quad)?;
    for corner in [bounds.iter().map(|b| b.0).collect::<Vec<_>>(), bounds.iter().map(|b| b.1).collect()] {
        let f = family.member(&corner, quad);
        let n = rule.lp_norm(|x| Ok(f.evaluate(x)), q)?.value;
        if !n.is_finite() {
            return Err(Error::InvalidArgument(format!("{} has infinite L^q norm", f.description())));
        }
    }
    Ok(())
}
