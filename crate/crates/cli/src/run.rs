use std::path::Path;

use hausdorff::bounds::theoretical_bound;
use hausdorff::estimator::{divergence_probe, empirical_norm_continuous, shell_estimate, AscentOptions, LowerBound};
use hausdorff::operator::apply_grid;
use hausdorff::{Error, Function, Point};

use crate::config::{parse_config, EstimatorStep, Instance, Overrides, ScenarioConfig};
use crate::error::CliError;
use crate::expr::{Bindings, Expr};
use crate::report::{
    dominance_tolerance, ApplyReport, BoundSection, DivergenceSection, EmpiricalSection, InstanceEcho, NormReport,
    Sample, Tolerances, Verdict, VerdictSection, ABS_TOL,
};

pub fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_config(&text)?)
}

pub fn load_instance(path: &Path, over: &Overrides) -> Result<Instance, CliError> {
    Ok(load_config(path)?.build(over)?)
}

fn tolerances(inst: &Instance) -> Tolerances {
    Tolerances {
        rel_tol: inst.quad.target_rel_tol,
        abs_tol: ABS_TOL,
        node_budget: inst.quad.node_budget,
        seed: inst.seed,
    }
}

/// A function of `t` (or `x`, `x1`, ...) on the source space.
pub fn expr_function(e: &Expr) -> Function {
    let e = e.clone();
    Function::new(e.source().to_string(), move |x: &Point| e.eval(&Bindings { u: None, x: Some(x) }))
}

/// The theoretical bound alone.
pub fn bound_report(inst: &Instance) -> Result<NormReport, CliError> {
    let bound = theoretical_bound(&inst.op, &inst.quad)?;
    let section = BoundSection::from(&bound);
    let verdict = bound.finite().is_none().then_some(VerdictSection {
        verdict: Verdict::BoundDivergent,
        slack: None,
        tolerance: None,
    });
    Ok(NormReport {
        instance: InstanceEcho::new(&inst.description, &inst.op),
        bound: section,
        empirical: None,
        verdict,
        tolerances: tolerances(inst),
        divergence: None,
    })
}

/// Best lower bound over the configured estimator steps. Finite discrete
/// instances with no steps get an exact or ascent matrix norm.
pub fn empirical(inst: &Instance) -> Result<LowerBound, CliError> {
    let opts = AscentOptions::default().with_seed(inst.seed);
    let default_steps;
    let steps = if inst.estimator.is_empty() {
        if !inst.op.is_finite_discrete() {
            return Err(CliError::Usage("estimator.families: no test families configured".into()));
        }
        default_steps = vec![EstimatorStep::Families {
            families: vec![hausdorff::estimator::TestFamily::GridVector],
            budget: 1,
        }];
        &default_steps
    } else {
        &inst.estimator
    };
    let mut best: Option<LowerBound> = None;
    let mut first_error: Option<Error> = None;
    for step in steps {
        let found = match step {
            EstimatorStep::Families { families, budget } => {
                empirical_norm_continuous(&inst.op, families, *budget, inst.seed, &inst.quad)
            }
            EstimatorStep::Shells { base, window } => shell_estimate(&inst.op, *base, window.clone(), &opts),
        };
        match found {
            Ok(lb) => {
                log::info!("estimator {}: {}", lb.label, lb.value);
                if best.as_ref().is_none_or(|b| lb.value > b.value) {
                    best = Some(lb);
                }
            }
            Err(e) => {
                log::warn!("estimator step failed: {e}");
                first_error.get_or_insert(e);
            }
        }
    }
    match (best, first_error) {
        (Some(lb), _) => Ok(lb),
        (None, Some(e)) => Err(e.into()),
        (None, None) => Err(Error::EmptyFamily.into()),
    }
}

/// Bound, empirical lower bound and the dominance verdict. Divergent bounds
/// skip the estimator.
pub fn verify_report(inst: &Instance) -> Result<NormReport, CliError> {
    let mut report = bound_report(inst)?;
    if report.verdict() == Some(Verdict::BoundDivergent) {
        return Ok(report);
    }
    let lb = empirical(inst)?;
    let tol = dominance_tolerance(report.bound.value, report.bound.error_estimate, lb.value, inst.quad.target_rel_tol);
    let slack = report.bound.value - lb.value;
    let verdict = if slack >= -tol {
        Verdict::DominanceOk
    } else {
        Verdict::DominanceViolated
    };
    report.empirical = Some(EmpiricalSection::from(&lb));
    report.verdict = Some(VerdictSection {
        verdict,
        slack: Some(slack),
        tolerance: Some(tol),
    });
    Ok(report)
}

/// Truncated evaluations from the `[probe]` table, if any.
pub fn probe_section(inst: &Instance) -> Result<Option<DivergenceSection>, CliError> {
    let Some(probe) = &inst.probe else {
        return Ok(None);
    };
    let f = expr_function(&probe.function);
    let r = divergence_probe(&inst.op, &f, &probe.x, &probe.eps, &inst.quad)?;
    let x = probe.x.scalar().unwrap_or(f64::NAN);
    Ok(Some(DivergenceSection::new(probe.function.source(), x, &r)))
}

/// `verify`, or bound plus probe when the instance carries a probe.
pub fn scenario_report(inst: &Instance) -> Result<NormReport, CliError> {
    if inst.probe.is_some() {
        let mut report = bound_report(inst)?;
        report.divergence = probe_section(inst)?;
        Ok(report)
    } else {
        verify_report(inst)
    }
}

/// Evaluation points for `apply`: `lin:a:b:n`, `log:a:b:n`, `a:b:n`, a comma
/// list, or `all` for every point of a discrete space.
pub fn parse_grid(spec: &str, inst: &Instance) -> Result<Vec<Point>, CliError> {
    let bad = |why: &str| CliError::Usage(format!("--grid {spec:?}: {why}"));
    let target = &inst.op.target;
    if spec.trim() == "all" {
        return target.points().ok_or_else(|| bad("\"all\" needs a discrete target space"));
    }
    let discrete = target.is_discrete();
    if !discrete && target.dimension() != 1 {
        return Err(bad("grids are only supported on 1-D or discrete spaces"));
    }
    let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("{s:?} is not a number")));
    let values: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let (kind, rest) = match parts.as_slice() {
            ["lin", rest @ ..] => ("lin", rest),
            ["log", rest @ ..] => ("log", rest),
            rest => ("lin", rest),
        };
        let [a, b, n] = rest else {
            return Err(bad("expected kind:a:b:n"));
        };
        let (a, b) = (number(a)?, number(b)?);
        let n: usize = n.trim().parse().map_err(|_| bad("n must be a positive integer"))?;
        if n == 0 {
            return Err(bad("n must be a positive integer"));
        }
        if kind == "log" && !(a > 0.0 && b > 0.0) {
            return Err(bad("log grids need positive endpoints"));
        }
        (0..n)
            .map(|i| {
                let s = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                if kind == "log" {
                    (a.ln() + s * (b.ln() - a.ln())).exp()
                } else {
                    a + s * (b - a)
                }
            })
            .collect()
    } else {
        spec.split(',').map(number).collect::<Result<_, _>>()?
    };
    let points: Vec<Point> = values
        .into_iter()
        .map(|v| {
            if discrete {
                if v.fract() != 0.0 {
                    return Err(bad(&format!("{v} is not an integer index")));
                }
                Ok(Point::Index(v as i64))
            } else {
                Ok(Point::Real(v))
            }
        })
        .collect::<Result<_, _>>()?;
    if let Some(p) = points.iter().find(|p| !target.contains(p)) {
        return Err(bad(&format!("{p} is outside {}", target.carrier)));
    }
    Ok(points)
}

pub fn apply_report(inst: &Instance, f: &Expr, grid: &[Point]) -> Result<ApplyReport, CliError> {
    let function = expr_function(f);
    let values = apply_grid(&inst.op, &function, grid, &inst.quad)?;
    let samples = grid
        .iter()
        .zip(values)
        .map(|(x, v)| Sample {
            x: x.coords(),
            value: v.value,
            error_estimate: v.error_estimate,
        })
        .collect();
    Ok(ApplyReport {
        instance: InstanceEcho::new(&inst.description, &inst.op),
        function: f.source().to_string(),
        samples,
    })
}
