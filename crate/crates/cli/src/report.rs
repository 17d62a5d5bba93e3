use std::fmt;
use std::io::Write;
use std::time::Duration;

use hausdorff::bounds::{BoundResult, BoundValue};
use hausdorff::estimator::{DivergenceReport, LowerBound};
use hausdorff::OperatorInstance;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    DominanceOk,
    DominanceViolated,
    BoundDivergent,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::DominanceOk => "DOMINANCE_OK",
            Verdict::DominanceViolated => "DOMINANCE_VIOLATED",
            Verdict::BoundDivergent => "BOUND_DIVERGENT",
        })
    }
}

impl Verdict {
    /// Process exit code: only a violated dominance is a failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            Verdict::DominanceViolated => 2,
            Verdict::DominanceOk | Verdict::BoundDivergent => 0,
        }
    }
}

/// Absolute floor of the dominance tolerance.
pub const ABS_TOL: f64 = 1e-9;

/// `1e-9 + bound error + rel_tol·(|bound| + |empirical|)`.
pub fn dominance_tolerance(bound: f64, bound_error: f64, empirical: f64, rel_tol: f64) -> f64 {
    ABS_TOL + bound_error + rel_tol * (bound.abs() + empirical.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceEcho {
    #[serde(skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub omega: String,
    pub source: String,
    pub target: String,
    pub family: String,
    pub kernel: String,
    pub p: String,
    pub q: String,
    pub regime: String,
}

impl InstanceEcho {
    pub fn new(description: &str, op: &OperatorInstance) -> Self {
        Self {
            description: description.to_string(),
            omega: op.omega.carrier.to_string(),
            source: op.source.carrier.to_string(),
            target: op.target.carrier.to_string(),
            family: op.family.describe(),
            kernel: op.kernel.description().to_string(),
            p: op.exponents.p().to_string(),
            q: op.exponents.q().to_string(),
            regime: op.exponents.regime().tag().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSection {
    /// `"finite"` or `"divergent"`.
    pub status: String,
    pub value: f64,
    pub error_estimate: f64,
    pub formula: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub partial_values: Vec<f64>,
}

impl From<&BoundResult> for BoundSection {
    fn from(b: &BoundResult) -> Self {
        match &b.value {
            BoundValue::Finite(i) => Self {
                status: "finite".into(),
                value: i.value,
                error_estimate: i.error_estimate,
                formula: b.formula.clone(),
                partial_values: Vec::new(),
            },
            BoundValue::Divergent { partial_values } => Self {
                status: "divergent".into(),
                value: f64::INFINITY,
                error_estimate: f64::INFINITY,
                formula: b.formula.clone(),
                partial_values: partial_values.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalSection {
    pub value: f64,
    pub label: String,
    pub exact: bool,
    pub witness: Vec<f64>,
}

impl From<&LowerBound> for EmpiricalSection {
    fn from(lb: &LowerBound) -> Self {
        Self {
            value: lb.value,
            label: lb.label.clone(),
            exact: lb.exact,
            witness: lb.witness.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictSection {
    pub verdict: Verdict,
    /// `bound − empirical`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub node_budget: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceSection {
    pub function: String,
    pub x: f64,
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    pub monotone_growth: bool,
}

impl DivergenceSection {
    pub fn new(function: &str, x: f64, r: &DivergenceReport) -> Self {
        Self {
            function: function.to_string(),
            x,
            eps: r.eps.clone(),
            values: r.values.clone(),
            monotone_growth: r.monotone_growth,
        }
    }
}

/// Outcome of `bound`, `verify` and `scenario`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub instance: InstanceEcho,
    pub bound: BoundSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical: Option<EmpiricalSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictSection>,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divergence: Option<DivergenceSection>,
}

impl NormReport {
    pub fn verdict(&self) -> Option<Verdict> {
        self.verdict.as_ref().map(|v| v.verdict)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub value: f64,
    pub error_estimate: f64,
}

/// Outcome of `apply`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApplyReport {
    pub instance: InstanceEcho,
    pub function: String,
    pub samples: Vec<Sample>,
}

/// TOML body followed by a `[timing]` table, which is the only part that
/// differs between identical runs.
pub fn render<T: Serialize>(report: &T, wall_time: Duration) -> String {
    let mut out = toml::to_string(report).expect("reports always serialize");
    out.push_str(&format!("\n[timing]\nwall_time_s = {:.6}\n", wall_time.as_secs_f64()));
    out
}

/// Strip the `[timing]` table.
pub fn without_timing(rendered: &str) -> &str {
    rendered.split("\n[timing]").next().unwrap_or(rendered)
}

pub fn write_samples_csv(mut w: impl Write, samples: &[Sample]) -> std::io::Result<()> {
    let dim = samples.first().map_or(1, |s| s.x.len());
    let header: Vec<String> = if dim == 1 {
        vec!["x".into()]
    } else {
        (1..=dim).map(|i| format!("x{i}")).collect()
    };
    writeln!(w, "{},value,error_estimate", header.join(","))?;
    for s in samples {
        let xs: Vec<String> = s.x.iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{},{:e},{:e}", xs.join(","), s.value, s.error_estimate)?;
    }
    Ok(())
}

pub fn write_divergence_csv(mut w: impl Write, d: &DivergenceSection) -> std::io::Result<()> {
    writeln!(w, "eps,value")?;
    for (e, v) in d.eps.iter().zip(&d.values) {
        writeln!(w, "{e:e},{v:e}")?;
    }
    Ok(())
}
