//! Scenario files.
//!
//! ```toml
//! schema_version = 1
//! description = "Cesàro operator"
//!
//! [omega]
//! kind = "interval"
//! lo = 0.0
//! hi = 1.0
//!
//! [source]
//! kind = "interval"
//! lo = 0.0
//! hi = inf
//!
//! [target]
//! kind = "interval"
//! lo = 0.0
//! hi = inf
//!
//! [family]
//! kind = "scalar-dilation"
//!
//! [kernel]
//! expr = "1"
//!
//! [exponents]
//! p = 2
//! q = "inf"
//! ```
//!
//! Space kinds: `interval`, `box`, `counting`, `weighted`, `group`, `range`.
//! Family kinds: `scalar-dilation`, `matrix-dilation`, `power-dilation`,
//! `cyclic`. A kernel is exactly one of `expr`, `builtin`, `phi` (values per
//! point of `Ω`) or `table` (rows per point of `Ω`, columns per point of `S`).
//! Exponents are integers, decimals, `"a/b"` strings, or `inf`/`"inf"`.

use std::fmt;
use std::ops::RangeInclusive;

use hausdorff::estimator::TestFamily;
use hausdorff::maps::MapFamily;
use hausdorff::measure::{Carrier, Grading, MeasureKind, Truncation};
use hausdorff::{Exponent, Exponents, Kernel, MeasureSpace, OperatorInstance, Point, QuadratureSpec};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Bindings, Expr, Var};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub struct ConfigError {
    /// Dotted path of the offending field, empty for syntax errors.
    pub field: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CONFIG_INVALID")?;
        if let Some(line) = self.line {
            write!(f, " line {line}")?;
        }
        if !self.field.is_empty() {
            write!(f, " field {}", self.field)?;
        }
        write!(f, ": {}", self.message)
    }
}

impl ConfigError {
    fn at(field: &str, message: impl fmt::Display) -> Self {
        Self {
            field: field.to_string(),
            line: None,
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub omega: SpaceSpec,
    pub source: SpaceSpec,
    pub target: SpaceSpec,
    pub family: FamilySpec,
    pub kernel: KernelSpec,
    pub exponents: ExponentsSpec,
    #[serde(default, skip_serializing_if = "QuadratureOverrides::is_empty")]
    pub quadrature: QuadratureOverrides,
    #[serde(default, skip_serializing_if = "EstimatorSpec::is_empty")]
    pub estimator: EstimatorSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupMeasure {
    #[default]
    Haar,
    Counting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceSpec {
    Interval {
        lo: f64,
        hi: f64,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        closed: bool,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Counting {
        indices: Vec<i64>,
    },
    Weighted {
        indices: Vec<i64>,
        weights: Vec<f64>,
    },
    Group {
        order: u64,
        #[serde(default)]
        measure: GroupMeasure,
    },
    /// Counting measure on `lo..=hi`.
    Range {
        lo: i64,
        hi: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub index: i64,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    ScalarDilation,
    MatrixDilation { matrices: Vec<MatrixSpec> },
    /// `A_k = base^k I` for each listed `k`.
    PowerDilation { base: f64, indices: Vec<i64> },
    Cyclic { multipliers: Vec<i64> },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<Expr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<f64>>>,
    /// Declares `Φ ≥ 0`; spot-checked on a probe grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonnegative: Option<bool>,
}

/// Named kernels that skip the expression grammar.
pub const BUILTIN_KERNELS: [(&str, &str); 3] = [
    ("one", "Φ ≡ 1"),
    ("dyadic-decay", "Φ(k) = 2^-|k|"),
    ("product", "Φ(u, x) = u·x"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExponentValue {
    Int(i64),
    Float(f64),
    Text(String),
}

impl ExponentValue {
    fn resolve(&self, field: &str) -> Result<Exponent, ConfigError> {
        match self {
            ExponentValue::Int(n) => Ok(Exponent::int(*n)),
            ExponentValue::Float(v) if *v == f64::INFINITY => Ok(Exponent::Infinite),
            ExponentValue::Float(v) => Exponent::from_f64(*v).map_err(|e| ConfigError::at(field, e)),
            ExponentValue::Text(s) => s.parse().map_err(|e| ConfigError::at(field, e)),
        }
    }
}

impl From<Exponent> for ExponentValue {
    fn from(e: Exponent) -> Self {
        match e {
            Exponent::Infinite => ExponentValue::Text("inf".into()),
            Exponent::Finite(r) if r.is_integer() => ExponentValue::Int(*r.numer()),
            Exponent::Finite(r) => ExponentValue::Text(format!("{}/{}", r.numer(), r.denom())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsSpec {
    pub p: ExponentValue,
    pub q: ExponentValue,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis_budget: Option<usize>,
    /// `"uniform"` or `"geometric"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grading: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    /// `[eps_low, cap_high]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<f64>>,
}

impl QuadratureOverrides {
    fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TestFamilySpec {
    /// `t^-α` on `support`; either an `alpha` range or a list of `eps` with
    /// `α = 1/q − ε`.
    TruncatedPower {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<Vec<f64>>,
        support: [f64; 2],
    },
    Step {
        breakpoints: Vec<f64>,
        levels: [f64; 2],
    },
    Gaussian {
        center: [f64; 2],
        width: [f64; 2],
    },
    Grid,
    /// Radial shell functions for power dilations of `R^d`.
    Shells {
        base: f64,
        window: [i64; 2],
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    /// Ratio evaluations per continuous family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub families: Vec<TestFamilySpec>,
}

impl EstimatorSpec {
    fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

/// Truncated evaluation of `(Hf)(x)` as the lower end of `Ω` shrinks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub function: Expr,
    pub x: f64,
    pub eps: Vec<f64>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub rel_tol: Option<f64>,
    /// Sets both `p` and `q`.
    pub p: Option<Exponent>,
}

#[derive(Debug, Clone)]
pub enum EstimatorStep {
    Families { families: Vec<TestFamily>, budget: usize },
    Shells { base: f64, window: RangeInclusive<i64> },
}

#[derive(Debug, Clone)]
pub struct Probe {
    pub function: Expr,
    pub x: Point,
    pub eps: Vec<f64>,
}

/// A validated configuration, ready to run.
#[derive(Debug, Clone)]
pub struct Instance {
    pub description: String,
    pub op: OperatorInstance,
    pub quad: QuadratureSpec,
    pub estimator: Vec<EstimatorStep>,
    pub seed: u64,
    pub probe: Option<Probe>,
}

pub const DEFAULT_BUDGET: usize = 16;

/// 1-based line of `key` inside `[section]` (or of the section header when
/// `key` is empty).
fn locate(source: &str, field: &str) -> Option<usize> {
    let mut parts = field.split('.');
    let section = parts.next()?;
    let key = parts.next().unwrap_or("");
    let mut current = String::new();
    for (i, line) in source.lines().enumerate() {
        let t = line.trim();
        if let Some(h) = t.strip_prefix("[[").and_then(|h| h.strip_suffix("]]")) {
            current = h.trim().to_string();
            if current.starts_with(section) && key.is_empty() {
                return Some(i + 1);
            }
            continue;
        }
        if let Some(h) = t.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
            current = h.trim().to_string();
            if current == section && key.is_empty() {
                return Some(i + 1);
            }
            continue;
        }
        let here = current == section || current.starts_with(&format!("{section}."));
        if here && !key.is_empty() && t.split('=').next().is_some_and(|k| k.trim() == key) {
            return Some(i + 1);
        }
        if current.is_empty() && section == t.split('=').next().unwrap_or("").trim() {
            return Some(i + 1);
        }
    }
    None
}

/// Parse and validate a scenario file.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        ConfigError {
            field: String::new(),
            line,
            message: e.message().trim().to_string(),
        }
    })?;
    cfg.build(&Overrides::default()).map_err(|mut e| {
        e.line = e.line.or_else(|| locate(text, &e.field));
        e
    })?;
    Ok(cfg)
}

impl ScenarioConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configs always serialize")
    }

    pub fn build(&self, over: &Overrides) -> Result<Instance, ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::at(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, found {}", self.schema_version),
            ));
        }
        let omega = self.omega.build("omega")?;
        let source = self.source.build("source")?;
        let target = self.target.build("target")?;
        let family = self.family.build(&target, &source, &omega)?;
        let kernel = self.kernel.build(&omega, &target)?;
        let (p, q) = match over.p {
            Some(p) => (p, p),
            None => (self.exponents.p.resolve("exponents.p")?, self.exponents.q.resolve("exponents.q")?),
        };
        let exponents = Exponents::new(p, q).map_err(|e| ConfigError::at("exponents", e))?;
        let op = OperatorInstance::new(omega, source, target, family, kernel, exponents)
            .map_err(|e| ConfigError::at("family", e))?;
        let quad = self.quadrature.build(over.rel_tol)?;
        let estimator = self.estimator.build(&op)?;
        let probe = match &self.probe {
            None => None,
            Some(pr) => {
                if pr.eps.is_empty() || pr.eps.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(ConfigError::at("probe.eps", "needs a strictly decreasing, nonempty list"));
                }
                let x = Point::Real(pr.x);
                if !op.target.contains(&x) {
                    return Err(ConfigError::at("probe.x", format!("{} is outside {}", pr.x, op.target.carrier)));
                }
                Some(Probe {
                    function: pr.function.clone(),
                    x,
                    eps: pr.eps.clone(),
                })
            }
        };
        Ok(Instance {
            description: self.description.clone().unwrap_or_default(),
            op,
            quad,
            estimator,
            seed: over.seed.or(self.estimator.seed).unwrap_or(0),
            probe,
        })
    }
}

impl SpaceSpec {
    fn build(&self, field: &str) -> Result<MeasureSpace, ConfigError> {
        let err = |e: hausdorff::Error| ConfigError::at(field, e);
        match self {
            SpaceSpec::Interval { lo, hi, closed } => {
                if *closed {
                    MeasureSpace::closed_interval(*lo, *hi).map_err(err)
                } else {
                    MeasureSpace::interval(*lo, *hi).map_err(err)
                }
            }
            SpaceSpec::Box { lo, hi } => MeasureSpace::box_lebesgue(lo.clone(), hi.clone()).map_err(err),
            SpaceSpec::Counting { indices } => MeasureSpace::counting(indices.clone()).map_err(err),
            SpaceSpec::Weighted { indices, weights } => {
                MeasureSpace::weighted_counting(indices.clone(), weights.clone()).map_err(err)
            }
            SpaceSpec::Group { order, measure } => {
                let kind = match measure {
                    GroupMeasure::Haar => MeasureKind::NormalizedHaarFinite,
                    GroupMeasure::Counting => MeasureKind::Counting,
                };
                MeasureSpace::new(Carrier::FiniteGroup { order: *order }, kind).map_err(err)
            }
            SpaceSpec::Range { lo, hi } => {
                if lo > hi {
                    return Err(ConfigError::at(field, format!("empty range {lo}..={hi}")));
                }
                MeasureSpace::counting((*lo..=*hi).collect()).map_err(err)
            }
        }
    }
}

impl FamilySpec {
    fn build(&self, target: &MeasureSpace, source: &MeasureSpace, omega: &MeasureSpace) -> Result<MapFamily, ConfigError> {
        let err = |e: hausdorff::Error| ConfigError::at("family", e);
        let check_indices = |keys: &[i64]| -> Result<(), ConfigError> {
            if let Some(points) = omega.points() {
                for p in points {
                    let k = p.index().unwrap_or_default();
                    if !keys.contains(&k) {
                        return Err(ConfigError::at("family", format!("no matrix for Ω index {k}")));
                    }
                }
            }
            Ok(())
        };
        match self {
            FamilySpec::ScalarDilation => MapFamily::scalar_dilation(target.clone(), source.clone()).map_err(err),
            FamilySpec::MatrixDilation { matrices } => {
                let d = target.dimension();
                let mut mats = Vec::with_capacity(matrices.len());
                for m in matrices {
                    if m.rows.len() != d || m.rows.iter().any(|r| r.len() != d) {
                        return Err(ConfigError::at(
                            "family.matrices",
                            format!("matrix {} must be {d}x{d}", m.index),
                        ));
                    }
                    mats.push((m.index, DMatrix::from_fn(d, d, |i, j| m.rows[i][j])));
                }
                check_indices(&mats.iter().map(|(k, _)| *k).collect::<Vec<_>>())?;
                MapFamily::matrix_dilation(mats, target.clone(), source.clone()).map_err(err)
            }
            FamilySpec::PowerDilation { base, indices } => {
                if !(base.is_finite() && *base > 0.0 && *base != 1.0) {
                    return Err(ConfigError::at("family.base", "needs a positive base other than 1"));
                }
                let d = target.dimension();
                let mats = indices
                    .iter()
                    .map(|&k| (k, DMatrix::from_diagonal_element(d, d, base.powi(k as i32))))
                    .collect::<Vec<_>>();
                check_indices(indices)?;
                MapFamily::matrix_dilation(mats, target.clone(), source.clone()).map_err(err)
            }
            FamilySpec::Cyclic { multipliers } => {
                let Carrier::FiniteGroup { order } = target.carrier else {
                    return Err(ConfigError::at("family", "cyclic families need group spaces"));
                };
                MapFamily::cyclic(order, multipliers.clone(), target.clone(), source.clone()).map_err(err)
            }
        }
    }
}

fn index_position(space: &MeasureSpace, p: &Point) -> Option<usize> {
    space.position(p)
}

impl KernelSpec {
    fn build(&self, omega: &MeasureSpace, target: &MeasureSpace) -> Result<Kernel, ConfigError> {
        let given = [self.expr.is_some(), self.builtin.is_some(), self.phi.is_some(), self.table.is_some()]
            .iter()
            .filter(|b| **b)
            .count();
        if given != 1 {
            return Err(ConfigError::at("kernel", "give exactly one of expr, builtin, phi, table"));
        }
        let kernel = if let Some(e) = &self.expr {
            expr_kernel(e.clone())
        } else if let Some(name) = &self.builtin {
            match name.as_str() {
                "one" => Kernel::constant(1.0),
                "dyadic-decay" => Kernel::one_variable("2^-|k|", |u: &Point| 2f64.powf(-u.scalar().unwrap_or(f64::NAN).abs()))
                    .with_nonnegative(true),
                "product" => Kernel::two_variable("u*x", |u: &Point, x: &Point| {
                    u.scalar().unwrap_or(f64::NAN) * x.scalar().unwrap_or(f64::NAN)
                }),
                other => {
                    let names: Vec<&str> = BUILTIN_KERNELS.iter().map(|(n, _)| *n).collect();
                    return Err(ConfigError::at(
                        "kernel.builtin",
                        format!("unknown kernel {other:?}; known: {}", names.join(", ")),
                    ));
                }
            }
        } else if let Some(phi) = &self.phi {
            let n = omega
                .points()
                .ok_or_else(|| ConfigError::at("kernel.phi", "phi lists need a discrete Ω"))?
                .len();
            if phi.len() != n {
                return Err(ConfigError::at("kernel.phi", format!("{} values for {n} points of Ω", phi.len())));
            }
            let (omega, phi) = (omega.clone(), phi.clone());
            let desc = format!("phi {phi:?}");
            Kernel::one_variable(desc, move |u: &Point| index_position(&omega, u).map_or(0.0, |i| phi[i]))
        } else {
            let table = self.table.clone().unwrap_or_default();
            let (Some(rows), Some(cols)) = (omega.points(), target.points()) else {
                return Err(ConfigError::at("kernel.table", "tables need discrete Ω and S"));
            };
            if table.len() != rows.len() || table.iter().any(|r| r.len() != cols.len()) {
                return Err(ConfigError::at(
                    "kernel.table",
                    format!("expected {} rows of {} values", rows.len(), cols.len()),
                ));
            }
            let (omega, target) = (omega.clone(), target.clone());
            Kernel::two_variable("table", move |u: &Point, x: &Point| {
                match (index_position(&omega, u), index_position(&target, x)) {
                    (Some(i), Some(j)) => table[i][j],
                    _ => 0.0,
                }
            })
        };
        match self.nonnegative {
            Some(flag) => kernel
                .with_nonnegative(flag)
                .validated(omega, target)
                .map_err(|e| ConfigError::at("kernel.nonnegative", e)),
            None => Ok(kernel),
        }
    }
}

fn expr_kernel(e: Expr) -> Kernel {
    let x_vars: Vec<Var> = [Var::X, Var::T]
        .into_iter()
        .chain((1..=9).flat_map(|i| [Var::XCoord(i), Var::TCoord(i)]))
        .collect();
    let desc = e.source().to_string();
    if e.uses(&x_vars) {
        Kernel::two_variable(desc, move |u: &Point, x: &Point| e.eval(&Bindings { u: Some(u), x: Some(x) }))
    } else {
        Kernel::one_variable(desc, move |u: &Point| e.eval(&Bindings { u: Some(u), x: None }))
    }
}

impl QuadratureOverrides {
    fn build(&self, rel_tol: Option<f64>) -> Result<QuadratureSpec, ConfigError> {
        let mut q = QuadratureSpec::default();
        if let Some(n) = self.node_budget {
            q.node_budget = n;
        }
        if let Some(n) = self.axis_budget {
            q.axis_budget = n;
        }
        match (self.grading.as_deref(), self.ratio) {
            (None, None) => {}
            (Some("uniform"), None) => q.grading = Grading::Uniform,
            (Some("geometric") | None, r) => q.grading = Grading::Geometric { ratio: r.unwrap_or(0.5) },
            (Some("uniform"), Some(_)) => {
                return Err(ConfigError::at("quadrature.ratio", "a ratio only applies to geometric grading"))
            }
            (Some(other), _) => {
                return Err(ConfigError::at(
                    "quadrature.grading",
                    format!("unknown grading {other:?}; use \"uniform\" or \"geometric\""),
                ))
            }
        }
        if let Some([eps_low, cap_high]) = self.truncation {
            q.truncation = Some(Truncation { eps_low, cap_high });
        }
        if let Some(t) = rel_tol.or(self.rel_tol) {
            q.target_rel_tol = t;
        }
        if let Some(b) = &self.breakpoints {
            q.breakpoints = b.clone();
        }
        q.validate().map_err(|e| ConfigError::at("quadrature", e))?;
        Ok(q)
    }
}

impl EstimatorSpec {
    fn build(&self, op: &OperatorInstance) -> Result<Vec<EstimatorStep>, ConfigError> {
        let budget = self.budget.unwrap_or(DEFAULT_BUDGET);
        if budget == 0 {
            return Err(ConfigError::at("estimator.budget", "must be at least 1"));
        }
        let mut steps = Vec::new();
        for (i, f) in self.families.iter().enumerate() {
            let field = format!("estimator.families[{i}]");
            match f {
                TestFamilySpec::TruncatedPower { alpha, eps, support } => match (alpha, eps) {
                    (Some([a, b]), None) => steps.push(EstimatorStep::Families {
                        families: vec![TestFamily::TruncatedPower {
                            alpha: (*a, *b),
                            support: (support[0], support[1]),
                        }],
                        budget,
                    }),
                    (None, Some(eps)) => {
                        let q = op.exponents.q();
                        if q.is_infinite() {
                            return Err(ConfigError::at(&field, "an eps sweep needs a finite q"));
                        }
                        // α = 1/q − ε: the power sits just inside L^q near 0.
                        let families = eps
                            .iter()
                            .map(|e| {
                                let a = 1.0 / q.value() - e;
                                TestFamily::TruncatedPower {
                                    alpha: (a, a),
                                    support: (support[0], support[1]),
                                }
                            })
                            .collect();
                        steps.push(EstimatorStep::Families { families, budget: 1 });
                    }
                    _ => return Err(ConfigError::at(&field, "give exactly one of alpha, eps")),
                },
                TestFamilySpec::Step { breakpoints, levels } => steps.push(EstimatorStep::Families {
                    families: vec![TestFamily::StepFunction {
                        breakpoints: breakpoints.clone(),
                        levels: (levels[0], levels[1]),
                    }],
                    budget,
                }),
                TestFamilySpec::Gaussian { center, width } => steps.push(EstimatorStep::Families {
                    families: vec![TestFamily::GaussianBump {
                        center: (center[0], center[1]),
                        width: (width[0], width[1]),
                    }],
                    budget,
                }),
                TestFamilySpec::Grid => {
                    if !op.is_finite_discrete() {
                        return Err(ConfigError::at(&field, "grid vectors need discrete Ω, S and S′"));
                    }
                    steps.push(EstimatorStep::Families {
                        families: vec![TestFamily::GridVector],
                        budget,
                    });
                }
                TestFamilySpec::Shells { base, window } => {
                    if window[0] > window[1] {
                        return Err(ConfigError::at(&field, "window needs lo <= hi"));
                    }
                    steps.push(EstimatorStep::Shells {
                        base: *base,
                        window: window[0]..=window[1],
                    });
                }
            }
        }
        Ok(steps)
    }
}
