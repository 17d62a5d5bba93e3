//! Map families `A(u): S → S′` and the agreement factor `m(u)`.
//!
//! A family agrees with `ν` and `ν′` when `ν(A(u)^{-1}E) ≤ m(u)^{-1} ν′(E)` for
//! every finite-measure `E ⊂ S′`. The built-in kinds return the exact
//! pushforward constant: `|u|^d` for scalar dilations of `R^d`, `|det A_k|`
//! for matrix dilations and `1` for automorphisms of a finite cyclic group.
//! [`verify_agreement`] checks the inequality (and its integrated form for
//! nonnegative simple functions) on random test sets.

use std::fmt;
use std::ops::RangeInclusive;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measure::{Carrier, MeasureKind, MeasureSpace, Point};
use crate::sum::pairwise_sum;

pub type ApplyFn = Arc<dyn Fn(&Point, &Point) -> Result<Point> + Send + Sync>;
pub type ModulusFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
/// `(u, E) ↦ ν(A(u)^{-1} E)`.
pub type PreimageFn = Arc<dyn Fn(&Point, &TestSet) -> Result<f64> + Send + Sync>;

#[derive(Clone)]
pub enum MapKind {
    /// `A(u)x = u·x`; an index parameter `k` dilates by `k`.
    ScalarDilation,
    /// `A(k)x = A_k x`, keyed by the index `k ∈ Ω`.
    MatrixDilation { matrices: Vec<(i64, DMatrix<f64>)> },
    /// `A(k)x = k·x mod n`.
    CyclicAutomorphism { order: u64, multipliers: Vec<i64> },
    Custom {
        description: String,
        apply: ApplyFn,
        modulus: ModulusFn,
        preimage_measure: Option<PreimageFn>,
    },
}

impl fmt::Debug for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapKind::ScalarDilation => write!(f, "ScalarDilation"),
            MapKind::MatrixDilation { matrices } => {
                write!(f, "MatrixDilation({} matrices)", matrices.len())
            }
            MapKind::CyclicAutomorphism { order, multipliers } => {
                write!(f, "CyclicAutomorphism(n={order}, k={multipliers:?})")
            }
            MapKind::Custom { description, .. } => write!(f, "Custom({description})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MapFamily {
    kind: MapKind,
    domain: MeasureSpace,
    codomain: MeasureSpace,
}

/// Finite-measure test set inside the codomain.
#[derive(Clone, Debug, PartialEq)]
pub enum TestSet {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Subset(Vec<i64>),
}

impl MapFamily {
    /// Dilations `x ↦ u·x` between Lebesgue spaces of equal dimension.
    pub fn scalar_dilation(domain: MeasureSpace, codomain: MeasureSpace) -> Result<Self> {
        require_lebesgue(&domain, &codomain)?;
        Ok(Self {
            kind: MapKind::ScalarDilation,
            domain,
            codomain,
        })
    }

    pub fn matrix_dilation(
        matrices: Vec<(i64, DMatrix<f64>)>,
        domain: MeasureSpace,
        codomain: MeasureSpace,
    ) -> Result<Self> {
        require_lebesgue(&domain, &codomain)?;
        let d = domain.dimension();
        for (k, a) in &matrices {
            if a.nrows() != d || a.ncols() != d {
                return Err(Error::InvalidArgument(format!(
                    "matrix {k} is {}x{}, spaces have dimension {d}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            if abs_det(a) == 0.0 {
                return Err(Error::SingularMatrix { index: *k });
            }
        }
        let mut keys: Vec<i64> = matrices.iter().map(|(k, _)| *k).collect();
        keys.sort_unstable();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate matrix index".into()));
        }
        Ok(Self {
            kind: MapKind::MatrixDilation { matrices },
            domain,
            codomain,
        })
    }

    /// `x ↦ k·x mod n` on `Z_n`; every multiplier must be a unit.
    pub fn cyclic(order: u64, multipliers: Vec<i64>, domain: MeasureSpace, codomain: MeasureSpace) -> Result<Self> {
        for space in [&domain, &codomain] {
            match space.carrier {
                Carrier::FiniteGroup { order: n } if n == order => {}
                _ => {
                    return Err(Error::InvalidSpace(format!(
                        "cyclic automorphisms of Z_{order} need Z_{order} carriers, got {}",
                        space.carrier
                    )))
                }
            }
        }
        if domain.kind != codomain.kind {
            return Err(Error::InvalidSpace("domain and codomain measures differ".into()));
        }
        for &k in &multipliers {
            if !is_unit(k, order) {
                return Err(Error::InvalidArgument(format!("{k} is not a unit mod {order}")));
            }
        }
        Ok(Self {
            kind: MapKind::CyclicAutomorphism { order, multipliers },
            domain,
            codomain,
        })
    }

    /// A user-defined family. `modulus` must return the agreement factor; the
    /// caller is responsible for measurability of `u ↦ A(u)` and for the
    /// agreement inequality itself.
    pub fn custom(
        description: impl Into<String>,
        apply: ApplyFn,
        modulus: ModulusFn,
        domain: MeasureSpace,
        codomain: MeasureSpace,
    ) -> Self {
        Self {
            kind: MapKind::Custom {
                description: description.into(),
                apply,
                modulus,
                preimage_measure: None,
            },
            domain,
            codomain,
        }
    }

    /// Attach a closed-form preimage measure to a custom family.
    pub fn with_preimage(mut self, preimage: PreimageFn) -> Self {
        if let MapKind::Custom { preimage_measure, .. } = &mut self.kind {
            *preimage_measure = Some(preimage);
        }
        self
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn domain(&self) -> &MeasureSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &MeasureSpace {
        &self.codomain
    }

    pub fn describe(&self) -> String {
        format!("{:?}", self.kind)
    }

    /// `A(u)(x)`.
    pub fn apply_map(&self, u: &Point, x: &Point) -> Result<Point> {
        if !self.domain.contains(x) {
            return Err(out_of(x, &self.domain));
        }
        let image = match &self.kind {
            MapKind::ScalarDilation => {
                let c = dilation_factor(u)?;
                match x {
                    Point::Real(t) => Point::Real(c * t),
                    Point::Vector(v) => Point::Vector(v.iter().map(|t| c * t).collect()),
                    Point::Index(_) => return Err(Error::InvalidArgument("dilation of an index point".into())),
                }
            }
            MapKind::MatrixDilation { matrices } => {
                let a = self.matrix_for(matrices, u)?;
                let y = a * DVector::from_vec(x.coords());
                match x {
                    Point::Real(_) => Point::Real(y[0]),
                    _ => Point::Vector(y.iter().copied().collect()),
                }
            }
            MapKind::CyclicAutomorphism { order, .. } => {
                let k = u
                    .index()
                    .ok_or_else(|| Error::InvalidArgument(format!("multiplier must be an index, got {u}")))?;
                if !is_unit(k, *order) {
                    return Err(Error::InvalidArgument(format!("{k} is not a unit mod {order}")));
                }
                let t = x.index().ok_or_else(|| out_of(x, &self.domain))?;
                Point::Index(mul_mod(k, t, *order))
            }
            MapKind::Custom { apply, .. } => apply(u, x)?,
        };
        if !self.codomain.contains(&image) {
            return Err(out_of(&image, &self.codomain));
        }
        Ok(image)
    }

    /// `m(u)`; always strictly positive on success.
    pub fn agreement_factor(&self, u: &Point) -> Result<f64> {
        let m = match &self.kind {
            MapKind::ScalarDilation => dilation_factor(u)?.abs().powi(self.domain.dimension() as i32),
            MapKind::MatrixDilation { matrices } => abs_det(self.matrix_for(matrices, u)?),
            MapKind::CyclicAutomorphism { .. } => 1.0,
            MapKind::Custom { modulus, .. } => modulus(u),
        };
        if m > 0.0 && m.is_finite() {
            Ok(m)
        } else {
            Err(Error::InvalidArgument(format!("agreement factor m({u}) = {m} is not positive")))
        }
    }

    fn matrix_for<'a>(&self, matrices: &'a [(i64, DMatrix<f64>)], u: &Point) -> Result<&'a DMatrix<f64>> {
        let k = u
            .index()
            .ok_or_else(|| Error::InvalidArgument(format!("matrix family parameter must be an index, got {u}")))?;
        matrices
            .iter()
            .find(|(j, _)| *j == k)
            .map(|(_, a)| a)
            .ok_or_else(|| Error::InvalidArgument(format!("no matrix for index {k}")))
    }

    /// For a matrix family whose members are all `±b^n I`, the shift `n` per
    /// index. Such families act on radial shells `b^j ≤ |x| < b^{j+1}` by
    /// `j ↦ j + n`.
    pub fn scalar_power_shifts(&self, base: f64) -> Result<Vec<(i64, i64)>> {
        let MapKind::MatrixDilation { matrices } = &self.kind else {
            return Err(Error::Unsupported("shell discretization needs a matrix dilation family".into()));
        };
        if !(base > 1.0 && base.is_finite()) {
            return Err(Error::InvalidArgument(format!("shell base {base} must exceed 1")));
        }
        matrices
            .iter()
            .map(|(k, a)| {
                let s = a[(0, 0)];
                let scalar = (0..a.nrows())
                    .all(|i| (0..a.ncols()).all(|j| if i == j { a[(i, j)] == s } else { a[(i, j)] == 0.0 }));
                let n = (s.abs().ln() / base.ln()).round();
                if !scalar || (base.powi(n as i32) - s.abs()).abs() > 1e-12 * s.abs() {
                    return Err(Error::Unsupported(format!("matrix {k} is not ±{base}^n·I")));
                }
                Ok((*k, n as i64))
            })
            .collect()
    }
}

fn require_lebesgue(domain: &MeasureSpace, codomain: &MeasureSpace) -> Result<()> {
    for s in [domain, codomain] {
        if s.kind != MeasureKind::Lebesgue || s.is_discrete() {
            return Err(Error::InvalidSpace(format!("dilations act on Lebesgue spaces, got {}", s.carrier)));
        }
    }
    if domain.dimension() != codomain.dimension() {
        return Err(Error::InvalidSpace("domain and codomain dimensions differ".into()));
    }
    Ok(())
}

fn dilation_factor(u: &Point) -> Result<f64> {
    u.scalar()
        .ok_or_else(|| Error::InvalidArgument(format!("dilation parameter must be scalar, got {u}")))
}

fn out_of(p: &Point, space: &MeasureSpace) -> Error {
    Error::OutOfCarrier {
        point: p.to_string(),
        carrier: space.carrier.to_string(),
    }
}

/// `|det A|` via LU; shared by every caller so equal inputs give equal bits.
pub fn abs_det(a: &DMatrix<f64>) -> f64 {
    a.clone().lu().determinant().abs()
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn is_unit(k: i64, n: u64) -> bool {
    let r = (k as i128).rem_euclid(n as i128) as u64;
    gcd(r, n) == 1 || n == 1
}

fn mul_mod(a: i64, b: i64, n: u64) -> i64 {
    ((a as i128 * b as i128).rem_euclid(n as i128)) as i64
}

/// One comparison of `ν(A(u)^{-1}E)` with `m(u)^{-1}ν′(E)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AgreementSample {
    pub preimage_measure: f64,
    pub bound: f64,
    /// Noise allowance: 3σ for Monte-Carlo estimates, 2 ulps for exact paths.
    pub allowance: f64,
    pub monte_carlo: bool,
}

impl AgreementSample {
    pub fn violation(&self) -> f64 {
        self.preimage_measure - self.bound
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgreementReport {
    /// Max over trials of `ν(A(u)^{-1}E) − m(u)^{-1}ν′(E)`.
    pub max_violation: f64,
    /// Max over trials of violation minus its allowance; `≤ 0` means every trial passed.
    pub max_excess: f64,
    /// Same quantities for `∫ g∘A(u) dν ≤ m(u)^{-1} ∫ g dν′` with simple `g ≥ 0`.
    pub integral_max_violation: f64,
    pub integral_max_excess: f64,
    pub samples: usize,
    pub monte_carlo: bool,
}

impl AgreementReport {
    pub fn holds(&self) -> bool {
        self.max_excess <= 0.0 && self.integral_max_excess <= 0.0
    }
}

const MC_SAMPLES: usize = 20_000;

/// Compare `ν(A(u)^{-1}E)` with `m(u)^{-1}ν′(E)` for one test set.
pub fn agreement_gap(family: &MapFamily, u: &Point, set: &TestSet, rng: &mut ChaCha8Rng) -> Result<AgreementSample> {
    let m = family.agreement_factor(u)?;
    let target_measure = set_measure(family.codomain(), set)?;
    let bound = target_measure / m;
    let (preimage_measure, sigma, monte_carlo) = preimage_measure(family, u, set, rng)?;
    let allowance = if monte_carlo {
        3.0 * sigma
    } else {
        2.0 * f64::EPSILON * preimage_measure.abs().max(bound.abs())
    };
    Ok(AgreementSample {
        preimage_measure,
        bound,
        allowance,
        monte_carlo,
    })
}

/// Randomized check of the agreement inequality at parameter `u`.
pub fn verify_agreement(family: &MapFamily, u: &Point, trials: usize, seed: u64) -> Result<AgreementReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if let MapKind::Custom { preimage_measure: None, .. } = family.kind() {
        return Err(Error::PreimageUnavailable);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AgreementReport {
        max_violation: f64::NEG_INFINITY,
        max_excess: f64::NEG_INFINITY,
        integral_max_violation: f64::NEG_INFINITY,
        integral_max_excess: f64::NEG_INFINITY,
        samples: 0,
        monte_carlo: false,
    };
    for _ in 0..trials {
        let set = random_set(family.codomain(), &mut rng);
        let s = agreement_gap(family, u, &set, &mut rng)?;
        report.max_violation = report.max_violation.max(s.violation());
        report.max_excess = report.max_excess.max(s.violation() - s.allowance);
        report.monte_carlo |= s.monte_carlo;
        report.samples += 1;

        // Simple function g = Σ c_j χ_{E_j} with c_j ∈ [0, 1).
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        let mut noise = Vec::new();
        let mut exact_slack = Vec::new();
        for _ in 0..3 {
            let c: f64 = rng.gen();
            let e = random_set(family.codomain(), &mut rng);
            let s = agreement_gap(family, u, &e, &mut rng)?;
            lhs.push(c * s.preimage_measure);
            rhs.push(c * s.bound);
            if s.monte_carlo {
                noise.push((c * s.allowance / 3.0).powi(2));
            } else {
                exact_slack.push(c * s.allowance);
            }
        }
        let l = pairwise_sum(&lhs);
        let r = pairwise_sum(&rhs);
        let allowance = 3.0 * pairwise_sum(&noise).sqrt() + pairwise_sum(&exact_slack) + 4.0 * f64::EPSILON * r.abs();
        report.integral_max_violation = report.integral_max_violation.max(l - r);
        report.integral_max_excess = report.integral_max_excess.max(l - r - allowance);
    }
    Ok(report)
}

/// `ν′(E)` for a test set inside `space`.
pub fn set_measure(space: &MeasureSpace, set: &TestSet) -> Result<f64> {
    match set {
        TestSet::Box { lo, hi } => {
            let (clo, chi) = box_bounds(space)?;
            Ok(clipped_volume(lo, hi, &clo, &chi))
        }
        TestSet::Subset(members) => {
            let (points, masses) = match (space.points(), space.point_masses()) {
                (Some(p), Some(m)) => (p, m),
                _ => return Err(Error::InvalidArgument("subset test set on a continuous space".into())),
            };
            let picked: Vec<f64> = points
                .iter()
                .zip(&masses)
                .filter(|(p, _)| p.index().is_some_and(|k| members.contains(&k)))
                .map(|(_, m)| *m)
                .collect();
            Ok(pairwise_sum(&picked))
        }
    }
}

fn box_bounds(space: &MeasureSpace) -> Result<(Vec<f64>, Vec<f64>)> {
    match &space.carrier {
        Carrier::Interval { lo, hi, .. } => Ok((vec![*lo], vec![*hi])),
        Carrier::Box { lo, hi } => Ok((lo.clone(), hi.clone())),
        c => Err(Error::InvalidArgument(format!("box test set on {c}"))),
    }
}

fn clipped_volume(lo: &[f64], hi: &[f64], clo: &[f64], chi: &[f64]) -> f64 {
    lo.iter()
        .zip(hi)
        .zip(clo.iter().zip(chi))
        .map(|((a, b), (c, d))| (b.min(*d) - a.max(*c)).max(0.0))
        .product()
}

/// Returns `(measure, sigma, monte_carlo)`.
fn preimage_measure(family: &MapFamily, u: &Point, set: &TestSet, rng: &mut ChaCha8Rng) -> Result<(f64, f64, bool)> {
    match (family.kind(), set) {
        (MapKind::Custom { preimage_measure, .. }, _) => {
            let f = preimage_measure.as_ref().ok_or(Error::PreimageUnavailable)?;
            Ok((f(u, set)?, 0.0, false))
        }
        (MapKind::ScalarDilation, TestSet::Box { lo, hi }) => {
            let c = dilation_factor(u)?;
            let d = lo.len();
            exact_diagonal_preimage(family, &vec![c; d], lo, hi)
        }
        (MapKind::MatrixDilation { matrices }, TestSet::Box { lo, hi }) => {
            let a = family.matrix_for(matrices, u)?;
            let d = a.nrows();
            let diagonal = (0..d).all(|i| (0..d).all(|j| i == j || a[(i, j)] == 0.0));
            if diagonal {
                let diag: Vec<f64> = (0..d).map(|i| a[(i, i)]).collect();
                exact_diagonal_preimage(family, &diag, lo, hi)
            } else {
                monte_carlo_preimage(family, a, lo, hi, rng)
            }
        }
        (MapKind::CyclicAutomorphism { .. }, TestSet::Subset(members)) => {
            let domain = family.domain();
            let points = domain.points().expect("cyclic domain is discrete");
            let masses = domain.point_masses().expect("cyclic domain is discrete");
            let mut picked = Vec::new();
            for (x, m) in points.iter().zip(&masses) {
                let y = family.apply_map(u, x)?;
                if y.index().is_some_and(|k| members.contains(&k)) {
                    picked.push(*m);
                }
            }
            Ok((pairwise_sum(&picked), 0.0, false))
        }
        (kind, set) => Err(Error::InvalidArgument(format!("test set {set:?} does not fit family {kind:?}"))),
    }
}

fn exact_diagonal_preimage(family: &MapFamily, diag: &[f64], lo: &[f64], hi: &[f64]) -> Result<(f64, f64, bool)> {
    let (dlo, dhi) = box_bounds(family.domain())?;
    let mut plo = Vec::with_capacity(diag.len());
    let mut phi = Vec::with_capacity(diag.len());
    for ((c, a), b) in diag.iter().zip(lo).zip(hi) {
        let (x0, x1) = (a / c, b / c);
        plo.push(x0.min(x1));
        phi.push(x0.max(x1));
    }
    let inside = (0..diag.len()).all(|i| dlo[i] <= plo[i] && phi[i] <= dhi[i]);
    if !inside {
        return Ok((clipped_volume(&plo, &phi, &dlo, &dhi), 0.0, false));
    }
    // Unclipped: widths (b − a) scaled once, which avoids cancellation in b/c − a/c.
    let widths: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
    let scale: f64 = diag.iter().map(|c| c.abs()).product();
    Ok((widths / scale, 0.0, false))
}

fn monte_carlo_preimage(
    family: &MapFamily,
    a: &DMatrix<f64>,
    lo: &[f64],
    hi: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64, bool)> {
    let d = lo.len();
    let inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("matrix not invertible".into()))?;
    // Bounding box of A^{-1}E from the images of the 2^d corners of E.
    let mut blo = vec![f64::INFINITY; d];
    let mut bhi = vec![f64::NEG_INFINITY; d];
    for mask in 0..(1usize << d) {
        let corner = DVector::from_iterator(d, (0..d).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }));
        let y = &inv * corner;
        for i in 0..d {
            blo[i] = blo[i].min(y[i]);
            bhi[i] = bhi[i].max(y[i]);
        }
    }
    let (dlo, dhi) = box_bounds(family.domain())?;
    for i in 0..d {
        blo[i] = blo[i].max(dlo[i]);
        bhi[i] = bhi[i].min(dhi[i]);
        if blo[i] >= bhi[i] {
            return Ok((0.0, 0.0, true));
        }
    }
    let volume: f64 = blo.iter().zip(&bhi).map(|(a, b)| b - a).product();
    // Halton points under a random shift modulo 1; the binomial σ below is
    // conservative for them.
    let shift: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
    let mut hits = 0usize;
    for n in 0..MC_SAMPLES {
        let x = DVector::from_iterator(
            d,
            (0..d).map(|i| {
                let t = (radical_inverse(n as u64 + 1, HALTON_BASES[i % HALTON_BASES.len()]) + shift[i]).fract();
                blo[i] + t * (bhi[i] - blo[i])
            }),
        );
        let y = a * x;
        if (0..d).all(|i| lo[i] <= y[i] && y[i] <= hi[i]) {
            hits += 1;
        }
    }
    let n = MC_SAMPLES as f64;
    let frac = hits as f64 / n;
    // Agresti–Coull style adjustment keeps σ > 0 at frac ∈ {0, 1}.
    let adj = (hits as f64 + 1.0) / (n + 2.0);
    let sigma = volume * (adj * (1.0 - adj) / n).sqrt();
    Ok((volume * frac, sigma, true))
}

const HALTON_BASES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while n > 0 {
        out += (n % base) as f64 * inv;
        n /= base;
        inv /= base as f64;
    }
    out
}

/// Random axis-aligned box (continuous) or random subset (discrete) of `space`.
pub fn random_set(space: &MeasureSpace, rng: &mut ChaCha8Rng) -> TestSet {
    if let Some(points) = space.points() {
        let members = points
            .iter()
            .filter_map(|p| p.index())
            .filter(|_| rng.gen_bool(0.5))
            .collect();
        return TestSet::Subset(members);
    }
    let (lo, hi) = box_bounds(space).expect("continuous carrier");
    let mut a = Vec::with_capacity(lo.len());
    let mut b = Vec::with_capacity(lo.len());
    for (l, h) in lo.iter().zip(&hi) {
        let (wl, wh) = sampling_window(*l, *h);
        let s: f64 = rng.gen_range(wl..wh);
        let t: f64 = rng.gen_range(wl..wh);
        a.push(s.min(t));
        b.push(s.max(t));
    }
    TestSet::Box { lo: a, hi: b }
}

fn sampling_window(lo: f64, hi: f64) -> (f64, f64) {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (lo, hi),
        (true, false) => (lo, lo + 16.0),
        (false, true) => (hi - 16.0, hi),
        (false, false) => (-8.0, 8.0),
    }
}

/// Radial-shell lattice for dilations by powers of `base` on `R^dim`.
///
/// Shell `j` is `{base^j ≤ |x| < base^{j+1}}` with mass
/// `V_dim (base^dim − 1) base^{dim·j}`. A shift `n` maps shell `j` to
/// `j + n` and has agreement factor `base^{dim·n}`, matching `|det(base^n I)|`.
/// The source window is the target window widened by the largest shift so
/// every image stays inside it.
#[derive(Clone, Debug)]
pub struct ShellLattice {
    pub target: MeasureSpace,
    pub source: MeasureSpace,
    pub family: MapFamily,
}

pub fn shell_lattice(base: f64, dim: usize, shifts: &[(i64, i64)], window: RangeInclusive<i64>) -> Result<ShellLattice> {
    if !(base > 1.0 && base.is_finite()) || dim == 0 {
        return Err(Error::InvalidArgument("shell lattice needs base > 1 and dim >= 1".into()));
    }
    if window.is_empty() {
        return Err(Error::InvalidArgument("empty shell window".into()));
    }
    let reach = shifts.iter().map(|(_, n)| n.abs()).max().unwrap_or(0);
    let unit = ball_volume(dim) * (base.powi(dim as i32) - 1.0);
    let mass = move |j: i64| unit * base.powf((dim as i64 * j) as f64);
    let target_ix: Vec<i64> = window.clone().collect();
    let source_ix: Vec<i64> = (window.start() - reach..=window.end() + reach).collect();
    let target = MeasureSpace::weighted_counting(target_ix.clone(), target_ix.iter().map(|&j| mass(j)).collect())?;
    let source = MeasureSpace::weighted_counting(source_ix.clone(), source_ix.iter().map(|&j| mass(j)).collect())?;

    let table: Arc<Vec<(i64, i64)>> = Arc::new(shifts.to_vec());
    let shift_of = {
        let table = table.clone();
        move |u: &Point| -> Result<i64> {
            let k = u.index().ok_or_else(|| Error::InvalidArgument(format!("shell parameter {u}")))?;
            table
                .iter()
                .find(|(j, _)| *j == k)
                .map(|(_, n)| *n)
                .ok_or_else(|| Error::InvalidArgument(format!("no shift for index {k}")))
        }
    };
    let apply: ApplyFn = {
        let shift_of = shift_of.clone();
        Arc::new(move |u, x| {
            let j = x.index().ok_or_else(|| Error::InvalidArgument(format!("shell point {x}")))?;
            Ok(Point::Index(j + shift_of(u)?))
        })
    };
    let modulus: ModulusFn = {
        let shift_of = shift_of.clone();
        Arc::new(move |u| match shift_of(u) {
            Ok(n) => base.powf((dim as i64 * n) as f64),
            Err(_) => f64::NAN,
        })
    };
    let preimage: PreimageFn = {
        let target_ix = target_ix.clone();
        Arc::new(move |u, set| {
            let TestSet::Subset(members) = set else {
                return Err(Error::InvalidArgument("shell lattice test sets are subsets".into()));
            };
            let n = shift_of(u)?;
            let picked: Vec<f64> = target_ix
                .iter()
                .filter(|&&j| members.contains(&(j + n)))
                .map(|&j| mass(j))
                .collect();
            Ok(pairwise_sum(&picked))
        })
    };
    let family = MapFamily::custom(
        format!("radial shells base {base} in R^{dim}"),
        apply,
        modulus,
        target.clone(),
        source.clone(),
    )
    .with_preimage(preimage);
    Ok(ShellLattice { target, source, family })
}

/// Volume of the unit ball in `R^d`.
pub fn ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}
