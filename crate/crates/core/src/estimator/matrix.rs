//! Matrix norms `‖B‖_{ℓ^q → ℓ^p}`: closed forms where they exist, power
//! iteration for the spectral norm, projected gradient ascent otherwise.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::LowerBound;
use crate::error::{Error, Result};
use crate::kernel::Exponent;
use crate::operator::{to_matrix, OperatorInstance};

#[derive(Clone, Debug, PartialEq)]
pub struct AscentOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Stop once an accepted step improves the value by less than this fraction.
    pub rel_improvement: f64,
    pub seed: u64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iterations: 5000,
            rel_improvement: 1e-9,
            seed: 0,
        }
    }
}

impl AscentOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITERATIONS: usize = 200_000;
/// Largest column count for exhaustive sign-vector enumeration when `q = ∞`.
const SIGN_ENUMERATION_MAX: usize = 16;

fn lp(v: &[f64], p: f64) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if p.is_infinite() || scale == 0.0 {
        return scale;
    }
    if p == 1.0 {
        return v.iter().map(|x| x.abs()).sum();
    }
    scale * v.iter().map(|x| (x.abs() / scale).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// A (sub)gradient of `‖v‖_p`.
fn lp_grad(v: &[f64], p: f64) -> Vec<f64> {
    let n = lp(v, p);
    if n == 0.0 {
        return vec![0.0; v.len()];
    }
    if p.is_infinite() {
        let i = argmax_abs(v);
        let mut g = vec![0.0; v.len()];
        g[i] = v[i].signum();
        return g;
    }
    if p == 1.0 {
        return v.iter().map(|x| if *x == 0.0 { 0.0 } else { x.signum() }).collect();
    }
    v.iter().map(|x| x.signum() * (x.abs() / n).powf(p - 1.0)).collect()
}

fn argmax_abs(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    best
}

fn mul(b: &DMatrix<f64>, f: &[f64]) -> Vec<f64> {
    (0..b.nrows()).map(|i| (0..b.ncols()).map(|j| b[(i, j)] * f[j]).sum()).collect()
}

fn mul_t(b: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
    (0..b.ncols()).map(|j| (0..b.nrows()).map(|i| b[(i, j)] * y[i]).sum()).collect()
}

fn dual(q: f64) -> f64 {
    if q == 1.0 {
        f64::INFINITY
    } else if q.is_infinite() {
        1.0
    } else {
        q / (q - 1.0)
    }
}

/// `‖B‖_{1→1}`: largest absolute column sum.
pub fn norm_1(b: &DMatrix<f64>) -> LowerBound {
    norm_from_l1(b, 1.0)
}

/// `‖B‖_{∞→∞}`: largest absolute row sum.
pub fn norm_inf(b: &DMatrix<f64>) -> LowerBound {
    norm_to_linf(b, f64::INFINITY)
}

/// `‖B‖_{1→p} = max_j ‖B e_j‖_p`.
fn norm_from_l1(b: &DMatrix<f64>, p: f64) -> LowerBound {
    let mut best = LowerBound::exact(0.0, vec![0.0; b.ncols()], "column max");
    for j in 0..b.ncols() {
        let col: Vec<f64> = b.column(j).iter().copied().collect();
        let v = lp(&col, p);
        if v > best.value {
            best.value = v;
            best.witness = (0..b.ncols()).map(|k| if k == j { 1.0 } else { 0.0 }).collect();
        }
    }
    best
}

/// `‖B‖_{q→∞} = max_i ‖row_i‖_{q′}`.
fn norm_to_linf(b: &DMatrix<f64>, q: f64) -> LowerBound {
    let qd = dual(q);
    let mut best = LowerBound::exact(0.0, vec![0.0; b.ncols()], "row max");
    for i in 0..b.nrows() {
        let row: Vec<f64> = b.row(i).iter().copied().collect();
        let v = lp(&row, qd);
        if v > best.value {
            best.value = v;
            best.witness = dual_witness(&row, q);
        }
    }
    best
}

/// The `f` with `‖f‖_q = 1` attaining `⟨row, f⟩ = ‖row‖_{q′}`.
fn dual_witness(row: &[f64], q: f64) -> Vec<f64> {
    if q.is_infinite() {
        return row.iter().map(|x| if *x < 0.0 { -1.0 } else { 1.0 }).collect();
    }
    if q == 1.0 {
        let i = argmax_abs(row);
        return (0..row.len()).map(|k| if k == i { row[i].signum() } else { 0.0 }).collect();
    }
    let qd = dual(q);
    let raw: Vec<f64> = row.iter().map(|x| x.signum() * x.abs().powf(qd - 1.0)).collect();
    let n = lp(&raw, q);
    if n == 0.0 {
        raw
    } else {
        raw.iter().map(|x| x / n).collect()
    }
}

/// Largest singular value by power iteration on `BᵀB` with a seeded start.
pub fn spectral_norm(b: &DMatrix<f64>, seed: u64) -> Result<LowerBound> {
    let n = b.ncols();
    if n == 0 || b.iter().all(|x| *x == 0.0) {
        return Ok(LowerBound::exact(0.0, vec![0.0; n], "power iteration"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nv = lp(&v, 2.0);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut previous = f64::NAN;
    let mut previous_change = f64::NAN;
    for _ in 0..POWER_MAX_ITERATIONS {
        let bv = mul(b, &v);
        let lambda = bv.iter().map(|x| x * x).sum::<f64>();
        let w = mul_t(b, &bv);
        let nw = lp(&w, 2.0);
        if nw == 0.0 {
            return Ok(LowerBound::exact(0.0, v, "power iteration"));
        }
        // The Rayleigh quotients increase geometrically toward the top
        // eigenvalue, so the remaining gap is about change·ρ/(1 − ρ). A bare
        // step-size test stops far too early when the top eigenvalues cluster.
        let change = (lambda - previous).abs();
        // NaN until two quotients differ, which keeps the tail infinite.
        let rho = change / previous_change;
        let tail = if rho < 1.0 { change * rho / (1.0 - rho) } else { f64::INFINITY };
        if change <= 4.0 * f64::EPSILON * lambda || tail <= POWER_TOL * lambda {
            return Ok(LowerBound::exact(lambda.sqrt(), v, "power iteration"));
        }
        previous = lambda;
        previous_change = change;
        v = w.iter().map(|x| x / nw).collect();
    }
    Err(Error::NoConvergence {
        iterations: POWER_MAX_ITERATIONS,
    })
}

/// `‖B‖_{p→p}`: closed forms at `p ∈ {1, 2, ∞}`, ascent otherwise.
pub fn empirical_norm_matrix(b: &DMatrix<f64>, p: Exponent, opts: &AscentOptions) -> Result<LowerBound> {
    empirical_norm_between(b, p, p, opts)
}

/// `‖B‖_{ℓ^q → ℓ^p}`. Exact for `q = 1`, `p = ∞`, `p = q = 2` and (for at most
/// 16 columns) `q = ∞`; an ascent lower bound otherwise.
pub fn empirical_norm_between(b: &DMatrix<f64>, q: Exponent, p: Exponent, opts: &AscentOptions) -> Result<LowerBound> {
    let (qv, pv) = (q.value(), p.value());
    if !(qv >= 1.0 && pv >= 1.0) {
        return Err(Error::InvalidExponents(format!("matrix norm needs p, q >= 1, got q={q} p={p}")));
    }
    if qv == 1.0 {
        return Ok(norm_from_l1(b, pv));
    }
    if pv.is_infinite() {
        return Ok(norm_to_linf(b, qv));
    }
    if qv == 2.0 && pv == 2.0 {
        return spectral_norm(b, opts.seed);
    }
    if qv.is_infinite() && b.ncols() <= SIGN_ENUMERATION_MAX {
        return Ok(sign_enumeration(b, pv));
    }
    Ok(ascent_norm(b, qv, pv, opts))
}

/// `‖B‖_{∞→p}` as the max over sign vectors (extreme points of the ℓ^∞ ball).
fn sign_enumeration(b: &DMatrix<f64>, p: f64) -> LowerBound {
    let n = b.ncols();
    let mut best = LowerBound::exact(0.0, vec![1.0; n], "sign enumeration");
    for mask in 0u32..(1u32 << n) {
        let f: Vec<f64> = (0..n).map(|j| if mask >> j & 1 == 1 { -1.0 } else { 1.0 }).collect();
        let v = lp(&mul(b, &f), p);
        if v > best.value {
            best.value = v;
            best.witness = f;
        }
    }
    best
}

/// Projected gradient ascent on `‖Bf‖_p / ‖f‖_q` from structured starts
/// (every `e_j` and every row's dual vector) plus `opts.restarts` seeded
/// random starts. Always a valid lower bound; ties go to the lowest start.
pub fn ascent_norm(b: &DMatrix<f64>, q: f64, p: f64, opts: &AscentOptions) -> LowerBound {
    let n = b.ncols();
    if n == 0 {
        return LowerBound::approximate(0.0, Vec::new(), "ascent");
    }
    let mut starts: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|k| if k == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for i in 0..b.nrows() {
        let row: Vec<f64> = b.row(i).iter().copied().collect();
        if row.iter().any(|x| *x != 0.0) {
            starts.push(dual_witness(&row, q));
        }
    }
    for r in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64));
        starts.push((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
    }
    let results: Vec<(f64, Vec<f64>)> = starts.par_iter().map(|s| ascend(b, s, q, p, opts)).collect();
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.0 > results[best].0 {
            best = i;
        }
    }
    let (value, witness) = results.into_iter().nth(best).expect("at least one start");
    LowerBound::approximate(value, witness, "ascent")
}

fn ascend(b: &DMatrix<f64>, start: &[f64], q: f64, p: f64, opts: &AscentOptions) -> (f64, Vec<f64>) {
    let n0 = lp(start, q);
    if n0 == 0.0 {
        return (0.0, start.to_vec());
    }
    let mut f: Vec<f64> = start.iter().map(|x| x / n0).collect();
    let mut val = lp(&mul(b, &f), p);
    for _ in 0..opts.max_iterations {
        if val == 0.0 {
            break;
        }
        let y = mul(b, &f);
        let gn = mul_t(b, &lp_grad(&y, p));
        let gd = lp_grad(&f, q);
        let g: Vec<f64> = gn.iter().zip(&gd).map(|(a, d)| (a - val * d) / val).collect();
        if g.iter().all(|x| *x == 0.0) {
            break;
        }
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-12 {
            let cand: Vec<f64> = f.iter().zip(&g).map(|(x, d)| x + t * d).collect();
            let nc = lp(&cand, q);
            if nc > 0.0 {
                let cand: Vec<f64> = cand.iter().map(|x| x / nc).collect();
                let cv = lp(&mul(b, &cand), p);
                if cv > val {
                    accepted = Some((cv, cand));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((cv, cand)) = accepted else { break };
        let gain = (cv - val) / val;
        f = cand;
        val = cv;
        if gain < opts.rel_improvement {
            break;
        }
    }
    (val, f)
}

/// `D_S^{1/p} M D_{S′}^{-1/q}`: turns `‖H‖_{L^q(ν′)→L^p(ν)}` into an
/// unweighted `ℓ^q → ℓ^p` matrix norm.
pub fn weighted_matrix(op: &OperatorInstance, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (Some(ds), Some(dsp)) = (op.target.point_masses(), op.source.point_masses()) else {
        return Err(Error::NotFiniteDiscrete("weighted matrix needs discrete S and S′".into()));
    };
    let p = op.exponents.p();
    let q = op.exponents.q();
    let row_scale: Vec<f64> = ds
        .iter()
        .map(|w| if p.is_infinite() { 1.0 } else { w.powf(1.0 / p.value()) })
        .collect();
    let col_scale: Vec<f64> = dsp
        .iter()
        .map(|w| if q.is_infinite() { 1.0 } else { w.powf(-1.0 / q.value()) })
        .collect();
    Ok(DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| row_scale[i] * m[(i, j)] * col_scale[j]))
}

/// Lower bound on `‖H‖_{L^q(ν′) → L^p(ν)}` for a finite discrete instance.
/// The witness is the function `f` on `S′` (not the rescaled vector).
pub fn empirical_norm_discrete(op: &OperatorInstance, opts: &AscentOptions) -> Result<LowerBound> {
    let m = to_matrix(op)?;
    let b = weighted_matrix(op, &m)?;
    let mut lb = empirical_norm_between(&b, op.exponents.q(), op.exponents.p(), opts)?;
    let dsp = op.source.point_masses().expect("checked by weighted_matrix");
    let q = op.exponents.q();
    if !q.is_infinite() {
        for (f, w) in lb.witness.iter_mut().zip(&dsp) {
            *f *= w.powf(-1.0 / q.value());
        }
    }
    Ok(lb)
}
