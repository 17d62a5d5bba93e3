//! Seeded random finite-discrete instances, for dominance sweeps.
//!
//! Two shapes are produced:
//!
//! * automorphism averages `x ↦ k·x mod n` on `Z_n` (normalized Haar or
//!   counting measure), and
//! * scalar dilations `A_k = b^{n_k} I` on `R^d` seen through radial
//!   shells, which turns them into weighted shifts on a finite index window.
//!
//! Kernels are random two-variable tables with entries of both signs.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::kernel::{Exponent, Exponents, Kernel, Regime};
use crate::maps::{is_unit, shell_lattice, MapFamily};
use crate::measure::{MeasureSpace, Point};
use crate::operator::OperatorInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceShape {
    Cyclic,
    Shells,
}

const FINITE_EXPONENTS: [(i64, i64); 7] = [(1, 1), (5, 4), (3, 2), (2, 1), (5, 2), (3, 1), (4, 1)];

/// Random admissible exponents in the given regime.
pub fn random_exponents(regime: Regime, rng: &mut ChaCha8Rng) -> Exponents {
    let pick = |rng: &mut ChaCha8Rng| {
        let (a, b) = FINITE_EXPONENTS[rng.gen_range(0..FINITE_EXPONENTS.len())];
        Exponent::ratio(a, b)
    };
    let (p, q) = match regime {
        Regime::Mixed => loop {
            let (p, q) = (pick(rng), pick(rng));
            if p < q {
                break (p, q);
            }
        },
        Regime::SourceSup => (pick(rng), Exponent::Infinite),
        Regime::Diagonal => {
            let p = pick(rng);
            (p, p)
        }
        Regime::BothInfinite => (Exponent::Infinite, Exponent::Infinite),
    };
    Exponents::new(p, q).expect("drawn from an admissible list")
}

/// A random two-variable kernel given as a table over `(u, x)` indices.
fn table_kernel(us: &[i64], xs: &[i64], rng: &mut ChaCha8Rng) -> Kernel {
    let mut table = BTreeMap::new();
    for &u in us {
        for &x in xs {
            let v: f64 = rng.gen_range(-1.0..1.0);
            table.insert((u, x), v);
        }
    }
    let table = Arc::new(table);
    Kernel::two_variable("random table", move |u: &Point, x: &Point| match (u.index(), x.index()) {
        (Some(u), Some(x)) => table.get(&(u, x)).copied().unwrap_or(0.0),
        _ => 0.0,
    })
}

/// A random instance of the given shape and regime, fully determined by `seed`.
pub fn random_discrete_instance(shape: InstanceShape, regime: Regime, seed: u64) -> Result<OperatorInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exponents = random_exponents(regime, &mut rng);
    match shape {
        InstanceShape::Cyclic => {
            let n: u64 = rng.gen_range(2..=12);
            let space = if rng.gen_bool(0.5) {
                MeasureSpace::finite_group(n)?
            } else {
                MeasureSpace::new(
                    crate::measure::Carrier::FiniteGroup { order: n },
                    crate::measure::MeasureKind::Counting,
                )?
            };
            let mut units: Vec<i64> = (1..n.max(2) as i64).filter(|&k| is_unit(k, n)).collect();
            units.shuffle(&mut rng);
            let count = rng.gen_range(1..=units.len().min(4));
            let mut mults: Vec<i64> = units[..count].to_vec();
            mults.sort_unstable();
            let omega = if rng.gen_bool(0.5) {
                MeasureSpace::counting(mults.clone())?
            } else {
                let w = mults.iter().map(|_| rng.gen_range(0.1..2.0)).collect();
                MeasureSpace::weighted_counting(mults.clone(), w)?
            };
            let family = MapFamily::cyclic(n, mults.clone(), space.clone(), space.clone())?;
            let xs: Vec<i64> = (0..n as i64).collect();
            let kernel = table_kernel(&mults, &xs, &mut rng);
            OperatorInstance::new(omega, space.clone(), space, family, kernel, exponents)
        }
        InstanceShape::Shells => {
            let base = if rng.gen_bool(0.5) { 2.0 } else { 3.0 };
            let dim = rng.gen_range(1..=3);
            let terms = rng.gen_range(1..=3);
            let ks: Vec<i64> = (0..terms as i64).collect();
            let shifts: Vec<(i64, i64)> = ks.iter().map(|&k| (k, rng.gen_range(-2..=2))).collect();
            let lattice = shell_lattice(base, dim, &shifts, -3..=3)?;
            let omega = MeasureSpace::counting(ks.clone())?;
            let xs: Vec<i64> = (-3..=3).collect();
            let kernel = table_kernel(&ks, &xs, &mut rng);
            OperatorInstance::new(omega, lattice.source, lattice.target, lattice.family, kernel, exponents)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_in_seed() {
        for shape in [InstanceShape::Cyclic, InstanceShape::Shells] {
            let a = random_discrete_instance(shape, Regime::Mixed, 9).unwrap();
            let b = random_discrete_instance(shape, Regime::Mixed, 9).unwrap();
            assert_eq!(a.exponents, b.exponents);
            assert_eq!(
                crate::operator::to_matrix(&a).unwrap(),
                crate::operator::to_matrix(&b).unwrap()
            );
        }
    }

    #[test]
    fn regimes_respected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for regime in Regime::ALL {
            for _ in 0..50 {
                assert_eq!(random_exponents(regime, &mut rng).regime(), regime);
            }
        }
    }
}
