//! Seeded random instances for experiments and property suites.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exact_linalg::{IntMatrix, RationalVector};
use crate::lp_core::{validate_instance, Instance};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstanceShape {
    pub max_rows: usize,
    pub max_cols: usize,
    pub max_entry: i64,
    /// Keep only instances whose optimal bases are all unique-optimal.
    pub unique_lp: bool,
}

impl Default for InstanceShape {
    fn default() -> Self {
        InstanceShape {
            max_rows: 2,
            max_cols: 5,
            max_entry: 3,
            unique_lp: false,
        }
    }
}

const ATTEMPTS: usize = 10_000;

/// One valid instance drawn from `rng`, or `None` after too many rejections.
pub fn random_instance(rng: &mut impl Rng, shape: &InstanceShape) -> Option<Instance> {
    let e = shape.max_entry;
    for _ in 0..ATTEMPTS {
        let m = rng.gen_range(1..=shape.max_rows);
        let n = rng.gen_range(m + 1..=shape.max_cols.max(m + 1));
        let rows: Vec<Vec<i64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.gen_range(-e..=e)).collect())
            .collect();
        if (0..n).any(|j| rows.iter().all(|r| r[j] == 0)) {
            continue;
        }
        let a = IntMatrix::from_rows(&rows).ok()?;
        let c = RationalVector(
            (0..n)
                .map(|_| BigRational::from_integer(BigInt::from(rng.gen_range(-e..=e))))
                .collect(),
        );
        match validate_instance(a, c) {
            Ok(inst) if !shape.unique_lp || inst.unique_lp_optima() => return Some(inst),
            _ => continue,
        }
    }
    None
}

/// `count` instances from a ChaCha8 stream seeded with `seed`.
pub fn random_instances(seed: u64, count: usize, shape: &InstanceShape) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .filter_map(|_| random_instance(&mut rng, shape))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_respect_shape() {
        let shape = InstanceShape {
            unique_lp: true,
            ..InstanceShape::default()
        };
        let insts = random_instances(7, 20, &shape);
        assert_eq!(insts.len(), 20);
        for i in &insts {
            assert!(i.m() <= 2 && i.n() <= 5 && i.n() > i.m());
            assert!(i.a().max_abs() <= BigInt::from(3));
            assert!(i.unique_lp_optima());
        }
    }

    #[test]
    fn same_seed_same_instances() {
        let s = InstanceShape::default();
        let a = random_instances(3, 5, &s);
        let b = random_instances(3, 5, &s);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.a(), y.a());
            assert_eq!(x.c(), y.c());
        }
    }
}
