//! Named Boolean functions.
//!
//! Sign conventions differ per family and are documented on each builder:
//! Tribes maps logical TRUE to −1 (inputs and output), CycleRun returns +1
//! when the 1-player wins. Nothing else in the crate assumes either.

mod cyclerun;
mod threshold;
mod tribes;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cube::{self, PointIndex, SubsetMask};
use crate::error::{invalid, Result};
use crate::function::BooleanFunction;

pub use cyclerun::{cyclerun, cyclerun_value, cyclerun_with_stats, CycleRunStats, Decision, MAX_CYCLERUN_DIM};
pub use threshold::{
    ft_stats, ft_stats_bruteforce, phi, sandwich_checks, threshold_ft, FtStats, PhiNormalization, SandwichCheck,
    SymmetricFunction, BRUTE_FORCE_DIM,
};
pub use tribes::{tribes, tribes_coefficient, tribes_weight_bound, TribesParams};

/// `sign(Σ x_i)`; `n` must be odd.
pub fn majority(n: usize) -> Result<BooleanFunction> {
    if n % 2 == 0 {
        return Err(invalid(format!("majority needs odd n, got {n}")));
    }
    BooleanFunction::from_fn(n, |x| cube::coord_sum(x, n) > 0)
}

/// `χ_S` for the given mask.
pub fn parity(mask: SubsetMask, n: usize) -> Result<BooleanFunction> {
    if (mask as u64) >> n != 0 {
        return Err(invalid(format!("mask {mask:#x} outside n={n}")));
    }
    BooleanFunction::from_fn(n, |x| cube::chi(mask, x) == 1)
}

/// `x_i`, 1-based.
pub fn dictator(i: usize, n: usize) -> Result<BooleanFunction> {
    if i == 0 || i > n {
        return Err(invalid(format!("dictator coordinate {i} outside [1, {n}]")));
    }
    BooleanFunction::from_fn(n, |x| cube::coord(x, i - 1) == 1)
}

/// AND of all inputs with TRUE ↦ −1: `−1` only at the all-(−1) point.
pub fn and(n: usize) -> Result<BooleanFunction> {
    let all = (cube::size(n) - 1) as PointIndex;
    BooleanFunction::from_fn(n, |x| x != all)
}

pub fn constant(n: usize, value: bool) -> Result<BooleanFunction> {
    BooleanFunction::from_fn(n, |_| value)
}

/// Uniformly random table from a seeded generator.
pub fn random(n: usize, seed: u64) -> Result<BooleanFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BooleanFunction::from_fn(n, |_| rng.gen::<bool>())
}

/// Random balanced table: a seeded shuffle of `2^{n−1}` ones and minus ones.
pub fn random_balanced(n: usize, seed: u64) -> Result<BooleanFunction> {
    let size = cube::size(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table: Vec<i8> = (0..size).map(|i| if i < size / 2 { 1 } else { -1 }).collect();
    for i in (1..size).rev() {
        let j = rng.gen_range(0..=i);
        table.swap(i, j);
    }
    BooleanFunction::new(n, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{is_d_resilient_exact, wht};

    #[test]
    fn basics() {
        assert!(majority(4).is_err());
        let spec = wht(&majority(3).unwrap()).unwrap();
        assert_eq!(spec.coeff(0b001), 0.5);
        assert_eq!(spec.coeff(0b111), -0.5);
        assert!(is_d_resilient_exact(&parity(0b011, 3).unwrap(), 1).resilient);
        assert_eq!(wht(&dictator(2, 3).unwrap()).unwrap().coeff(0b010), 1.0);
        assert!(dictator(0, 3).is_err());
        assert_eq!(and(2).unwrap().table(), &[1, 1, 1, -1]);
    }

    #[test]
    fn seeded_randomness() {
        assert_eq!(random(6, 7).unwrap(), random(6, 7).unwrap());
        assert_ne!(random(6, 7).unwrap(), random(6, 8).unwrap());
        for seed in 0..10 {
            assert!(random_balanced(5, seed).unwrap().is_balanced());
        }
    }
}
