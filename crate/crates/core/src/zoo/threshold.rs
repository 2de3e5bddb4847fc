//! Symmetric threshold functions `f_t` and their binomial statistics.
//!
//! `f_t(x) = 1` if `Σx > t√n`, `−1` if `Σx < −t√n`, else `0`. Statistics are
//! sums over the `n+1` levels of `Σx`, never over the cube: exact integer
//! binomials up to `n = 64`, log-space binomials beyond.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cube::{self, PointIndex};
use crate::error::{invalid, Result};
use crate::function::BoundedFunction;

const MAX_FT_DIM: usize = 1_000_000;
const EXACT_BINOMIAL_DIM: usize = 64;
pub const BRUTE_FORCE_DIM: usize = 22;

/// A function of `Σx` only. `levels[k]` is the value at `Σx = n − 2k`,
/// i.e. on points with exactly `k` coordinates equal to −1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricFunction {
    pub n: usize,
    pub levels: Vec<f64>,
}

impl SymmetricFunction {
    pub fn value_at_sum(&self, sum: i64) -> Option<f64> {
        let k = self.n as i64 - sum;
        if k < 0 || k % 2 != 0 || k / 2 > self.n as i64 {
            return None;
        }
        Some(self.levels[(k / 2) as usize])
    }

    pub fn to_bounded(&self) -> Result<BoundedFunction> {
        cube::check_dim(self.n, cube::MAX_DIM)?;
        BoundedFunction::from_fn(self.n, |x| self.levels[x.count_ones() as usize])
    }
}

fn check(t: f64, n: usize) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid(format!("threshold t must be a finite nonnegative number, got {t}")));
    }
    if n == 0 || n > MAX_FT_DIM {
        return Err(invalid(format!("n must be in [1, {MAX_FT_DIM}], got {n}")));
    }
    Ok(())
}

fn level_value(sum: i64, cut: f64) -> f64 {
    let s = sum as f64;
    if s > cut {
        1.0
    } else if s < -cut {
        -1.0
    } else {
        0.0
    }
}

pub fn threshold_ft(t: f64, n: usize) -> Result<SymmetricFunction> {
    check(t, n)?;
    let cut = t * (n as f64).sqrt();
    let levels = (0..=n).map(|k| level_value(n as i64 - 2 * k as i64, cut)).collect();
    Ok(SymmetricFunction { n, levels })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FtStats {
    /// `E[f_t(x) · Σx]`
    pub influence_sum: f64,
    /// `Pr[f_t(x) ≠ 0]`
    pub support_prob: f64,
    /// `Pr[Σx = s*]` for the smallest attainable level `s* ≥ t√n`.
    pub level_prob: f64,
}

/// `Pr[k coordinates are −1]` for every `k`.
fn level_probabilities(n: usize) -> Vec<f64> {
    if n <= EXACT_BINOMIAL_DIM {
        let mut binom = vec![1u128; n + 1];
        for k in 1..=n {
            binom[k] = binom[k - 1] * (n - k + 1) as u128 / k as u128;
        }
        let total = 2f64.powi(n as i32);
        binom.iter().map(|&c| c as f64 / total).collect()
    } else {
        let mut ln_fact = vec![0.0f64; n + 1];
        for i in 1..=n {
            ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
        }
        let ln_total = n as f64 * std::f64::consts::LN_2;
        (0..=n).map(|k| (ln_fact[n] - ln_fact[k] - ln_fact[n - k] - ln_total).exp()).collect()
    }
}

pub fn ft_stats(t: f64, n: usize) -> Result<FtStats> {
    check(t, n)?;
    let cut = t * (n as f64).sqrt();
    if n <= EXACT_BINOMIAL_DIM {
        return Ok(exact_stats(n, cut));
    }
    let probs = level_probabilities(n);
    let mut stats = FtStats { influence_sum: 0.0, support_prob: 0.0, level_prob: 0.0 };
    let mut level_found = false;
    // Walk from the top level down so the first level ≥ cut is s*.
    for k in 0..=n {
        let sum = n as i64 - 2 * k as i64;
        let v = level_value(sum, cut);
        stats.influence_sum += probs[k] * v * sum as f64;
        if v != 0.0 {
            stats.support_prob += probs[k];
        }
        if (sum as f64) >= cut {
            stats.level_prob = probs[k];
            level_found = true;
        }
    }
    if !level_found {
        stats.level_prob = 0.0;
    }
    Ok(stats)
}

fn exact_stats(n: usize, cut: f64) -> FtStats {
    let mut binom = vec![1u128; n + 1];
    for k in 1..=n {
        binom[k] = binom[k - 1] * (n - k + 1) as u128 / k as u128;
    }
    let (mut inf_num, mut support_num, mut level_num) = (0u128, 0u128, 0u128);
    for k in 0..=n {
        let sum = n as i64 - 2 * k as i64;
        let v = level_value(sum, cut);
        if v != 0.0 {
            // v · sum = |sum| on the support.
            inf_num += binom[k] * sum.unsigned_abs() as u128;
            support_num += binom[k];
        }
        if (sum as f64) >= cut {
            level_num = binom[k];
        }
    }
    let total = 2f64.powi(n as i32);
    FtStats {
        influence_sum: inf_num as f64 / total,
        support_prob: support_num as f64 / total,
        level_prob: level_num as f64 / total,
    }
}

/// Same statistics by enumerating every point of the cube.
pub fn ft_stats_bruteforce(t: f64, n: usize) -> Result<FtStats> {
    check(t, n)?;
    cube::check_dim(n, BRUTE_FORCE_DIM)?;
    let cut = t * (n as f64).sqrt();
    let target = (0..=n as i64).rev().map(|k| n as i64 - 2 * k).find(|&s| s as f64 >= cut);
    let size = cube::size(n);
    let (mut inf, mut support, mut level) = (0.0, 0usize, 0usize);
    for x in 0..size as PointIndex {
        let sum = cube::coord_sum(x, n) as i64;
        let v = level_value(sum, cut);
        inf += v * sum as f64;
        if v != 0.0 {
            support += 1;
        }
        if Some(sum) == target {
            level += 1;
        }
    }
    Ok(FtStats {
        influence_sum: inf / size as f64,
        support_prob: support as f64 / size as f64,
        level_prob: level as f64 / size as f64,
    })
}

/// Which constant multiplies `exp(−u²/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhiNormalization {
    /// `1/(2π)`, as printed alongside the estimates.
    Printed,
    /// `1/√(2π)`, the standard Gaussian density.
    Standard,
}

pub fn phi(u: f64, norm: PhiNormalization) -> f64 {
    let c = match norm {
        PhiNormalization::Printed => 1.0 / (2.0 * PI),
        PhiNormalization::Standard => 1.0 / (2.0 * PI).sqrt(),
    };
    c * (-u * u / 2.0).exp()
}

/// The three Gaussian estimates for `f_t`, evaluated with constant `factor`
/// in place of 3 in the first two.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichCheck {
    pub n: usize,
    pub t: f64,
    pub normalization: PhiNormalization,
    pub factor: f64,
    pub phi: f64,
    pub stats: FtStats,
    /// `φ√n/c ≤ Inf(f_t) ≤ cφ√n`
    pub influence_lower: f64,
    pub influence_upper: f64,
    pub influence_ok: bool,
    /// `φ/(ct) ≤ Pr[f_t ≠ 0] ≤ cφ/t`
    pub support_lower: f64,
    pub support_upper: f64,
    pub support_ok: bool,
    /// `Pr[Σx = s*] ≤ 4φ/√n`
    pub level_bound: f64,
    pub level_ok: bool,
}

pub fn sandwich_checks(t: f64, n: usize, norm: PhiNormalization, factor: f64) -> Result<SandwichCheck> {
    if t <= 0.0 {
        return Err(invalid("the support estimate needs t > 0"));
    }
    let stats = ft_stats(t, n)?;
    let p = phi(t, norm);
    let root = (n as f64).sqrt();
    let (influence_lower, influence_upper) = (p * root / factor, factor * p * root);
    let (support_lower, support_upper) = (p / (factor * t), factor * p / t);
    let level_bound = 4.0 * p / root;
    Ok(SandwichCheck {
        n,
        t,
        normalization: norm,
        factor,
        phi: p,
        stats,
        influence_lower,
        influence_upper,
        influence_ok: influence_lower <= stats.influence_sum && stats.influence_sum <= influence_upper,
        support_lower,
        support_upper,
        support_ok: support_lower <= stats.support_prob && stats.support_prob <= support_upper,
        level_bound,
        level_ok: stats.level_prob <= level_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_thresholds() {
        // t√n > n: identically zero.
        let f = threshold_ft(4.0, 9).unwrap();
        assert!(f.levels.iter().all(|&v| v == 0.0));
        let s = ft_stats(4.0, 9).unwrap();
        assert_eq!((s.influence_sum, s.support_prob), (0.0, 0.0));
        // t = 0, odd n: Σx is never 0.
        assert_eq!(ft_stats(0.0, 9).unwrap().support_prob, 1.0);
        // t = 0, even n: 1 − C(10,5)/2^10.
        let s = ft_stats(0.0, 10).unwrap();
        assert!((s.support_prob - (1.0 - 252.0 / 1024.0)).abs() < 1e-15);
        assert!(threshold_ft(-1.0, 4).is_err());
    }

    #[test]
    fn odd_and_monotone() {
        let f = threshold_ft(0.7, 11).unwrap();
        for k in 0..=11 {
            assert_eq!(f.levels[k], -f.levels[11 - k]);
            if k > 0 {
                assert!(f.levels[k] <= f.levels[k - 1]);
            }
        }
    }

    #[test]
    fn binomial_matches_cube_enumeration() {
        for n in [5, 8, 12] {
            for t in [0.0, 0.3, 1.0, 1.7] {
                let a = ft_stats(t, n).unwrap();
                let b = ft_stats_bruteforce(t, n).unwrap();
                assert!((a.influence_sum - b.influence_sum).abs() < 1e-12);
                assert!((a.support_prob - b.support_prob).abs() < 1e-12);
                assert!((a.level_prob - b.level_prob).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn log_space_agrees_with_exact_near_the_switch() {
        // n = 64 exact vs the log-space path on the same n.
        let n = 64;
        let exact = ft_stats(1.0, n).unwrap();
        let probs = level_probabilities(100);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let cut = (n as f64).sqrt();
        let mut ln_fact = vec![0.0f64; n + 1];
        for i in 1..=n {
            ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
        }
        let support: f64 = (0..=n)
            .filter(|&k| ((n as i64 - 2 * k as i64) as f64).abs() > cut)
            .map(|k| (ln_fact[n] - ln_fact[k] - ln_fact[n - k] - n as f64 * std::f64::consts::LN_2).exp())
            .sum();
        assert!((support - exact.support_prob).abs() < 1e-12);
    }

    #[test]
    fn symmetric_table() {
        let f = threshold_ft(0.5, 4).unwrap();
        let table = f.to_bounded().unwrap();
        assert_eq!(table.get(0), 1.0);
        assert_eq!(table.get(0b1111), -1.0);
        assert_eq!(f.value_at_sum(4), Some(1.0));
        assert_eq!(f.value_at_sum(3), None);
    }

    #[test]
    fn phi_constants() {
        assert!((phi(0.0, PhiNormalization::Standard) - 0.3989422804014327).abs() < 1e-15);
        assert!((phi(0.0, PhiNormalization::Printed) - 0.15915494309189535).abs() < 1e-15);
    }
}
