//! Walsh–Hadamard spectra and the quantities derived from them.
//!
//! Coefficients use expectation normalization, `f̂(S) = 2^{-n} Σ_x f(x) χ_S(x)`,
//! so `f = Σ_S f̂(S) χ_S` and Parseval reads `Σ_S f̂(S)² = E[f²]`.

use std::collections::BTreeMap;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::cube::{self, PointIndex, SubsetMask, MAX_DIM};
use crate::error::{invalid, Error, Result};
use crate::function::{BooleanFunction, BoundedFunction, CubeFunction};

/// Default tolerance for float resilience checks.
pub const RESILIENCE_TOL: f64 = 1e-9;

/// Largest dimension for the `O(4^n)` direct noise-sensitivity path.
pub const MAX_DIRECT_NS_DIM: usize = 14;

/// Unnormalized in-place butterfly: `buf[S] ← Σ_x buf[x] χ_S(x)`.
///
/// The transform is its own inverse up to a factor `2^n`.
pub fn fwht<T>(buf: &mut [T])
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    let len = buf.len();
    assert!(len.is_power_of_two(), "butterfly length must be a power of two");
    let mut half = 1;
    while half < len {
        for block in buf.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        half <<= 1;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    n: usize,
    coeffs: Vec<f64>,
}

/// Forward transform of any table.
pub fn wht<F: CubeFunction + ?Sized>(f: &F) -> Result<Spectrum> {
    let n = f.n();
    cube::check_dim(n, MAX_DIM)?;
    Ok(Spectrum::from_values(n, f.values()))
}

impl Spectrum {
    pub(crate) fn from_values(n: usize, mut values: Vec<f64>) -> Self {
        fwht(&mut values);
        let scale = 1.0 / cube::size(n) as f64;
        values.iter_mut().for_each(|v| *v *= scale);
        Self { n, coeffs: values }
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        cube::check_dim(n, MAX_DIM)?;
        if coeffs.len() != cube::size(n) {
            return Err(invalid(format!("spectrum needs {} coefficients", cube::size(n))));
        }
        Ok(Self { n, coeffs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeff(&self, mask: SubsetMask) -> f64 {
        self.coeffs[mask as usize]
    }

    /// Table of `Σ_S f̂(S) χ_S`.
    pub fn inverse(&self) -> Vec<f64> {
        let mut values = self.coeffs.clone();
        fwht(&mut values);
        values
    }

    /// `Σ_S f̂(S)²`.
    pub fn total_weight(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// `Σ_{|S|≤d} f̂(S)²`.
    pub fn low_weight(&self, d: usize) -> f64 {
        self.masked_sum(|m| cube::degree(m) <= d, |c| c * c)
    }

    /// Weight at each level `0..=n`.
    pub fn level_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.n + 1];
        for (m, c) in self.coeffs.iter().enumerate() {
            w[cube::degree(m as SubsetMask)] += c * c;
        }
        w
    }

    /// `Σ_S |S| f̂(S)²`.
    pub fn influence(&self) -> f64 {
        self.coeffs.iter().enumerate().map(|(m, c)| cube::degree(m as SubsetMask) as f64 * c * c).sum()
    }

    /// `E[f(y) f(z)]` for `z` a `ρ`-correlated copy of `y`.
    pub fn stability(&self, rho: f64) -> f64 {
        self.coeffs.iter().enumerate().map(|(m, c)| rho.powi(cube::degree(m as SubsetMask) as i32) * c * c).sum()
    }

    /// Part of the spectrum on sets with `|S| ≤ d`.
    pub fn low_part(&self, d: usize) -> Spectrum {
        self.filtered(|m| cube::degree(m) <= d)
    }

    /// Part of the spectrum on sets with `|S| > d`.
    pub fn high_part(&self, d: usize) -> Spectrum {
        self.filtered(|m| cube::degree(m) > d)
    }

    /// Largest `|f̂(S)|` over `|S| ≤ d`, with its mask.
    pub fn worst_low(&self, d: usize) -> (SubsetMask, f64) {
        let mut worst = (0, 0.0f64);
        for (m, &c) in self.coeffs.iter().enumerate() {
            let m = m as SubsetMask;
            if cube::degree(m) <= d && c.abs() > worst.1.abs() {
                worst = (m, c);
            }
        }
        worst
    }

    /// Coefficients keyed by hexadecimal mask, e.g. `"0x3"`.
    pub fn to_json_map(&self) -> BTreeMap<String, f64> {
        self.coeffs.iter().enumerate().map(|(m, &c)| (format!("{m:#x}"), c)).collect()
    }

    pub fn from_json_map(n: usize, map: &BTreeMap<String, f64>) -> Result<Self> {
        cube::check_dim(n, MAX_DIM)?;
        let mut coeffs = vec![0.0; cube::size(n)];
        for (key, &c) in map {
            let digits = key.trim_start_matches("0x");
            let m = usize::from_str_radix(digits, 16).map_err(|_| invalid(format!("bad mask key {key:?}")))?;
            if m >= coeffs.len() {
                return Err(invalid(format!("mask {key} out of range for n={n}")));
            }
            coeffs[m] = c;
        }
        Ok(Self { n, coeffs })
    }

    fn filtered(&self, keep: impl Fn(SubsetMask) -> bool) -> Spectrum {
        let coeffs =
            self.coeffs.iter().enumerate().map(|(m, &c)| if keep(m as SubsetMask) { c } else { 0.0 }).collect();
        Spectrum { n: self.n, coeffs }
    }

    fn masked_sum(&self, keep: impl Fn(SubsetMask) -> bool, term: impl Fn(f64) -> f64) -> f64 {
        self.coeffs.iter().enumerate().filter(|(m, _)| keep(*m as SubsetMask)).map(|(_, &c)| term(c)).sum()
    }
}

/// `2^n f̂(S)` for every `S`, computed in integers.
pub fn integer_spectrum(f: &BooleanFunction) -> Vec<i64> {
    let mut buf: Vec<i64> = f.table().iter().map(|&v| v as i64).collect();
    fwht(&mut buf);
    buf
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralStats {
    pub low_weight: f64,
    pub total_influence: f64,
    pub per_coordinate_influence: Vec<f64>,
    /// `Σ_S |S| f̂(S)²`, the spectral route to the same total influence.
    pub fourier_influence: f64,
}

/// `Pr_x[f(x) ≠ f(x^{⊕i})]` for every coordinate, by counting edges.
pub fn edge_influences(f: &BooleanFunction) -> Vec<f64> {
    let n = f.n();
    let size = cube::size(n);
    (0..n)
        .map(|j| {
            let bit = 1 << j;
            let cut = (0..size as PointIndex).filter(|&x| x & bit == 0 && f.get(x) != f.get(x | bit)).count();
            2.0 * cut as f64 / size as f64
        })
        .collect()
}

pub fn spectral_stats(f: &BooleanFunction, d: usize) -> Result<SpectralStats> {
    let spectrum = wht(f)?;
    let per_coordinate_influence = edge_influences(f);
    Ok(SpectralStats {
        low_weight: spectrum.low_weight(d),
        total_influence: per_coordinate_influence.iter().sum(),
        per_coordinate_influence,
        fourier_influence: spectrum.influence(),
    })
}

fn check_delta(delta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&delta) {
        Ok(())
    } else {
        Err(invalid(format!("noise rate {delta} outside [0,1]")))
    }
}

/// `NS_δ[f] = ½ − ½ Σ_S (1−2δ)^{|S|} f̂(S)²`.
pub fn noise_sensitivity(f: &BooleanFunction, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let spectrum = wht(f)?;
    Ok(noise_sensitivity_from_spectrum(&spectrum, delta))
}

pub fn noise_sensitivity_from_spectrum(spectrum: &Spectrum, delta: f64) -> f64 {
    (0.5 - 0.5 * spectrum.stability(1.0 - 2.0 * delta)).clamp(0.0, 1.0)
}

/// `Pr[f(y) ≠ f(z)]` by summing over every flip pattern.
pub fn noise_sensitivity_direct(f: &BooleanFunction, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let n = f.n();
    cube::check_dim(n, MAX_DIRECT_NS_DIM)?;
    let size = cube::size(n) as PointIndex;
    let mut total = 0.0;
    for flip in 0..size {
        let k = flip.count_ones() as i32;
        let weight = delta.powi(k) * (1.0 - delta).powi(n as i32 - k);
        if weight == 0.0 {
            continue;
        }
        let disagree = (0..size).filter(|&y| f.get(y) != f.get(y ^ flip)).count();
        total += weight * disagree as f64;
    }
    Ok(total / size as f64)
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left: a, right: b })
    }
}

/// `‖f − g‖₁ = E|f − g|`.
pub fn l1_distance<F, G>(f: &F, g: &G) -> Result<f64>
where
    F: CubeFunction + ?Sized,
    G: CubeFunction + ?Sized,
{
    same_dim(f.n(), g.n())?;
    let size = cube::size(f.n());
    let total: f64 = (0..size as PointIndex).map(|x| (f.value(x) - g.value(x)).abs()).sum();
    Ok(total / size as f64)
}

/// `E[f g]`.
pub fn correlation<F, G>(f: &F, g: &G) -> Result<f64>
where
    F: CubeFunction + ?Sized,
    G: CubeFunction + ?Sized,
{
    same_dim(f.n(), g.n())?;
    let size = cube::size(f.n());
    let total: f64 = (0..size as PointIndex).map(|x| f.value(x) * g.value(x)).sum();
    Ok(total / size as f64)
}

/// `½ E|f − g|`, the fractional Hamming distance for Boolean pairs.
pub fn dist<F, G>(f: &F, g: &G) -> Result<f64>
where
    F: CubeFunction + ?Sized,
    G: CubeFunction + ?Sized,
{
    Ok(0.5 * l1_distance(f, g)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResilienceCheck {
    pub resilient: bool,
    pub worst_mask: SubsetMask,
    pub worst_coeff: f64,
}

/// Whether every coefficient on `|S| ≤ d` is at most `tol` in magnitude.
pub fn is_d_resilient<G: CubeFunction + ?Sized>(g: &G, d: usize, tol: f64) -> Result<ResilienceCheck> {
    let spectrum = wht(g)?;
    Ok(resilience_of(&spectrum, d, tol))
}

pub fn resilience_of(spectrum: &Spectrum, d: usize, tol: f64) -> ResilienceCheck {
    let (worst_mask, worst_coeff) = spectrum.worst_low(d);
    ResilienceCheck { resilient: worst_coeff.abs() <= tol, worst_mask, worst_coeff }
}

/// Exact check on the integer spectrum of a Boolean function.
pub fn is_d_resilient_exact(f: &BooleanFunction, d: usize) -> ResilienceCheck {
    let spec = integer_spectrum(f);
    let scale = cube::size(f.n()) as f64;
    let worst = spec
        .iter()
        .enumerate()
        .filter(|(m, _)| cube::degree(*m as SubsetMask) <= d)
        .max_by_key(|(m, c)| (c.abs(), std::cmp::Reverse(*m)))
        .map(|(m, &c)| (m as SubsetMask, c))
        .unwrap_or((0, 0));
    ResilienceCheck { resilient: worst.1 == 0, worst_mask: worst.0, worst_coeff: worst.1 as f64 / scale }
}

/// Bounded function from a spectrum, clamping rounding noise past ±1.
pub fn to_bounded(spectrum: &Spectrum) -> Result<BoundedFunction> {
    BoundedFunction::new_clamped(spectrum.n(), spectrum.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{chi, coord};

    fn maj3() -> BooleanFunction {
        BooleanFunction::from_fn(3, |x| cube::coord_sum(x, 3) > 0).unwrap()
    }

    #[test]
    fn parity_is_its_own_character() {
        let f = BooleanFunction::from_fn(2, |x| chi(0b11, x) == 1).unwrap();
        assert_eq!(wht(&f).unwrap().coeffs(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn majority_spectrum_matches_enumeration() {
        // Oracle: f̂(S) = 2^{-3} Σ_x f(x) χ_S(x), summed literally.
        let f = maj3();
        let spec = wht(&f).unwrap();
        for mask in 0..8u32 {
            let direct: f64 = (0..8u32).map(|x| f.value(x) * chi(mask, x) as f64).sum::<f64>() / 8.0;
            assert!((spec.coeff(mask) - direct).abs() < 1e-15);
        }
        assert_eq!(spec.coeffs(), &[0.0, 0.5, 0.5, 0.0, 0.5, 0.0, 0.0, -0.5]);
    }

    #[test]
    fn constant_and_dictator() {
        let one = BooleanFunction::from_fn(4, |_| true).unwrap();
        let spec = wht(&one).unwrap();
        assert_eq!(spec.coeff(0), 1.0);
        assert!(spec.coeffs()[1..].iter().all(|&c| c == 0.0));

        // Canary for the bit convention: x_1 lives in bit 0.
        let dict = BooleanFunction::from_fn(3, |x| coord(x, 0) == 1).unwrap();
        let spec = wht(&dict).unwrap();
        assert_eq!(spec.coeff(0b001), 1.0);
        assert_eq!(spec.total_weight(), 1.0);
    }

    #[test]
    fn maj3_stats() {
        let stats = spectral_stats(&maj3(), 1).unwrap();
        assert!((stats.total_influence - 1.5).abs() < 1e-12);
        assert!((stats.fourier_influence - 1.5).abs() < 1e-12);
        assert!((stats.low_weight - 0.75).abs() < 1e-12);
        assert_eq!(stats.per_coordinate_influence, vec![0.5, 0.5, 0.5]);
    }

    #[test]
    fn parity_stats() {
        for k in 1..=5 {
            let mask = (1 << k) - 1;
            let f = BooleanFunction::from_fn(6, |x| chi(mask, x) == 1).unwrap();
            let stats = spectral_stats(&f, k - 1).unwrap();
            assert!((stats.total_influence - k as f64).abs() < 1e-12);
            assert_eq!(stats.low_weight, 0.0);
        }
    }

    #[test]
    fn noise_sensitivity_closed_forms() {
        let f = maj3();
        assert_eq!(noise_sensitivity(&f, 0.0).unwrap(), 0.0);
        assert_eq!(noise_sensitivity_direct(&f, 0.0).unwrap(), 0.0);
        let dict = BooleanFunction::from_fn(4, |x| coord(x, 2) == 1).unwrap();
        assert!((noise_sensitivity(&dict, 0.25).unwrap() - 0.25).abs() < 1e-15);
        assert!((noise_sensitivity_direct(&dict, 0.25).unwrap() - 0.25).abs() < 1e-15);

        // Oracle: enumerate all 8 × 8 (y, z) pairs with their probabilities.
        let delta: f64 = 0.1;
        let mut oracle = 0.0;
        for y in 0..8u32 {
            for z in 0..8u32 {
                let k = (y ^ z).count_ones() as i32;
                let p = delta.powi(k) * (1.0 - delta).powi(3 - k) / 8.0;
                if f.get(y) != f.get(z) {
                    oracle += p;
                }
            }
        }
        assert!((noise_sensitivity(&f, delta).unwrap() - oracle).abs() < 1e-12);
        assert!((noise_sensitivity_direct(&f, delta).unwrap() - oracle).abs() < 1e-12);
        assert!(noise_sensitivity(&f, 1.5).is_err());
    }

    #[test]
    fn distance_identities() {
        let and2 = BooleanFunction::new(2, vec![1, 1, 1, -1]).unwrap();
        assert_eq!(l1_distance(&and2, &and2).unwrap(), 0.0);
        assert_eq!(correlation(&and2, &and2).unwrap(), 1.0);
        assert_eq!(l1_distance(&and2, &and2.negated()).unwrap(), 2.0);
        assert_eq!(correlation(&and2, &and2.negated()).unwrap(), -1.0);
        let zero = BoundedFunction::zero(2).unwrap();
        assert_eq!(l1_distance(&and2, &zero).unwrap(), 1.0);
        assert_eq!(correlation(&and2, &zero).unwrap(), 0.0);
        assert!(is_d_resilient(&zero, 0, RESILIENCE_TOL).unwrap().resilient);
        let other = BoundedFunction::zero(3).unwrap();
        assert!(matches!(l1_distance(&and2, &other), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn exact_resilience() {
        let f = BooleanFunction::from_fn(3, |x| chi(0b011, x) == 1).unwrap();
        assert!(is_d_resilient_exact(&f, 1).resilient);
        let check = is_d_resilient_exact(&f, 2);
        assert!(!check.resilient);
        assert_eq!(check.worst_mask, 0b011);
        assert_eq!(check.worst_coeff, 1.0);
    }

    #[test]
    fn json_map_round_trip() {
        let spec = wht(&maj3()).unwrap();
        let map = spec.to_json_map();
        assert_eq!(map["0x7"], -0.5);
        assert_eq!(Spectrum::from_json_map(3, &map).unwrap(), spec);
    }

    #[test]
    fn dimension_guard() {
        struct Huge;
        impl CubeFunction for Huge {
            fn n(&self) -> usize {
                29
            }
            fn value(&self, _: PointIndex) -> f64 {
                0.0
            }
        }
        assert!(matches!(wht(&Huge), Err(Error::DimensionTooLarge { .. })));
    }
}
