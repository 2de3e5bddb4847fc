//! Disjoint composition `G∘g` and the distance bounds it obeys.
//!
//! `(G∘g)(x¹,…,x^m)` is the multilinear extension of `G` evaluated at
//! `(g(x¹),…,g(x^m))`; for Boolean inputs it is plain substitution. Block `i`
//! (0-based) of a composed point occupies coordinates `i·a .. (i+1)·a` where
//! `a` is the inner arity. Recursion follows `f_k = f ∘ f_{k−1}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cube::{self, PointIndex, SubsetMask, MAX_DIM};
use crate::error::{invalid, Error, Result};
use crate::fourier::{self, Spectrum};
use crate::function::{BooleanFunction, BoundedFunction, CubeFunction};

/// Largest arity that [`ComposedFunction::materialize`] accepts.
pub const MAX_MATERIALIZE_DIM: usize = 22;
pub const DEFAULT_SAMPLES: usize = 1_000_000;
const BALANCE_TOL: f64 = 1e-9;
const COMPOSE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
enum Inner {
    Table(BoundedFunction),
    Composed(Box<ComposedFunction>),
}

impl Inner {
    fn arity(&self) -> usize {
        match self {
            Inner::Table(t) => t.n(),
            Inner::Composed(c) => c.arity(),
        }
    }

    fn eval(&self, x: &[u64], start: usize) -> f64 {
        match self {
            Inner::Table(t) => t.get(extract(x, start, t.n())),
            Inner::Composed(c) => c.eval_at(x, start),
        }
    }
}

/// Lazy `G∘g`; only the nonzero outer coefficients are kept.
#[derive(Clone, Debug, PartialEq)]
pub struct ComposedFunction {
    m: usize,
    outer: Vec<(SubsetMask, f64)>,
    inner: Inner,
    depth: usize,
}

/// Bits `start .. start+len` of a packed point as an index.
fn extract(x: &[u64], start: usize, len: usize) -> PointIndex {
    let (word, shift) = (start / 64, start % 64);
    let mut v = x[word] >> shift;
    if shift + len > 64 {
        v |= x[word + 1] << (64 - shift);
    }
    (v & ((1u64 << len) - 1)) as PointIndex
}

fn sparse_spectrum<G: CubeFunction + ?Sized>(g: &G) -> Result<Vec<(SubsetMask, f64)>> {
    let spec = fourier::wht(g)?;
    Ok(spec.coeffs().iter().enumerate().filter(|(_, &c)| c != 0.0).map(|(m, &c)| (m as SubsetMask, c)).collect())
}

pub fn compose<G: CubeFunction + ?Sized>(outer: &G, inner: &BoundedFunction) -> Result<ComposedFunction> {
    cube::check_dim(outer.n(), MAX_DIM)?;
    Ok(ComposedFunction { m: outer.n(), outer: sparse_spectrum(outer)?, inner: Inner::Table(inner.clone()), depth: 1 })
}

/// `G ∘ c` for an already composed inner function.
pub fn compose_over<G: CubeFunction + ?Sized>(outer: &G, inner: ComposedFunction) -> Result<ComposedFunction> {
    cube::check_dim(outer.n(), MAX_DIM)?;
    let depth = inner.depth + 1;
    Ok(ComposedFunction {
        m: outer.n(),
        outer: sparse_spectrum(outer)?,
        inner: Inner::Composed(Box::new(inner)),
        depth,
    })
}

/// `f_k` with `f_0 = f` and `f_k = f ∘ f_{k−1}`; `k ≥ 1`.
pub fn self_compose(f: &BoundedFunction, k: usize) -> Result<ComposedFunction> {
    if k == 0 {
        return Err(invalid("self-composition depth must be at least 1"));
    }
    let mut c = compose(f, f)?;
    for _ in 1..k {
        c = compose_over(f, c)?;
    }
    Ok(c)
}

impl ComposedFunction {
    pub fn arity(&self) -> usize {
        self.m * self.inner.arity()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn outer_arity(&self) -> usize {
        self.m
    }

    fn eval_at(&self, x: &[u64], start: usize) -> f64 {
        let a = self.inner.arity();
        let t: Vec<f64> = (0..self.m).map(|i| self.inner.eval(x, start + i * a)).collect();
        self.outer
            .iter()
            .map(|&(mask, c)| {
                let mut prod = c;
                let mut bits = mask;
                while bits != 0 {
                    prod *= t[bits.trailing_zeros() as usize];
                    bits &= bits - 1;
                }
                prod
            })
            .sum()
    }

    /// Value at a point packed little-endian into 64-bit words.
    pub fn value(&self, x: &[u64]) -> Result<f64> {
        if x.len() * 64 < self.arity() {
            return Err(invalid(format!("point has {} bits, need {}", x.len() * 64, self.arity())));
        }
        Ok(self.eval_at(x, 0))
    }

    pub fn materialize(&self) -> Result<BoundedFunction> {
        cube::check_dim(self.arity(), MAX_MATERIALIZE_DIM)?;
        BoundedFunction::new_clamped(
            self.arity(),
            (0..cube::size(self.arity()) as u64).map(|x| self.eval_at(&[x], 0)).collect(),
        )
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> Vec<u64> {
        let words = self.arity().div_ceil(64);
        (0..words).map(|_| rng.gen::<u64>()).collect()
    }
}

/// Largest `d` with every coefficient on `|S| ≤ d` at most `tol`; `None` if
/// even the mean is nonzero.
pub fn resilience_order(spectrum: &Spectrum, tol: f64) -> Option<usize> {
    let n = spectrum.n();
    let mut worst_by_level = vec![0.0f64; n + 1];
    for (m, &c) in spectrum.coeffs().iter().enumerate() {
        let k = cube::degree(m as SubsetMask);
        worst_by_level[k] = worst_by_level[k].max(c.abs());
    }
    let first_bad = worst_by_level.iter().position(|&w| w > tol).unwrap_or(n + 1);
    first_bad.checked_sub(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositionCertificate {
    pub outer_order: usize,
    pub inner_order: usize,
    pub arity: usize,
    /// `d₁ d₂`
    pub product_order: usize,
    /// `(d₁+1)(d₂+1) − 1`
    pub block_order: usize,
    /// Measured resilience order of the composition.
    pub measured_order: Option<usize>,
    pub worst_mask: SubsetMask,
    pub worst_coeff: f64,
    pub product_ok: bool,
    pub block_ok: bool,
}

fn check_claimed(g: &BoundedFunction, d: usize, what: &str) -> Result<()> {
    let check = fourier::is_d_resilient(g, d, COMPOSE_TOL)?;
    if !check.resilient {
        return Err(invalid(format!(
            "{what} is not {d}-resilient: coefficient {:#x} is {}",
            check.worst_mask, check.worst_coeff
        )));
    }
    Ok(())
}

/// Checks that `G∘g` vanishes on all orders up to `(d₁+1)(d₂+1) − 1`, and in
/// particular up to `d₁d₂`.
pub fn check_composed_resilience(
    outer: &BoundedFunction,
    d1: usize,
    inner: &BoundedFunction,
    d2: usize,
) -> Result<CompositionCertificate> {
    check_claimed(outer, d1, "outer function")?;
    check_claimed(inner, d2, "inner function")?;
    let composed = compose(outer, inner)?;
    let spectrum = fourier::wht(&composed.materialize()?)?;
    let block_order = (d1 + 1) * (d2 + 1) - 1;
    let (worst_mask, worst_coeff) = spectrum.worst_low(block_order);
    let product_order = d1 * d2;
    let (_, worst_product) = spectrum.worst_low(product_order);
    Ok(CompositionCertificate {
        outer_order: d1,
        inner_order: d2,
        arity: composed.arity(),
        product_order,
        block_order,
        measured_order: resilience_order(&spectrum, COMPOSE_TOL),
        worst_mask,
        worst_coeff,
        product_ok: worst_product.abs() <= COMPOSE_TOL,
        block_ok: worst_coeff.abs() <= COMPOSE_TOL,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum DistanceEstimate {
    Exact { value: f64 },
    MonteCarlo { value: f64, samples: usize, seed: u64, half_width: f64 },
}

impl DistanceEstimate {
    pub fn value(&self) -> f64 {
        match *self {
            DistanceEstimate::Exact { value } | DistanceEstimate::MonteCarlo { value, .. } => value,
        }
    }

    /// Upper end of the 99% interval (the value itself when exact).
    pub fn upper(&self) -> f64 {
        match *self {
            DistanceEstimate::Exact { value } => value,
            DistanceEstimate::MonteCarlo { value, half_width, .. } => value + half_width,
        }
    }
}

/// `√(ln(2/0.01) / (2m))`, the two-sided 99% Hoeffding half-width for
/// `[0,1]`-valued samples.
pub fn hoeffding_half_width(samples: usize) -> f64 {
    (200f64.ln() / (2.0 * samples as f64)).sqrt()
}

/// `½ E|a − b|`, exactly when small enough, otherwise by sampling.
pub fn composed_distance(
    a: &ComposedFunction,
    b: &ComposedFunction,
    samples: usize,
    seed: u64,
) -> Result<DistanceEstimate> {
    if a.arity() != b.arity() {
        return Err(Error::DimensionMismatch { left: a.arity(), right: b.arity() });
    }
    if a.arity() <= MAX_MATERIALIZE_DIM {
        let value = fourier::dist(&a.materialize()?, &b.materialize()?)?;
        return Ok(DistanceEstimate::Exact { value });
    }
    if samples == 0 {
        return Err(invalid("sampling needs at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..samples {
        let x = a.random_point(&mut rng);
        total += 0.5 * (a.eval_at(&x, 0) - b.eval_at(&x, 0)).abs();
    }
    Ok(DistanceEstimate::MonteCarlo {
        value: total / samples as f64,
        samples,
        seed,
        half_width: hoeffding_half_width(samples),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseBound {
    pub delta: f64,
    pub spectral: f64,
    /// `None` above the direct-enumeration dimension.
    pub direct: Option<f64>,
    /// `δ · Inf[f]`
    pub union_bound: f64,
}

impl NoiseBound {
    pub fn holds(&self) -> bool {
        self.spectral <= self.union_bound + 1e-12
    }
}

pub fn noise_union_bound(f: &BooleanFunction, delta: f64) -> Result<NoiseBound> {
    let spectral = fourier::noise_sensitivity(f, delta)?;
    let direct =
        if f.n() <= fourier::MAX_DIRECT_NS_DIM { Some(fourier::noise_sensitivity_direct(f, delta)?) } else { None };
    let influence = fourier::wht(f)?.influence();
    Ok(NoiseBound { delta, spectral, direct, union_bound: delta * influence })
}

/// `dist(F∘f, G∘g) ≤ dist(F∘f, F∘g) + dist(F∘g, G∘g)` at one level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleStep {
    pub level: usize,
    pub total: f64,
    pub inner_swap: f64,
    pub outer_swap: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplificationReport {
    pub n: usize,
    pub k: usize,
    pub arity: usize,
    /// `dist(f, g) = ½ E|f − g|`
    pub base_distance: f64,
    pub influence: f64,
    /// `dist(f, g) · Σ_{t=0}^k Inf[f]^t`
    pub bound: f64,
    pub measured: DistanceEstimate,
    pub noise: NoiseBound,
    /// Triangle decomposition at every level; empty when sampling.
    pub triangle: Vec<TriangleStep>,
    pub holds: bool,
}

fn check_balanced<F: CubeFunction + ?Sized>(f: &F) -> Result<()> {
    let mean = f.mean();
    if mean.abs() > BALANCE_TOL {
        return Err(Error::Unbalanced(mean));
    }
    Ok(())
}

fn level(f: &BoundedFunction, k: usize) -> Result<Option<ComposedFunction>> {
    if k == 0 {
        Ok(None)
    } else {
        self_compose(f, k).map(Some)
    }
}

fn level_table(base: &BoundedFunction, c: &Option<ComposedFunction>) -> Result<BoundedFunction> {
    match c {
        None => Ok(base.clone()),
        Some(c) => c.materialize(),
    }
}

pub fn amplification_report(
    f: &BooleanFunction,
    g: &BoundedFunction,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<AmplificationReport> {
    if f.n() != g.n() {
        return Err(Error::DimensionMismatch { left: f.n(), right: g.n() });
    }
    if k == 0 {
        return Err(invalid("amplification depth k must be at least 1"));
    }
    check_balanced(f)?;
    check_balanced(g)?;
    let n = f.n();
    let fb = f.to_bounded();
    let base_distance = fourier::dist(f, g)?;
    let influence = fourier::wht(f)?.influence();
    let bound = base_distance * (0..=k).map(|t| influence.powi(t as i32)).sum::<f64>();

    let fk = self_compose(&fb, k)?;
    let gk = self_compose(g, k)?;
    let measured = composed_distance(&fk, &gk, samples, seed)?;
    let noise = noise_union_bound(f, base_distance)?;

    let mut triangle = Vec::new();
    if fk.arity() <= MAX_MATERIALIZE_DIM {
        for lvl in 1..=k {
            let (f_prev, g_prev) = (level(&fb, lvl - 1)?, level(g, lvl - 1)?);
            let f_prev_t = level_table(&fb, &f_prev)?;
            let g_prev_t = level_table(g, &g_prev)?;
            let ff = compose(&fb, &f_prev_t)?.materialize()?;
            let fg = compose(&fb, &g_prev_t)?.materialize()?;
            let gg = compose(g, &g_prev_t)?.materialize()?;
            let total = fourier::dist(&ff, &gg)?;
            let inner_swap = fourier::dist(&ff, &fg)?;
            let outer_swap = fourier::dist(&fg, &gg)?;
            triangle.push(TriangleStep {
                level: lvl,
                total,
                inner_swap,
                outer_swap,
                holds: total <= inner_swap + outer_swap + 1e-12,
            });
        }
    }

    let slack = measured.upper() - measured.value();
    let holds = measured.value() <= bound + slack + 1e-12;
    Ok(AmplificationReport {
        n,
        k,
        arity: fk.arity(),
        base_distance,
        influence,
        bound,
        measured,
        noise,
        triangle,
        holds: holds && noise.holds(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    fn bounded(f: BooleanFunction) -> BoundedFunction {
        f.to_bounded()
    }

    #[test]
    fn parity_of_parities() {
        let g = bounded(zoo::parity(0b11, 2).unwrap());
        let c = compose(&g, &g).unwrap().materialize().unwrap();
        assert_eq!(c, bounded(zoo::parity(0b1111, 4).unwrap()));
    }

    #[test]
    fn boolean_composition_is_substitution() {
        let maj = zoo::majority(3).unwrap();
        let c = compose(&maj, &maj.to_bounded()).unwrap().materialize().unwrap();
        for x in 0..512u32 {
            let blocks: Vec<i8> = (0..3).map(|i| maj.get((x >> (3 * i)) & 7)).collect();
            let expected = if blocks.iter().map(|&v| v as i32).sum::<i32>() > 0 { 1.0 } else { -1.0 };
            assert_eq!(c.get(x), expected);
        }
    }

    #[test]
    fn zero_inner_gives_mean() {
        let big = zoo::tribes(2, 2).unwrap();
        let zero = BoundedFunction::zero(2).unwrap();
        let c = compose(&big, &zero).unwrap().materialize().unwrap();
        assert!(c.table().iter().all(|&v| (v - 0.125).abs() < 1e-15));
    }

    #[test]
    fn parity_resilience_is_tight() {
        let g = bounded(zoo::parity(0b11, 2).unwrap());
        let outer = bounded(zoo::parity(0b111, 3).unwrap());
        let cert = check_composed_resilience(&outer, 2, &g, 1).unwrap();
        assert_eq!(cert.block_order, 5);
        assert_eq!(cert.measured_order, Some(5));
        assert!(cert.block_ok && cert.product_ok);
        let f2 = self_compose(&g, 2).unwrap().materialize().unwrap();
        assert_eq!(resilience_order(&fourier::wht(&f2).unwrap(), 1e-12), Some(7));
    }

    #[test]
    fn dictator_outer_keeps_balance_only() {
        let outer = bounded(zoo::dictator(1, 2).unwrap());
        let inner = bounded(zoo::parity(0b11, 2).unwrap());
        let cert = check_composed_resilience(&outer, 0, &inner, 1).unwrap();
        assert!(cert.product_ok);
        assert!(check_composed_resilience(&outer, 1, &inner, 1).is_err());
    }

    #[test]
    fn extract_crosses_words() {
        let x = [0xF000_0000_0000_0000u64, 0b101];
        assert_eq!(extract(&x, 60, 7), 0b101_1111);
        assert_eq!(extract(&x, 0, 4), 0);
    }

    #[test]
    fn identical_pair_has_zero_distance() {
        let f = zoo::majority(3).unwrap();
        let report = amplification_report(&f, &f.to_bounded(), 2, 1000, 1).unwrap();
        assert_eq!(report.measured.value(), 0.0);
        assert!(report.holds);
        let report = amplification_report(&f, &f.to_bounded(), 3, 2000, 1).unwrap();
        assert!(matches!(report.measured, DistanceEstimate::MonteCarlo { value, .. } if value == 0.0));
    }

    #[test]
    fn unbalanced_rejected() {
        let f = zoo::and(3).unwrap();
        assert!(matches!(amplification_report(&f, &f.to_bounded(), 1, 10, 0), Err(Error::Unbalanced(_))));
    }

    #[test]
    fn half_width_value() {
        assert!((hoeffding_half_width(1_000_000) - 0.0016275).abs() < 1e-6);
    }
}
