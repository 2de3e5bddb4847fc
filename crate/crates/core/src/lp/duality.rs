//! Distance to resilience and low-degree ℓ1 approximation.
//!
//! For Boolean `f` and degree `d` the two optima satisfy
//! `α_d(f) + Δ_{P_d}(f) = 1`. Both sides are solved independently here, and
//! every witness is re-verified outside the solver before it is returned.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cube::{self, PointIndex, SubsetMask};
use crate::error::{invalid, Error, Result};
use crate::fourier::{self, ResilienceCheck};
use crate::function::{BooleanFunction, BoundedFunction, CubeFunction};

use super::{solve_lp, LinearProgram, LpSolution, Sense, SparsePolynomial};

/// Largest dimension accepted by the exact programs.
pub const MAX_LP_DIM: usize = 12;

/// Tolerance used when re-verifying solver output.
const AUDIT_TOL: f64 = 1e-7;

fn check_args(n: usize, d: usize) -> Result<()> {
    cube::check_dim(n, MAX_LP_DIM)?;
    if d > n {
        return Err(invalid(format!("degree {d} exceeds dimension {n}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResilienceResult {
    pub d: usize,
    /// `min ‖f − g‖₁` over bounded `d`-resilient `g`.
    pub alpha: f64,
    pub witness: BoundedFunction,
    pub lp_value: f64,
    pub witness_check: ResilienceCheck,
    pub iterations: usize,
}

/// Maximizes `Σ_x f(x) g(x)` over `g ∈ [−1,1]^{2^n}` with `Σ_x g(x) χ_S(x) = 0`
/// for every `|S| ≤ d`; `α = 1 − value / 2^n`.
pub fn distance_to_resilience(f: &BooleanFunction, d: usize) -> Result<ResilienceResult> {
    let n = f.n();
    check_args(n, d)?;
    let size = cube::size(n);
    let objective: Vec<f64> = f.table().iter().map(|&v| v as f64).collect();
    let mut lp = LinearProgram::new(Sense::Maximize, objective).with_bounds(-1.0, 1.0);
    for mask in cube::low_degree_masks(n, d) {
        let row = (0..size as PointIndex).map(|x| cube::chi(mask, x) as f64).collect();
        lp.add_equality(row, 0.0);
    }
    let sol = solve_lp(&lp)?;
    let witness = BoundedFunction::new_clamped(n, sol.point)?;
    let alpha = 1.0 - sol.value / size as f64;

    let witness_check = fourier::is_d_resilient(&witness, d, AUDIT_TOL)?;
    if !witness_check.resilient {
        return Err(Error::Certificate(format!(
            "witness coefficient {:#x} is {}",
            witness_check.worst_mask, witness_check.worst_coeff
        )));
    }
    let distance = fourier::l1_distance(f, &witness)?;
    if (distance - alpha).abs() > AUDIT_TOL {
        return Err(Error::Certificate(format!("witness distance {distance} differs from alpha {alpha}")));
    }
    Ok(ResilienceResult { d, alpha, witness, lp_value: sol.value, witness_check, iterations: sol.iterations })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct L1ApproxResult {
    pub d: usize,
    /// `min E|f − p|` over degree-`d` polynomials.
    pub delta: f64,
    pub poly: SparsePolynomial,
    /// `E|f − poly|` evaluated pointwise, independent of the solver's value.
    pub recomputed: f64,
    pub iterations: usize,
}

/// Minimizes `Σ_x |q(x)|` with `q = f − Σ_{|S|≤d} p_S χ_S`, splitting each
/// residual as `q⁺ − q⁻`.
pub fn l1_poly_distance(f: &BooleanFunction, d: usize) -> Result<L1ApproxResult> {
    let n = f.n();
    check_args(n, d)?;
    let size = cube::size(n);
    let masks = cube::low_degree_masks(n, d);
    let k = masks.len();
    // Variables: p_S (free), then q⁺_x, q⁻_x.
    let mut objective = vec![0.0; k];
    objective.extend(std::iter::repeat(1.0).take(2 * size));
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    for j in 0..k {
        lp.set_bounds(j, f64::NEG_INFINITY, f64::INFINITY);
    }
    for x in 0..size {
        let mut row = vec![0.0; k + 2 * size];
        for (j, &mask) in masks.iter().enumerate() {
            row[j] = cube::chi(mask, x as PointIndex) as f64;
        }
        row[k + 2 * x] = 1.0;
        row[k + 2 * x + 1] = -1.0;
        lp.add_equality(row, f.get(x as PointIndex) as f64);
    }
    let sol = solve_lp(&lp)?;
    let coeffs: BTreeMap<SubsetMask, f64> =
        masks.iter().zip(&sol.point).filter(|(_, &c)| c != 0.0).map(|(&m, &c)| (m, c)).collect();
    let poly = SparsePolynomial::new(n, d, coeffs)?;
    let delta = sol.value / size as f64;
    let recomputed = poly.l1_error(f);
    if (recomputed - delta).abs() > AUDIT_TOL {
        return Err(Error::Certificate(format!("regression value {delta} but E|f-p| = {recomputed}")));
    }
    Ok(L1ApproxResult { d, delta, poly, recomputed, iterations: sol.iterations })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityCertificate {
    pub alpha: f64,
    pub delta: f64,
    /// `|α + Δ − 1|`
    pub gap: f64,
    pub resilience: ResilienceResult,
    pub approximation: L1ApproxResult,
}

pub fn duality_certificate(f: &BooleanFunction, d: usize) -> Result<DualityCertificate> {
    let resilience = distance_to_resilience(f, d)?;
    let approximation = l1_poly_distance(f, d)?;
    let (alpha, delta) = (resilience.alpha, approximation.delta);
    Ok(DualityCertificate { alpha, delta, gap: (alpha + delta - 1.0).abs(), resilience, approximation })
}

/// One term `weight · |target − p(point)|` of a weighted ℓ1 regression.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionSample {
    pub point: PointIndex,
    pub target: f64,
    pub weight: f64,
}

/// Penalties tried, largest first, when picking the minimum-norm optimum.
const NORM_PENALTIES: [f64; 3] = [1e-6, 1e-8, 1e-10];

/// Coefficients below this are treated as solver noise and dropped.
const COEFF_CHOP: f64 = 1e-12;

/// The program with one column per sample and one row per monomial,
/// optionally relaxed to `|Σ_i w_i u_i χ_S(x_i)| ≤ λ`.
///
/// Its row multipliers minimize `Σ_i w_i |y_i − p(x_i)| + λ Σ_S |p_S|`.
fn regression_dual(masks: &[SubsetMask], samples: &[RegressionSample], penalty: f64) -> Result<LpSolution> {
    let k = samples.len();
    let mut objective: Vec<f64> = samples.iter().map(|s| s.weight * s.target).collect();
    if penalty > 0.0 {
        objective.extend(std::iter::repeat(0.0).take(masks.len()));
    }
    let mut lp = LinearProgram::new(Sense::Maximize, objective).with_bounds(-1.0, 1.0);
    for (r, &mask) in masks.iter().enumerate() {
        let mut row: Vec<f64> = samples.iter().map(|s| s.weight * cube::chi(mask, s.point) as f64).collect();
        if penalty > 0.0 {
            row.extend((0..masks.len()).map(|j| if j == r { -1.0 } else { 0.0 }));
            lp.set_bounds(k + r, -penalty, penalty);
        }
        lp.add_equality(row, 0.0);
    }
    solve_lp(&lp)
}

fn poly_from_duals(n: usize, d: usize, masks: &[SubsetMask], duals: &[f64]) -> Result<SparsePolynomial> {
    let coeffs = masks.iter().zip(duals).filter(|(_, &c)| c.abs() > COEFF_CHOP).map(|(&m, &c)| (m, c)).collect();
    SparsePolynomial::new(n, d, coeffs)
}

fn weighted_error(poly: &SparsePolynomial, samples: &[RegressionSample]) -> f64 {
    samples.iter().map(|s| s.weight * (s.target - poly.evaluate(s.point)).abs()).sum()
}

/// Minimizes `Σ_i w_i |y_i − p(x_i)|` over degree-`d` polynomials `p`.
///
/// The optimum value comes from the bounded program with one column per
/// sample and one row per monomial. Optimal `p` are rarely unique, so the
/// returned `p` is the one of smallest coefficient ℓ1 norm, found with a small
/// norm penalty and accepted only if its recomputed error equals the
/// optimum. If no penalty passes, the multipliers of the plain program are
/// used. Either way the returned error is recomputed from `p` and must match
/// the optimum, which certifies optimality.
pub fn l1_regression(n: usize, d: usize, samples: &[RegressionSample]) -> Result<(SparsePolynomial, f64)> {
    check_args(n, d)?;
    if samples.is_empty() {
        return Err(invalid("regression needs at least one sample"));
    }
    if samples.iter().any(|s| !(s.weight > 0.0) || !s.target.is_finite() || (s.point as u64) >> n != 0) {
        return Err(invalid("samples need positive weights, finite targets and in-range points"));
    }
    let masks = cube::low_degree_masks(n, d);
    let plain = regression_dual(&masks, samples, 0.0)?;
    let optimum = plain.value;
    let scale = 1.0 + samples.iter().map(|s| s.weight * s.target.abs()).sum::<f64>();
    let tol = AUDIT_TOL * scale;

    for penalty in NORM_PENALTIES {
        let sol = regression_dual(&masks, samples, penalty)?;
        let poly = poly_from_duals(n, d, &masks, &sol.duals)?;
        let primal = weighted_error(&poly, samples);
        if (primal - optimum).abs() <= 1e-9 * scale {
            return Ok((poly, primal));
        }
    }
    let poly = poly_from_duals(n, d, &masks, &plain.duals)?;
    let primal = weighted_error(&poly, samples);
    if (primal - optimum).abs() > tol {
        return Err(Error::Certificate(format!("regression primal {primal} does not match dual optimum {optimum}")));
    }
    Ok((poly, primal))
}
