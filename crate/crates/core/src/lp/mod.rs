//! Small dense linear programs, and the two programs linking resilience with
//! low-degree ℓ1 approximation.

mod duality;
mod simplex;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cube::{self, PointIndex, SubsetMask};
use crate::error::{invalid, Result};
use crate::function::CubeFunction;

pub use duality::{
    distance_to_resilience, duality_certificate, l1_poly_distance, l1_regression, DualityCertificate, L1ApproxResult,
    RegressionSample, ResilienceResult, MAX_LP_DIM,
};
pub use simplex::SolverOptions;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// `opt c·x` subject to `A x = b` and `lower ≤ x ≤ upper` (bounds may be infinite).
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// A program over `objective.len()` variables, all bounded to `[0, ∞)`.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self { sense, objective, rows: Vec::new(), rhs: Vec::new(), lower: vec![0.0; n], upper: vec![f64::INFINITY; n] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn with_bounds(mut self, lower: f64, upper: f64) -> Self {
        self.lower.iter_mut().for_each(|v| *v = lower);
        self.upper.iter_mut().for_each(|v| *v = upper);
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn add_equality(&mut self, row: Vec<f64>, rhs: f64) {
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(invalid("bound vectors do not match the variable count"));
        }
        if self.rows.len() != self.rhs.len() {
            return Err(invalid("row count does not match right-hand side"));
        }
        if let Some(i) = self.rows.iter().position(|r| r.len() != n) {
            return Err(invalid(format!("row {i} has the wrong length")));
        }
        if self.rhs.iter().any(|b| !b.is_finite()) {
            return Err(invalid("right-hand side must be finite"));
        }
        if self.objective.iter().chain(self.rows.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(invalid("coefficients must be finite"));
        }
        for j in 0..n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(invalid(format!("variable {j} has empty bounds [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    /// `max_i |A_i·x − b_i|`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| (row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub point: Vec<f64>,
    /// Row multipliers `y` with `c − Aᵀy` the reduced costs of the stated sense.
    pub duals: Vec<f64>,
    pub iterations: usize,
    pub max_residual: f64,
}

/// Solves with default options. Deterministic: identical input gives
/// bit-identical output.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    simplex::solve(lp, SolverOptions::default())
}

pub fn solve_lp_with(lp: &LinearProgram, options: SolverOptions) -> Result<LpSolution> {
    simplex::solve(lp, options)
}

/// Real polynomial `Σ_S c_S χ_S` with every `|S| ≤ degree`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsePolynomial {
    n: usize,
    degree: usize,
    coeffs: BTreeMap<SubsetMask, f64>,
}

impl SparsePolynomial {
    pub fn new(n: usize, degree: usize, coeffs: BTreeMap<SubsetMask, f64>) -> Result<Self> {
        if let Some(m) = coeffs.keys().find(|&&m| cube::degree(m) > degree || (m as u64) >> n != 0) {
            return Err(invalid(format!("mask {m:#x} exceeds degree {degree} or dimension {n}")));
        }
        Ok(Self { n, degree, coeffs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &BTreeMap<SubsetMask, f64> {
        &self.coeffs
    }

    pub fn coeff(&self, mask: SubsetMask) -> f64 {
        self.coeffs.get(&mask).copied().unwrap_or(0.0)
    }

    pub fn evaluate(&self, idx: PointIndex) -> f64 {
        self.coeffs.iter().map(|(&m, &c)| c * cube::chi(m, idx) as f64).sum()
    }

    pub fn table(&self) -> Vec<f64> {
        (0..cube::size(self.n) as PointIndex).map(|x| self.evaluate(x)).collect()
    }

    /// `E|f − p|`, evaluated pointwise.
    pub fn l1_error<F: CubeFunction + ?Sized>(&self, f: &F) -> f64 {
        let size = cube::size(self.n);
        (0..size as PointIndex).map(|x| (f.value(x) - self.evaluate(x)).abs()).sum::<f64>() / size as f64
    }
}
