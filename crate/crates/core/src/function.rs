//! Dense truth tables over the hypercube.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cube::{self, PointIndex, MAX_DIM};
use crate::error::{Error, Result};

/// Tolerance on `|g(x)| ≤ 1` for bounded tables.
pub const BOUND_TOL: f64 = 1e-12;

/// Read access shared by Boolean and bounded tables.
pub trait CubeFunction {
    fn n(&self) -> usize;
    fn value(&self, idx: PointIndex) -> f64;

    fn values(&self) -> Vec<f64> {
        (0..cube::size(self.n()) as PointIndex).map(|x| self.value(x)).collect()
    }

    fn mean(&self) -> f64 {
        let size = cube::size(self.n());
        (0..size as PointIndex).map(|x| self.value(x)).sum::<f64>() / size as f64
    }
}

/// A function `{-1,1}^n → {-1,1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BooleanFunction {
    n: usize,
    table: Vec<i8>,
}

impl BooleanFunction {
    pub fn new(n: usize, table: Vec<i8>) -> Result<Self> {
        cube::check_dim(n, MAX_DIM)?;
        if table.len() != cube::size(n) {
            return Err(Error::InvalidTable(format!(
                "expected {} entries for n={n}, got {}",
                cube::size(n),
                table.len()
            )));
        }
        if let Some(pos) = table.iter().position(|&v| v != 1 && v != -1) {
            return Err(Error::InvalidTable(format!("entry {pos} is {} (not ±1)", table[pos])));
        }
        Ok(Self { n, table })
    }

    /// Builds the table from a predicate on point indices.
    pub fn from_fn(n: usize, mut f: impl FnMut(PointIndex) -> bool) -> Result<Self> {
        cube::check_dim(n, MAX_DIM)?;
        let table = (0..cube::size(n) as PointIndex).map(|x| if f(x) { 1 } else { -1 }).collect();
        Ok(Self { n, table })
    }

    pub fn table(&self) -> &[i8] {
        &self.table
    }

    #[inline]
    pub fn get(&self, idx: PointIndex) -> i8 {
        self.table[idx as usize]
    }

    pub fn negated(&self) -> Self {
        Self { n: self.n, table: self.table.iter().map(|v| -v).collect() }
    }

    pub fn to_bounded(&self) -> BoundedFunction {
        BoundedFunction { n: self.n, table: self.table.iter().map(|&v| v as f64).collect() }
    }

    /// `Σ_x f(x)`, exactly.
    pub fn sum(&self) -> i64 {
        self.table.iter().map(|&v| v as i64).sum()
    }

    pub fn is_balanced(&self) -> bool {
        self.sum() == 0
    }
}

impl CubeFunction for BooleanFunction {
    fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn value(&self, idx: PointIndex) -> f64 {
        self.table[idx as usize] as f64
    }
}

/// A function `{-1,1}^n → [-1,1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundedFunction {
    n: usize,
    table: Vec<f64>,
}

impl BoundedFunction {
    pub fn new(n: usize, table: Vec<f64>) -> Result<Self> {
        cube::check_dim(n, MAX_DIM)?;
        if table.len() != cube::size(n) {
            return Err(Error::InvalidTable(format!(
                "expected {} entries for n={n}, got {}",
                cube::size(n),
                table.len()
            )));
        }
        if let Some(pos) = table.iter().position(|v| !v.is_finite() || v.abs() > 1.0 + BOUND_TOL) {
            return Err(Error::InvalidTable(format!("entry {pos} is {} (outside [-1,1])", table[pos])));
        }
        Ok(Self { n, table })
    }

    /// Clamps entries that exceed the bound by rounding noise only.
    pub fn new_clamped(n: usize, table: Vec<f64>) -> Result<Self> {
        let mut f = Self::new(n, table)?;
        for v in &mut f.table {
            *v = v.clamp(-1.0, 1.0);
        }
        Ok(f)
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, vec![0.0; cube::size(n)])
    }

    pub fn from_fn(n: usize, f: impl FnMut(PointIndex) -> f64) -> Result<Self> {
        cube::check_dim(n, MAX_DIM)?;
        Self::new(n, (0..cube::size(n) as PointIndex).map(f).collect())
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn into_table(self) -> Vec<f64> {
        self.table
    }

    #[inline]
    pub fn get(&self, idx: PointIndex) -> f64 {
        self.table[idx as usize]
    }

    pub fn sup_norm(&self) -> f64 {
        self.table.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// The Boolean function with this table, if every entry is exactly ±1.
    pub fn to_boolean(&self) -> Option<BooleanFunction> {
        if self.table.iter().all(|&v| v == 1.0 || v == -1.0) {
            Some(BooleanFunction { n: self.n, table: self.table.iter().map(|&v| v as i8).collect() })
        } else {
            None
        }
    }
}

impl CubeFunction for BoundedFunction {
    fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn value(&self, idx: PointIndex) -> f64 {
        self.table[idx as usize]
    }
}

/// Serializes a table in the text format: `n=<k>` then one line of `2^k`
/// space-separated entries in point-index order.
pub fn write_truth_table<F: CubeFunction + ?Sized>(f: &F) -> String {
    let mut out = format!("n={}\n", f.n());
    let values = f.values();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        // Display on f64 is the shortest round-tripping representation.
        if *v == 1.0 || *v == -1.0 || *v == 0.0 {
            let _ = write!(out, "{}", *v as i64);
        } else {
            let _ = write!(out, "{v}");
        }
    }
    out.push('\n');
    out
}

/// Parses the text table format into a bounded function.
pub fn parse_truth_table(text: &str) -> Result<BoundedFunction> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::InvalidTable("empty input".into()))?;
    let n: usize = header
        .strip_prefix("n=")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::InvalidTable(format!("bad header {header:?}, expected n=<k>")))?;
    cube::check_dim(n, MAX_DIM)?;
    let body = lines.next().ok_or_else(|| Error::InvalidTable("missing table line".into()))?;
    if lines.next().is_some() {
        return Err(Error::InvalidTable("unexpected trailing lines".into()));
    }
    let table = body
        .split_whitespace()
        .map(|tok| tok.parse::<f64>().map_err(|_| Error::InvalidTable(format!("unparsable entry {tok:?}"))))
        .collect::<Result<Vec<_>>>()?;
    BoundedFunction::new(n, table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_tables() {
        assert!(BooleanFunction::new(2, vec![1, -1, 1]).is_err());
        assert!(BooleanFunction::new(1, vec![1, 0]).is_err());
        assert!(BoundedFunction::new(1, vec![0.5, 1.5]).is_err());
        assert!(BoundedFunction::new(1, vec![0.5, f64::NAN]).is_err());
        assert!(BoundedFunction::new(1, vec![0.5, 1.0 + 1e-13]).is_ok());
    }

    #[test]
    fn text_format() {
        let f = BoundedFunction::new(2, vec![1.0, -1.0, 0.25, 0.0]).unwrap();
        let text = write_truth_table(&f);
        assert_eq!(text, "n=2\n1 -1 0.25 0\n");
        assert_eq!(parse_truth_table(&text).unwrap(), f);
        assert!(parse_truth_table("n=2\n1 1 1\n").is_err());
        assert!(parse_truth_table("k=2\n1 1 1 1\n").is_err());
        assert!(parse_truth_table("n=1\n1 x\n").is_err());
    }

    #[test]
    fn boolean_view() {
        let f = BoundedFunction::new(1, vec![1.0, -1.0]).unwrap();
        assert_eq!(f.to_boolean().unwrap().table(), &[1, -1]);
        assert!(BoundedFunction::new(1, vec![1.0, 0.0]).unwrap().to_boolean().is_none());
    }
}
