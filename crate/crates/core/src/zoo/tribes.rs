use serde::{Deserialize, Serialize};

use crate::cube::{self, SubsetMask, MAX_DIM};
use crate::error::{invalid, Result};
use crate::function::BooleanFunction;

/// OR of `s` disjoint width-`w` ANDs; block `b` owns coordinates `b·w .. (b+1)·w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TribesParams {
    pub w: usize,
    pub s: usize,
}

impl TribesParams {
    pub fn new(w: usize, s: usize) -> Result<Self> {
        if w == 0 || s == 0 {
            return Err(invalid("tribes needs w ≥ 1 and s ≥ 1"));
        }
        Ok(Self { w, s })
    }

    pub fn n(&self) -> usize {
        self.w * self.s
    }

    fn block_mask(&self, b: usize) -> SubsetMask {
        (((1u64 << self.w) - 1) << (b * self.w)) as SubsetMask
    }
}

/// Tribes with TRUE ↦ −1 on inputs and output, so the output is −1 exactly
/// when some block is all −1.
pub fn tribes(w: usize, s: usize) -> Result<BooleanFunction> {
    let p = TribesParams::new(w, s)?;
    cube::check_dim(p.n(), MAX_DIM)?;
    let blocks: Vec<SubsetMask> = (0..s).map(|b| p.block_mask(b)).collect();
    BooleanFunction::from_fn(p.n(), |x| !blocks.iter().any(|&m| x & m == m))
}

/// Closed-form coefficient: `2(1−2^{−w})^s − 1` at `∅`, otherwise
/// `2(−1)^{k+|T|} 2^{−kw} (1−2^{−w})^{s−k}` with `k` the number of blocks `T` meets.
pub fn tribes_coefficient(w: usize, s: usize, t: SubsetMask) -> Result<f64> {
    let p = TribesParams::new(w, s)?;
    if p.n() < 32 && (t as u64) >> p.n() != 0 {
        return Err(invalid(format!("mask {t:#x} outside the {} tribes variables", p.n())));
    }
    let miss = 1.0 - 0.5f64.powi(w as i32);
    if t == 0 {
        return Ok(2.0 * miss.powi(s as i32) - 1.0);
    }
    let k = (0..s).filter(|&b| t & p.block_mask(b) != 0).count();
    let sign = if (k + cube::degree(t)) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(2.0 * sign * 0.5f64.powi((k * w) as i32) * miss.powi((s - k) as i32))
}

/// `2 (2 ln n)^{2d+4} / n` with `n = w·s`.
pub fn tribes_weight_bound(w: usize, s: usize, d: usize) -> f64 {
    let n = (w * s) as f64;
    2.0 * (2.0 * n.ln()).powi(2 * d as i32 + 4) / n
}
