//! Indexing conventions for the hypercube `{-1,1}^n`.
//!
//! A point is stored as an integer `idx < 2^n`. Coordinate `j` (1-based) is
//! `+1` when bit `j-1` of `idx` is clear and `-1` when it is set. A subset
//! `S ⊆ [n]` is a mask with bit `j-1` set iff `j ∈ S`, so the character
//! `χ_S(x) = ∏_{j∈S} x_j` equals `(-1)^{popcount(idx & mask)}`.
//!
//! Every module in the crate goes through these helpers; nothing else
//! assumes a bit order.

use crate::error::{Error, Result};

/// Largest dimension for which dense tables are materialized.
pub const MAX_DIM: usize = 28;

pub type PointIndex = u32;
pub type SubsetMask = u32;

pub fn check_dim(n: usize, max: usize) -> Result<()> {
    if n > max {
        Err(Error::DimensionTooLarge { n, max })
    } else {
        Ok(())
    }
}

#[inline]
pub fn size(n: usize) -> usize {
    1usize << n
}

/// Value of coordinate `j` (0-based) at `idx`.
#[inline]
pub fn coord(idx: PointIndex, j: usize) -> i32 {
    1 - 2 * ((idx >> j) & 1) as i32
}

#[inline]
pub fn chi(mask: SubsetMask, idx: PointIndex) -> i32 {
    1 - 2 * ((mask & idx).count_ones() & 1) as i32
}

/// `Σ_i x_i` at `idx`.
#[inline]
pub fn coord_sum(idx: PointIndex, n: usize) -> i32 {
    n as i32 - 2 * idx.count_ones() as i32
}

#[inline]
pub fn degree(mask: SubsetMask) -> usize {
    mask.count_ones() as usize
}

/// Point index of `-x`.
#[inline]
pub fn negate(idx: PointIndex, n: usize) -> PointIndex {
    idx ^ (size(n) as PointIndex - 1)
}

/// Mask for a 1-based coordinate list.
pub fn mask_of(coords: &[usize], n: usize) -> Result<SubsetMask> {
    let mut mask = 0;
    for &c in coords {
        if c == 0 || c > n {
            return Err(crate::error::invalid(format!("coordinate {c} outside [1, {n}]")));
        }
        mask |= 1 << (c - 1);
    }
    Ok(mask)
}

/// Sorted 1-based coordinates of a mask.
pub fn coords_of(mask: SubsetMask) -> Vec<usize> {
    (0..32).filter(|j| mask >> j & 1 == 1).map(|j| j + 1).collect()
}

/// The point with the given ±1 coordinates.
pub fn index_of(x: &[i8]) -> PointIndex {
    x.iter().enumerate().fold(0, |acc, (j, &v)| if v < 0 { acc | 1 << j } else { acc })
}

pub fn point_of(idx: PointIndex, n: usize) -> Vec<i8> {
    (0..n).map(|j| coord(idx, j) as i8).collect()
}

/// Cyclic shift `x^α`, i.e. `(x_{1+α}, …, x_{n+α})` with indices mod n.
#[inline]
pub fn rotate(idx: PointIndex, n: usize, alpha: usize) -> PointIndex {
    let alpha = alpha % n;
    if alpha == 0 {
        return idx;
    }
    let full = (size(n) - 1) as PointIndex;
    ((idx >> alpha) | (idx << (n - alpha))) & full
}

/// All masks of size at most `d`, in increasing mask order.
pub fn low_degree_masks(n: usize, d: usize) -> Vec<SubsetMask> {
    (0..size(n) as SubsetMask).filter(|&m| degree(m) <= d).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convention_canary() {
        // x_1 = -1 is bit 0.
        assert_eq!(coord(0b01, 0), -1);
        assert_eq!(coord(0b01, 1), 1);
        assert_eq!(index_of(&[-1, 1, 1]), 1);
        assert_eq!(point_of(0b110, 3), vec![1, -1, -1]);
        assert_eq!(chi(0b11, 0b01), -1);
        assert_eq!(coord_sum(0, 5), 5);
        assert_eq!(negate(0, 3), 7);
    }

    #[test]
    fn rotation_matches_definition() {
        let n = 5;
        for idx in 0..32 {
            let x = point_of(idx, n);
            for alpha in 0..n {
                let shifted: Vec<i8> = (0..n).map(|i| x[(i + alpha) % n]).collect();
                assert_eq!(rotate(idx, n, alpha), index_of(&shifted));
            }
        }
    }

    #[test]
    fn masks() {
        assert_eq!(mask_of(&[1, 3], 4).unwrap(), 0b101);
        assert!(mask_of(&[5], 4).is_err());
        assert_eq!(coords_of(0b101), vec![1, 3]);
        assert_eq!(low_degree_masks(3, 1), vec![0, 1, 2, 4]);
    }
}
