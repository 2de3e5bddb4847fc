//! CycleRun: decided by the longest runs of equal bits on a cycle.
//!
//! Coordinates are arranged clockwise in index order `x_1, …, x_n`, and runs
//! may wrap from `x_n` to `x_1`. The winner is found in stages:
//!
//! 1. the player owning the strictly longest run;
//! 2. otherwise the player with more runs of that maximal length;
//! 3. otherwise, walking clockwise, each stretch from the start of one
//!    maximal run to the start of the next is credited to the owner of the
//!    first; the larger credited total wins.
//!
//! A stage-3 tie forces `n = 2·(count·len + credit)` to be even, so for odd
//! `n` the fallback `sign(Σ x_i)` never applies. It is still implemented and
//! counted.

use serde::{Deserialize, Serialize};

use crate::cube::{self, PointIndex};
use crate::error::{invalid, Error, Result};
use crate::function::BooleanFunction;

pub const MAX_CYCLERUN_DIM: usize = 25;

/// Dimension up to which `cyclerun` checks that the fallback never fires.
const FALLBACK_AUDIT_DIM: usize = 17;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    LongestRun,
    RunCount,
    Segments,
    Fallback,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleRunStats {
    pub longest_run: usize,
    pub run_count: usize,
    pub segments: usize,
    pub fallback: usize,
}

/// Value at one point, with the stage that decided it.
pub fn cyclerun_value(idx: PointIndex, n: usize) -> (i8, Decision) {
    let bit = |j: usize| (idx >> (j % n)) & 1;
    // Run start: a position whose predecessor differs.
    let Some(start) = (0..n).find(|&j| bit(j) != bit(j + n - 1)) else {
        let v = cube::coord(idx, 0) as i8;
        return (v, Decision::LongestRun);
    };

    // Runs in clockwise order as (owner, start offset, length).
    let mut runs: Vec<(i8, usize, usize)> = Vec::new();
    let mut offset = 0;
    while offset < n {
        let b = bit(start + offset);
        let mut len = 1;
        while offset + len < n && bit(start + offset + len) == b {
            len += 1;
        }
        runs.push((if b == 0 { 1 } else { -1 }, offset, len));
        offset += len;
    }

    let longest = |p: i8| runs.iter().filter(|r| r.0 == p).map(|r| r.2).max().unwrap_or(0);
    let (ones, minus) = (longest(1), longest(-1));
    if ones != minus {
        return (if ones > minus { 1 } else { -1 }, Decision::LongestRun);
    }
    let max_len = ones;
    let maximal: Vec<&(i8, usize, usize)> = runs.iter().filter(|r| r.2 == max_len).collect();
    let count = |p: i8| maximal.iter().filter(|r| r.0 == p).count();
    let (c1, c2) = (count(1), count(-1));
    if c1 != c2 {
        return (if c1 > c2 { 1 } else { -1 }, Decision::RunCount);
    }
    let mut credit = [0usize; 2];
    for (k, r) in maximal.iter().enumerate() {
        let next = maximal[(k + 1) % maximal.len()];
        let stretch = (next.1 + n - r.1) % n;
        credit[if r.0 == 1 { 0 } else { 1 }] += stretch;
    }
    if credit[0] != credit[1] {
        return (if credit[0] > credit[1] { 1 } else { -1 }, Decision::Segments);
    }
    let sum = cube::coord_sum(idx, n);
    (if sum >= 0 { 1 } else { -1 }, Decision::Fallback)
}

fn check_n(n: usize) -> Result<()> {
    if n % 2 == 0 || !(3..=MAX_CYCLERUN_DIM).contains(&n) {
        return Err(invalid(format!("cyclerun needs odd n in [3, {MAX_CYCLERUN_DIM}], got {n}")));
    }
    Ok(())
}

/// Full table plus how often each stage decided.
pub fn cyclerun_with_stats(n: usize) -> Result<(BooleanFunction, CycleRunStats)> {
    check_n(n)?;
    let mut stats = CycleRunStats::default();
    let f = BooleanFunction::from_fn(n, |x| {
        let (v, how) = cyclerun_value(x, n);
        match how {
            Decision::LongestRun => stats.longest_run += 1,
            Decision::RunCount => stats.run_count += 1,
            Decision::Segments => stats.segments += 1,
            Decision::Fallback => stats.fallback += 1,
        }
        v == 1
    })?;
    Ok((f, stats))
}

pub fn cyclerun(n: usize) -> Result<BooleanFunction> {
    let (f, stats) = cyclerun_with_stats(n)?;
    if n <= FALLBACK_AUDIT_DIM && stats.fallback > 0 {
        return Err(Error::Certificate(format!("cyclerun({n}) used the fallback {} times", stats.fallback)));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{index_of, negate, rotate};

    #[test]
    fn stage_one_examples() {
        assert_eq!(cyclerun_value(index_of(&[1, 1, -1]), 3), (1, Decision::LongestRun));
        // The 1-run wraps around to length 2.
        assert_eq!(cyclerun_value(index_of(&[1, -1, 1]), 3), (1, Decision::LongestRun));
        assert_eq!(cyclerun_value(index_of(&[-1, -1, -1, -1, -1]), 5).0, -1);
    }

    #[test]
    fn later_stages() {
        // n=7: [1,1,-1,1,-1,-1,1]; x7 joins x1 x2 in a wrapped 1-run of length 3.
        assert_eq!(cyclerun_value(index_of(&[1, 1, -1, 1, -1, -1, 1]), 7), (1, Decision::LongestRun));
        // n=5: [1,1,-1,-1,1] → 1-run of length 3 (wrap).
        assert_eq!(cyclerun_value(index_of(&[1, 1, -1, -1, 1]), 5).0, 1);
        // n=5: [1,-1,1,-1,-1]; no wrap, the −1-run x4 x5 is longest.
        assert_eq!(cyclerun_value(index_of(&[1, -1, 1, -1, -1]), 5), (-1, Decision::LongestRun));
        // n=7: [1,1,-1,-1,1,-1,-1]; length-2 runs: one for 1, two for −1.
        assert_eq!(cyclerun_value(index_of(&[1, 1, -1, -1, 1, -1, -1]), 7), (-1, Decision::RunCount));
        // n=9: [1,1,1,-1,1,1,-1,-1,-1]: maximal runs x1..x3 (owner 1) and
        // x7..x9 (owner −1); the stretch x1→x7 is 6, the stretch x7→x1 is 3.
        assert_eq!(cyclerun_value(index_of(&[1, 1, 1, -1, 1, 1, -1, -1, -1]), 9), (1, Decision::Segments));
        assert_eq!(cyclerun_value(index_of(&[-1, -1, -1, 1, -1, -1, 1, 1, 1]), 9), (-1, Decision::Segments));
    }

    #[test]
    fn odd_and_shift_invariant_small() {
        for n in [3, 5, 7, 9] {
            let (f, stats) = cyclerun_with_stats(n).unwrap();
            assert_eq!(stats.fallback, 0);
            for x in 0..cube::size(n) as PointIndex {
                assert_eq!(f.get(negate(x, n)), -f.get(x));
                for a in 1..n {
                    assert_eq!(f.get(rotate(x, n, a)), f.get(x));
                }
            }
        }
    }

    #[test]
    fn rejects_even_and_out_of_range() {
        assert!(cyclerun(4).is_err());
        assert!(cyclerun(1).is_err());
        assert!(cyclerun(27).is_err());
    }
}
