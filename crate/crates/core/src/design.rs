//! Set systems with bounded pairwise intersections and the resilient
//! families they carry.
//!
//! A `d`-resilient `g` on `k` variables, copied onto the sets of an
//! `(n, k, d)`-design, gives pairwise orthogonal functions: two copies share
//! at most `d` coordinates, so no character appears in both spectra.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cube::{self, PointIndex, SubsetMask, MAX_DIM};
use crate::error::{invalid, Error, Result};
use crate::fourier;
use crate::function::{BooleanFunction, BoundedFunction, CubeFunction};

/// Largest ambient dimension for the Gram computation.
pub const MAX_GRAM_DIM: usize = 22;
const MAX_CANDIDATES: u64 = 5_000_000;
const GRAM_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "order", rename_all = "kebab-case")]
pub enum CandidateOrder {
    Lexicographic,
    Shuffled { seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Design {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub sets: Vec<SubsetMask>,
}

/// JSON shape: sets as sorted 1-based index lists.
#[derive(Serialize, Deserialize)]
struct DesignJson {
    n: usize,
    k: usize,
    d: usize,
    sets: Vec<Vec<usize>>,
}

impl Serialize for Design {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DesignJson { n: self.n, k: self.k, d: self.d, sets: self.index_lists() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Design {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let j = DesignJson::deserialize(de)?;
        let sets = j
            .sets
            .iter()
            .map(|s| cube::mask_of(s, j.n))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        let design = Design { n: j.n, k: j.k, d: j.d, sets };
        design.validate().map_err(serde::de::Error::custom)?;
        Ok(design)
    }
}

impl Design {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn index_lists(&self) -> Vec<Vec<usize>> {
        self.sets.iter().map(|&m| cube::coords_of(m)).collect()
    }

    /// Exhaustive check of set sizes and pairwise intersections.
    pub fn validate(&self) -> Result<()> {
        for (i, &a) in self.sets.iter().enumerate() {
            if cube::degree(a) != self.k || (self.n < 32 && (a as u64) >> self.n != 0) {
                return Err(Error::Certificate(format!("set {i} is not a {}-subset of [{}]", self.k, self.n)));
            }
            for (j, &b) in self.sets.iter().enumerate().skip(i + 1) {
                let common = cube::degree(a & b);
                if common > self.d {
                    return Err(Error::Certificate(format!("sets {i} and {j} share {common} > {} elements", self.d)));
                }
            }
        }
        Ok(())
    }
}

/// `(n d / (e² k²))^d`, the size the greedy argument guarantees.
pub fn design_bound(n: usize, k: usize, d: usize) -> f64 {
    let e2 = std::f64::consts::E.powi(2);
    ((n * d) as f64 / (e2 * (k * k) as f64)).powi(d as i32)
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul((n - i) as u64) / (i as u64 + 1))
}

/// All `k`-subsets of `[n]` in lexicographic order of their sorted index lists.
fn k_subsets(n: usize, k: usize) -> Vec<SubsetMask> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().fold(0, |m, &i| m | (1 << i)));
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < n - k + p) else {
            return out;
        };
        idx[pos] += 1;
        for p in pos + 1..k {
            idx[p] = idx[p - 1] + 1;
        }
    }
}

pub fn greedy_design(n: usize, k: usize, d: usize, order: CandidateOrder) -> Result<Design> {
    if !(d < k && k <= n) {
        return Err(invalid(format!("design needs 0 ≤ d < k ≤ n, got n={n} k={k} d={d}")));
    }
    cube::check_dim(n, MAX_DIM)?;
    if binomial(n, k) > MAX_CANDIDATES {
        return Err(invalid(format!("C({n},{k}) candidates exceed {MAX_CANDIDATES}")));
    }
    let mut candidates = k_subsets(n, k);
    if let CandidateOrder::Shuffled { seed } = order {
        candidates.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut sets: Vec<SubsetMask> = Vec::new();
    for c in candidates {
        if sets.iter().all(|&s| cube::degree(s & c) <= d) {
            sets.push(c);
        }
    }
    let design = Design { n, k, d, sets };
    design.validate()?;
    Ok(design)
}

/// `f` read off the ordered coordinates `target` (1-based) of an `n`-cube.
#[derive(Clone, Debug, PartialEq)]
pub struct JuntaEmbedding {
    pub base: BoundedFunction,
    pub target: Vec<usize>,
    pub n: usize,
}

impl JuntaEmbedding {
    pub fn new(base: BoundedFunction, target: Vec<usize>, n: usize) -> Result<Self> {
        if target.len() != base.n() {
            return Err(Error::DimensionMismatch { left: target.len(), right: base.n() });
        }
        cube::mask_of(&target, n)?;
        let mut sorted = target.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != target.len() {
            return Err(invalid("embedding coordinates must be distinct"));
        }
        Ok(Self { base, target, n })
    }

    /// Index into the base table for an ambient point.
    pub fn restrict(&self, x: PointIndex) -> PointIndex {
        self.target.iter().enumerate().fold(0, |acc, (i, &j)| acc | (((x >> (j - 1)) & 1) << i))
    }

    /// The base mask `T ⊆ [k]` as an ambient mask.
    pub fn lift_mask(&self, mask: SubsetMask) -> SubsetMask {
        cube::coords_of(mask).iter().fold(0, |m, &i| m | (1 << (self.target[i - 1] - 1)))
    }

    pub fn materialize(&self) -> Result<BoundedFunction> {
        cube::check_dim(self.n, MAX_DIM)?;
        BoundedFunction::from_fn(self.n, |x| self.base.get(self.restrict(x)))
    }
}

pub fn embed(base: &BoundedFunction, set: SubsetMask, n: usize) -> Result<BoundedFunction> {
    JuntaEmbedding::new(base.clone(), cube::coords_of(set), n)?.materialize()
}

pub fn embed_boolean(base: &BooleanFunction, set: SubsetMask, n: usize) -> Result<BooleanFunction> {
    let emb = JuntaEmbedding::new(base.to_bounded(), cube::coords_of(set), n)?;
    BooleanFunction::from_fn(n, |x| base.get(emb.restrict(x)) == 1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalFamily {
    pub design: Design,
    /// `E[g_{S_i} g_{S_j}]`
    pub gram: Vec<Vec<f64>>,
    /// `Σ_x g_{S_i}(x) g_{S_j}(x)` when `g` is Boolean.
    pub exact_gram: Option<Vec<Vec<i64>>>,
    pub second_moment: f64,
    pub max_off_diagonal: f64,
    pub orthogonal: bool,
    #[serde(skip)]
    pub members: Vec<BoundedFunction>,
}

pub fn orthogonal_family(g: &BoundedFunction, d: usize, design: &Design) -> Result<OrthogonalFamily> {
    if design.d > d {
        return Err(Error::ResilienceMismatch { design: design.d, resilience: d });
    }
    if g.n() != design.k {
        return Err(Error::DimensionMismatch { left: g.n(), right: design.k });
    }
    cube::check_dim(design.n, MAX_GRAM_DIM)?;
    design.validate()?;
    let check = fourier::is_d_resilient(g, d, fourier::RESILIENCE_TOL)?;
    if !check.resilient {
        return Err(invalid(format!(
            "g is not {d}-resilient: coefficient {:#x} is {}",
            check.worst_mask, check.worst_coeff
        )));
    }

    let members: Vec<BoundedFunction> = design.sets.iter().map(|&s| embed(g, s, design.n)).collect::<Result<_>>()?;
    let size = cube::size(design.n) as f64;
    let m = members.len();
    let mut gram = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i..m {
            let v = fourier::correlation(&members[i], &members[j])?;
            gram[i][j] = v;
            gram[j][i] = v;
        }
    }
    let exact_gram = g.to_boolean().map(|gb| {
        let tables: Vec<BooleanFunction> =
            design.sets.iter().map(|&s| embed_boolean(&gb, s, design.n).expect("checked dimension")).collect();
        let mut out = vec![vec![0i64; m]; m];
        for i in 0..m {
            for j in i..m {
                let v: i64 = tables[i].table().iter().zip(tables[j].table()).map(|(&a, &b)| (a * b) as i64).sum();
                out[i][j] = v;
                out[j][i] = v;
            }
        }
        out
    });

    let second_moment = g.table().iter().map(|v| v * v).sum::<f64>() / cube::size(g.n()) as f64;
    let max_off_diagonal = (0..m)
        .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| gram[i][j].abs())
        .fold(0.0, f64::max);
    let exact_ok = exact_gram.as_ref().map_or(true, |e| {
        (0..m).all(|i| (0..m).all(|j| if i == j { e[i][j] as f64 == size * second_moment } else { e[i][j] == 0 }))
    });
    let diag_ok = (0..m).all(|i| (gram[i][i] - second_moment).abs() <= GRAM_TOL);
    Ok(OrthogonalFamily {
        design: design.clone(),
        gram,
        exact_gram,
        second_moment,
        max_off_diagonal,
        orthogonal: max_off_diagonal <= GRAM_TOL && diag_ok && exact_ok,
        members,
    })
}
