//! Degree-`d` ℓ1 polynomial regression as an agnostic learner.
//!
//! The marginal is uniform on the cube and labels satisfy `E[y | x] = g(x)`.
//! The learner fits `p` minimizing `E|y − p(x)|`, then outputs the threshold
//! of `p` with the smallest error. Error of a hypothesis is
//! `Pr[h(x) ≠ y] = E[(1 − h g)/2]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cube::{self, PointIndex};
use crate::error::{invalid, Error, Result};
use crate::function::{BooleanFunction, BoundedFunction, CubeFunction};
use crate::lp::{self, RegressionSample, SparsePolynomial};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledDistribution {
    g: BoundedFunction,
}

impl LabeledDistribution {
    pub fn new(g: BoundedFunction) -> Result<Self> {
        cube::check_dim(g.n(), lp::MAX_LP_DIM)?;
        Ok(Self { g })
    }

    pub fn n(&self) -> usize {
        self.g.n()
    }

    pub fn conditional_mean(&self) -> &BoundedFunction {
        &self.g
    }

    /// `E[(1 − h g)/2]`
    pub fn error<H: CubeFunction + ?Sized>(&self, h: &H) -> Result<f64> {
        if h.n() != self.n() {
            return Err(Error::DimensionMismatch { left: h.n(), right: self.n() });
        }
        let size = cube::size(self.n());
        let total: f64 = (0..size as PointIndex).map(|x| (1.0 - h.value(x) * self.g.get(x)) / 2.0).sum();
        Ok(total / size as f64)
    }

    /// Exact label distribution as weighted samples; zero weights dropped.
    fn exact_samples(&self) -> Vec<RegressionSample> {
        let scale = cube::size(self.n()) as f64;
        let mut out = Vec::with_capacity(2 * self.g.table().len());
        for (x, &g) in self.g.table().iter().enumerate() {
            for (target, w) in [(1.0, (1.0 + g) / 2.0), (-1.0, (1.0 - g) / 2.0)] {
                if w > 0.0 {
                    out.push(RegressionSample { point: x as PointIndex, target, weight: w / scale });
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum LearnMode {
    Exact,
    Sampled { m: usize, seed: u64, empirical_error: f64, empirical_delta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassComparison {
    pub size: usize,
    /// `min_{c∈C} Pr[c ≠ y]`
    pub opt: f64,
    /// `max_{c∈C} min_p E|c − p|`
    pub class_delta: f64,
    /// `error − OPT`
    pub excess: f64,
    /// `Δ_{P_d}(C)/2 + ε`
    pub excess_bound: f64,
    pub excess_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnReport {
    pub n: usize,
    pub d: usize,
    pub epsilon: f64,
    pub mode: LearnMode,
    pub poly: SparsePolynomial,
    /// `E|y − p(x)|` under the distribution the regression saw.
    pub regression_delta: f64,
    /// `h(x) = 1` iff `p(x) > threshold`.
    pub threshold: f64,
    /// True error `E[(1 − h g)/2]`.
    pub error: f64,
    pub class: Option<ClassComparison>,
    #[serde(skip)]
    pub hypothesis: Option<BooleanFunction>,
}

fn check_degree(n: usize, d: usize) -> Result<()> {
    if d > n {
        return Err(invalid(format!("degree {d} exceeds dimension {n}")));
    }
    Ok(())
}

/// Threshold minimizing `Σ_x w⁺(x)[h(x) = −1] + w⁻(x)[h(x) = +1]` over all
/// breakpoints of `values`. Ties go to the smallest threshold.
///
/// `pos[x]`, `neg[x]` are the label masses at `x`. Returns the threshold and
/// its weighted error.
pub fn best_threshold(values: &[f64], pos: &[f64], neg: &[f64]) -> (f64, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    // Start with every point labelled +1.
    let mut err: f64 = neg.iter().sum();
    let lowest = order.first().map_or(0.0, |&i| values[i]);
    let (mut best_t, mut best_err) = (lowest - 1.0, err);
    let mut i = 0;
    while i < order.len() {
        let v = values[order[i]];
        while i < order.len() && values[order[i]] == v {
            err += pos[order[i]] - neg[order[i]];
            i += 1;
        }
        if err < best_err {
            let next = order.get(i).map_or(v + 1.0, |&j| values[j]);
            best_t = v + (next - v) / 2.0;
            best_err = err;
        }
    }
    (best_t, best_err)
}

fn threshold_hypothesis(n: usize, values: &[f64], t: f64) -> Result<BooleanFunction> {
    BooleanFunction::from_fn(n, |x| values[x as usize] > t)
}

fn compare(
    dist: &LabeledDistribution,
    class: &[BooleanFunction],
    d: usize,
    error: f64,
    epsilon: f64,
) -> Result<ClassComparison> {
    let opt = opt_of_class(class, dist)?;
    let class_delta = class_approximation(class, d)?;
    let excess = error - opt;
    let excess_bound = class_delta / 2.0 + epsilon;
    Ok(ClassComparison {
        size: class.len(),
        opt,
        class_delta,
        excess,
        excess_bound,
        excess_ok: excess <= excess_bound + 1e-12,
    })
}

pub fn learn_exact(
    dist: &LabeledDistribution,
    d: usize,
    epsilon: f64,
    class: Option<&[BooleanFunction]>,
) -> Result<LearnReport> {
    let n = dist.n();
    check_degree(n, d)?;
    if !(epsilon >= 0.0) {
        return Err(invalid(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    let (poly, regression_delta) = lp::l1_regression(n, d, &dist.exact_samples())?;
    let values = poly.table();
    let scale = cube::size(n) as f64;
    let pos: Vec<f64> = dist.g.table().iter().map(|g| (1.0 + g) / 2.0 / scale).collect();
    let neg: Vec<f64> = dist.g.table().iter().map(|g| (1.0 - g) / 2.0 / scale).collect();
    let (threshold, _) = best_threshold(&values, &pos, &neg);
    let h = threshold_hypothesis(n, &values, threshold)?;
    let error = dist.error(&h)?;
    let class = class.map(|c| compare(dist, c, d, error, epsilon)).transpose()?;
    Ok(LearnReport {
        n,
        d,
        epsilon,
        mode: LearnMode::Exact,
        poly,
        regression_delta,
        threshold,
        error,
        class,
        hypothesis: Some(h),
    })
}

pub fn learn_sampled(dist: &LabeledDistribution, d: usize, m: usize, seed: u64) -> Result<LearnReport> {
    let n = dist.n();
    check_degree(n, d)?;
    if m == 0 {
        return Err(invalid("sample count m must be at least 1"));
    }
    let size = cube::size(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![[0usize; 2]; size];
    for _ in 0..m {
        let x = rng.gen_range(0..size);
        let positive = rng.gen::<f64>() < (1.0 + dist.g.get(x as PointIndex)) / 2.0;
        counts[x][usize::from(!positive)] += 1;
    }
    let w = 1.0 / m as f64;
    let mut samples = Vec::new();
    for (x, c) in counts.iter().enumerate() {
        for (target, count) in [(1.0, c[0]), (-1.0, c[1])] {
            if count > 0 {
                samples.push(RegressionSample { point: x as PointIndex, target, weight: count as f64 * w });
            }
        }
    }
    let (poly, empirical_delta) = lp::l1_regression(n, d, &samples)?;
    let values = poly.table();
    let pos: Vec<f64> = counts.iter().map(|c| c[0] as f64 * w).collect();
    let neg: Vec<f64> = counts.iter().map(|c| c[1] as f64 * w).collect();
    let (threshold, empirical_error) = best_threshold(&values, &pos, &neg);
    let h = threshold_hypothesis(n, &values, threshold)?;
    let error = dist.error(&h)?;
    let regression_delta = expected_l1(dist, &poly);
    Ok(LearnReport {
        n,
        d,
        epsilon: 0.0,
        mode: LearnMode::Sampled { m, seed, empirical_error, empirical_delta },
        poly,
        regression_delta,
        threshold,
        error,
        class: None,
        hypothesis: Some(h),
    })
}

/// `E|y − p(x)|` under the true distribution.
fn expected_l1(dist: &LabeledDistribution, poly: &SparsePolynomial) -> f64 {
    let size = cube::size(dist.n());
    let total: f64 = (0..size as PointIndex)
        .map(|x| {
            let (g, p) = (dist.g.get(x), poly.evaluate(x));
            (1.0 + g) / 2.0 * (1.0 - p).abs() + (1.0 - g) / 2.0 * (1.0 + p).abs()
        })
        .sum();
    total / size as f64
}

pub fn opt_of_class(class: &[BooleanFunction], dist: &LabeledDistribution) -> Result<f64> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    class.iter().map(|c| dist.error(c)).try_fold(f64::INFINITY, |best, e| Ok(best.min(e?)))
}

/// `Δ_{P_d}(C) = max_{c∈C} min_p E|c − p|`.
pub fn class_approximation(class: &[BooleanFunction], d: usize) -> Result<f64> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    let mut worst = 0.0f64;
    for c in class {
        let n = c.n();
        let scale = cube::size(n) as f64;
        let samples: Vec<RegressionSample> = c
            .table()
            .iter()
            .enumerate()
            .map(|(x, &v)| RegressionSample { point: x as PointIndex, target: v as f64, weight: 1.0 / scale })
            .collect();
        worst = worst.max(lp::l1_regression(n, d, &samples)?.1);
    }
    Ok(worst)
}

/// The `2n` signed dictators.
pub fn dictator_class(n: usize) -> Result<Vec<BooleanFunction>> {
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        let f = BooleanFunction::from_fn(n, |x| cube::coord(x, i) == 1)?;
        out.push(f.negated());
        out.push(f);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    fn scaled_dictator(n: usize, c: f64) -> LabeledDistribution {
        let g = BoundedFunction::from_fn(n, |x| c * cube::coord(x, 0) as f64).unwrap();
        LabeledDistribution::new(g).unwrap()
    }

    #[test]
    fn noisy_dictator() {
        let dist = scaled_dictator(4, 0.8);
        let class = dictator_class(4).unwrap();
        assert!((opt_of_class(&class, &dist).unwrap() - 0.1).abs() < 1e-15);
        let report = learn_exact(&dist, 1, 0.01, Some(&class)).unwrap();
        assert!(report.error <= 0.1 + 0.01);
        let cmp = report.class.unwrap();
        assert!(cmp.excess_ok);
        assert!(cmp.class_delta.abs() < 1e-9);
    }

    #[test]
    fn parity_labels_defeat_low_degree() {
        let g = zoo::parity(0b111, 4).unwrap().to_bounded();
        let dist = LabeledDistribution::new(g).unwrap();
        let report = learn_exact(&dist, 2, 0.0, None).unwrap();
        assert!((report.regression_delta - 1.0).abs() < 1e-9);
        assert!((report.error - 0.5).abs() < 1e-12);
    }

    #[test]
    fn threshold_sweep_matches_brute_force() {
        let n = 5;
        let g = zoo::random(n, 11).unwrap().to_bounded();
        let g = BoundedFunction::from_fn(n, |x| 0.6 * g.get(x) + 0.1).unwrap();
        let dist = LabeledDistribution::new(g).unwrap();
        let report = learn_exact(&dist, 2, 0.0, None).unwrap();
        let values = report.poly.table();
        let mut cuts: Vec<f64> = values.clone();
        cuts.push(f64::NEG_INFINITY);
        let brute = cuts
            .iter()
            .map(|&t| dist.error(&threshold_hypothesis(n, &values, t).unwrap()).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!((report.error - brute).abs() < 1e-12);
        assert!(report.error <= 0.5 + 1e-12);
    }

    #[test]
    fn opt_examples() {
        let g = BoundedFunction::from_fn(3, |x| if x % 3 == 0 { 0.5 } else { -0.25 }).unwrap();
        let dist = LabeledDistribution::new(g.clone()).unwrap();
        let sign = BooleanFunction::from_fn(3, |x| g.get(x) > 0.0).unwrap();
        let expected = g.table().iter().map(|v| (1.0 - v.abs()) / 2.0).sum::<f64>() / 8.0;
        assert!((opt_of_class(&[sign], &dist).unwrap() - expected).abs() < 1e-15);

        let balanced = LabeledDistribution::new(zoo::majority(3).unwrap().to_bounded()).unwrap();
        let constants = [zoo::constant(3, true).unwrap(), zoo::constant(3, false).unwrap()];
        assert_eq!(opt_of_class(&constants, &balanced).unwrap(), 0.5);
        assert_eq!(opt_of_class(&[], &balanced), Err(Error::EmptyClass));
    }

    #[test]
    fn sampled_mode() {
        let dist = scaled_dictator(4, 0.8);
        assert!(learn_sampled(&dist, 1, 0, 1).is_err());
        let a = learn_sampled(&dist, 1, 20_000, 5).unwrap();
        let b = learn_sampled(&dist, 1, 20_000, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.error <= 0.12);
    }
}
