//! Greedy repair of CycleRun into a balanced, exactly 1-resilient function.
//!
//! Points are flipped one shift orbit at a time. Every orbit is closed under
//! cyclic shifts and negation, so each flip lowers all first-level
//! coefficients by the same amount and leaves the mean at zero. `σ` tracks
//! `2^n Σ_j f̂({j})` in exact integers and the loop stops when it reaches 0.

use serde::{Deserialize, Serialize};

use crate::cube::{self, PointIndex};
use crate::error::{invalid, Error, Result};
use crate::function::{BooleanFunction, CubeFunction};
use crate::zoo;

pub const MIN_BUILD_DIM: usize = 5;
pub const MAX_BUILD_DIM: usize = 21;
pub const DEFAULT_C1: f64 = 8.0;

/// All cyclic shifts of `x` and of `−x`, sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orbit {
    pub representative: PointIndex,
    pub members: Vec<PointIndex>,
}

pub fn shift_orbit(x: PointIndex, n: usize) -> Orbit {
    let neg = cube::negate(x, n);
    let mut members: Vec<PointIndex> = (0..n).flat_map(|a| [cube::rotate(x, n, a), cube::rotate(neg, n, a)]).collect();
    members.sort_unstable();
    members.dedup();
    Orbit { representative: x, members }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Step {
    /// Flip the orbit of the heaviest remaining point.
    Heavy,
    /// Flip the orbit of the heaviest point and stop at `σ = 0`.
    Exact,
    /// Flip the orbit of a weight-one point, lowering `σ` by `4n`.
    WeightOne,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub step: Step,
    pub representative: PointIndex,
    /// `|x| = Σ x_i` of the representative.
    pub weight: i64,
    pub orbit_size: usize,
    pub sigma_before: i64,
    pub sigma_after: i64,
}

/// Mutable state of the greedy loop.
#[derive(Clone, Debug)]
pub struct BuilderState {
    pub n: usize,
    pub in_sbar: Vec<bool>,
    pub sbar: usize,
    pub sbar_prime: usize,
    pub sigma: i64,
    pub iteration: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BuilderReport {
    pub n: usize,
    pub c1: f64,
    /// Largest `|S̄|` the loop guard admits.
    pub budget_points: f64,
    pub initial_sigma: i64,
    pub final_sigma: i64,
    pub sbar_size: usize,
    pub sbar_prime_size: usize,
    pub log: Vec<IterationRecord>,
    /// `Pr[f ≠ CycleRun] = |S̄| / 2^n`
    pub distance: f64,
    /// `distance / √(ln n / n)`
    pub distance_ratio: f64,
    /// `|S̄| / budget_points`
    pub budget_used: f64,
    /// `2^n f̂(∅)` of the output.
    pub mean_certificate: i64,
    /// `2^n f̂({j})` of the output for every `j`.
    pub first_level_certificate: Vec<i64>,
    #[serde(skip)]
    pub function: Option<BooleanFunction>,
}

impl BuilderReport {
    pub fn function(&self) -> Option<&BooleanFunction> {
        self.function.as_ref()
    }
}

fn log_ratio(n: usize) -> f64 {
    ((n as f64).ln() / n as f64).sqrt()
}

/// `Σ_x f(x)` and `Σ_x f(x) x_j` for each `j`.
fn low_certificates(f: &BooleanFunction) -> (i64, Vec<i64>) {
    let n = f.n();
    let mut first = vec![0i64; n];
    let mut mean = 0i64;
    for (x, &v) in f.table().iter().enumerate() {
        let v = v as i64;
        mean += v;
        for (j, c) in first.iter_mut().enumerate() {
            *c += v * cube::coord(x as PointIndex, j) as i64;
        }
    }
    (mean, first)
}

impl BuilderState {
    fn flip(&mut self, orbit: &Orbit, table: &mut [i8]) -> Result<()> {
        let mut plus = 0;
        for &y in &orbit.members {
            if self.in_sbar[y as usize] {
                return Err(Error::Certificate(format!("point {y} flipped twice")));
            }
            self.in_sbar[y as usize] = true;
            if table[y as usize] == 1 {
                plus += 1;
            }
            table[y as usize] = -table[y as usize];
        }
        if 2 * plus != orbit.members.len() {
            return Err(Error::Certificate(format!(
                "orbit of {} has {plus} of {} points at +1",
                orbit.representative,
                orbit.members.len()
            )));
        }
        self.sbar += orbit.members.len();
        Ok(())
    }
}

pub fn build_one_resilient(n: usize, c1: f64) -> Result<BuilderReport> {
    if n % 2 == 0 || !(MIN_BUILD_DIM..=MAX_BUILD_DIM).contains(&n) {
        return Err(invalid(format!("builder needs odd n in [{MIN_BUILD_DIM}, {MAX_BUILD_DIM}], got {n}")));
    }
    if !(c1 > 0.0) || !c1.is_finite() {
        return Err(invalid(format!("c1 must be positive, got {c1}")));
    }
    let cyclerun = zoo::cyclerun(n)?;
    let size = cube::size(n);
    let budget_points = c1 * log_ratio(n) * size as f64;
    let (_, first) = low_certificates(&cyclerun);
    let initial_sigma: i64 = first.iter().sum();

    let weight = |x: PointIndex| cube::coord_sum(x, n) as i64;
    // CycleRun(x) = 1 points by decreasing |x|, then increasing index.
    let mut heavy: Vec<PointIndex> = (0..size as PointIndex).filter(|&x| cyclerun.get(x) == 1).collect();
    heavy.sort_by_key(|&x| (-weight(x), x));
    let unit: Vec<PointIndex> = heavy.iter().copied().filter(|&x| weight(x) == 1).collect();
    let (mut next_heavy, mut next_unit) = (0usize, 0usize);

    let mut table = cyclerun.table().to_vec();
    let mut state =
        BuilderState { n, in_sbar: vec![false; size], sbar: 0, sbar_prime: 0, sigma: initial_sigma, iteration: 0 };
    let mut log = Vec::new();

    while state.sigma != 0 {
        if state.sbar as f64 > budget_points {
            return Err(Error::BudgetExhausted { sigma: state.sigma, flipped: state.sbar });
        }
        while next_heavy < heavy.len() && state.in_sbar[heavy[next_heavy] as usize] {
            next_heavy += 1;
        }
        let Some(&x) = heavy.get(next_heavy) else {
            return Err(Error::BudgetExhausted { sigma: state.sigma, flipped: state.sbar });
        };
        let orbit = shift_orbit(x, n);
        let drop = 2 * orbit.members.len() as i64 * weight(x);
        let sigma_before = state.sigma;
        state.iteration += 1;

        let (step, orbit) = if sigma_before - drop < 0 {
            while next_unit < unit.len() && state.in_sbar[unit[next_unit] as usize] {
                next_unit += 1;
            }
            let Some(&xs) = unit.get(next_unit) else {
                return Err(Error::NoWeightOnePoint { iteration: state.iteration, sigma: state.sigma });
            };
            let orbit = shift_orbit(xs, n);
            state.sbar_prime += orbit.members.len();
            (Step::WeightOne, orbit)
        } else if sigma_before - drop == 0 {
            (Step::Exact, orbit)
        } else {
            (Step::Heavy, orbit)
        };
        state.flip(&orbit, &mut table)?;
        let x = orbit.representative;
        state.sigma -= 2 * orbit.members.len() as i64 * weight(x);
        if step == Step::WeightOne && sigma_before - state.sigma != 4 * n as i64 {
            return Err(Error::Certificate(format!("weight-one orbit of {x} did not lower sigma by 4n")));
        }
        log.push(IterationRecord {
            iteration: state.iteration,
            step,
            representative: x,
            weight: weight(x),
            orbit_size: orbit.members.len(),
            sigma_before,
            sigma_after: state.sigma,
        });
    }

    let f = BooleanFunction::new(n, table)?;
    let (mean_certificate, first_level_certificate) = low_certificates(&f);
    if mean_certificate != 0 || first_level_certificate.iter().any(|&c| c != 0) {
        return Err(Error::Certificate(format!(
            "output not 1-resilient: mean {mean_certificate}, first level {first_level_certificate:?}"
        )));
    }
    let distance = state.sbar as f64 / size as f64;
    Ok(BuilderReport {
        n,
        c1,
        budget_points,
        initial_sigma,
        final_sigma: state.sigma,
        sbar_size: state.sbar,
        sbar_prime_size: state.sbar_prime,
        log,
        distance,
        distance_ratio: distance / log_ratio(n),
        budget_used: state.sbar as f64 / budget_points,
        mean_certificate,
        first_level_certificate,
        function: Some(f),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditOutcome {
    pub holds: bool,
    /// Iteration at which an invariant first failed; 0 is the initial state.
    pub failed_iteration: Option<usize>,
    pub detail: Option<String>,
}

impl AuditOutcome {
    fn fail(iteration: usize, detail: String) -> Self {
        Self { holds: false, failed_iteration: Some(iteration), detail: Some(detail) }
    }
}

/// Replays the log from CycleRun and checks, after every iteration, that
/// all first-level coefficients agree, that they sum to `σ`, and that `σ` is
/// a nonnegative multiple of `4n`.
pub fn audit_invariants(report: &BuilderReport) -> AuditOutcome {
    let n = report.n;
    let f = match zoo::cyclerun(n) {
        Ok(f) => f,
        Err(e) => return AuditOutcome::fail(0, e.to_string()),
    };
    let mut table = f.table().to_vec();
    let (mut mean, mut first) = low_certificates(&f);
    let mut flipped = vec![false; cube::size(n)];
    let modulus = 4 * n as i64;

    let check = |iteration: usize, sigma: i64, mean: i64, first: &[i64]| -> Option<AuditOutcome> {
        if first.iter().any(|&c| c != first[0]) {
            return Some(AuditOutcome::fail(iteration, format!("first-level coefficients differ: {first:?}")));
        }
        let sum: i64 = first.iter().sum();
        if sum != sigma {
            return Some(AuditOutcome::fail(iteration, format!("sigma {sigma} but coefficient sum {sum}")));
        }
        if sigma < 0 || sigma % modulus != 0 {
            return Some(AuditOutcome::fail(
                iteration,
                format!("sigma {sigma} is not a nonnegative multiple of {modulus}"),
            ));
        }
        if mean != 0 {
            return Some(AuditOutcome::fail(iteration, format!("mean changed to {mean}")));
        }
        None
    };

    if let Some(bad) = check(0, report.initial_sigma, mean, &first) {
        return bad;
    }
    let mut sigma = report.initial_sigma;
    for rec in &report.log {
        if rec.sigma_before != sigma {
            return AuditOutcome::fail(
                rec.iteration,
                format!("sigma_before {} but previous sigma {sigma}", rec.sigma_before),
            );
        }
        let orbit = shift_orbit(rec.representative, n);
        for &y in &orbit.members {
            if std::mem::replace(&mut flipped[y as usize], true) {
                return AuditOutcome::fail(rec.iteration, format!("point {y} flipped twice"));
            }
            let v = table[y as usize] as i64;
            mean -= 2 * v;
            for (j, c) in first.iter_mut().enumerate() {
                *c -= 2 * v * cube::coord(y, j) as i64;
            }
            table[y as usize] = -table[y as usize];
        }
        sigma = rec.sigma_after;
        if let Some(bad) = check(rec.iteration, sigma, mean, &first) {
            return bad;
        }
    }
    if sigma != report.final_sigma || sigma != 0 {
        let last = report.log.last().map_or(0, |r| r.iteration);
        return AuditOutcome::fail(last, format!("terminal sigma {sigma}, reported {}", report.final_sigma));
    }
    AuditOutcome { holds: true, failed_iteration: None, detail: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::index_of;

    #[test]
    fn orbit_sizes() {
        let ones = shift_orbit(0, 5);
        assert_eq!(ones.members, vec![0, 31]);
        // Two −1 coordinates out of 5: weight coprime to n.
        assert_eq!(shift_orbit(index_of(&[1, -1, 1, -1, 1]), 5).members.len(), 10);
        // Period 3 at n = 9.
        let x = index_of(&[1, 1, -1, 1, 1, -1, 1, 1, -1]);
        assert_eq!(shift_orbit(x, 9).members.len(), 6);
    }

    #[test]
    fn orbits_partition_small_cubes() {
        for n in [5, 7] {
            let mut owner = vec![None; cube::size(n)];
            for x in 0..cube::size(n) as PointIndex {
                let orbit = shift_orbit(x, n);
                assert_eq!((2 * n) % orbit.members.len(), 0);
                let key = orbit.members[0];
                for &y in &orbit.members {
                    assert!(owner[y as usize].map_or(true, |k| k == key));
                    owner[y as usize] = Some(key);
                }
            }
        }
    }

    #[test]
    fn builds_at_five() {
        let report = build_one_resilient(5, DEFAULT_C1).unwrap();
        assert_eq!(report.final_sigma, 0);
        let f = report.function().unwrap();
        assert!(f.is_balanced());
        assert!(crate::fourier::is_d_resilient_exact(f, 1).resilient);
        assert_eq!(report.distance * 32.0, report.sbar_size as f64);
        // All-ones first: orbit {1^n, −1^n}, drop 2·2·n.
        let first = report.log[0];
        assert_eq!((first.representative, first.orbit_size), (0, 2));
        assert_eq!(first.sigma_before - first.sigma_after, 4 * 5);
        assert!(audit_invariants(&report).holds);
    }

    #[test]
    fn initial_sigma_is_multiple_of_4n() {
        for n in [5, 7, 9, 11, 13] {
            let f = zoo::cyclerun(n).unwrap();
            let (_, first) = low_certificates(&f);
            let sigma: i64 = first.iter().sum();
            assert!(sigma > 0 && sigma % (4 * n as i64) == 0, "n={n} sigma={sigma}");
        }
    }

    #[test]
    fn audit_pinpoints_corruption() {
        let mut report = build_one_resilient(7, DEFAULT_C1).unwrap();
        let k = report.log.len() / 2;
        report.log[k].sigma_after += 4;
        let audit = audit_invariants(&report);
        assert!(!audit.holds);
        assert_eq!(audit.failed_iteration, Some(report.log[k].iteration));
    }

    #[test]
    fn tiny_budget_is_reported() {
        assert!(matches!(build_one_resilient(9, 1e-6), Err(Error::BudgetExhausted { .. })));
        assert!(build_one_resilient(6, 8.0).is_err());
        assert!(build_one_resilient(23, 8.0).is_err());
    }
}
