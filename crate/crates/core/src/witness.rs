//! Bounded `d`-resilient witnesses from low low-degree weight.
//!
//! `ℓ = f_{≤d}`, `h = f − ℓ`, `q = h · 1[|ℓ| ≤ τ]`, `p = q_{>d} / ‖q_{>d}‖_∞`.
//! Tables are carried as integers scaled by `2^n` (for `ℓ`, `q`) and `2^{2n}`
//! (for the projections), so the removal of low coefficients is exact.

use serde::{Deserialize, Serialize};

use crate::cube::{self, SubsetMask};
use crate::error::{invalid, Error, Result};
use crate::fourier::{self, fwht, integer_spectrum, ResilienceCheck};
use crate::function::{BooleanFunction, BoundedFunction, CubeFunction};

pub const MAX_WITNESS_DIM: usize = 22;
/// Dimension up to which the rational check on `p` is also run.
pub const EXACT_CHECK_DIM: usize = 12;
pub const WITNESS_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessParams {
    pub d: usize,
    pub tau: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub n: usize,
    pub d: usize,
    pub tau: f64,
    /// `Σ_{|S|≤d} f̂(S)²`
    pub gamma: f64,
    pub ell_sup: f64,
    /// `Pr[|ℓ(x)| > τ]`
    pub delta_emp: f64,
    pub q_sup: f64,
    /// `E[q f]`
    pub corr_qf: f64,
    /// `‖q_{≤d}‖_∞`
    pub low_part_sup: f64,
    /// `‖q_{>d}‖_∞`
    pub high_sup: f64,
    /// `E[p f]`
    pub corr_pf: f64,
    /// `(1 − τ)(1 − δ)`
    pub corr_qf_bound: f64,
    /// `(E[qf] − ‖q_{≤d}‖_∞) / (‖q‖_∞ + ‖q_{≤d}‖_∞)`
    pub proof_chain_bound: f64,
    pub resilience: ResilienceCheck,
    /// Exact zero test of the scaled integer table of `p`; `None` above
    /// [`EXACT_CHECK_DIM`].
    pub exact_resilient: Option<bool>,
    pub range_ok: bool,
    pub corr_qf_ok: bool,
    pub proof_chain_ok: bool,
    #[serde(skip)]
    pub p: Option<BoundedFunction>,
}

impl WitnessReport {
    pub fn p(&self) -> Option<&BoundedFunction> {
        self.p.as_ref()
    }

    /// Resilience and boundedness of `p`, the properties that hold for every τ.
    pub fn certified(&self) -> bool {
        self.resilience.resilient && self.exact_resilient != Some(false) && self.range_ok
    }
}

fn check(n: usize, d: usize) -> Result<()> {
    cube::check_dim(n, MAX_WITNESS_DIM)?;
    if d > n {
        return Err(invalid(format!("degree {d} exceeds dimension {n}")));
    }
    Ok(())
}

/// `2^n ℓ(x)` for every `x`.
fn scaled_low_part(f: &BooleanFunction, d: usize) -> Vec<i64> {
    let mut spec = integer_spectrum(f);
    for (m, c) in spec.iter_mut().enumerate() {
        if cube::degree(m as SubsetMask) > d {
            *c = 0;
        }
    }
    fwht(&mut spec);
    spec
}

pub fn build_witness(f: &BooleanFunction, params: WitnessParams) -> Result<WitnessReport> {
    let n = f.n();
    let WitnessParams { d, tau } = params;
    check(n, d)?;
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(invalid(format!("tau must be positive, got {tau}")));
    }
    let size = cube::size(n);
    let scale = size as f64;
    let big = scale * scale;

    let ell = scaled_low_part(f, d);
    let cut = tau * scale;
    let mut removed = 0usize;
    // 2^n q
    let q: Vec<i128> = ell
        .iter()
        .zip(f.table())
        .map(|(&l, &v)| {
            if (l as f64).abs() > cut {
                removed += 1;
                0
            } else {
                v as i128 * size as i128 - l as i128
            }
        })
        .collect();

    // 2^{2n} q_{>d}
    let mut high = q.clone();
    fwht(&mut high);
    for (m, c) in high.iter_mut().enumerate() {
        if cube::degree(m as SubsetMask) <= d {
            *c = 0;
        }
    }
    fwht(&mut high);
    let high_max = high.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
    if high_max == 0 {
        return Err(Error::DegenerateHighPart);
    }

    let mut corr_qf = 0i128;
    let mut corr_high = 0i128;
    let mut low_max = 0u128;
    for x in 0..size {
        let v = f.table()[x] as i128;
        corr_qf += v * q[x];
        corr_high += v * high[x];
        low_max = low_max.max((q[x] * size as i128 - high[x]).unsigned_abs());
    }
    let corr_qf = corr_qf as f64 / big;
    let low_part_sup = low_max as f64 / big;
    let high_sup = high_max as f64 / big;
    let q_sup = q.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) as f64 / scale;
    let corr_pf = corr_high as f64 / (high_max as f64 * scale);

    let p = BoundedFunction::new(n, high.iter().map(|&c| c as f64 / high_max as f64).collect())?;
    let resilience = fourier::is_d_resilient(&p, d, WITNESS_TOL)?;
    let exact_resilient = (n <= EXACT_CHECK_DIM).then(|| {
        let mut spec = high.clone();
        fwht(&mut spec);
        spec.iter().enumerate().all(|(m, &c)| cube::degree(m as SubsetMask) > d || c == 0)
    });

    let delta_emp = removed as f64 / scale;
    let corr_qf_bound = (1.0 - tau) * (1.0 - delta_emp);
    let proof_chain_bound = (corr_qf - low_part_sup) / (q_sup + low_part_sup);
    let gamma = fourier::wht(f)?.low_weight(d);
    Ok(WitnessReport {
        n,
        d,
        tau,
        gamma,
        ell_sup: ell.iter().map(|l| l.unsigned_abs()).max().unwrap_or(0) as f64 / scale,
        delta_emp,
        q_sup,
        corr_qf,
        low_part_sup,
        high_sup,
        corr_pf,
        corr_qf_bound,
        proof_chain_bound,
        resilience,
        exact_resilient,
        range_ok: q_sup <= 1.0 + tau + WITNESS_TOL && p.sup_norm() <= 1.0 + 1e-12,
        corr_qf_ok: corr_qf >= corr_qf_bound - WITNESS_TOL,
        proof_chain_ok: corr_pf >= proof_chain_bound - WITNESS_TOL,
        p: Some(p),
    })
}

/// One report per τ; failures are kept in place.
pub fn witness_sweep(f: &BooleanFunction, d: usize, taus: &[f64]) -> Vec<Result<WitnessReport>> {
    taus.iter().map(|&tau| build_witness(f, WitnessParams { d, tau })).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationProbe {
    pub t: f64,
    /// `‖f_{≤d}‖₂`
    pub p2norm_lowpart: f64,
    /// `Pr[|f_{≤d}(x)| ≥ t ‖f_{≤d}‖₂]`
    pub tail_prob: f64,
}

pub fn concentration_probe(f: &BooleanFunction, d: usize, t: f64) -> Result<ConcentrationProbe> {
    Ok(concentration_curve(f, d, &[t])?[0])
}

/// Tail probabilities of the degree-`d` part for several `t` at once.
pub fn concentration_curve(f: &BooleanFunction, d: usize, ts: &[f64]) -> Result<Vec<ConcentrationProbe>> {
    let n = f.n();
    check(n, d)?;
    if ts.iter().any(|&t| !(t > 0.0)) {
        return Err(invalid("tail thresholds must be positive"));
    }
    let scale = cube::size(n) as f64;
    let ell = scaled_low_part(f, d);
    let norm = (ell.iter().map(|&l| (l as f64 / scale).powi(2)).sum::<f64>() / scale).sqrt();
    Ok(ts
        .iter()
        .map(|&t| {
            let cut = t * norm * scale;
            let hits = ell.iter().filter(|&&l| (l as f64).abs() >= cut).count();
            ConcentrationProbe { t, p2norm_lowpart: norm, tail_prob: hits as f64 / scale }
        })
        .collect())
}

/// `ℓ(x)` as a real table, for callers that want to inspect it.
pub fn low_part_table(f: &BooleanFunction, d: usize) -> Result<Vec<f64>> {
    check(f.n(), d)?;
    let scale = cube::size(f.n()) as f64;
    Ok(scaled_low_part(f, d).into_iter().map(|l| l as f64 / scale).collect())
}

/// `E[p f]` recomputed from the tables.
pub fn witness_correlation(f: &BooleanFunction, p: &BoundedFunction) -> Result<f64> {
    fourier::correlation(f, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::PointIndex;
    use crate::zoo;

    #[test]
    fn parity_passes_through() {
        let f = zoo::parity(0b111, 4).unwrap();
        for tau in [0.1, 0.5, 2.0] {
            let r = build_witness(&f, WitnessParams { d: 2, tau }).unwrap();
            assert_eq!(r.delta_emp, 0.0);
            assert_eq!(r.corr_pf, 1.0);
            assert_eq!(r.p().unwrap().table(), f.to_bounded().table());
        }
    }

    #[test]
    fn majority_three() {
        let f = zoo::majority(3).unwrap();
        let ell = low_part_table(&f, 1).unwrap();
        // ℓ = (x1 + x2 + x3)/2
        for x in 0..8 {
            assert_eq!(ell[x], cube::coord_sum(x as PointIndex, 3) as f64 / 2.0);
        }
        let r = build_witness(&f, WitnessParams { d: 1, tau: 0.9 }).unwrap();
        assert_eq!(r.delta_emp, 0.25);
        assert!(r.certified() && r.corr_qf_ok && r.proof_chain_ok);
        assert_eq!(r.exact_resilient, Some(true));
    }

    #[test]
    fn low_degree_input_is_degenerate() {
        let f = zoo::dictator(1, 3).unwrap();
        assert_eq!(build_witness(&f, WitnessParams { d: 1, tau: 0.5 }), Err(Error::DegenerateHighPart));
        assert!(build_witness(&f, WitnessParams { d: 1, tau: 0.0 }).is_err());
    }

    #[test]
    fn tribes_witness_is_certified() {
        let f = zoo::tribes(3, 4).unwrap();
        for r in witness_sweep(&f, 1, &[0.2, 0.3, 0.5]) {
            let r = r.unwrap();
            assert!(r.certified());
            assert!(r.corr_qf_ok && r.proof_chain_ok);
            let direct = witness_correlation(&f, r.p().unwrap()).unwrap();
            assert!((direct - r.corr_pf).abs() < 1e-12);
        }
    }

    #[test]
    fn tribes_small_tau_removes_everything() {
        // ℓ = a + b·Σx with Σx even; no level lands in [−0.1, 0.1].
        let a = zoo::tribes_coefficient(3, 4, 0).unwrap();
        let b = zoo::tribes_coefficient(3, 4, 1).unwrap();
        let closest = (-6..=6).map(|k| (a + b * (2 * k) as f64).abs()).fold(f64::INFINITY, f64::min);
        assert!(closest > 0.1);
        let f = zoo::tribes(3, 4).unwrap();
        assert_eq!(build_witness(&f, WitnessParams { d: 1, tau: 0.1 }), Err(Error::DegenerateHighPart));
        let r = build_witness(&f, WitnessParams { d: 1, tau: closest + 1e-9 }).unwrap();
        assert!(r.certified());
    }

    #[test]
    fn concentration_examples() {
        let dict = zoo::dictator(1, 4).unwrap();
        assert_eq!(concentration_probe(&dict, 1, 2.0).unwrap().tail_prob, 0.0);
        let maj = zoo::majority(3).unwrap();
        let probe = concentration_probe(&maj, 1, 1.5).unwrap();
        assert!((probe.p2norm_lowpart - 0.75f64.sqrt()).abs() < 1e-15);
        assert_eq!(probe.tail_prob, 0.25);
        let tribes = zoo::tribes(2, 3).unwrap();
        let ts: Vec<f64> = (1..=12).map(|i| i as f64 * 0.25).collect();
        let curve = concentration_curve(&tribes, 1, &ts).unwrap();
        assert!(curve.windows(2).all(|w| w[1].tail_prob <= w[0].tail_prob));
    }
}
