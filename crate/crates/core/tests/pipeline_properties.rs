use proptest::prelude::*;
use resil_core::amplify::{self, compose, resilience_order, self_compose};
use resil_core::builder::shift_orbit;
use resil_core::cube::{self, PointIndex, SubsetMask};
use resil_core::design::{self, CandidateOrder};
use resil_core::error::Error;
use resil_core::fourier::{self, wht};
use resil_core::learn::{self, best_threshold, LabeledDistribution};
use resil_core::lp;
use resil_core::witness::{build_witness, WitnessParams};
use resil_core::{zoo, BoundedFunction, CubeFunction, FnSpec};

fn bounded(n: usize) -> impl Strategy<Value = BoundedFunction> {
    prop::collection::vec(-1.0f64..=1.0, 1 << n).prop_map(move |t| BoundedFunction::new(n, t).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_orbits_are_closed_and_split_evenly(half in 2usize..=7, x in any::<u32>()) {
        let n = 2 * half + 1;
        let x = x & (cube::size(n) as PointIndex - 1);
        let orbit = shift_orbit(x, n);
        prop_assert_eq!((2 * n) % orbit.members.len(), 0);
        prop_assert!(orbit.members.windows(2).all(|w| w[0] < w[1]));
        for &y in &orbit.members {
            prop_assert!(orbit.members.binary_search(&cube::rotate(y, n, 1)).is_ok());
            prop_assert!(orbit.members.binary_search(&cube::negate(y, n)).is_ok());
        }
        let ones = orbit.members.iter().filter(|&&y| zoo::cyclerun_value(y, n).0 == 1).count();
        prop_assert_eq!(2 * ones, orbit.members.len());
    }

    #[test]
    fn threshold_family_is_odd_symmetric_and_monotone(n in 1usize..=40, t in 0.0f64..3.0) {
        let f = zoo::threshold_ft(t, n).unwrap();
        for k in 0..=n {
            prop_assert_eq!(f.levels[k], -f.levels[n - k]);
        }
        // Σx = n − 2k decreases with k.
        prop_assert!(f.levels.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(f.levels.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn best_threshold_matches_exhaustive_sweep(
        values in prop::collection::vec(-4i32..=4, 16),
        pos in prop::collection::vec(0.0f64..1.0, 16),
        neg in prop::collection::vec(0.0f64..1.0, 16),
    ) {
        let values: Vec<f64> = values.into_iter().map(|v| v as f64 / 2.0).collect();
        let error_at = |t: f64| -> f64 {
            values.iter().zip(pos.iter().zip(&neg)).map(|(&v, (&p, &q))| if v > t { q } else { p }).sum()
        };
        let lowest = values.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
        let brute = values.iter().cloned().chain([lowest]).map(error_at).fold(f64::INFINITY, f64::min);
        let (t, err) = best_threshold(&values, &pos, &neg);
        prop_assert!((err - brute).abs() <= 1e-12);
        prop_assert!((error_at(t) - err).abs() <= 1e-12);
    }

    #[test]
    fn composition_stays_bounded((outer, inner) in (bounded(3), bounded(2))) {
        let c = compose(&outer, &inner).unwrap().materialize().unwrap();
        prop_assert_eq!(c.n(), 6);
        prop_assert!(c.table().iter().all(|v| v.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn embedding_preserves_resilience_and_distance(
        k in 2usize..=5,
        extra in 0usize..=4,
        placement in any::<u64>(),
        f_seed in any::<u64>(),
        g_seed in any::<u64>(),
    ) {
        let n = k + extra;
        let mut coords: Vec<usize> = (1..=n).collect();
        let mut state = placement;
        for i in (1..coords.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            coords.swap(i, (state >> 33) as usize % (i + 1));
        }
        let set = cube::mask_of(&coords[..k], n).unwrap();

        let base_mask: SubsetMask = (1 << k) - 1;
        let parity = zoo::parity(base_mask, k).unwrap().to_bounded();
        let lifted = design::embed(&parity, set, n).unwrap();
        let spectrum = wht(&lifted).unwrap();
        for (m, &c) in spectrum.coeffs().iter().enumerate() {
            if c != 0.0 {
                prop_assert_eq!(m as SubsetMask & !set, 0);
            }
        }
        prop_assert!(fourier::resilience_of(&spectrum, k - 1, 1e-12).resilient);

        let f = zoo::random(k, f_seed).unwrap().to_bounded();
        let g = zoo::random(k, g_seed).unwrap().to_bounded();
        let small = fourier::l1_distance(&f, &g).unwrap();
        let big = fourier::l1_distance(&design::embed(&f, set, n).unwrap(), &design::embed(&g, set, n).unwrap()).unwrap();
        prop_assert!((small - big).abs() <= 1e-12);
    }

    #[test]
    fn greedy_designs_are_valid(n in 3usize..=10, k in 1usize..=5, d in 0usize..=3, seed in prop::option::of(any::<u64>())) {
        prop_assume!(d < k && k <= n);
        let order = seed.map_or(CandidateOrder::Lexicographic, |seed| CandidateOrder::Shuffled { seed });
        let des = design::greedy_design(n, k, d, order).unwrap();
        for (i, &a) in des.sets.iter().enumerate() {
            prop_assert_eq!(a.count_ones() as usize, k);
            for &b in &des.sets[i + 1..] {
                prop_assert!((a & b).count_ones() as usize <= d);
            }
        }
    }

    #[test]
    fn spec_strings_round_trip(w in 1usize..=4, s in 1usize..=4, n in 1usize..=9, seed in any::<u64>()) {
        for spec in [
            format!("tribes:w={w},s={s}"),
            format!("random:n={n},seed={seed}"),
            format!("majority:n={}", 2 * n + 1),
            format!("dictator:n={n},i={}", 1 + seed as usize % n),
        ] {
            let parsed: FnSpec = spec.parse().unwrap();
            prop_assert_eq!(parsed.to_string(), spec);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn witness_succeeds_with_a_certified_p_or_degenerates(
        half in 3usize..=4,
        seed in any::<u64>(),
        d in 1usize..=2,
        tau in 0.02f64..0.6,
    ) {
        let f = zoo::random_balanced(2 * half, seed).unwrap();
        match build_witness(&f, WitnessParams { d, tau }) {
            Ok(r) => {
                let p = r.p().unwrap();
                prop_assert!(p.sup_norm() <= 1.0 + 1e-12);
                prop_assert_eq!(r.exact_resilient, Some(true));
                prop_assert!(r.resilience.resilient);
                let alpha = lp::distance_to_resilience(&f, d).unwrap().alpha;
                prop_assert!(r.corr_pf <= 1.0 - alpha + 1e-6);
                if r.corr_qf >= r.low_part_sup {
                    prop_assert!(r.proof_chain_ok);
                }
            }
            Err(e) => prop_assert_eq!(e, Error::DegenerateHighPart),
        }
    }

    #[test]
    fn learner_excess_stays_within_bound(g in bounded(4), d in 0usize..=2) {
        let dist = LabeledDistribution::new(g).unwrap();
        let class = learn::dictator_class(4).unwrap();
        let report = learn::learn_exact(&dist, d, 0.0, Some(&class)).unwrap();
        let c = report.class.unwrap();
        prop_assert!(c.excess <= c.class_delta / 2.0 + 1e-9);
    }

    #[test]
    fn triangle_steps_hold(f_seed in any::<u64>(), h_seed in any::<u64>()) {
        let f = zoo::random_balanced(3, f_seed).unwrap();
        let h = zoo::random_balanced(3, h_seed).unwrap();
        let g = BoundedFunction::new(3, f.table().iter().zip(h.table()).map(|(&a, &b)| (a + b) as f64 / 2.0).collect()).unwrap();
        let r = amplify::amplification_report(&f, &g, 1, 0, 0).unwrap();
        prop_assert_eq!(r.triangle.len(), 1);
        prop_assert!(r.triangle.iter().all(|t| t.holds));
    }
}

#[test]
fn parity_self_composition_is_tight() {
    for (m, k) in [(2usize, 1usize), (2, 2), (2, 3), (3, 1), (4, 1)] {
        let p = zoo::parity((1 << m) - 1, m).unwrap().to_bounded();
        let c = self_compose(&p, k).unwrap();
        let arity = m.pow(k as u32 + 1);
        assert_eq!(c.arity(), arity);
        let order = resilience_order(&wht(&c.materialize().unwrap()).unwrap(), 1e-10);
        // (d+1)^{k+1} − 1 with d = m − 1.
        assert_eq!(order, Some(arity - 1), "m={m} k={k}");
    }
}
