//! Property-based invariants across the library, generated with proptest.
//!
//! Exact (bitwise) assertions use dyadic-valued functions, which keep every
//! window sum and measure exactly representable; generic float inputs get
//! rounding slack instead.

use proptest::prelude::*;

use maxlorentz::lorentz::{lambda_norm, lambda_weak_norm, LorentzParams};
use maxlorentz::maximal::{level_set, maximal_fast, maximal_naive};
use maxlorentz::measure::{measure_u, GridDomain, GridFunction, GridSet, WeightSpec, WeightU};
use maxlorentz::rearrange::{distribution, hardy, rearrangement, DecreasingStep};
use maxlorentz::verify::corollary_inclusion_check;
use maxlorentz::weight::WeightW;

fn grid_values(max_cells: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..4.0, 1..max_cells)
}

fn dyadic_values(max_cells: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u8..64).prop_map(|v| v as f64 / 16.0), 1..max_cells)
}

fn function_1d(values: Vec<f64>) -> GridFunction<f64> {
    let domain = GridDomain::line(2.0, values.len()).unwrap();
    GridFunction::from_values(domain, values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fast_kernel_matches_oracle_1d(values in grid_values(96)) {
        let f = function_1d(values);
        let naive = maximal_naive(&f);
        let fast = maximal_fast(&f);
        prop_assert_eq!(naive.values(), fast.values());
    }

    #[test]
    fn fast_kernel_matches_oracle_2d(values in prop::collection::vec(0.0f64..4.0, 1..49)) {
        let n = (values.len() as f64).sqrt().floor() as usize;
        prop_assume!(n >= 1);
        let domain = GridDomain::square(1.5, n).unwrap();
        let f = GridFunction::from_values(domain, values[..n * n].to_vec()).unwrap();
        let naive = maximal_naive(&f);
        let fast = maximal_fast(&f);
        prop_assert_eq!(naive.values(), fast.values());
    }

    #[test]
    fn maximal_dominates_and_is_bounded(values in dyadic_values(80)) {
        let f = function_1d(values);
        let m = maximal_fast(&f);
        let sup = f.max_value();
        for i in 0..f.domain().cell_count() {
            prop_assert!(m.value(i) >= f.value(i));
            prop_assert!(m.value(i) <= sup);
        }
    }

    #[test]
    fn maximal_monotone_on_dyadic_pairs(
        base in dyadic_values(64),
        bump in prop::collection::vec((0u8..32).prop_map(|v| v as f64 / 16.0), 64),
    ) {
        let n = base.len();
        let f = function_1d(base.clone());
        let g_vals: Vec<f64> = base.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let g = function_1d(g_vals);
        let mf = maximal_fast(&f);
        let mg = maximal_fast(&g);
        for i in 0..n {
            prop_assert!(mf.value(i) <= mg.value(i));
        }
    }

    #[test]
    fn dyadic_homogeneity_is_bitwise(values in grid_values(64), k in -2i32..3) {
        let c = 2f64.powi(k);
        let f = function_1d(values);
        let scaled = maximal_fast(&f.scale(c).unwrap());
        let reference = maximal_fast(&f);
        for i in 0..f.domain().cell_count() {
            prop_assert_eq!(scaled.value(i), c * reference.value(i));
        }
    }

    #[test]
    fn rearrangement_is_equimeasurable_and_mass_conserving(values in grid_values(96)) {
        let f = function_1d(values);
        let star = rearrangement(&f);
        for &t in &[0.0, 0.3, 1.0, 2.5, 3.9] {
            prop_assert_eq!(distribution(&f, t), star.level_measure(t));
        }
        let mass = f.total_mass();
        prop_assert!((star.total_integral() - mass).abs() <= 1e-9 * mass.max(1e-300));
    }

    #[test]
    fn rearrangement_ignores_permutations(values in grid_values(48), seed in 0u64..1000) {
        let f = function_1d(values.clone());
        let mut shuffled = values;
        let mut rng = maxlorentz::rng::SplitMix64::new(seed, 0);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.below(i + 1));
        }
        let g = function_1d(shuffled);
        prop_assert_eq!(rearrangement(&f), rearrangement(&g));
    }

    #[test]
    fn hardy_dominates_and_decreases(
        raw in prop::collection::vec(0.01f64..4.0, 1..10),
        t in 0.01f64..8.0,
    ) {
        // build a decreasing step from sorted raw values
        let mut vals = raw.clone();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let bps: Vec<f64> = (1..=vals.len()).map(|k| k as f64 * 0.5).collect();
        let g = DecreasingStep::new(bps, vals).unwrap();
        let p1 = hardy(&g, t).unwrap();
        prop_assert!(p1 >= g.eval(t) - 1e-12);
        let p2 = hardy(&g, t * 1.5).unwrap();
        prop_assert!(p2 <= p1 + 1e-12);
    }

    #[test]
    fn weak_norm_never_exceeds_strong_norm(
        values in grid_values(64),
        alpha_u in -0.6f64..1.5,
        alpha_w in -0.6f64..1.5,
        p in 0.4f64..3.5,
    ) {
        let f = function_1d(values);
        let domain = *f.domain();
        let u = WeightSpec::PowerAbs { alpha: alpha_u }.materialize(domain).unwrap();
        let params = LorentzParams::new(p, u, WeightW::power(alpha_w).unwrap()).unwrap();
        let weak = lambda_weak_norm(&f, &params).unwrap();
        let strong = lambda_norm(&f, &params).unwrap();
        prop_assert!(weak <= strong, "weak {} > strong {}", weak, strong);
    }

    #[test]
    fn norms_vanish_only_at_zero(values in grid_values(48)) {
        let f = function_1d(values);
        let domain = *f.domain();
        let params =
            LorentzParams::new(2.0, WeightU::ones(domain), WeightW::one()).unwrap();
        let strong = lambda_norm(&f, &params).unwrap();
        prop_assert_eq!(strong == 0.0, f.is_zero());
    }

    #[test]
    fn measure_additive_on_dyadic_weights(
        log_n in 3u32..7,
        raw in prop::collection::vec((1u8..64).prop_map(|v| v as f64 / 16.0), 64),
        split in 1usize..7,
    ) {
        // power-of-two cell count keeps the cell volume dyadic, so scaling
        // by it is exact and additivity holds bitwise
        let n = 1usize << log_n;
        let weights = raw[..n].to_vec();
        let domain = GridDomain::line(1.0, n).unwrap();
        let u = WeightU::new(GridFunction::from_values(domain, weights).unwrap()).unwrap();
        let cut = n * split / 8;
        let a = GridSet::from_mask(domain, (0..n).map(|i| i < cut).collect()).unwrap();
        let b = GridSet::from_mask(domain, (0..n).map(|i| i >= cut).collect()).unwrap();
        let ab = a.union(&b).unwrap();
        prop_assert_eq!(
            measure_u(&u, &ab).unwrap(),
            measure_u(&u, &a).unwrap() + measure_u(&u, &b).unwrap()
        );
    }

    #[test]
    fn level_sets_shrink_with_lambda(values in grid_values(64), lo in 0.05f64..1.0) {
        let f = function_1d(values);
        let hi = lo * 1.5;
        let s_lo = level_set(&f, lo);
        let s_hi = level_set(&f, hi);
        prop_assert!(s_hi.is_subset_of(&s_lo));
    }

    #[test]
    fn inclusion_check_is_monotone_in_c(
        pieces in prop::collection::vec((0usize..56, 1usize..8), 1..4),
        lambda in 0.1f64..0.9,
    ) {
        let n = 64;
        let domain = GridDomain::line(2.0, n).unwrap();
        let mut mask = vec![false; n];
        for (start, len) in pieces {
            for c in start..(start + len).min(n) {
                mask[c] = true;
            }
        }
        let e = GridSet::from_mask(domain, mask).unwrap();
        prop_assume!(!e.is_empty());
        let c_est = maxlorentz::verify::lemma22_check(&e, lambda).unwrap();
        prop_assert!(corollary_inclusion_check(&e, lambda, c_est * 0.5).unwrap());
        prop_assert!(corollary_inclusion_check(&e, lambda, c_est * 0.25).unwrap());
    }

    #[test]
    fn power_cumulative_is_strictly_increasing(alpha in -0.9f64..3.0, t in 0.01f64..50.0) {
        let w = WeightW::power(alpha).unwrap();
        let a = w.cumulative(t).unwrap();
        let b = w.cumulative(t * 1.01).unwrap();
        prop_assert!(a < b);
    }
}
