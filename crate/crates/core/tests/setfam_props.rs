//! Property suites for the family predicates and transforms, cross-checked
//! against brute-force quantifier-loop oracles.

mod common;

use common::*;
use num_rational::Ratio;
use proptest::prelude::*;
use rand::Rng;
use sandglass_core::bounds;
use sandglass_core::search::PairKind;
use sandglass_core::setfam::{
    parse_pair, serialize_pair, ElementSet, PairOfFamilies, SetFamily, Side,
};

fn arb_family(n: u32) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::btree_set(0u64..(1 << n), 0..=(1usize << n))
        .prop_map(|s| s.into_iter().collect())
}

fn arb_pair(n: u32) -> impl Strategy<Value = PairOfFamilies> {
    (arb_family(n), arb_family(n)).prop_map(move |(a, b)| {
        PairOfFamilies::new(
            SetFamily::from_masks(n, a).unwrap(),
            SetFamily::from_masks(n, b).unwrap(),
        )
        .unwrap()
    })
}

proptest! {
    /// The hashed predicates agree with the quantifier-loop oracles on
    /// arbitrary pairs.
    #[test]
    fn predicates_match_oracles(pair in (1u32..=4).prop_flat_map(arb_pair)) {
        prop_assert_eq!(pair.is_recovering(), oracle_recovering(&pair));
        for side in [Side::Left, Side::Right, Side::Both] {
            prop_assert_eq!(pair.is_cancellative(side), oracle_cancellative(&pair, side));
        }
    }

    /// Any recovering pair is cancellative.
    #[test]
    fn recovering_implies_cancellative(pair in (1u32..=4).prop_flat_map(arb_pair)) {
        if pair.is_recovering() {
            prop_assert!(pair.is_cancellative(Side::Both));
        }
    }

    /// Serialize-parse round trip is the identity on canonical pairs.
    #[test]
    fn text_round_trip(pair in (1u32..=5).prop_flat_map(arb_pair)) {
        let text = serialize_pair(&pair);
        prop_assert_eq!(parse_pair(&text).unwrap(), pair);
    }

    /// Product sizes multiply exactly.
    #[test]
    fn product_size_identity(
        p1 in (1u32..=3).prop_flat_map(arb_pair),
        p2 in (1u32..=3).prop_flat_map(arb_pair),
    ) {
        let prod = p1.product(&p2).unwrap();
        prop_assert_eq!(prod.product_size(), p1.product_size() * p2.product_size());
    }

    /// Restriction partitions the family.
    #[test]
    fn restriction_partitions(pair in (1u32..=4).prop_flat_map(arb_pair), i_raw in 0u32..4) {
        let n = pair.ground_size();
        let i = i_raw % n;
        let (with_i, without_i) = pair.a().restrict(i, false).unwrap();
        prop_assert_eq!(with_i.len() + without_i.len(), pair.a().len());
    }
}

#[test]
fn round_trip_on_random_valid_files() {
    let mut rng = rng(0x11);
    for _ in 0..100 {
        let n = rng.gen_range(1..=6);
        let pair = PairOfFamilies::new(
            random_family(n, 0.4, &mut rng),
            random_family(n, 0.4, &mut rng),
        )
        .unwrap();
        let text = serialize_pair(&pair);
        assert_eq!(parse_pair(&text).unwrap(), pair, "file:\n{text}");
    }
}

#[test]
fn subfamily_closure_of_recovering() {
    let mut rng = rng(0x22);
    for trial in 0..300 {
        let n = 2 + trial % 5;
        let pair = random_pair_of_kind(n, PairKind::Recovering, &mut rng);
        assert!(pair.is_recovering());
        let sub = random_sub_pair(&pair, 0.6, &mut rng);
        assert!(sub.is_recovering(), "trial {trial}");
    }
}

#[test]
fn product_preserves_recovering_and_cancellative() {
    let mut rng = rng(0x33);
    for trial in 0..200 {
        let n1 = 1 + trial % 3;
        let n2 = 1 + (trial / 3) % 3;
        let r1 = random_pair_of_kind(n1, PairKind::Recovering, &mut rng);
        let r2 = random_pair_of_kind(n2, PairKind::Recovering, &mut rng);
        let prod = r1.product(&r2).unwrap();
        assert!(oracle_recovering(&prod), "trial {trial}");
        assert_eq!(prod.product_size(), r1.product_size() * r2.product_size());

        let c1 = random_pair_of_kind(n1, PairKind::Cancellative, &mut rng);
        let c2 = random_pair_of_kind(n2, PairKind::Cancellative, &mut rng);
        let prod = c1.product(&c2).unwrap();
        assert!(oracle_cancellative(&prod, Side::Both), "trial {trial}");
    }
}

/// Restrictions of recovering (cancellative) pairs stay recovering
/// (cancellative): both plain restrictions, and the dropped-element form
/// over the smaller ground set.
#[test]
fn simple_restrictions_preserve_properties() {
    let mut rng = rng(0x44);
    for trial in 0..200 {
        let n = 2 + trial % 4;
        for kind in [PairKind::Recovering, PairKind::Cancellative] {
            let pair = random_pair_of_kind(n, kind, &mut rng);
            for i in 0..n {
                let (a_with, a_without) = pair.a().restrict(i, false).unwrap();
                let (b_with, b_without) = pair.b().restrict(i, false).unwrap();
                let hit = PairOfFamilies::new(a_with, b_with).unwrap();
                let miss = PairOfFamilies::new(a_without, b_without).unwrap();
                assert!(oracle_holds(kind, &hit), "trial {trial} i {i}");
                assert!(oracle_holds(kind, &miss), "trial {trial} i {i}");

                let (a_drop, a_keep) = pair.a().restrict(i, true).unwrap();
                let (b_drop, b_keep) = pair.b().restrict(i, true).unwrap();
                let dropped = PairOfFamilies::new(a_drop, b_drop).unwrap();
                let kept = PairOfFamilies::new(a_keep, b_keep).unwrap();
                assert!(oracle_holds(kind, &dropped), "trial {trial} i {i}");
                assert!(oracle_holds(kind, &kept), "trial {trial} i {i}");
            }
        }
    }
}

/// Filtered sizes equal the pre-image counts on cancellative input whenever
/// `S` is realized as `C \ B`.
#[test]
fn filtered_sizes_match_preimage_counts() {
    let mut rng = rng(0x55);
    for trial in 0..300 {
        let n = 2 + trial % 5;
        let pair = random_pair_of_kind(n, PairKind::Cancellative, &mut rng);
        if pair.b().is_empty() {
            continue;
        }
        let full = (1u64 << n) - 1;
        let c_mask = rng.gen_range(0..full); // proper subset of the ground set
        let c = ElementSet::from_mask(c_mask);
        for b in pair.b().iter() {
            let s = c.difference(b);
            // a realized trace by construction
            let realized_p: Vec<ElementSet> = pair.a().iter().map(|a| a.intersection(s)).collect();
            for p in realized_p {
                let filtered = pair.filtered(c, s, p).unwrap();
                let a_count = pair.a().iter().filter(|a| a.intersection(s) == p).count();
                let b_count = pair.b().iter().filter(|b2| c.difference(*b2) == s).count();
                assert_eq!(filtered.a().len(), a_count, "trial {trial}");
                assert_eq!(filtered.b().len(), b_count, "trial {trial}");
            }
        }
    }
}

/// Filtered pairs of recovering pairs are cancellative on both sides.
#[test]
fn filtered_recovering_pairs_cancellative() {
    let mut rng = rng(0x66);
    for trial in 0..300 {
        let n = 2 + trial % 5;
        let pair = random_pair_of_kind(n, PairKind::Recovering, &mut rng);
        let full = (1u64 << n) - 1;
        let c_mask = rng.gen_range(0..full);
        let s_mask = {
            let mut m = c_mask;
            for i in 0..n {
                if m & (1 << i) != 0 && rng.gen_bool(0.5) {
                    m &= !(1 << i);
                }
            }
            m
        };
        let p_mask = {
            let mut m = s_mask;
            for i in 0..n {
                if m & (1 << i) != 0 && rng.gen_bool(0.5) {
                    m &= !(1 << i);
                }
            }
            m
        };
        let filtered = pair
            .filtered(
                ElementSet::from_mask(c_mask),
                ElementSet::from_mask(s_mask),
                ElementSet::from_mask(p_mask),
            )
            .unwrap();
        assert!(
            oracle_cancellative(&filtered, Side::Both),
            "trial {trial} C={c_mask:b} S={s_mask:b} P={p_mask:b}"
        );
    }
}

/// For a recovering pair and any admissible `(C, S)`, some `P` keeps the
/// filtered family large: `log2(|A_CSP| / |A|) >= -sum_{i in S} h(a_i)`,
/// verified by enumerating every `P` inside `S`.
#[test]
fn some_filter_trace_is_dense() {
    let mut rng = rng(0x77);
    for trial in 0..200 {
        let n = 2 + trial % 5;
        let pair = random_pair_of_kind(n, PairKind::Recovering, &mut rng);
        if pair.a().is_empty() || pair.b().is_empty() {
            continue;
        }
        let densities = pair.densities().unwrap();
        let full = (1u64 << n) - 1;
        let c_mask = rng.gen_range(0..full);
        let c = ElementSet::from_mask(c_mask);
        for b in pair.b().iter().take(4) {
            let s = c.difference(b);
            let entropy_sum: f64 = s
                .elements()
                .map(|i| {
                    let r = densities.a()[i as usize];
                    bounds::binary_entropy(*r.numer() as f64 / *r.denom() as f64, false).unwrap()
                })
                .sum();
            let mut best_fraction = 0.0f64;
            let mut p_mask = s.mask();
            loop {
                let filtered = pair.filtered(c, s, ElementSet::from_mask(p_mask)).unwrap();
                best_fraction =
                    best_fraction.max(filtered.a().len() as f64 / pair.a().len() as f64);
                if p_mask == 0 {
                    break;
                }
                p_mask = (p_mask - 1) & s.mask();
            }
            assert!(
                best_fraction.log2() >= -entropy_sum - 1e-9,
                "trial {trial}: best fraction {best_fraction} vs entropy sum {entropy_sum}"
            );
        }
    }
}

#[test]
fn uniform_pairs_have_exact_density_sums() {
    let mut rng = rng(0x88);
    for trial in 0..100 {
        let n = 2 + trial % 5;
        let k = 1 + trial % n;
        let pair = random_uniform_pair_of_kind(n, k, PairKind::Cancellative, &mut rng);
        if pair.a().is_empty() || pair.b().is_empty() {
            continue;
        }
        if pair.uniformity().unwrap() != Some(k) {
            continue;
        }
        let d = pair.densities().unwrap();
        assert_eq!(d.sum_a(), Ratio::from_integer(k as u64));
        assert_eq!(d.sum_b(), Ratio::from_integer(k as u64));
    }
}
