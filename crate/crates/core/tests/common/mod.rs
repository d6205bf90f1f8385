//! Shared helpers for the integration and acceptance suites: naive oracle
//! predicates written as direct quantifier loops (independent of the hashed
//! implementations they check) and seeded random pair generators.

#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use sandglass_core::search::PairKind;
use sandglass_core::setfam::{ElementSet, PairOfFamilies, SetFamily, Side};

/// Recovering check by brute-force enumeration of all quadruples.
pub fn oracle_recovering(pair: &PairOfFamilies) -> bool {
    let a = pair.a().members();
    let b = pair.b().members();
    for &x in a {
        for &x2 in a {
            for &y in b {
                for &y2 in b {
                    if x.difference(y) == x2.difference(y2) && x != x2 {
                        return false;
                    }
                    if y.difference(x) == y2.difference(x2) && y != y2 {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Cancellative check by brute-force triple loops.
pub fn oracle_cancellative(pair: &PairOfFamilies, side: Side) -> bool {
    let a = pair.a().members();
    let b = pair.b().members();
    let left = || {
        for &y in b {
            for &x in a {
                for &x2 in a {
                    if x.difference(y) == x2.difference(y) && x != x2 {
                        return false;
                    }
                }
            }
        }
        true
    };
    let right = || {
        for &x in a {
            for &y in b {
                for &y2 in b {
                    if y.difference(x) == y2.difference(x) && y != y2 {
                        return false;
                    }
                }
            }
        }
        true
    };
    match side {
        Side::Left => left(),
        Side::Right => right(),
        Side::Both => left() && right(),
    }
}

pub fn oracle_holds(kind: PairKind, pair: &PairOfFamilies) -> bool {
    match kind {
        PairKind::Recovering => oracle_recovering(pair),
        PairKind::Cancellative => oracle_cancellative(pair, Side::Both),
        PairKind::LeftCancellative => oracle_cancellative(pair, Side::Left),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly random family: each subset kept independently with probability
/// `density`.
pub fn random_family(n: u32, density: f64, rng: &mut ChaCha8Rng) -> SetFamily {
    let members: Vec<u64> = (0..1u64 << n).filter(|_| rng.gen_bool(density)).collect();
    SetFamily::from_masks(n, members).expect("distinct masks")
}

/// Random pair of the given kind, grown greedily: candidate members are
/// tried in shuffled order on alternating sides and kept whenever the
/// predicate survives. Subsets of valid pairs stay valid, so the greedy
/// process never has to backtrack.
pub fn random_pair_of_kind(n: u32, kind: PairKind, rng: &mut ChaCha8Rng) -> PairOfFamilies {
    random_pair_from_candidates(n, kind, (0..1u64 << n).collect(), rng)
}

/// As [`random_pair_of_kind`], restricted to `k`-element members.
pub fn random_uniform_pair_of_kind(
    n: u32,
    k: u32,
    kind: PairKind,
    rng: &mut ChaCha8Rng,
) -> PairOfFamilies {
    let candidates: Vec<u64> = (0..1u64 << n).filter(|m| m.count_ones() == k).collect();
    random_pair_from_candidates(n, kind, candidates, rng)
}

fn random_pair_from_candidates(
    n: u32,
    kind: PairKind,
    mut candidates: Vec<u64>,
    rng: &mut ChaCha8Rng,
) -> PairOfFamilies {
    candidates.shuffle(rng);
    let mut a: Vec<u64> = Vec::new();
    let mut b: Vec<u64> = Vec::new();
    let build = |a: &[u64], b: &[u64]| -> PairOfFamilies {
        PairOfFamilies::new(
            SetFamily::from_masks(n, a.iter().copied()).expect("distinct masks"),
            SetFamily::from_masks(n, b.iter().copied()).expect("distinct masks"),
        )
        .expect("same ground")
    };
    for (idx, &c) in candidates.iter().enumerate() {
        let to_a = idx % 2 == 0;
        if to_a {
            a.push(c);
        } else {
            b.push(c);
        }
        if !kind.holds(&build(&a, &b)) {
            if to_a {
                a.pop();
            } else {
                b.pop();
            }
        }
    }
    // at worst the empty pair, which satisfies every kind vacuously
    build(&a, &b)
}

/// Random sub-pair: keeps each member independently with probability `keep`.
pub fn random_sub_pair(pair: &PairOfFamilies, keep: f64, rng: &mut ChaCha8Rng) -> PairOfFamilies {
    let mut filter = |fam: &SetFamily| -> SetFamily {
        let members: Vec<ElementSet> = fam.iter().filter(|_| rng.gen_bool(keep)).collect();
        SetFamily::new(fam.ground_size(), members).expect("subset of valid family")
    };
    let a = filter(pair.a());
    let b = filter(pair.b());
    PairOfFamilies::new(a, b).expect("same ground")
}

/// Random distribution over `m` outcomes (normalized uniform weights).
pub fn random_distribution(m: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let weights: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0) + 1e-9).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}
