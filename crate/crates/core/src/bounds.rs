//! Scalar bound machinery: binary entropy and its clamped variant, the
//! `f`/`g` upper-bound functions, Shannon entropy of finite distributions,
//! rate arithmetic and the per-pair filtered-ratio condition.

pub mod consts;

use crate::setfam::{ElementSet, FamilyError, PairOfFamilies, SetFamily};
use serde::Serialize;
use std::collections::{HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("argument {name} = {value} outside domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("probabilities must be nonnegative and sum to 1 (sum = {0})")]
    InvalidDistribution(f64),
    #[error("pair is not uniform: member cardinalities differ")]
    NonUniform,
    #[error(transparent)]
    Family(#[from] FamilyError),
}

fn check_unit(name: &'static str, value: f64) -> Result<(), BoundsError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(BoundsError::Domain {
            name,
            value,
            domain: "[0, 1]",
        });
    }
    Ok(())
}

fn check_positive(name: &'static str, value: f64) -> Result<(), BoundsError> {
    if value.is_nan() || value <= 0.0 {
        return Err(BoundsError::Domain {
            name,
            value,
            domain: "(0, inf)",
        });
    }
    Ok(())
}

/// `h(0.01)`: the clamp value of the starred entropy.
pub const H_AT_CLAMP: f64 = 0.080_793_135_895_911_17;

/// `-p log2 p - (1-p) log2(1-p)`, with `0 log2 0 = 0` by explicit branch.
pub(crate) fn h_raw(p: f64) -> f64 {
    let mut out = 0.0;
    if p > 0.0 {
        out -= p * p.log2();
    }
    let q = 1.0 - p;
    if q > 0.0 {
        out -= q * q.log2();
    }
    out
}

/// Clamped entropy: `h(z)` for `0.01 < z < 0.99`, else `h(0.01)`.
#[inline]
pub(crate) fn h_star_raw(z: f64) -> f64 {
    if z > 0.01 && z < 0.99 {
        h_raw(z)
    } else {
        H_AT_CLAMP
    }
}

/// Binary entropy on `[0, 1]`; the starred variant is the clamped form,
/// constant outside `(0.01, 0.99)` and everywhere `>= h`.
pub fn binary_entropy(p: f64, starred: bool) -> Result<f64, BoundsError> {
    check_unit("p", p)?;
    Ok(if starred { h_star_raw(p) } else { h_raw(p) })
}

/// Entropy part of `f`: `x(1-y) h(x) + h(x(1-y))`.
fn f_entropy_raw(x: f64, y: f64) -> f64 {
    let z = x * (1.0 - y);
    z * h_raw(x) + h_raw(z)
}

pub(crate) fn f_raw(x: f64, y: f64, log2_t: f64) -> f64 {
    f_entropy_raw(x, y) - x * log2_t
}

/// Starred `f` carries no log term; it is applied jointly in starred `g`.
#[inline]
pub(crate) fn f_star_raw(x: f64, y: f64) -> f64 {
    let z = x * (1.0 - y);
    z * h_star_raw(x) + h_star_raw(z)
}

/// Plain `g`, evaluated with the same operation order as the starred form
/// so that the pointwise dominance `g <= g*` is exact in floating point
/// (rounded addition is monotone and `h* >= h` term by term).
pub(crate) fn g_plain_raw(x: f64, y: f64, log2_t: f64) -> f64 {
    f_entropy_raw(x, y) + f_entropy_raw(y, x) - (x + y) * log2_t
}

#[inline]
pub(crate) fn g_star_raw(x: f64, y: f64, log2_t: f64) -> f64 {
    f_star_raw(x, y) + f_star_raw(y, x) - (x + y) * log2_t
}

/// The one-sided bound function.
///
/// Plain form: `x(1-y) h(x) + h(x(1-y)) - x log2 t`. The starred form is the
/// entropy part alone, `x(1-y) h*(x) + h*(x(1-y))`; its log term is applied
/// in the starred `g` as `-(x+y) log2 t`, so `t` is unused when `starred`.
pub fn f_value(x: f64, y: f64, t: f64, starred: bool) -> Result<f64, BoundsError> {
    check_unit("x", x)?;
    check_unit("y", y)?;
    if starred {
        Ok(f_star_raw(x, y))
    } else {
        check_positive("t", t)?;
        Ok(f_raw(x, y, t.log2()))
    }
}

/// The symmetric bound function `g(x,y,t) = f(x,y,t) + f(y,x,t)`; starred:
/// `g*(x,y,t) = f*(x,y) + f*(y,x) - (x+y) log2 t`. Dominates the plain form
/// pointwise and is finite on the closed unit square.
pub fn g_value(x: f64, y: f64, t: f64, starred: bool) -> Result<f64, BoundsError> {
    check_unit("x", x)?;
    check_unit("y", y)?;
    check_positive("t", t)?;
    let log2_t = t.log2();
    if starred {
        Ok(g_star_raw(x, y, log2_t))
    } else {
        Ok(g_plain_raw(x, y, log2_t))
    }
}

fn validate_distribution(probs: &[f64]) -> Result<(), BoundsError> {
    let sum: f64 = probs.iter().sum();
    if probs.iter().any(|&p| p.is_nan() || p < 0.0) || (sum - 1.0).abs() > 1e-12 {
        return Err(BoundsError::InvalidDistribution(sum));
    }
    Ok(())
}

/// Shannon entropy in bits of a finite distribution.
pub fn entropy_of(probs: &[f64]) -> Result<f64, BoundsError> {
    validate_distribution(probs)?;
    Ok(probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum())
}

/// Both readings of the entropy floor `2^{-H}` against a distribution.
///
/// The sound form bounds the largest probability: `max_i p_i >= 2^{-H}`.
/// The literal minimum-probability form is reported as well for comparison;
/// it fails on most non-uniform distributions and is not used downstream.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EntropyFloorCheck {
    pub entropy: f64,
    pub floor: f64,
    pub max_prob: f64,
    pub min_prob: f64,
    pub max_form_holds: bool,
    pub min_form_holds: bool,
}

pub fn entropy_floor_check(probs: &[f64]) -> Result<EntropyFloorCheck, BoundsError> {
    let entropy = entropy_of(probs)?;
    let floor = (-entropy).exp2();
    let max_prob = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_prob = probs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(EntropyFloorCheck {
        entropy,
        floor,
        max_prob,
        min_prob,
        max_form_holds: max_prob >= floor,
        min_form_holds: min_prob >= floor,
    })
}

/// Parameters of the rate recursion.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundParams {
    pub theta: f64,
    pub alpha: f64,
    pub mu_can: f64,
    pub mu_rec_floor: f64,
}

impl BoundParams {
    pub fn new(theta: f64, alpha: f64, mu_can: f64) -> Result<Self, BoundsError> {
        if theta.is_nan() || theta <= 1.0 {
            return Err(BoundsError::Domain {
                name: "theta",
                value: theta,
                domain: "(1, inf)",
            });
        }
        check_unit("alpha", alpha)?;
        if mu_can.is_nan() || mu_can < 2.0 {
            return Err(BoundsError::Domain {
                name: "mu_can",
                value: mu_can,
                domain: "[2, inf)",
            });
        }
        Ok(BoundParams {
            theta,
            alpha,
            mu_can,
            mu_rec_floor: 2.0,
        })
    }

    /// The published proof constants with a caller-chosen cancellative rate.
    pub fn reference(mu_can: f64) -> Result<Self, BoundsError> {
        Self::new(consts::THETA, consts::ALPHA, mu_can)
    }
}

/// Per-n base of the recovering-pair rate bound:
/// `max{2.2499, theta^alpha * mu_can^(1-alpha)}`.
pub fn theorem_rate(params: &BoundParams) -> f64 {
    let geometric = params.theta.powf(params.alpha) * params.mu_can.powf(1.0 - params.alpha);
    consts::RATE_FLOOR.max(geometric)
}

/// The side conditions the rate recursion needs, with computed values.
/// `mu` is always recomputed as [`theorem_rate`], never stored independently.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConditionReport {
    pub mu: f64,
    pub geometric_mean: f64,
    /// `theta < mu_can`
    pub theta_below_mu_can: bool,
    /// `0 <= alpha <= 1/2`
    pub alpha_at_most_half: bool,
    /// `1 / (1 - 2 alpha)`; infinite at `alpha = 1/2`
    pub reciprocal: f64,
    /// `1 / (1 - 2 alpha) <= mu`
    pub reciprocal_at_most_mu: bool,
    /// `theta^alpha * mu_can^(1-alpha) <= mu`
    pub geometric_at_most_mu: bool,
}

impl ConditionReport {
    pub fn all_hold(&self) -> bool {
        self.theta_below_mu_can
            && self.alpha_at_most_half
            && self.reciprocal_at_most_mu
            && self.geometric_at_most_mu
    }
}

/// Evaluates every side condition at the given parameters. An `alpha >= 1/2`
/// shows up as a failed condition, not an error.
pub fn recursion_conditions(params: &BoundParams) -> ConditionReport {
    let mu = theorem_rate(params);
    let geometric = params.theta.powf(params.alpha) * params.mu_can.powf(1.0 - params.alpha);
    let reciprocal = if params.alpha < 0.5 {
        1.0 / (1.0 - 2.0 * params.alpha)
    } else {
        f64::INFINITY
    };
    ConditionReport {
        mu,
        geometric_mean: geometric,
        theta_below_mu_can: params.theta < params.mu_can,
        alpha_at_most_half: (0.0..=0.5).contains(&params.alpha),
        reciprocal,
        reciprocal_at_most_mu: reciprocal <= mu,
        geometric_at_most_mu: geometric <= mu,
    }
}

/// Worst filtered ratio on one side, with the witnessing triple.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FilteredWitness {
    pub a: ElementSet,
    pub b: ElementSet,
    pub p: ElementSet,
    pub ratio: f64,
}

/// Result of checking the filtered-ratio hypothesis at a given `theta`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FilteredConditionReport {
    pub theta: f64,
    pub k: u32,
    /// `theta^{-k}`, the bound every ratio is compared against.
    pub threshold: f64,
    pub worst_left: FilteredWitness,
    pub worst_right: FilteredWitness,
    pub holds_left: bool,
    pub holds_right: bool,
    /// Symmetric form: both sides hold.
    pub holds: bool,
}

/// Checks, for a `k`-uniform pair, that every filtered pair taken at
/// `C = A`, `S = A \ B` is small:
/// `|A_{A,A\B,P}| |B_{A,A\B}| <= theta^{-k} |A||B|` for all `A`, `B` and all
/// `P`, plus the mirrored condition with the families swapped.
///
/// The maximising `P` is found by grouping members by their trace on `S`,
/// so `P` never ranges over all subsets of `A \ B`; the per-trace image
/// sizes are computed exactly (deduplicated), which agrees with the group
/// counts whenever the pair is cancellative.
pub fn filtered_condition_check(
    pair: &PairOfFamilies,
    theta: f64,
) -> Result<FilteredConditionReport, BoundsError> {
    check_positive("theta", theta)?;
    let k = pair.uniformity()?.ok_or(BoundsError::NonUniform)?;
    let threshold = theta.powi(-(k as i32));
    let worst_left = side_worst(pair.a(), pair.b());
    let worst_right = side_worst(pair.b(), pair.a());
    let holds_left = worst_left.ratio <= threshold;
    let holds_right = worst_right.ratio <= threshold;
    Ok(FilteredConditionReport {
        theta,
        k,
        threshold,
        worst_left,
        worst_right,
        holds_left,
        holds_right,
        holds: holds_left && holds_right,
    })
}

/// Maximum over `A`, `B`, `P` of `|A_{A,A\B,P}| |B_{A,A\B}| / (|A||B|)` with
/// ties broken towards the lexicographically least `(A, B, P)`.
fn side_worst(fam_a: &SetFamily, fam_b: &SetFamily) -> FilteredWitness {
    let total = fam_a.len() as f64 * fam_b.len() as f64;
    let mut worst = FilteredWitness {
        a: ElementSet::EMPTY,
        b: ElementSet::EMPTY,
        p: ElementSet::EMPTY,
        ratio: f64::NEG_INFINITY,
    };
    if fam_a.is_empty() || fam_b.is_empty() {
        worst.ratio = 0.0;
        return worst;
    }
    // s -> (count of B with A\B = s, least such B)
    let mut traces: HashMap<u64, (u64, u64)> = HashMap::new();
    // trace on S -> distinct images A' \ A
    let mut images: HashMap<u64, HashSet<u64>> = HashMap::new();
    for a in fam_a.iter() {
        traces.clear();
        for b in fam_b.iter() {
            let s = a.difference(b).mask();
            let entry = traces.entry(s).or_insert((0, b.mask()));
            entry.0 += 1;
            entry.1 = entry.1.min(b.mask());
        }
        for (&s_mask, &(b_count, b_repr)) in traces.iter() {
            let s = ElementSet::from_mask(s_mask);
            images.clear();
            for a2 in fam_a.iter() {
                images
                    .entry(a2.intersection(s).mask())
                    .or_default()
                    .insert(a2.difference(a).mask());
            }
            let (p_mask, a_count) = images.iter().map(|(&p, set)| (p, set.len() as u64)).fold(
                (u64::MAX, 0u64),
                |acc, cur| {
                    if cur.1 > acc.1 || (cur.1 == acc.1 && cur.0 < acc.0) {
                        cur
                    } else {
                        acc
                    }
                },
            );
            let ratio = (a_count as f64) * (b_count as f64) / total;
            let candidate = (a.mask(), b_repr, p_mask);
            let incumbent = (worst.a.mask(), worst.b.mask(), worst.p.mask());
            if ratio > worst.ratio || (ratio == worst.ratio && candidate < incumbent) {
                worst = FilteredWitness {
                    a,
                    b: ElementSet::from_mask(b_repr),
                    p: ElementSet::from_mask(p_mask),
                    ratio,
                };
            }
        }
    }
    worst
}

fn ratio_to_f64(r: num_rational::Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Sum of the bound function over the density profile: `sum_i f(a_i, b_i,
/// theta)`, or `sum_i g(a_i, b_i, theta)` in the symmetric form. The caller
/// compares against `log2 |A|` (resp. `log2 |A||B|`).
pub fn rhs_bound(pair: &PairOfFamilies, theta: f64, symmetric: bool) -> Result<f64, BoundsError> {
    check_positive("theta", theta)?;
    pair.uniformity()?.ok_or(BoundsError::NonUniform)?;
    let densities = pair.densities()?;
    let log2_t = theta.log2();
    let sum = densities
        .a()
        .iter()
        .zip(densities.b().iter())
        .map(|(&ar, &br)| {
            let (x, y) = (ratio_to_f64(ar), ratio_to_f64(br));
            if symmetric {
                g_plain_raw(x, y, log2_t)
            } else {
                f_raw(x, y, log2_t)
            }
        })
        .sum();
    Ok(sum)
}
