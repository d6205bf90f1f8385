//! Set families over a ground set `[n]` with `n <= 64`.
//!
//! Sets are machine-word bitmasks: bit `i` stands for element `i + 1` of the
//! 1-based ground set. The 1-based convention is confined to I/O (the pair-file parser and
//! the `Display` impls); every function in this module takes and returns
//! 0-based element indices.

mod io;

pub use io::{pair_to_json, parse_pair, serialize_pair, ParseError};

use num_rational::Ratio;
use std::collections::hash_map::Entry;
use std::collections::{HashMap, HashSet};
use std::fmt;
use thiserror::Error;

/// Largest supported ground-set size.
pub const MAX_GROUND: u32 = 64;

/// Errors from family construction and transformation.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FamilyError {
    #[error("ground set size {0} exceeds the {MAX_GROUND}-element limit")]
    GroundTooLarge(u32),
    #[error("duplicate member {0} in family")]
    DuplicateMember(ElementSet),
    #[error("set {set} is not contained in the ground set [{ground}]")]
    OutOfGround { set: ElementSet, ground: u32 },
    #[error("element index {index} is outside the ground set [{ground}]")]
    ElementOutOfRange { index: u32, ground: u32 },
    #[error("families have mismatched ground sets ({0} vs {1})")]
    GroundMismatch(u32, u32),
    #[error("operation undefined on an empty family")]
    EmptyFamily,
    #[error("containment chain P \u{2286} S \u{2286} C violated")]
    ContainmentChain,
    #[error("filter set C must be a proper subset of the ground set")]
    FilterCoversGround,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Mask with the low `n` bits set.
pub(crate) fn ground_mask(n: u32) -> u64 {
    debug_assert!(n <= MAX_GROUND);
    if n == MAX_GROUND {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A subset of the ground set, stored as a bitmask.
///
/// Ordering is by mask value, which is the canonical order used everywhere
/// in this crate.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementSet(u64);

impl ElementSet {
    pub const EMPTY: ElementSet = ElementSet(0);

    pub fn from_mask(mask: u64) -> Self {
        ElementSet(mask)
    }

    /// Set containing the single 0-based element `i`.
    pub fn singleton(i: u32) -> Self {
        ElementSet(1u64 << i)
    }

    /// Set of the given 0-based elements.
    pub fn from_elements(elements: &[u32]) -> Self {
        ElementSet(elements.iter().fold(0u64, |m, &i| m | (1u64 << i)))
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn card(self) -> u32 {
        self.0.count_ones()
    }

    pub fn contains(self, i: u32) -> bool {
        i < 64 && self.0 & (1u64 << i) != 0
    }

    pub fn with(self, i: u32) -> Self {
        ElementSet(self.0 | (1u64 << i))
    }

    pub fn difference(self, other: Self) -> Self {
        ElementSet(self.0 & !other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        ElementSet(self.0 & other.0)
    }

    pub fn union(self, other: Self) -> Self {
        ElementSet(self.0 | other.0)
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    /// Complement within the ground set `[n]`.
    pub fn complement_in(self, n: u32) -> Self {
        ElementSet(!self.0 & ground_mask(n))
    }

    /// Ascending iterator over the 0-based elements.
    pub fn elements(self) -> impl Iterator<Item = u32> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros();
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    /// Removes the bits selected by `dropped` and packs the remaining bits
    /// down, preserving their relative order. The receiver must be disjoint
    /// from `dropped`.
    pub(crate) fn compress_out(self, dropped: ElementSet) -> ElementSet {
        debug_assert!(self.is_disjoint(dropped));
        let mut out = 0u64;
        let mut pos = 0u32;
        for i in 0..64u32 {
            if dropped.contains(i) {
                continue;
            }
            if self.contains(i) {
                out |= 1u64 << pos;
            }
            pos += 1;
        }
        ElementSet(out)
    }
}

impl serde::Serialize for ElementSet {
    /// Serializes as the ascending list of 1-based element indices.
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.elements().map(|i| i as u64 + 1))
    }
}

impl fmt::Display for ElementSet {
    /// `{i1,i2,...}` with ascending 1-based indices; the empty set is `{}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (pos, i) in self.elements().enumerate() {
            if pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Which of the two cancellation conditions to require.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// For each fixed `B`, the map `A -> A \ B` is injective.
    Left,
    /// For each fixed `A`, the map `B -> B \ A` is injective.
    Right,
    Both,
}

/// A duplicate-free family of subsets of `[n]`, kept sorted by mask so that
/// family equality is plain list equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SetFamily {
    ground_size: u32,
    members: Vec<ElementSet>,
}

impl SetFamily {
    /// Builds a family, sorting the members into canonical order. Rejects
    /// duplicates and members outside the ground set.
    pub fn new(ground_size: u32, mut members: Vec<ElementSet>) -> Result<Self, FamilyError> {
        if ground_size > MAX_GROUND {
            return Err(FamilyError::GroundTooLarge(ground_size));
        }
        let gmask = ground_mask(ground_size);
        members.sort_unstable();
        for (idx, &m) in members.iter().enumerate() {
            if m.mask() & !gmask != 0 {
                return Err(FamilyError::OutOfGround {
                    set: m,
                    ground: ground_size,
                });
            }
            if idx > 0 && members[idx - 1] == m {
                return Err(FamilyError::DuplicateMember(m));
            }
        }
        Ok(SetFamily {
            ground_size,
            members,
        })
    }

    /// Like [`SetFamily::new`] but silently deduplicates. Used by transforms
    /// (filtered pairs) whose output is a set of sets.
    pub fn new_deduped(
        ground_size: u32,
        mut members: Vec<ElementSet>,
    ) -> Result<Self, FamilyError> {
        if ground_size > MAX_GROUND {
            return Err(FamilyError::GroundTooLarge(ground_size));
        }
        let gmask = ground_mask(ground_size);
        if let Some(&bad) = members.iter().find(|m| m.mask() & !gmask != 0) {
            return Err(FamilyError::OutOfGround {
                set: bad,
                ground: ground_size,
            });
        }
        members.sort_unstable();
        members.dedup();
        Ok(SetFamily {
            ground_size,
            members,
        })
    }

    pub fn from_masks(
        ground_size: u32,
        masks: impl IntoIterator<Item = u64>,
    ) -> Result<Self, FamilyError> {
        Self::new(
            ground_size,
            masks.into_iter().map(ElementSet::from_mask).collect(),
        )
    }

    /// The family of all subsets of `s`.
    pub fn power_set(ground_size: u32, s: ElementSet) -> Result<Self, FamilyError> {
        if ground_size > MAX_GROUND {
            return Err(FamilyError::GroundTooLarge(ground_size));
        }
        if s.mask() & !ground_mask(ground_size) != 0 {
            return Err(FamilyError::OutOfGround {
                set: s,
                ground: ground_size,
            });
        }
        let mut members = Vec::with_capacity(1usize << s.card().min(30));
        let mut sub = s.mask();
        loop {
            members.push(ElementSet::from_mask(sub));
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & s.mask();
        }
        members.sort_unstable();
        Ok(SetFamily {
            ground_size,
            members,
        })
    }

    pub fn ground_size(&self) -> u32 {
        self.ground_size
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[ElementSet] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = ElementSet> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, s: ElementSet) -> bool {
        self.members.binary_search(&s).is_ok()
    }

    /// Splits into the members containing element `i` and those avoiding it.
    ///
    /// With `drop_element` set, `i` is deleted from the first part's members
    /// and from the ground set of both parts: the remaining elements are
    /// renumbered by packing, so both returned families live over `[n - 1]`.
    pub fn restrict(
        &self,
        i: u32,
        drop_element: bool,
    ) -> Result<(SetFamily, SetFamily), FamilyError> {
        if i >= self.ground_size {
            return Err(FamilyError::ElementOutOfRange {
                index: i,
                ground: self.ground_size,
            });
        }
        let mut with_i = Vec::new();
        let mut without_i = Vec::new();
        for &m in &self.members {
            if m.contains(i) {
                with_i.push(m);
            } else {
                without_i.push(m);
            }
        }
        if drop_element {
            let dropped = ElementSet::singleton(i);
            let ground = self.ground_size - 1;
            let with_i = with_i
                .into_iter()
                .map(|m| m.difference(dropped).compress_out(dropped))
                .collect();
            let without_i = without_i
                .into_iter()
                .map(|m| m.compress_out(dropped))
                .collect();
            Ok((
                SetFamily::new(ground, with_i)?,
                SetFamily::new(ground, without_i)?,
            ))
        } else {
            Ok((
                SetFamily {
                    ground_size: self.ground_size,
                    members: with_i,
                },
                SetFamily {
                    ground_size: self.ground_size,
                    members: without_i,
                },
            ))
        }
    }

    /// Applies the ground-set permutation `perm` (element `i` maps to
    /// `perm[i]`) to every member.
    pub fn relabel(&self, perm: &[u32]) -> Result<SetFamily, FamilyError> {
        if perm.len() != self.ground_size as usize {
            return Err(FamilyError::InvalidParameter(format!(
                "permutation length {} does not match ground size {}",
                perm.len(),
                self.ground_size
            )));
        }
        let mapped = self
            .members
            .iter()
            .map(|m| {
                ElementSet::from_mask(
                    m.elements()
                        .fold(0u64, |acc, i| acc | 1u64 << perm[i as usize]),
                )
            })
            .collect();
        SetFamily::new(self.ground_size, mapped)
    }
}

impl fmt::Debug for SetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SetFamily[{}]{{", self.ground_size)?;
        for (pos, m) in self.members.iter().enumerate() {
            if pos > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

/// Relative sizes of the single-element restrictions of a pair, as exact
/// rationals: `a[i] = |{A : i in A}| / |family A|` and likewise for `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityProfile {
    a: Vec<Ratio<u64>>,
    b: Vec<Ratio<u64>>,
}

impl DensityProfile {
    pub fn a(&self) -> &[Ratio<u64>] {
        &self.a
    }

    pub fn b(&self) -> &[Ratio<u64>] {
        &self.b
    }

    pub fn sum_a(&self) -> Ratio<u64> {
        self.a.iter().sum()
    }

    pub fn sum_b(&self) -> Ratio<u64> {
        self.b.iter().sum()
    }
}

/// Two set families over a common ground set.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PairOfFamilies {
    a: SetFamily,
    b: SetFamily,
}

impl PairOfFamilies {
    pub fn new(a: SetFamily, b: SetFamily) -> Result<Self, FamilyError> {
        if a.ground_size != b.ground_size {
            return Err(FamilyError::GroundMismatch(a.ground_size, b.ground_size));
        }
        Ok(PairOfFamilies { a, b })
    }

    pub fn a(&self) -> &SetFamily {
        &self.a
    }

    pub fn b(&self) -> &SetFamily {
        &self.b
    }

    pub fn ground_size(&self) -> u32 {
        self.a.ground_size
    }

    /// `|A| * |B|`.
    pub fn product_size(&self) -> u128 {
        self.a.len() as u128 * self.b.len() as u128
    }

    /// The pair with the two families exchanged.
    pub fn swapped(&self) -> PairOfFamilies {
        PairOfFamilies {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }

    pub fn relabel(&self, perm: &[u32]) -> Result<PairOfFamilies, FamilyError> {
        Ok(PairOfFamilies {
            a: self.a.relabel(perm)?,
            b: self.b.relabel(perm)?,
        })
    }

    /// The extremal pair `(2^S, 2^{[n] \ S})`: all subsets of `s` on one side
    /// and all subsets of its complement on the other. Recovering, with
    /// `|A| |B| = 2^n`.
    pub fn sandglass(ground_size: u32, s: ElementSet) -> Result<Self, FamilyError> {
        let a = SetFamily::power_set(ground_size, s)?;
        let b = SetFamily::power_set(ground_size, s.complement_in(ground_size))?;
        Ok(PairOfFamilies { a, b })
    }

    /// The `p`-fold product of the pair `({{1},{2},{3}}, {{1},{2},{3}})`
    /// over `[3p]`: a `p`-uniform cancellative (not recovering) pair with
    /// `|A| = |B| = 3^p`.
    pub fn triangle_power(p: u32) -> Result<Self, FamilyError> {
        if p == 0 {
            return Err(FamilyError::InvalidParameter(
                "triangle power requires p >= 1".into(),
            ));
        }
        if 3 * p > MAX_GROUND {
            return Err(FamilyError::GroundTooLarge(3 * p));
        }
        let singletons = SetFamily::from_masks(3, [1u64, 2, 4])?;
        let base = PairOfFamilies {
            a: singletons.clone(),
            b: singletons,
        };
        let mut pair = base.clone();
        for _ in 1..p {
            pair = pair.product(&base)?;
        }
        Ok(pair)
    }

    /// Whether `A \ B` determines `A` and `B \ A` determines `B` over all
    /// cross pairs. Grouping by difference value makes this `O(|A||B|)`.
    ///
    /// Empty families satisfy the conditions vacuously.
    pub fn is_recovering(&self) -> bool {
        let mut by_diff: HashMap<u64, u64> =
            HashMap::with_capacity(self.a.len() * self.b.len() + 1);
        for a in self.a.iter() {
            for b in self.b.iter() {
                match by_diff.entry(a.difference(b).mask()) {
                    Entry::Vacant(slot) => {
                        slot.insert(a.mask());
                    }
                    Entry::Occupied(slot) => {
                        if *slot.get() != a.mask() {
                            return false;
                        }
                    }
                }
            }
        }
        by_diff.clear();
        for b in self.b.iter() {
            for a in self.a.iter() {
                match by_diff.entry(b.difference(a).mask()) {
                    Entry::Vacant(slot) => {
                        slot.insert(b.mask());
                    }
                    Entry::Occupied(slot) => {
                        if *slot.get() != b.mask() {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Whether the requested cancellation conditions hold: on the left, for
    /// each fixed `B` the differences `A \ B` are pairwise distinct; on the
    /// right, symmetrically. Vacuously true on empty families.
    pub fn is_cancellative(&self, side: Side) -> bool {
        let left = || {
            let mut seen = HashSet::with_capacity(self.a.len());
            for b in self.b.iter() {
                seen.clear();
                for a in self.a.iter() {
                    if !seen.insert(a.difference(b).mask()) {
                        return false;
                    }
                }
            }
            true
        };
        let right = || {
            let mut seen = HashSet::with_capacity(self.b.len());
            for a in self.a.iter() {
                seen.clear();
                for b in self.b.iter() {
                    if !seen.insert(b.difference(a).mask()) {
                        return false;
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

    /// `Some(k)` when every member of both families has cardinality `k`.
    /// Errors on empty families, where uniformity is undefined.
    pub fn uniformity(&self) -> Result<Option<u32>, FamilyError> {
        if self.a.is_empty() || self.b.is_empty() {
            return Err(FamilyError::EmptyFamily);
        }
        let k = self.a.members[0].card();
        let uniform = self.a.iter().chain(self.b.iter()).all(|m| m.card() == k);
        Ok(uniform.then_some(k))
    }

    /// Product pair over the disjoint union of ground sets: `other`'s
    /// elements are shifted up by `self`'s ground size. Sizes multiply
    /// exactly and both the recovering and cancellative properties are
    /// preserved.
    pub fn product(&self, other: &PairOfFamilies) -> Result<PairOfFamilies, FamilyError> {
        let n1 = self.ground_size();
        let n2 = other.ground_size();
        if n1 + n2 > MAX_GROUND {
            return Err(FamilyError::GroundTooLarge(n1 + n2));
        }
        let combine = |left: &SetFamily, right: &SetFamily| -> Vec<ElementSet> {
            let mut out = Vec::with_capacity(left.len() * right.len());
            for x in left.iter() {
                for y in right.iter() {
                    out.push(ElementSet::from_mask(x.mask() | (y.mask() << n1)));
                }
            }
            out
        };
        Ok(PairOfFamilies {
            a: SetFamily::new(n1 + n2, combine(&self.a, &other.a))?,
            b: SetFamily::new(n1 + n2, combine(&self.b, &other.b))?,
        })
    }

    /// The filtered pair for `P = p`, `S = s`, `C = c`:
    ///
    /// `({A \ C : A ∩ S = P}, {B \ C : C \ B = S})`, deduplicated, over the
    /// ground set with `C` deleted. The surviving elements are renumbered by
    /// packing, so the result lives over `[n - |C|]`.
    ///
    /// Requires `P ⊆ S ⊆ C ⊊ [n]`.
    pub fn filtered(
        &self,
        c: ElementSet,
        s: ElementSet,
        p: ElementSet,
    ) -> Result<PairOfFamilies, FamilyError> {
        let n = self.ground_size();
        let ground = ElementSet::from_mask(ground_mask(n));
        if !c.is_subset_of(ground) {
            return Err(FamilyError::OutOfGround { set: c, ground: n });
        }
        if !(p.is_subset_of(s) && s.is_subset_of(c)) {
            return Err(FamilyError::ContainmentChain);
        }
        if c == ground {
            return Err(FamilyError::FilterCoversGround);
        }

        let mut a_members = Vec::new();
        let mut a_pre = 0usize;
        for a in self.a.iter() {
            if a.intersection(s) == p {
                a_pre += 1;
                a_members.push(a.difference(c).compress_out(c));
            }
        }
        let mut b_members = Vec::new();
        let mut b_pre = 0usize;
        for b in self.b.iter() {
            if c.difference(b) == s {
                b_pre += 1;
                b_members.push(b.difference(c).compress_out(c));
            }
        }
        let new_ground = n - c.card();
        let a = SetFamily::new_deduped(new_ground, a_members)?;
        let b = SetFamily::new_deduped(new_ground, b_members)?;

        // For cancellative input with S realized as C \ B, the images are
        // already distinct and deduplication must be a no-op.
        #[cfg(debug_assertions)]
        {
            let s_realized = self.b.iter().any(|b| c.difference(b) == s);
            if s_realized && self.is_cancellative(Side::Both) {
                debug_assert_eq!(a.len(), a_pre, "filtered A-side pre-image collapsed");
                debug_assert_eq!(b.len(), b_pre, "filtered B-side pre-image collapsed");
            }
        }
        #[cfg(not(debug_assertions))]
        {
            let _ = (a_pre, b_pre);
        }

        Ok(PairOfFamilies { a, b })
    }

    /// Exact restriction densities per element. Errors on empty families.
    pub fn densities(&self) -> Result<DensityProfile, FamilyError> {
        if self.a.is_empty() || self.b.is_empty() {
            return Err(FamilyError::EmptyFamily);
        }
        let count = |fam: &SetFamily| -> Vec<Ratio<u64>> {
            let total = fam.len() as u64;
            (0..self.ground_size())
                .map(|i| {
                    let hits = fam.iter().filter(|m| m.contains(i)).count() as u64;
                    Ratio::new(hits, total)
                })
                .collect()
        };
        Ok(DensityProfile {
            a: count(&self.a),
            b: count(&self.b),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(n: u32, masks: &[u64]) -> SetFamily {
        SetFamily::from_masks(n, masks.iter().copied()).unwrap()
    }

    fn pair(n: u32, a: &[u64], b: &[u64]) -> PairOfFamilies {
        PairOfFamilies::new(fam(n, a), fam(n, b)).unwrap()
    }

    #[test]
    fn element_set_display_is_one_based() {
        assert_eq!(ElementSet::EMPTY.to_string(), "{}");
        assert_eq!(ElementSet::from_elements(&[0, 2]).to_string(), "{1,3}");
    }

    #[test]
    fn family_rejects_duplicates_and_out_of_ground() {
        assert_eq!(
            SetFamily::from_masks(2, [1u64, 1]).unwrap_err(),
            FamilyError::DuplicateMember(ElementSet::from_mask(1))
        );
        assert!(matches!(
            SetFamily::from_masks(2, [4u64]).unwrap_err(),
            FamilyError::OutOfGround { .. }
        ));
    }

    #[test]
    fn canonical_order_is_ascending_masks() {
        let f = fam(3, &[4, 1, 0]);
        let masks: Vec<u64> = f.iter().map(|m| m.mask()).collect();
        assert_eq!(masks, vec![0, 1, 4]);
    }

    #[test]
    fn sandglass_pair_shape() {
        // (n=2, s={1}) -> A = {{}, {1}}, B = {{}, {2}}, product 4 = 2^2.
        let p = PairOfFamilies::sandglass(2, ElementSet::singleton(0)).unwrap();
        assert_eq!(p.a(), &fam(2, &[0, 1]));
        assert_eq!(p.b(), &fam(2, &[0, 2]));
        assert_eq!(p.product_size(), 4);
        assert!(p.is_recovering());
    }

    #[test]
    fn sandglass_degenerate_empty_s() {
        let p = PairOfFamilies::sandglass(1, ElementSet::EMPTY).unwrap();
        assert_eq!(p.a().len(), 1);
        assert_eq!(p.b().len(), 2);
        assert_eq!(p.product_size(), 2);
    }

    #[test]
    fn sandglass_product_is_power_of_two() {
        for n in 0..=6u32 {
            for smask in 0..(1u64 << n) {
                let p = PairOfFamilies::sandglass(n, ElementSet::from_mask(smask)).unwrap();
                assert_eq!(p.product_size(), 1u128 << n);
                assert!(p.is_recovering());
            }
        }
    }

    #[test]
    fn sandglass_rejects_s_outside_ground() {
        assert!(PairOfFamilies::sandglass(2, ElementSet::singleton(5)).is_err());
    }

    #[test]
    fn triangle_pair_is_cancellative_not_recovering() {
        let t = PairOfFamilies::triangle_power(1).unwrap();
        assert_eq!(t.product_size(), 9);
        assert!(t.is_cancellative(Side::Both));
        // A = {1}, B = {1} and A' = {2}, B' = {2} both give difference {}.
        assert!(!t.is_recovering());
        assert_eq!(t.uniformity().unwrap(), Some(1));
    }

    #[test]
    fn triangle_powers_multiply() {
        let t2 = PairOfFamilies::triangle_power(2).unwrap();
        assert_eq!(t2.ground_size(), 6);
        assert_eq!(t2.product_size(), 81);
        assert_eq!(t2.uniformity().unwrap(), Some(2));
        assert!(t2.is_cancellative(Side::Both));

        let t1 = PairOfFamilies::triangle_power(1).unwrap();
        assert_eq!(t1.product(&t1).unwrap(), t2);
    }

    #[test]
    fn triangle_power_bounds() {
        assert!(PairOfFamilies::triangle_power(0).is_err());
        assert!(PairOfFamilies::triangle_power(22).is_err()); // 66 > 64
        let t5 = PairOfFamilies::triangle_power(5).unwrap();
        assert_eq!(t5.ground_size(), 15);
        assert_eq!(t5.a().len(), 243);
    }

    #[test]
    fn single_empty_sets_recover_vacuously() {
        let p = pair(1, &[0], &[0]);
        assert!(p.is_recovering());
        assert!(p.is_cancellative(Side::Both));
    }

    #[test]
    fn left_cancellation_counterexample() {
        // {1}\{2} = {1,2}\{2} = {1}.
        let p = pair(2, &[1, 3], &[2]);
        assert!(!p.is_cancellative(Side::Left));
        assert!(p.is_cancellative(Side::Right));
    }

    #[test]
    fn singleton_families_always_cancellative() {
        for a in 0..4u64 {
            for b in 0..4u64 {
                let p = pair(2, &[a], &[b]);
                assert!(p.is_cancellative(Side::Both));
            }
        }
    }

    #[test]
    fn uniformity_cases() {
        let sg = PairOfFamilies::sandglass(2, ElementSet::singleton(0)).unwrap();
        assert_eq!(sg.uniformity().unwrap(), None);

        let p = pair(3, &[0b011], &[0b110]);
        assert_eq!(p.uniformity().unwrap(), Some(2));

        let empty = PairOfFamilies::new(fam(2, &[]), fam(2, &[0])).unwrap();
        assert_eq!(empty.uniformity().unwrap_err(), FamilyError::EmptyFamily);
    }

    #[test]
    fn product_with_trivial_pair_pads_ground() {
        let t = PairOfFamilies::triangle_power(1).unwrap();
        let trivial = pair(1, &[0], &[0]);
        let padded = t.product(&trivial).unwrap();
        assert_eq!(padded.ground_size(), 4);
        assert_eq!(padded.product_size(), t.product_size());
        assert_eq!(padded.a(), &fam(4, &[1, 2, 4]));
    }

    #[test]
    fn product_of_sandglasses_recovers() {
        let s = PairOfFamilies::sandglass(1, ElementSet::singleton(0)).unwrap();
        let p = s.product(&s).unwrap();
        assert!(p.is_recovering());
        assert_eq!(p.product_size(), 4);
    }

    #[test]
    fn product_ground_overflow() {
        let a = pair(33, &[0], &[0]);
        assert_eq!(a.product(&a).unwrap_err(), FamilyError::GroundTooLarge(66));
    }

    #[test]
    fn restrict_partitions() {
        let f = fam(2, &[0b00, 0b01, 0b11]);
        let (with1, without1) = f.restrict(0, false).unwrap();
        assert_eq!(with1, fam(2, &[0b01, 0b11]));
        assert_eq!(without1, fam(2, &[0b00]));
        assert_eq!(with1.len() + without1.len(), f.len());
    }

    #[test]
    fn restrict_dropping_element_renumbers() {
        let f = fam(2, &[0b00, 0b01, 0b11]);
        let (with1, without1) = f.restrict(0, true).unwrap();
        // {1} -> {}, {1,2} -> {2} -> renumbered {1}
        assert_eq!(with1, fam(1, &[0, 1]));
        assert_eq!(without1, fam(1, &[0]));
    }

    #[test]
    fn restrict_no_member_contains_element() {
        let f = fam(1, &[0]);
        let (with1, without1) = f.restrict(0, false).unwrap();
        assert!(with1.is_empty());
        assert_eq!(without1.len(), 1);
        assert!(f.restrict(1, false).is_err());
    }

    #[test]
    fn filtered_empty_filter_is_identity() {
        let t = PairOfFamilies::triangle_power(1).unwrap();
        let f = t
            .filtered(ElementSet::EMPTY, ElementSet::EMPTY, ElementSet::EMPTY)
            .unwrap();
        assert_eq!(f, t);
    }

    #[test]
    fn filtered_sandglass_example() {
        // sandglass(2, {1}) with C = S = P = {1}: sizes 1 and 2, matching the
        // pre-image counts.
        let p = PairOfFamilies::sandglass(2, ElementSet::singleton(0)).unwrap();
        let s1 = ElementSet::singleton(0);
        let f = p.filtered(s1, s1, s1).unwrap();
        assert_eq!(f.ground_size(), 1);
        assert_eq!(f.a().len(), 1);
        assert_eq!(f.b().len(), 2);
        assert_eq!(f.a(), &fam(1, &[0]));
        assert_eq!(f.b(), &fam(1, &[0, 1]));
    }

    #[test]
    fn filtered_checks_preconditions() {
        let p = PairOfFamilies::sandglass(2, ElementSet::singleton(0)).unwrap();
        let e0 = ElementSet::singleton(0);
        let e1 = ElementSet::singleton(1);
        assert_eq!(
            p.filtered(e0, e1, ElementSet::EMPTY).unwrap_err(),
            FamilyError::ContainmentChain
        );
        let full = ElementSet::from_mask(0b11);
        assert_eq!(
            p.filtered(full, ElementSet::EMPTY, ElementSet::EMPTY)
                .unwrap_err(),
            FamilyError::FilterCoversGround
        );
    }

    #[test]
    fn filtered_pair_of_recovering_is_cancellative() {
        // filtering a recovering pair preserves cancellation
        let p = PairOfFamilies::sandglass(3, ElementSet::from_mask(0b011)).unwrap();
        for c_mask in 0..(1u64 << 3) - 1 {
            let c = ElementSet::from_mask(c_mask);
            let mut s_mask = c_mask;
            loop {
                let s = ElementSet::from_mask(s_mask);
                let mut p_mask = s_mask;
                loop {
                    let f = p.filtered(c, s, ElementSet::from_mask(p_mask)).unwrap();
                    assert!(f.is_cancellative(Side::Both));
                    if p_mask == 0 {
                        break;
                    }
                    p_mask = (p_mask - 1) & s_mask;
                }
                if s_mask == 0 {
                    break;
                }
                s_mask = (s_mask - 1) & c_mask;
            }
        }
    }

    #[test]
    fn densities_examples() {
        let sg = PairOfFamilies::sandglass(2, ElementSet::singleton(0)).unwrap();
        let d = sg.densities().unwrap();
        assert_eq!(d.a(), &[Ratio::new(1, 2), Ratio::new(0, 1)]);
        assert_eq!(d.b(), &[Ratio::new(0, 1), Ratio::new(1, 2)]);

        let t = PairOfFamilies::triangle_power(1).unwrap();
        let d = t.densities().unwrap();
        assert!(d.a().iter().all(|r| *r == Ratio::new(1, 3)));
        assert_eq!(d.sum_a(), Ratio::from_integer(1));
        assert_eq!(d.sum_b(), Ratio::from_integer(1));

        let trivial = pair(2, &[0], &[0]);
        let d = trivial.densities().unwrap();
        assert!(d.a().iter().all(|r| *r == Ratio::new(0, 1)));
    }

    #[test]
    fn uniform_sum_identity_exact() {
        for p in 1..=4u32 {
            let t = PairOfFamilies::triangle_power(p).unwrap();
            let d = t.densities().unwrap();
            let k = t.uniformity().unwrap().unwrap();
            assert_eq!(d.sum_a(), Ratio::from_integer(k as u64));
            assert_eq!(d.sum_b(), Ratio::from_integer(k as u64));
        }
    }

    #[test]
    fn relabel_preserves_predicates() {
        let p = PairOfFamilies::sandglass(3, ElementSet::from_mask(0b101)).unwrap();
        let q = p.relabel(&[2, 0, 1]).unwrap();
        assert!(q.is_recovering());
        assert_eq!(q.product_size(), p.product_size());
    }
}
