//! Exact maximum-product search over recovering/cancellative pairs at
//! small ground-set sizes.
//!
//! [`exhaustive_max_product`] enumerates every pair of families (up to
//! relabelling of the ground elements) for `n <= 3`. [`bnb_max_product`]
//! extends families one member at a time in ascending mask order, pruning
//! with the injectivity cap `|A| <= 2^{n-|B|}` (and its mirror where the
//! kind warrants it), for `n <= 5` under a node budget.

use crate::setfam::{PairOfFamilies, SetFamily, Side};
use serde::{Deserialize, Serialize};
use std::collections::hash_map::Entry;
use std::collections::{HashMap, HashSet};
use thiserror::Error;

/// Full enumeration cap: the space has `(2^{2^n})^2` family pairs.
pub const EXHAUSTIVE_MAX_N: u32 = 3;
/// Branch-and-bound cap.
pub const BNB_MAX_N: u32 = 5;

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("exhaustive search supports n <= {EXHAUSTIVE_MAX_N}, got {0}")]
    ExhaustiveCap(u32),
    #[error("branch-and-bound search supports n <= {BNB_MAX_N}, got {0}")]
    BnbCap(u32),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Which pair predicate the search optimises over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    Recovering,
    Cancellative,
    LeftCancellative,
}

impl PairKind {
    pub fn holds(self, pair: &PairOfFamilies) -> bool {
        match self {
            PairKind::Recovering => pair.is_recovering(),
            PairKind::Cancellative => pair.is_cancellative(Side::Both),
            PairKind::LeftCancellative => pair.is_cancellative(Side::Left),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PairKind::Recovering => "recovering",
            PairKind::Cancellative => "cancellative",
            PairKind::LeftCancellative => "left-cancellative",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "recovering" => Some(PairKind::Recovering),
            "cancellative" => Some(PairKind::Cancellative),
            "left-cancellative" | "left_cancellative" => Some(PairKind::LeftCancellative),
            _ => None,
        }
    }
}

/// Outcome of a search run.
#[derive(Clone, Debug)]
pub struct SearchResult {
    pub n: u32,
    pub kind: PairKind,
    pub best_product: u64,
    pub witness: PairOfFamilies,
    /// True only when the whole space (up to symmetry) was covered.
    pub exhaustive: bool,
    pub nodes_explored: u64,
}

/// Re-checks a result against the family predicates and the product
/// arithmetic, independently of how the search produced it.
pub fn verify_witness(result: &SearchResult) -> bool {
    result.witness.ground_size() == result.n
        && result.kind.holds(&result.witness)
        && result.witness.product_size() == result.best_product as u128
}

fn all_permutations(n: u32) -> Vec<Vec<u32>> {
    let mut perms = vec![vec![]];
    for next in 0..n {
        let mut grown = Vec::new();
        for p in &perms {
            for slot in 0..=p.len() {
                let mut q = p.clone();
                q.insert(slot, next);
                grown.push(q);
            }
        }
        perms = grown;
    }
    perms
}

fn relabel_mask(mask: u64, perm: &[u32]) -> u64 {
    let mut out = 0u64;
    let mut rest = mask;
    while rest != 0 {
        let i = rest.trailing_zeros();
        rest &= rest - 1;
        out |= 1u64 << perm[i as usize];
    }
    out
}

/// Sorted member masks of the family encoded by `code` (bit `s` set means
/// the subset with mask `s` is a member).
fn code_to_masks(code: u32) -> Vec<u64> {
    let mut out = Vec::with_capacity(code.count_ones() as usize);
    let mut rest = code;
    while rest != 0 {
        let s = rest.trailing_zeros();
        rest &= rest - 1;
        out.push(s as u64);
    }
    out
}

fn relabel_code(code: u32, perm: &[u32]) -> u32 {
    let mut out = 0u32;
    let mut rest = code;
    while rest != 0 {
        let s = rest.trailing_zeros();
        rest &= rest - 1;
        out |= 1u32 << relabel_mask(s as u64, perm);
    }
    out
}

type WitnessKey = (Vec<u64>, Vec<u64>);

/// Exact maximum of `|A||B|` over all pairs of the given kind, by full
/// enumeration with the A-side reduced to canonical representatives under
/// ground-set relabelling. Ties are broken towards the lexicographically
/// least witness (compared as sorted mask lists, A then B).
pub fn exhaustive_max_product(n: u32, kind: PairKind) -> Result<SearchResult, SearchError> {
    if n > EXHAUSTIVE_MAX_N {
        return Err(SearchError::ExhaustiveCap(n));
    }
    let subsets = 1u32 << n;
    let family_codes = 1u64 << subsets;
    let perms = all_permutations(n);

    let mut best_product = 0u64;
    let mut best_key: Option<WitnessKey> = None;
    let mut nodes = 0u64;

    for a_code in 1..family_codes {
        let a_code = a_code as u32;
        if perms.iter().any(|perm| relabel_code(a_code, perm) < a_code) {
            continue; // not the canonical representative of its orbit
        }
        let a_fam = SetFamily::from_masks(n, code_to_masks(a_code))
            .expect("codes enumerate valid families");
        for b_code in 1..family_codes {
            let b_code = b_code as u32;
            nodes += 1;
            let b_fam = SetFamily::from_masks(n, code_to_masks(b_code))
                .expect("codes enumerate valid families");
            let pair =
                PairOfFamilies::new(a_fam.clone(), b_fam).expect("families share the ground set");
            if !kind.holds(&pair) {
                continue;
            }
            let product = pair.product_size() as u64;
            if product < best_product {
                continue;
            }
            // the least relabelling of this pair, for reproducible witnesses
            let key = perms
                .iter()
                .map(|perm| {
                    let mut a: Vec<u64> = code_to_masks(relabel_code(a_code, perm));
                    let mut b: Vec<u64> = code_to_masks(relabel_code(b_code, perm));
                    a.sort_unstable();
                    b.sort_unstable();
                    (a, b)
                })
                .min()
                .expect("at least the identity permutation");
            if product > best_product || best_key.as_ref().is_none_or(|k| key < *k) {
                best_product = product;
                best_key = Some(key);
            }
        }
    }

    let (a_masks, b_masks) = best_key
        .ok_or_else(|| SearchError::InvalidParameter("search space unexpectedly empty".into()))?;
    let witness = PairOfFamilies::new(
        SetFamily::from_masks(n, a_masks).expect("witness masks are valid"),
        SetFamily::from_masks(n, b_masks).expect("witness masks are valid"),
    )
    .expect("witness families share the ground set");
    Ok(SearchResult {
        n,
        kind,
        best_product,
        witness,
        exhaustive: true,
        nodes_explored: nodes,
    })
}

struct Bnb {
    n: u32,
    kind: PairKind,
    universe: Vec<u64>,
    budget: u64,
    nodes: u64,
    truncated: bool,
    a: Vec<u64>,
    b: Vec<u64>,
    best_product: u64,
    best_witness: (Vec<u64>, Vec<u64>),
    // recovering only: difference value -> the unique source set
    left_map: HashMap<u64, u64>,
    right_map: HashMap<u64, u64>,
}

enum MapSide {
    Left,
    Right,
}

struct Undo(Vec<(MapSide, u64, Option<u64>)>);

impl Bnb {
    fn diff(x: u64, y: u64) -> u64 {
        x & !y
    }

    fn can_add_a(&self, c: u64) -> bool {
        match self.kind {
            PairKind::LeftCancellative | PairKind::Cancellative => {
                for &b in &self.b {
                    let v = Self::diff(c, b);
                    if self.a.iter().any(|&a2| Self::diff(a2, b) == v) {
                        return false;
                    }
                }
                if self.kind == PairKind::Cancellative {
                    // right-cancellation against the new A member
                    let mut seen = HashSet::with_capacity(self.b.len());
                    for &b in &self.b {
                        if !seen.insert(Self::diff(b, c)) {
                            return false;
                        }
                    }
                }
                true
            }
            PairKind::Recovering => {
                // the fresh right-map entries b \ c -> b must not collide
                // with each other either, so track them locally
                let mut fresh = HashSet::with_capacity(self.b.len());
                for &b in &self.b {
                    if self
                        .left_map
                        .get(&Self::diff(c, b))
                        .is_some_and(|&a| a != c)
                    {
                        return false;
                    }
                    let w = Self::diff(b, c);
                    if self.right_map.get(&w).is_some_and(|&bb| bb != b) || !fresh.insert(w) {
                        return false;
                    }
                }
                true
            }
        }
    }

    fn can_add_b(&self, c: u64) -> bool {
        match self.kind {
            PairKind::LeftCancellative | PairKind::Cancellative => {
                // left-cancellation against the new B member
                let mut seen = HashSet::with_capacity(self.a.len());
                for &a in &self.a {
                    if !seen.insert(Self::diff(a, c)) {
                        return false;
                    }
                }
                if self.kind == PairKind::Cancellative {
                    for &a in &self.a {
                        let v = Self::diff(c, a);
                        if self.b.iter().any(|&b2| Self::diff(b2, a) == v) {
                            return false;
                        }
                    }
                }
                true
            }
            PairKind::Recovering => {
                let mut fresh = HashSet::with_capacity(self.a.len());
                for &a in &self.a {
                    let v = Self::diff(a, c);
                    if self.left_map.get(&v).is_some_and(|&aa| aa != a) || !fresh.insert(v) {
                        return false;
                    }
                    if self
                        .right_map
                        .get(&Self::diff(c, a))
                        .is_some_and(|&b| b != c)
                    {
                        return false;
                    }
                }
                true
            }
        }
    }

    fn record(
        map: &mut HashMap<u64, u64>,
        side: fn() -> MapSide,
        key: u64,
        value: u64,
        undo: &mut Undo,
    ) {
        match map.entry(key) {
            Entry::Vacant(slot) => {
                slot.insert(value);
                undo.0.push((side(), key, None));
            }
            Entry::Occupied(slot) => {
                debug_assert_eq!(*slot.get(), value);
            }
        }
    }

    fn commit_a(&mut self, c: u64) -> Undo {
        let mut undo = Undo(Vec::new());
        if self.kind == PairKind::Recovering {
            for i in 0..self.b.len() {
                let b = self.b[i];
                Self::record(
                    &mut self.left_map,
                    || MapSide::Left,
                    Self::diff(c, b),
                    c,
                    &mut undo,
                );
                Self::record(
                    &mut self.right_map,
                    || MapSide::Right,
                    Self::diff(b, c),
                    b,
                    &mut undo,
                );
            }
        }
        self.a.push(c);
        undo
    }

    fn commit_b(&mut self, c: u64) -> Undo {
        let mut undo = Undo(Vec::new());
        if self.kind == PairKind::Recovering {
            for i in 0..self.a.len() {
                let a = self.a[i];
                Self::record(
                    &mut self.left_map,
                    || MapSide::Left,
                    Self::diff(a, c),
                    a,
                    &mut undo,
                );
                Self::record(
                    &mut self.right_map,
                    || MapSide::Right,
                    Self::diff(c, a),
                    c,
                    &mut undo,
                );
            }
        }
        self.b.push(c);
        undo
    }

    fn rollback(&mut self, undo: Undo, from_a: bool) {
        if from_a {
            self.a.pop();
        } else {
            self.b.pop();
        }
        for (side, key, prev) in undo.0.into_iter().rev() {
            let map = match side {
                MapSide::Left => &mut self.left_map,
                MapSide::Right => &mut self.right_map,
            };
            match prev {
                Some(v) => {
                    map.insert(key, v);
                }
                None => {
                    map.remove(&key);
                }
            }
        }
    }

    fn cap_a(&self) -> u64 {
        self.b
            .iter()
            .map(|b| 1u64 << (self.n - b.count_ones().min(self.n)))
            .min()
            .unwrap_or(1u64 << self.n)
    }

    fn cap_b(&self) -> u64 {
        if self.kind == PairKind::LeftCancellative {
            return 1u64 << self.n;
        }
        self.a
            .iter()
            .map(|a| 1u64 << (self.n - a.count_ones().min(self.n)))
            .min()
            .unwrap_or(1u64 << self.n)
    }

    fn note_best(&mut self) {
        let product = (self.a.len() * self.b.len()) as u64;
        if product > self.best_product {
            self.best_product = product;
            self.best_witness = (self.a.clone(), self.b.clone());
        }
    }

    fn dfs(&mut self, ai: usize, bi: usize, a_open: bool, b_open: bool) {
        if self.truncated {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.truncated = true;
            return;
        }
        self.note_best();

        let remaining = self.universe.len();
        let ub_a = if a_open {
            ((self.a.len() + (remaining - ai)) as u64).min(self.cap_a())
        } else {
            self.a.len() as u64
        };
        let ub_b = if b_open {
            ((self.b.len() + (remaining - bi)) as u64).min(self.cap_b())
        } else {
            self.b.len() as u64
        };
        if ub_a * ub_b <= self.best_product {
            return;
        }

        let extend_a = a_open && (!b_open || ub_a >= ub_b);
        if extend_a {
            for ci in ai..remaining {
                let c = self.universe[ci];
                // symmetry break: the least member of A may be taken with
                // its elements packed low
                if self.a.is_empty() && c != (1u64 << c.count_ones()) - 1 {
                    continue;
                }
                if !self.can_add_a(c) {
                    continue;
                }
                let undo = self.commit_a(c);
                self.dfs(ci + 1, bi, true, b_open);
                self.rollback(undo, true);
                if self.truncated {
                    return;
                }
            }
            self.dfs(ai, bi, false, b_open);
        } else if b_open {
            for ci in bi..remaining {
                let c = self.universe[ci];
                if !self.can_add_b(c) {
                    continue;
                }
                let undo = self.commit_b(c);
                self.dfs(ai, ci + 1, a_open, true);
                self.rollback(undo, false);
                if self.truncated {
                    return;
                }
            }
            self.dfs(ai, bi, a_open, false);
        }
    }
}

/// Branch-and-bound maximum product under a node budget. Exceeding the
/// budget is not an error: the best pair found so far is returned with
/// `exhaustive = false`. With `k_uniform` set, both families draw members
/// of cardinality `k` only.
///
/// The witness is the first maximiser met in the deterministic ascending
/// candidate order.
pub fn bnb_max_product(
    n: u32,
    kind: PairKind,
    budget: u64,
    k_uniform: Option<u32>,
) -> Result<SearchResult, SearchError> {
    if n > BNB_MAX_N {
        return Err(SearchError::BnbCap(n));
    }
    if budget == 0 {
        return Err(SearchError::InvalidParameter("budget must be >= 1".into()));
    }
    if let Some(k) = k_uniform {
        if k > n {
            return Err(SearchError::InvalidParameter(format!(
                "uniformity {k} exceeds ground size {n}"
            )));
        }
    }
    let universe: Vec<u64> = (0..1u64 << n)
        .filter(|m| k_uniform.is_none_or(|k| m.count_ones() == k))
        .collect();
    let mut state = Bnb {
        n,
        kind,
        universe,
        budget,
        nodes: 0,
        truncated: false,
        a: Vec::new(),
        b: Vec::new(),
        best_product: 0,
        best_witness: (Vec::new(), Vec::new()),
        left_map: HashMap::new(),
        right_map: HashMap::new(),
    };
    state.dfs(0, 0, true, true);

    let (a_masks, b_masks) = state.best_witness;
    let witness = PairOfFamilies::new(
        SetFamily::from_masks(n, a_masks).expect("witness masks are valid"),
        SetFamily::from_masks(n, b_masks).expect("witness masks are valid"),
    )
    .expect("witness families share the ground set");
    Ok(SearchResult {
        n,
        kind,
        best_product: state.best_product,
        witness,
        exhaustive: !state.truncated,
        nodes_explored: state.nodes,
    })
}
