//! Analysis toolkit for recovering and cancellative pairs of set families.
//!
//! The crate is organised around five subsystems:
//!
//! - [`setfam`]: bitmask set families over a ground set `[n]` (`n <= 64`),
//!   the recovering/cancellative predicates, restrictions, filtered pairs
//!   and density profiles.
//! - [`bounds`]: the scalar machinery behind the entropy upper bounds —
//!   binary entropy and its clamped variant, the `f`/`g` bound functions,
//!   rate arithmetic and per-pair condition checks.
//! - [`certify`]: certified global upper bounds for 2-D functions on the
//!   unit square by exhaustive Lipschitz grid search.
//! - [`f2code`]: GF(2) linear algebra, information sets and the linear-code
//!   construction of large left-cancellative pairs.
//! - [`search`]: exact maximum-product search over pairs at small `n`,
//!   exhaustively or by branch and bound.

pub mod bounds;
pub mod certify;
pub mod f2code;
pub mod search;
pub mod setfam;

pub use setfam::{DensityProfile, ElementSet, PairOfFamilies, SetFamily, Side};
