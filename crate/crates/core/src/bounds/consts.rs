//! Named numeric constants of the rate analysis. None of these are
//! hardcoded into the evaluators; they are default arguments and reference
//! points for reports and tests.

/// Filtered-ratio base used by the rate recursion.
pub const THETA: f64 = 2.222;

/// Uniformity split point of the rate recursion.
pub const ALPHA: f64 = 0.27;

/// Floor term inside the rate maximum: the recursion never certifies a base
/// below this value.
pub const RATE_FLOOR: f64 = 2.2499;

/// Headline per-n base claimed for recovering pairs.
pub const RECOVERING_RATE: f64 = 2.2543;

/// Best known construction rate for cancellative pairs (lower bound).
pub const MU_CAN_LOWER: f64 = 2.25;

/// Best published upper bound on the cancellative rate.
pub const MU_CAN_UPPER: f64 = 2.2682;

/// Best previously published upper bound for recovering pairs only.
pub const MU_REC_UPPER: f64 = 2.2663;
