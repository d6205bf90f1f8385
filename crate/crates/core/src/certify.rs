//! Certified global upper bounds on the unit square by full grid evaluation
//! plus a Lipschitz margin.
//!
//! For a function with per-variable Lipschitz constant `L`, the supremum
//! over `[0,1]^2` exceeds the maximum over the `(k+1)^2` grid points
//! `(i/k, j/k)` by at most `L/k`, so `grid_max + L/k` is a certified upper
//! bound. The margin follows that exact accounting; no sharper per-axis
//! split is applied.

use crate::bounds;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CertifyError {
    #[error("unknown function id `{0}` (built-ins: g_star, quad_test)")]
    UnknownFunction(String),
    #[error("function `{0}` requires parameter {1}")]
    MissingParam(&'static str, &'static str),
    #[error("invalid grid spec: {0}")]
    InvalidSpec(String),
    #[error("(k+1)^2 evaluations overflow the counter for k = {0}")]
    EvaluationOverflow(u32),
}

/// A registered target function on `[0,1]^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridFunction {
    /// The clamped symmetric bound function `g*(x, y, theta)`; finite on the
    /// closed square because the clamped entropy is constant near 0 and 1.
    GStar { theta: f64 },
    /// `1 - (x - 1/2)^2 - (y - 1/2)^2`: known maximum 1 at the centre,
    /// per-variable Lipschitz constant 1. Used to exercise the machinery.
    QuadTest,
}

impl GridFunction {
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self, CertifyError> {
        match name {
            "g_star" => {
                let theta = *params
                    .first()
                    .ok_or(CertifyError::MissingParam("g_star", "theta"))?;
                if theta.is_nan() || theta <= 0.0 {
                    return Err(CertifyError::InvalidSpec(format!(
                        "theta must be positive, got {theta}"
                    )));
                }
                Ok(GridFunction::GStar { theta })
            }
            "quad_test" => Ok(GridFunction::QuadTest),
            other => Err(CertifyError::UnknownFunction(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GridFunction::GStar { .. } => "g_star",
            GridFunction::QuadTest => "quad_test",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            GridFunction::GStar { theta } => vec![*theta],
            GridFunction::QuadTest => vec![],
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            GridFunction::GStar { theta } => bounds::g_value(x, y, *theta, true)
                .expect("g_star is total on the closed unit square"),
            GridFunction::QuadTest => 1.0 - (x - 0.5) * (x - 0.5) - (y - 0.5) * (y - 0.5),
        }
    }
}

/// Grid certification request.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub func: GridFunction,
    /// Subdivisions per axis; the grid has `(k+1)^2` points.
    pub k: u32,
    /// Assumed per-variable Lipschitz constant.
    pub lipschitz: f64,
    /// The certification passes when `grid_max + lipschitz/k < threshold`.
    pub threshold: f64,
}

impl GridSpec {
    pub fn new(
        func: GridFunction,
        k: u32,
        lipschitz: f64,
        threshold: f64,
    ) -> Result<Self, CertifyError> {
        if k < 1 {
            return Err(CertifyError::InvalidSpec("k must be >= 1".into()));
        }
        if lipschitz.is_nan() || lipschitz <= 0.0 {
            return Err(CertifyError::InvalidSpec(format!(
                "lipschitz constant must be positive, got {lipschitz}"
            )));
        }
        Ok(GridSpec {
            func,
            k,
            lipschitz,
            threshold,
        })
    }
}

/// Outcome of a grid certification. Equality ignores the wall-clock field.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub func: String,
    pub params: Vec<f64>,
    pub k: u32,
    pub lipschitz: f64,
    pub threshold: f64,
    /// Exact maximum over all grid points.
    pub grid_max: f64,
    /// Grid coordinates of the maximum, lexicographically least on ties.
    pub argmax: [f64; 2],
    /// `lipschitz / k`.
    pub margin: f64,
    /// `grid_max + margin`.
    pub certified_bound: f64,
    pub pass: bool,
    pub evaluations: u64,
    pub wall_ms: u64,
}

impl PartialEq for Certificate {
    fn eq(&self, other: &Self) -> bool {
        self.func == other.func
            && self.params == other.params
            && self.k == other.k
            && self.lipschitz == other.lipschitz
            && self.threshold == other.threshold
            && self.grid_max == other.grid_max
            && self.argmax == other.argmax
            && self.margin == other.margin
            && self.certified_bound == other.certified_bound
            && self.pass == other.pass
            && self.evaluations == other.evaluations
    }
}

#[derive(Clone, Copy)]
struct GridPoint {
    value: f64,
    i: u32,
    j: u32,
}

/// Order-independent max: larger value wins, ties go to the smaller (i, j).
fn better(p: GridPoint, q: GridPoint) -> GridPoint {
    if p.value > q.value {
        p
    } else if q.value > p.value {
        q
    } else if (p.i, p.j) <= (q.i, q.j) {
        p
    } else {
        q
    }
}

const PROGRESS_STRIDE: u64 = 10_000_000;

/// Evaluates the function at every grid point and returns the certificate.
///
/// Rows are evaluated in parallel on the current rayon pool; the reduction
/// is a commutative max, so the result is identical for any worker count.
pub fn grid_certify(spec: &GridSpec) -> Result<Certificate, CertifyError> {
    grid_certify_with_progress(spec, None)
}

/// As [`grid_certify`], invoking `progress` with the running evaluation
/// count roughly every 10^7 evaluations.
pub fn grid_certify_with_progress(
    spec: &GridSpec,
    progress: Option<&(dyn Fn(u64) + Sync)>,
) -> Result<Certificate, CertifyError> {
    if spec.k < 1 {
        return Err(CertifyError::InvalidSpec("k must be >= 1".into()));
    }
    let k = spec.k;
    let per_row = k as u64 + 1;
    let evaluations = per_row
        .checked_mul(per_row)
        .ok_or(CertifyError::EvaluationOverflow(k))?;
    let kf = k as f64;
    let start = Instant::now();
    let counter = AtomicU64::new(0);

    let row_scan: Box<dyn Fn(u32) -> GridPoint + Sync> = match spec.func {
        GridFunction::GStar { theta } => {
            let log2_t = theta.log2();
            // h*(i/k) table: reused for both the x and y diagonal terms.
            let h_star: Vec<f64> = (0..=k).map(|i| bounds::h_star_raw(i as f64 / kf)).collect();
            Box::new(move |i: u32| {
                let x = i as f64 / kf;
                let hx = h_star[i as usize];
                let mut best = GridPoint {
                    value: f64::NEG_INFINITY,
                    i: 0,
                    j: 0,
                };
                for j in 0..=k {
                    let y = j as f64 / kf;
                    let xz = x * (1.0 - y);
                    let yz = y * (1.0 - x);
                    let value = xz * hx
                        + bounds::h_star_raw(xz)
                        + yz * h_star[j as usize]
                        + bounds::h_star_raw(yz)
                        - (x + y) * log2_t;
                    best = better(best, GridPoint { value, i, j });
                }
                best
            })
        }
        func => Box::new(move |i: u32| {
            let x = i as f64 / kf;
            let mut best = GridPoint {
                value: f64::NEG_INFINITY,
                i: 0,
                j: 0,
            };
            for j in 0..=k {
                let y = j as f64 / kf;
                best = better(
                    best,
                    GridPoint {
                        value: func.eval(x, y),
                        i,
                        j,
                    },
                );
            }
            best
        }),
    };

    let identity = GridPoint {
        value: f64::NEG_INFINITY,
        i: u32::MAX,
        j: u32::MAX,
    };
    let top = (0..=k)
        .into_par_iter()
        .map(|i| {
            let row_best = row_scan(i);
            if let Some(report) = progress {
                let done = counter.fetch_add(per_row, Ordering::Relaxed) + per_row;
                if done / PROGRESS_STRIDE != (done - per_row) / PROGRESS_STRIDE {
                    report(done);
                }
            }
            row_best
        })
        .reduce(|| identity, better);

    let margin = spec.lipschitz / kf;
    let certified_bound = top.value + margin;
    Ok(Certificate {
        func: spec.func.name().to_string(),
        params: spec.func.params(),
        k,
        lipschitz: spec.lipschitz,
        threshold: spec.threshold,
        grid_max: top.value,
        argmax: [top.i as f64 / kf, top.j as f64 / kf],
        margin,
        certified_bound,
        pass: certified_bound < spec.threshold,
        evaluations,
        wall_ms: start.elapsed().as_millis() as u64,
    })
}

/// Largest observed axis-aligned difference quotient
/// `|f(x + d, y) - f(x, y)| / d` (and the y-axis analogue) with `d = 1e-5`
/// over points sampled uniformly from `(0.001, 0.999)^2`.
pub fn empirical_lipschitz(func: &GridFunction, samples: u64, seed: u64) -> f64 {
    const DELTA: f64 = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x: f64 = rng.gen_range(0.001..0.999);
        let y: f64 = rng.gen_range(0.001..0.999);
        let base = func.eval(x, y);
        let dx = (func.eval(x + DELTA, y) - base).abs() / DELTA;
        let dy = (func.eval(x, y + DELTA) - base).abs() / DELTA;
        worst = worst.max(dx).max(dy);
    }
    worst
}

/// The reference certification at full scale: `g*` with theta 2.222 on a
/// 30000-subdivision grid, Lipschitz constant 25, threshold log2(2.2499).
pub fn reference_grid_spec() -> GridSpec {
    GridSpec {
        func: GridFunction::GStar {
            theta: bounds::consts::THETA,
        },
        k: 30_000,
        lipschitz: 25.0,
        threshold: bounds::consts::RATE_FLOOR.log2(),
    }
}

/// Runs [`reference_grid_spec`] and returns the certificate.
pub fn reference_certification() -> Result<Certificate, CertifyError> {
    grid_certify(&reference_grid_spec())
}
