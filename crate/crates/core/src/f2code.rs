//! GF(2) linear algebra and the linear-code construction of large
//! left-cancellative pairs.
//!
//! A matrix `M` in `F_2^{n x m}` (with `m = n - k`) is stored as `n` rows of
//! `m` bits packed into machine words. A row subset `S` of size `m` is an
//! information set when the square submatrix it selects is invertible. The
//! construction takes the column-space image of `M` as one family and the
//! complements of the information sets as the other; the resulting pair is
//! always left-cancellative.
//!
//! Randomness is deterministic: matrices are drawn from ChaCha8 seeded with
//! the caller's seed, and multi-trial runs give trial `t` its own ChaCha8
//! stream `t` of the same seed, so results are reproducible from
//! `(n, k, trials, seed)` regardless of scheduling.

use crate::setfam::{ElementSet, FamilyError, PairOfFamilies, SetFamily, Side};
use num_integer::binomial;
use num_rational::Ratio;
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Exhaustive subset enumeration is limited to this many rows.
pub const EXHAUSTIVE_CAP: u32 = 24;

#[derive(Debug, Error, PartialEq)]
pub enum F2Error {
    #[error("matrix shape must satisfy m <= n <= 64, got {n} x {m}")]
    BadShape { n: u32, m: u32 },
    #[error("row {row} has bits outside the {m} columns")]
    RowOutOfRange { row: usize, m: u32 },
    #[error("subset size {got} does not match the column count {expected}")]
    WrongSubsetSize { got: u32, expected: u32 },
    #[error("exhaustive enumeration requires n <= {EXHAUSTIVE_CAP}, got {0}")]
    EnumerationCap(u32),
    #[error("matrix has no information set; the construction is vacuous")]
    NoInformationSet,
    #[error("requires k < n <= 64, got n = {n}, k = {k}")]
    BadCodeParams { n: u32, k: u32 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("pair is not left-cancellative")]
    NotLeftCancellative,
    #[error("malformed matrix file: {0}")]
    Parse(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// An `n x m` matrix over GF(2), rows as `m`-bit words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct F2Matrix {
    n: u32,
    m: u32,
    rows: Vec<u64>,
}

fn col_mask(m: u32) -> u64 {
    if m == 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

impl F2Matrix {
    pub fn new(n: u32, m: u32, rows: Vec<u64>) -> Result<Self, F2Error> {
        if m > n || n > 64 || m == 0 {
            return Err(F2Error::BadShape { n, m });
        }
        if rows.len() != n as usize {
            return Err(F2Error::Parse(format!(
                "expected {n} rows, got {}",
                rows.len()
            )));
        }
        let mask = col_mask(m);
        for (row, &r) in rows.iter().enumerate() {
            if r & !mask != 0 {
                return Err(F2Error::RowOutOfRange { row, m });
            }
        }
        Ok(F2Matrix { n, m, rows })
    }

    /// Uniformly random `n x (n-k)` matrix from a seeded ChaCha8 stream.
    /// The same seed always yields the same matrix.
    pub fn random(n: u32, k: u32, seed: u64) -> Result<Self, F2Error> {
        Self::random_from_rng(n, k, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// The matrix drawn by trial `trial` of a multi-trial run with the given
    /// master seed: ChaCha8 stream `trial` of that seed. [`best_construction`]
    /// uses exactly this derivation, so any reported trial can be rebuilt.
    pub fn trial_matrix(n: u32, k: u32, seed: u64, trial: u64) -> Result<Self, F2Error> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        Self::random_from_rng(n, k, &mut rng)
    }

    fn random_from_rng(n: u32, k: u32, rng: &mut ChaCha8Rng) -> Result<Self, F2Error> {
        if k >= n || n > 64 {
            return Err(F2Error::BadCodeParams { n, k });
        }
        let m = n - k;
        let mask = col_mask(m);
        let rows = (0..n).map(|_| rng.next_u64() & mask).collect();
        F2Matrix::new(n, m, rows)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    /// Parses the text form: a `n m` header line, then `n` lines of `m`
    /// bits, leftmost character = column 1.
    pub fn parse(text: &str) -> Result<Self, F2Error> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| F2Error::Parse("empty input".into()))?;
        let mut parts = header.split_whitespace();
        let n: u32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| F2Error::Parse(format!("bad header `{header}`")))?;
        let m: u32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| F2Error::Parse(format!("bad header `{header}`")))?;
        let mut rows = Vec::with_capacity(n as usize);
        for line in lines {
            let line = line.trim();
            if line.len() != m as usize {
                return Err(F2Error::Parse(format!(
                    "row `{line}` does not have {m} bits"
                )));
            }
            let mut row = 0u64;
            for (j, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => row |= 1u64 << j,
                    _ => return Err(F2Error::Parse(format!("bad bit `{ch}` in row `{line}`"))),
                }
            }
            rows.push(row);
        }
        F2Matrix::new(n, m, rows)
    }

    pub fn serialize(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.m);
        for &row in &self.rows {
            for j in 0..self.m {
                out.push(if row & (1u64 << j) != 0 { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    /// GF(2) rank of the selected rows by word-level elimination.
    fn rank_of_selected(&self, selected: ElementSet) -> u32 {
        let mut basis = [0u64; 64];
        let mut rank = 0u32;
        for i in selected.elements() {
            let mut row = self.rows[i as usize];
            while row != 0 {
                let lead = 63 - row.leading_zeros() as usize;
                if basis[lead] == 0 {
                    basis[lead] = row;
                    rank += 1;
                    break;
                }
                row ^= basis[lead];
            }
        }
        rank
    }

    /// Whether the square submatrix on the rows `s` is invertible.
    /// `s` must have exactly `m` elements.
    pub fn is_information_set(&self, s: ElementSet) -> Result<bool, F2Error> {
        if s.card() != self.m {
            return Err(F2Error::WrongSubsetSize {
                got: s.card(),
                expected: self.m,
            });
        }
        Ok(self.rank_of_selected(s) == self.m)
    }

    /// All information sets, by exhaustive enumeration of
    /// `C(n, m)` subsets. Requires `n <= EXHAUSTIVE_CAP`.
    pub fn information_sets(&self) -> Result<Vec<ElementSet>, F2Error> {
        if self.n > EXHAUSTIVE_CAP {
            return Err(F2Error::EnumerationCap(self.n));
        }
        let mut out = Vec::new();
        // Gosper's hack over all m-bit subsets of [n].
        let limit = 1u64 << self.n;
        let mut subset = col_mask(self.m);
        while subset < limit {
            let s = ElementSet::from_mask(subset);
            if self.rank_of_selected(s) == self.m {
                out.push(s);
            }
            let c = subset & subset.wrapping_neg();
            let r = subset + c;
            if r >= limit {
                break;
            }
            subset = (((r ^ subset) >> 2) / c) | r;
        }
        Ok(out)
    }

    /// Exhaustive information-set count and fraction over all
    /// `C(n, n-k)` subsets.
    pub fn enumerate_information_sets(&self) -> Result<InfoSetReport, F2Error> {
        let sets = self.information_sets()?;
        let total = binomial(self.n as u64, self.m as u64);
        Ok(InfoSetReport {
            total,
            count: sets.len() as u64,
            fraction: Ratio::new(sets.len() as u64, total),
            exhaustive: true,
        })
    }

    /// Unbiased fraction estimate from uniformly sampled `m`-subsets; for
    /// matrices beyond the exhaustive cap.
    pub fn sample_information_fraction(
        &self,
        samples: u64,
        seed: u64,
    ) -> Result<InfoSetReport, F2Error> {
        if samples == 0 {
            return Err(F2Error::InvalidParameter("samples must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = 0u64;
        let mut indices: Vec<u32> = (0..self.n).collect();
        for _ in 0..samples {
            // partial Fisher-Yates: the first m entries become the sample
            for i in 0..self.m as usize {
                let j = i + (rng.next_u64() as usize) % (indices.len() - i);
                indices.swap(i, j);
            }
            let s = ElementSet::from_elements(&indices[..self.m as usize]);
            if self.rank_of_selected(s) == self.m {
                hits += 1;
            }
        }
        Ok(InfoSetReport {
            total: samples,
            count: hits,
            fraction: Ratio::new(hits, samples),
            exhaustive: false,
        })
    }

    /// The column-space image as subset masks of `[n]`, one entry per
    /// coefficient vector (duplicates appear when the rank is deficient).
    pub fn column_space(&self) -> Vec<u64> {
        // column j as an n-bit mask over the rows
        let cols: Vec<u64> = (0..self.m)
            .map(|j| {
                self.rows
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (i, &row)| acc | (((row >> j) & 1) << i))
            })
            .collect();
        let size = 1usize << self.m;
        let mut image = vec![0u64; size];
        for v in 1..size {
            let low = v.trailing_zeros() as usize;
            image[v] = image[v & (v - 1)] ^ cols[low];
        }
        image
    }

    /// The left-cancellative pair built from this matrix: the column-space
    /// image against the complements of the information sets. Errors when
    /// no information set exists.
    pub fn tolhuizen_pair(&self) -> Result<PairOfFamilies, F2Error> {
        let info_sets = self.information_sets()?;
        if info_sets.is_empty() {
            return Err(F2Error::NoInformationSet);
        }
        let a = SetFamily::from_masks(self.n, self.column_space())?;
        debug_assert_eq!(a.len() as u64, 1u64 << self.m, "image of full-rank matrix");
        let b_members = info_sets.iter().map(|s| s.complement_in(self.n)).collect();
        let b = SetFamily::new(self.n, b_members)?;
        Ok(PairOfFamilies::new(a, b)?)
    }
}

/// Information-set census of one matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfoSetReport {
    /// Subsets tested: `C(n, n-k)` when exhaustive, the sample count otherwise.
    pub total: u64,
    pub count: u64,
    pub fraction: Ratio<u64>,
    pub exhaustive: bool,
}

/// Probability that a uniformly random `m x m` GF(2) matrix is invertible:
/// the finite product over `i = 1..=m` of `(1 - 2^-i)`.
pub fn expected_info_fraction(m: u32) -> f64 {
    (1..=m).map(|i| 1.0 - 0.5f64.powi(i as i32)).product()
}

/// Limit of [`expected_info_fraction`] as `m` grows; approximately 0.288788.
pub fn invertible_fraction_limit() -> f64 {
    expected_info_fraction(64)
}

/// Summary of a multi-trial construction run.
#[derive(Clone, Debug, Serialize)]
pub struct TolhuizenReport {
    pub n: u32,
    pub k: u32,
    pub trials: u64,
    pub seed: u64,
    /// Trial index that produced the kept matrix.
    pub best_trial: u64,
    pub best_info_sets: u64,
    /// `C(n, n-k)`: subsets tested per trial.
    pub total_subsets: u64,
    /// Best trial's information-set fraction.
    pub fraction: f64,
    /// Mean fraction across all trials.
    pub mean_fraction: f64,
    /// `2^{n-k} * best_info_sets = |A||B|` of the kept pair.
    pub product: u128,
    /// `log(|A||B|) / (n log 3)`.
    pub log3_ratio: f64,
}

/// Best-of-`trials` construction with the kept matrix and its pair.
#[derive(Clone, Debug)]
pub struct BestConstruction {
    pub matrix: F2Matrix,
    pub pair: PairOfFamilies,
    pub report: TolhuizenReport,
}

/// Draws `trials` random matrices, keeps the one with the most information
/// sets (smallest trial index on ties) and builds its pair. Trials run in
/// parallel; the outcome is independent of scheduling.
pub fn best_construction(
    n: u32,
    k: u32,
    trials: u64,
    seed: u64,
) -> Result<BestConstruction, F2Error> {
    if trials == 0 {
        return Err(F2Error::InvalidParameter("trials must be >= 1".into()));
    }
    if k >= n || n > 64 {
        return Err(F2Error::BadCodeParams { n, k });
    }
    if n > EXHAUSTIVE_CAP {
        return Err(F2Error::EnumerationCap(n));
    }
    let results: Vec<(u64, u64)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let matrix =
                F2Matrix::trial_matrix(n, k, seed, trial).expect("parameters validated above");
            let report = matrix
                .enumerate_information_sets()
                .expect("n is within the enumeration cap");
            (trial, report.count)
        })
        .collect();

    let total_subsets = binomial(n as u64, (n - k) as u64);
    let mean_fraction = results.iter().map(|&(_, c)| c as f64).sum::<f64>()
        / (trials as f64 * total_subsets as f64);
    let &(best_trial, best_count) = results
        .iter()
        .max_by_key(|&&(trial, count)| (count, std::cmp::Reverse(trial)))
        .expect("trials >= 1");
    if best_count == 0 {
        return Err(F2Error::NoInformationSet);
    }

    let matrix = F2Matrix::trial_matrix(n, k, seed, best_trial)?;
    let pair = matrix.tolhuizen_pair()?;
    let product = (1u128 << (n - k)) * best_count as u128;
    let log3_ratio = (product as f64).ln() / (n as f64 * 3f64.ln());
    Ok(BestConstruction {
        matrix,
        pair,
        report: TolhuizenReport {
            n,
            k,
            trials,
            seed,
            best_trial,
            best_info_sets: best_count,
            total_subsets,
            fraction: best_count as f64 / total_subsets as f64,
            mean_fraction,
            product,
            log3_ratio,
        },
    })
}

/// Detail of the one-sided size bounds on a left-cancellative pair.
#[derive(Clone, Debug, Serialize)]
pub struct UpperCheck {
    pub ok: bool,
    pub a_size: u64,
    pub b_size: u64,
    pub product: u128,
    /// `3^n`.
    pub three_pow_n: u128,
    /// Every `B` member satisfies `|A| <= 2^{n - |B|}`.
    pub per_member_ok: bool,
    /// The smallest slack bound `2^{n - |B|}` over the `B` side.
    pub tightest_bound: u128,
    /// `|A||B| <= 3^n`.
    pub product_ok: bool,
    /// `sum_i 2^{n-i} C(n,i) == 3^n` exactly in integers.
    pub binomial_identity_ok: bool,
}

/// Exact integer check of `sum_{i=0}^{n} 2^{n-i} C(n,i) == 3^n`.
pub fn binomial_identity_holds(n: u32) -> bool {
    let sum: u128 = (0..=n)
        .map(|i| (1u128 << (n - i)) * binomial(n as u128, i as u128))
        .sum();
    sum == 3u128.pow(n)
}

/// Verifies the one-sided upper bounds on a left-cancellative pair:
/// `|A| <= 2^{n-|B|}` for every `B`, `|A||B| <= 3^n`, and the exact
/// binomial identity behind the `3^n` bound. Errors when the input is not
/// left-cancellative instead of reporting on it.
pub fn one_sided_upper_check(pair: &PairOfFamilies) -> Result<UpperCheck, F2Error> {
    if !pair.is_cancellative(Side::Left) {
        return Err(F2Error::NotLeftCancellative);
    }
    let n = pair.ground_size();
    let a_size = pair.a().len() as u64;
    let b_size = pair.b().len() as u64;
    let mut per_member_ok = true;
    let mut tightest = 1u128 << n;
    for b in pair.b().iter() {
        let bound = 1u128 << (n - b.card());
        tightest = tightest.min(bound);
        if a_size as u128 > bound {
            per_member_ok = false;
        }
    }
    let product = pair.product_size();
    let three_pow_n = 3u128.pow(n);
    let product_ok = product <= three_pow_n;
    let binomial_identity_ok = binomial_identity_holds(n);
    Ok(UpperCheck {
        ok: per_member_ok && product_ok && binomial_identity_ok,
        a_size,
        b_size,
        product,
        three_pow_n,
        per_member_ok,
        tightest_bound: tightest,
        product_ok,
        binomial_identity_ok,
    })
}
