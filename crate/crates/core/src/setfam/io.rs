//! Pair file parsing and serialization.
//!
//! Text form:
//!
//! ```text
//! n=2
//! A:
//! {}
//! {1}
//! B:
//! {}
//! {2}
//! ```
//!
//! One set per line, written `{}` or `{i1,i2,...}` with ascending 1-based
//! indices. Blank lines are ignored. A JSON object
//! `{"n": 2, "a": [[], [1]], "b": [[], [2]]}` is accepted as an alternative
//! input form (detected by a leading `{`).

use super::{ElementSet, FamilyError, PairOfFamilies, SetFamily};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: malformed input: {text}")]
    MalformedLine { line: usize, text: String },
    #[error("line {line}: element index {index} out of range for ground set [{ground}]")]
    IndexOutOfRange {
        line: usize,
        index: u64,
        ground: u32,
    },
    #[error("line {line}: duplicate set {set} in family {family}")]
    DuplicateSet {
        line: usize,
        set: String,
        family: char,
    },
    #[error("missing `{0}` section")]
    MissingSection(&'static str),
    #[error("invalid JSON pair: {0}")]
    Json(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

#[derive(Serialize, Deserialize)]
struct JsonPair {
    n: u32,
    a: Vec<Vec<u64>>,
    b: Vec<Vec<u64>>,
}

/// Parses the text or JSON pair format.
pub fn parse_pair(text: &str) -> Result<PairOfFamilies, ParseError> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_text(text)
    }
}

/// Canonical text serialization; `parse_pair(serialize_pair(p)) == p`.
pub fn serialize_pair(pair: &PairOfFamilies) -> String {
    let mut out = format!("n={}\n", pair.ground_size());
    out.push_str("A:\n");
    for m in pair.a().iter() {
        out.push_str(&m.to_string());
        out.push('\n');
    }
    out.push_str("B:\n");
    for m in pair.b().iter() {
        out.push_str(&m.to_string());
        out.push('\n');
    }
    out
}

/// JSON form of a pair, with 1-based element indices.
pub fn pair_to_json(pair: &PairOfFamilies) -> serde_json::Value {
    let encode = |fam: &SetFamily| -> Vec<Vec<u64>> {
        fam.iter()
            .map(|m| m.elements().map(|i| i as u64 + 1).collect())
            .collect()
    };
    serde_json::json!({
        "n": pair.ground_size(),
        "a": encode(pair.a()),
        "b": encode(pair.b()),
    })
}

fn parse_json(text: &str) -> Result<PairOfFamilies, ParseError> {
    let raw: JsonPair = serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))?;
    let decode = |sets: &[Vec<u64>], family: char| -> Result<SetFamily, ParseError> {
        let mut members = Vec::with_capacity(sets.len());
        for set in sets {
            let mut mask = 0u64;
            for &idx in set {
                if idx == 0 || idx > raw.n as u64 {
                    return Err(ParseError::IndexOutOfRange {
                        line: 0,
                        index: idx,
                        ground: raw.n,
                    });
                }
                mask |= 1u64 << (idx - 1);
            }
            members.push(ElementSet::from_mask(mask));
        }
        SetFamily::new(raw.n, members).map_err(|e| match e {
            FamilyError::DuplicateMember(set) => ParseError::DuplicateSet {
                line: 0,
                set: set.to_string(),
                family,
            },
            other => ParseError::Family(other),
        })
    };
    Ok(PairOfFamilies::new(
        decode(&raw.a, 'A')?,
        decode(&raw.b, 'B')?,
    )?)
}

fn parse_set_line(line: &str, line_no: usize, ground: u32) -> Result<ElementSet, ParseError> {
    let malformed = || ParseError::MalformedLine {
        line: line_no,
        text: line.to_string(),
    };
    let inner = line
        .strip_prefix('{')
        .and_then(|rest| rest.strip_suffix('}'))
        .ok_or_else(malformed)?
        .trim();
    if inner.is_empty() {
        return Ok(ElementSet::EMPTY);
    }
    let mut mask = 0u64;
    let mut prev = 0u64;
    for part in inner.split(',') {
        let idx: u64 = part.trim().parse().map_err(|_| malformed())?;
        if idx == 0 || idx > ground as u64 {
            return Err(ParseError::IndexOutOfRange {
                line: line_no,
                index: idx,
                ground,
            });
        }
        if idx <= prev {
            // indices must be strictly ascending
            return Err(malformed());
        }
        prev = idx;
        mask |= 1u64 << (idx - 1);
    }
    Ok(ElementSet::from_mask(mask))
}

fn parse_text(text: &str) -> Result<PairOfFamilies, ParseError> {
    #[derive(PartialEq)]
    enum Section {
        Header,
        BeforeA,
        A,
        B,
    }
    let mut section = Section::Header;
    let mut ground = 0u32;
    let mut a_sets: Vec<(usize, ElementSet)> = Vec::new();
    let mut b_sets: Vec<(usize, ElementSet)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        match section {
            Section::Header => {
                let n_str = line.strip_prefix("n=").ok_or(ParseError::MalformedLine {
                    line: line_no,
                    text: line.to_string(),
                })?;
                ground = n_str
                    .trim()
                    .parse()
                    .map_err(|_| ParseError::MalformedLine {
                        line: line_no,
                        text: line.to_string(),
                    })?;
                if ground > super::MAX_GROUND {
                    return Err(FamilyError::GroundTooLarge(ground).into());
                }
                section = Section::BeforeA;
            }
            Section::BeforeA if line == "A:" => section = Section::A,
            Section::BeforeA => {
                return Err(ParseError::MalformedLine {
                    line: line_no,
                    text: line.to_string(),
                })
            }
            Section::A if line == "B:" => section = Section::B,
            Section::A => a_sets.push((line_no, parse_set_line(line, line_no, ground)?)),
            Section::B => b_sets.push((line_no, parse_set_line(line, line_no, ground)?)),
        }
    }
    match section {
        Section::Header => return Err(ParseError::MissingSection("n=")),
        Section::BeforeA => return Err(ParseError::MissingSection("A:")),
        Section::A => return Err(ParseError::MissingSection("B:")),
        Section::B => {}
    }

    let build = |sets: Vec<(usize, ElementSet)>, family: char| -> Result<SetFamily, ParseError> {
        let mut seen = std::collections::HashSet::new();
        for &(line, set) in &sets {
            if !seen.insert(set) {
                return Err(ParseError::DuplicateSet {
                    line,
                    set: set.to_string(),
                    family,
                });
            }
        }
        Ok(SetFamily::new(
            ground,
            sets.into_iter().map(|(_, s)| s).collect(),
        )?)
    };
    Ok(PairOfFamilies::new(
        build(a_sets, 'A')?,
        build(b_sets, 'B')?,
    )?)
}
