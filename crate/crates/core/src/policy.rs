//! Deterministic path generators: wait-k, alignment oracle, and synthetic
//! writing probability matrices for exercising the transposition pipeline.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, WritingProbabilityMatrix};
use crate::metrics::OraclePositions;
use crate::path::GSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicySpec {
    WaitK { k: usize },
    OracleAlignment,
    /// Re-evaluate paths supplied from a file.
    Replay,
}

impl PolicySpec {
    pub fn wait_k(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("policy", "wait-k needs k >= 1"));
        }
        Ok(PolicySpec::WaitK { k })
    }

    /// Parse a policy name; `k` is required for `wait_k` and ignored otherwise.
    pub fn parse(name: &str, k: Option<usize>) -> Result<Self> {
        match name.parse::<PolicyKind>()? {
            PolicyKind::WaitK => {
                let k = k.ok_or_else(|| Error::invalid("policy", "wait_k requires --k"))?;
                Self::wait_k(k)
            }
            PolicyKind::OracleAlignment => Ok(PolicySpec::OracleAlignment),
            PolicyKind::Replay => Ok(PolicySpec::Replay),
        }
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::WaitK { k } => write!(f, "wait_k(k={k})"),
            PolicySpec::OracleAlignment => write!(f, "oracle_alignment"),
            PolicySpec::Replay => write!(f, "replay"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PolicyKind {
    WaitK,
    OracleAlignment,
    Replay,
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wait_k" | "wait-k" => Ok(PolicyKind::WaitK),
            "oracle_alignment" | "oracle" => Ok(PolicyKind::OracleAlignment),
            "replay" => Ok(PolicyKind::Replay),
            other => Err(Error::invalid("policy", format!("unknown policy {other:?}"))),
        }
    }
}

/// Read `k` tokens, then alternate WRITE and READ: `g_i = min(k + i - 1, J)`.
pub fn wait_k_path(k: usize, target_len: usize, source_len: usize) -> Result<GSequence> {
    if k == 0 || target_len == 0 || source_len == 0 {
        return Err(Error::invalid(
            "wait-k arguments",
            format!("k={k}, I={target_len}, J={source_len} must all be positive"),
        ));
    }
    GSequence::new((0..target_len).map(|i| (k + i).min(source_len)).collect())
}

/// Write each target once its aligned source token (and every earlier one) is read.
///
/// Unaligned targets inherit the previous write position; leading unaligned
/// targets are written after one read.
pub fn oracle_path_from_alignment(a: &OraclePositions, source_len: usize) -> Result<GSequence> {
    if a.is_empty() {
        return Err(Error::invalid("oracle positions", "empty alignment"));
    }
    let mut running = 1;
    let g = a
        .positions()
        .iter()
        .map(|p| {
            if let Some(p) = *p {
                running = running.max(p);
            }
            running
        })
        .collect();
    GSequence::with_source_len(g, source_len)
}

/// Matrix whose row `i` puts `sharpness` at column `g_i` and spreads the rest
/// evenly over the other columns.
///
/// `sharpness` must exceed `1/J` so the argmax is unambiguous. With a single
/// source column any `sharpness` in `(0, 1]` is accepted.
pub fn synthetic_alpha(g: &GSequence, source_len: usize, sharpness: f64) -> Result<WritingProbabilityMatrix> {
    g.check_source_len(source_len)?;
    if !(sharpness > 0.0 && sharpness <= 1.0) {
        return Err(Error::invalid(
            "sharpness",
            format!("{sharpness} is outside (0, 1]"),
        ));
    }
    if source_len > 1 && sharpness <= 1.0 / source_len as f64 {
        return Err(Error::invalid(
            "sharpness",
            format!("{sharpness} <= 1/{source_len} leaves the argmax ambiguous"),
        ));
    }
    let rest = if source_len > 1 {
        (1.0 - sharpness) / (source_len - 1) as f64
    } else {
        0.0
    };
    let mut m = Matrix::zeros(g.len(), source_len);
    for (r, &peak) in g.values().iter().enumerate() {
        for c in 0..source_len {
            m.set(r, c, if c + 1 == peak { sharpness } else { rest });
        }
    }
    WritingProbabilityMatrix::new(m)
}
