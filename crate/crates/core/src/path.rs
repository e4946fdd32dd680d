//! Read/write path representations and conversions.
//!
//! A path for a sentence pair with `I` target and `J` source tokens can be
//! written three ways:
//!
//! * an action string over `R`/`W` of length `I + J`,
//! * a g-sequence, where `g[i]` is the number of source tokens read when
//!   target token `i` is written (1-based counts, monotone, in `1..=J`),
//! * a prefix-coverage matrix with `bits[i][j] = 1` iff `j <= g[i]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Read,
    Write,
}

impl Action {
    pub fn symbol(self) -> char {
        match self {
            Action::Read => 'R',
            Action::Write => 'W',
        }
    }

    fn from_symbol(c: char) -> Option<Self> {
        match c {
            'R' | 'r' => Some(Action::Read),
            'W' | 'w' => Some(Action::Write),
            _ => None,
        }
    }
}

/// Parse an action string. Whitespace and `|` segment separators are skipped.
pub fn parse_actions(s: &str) -> Result<Vec<Action>> {
    s.chars()
        .enumerate()
        .filter(|(_, c)| !c.is_whitespace() && *c != '|')
        .map(|(pos, c)| {
            Action::from_symbol(c).ok_or_else(|| {
                Error::parse(
                    None,
                    format!("invalid action character {c:?} at column {}", pos + 1),
                )
            })
        })
        .collect()
}

/// Monotone non-decreasing sequence of source-read counts, one per target token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct GSequence(Vec<usize>);

impl GSequence {
    /// Validate non-emptiness, `g[i] >= 1`, and monotonicity.
    pub fn new(values: Vec<usize>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("g-sequence", "empty sequence"));
        }
        if let Some(pos) = values.iter().position(|&v| v == 0) {
            return Err(Error::invalid(
                "g-sequence",
                format!("g[{}] = 0; every write must follow at least one read", pos + 1),
            ));
        }
        if let Some(pos) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::invalid(
                "g-sequence",
                format!(
                    "not monotone: g[{}] = {} > g[{}] = {}",
                    pos + 1,
                    values[pos],
                    pos + 2,
                    values[pos + 1]
                ),
            ));
        }
        Ok(GSequence(values))
    }

    /// Like [`GSequence::new`], also checking every value is at most `source_len`.
    pub fn with_source_len(values: Vec<usize>, source_len: usize) -> Result<Self> {
        let g = Self::new(values)?;
        g.check_source_len(source_len)?;
        Ok(g)
    }

    pub fn check_source_len(&self, source_len: usize) -> Result<()> {
        let last = self.last();
        if last > source_len {
            return Err(Error::invalid(
                "g-sequence",
                format!("g reaches {last} but the source has only {source_len} tokens"),
            ));
        }
        Ok(())
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    /// Target length `I`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> usize {
        *self.0.last().expect("g-sequence is never empty")
    }

    /// 1-based access.
    pub fn at(&self, i: usize) -> usize {
        self.0[i - 1]
    }
}

impl TryFrom<Vec<usize>> for GSequence {
    type Error = Error;

    fn try_from(values: Vec<usize>) -> Result<Self> {
        GSequence::new(values)
    }
}

impl From<GSequence> for Vec<usize> {
    fn from(g: GSequence) -> Self {
        g.0
    }
}

/// A validated action sequence with its target and source lengths.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActionSequence {
    actions: Vec<Action>,
    target_len: usize,
    source_len: usize,
}

impl ActionSequence {
    /// Validate against declared lengths.
    pub fn new(actions: Vec<Action>, target_len: usize, source_len: usize) -> Result<Self> {
        let report = validate_path(&actions, Some((target_len, source_len)));
        if !report.is_valid() {
            return Err(Error::invalid("action sequence", report.to_string()));
        }
        Ok(ActionSequence {
            actions,
            target_len,
            source_len,
        })
    }

    /// Validate, inferring lengths from the action counts.
    pub fn from_actions(actions: Vec<Action>) -> Result<Self> {
        let target_len = actions.iter().filter(|a| **a == Action::Write).count();
        let source_len = actions.len() - target_len;
        Self::new(actions, target_len, source_len)
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn to_g(&self) -> GSequence {
        let mut reads = 0;
        let mut g = Vec::with_capacity(self.target_len);
        for action in &self.actions {
            match action {
                Action::Read => reads += 1,
                Action::Write => g.push(reads),
            }
        }
        GSequence(g)
    }
}

impl FromStr for ActionSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ActionSequence::from_actions(parse_actions(s)?)
    }
}

impl fmt::Display for ActionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for action in &self.actions {
            write!(f, "{}", action.symbol())?;
        }
        Ok(())
    }
}

/// Convert actions to a g-sequence, checking counts against `target_len`/`source_len`.
pub fn actions_to_g(actions: &[Action], target_len: usize, source_len: usize) -> Result<GSequence> {
    Ok(ActionSequence::new(actions.to_vec(), target_len, source_len)?.to_g())
}

/// Emit READs up to each `g[i]` followed by a WRITE; pad with trailing READs to `source_len`.
pub fn g_to_actions(g: &GSequence, source_len: usize) -> Result<ActionSequence> {
    g.check_source_len(source_len)?;
    let mut actions = Vec::with_capacity(g.len() + source_len);
    let mut reads = 0;
    for &target in g.values() {
        while reads < target {
            actions.push(Action::Read);
            reads += 1;
        }
        actions.push(Action::Write);
    }
    actions.extend(std::iter::repeat_n(Action::Read, source_len - reads));
    Ok(ActionSequence {
        actions,
        target_len: g.len(),
        source_len,
    })
}

/// A complete path: g-sequence plus the source length it is read against.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReadWritePath {
    g: GSequence,
    source_len: usize,
}

impl ReadWritePath {
    pub fn new(g: GSequence, source_len: usize) -> Result<Self> {
        g.check_source_len(source_len)?;
        Ok(ReadWritePath { g, source_len })
    }

    pub fn from_values(values: Vec<usize>, source_len: usize) -> Result<Self> {
        Self::new(GSequence::new(values)?, source_len)
    }

    pub fn g(&self) -> &GSequence {
        &self.g
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn target_len(&self) -> usize {
        self.g.len()
    }

    /// True when the final write happens after the whole source is read.
    pub fn is_complete(&self) -> bool {
        self.g.last() == self.source_len
    }

    pub fn to_actions(&self) -> ActionSequence {
        g_to_actions(&self.g, self.source_len).expect("bounds checked on construction")
    }

    pub fn coverage(&self) -> CoverageMatrix {
        coverage_matrix(&self.g, self.source_len).expect("bounds checked on construction")
    }
}

impl From<&ActionSequence> for ReadWritePath {
    fn from(a: &ActionSequence) -> Self {
        ReadWritePath {
            g: a.to_g(),
            source_len: a.source_len(),
        }
    }
}

/// `I x J` prefix-coverage matrix: the area below a path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<u8>,
}

impl CoverageMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// 1-based lookup.
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[(i - 1) * self.cols + (j - 1)] == 1
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.bits[(i - 1) * self.cols..i * self.cols]
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.bits
            .chunks(self.cols)
            .map(|r| r.iter().map(|&b| b as usize).sum())
            .collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        self.bits.chunks(self.cols).map(<[u8]>::to_vec).collect()
    }

    /// Number of cells set in both matrices.
    pub fn intersection(&self, other: &CoverageMatrix) -> Result<usize> {
        self.zip_count(other, |a, b| a & b)
    }

    /// Number of cells set in either matrix.
    pub fn union(&self, other: &CoverageMatrix) -> Result<usize> {
        self.zip_count(other, |a, b| a | b)
    }

    fn zip_count(&self, other: &CoverageMatrix, op: impl Fn(u8, u8) -> u8) -> Result<usize> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::dimension(format!(
                "coverage matrices are {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(&a, &b)| op(a, b) as usize)
            .sum())
    }
}

pub fn coverage_matrix(g: &GSequence, source_len: usize) -> Result<CoverageMatrix> {
    g.check_source_len(source_len)?;
    let mut bits = vec![0u8; g.len() * source_len];
    for (row, &reads) in bits.chunks_mut(source_len).zip(g.values()) {
        row[..reads].fill(1);
    }
    Ok(CoverageMatrix {
        rows: g.len(),
        cols: source_len,
        bits,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    /// 1-based position in the action string.
    WriteBeforeRead { position: usize },
    WriteCountMismatch { declared: usize, found: usize },
    ReadCountMismatch { declared: usize, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "path has no WRITE actions"),
            Violation::WriteBeforeRead { position } => {
                write!(f, "WRITE before any READ at position {position}")
            }
            Violation::WriteCountMismatch { declared, found } => {
                write!(f, "WRITE count {found} does not match target length {declared}")
            }
            Violation::ReadCountMismatch { declared, found } => {
                write!(f, "READ count {found} does not match source length {declared}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        for (n, v) in self.violations.iter().enumerate() {
            if n > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// List every invariant an action sequence breaks. `declared` is `(target_len, source_len)`.
pub fn validate_path(actions: &[Action], declared: Option<(usize, usize)>) -> ValidationReport {
    let mut violations = Vec::new();
    let writes = actions.iter().filter(|a| **a == Action::Write).count();
    let reads = actions.len() - writes;

    if writes == 0 {
        violations.push(Violation::Empty);
    }
    if let Some(pos) = actions.iter().position(|a| *a == Action::Write) {
        if !actions[..pos].contains(&Action::Read) {
            violations.push(Violation::WriteBeforeRead { position: pos + 1 });
        }
    }
    if let Some((target_len, source_len)) = declared {
        if writes != target_len {
            violations.push(Violation::WriteCountMismatch {
                declared: target_len,
                found: writes,
            });
        }
        if reads != source_len {
            violations.push(Violation::ReadCountMismatch {
                declared: source_len,
                found: reads,
            });
        }
    }
    ValidationReport { violations }
}
