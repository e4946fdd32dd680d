//! Path transposition: derive write positions from a writing probability
//! matrix, segment the sentence pair into segment pairs, swap the two sides
//! of every pair, and merge the result into the reverse-direction path and
//! its 0/1 write matrix.

use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::{GammaMatrix, WritingProbabilityMatrix};
use crate::path::{GSequence, ReadWritePath};

/// Write positions derived from row-wise argmax.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WritePositions {
    /// Running maximum of `raw`.
    pub positions: GSequence,
    /// 1-based leftmost argmax of each row.
    pub raw: Vec<usize>,
    /// True iff the running maximum changed any raw position.
    pub monotonized: bool,
}

impl WritePositions {
    /// First target position (1-based) whose raw argmax went backwards.
    pub fn first_regression(&self) -> Option<usize> {
        self.raw.windows(2).position(|w| w[1] < w[0]).map(|p| p + 2)
    }
}

fn leftmost_argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = j;
        }
    }
    best + 1
}

pub fn write_positions(alpha: &WritingProbabilityMatrix) -> WritePositions {
    let raw: Vec<usize> = alpha.matrix().row_iter().map(leftmost_argmax).collect();
    let mut monotonized = false;
    let mut running = 0;
    let positions = raw
        .iter()
        .map(|&d| {
            if d < running {
                monotonized = true;
            }
            running = running.max(d);
            running
        })
        .collect();
    WritePositions {
        positions: GSequence::new(positions).expect("argmax columns are >= 1 and monotone"),
        raw,
        monotonized,
    }
}

/// Like [`write_positions`] but fails instead of repairing a regression.
pub fn write_positions_strict(alpha: &WritingProbabilityMatrix) -> Result<WritePositions> {
    let wp = write_positions(alpha);
    match wp.first_regression() {
        Some(position) => Err(Error::NonMonotone { position }),
        None => Ok(wp),
    }
}

/// Inclusive 1-based span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub begin: usize,
    pub end: usize,
}

impl Span {
    pub fn new(begin: usize, end: usize) -> Self {
        Span { begin, end }
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.begin
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.begin
    }

    pub fn positions(&self) -> std::ops::RangeInclusive<usize> {
        self.begin..=self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SegmentPair {
    pub source: Span,
    pub target: Span,
}

impl SegmentPair {
    pub fn swapped(self) -> Self {
        SegmentPair {
            source: self.target,
            target: self.source,
        }
    }
}

/// Ordered segment pairs whose spans partition both sides contiguously.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SegmentPairSequence {
    pairs: Vec<SegmentPair>,
    source_len: usize,
    target_len: usize,
}

fn check_partition(spans: impl Iterator<Item = Span>, side: &str) -> Result<usize> {
    let mut next = 1;
    let mut any = false;
    for (k, span) in spans.enumerate() {
        any = true;
        if span.begin != next {
            return Err(Error::invalid(
                "segment pairs",
                format!("{side} span of pair {} starts at {}, expected {next}", k + 1, span.begin),
            ));
        }
        if span.end < span.begin {
            return Err(Error::invalid(
                "segment pairs",
                format!("{side} span of pair {} is empty", k + 1),
            ));
        }
        next = span.end + 1;
    }
    if !any {
        return Err(Error::invalid("segment pairs", "no pairs"));
    }
    Ok(next - 1)
}

impl SegmentPairSequence {
    /// Validate that the pairs partition `1..=J` and `1..=I` in order.
    pub fn new(pairs: Vec<SegmentPair>) -> Result<Self> {
        let source_len = check_partition(pairs.iter().map(|p| p.source), "source")?;
        let target_len = check_partition(pairs.iter().map(|p| p.target), "target")?;
        Ok(SegmentPairSequence {
            pairs,
            source_len,
            target_len,
        })
    }

    pub fn pairs(&self) -> &[SegmentPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }
}

impl fmt::Display for SegmentPairSequence {
    /// Renders as `<x1 x2, y1 y2 y3> | <x3, y4 y5>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, pair) in self.pairs.iter().enumerate() {
            if k > 0 {
                write!(f, " | ")?;
            }
            let src: Vec<String> = pair.source.positions().map(|p| format!("x{p}")).collect();
            let tgt: Vec<String> = pair.target.positions().map(|p| format!("y{p}")).collect();
            write!(f, "<{}, {}>", src.join(" "), tgt.join(" "))?;
        }
        Ok(())
    }
}

/// Group maximal runs of equal write positions into segment pairs.
///
/// Each run of targets sharing write position `d` is paired with the source
/// tokens read since the previous run. Unread trailing source tokens are
/// absorbed into the last pair.
pub fn segment(d: &GSequence, source_len: usize) -> Result<SegmentPairSequence> {
    d.check_source_len(source_len)?;
    let values = d.values();
    let mut pairs = Vec::new();
    let mut run_start = 0;
    let mut source_begin = 1;
    for i in 1..=values.len() {
        if i == values.len() || values[i] != values[run_start] {
            let source_end = values[run_start];
            pairs.push(SegmentPair {
                source: Span::new(source_begin, source_end),
                target: Span::new(run_start + 1, i),
            });
            source_begin = source_end + 1;
            run_start = i;
        }
    }
    if let Some(last) = pairs.last_mut() {
        last.source.end = source_len;
    }
    SegmentPairSequence::new(pairs)
}

/// Swap source and target spans of every pair, keeping order.
pub fn transpose_segments(s: &SegmentPairSequence) -> SegmentPairSequence {
    SegmentPairSequence {
        pairs: s.pairs.iter().map(|p| p.swapped()).collect(),
        source_len: s.target_len,
        target_len: s.source_len,
    }
}

/// Merge segment pairs into a path: every target position of pair `k` is
/// written after reading up to the end of its source span.
///
/// Applied to a transposed sequence this yields the reverse-direction
/// path; its 0/1 matrix has rows indexed by the original source positions.
pub fn merge_gamma(t: &SegmentPairSequence) -> (GammaMatrix, GSequence) {
    let mut g = Vec::with_capacity(t.target_len);
    for pair in &t.pairs {
        g.extend(std::iter::repeat_n(pair.source.end, pair.target.len()));
    }
    let g = GSequence::new(g).expect("partitioned spans give a monotone sequence");
    let gamma = GammaMatrix::from_g(g.clone(), t.source_len).expect("ends lie within the source");
    (gamma, g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transposition {
    pub gamma: GammaMatrix,
    pub g_back: GSequence,
    pub monotonized: bool,
    pub segments: SegmentPairSequence,
}

impl Transposition {
    /// Reverse-direction path; its source length is the forward target length.
    pub fn backward_path(&self) -> ReadWritePath {
        ReadWritePath::new(self.g_back.clone(), self.gamma.cols()).expect("merge output is bounded")
    }
}

fn transpose_positions(d: &GSequence, source_len: usize, monotonized: bool) -> Result<Transposition> {
    let segments = segment(d, source_len)?;
    let (gamma, g_back) = merge_gamma(&transpose_segments(&segments));
    Ok(Transposition {
        gamma,
        g_back,
        monotonized,
        segments,
    })
}

/// Full pipeline from writing probabilities to the reverse-direction write matrix.
pub fn transpose_path(alpha: &WritingProbabilityMatrix) -> Result<Transposition> {
    let wp = write_positions(alpha);
    transpose_positions(&wp.positions, alpha.source_len(), wp.monotonized)
}

/// As [`transpose_path`], rejecting matrices whose argmax positions regress.
pub fn transpose_path_strict(alpha: &WritingProbabilityMatrix) -> Result<Transposition> {
    let wp = write_positions_strict(alpha)?;
    transpose_positions(&wp.positions, alpha.source_len(), false)
}

/// Transpose an explicit path.
pub fn transpose_g(path: &ReadWritePath) -> Result<Transposition> {
    transpose_positions(path.g(), path.source_len(), false)
}
