//! Per-sentence corpus evaluation.
//!
//! Sentences are independent, so every batch operation maps over records
//! with [`Execution::Parallel`] (rayon, behind the `parallel` feature) or
//! [`Execution::Sequential`]. Output order always follows input order and
//! aggregation happens afterwards in that order, so both modes give
//! bit-identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::SentenceRecord;
use crate::loss::{dual_regularizer_with, Monotonicity};
use crate::matrix::WritingProbabilityMatrix;
use crate::metrics::{iou_duality, MetricReport, OraclePositions};
use crate::path::ReadWritePath;
use crate::policy::{oracle_path_from_alignment, wait_k_path, PolicySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Order-preserving map over records.
pub fn map_records<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect(),
        _ => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
    }
}

/// Collect per-record results, failing on the lowest-indexed error.
fn first_error<R>(results: Vec<Result<R>>) -> Result<Vec<R>> {
    results.into_iter().collect()
}

#[derive(Debug, Clone)]
pub struct MetricInput {
    pub path: ReadWritePath,
    pub alignment: Option<OraclePositions>,
}

pub fn evaluate_metrics(exec: Execution, inputs: &[MetricInput]) -> Result<Vec<SentenceRecord>> {
    first_error(map_records(exec, inputs, |id, input| {
        MetricReport::compute(&input.path, input.alignment.as_ref())
            .map(|m| SentenceRecord::from_metrics(id, &m))
            .map_err(|e| e.in_record(id))
    }))
}

#[derive(Debug, Clone)]
pub struct DualityInput {
    pub forward: ReadWritePath,
    pub backward: ReadWritePath,
    /// Forward `I x J` and backward `J x I` writing probabilities.
    pub matrices: Option<(WritingProbabilityMatrix, WritingProbabilityMatrix)>,
}

#[derive(Debug, Clone, Default)]
pub struct DualityOutcome {
    pub records: Vec<SentenceRecord>,
    /// Records left out of `records`, with the reason.
    pub skipped: Vec<(usize, Error)>,
}

fn duality_record(
    id: usize,
    input: &DualityInput,
    lambda_dual: f64,
    mode: Monotonicity,
) -> Result<SentenceRecord> {
    let mut record = SentenceRecord {
        id,
        source_len: Some(input.forward.source_len()),
        target_len: Some(input.forward.target_len()),
        iou: Some(iou_duality(&input.forward, &input.backward)?),
        ..Default::default()
    };
    if let Some((alpha_f, alpha_b)) = &input.matrices {
        if alpha_f.matrix().shape() != (input.forward.target_len(), input.forward.source_len()) {
            return Err(Error::dimension(format!(
                "forward matrix is {}x{} but the forward path is {}x{}",
                alpha_f.target_len(),
                alpha_f.source_len(),
                input.forward.target_len(),
                input.forward.source_len()
            )));
        }
        let loss = dual_regularizer_with(alpha_f, alpha_b, lambda_dual, mode)?;
        record.omega_f = Some(loss.omega_f);
        record.omega_b = Some(loss.omega_b);
        record.total_reg = Some(loss.total_reg);
    }
    Ok(record)
}

/// IoU (and Ω when matrices are present) per record. Dimension errors skip
/// the record; any other error fails the batch.
pub fn evaluate_duality(
    exec: Execution,
    inputs: &[DualityInput],
    lambda_dual: f64,
    mode: Monotonicity,
) -> Result<DualityOutcome> {
    let results = map_records(exec, inputs, |id, input| duality_record(id, input, lambda_dual, mode));
    let mut outcome = DualityOutcome::default();
    for (id, r) in results.into_iter().enumerate() {
        match r {
            Ok(rec) => outcome.records.push(rec),
            Err(e @ Error::Dimension { .. }) => outcome.skipped.push((id, e.in_record(id))),
            Err(e) => return Err(e.in_record(id)),
        }
    }
    Ok(outcome)
}

#[derive(Debug, Clone)]
pub struct SimulationInput {
    pub target_len: usize,
    pub source_len: usize,
    pub alignment: Option<OraclePositions>,
    /// Path to re-evaluate under [`PolicySpec::Replay`].
    pub replay: Option<ReadWritePath>,
}

pub fn generate_path(policy: PolicySpec, input: &SimulationInput) -> Result<ReadWritePath> {
    match policy {
        PolicySpec::WaitK { k } => ReadWritePath::new(
            wait_k_path(k, input.target_len, input.source_len)?,
            input.source_len,
        ),
        PolicySpec::OracleAlignment => {
            let a = input
                .alignment
                .as_ref()
                .ok_or_else(|| Error::invalid("policy", "oracle_alignment needs alignments"))?;
            ReadWritePath::new(oracle_path_from_alignment(a, input.source_len)?, input.source_len)
        }
        PolicySpec::Replay => {
            let p = input
                .replay
                .clone()
                .ok_or_else(|| Error::invalid("policy", "replay needs a paths file"))?;
            if (p.target_len(), p.source_len()) != (input.target_len, input.source_len) {
                return Err(Error::dimension(format!(
                    "replayed path is {}x{} but the sentence pair is {}x{}",
                    p.target_len(),
                    p.source_len(),
                    input.target_len,
                    input.source_len
                )));
            }
            Ok(p)
        }
    }
}

/// Generate a path per sentence and evaluate it.
pub fn simulate(
    exec: Execution,
    policy: PolicySpec,
    inputs: &[SimulationInput],
) -> Result<(Vec<ReadWritePath>, Vec<SentenceRecord>)> {
    let results = first_error(map_records(exec, inputs, |id, input| {
        let path = generate_path(policy, input).map_err(|e| e.in_record(id))?;
        let metrics = MetricReport::compute(&path, input.alignment.as_ref()).map_err(|e| e.in_record(id))?;
        Ok((path, SentenceRecord::from_metrics(id, &metrics)))
    }))?;
    Ok(results.into_iter().unzip())
}
