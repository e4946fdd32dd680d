//! Latency metrics (AL, AP, DAL), alignment-based path quality
//! (sufficiency and necessity), and the IoU duality score.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{GSequence, ReadWritePath};
use crate::transpose::transpose_g;

/// Oracle write position per target token: the furthest aligned source
/// position (1-based), or `None` for unaligned targets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OraclePositions(Vec<Option<usize>>);

impl OraclePositions {
    pub fn new(positions: Vec<Option<usize>>, source_len: usize) -> Result<Self> {
        for (i, p) in positions.iter().enumerate() {
            if let Some(p) = *p {
                if p == 0 || p > source_len {
                    return Err(Error::invalid(
                        "oracle positions",
                        format!("a[{}] = {p} is outside 1..={source_len}", i + 1),
                    ));
                }
            }
        }
        Ok(OraclePositions(positions))
    }

    /// Fully aligned positions.
    pub fn aligned(positions: &[usize], source_len: usize) -> Result<Self> {
        Self::new(positions.iter().map(|&p| Some(p)).collect(), source_len)
    }

    pub fn positions(&self) -> &[Option<usize>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn aligned_count(&self) -> usize {
        self.0.iter().flatten().count()
    }
}

fn check_lengths(g: &GSequence, source_len: usize, target_len: usize) -> Result<()> {
    if source_len == 0 || target_len == 0 {
        return Err(Error::invalid("lengths", "source and target must be non-empty"));
    }
    if g.len() != target_len {
        return Err(Error::dimension(format!(
            "path has {} writes but the target has {target_len} tokens",
            g.len()
        )));
    }
    g.check_source_len(source_len)
}

/// Average lagging, cut off at the first target written after the full source is read.
pub fn average_lagging(g: &GSequence, source_len: usize, target_len: usize) -> Result<f64> {
    check_lengths(g, source_len, target_len)?;
    let rate = target_len as f64 / source_len as f64;
    let tau = g
        .values()
        .iter()
        .position(|&v| v == source_len)
        .map_or(target_len, |p| p + 1);
    let sum: f64 = g.values()[..tau]
        .iter()
        .enumerate()
        .map(|(i, &v)| v as f64 - i as f64 / rate)
        .sum();
    Ok(sum / tau as f64)
}

/// Fraction of the `I x J` grid covered by the area under the path.
pub fn average_proportion(g: &GSequence, source_len: usize, target_len: usize) -> Result<f64> {
    check_lengths(g, source_len, target_len)?;
    let total: usize = g.values().iter().sum();
    Ok(total as f64 / (source_len * target_len) as f64)
}

/// Differentiable average lagging: each write is delayed to at least one
/// source-per-target step after the previous one, and all targets count.
pub fn differentiable_average_lagging(
    g: &GSequence,
    source_len: usize,
    target_len: usize,
) -> Result<f64> {
    check_lengths(g, source_len, target_len)?;
    let step = source_len as f64 / target_len as f64;
    let mut prev = f64::NEG_INFINITY;
    let sum: f64 = g
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let delayed = (v as f64).max(prev + step);
            prev = delayed;
            delayed - i as f64 * step
        })
        .sum();
    Ok(sum / target_len as f64)
}

fn check_alignment_len(g: &GSequence, a: &OraclePositions) -> Result<()> {
    if g.len() != a.len() {
        return Err(Error::dimension(format!(
            "path has {} targets but the alignment has {}",
            g.len(),
            a.len()
        )));
    }
    Ok(())
}

/// Aligned pairs `(a_i, g_i)`, skipping unaligned targets.
fn aligned_pairs<'a>(
    g: &'a GSequence,
    a: &'a OraclePositions,
) -> impl Iterator<Item = (usize, usize)> + 'a {
    a.positions()
        .iter()
        .zip(g.values())
        .filter_map(|(a, &g)| a.map(|a| (a, g)))
}

/// Share of aligned targets whose aligned source token was read before writing.
pub fn sufficiency(g: &GSequence, a: &OraclePositions) -> Result<f64> {
    check_alignment_len(g, a)?;
    let (hits, total) = aligned_pairs(g, a).fold((0usize, 0usize), |(hits, total), (a, g)| {
        (hits + usize::from(a <= g), total + 1)
    });
    if total == 0 {
        return Err(Error::EmptyDenominator {
            metric: "sufficiency",
            message: "no aligned target tokens".into(),
        });
    }
    Ok(hits as f64 / total as f64)
}

/// Mean of `a_i / g_i` over targets written after their aligned source token.
pub fn necessity(g: &GSequence, a: &OraclePositions) -> Result<f64> {
    check_alignment_len(g, a)?;
    let (sum, count) = aligned_pairs(g, a)
        .filter(|(a, g)| a <= g)
        .fold((0.0, 0usize), |(sum, count), (a, g)| {
            (sum + a as f64 / g as f64, count + 1)
        });
    if count == 0 {
        return Err(Error::EmptyDenominator {
            metric: "necessity",
            message: "no aligned target is written after its aligned source token".into(),
        });
    }
    Ok(sum / count as f64)
}

/// IoU between the area under the forward path and the area under the
/// transposed backward path.
///
/// Both areas are prefix coverages, so the cell counts reduce to sums of
/// row-wise minima and maxima.
pub fn iou_duality(forward: &ReadWritePath, backward: &ReadWritePath) -> Result<f64> {
    if backward.source_len() != forward.target_len() || backward.target_len() != forward.source_len()
    {
        return Err(Error::dimension(format!(
            "forward path is {}x{} (targets x sources) but backward path is {}x{}",
            forward.target_len(),
            forward.source_len(),
            backward.target_len(),
            backward.source_len()
        )));
    }
    let transposed = transpose_g(backward)?.g_back;
    Ok(prefix_iou(forward.g(), &transposed))
}

pub(crate) fn prefix_iou(p: &GSequence, q: &GSequence) -> f64 {
    let (inter, union) = p
        .values()
        .iter()
        .zip(q.values())
        .fold((0usize, 0usize), |(i, u), (&a, &b)| (i + a.min(b), u + a.max(b)));
    inter as f64 / union as f64
}

/// Metrics for one sentence pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub source_len: usize,
    pub target_len: usize,
    pub al: f64,
    pub ap: f64,
    pub dal: f64,
    /// Absent without an alignment or when no target is aligned.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_suf: Option<f64>,
    /// Absent when no aligned target satisfies `a_i <= g_i`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_nec: Option<f64>,
    /// Aligned targets (sufficiency denominator).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_aligned: Option<usize>,
    /// Aligned targets with `a_i <= g_i` (necessity denominator).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_sufficient: Option<usize>,
}

impl MetricReport {
    pub fn compute(path: &ReadWritePath, alignment: Option<&OraclePositions>) -> Result<Self> {
        let (g, j, i) = (path.g(), path.source_len(), path.target_len());
        let mut report = MetricReport {
            source_len: j,
            target_len: i,
            al: average_lagging(g, j, i)?,
            ap: average_proportion(g, j, i)?,
            dal: differentiable_average_lagging(g, j, i)?,
            a_suf: None,
            a_nec: None,
            n_aligned: None,
            n_sufficient: None,
        };
        if let Some(a) = alignment {
            check_alignment_len(g, a)?;
            let n_aligned = a.aligned_count();
            let n_sufficient = aligned_pairs(g, a).filter(|(a, g)| a <= g).count();
            report.n_aligned = Some(n_aligned);
            report.n_sufficient = Some(n_sufficient);
            report.a_suf = (n_aligned > 0).then(|| sufficiency(g, a)).transpose()?;
            report.a_nec = (n_sufficient > 0).then(|| necessity(g, a)).transpose()?;
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::coverage_matrix;
    use proptest::prelude::*;

    fn g(v: &[usize]) -> GSequence {
        GSequence::new(v.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn al_examples() {
        assert!(close(average_lagging(&g(&[3, 4, 5, 6, 6, 6]), 6, 6).unwrap(), 3.0));
        assert!(close(average_lagging(&g(&[5; 5]), 5, 5).unwrap(), 5.0));
        assert!(close(average_lagging(&g(&[1, 2, 3, 4, 5, 6, 7]), 7, 7).unwrap(), 1.0));
    }

    #[test]
    fn al_truncated_path_uses_full_length() {
        // never reaches J=4, so tau = I = 2: ((1 - 0) + (2 - 2)) / 2
        assert!(close(average_lagging(&g(&[1, 2]), 4, 2).unwrap(), 0.5));
    }

    #[test]
    fn ap_examples() {
        assert!(close(average_proportion(&g(&[4; 3]), 4, 3).unwrap(), 1.0));
        assert!(close(average_proportion(&g(&[3, 4, 5, 6, 6, 6]), 6, 6).unwrap(), 5.0 / 6.0));
        assert!(close(average_proportion(&g(&[1]), 1, 1).unwrap(), 1.0));
    }

    #[test]
    fn dal_examples() {
        assert!(close(
            differentiable_average_lagging(&g(&[3, 4, 5, 6, 6, 6]), 6, 6).unwrap(),
            3.0
        ));
        assert!(close(
            differentiable_average_lagging(&g(&[1, 2, 3, 4]), 4, 4).unwrap(),
            1.0
        ));
        assert!(close(differentiable_average_lagging(&g(&[5; 5]), 5, 5).unwrap(), 5.0));
    }

    #[test]
    fn latency_length_errors() {
        assert!(matches!(
            average_lagging(&g(&[1, 2]), 2, 3),
            Err(Error::Dimension { .. })
        ));
        assert!(average_proportion(&g(&[1]), 0, 1).is_err());
        assert!(differentiable_average_lagging(&g(&[3]), 2, 1).is_err());
    }

    #[test]
    fn appendix_example_sufficiency_and_necessity() {
        let a = OraclePositions::aligned(&[3, 2, 1, 5, 4], 5).unwrap();
        let path = g(&[2, 2, 4, 4, 5]);
        assert!((sufficiency(&path, &a).unwrap() - 3.0 / 5.0).abs() < 1e-12);
        assert!((necessity(&path, &a).unwrap() - 41.0 / 60.0).abs() < 1e-12);
    }

    #[test]
    fn sufficiency_edges() {
        let a = OraclePositions::aligned(&[1, 2, 2], 3).unwrap();
        assert_eq!(sufficiency(&g(&[1, 2, 3]), &a).unwrap(), 1.0);
        let a = OraclePositions::aligned(&[2], 2).unwrap();
        assert_eq!(sufficiency(&g(&[1]), &a).unwrap(), 0.0);
        let none = OraclePositions::new(vec![None, None], 2).unwrap();
        assert!(matches!(
            sufficiency(&g(&[1, 2]), &none),
            Err(Error::EmptyDenominator { .. })
        ));
    }

    #[test]
    fn unaligned_targets_are_skipped() {
        let a = OraclePositions::new(vec![Some(3), None, Some(1)], 3).unwrap();
        let path = g(&[2, 2, 2]);
        assert_eq!(sufficiency(&path, &a).unwrap(), 0.5);
        assert_eq!(necessity(&path, &a).unwrap(), 0.5);
    }

    #[test]
    fn necessity_edges() {
        let a = OraclePositions::aligned(&[1, 3, 3], 3).unwrap();
        assert_eq!(necessity(&g(&[1, 3, 3]), &a).unwrap(), 1.0);
        let a = OraclePositions::aligned(&[1], 4).unwrap();
        assert_eq!(necessity(&g(&[4]), &a).unwrap(), 0.25);
        let a = OraclePositions::aligned(&[2], 2).unwrap();
        assert!(necessity(&g(&[1]), &a).is_err());
        let a = OraclePositions::aligned(&[1, 1], 2).unwrap();
        assert!(necessity(&g(&[1]), &a).is_err());
    }

    #[test]
    fn oracle_positions_range() {
        assert!(OraclePositions::aligned(&[0], 3).is_err());
        assert!(OraclePositions::aligned(&[4], 3).is_err());
    }

    #[test]
    fn iou_examples() {
        let fwd = ReadWritePath::from_values(vec![2, 2, 2, 3, 4], 4).unwrap();
        let bwd = ReadWritePath::from_values(vec![3, 3, 4, 5], 5).unwrap();
        assert_eq!(iou_duality(&fwd, &bwd).unwrap(), 1.0);

        // [1,3,4,5] transposes to [1,2,2,3,4]: sum of minima 12, maxima 13
        let perturbed = ReadWritePath::from_values(vec![1, 3, 4, 5], 5).unwrap();
        assert_eq!(
            transpose_g(&perturbed).unwrap().g_back.values(),
            &[1, 2, 2, 3, 4]
        );
        assert!((iou_duality(&fwd, &perturbed).unwrap() - 12.0 / 13.0).abs() < 1e-15);

        let wrong = ReadWritePath::from_values(vec![3, 3, 4], 5).unwrap();
        assert!(matches!(iou_duality(&fwd, &wrong), Err(Error::Dimension { .. })));
    }

    #[test]
    fn report_combines_everything() {
        let path = ReadWritePath::from_values(vec![2, 2, 4, 4, 5], 5).unwrap();
        let a = OraclePositions::aligned(&[3, 2, 1, 5, 4], 5).unwrap();
        let r = MetricReport::compute(&path, Some(&a)).unwrap();
        assert_eq!(r.n_aligned, Some(5));
        assert_eq!(r.n_sufficient, Some(3));
        assert!((r.a_suf.unwrap() - 0.6).abs() < 1e-12);
        assert!((r.a_nec.unwrap() - 41.0 / 60.0).abs() < 1e-12);
        let bare = MetricReport::compute(&path, None).unwrap();
        assert_eq!(bare.a_suf, None);
        assert_eq!(bare.al, r.al);
    }

    fn g_pair() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, usize)> {
        (1usize..20, 1usize..20).prop_flat_map(|(i, j)| {
            let seq = move || {
                proptest::collection::vec(1..=j, i).prop_map(|mut v| {
                    v.sort_unstable();
                    v
                })
            };
            (seq(), seq(), Just(j))
        })
    }

    proptest! {
        #[test]
        fn prefix_iou_matches_coverage_cells((p, q, j) in g_pair()) {
            let (p, q) = (g(&p), g(&q));
            let cp = coverage_matrix(&p, j).unwrap();
            let cq = coverage_matrix(&q, j).unwrap();
            let cells = cp.intersection(&cq).unwrap() as f64 / cp.union(&cq).unwrap() as f64;
            let fast = prefix_iou(&p, &q);
            prop_assert!((fast - cells).abs() < 1e-15);
            prop_assert!((0.0..=1.0).contains(&fast));
            prop_assert_eq!(fast, prefix_iou(&q, &p));
        }

        #[test]
        fn ap_in_unit_interval((p, _q, j) in g_pair()) {
            let p = g(&p);
            let ap = average_proportion(&p, j, p.len()).unwrap();
            prop_assert!(ap > 0.0 && ap <= 1.0);
            prop_assert_eq!(ap == 1.0, p.values().iter().all(|&v| v == j));
        }

        #[test]
        fn earlier_writes_do_not_reduce_necessity(
            (a, shift) in (1usize..15).prop_flat_map(|i| (proptest::collection::vec(1usize..10, i), 0usize..5))
        ) {
            // later path writes at a + shift + 1, earlier path at a + shift; both sufficient everywhere
            let mut base: Vec<usize> = a.clone();
            base.sort_unstable();
            let j = base.last().unwrap() + shift + 1;
            let oracle = OraclePositions::aligned(&base, j).unwrap();
            let early = g(&base.iter().map(|v| v + shift).collect::<Vec<_>>());
            let late = g(&base.iter().map(|v| v + shift + 1).collect::<Vec<_>>());
            prop_assert!(necessity(&early, &oracle).unwrap() >= necessity(&late, &oracle).unwrap());
        }
    }
}
