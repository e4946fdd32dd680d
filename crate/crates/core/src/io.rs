//! Text formats: tab-separated corpora, Pharaoh alignments, path files,
//! JSON matrices, and corpus reports.
//!
//! All formats are UTF-8 and line-oriented formats use LF. Positions are
//! 1-based once parsed; Pharaoh links are 0-based on disk by default.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::metrics::{MetricReport, OraclePositions};
use crate::path::{parse_actions, ActionSequence, GSequence, ReadWritePath};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Lines of a text file, dropping one trailing newline.
fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let lines: Box<dyn Iterator<Item = &str>> = if body.is_empty() {
        Box::new(std::iter::empty())
    } else {
        Box::new(body.split('\n'))
    };
    lines.map(|l| l.strip_suffix('\r').unwrap_or(l)).enumerate()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub id: usize,
    pub source: Vec<String>,
    pub target: Vec<String>,
}

impl SentencePair {
    pub fn source_len(&self) -> usize {
        self.source.len()
    }

    pub fn target_len(&self) -> usize {
        self.target.len()
    }
}

/// Parse `source<TAB>target` lines; tokens are whitespace-separated and opaque.
pub fn parse_corpus(text: &str) -> Result<Vec<SentencePair>> {
    records(text)
        .map(|(id, line)| {
            let (src, tgt) = line.split_once('\t').ok_or_else(|| {
                Error::parse(Some(id + 1), "expected source and target separated by a tab")
            })?;
            if tgt.contains('\t') {
                return Err(Error::parse(Some(id + 1), "more than one tab"));
            }
            let source: Vec<String> = src.split_whitespace().map(str::to_owned).collect();
            let target: Vec<String> = tgt.split_whitespace().map(str::to_owned).collect();
            if source.is_empty() || target.is_empty() {
                return Err(Error::parse(Some(id + 1), "empty source or target sentence"));
            }
            Ok(SentencePair { id, source, target })
        })
        .collect()
}

pub fn write_corpus(pairs: &[SentencePair]) -> String {
    let mut out = String::new();
    for p in pairs {
        let _ = writeln!(out, "{}\t{}", p.source.join(" "), p.target.join(" "));
    }
    out
}

/// Index base of positions on disk.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum IndexBase {
    #[default]
    Zero,
    One,
}

impl IndexBase {
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            0 => Ok(IndexBase::Zero),
            1 => Ok(IndexBase::One),
            other => Err(Error::invalid("index base", format!("{other} is not 0 or 1"))),
        }
    }

    fn to_one_based(self, raw: usize) -> Option<usize> {
        match self {
            IndexBase::Zero => Some(raw + 1),
            IndexBase::One => (raw >= 1).then_some(raw),
        }
    }
}

/// Source positions (1-based, sorted) linked to each target position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentMap {
    links: Vec<Vec<usize>>,
    source_len: usize,
}

impl AlignmentMap {
    pub fn links(&self) -> &[Vec<usize>] {
        &self.links
    }

    pub fn target_len(&self) -> usize {
        self.links.len()
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    /// Furthest linked source position per target.
    pub fn oracle_positions(&self) -> OraclePositions {
        OraclePositions::new(
            self.links.iter().map(|s| s.last().copied()).collect(),
            self.source_len,
        )
        .expect("links are range-checked on parse")
    }
}

/// Parse whitespace-separated `s-t` links (source-target order).
pub fn parse_pharaoh(
    line: &str,
    target_len: usize,
    source_len: usize,
    base: IndexBase,
) -> Result<AlignmentMap> {
    let mut links = vec![Vec::new(); target_len];
    for token in line.split_whitespace() {
        let bad = |why: &str| Error::parse(None, format!("alignment link {token:?}: {why}"));
        let (s, t) = token.split_once('-').ok_or_else(|| bad("expected s-t"))?;
        let parse_index = |field: &str| -> Result<usize> {
            if field.starts_with('-') {
                return Err(bad("negative index"));
            }
            field.parse::<usize>().map_err(|_| bad("not an integer pair"))
        };
        let (s_raw, t_raw) = (parse_index(s)?, parse_index(t)?);
        let s = base
            .to_one_based(s_raw)
            .ok_or_else(|| bad("index 0 with 1-based input"))?;
        let t = base
            .to_one_based(t_raw)
            .ok_or_else(|| bad("index 0 with 1-based input"))?;
        if s > source_len {
            return Err(Error::dimension(format!(
                "alignment link {token:?}: source index beyond length {source_len}"
            )));
        }
        if t > target_len {
            return Err(Error::dimension(format!(
                "alignment link {token:?}: target index beyond length {target_len}"
            )));
        }
        links[t - 1].push(s);
    }
    for set in &mut links {
        set.sort_unstable();
        set.dedup();
    }
    Ok(AlignmentMap { links, source_len })
}

/// Raw alignment lines, one per sentence.
pub fn alignment_lines(text: &str) -> Vec<&str> {
    records(text).map(|(_, l)| l).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathFormat {
    Actions,
    Json,
}

/// One line of a path file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathRecord {
    Actions(ActionSequence),
    G(ReadWritePath),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GLine {
    g: Vec<usize>,
    #[serde(rename = "J")]
    source_len: usize,
}

impl PathRecord {
    pub fn format(&self) -> PathFormat {
        match self {
            PathRecord::Actions(_) => PathFormat::Actions,
            PathRecord::G(_) => PathFormat::Json,
        }
    }

    pub fn to_path(&self) -> ReadWritePath {
        match self {
            PathRecord::Actions(a) => ReadWritePath::from(a),
            PathRecord::G(p) => p.clone(),
        }
    }

    /// Wrap `path` in the given on-disk format.
    pub fn from_path(path: ReadWritePath, format: PathFormat) -> Self {
        match format {
            PathFormat::Actions => PathRecord::Actions(path.to_actions()),
            PathFormat::Json => PathRecord::G(path),
        }
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            return Err(Error::parse(None, "empty path record"));
        }
        if trimmed.starts_with('{') {
            let raw: GLine = serde_json::from_str(trimmed)
                .map_err(|e| Error::parse(None, format!("bad g record: {e}")))?;
            let g = GSequence::new(raw.g)?;
            return Ok(PathRecord::G(ReadWritePath::new(g, raw.source_len)?));
        }
        Ok(PathRecord::Actions(ActionSequence::from_actions(parse_actions(trimmed)?)?))
    }

    /// Canonical single-line form without the newline.
    pub fn to_line(&self) -> String {
        match self {
            PathRecord::Actions(a) => a.to_string(),
            PathRecord::G(p) => serde_json::to_string(&GLine {
                g: p.g().values().to_vec(),
                source_len: p.source_len(),
            })
            .expect("plain integers serialize"),
        }
    }
}

/// Parse a path file. All records must share one format.
pub fn read_path_file(text: &str) -> Result<Vec<PathRecord>> {
    let mut out: Vec<PathRecord> = Vec::new();
    for (id, line) in records(text) {
        let record = PathRecord::parse_line(line).map_err(|e| e.in_record(id))?;
        if let Some(first) = out.first() {
            if first.format() != record.format() {
                return Err(Error::parse(
                    Some(id + 1),
                    "mixed path formats: action strings and g records in one file",
                ));
            }
        }
        out.push(record);
    }
    Ok(out)
}

pub fn write_path_file(records: &[PathRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_line());
        out.push('\n');
    }
    out
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDocument {
    rows: usize,
    cols: usize,
    data: Vec<Vec<f64>>,
}

pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let doc: MatrixDocument =
        serde_json::from_str(text).map_err(|e| Error::parse(None, format!("bad matrix document: {e}")))?;
    if doc.data.len() != doc.rows {
        return Err(Error::parse(
            None,
            format!("declared {} rows but data has {}", doc.rows, doc.data.len()),
        ));
    }
    for (i, row) in doc.data.iter().enumerate() {
        if row.len() != doc.cols {
            return Err(Error::parse(
                None,
                format!("ragged matrix: row {} has {} entries, expected {}", i + 1, row.len(), doc.cols),
            ));
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::parse(
                None,
                format!("non-finite entry at row {}, column {}", i + 1, j + 1),
            ));
        }
    }
    Matrix::from_rows(&doc.data)
}

/// Single-line JSON document `{"rows":..,"cols":..,"data":[[..],..]}`.
pub fn matrix_to_string(m: &Matrix) -> String {
    serde_json::to_string(&MatrixDocument {
        rows: m.rows(),
        cols: m.cols(),
        data: m.to_rows(),
    })
    .expect("finite floats serialize")
}

/// A single matrix document (surrounding whitespace ignored).
pub fn read_matrix_file(text: &str) -> Result<Matrix> {
    parse_matrix(text.trim())
}

pub fn write_matrix_file(m: &Matrix) -> String {
    let mut s = matrix_to_string(m);
    s.push('\n');
    s
}

/// One matrix document per line.
pub fn read_matrix_list(text: &str) -> Result<Vec<Matrix>> {
    records(text)
        .map(|(id, line)| parse_matrix(line).map_err(|e| e.in_record(id)))
        .collect()
}

pub fn write_matrix_list(ms: &[Matrix]) -> String {
    ms.iter().map(|m| matrix_to_string(m) + "\n").collect()
}

/// Per-sentence row of a corpus report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub id: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub source_len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target_len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub al: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dal: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_suf: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_nec: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_aligned: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_sufficient: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub iou: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub omega_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub omega_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub total_reg: Option<f64>,
}

impl SentenceRecord {
    pub fn from_metrics(id: usize, m: &MetricReport) -> Self {
        SentenceRecord {
            id,
            source_len: Some(m.source_len),
            target_len: Some(m.target_len),
            al: Some(m.al),
            ap: Some(m.ap),
            dal: Some(m.dal),
            a_suf: m.a_suf,
            a_nec: m.a_nec,
            n_aligned: m.n_aligned,
            n_sufficient: m.n_sufficient,
            ..Default::default()
        }
    }
}

/// Corpus means; each field averages the sentences on which it is defined.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub al: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dal: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_suf: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_nec: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub iou: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub omega_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub omega_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub total_reg: Option<f64>,
}

fn mean_of(records: &[SentenceRecord], field: impl Fn(&SentenceRecord) -> Option<f64>) -> Option<f64> {
    let (sum, n) = records
        .iter()
        .filter_map(&field)
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl Aggregate {
    pub fn from_records(records: &[SentenceRecord]) -> Option<Self> {
        if records.is_empty() {
            return None;
        }
        Some(Aggregate {
            al: mean_of(records, |r| r.al),
            ap: mean_of(records, |r| r.ap),
            dal: mean_of(records, |r| r.dal),
            a_suf: mean_of(records, |r| r.a_suf),
            a_nec: mean_of(records, |r| r.a_nec),
            iou: mean_of(records, |r| r.iou),
            omega_f: mean_of(records, |r| r.omega_f),
            omega_b: mean_of(records, |r| r.omega_b),
            total_reg: mean_of(records, |r| r.total_reg),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub policy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_dual: Option<f64>,
    pub count: usize,
    /// Records dropped with a warning (dimension mismatches in `compare`).
    #[serde(default)]
    pub skipped: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub aggregate: Option<Aggregate>,
    pub sentences: Vec<SentenceRecord>,
}

impl CorpusReport {
    pub fn new(sentences: Vec<SentenceRecord>) -> Self {
        CorpusReport {
            policy: None,
            lambda_dual: None,
            count: sentences.len(),
            skipped: 0,
            aggregate: Aggregate::from_records(&sentences),
            sentences,
        }
    }
}

/// Pretty JSON with a fixed key order and a trailing newline.
pub fn write_report(report: &CorpusReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn read_report(text: &str) -> Result<CorpusReport> {
    serde_json::from_str(text).map_err(|e| Error::parse(None, format!("bad report: {e}")))
}

const TABLE_COLUMNS: [&str; 14] = [
    "id",
    "source_len",
    "target_len",
    "al",
    "ap",
    "dal",
    "a_suf",
    "a_nec",
    "n_aligned",
    "n_sufficient",
    "iou",
    "omega_f",
    "omega_b",
    "total_reg",
];

/// Tab-separated per-sentence table; undefined cells are empty.
pub fn report_to_table(report: &CorpusReport) -> String {
    fn cell<T: ToString>(v: Option<T>) -> String {
        v.map(|v| v.to_string()).unwrap_or_default()
    }
    let mut out = TABLE_COLUMNS.join("\t");
    out.push('\n');
    for r in &report.sentences {
        let cells = [
            r.id.to_string(),
            cell(r.source_len),
            cell(r.target_len),
            cell(r.al),
            cell(r.ap),
            cell(r.dal),
            cell(r.a_suf),
            cell(r.a_nec),
            cell(r.n_aligned),
            cell(r.n_sufficient),
            cell(r.iou),
            cell(r.omega_f),
            cell(r.omega_b),
            cell(r.total_reg),
        ];
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pharaoh_examples() {
        let a = parse_pharaoh("0-0 1-2 2-1", 3, 3, IndexBase::Zero).unwrap();
        assert_eq!(
            a.oracle_positions().positions(),
            &[Some(1), Some(3), Some(2)]
        );
        let a = parse_pharaoh("0-0 1-0", 1, 2, IndexBase::Zero).unwrap();
        assert_eq!(a.links(), &[vec![1, 2]]);
        assert_eq!(a.oracle_positions().positions(), &[Some(2)]);
        let a = parse_pharaoh("", 2, 3, IndexBase::Zero).unwrap();
        assert_eq!(a.oracle_positions().positions(), &[None, None]);
    }

    #[test]
    fn pharaoh_one_based() {
        let a = parse_pharaoh("1-1 3-2", 2, 3, IndexBase::One).unwrap();
        assert_eq!(a.oracle_positions().positions(), &[Some(1), Some(3)]);
        assert!(parse_pharaoh("0-1", 2, 3, IndexBase::One).is_err());
    }

    #[test]
    fn pharaoh_errors() {
        assert!(matches!(
            parse_pharaoh("0:1", 2, 2, IndexBase::Zero),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_pharaoh("a-1", 2, 2, IndexBase::Zero),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_pharaoh("-1-0", 2, 2, IndexBase::Zero),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_pharaoh("2-0", 2, 2, IndexBase::Zero),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            parse_pharaoh("0-2", 2, 2, IndexBase::Zero),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn corpus_parsing() {
        let c = parse_corpus("Fand ich\tI found it\nBam@@ berg\tBamberg\n").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].source, vec!["Fand", "ich"]);
        assert_eq!(c[1].source, vec!["Bam@@", "berg"]);
        assert_eq!(c[1].id, 1);
        assert_eq!(write_corpus(&c), "Fand ich\tI found it\nBam@@ berg\tBamberg\n");
        assert!(parse_corpus("").unwrap().is_empty());
        let err = parse_corpus("a b\tc\nno tab here\n").unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(parse_corpus("a\t \n").is_err());
    }

    #[test]
    fn path_lines() {
        let r = PathRecord::parse_line("RRWWWRWWRRW").unwrap();
        let p = r.to_path();
        assert_eq!((p.target_len(), p.source_len()), (6, 5));

        let r = PathRecord::parse_line(r#"{"g":[3,4,5,6,6,6],"J":6}"#).unwrap();
        assert_eq!(r.to_path().g().values(), &[3, 4, 5, 6, 6, 6]);
        assert_eq!(r.to_line(), r#"{"g":[3,4,5,6,6,6],"J":6}"#);

        assert!(PathRecord::parse_line(r#"{"g":[3,2],"J":6}"#).is_err());
        assert!(PathRecord::parse_line(r#"{"g":[3,7],"J":6}"#).is_err());
        assert!(PathRecord::parse_line(r#"{"g":[1],"J":1,"x":0}"#).is_err());
        assert!(PathRecord::parse_line("RRXW").is_err());
    }

    #[test]
    fn path_file_rejects_mixed_formats() {
        let err = read_path_file("RW\n{\"g\":[1],\"J\":1}\n").unwrap_err();
        assert!(err.to_string().contains("mixed"));
        assert!(err.to_string().contains("line 2"));
        let err = read_path_file("RW\nRQ\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn matrix_documents() {
        let m = read_matrix_file(r#"{"rows":2,"cols":2,"data":[[1,0],[0,1]]}"#).unwrap();
        assert_eq!(m.to_rows(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(write_matrix_file(&m), "{\"rows\":2,\"cols\":2,\"data\":[[1.0,0.0],[0.0,1.0]]}\n");

        let err = read_matrix_file(r#"{"rows":2,"cols":2,"data":[[1,0],[0]]}"#).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
        assert!(read_matrix_file(r#"{"rows":3,"cols":2,"data":[[1,0],[0,1]]}"#).is_err());
        assert!(read_matrix_file(r#"{"rows":1,"cols":1,"data":[["x"]]}"#).is_err());
        assert!(read_matrix_file(r#"{"rows":1,"cols":1,"data":[[NaN]]}"#).is_err());
        assert!(read_matrix_file(r#"{"rows":1,"cols":1,"data":[[1e999]]}"#).is_err());
    }

    #[test]
    fn matrix_list_names_record() {
        let text = "{\"rows\":1,\"cols\":1,\"data\":[[1]]}\n{\"rows\":1,\"cols\":2,\"data\":[[1]]}\n";
        let err = read_matrix_list(text).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn report_aggregates() {
        let empty = CorpusReport::new(vec![]);
        assert_eq!(empty.count, 0);
        assert!(empty.aggregate.is_none());
        assert!(!write_report(&empty).contains("aggregate"));

        let one = SentenceRecord {
            id: 0,
            al: Some(1.0),
            a_suf: Some(0.5),
            ..Default::default()
        };
        let two = SentenceRecord {
            id: 1,
            al: Some(3.0),
            ..Default::default()
        };
        let single = CorpusReport::new(vec![one.clone()]);
        assert_eq!(single.aggregate.as_ref().unwrap().al, Some(1.0));
        let both = CorpusReport::new(vec![one, two]);
        let agg = both.aggregate.as_ref().unwrap();
        assert_eq!(agg.al, Some(2.0));
        assert_eq!(agg.a_suf, Some(0.5));
        assert_eq!(agg.iou, None);

        let text = write_report(&both);
        assert_eq!(read_report(&text).unwrap(), both);
        let table = report_to_table(&both);
        assert_eq!(table.lines().count(), 3);
        assert!(table.starts_with("id\tsource_len"));
    }

    proptest! {
        #[test]
        fn matrix_round_trip_is_exact(
            data in proptest::collection::vec(proptest::collection::vec(-1e6f64..1e6, 3), 1..5)
        ) {
            let m = Matrix::from_rows(&data).unwrap();
            let text = write_matrix_file(&m);
            let back = read_matrix_file(&text).unwrap();
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(write_matrix_file(&back), text);
        }
    }
}
