//! `dualpath` command-line interface.
//!
//! Exit codes: 0 success, 1 input error (unreadable or malformed files,
//! bad arguments), 2 consistency error (record counts or dimensions that
//! disagree). Warnings go to stderr and never change a zero exit code.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::batch::{
    evaluate_duality, evaluate_metrics, simulate, DualityInput, Execution, MetricInput,
    SimulationInput,
};
use crate::error::{Error, Result};
use crate::io::{
    alignment_lines, parse_corpus, parse_pharaoh, read_matrix_file, read_matrix_list,
    read_path_file, read_report, read_text, report_to_table, write_matrix_file,
    write_matrix_list, write_path_file, write_report, write_text, CorpusReport, IndexBase,
    PathFormat, PathRecord, SentencePair,
};
use crate::loss::{Monotonicity, DEFAULT_LAMBDA_DUAL};
use crate::matrix::{Matrix, WritingProbabilityMatrix};
use crate::metrics::OraclePositions;
use crate::path::ReadWritePath;
use crate::policy::PolicySpec;
use crate::transpose::{transpose_g, write_positions, Transposition};

#[derive(Debug, Parser)]
#[command(name = "dualpath", version, about = "Read/write path analysis for simultaneous translation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Evaluate sentences on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transpose paths or writing probability matrices into the reverse direction.
    Transpose(TransposeArgs),
    /// Latency and alignment metrics for a path file.
    Metrics(MetricsArgs),
    /// IoU duality (and the duality regularizer) between forward and backward paths.
    Compare(CompareArgs),
    /// Generate paths with a fixed policy and evaluate them.
    Simulate(SimulateArgs),
    /// Convert a JSON report into a tab-separated table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct TransposeArgs {
    /// Path file, or matrix document(s).
    #[arg(long)]
    pub input: PathBuf,
    /// Backward path file (stdout if omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Where to write the 0/1 write matrices, one document per line.
    #[arg(long)]
    pub gamma: Option<PathBuf>,
    /// Reject matrices whose argmax positions regress instead of repairing them.
    #[arg(long)]
    pub strict_monotonic: bool,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Path file.
    #[arg(long)]
    pub input: PathBuf,
    /// Pharaoh alignments, one line per sentence.
    #[arg(long)]
    pub alignments: Option<PathBuf>,
    /// Tab-separated corpus used to check path dimensions.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Index base of alignment links.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub base: u8,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Forward (source-to-target) path file.
    #[arg(long)]
    pub input: PathBuf,
    /// Backward (target-to-source) path file.
    #[arg(long)]
    pub backward: PathBuf,
    /// Forward writing probability matrices, one document per line.
    #[arg(long, requires = "backward_matrices")]
    pub forward_matrices: Option<PathBuf>,
    /// Backward writing probability matrices, one document per line.
    #[arg(long, requires = "forward_matrices")]
    pub backward_matrices: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_LAMBDA_DUAL)]
    pub lambda_dual: f64,
    #[arg(long)]
    pub strict_monotonic: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PathFormatArg {
    Actions,
    Json,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// `wait_k`, `oracle_alignment`, or `replay`.
    #[arg(long)]
    pub policy: String,
    #[arg(long)]
    pub k: Option<usize>,
    /// Tab-separated corpus.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub alignments: Option<PathBuf>,
    /// Path file to replay.
    #[arg(long)]
    pub paths: Option<PathBuf>,
    /// Where to write the generated paths.
    #[arg(long)]
    pub paths_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: PathFormatArg,
    /// Report destination (stdout if omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub base: u8,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// JSON report produced by metrics, compare, or simulate.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

struct Io<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Io<'_> {
    fn emit(&mut self, dest: Option<&Path>, contents: &str) -> Result<()> {
        match dest {
            Some(path) => write_text(path, contents),
            None => self.stdout.write_all(contents.as_bytes()).map_err(|e| Error::Io {
                path: "<stdout>".into(),
                message: e.to_string(),
            }),
        }
    }

    fn warn(&mut self, message: impl std::fmt::Display) {
        let _ = writeln!(self.stderr, "warning: {message}");
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let mut io = Io { stdout, stderr };
    match execute(cli, &mut io) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, io: &mut Io<'_>) -> Result<()> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    match cli.command {
        Command::Transpose(args) => cmd_transpose(&args, io),
        Command::Metrics(args) => cmd_metrics(&args, exec, io),
        Command::Compare(args) => cmd_compare(&args, exec, io),
        Command::Simulate(args) => cmd_simulate(&args, exec, io),
        Command::Report(args) => cmd_report(&args, io),
    }
}

/// Matrix input is recognised by its `rows` key; anything else is a path file.
fn looks_like_matrix(text: &str) -> bool {
    text.trim_start().starts_with('{')
        && text
            .lines()
            .find(|l| !l.trim().is_empty())
            .is_some_and(|l| l.contains("\"rows\"") || l.trim() == "{")
}

fn read_matrices(text: &str) -> Result<Vec<Matrix>> {
    match read_matrix_file(text) {
        Ok(m) => Ok(vec![m]),
        Err(_) => read_matrix_list(text),
    }
}

fn writing_matrices(text: &str) -> Result<Vec<WritingProbabilityMatrix>> {
    read_matrices(text)?
        .into_iter()
        .enumerate()
        .map(|(id, m)| WritingProbabilityMatrix::new(m).map_err(|e| e.in_record(id)))
        .collect()
}

pub fn cmd_transpose_text(
    text: &str,
    strict_monotonic: bool,
) -> Result<(Vec<PathRecord>, Vec<Matrix>, Vec<String>)> {
    let mut warnings = Vec::new();
    let mut outputs: Vec<(Transposition, PathFormat)> = Vec::new();
    if looks_like_matrix(text) {
        let mode = if strict_monotonic {
            Monotonicity::Strict
        } else {
            Monotonicity::Repair
        };
        for (id, alpha) in writing_matrices(text)?.iter().enumerate() {
            let t = mode.transpose(alpha).map_err(|e| e.in_record(id))?;
            if t.monotonized {
                let position = write_positions(alpha).first_regression().unwrap_or_default();
                warnings.push(format!(
                    "record {id}: write positions regress at target position {position}; repaired with a running maximum"
                ));
            }
            outputs.push((t, PathFormat::Json));
        }
    } else {
        for (id, record) in read_path_file(text)?.iter().enumerate() {
            let path = record.to_path();
            if !path.is_complete() {
                warnings.push(format!(
                    "record {id}: path stops writing before the source ends; trailing source tokens join the last segment"
                ));
            }
            outputs.push((transpose_g(&path).map_err(|e| e.in_record(id))?, record.format()));
        }
    }
    let (paths, gammas) = outputs
        .into_iter()
        .map(|(t, format)| {
            (
                PathRecord::from_path(t.backward_path(), format),
                t.gamma.to_dense(),
            )
        })
        .unzip();
    Ok((paths, gammas, warnings))
}

fn cmd_transpose(args: &TransposeArgs, io: &mut Io<'_>) -> Result<()> {
    let text = read_text(&args.input)?;
    let (paths, gammas, warnings) = cmd_transpose_text(&text, args.strict_monotonic)?;
    for w in warnings {
        io.warn(w);
    }
    if let Some(gamma_path) = &args.gamma {
        let contents = if gammas.len() == 1 {
            write_matrix_file(&gammas[0])
        } else {
            write_matrix_list(&gammas)
        };
        write_text(gamma_path, &contents)?;
    }
    io.emit(args.output.as_deref(), &write_path_file(&paths))
}

fn check_count(what: &str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::dimension(format!(
            "{what} has {found} records but {expected} were expected"
        )));
    }
    Ok(())
}

fn load_alignments(
    path: &Path,
    dims: &[(usize, usize)],
    base: IndexBase,
) -> Result<Vec<OraclePositions>> {
    let text = read_text(path)?;
    let lines = alignment_lines(&text);
    check_count("alignment file", dims.len(), lines.len())?;
    lines
        .iter()
        .zip(dims)
        .enumerate()
        .map(|(id, (line, &(i, j)))| {
            parse_pharaoh(line, i, j, base)
                .map(|a| a.oracle_positions())
                .map_err(|e| e.in_record(id))
        })
        .collect()
}

fn check_against_corpus(paths: &[ReadWritePath], corpus: &[SentencePair]) -> Result<()> {
    check_count("path file", corpus.len(), paths.len())?;
    for (p, s) in paths.iter().zip(corpus) {
        if (p.target_len(), p.source_len()) != (s.target_len(), s.source_len()) {
            return Err(Error::Dimension {
                record: Some(s.id),
                message: format!(
                    "path covers {} targets and {} sources but the sentence pair has {} and {}",
                    p.target_len(),
                    p.source_len(),
                    s.target_len(),
                    s.source_len()
                ),
            });
        }
    }
    Ok(())
}

fn cmd_metrics(args: &MetricsArgs, exec: Execution, io: &mut Io<'_>) -> Result<()> {
    let paths: Vec<ReadWritePath> = read_path_file(&read_text(&args.input)?)?
        .iter()
        .map(PathRecord::to_path)
        .collect();
    if let Some(corpus) = &args.corpus {
        check_against_corpus(&paths, &parse_corpus(&read_text(corpus)?)?)?;
    }
    let dims: Vec<(usize, usize)> = paths
        .iter()
        .map(|p| (p.target_len(), p.source_len()))
        .collect();
    let alignments = match &args.alignments {
        Some(a) => Some(load_alignments(a, &dims, IndexBase::from_number(args.base)?)?),
        None => None,
    };
    let inputs: Vec<MetricInput> = paths
        .into_iter()
        .enumerate()
        .map(|(id, path)| MetricInput {
            path,
            alignment: alignments.as_ref().map(|a| a[id].clone()),
        })
        .collect();
    let report = CorpusReport::new(evaluate_metrics(exec, &inputs)?);
    io.emit(args.output.as_deref(), &write_report(&report))
}

fn cmd_compare(args: &CompareArgs, exec: Execution, io: &mut Io<'_>) -> Result<()> {
    let forward = read_path_file(&read_text(&args.input)?)?;
    let backward = read_path_file(&read_text(&args.backward)?)?;
    check_count("backward path file", forward.len(), backward.len())?;
    let matrices = match (&args.forward_matrices, &args.backward_matrices) {
        (Some(f), Some(b)) => {
            let f = writing_matrices(&read_text(f)?)?;
            let b = writing_matrices(&read_text(b)?)?;
            check_count("forward matrix file", forward.len(), f.len())?;
            check_count("backward matrix file", forward.len(), b.len())?;
            Some(f.into_iter().zip(b).collect::<Vec<_>>())
        }
        _ => None,
    };
    let inputs: Vec<DualityInput> = forward
        .iter()
        .zip(&backward)
        .enumerate()
        .map(|(id, (f, b))| DualityInput {
            forward: f.to_path(),
            backward: b.to_path(),
            matrices: matrices.as_ref().map(|m| m[id].clone()),
        })
        .collect();
    let mode = if args.strict_monotonic {
        Monotonicity::Strict
    } else {
        Monotonicity::Repair
    };
    let outcome = evaluate_duality(exec, &inputs, args.lambda_dual, mode)?;
    for (_, e) in &outcome.skipped {
        io.warn(format!("skipped: {e}"));
    }
    let mut report = CorpusReport::new(outcome.records);
    report.skipped = outcome.skipped.len();
    if matrices.is_some() {
        report.lambda_dual = Some(args.lambda_dual);
    }
    io.emit(args.output.as_deref(), &write_report(&report))
}

fn cmd_simulate(args: &SimulateArgs, exec: Execution, io: &mut Io<'_>) -> Result<()> {
    let policy = PolicySpec::parse(&args.policy, args.k)?;
    let corpus = parse_corpus(&read_text(&args.input)?)?;
    let dims: Vec<(usize, usize)> = corpus
        .iter()
        .map(|s| (s.target_len(), s.source_len()))
        .collect();
    let alignments = match &args.alignments {
        Some(a) => Some(load_alignments(a, &dims, IndexBase::from_number(args.base)?)?),
        None => None,
    };
    let replay = match (&policy, &args.paths) {
        (PolicySpec::Replay, Some(p)) => {
            let paths: Vec<ReadWritePath> = read_path_file(&read_text(p)?)?
                .iter()
                .map(PathRecord::to_path)
                .collect();
            check_against_corpus(&paths, &corpus)?;
            Some(paths)
        }
        (PolicySpec::Replay, None) => {
            return Err(Error::invalid("policy", "replay needs --paths"));
        }
        _ => None,
    };
    let inputs: Vec<SimulationInput> = corpus
        .iter()
        .enumerate()
        .map(|(id, s)| SimulationInput {
            target_len: s.target_len(),
            source_len: s.source_len(),
            alignment: alignments.as_ref().map(|a| a[id].clone()),
            replay: replay.as_ref().map(|r| r[id].clone()),
        })
        .collect();
    let (paths, records) = simulate(exec, policy, &inputs)?;
    if let Some(out) = &args.paths_out {
        let format = match args.format {
            PathFormatArg::Actions => PathFormat::Actions,
            PathFormatArg::Json => PathFormat::Json,
        };
        let records: Vec<PathRecord> = paths
            .into_iter()
            .map(|p| PathRecord::from_path(p, format))
            .collect();
        write_text(out, &write_path_file(&records))?;
    }
    let mut report = CorpusReport::new(records);
    report.policy = Some(policy.to_string());
    io.emit(args.output.as_deref(), &write_report(&report))
}

fn cmd_report(args: &ReportArgs, io: &mut Io<'_>) -> Result<()> {
    let report = read_report(&read_text(&args.input)?)?;
    io.emit(args.output.as_deref(), &report_to_table(&report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("dualpath").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn transpose_text_paths_and_matrices() {
        let (paths, gammas, warnings) = cmd_transpose_text("RRWWWRWWRRW\n", false).unwrap();
        assert_eq!(write_path_file(&paths), "RRRWWRRWRWW\n");
        assert_eq!(gammas[0].shape(), (5, 6));
        assert!(warnings.is_empty());

        let (paths, _, warnings) = cmd_transpose_text("RRWWR\n", false).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(warnings.len(), 1);

        let doc = r#"{"rows":3,"cols":3,"data":[[0,0,1],[1,0,0],[0,0,1]]}"#;
        let (paths, _, warnings) = cmd_transpose_text(doc, false).unwrap();
        assert_eq!(paths[0].to_path().g().values(), &[3, 3, 3]);
        assert!(warnings[0].contains("position 2"), "{warnings:?}");
        assert!(matches!(
            cmd_transpose_text(doc, true),
            Err(Error::NonMonotone { position: 2 })
        ));
    }

    #[test]
    fn bad_arguments_exit_one() {
        assert_eq!(run_args(&["bogus"]).0, 1);
        assert_eq!(run_args(&["metrics"]).0, 1);
        assert_eq!(run_args(&["metrics", "--input", "x", "--base", "2"]).0, 1);
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("transpose"));
    }

    #[test]
    fn missing_file_exits_one() {
        let (code, _, err) = run_args(&["metrics", "--input", "/nonexistent/paths.txt"]);
        assert_eq!(code, 1);
        assert!(err.contains("error:"));
    }

    #[test]
    fn invalid_policy_exits_one() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("c.tsv");
        std::fs::write(&corpus, "a b\tc d\n").unwrap();
        let c = corpus.to_str().unwrap();
        assert_eq!(run_args(&["simulate", "--policy", "wait_k", "--k", "0", "--input", c]).0, 1);
        assert_eq!(run_args(&["simulate", "--policy", "nope", "--input", c]).0, 1);
        assert_eq!(run_args(&["simulate", "--policy", "replay", "--input", c]).0, 1);
        assert_eq!(run_args(&["simulate", "--policy", "oracle_alignment", "--input", c]).0, 1);
    }
}
