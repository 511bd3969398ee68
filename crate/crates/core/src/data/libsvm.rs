//! LIBSVM text format: `label index:value index:value ...`, one example per
//! line, 1-based feature indices, `#` starts a comment.

use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use thiserror::Error;

use super::{Dataset, Label, SparseMatrix};
use crate::parallel::{map_collect, Reduction};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate feature index {index}")]
    DuplicateIndex { line: usize, index: usize },
    #[error("{0}")]
    Shape(String),
}

/// One parsed data line. Indices are kept 1-based and in file order.
#[derive(Clone, Debug, PartialEq)]
pub struct LibsvmLine {
    pub label: Label,
    pub entries: Vec<(usize, f64)>,
    /// The label token was `0`, mapped to [`Label::Negative`].
    pub zero_label: bool,
}

fn parse_err(line: usize, message: impl Into<String>) -> DataError {
    DataError::Parse {
        line,
        message: message.into(),
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
    .trim()
}

/// Parses a single line. `line_no` is only used in error messages.
pub fn parse_libsvm_line(line: &str, line_no: usize) -> Result<LibsvmLine, DataError> {
    let mut tokens = strip_comment(line).split_whitespace();
    let label_tok = tokens
        .next()
        .ok_or_else(|| parse_err(line_no, "missing label"))?;
    let label_val: f64 = label_tok
        .parse()
        .map_err(|_| parse_err(line_no, format!("expected a label, found {label_tok:?}")))?;
    let (label, zero_label) = if label_val == 1.0 {
        (Label::Positive, false)
    } else if label_val == -1.0 {
        (Label::Negative, false)
    } else if label_val == 0.0 {
        (Label::Negative, true)
    } else {
        return Err(parse_err(
            line_no,
            format!("label {label_tok:?} is not one of +1, -1, 0"),
        ));
    };

    let mut entries = Vec::new();
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| parse_err(line_no, format!("expected index:value, found {tok:?}")))?;
        let index: usize = idx
            .parse()
            .map_err(|_| parse_err(line_no, format!("invalid feature index {idx:?}")))?;
        if index < 1 {
            return Err(parse_err(line_no, "feature indices start at 1"));
        }
        let value: f64 = val
            .parse()
            .map_err(|_| parse_err(line_no, format!("invalid feature value {val:?}")))?;
        if !value.is_finite() {
            return Err(parse_err(
                line_no,
                format!("non-finite feature value {val:?}"),
            ));
        }
        entries.push((index, value));
    }
    Ok(LibsvmLine {
        label,
        entries,
        zero_label,
    })
}

/// Parses a whole LIBSVM document held in memory.
///
/// Blank and comment-only lines are skipped. The column count is the larger
/// of `n_cols_hint` and the largest index seen. Out-of-order indices are
/// sorted; a repeated index is an error.
pub fn parse_dataset(text: &str, n_cols_hint: Option<usize>) -> Result<Dataset, DataError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !strip_comment(l).is_empty())
        .collect();

    // Lines are parsed concurrently; the first error in file order wins.
    let parsed = map_collect(Reduction::default(), lines.len(), |k| {
        let (line_no, line) = lines[k];
        parse_libsvm_line(line, line_no).and_then(|p| {
            let row = assemble_row(p.entries, line_no)?;
            Ok((p.label, row, p.zero_label))
        })
    });

    let mut labels = Vec::with_capacity(parsed.len());
    let mut rows = Vec::with_capacity(parsed.len());
    let mut saw_zero = false;
    for item in parsed {
        let (label, row, zero) = item?;
        saw_zero |= zero;
        labels.push(label);
        rows.push(row);
    }
    if saw_zero {
        log::warn!("label 0 found; treating it as -1");
    }

    let max_index = rows
        .iter()
        .filter_map(|r| r.last().map(|&(c, _)| c + 1))
        .max()
        .unwrap_or(0);
    let n_cols = max_index.max(n_cols_hint.unwrap_or(0));
    let features = SparseMatrix::from_sorted_rows(n_cols, &rows)
        .map_err(|e| DataError::Shape(e.to_string()))?;
    Dataset::new(features, labels)
}

/// 1-based entries to 0-based, sorted columns.
fn assemble_row(
    mut entries: Vec<(usize, f64)>,
    line_no: usize,
) -> Result<Vec<(usize, f64)>, DataError> {
    entries.sort_by_key(|&(i, _)| i);
    if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(DataError::DuplicateIndex {
            line: line_no,
            index: w[0].0,
        });
    }
    Ok(entries.into_iter().map(|(i, v)| (i - 1, v)).collect())
}

/// Loads a LIBSVM file; gzip input is detected by its magic bytes.
pub fn load_dataset(path: &Path, n_cols_hint: Option<usize>) -> Result<Dataset, DataError> {
    let io_err = |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    };
    let raw = std::fs::read(path).map_err(io_err)?;
    let bytes = if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(io_err)?;
        out
    } else {
        raw
    };
    let text = String::from_utf8(bytes)
        .map_err(|e| io_err(std::io::Error::new(std::io::ErrorKind::InvalidData, e)))?;
    parse_dataset(&text, n_cols_hint)
}

/// Canonical text form: `+1`/`-1` labels, ascending 1-based indices, single
/// spaces, shortest decimal that parses back to the same `f64`, one line per
/// row terminated by `\n`.
pub fn serialize_dataset(ds: &Dataset) -> String {
    let m = ds.features();
    let mut out = String::with_capacity(16 * (m.nnz() + m.n_rows()));
    for r in 0..m.n_rows() {
        out.push_str(match ds.label(r) {
            Label::Positive => "+1",
            Label::Negative => "-1",
        });
        let (cols, vals) = m.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            let _ = write!(out, " {}:{}", c + 1, shortest(v));
        }
        out.push('\n');
    }
    out
}

fn shortest(v: f64) -> String {
    let s = format!("{v:?}");
    match s.strip_suffix(".0") {
        Some(t) => t.to_string(),
        None => s,
    }
}
