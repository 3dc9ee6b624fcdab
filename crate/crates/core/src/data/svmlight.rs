//! svmlight text format: `<label> <index>:<value> ...` with 1-based indices.
//!
//! Lines may carry a trailing `#` comment. A leading `# dim <n>` comment fixes
//! the dimension; otherwise it is the largest index seen. Instances are read
//! as sparse vectors.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sample::{FeatureVector, Label, LabeledSample, SparseVector};

fn parse_error(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn parse_dim_header(comment: &str) -> Option<usize> {
    let mut parts = comment.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some("dim"), Some(n), None) => n.parse().ok(),
        _ => None,
    }
}

/// Parses svmlight text; `path` is only used in error messages.
pub fn parse_svmlight(text: &str, path: &Path, dim: Option<usize>) -> Result<LabeledSample> {
    let mut header_dim = None;
    let mut rows: Vec<(Vec<usize>, Vec<f64>)> = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let (body, comment) = match raw.find('#') {
            Some(p) => (&raw[..p], Some(&raw[p + 1..])),
            None => (raw, None),
        };
        let body = body.trim();
        if body.is_empty() {
            if rows.is_empty() && header_dim.is_none() {
                header_dim = comment.and_then(parse_dim_header);
            }
            continue;
        }
        let mut tokens = body.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line");
        let label_val: f64 = label_tok
            .parse()
            .map_err(|_| parse_error(path, line_no, format!("bad label `{label_tok}`")))?;
        let label = Label::from_value(label_val)
            .map_err(|_| parse_error(path, line_no, format!("label must be +1 or -1, got `{label_tok}`")))?;
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for tok in tokens {
            let (i, v) = tok
                .split_once(':')
                .ok_or_else(|| parse_error(path, line_no, format!("expected index:value, got `{tok}`")))?;
            let i: usize = i
                .parse()
                .map_err(|_| parse_error(path, line_no, format!("bad index `{i}`")))?;
            if i == 0 {
                return Err(parse_error(path, line_no, "indices are 1-based"));
            }
            let v: f64 = v
                .parse()
                .map_err(|_| parse_error(path, line_no, format!("bad value `{v}`")))?;
            if !v.is_finite() {
                return Err(parse_error(path, line_no, format!("non-finite value `{tok}`")));
            }
            if indices.last().is_some_and(|&last| i - 1 <= last) {
                return Err(parse_error(path, line_no, "indices must be strictly ascending"));
            }
            indices.push(i - 1);
            values.push(v);
            max_index = max_index.max(i);
        }
        rows.push((indices, values));
        labels.push(label);
    }
    let dim = dim.or(header_dim).unwrap_or(max_index);
    if max_index > dim {
        return Err(parse_error(
            path,
            0,
            format!("feature index {max_index} exceeds dimension {dim}"),
        ));
    }
    let instances = rows
        .into_iter()
        .map(|(i, v)| SparseVector::new(dim, i, v).map(FeatureVector::Sparse))
        .collect::<Result<Vec<_>>>()?;
    LabeledSample::with_dim(dim, instances, labels)
}

pub fn read_svmlight(path: &Path) -> Result<LabeledSample> {
    read_svmlight_with_dim(path, None)
}

/// Reads a file, forcing the dimension when `dim` is given.
pub fn read_svmlight_with_dim(path: &Path, dim: Option<usize>) -> Result<LabeledSample> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_svmlight(&text, path, dim)
}

/// Formats a sample; values carry 17 significant digits.
pub fn format_svmlight(sample: &LabeledSample) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# dim {}", sample.dim());
    for (x, y) in sample.iter() {
        out.push_str(if y == Label::Positive { "+1" } else { "-1" });
        match x {
            FeatureVector::Sparse(s) => {
                for (i, v) in s.iter() {
                    let _ = write!(out, " {}:{:.16e}", i + 1, v);
                }
            }
            FeatureVector::Dense(d) => {
                for (i, v) in d.iter().enumerate().filter(|(_, v)| **v != 0.0) {
                    let _ = write!(out, " {}:{:.16e}", i + 1, v);
                }
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_svmlight(sample: &LabeledSample, path: &Path) -> Result<()> {
    fs::write(path, format_svmlight(sample)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
