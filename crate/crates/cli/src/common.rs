use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use pbda::optimize::{LineSearch, MinimizeSettings, ObjectiveOptions, TrainSettings};
use pbda::{KernelSpec, LabeledSample, UnlabeledSample};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};

pub const SPEC_VERSION: &str = "1.0";

/// Failure of a command, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(pbda::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(pbda::Error::Numerical(_)) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<pbda::Error> for CliError {
    fn from(e: pbda::Error) -> Self {
        CliError::Lib(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Overlays the non-empty flag values onto the config file and decodes the
/// result, so unknown keys and missing required fields are reported once.
pub fn merge_config<T: DeserializeOwned + Serialize>(config: Option<&Path>, flags: &impl Serialize) -> CliResult<T> {
    let mut merged = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            match serde_json::from_str::<Value>(&text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => return Err(usage(format!("config {} must be a JSON object", path.display()))),
                Err(e) => return Err(usage(format!("config {}: {e}", path.display()))),
            }
        }
        None => Map::new(),
    };
    let flags = serde_json::to_value(flags).map_err(|e| usage(e.to_string()))?;
    if let Value::Object(f) = flags {
        for (k, v) in f {
            let empty = v.is_null() || v.as_array().is_some_and(Vec::is_empty);
            if !empty {
                merged.insert(k, v);
            }
        }
    }
    let input = Value::Object(merged);
    let parsed: T = serde_json::from_value(input.clone()).map_err(|e| usage(format!("invalid configuration: {e}")))?;
    reject_unknown(&input, &parsed)?;
    Ok(parsed)
}

/// Every config type serializes all of its fields, so a key that does not
/// come back out was not recognised.
fn reject_unknown<T: Serialize>(input: &Value, parsed: &T) -> CliResult<()> {
    let known = serde_json::to_value(parsed).map_err(|e| usage(e.to_string()))?;
    if let (Value::Object(i), Value::Object(k)) = (input, &known) {
        let mut unknown: Vec<&str> = i.keys().filter(|key| !k.contains_key(*key)).map(String::as_str).collect();
        if !unknown.is_empty() {
            unknown.sort_unstable();
            return Err(usage(format!("unknown configuration keys: {}", unknown.join(", "))));
        }
    }
    Ok(())
}

/// Prints a JSON report carrying the version tag and the effective config.
pub fn emit(config: &impl Serialize, body: Value) -> CliResult<()> {
    let mut out = Map::new();
    out.insert("spec_version".into(), Value::from(SPEC_VERSION));
    out.insert(
        "config".into(),
        serde_json::to_value(config).map_err(|e| usage(e.to_string()))?,
    );
    if let Value::Object(b) = body {
        out.extend(b);
    }
    let text = serde_json::to_string_pretty(&Value::Object(out)).map_err(|e| usage(e.to_string()))?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(usage(format!("cannot write output: {e}"))),
        _ => Ok(()),
    }
}

pub fn to_json(v: &impl Serialize) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| usage(e.to_string()))
}

/// A path list that may be written as a single string in config files.
pub fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<PathBuf>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        One(PathBuf),
        Many(Vec<PathBuf>),
    }
    Ok(match Raw::deserialize(d)? {
        Raw::One(p) => vec![p],
        Raw::Many(v) => v,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KernelChoice {
    /// Explicit weight vector over the input features.
    #[default]
    None,
    Linear,
    Rbf,
}

impl KernelChoice {
    pub fn spec(self, gamma: f64) -> CliResult<Option<KernelSpec>> {
        Ok(match self {
            KernelChoice::None => None,
            KernelChoice::Linear => Some(KernelSpec::Linear),
            KernelChoice::Rbf => Some(KernelSpec::rbf(gamma)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Pbgd3,
    Pbda,
    PbdaMulti,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum LineSearchChoice {
    StrongWolfe,
    WeakWolfe,
}

impl From<LineSearchChoice> for LineSearch {
    fn from(c: LineSearchChoice) -> Self {
        match c {
            LineSearchChoice::StrongWolfe => LineSearch::StrongWolfe,
            LineSearchChoice::WeakWolfe => LineSearch::WeakWolfe,
        }
    }
}

/// Optimizer knobs shared by the training commands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Knobs {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub line_search: LineSearchChoice,
    pub unequal_sizes: bool,
}

impl Default for Knobs {
    fn default() -> Self {
        let m = MinimizeSettings::default();
        Self {
            max_iter: m.max_iter,
            grad_tol: m.grad_tol,
            line_search: LineSearchChoice::StrongWolfe,
            unequal_sizes: false,
        }
    }
}

/// Flag form of [`Knobs`].
#[derive(Debug, Clone, Default, clap::Args, Serialize)]
pub struct KnobArgs {
    /// L-BFGS iteration cap.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Stop once the gradient norm is at most this.
    #[arg(long)]
    pub grad_tol: Option<f64>,
    #[arg(long, value_enum)]
    pub line_search: Option<LineSearchChoice>,
    /// Allow source and target samples of different sizes.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub unequal_sizes: Option<bool>,
}

impl Knobs {
    pub fn settings(&self, kernel: Option<KernelSpec>) -> CliResult<TrainSettings> {
        if !(self.grad_tol >= 0.0) || self.max_iter == 0 {
            return Err(usage("max_iter must be >= 1 and grad_tol >= 0"));
        }
        Ok(TrainSettings {
            kernel,
            minimize: MinimizeSettings {
                max_iter: self.max_iter,
                grad_tol: self.grad_tol,
                line_search: self.line_search.into(),
                ..MinimizeSettings::default()
            },
            objective: ObjectiveOptions {
                unequal_sizes: self.unequal_sizes,
                ..ObjectiveOptions::default()
            },
        })
    }
}

/// Reads svmlight files and widens them to a common dimension.
pub fn read_samples(paths: &[PathBuf]) -> CliResult<Vec<LabeledSample>> {
    let samples = paths
        .iter()
        .map(|p| pbda::data::read_svmlight(p))
        .collect::<pbda::Result<Vec<_>>>()?;
    let dim = samples.iter().map(LabeledSample::dim).max().unwrap_or(0);
    Ok(samples.into_iter().map(|s| s.widened(dim)).collect::<pbda::Result<Vec<_>>>()?)
}

/// Source samples plus an optional target whose labels are dropped.
pub fn read_domains(
    sources: &[PathBuf],
    target: Option<&Path>,
) -> CliResult<(Vec<LabeledSample>, Option<UnlabeledSample>)> {
    if sources.is_empty() {
        return Err(usage("at least one source file is required"));
    }
    let mut paths = sources.to_vec();
    if let Some(t) = target {
        paths.push(t.to_path_buf());
    }
    let mut all = read_samples(&paths)?;
    let target = target.map(|_| all.pop().expect("target sample").unlabeled());
    Ok((all, target))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| {
        CliError::Lib(pbda::Error::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    struct Demo {
        #[serde(deserialize_with = "one_or_many")]
        paths: Vec<PathBuf>,
        #[serde(default)]
        n: usize,
        #[serde(flatten)]
        knobs: Knobs,
    }

    #[derive(Serialize)]
    struct Flags {
        n: Option<usize>,
        paths: Vec<PathBuf>,
        max_iter: Option<usize>,
    }

    fn write_config(text: &str) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), text).unwrap();
        f
    }

    #[test]
    fn flags_win_and_empty_flags_do_not() {
        let f = write_config(r#"{"paths": "a.svm", "n": 3, "max_iter": 7}"#);
        let flags = Flags {
            n: Some(5),
            paths: vec![],
            max_iter: None,
        };
        let d: Demo = merge_config(Some(f.path()), &flags).unwrap();
        assert_eq!(d.paths, vec![PathBuf::from("a.svm")]);
        assert_eq!(d.n, 5);
        assert_eq!(d.knobs.max_iter, 7);
        assert_eq!(d.knobs.grad_tol, Knobs::default().grad_tol);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let f = write_config(r#"{"paths": ["a"], "typo": 1}"#);
        let flags = Flags {
            n: None,
            paths: vec![],
            max_iter: None,
        };
        let err = merge_config::<Demo>(Some(f.path()), &flags).unwrap_err();
        assert!(err.to_string().contains("typo"));
        assert_eq!(err.exit_code(), 1);
        let bad = write_config("[1, 2]");
        assert!(merge_config::<Demo>(Some(bad.path()), &flags).is_err());
    }

    #[test]
    fn numerical_errors_map_to_two() {
        assert_eq!(CliError::Lib(pbda::Error::Numerical("x".into())).exit_code(), 2);
        assert_eq!(CliError::Lib(pbda::Error::EmptySample("s")).exit_code(), 1);
        assert_eq!(usage("u").exit_code(), 1);
    }
}
