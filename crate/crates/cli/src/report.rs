//! Report envelope, input digests and the three output formats.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use frameorbit::io::{self, to_json};
use frameorbit::{Error, Frame, Operator, SymmetricGauge};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::args::{Format, Options};
use crate::Failure;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Settings echoed into every report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub gauge: SymmetricGauge,
    pub threshold: f64,
    pub rank_tol: f64,
    pub grouping_tol: f64,
    pub seed: u64,
    pub samples: usize,
    pub output_format: Format,
    pub djl: bool,
    pub refine: usize,
}

impl RunConfig {
    pub fn from_options(o: &Options) -> Result<Self, Failure> {
        let bad = |m: String| Err(Failure::Usage(m));
        if !(o.tau > 0.0 && o.tau.is_finite()) {
            return bad(format!("--tau must be positive, got {}", o.tau));
        }
        if !(o.rank_tol > 0.0 && o.rank_tol < 1.0) {
            return bad(format!("--rank-tol must lie in (0, 1), got {}", o.rank_tol));
        }
        if !(o.group_tol > 0.0 && o.group_tol.is_finite()) {
            return bad(format!("--group-tol must be positive, got {}", o.group_tol));
        }
        if o.samples == 0 {
            return bad("--samples must be at least 1".into());
        }
        Ok(Self {
            gauge: o.gauge,
            threshold: o.tau,
            rank_tol: o.rank_tol,
            grouping_tol: o.group_tol,
            seed: o.seed,
            samples: o.samples,
            output_format: o.format,
            djl: o.djl,
            refine: o.refine,
        })
    }
}

#[derive(Serialize)]
pub struct Report<'a> {
    pub command: &'a str,
    pub inputs: &'a [InputDigest],
    pub config: &'a RunConfig,
    pub result: &'a Value,
}

/// Reads inputs and remembers their digests for the report.
#[derive(Default)]
pub struct Inputs {
    pub digests: Vec<InputDigest>,
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let bytes = fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        self.digests.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        String::from_utf8(bytes).map_err(|_| Failure::Input(format!("{}: not UTF-8 text", path.display())))
    }

    pub fn operator(&mut self, path: &Path, rank_tol: f64) -> Result<Operator, Failure> {
        let text = self.read(path)?;
        let op = if is_csv(path) { io::matrix_from_csv(&text) } else { io::matrix_from_json(&text) };
        let op = op.map_err(|e| located(path, e))?;
        Ok(Operator::with_rank_tol(op.into_matrix(), rank_tol)?)
    }

    pub fn frame(&mut self, path: &Path) -> Result<Frame, Failure> {
        let text = self.read(path)?;
        let f = if is_csv(path) { io::frame_from_csv(&text) } else { io::frame_from_json(&text) };
        f.map_err(|e| located(path, e))
    }
}

fn located(path: &Path, e: Error) -> Failure {
    if e.is_parse_error() {
        Failure::Input(format!("{}: {e}", path.display()))
    } else {
        Failure::Core(e)
    }
}

/// What a command produced, before it is wrapped in the envelope.
pub struct Output {
    pub result: Value,
    /// Payload for `--format csv`, when the result is a matrix or a frame.
    pub csv: Option<String>,
    /// A hypothesis that failed after the report was assembled.
    pub failure: Option<String>,
}

impl Output {
    pub fn new<T: Serialize>(result: &T) -> Result<Self, Failure> {
        let result = serde_json::to_value(result).map_err(|e| Failure::Internal(e.to_string()))?;
        Ok(Self { result, csv: None, failure: None })
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    pub fn failing_if(mut self, failed: bool, message: impl FnOnce() -> String) -> Self {
        if failed {
            self.failure = Some(message());
        }
        self
    }
}

pub fn render(command: &str, inputs: &Inputs, config: &RunConfig, out: &Output) -> Result<String, Failure> {
    match config.output_format {
        Format::Json => {
            let report = Report {
                command,
                inputs: &inputs.digests,
                config,
                result: &out.result,
            };
            Ok(to_json(&report)?)
        }
        Format::Csv => out
            .csv
            .clone()
            .ok_or_else(|| Failure::Usage(format!("`{command}` has no CSV form; use --format json or text"))),
        Format::Text => {
            let mut s = format!("command: {command}\n");
            for d in &inputs.digests {
                let _ = writeln!(s, "input: {} sha256={}", d.path, d.sha256);
            }
            let config = serde_json::to_value(config).map_err(|e| Failure::Internal(e.to_string()))?;
            s.push_str("config:\n");
            text(&config, 1, &mut s);
            s.push_str("result:\n");
            text(&out.result, 1, &mut s);
            Ok(s)
        }
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// Indented `key: value` listing; arrays of scalars stay on one line.
fn text(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                match inline(v) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}{k}: {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}{k}:");
                        text(v, depth + 1, out);
                    }
                }
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                match inline(item) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}[{i}] {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}[{i}]");
                        text(item, depth + 1, out);
                    }
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar(other).unwrap_or_default());
        }
    }
}

fn inline(v: &Value) -> Option<String> {
    if let Some(s) = scalar(v) {
        return Some(s);
    }
    match v {
        Value::Array(items) if items.iter().all(|x| scalar(x).is_some() || inline_pair(x)) => Some(format!(
            "[{}]",
            items.iter().map(|x| inline(x).unwrap_or_default()).collect::<Vec<_>>().join(", ")
        )),
        _ => None,
    }
}

/// `[re, im]` entries of matrices.
fn inline_pair(v: &Value) -> bool {
    matches!(v, Value::Array(xs) if xs.len() == 2 && xs.iter().all(|x| x.is_number()))
}
