//! Plain-text model files:
//!
//! ```text
//! s2ml-model v1
//! kind=logistic lambda=0.01 bias=0 dim=3
//! 0.5
//! -1
//! 0.25
//! ```

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::numfmt::g17;
use crate::problems::{ProblemConfig, ProblemKind};

pub const MODEL_MAGIC: &str = "s2ml-model v1";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("model line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("truncated model: expected {expected} lines, found {found}")]
    Truncated { expected: usize, found: usize },
}

fn bad(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Format {
        line,
        message: message.into(),
    }
}

pub fn format_model(w: &[f64], config: &ProblemConfig) -> String {
    let mut out = format!(
        "{MODEL_MAGIC}\nkind={} lambda={} bias={} dim={}\n",
        config.kind,
        g17(config.lambda),
        u8::from(config.add_bias),
        w.len()
    );
    for x in w {
        out.push_str(&g17(*x));
        out.push('\n');
    }
    out
}

pub fn parse_model(text: &str) -> Result<(Vec<f64>, ProblemConfig), ModelError> {
    let lines: Vec<&str> = text.split_terminator('\n').collect();
    match lines.first() {
        None => {
            return Err(ModelError::Truncated {
                expected: 2,
                found: 0,
            })
        }
        Some(&l) if l != MODEL_MAGIC => {
            return Err(bad(1, format!("expected {MODEL_MAGIC:?}, found {l:?}")))
        }
        _ => {}
    }
    let header = *lines.get(1).ok_or(ModelError::Truncated {
        expected: 2,
        found: 1,
    })?;
    let fields: Vec<&str> = header.split(' ').collect();
    let keys = ["kind", "lambda", "bias", "dim"];
    if fields.len() != keys.len() {
        return Err(bad(
            2,
            format!("expected {}", keys.map(|k| format!("{k}=…")).join(" ")),
        ));
    }
    let mut values = [""; 4];
    for (i, (field, key)) in fields.iter().zip(keys).enumerate() {
        values[i] = field
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| bad(2, format!("expected {key}=…, found {field:?}")))?;
    }
    let kind: ProblemKind = values[0].parse().map_err(|e| bad(2, format!("{e}")))?;
    let lambda: f64 = values[1]
        .parse()
        .map_err(|_| bad(2, format!("bad lambda {:?}", values[1])))?;
    let add_bias = match values[2] {
        "0" => false,
        "1" => true,
        other => return Err(bad(2, format!("bias must be 0 or 1, found {other:?}"))),
    };
    let dim: usize = values[3]
        .parse()
        .map_err(|_| bad(2, format!("bad dim {:?}", values[3])))?;
    let config = ProblemConfig {
        kind,
        lambda,
        add_bias,
    };
    config.validate().map_err(|e| bad(2, e.to_string()))?;

    let expected = dim + 2;
    if lines.len() < expected {
        return Err(ModelError::Truncated {
            expected,
            found: lines.len(),
        });
    }
    if lines.len() > expected {
        return Err(bad(
            expected + 1,
            format!("trailing content after {dim} coefficients"),
        ));
    }
    let w = lines[2..]
        .iter()
        .enumerate()
        .map(|(k, s)| match s.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(bad(k + 3, format!("bad coefficient {s:?}"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((w, config))
}

pub fn write_model(path: &Path, w: &[f64], config: &ProblemConfig) -> Result<(), ModelError> {
    std::fs::write(path, format_model(w, config)).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_model(path: &Path) -> Result<(Vec<f64>, ProblemConfig), ModelError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_model(&text)
}
