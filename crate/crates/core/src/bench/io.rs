//! Plain-text instance files:
//!
//! ```text
//! # comment
//! # label: 08-075-1
//! n 3
//! q 3 1 0
//! Q -2.25 -3 -3
//! Q -3 0 -0.5
//! Q -3 -0.5 1
//! ```

use std::fmt::Write;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::model::BoxQpInstance;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("Q[{i}][{j}] = {a} differs from Q[{j}][{i}] = {b}")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64 },
}

fn line_err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Line {
        line,
        message: message.into(),
    }
}

fn numbers(line: usize, fields: &[&str]) -> Result<Vec<f64>, ParseError> {
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| line_err(line, format!("not a finite number: {f:?}")))
        })
        .collect()
}

pub fn parse_instance(text: &str) -> Result<BoxQpInstance, ParseError> {
    let mut n: Option<usize> = None;
    let mut q: Option<Vec<f64>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut label = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(l) = comment.trim().strip_prefix("label:") {
                label = Some(l.trim().to_string());
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match fields[0] {
            "n" => {
                if n.is_some() {
                    return Err(line_err(line, "duplicate n"));
                }
                let [v] = fields[1..] else {
                    return Err(line_err(line, "expected `n <int>`"));
                };
                let v: usize = v
                    .parse()
                    .map_err(|_| line_err(line, format!("bad dimension {v:?}")))?;
                if v == 0 {
                    return Err(line_err(line, "dimension must be positive"));
                }
                n = Some(v);
            }
            "q" | "Q" => {
                let Some(dim) = n else {
                    return Err(line_err(line, "`n` must come first"));
                };
                let vals = numbers(line, &fields[1..])?;
                if vals.len() != dim {
                    return Err(line_err(
                        line,
                        format!("expected {dim} values, found {}", vals.len()),
                    ));
                }
                if fields[0] == "q" {
                    if q.is_some() {
                        return Err(line_err(line, "duplicate q"));
                    }
                    q = Some(vals);
                } else {
                    if rows.len() == dim {
                        return Err(line_err(line, "too many Q rows"));
                    }
                    rows.push(vals);
                }
            }
            other => return Err(line_err(line, format!("unknown record {other:?}"))),
        }
    }
    let n = n.ok_or(ParseError::Missing("n"))?;
    let q = q.ok_or(ParseError::Missing("q"))?;
    if rows.len() != n {
        return Err(ParseError::Missing("Q rows"));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if rows[i][j].to_bits() != rows[j][i].to_bits() {
                return Err(ParseError::Asymmetric {
                    i: i + 1,
                    j: j + 1,
                    a: rows[i][j],
                    b: rows[j][i],
                });
            }
        }
    }
    let quad = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    BoxQpInstance::new(quad, DVector::from_vec(q), label)
        .map_err(|e| line_err(0, e.to_string()))
}

/// Canonical text form; `parse_instance` inverts it exactly.
pub fn serialize_instance(inst: &BoxQpInstance) -> String {
    let mut out = String::new();
    if let Some(l) = inst.label() {
        writeln!(out, "# label: {l}").unwrap();
    }
    writeln!(out, "n {}", inst.n()).unwrap();
    let join = |it: &mut dyn Iterator<Item = f64>| {
        it.map(|v| format!("{v}")).collect::<Vec<_>>().join(" ")
    };
    writeln!(out, "q {}", join(&mut inst.lin().iter().copied())).unwrap();
    for i in 0..inst.n() {
        writeln!(out, "Q {}", join(&mut inst.quad().row(i).iter().copied())).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{builtin_bl, generate, GenSpec};

    #[test]
    fn round_trip() {
        let bl = builtin_bl();
        let text = serialize_instance(&bl);
        assert_eq!(parse_instance(&text).unwrap(), bl);

        let inst = generate(&GenSpec::new(10, 75, 1, 1));
        let text = serialize_instance(&inst);
        assert_eq!(serialize_instance(&parse_instance(&text).unwrap()), text);
    }

    #[test]
    fn rejects_asymmetric_and_malformed() {
        let text = "n 2\nq 0 0\nQ 1 2\nQ 3 1\n";
        let err = parse_instance(text).unwrap_err();
        assert_eq!(
            err,
            ParseError::Asymmetric {
                i: 1,
                j: 2,
                a: 2.0,
                b: 3.0
            }
        );
        assert!(err.to_string().contains("Q[1][2]") && err.to_string().contains("Q[2][1]"));

        let err = parse_instance("n 2\nq 0 x\n").unwrap_err();
        assert!(matches!(err, ParseError::Line { line: 2, .. }));
        let err = parse_instance("n 2\nq 0 0\nQ 1 2 3\n").unwrap_err();
        assert!(matches!(err, ParseError::Line { line: 3, .. }));
        assert_eq!(parse_instance("n 1\nQ 1\n").unwrap_err(), ParseError::Missing("q"));
    }
}
