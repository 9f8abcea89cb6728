//! DIMACS WCNF reading and writing.

use std::fmt::Write as _;

use thiserror::Error;

use crate::engine::Lit;

use super::{SoftInstance, Weight, WeightedClause};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

/// Parse a WCNF document. A header without a top weight makes every clause
/// soft.
pub fn parse_wcnf(text: &str) -> Result<SoftInstance, ParseError> {
    let mut header: Option<(usize, usize, Option<u64>)> = None;
    let mut clauses = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(err(line, "duplicate header"));
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() < 4 || fields.len() > 5 || fields[0] != "p" || fields[1] != "wcnf" {
                return Err(err(line, "expected `p wcnf <vars> <clauses> [<top>]`"));
            }
            let vars = fields[2].parse().map_err(|_| err(line, "bad variable count"))?;
            let count = fields[3].parse().map_err(|_| err(line, "bad clause count"))?;
            let top = match fields.get(4) {
                Some(t) => match t.parse::<u64>() {
                    Ok(t) if t > 0 => Some(t),
                    _ => return Err(err(line, "bad top weight")),
                },
                None => None,
            };
            header = Some((vars, count, top));
            continue;
        }
        let Some((vars, _, top)) = header else {
            return Err(err(line, "clause before header"));
        };
        let mut tokens = trimmed.split_whitespace();
        let weight: i64 = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err(line, "bad weight"))?;
        if weight <= 0 {
            return Err(err(line, "weights must be positive"));
        }
        let weight = weight as u64;
        let weight = match top {
            Some(t) if weight == t => Weight::Hard,
            Some(t) if weight > t => return Err(err(line, format!("weight {weight} exceeds top {t}"))),
            _ => Weight::Soft(weight),
        };
        let mut lits = Vec::new();
        let mut terminated = false;
        for tok in tokens {
            if terminated {
                return Err(err(line, "literals after terminating 0"));
            }
            let v: i32 = tok.parse().map_err(|_| err(line, format!("bad literal `{tok}`")))?;
            if v == 0 {
                terminated = true;
                continue;
            }
            if v.unsigned_abs() as usize > vars {
                return Err(err(line, format!("literal {v} out of range")));
            }
            lits.push(Lit::from_dimacs(v));
        }
        if !terminated {
            return Err(err(line, "missing terminating 0"));
        }
        clauses.push(WeightedClause { lits, weight });
    }
    let Some((vars, count, top)) = header else {
        return Err(err(last_line.max(1), "missing header"));
    };
    if clauses.len() != count {
        return Err(err(
            last_line.max(1),
            format!("header declares {count} clauses, found {}", clauses.len()),
        ));
    }
    let soft_sum: u64 = clauses
        .iter()
        .filter_map(|c| match c.weight {
            Weight::Soft(w) => Some(w),
            Weight::Hard => None,
        })
        .fold(0u64, |a, w| a.saturating_add(w));
    Ok(SoftInstance {
        num_vars: vars,
        top: top.unwrap_or_else(|| soft_sum.saturating_add(1)),
        clauses,
    })
}

pub fn write_wcnf(inst: &SoftInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p wcnf {} {} {}", inst.num_vars, inst.clauses.len(), inst.top);
    for c in &inst.clauses {
        let w = match c.weight {
            Weight::Hard => inst.top,
            Weight::Soft(w) => w,
        };
        let _ = write!(out, "{w}");
        for l in &c.lits {
            let _ = write!(out, " {}", l.to_dimacs());
        }
        out.push_str(" 0\n");
    }
    out
}
