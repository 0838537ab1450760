//! Plain-text interchange format for [`ConicProblem`].
//!
//! ```text
//! CONIC 1
//! VARS <n>
//! OBJ <i>:<v> <i>:<v> ...          sparse objective (omitted entries are 0)
//! BOUND <i> <lower> <upper>        "inf" / "-inf" for open sides
//! EQ <rhs> ; <i>:<v> ...           row . x = rhs
//! SOC <rows> <d> ; <i>:<v> ...     ||A x + b|| <= c . x + d, c given here
//! ROW <b> ; <i>:<v> ...            one row of A with its offset; exactly
//!                                  <rows> of these follow each SOC line
//! END
//! ```
//!
//! Indices are 0-based. Numbers are written with the shortest decimal form
//! that parses back to the same `f64`, so a dump/parse round trip is exact.
//! Blank lines and lines starting with `#` are ignored.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use thiserror::Error;

use super::{ConicProblem, SocConstraint, SparseVec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn write_row(out: &mut String, row: &SparseVec) {
    for (i, v) in row.iter() {
        let _ = write!(out, " {i}:{v}");
    }
}

/// Serializes `problem`.
pub fn write_problem(problem: &ConicProblem, out: &mut String) {
    let _ = writeln!(out, "CONIC 1");
    let _ = writeln!(out, "VARS {}", problem.n_vars);
    let _ = write!(out, "OBJ");
    for (i, &v) in problem.objective.iter().enumerate() {
        if v != 0.0 {
            let _ = write!(out, " {i}:{v}");
        }
    }
    let _ = writeln!(out);
    for i in 0..problem.n_vars {
        let (lo, hi) = (problem.lower[i], problem.upper[i]);
        if lo.is_finite() || hi.is_finite() {
            let _ = writeln!(out, "BOUND {i} {lo} {hi}");
        }
    }
    for eq in &problem.eq {
        let _ = write!(out, "EQ {} ;", eq.rhs);
        write_row(out, &eq.row);
        let _ = writeln!(out);
    }
    for soc in &problem.soc {
        let _ = write!(out, "SOC {} {} ;", soc.a.len(), soc.d);
        write_row(out, &soc.c);
        let _ = writeln!(out);
        for (row, b) in soc.a.iter().zip(&soc.b) {
            let _ = write!(out, "ROW {b} ;");
            write_row(out, row);
            let _ = writeln!(out);
        }
    }
    let _ = writeln!(out, "END");
}

pub fn to_string(problem: &ConicProblem) -> String {
    let mut s = String::new();
    write_problem(problem, &mut s);
    s
}

struct Lines<'a> {
    inner: core::iter::Enumerate<core::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            let l = l.trim();
            if !l.is_empty() && !l.starts_with('#') {
                return Some((i + 1, l));
            }
        }
        None
    }
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

fn num<T: core::str::FromStr>(line: usize, tok: Option<&str>, what: &str) -> Result<T, ParseError> {
    let tok = tok.ok_or_else(|| err(line, alloc::format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| err(line, alloc::format!("bad {what} '{tok}'")))
}

fn parse_entries<'a>(line: usize, toks: impl Iterator<Item = &'a str>) -> Result<SparseVec, ParseError> {
    let mut row = SparseVec::new();
    for t in toks {
        let (i, v) = t
            .split_once(':')
            .ok_or_else(|| err(line, alloc::format!("expected index:value, got '{t}'")))?;
        row.push(num(line, Some(i), "index")?, num(line, Some(v), "value")?);
    }
    Ok(row)
}

/// Splits `"KEY a b ; entries"` into head tokens and entry tokens.
fn split_semicolon(rest: &str) -> (&str, &str) {
    rest.split_once(';').unwrap_or((rest, ""))
}

pub fn parse_problem(text: &str) -> Result<ConicProblem, ParseError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (ln, header) = lines.next().ok_or_else(|| err(0, "empty input"))?;
    if header.split_whitespace().collect::<Vec<_>>() != ["CONIC", "1"] {
        return Err(err(ln, "expected 'CONIC 1'"));
    }
    let (ln, vars) = lines.next().ok_or_else(|| err(ln, "missing VARS"))?;
    let mut toks = vars.split_whitespace();
    if toks.next() != Some("VARS") {
        return Err(err(ln, "expected VARS"));
    }
    let n: usize = num(ln, toks.next(), "variable count")?;
    let mut problem = ConicProblem::new(n);
    let mut pending: Option<(usize, SocConstraint, usize)> = None;

    loop {
        let (ln, line) = lines.next().ok_or_else(|| err(0, "missing END"))?;
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        if key != "ROW" {
            if let Some((want, soc, at)) = pending.take() {
                if soc.a.len() != want {
                    return Err(err(at, alloc::format!("SOC declares {want} rows, found {}", soc.a.len())));
                }
                problem.add_soc(soc);
            }
        }
        match key {
            "END" => break,
            "OBJ" => {
                for (i, v) in parse_entries(ln, rest.split_whitespace())?.iter() {
                    if i >= n {
                        return Err(err(ln, "objective index out of range"));
                    }
                    problem.objective[i] = v;
                }
            }
            "BOUND" => {
                let mut t = rest.split_whitespace();
                let i: usize = num(ln, t.next(), "index")?;
                if i >= n {
                    return Err(err(ln, "bound index out of range"));
                }
                problem.lower[i] = num(ln, t.next(), "lower bound")?;
                problem.upper[i] = num(ln, t.next(), "upper bound")?;
            }
            "EQ" => {
                let (head, entries) = split_semicolon(rest);
                let rhs = num(ln, head.split_whitespace().next(), "right-hand side")?;
                problem.add_eq(parse_entries(ln, entries.split_whitespace())?, rhs);
            }
            "SOC" => {
                let (head, entries) = split_semicolon(rest);
                let mut t = head.split_whitespace();
                let rows: usize = num(ln, t.next(), "row count")?;
                let d: f64 = num(ln, t.next(), "offset")?;
                let c = parse_entries(ln, entries.split_whitespace())?;
                pending = Some((rows, SocConstraint::new(Vec::new(), Vec::new(), c, d), ln));
            }
            "ROW" => {
                let (head, entries) = split_semicolon(rest);
                let b: f64 = num(ln, head.split_whitespace().next(), "offset")?;
                let row = parse_entries(ln, entries.split_whitespace())?;
                match pending.as_mut() {
                    Some((_, soc, _)) => {
                        soc.a.push(row);
                        soc.b.push(b);
                    }
                    None => return Err(err(ln, "ROW outside an SOC")),
                }
            }
            other => return Err(err(ln, alloc::format!("unknown record '{other}'"))),
        }
    }
    problem.validate().map_err(|e| err(0, alloc::format!("{e}")))?;
    Ok(problem)
}
