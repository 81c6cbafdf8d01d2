//! Plain-text instance files.
//!
//! ```text
//! # optional comments
//! m n
//! a11 ... a1n
//! ...
//! am1 ... amn
//! c1 ... cn        (integers or p/q)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use ipdensity::exact_linalg::{IntMatrix, RationalVector};

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unexpected end of file: {0}")]
    Truncated(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Raw contents of an instance file; validity is checked separately.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceFile {
    pub a: IntMatrix,
    pub c: RationalVector,
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_rational(tok: &str, line: usize) -> Result<BigRational, ParseError> {
    let bad = || syntax(line, format!("expected an integer or p/q, found {tok:?}"));
    match tok.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.parse().map_err(|_| bad())?;
            let q: BigInt = q.parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(syntax(line, format!("zero denominator in {tok:?}")));
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(tok.parse().map_err(|_| bad())?)),
    }
}

pub fn parse(text: &str) -> Result<InstanceFile, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hl, header) = lines.next().ok_or_else(|| ParseError::Truncated("missing header".into()))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let (m, n) = match dims.as_slice() {
        [m, n] => match (m.parse::<usize>(), n.parse::<usize>()) {
            (Ok(m), Ok(n)) if m > 0 && n > 0 => (m, n),
            _ => return Err(syntax(hl, "header must be two positive integers \"m n\"")),
        },
        _ => return Err(syntax(hl, "header must be two positive integers \"m n\"")),
    };

    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| ParseError::Truncated(format!("expected {m} matrix rows, found {i}")))?;
        let row: Vec<BigInt> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| syntax(ln, format!("expected an integer, found {t:?}"))))
            .collect::<Result<_, _>>()?;
        if row.len() != n {
            return Err(syntax(ln, format!("expected {n} entries, found {}", row.len())));
        }
        rows.push(row);
    }
    let (cl, l) = lines
        .next()
        .ok_or_else(|| ParseError::Truncated("missing objective row".into()))?;
    let c: Vec<BigRational> = l
        .split_whitespace()
        .map(|t| parse_rational(t, cl))
        .collect::<Result<_, _>>()?;
    if c.len() != n {
        return Err(syntax(cl, format!("expected {n} objective entries, found {}", c.len())));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(syntax(ln, "unexpected content after the objective row"));
    }
    let a = IntMatrix::from_rows(&rows).map_err(|e| syntax(hl, e.to_string()))?;
    Ok(InstanceFile {
        a,
        c: RationalVector(c),
    })
}

pub fn read(path: &Path) -> Result<InstanceFile, ParseError> {
    let text = std::fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

/// `p/q`, or just `p` when the denominator is one.
pub fn format_rational(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Canonical text; `parse(&write(f)) == f` and canonical files reproduce
/// byte for byte.
pub fn write(f: &InstanceFile) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", f.a.rows(), f.a.cols());
    for i in 0..f.a.rows() {
        let row: Vec<String> = f.a.row(i).iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    let c: Vec<String> = f.c.iter().map(format_rational).collect();
    let _ = writeln!(s, "{}", c.join(" "));
    s
}
