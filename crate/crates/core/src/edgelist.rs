//! Plain-text edge-list format for sensing matrices.
//!
//! ```text
//! M n nu s
//! 0: v1 v2 ... vs
//! 1: ...
//! ```
//!
//! One line per factor, 0-based indices, LF line endings.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::sparse::{LdpcParams, SparseBinaryMatrix};

pub fn to_edge_list(a: &SparseBinaryMatrix) -> String {
    let p = a.params();
    let mut out = String::with_capacity(p.num_edges() * 6 + 32);
    let _ = writeln!(
        out,
        "{} {} {} {}",
        p.num_vars, p.num_factors, p.var_degree, p.factor_degree
    );
    for f in 0..p.num_factors {
        let _ = write!(out, "{f}:");
        for v in a.factor_neighbors(f) {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

pub fn write_edge_list<W: Write>(a: &SparseBinaryMatrix, mut w: W) -> Result<()> {
    w.write_all(to_edge_list(a).as_bytes())?;
    Ok(())
}

pub fn parse_edge_list(text: &str) -> Result<SparseBinaryMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing header line"))?;
    let fields: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::parse(hline, format!("malformed header: {e}")))?;
    let [m, n, nu, s] = fields[..] else {
        return Err(Error::parse(hline, "header must be `M n nu s`"));
    };
    let params = LdpcParams::with_degrees(m, n, nu, s)
        .map_err(|e| Error::parse(hline, e.to_string()))?;

    let mut lists: Vec<Option<Vec<usize>>> = vec![None; n];
    let mut last_line = hline;
    for (lineno, line) in lines {
        last_line = lineno;
        let (idx, rest) = line
            .split_once(':')
            .ok_or_else(|| Error::parse(lineno, "expected `f: v1 ... vs`"))?;
        let f: usize = idx
            .trim()
            .parse()
            .map_err(|e| Error::parse(lineno, format!("bad factor index: {e}")))?;
        if f >= n {
            return Err(Error::parse(lineno, format!("factor index {f} out of range")));
        }
        if lists[f].is_some() {
            return Err(Error::parse(lineno, format!("factor {f} listed twice")));
        }
        let vars: Vec<usize> = rest
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(lineno, format!("bad variable index: {e}")))?;
        if vars.len() != s {
            return Err(Error::parse(
                lineno,
                format!("factor {f} has degree {}, expected {s}", vars.len()),
            ));
        }
        if let Some(&v) = vars.iter().find(|&&v| v >= m) {
            return Err(Error::parse(lineno, format!("variable index {v} out of range")));
        }
        lists[f] = Some(vars);
    }
    let lists: Vec<Vec<usize>> = lists
        .into_iter()
        .enumerate()
        .map(|(f, l)| l.ok_or_else(|| Error::parse(last_line, format!("factor {f} missing"))))
        .collect::<Result<_>>()?;
    SparseBinaryMatrix::from_factor_lists(params, &lists)
        .map_err(|e| Error::parse(last_line, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let a = SparseBinaryMatrix::sample_gallager(LdpcParams::new(8, 4, 2).unwrap(), 0).unwrap();
        let text = to_edge_list(&a);
        assert!(text.starts_with("8 4 2 4\n0: "));
        assert_eq!(text.lines().count(), 5);
        let b = parse_edge_list(&text).unwrap();
        assert_eq!(a, b);
        let mut buf = Vec::new();
        write_edge_list(&a, &mut buf).unwrap();
        assert_eq!(buf, text.as_bytes());
    }

    #[test]
    fn rejects_malformed_input() {
        // empty edge section
        assert!(matches!(parse_edge_list("8 4 2 4\n"), Err(Error::Parse { .. })));
        // nu*M != s*n
        assert!(matches!(parse_edge_list("8 4 2 3\n"), Err(Error::Parse { line: 1, .. })));
        assert!(parse_edge_list("").is_err());
        assert!(parse_edge_list("8 4 x 4\n").is_err());
        assert!(parse_edge_list("8 4 2\n").is_err());
        // degree violations and index range
        let ok = "4 2 1 2\n0: 0 1\n1: 2 3\n";
        assert!(parse_edge_list(ok).is_ok());
        assert!(parse_edge_list("4 2 1 2\n0: 0 1\n1: 2\n").is_err());
        assert!(parse_edge_list("4 2 1 2\n0: 0 1\n1: 2 4\n").is_err());
        assert!(parse_edge_list("4 2 1 2\n0: 0 1\n1: 1 3\n").is_err());
        assert!(parse_edge_list("4 2 1 2\n0: 0 1\n0: 2 3\n").is_err());
        assert!(parse_edge_list("4 2 1 2\n0: 0 1\n2: 2 3\n").is_err());
        assert!(parse_edge_list("4 2 1 2\n0 0 1\n1: 2 3\n").is_err());
    }
}
