//! Plain-text graph files.
//!
//! ```text
//! N M F [L]
//! src dst weight        (M lines)
//! f_1 ... f_F           (N lines, omitted when F = 0)
//! label                 (N lines, present when L = 1)
//! ```
//!
//! Tokens are whitespace-delimited and everything after `#` on a line is
//! ignored. An edge line with only `src dst` gets weight 1.0.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{PoolError, Result};
use crate::graph::Graph;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(n, line)| {
        let line = line.split('#').next().unwrap_or("");
        let toks: Vec<&str> = line.split_whitespace().collect();
        (!toks.is_empty()).then_some((n + 1, toks))
    })
}

fn parse_tok<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| PoolError::Parse {
        line,
        msg: format!("cannot parse `{tok}`"),
    })
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(PoolError::Parse {
        line: 0,
        msg: "empty file".into(),
    })?;
    if header.len() < 3 || header.len() > 4 {
        return Err(PoolError::Parse {
            line: hline,
            msg: "header must be `N M F [L]`".into(),
        });
    }
    let n: usize = parse_tok(header[0], hline)?;
    let m: usize = parse_tok(header[1], hline)?;
    let f: usize = parse_tok(header[2], hline)?;
    let has_labels = match header.get(3) {
        Some(t) => parse_tok::<u8>(t, hline)? != 0,
        None => false,
    };

    let mut next = |what: &str| {
        lines.next().ok_or_else(|| PoolError::Parse {
            line: 0,
            msg: format!("unexpected end of file while reading {what}"),
        })
    };

    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, toks) = next("edges")?;
        if toks.len() != 2 && toks.len() != 3 {
            return Err(PoolError::Parse {
                line: ln,
                msg: "edge line must be `src dst [weight]`".into(),
            });
        }
        let w = match toks.get(2) {
            Some(t) => parse_tok(t, ln)?,
            None => 1.0,
        };
        edges.push((parse_tok(toks[0], ln)?, parse_tok(toks[1], ln)?, w));
    }

    let mut features = DMatrix::zeros(n, f);
    if f > 0 {
        for i in 0..n {
            let (ln, toks) = next("features")?;
            if toks.len() != f {
                return Err(PoolError::Parse {
                    line: ln,
                    msg: format!("expected {f} feature values, found {}", toks.len()),
                });
            }
            for (c, t) in toks.iter().enumerate() {
                features[(i, c)] = parse_tok(t, ln)?;
            }
        }
    }

    let labels = if has_labels {
        let mut l = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, toks) = next("labels")?;
            if toks.len() != 1 {
                return Err(PoolError::Parse {
                    line: ln,
                    msg: "label line must hold one integer".into(),
                });
            }
            l.push(parse_tok(toks[0], ln)?);
        }
        Some(l)
    } else {
        None
    };

    if let Some((ln, _)) = lines.next() {
        return Err(PoolError::Parse {
            line: ln,
            msg: "trailing content".into(),
        });
    }
    Graph::new(n, edges, features, labels)
}

/// Serializes a graph. Reals use Rust's shortest round-trip formatting,
/// so `parse_graph(&format_graph(g)) == g`.
pub fn format_graph(g: &Graph) -> String {
    let mut out = String::new();
    let labels = g.labels();
    let _ = write!(
        out,
        "{} {} {}",
        g.num_nodes(),
        g.num_entries(),
        g.num_features()
    );
    if labels.is_some() {
        out.push_str(" 1");
    }
    out.push('\n');
    for &(i, j, w) in g.edges() {
        let _ = writeln!(out, "{i} {j} {w:?}");
    }
    let x = g.features();
    if x.ncols() > 0 {
        for i in 0..x.nrows() {
            let row: Vec<String> = x.row(i).iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    if let Some(l) = labels {
        for v in l {
            let _ = writeln!(out, "{v}");
        }
    }
    out
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph> {
    parse_graph(&fs::read_to_string(path)?)
}

pub fn write_graph(path: impl AsRef<Path>, g: &Graph) -> Result<()> {
    fs::write(path, format_graph(g))?;
    Ok(())
}
