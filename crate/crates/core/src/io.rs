//! Text formats for graphs, subsets and matrices.
//!
//! Graph files: the first non-comment line is the vertex count, every
//! following non-empty line is an edge `u v` with 0-based indices. Lines
//! starting with `#` are comments and repeated edges are merged.
//!
//! Subset files: one line of space-separated vertex indices.
//!
//! Matrix files: one whitespace-separated row of integers per line.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hafnian::SymmetricMatrix;
use crate::subset::VertexSubset;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_index(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| Error::parse(line, format!("expected a vertex index, found {tok:?}")))
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = content_lines(text);
    let (line, header) = lines.next().ok_or_else(|| Error::parse(1, "missing vertex count"))?;
    let n: usize = header
        .parse()
        .map_err(|_| Error::parse(line, format!("expected a vertex count, found {header:?}")))?;
    let mut g = Graph::empty(n).map_err(|e| Error::parse(line, e.to_string()))?;
    for (line, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.len() {
            2 => {}
            3 => return Err(Error::parse(line, "weighted edges are not supported")),
            _ => return Err(Error::parse(line, format!("expected \"u v\", found {l:?}"))),
        }
        let u = parse_index(toks[0], line)?;
        let v = parse_index(toks[1], line)?;
        if u >= n || v >= n {
            return Err(Error::parse(
                line,
                format!("edge ({u}, {v}) out of range for {n} vertices"),
            ));
        }
        if u == v {
            return Err(Error::validation(format!("self-loop at vertex {u} (line {line})")));
        }
        g.insert_edge(u, v);
    }
    Ok(g)
}

/// Reads a file, naming it in any error.
fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| with_path(e, path))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| with_path(e, path))
}

fn with_path(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

pub fn format_graph(g: &Graph) -> String {
    let mut out = format!("{}\n", g.n());
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph> {
    parse_graph(&read_text(path.as_ref())?)
}

pub fn write_graph(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &format_graph(g))
}

pub fn parse_subset(text: &str) -> Result<VertexSubset> {
    let (line, l) = content_lines(text).next().unwrap_or((1, ""));
    let idx = l
        .split_whitespace()
        .map(|t| parse_index(t, line))
        .collect::<Result<Vec<_>>>()?;
    VertexSubset::from_unsorted(idx)
}

pub fn read_subset(path: impl AsRef<Path>) -> Result<VertexSubset> {
    parse_subset(&read_text(path.as_ref())?)
}

pub fn write_subset(s: &VertexSubset, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &format!("{s}\n"))
}

pub fn parse_matrix(text: &str) -> Result<SymmetricMatrix> {
    let mut rows = Vec::new();
    for (line, l) in content_lines(text) {
        let row = l
            .split_whitespace()
            .map(|t| {
                t.parse::<i64>()
                    .map_err(|_| Error::parse(line, format!("expected an integer, found {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(1, "empty matrix"));
    }
    SymmetricMatrix::new(&rows)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<SymmetricMatrix> {
    parse_matrix(&read_text(path.as_ref())?)
}
