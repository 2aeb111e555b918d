//! Line-oriented text format for manifolds and fields.
//!
//! ```text
//! dim 2 | vertices 3 | edges 2
//! v 0.5 0
//! v 0.25 1
//! v 0.25 0
//! e 0 1 1.5
//! e 1 2 0.75
//! ```
//!
//! Floats are written in shortest round-trip form, so reading a written mesh
//! reproduces it bit for bit. Blank lines and lines starting with `#` are
//! ignored. Product structure and embeddings are not stored.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::{DiscreteManifold, Edge, ScalarField};
use crate::error::{Error, Result};

pub fn write_mesh<W: Write>(m: &DiscreteManifold, mut out: W) -> Result<()> {
    out.write_all(mesh_to_string(m).as_bytes())?;
    Ok(())
}

pub fn mesh_to_string(m: &DiscreteManifold) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "dim {} | vertices {} | edges {}",
        m.dim(),
        m.vertex_count(),
        m.edges().len()
    );
    for (mu, b) in m.measures().iter().zip(m.boundary()) {
        let _ = writeln!(s, "v {} {}", mu, u8::from(*b));
    }
    for e in m.edges() {
        let _ = writeln!(s, "e {} {} {}", e.i, e.j, e.weight);
    }
    s
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from {tok:?}")))
}

fn parse_header(text: &str, line: usize) -> Result<(usize, usize, usize)> {
    let mut vals = [None; 3];
    for part in text.split('|') {
        let mut it = part.split_whitespace();
        let key = it.next().unwrap_or("");
        let slot = match key {
            "dim" => 0,
            "vertices" => 1,
            "edges" => 2,
            _ => return Err(parse_err(line, format!("unknown header field {key:?}"))),
        };
        vals[slot] = Some(parse_num::<usize>(it.next(), line, key)?);
        if it.next().is_some() {
            return Err(parse_err(line, "trailing tokens in header"));
        }
    }
    match vals {
        [Some(d), Some(n), Some(e)] => Ok((d, n, e)),
        _ => Err(parse_err(line, "header must give dim, vertices and edges")),
    }
}

pub fn read_mesh<R: BufRead>(input: R) -> Result<DiscreteManifold> {
    let mut header = None;
    let mut measures = Vec::new();
    let mut boundary = Vec::new();
    let mut edges = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let Some((_, n, e)) = header else {
            header = Some(parse_header(text, lineno)?);
            measures.reserve(header.unwrap().1);
            continue;
        };
        let mut it = text.split_whitespace();
        match it.next() {
            Some("v") => {
                if measures.len() == n {
                    return Err(parse_err(lineno, format!("more than {n} vertex lines")));
                }
                measures.push(parse_num::<f64>(it.next(), lineno, "measure")?);
                boundary.push(match it.next() {
                    Some("0") => false,
                    Some("1") => true,
                    other => {
                        return Err(parse_err(
                            lineno,
                            format!("boundary flag must be 0 or 1, got {other:?}"),
                        ))
                    }
                });
            }
            Some("e") => {
                if edges.len() == e {
                    return Err(parse_err(lineno, format!("more than {e} edge lines")));
                }
                let i = parse_num(it.next(), lineno, "edge start")?;
                let j = parse_num(it.next(), lineno, "edge end")?;
                let weight = parse_num(it.next(), lineno, "edge weight")?;
                edges.push(Edge { i, j, weight });
            }
            other => return Err(parse_err(lineno, format!("unexpected record {other:?}"))),
        }
        if it.next().is_some() {
            return Err(parse_err(lineno, "trailing tokens"));
        }
    }
    let Some((dim, n, e)) = header else {
        return Err(parse_err(0, "empty mesh file"));
    };
    if measures.len() != n || edges.len() != e {
        return Err(parse_err(
            0,
            format!(
                "header announces {n} vertices and {e} edges, found {} and {}",
                measures.len(),
                edges.len()
            ),
        ));
    }
    DiscreteManifold::new(dim, measures, edges, boundary)
}

pub fn read_mesh_str(text: &str) -> Result<DiscreteManifold> {
    read_mesh(text.as_bytes())
}

/// One value per line, vertex order.
pub fn field_to_string(field: &ScalarField) -> String {
    let mut s = String::new();
    for v in field.values() {
        let _ = writeln!(s, "{v}");
    }
    s
}

pub fn read_field<R: BufRead>(input: R) -> Result<ScalarField> {
    let mut values = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        values.push(parse_num::<f64>(Some(text), idx + 1, "field value")?);
    }
    ScalarField::new(values)
}
