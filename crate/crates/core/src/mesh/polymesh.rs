//! Plain-text `polymesh v1` format.
//!
//! ```text
//! polymesh v1
//! vertices N
//! x y            (N lines)
//! cells M
//! k i1 ... ik    (M lines, 0-based, counter-clockwise)
//! centers M      (optional block)
//! x y            (M lines)
//! ```
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use crate::geometry::Vec2;

use super::{Mesh, MeshError};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            let t = line.trim();
            self.last = i + 1;
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Some((i + 1, t));
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), MeshError> {
        self.next().ok_or_else(|| MeshError::Parse {
            line: self.last + 1,
            message: format!("unexpected end of input, expected {what}"),
        })
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse { line, message: message.into() }
}

fn header_count(line: usize, text: &str, keyword: &str) -> Result<usize, MeshError> {
    let mut parts = text.split_whitespace();
    if parts.next() != Some(keyword) {
        return Err(parse_err(line, format!("expected `{keyword} <count>`, found `{text}`")));
    }
    let count = parts
        .next()
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| parse_err(line, format!("missing or invalid {keyword} count")))?;
    if parts.next().is_some() {
        return Err(parse_err(line, "trailing tokens after count"));
    }
    Ok(count)
}

fn parse_point(line: usize, text: &str) -> Result<Vec2, MeshError> {
    let nums: Vec<f64> = text
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| parse_err(line, format!("invalid number `{t}`"))))
        .collect::<Result<_, _>>()?;
    match nums.as_slice() {
        [x, y] if x.is_finite() && y.is_finite() => Ok(Vec2::new(*x, *y)),
        [_, _] => Err(parse_err(line, "coordinates must be finite")),
        _ => Err(parse_err(line, format!("expected 2 coordinates, found {}", nums.len()))),
    }
}

pub fn read_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let (ln, head) = lines.expect("header")?;
    if head != "polymesh v1" {
        return Err(parse_err(ln, format!("expected header `polymesh v1`, found `{head}`")));
    }

    let (ln, t) = lines.expect("vertices block")?;
    let nv = header_count(ln, t, "vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    let mut vertex_lines = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, t) = lines.expect("vertex coordinates")?;
        vertices.push(parse_point(ln, t)?);
        vertex_lines.push(ln);
    }

    let (ln, t) = lines.expect("cells block")?;
    let nc = header_count(ln, t, "cells")?;
    let mut rings = Vec::with_capacity(nc);
    let mut cell_lines = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, t) = lines.expect("cell definition")?;
        let ids: Vec<usize> = t
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| parse_err(ln, format!("invalid index `{s}`"))))
            .collect::<Result<_, _>>()?;
        let (&k, ring) = ids.split_first().ok_or_else(|| parse_err(ln, "empty cell line"))?;
        if ring.len() != k {
            return Err(parse_err(ln, format!("cell declares {k} vertices but lists {}", ring.len())));
        }
        if k < 3 {
            return Err(parse_err(ln, "cell needs ≥3 vertices"));
        }
        if let Some(&bad) = ring.iter().find(|&&i| i >= nv) {
            return Err(parse_err(ln, format!("vertex index {bad} out of range (0..{nv})")));
        }
        rings.push(ring.to_vec());
        cell_lines.push(ln);
    }

    let mut centers = None;
    if let Some((ln, t)) = lines.next() {
        let count = header_count(ln, t, "centers")?;
        if count != nc {
            return Err(parse_err(ln, format!("{count} centers for {nc} cells")));
        }
        let mut c = Vec::with_capacity(nc);
        for _ in 0..nc {
            let (ln, t) = lines.expect("center coordinates")?;
            c.push(parse_point(ln, t)?);
        }
        centers = Some(c);
        if let Some((ln, t)) = lines.next() {
            return Err(parse_err(ln, format!("unexpected content `{t}`")));
        }
    }

    Mesh::from_polygons(vertices, rings, centers).map_err(|e| match e {
        MeshError::InvalidCell { cell, message } => MeshError::Parse { line: cell_lines[cell], message },
        MeshError::DanglingVertex(v) => {
            MeshError::Parse { line: vertex_lines[v], message: format!("vertex {v} is not used by any cell") }
        }
        other => other,
    })
}

/// Serializes a mesh, including explicit centers.
pub fn write_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "polymesh v1");
    let _ = writeln!(s, "vertices {}", mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{:e} {:e}", v.x, v.y);
    }
    let _ = writeln!(s, "cells {}", mesh.cells.len());
    for c in &mesh.cells {
        let _ = write!(s, "{}", c.vertices.len());
        for v in &c.vertices {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "centers {}", mesh.cells.len());
    for c in &mesh.cells {
        let _ = writeln!(s, "{:e} {:e}", c.center.x, c.center.y);
    }
    s
}
