//! Plain-text grid format.
//!
//! ```text
//! dim n
//! x y z w        (d = 2, n rows)
//! x y w          (d = 1, n rows)
//! tri a b c      (optional, one line per oriented triangle)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.
//!
//! Numbers are written in Rust's shortest round-trip representation, so a
//! written grid parses back bit-exactly.

use std::fmt::Write as _;

use super::{QuadratureGrid, SpherePoint, TriangleMesh};
use crate::{LabError, Result};

pub fn write_grid_text(grid: &QuadratureGrid, mesh: Option<&TriangleMesh>) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", grid.dim(), grid.len()).unwrap();
    for (p, w) in grid.points().iter().zip(grid.weights()) {
        let c = p.coords();
        if grid.dim() == 1 {
            writeln!(out, "{} {} {}", c[0], c[1], w).unwrap();
        } else {
            writeln!(out, "{} {} {} {}", c[0], c[1], c[2], w).unwrap();
        }
    }
    if let Some(mesh) = mesh {
        for t in mesh.triangles() {
            writeln!(out, "tri {} {} {}", t[0], t[1], t[2]).unwrap();
        }
    }
    out
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize) -> Result<T> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| LabError::invalid(format!("grid text line {line}: malformed number")))
}

/// Parses the text format. Grid edges are rebuilt from the triangles when
/// present, otherwise (for `d = 1`) from consecutive rows.
pub fn parse_grid_text(text: &str) -> Result<(QuadratureGrid, Option<TriangleMesh>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('#')
    });
    let (_, header) = lines.next().ok_or_else(|| LabError::invalid("empty grid text"))?;
    let mut h = header.split_whitespace();
    let dim: usize = num(h.next(), 1)?;
    let n: usize = num(h.next(), 1)?;
    if dim != 1 && dim != 2 {
        return Err(LabError::invalid(format!("grid dimension {dim}")));
    }
    let mut points = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut triangles = Vec::new();
    for (idx, line) in lines {
        let mut tok = line.split_whitespace();
        if line.starts_with("tri") {
            tok.next();
            triangles.push([num(tok.next(), idx + 1)?, num(tok.next(), idx + 1)?, num(tok.next(), idx + 1)?]);
            continue;
        }
        let x: f64 = num(tok.next(), idx + 1)?;
        let y: f64 = num(tok.next(), idx + 1)?;
        let z: f64 = if dim == 2 { num(tok.next(), idx + 1)? } else { 0.0 };
        let w: f64 = num(tok.next(), idx + 1)?;
        points.push(SpherePoint([x, y, z]));
        weights.push(w);
    }
    if points.len() != n {
        return Err(LabError::invalid(format!("header announces {n} points, found {}", points.len())));
    }
    let mesh = if triangles.is_empty() {
        None
    } else {
        Some(TriangleMesh::new(points.clone(), triangles)?)
    };
    let edges = match (&mesh, dim) {
        (Some(m), _) => m.edges(),
        (None, 1) => (0..n as u32).map(|i| [i, (i + 1) % n as u32]).collect(),
        _ => Vec::new(),
    };
    let grid = QuadratureGrid::from_parts(dim, points, weights, edges)?;
    Ok((grid, mesh))
}
