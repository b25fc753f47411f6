//! `ncmesh v1` text format:
//!
//! ```text
//! ncmesh v1
//! <nv> <nt>
//! <x1> <x2>        (nv lines)
//! <i> <j> <k>      (nt lines, 0-based, counter-clockwise)
//! ```

use std::io::{BufRead, Write};

use super::{is_degenerate, signed_area, Mesh, Point2};
use crate::error::{Error, Result};

const HEADER: &str = "ncmesh v1";

/// 17 significant digits, scientific notation.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn read_mesh<R: BufRead>(reader: R) -> Result<Mesh> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((n, Ok(l))) => Ok((n, l)),
            Some((_, Err(e))) => Err(e.into()),
            None => Err(parse_err(0, format!("unexpected end of file, expected {what}"))),
        }
    };

    let (n, header) = next("header")?;
    if header.trim_end() != HEADER {
        return Err(parse_err(n, format!("expected header `{HEADER}`, found `{header}`")));
    }

    let (n, counts) = next("counts line")?;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(n, format!("bad count `{t}`"))))
        .collect::<Result<_>>()?;
    let [nv, nt] = counts[..] else {
        return Err(parse_err(n, "expected `<nv> <nt>`"));
    };

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, l) = next("vertex line")?;
        let xs: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(n, format!("bad coordinate `{t}`"))))
            .collect::<Result<_>>()?;
        let [x1, x2] = xs[..] else {
            return Err(parse_err(n, "expected `<x1> <x2>`"));
        };
        if !(x1.is_finite() && x2.is_finite()) {
            return Err(parse_err(n, "non-finite coordinate"));
        }
        vertices.push(Point2::new(x1, x2));
    }

    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (n, l) = next("triangle line")?;
        let idx: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(n, format!("bad vertex index `{t}`"))))
            .collect::<Result<_>>()?;
        let [i, j, k] = idx[..] else {
            return Err(parse_err(n, "expected `<i> <j> <k>`"));
        };
        if let Some(&bad) = [i, j, k].iter().find(|&&v| v >= nv) {
            return Err(parse_err(n, format!("vertex index {bad} out of range (nv = {nv})")));
        }
        let p = [vertices[i], vertices[j], vertices[k]];
        if is_degenerate(&p) {
            return Err(parse_err(n, "degenerate triangle"));
        }
        if signed_area(p[0], p[1], p[2]) < 0.0 {
            return Err(parse_err(n, "triangle is clockwise"));
        }
        triangles.push([i, j, k]);
    }

    for (n, l) in lines {
        if !l?.trim().is_empty() {
            return Err(parse_err(n, "trailing content after triangle list"));
        }
    }
    Mesh::new(vertices, triangles)
}

pub fn write_mesh<W: Write>(mesh: &Mesh, mut w: W) -> Result<()> {
    writeln!(w, "{HEADER}")?;
    writeln!(w, "{} {}", mesh.num_vertices(), mesh.num_triangles())?;
    for p in mesh.vertices() {
        writeln!(w, "{} {}", fmt17(p.x1), fmt17(p.x2))?;
    }
    for t in mesh.triangles() {
        writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}
