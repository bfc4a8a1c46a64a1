//! OFF meshes and two-column CSV polylines.
//!
//! Polyline CSV: header `x,y`, one row per vertex. Several chains are separated
//! by a blank line; a chain whose last row repeats its first is closed.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::{build_polylines, build_trimesh, Hypersurface, Point};
use crate::error::{Error, Result};
use crate::params::Dim;

pub fn read_off(r: impl BufRead) -> Result<Hypersurface> {
    // tokens with their line numbers, comments stripped
    let mut toks: Vec<(usize, String)> = Vec::new();
    for (ln, line) in r.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("");
        toks.extend(body.split_whitespace().map(|t| (ln + 1, t.to_string())));
    }
    let mut it = toks.into_iter();
    let mut next = |what: &str| it.next().ok_or(Error::Parse { line: 0, msg: format!("unexpected end, expected {what}") });
    let (ln, head) = next("OFF header")?;
    if head != "OFF" {
        return Err(Error::Parse { line: ln, msg: format!("expected OFF, got {head}") });
    }
    let mut num = |what: &str| -> Result<(usize, f64)> {
        let (ln, t) = next(what)?;
        t.parse::<f64>().map(|v| (ln, v)).map_err(|_| Error::Parse { line: ln, msg: format!("bad {what}: {t}") })
    };
    let nv = num("vertex count")?.1 as usize;
    let nf = num("face count")?.1 as usize;
    let _ne = num("edge count")?;
    let mut verts = Vec::with_capacity(nv);
    for _ in 0..nv {
        let x = num("x")?.1;
        let y = num("y")?.1;
        let z = num("z")?.1;
        verts.push(Point::new(x, y, z));
    }
    let mut tris = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, k) = num("face size")?;
        let k = k as usize;
        if k < 3 {
            return Err(Error::Parse { line: ln, msg: format!("face with {k} vertices") });
        }
        let idx: Vec<usize> = (0..k).map(|_| num("index").map(|v| v.1 as usize)).collect::<Result<_>>()?;
        // fan-triangulate polygons
        for j in 1..k - 1 {
            tris.push([idx[0], idx[j], idx[j + 1]]);
        }
    }
    build_trimesh(&verts, &tris)
}

pub fn write_off(m: &Hypersurface, mut w: impl Write) -> Result<()> {
    if m.dim() != Dim::Three {
        return Err(Error::InvalidMesh("OFF output is for triangle meshes".into()));
    }
    let mut s = String::new();
    let _ = writeln!(s, "OFF\n{} {} 0", m.vertices().len(), m.n_facets());
    for v in m.vertices() {
        let _ = writeln!(s, "{:e} {:e} {:e}", v.x, v.y, v.z);
    }
    for f in 0..m.n_facets() {
        let t = m.facet(f);
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}

pub fn read_polyline_csv(r: impl BufRead) -> Result<Hypersurface> {
    let mut chains: Vec<Vec<Point>> = vec![Vec::new()];
    for (ln, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.starts_with('#') {
            continue;
        }
        if t.is_empty() {
            if !chains.last().unwrap().is_empty() {
                chains.push(Vec::new());
            }
            continue;
        }
        let cols: Vec<&str> = t.split(',').map(str::trim).collect();
        if cols.len() != 2 {
            return Err(Error::Parse { line: ln + 1, msg: format!("expected 2 columns, got {}", cols.len()) });
        }
        match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => chains.last_mut().unwrap().push(Point::new(x, y, 0.0)),
            _ if ln == 0 => continue, // header
            _ => return Err(Error::Parse { line: ln + 1, msg: format!("bad row: {t}") }),
        }
    }
    let chains: Vec<(Vec<Point>, bool)> = chains
        .into_iter()
        .filter(|c| !c.is_empty())
        .map(|mut c| {
            let closed = c.len() > 3 && c.first() == c.last();
            if closed {
                c.pop();
            }
            (c, closed)
        })
        .collect();
    build_polylines(&chains)
}

pub fn write_polyline_csv(m: &Hypersurface, mut w: impl Write) -> Result<()> {
    if m.dim() != Dim::Two {
        return Err(Error::InvalidMesh("CSV polylines are planar".into()));
    }
    let mut s = String::from("x,y\n");
    for (k, c) in m.chains().iter().enumerate() {
        if k > 0 {
            s.push('\n');
        }
        let mut idx = c.vertices.clone();
        if c.closed {
            idx.push(idx[0]);
        }
        for i in idx {
            let p = m.vertex(i);
            let _ = writeln!(s, "{:e},{:e}", p.x, p.y);
        }
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}
