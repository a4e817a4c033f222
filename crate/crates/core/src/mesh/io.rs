//! ASCII OFF and OBJ. Positions are written with 17 significant digits so a
//! write/read cycle is lossless.

use std::io::{BufRead, Write};

use super::{Point3, SurfaceMesh};
use crate::error::MeshError;

pub fn write_off<W: Write>(mesh: &SurfaceMesh, mut w: W) -> std::io::Result<()> {
    writeln!(w, "OFF")?;
    writeln!(w, "{} {} 0", mesh.vertex_count(), mesh.triangle_count())?;
    for p in mesh.vertices() {
        writeln!(w, "{:.16e} {:.16e} {:.16e}", p.x, p.y, p.z)?;
    }
    for t in mesh.triangles() {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

fn data_lines<R: BufRead>(r: R) -> impl Iterator<Item = (usize, Result<String, std::io::Error>)> {
    r.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| match l {
        Ok(s) => {
            let s = s.trim();
            !s.is_empty() && !s.starts_with('#')
        }
        Err(_) => true,
    })
}

fn parse_err(line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse { line, message: msg.into() }
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64, MeshError> {
    tok.ok_or_else(|| parse_err(line, "missing coordinate"))?
        .parse()
        .map_err(|_| parse_err(line, "bad coordinate"))
}

pub fn read_off<R: BufRead>(r: R) -> Result<SurfaceMesh, MeshError> {
    let mut lines = data_lines(r);
    let (ln, header) = lines.next().ok_or_else(|| parse_err(0, "empty file"))?;
    let header = header?;
    let mut header_tokens = header.split_whitespace();
    if header_tokens.next() != Some("OFF") {
        return Err(parse_err(ln, "expected OFF header"));
    }
    let rest: Vec<String> = header_tokens.map(str::to_owned).collect();
    let (ln, counts) = if rest.is_empty() {
        let (ln, l) = lines.next().ok_or_else(|| parse_err(ln, "missing counts"))?;
        (ln, l?)
    } else {
        (ln, rest.join(" "))
    };
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(ln, "bad count")))
        .collect::<Result<_, _>>()?;
    if counts.len() < 2 {
        return Err(parse_err(ln, "expected vertex and face counts"));
    }
    let (nv, nf) = (counts[0], counts[1]);
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| parse_err(ln, "truncated vertex list"))?;
        let l = l?;
        let mut it = l.split_whitespace();
        vertices.push(Point3::new(parse_f64(it.next(), ln)?, parse_f64(it.next(), ln)?, parse_f64(it.next(), ln)?));
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, l) = lines.next().ok_or_else(|| parse_err(ln, "truncated face list"))?;
        let idx: Vec<usize> = l?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(ln, "bad face index")))
            .collect::<Result<_, _>>()?;
        if idx.first() != Some(&3) || idx.len() < 4 {
            return Err(parse_err(ln, "only triangular faces are supported"));
        }
        triangles.push([idx[1], idx[2], idx[3]]);
    }
    SurfaceMesh::new(vertices, triangles)
}

pub fn write_obj<W: Write>(mesh: &SurfaceMesh, mut w: W) -> std::io::Result<()> {
    for p in mesh.vertices() {
        writeln!(w, "v {:.16e} {:.16e} {:.16e}", p.x, p.y, p.z)?;
    }
    for t in mesh.triangles() {
        writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}

pub fn read_obj<R: BufRead>(r: R) -> Result<SurfaceMesh, MeshError> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (ln, l) in data_lines(r) {
        let l = l?;
        let mut it = l.split_whitespace();
        match it.next() {
            Some("v") => vertices.push(Point3::new(
                parse_f64(it.next(), ln)?,
                parse_f64(it.next(), ln)?,
                parse_f64(it.next(), ln)?,
            )),
            Some("f") => {
                let idx: Vec<usize> = it
                    .map(|t| {
                        t.split('/')
                            .next()
                            .and_then(|s| s.parse::<usize>().ok())
                            .filter(|&i| i >= 1)
                            .map(|i| i - 1)
                            .ok_or_else(|| parse_err(ln, "bad face index"))
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() != 3 {
                    return Err(parse_err(ln, "only triangular faces are supported"));
                }
                triangles.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    SurfaceMesh::new(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::annulus;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn obj_round_trip() {
        let m = annulus(2, 9);
        let mut buf = Vec::new();
        write_obj(&m, &mut buf).unwrap();
        assert_eq!(read_obj(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn off_rejects_quads() {
        let src = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        assert!(matches!(read_off(src.as_bytes()), Err(MeshError::Parse { line: 7, .. })));
    }

    proptest! {
        #[test]
        fn off_round_trip_is_exact(coords in prop::collection::vec(-1e3f64..1e3, 9)) {
            let v: Vec<Point3> = coords.chunks(3).map(|c| Point3::new(c[0], c[1], c[2])).collect();
            let m = SurfaceMesh::new(v, vec![[0, 1, 2]]).unwrap();
            let mut buf = Vec::new();
            write_off(&m, &mut buf).unwrap();
            let back = read_off(buf.as_slice()).unwrap();
            prop_assert_eq!(back.triangles(), m.triangles());
            for (a, b) in back.vertices().iter().zip(m.vertices()) {
                prop_assert!((a - b).norm() <= 1e-15 * b.norm().max(f64::MIN_POSITIVE));
            }
        }
    }
}
