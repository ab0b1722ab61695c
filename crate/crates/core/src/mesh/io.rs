//! Plain-text mesh format.
//!
//! ```text
//! wgmesh 1
//! vertices N
//! x y                      (N lines)
//! elements M
//! v0 v1 v2 ...             (M lines, vertex ids)
//! interfaces P
//! v0 v1 left right tag     (P lines; right = -1 on the boundary)
//! ```
//!
//! Tags are `interior`, `boundary`, `top-slit` and `bottom-slit`.
//! Coordinates are written with 17 significant digits so that a write/read
//! round trip is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use super::{InterfaceTag, PolygonalMesh, RawInterface};
use crate::geometry::{signed_area, Vec2};
use crate::{Result, WgError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReadOptions {
    /// Reject clockwise polygons instead of reordering them.
    pub strict: bool,
}

pub fn format_mesh(mesh: &PolygonalMesh) -> String {
    let mut s = String::new();
    s.push_str("wgmesh 1\n");
    let _ = writeln!(s, "vertices {}", mesh.vertices().len());
    for v in mesh.vertices() {
        let _ = writeln!(s, "{:.16e} {:.16e}", v.x, v.y);
    }
    let _ = writeln!(s, "elements {}", mesh.num_elements());
    for e in mesh.elements() {
        let ids: Vec<String> = e.vertex_ids.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", ids.join(" "));
    }
    let _ = writeln!(s, "interfaces {}", mesh.num_interfaces());
    for f in mesh.interfaces() {
        let right = f.right.map_or(-1, |r| r as i64);
        let _ = writeln!(
            s,
            "{} {} {} {} {}",
            f.vertex_ids[0],
            f.vertex_ids[1],
            f.left,
            right,
            f.tag.as_str()
        );
    }
    s
}

pub fn write_mesh(path: impl AsRef<Path>, mesh: &PolygonalMesh) -> Result<()> {
    std::fs::write(path, format_mesh(mesh))?;
    Ok(())
}

pub fn read_mesh(path: impl AsRef<Path>, options: ReadOptions) -> Result<PolygonalMesh> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text, options)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if !toks.is_empty() {
                return Ok((i + 1, toks));
            }
        }
        Err(WgError::Parse {
            line: self.last + 1,
            message: "unexpected end of file".into(),
        })
    }

    fn section(&mut self, name: &str) -> Result<usize> {
        let (line, toks) = self.next_line()?;
        if toks.len() != 2 || toks[0] != name {
            return Err(parse_err(line, format!("expected `{name} <count>`")));
        }
        toks[1]
            .parse()
            .map_err(|_| parse_err(line, format!("invalid {name} count `{}`", toks[1])))
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> WgError {
    WgError::Parse {
        line,
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(line: usize, tok: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid number `{tok}`")))
}

pub fn parse_mesh(text: &str, options: ReadOptions) -> Result<PolygonalMesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (line, header) = lines.next_line()?;
    if header != ["wgmesh", "1"] {
        return Err(parse_err(line, "expected header `wgmesh 1`"));
    }

    let nv = lines.section("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, t) = lines.next_line()?;
        if t.len() != 2 {
            return Err(parse_err(line, "expected `x y`"));
        }
        vertices.push(Vec2::new(num(line, t[0])?, num(line, t[1])?));
    }

    let ne = lines.section("elements")?;
    let mut polygons = Vec::with_capacity(ne);
    for e in 0..ne {
        let (line, t) = lines.next_line()?;
        let mut ids = t
            .iter()
            .map(|tok| num::<usize>(line, tok))
            .collect::<Result<Vec<_>>>()?;
        if ids.len() < 3 {
            return Err(parse_err(line, "an element needs at least 3 vertices"));
        }
        if let Some(&v) = ids.iter().find(|&&v| v >= nv) {
            return Err(parse_err(line, format!("vertex id {v} out of range")));
        }
        let pts: Vec<Vec2> = ids.iter().map(|&v| vertices[v]).collect();
        if signed_area(&pts) < 0.0 {
            if options.strict {
                return Err(WgError::InvalidMesh(format!(
                    "element {e} (line {line}) is clockwise"
                )));
            }
            ids.reverse();
        }
        polygons.push(ids);
    }

    let ni = lines.section("interfaces")?;
    let mut raw = Vec::with_capacity(ni);
    for i in 0..ni {
        let (line, t) = lines.next_line()?;
        if t.len() != 5 {
            return Err(parse_err(line, "expected `v0 v1 left right tag`"));
        }
        let v0: usize = num(line, t[0])?;
        let v1: usize = num(line, t[1])?;
        let left: i64 = num(line, t[2])?;
        let right: i64 = num(line, t[3])?;
        let tag = InterfaceTag::parse(t[4])
            .ok_or_else(|| parse_err(line, format!("unknown tag `{}`", t[4])))?;
        if v0 >= nv || v1 >= nv {
            return Err(parse_err(line, "vertex id out of range"));
        }
        if left < 0 {
            return Err(WgError::InvalidMesh(format!(
                "interface {i} (line {line}) borders no element"
            )));
        }
        let check = |x: i64| {
            if x >= ne as i64 {
                Err(parse_err(line, format!("element id {x} out of range")))
            } else {
                Ok(x as usize)
            }
        };
        let left = check(left)?;
        let right = if right < 0 { None } else { Some(check(right)?) };
        let mut r = RawInterface {
            vertex_ids: [v0, v1],
            left,
            right,
            tag,
        };
        if !options.strict {
            orient_interface(&mut r, &polygons);
        }
        raw.push(r);
    }
    PolygonalMesh::from_parts(vertices, polygons, raw)
}

fn has_directed_edge(poly: &[usize], a: usize, b: usize) -> bool {
    let m = poly.len();
    (0..m).any(|i| poly[i] == a && poly[(i + 1) % m] == b)
}

/// Restores the `v0 → v1 follows left` convention after polygons were reordered.
fn orient_interface(r: &mut RawInterface, polygons: &[Vec<usize>]) {
    let [a, b] = r.vertex_ids;
    if has_directed_edge(&polygons[r.left], a, b) {
        return;
    }
    match r.right {
        Some(right) if has_directed_edge(&polygons[right], a, b) => {
            r.right = Some(r.left);
            r.left = right;
        }
        None if has_directed_edge(&polygons[r.left], b, a) => {
            r.vertex_ids = [b, a];
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_noncompatible_quads, generate_slit_mesh, generate_structured_triangles, Rect};

    #[test]
    fn round_trip_generators() {
        let meshes = [
            generate_structured_triangles(3, Rect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 0.7 }),
            generate_noncompatible_quads(5, 0.6, 11),
            generate_slit_mesh(4),
        ];
        for m in meshes {
            let text = format_mesh(&m);
            let back = parse_mesh(&text, ReadOptions { strict: true }).unwrap();
            assert_eq!(m, back);
        }
    }

    #[test]
    fn file_round_trip() {
        let m = generate_slit_mesh(2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("slit.wgmesh");
        write_mesh(&path, &m).unwrap();
        assert_eq!(read_mesh(&path, ReadOptions::default()).unwrap(), m);
    }

    const TRIANGLE: &str = "wgmesh 1\nvertices 3\n0 0\n1 0\n0 1\nelements 1\n0 1 2\ninterfaces 3\n0 1 0 -1 boundary\n1 2 0 -1 boundary\n2 0 0 -1 boundary\n";

    #[test]
    fn parses_minimal_file() {
        let m = parse_mesh(TRIANGLE, ReadOptions { strict: true }).unwrap();
        assert_eq!(m.num_elements(), 1);
        assert!((m.element(0).area - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reports_line_numbers() {
        let bad = TRIANGLE.replace("1 0\n0 1", "1 zero\n0 1");
        match parse_mesh(&bad, ReadOptions::default()) {
            Err(WgError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let truncated = &TRIANGLE[..TRIANGLE.len() - 20];
        assert!(matches!(parse_mesh(truncated, ReadOptions::default()), Err(WgError::Parse { .. })));
    }

    #[test]
    fn orphan_interface_is_a_validation_error() {
        let bad = TRIANGLE.replace("2 0 0 -1 boundary", "2 0 -1 -1 boundary");
        assert!(matches!(parse_mesh(&bad, ReadOptions::default()), Err(WgError::InvalidMesh(_))));
    }

    #[test]
    fn clockwise_polygons_depend_on_strictness() {
        let cw = "wgmesh 1\nvertices 3\n0 0\n1 0\n0 1\nelements 1\n0 2 1\ninterfaces 3\n0 2 0 -1 boundary\n2 1 0 -1 boundary\n1 0 0 -1 boundary\n";
        assert!(matches!(parse_mesh(cw, ReadOptions { strict: true }), Err(WgError::InvalidMesh(_))));
        let m = parse_mesh(cw, ReadOptions { strict: false }).unwrap();
        assert!(m.element(0).area > 0.0);
        assert_eq!(m.element(0).vertex_ids, vec![1, 2, 0]);
    }
}
