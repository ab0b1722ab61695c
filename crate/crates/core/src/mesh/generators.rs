//! Structured, non-compatible and slit mesh families.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{InterfaceTag, PolygonalMesh};
use crate::geometry::Vec2;

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const UNIT: Rect = Rect {
        x0: 0.0,
        x1: 1.0,
        y0: 0.0,
        y1: 1.0,
    };

    fn point(&self, i: usize, j: usize, n: usize) -> Vec2 {
        let t = |a: f64, b: f64, k: usize| {
            if k == n {
                b
            } else {
                a + (b - a) * k as f64 / n as f64
            }
        };
        Vec2::new(t(self.x0, self.x1, i), t(self.y0, self.y1, j))
    }
}

/// `2n²` right triangles: an `n × n` grid with every cell cut along its
/// lower-left to upper-right diagonal.
pub fn generate_structured_triangles(n: usize, domain: Rect) -> PolygonalMesh {
    assert!(n >= 1, "need at least one subdivision");
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(domain.point(i, j, n));
        }
    }
    let mut polys = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            polys.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            polys.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    PolygonalMesh::from_polygons(vertices, polys, |_, _, _| InterfaceTag::Boundary)
        .expect("structured triangulation is valid by construction")
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Split {
    None,
    Vertical,
    Horizontal,
}

/// `n × n` unit-square quad grid in which `round(refine_fraction · n²)`
/// pseudo-randomly chosen cells are halved, each in a random direction.
///
/// Neighbours of a halved cell keep their shape but gain the hanging node as
/// a straight-angle vertex, so the grid is non-compatible while interfaces
/// still tile every element. Output depends only on `(n, refine_fraction, seed)`.
pub fn generate_noncompatible_quads(n: usize, refine_fraction: f64, seed: u64) -> PolygonalMesh {
    assert!(n >= 2, "need at least a 2x2 grid");
    assert!(
        (0.0..=1.0).contains(&refine_fraction),
        "refine_fraction must lie in [0, 1]"
    );
    let domain = Rect::UNIT;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<usize> = (0..n * n).collect();
    cells.shuffle(&mut rng);
    let count = (refine_fraction * (n * n) as f64).round() as usize;
    let mut split = vec![Split::None; n * n];
    for &c in &cells[..count] {
        split[c] = if rng.random::<bool>() {
            Split::Vertical
        } else {
            Split::Horizontal
        };
    }

    let mut vertices: Vec<Vec2> = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(domain.point(i, j, n));
        }
    }
    let corner = |i: usize, j: usize| j * (n + 1) + i;
    // Midpoints keyed by edge: horizontal edge (i, j)-(i+1, j), vertical edge (i, j)-(i, j+1).
    let mut hmid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut vmid: HashMap<(usize, usize), usize> = HashMap::new();
    for j in 0..n {
        for i in 0..n {
            match split[j * n + i] {
                Split::Vertical => {
                    for jj in [j, j + 1] {
                        hmid.entry((i, jj)).or_insert_with(|| {
                            vertices.push((vertices[corner(i, jj)] + vertices[corner(i + 1, jj)]) * 0.5);
                            vertices.len() - 1
                        });
                    }
                }
                Split::Horizontal => {
                    for ii in [i, i + 1] {
                        vmid.entry((ii, j)).or_insert_with(|| {
                            vertices.push((vertices[corner(ii, j)] + vertices[corner(ii, j + 1)]) * 0.5);
                            vertices.len() - 1
                        });
                    }
                }
                Split::None => {}
            }
        }
    }

    let mut polys = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (bl, br, tr, tl) = (
                corner(i, j),
                corner(i + 1, j),
                corner(i + 1, j + 1),
                corner(i, j + 1),
            );
            let bottom = hmid.get(&(i, j)).copied();
            let top = hmid.get(&(i, j + 1)).copied();
            let left = vmid.get(&(i, j)).copied();
            let right = vmid.get(&(i + 1, j)).copied();
            let mut push = |ids: &[Option<usize>]| polys.push(ids.iter().flatten().copied().collect::<Vec<_>>());
            match split[j * n + i] {
                Split::None => push(&[Some(bl), bottom, Some(br), right, Some(tr), top, Some(tl), left]),
                Split::Vertical => {
                    let (b, t) = (bottom.unwrap(), top.unwrap());
                    push(&[Some(bl), Some(b), Some(t), Some(tl), left]);
                    push(&[Some(b), Some(br), right, Some(tr), Some(t)]);
                }
                Split::Horizontal => {
                    let (l, r) = (left.unwrap(), right.unwrap());
                    push(&[Some(bl), bottom, Some(br), Some(r), Some(l)]);
                    push(&[Some(l), Some(r), Some(tr), top, Some(tl)]);
                }
            }
        }
    }
    PolygonalMesh::from_polygons(vertices, polys, |_, _, _| InterfaceTag::Boundary)
        .expect("non-compatible quad mesh is valid by construction")
}

/// Triangulation of `(-1, 1)² \ [0, 1] × {0}` on an `n × n` grid (`n` even).
///
/// Grid vertices on the slit (`x > 0`, `y = 0`) are duplicated for the
/// elements below it, so the slit carries two distinct boundary interfaces
/// tagged `top-slit` and `bottom-slit`. Grid lines through `x = 0` and
/// `y = 0` guarantee that no boundary interface straddles a sign change of
/// `β·n` for the rotating field `β = (-y, x)`.
pub fn generate_slit_mesh(n: usize) -> PolygonalMesh {
    assert!(n >= 2 && n % 2 == 0, "slit mesh needs an even n >= 2");
    let domain = Rect {
        x0: -1.0,
        x1: 1.0,
        y0: -1.0,
        y1: 1.0,
    };
    let half = n / 2;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1) + half);
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(domain.point(i, j, n));
        }
    }
    let mut lower_copy = vec![usize::MAX; n + 1];
    for (i, slot) in lower_copy.iter_mut().enumerate().skip(half + 1) {
        *slot = vertices.len();
        vertices.push(domain.point(i, half, n));
    }
    let id = |i: usize, j: usize, below: bool| {
        if below && j == half && i > half {
            lower_copy[i]
        } else {
            j * (n + 1) + i
        }
    };
    let mut polys = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let below = j < half;
            let (a, b, c, d) = (
                id(i, j, below),
                id(i + 1, j, below),
                id(i + 1, j + 1, below),
                id(i, j + 1, below),
            );
            polys.push(vec![a, b, c]);
            polys.push(vec![a, c, d]);
        }
    }
    PolygonalMesh::from_polygons(vertices, polys, |p, q, centroid| {
        if p.y == 0.0 && q.y == 0.0 && p.x >= 0.0 && q.x >= 0.0 {
            if centroid.y > 0.0 {
                InterfaceTag::TopSlit
            } else {
                InterfaceTag::BottomSlit
            }
        } else {
            InterfaceTag::Boundary
        }
    })
    .expect("slit mesh is valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::tests::assert_closed_and_tiled;

    #[test]
    fn structured_counts() {
        let m = generate_structured_triangles(1, Rect::UNIT);
        assert_eq!(m.num_elements(), 2);
        assert_eq!(m.num_interfaces(), 5);
        assert_eq!(m.interfaces().iter().filter(|f| f.is_boundary()).count(), 4);

        let m = generate_structured_triangles(2, Rect::UNIT);
        assert_eq!(m.num_elements(), 8);
        // Euler: V - E + F = 1 for a disk
        assert_eq!(m.vertices().len() + m.num_elements() - m.num_interfaces(), 1);
        for f in m.interfaces().iter().filter(|f| !f.is_boundary()) {
            assert_ne!(Some(f.left), f.right);
        }
        assert_closed_and_tiled(&m);
    }

    #[test]
    fn quad_counts_and_tiling() {
        let plain = generate_noncompatible_quads(4, 0.0, 3);
        assert_eq!(plain.num_elements(), 16);
        assert!(plain.elements().iter().all(|e| e.vertex_ids.len() == 4));

        let all = generate_noncompatible_quads(2, 1.0, 0);
        assert_eq!(all.num_elements(), 8);

        for seed in 0..5 {
            let m = generate_noncompatible_quads(6, 0.5, seed);
            assert_eq!(m.num_elements(), 36 + 18);
            assert_closed_and_tiled(&m);
            for (e, el) in m.elements().iter().enumerate() {
                let pts = m.element_points(e);
                let k = pts.len();
                let perimeter: f64 = (0..k).map(|i| (pts[(i + 1) % k] - pts[i]).norm()).sum();
                let tiled: f64 = el.interface_ids.iter().map(|&i| m.interface(i).length).sum();
                assert!((perimeter - tiled).abs() <= 1e-12 * perimeter);
            }
            assert!((m.total_area() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quads_are_deterministic_and_have_hanging_nodes() {
        let a = generate_noncompatible_quads(8, 0.5, 42);
        let b = generate_noncompatible_quads(8, 0.5, 42);
        assert_eq!(a, b);
        let c = generate_noncompatible_quads(8, 0.5, 43);
        assert_ne!(a, c);
        // some element carries a straight-angle (hanging) vertex
        assert!(a.elements().iter().any(|e| e.vertex_ids.len() > 4));
    }

    #[test]
    fn slit_mesh_structure() {
        for n in [2, 4, 8] {
            let m = generate_slit_mesh(n);
            assert!((m.total_area() - 4.0).abs() < 1e-12);
            let top: Vec<_> = m.interfaces().iter().filter(|f| f.tag == InterfaceTag::TopSlit).collect();
            let bottom: Vec<_> =
                m.interfaces().iter().filter(|f| f.tag == InterfaceTag::BottomSlit).collect();
            assert_eq!(top.len(), n / 2);
            assert_eq!(bottom.len(), n / 2);
            let len: f64 = top.iter().map(|f| f.length).sum();
            assert!((len - 1.0).abs() < 1e-14);
            // coincident geometry, distinct topology
            for t in &top {
                let twin = bottom
                    .iter()
                    .find(|b| (b.midpoint() - t.midpoint()).norm() < 1e-14)
                    .expect("coincident twin");
                assert_ne!(t.vertex_ids, twin.vertex_ids);
                assert!(t.normal.y < 0.0 && twin.normal.y > 0.0);
            }
            assert_closed_and_tiled(&m);
        }
    }
}
