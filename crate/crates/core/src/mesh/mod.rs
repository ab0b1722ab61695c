//! Polygonal meshes with explicit interfaces.
//!
//! An [`Interface`] is a straight segment between two consecutive vertices
//! of the bordering polygons. Hanging nodes are stored as ordinary (180°)
//! polygon vertices, so the interfaces of every element tile its boundary
//! exactly and a trace unknown is single-valued per interface. Slit domains
//! use duplicated vertices along the slit, which keeps the two sides
//! topologically distinct.

mod classify;
mod generators;
mod io;

use std::collections::HashMap;

pub use classify::{
    check_mesh_condition, classify_faces, FaceClassification, FaceInfo, FlowClass,
    MeshConditionReport,
};
pub use generators::{
    generate_noncompatible_quads, generate_slit_mesh, generate_structured_triangles, Rect,
};
pub use io::{format_mesh, parse_mesh, read_mesh, write_mesh, ReadOptions};

use crate::geometry::{diameter, polygon_centroid, segments_intersect, signed_area, Vec2};
use crate::quadrature::{edge_quadrature, polygon_quadrature, EdgeQuadrature, QuadratureRule};
use crate::{Result, WgError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterfaceTag {
    Interior,
    Boundary,
    TopSlit,
    BottomSlit,
}

impl InterfaceTag {
    pub fn as_str(self) -> &'static str {
        match self {
            InterfaceTag::Interior => "interior",
            InterfaceTag::Boundary => "boundary",
            InterfaceTag::TopSlit => "top-slit",
            InterfaceTag::BottomSlit => "bottom-slit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "interior" => InterfaceTag::Interior,
            "boundary" => InterfaceTag::Boundary,
            "top-slit" => InterfaceTag::TopSlit,
            "bottom-slit" => InterfaceTag::BottomSlit,
            _ => return None,
        })
    }

    pub fn is_slit(self) -> bool {
        matches!(self, InterfaceTag::TopSlit | InterfaceTag::BottomSlit)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    /// Counterclockwise vertex ids.
    pub vertex_ids: Vec<usize>,
    /// Interface `i` runs from `vertex_ids[i]` to `vertex_ids[i + 1]`.
    pub interface_ids: Vec<usize>,
    pub diameter: f64,
    pub centroid: Vec2,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interface {
    /// Ordered so that `v0 → v1` follows the counterclockwise boundary of `left`.
    pub vertex_ids: [usize; 2],
    pub endpoints: [Vec2; 2],
    pub left: usize,
    pub right: Option<usize>,
    pub tag: InterfaceTag,
    /// Unit normal pointing out of `left`.
    pub normal: Vec2,
    pub length: f64,
}

impl Interface {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }

    pub fn midpoint(&self) -> Vec2 {
        (self.endpoints[0] + self.endpoints[1]) * 0.5
    }

    /// +1 when `element` is the left element, -1 when it is the right one.
    pub fn orientation(&self, element: usize) -> f64 {
        if element == self.left {
            1.0
        } else {
            debug_assert_eq!(self.right, Some(element));
            -1.0
        }
    }

    pub fn quadrature(&self, degree: usize) -> Result<EdgeQuadrature> {
        edge_quadrature(self.endpoints[0], self.endpoints[1], degree)
    }
}

/// Topological description of an interface, before geometry is attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawInterface {
    pub vertex_ids: [usize; 2],
    pub left: usize,
    pub right: Option<usize>,
    pub tag: InterfaceTag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalMesh {
    vertices: Vec<Vec2>,
    elements: Vec<Element>,
    interfaces: Vec<Interface>,
}

impl PolygonalMesh {
    /// Builds a mesh from counterclockwise polygons, matching shared edges by
    /// vertex ids. Unmatched edges become boundary interfaces tagged by
    /// `boundary_tag(p0, p1, centroid_of_owner)`.
    pub fn from_polygons(
        vertices: Vec<Vec2>,
        polygons: Vec<Vec<usize>>,
        mut boundary_tag: impl FnMut(Vec2, Vec2, Vec2) -> InterfaceTag,
    ) -> Result<Self> {
        let mut raw: Vec<RawInterface> = Vec::new();
        let mut by_edge: HashMap<(usize, usize), usize> = HashMap::new();
        for (e, poly) in polygons.iter().enumerate() {
            let m = poly.len();
            for i in 0..m {
                let (a, b) = (poly[i], poly[(i + 1) % m]);
                if let Some(&id) = by_edge.get(&(b, a)) {
                    let r: &mut RawInterface = &mut raw[id];
                    if r.right.is_some() {
                        return Err(WgError::InvalidMesh(format!(
                            "edge {b}-{a} is shared by more than two elements"
                        )));
                    }
                    r.right = Some(e);
                    r.tag = InterfaceTag::Interior;
                } else {
                    if by_edge.contains_key(&(a, b)) {
                        return Err(WgError::InvalidMesh(format!(
                            "edge {a}-{b} appears twice with the same orientation"
                        )));
                    }
                    by_edge.insert((a, b), raw.len());
                    raw.push(RawInterface {
                        vertex_ids: [a, b],
                        left: e,
                        right: None,
                        tag: InterfaceTag::Boundary,
                    });
                }
            }
        }
        for r in raw.iter_mut().filter(|r| r.right.is_none()) {
            let pts: Vec<Vec2> = polygons[r.left].iter().map(|&v| vertices[v]).collect();
            let c = polygon_centroid(&pts);
            r.tag = boundary_tag(vertices[r.vertex_ids[0]], vertices[r.vertex_ids[1]], c);
        }
        Self::from_parts(vertices, polygons, raw)
    }

    /// Builds and validates a mesh from explicit vertices, polygons and interfaces.
    pub fn from_parts(
        vertices: Vec<Vec2>,
        polygons: Vec<Vec<usize>>,
        raw: Vec<RawInterface>,
    ) -> Result<Self> {
        let nv = vertices.len();
        let mut elements = Vec::with_capacity(polygons.len());
        for (e, poly) in polygons.into_iter().enumerate() {
            if poly.len() < 3 {
                return Err(WgError::InvalidMesh(format!("element {e} has fewer than 3 vertices")));
            }
            if let Some(&v) = poly.iter().find(|&&v| v >= nv) {
                return Err(WgError::InvalidMesh(format!("element {e} references vertex {v}")));
            }
            let pts: Vec<Vec2> = poly.iter().map(|&v| vertices[v]).collect();
            let area = signed_area(&pts);
            if !(area > 0.0) {
                return Err(WgError::InvalidMesh(format!(
                    "element {e} is not counterclockwise with positive area (area {area:e})"
                )));
            }
            check_simple(e, &pts)?;
            elements.push(Element {
                interface_ids: vec![usize::MAX; poly.len()],
                diameter: diameter(&pts),
                centroid: polygon_centroid(&pts),
                area,
                vertex_ids: poly,
            });
        }

        let mut interfaces = Vec::with_capacity(raw.len());
        let mut directed: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for (id, r) in raw.into_iter().enumerate() {
            let [a, b] = r.vertex_ids;
            if a >= nv || b >= nv {
                return Err(WgError::InvalidMesh(format!("interface {id} references a missing vertex")));
            }
            if r.left >= elements.len() || r.right.is_some_and(|x| x >= elements.len()) {
                return Err(WgError::InvalidMesh(format!(
                    "interface {id} borders a nonexistent element"
                )));
            }
            let tag_ok = match r.tag {
                InterfaceTag::Interior => r.right.is_some(),
                _ => r.right.is_none(),
            };
            if !tag_ok {
                return Err(WgError::InvalidMesh(format!(
                    "interface {id} tag {} does not match its neighbours",
                    r.tag.as_str()
                )));
            }
            let (p, q) = (vertices[a], vertices[b]);
            let d = q - p;
            let length = d.norm();
            if !(length > 0.0) {
                return Err(WgError::InvalidMesh(format!("interface {id} has zero length")));
            }
            for (key, owner) in [((a, b), r.left)]
                .into_iter()
                .chain(r.right.map(|rr| ((b, a), rr)))
            {
                if directed.insert(key, (id, owner)).is_some() {
                    return Err(WgError::InvalidMesh(format!(
                        "edge {}-{} is covered by more than one interface",
                        key.0, key.1
                    )));
                }
            }
            interfaces.push(Interface {
                vertex_ids: [a, b],
                endpoints: [p, q],
                left: r.left,
                right: r.right,
                tag: r.tag,
                normal: Vec2::new(d.y, -d.x) / length,
                length,
            });
        }

        let mut used = vec![0usize; interfaces.len()];
        for (e, el) in elements.iter_mut().enumerate() {
            let m = el.vertex_ids.len();
            for i in 0..m {
                let key = (el.vertex_ids[i], el.vertex_ids[(i + 1) % m]);
                match directed.get(&key) {
                    Some(&(id, owner)) if owner == e => {
                        el.interface_ids[i] = id;
                        used[id] += 1;
                    }
                    _ => {
                        return Err(WgError::InvalidMesh(format!(
                            "edge {}-{} of element {e} is not covered by an interface",
                            key.0, key.1
                        )))
                    }
                }
            }
        }
        for (id, iface) in interfaces.iter().enumerate() {
            let expected = if iface.is_boundary() { 1 } else { 2 };
            if used[id] != expected {
                return Err(WgError::InvalidMesh(format!(
                    "interface {id} is not an edge of the elements it claims to border"
                )));
            }
        }

        let mesh = PolygonalMesh {
            vertices,
            elements,
            interfaces,
        };
        mesh.check_tiling()?;
        Ok(mesh)
    }

    fn check_tiling(&self) -> Result<()> {
        for (e, el) in self.elements.iter().enumerate() {
            let pts = self.element_points(e);
            let m = pts.len();
            let perimeter: f64 = (0..m).map(|i| (pts[(i + 1) % m] - pts[i]).norm()).sum();
            let covered: f64 = el.interface_ids.iter().map(|&i| self.interfaces[i].length).sum();
            if (perimeter - covered).abs() > 1e-12 * perimeter {
                return Err(WgError::InvalidMesh(format!(
                    "interfaces of element {e} do not tile its boundary"
                )));
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn interfaces(&self) -> &[Interface] {
        &self.interfaces
    }

    pub fn element(&self, id: usize) -> &Element {
        &self.elements[id]
    }

    pub fn interface(&self, id: usize) -> &Interface {
        &self.interfaces[id]
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_interfaces(&self) -> usize {
        self.interfaces.len()
    }

    pub fn element_points(&self, id: usize) -> Vec<Vec2> {
        self.elements[id]
            .vertex_ids
            .iter()
            .map(|&v| self.vertices[v])
            .collect()
    }

    pub fn element_quadrature(&self, id: usize, degree: usize) -> Result<QuadratureRule> {
        polygon_quadrature(&self.element_points(id), degree)
    }

    /// Outward unit normal of `element` on `interface`.
    pub fn outward_normal(&self, element: usize, interface: usize) -> Vec2 {
        let f = &self.interfaces[interface];
        f.normal * f.orientation(element)
    }

    /// Mesh size `h = max h_K`.
    pub fn h(&self) -> f64 {
        self.elements.iter().map(|e| e.diameter).fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        self.elements.iter().map(|e| e.area).sum()
    }

    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    pub fn raw_interfaces(&self) -> Vec<RawInterface> {
        self.interfaces
            .iter()
            .map(|f| RawInterface {
                vertex_ids: f.vertex_ids,
                left: f.left,
                right: f.right,
                tag: f.tag,
            })
            .collect()
    }
}

fn check_simple(e: usize, pts: &[Vec2]) -> Result<()> {
    let m = pts.len();
    for i in 0..m {
        let (a, b) = (pts[i], pts[(i + 1) % m]);
        for j in i + 1..m {
            let adjacent = j == i + 1 || (i == 0 && j == m - 1);
            if adjacent {
                continue;
            }
            let (c, d) = (pts[j], pts[(j + 1) % m]);
            if segments_intersect(a, b, c, d) {
                return Err(WgError::InvalidMesh(format!(
                    "element {e} is not a simple polygon (edges {i} and {j} intersect)"
                )));
            }
        }
    }
    Ok(())
}
