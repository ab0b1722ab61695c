//! Global numbering of the free unknowns and the inflow constraints.

use std::ops::Range;

use nalgebra::DVector;

use crate::basis::dim_pk;
use crate::mesh::{FaceClassification, FlowClass, PolygonalMesh};
use crate::problem::ProblemSpec;
use crate::wg::{project_qb, WeakFunction};
use crate::{Result, WgError};

/// Status of the `k + 1` trace unknowns of one interface.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceDofs {
    /// Characteristic interface: no unknowns.
    Eliminated,
    /// Inflow boundary interface with prescribed coefficients `Q_b g`.
    Constrained(Vec<f64>),
    /// Free unknowns `start .. start + k + 1`.
    Free(usize),
}

/// Reference of one local unknown in the global system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GlobalDof {
    Free(usize),
    Fixed(f64),
}

/// Interior unknowns come first, element by element, followed by the free
/// trace unknowns in interface order.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub degree: usize,
    pub num_free: usize,
    pub num_interior: usize,
    pub traces: Vec<TraceDofs>,
}

impl DofMap {
    pub fn interior_dim(&self) -> usize {
        dim_pk(self.degree)
    }

    pub fn trace_dim(&self) -> usize {
        self.degree + 1
    }

    pub fn interior_range(&self, element: usize) -> Range<usize> {
        let n = self.interior_dim();
        element * n..(element + 1) * n
    }

    /// Interior ranges of all elements, in element order.
    pub fn interior_blocks(&self) -> Vec<Range<usize>> {
        (0..self.num_interior / self.interior_dim())
            .map(|e| self.interior_range(e))
            .collect()
    }

    pub fn is_live(&self, interface: usize) -> bool {
        !matches!(self.traces[interface], TraceDofs::Eliminated)
    }

    /// Global references of the local unknowns of `element`, in the local
    /// layout of [`crate::wg::ElementContext`].
    pub fn local_dofs(&self, mesh: &PolygonalMesh, element: usize) -> Vec<GlobalDof> {
        let mut out: Vec<GlobalDof> = self.interior_range(element).map(GlobalDof::Free).collect();
        for &i in &mesh.element(element).interface_ids {
            match &self.traces[i] {
                TraceDofs::Eliminated => {}
                TraceDofs::Constrained(v) => out.extend(v.iter().map(|&x| GlobalDof::Fixed(x))),
                TraceDofs::Free(s) => out.extend((*s..*s + self.trace_dim()).map(GlobalDof::Free)),
            }
        }
        out
    }

    /// Scatters a free-unknown vector into a weak function, filling in the
    /// prescribed inflow values.
    pub fn scatter(&self, x: &[f64]) -> WeakFunction {
        assert_eq!(x.len(), self.num_free, "solution length mismatch");
        let n0 = self.interior_dim();
        let nt = self.trace_dim();
        let interior = self
            .interior_blocks()
            .into_iter()
            .map(|r| DVector::from_column_slice(&x[r]))
            .collect::<Vec<_>>();
        debug_assert!(interior.iter().all(|v| v.len() == n0));
        let traces = self
            .traces
            .iter()
            .map(|t| match t {
                TraceDofs::Eliminated => None,
                TraceDofs::Constrained(v) => Some(DVector::from_column_slice(v)),
                TraceDofs::Free(s) => Some(DVector::from_column_slice(&x[*s..*s + nt])),
            })
            .collect();
        WeakFunction {
            degree: self.degree,
            interior,
            traces,
        }
    }

    /// Like [`DofMap::scatter`] but with zero inflow traces, i.e. an element of
    /// the homogeneous space `V_h⁰`.
    pub fn scatter_homogeneous(&self, x: &[f64]) -> WeakFunction {
        let mut v = self.scatter(x);
        for (t, vt) in self.traces.iter().zip(v.traces.iter_mut()) {
            if let (TraceDofs::Constrained(_), Some(c)) = (t, vt.as_mut()) {
                c.fill(0.0);
            }
        }
        v
    }

    /// Inverse of [`DofMap::scatter`] on the free unknowns.
    pub fn gather(&self, v: &WeakFunction) -> Vec<f64> {
        let mut x = vec![0.0; self.num_free];
        for (e, r) in self.interior_blocks().into_iter().enumerate() {
            x[r].copy_from_slice(v.interior[e].as_slice());
        }
        for (i, t) in self.traces.iter().enumerate() {
            if let (TraceDofs::Free(s), Some(c)) = (t, &v.traces[i]) {
                x[*s..*s + self.trace_dim()].copy_from_slice(c.as_slice());
            }
        }
        x
    }

    /// Per interface: whether it carries trace coefficients.
    pub fn live_mask(&self) -> Vec<bool> {
        (0..self.traces.len()).map(|i| self.is_live(i)).collect()
    }
}

/// Numbers the unknowns of degree `degree`: inflow boundary traces are
/// constrained to `Q_b g`, characteristic interfaces are eliminated, the rest
/// is free.
pub fn build_dofmap(
    mesh: &PolygonalMesh,
    classification: &FaceClassification,
    problem: &ProblemSpec,
    degree: usize,
) -> Result<DofMap> {
    if let Some(&i) = classification.asymmetric_interfaces().first() {
        return Err(WgError::AsymmetricClassification { interface: i });
    }
    let n0 = dim_pk(degree);
    let nt = degree + 1;
    let num_interior = mesh.num_elements() * n0;
    let mut next = num_interior;
    let mut traces = Vec::with_capacity(mesh.num_interfaces());
    for (i, f) in mesh.interfaces().iter().enumerate() {
        if classification.is_eliminated(i) {
            traces.push(TraceDofs::Eliminated);
            continue;
        }
        if f.is_boundary() {
            match classification.face(f.left, i).class {
                FlowClass::Mixed => return Err(WgError::MixedBoundaryInterface { interface: i }),
                FlowClass::Inflow => {
                    let g = &problem.g;
                    let c = project_qb(mesh, i, degree, classification.quad_degree(), &|p| g(p))?;
                    traces.push(TraceDofs::Constrained(c.as_slice().to_vec()));
                    continue;
                }
                _ => {}
            }
        }
        traces.push(TraceDofs::Free(next));
        next += nt;
    }
    Ok(DofMap {
        degree,
        num_free: next,
        num_interior,
        traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::mesh::{
        classify_faces, generate_slit_mesh, generate_structured_triangles, InterfaceTag, Rect,
    };
    use crate::problem::{example1, example2, example4};
    use std::f64::consts::PI;

    #[test]
    fn example1_constraints() {
        let m = generate_structured_triangles(4, Rect::UNIT);
        let p = example1();
        let c = classify_faces(&m, &|x| (p.beta)(x), 5).unwrap();
        let d = build_dofmap(&m, &c, &p, 1).unwrap();
        for (i, f) in m.interfaces().iter().enumerate() {
            let horizontal = f.normal.x.abs() < 1e-14;
            let left_edge = f.is_boundary() && f.midpoint().x < 1e-14;
            match &d.traces[i] {
                TraceDofs::Eliminated => assert!(horizontal),
                TraceDofs::Constrained(v) => {
                    assert!(left_edge);
                    // g = e^{xy} = 1 on x = 0
                    assert!((v[0] - 1.0).abs() < 1e-14 && v[1].abs() < 1e-14);
                }
                TraceDofs::Free(_) => assert!(!horizontal && !left_edge),
            }
        }
        let free_traces = d.traces.iter().filter(|t| matches!(t, TraceDofs::Free(_))).count();
        assert_eq!(d.num_free, d.num_interior + 2 * free_traces);
    }

    #[test]
    fn diagonal_flow_inflow_is_left_and_bottom() {
        let m = generate_structured_triangles(3, Rect::UNIT);
        let p = example2();
        let c = classify_faces(&m, &|x| (p.beta)(x), 5).unwrap();
        let d = build_dofmap(&m, &c, &p, 0).unwrap();
        for (i, f) in m.interfaces().iter().enumerate() {
            let mid = f.midpoint();
            let inflow = f.is_boundary() && (mid.x < 1e-14 || mid.y < 1e-14);
            assert_eq!(inflow, matches!(d.traces[i], TraceDofs::Constrained(_)), "{i}");
        }
    }

    #[test]
    fn slit_top_constrained_bottom_free() {
        let m = generate_slit_mesh(4);
        let p = example4();
        let c = classify_faces(&m, &|x| (p.beta)(x), 7).unwrap();
        let d = build_dofmap(&m, &c, &p, 2).unwrap();
        let mut seen = 0;
        for (i, f) in m.interfaces().iter().enumerate() {
            match f.tag {
                InterfaceTag::TopSlit => {
                    let TraceDofs::Constrained(v) = &d.traces[i] else {
                        panic!("top slit interface {i} not constrained")
                    };
                    let q = project_qb(&m, i, 2, 7, &|x: Vec2| (PI * x.x).sin().powi(2)).unwrap();
                    assert_eq!(v.as_slice(), q.as_slice());
                    seen += 1;
                }
                InterfaceTag::BottomSlit => {
                    assert!(matches!(d.traces[i], TraceDofs::Free(_)));
                }
                _ => {}
            }
        }
        assert_eq!(seen, 2);
    }

    #[test]
    fn scatter_gather_round_trip() {
        let m = generate_structured_triangles(2, Rect::UNIT);
        let p = example2();
        let c = classify_faces(&m, &|x| (p.beta)(x), 5).unwrap();
        let d = build_dofmap(&m, &c, &p, 1).unwrap();
        let x: Vec<f64> = (0..d.num_free).map(|i| i as f64 * 0.5).collect();
        assert_eq!(d.gather(&d.scatter(&x)), x);
    }

    #[test]
    fn mixed_boundary_interface_is_rejected() {
        // β·n = 0.25 - x changes sign along the bottom edge [0, 1/2]
        let m = crate::mesh::generate_noncompatible_quads(2, 0.0, 0);
        let mut p = example2();
        p.beta = std::sync::Arc::new(|x: Vec2| Vec2::new(0.0, x.x - 0.25));
        let c = classify_faces(&m, &|x| (p.beta)(x), 5).unwrap();
        assert!(matches!(
            build_dofmap(&m, &c, &p, 1),
            Err(WgError::MixedBoundaryInterface { .. })
        ));
    }
}
