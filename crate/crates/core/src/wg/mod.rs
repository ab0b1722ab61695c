//! Weak Galerkin operators on a single element.
//!
//! Local coefficient vectors are laid out as the interior block (`dim P_k(K)`
//! scaled monomials) followed by `k + 1` Legendre coefficients for each live
//! face of the element, in the element's counterclockwise face order.

mod function;
mod ops;

use nalgebra::DMatrix;

use crate::basis::{dim_pk, EdgeBasis, ElementBasis};
use crate::geometry::Vec2;
use crate::mesh::{FaceClassification, PolygonalMesh};
use crate::quadrature::QuadratureRule;
use crate::Result;

pub use function::WeakFunction;
pub use ops::{
    local_bilinear, local_rhs, project_pplus, project_q0, project_qb, project_qh,
    select_pplus_face, weak_divergence, weak_divergence_matrix,
};

/// Quadrature data of one face of an element.
#[derive(Debug, Clone)]
pub struct FaceContext {
    pub interface: usize,
    /// False for interfaces eliminated as characteristic.
    pub live: bool,
    pub points: Vec<Vec2>,
    pub weights: Vec<f64>,
    /// Element basis at the face nodes (`nodes × dim P_k(K)`).
    pub phi: DMatrix<f64>,
    /// Interface basis at the face nodes (`nodes × (k + 1)`).
    pub psi: DMatrix<f64>,
    /// `β·n_K` at the face nodes, with `n_K` outward from the element.
    pub beta_n: Vec<f64>,
}

/// Everything needed to evaluate local WG forms on one element.
#[derive(Debug, Clone)]
pub struct ElementContext {
    pub element: usize,
    pub degree: usize,
    pub basis: ElementBasis,
    pub quad: QuadratureRule,
    /// Basis values at the element nodes (`nodes × dim`).
    pub phi: DMatrix<f64>,
    pub grad_x: DMatrix<f64>,
    pub grad_y: DMatrix<f64>,
    /// `β` at the element nodes.
    pub beta: Vec<Vec2>,
    pub faces: Vec<FaceContext>,
}

impl ElementContext {
    pub fn new(
        mesh: &PolygonalMesh,
        classification: &FaceClassification,
        element: usize,
        degree: usize,
        beta: &dyn Fn(Vec2) -> Vec2,
    ) -> Result<Self> {
        let qdeg = classification.quad_degree();
        let el = mesh.element(element);
        let basis = ElementBasis::new(degree, el.centroid, el.diameter);
        let quad = mesh.element_quadrature(element, qdeg)?;
        let phi = basis.evaluate(&quad.points);
        let (grad_x, grad_y) = basis.evaluate_gradient(&quad.points);
        let beta_vals = quad.points.iter().map(|p| beta(*p)).collect();
        let mut faces = Vec::with_capacity(el.interface_ids.len());
        for &i in &el.interface_ids {
            let f = mesh.interface(i);
            let eq = f.quadrature(qdeg)?;
            let eb = EdgeBasis::new(degree, f.endpoints[0], f.endpoints[1]);
            let mut psi = DMatrix::zeros(eq.params.len(), degree + 1);
            let mut row = vec![0.0; degree + 1];
            for (r, &s) in eq.params.iter().enumerate() {
                eb.values_at_param_into(s, &mut row);
                for (c, v) in row.iter().enumerate() {
                    psi[(r, c)] = *v;
                }
            }
            let n = mesh.outward_normal(element, i);
            let beta_n = eq.rule.points.iter().map(|p| beta(*p).dot(&n)).collect();
            faces.push(FaceContext {
                interface: i,
                live: !classification.is_eliminated(i),
                phi: basis.evaluate(&eq.rule.points),
                psi,
                beta_n,
                points: eq.rule.points,
                weights: eq.rule.weights,
            });
        }
        Ok(ElementContext {
            element,
            degree,
            basis,
            quad,
            phi,
            grad_x,
            grad_y,
            beta: beta_vals,
            faces,
        })
    }

    pub fn interior_dim(&self) -> usize {
        dim_pk(self.degree)
    }

    pub fn trace_dim(&self) -> usize {
        self.degree + 1
    }

    pub fn live_interfaces(&self) -> Vec<usize> {
        self.faces.iter().filter(|f| f.live).map(|f| f.interface).collect()
    }

    /// Length of the local coefficient vector.
    pub fn local_dim(&self) -> usize {
        self.interior_dim() + self.trace_dim() * self.faces.iter().filter(|f| f.live).count()
    }

    /// Offset of each face's trace block in the local vector (`None` when eliminated).
    pub fn face_offsets(&self) -> Vec<Option<usize>> {
        let mut off = self.interior_dim();
        self.faces
            .iter()
            .map(|f| {
                f.live.then(|| {
                    let o = off;
                    off += self.trace_dim();
                    o
                })
            })
            .collect()
    }

    /// Element mass matrix of the interior basis.
    pub fn mass(&self) -> DMatrix<f64> {
        let n = self.interior_dim();
        let mut m = DMatrix::zeros(n, n);
        for (q, w) in self.quad.weights.iter().enumerate() {
            for i in 0..n {
                let wi = w * self.phi[(q, i)];
                for j in 0..n {
                    m[(i, j)] += wi * self.phi[(q, j)];
                }
            }
        }
        m
    }

    /// Gathers the local coefficient vector of `v` on this element.
    pub fn gather(&self, v: &WeakFunction) -> nalgebra::DVector<f64> {
        let mut out = nalgebra::DVector::zeros(self.local_dim());
        let n0 = self.interior_dim();
        out.rows_mut(0, n0).copy_from(&v.interior[self.element]);
        for (f, off) in self.faces.iter().zip(self.face_offsets()) {
            if let Some(o) = off {
                if let Some(t) = &v.traces[f.interface] {
                    out.rows_mut(o, self.trace_dim()).copy_from(t);
                }
            }
        }
        out
    }
}

/// Dense local matrix of the bilinear form: entry `(r, c)` is `a(φ_c, φ_r)`,
/// i.e. rows are test functions and columns trial functions.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    pub element: usize,
    pub live_interfaces: Vec<usize>,
    pub matrix: DMatrix<f64>,
}
