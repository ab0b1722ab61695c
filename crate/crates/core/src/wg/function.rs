use nalgebra::DVector;

use crate::basis::{dim_pk, ElementBasis, EdgeBasis};
use crate::geometry::Vec2;
use crate::mesh::PolygonalMesh;

/// A discrete weak function `{v⁰, v^b}`: one `P_k(K)` coefficient vector per
/// element (scaled monomials of [`ElementBasis`]) and one `P_k(e)` vector per
/// interface (Legendre polynomials of [`EdgeBasis`] along the interface
/// orientation). Eliminated interfaces have no trace.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakFunction {
    pub degree: usize,
    pub interior: Vec<DVector<f64>>,
    pub traces: Vec<Option<DVector<f64>>>,
}

impl WeakFunction {
    /// All-zero function; interfaces with `live[i] == false` carry no trace.
    pub fn zeros(degree: usize, num_elements: usize, live: &[bool]) -> Self {
        WeakFunction {
            degree,
            interior: vec![DVector::zeros(dim_pk(degree)); num_elements],
            traces: live
                .iter()
                .map(|&l| l.then(|| DVector::zeros(degree + 1)))
                .collect(),
        }
    }

    pub fn interior_dim(&self) -> usize {
        dim_pk(self.degree)
    }

    /// `v⁰` on element `e` at `p`.
    pub fn eval_interior(&self, mesh: &PolygonalMesh, e: usize, p: Vec2) -> f64 {
        let el = mesh.element(e);
        ElementBasis::new(self.degree, el.centroid, el.diameter)
            .eval_combination(self.interior[e].as_slice(), p)
    }

    /// `v^b` on interface `i` at `p` (zero for eliminated interfaces).
    pub fn eval_trace(&self, mesh: &PolygonalMesh, i: usize, p: Vec2) -> f64 {
        match &self.traces[i] {
            Some(c) => {
                let f = mesh.interface(i);
                let b = EdgeBasis::new(self.degree, f.endpoints[0], f.endpoints[1]);
                b.eval_combination_at_param(c.as_slice(), b.param(p))
            }
            None => 0.0,
        }
    }

    /// `self - other`, assuming identical structure.
    pub fn sub(&self, other: &WeakFunction) -> WeakFunction {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &WeakFunction) -> WeakFunction {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, s: f64) -> WeakFunction {
        WeakFunction {
            degree: self.degree,
            interior: self.interior.iter().map(|v| v * s).collect(),
            traces: self.traces.iter().map(|t| t.as_ref().map(|v| v * s)).collect(),
        }
    }

    fn zip_with(&self, other: &WeakFunction, op: impl Fn(f64, f64) -> f64) -> WeakFunction {
        assert_eq!(self.degree, other.degree, "degree mismatch");
        assert_eq!(self.interior.len(), other.interior.len());
        assert_eq!(self.traces.len(), other.traces.len());
        WeakFunction {
            degree: self.degree,
            interior: self
                .interior
                .iter()
                .zip(&other.interior)
                .map(|(a, b)| a.zip_map(b, &op))
                .collect(),
            traces: self
                .traces
                .iter()
                .zip(&other.traces)
                .map(|(a, b)| match (a, b) {
                    (Some(a), Some(b)) => Some(a.zip_map(b, &op)),
                    (None, None) => None,
                    _ => panic!("trace structure mismatch"),
                })
                .collect(),
        }
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.interior
            .iter()
            .chain(self.traces.iter().flatten())
            .map(|v| v.amax())
            .fold(0.0, f64::max)
    }
}
