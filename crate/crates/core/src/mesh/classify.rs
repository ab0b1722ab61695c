//! Inflow/outflow/characteristic labels for every (element, interface) pair.

use super::PolygonalMesh;
use crate::geometry::Vec2;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowClass {
    Inflow,
    Outflow,
    Characteristic,
    Mixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceInfo {
    pub interface: usize,
    pub class: FlowClass,
    /// `min |β·n_K| ≤ h_K` over the classification nodes.
    pub in_eh0: bool,
    /// `∫_e |β·n| ds` with the classification rule.
    pub abs_flux: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceClassification {
    /// Aligned with `Element::interface_ids`.
    faces: Vec<Vec<FaceInfo>>,
    eliminated: Vec<bool>,
    asymmetric: Vec<usize>,
    quad_degree: usize,
}

impl FaceClassification {
    pub fn element_faces(&self, element: usize) -> &[FaceInfo] {
        &self.faces[element]
    }

    pub fn face(&self, element: usize, interface: usize) -> &FaceInfo {
        self.faces[element]
            .iter()
            .find(|f| f.interface == interface)
            .expect("interface does not border element")
    }

    /// Characteristic on every bordering side; such interfaces carry no trace unknowns.
    pub fn is_eliminated(&self, interface: usize) -> bool {
        self.eliminated[interface]
    }

    /// Interfaces that are characteristic on one side but not on the other.
    pub fn asymmetric_interfaces(&self) -> &[usize] {
        &self.asymmetric
    }

    pub fn quad_degree(&self) -> usize {
        self.quad_degree
    }
}

/// Labels every face by the sign of `β·n_K` at the nodes of a Gauss rule of
/// degree `quad_degree`.
///
/// A face is characteristic when `|β·n_K| ≤ ε` at every node, with
/// `ε = 1e-12 · max |β|` over the face nodes; mixed when both signs exceed
/// `ε`; otherwise inflow or outflow.
pub fn classify_faces(
    mesh: &PolygonalMesh,
    beta: &dyn Fn(Vec2) -> Vec2,
    quad_degree: usize,
) -> Result<FaceClassification> {
    let mut faces = Vec::with_capacity(mesh.num_elements());
    let mut char_sides = vec![(0usize, 0usize); mesh.num_interfaces()];
    // β·n on each interface, with n the interface normal
    let mut samples: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::with_capacity(mesh.num_interfaces());
    for f in mesh.interfaces() {
        let q = f.quadrature(quad_degree)?;
        let mut bn = Vec::with_capacity(q.rule.len());
        let mut bmax: f64 = 0.0;
        for p in &q.rule.points {
            let b = beta(*p);
            bmax = bmax.max(b.norm());
            bn.push(b.dot(&f.normal));
        }
        samples.push((bn, q.rule.weights, 1e-12 * bmax));
    }
    for (e, el) in mesh.elements().iter().enumerate() {
        let mut info = Vec::with_capacity(el.interface_ids.len());
        for &i in &el.interface_ids {
            let sign = mesh.interface(i).orientation(e);
            let (bn, w, eps) = &samples[i];
            let pos = bn.iter().any(|&v| sign * v > *eps);
            let neg = bn.iter().any(|&v| sign * v < -*eps);
            let class = match (pos, neg) {
                (true, true) => FlowClass::Mixed,
                (true, false) => FlowClass::Outflow,
                (false, true) => FlowClass::Inflow,
                (false, false) => FlowClass::Characteristic,
            };
            let min_abs = bn.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
            let abs_flux = bn.iter().zip(w).map(|(v, wi)| v.abs() * wi).sum();
            let entry = &mut char_sides[i];
            entry.0 += 1;
            if class == FlowClass::Characteristic {
                entry.1 += 1;
            }
            info.push(FaceInfo {
                interface: i,
                class,
                in_eh0: min_abs <= el.diameter,
                abs_flux,
            });
        }
        faces.push(info);
    }
    let eliminated = char_sides.iter().map(|&(n, c)| n > 0 && c == n).collect();
    let asymmetric = char_sides
        .iter()
        .enumerate()
        .filter(|(_, &(n, c))| c > 0 && c < n)
        .map(|(i, _)| i)
        .collect();
    Ok(FaceClassification {
        faces,
        eliminated,
        asymmetric,
        quad_degree,
    })
}

/// Elements with more than one outflow (or mixed) face outside the
/// near-characteristic set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeshConditionReport {
    pub satisfied: bool,
    pub violating_elements: Vec<usize>,
}

pub fn check_mesh_condition(
    mesh: &PolygonalMesh,
    classification: &FaceClassification,
) -> MeshConditionReport {
    let violating_elements: Vec<usize> = (0..mesh.num_elements())
        .filter(|&e| {
            classification
                .element_faces(e)
                .iter()
                .filter(|f| matches!(f.class, FlowClass::Outflow | FlowClass::Mixed) && !f.in_eh0)
                .count()
                > 1
        })
        .collect();
    MeshConditionReport {
        satisfied: violating_elements.is_empty(),
        violating_elements,
    }
}
