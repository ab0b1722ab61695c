//! Global assembly and solution of the WG scheme: find `u_h` with
//! `u_h^b = Q_b g` on the inflow boundary and `a(u_h, v) = (f, v⁰)` for all
//! `v` vanishing there.

use log::{debug, warn};
use nalgebra::DVector;
use rayon::prelude::*;

use crate::dofmap::{build_dofmap, DofMap, GlobalDof};
use crate::mesh::{check_mesh_condition, classify_faces, FaceClassification, PolygonalMesh};
use crate::problem::ProblemSpec;
use crate::solver::solve;
use crate::sparse::{CsrMatrix, SparseSystem};
use crate::wg::{self, local_bilinear, local_rhs, ElementContext, LocalOperator, WeakFunction};
use crate::{Result, WgError};

/// Default quadrature degree `2k + 3` for all element and face integrals.
pub fn default_quad_degree(degree: usize) -> usize {
    2 * degree + 3
}

/// A mesh, a problem and a polynomial degree, with the face classification,
/// the DOF map and the per-element quadrature data precomputed.
pub struct Discretization<'a> {
    pub mesh: &'a PolygonalMesh,
    pub problem: &'a ProblemSpec,
    pub degree: usize,
    pub classification: FaceClassification,
    pub dofmap: DofMap,
    contexts: Vec<ElementContext>,
}

impl<'a> Discretization<'a> {
    pub fn new(mesh: &'a PolygonalMesh, problem: &'a ProblemSpec, degree: usize) -> Result<Self> {
        Self::with_quad_degree(mesh, problem, degree, default_quad_degree(degree))
    }

    pub fn with_quad_degree(
        mesh: &'a PolygonalMesh,
        problem: &'a ProblemSpec,
        degree: usize,
        quad_degree: usize,
    ) -> Result<Self> {
        if quad_degree < 2 * degree {
            return Err(WgError::InvalidConfig(format!(
                "quadrature degree {quad_degree} is below 2k = {}",
                2 * degree
            )));
        }
        let beta = &problem.beta;
        let classification = classify_faces(mesh, &|p| beta(p), quad_degree)?;
        let report = check_mesh_condition(mesh, &classification);
        if !report.satisfied {
            debug!(
                "{} of {} elements have more than one outflow face outside the near-characteristic set",
                report.violating_elements.len(),
                mesh.num_elements()
            );
        }
        let dofmap = build_dofmap(mesh, &classification, problem, degree)?;
        let contexts = (0..mesh.num_elements())
            .into_par_iter()
            .map(|e| ElementContext::new(mesh, &classification, e, degree, &|p| beta(p)))
            .collect::<Result<Vec<_>>>()?;
        let disc = Discretization {
            mesh,
            problem,
            degree,
            classification,
            dofmap,
            contexts,
        };
        disc.check_sigma();
        Ok(disc)
    }

    fn check_sigma(&self) {
        let mut min = f64::INFINITY;
        for ctx in &self.contexts {
            let h = self.mesh.element(ctx.element).diameter;
            for p in &ctx.quad.points {
                min = min.min(self.problem.sigma_at(*p, h));
            }
        }
        if self.problem.sigma0 <= 0.0 {
            warn!(
                "{}: sigma0 = {}; the energy norm only controls the jump terms",
                self.problem.name, self.problem.sigma0
            );
        } else if min < self.problem.sigma0 * (1.0 - 1e-12) {
            warn!(
                "{}: sampled sigma {min} is below sigma0 = {}",
                self.problem.name, self.problem.sigma0
            );
        }
    }

    pub fn quad_degree(&self) -> usize {
        self.classification.quad_degree()
    }

    pub fn context(&self, element: usize) -> &ElementContext {
        &self.contexts[element]
    }

    pub fn contexts(&self) -> &[ElementContext] {
        &self.contexts
    }

    pub fn local_operator(&self, element: usize) -> LocalOperator {
        let alpha = &self.problem.alpha;
        local_bilinear(&self.contexts[element], &|p| alpha(p))
    }

    /// Zero weak function with the trace structure of this discretization.
    pub fn zero_function(&self) -> WeakFunction {
        WeakFunction::zeros(self.degree, self.mesh.num_elements(), &self.dofmap.live_mask())
    }

    /// `Q_h u`.
    pub fn project_qh(&self, u: &dyn Fn(crate::Vec2) -> f64) -> Result<WeakFunction> {
        wg::project_qh(self.mesh, &self.classification, self.degree, u)
    }

    /// Global `a(w, v)`, summed element by element in a fixed order.
    pub fn bilinear_form(&self, w: &WeakFunction, v: &WeakFunction) -> f64 {
        let parts: Vec<f64> = (0..self.mesh.num_elements())
            .into_par_iter()
            .map(|e| {
                let ctx = &self.contexts[e];
                let op = self.local_operator(e);
                ctx.gather(v).dot(&(&op.matrix * ctx.gather(w)))
            })
            .collect();
        parts.iter().sum()
    }

    /// Global `(f, v⁰)`.
    pub fn load(&self, v: &WeakFunction) -> f64 {
        let f = &self.problem.f;
        (0..self.mesh.num_elements())
            .map(|e| local_rhs(&self.contexts[e], &|p| f(p)).dot(&v.interior[e]))
            .sum()
    }

    pub fn assemble(&self) -> SparseSystem {
        let f = &self.problem.f;
        let locals: Vec<(LocalOperator, DVector<f64>)> = (0..self.mesh.num_elements())
            .into_par_iter()
            .map(|e| (self.local_operator(e), local_rhs(&self.contexts[e], &|p| f(p))))
            .collect();
        let n = self.dofmap.num_free;
        let mut rhs = vec![0.0; n];
        let mut triplets = Vec::new();
        for (op, load) in &locals {
            let dofs = self.dofmap.local_dofs(self.mesh, op.element);
            debug_assert_eq!(dofs.len(), op.matrix.nrows());
            for (r, dr) in dofs.iter().enumerate() {
                let GlobalDof::Free(gr) = *dr else { continue };
                if r < load.len() {
                    rhs[gr] += load[r];
                }
                for (c, dc) in dofs.iter().enumerate() {
                    let v = op.matrix[(r, c)];
                    if v == 0.0 {
                        continue;
                    }
                    match *dc {
                        GlobalDof::Free(gc) => triplets.push((gr, gc, v)),
                        GlobalDof::Fixed(x) => rhs[gr] -= v * x,
                    }
                }
            }
        }
        SparseSystem {
            matrix: CsrMatrix::from_triplets(n, n, &triplets),
            rhs,
            interior_blocks: self.dofmap.interior_blocks(),
        }
    }

    /// Assembles, solves and scatters into a weak function that includes the
    /// prescribed inflow traces.
    pub fn solve(&self) -> Result<WeakFunction> {
        let system = self.assemble();
        debug!(
            "{}: k = {}, {} unknowns, {} nonzeros",
            self.problem.name,
            self.degree,
            system.len(),
            system.matrix.nnz()
        );
        let x = solve(&system)?;
        Ok(self.dofmap.scatter(&x))
    }
}

/// Assembled system of `disc`.
pub fn assemble(disc: &Discretization<'_>) -> SparseSystem {
    disc.assemble()
}

/// Solves the WG scheme of degree `degree` with the default quadrature.
pub fn solve_problem(
    mesh: &PolygonalMesh,
    problem: &ProblemSpec,
    degree: usize,
) -> Result<WeakFunction> {
    Discretization::new(mesh, problem, degree)?.solve()
}
