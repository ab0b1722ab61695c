//! Error norms, the energy norm, derivative recovery and the consistency
//! terms of the error equation.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::assembly::Discretization;
use crate::dd::Dd;
use crate::geometry::Vec2;
use crate::mesh::{FaceClassification, PolygonalMesh};
use crate::problem::ProblemSpec;
use crate::wg::{project_pplus, project_q0, select_pplus_face, ElementContext, WeakFunction};
use crate::{Result, WgError};

/// Errors of one solve. `energy_plus` is `None` when it was not requested.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// `‖u - u_h⁰‖`.
    pub l2_interior: f64,
    /// `|||Q_h u - u_h|||`.
    pub energy: f64,
    /// `|||Q_h^+ u - u_h|||` with `Q_h^+ u = {P_h^+ u, Q_b u}`.
    pub energy_plus: Option<f64>,
    /// `‖∂_β u - R_h‖`.
    pub recovery: f64,
}

/// `log2(coarse / fine)`.
pub fn rate(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

fn interior_values(ctx: &ElementContext, coeffs: &DVector<f64>) -> DVector<f64> {
    &ctx.phi * coeffs
}

/// `‖u - u_h⁰‖` with a rule of degree `quad_degree`.
pub fn l2_error(
    mesh: &PolygonalMesh,
    u: &(dyn Fn(Vec2) -> f64 + Sync),
    uh: &WeakFunction,
    quad_degree: usize,
) -> Result<f64> {
    let parts = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let q = mesh.element_quadrature(e, quad_degree)?;
            Ok(q.iter()
                .map(|(p, w)| w * (u(p) - uh.eval_interior(mesh, e, p)).powi(2))
                .sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(parts.iter().sum::<f64>().sqrt())
}

/// Per-element contributions to `|||v|||²`:
/// `(σv⁰, v⁰)_K + ½⟨|β·n|(v⁰ - v^b)², 1⟩_{∂K} + ½⟨(β·n)₊ (v^b)², 1⟩_{∂K ∩ ∂Ω}`,
/// with `σ = α + ½∇·β` and `v^b = 0` on eliminated interfaces.
fn energy_parts(disc: &Discretization<'_>, v: &WeakFunction) -> Vec<f64> {
    let problem = disc.problem;
    (0..disc.mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let ctx = disc.context(e);
            let h = disc.mesh.element(e).diameter;
            let v0 = interior_values(ctx, &v.interior[e]);
            let mut sum = 0.0;
            for (q, (p, w)) in ctx.quad.iter().enumerate() {
                sum += w * problem.sigma_at(p, h) * v0[q] * v0[q];
            }
            for face in &ctx.faces {
                let v0f = &face.phi * &v.interior[e];
                let vbf = match &v.traces[face.interface] {
                    Some(t) if face.live => &face.psi * t,
                    _ => DVector::zeros(face.weights.len()),
                };
                let boundary = disc.mesh.interface(face.interface).is_boundary();
                for (q, w) in face.weights.iter().enumerate() {
                    let bn = face.beta_n[q];
                    let jump = v0f[q] - vbf[q];
                    sum += 0.5 * w * bn.abs() * jump * jump;
                    if boundary && bn > 0.0 {
                        sum += 0.5 * w * bn * vbf[q] * vbf[q];
                    }
                }
            }
            sum
        })
        .collect()
}

/// `|||v|||`.
pub fn energy_norm(disc: &Discretization<'_>, v: &WeakFunction) -> f64 {
    energy_parts(disc, v).iter().sum::<f64>().max(0.0).sqrt()
}

/// `‖f‖` with the discretization's quadrature.
pub fn source_norm(disc: &Discretization<'_>) -> f64 {
    let f = &disc.problem.f;
    disc.contexts()
        .iter()
        .map(|ctx| ctx.quad.iter().map(|(p, w)| w * f(p).powi(2)).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

/// The recovered streamline derivative `R_h = f - (α + ∇·β) u_h⁰`, evaluated
/// element by element.
pub struct RecoveredDerivative<'a> {
    mesh: &'a PolygonalMesh,
    problem: &'a ProblemSpec,
    uh: &'a WeakFunction,
}

impl RecoveredDerivative<'_> {
    pub fn value(&self, element: usize, p: Vec2) -> f64 {
        let h = self.mesh.element(element).diameter;
        let c = (self.problem.alpha)(p) + self.problem.div_beta_at(p, h);
        (self.problem.f)(p) - c * self.uh.eval_interior(self.mesh, element, p)
    }
}

pub fn recover_derivative<'a>(
    mesh: &'a PolygonalMesh,
    problem: &'a ProblemSpec,
    uh: &'a WeakFunction,
) -> RecoveredDerivative<'a> {
    RecoveredDerivative { mesh, problem, uh }
}

/// `‖u - u_h⁰‖` with the integrand formed in double-double arithmetic.
pub fn l2_error_precise(
    mesh: &PolygonalMesh,
    u: &(dyn Fn(Vec2) -> Dd + Sync),
    uh: &WeakFunction,
    quad_degree: usize,
) -> Result<f64> {
    let parts = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let q = mesh.element_quadrature(e, quad_degree)?;
            Ok(q.iter()
                .map(|(p, w)| w * (u(p) - uh.eval_interior(mesh, e, p)).to_f64().powi(2))
                .sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(parts.iter().sum::<f64>().sqrt())
}

/// `‖∂_β u - R_h‖`; uses the problem's double-double data when available.
pub fn recovery_error(disc: &Discretization<'_>, uh: &WeakFunction) -> Result<f64> {
    let problem = disc.problem;
    if problem.grad_u_exact.is_none() {
        return Err(WgError::InvalidProblem(format!(
            "{}: recovery error needs the exact gradient",
            problem.name
        )));
    }
    let rec = recover_derivative(disc.mesh, problem, uh);
    let parts: Vec<f64> = (0..disc.mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let h = disc.mesh.element(e).diameter;
            disc.context(e)
                .quad
                .iter()
                .map(|(p, w)| {
                    let d = match &problem.precise {
                        Some(pd) => {
                            let c = (problem.alpha)(p) + problem.div_beta_at(p, h);
                            let r = (pd.f)(p) - Dd::prod(c, uh.eval_interior(disc.mesh, e, p));
                            ((pd.streamline_derivative)(p) - r).to_f64()
                        }
                        None => problem.streamline_derivative(p).unwrap() - rec.value(e, p),
                    };
                    w * d * d
                })
                .sum::<f64>()
        })
        .collect();
    Ok(parts.iter().sum::<f64>().sqrt())
}

/// `Q_h^+ u = {P_h^+ u, Q_b u}`.
pub fn project_qh_plus(
    disc: &Discretization<'_>,
    u: &dyn Fn(Vec2) -> f64,
) -> Result<WeakFunction> {
    let mut w = disc.project_qh(u)?;
    for e in 0..disc.mesh.num_elements() {
        let face = select_pplus_face(&disc.classification, e);
        w.interior[e] =
            project_pplus(disc.mesh, e, disc.degree, disc.quad_degree(), face, u)?;
    }
    Ok(w)
}

/// All error measures of `uh`; `with_plus` adds `|||Q_h^+ u - u_h|||`.
pub fn error_report(
    disc: &Discretization<'_>,
    uh: &WeakFunction,
    with_plus: bool,
) -> Result<ErrorReport> {
    let problem = disc.problem;
    let Some(u) = problem.u_exact.as_ref() else {
        return Err(WgError::InvalidProblem(format!(
            "{}: error report needs an exact solution",
            problem.name
        )));
    };
    let u = |p: Vec2| u(p);
    let l2 = match &problem.precise {
        Some(pd) => l2_error_precise(disc.mesh, &|p| (pd.u)(p), uh, disc.quad_degree())?,
        None => l2_error(disc.mesh, &u, uh, disc.quad_degree())?,
    };
    let qh = disc.project_qh(&u)?;
    let energy = energy_norm(disc, &qh.sub(uh));
    let energy_plus = if with_plus {
        Some(energy_norm(disc, &project_qh_plus(disc, &u)?.sub(uh)))
    } else {
        None
    };
    Ok(ErrorReport {
        l2_interior: l2,
        energy,
        energy_plus,
        recovery: recovery_error(disc, uh)?,
    })
}

/// The terms of `a(Q_h u - u_h, v) = l₁ - l₂ + l₃ + s(Q_h u, v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyTerms {
    /// `(u - Q_0 u, β·∇v⁰)`.
    pub l1: f64,
    /// `⟨β·n (u - Q_b u), v⁰ - v^b⟩_{∂T_h} + ⟨β·n (u - Q_b u), v^b⟩_{∂Ω₊}`.
    pub l2: f64,
    /// `(α (Q_0 u - u), v⁰)`.
    pub l3: f64,
    /// `s(Q_h u, v)`.
    pub s: f64,
}

impl ConsistencyTerms {
    pub fn combined(&self) -> f64 {
        self.l1 - self.l2 + self.l3 + self.s
    }
}

/// Evaluates the consistency terms for `u` with `qhu = Q_h u`.
pub fn consistency_terms(
    disc: &Discretization<'_>,
    u: &(dyn Fn(Vec2) -> f64 + Sync),
    qhu: &WeakFunction,
    v: &WeakFunction,
) -> ConsistencyTerms {
    let alpha = &disc.problem.alpha;
    let parts: Vec<[f64; 4]> = (0..disc.mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let ctx = disc.context(e);
            let q0 = interior_values(ctx, &qhu.interior[e]);
            let v0 = interior_values(ctx, &v.interior[e]);
            let bgrad = {
                let gx = &ctx.grad_x * &v.interior[e];
                let gy = &ctx.grad_y * &v.interior[e];
                (0..ctx.quad.len())
                    .map(|q| ctx.beta[q].x * gx[q] + ctx.beta[q].y * gy[q])
                    .collect::<Vec<_>>()
            };
            let (mut l1, mut l2, mut l3, mut s) = (0.0, 0.0, 0.0, 0.0);
            for (q, (p, w)) in ctx.quad.iter().enumerate() {
                let up = u(p);
                l1 += w * (up - q0[q]) * bgrad[q];
                l3 += w * alpha(p) * (q0[q] - up) * v0[q];
            }
            for face in &ctx.faces {
                let zeros = || DVector::zeros(face.weights.len());
                let trace = |f: &WeakFunction| match &f.traces[face.interface] {
                    Some(t) if face.live => &face.psi * t,
                    _ => zeros(),
                };
                let qb = trace(qhu);
                let vb = trace(v);
                let q0f = &face.phi * &qhu.interior[e];
                let v0f = &face.phi * &v.interior[e];
                let boundary = disc.mesh.interface(face.interface).is_boundary();
                for (q, w) in face.weights.iter().enumerate() {
                    let bn = face.beta_n[q];
                    let du = u(face.points[q]) - qb[q];
                    l2 += w * bn * du * (v0f[q] - vb[q]);
                    if boundary && bn > 0.0 {
                        l2 += w * bn * du * vb[q];
                    }
                    s += w * bn.max(0.0) * (q0f[q] - qb[q]) * (v0f[q] - vb[q]);
                }
            }
            [l1, l2, l3, s]
        })
        .collect();
    let mut t = [0.0; 4];
    for p in &parts {
        for i in 0..4 {
            t[i] += p[i];
        }
    }
    ConsistencyTerms {
        l1: t[0],
        l2: t[1],
        l3: t[2],
        s: t[3],
    }
}

/// `s(w, v)` on the whole mesh.
pub fn stabilizer(disc: &Discretization<'_>, w: &WeakFunction, v: &WeakFunction) -> f64 {
    let mut total = 0.0;
    for e in 0..disc.mesh.num_elements() {
        let ctx = disc.context(e);
        for face in &ctx.faces {
            let tr = |f: &WeakFunction| match &f.traces[face.interface] {
                Some(t) if face.live => &face.psi * t,
                _ => DVector::zeros(face.weights.len()),
            };
            let (wb, vb) = (tr(w), tr(v));
            let w0 = &face.phi * &w.interior[e];
            let v0 = &face.phi * &v.interior[e];
            for (q, wt) in face.weights.iter().enumerate() {
                total += wt * face.beta_n[q].max(0.0) * (w0[q] - wb[q]) * (v0[q] - vb[q]);
            }
        }
    }
    total
}

/// `‖u - Q_0 u‖` over the mesh.
pub fn q0_error(
    mesh: &PolygonalMesh,
    u: &(dyn Fn(Vec2) -> f64 + Sync),
    degree: usize,
    quad_degree: usize,
) -> Result<f64> {
    let parts = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let c = project_q0(mesh, e, degree, quad_degree, u)?;
            let el = mesh.element(e);
            let b = crate::basis::ElementBasis::new(degree, el.centroid, el.diameter);
            let q = mesh.element_quadrature(e, quad_degree)?;
            Ok(q.iter()
                .map(|(p, w)| w * (u(p) - b.eval_combination(c.as_slice(), p)).powi(2))
                .sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(parts.iter().sum::<f64>().sqrt())
}

/// `(Σ_K (‖u - P_h^+ u‖_K + h_K^{1/2} ‖u - P_h^+ u‖_{∂K})²)^{1/2}`.
pub fn pplus_error(
    mesh: &PolygonalMesh,
    classification: &FaceClassification,
    u: &(dyn Fn(Vec2) -> f64 + Sync),
    degree: usize,
) -> Result<f64> {
    let qdeg = classification.quad_degree();
    let parts = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let face = select_pplus_face(classification, e);
            let c = project_pplus(mesh, e, degree, qdeg, face, u)?;
            let el = mesh.element(e);
            let b = crate::basis::ElementBasis::new(degree, el.centroid, el.diameter);
            let err = |p: Vec2| u(p) - b.eval_combination(c.as_slice(), p);
            let vol: f64 = mesh
                .element_quadrature(e, qdeg)?
                .iter()
                .map(|(p, w)| w * err(p).powi(2))
                .sum();
            let mut bnd = 0.0;
            for &i in &el.interface_ids {
                bnd += mesh
                    .interface(i)
                    .quadrature(qdeg)?
                    .rule
                    .iter()
                    .map(|(p, w)| w * err(p).powi(2))
                    .sum::<f64>();
            }
            Ok((vol.sqrt() + el.diameter.sqrt() * bnd.sqrt()).powi(2))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(parts.iter().sum::<f64>().sqrt())
}
