use nalgebra::{DMatrix, DVector};

use super::{ElementContext, LocalOperator, WeakFunction};
use crate::basis::{dim_pk, EdgeBasis, ElementBasis};
use crate::geometry::Vec2;
use crate::mesh::{FaceClassification, FaceInfo, FlowClass, PolygonalMesh};
use crate::{Result, WgError};

fn solve_spd(m: DMatrix<f64>, rhs: DMatrix<f64>, element: usize) -> Result<DMatrix<f64>> {
    match m.clone().cholesky() {
        Some(c) => Ok(c.solve(&rhs)),
        None => m
            .lu()
            .solve(&rhs)
            .ok_or(WgError::SingularLocalSystem { element }),
    }
}

/// Matrix `D` with `D · v_loc` = coefficients of `∇_w·(βv)` in `P_k(K)`:
/// `(∇_w·(βv), q)_K = -(v⁰, β·∇q)_K + ⟨β·n v^b, q⟩_{∂K}` for all `q ∈ P_k(K)`.
pub fn weak_divergence_matrix(ctx: &ElementContext) -> Result<DMatrix<f64>> {
    let b = divergence_moments(ctx);
    solve_spd(ctx.mass(), b, ctx.element)
}

/// `∇_w·(βv)` on the context's element.
pub fn weak_divergence(ctx: &ElementContext, v: &WeakFunction) -> Result<DVector<f64>> {
    Ok(weak_divergence_matrix(ctx)? * ctx.gather(v))
}

/// `B[i, ·] = -(v⁰, β·∇φ_i) + ⟨β·n v^b, φ_i⟩` for every local unknown.
fn divergence_moments(ctx: &ElementContext) -> DMatrix<f64> {
    let n0 = ctx.interior_dim();
    let nt = ctx.trace_dim();
    let mut b = DMatrix::zeros(n0, ctx.local_dim());
    for (q, w) in ctx.quad.weights.iter().enumerate() {
        let beta = ctx.beta[q];
        for i in 0..n0 {
            let bg = w * (beta.x * ctx.grad_x[(q, i)] + beta.y * ctx.grad_y[(q, i)]);
            for j in 0..n0 {
                b[(i, j)] -= bg * ctx.phi[(q, j)];
            }
        }
    }
    for (face, off) in ctx.faces.iter().zip(ctx.face_offsets()) {
        let Some(off) = off else { continue };
        for (q, w) in face.weights.iter().enumerate() {
            let wb = w * face.beta_n[q];
            for i in 0..n0 {
                let wi = wb * face.phi[(q, i)];
                for l in 0..nt {
                    b[(i, off + l)] += wi * face.psi[(q, l)];
                }
            }
        }
    }
    b
}

/// Local matrix of `a(w, v) = (∇_w·(βw), v⁰)_K + (αw⁰, v⁰)_K + s_K(w, v)` with
/// `s_K(w, v) = ⟨(β·n)₊ (w⁰ - w^b), v⁰ - v^b⟩_{∂K}` evaluated node by node.
///
/// The weak divergence is tested with `q = v⁰` directly, so no mass solve is
/// needed. On each face the trace couplings combine to
/// `⟨(β·n)₋ w^b, v⁰⟩ - ⟨(β·n)₊ w⁰, v^b⟩ + ⟨(β·n)₊ w^b, v^b⟩`.
pub fn local_bilinear(ctx: &ElementContext, alpha: &dyn Fn(Vec2) -> f64) -> LocalOperator {
    let n0 = ctx.interior_dim();
    let nt = ctx.trace_dim();
    let mut a = DMatrix::zeros(ctx.local_dim(), ctx.local_dim());
    for (q, (p, w)) in ctx.quad.iter().enumerate() {
        let wa = w * alpha(p);
        let beta = ctx.beta[q];
        for i in 0..n0 {
            let bg = w * (beta.x * ctx.grad_x[(q, i)] + beta.y * ctx.grad_y[(q, i)]);
            let wi = wa * ctx.phi[(q, i)];
            for j in 0..n0 {
                a[(i, j)] += (wi - bg) * ctx.phi[(q, j)];
            }
        }
    }
    for (face, off) in ctx.faces.iter().zip(ctx.face_offsets()) {
        for (q, w) in face.weights.iter().enumerate() {
            let bn = face.beta_n[q];
            let plus = w * bn.max(0.0);
            let minus = w * bn.min(0.0);
            for i in 0..n0 {
                let pi = plus * face.phi[(q, i)];
                if pi != 0.0 {
                    for j in 0..n0 {
                        a[(i, j)] += pi * face.phi[(q, j)];
                    }
                }
            }
            let Some(off) = off else { continue };
            for l in 0..nt {
                let psi = face.psi[(q, l)];
                for i in 0..n0 {
                    let phi = face.phi[(q, i)];
                    if minus != 0.0 {
                        a[(i, off + l)] += minus * psi * phi;
                    }
                    if plus != 0.0 {
                        a[(off + l, i)] -= plus * psi * phi;
                    }
                }
                if plus != 0.0 {
                    for m in 0..nt {
                        a[(off + l, off + m)] += plus * psi * face.psi[(q, m)];
                    }
                }
            }
        }
    }
    LocalOperator {
        element: ctx.element,
        live_interfaces: ctx.live_interfaces(),
        matrix: a,
    }
}

/// `(f, φ_i)_K` for the interior basis; trace test functions carry no load.
pub fn local_rhs(ctx: &ElementContext, f: &dyn Fn(Vec2) -> f64) -> DVector<f64> {
    let n0 = ctx.interior_dim();
    let mut b = DVector::zeros(n0);
    for (q, (p, w)) in ctx.quad.iter().enumerate() {
        let wf = w * f(p);
        for i in 0..n0 {
            b[i] += wf * ctx.phi[(q, i)];
        }
    }
    b
}

/// L2 projection `Q_0 u` onto `P_k(K)`.
pub fn project_q0(
    mesh: &PolygonalMesh,
    element: usize,
    degree: usize,
    quad_degree: usize,
    u: &dyn Fn(Vec2) -> f64,
) -> Result<DVector<f64>> {
    let el = mesh.element(element);
    let basis = ElementBasis::new(degree, el.centroid, el.diameter);
    let quad = mesh.element_quadrature(element, quad_degree)?;
    let n = basis.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut rhs = DMatrix::zeros(n, 1);
    let mut vals = vec![0.0; n];
    for (p, w) in quad.iter() {
        basis.values_into(p, &mut vals);
        let up = u(p);
        for i in 0..n {
            rhs[(i, 0)] += w * up * vals[i];
            for j in 0..n {
                m[(i, j)] += w * vals[i] * vals[j];
            }
        }
    }
    Ok(solve_spd(m, rhs, element)?.column(0).into_owned())
}

/// L2 projection `Q_b u` onto `P_k(e)`, in the interface's Legendre basis.
pub fn project_qb(
    mesh: &PolygonalMesh,
    interface: usize,
    degree: usize,
    quad_degree: usize,
    u: &dyn Fn(Vec2) -> f64,
) -> Result<DVector<f64>> {
    let f = mesh.interface(interface);
    // Legendre polynomials need at least k + 1 Gauss nodes to stay orthogonal.
    let eq = f.quadrature(quad_degree.max(2 * degree))?;
    let eb = EdgeBasis::new(degree, f.endpoints[0], f.endpoints[1]);
    let mut c = DVector::zeros(degree + 1);
    let mut vals = vec![0.0; degree + 1];
    for ((p, w), &s) in eq.rule.iter().zip(&eq.params) {
        eb.values_at_param_into(s, &mut vals);
        let up = u(p);
        for l in 0..=degree {
            c[l] += w * up * vals[l];
        }
    }
    for l in 0..=degree {
        // ∫_e P_l² ds = len / (2l + 1)
        c[l] *= (2 * l + 1) as f64 / f.length;
    }
    Ok(c)
}

/// `Q_h u = {Q_0 u, Q_b u}`; interfaces eliminated by `classification` get no trace.
pub fn project_qh(
    mesh: &PolygonalMesh,
    classification: &FaceClassification,
    degree: usize,
    u: &dyn Fn(Vec2) -> f64,
) -> Result<WeakFunction> {
    let qdeg = classification.quad_degree();
    let interior = (0..mesh.num_elements())
        .map(|e| project_q0(mesh, e, degree, qdeg, u))
        .collect::<Result<Vec<_>>>()?;
    let traces = (0..mesh.num_interfaces())
        .map(|i| {
            if classification.is_eliminated(i) {
                Ok(None)
            } else {
                project_qb(mesh, i, degree, qdeg, u).map(Some)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeakFunction {
        degree,
        interior,
        traces,
    })
}

/// The face `e_K^+` used by `P_h^+` on `element`.
///
/// The outflow (or mixed) face outside the near-characteristic set when there
/// is one. With several such faces the one with the largest `∫|β·n|` is used;
/// with none, the face with the largest `∫|β·n|` overall. Ties go to the
/// lowest interface id.
pub fn select_pplus_face(classification: &FaceClassification, element: usize) -> usize {
    let faces = classification.element_faces(element);
    let candidates: Vec<&FaceInfo> = faces
        .iter()
        .filter(|f| matches!(f.class, FlowClass::Outflow | FlowClass::Mixed) && !f.in_eh0)
        .collect();
    let pool: Vec<&FaceInfo> = if candidates.is_empty() {
        faces.iter().collect()
    } else {
        candidates
    };
    pool.into_iter()
        .max_by(|a, b| {
            a.abs_flux
                .total_cmp(&b.abs_flux)
                .then(b.interface.cmp(&a.interface))
        })
        .expect("element without faces")
        .interface
}

/// `P_h^+ u ∈ P_k(K)`: moments against `P_{k-1}(K)` on the element and
/// against `P_k(e)` on the selected face `face` match those of `u`.
pub fn project_pplus(
    mesh: &PolygonalMesh,
    element: usize,
    degree: usize,
    quad_degree: usize,
    face: usize,
    u: &dyn Fn(Vec2) -> f64,
) -> Result<DVector<f64>> {
    let el = mesh.element(element);
    if !el.interface_ids.contains(&face) {
        return Err(WgError::InvalidConfig(format!(
            "interface {face} does not border element {element}"
        )));
    }
    let basis = ElementBasis::new(degree, el.centroid, el.diameter);
    let n = basis.dim();
    // scaled monomials are ordered by total degree, so the first dim P_{k-1}
    // functions span P_{k-1}(K)
    let ni = if degree == 0 { 0 } else { dim_pk(degree - 1) };
    let mut m = DMatrix::zeros(n, n);
    let mut rhs = DMatrix::zeros(n, 1);
    let mut vals = vec![0.0; n];
    let quad = mesh.element_quadrature(element, quad_degree)?;
    for (p, w) in quad.iter() {
        basis.values_into(p, &mut vals);
        let up = u(p);
        for i in 0..ni {
            rhs[(i, 0)] += w * up * vals[i];
            for j in 0..n {
                m[(i, j)] += w * vals[i] * vals[j];
            }
        }
    }
    let f = mesh.interface(face);
    let eq = f.quadrature(quad_degree.max(2 * degree))?;
    let eb = EdgeBasis::new(degree, f.endpoints[0], f.endpoints[1]);
    let mut ev = vec![0.0; degree + 1];
    for ((p, w), &s) in eq.rule.iter().zip(&eq.params) {
        basis.values_into(p, &mut vals);
        eb.values_at_param_into(s, &mut ev);
        let up = u(p);
        for l in 0..=degree {
            rhs[(ni + l, 0)] += w * up * ev[l];
            for j in 0..n {
                m[(ni + l, j)] += w * ev[l] * vals[j];
            }
        }
    }
    let sol = m
        .lu()
        .solve(&rhs)
        .filter(|s: &DMatrix<f64>| s.iter().all(|v| v.is_finite()))
        .ok_or(WgError::SingularLocalSystem { element })?;
    Ok(sol.column(0).into_owned())
}
