#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wgtransport_core::problem::ProblemSpec;
use wgtransport_core::{Discretization, Vec2, WeakFunction};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random element of `V_h⁰` with coefficients in `[-1, 1]`.
pub fn random_homogeneous(disc: &Discretization<'_>, rng: &mut ChaCha8Rng) -> WeakFunction {
    let x: Vec<f64> = (0..disc.dofmap.num_free)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    disc.dofmap.scatter_homogeneous(&x)
}

/// `u = Σ c_ab x^a y^b` over `a + b ≤ k` with fixed nonzero coefficients.
pub fn polynomial(k: usize) -> (impl Fn(Vec2) -> f64 + Clone, impl Fn(Vec2) -> Vec2 + Clone) {
    let mut terms = Vec::new();
    for d in 0..=k as i32 {
        for a in (0..=d).rev() {
            let c = 0.7 - 0.3 * terms.len() as f64 + 0.11 * (a * a) as f64;
            terms.push((c, a, d - a));
        }
    }
    let t2 = terms.clone();
    let u = move |p: Vec2| {
        terms
            .iter()
            .map(|&(c, a, b)| c * p.x.powi(a) * p.y.powi(b))
            .sum::<f64>()
    };
    let g = move |p: Vec2| {
        t2.iter().fold(Vec2::zeros(), |acc, &(c, a, b)| {
            let dx = if a > 0 { c * a as f64 * p.x.powi(a - 1) * p.y.powi(b) } else { 0.0 };
            let dy = if b > 0 { c * b as f64 * p.x.powi(a) * p.y.powi(b - 1) } else { 0.0 };
            acc + Vec2::new(dx, dy)
        })
    };
    (u, g)
}

/// Manufactured problem with constant `β`, constant `α` and polynomial `u ∈ P_k`.
pub fn polynomial_problem(k: usize, beta: Vec2, alpha: f64) -> ProblemSpec {
    let (u, g) = polynomial(k);
    ProblemSpec::manufactured(
        format!("poly{k}"),
        Arc::new(move |_| beta),
        Arc::new(|_| 0.0),
        Arc::new(move |_| alpha),
        Arc::new(u),
        Arc::new(g),
        alpha,
    )
}

/// Largest `|u_h^b - u|` over the nodes of every interface carrying a trace.
pub fn max_trace_error(disc: &Discretization<'_>, u: &dyn Fn(Vec2) -> f64, uh: &WeakFunction) -> f64 {
    let mut m: f64 = 0.0;
    for (i, f) in disc.mesh.interfaces().iter().enumerate() {
        if uh.traces[i].is_none() {
            continue;
        }
        for (p, _) in f.quadrature(disc.quad_degree()).unwrap().rule.iter() {
            m = m.max((uh.eval_trace(disc.mesh, i, p) - u(p)).abs());
        }
    }
    m
}

/// Least-squares slope of `-log2(err)` against the level.
pub fn ls_slope(levels: &[usize], errs: &[f64]) -> f64 {
    let n = levels.len() as f64;
    let xs: Vec<f64> = levels.iter().map(|&l| l as f64).collect();
    let ys: Vec<f64> = errs.iter().map(|e| -e.log2()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Problem with explicit data and no exact solution; `∇·β` is supplied.
pub fn data_problem(
    beta: impl Fn(Vec2) -> Vec2 + Send + Sync + 'static,
    div_beta: f64,
    alpha: f64,
    f: impl Fn(Vec2) -> f64 + Send + Sync + 'static,
    g: impl Fn(Vec2) -> f64 + Send + Sync + 'static,
) -> ProblemSpec {
    ProblemSpec {
        name: "data".into(),
        beta: Arc::new(beta),
        alpha: Arc::new(move |_| alpha),
        f: Arc::new(f),
        g: Arc::new(g),
        u_exact: None,
        grad_u_exact: None,
        div_beta: Some(Arc::new(move |_| div_beta)),
        sigma0: alpha + 0.5 * div_beta,
        precise: None,
    }
}

/// Single-element mesh on the given counterclockwise polygon.
pub fn single_element(points: &[(f64, f64)]) -> wgtransport_core::PolygonalMesh {
    let vertices = points.iter().map(|&(x, y)| Vec2::new(x, y)).collect();
    wgtransport_core::PolygonalMesh::from_polygons(
        vertices,
        vec![(0..points.len()).collect()],
        |_, _, _| wgtransport_core::InterfaceTag::Boundary,
    )
    .unwrap()
}

pub const UNIT_SQUARE: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
