//! Gauss rules on segments, triangles and arbitrary simple polygons.

use crate::geometry::{orient, polygon_centroid, signed_area, Vec2};
use crate::{Result, WgError};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<Vec2>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn(Vec2) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(*p))
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec2, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// A segment rule that also remembers the reference coordinate `s ∈ [-1, 1]`
/// of every node, measured from the first endpoint to the second.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeQuadrature {
    pub rule: QuadratureRule,
    pub params: Vec<f64>,
}

/// Gauss-Legendre nodes and weights on [-1, 1], exact for degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "a Gauss rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Number of Gauss points needed on a segment to integrate degree `degree` exactly.
pub fn gauss_points_for_degree(degree: usize) -> usize {
    degree / 2 + 1
}

/// Gauss-Legendre rule on the segment from `a` to `b`, exact for polynomials of
/// total degree `degree` along the segment.
pub fn edge_quadrature(a: Vec2, b: Vec2, degree: usize) -> Result<EdgeQuadrature> {
    let len = (b - a).norm();
    if len <= 0.0 || !len.is_finite() {
        return Err(WgError::DegenerateGeometry(format!(
            "zero-length segment ({}, {})-({}, {})",
            a.x, a.y, b.x, b.y
        )));
    }
    let (s, w) = gauss_legendre(gauss_points_for_degree(degree));
    let mid = (a + b) * 0.5;
    let half = (b - a) * 0.5;
    let points = s.iter().map(|&t| mid + half * t).collect();
    let weights = w.iter().map(|&wi| wi * 0.5 * len).collect();
    Ok(EdgeQuadrature {
        rule: QuadratureRule { points, weights },
        params: s,
    })
}

/// Collapsed-coordinate Gauss rule on a counterclockwise triangle.
fn triangle_rule_into(a: Vec2, b: Vec2, c: Vec2, degree: usize, out: &mut QuadratureRule) {
    let twice_area = orient(a, b, c);
    // The collapsed Jacobian adds one degree in the radial direction.
    let n = gauss_points_for_degree(degree + 1);
    let (s, w) = gauss_legendre(n);
    for (su, wu) in s.iter().zip(&w) {
        let u = 0.5 * (su + 1.0);
        for (sv, wv) in s.iter().zip(&w) {
            let v = 0.5 * (sv + 1.0);
            let p = a + (b - a) * u + (c - b) * (u * v);
            out.points.push(p);
            out.weights.push(0.25 * wu * wv * u * twice_area);
        }
    }
}

pub fn triangle_quadrature(a: Vec2, b: Vec2, c: Vec2, degree: usize) -> Result<QuadratureRule> {
    if orient(a, b, c) <= 0.0 {
        return Err(WgError::DegenerateGeometry(
            "triangle is degenerate or clockwise".into(),
        ));
    }
    let mut rule = QuadratureRule {
        points: Vec::new(),
        weights: Vec::new(),
    };
    triangle_rule_into(a, b, c, degree, &mut rule);
    Ok(rule)
}

/// Quadrature on a simple counterclockwise polygon, exact for bivariate
/// polynomials of total degree `degree`.
///
/// Collinear (180°) vertices are dropped first. Triangles are integrated
/// directly, star-shaped polygons by a fan from the area centroid, anything
/// else through an ear-clipping triangulation. All weights are positive.
pub fn polygon_quadrature(polygon: &[Vec2], degree: usize) -> Result<QuadratureRule> {
    let area = if polygon.len() >= 3 {
        signed_area(polygon)
    } else {
        0.0
    };
    if area <= 0.0 || !area.is_finite() {
        return Err(WgError::DegenerateGeometry(format!(
            "polygon with {} vertices has non-positive area {area:e}",
            polygon.len()
        )));
    }
    let pts = strip_collinear(polygon);
    let mut rule = QuadratureRule {
        points: Vec::new(),
        weights: Vec::new(),
    };
    if pts.len() == 3 {
        triangle_rule_into(pts[0], pts[1], pts[2], degree, &mut rule);
        return Ok(rule);
    }
    let c = polygon_centroid(&pts);
    let n = pts.len();
    let star = (0..n).all(|i| orient(c, pts[i], pts[(i + 1) % n]) > 1e-14 * area);
    if star {
        for i in 0..n {
            triangle_rule_into(c, pts[i], pts[(i + 1) % n], degree, &mut rule);
        }
    } else {
        for [a, b, d] in ear_clip(&pts)? {
            triangle_rule_into(a, b, d, degree, &mut rule);
        }
    }
    Ok(rule)
}

fn strip_collinear(polygon: &[Vec2]) -> Vec<Vec2> {
    let n = polygon.len();
    let scale = polygon
        .iter()
        .map(|p| (p - polygon[0]).norm())
        .fold(0.0, f64::max);
    let tol = 1e-13 * scale * scale;
    let kept: Vec<Vec2> = (0..n)
        .filter(|&i| {
            let prev = polygon[(i + n - 1) % n];
            let next = polygon[(i + 1) % n];
            orient(prev, polygon[i], next).abs() > tol
        })
        .map(|i| polygon[i])
        .collect();
    if kept.len() >= 3 {
        kept
    } else {
        polygon.to_vec()
    }
}

fn ear_clip(polygon: &[Vec2]) -> Result<Vec<[Vec2; 3]>> {
    let mut idx: Vec<usize> = (0..polygon.len()).collect();
    let mut tris = Vec::with_capacity(polygon.len() - 2);
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let (ia, ib, ic) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (polygon[ia], polygon[ib], polygon[ic]);
            if orient(a, b, c) <= 0.0 {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                j != ia
                    && j != ib
                    && j != ic
                    && orient(a, b, polygon[j]) >= 0.0
                    && orient(b, c, polygon[j]) >= 0.0
                    && orient(c, a, polygon[j]) >= 0.0
            });
            if !blocked {
                tris.push([a, b, c]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            return Err(WgError::DegenerateGeometry(
                "ear clipping failed; polygon is not simple".into(),
            ));
        }
    }
    tris.push([polygon[idx[0]], polygon[idx[1]], polygon[idx[2]]]);
    Ok(tris)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exact ∫ x^a y^b over a polygon via the divergence theorem; each edge
    /// integral is expanded binomially in the edge parameter.
    fn exact_monomial(polygon: &[Vec2], a: u32, b: u32) -> f64 {
        fn binom(n: u32, k: u32) -> f64 {
            (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        }
        let n = polygon.len();
        let mut total = 0.0;
        for i in 0..n {
            let p = polygon[i];
            let q = polygon[(i + 1) % n];
            let d = q - p;
            // ∫_0^1 (p.x + t d.x)^(a+1) (p.y + t d.y)^b d.y dt
            let mut s = 0.0;
            for i1 in 0..=a + 1 {
                for i2 in 0..=b {
                    let coef = binom(a + 1, i1)
                        * binom(b, i2)
                        * p.x.powi((a + 1 - i1) as i32)
                        * d.x.powi(i1 as i32)
                        * p.y.powi((b - i2) as i32)
                        * d.y.powi(i2 as i32);
                    s += coef / (i1 + i2 + 1) as f64;
                }
            }
            total += s * d.y;
        }
        total / (a + 1) as f64
    }

    fn unit_square() -> Vec<Vec2> {
        vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ]
    }

    fn l_hexagon() -> Vec<Vec2> {
        vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 2.0),
            Vec2::new(0.0, 2.0),
        ]
    }

    #[test]
    fn gauss_legendre_weights_and_exactness() {
        for n in 1..=10 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            assert!(w.iter().all(|&wi| wi > 0.0));
            for p in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(p as i32)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn square_examples() {
        let r = polygon_quadrature(&unit_square(), 2).unwrap();
        assert!((r.integrate(|_| 1.0) - 1.0).abs() < 1e-15);
        assert!((r.integrate(|p| p.x * p.y) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn l_shaped_hexagon_first_moment() {
        // two rectangles [0,2]x[0,1] and [0,1]x[1,2]: ∫x = 2 + 0.5
        let r = polygon_quadrature(&l_hexagon(), 1).unwrap();
        assert!((r.integrate(|p| p.x) - 2.5).abs() < 1e-14);
        assert!((r.measure() - 3.0).abs() < 3e-13);
    }

    #[test]
    fn non_star_polygon_uses_ear_clipping() {
        // A comb whose centroid does not see every edge.
        let comb = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(3.0, 0.0),
            Vec2::new(3.0, 3.0),
            Vec2::new(2.0, 3.0),
            Vec2::new(2.0, 0.5),
            Vec2::new(1.0, 0.5),
            Vec2::new(1.0, 3.0),
            Vec2::new(0.0, 3.0),
        ];
        let r = polygon_quadrature(&comb, 4).unwrap();
        for (a, b) in [(0, 0), (1, 0), (2, 2), (0, 4), (3, 1)] {
            let exact = exact_monomial(&comb, a, b);
            let got = r.integrate(|p| p.x.powi(a as i32) * p.y.powi(b as i32));
            assert!((got - exact).abs() <= 1e-12 * exact.abs().max(1.0), "{a} {b}");
        }
        assert!(r.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn collinear_vertex_is_harmless() {
        let pent = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.5, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let r = polygon_quadrature(&pent, 3).unwrap();
        assert!((r.integrate(|p| p.x * p.x * p.y) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn edge_examples() {
        let e = edge_quadrature(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), 2).unwrap();
        assert!((e.rule.integrate(|_| 1.0) - 1.0).abs() < 1e-15);
        assert!((e.rule.integrate(|p| p.x * p.x) - 1.0 / 3.0).abs() < 1e-15);
        let e = edge_quadrature(Vec2::new(0.0, 0.0), Vec2::new(0.0, 2.0), 1).unwrap();
        assert!((e.rule.integrate(|p| p.y) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let p = Vec2::new(0.3, 0.3);
        assert!(edge_quadrature(p, p, 3).is_err());
        let line = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)];
        assert!(polygon_quadrature(&line, 2).is_err());
    }

    proptest! {
        #[test]
        fn polygon_rule_is_exact_for_random_polynomials(
            degree in 0usize..9,
            coeffs in proptest::collection::vec(-1.0f64..1.0, 45),
            shift in (-2.0f64..2.0, -2.0f64..2.0),
            which in 0usize..3,
        ) {
            let base = match which { 0 => unit_square(), 1 => l_hexagon(), _ => vec![
                Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.2), Vec2::new(0.6, 0.9)] };
            let poly: Vec<Vec2> = base.iter().map(|p| p + Vec2::new(shift.0, shift.1)).collect();
            let rule = polygon_quadrature(&poly, degree).unwrap();
            let mut terms = Vec::new();
            for d in 0..=degree as u32 { for a in (0..=d).rev() { terms.push((a, d - a)); } }
            let mut exact = 0.0;
            let mut scale = 0.0;
            for (c, &(a, b)) in coeffs.iter().zip(&terms) {
                let m = exact_monomial(&poly, a, b);
                exact += c * m;
                scale += (c * m).abs();
            }
            let got = rule.integrate(|p| coeffs.iter().zip(&terms)
                .map(|(c, &(a, b))| c * p.x.powi(a as i32) * p.y.powi(b as i32)).sum());
            prop_assert!((got - exact).abs() <= 1e-12 * scale.max(1.0));
            let area = signed_area(&poly);
            prop_assert!((rule.measure() - area).abs() <= 1e-13 * area);
        }
    }
}
