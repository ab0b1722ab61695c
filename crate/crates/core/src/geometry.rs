//! Small planar geometry helpers shared by the mesh and quadrature code.

pub type Vec2 = nalgebra::Vector2<f64>;

#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Twice the signed area of the triangle (a, b, c); positive when counterclockwise.
#[inline]
pub fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    cross(b - a, c - a)
}

/// Signed area of a closed polygon (shoelace formula).
pub fn signed_area(points: &[Vec2]) -> f64 {
    let n = points.len();
    let mut twice = 0.0;
    for i in 0..n {
        twice += cross(points[i], points[(i + 1) % n]);
    }
    0.5 * twice
}

/// Area centroid of a polygon with nonzero signed area.
pub fn polygon_centroid(points: &[Vec2]) -> Vec2 {
    let n = points.len();
    // Shift to the first vertex for better conditioning on small elements.
    let origin = points[0];
    let mut acc = Vec2::zeros();
    let mut twice_area = 0.0;
    for i in 0..n {
        let p = points[i] - origin;
        let q = points[(i + 1) % n] - origin;
        let c = cross(p, q);
        twice_area += c;
        acc += (p + q) * c;
    }
    origin + acc / (3.0 * twice_area)
}

pub fn diameter(points: &[Vec2]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            d = d.max((p - q).norm());
        }
    }
    d
}

/// Whether the closed segments [a, b] and [c, d] share at least one point.
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let scale = (b - a).norm().max((d - c).norm());
    let tol = 1e-14 * scale * scale;
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol))
        && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))
    {
        return true;
    }
    let on = |p: Vec2, q: Vec2, r: Vec2, o: f64| {
        o.abs() <= tol
            && r.x >= p.x.min(q.x) - 1e-14 * scale
            && r.x <= p.x.max(q.x) + 1e-14 * scale
            && r.y >= p.y.min(q.y) - 1e-14 * scale
            && r.y <= p.y.max(q.y) + 1e-14 * scale
    };
    on(c, d, a, d1) || on(c, d, b, d2) || on(a, b, c, d3) || on(a, b, d, d4)
}

/// Distance from `p` to the segment [a, b].
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Point-in-polygon test that counts points on the boundary (within `tol`) as inside.
pub fn polygon_contains(points: &[Vec2], p: Vec2, tol: f64) -> bool {
    let n = points.len();
    for i in 0..n {
        if point_segment_distance(p, points[i], points[(i + 1) % n]) <= tol {
            return true;
        }
    }
    let mut winding = 0i32;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        if a.y <= p.y {
            if b.y > p.y && orient(a, b, p) > 0.0 {
                winding += 1;
            }
        } else if b.y <= p.y && orient(a, b, p) < 0.0 {
            winding -= 1;
        }
    }
    winding != 0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centroid_of_l_shape() {
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 2.0),
            Vec2::new(0.0, 2.0),
        ];
        assert!((signed_area(&pts) - 3.0).abs() < 1e-15);
        let c = polygon_centroid(&pts);
        assert!((c.x - 2.5 / 3.0).abs() < 1e-15);
        assert!((c.y - 2.5 / 3.0).abs() < 1e-15);
        assert!((diameter(&pts) - 8f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn segment_intersection_cases() {
        let v = Vec2::new;
        assert!(segments_intersect(v(0., 0.), v(1., 1.), v(0., 1.), v(1., 0.)));
        assert!(!segments_intersect(v(0., 0.), v(1., 0.), v(0., 1.), v(1., 1.)));
        // touching at an endpoint
        assert!(segments_intersect(v(0., 0.), v(1., 0.), v(1., 0.), v(2., 1.)));
        // collinear and disjoint
        assert!(!segments_intersect(v(0., 0.), v(1., 0.), v(2., 0.), v(3., 0.)));
    }

    #[test]
    fn containment_includes_boundary() {
        let sq = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(polygon_contains(&sq, Vec2::new(0.5, 0.5), 1e-14));
        assert!(polygon_contains(&sq, Vec2::new(1.0, 0.3), 1e-14));
        assert!(!polygon_contains(&sq, Vec2::new(1.2, 0.3), 1e-14));
    }
}
