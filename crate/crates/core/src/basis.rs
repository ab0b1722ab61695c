//! Polynomial bases: scaled monomials on elements and Legendre polynomials on
//! interfaces.

use nalgebra::DMatrix;

use crate::geometry::Vec2;

/// Dimension of P_k in two variables.
pub fn dim_pk(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Scaled monomials `((x - x_K)/h_K)^a ((y - y_K)/h_K)^b`, `a + b ≤ k`,
/// ordered by total degree and then by decreasing power of x. The first
/// `dim_pk(k - 1)` functions therefore span P_{k-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementBasis {
    degree: usize,
    center: Vec2,
    scale: f64,
    exponents: Vec<(i32, i32)>,
}

impl ElementBasis {
    pub fn new(degree: usize, center: Vec2, scale: f64) -> Self {
        let mut exponents = Vec::with_capacity(dim_pk(degree));
        for d in 0..=degree as i32 {
            for a in (0..=d).rev() {
                exponents.push((a, d - a));
            }
        }
        ElementBasis {
            degree,
            center,
            scale,
            exponents,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn center(&self) -> Vec2 {
        self.center
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn exponents(&self) -> &[(i32, i32)] {
        &self.exponents
    }

    fn powers(&self, p: Vec2) -> (Vec<f64>, Vec<f64>) {
        let xi = (p.x - self.center.x) / self.scale;
        let eta = (p.y - self.center.y) / self.scale;
        let mut px = vec![1.0; self.degree + 1];
        let mut py = vec![1.0; self.degree + 1];
        for i in 1..=self.degree {
            px[i] = px[i - 1] * xi;
            py[i] = py[i - 1] * eta;
        }
        (px, py)
    }

    pub fn values_into(&self, p: Vec2, out: &mut [f64]) {
        let (px, py) = self.powers(p);
        for (o, &(a, b)) in out.iter_mut().zip(&self.exponents) {
            *o = px[a as usize] * py[b as usize];
        }
    }

    pub fn values(&self, p: Vec2) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.values_into(p, &mut out);
        out
    }

    /// Gradients including the `1/h_K` chain-rule factor.
    pub fn gradients_into(&self, p: Vec2, out: &mut [Vec2]) {
        let (px, py) = self.powers(p);
        let inv = 1.0 / self.scale;
        for (o, &(a, b)) in out.iter_mut().zip(&self.exponents) {
            let dx = if a > 0 {
                a as f64 * px[a as usize - 1] * py[b as usize]
            } else {
                0.0
            };
            let dy = if b > 0 {
                b as f64 * px[a as usize] * py[b as usize - 1]
            } else {
                0.0
            };
            *o = Vec2::new(dx * inv, dy * inv);
        }
    }

    pub fn gradients(&self, p: Vec2) -> Vec<Vec2> {
        let mut out = vec![Vec2::zeros(); self.dim()];
        self.gradients_into(p, &mut out);
        out
    }

    /// Values at every point: one row per point, one column per basis function.
    pub fn evaluate(&self, points: &[Vec2]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(points.len(), self.dim());
        let mut row = vec![0.0; self.dim()];
        for (i, p) in points.iter().enumerate() {
            self.values_into(*p, &mut row);
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    /// x- and y-derivatives at every point, laid out like [`Self::evaluate`].
    pub fn evaluate_gradient(&self, points: &[Vec2]) -> (DMatrix<f64>, DMatrix<f64>) {
        let mut dx = DMatrix::zeros(points.len(), self.dim());
        let mut dy = DMatrix::zeros(points.len(), self.dim());
        let mut row = vec![Vec2::zeros(); self.dim()];
        for (i, p) in points.iter().enumerate() {
            self.gradients_into(*p, &mut row);
            for (j, g) in row.iter().enumerate() {
                dx[(i, j)] = g.x;
                dy[(i, j)] = g.y;
            }
        }
        (dx, dy)
    }

    /// Evaluates `Σ c_j φ_j(p)`.
    pub fn eval_combination(&self, coeffs: &[f64], p: Vec2) -> f64 {
        let (px, py) = self.powers(p);
        coeffs
            .iter()
            .zip(&self.exponents)
            .map(|(c, &(a, b))| c * px[a as usize] * py[b as usize])
            .sum()
    }
}

/// Legendre polynomials `P_0..P_k` of the reference coordinate `s ∈ [-1, 1]`
/// running from the first endpoint of a segment to the second.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeBasis {
    degree: usize,
    start: Vec2,
    end: Vec2,
}

impl EdgeBasis {
    pub fn new(degree: usize, start: Vec2, end: Vec2) -> Self {
        EdgeBasis { degree, start, end }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    /// Reference coordinate of the orthogonal projection of `p` onto the segment line.
    pub fn param(&self, p: Vec2) -> f64 {
        let d = self.end - self.start;
        2.0 * (p - self.start).dot(&d) / d.norm_squared() - 1.0
    }

    pub fn values_at_param_into(&self, s: f64, out: &mut [f64]) {
        legendre_values(s, out);
    }

    pub fn values_at_param(&self, s: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        legendre_values(s, &mut out);
        out
    }

    pub fn values(&self, p: Vec2) -> Vec<f64> {
        self.values_at_param(self.param(p))
    }

    pub fn evaluate(&self, points: &[Vec2]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(points.len(), self.dim());
        let mut row = vec![0.0; self.dim()];
        for (i, p) in points.iter().enumerate() {
            legendre_values(self.param(*p), &mut row);
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn eval_combination_at_param(&self, coeffs: &[f64], s: f64) -> f64 {
        let mut vals = vec![0.0; coeffs.len()];
        legendre_values(s, &mut vals);
        coeffs.iter().zip(&vals).map(|(c, v)| c * v).sum()
    }
}

fn legendre_values(s: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = s;
    }
    for k in 2..out.len() {
        let kf = k as f64;
        out[k] = ((2.0 * kf - 1.0) * s * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
    }
}
