//! Transport-reaction problem data and the built-in benchmark problems.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::dd::Dd;
use crate::geometry::Vec2;
use crate::{Result, WgError};

pub type ScalarField = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>;
pub type PreciseField = Arc<dyn Fn(Vec2) -> Dd + Send + Sync>;

/// Double-double versions of the exact data of a manufactured problem. When
/// present, error norms are evaluated with them.
#[derive(Clone)]
pub struct PreciseData {
    pub u: PreciseField,
    /// `∂_β u = β·∇u`.
    pub streamline_derivative: PreciseField,
    pub f: PreciseField,
}

/// Data of `∇·(βu) + αu = f` in Ω with `u = g` on the inflow boundary.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub beta: VectorField,
    pub alpha: ScalarField,
    pub f: ScalarField,
    pub g: ScalarField,
    pub u_exact: Option<ScalarField>,
    pub grad_u_exact: Option<VectorField>,
    pub div_beta: Option<ScalarField>,
    /// Lower bound of `σ = α + ½∇·β`.
    pub sigma0: f64,
    pub precise: Option<PreciseData>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("has_exact", &self.u_exact.is_some())
            .field("sigma0", &self.sigma0)
            .field("has_precise", &self.precise.is_some())
            .finish()
    }
}

fn scalar(f: impl Fn(Vec2) -> f64 + Send + Sync + 'static) -> ScalarField {
    Arc::new(f)
}

fn vector(f: impl Fn(Vec2) -> Vec2 + Send + Sync + 'static) -> VectorField {
    Arc::new(f)
}

impl ProblemSpec {
    /// Manufactured problem: `f` and `g` are derived from `u` and `∇u`.
    pub fn manufactured(
        name: impl Into<String>,
        beta: VectorField,
        div_beta: ScalarField,
        alpha: ScalarField,
        u: ScalarField,
        grad_u: VectorField,
        sigma0: f64,
    ) -> Self {
        let f = {
            let (beta, div_beta, alpha, u, grad_u) =
                (beta.clone(), div_beta.clone(), alpha.clone(), u.clone(), grad_u.clone());
            scalar(move |p| beta(p).dot(&grad_u(p)) + (div_beta(p) + alpha(p)) * u(p))
        };
        ProblemSpec {
            name: name.into(),
            beta,
            alpha,
            f,
            g: u.clone(),
            u_exact: Some(u),
            grad_u_exact: Some(grad_u),
            div_beta: Some(div_beta),
            sigma0,
            precise: None,
        }
    }

    /// `∇·β` at `p`, analytic when available, otherwise a central difference
    /// with step `1e-6 · h`.
    pub fn div_beta_at(&self, p: Vec2, h: f64) -> f64 {
        if let Some(d) = &self.div_beta {
            return d(p);
        }
        let s = 1e-6 * h;
        let ex = Vec2::new(s, 0.0);
        let ey = Vec2::new(0.0, s);
        ((self.beta)(p + ex).x - (self.beta)(p - ex).x + (self.beta)(p + ey).y
            - (self.beta)(p - ey).y)
            / (2.0 * s)
    }

    pub fn sigma_at(&self, p: Vec2, h: f64) -> f64 {
        (self.alpha)(p) + 0.5 * self.div_beta_at(p, h)
    }

    /// `∂_β u = β·∇u`, when the exact gradient is known.
    pub fn streamline_derivative(&self, p: Vec2) -> Option<f64> {
        self.grad_u_exact.as_ref().map(|g| (self.beta)(p).dot(&g(p)))
    }

    /// Checks `σ ≥ σ₀` and, for manufactured problems, that `f` matches
    /// `∇·(βu) + αu` and `∇u` matches central differences of `u`.
    pub fn self_check(&self, samples: &[Vec2]) -> Result<()> {
        if !(self.sigma0 >= 0.0) {
            return Err(WgError::InvalidProblem(format!(
                "{}: sigma0 must be nonnegative",
                self.name
            )));
        }
        for &p in samples {
            let sigma = self.sigma_at(p, 1.0);
            if sigma < self.sigma0 * (1.0 - 1e-12) {
                return Err(WgError::InvalidProblem(format!(
                    "{}: sigma({}, {}) = {sigma} < sigma0 = {}",
                    self.name, p.x, p.y, self.sigma0
                )));
            }
        }
        let (Some(u), Some(grad)) = (&self.u_exact, &self.grad_u_exact) else {
            return Ok(());
        };
        let step = 1e-5;
        for &p in samples {
            let g = grad(p);
            let fd = Vec2::new(
                (u(p + Vec2::new(step, 0.0)) - u(p - Vec2::new(step, 0.0))) / (2.0 * step),
                (u(p + Vec2::new(0.0, step)) - u(p - Vec2::new(0.0, step))) / (2.0 * step),
            );
            if (g - fd).norm() > 1e-6 * g.norm().max(1.0) {
                return Err(WgError::InvalidProblem(format!(
                    "{}: exact gradient disagrees with finite differences at ({}, {})",
                    self.name, p.x, p.y
                )));
            }
            let b = (self.beta)(p);
            let expected = self.div_beta_at(p, 1.0) * u(p) + b.dot(&g) + (self.alpha)(p) * u(p);
            let got = (self.f)(p);
            if (got - expected).abs() > 1e-10 * expected.abs().max(1.0) {
                return Err(WgError::InvalidProblem(format!(
                    "{}: f({}, {}) = {got} but div(beta u) + alpha u = {expected}",
                    self.name, p.x, p.y
                )));
            }
            if let Some(pd) = &self.precise {
                let pairs = [
                    ((pd.u)(p), u(p), "u"),
                    ((pd.streamline_derivative)(p), b.dot(&g), "streamline derivative"),
                    ((pd.f)(p), got, "f"),
                ];
                for (hp, lp, what) in pairs {
                    if (hp.to_f64() - lp).abs() > 1e-13 * lp.abs().max(1.0) {
                        return Err(WgError::InvalidProblem(format!(
                            "{}: extended-precision {what} disagrees at ({}, {})",
                            self.name, p.x, p.y
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `u = e^{xy}`, `β = (1, 0)`, `α = 2` on the unit square.
pub fn example1() -> ProblemSpec {
    let mut p = ProblemSpec::manufactured(
        "example1",
        vector(|_| Vec2::new(1.0, 0.0)),
        scalar(|_| 0.0),
        scalar(|_| 2.0),
        scalar(|p| (p.x * p.y).exp()),
        vector(|p| {
            let e = (p.x * p.y).exp();
            Vec2::new(p.y * e, p.x * e)
        }),
        2.0,
    );
    p.f = scalar(|p| (p.y + 2.0) * (p.x * p.y).exp());
    let e = |p: Vec2| Dd::prod(p.x, p.y).exp();
    p.precise = Some(PreciseData {
        u: Arc::new(e),
        streamline_derivative: Arc::new(move |p| p.y * e(p)),
        f: Arc::new(move |p| (Dd::sum(p.y, 2.0)) * e(p)),
    });
    p
}

/// `u = sin 4x sin 4y`, `β = (1, 1)`, `α = 1` on the unit square.
pub fn example2() -> ProblemSpec {
    let mut p = ProblemSpec::manufactured(
        "example2",
        vector(|_| Vec2::new(1.0, 1.0)),
        scalar(|_| 0.0),
        scalar(|_| 1.0),
        scalar(|p| (4.0 * p.x).sin() * (4.0 * p.y).sin()),
        vector(|p| {
            Vec2::new(
                4.0 * (4.0 * p.x).cos() * (4.0 * p.y).sin(),
                4.0 * (4.0 * p.x).sin() * (4.0 * p.y).cos(),
            )
        }),
        1.0,
    );
    p.f = scalar(|p| {
        let (sx, cx) = (4.0 * p.x).sin_cos();
        let (sy, cy) = (4.0 * p.y).sin_cos();
        4.0 * (cx * sy + sx * cy) + sx * sy
    });
    let sc = |p: Vec2| ((4.0 * p.x).into(), (4.0 * p.y).into());
    let parts = move |p: Vec2| {
        let (x4, y4): (Dd, Dd) = sc(p);
        let (sx, cx) = x4.sin_cos();
        let (sy, cy) = y4.sin_cos();
        (sx * sy, 4.0 * (cx * sy + sx * cy))
    };
    p.precise = Some(PreciseData {
        u: Arc::new(move |p| parts(p).0),
        streamline_derivative: Arc::new(move |p| parts(p).1),
        f: Arc::new(move |p| {
            let (u, d) = parts(p);
            d + u
        }),
    });
    p
}

/// `u = (x + y)²(x + y - 1)²`, `β = (x, y)`, `α = 1` on the unit square.
pub fn example3() -> ProblemSpec {
    let mut p = ProblemSpec::manufactured(
        "example3",
        vector(|p| p),
        scalar(|_| 2.0),
        scalar(|_| 1.0),
        scalar(|p| {
            let s = p.x + p.y;
            s * s * (s - 1.0) * (s - 1.0)
        }),
        vector(|p| {
            let s = p.x + p.y;
            // d/ds [s²(s-1)²] = 2s(s-1)(2s-1)
            let d = 2.0 * s * (s - 1.0) * (2.0 * s - 1.0);
            Vec2::new(d, d)
        }),
        2.0,
    );
    p.f = scalar(|p| {
        let s = p.x + p.y;
        // β·∇u = s·u'(s), ∇·β = 2, α = 1
        s * 2.0 * s * (s - 1.0) * (2.0 * s - 1.0) + 3.0 * s * s * (s - 1.0) * (s - 1.0)
    });
    let u = |s: Dd| s * s * (s - 1.0) * (s - 1.0);
    let d = |s: Dd| s * 2.0 * s * (s - 1.0) * (s * 2.0 - 1.0);
    p.precise = Some(PreciseData {
        u: Arc::new(move |p| u(Dd::sum(p.x, p.y))),
        streamline_derivative: Arc::new(move |p| d(Dd::sum(p.x, p.y))),
        f: Arc::new(move |p| {
            let s = Dd::sum(p.x, p.y);
            d(s) + u(s) * 3.0
        }),
    });
    p
}

/// Rotating flow `β = (-y, x)`, `α = 0`, `f = 0` on the slit square, with
/// `g = sin²(πx)` on the upper side of the slit and zero on the remaining
/// inflow boundary. No exact solution is known.
pub fn example4() -> ProblemSpec {
    ProblemSpec {
        name: "example4".into(),
        beta: vector(|p| Vec2::new(-p.y, p.x)),
        alpha: scalar(|_| 0.0),
        f: scalar(|_| 0.0),
        g: scalar(|p| {
            if p.y == 0.0 && (0.0..=1.0).contains(&p.x) {
                (PI * p.x).sin().powi(2)
            } else {
                0.0
            }
        }),
        u_exact: None,
        grad_u_exact: None,
        div_beta: Some(scalar(|_| 0.0)),
        sigma0: 0.0,
        precise: None,
    }
}

/// The four benchmark problems, in order.
pub fn builtin_problems() -> Vec<ProblemSpec> {
    vec![example1(), example2(), example3(), example4()]
}

/// Problem `id` in `1..=4`.
pub fn builtin_problem(id: usize) -> Result<ProblemSpec> {
    match id {
        1 => Ok(example1()),
        2 => Ok(example2()),
        3 => Ok(example3()),
        4 => Ok(example4()),
        _ => Err(WgError::InvalidConfig(format!("unknown problem {id}; expected 1..4"))),
    }
}

/// Grid of sample points on `[lo, hi]`, used by the self-checks.
pub fn sample_grid(lo: Vec2, hi: Vec2, n: usize) -> Vec<Vec2> {
    let mut pts = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let t = (i as f64 + 0.5) / n as f64;
            let s = (j as f64 + 0.5) / n as f64;
            pts.push(Vec2::new(lo.x + t * (hi.x - lo.x), lo.y + s * (hi.y - lo.y)));
        }
    }
    pts
}
