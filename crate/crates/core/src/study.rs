//! Convergence studies over mesh levels and polynomial degrees.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::info;
use rayon::prelude::*;

use crate::analysis::{error_report, rate, ErrorReport};
use crate::assembly::Discretization;
use crate::geometry::{polygon_contains, Vec2};
use crate::mesh::{
    generate_noncompatible_quads, generate_slit_mesh, generate_structured_triangles,
    InterfaceTag, PolygonalMesh, Rect,
};
use crate::problem::{builtin_problem, sample_grid, ProblemSpec};
use crate::wg::WeakFunction;
use crate::{Result, WgError};

/// Fraction of cells split in the non-compatible quad family.
pub const POLY_REFINE_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFamily {
    /// Structured right triangles on the unit square.
    Tri,
    /// Quads on the unit square with randomly split cells and hanging nodes.
    Poly,
    /// The slit square `(-1, 1)² \ [0, 1]×{0}`.
    Slit,
}

impl FromStr for MeshFamily {
    type Err = WgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tri" => Ok(MeshFamily::Tri),
            "poly" => Ok(MeshFamily::Poly),
            "slit" => Ok(MeshFamily::Slit),
            _ => Err(WgError::InvalidConfig(format!(
                "unknown mesh family '{s}'; expected tri, poly or slit"
            ))),
        }
    }
}

impl fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeshFamily::Tri => "tri",
            MeshFamily::Poly => "poly",
            MeshFamily::Slit => "slit",
        })
    }
}

impl MeshFamily {
    /// The mesh of level `level`, i.e. subdivision count `n = 2^level`.
    pub fn build(self, level: usize, seed: u64) -> Result<PolygonalMesh> {
        if level > 12 {
            return Err(WgError::InvalidConfig(format!("level {level} is too large")));
        }
        let n = 1usize << level;
        match self {
            MeshFamily::Tri => Ok(generate_structured_triangles(n, Rect::UNIT)),
            MeshFamily::Poly | MeshFamily::Slit if level == 0 => Err(WgError::InvalidConfig(
                format!("the {self} family needs level >= 1"),
            )),
            MeshFamily::Poly => Ok(generate_noncompatible_quads(n, POLY_REFINE_FRACTION, seed)),
            MeshFamily::Slit => Ok(generate_slit_mesh(n)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    /// Built-in problem id in `1..=4`.
    pub problem: usize,
    pub degrees: Vec<usize>,
    /// Strictly increasing.
    pub levels: Vec<usize>,
    pub mesh: MeshFamily,
    pub seed: u64,
    /// Overrides the default `2k + 3`.
    pub quad_degree: Option<usize>,
    /// Also report `|||Q_h^+ u - u_h|||`.
    pub with_plus: bool,
    pub out: Option<PathBuf>,
    pub dump_matrix: Option<PathBuf>,
    pub sample_grid: Option<usize>,
}

impl StudyConfig {
    pub fn new(problem: usize, degrees: Vec<usize>, levels: Vec<usize>, mesh: MeshFamily) -> Self {
        StudyConfig {
            problem,
            degrees,
            levels,
            mesh,
            seed: 0,
            quad_degree: None,
            with_plus: false,
            out: None,
            dump_matrix: None,
            sample_grid: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(WgError::InvalidConfig(m));
        if !(1..=4).contains(&self.problem) {
            return bad(format!("unknown problem {}; expected 1..4", self.problem));
        }
        if self.degrees.is_empty() || self.degrees.iter().any(|&k| k > 4) {
            return bad("degrees must be a nonempty subset of 0..=4".into());
        }
        if self.levels.is_empty() || self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return bad("levels must be nonempty and strictly increasing".into());
        }
        if (self.problem == 4) != (self.mesh == MeshFamily::Slit) {
            return bad("problem 4 runs on the slit mesh, and only problem 4 does".into());
        }
        if let Some(q) = self.quad_degree {
            if let Some(&k) = self.degrees.iter().find(|&&k| q < 2 * k) {
                return bad(format!("quadrature degree {q} is below 2k = {}", 2 * k));
            }
        }
        if self.sample_grid == Some(0) {
            return bad("sample grid needs at least one point per direction".into());
        }
        Ok(())
    }

    fn quad_degree_for(&self, k: usize) -> usize {
        self.quad_degree.unwrap_or(2 * k + 3)
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        let mut p: Vec<(usize, usize)> = self
            .degrees
            .iter()
            .flat_map(|&k| self.levels.iter().map(move |&l| (k, l)))
            .collect();
        p.sort_unstable();
        p.dedup();
        p
    }
}

/// One row of a convergence table. Rates are `None` on the first level of a degree.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub degree: usize,
    pub level: usize,
    pub h: f64,
    pub errors: ErrorReport,
    pub l2_rate: Option<f64>,
    pub energy_rate: Option<f64>,
    pub recovery_rate: Option<f64>,
    pub energy_plus_rate: Option<f64>,
}

fn context_for(k: usize, level: usize) -> String {
    format!("degree {k}, level {level}")
}

/// Checks the problem data on a grid over the unit square.
fn self_check(problem: &ProblemSpec) -> Result<()> {
    problem.self_check(&sample_grid(Vec2::zeros(), Vec2::new(1.0, 1.0), 7))
}

/// Runs Examples 1-3 over all (degree, level) pairs; rows are sorted by
/// degree, then level.
pub fn run_convergence(config: &StudyConfig) -> Result<Vec<ConvergenceRow>> {
    config.validate()?;
    let problem = builtin_problem(config.problem)?;
    if problem.u_exact.is_none() {
        return Err(WgError::InvalidConfig(format!(
            "{} has no exact solution; use the circular-flow study",
            problem.name
        )));
    }
    self_check(&problem)?;
    let mut rows = config
        .pairs()
        .into_par_iter()
        .map(|(k, level)| {
            let run = || -> Result<ConvergenceRow> {
                let mesh = config.mesh.build(level, config.seed)?;
                let disc =
                    Discretization::with_quad_degree(&mesh, &problem, k, config.quad_degree_for(k))?;
                if let Some(path) = &config.dump_matrix {
                    disc.assemble()
                        .matrix
                        .write_matrix_market(dump_path(path, config, k, level))?;
                }
                let uh = disc.solve()?;
                let errors = error_report(&disc, &uh, config.with_plus)?;
                info!("{}: {errors:?}", context_for(k, level));
                Ok(ConvergenceRow {
                    degree: k,
                    level,
                    h: mesh.h(),
                    errors,
                    l2_rate: None,
                    energy_rate: None,
                    recovery_rate: None,
                    energy_plus_rate: None,
                })
            };
            run().map_err(|e| e.context(context_for(k, level)))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.degree, r.level));
    fill_rates(&mut rows);
    Ok(rows)
}

fn fill_rates(rows: &mut [ConvergenceRow]) {
    for i in 1..rows.len() {
        if rows[i].degree != rows[i - 1].degree {
            continue;
        }
        let steps = (rows[i].level - rows[i - 1].level) as f64;
        let (a, b) = (rows[i - 1].errors, rows[i].errors);
        rows[i].l2_rate = Some(rate(a.l2_interior, b.l2_interior) / steps);
        rows[i].energy_rate = Some(rate(a.energy, b.energy) / steps);
        rows[i].recovery_rate = Some(rate(a.recovery, b.recovery) / steps);
        rows[i].energy_plus_rate = match (a.energy_plus, b.energy_plus) {
            (Some(x), Some(y)) => Some(rate(x, y) / steps),
            _ => None,
        };
    }
}

fn dump_path(path: &Path, config: &StudyConfig, k: usize, level: usize) -> PathBuf {
    if config.pairs().len() == 1 {
        return path.to_path_buf();
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("matrix");
    let name = match path.extension().and_then(|s| s.to_str()) {
        Some(ext) => format!("{stem}.k{k}.l{level}.{ext}"),
        None => format!("{stem}.k{k}.l{level}"),
    };
    path.with_file_name(name)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

/// CSV with a header line; rates are empty on the first level of a degree.
pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let plus = rows.iter().any(|r| r.errors.energy_plus.is_some());
    let mut s = String::from(
        "degree,level,l2_err,l2_rate,energy_err,energy_rate,recovery_err,recovery_rate",
    );
    if plus {
        s.push_str(",energy_plus_err,energy_plus_rate");
    }
    s.push('\n');
    for r in rows {
        let _ = write!(
            s,
            "{},{},{:.6e},{},{:.6e},{},{:.6e},{}",
            r.degree,
            r.level,
            r.errors.l2_interior,
            fmt_opt(r.l2_rate),
            r.errors.energy,
            fmt_opt(r.energy_rate),
            r.errors.recovery,
            fmt_opt(r.recovery_rate)
        );
        if plus {
            let _ = write!(
                s,
                ",{},{}",
                r.errors.energy_plus.map(|v| format!("{v:.6e}")).unwrap_or_default(),
                fmt_opt(r.energy_plus_rate)
            );
        }
        s.push('\n');
    }
    s
}

/// Aligned text table, one block per degree.
pub fn convergence_table(rows: &[ConvergenceRow]) -> String {
    let mut s = String::new();
    let mut last = None;
    for r in rows {
        if last != Some(r.degree) {
            if last.is_some() {
                s.push('\n');
            }
            let _ = writeln!(s, "P{} WG", r.degree);
            let _ = writeln!(
                s,
                "{:>5}  {:>11} {:>6}  {:>11} {:>6}  {:>11} {:>6}",
                "level", "L2", "rate", "energy", "rate", "recovery", "rate"
            );
            last = Some(r.degree);
        }
        let rt = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_default();
        let _ = writeln!(
            s,
            "{:>5}  {:>11.4e} {:>6}  {:>11.4e} {:>6}  {:>11.4e} {:>6}",
            r.level,
            r.errors.l2_interior,
            rt(r.l2_rate),
            r.errors.energy,
            rt(r.energy_rate),
            r.errors.recovery,
            rt(r.recovery_rate)
        );
    }
    s
}

/// Edge rule degree floor for the outflow profile, which is not polynomial.
const PROFILE_QUAD_DEGREE: usize = 24;

/// `‖u_h^b - sin²(πx)‖` over the outflow (bottom) side of the slit.
pub fn outflow_distance(mesh: &PolygonalMesh, uh: &WeakFunction, quad_degree: usize) -> Result<f64> {
    let quad_degree = quad_degree.max(PROFILE_QUAD_DEGREE);
    let mut sum = 0.0;
    for (i, f) in mesh.interfaces().iter().enumerate() {
        if f.tag != InterfaceTag::BottomSlit {
            continue;
        }
        for (p, w) in f.quadrature(quad_degree)?.rule.iter() {
            let d = uh.eval_trace(mesh, i, p) - (std::f64::consts::PI * p.x).sin().powi(2);
            sum += w * d * d;
        }
    }
    Ok(sum.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircularFlowRow {
    pub degree: usize,
    pub level: usize,
    pub outflow_distance: f64,
}

/// Solves a rotating-flow problem on the slit mesh for every (degree, level)
/// pair and measures how far the outflow profile is from the inflow profile.
/// Returns the rows and the solution of the last pair.
pub fn run_circular_flow_with(
    config: &StudyConfig,
    problem: &ProblemSpec,
) -> Result<(Vec<CircularFlowRow>, Option<(PolygonalMesh, WeakFunction)>)> {
    config.validate()?;
    let results = config
        .pairs()
        .into_par_iter()
        .map(|(k, level)| {
            let run = || -> Result<(CircularFlowRow, PolygonalMesh, WeakFunction)> {
                let mesh = config.mesh.build(level, config.seed)?;
                let qdeg = config.quad_degree_for(k);
                let disc = Discretization::with_quad_degree(&mesh, problem, k, qdeg)?;
                if let Some(path) = &config.dump_matrix {
                    disc.assemble()
                        .matrix
                        .write_matrix_market(dump_path(path, config, k, level))?;
                }
                let uh = disc.solve()?;
                let d = outflow_distance(&mesh, &uh, qdeg)?;
                drop(disc);
                Ok((
                    CircularFlowRow {
                        degree: k,
                        level,
                        outflow_distance: d,
                    },
                    mesh,
                    uh,
                ))
            };
            run().map_err(|e| e.context(context_for(k, level)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(results.len());
    let mut last = None;
    for (row, mesh, uh) in results {
        rows.push(row);
        last = Some((mesh, uh));
    }
    Ok((rows, last))
}

/// [`run_circular_flow_with`] for the built-in problem 4.
pub fn run_circular_flow(
    config: &StudyConfig,
) -> Result<(Vec<CircularFlowRow>, Option<(PolygonalMesh, WeakFunction)>)> {
    let problem = builtin_problem(config.problem)?;
    run_circular_flow_with(config, &problem)
}

pub fn circular_flow_csv(rows: &[CircularFlowRow]) -> String {
    let mut s = String::from("degree,level,outflow_distance\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{:.6e}", r.degree, r.level, r.outflow_distance);
    }
    s
}

/// One sampled point; `value` is `None` outside the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub x: f64,
    pub y: f64,
    pub value: Option<f64>,
}

/// Evaluates `u_h⁰` on an `n × n` grid spanning the mesh bounding box.
/// Points on the slit are moved up by `1e-12`, so they take the value from
/// the upper side; the first containing element (by id) wins elsewhere.
pub fn sample_field(mesh: &PolygonalMesh, uh: &WeakFunction, n: usize) -> Vec<FieldSample> {
    let (lo, hi) = mesh.bounding_box();
    let coord = |i: usize, a: f64, b: f64| {
        if n == 1 {
            0.5 * (a + b)
        } else {
            a + (b - a) * i as f64 / (n - 1) as f64
        }
    };
    let locator = Locator::new(mesh);
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let p = Vec2::new(coord(i, lo.x, hi.x), coord(j, lo.y, hi.y));
            let q = if p.y == 0.0 { Vec2::new(p.x, 1e-12) } else { p };
            let value = locator.find(q).map(|e| uh.eval_interior(mesh, e, q));
            out.push(FieldSample {
                x: p.x,
                y: p.y,
                value,
            });
        }
    }
    out
}

pub fn samples_csv(samples: &[FieldSample]) -> String {
    let mut s = String::from("x,y,value\n");
    for p in samples {
        let _ = match p.value {
            Some(v) => writeln!(s, "{:.10e},{:.10e},{:.10e}", p.x, p.y, v),
            None => writeln!(s, "{:.10e},{:.10e},", p.x, p.y),
        };
    }
    s
}

/// Bucket grid over element bounding boxes for point location.
struct Locator<'a> {
    mesh: &'a PolygonalMesh,
    lo: Vec2,
    cell: Vec2,
    nb: usize,
    buckets: Vec<Vec<usize>>,
    tol: f64,
}

impl<'a> Locator<'a> {
    fn new(mesh: &'a PolygonalMesh) -> Self {
        let (lo, hi) = mesh.bounding_box();
        let nb = ((mesh.num_elements() as f64).sqrt().ceil() as usize).max(1);
        let ext = hi - lo;
        let cell = Vec2::new(ext.x / nb as f64, ext.y / nb as f64);
        let mut buckets = vec![Vec::new(); nb * nb];
        let index = |v: f64, o: f64, c: f64| (((v - o) / c).floor().max(0.0) as usize).min(nb - 1);
        for e in 0..mesh.num_elements() {
            let pts = mesh.element_points(e);
            let (mut a, mut b) = (pts[0], pts[0]);
            for p in &pts {
                a = a.inf(p);
                b = b.sup(p);
            }
            for bj in index(a.y, lo.y, cell.y)..=index(b.y, lo.y, cell.y) {
                for bi in index(a.x, lo.x, cell.x)..=index(b.x, lo.x, cell.x) {
                    buckets[bj * nb + bi].push(e);
                }
            }
        }
        Locator {
            mesh,
            lo,
            cell,
            nb,
            buckets,
            tol: 1e-14 * ext.norm(),
        }
    }

    fn find(&self, p: Vec2) -> Option<usize> {
        let fx = (p.x - self.lo.x) / self.cell.x;
        let fy = (p.y - self.lo.y) / self.cell.y;
        if !(fx >= -1e-9 && fy >= -1e-9 && fx <= self.nb as f64 + 1e-9 && fy <= self.nb as f64 + 1e-9) {
            return None;
        }
        let bi = (fx.floor().max(0.0) as usize).min(self.nb - 1);
        let bj = (fy.floor().max(0.0) as usize).min(self.nb - 1);
        self.buckets[bj * self.nb + bi]
            .iter()
            .copied()
            .find(|&e| polygon_contains(&self.mesh.element_points(e), p, self.tol))
    }
}

/// Files written by [`run_study`].
#[derive(Debug, Clone, PartialEq)]
pub struct StudyOutput {
    pub table: String,
    pub csv: String,
    pub field_path: Option<PathBuf>,
}

/// Path of the sampled field next to the main CSV: `<stem>_field.csv`.
pub fn field_path_for(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("study");
    out.with_file_name(format!("{stem}_field.csv"))
}

/// Runs the study described by `config` and writes the requested files.
pub fn run_study(config: &StudyConfig) -> Result<StudyOutput> {
    config.validate()?;
    let (table, csv, field) = if config.problem == 4 {
        let (rows, last) = run_circular_flow(config)?;
        let mut table = String::from("level  degree  outflow distance\n");
        for r in &rows {
            let _ = writeln!(table, "{:>5}  {:>6}  {:>16.6e}", r.level, r.degree, r.outflow_distance);
        }
        (table, circular_flow_csv(&rows), last)
    } else {
        let rows = run_convergence(config)?;
        let last = match config.sample_grid {
            Some(_) => {
                let k = *config.degrees.iter().max().unwrap();
                let level = *config.levels.last().unwrap();
                let problem = builtin_problem(config.problem)?;
                let mesh = config.mesh.build(level, config.seed)?;
                let uh = Discretization::with_quad_degree(&mesh, &problem, k, config.quad_degree_for(k))?
                    .solve()?;
                Some((mesh, uh))
            }
            None => None,
        };
        (convergence_table(&rows), convergence_csv(&rows), last)
    };
    let mut field_path = None;
    if let Some(out) = &config.out {
        std::fs::write(out, &csv)?;
        if let (Some(n), Some((mesh, uh))) = (config.sample_grid, field) {
            let path = field_path_for(out);
            std::fs::write(&path, samples_csv(&sample_field(&mesh, &uh, n)))?;
            field_path = Some(path);
        }
    }
    Ok(StudyOutput {
        table,
        csv,
        field_path,
    })
}
