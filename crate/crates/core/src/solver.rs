//! Direct solver for the assembled WG system.
//!
//! Interior unknowns of each element are condensed out with dense LU; the
//! remaining trace system is reordered by reverse Cuthill-McKee and
//! factored by a banded LU with partial pivoting. A few steps of iterative
//! refinement enforce the residual bound
//! `‖Ax - b‖ ≤ 1e-12 (‖A‖‖x‖ + ‖b‖)` in the max norm.

use std::collections::VecDeque;
use std::ops::Range;

use log::debug;
use nalgebra::{DMatrix, DVector, LU};

use crate::sparse::{CsrMatrix, SparseSystem};
use crate::{Result, WgError};

const RESIDUAL_FACTOR: f64 = 1e-12;
const MAX_REFINEMENT_STEPS: usize = 8;

/// Solves `A x = b` and checks the residual bound.
pub fn solve(system: &SparseSystem) -> Result<Vec<f64>> {
    let n = system.len();
    if system.matrix.nrows() != n || system.matrix.ncols() != n {
        return Err(WgError::InvalidConfig(format!(
            "system matrix is {}x{} but the right-hand side has length {n}",
            system.matrix.nrows(),
            system.matrix.ncols()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let fact = Factorization::new(&system.matrix, &system.interior_blocks)?;
    let a_norm = system.matrix.norm_inf();
    let b_norm = inf_norm(&system.rhs);
    let mut x = fact.apply(&system.rhs);
    let mut residual = f64::INFINITY;
    for step in 0..=MAX_REFINEMENT_STEPS {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(WgError::SingularMatrix("non-finite solution".into()));
        }
        let ax = system.matrix.mul_vec(&x);
        let r: Vec<f64> = system.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        residual = inf_norm(&r);
        let bound = RESIDUAL_FACTOR * (a_norm * inf_norm(&x) + b_norm);
        debug!("refinement step {step}: residual {residual:.3e}, bound {bound:.3e}");
        if residual <= bound {
            return Ok(x);
        }
        let d = fact.apply(&r);
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += di;
        }
    }
    Err(WgError::ResidualTooLarge {
        residual,
        bound: RESIDUAL_FACTOR * (a_norm * inf_norm(&x) + b_norm),
    })
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Block {
    range: Range<usize>,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

/// Reusable factorization of a square sparse matrix.
pub struct Factorization {
    matrix: CsrMatrix,
    /// Condensed unknowns are `0..num_condensed`.
    num_condensed: usize,
    blocks: Vec<Block>,
    /// `perm[new] = old` over the uncondensed unknowns, offset by `num_condensed`.
    perm: Vec<usize>,
    band: BandLu,
}

impl Factorization {
    /// Factors `a`, condensing `interior_blocks` when they are valid
    /// (contiguous from 0, mutually uncoupled, nonsingular).
    pub fn new(a: &CsrMatrix, interior_blocks: &[Range<usize>]) -> Result<Self> {
        let blocks = match condensable_blocks(a, interior_blocks) {
            Some(b) => b,
            None => {
                if !interior_blocks.is_empty() {
                    debug!("interior blocks rejected, factoring the full system");
                }
                Vec::new()
            }
        };
        let num_condensed = blocks.last().map_or(0, |b| b.range.end);
        let schur = schur_complement(a, &blocks, num_condensed);
        let perm = reverse_cuthill_mckee(&schur);
        let permuted = schur.permute(&perm, &perm);
        let band = BandLu::factor(&permuted)?;
        debug!(
            "factorization: {} condensed, {} in band system (kl = {}, ku = {})",
            num_condensed,
            perm.len(),
            band.kl,
            band.ku
        );
        Ok(Factorization {
            matrix: a.clone(),
            num_condensed,
            blocks,
            perm,
            band,
        })
    }

    /// `A⁻¹ b` with the stored factors.
    pub fn apply(&self, b: &[f64]) -> Vec<f64> {
        let nc = self.num_condensed;
        let n = self.matrix.nrows();
        // y_I = A_II⁻¹ b_I
        let mut y = vec![0.0; nc];
        for blk in &self.blocks {
            let rhs = DVector::from_column_slice(&b[blk.range.clone()]);
            let s = blk.lu.solve(&rhs).expect("block factor checked nonsingular");
            y[blk.range.clone()].copy_from_slice(s.as_slice());
        }
        // b_T - A_TI y_I, permuted
        let mut rhs_t: Vec<f64> = self
            .perm
            .iter()
            .map(|&t| {
                let r = nc + t;
                let (cols, vals) = self.matrix.row(r);
                b[r] - cols
                    .iter()
                    .zip(vals)
                    .filter(|(&c, _)| c < nc)
                    .map(|(&c, v)| v * y[c])
                    .sum::<f64>()
            })
            .collect();
        self.band.solve_in_place(&mut rhs_t);
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[nc + old] = rhs_t[new];
        }
        // x_I = A_II⁻¹ (b_I - A_IT x_T)
        for blk in &self.blocks {
            let mut rhs = DVector::zeros(blk.range.len());
            for (k, r) in blk.range.clone().enumerate() {
                let (cols, vals) = self.matrix.row(r);
                rhs[k] = b[r]
                    - cols
                        .iter()
                        .zip(vals)
                        .filter(|(&c, _)| c >= nc)
                        .map(|(&c, v)| v * x[c])
                        .sum::<f64>();
            }
            let s = blk.lu.solve(&rhs).expect("block factor checked nonsingular");
            x[blk.range.clone()].copy_from_slice(s.as_slice());
        }
        x
    }
}

/// Checks that the blocks tile `0..m` in order, that no entry couples two
/// different blocks, and that every diagonal block is nonsingular.
fn condensable_blocks(a: &CsrMatrix, blocks: &[Range<usize>]) -> Option<Vec<Block>> {
    let mut next = 0;
    for b in blocks {
        if b.start != next || b.end <= b.start {
            return None;
        }
        next = b.end;
    }
    if next > a.nrows() || blocks.is_empty() {
        return None;
    }
    let m = next;
    let mut out = Vec::with_capacity(blocks.len());
    for b in blocks {
        let k = b.len();
        let mut d = DMatrix::zeros(k, k);
        for r in b.clone() {
            let (cols, vals) = a.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if c < m {
                    if !b.contains(&c) {
                        return None;
                    }
                    d[(r - b.start, c - b.start)] = v;
                }
            }
        }
        let scale = d.amax();
        let lu = d.lu();
        let u = lu.u();
        let min_pivot = u.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if !(min_pivot > 1e-13 * scale) {
            return None;
        }
        out.push(Block { range: b.clone(), lu });
    }
    Some(out)
}

/// `S = A_TT - A_TI A_II⁻¹ A_IT` over the unknowns `nc..n`, indexed from 0.
fn schur_complement(a: &CsrMatrix, blocks: &[Block], nc: usize) -> CsrMatrix {
    let n = a.nrows();
    let nt = n - nc;
    let mut trip = Vec::new();
    for r in nc..n {
        let (cols, vals) = a.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            if c >= nc {
                trip.push((r - nc, c - nc, v));
            }
        }
    }
    if blocks.is_empty() {
        return CsrMatrix::from_triplets(nt, nt, &trip);
    }
    let at = a.transpose();
    for blk in blocks {
        // trace columns coupled to the block, and trace rows coupled from it
        let mut tcols: Vec<usize> = blk
            .range
            .clone()
            .flat_map(|r| a.row(r).0.iter().copied().filter(|&c| c >= nc))
            .collect();
        tcols.sort_unstable();
        tcols.dedup();
        let mut trows: Vec<usize> = blk
            .range
            .clone()
            .flat_map(|c| at.row(c).0.iter().copied().filter(|&r| r >= nc))
            .collect();
        trows.sort_unstable();
        trows.dedup();
        if tcols.is_empty() || trows.is_empty() {
            continue;
        }
        let k = blk.range.len();
        let mut a_it = DMatrix::zeros(k, tcols.len());
        for (i, r) in blk.range.clone().enumerate() {
            let (cols, vals) = a.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if let Ok(j) = tcols.binary_search(&c) {
                    a_it[(i, j)] = v;
                }
            }
        }
        let x = blk.lu.solve(&a_it).expect("block factor checked nonsingular");
        let mut a_ti = DMatrix::zeros(trows.len(), k);
        for (i, &r) in trows.iter().enumerate() {
            let (cols, vals) = a.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if blk.range.contains(&c) {
                    a_ti[(i, c - blk.range.start)] = v;
                }
            }
        }
        let prod = a_ti * x;
        for (i, &r) in trows.iter().enumerate() {
            for (j, &c) in tcols.iter().enumerate() {
                trip.push((r - nc, c - nc, -prod[(i, j)]));
            }
        }
    }
    CsrMatrix::from_triplets(nt, nt, &trip)
}

/// Reverse Cuthill-McKee ordering of the symmetrised pattern; `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (r, c, _) in a.iter() {
        if r != c {
            adj[r].push(c);
            adj[c].push(r);
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adj, &degree);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (degree[w], w));
            for w in nb {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Endpoint of a few BFS sweeps, a cheap approximation of a peripheral vertex.
fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize]) -> usize {
    let mut v = seed;
    let mut ecc = 0;
    for _ in 0..5 {
        let levels = bfs_levels(v, adj);
        let max = *levels.iter().flatten().max().unwrap_or(&0);
        if max <= ecc && v != seed {
            break;
        }
        ecc = max;
        let far = levels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == Some(max))
            .min_by_key(|(w, _)| (degree[*w], *w))
            .map(|(w, _)| w)
            .unwrap_or(v);
        if far == v {
            break;
        }
        v = far;
    }
    v
}

fn bfs_levels(start: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut lvl = vec![None; adj.len()];
    lvl[start] = Some(0);
    let mut q = VecDeque::from([start]);
    while let Some(v) = q.pop_front() {
        let d = lvl[v].unwrap();
        for &w in &adj[v] {
            if lvl[w].is_none() {
                lvl[w] = Some(d + 1);
                q.push_back(w);
            }
        }
    }
    lvl
}

/// Banded LU with partial pivoting. Row `i` stores columns
/// `i - kl ..= i + kl + ku`; pivoting can widen the upper band by `kl`.
struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        let (mut kl, mut ku) = (0, 0);
        for (r, c, _) in a.iter() {
            if c < r {
                kl = kl.max(r - c);
            } else {
                ku = ku.max(c - r);
            }
        }
        let width = 2 * kl + ku + 1;
        let mut data = vec![0.0; n * width];
        let mut scale: f64 = 0.0;
        for (r, c, v) in a.iter() {
            data[r * width + (c + kl - r)] = v;
            scale = scale.max(v.abs());
        }
        let mut lu = BandLu {
            n,
            kl,
            ku,
            width,
            data,
            pivots: vec![0; n],
        };
        lu.eliminate(scale)?;
        Ok(lu)
    }

    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        r * self.width + (c + self.kl - r)
    }

    fn eliminate(&mut self, scale: f64) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let tiny = 1e-14 * scale;
        for j in 0..n {
            let last_row = (j + kl).min(n - 1);
            let last_col = (j + kl + ku).min(n - 1);
            let mut p = j;
            let mut best = self.data[self.idx(j, j)].abs();
            for r in j + 1..=last_row {
                let v = self.data[self.idx(r, j)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > tiny) {
                return Err(WgError::SingularMatrix(format!(
                    "pivot {best:.3e} in column {j} of {n}"
                )));
            }
            self.pivots[j] = p;
            if p != j {
                for c in j..=last_col {
                    let (a, b) = (self.idx(j, c), self.idx(p, c));
                    self.data.swap(a, b);
                }
            }
            let piv = self.data[self.idx(j, j)];
            let row_j = self.idx(j, j);
            for r in j + 1..=last_row {
                let ir = self.idx(r, j);
                let m = self.data[ir] / piv;
                self.data[ir] = m;
                if m == 0.0 {
                    continue;
                }
                let len = last_col - j;
                // columns j+1..=last_col are contiguous in both rows
                let (src, dst) = (row_j + 1, ir + 1);
                for k in 0..len {
                    let v = self.data[src + k];
                    self.data[dst + k] -= m * v;
                }
            }
        }
        Ok(())
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for j in 0..n {
            let p = self.pivots[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            if bj != 0.0 {
                for r in j + 1..=(j + kl).min(n.saturating_sub(1)) {
                    b[r] -= self.data[self.idx(r, j)] * bj;
                }
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for c in i + 1..=(i + kl + ku).min(n - 1) {
                s -= self.data[self.idx(i, c)] * b[c];
            }
            b[i] = s / self.data[self.idx(i, i)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(n: usize, seed: u64) -> CsrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0 + rng.random::<f64>()));
            for _ in 0..3 {
                let j = rng.random_range(0..n);
                t.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn identity_returns_rhs() {
        let b = vec![1.0, -2.0, 3.5];
        let s = SparseSystem::new(CsrMatrix::identity(3), b.clone());
        assert_eq!(solve(&s).unwrap(), b);
    }

    #[test]
    fn random_system_meets_residual_bound() {
        let a = random_sparse(60, 1);
        let x_true: Vec<f64> = (0..60).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&x_true);
        let x = solve(&SparseSystem::new(a, b)).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn permuted_system_gives_permuted_solution() {
        let n = 40;
        let a = random_sparse(n, 7);
        let b: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let x = solve(&SparseSystem::new(a.clone(), b.clone())).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut p: Vec<usize> = (0..n).collect();
        let mut q: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(p.as_mut_slice(), &mut rng);
        rand::seq::SliceRandom::shuffle(q.as_mut_slice(), &mut rng);
        // B = P A Q: B[i, j] = A[p[i], q[j]], so B y = P b has y[j] = x[q[j]]
        let bp: Vec<f64> = p.iter().map(|&i| b[i]).collect();
        let y = solve(&SparseSystem::new(a.permute(&p, &q), bp)).unwrap();
        for j in 0..n {
            assert!((y[j] - x[q[j]]).abs() < 1e-12 * (1.0 + x[q[j]].abs()));
        }
    }

    #[test]
    fn pivoting_is_required() {
        // zero leading diagonal
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        let x = solve(&SparseSystem::new(a, vec![2.0, 5.0])).unwrap();
        assert_eq!(x, vec![3.0, 2.0]);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CsrMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (1, 1, 1.0), (2, 0, 1.0)]);
        let err = solve(&SparseSystem::new(a, vec![1.0; 3])).unwrap_err();
        assert!(err.is_solver_failure(), "{err}");
    }

    #[test]
    fn condensation_matches_plain_solve() {
        // two 2x2 interior blocks coupled only through three trailing unknowns
        let t = vec![
            (0, 0, 3.0), (0, 1, 1.0), (1, 0, -1.0), (1, 1, 2.0), (0, 4, 0.5), (1, 5, 1.0),
            (2, 2, 4.0), (2, 3, 1.0), (3, 2, 1.0), (3, 3, 5.0), (2, 5, -1.0), (3, 6, 2.0),
            (4, 0, 1.0), (4, 4, 6.0), (5, 1, -2.0), (5, 3, 1.0), (5, 5, 7.0),
            (6, 2, 0.5), (6, 6, 3.0), (6, 4, 1.0),
        ];
        let a = CsrMatrix::from_triplets(7, 7, &t);
        let b: Vec<f64> = (0..7).map(|i| i as f64 - 2.0).collect();
        let plain = solve(&SparseSystem::new(a.clone(), b.clone())).unwrap();
        let mut s = SparseSystem::new(a, b);
        s.interior_blocks = vec![0..2, 2..4];
        let cond = solve(&s).unwrap();
        for (u, v) in plain.iter().zip(&cond) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn coupled_blocks_fall_back() {
        let a = CsrMatrix::from_triplets(3, 3, &[(0, 0, 2.0), (0, 1, 1.0), (1, 1, 2.0), (2, 2, 1.0)]);
        assert!(condensable_blocks(&a, &[0..1, 1..2]).is_none());
        let x = solve(&SparseSystem { matrix: a, rhs: vec![3.0, 2.0, 1.0], interior_blocks: vec![0..1, 1..2] }).unwrap();
        assert_eq!(x, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn rcm_is_a_permutation_and_shrinks_bandwidth() {
        // path graph numbered badly
        let n = 50;
        let label: Vec<usize> = (0..n).map(|i| (i * 17) % n).collect();
        let mut t = Vec::new();
        for i in 0..n {
            t.push((label[i], label[i], 2.0));
            if i + 1 < n {
                t.push((label[i], label[i + 1], -1.0));
                t.push((label[i + 1], label[i], -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t);
        let p = reverse_cuthill_mckee(&a);
        let mut sorted = p.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..n).collect::<Vec<_>>());
        let b = a.permute(&p, &p);
        let bw = b.iter().map(|(r, c, _)| r.abs_diff(c)).max().unwrap();
        assert_eq!(bw, 1);
    }
}
