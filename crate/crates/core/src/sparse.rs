//! Compressed sparse row storage for the assembled system.

use std::fmt::Write as _;
use std::io::Write;
use std::ops::Range;
use std::path::Path;

use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries. Entries are merged in a fixed order (row,
    /// column, then input order), so identical input gives bit-identical output.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&t| (triplets[t].0, triplets[t].1));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for &t in &order {
            let (r, c, v) = triplets[t];
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let s = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[s.clone()], &self.values[s])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map(|k| vals[k]).unwrap_or(0.0)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| {
                let (cols, vals) = self.row(r);
                cols.iter().zip(vals).map(|(&c, v)| v * x[c]).sum()
            })
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `B[i, j] = A[row_perm[i], col_perm[j]]`.
    pub fn permute(&self, row_perm: &[usize], col_perm: &[usize]) -> CsrMatrix {
        let mut inv_col = vec![0; self.ncols];
        for (j, &c) in col_perm.iter().enumerate() {
            inv_col[c] = j;
        }
        let mut t = Vec::with_capacity(self.nnz());
        for (i, &r) in row_perm.iter().enumerate() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                t.push((i, inv_col[c], v));
            }
        }
        CsrMatrix::from_triplets(row_perm.len(), col_perm.len(), &t)
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut t = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                t.push((c, r, v));
            }
        }
        CsrMatrix::from_triplets(self.ncols, self.nrows, &t)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    /// MatrixMarket coordinate format (1-based indices).
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(s, "{} {} {}", self.nrows, self.ncols, self.nnz());
        for (r, c, v) in self.iter() {
            let _ = writeln!(s, "{} {} {:.17e}", r + 1, c + 1, v);
        }
        s
    }

    pub fn write_matrix_market(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(self.to_matrix_market().as_bytes())?;
        f.flush()?;
        Ok(())
    }
}

/// `A x = b` over the free unknowns.
///
/// `interior_blocks` lists index ranges whose unknowns couple only with
/// themselves and the remaining (trace) unknowns; the solver may condense
/// them. It may be empty.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub interior_blocks: Vec<Range<usize>>,
}

impl SparseSystem {
    pub fn new(matrix: CsrMatrix, rhs: Vec<f64>) -> Self {
        assert_eq!(matrix.nrows(), rhs.len());
        SparseSystem {
            matrix,
            rhs,
            interior_blocks: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    /// `‖A x - b‖_∞`.
    pub fn residual_inf(&self, x: &[f64]) -> f64 {
        self.matrix
            .mul_vec(x)
            .iter()
            .zip(&self.rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_triplets(2, 3, &[(1, 2, 1.0), (0, 0, 2.0), (1, 2, 0.5), (0, 1, -1.0)]);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(1, 2), 1.5);
        assert_eq!(a.get(0, 1), -1.0);
        assert_eq!(a.get(1, 0), 0.0);
        assert_eq!(a.mul_vec(&[1.0, 1.0, 2.0]), vec![1.0, 3.0]);
        assert_eq!(a.norm_inf(), 3.0);
    }

    #[test]
    fn permutation_and_transpose() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 3.0)]);
        let p = a.permute(&[1, 0], &[1, 0]);
        assert_eq!(p.get(0, 1), 3.0);
        assert_eq!(p.get(1, 0), 2.0);
        assert_eq!(p.get(1, 1), 1.0);
        assert_eq!(a.transpose().get(0, 1), 3.0);
        assert_eq!(CsrMatrix::identity(3).mul_vec(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn matrix_market_header() {
        let s = CsrMatrix::identity(2).to_matrix_market();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[1], "2 2 2");
        assert!(lines[2].starts_with("1 1 1.0"));
    }
}
