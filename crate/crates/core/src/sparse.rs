//! Deterministic sparse Hermitian operators in compressed-row form.
//!
//! Triplets are sorted row-major and duplicates summed at construction, so
//! two builds of the same operator produce byte-identical serializations.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exec;
use crate::C64;

#[derive(Clone, Debug)]
pub struct SparseHamiltonian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<C64>,
    hermitian: bool,
}

impl SparseHamiltonian {
    /// Build from `(row, col, value)` triplets. Entries are sorted
    /// row-major, duplicates summed, and exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(u32, u32, C64)>) -> Result<Self> {
        for &(r, c, _) in &triplets {
            if r as usize >= dim || c as usize >= dim {
                return Err(Error::ShapeMismatch(format!(
                    "entry ({r}, {c}) outside dimension {dim}"
                )));
            }
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(u32, u32, C64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match merged.last_mut() {
                Some(&mut (lr, lc, ref mut lv)) if lr == r && lc == c => *lv += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols: Vec<u32> = Vec::with_capacity(merged.len());
        let mut vals: Vec<C64> = Vec::with_capacity(merged.len());
        for (r, c, v) in merged {
            row_ptr[r as usize + 1] += 1;
            cols.push(c);
            vals.push(v);
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        // drop exact zeros left by cancellation
        let mut out = Self {
            dim,
            row_ptr,
            cols,
            vals,
            hermitian: false,
        };
        out.prune_zeros();
        out.hermitian = out.check_hermitian(0.0);
        Ok(out)
    }

    fn prune_zeros(&mut self) {
        let zero = C64::new(0.0, 0.0);
        if !self.vals.iter().any(|v| *v == zero) {
            return;
        }
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        let mut row_ptr = vec![0usize; self.dim + 1];
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.vals[k] != zero {
                    cols.push(self.cols[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        self.cols = cols;
        self.vals = vals;
        self.row_ptr = row_ptr;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.cols[lo..hi].binary_search(&(col as u32)) {
            Ok(k) => self.vals[lo + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Iterate `(row, col, value)` in canonical row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(move |k| (r, self.cols[k] as usize, self.vals[k]))
        })
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|r| self.entry(r, r)).collect()
    }

    fn check_hermitian(&self, tol: f64) -> bool {
        for (r, c, v) in self.entries() {
            let tv = self.entry(c, r);
            if (tv - v.conj()).norm() > tol {
                return false;
            }
        }
        true
    }

    /// `y = H x`, parallel over output rows when the `parallel` feature is
    /// enabled.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        let row_ptr = &self.row_ptr;
        let cols = &self.cols;
        let vals = &self.vals;
        exec::fill_indexed(y, |r| {
            let mut acc = C64::new(0.0, 0.0);
            for k in row_ptr[r]..row_ptr[r + 1] {
                acc += vals[k] * x[cols[k] as usize];
            }
            acc
        });
    }

    /// Always-sequential twin of [`apply`](Self::apply), for benchmarks.
    pub fn apply_seq(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        let row_ptr = &self.row_ptr;
        let cols = &self.cols;
        let vals = &self.vals;
        exec::fill_indexed_seq(y, |r| {
            let mut acc = C64::new(0.0, 0.0);
            for k in row_ptr[r]..row_ptr[r + 1] {
                acc += vals[k] * x[cols[k] as usize];
            }
            acc
        });
    }

    /// Upper bound on the spectral radius (max absolute row sum).
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|k| self.vals[k].norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::<C64>::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    /// Restriction to a subset of basis indices (in the order given).
    pub fn restrict(&self, indices: &[usize]) -> Result<SparseHamiltonian> {
        let mut pos = vec![usize::MAX; self.dim];
        for (i, &b) in indices.iter().enumerate() {
            if b >= self.dim {
                return Err(Error::ShapeMismatch(format!(
                    "index {b} outside dimension {}",
                    self.dim
                )));
            }
            pos[b] = i;
        }
        let mut triplets = Vec::new();
        for &b in indices {
            for k in self.row_ptr[b]..self.row_ptr[b + 1] {
                let c = self.cols[k] as usize;
                if pos[c] != usize::MAX {
                    triplets.push((pos[b] as u32, pos[c] as u32, self.vals[k]));
                }
            }
        }
        SparseHamiltonian::from_triplets(indices.len(), triplets)
    }

    /// Scale every entry by a real factor.
    pub fn scaled(&self, factor: f64) -> SparseHamiltonian {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= factor;
        }
        out
    }

    /// Triplet CSV dump `row,col,re,im` in canonical order.
    pub fn dump_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "row,col,re,im")?;
        for (r, c, v) in self.entries() {
            writeln!(w, "{},{},{:.17e},{:.17e}", r, c, v.re, v.im)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn triplet_merge_and_order() {
        let h = SparseHamiltonian::from_triplets(
            3,
            vec![
                (2, 0, c(1.0, 0.0)),
                (0, 2, c(1.0, 0.0)),
                (0, 0, c(0.5, 0.0)),
                (0, 0, c(0.5, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(h.entry(0, 0), c(1.0, 0.0));
        assert_eq!(h.nnz(), 3);
        assert!(h.is_hermitian());
        let order: Vec<(usize, usize)> = h.entries().map(|(r, c, _)| (r, c)).collect();
        assert_eq!(order, vec![(0, 0), (0, 2), (2, 0)]);
    }

    #[test]
    fn hermitian_detection() {
        let h = SparseHamiltonian::from_triplets(2, vec![(0, 1, c(0.0, 1.0))]).unwrap();
        assert!(!h.is_hermitian());
        let h = SparseHamiltonian::from_triplets(
            2,
            vec![(0, 1, c(0.0, 1.0)), (1, 0, c(0.0, -1.0))],
        )
        .unwrap();
        assert!(h.is_hermitian());
    }

    #[test]
    fn apply_matches_dense() {
        let h = SparseHamiltonian::from_triplets(
            4,
            vec![
                (0, 1, c(1.0, 0.5)),
                (1, 0, c(1.0, -0.5)),
                (2, 2, c(-2.0, 0.0)),
                (3, 1, c(0.0, 1.0)),
                (1, 3, c(0.0, -1.0)),
            ],
        )
        .unwrap();
        let x: Vec<C64> = (0..4).map(|i| c(i as f64, 1.0 - i as f64)).collect();
        let mut y = vec![c(0.0, 0.0); 4];
        h.apply(&x, &mut y);
        let dense = h.to_dense();
        let xv = nalgebra::DVector::from_vec(x.clone());
        let want = &dense * &xv;
        for i in 0..4 {
            assert!((y[i] - want[i]).norm() < 1e-14);
        }
        let mut y2 = vec![c(0.0, 0.0); 4];
        h.apply_seq(&x, &mut y2);
        assert_eq!(y, y2);
    }

    #[test]
    fn dump_is_deterministic() {
        let build = || {
            SparseHamiltonian::from_triplets(
                3,
                vec![
                    (1, 2, c(0.25, 0.0)),
                    (2, 1, c(0.25, 0.0)),
                    (0, 0, c(-1.0, 0.0)),
                ],
            )
            .unwrap()
        };
        let mut a = Vec::new();
        let mut b = Vec::new();
        build().dump_csv(&mut a).unwrap();
        build().dump_csv(&mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn out_of_range_triplet_rejected() {
        assert!(SparseHamiltonian::from_triplets(2, vec![(0, 2, c(1.0, 0.0))]).is_err());
    }
}
