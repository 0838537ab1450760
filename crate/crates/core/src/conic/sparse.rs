//! Sparse rows and the upper-triangular CSC storage used by the KKT system.

use alloc::vec;
use alloc::vec::Vec;

/// A sparse real row vector.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVec {
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut v = Self::new();
        for (i, x) in pairs {
            v.push(i, x);
        }
        v
    }

    /// Unit vector `e_i`.
    pub fn unit(i: usize) -> Self {
        SparseVec {
            idx: vec![i],
            val: vec![1.0],
        }
    }

    pub fn push(&mut self, i: usize, x: f64) {
        self.idx.push(i);
        self.val.push(x);
    }

    pub fn nnz(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.idx.iter().copied().zip(self.val.iter().copied())
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.iter().map(|(i, v)| v * x[i]).sum()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.idx.iter().copied().max()
    }

    pub fn scaled(&self, s: f64) -> Self {
        SparseVec {
            idx: self.idx.clone(),
            val: self.val.iter().map(|v| v * s).collect(),
        }
    }

    /// Sorted by index with duplicates summed and exact zeros dropped.
    pub fn canonical(&self) -> Self {
        let mut pairs: Vec<(usize, f64)> = self.iter().collect();
        pairs.sort_by_key(|p| p.0);
        let mut out = SparseVec::new();
        for (i, v) in pairs {
            match out.idx.last() {
                Some(&last) if last == i => *out.val.last_mut().unwrap() += v,
                _ => out.push(i, v),
            }
        }
        let keep: Vec<bool> = out.val.iter().map(|v| *v != 0.0).collect();
        let mut k = keep.iter();
        out.idx.retain(|_| *k.next().unwrap());
        let mut k = keep.iter();
        out.val.retain(|_| *k.next().unwrap());
        out
    }

    /// `y += alpha * self^T`.
    pub fn axpy_into(&self, alpha: f64, y: &mut [f64]) {
        for (i, v) in self.iter() {
            y[i] += alpha * v;
        }
    }
}

/// Compressed sparse column storage of the upper triangle of a symmetric
/// matrix. Row indices are sorted within each column.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct UpperCsc {
    pub n: usize,
    pub colptr: Vec<usize>,
    pub rowind: Vec<usize>,
    pub values: Vec<f64>,
}

impl UpperCsc {
    /// Builds from `(row, col, value)` triplets with `row <= col`, no
    /// duplicates. Returns the matrix and, for every triplet, its position in
    /// `values`.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> (Self, Vec<usize>) {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&t| (triplets[t].1, triplets[t].0));
        let mut colptr = vec![0usize; n + 1];
        for &(r, c, _) in triplets {
            debug_assert!(r <= c && c < n);
            colptr[c + 1] += 1;
        }
        for j in 0..n {
            colptr[j + 1] += colptr[j];
        }
        let mut rowind = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut pos = vec![0usize; triplets.len()];
        for (p, &t) in order.iter().enumerate() {
            rowind.push(triplets[t].0);
            values.push(triplets[t].2);
            pos[t] = p;
        }
        (
            UpperCsc {
                n,
                colptr,
                rowind,
                values,
            },
            pos,
        )
    }

    /// `y = K x` for the full symmetric matrix.
    pub fn sym_matvec(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.n {
            for p in self.colptr[j]..self.colptr[j + 1] {
                let i = self.rowind[p];
                let v = self.values[p];
                y[i] += v * x[j];
                if i != j {
                    y[j] += v * x[i];
                }
            }
        }
    }

    /// Pattern of `P K P^T` where `pinv[old] = new`, plus the map from each
    /// old value slot to its new slot.
    pub fn permuted_pattern(&self, pinv: &[usize]) -> (Self, Vec<usize>) {
        let mut triplets = Vec::with_capacity(self.rowind.len());
        for j in 0..self.n {
            for p in self.colptr[j]..self.colptr[j + 1] {
                let (a, b) = (pinv[self.rowind[p]], pinv[j]);
                triplets.push((a.min(b), a.max(b), self.values[p]));
            }
        }
        Self::from_triplets(self.n, &triplets)
    }
}
