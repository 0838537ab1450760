//! Up-looking `L D L^T` factorization of a quasi-definite matrix stored as an
//! upper-triangular CSC.
//!
//! Pivots whose sign disagrees with the expected inertia (or that are too
//! small) are replaced by a small value of the right sign. The resulting
//! factor is of a nearby matrix; callers recover accuracy with iterative
//! refinement against the true operator.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use super::sparse::UpperCsc;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum LdlError {
    #[error("matrix is not upper triangular (entry at row {row}, column {col})")]
    NotUpper { row: usize, col: usize },
}

/// Elimination tree and column counts; depends only on the pattern.
#[derive(Debug, Clone)]
pub(crate) struct Symbolic {
    pub etree: Vec<usize>,
    pub lp: Vec<usize>,
}

impl Symbolic {
    pub fn analyze(a: &UpperCsc) -> Result<Self, LdlError> {
        let n = a.n;
        let mut work = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let mut etree = vec![NONE; n];
        for j in 0..n {
            work[j] = j;
            for p in a.colptr[j]..a.colptr[j + 1] {
                let mut i = a.rowind[p];
                if i > j {
                    return Err(LdlError::NotUpper { row: i, col: j });
                }
                while work[i] != j {
                    if etree[i] == NONE {
                        etree[i] = j;
                    }
                    lnz[i] += 1;
                    work[i] = j;
                    i = etree[i];
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for i in 0..n {
            lp[i + 1] = lp[i] + lnz[i];
        }
        Ok(Symbolic { etree, lp })
    }

    pub fn nnz(&self) -> usize {
        *self.lp.last().unwrap_or(&0)
    }
}

/// Numeric factor `L D L^T` with unit lower `L` stored by columns.
#[derive(Debug, Clone)]
pub(crate) struct Factor {
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
    dinv: Vec<f64>,
    /// Number of pivots that had to be regularized.
    pub bumped: usize,
    // workspaces
    y_vals: Vec<f64>,
    y_idx: Vec<usize>,
    y_mark: Vec<bool>,
    elim: Vec<usize>,
    next: Vec<usize>,
}

impl Factor {
    pub fn new(sym: &Symbolic) -> Self {
        let n = sym.etree.len();
        let nnz = sym.nnz();
        Factor {
            li: vec![0; nnz],
            lx: vec![0.0; nnz],
            d: vec![0.0; n],
            dinv: vec![0.0; n],
            bumped: 0,
            y_vals: vec![0.0; n],
            y_idx: vec![0; n],
            y_mark: vec![false; n],
            elim: vec![0; n],
            next: vec![0; n],
        }
    }

    /// Refactors `a` (same pattern as at analysis). `signs[k]` is the expected
    /// sign of pivot `k`; pivots with `signs[k] * d < eps` become
    /// `signs[k] * delta`.
    pub fn factor(&mut self, a: &UpperCsc, sym: &Symbolic, signs: &[f64], eps: f64, delta: f64) {
        let n = a.n;
        let lp = &sym.lp;
        self.bumped = 0;
        self.next[..n].copy_from_slice(&lp[..n]);
        for k in 0..n {
            let mut nnz_y = 0;
            self.d[k] = 0.0;
            for p in a.colptr[k]..a.colptr[k + 1] {
                let bidx = a.rowind[p];
                if bidx == k {
                    self.d[k] = a.values[p];
                    continue;
                }
                self.y_vals[bidx] = a.values[p];
                if !self.y_mark[bidx] {
                    self.y_mark[bidx] = true;
                    self.elim[0] = bidx;
                    let mut n_e = 1;
                    let mut nxt = sym.etree[bidx];
                    while nxt != NONE && nxt < k {
                        if self.y_mark[nxt] {
                            break;
                        }
                        self.y_mark[nxt] = true;
                        self.elim[n_e] = nxt;
                        n_e += 1;
                        nxt = sym.etree[nxt];
                    }
                    while n_e > 0 {
                        n_e -= 1;
                        self.y_idx[nnz_y] = self.elim[n_e];
                        nnz_y += 1;
                    }
                }
            }
            for i in (0..nnz_y).rev() {
                let c = self.y_idx[i];
                let end = self.next[c];
                let yc = self.y_vals[c];
                for j in lp[c]..end {
                    self.y_vals[self.li[j]] -= self.lx[j] * yc;
                }
                self.li[end] = k;
                let l = yc * self.dinv[c];
                self.lx[end] = l;
                self.d[k] -= yc * l;
                self.next[c] += 1;
                self.y_vals[c] = 0.0;
                self.y_mark[c] = false;
            }
            if signs[k] * self.d[k] < eps || !self.d[k].is_finite() {
                self.d[k] = signs[k] * delta;
                self.bumped += 1;
            }
            self.dinv[k] = 1.0 / self.d[k];
        }
    }

    /// Solves in place.
    pub fn solve(&self, lp: &[usize], x: &mut [f64]) {
        let n = x.len();
        for i in 0..n {
            let xi = x[i];
            for j in lp[i]..lp[i + 1] {
                x[self.li[j]] -= self.lx[j] * xi;
            }
        }
        for i in 0..n {
            x[i] *= self.dinv[i];
        }
        for i in (0..n).rev() {
            let mut xi = x[i];
            for j in lp[i]..lp[i + 1] {
                xi -= self.lx[j] * x[self.li[j]];
            }
            x[i] = xi;
        }
    }

    #[cfg(test)]
    pub fn diag(&self) -> &[f64] {
        &self.d
    }
}
