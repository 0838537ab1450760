//! Conversion of a [`ConicProblem`] into `min c^T x, A x = b, G x + s = h,
//! s in K`, with Ruiz equilibration.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::cones::Cones;
use super::sparse::SparseVec;
use super::ConicProblem;

#[derive(Debug, Clone)]
pub(crate) struct StandardForm {
    pub n: usize,
    pub c: Vec<f64>,
    pub a: Vec<SparseVec>,
    pub b: Vec<f64>,
    pub g: Vec<SparseVec>,
    pub h: Vec<f64>,
    pub cones: Cones,
    /// Original variables are `col_scale .* x`.
    pub col_scale: Vec<f64>,
    /// The internal objective is `c / obj_scale`.
    pub obj_scale: f64,
}

const RUIZ_PASSES: usize = 12;

impl StandardForm {
    pub fn from_problem(prob: &ConicProblem, equilibrate: bool) -> Self {
        let n = prob.n_vars;
        let a: Vec<SparseVec> = prob.eq.iter().map(|e| e.row.canonical()).collect();
        let b: Vec<f64> = prob.eq.iter().map(|e| e.rhs).collect();

        let mut g = Vec::new();
        let mut h = Vec::new();
        for i in 0..n {
            if prob.lower[i].is_finite() {
                g.push(SparseVec::from_pairs([(i, -1.0)]));
                h.push(-prob.lower[i]);
            }
        }
        for i in 0..n {
            if prob.upper[i].is_finite() {
                g.push(SparseVec::unit(i));
                h.push(prob.upper[i]);
            }
        }
        let mut socs = Vec::new();
        for soc in &prob.soc {
            if soc.a.is_empty() {
                g.push(soc.c.canonical().scaled(-1.0));
                h.push(soc.d);
            } else {
                socs.push(soc);
            }
        }
        let nonneg = g.len();
        let mut dims = Vec::with_capacity(socs.len());
        for soc in socs {
            g.push(soc.c.canonical().scaled(-1.0));
            h.push(soc.d);
            for (row, &bi) in soc.a.iter().zip(&soc.b) {
                g.push(row.canonical().scaled(-1.0));
                h.push(bi);
            }
            dims.push(soc.a.len() + 1);
        }

        let mut sf = StandardForm {
            n,
            c: prob.objective.clone(),
            a,
            b,
            g,
            h,
            cones: Cones::new(nonneg, dims),
            col_scale: vec![1.0; n],
            obj_scale: 1.0,
        };
        if equilibrate {
            sf.equilibrate();
        }
        // Unit-size objective: positive rescaling of c then leaves the
        // iterates unchanged.
        let cmax = sf.c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if cmax > 0.0 {
            sf.obj_scale = cmax;
            sf.c.iter_mut().for_each(|v| *v /= cmax);
        }
        sf
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn m(&self) -> usize {
        self.g.len()
    }

    fn equilibrate(&mut self) {
        let n = self.n;
        let mut row_scale_a = vec![1.0; self.p()];
        let mut row_scale_g = vec![1.0; self.m()];
        for _ in 0..RUIZ_PASSES {
            let mut col_max = vec![0.0f64; n];
            let mut row_a = vec![0.0f64; self.p()];
            let mut row_g = vec![0.0f64; self.m()];
            for (r, row) in self.a.iter().enumerate() {
                for (j, v) in row.iter() {
                    col_max[j] = col_max[j].max(v.abs());
                    row_a[r] = row_a[r].max(v.abs());
                }
            }
            for (r, row) in self.g.iter().enumerate() {
                for (j, v) in row.iter() {
                    col_max[j] = col_max[j].max(v.abs());
                    row_g[r] = row_g[r].max(v.abs());
                }
            }
            // A cone block must be scaled uniformly to stay a cone.
            for (&o, &d) in self.cones.offsets.iter().zip(&self.cones.soc) {
                let mx = row_g[o..o + d].iter().copied().fold(0.0, f64::max);
                row_g[o..o + d].iter_mut().for_each(|v| *v = mx);
            }
            let inv_sqrt = |v: f64| if v > 0.0 { 1.0 / Float::sqrt(v) } else { 1.0 };
            let dc: Vec<f64> = col_max.iter().map(|&v| inv_sqrt(v)).collect();
            let ea: Vec<f64> = row_a.iter().map(|&v| inv_sqrt(v)).collect();
            let eg: Vec<f64> = row_g.iter().map(|&v| inv_sqrt(v)).collect();
            for (r, row) in self.a.iter_mut().enumerate() {
                for (k, &j) in row.idx.iter().enumerate() {
                    row.val[k] *= ea[r] * dc[j];
                }
                row_scale_a[r] *= ea[r];
            }
            for (r, row) in self.g.iter_mut().enumerate() {
                for (k, &j) in row.idx.iter().enumerate() {
                    row.val[k] *= eg[r] * dc[j];
                }
                row_scale_g[r] *= eg[r];
            }
            for j in 0..n {
                self.col_scale[j] *= dc[j];
            }
        }
        for (bi, e) in self.b.iter_mut().zip(&row_scale_a) {
            *bi *= e;
        }
        for (hi, e) in self.h.iter_mut().zip(&row_scale_g) {
            *hi *= e;
        }
        for (ci, d) in self.c.iter_mut().zip(&self.col_scale) {
            *ci *= d;
        }
    }

    pub fn a_mul(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.a) {
            *o = row.dot(x);
        }
    }

    pub fn g_mul(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.g) {
            *o = row.dot(x);
        }
    }

    /// `out = A^T y + G^T z`.
    pub fn adjoint(&self, y: &[f64], z: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (row, &yi) in self.a.iter().zip(y) {
            row.axpy_into(yi, out);
        }
        for (row, &zi) in self.g.iter().zip(z) {
            row.axpy_into(zi, out);
        }
    }
}
