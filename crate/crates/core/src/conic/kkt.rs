//! Assembly, factorization and solution of the regularized KKT system
//!
//! ```text
//! [ 0   A^T  G^T  ] [dx]   [rx]
//! [ A   0    0    ] [dy] = [ry]
//! [ G   0   -W^2  ] [dz]   [rz]
//! ```
//!
//! Large SOC blocks of `W^2` are not stored densely; each gets two extra
//! unknowns carrying its low-rank part (see [`SocExpansion`]).

use alloc::vec;
use alloc::vec::Vec;

use super::cones::{Cones, Scaling, SocExpansion};
use super::ldl::{Factor, LdlError, Symbolic};
use super::ordering::{invert, minimum_degree};
use super::sparse::UpperCsc;
use super::standard::StandardForm;

/// SOC blocks up to this size enter `W^2` densely.
pub(crate) const DENSE_SOC_MAX: usize = 16;

const STATIC_REG: f64 = 1e-8;
const DYN_EPS: f64 = 1e-13;
const DYN_DELTA: f64 = 2e-7;
const REFINE_STEPS: usize = 10;
const REFINE_TOL: f64 = 1e-14;

/// Pattern-dependent work reusable across solves with the same structure.
#[derive(Debug, Clone)]
pub struct Analysis {
    colptr: Vec<usize>,
    rowind: Vec<usize>,
    signs: Vec<f64>,
    pinv: Vec<usize>,
    map: Vec<usize>,
    permuted: UpperCsc,
    signs_perm: Vec<f64>,
    sym: Symbolic,
}

impl Analysis {
    fn matches(&self, k: &UpperCsc, signs: &[f64]) -> bool {
        self.colptr == k.colptr && self.rowind == k.rowind && self.signs == signs
    }

    fn build(k: &UpperCsc, signs: &[f64]) -> Result<Self, LdlError> {
        let perm = minimum_degree(k.n, &k.colptr, &k.rowind);
        let pinv = invert(&perm);
        let (permuted, map) = k.permuted_pattern(&pinv);
        let sym = Symbolic::analyze(&permuted)?;
        let signs_perm = perm.iter().map(|&old| signs[old]).collect();
        Ok(Analysis {
            colptr: k.colptr.clone(),
            rowind: k.rowind.clone(),
            signs: signs.to_vec(),
            pinv,
            map,
            permuted,
            signs_perm,
            sym,
        })
    }

    /// Nonzeros in the factor `L`.
    pub fn factor_nnz(&self) -> usize {
        self.sym.nnz()
    }
}

pub(crate) struct Kkt<'a> {
    dim: usize,
    matrix: UpperCsc,
    reg: Vec<f64>,
    /// Value slots rewritten on every scaling update, in cone order.
    slots: Vec<usize>,
    expanded: Vec<bool>,
    analysis: &'a Analysis,
    permuted: UpperCsc,
    factor: Factor,
    work: Vec<f64>,
    resid: Vec<f64>,
    corr: Vec<f64>,
}

/// Builds the pattern for `sf` and returns it with the inertia signs.
fn assemble(sf: &StandardForm) -> (UpperCsc, Vec<f64>, Vec<f64>, Vec<usize>, Vec<bool>) {
    let (n, p, m) = (sf.n, sf.p(), sf.m());
    let cones = &sf.cones;
    let expanded: Vec<bool> = cones.soc.iter().map(|&d| d > DENSE_SOC_MAX).collect();
    let n_exp = 2 * expanded.iter().filter(|&&e| e).count();
    let dim = n + p + m + n_exp;
    let (zo, eo) = (n + p, n + p + m);

    let mut signs = vec![1.0; dim];
    signs[n..eo].iter_mut().for_each(|s| *s = -1.0);
    let mut reg = vec![0.0; dim];

    let mut trip: Vec<(usize, usize, f64)> = Vec::new();
    let mut dynamic: Vec<usize> = Vec::new();
    for i in 0..n {
        reg[i] = STATIC_REG;
        trip.push((i, i, STATIC_REG));
    }
    for (r, row) in sf.a.iter().enumerate() {
        for (j, v) in row.iter() {
            trip.push((j, n + r, v));
        }
        reg[n + r] = -STATIC_REG;
        trip.push((n + r, n + r, -STATIC_REG));
    }
    for (r, row) in sf.g.iter().enumerate() {
        for (j, v) in row.iter() {
            trip.push((j, zo + r, v));
        }
    }
    for i in 0..m {
        reg[zo + i] = -STATIC_REG;
    }
    for i in 0..cones.nonneg {
        dynamic.push(trip.len());
        trip.push((zo + i, zo + i, 0.0));
    }
    let mut next_exp = eo;
    for (k, (&o, &d)) in cones.offsets.iter().zip(&cones.soc).enumerate() {
        let base = zo + o;
        if !expanded[k] {
            for j in 0..d {
                for i in 0..=j {
                    dynamic.push(trip.len());
                    trip.push((base + i, base + j, 0.0));
                }
            }
        } else {
            let (pc, qc) = (next_exp, next_exp + 1);
            next_exp += 2;
            for i in 0..d {
                dynamic.push(trip.len());
                trip.push((base + i, base + i, 0.0));
            }
            for i in 0..d {
                dynamic.push(trip.len());
                trip.push((base + i, pc, 0.0));
            }
            for i in 1..d {
                dynamic.push(trip.len());
                trip.push((base + i, qc, 0.0));
            }
            signs[pc] = 1.0;
            signs[qc] = -1.0;
            reg[pc] = STATIC_REG;
            reg[qc] = -STATIC_REG;
            trip.push((pc, pc, 1.0 + STATIC_REG));
            trip.push((qc, qc, -1.0 - STATIC_REG));
        }
    }
    let (matrix, pos) = UpperCsc::from_triplets(dim, &trip);
    let slots = dynamic.iter().map(|&t| pos[t]).collect();
    (matrix, signs, reg, slots, expanded)
}

impl<'a> Kkt<'a> {
    /// Sets up the system, reusing `cache` when the pattern is unchanged.
    pub fn new(sf: &StandardForm, cache: &'a mut Option<Analysis>) -> Result<Self, LdlError> {
        let (matrix, signs, reg, slots, expanded) = assemble(sf);
        let reuse = cache.as_ref().is_some_and(|a| a.matches(&matrix, &signs));
        if !reuse {
            *cache = Some(Analysis::build(&matrix, &signs)?);
        }
        let analysis: &'a Analysis = cache.as_ref().unwrap();
        let dim = matrix.n;
        Ok(Kkt {
            dim,
            matrix,
            reg,
            slots,
            expanded,
            permuted: analysis.permuted.clone(),
            factor: Factor::new(&analysis.sym),
            analysis,
            work: vec![0.0; dim],
            resid: vec![0.0; dim],
            corr: vec![0.0; dim],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes `-W^2` (or `-I` when `scaling` is `None`) and refactors.
    pub fn refactor(&mut self, cones: &Cones, scaling: Option<&Scaling>) {
        let mut s = 0;
        let vals = &mut self.matrix.values;
        let slots = &self.slots;
        let mut put = |v: f64| {
            vals[slots[s]] = v;
            s += 1;
        };
        for i in 0..cones.nonneg {
            let w = scaling.map_or(1.0, |sc| sc.nn[i]);
            put(-w * w - STATIC_REG);
        }
        for (k, &d) in cones.soc.iter().enumerate() {
            let soc = scaling.map(|sc| &sc.soc[k]);
            if !self.expanded[k] {
                for j in 0..d {
                    for i in 0..=j {
                        let w2 = match soc {
                            Some(sc) => sc.w2(i, j),
                            None if i == j => 1.0,
                            None => 0.0,
                        };
                        put(if i == j { -w2 - STATIC_REG } else { -w2 });
                    }
                }
            } else {
                // W = I corresponds to a = 1, q = 0, eta = 1.
                let (eta, ex, q): (f64, SocExpansion, &[f64]) = match soc {
                    Some(sc) => (sc.eta, sc.expansion(), &sc.q),
                    None => (
                        1.0,
                        super::cones::SocScaling {
                            eta: 1.0,
                            a: 1.0,
                            q: Vec::new(),
                            q_sq: 0.0,
                        }
                        .expansion(),
                        &[],
                    ),
                };
                let e2 = eta * eta;
                let qi = |i: usize| if q.is_empty() { 0.0 } else { q[i - 1] };
                for i in 0..d {
                    let di = if i == 0 { ex.d1 } else { 1.0 };
                    put(-e2 * di - STATIC_REG);
                }
                for i in 0..d {
                    let ui = if i == 0 { ex.u0 } else { ex.u1 * qi(i) };
                    put(-eta * ui);
                }
                for i in 1..d {
                    put(eta * ex.v1 * qi(i));
                }
            }
        }
        for (old, &new) in self.analysis.map.iter().enumerate() {
            self.permuted.values[new] = self.matrix.values[old];
        }
        self.factor.factor(
            &self.permuted,
            &self.analysis.sym,
            &self.analysis.signs_perm,
            DYN_EPS,
            DYN_DELTA,
        );
    }

    fn solve_reg(&mut self, rhs: &[f64], out: &mut [f64]) {
        let pinv = &self.analysis.pinv;
        for i in 0..self.dim {
            self.work[pinv[i]] = rhs[i];
        }
        self.factor.solve(&self.analysis.sym.lp, &mut self.work);
        for i in 0..self.dim {
            out[i] = self.work[pinv[i]];
        }
    }

    /// `out = K v` for the unregularized operator.
    fn true_matvec(&self, v: &[f64], out: &mut [f64]) {
        self.matrix.sym_matvec(v, out);
        for i in 0..self.dim {
            out[i] -= self.reg[i] * v[i];
        }
    }

    /// Solves `K sol = rhs` with iterative refinement. Both vectors have
    /// length [`Kkt::dim`]; the trailing entries of `rhs` (extra unknowns) must
    /// be zero. Returns the final relative residual.
    pub fn solve(&mut self, rhs: &[f64], sol: &mut [f64]) -> f64 {
        self.solve_reg(rhs, sol);
        let scale = 1.0 + rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut resid = core::mem::take(&mut self.resid);
        let mut corr = core::mem::take(&mut self.corr);
        let mut err = f64::INFINITY;
        for step in 0..=REFINE_STEPS {
            self.true_matvec(sol, &mut resid);
            let mut e = 0.0f64;
            for i in 0..self.dim {
                resid[i] = rhs[i] - resid[i];
                e = e.max(resid[i].abs());
            }
            let rel = e / scale;
            if rel >= err {
                // The last correction made things worse; undo it.
                if step > 0 {
                    for i in 0..self.dim {
                        sol[i] -= corr[i];
                    }
                }
                break;
            }
            err = rel;
            if rel <= REFINE_TOL {
                break;
            }
            self.solve_reg(&resid, &mut corr);
            for i in 0..self.dim {
                sol[i] += corr[i];
            }
        }
        self.resid = resid;
        self.corr = corr;
        err
    }
}
