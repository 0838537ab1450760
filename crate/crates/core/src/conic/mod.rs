//! Second-order cone programs: problem description, a primal-dual interior
//! point solver and an independent feasibility checker.
//!
//! A [`ConicProblem`] is
//!
//! ```text
//! minimize    c^T x
//! subject to  ||A_i x + b_i||_2 <= c_i^T x + d_i     (each SOC constraint)
//!             r_j^T x = e_j                          (each equality)
//!             lower <= x <= upper
//! ```
//!
//! [`solve`] never reports [`SolveStatus::Optimal`] unless the returned
//! point passes [`ConicProblem::max_primal_residual`] and
//! [`ConicProblem::max_cone_violation`] at `tol_feas`, computed on the
//! original (unscaled) data. Infeasibility is only reported with a Farkas
//! certificate; anything inconclusive comes back as
//! [`SolveStatus::MaxIterations`].

mod cones;
mod ipm;
mod kkt;
mod ldl;
mod ordering;
mod sparse;
mod standard;
pub mod text;

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use thiserror::Error;

pub use kkt::Analysis;
pub use sparse::SparseVec;

use crate::C64;

/// `||A x + b||_2 <= c^T x + d`; `A` is stored by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SocConstraint {
    pub a: Vec<SparseVec>,
    pub b: Vec<f64>,
    pub c: SparseVec,
    pub d: f64,
}

impl SocConstraint {
    pub fn new(a: Vec<SparseVec>, b: Vec<f64>, c: SparseVec, d: f64) -> Self {
        SocConstraint { a, b, c, d }
    }

    /// `||A x + b|| - (c^T x + d)`; positive means violated.
    pub fn excess(&self, x: &[f64]) -> f64 {
        let lhs: f64 = self
            .a
            .iter()
            .zip(&self.b)
            .map(|(row, bi)| {
                let v = row.dot(x) + bi;
                v * v
            })
            .sum();
        Float::sqrt(lhs) - (self.c.dot(x) + self.d)
    }
}

/// `row^T x = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct EqConstraint {
    pub row: SparseVec,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub soc: Vec<SocConstraint>,
    pub eq: Vec<EqConstraint>,
    /// Per-variable lower bounds; `-inf` for none.
    pub lower: Vec<f64>,
    /// Per-variable upper bounds; `+inf` for none.
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConicError {
    #[error("objective has {got} entries, expected {expected}")]
    ObjectiveLength { got: usize, expected: usize },
    #[error("bounds have {got} entries, expected {expected}")]
    BoundsLength { got: usize, expected: usize },
    #[error("SOC constraint {index}: {rows} rows but {offsets} offsets")]
    SocShape {
        index: usize,
        rows: usize,
        offsets: usize,
    },
    #[error("variable index {index} out of range ({n_vars} variables)")]
    VariableIndex { index: usize, n_vars: usize },
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
    #[error("lower bound above upper bound for variable {0}")]
    EmptyBox(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// A certificate of primal infeasibility was found.
    Infeasible,
    /// A certificate of dual infeasibility (an improving ray) was found.
    Unbounded,
    MaxIterations,
    NumericalFailure,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::MaxIterations => "max_iterations",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

impl core::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub max_primal_residual: f64,
    pub max_cone_violation: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Absolute feasibility tolerance of the independent checker.
    pub tol_feas: f64,
    /// Duality gap tolerance, absolute or relative to the objective.
    pub tol_gap: f64,
    pub max_iter: usize,
    pub equilibrate: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol_feas: 1e-7,
            tol_gap: 1e-7,
            max_iter: 100,
            equilibrate: true,
        }
    }
}

impl ConicProblem {
    pub fn new(n_vars: usize) -> Self {
        ConicProblem {
            n_vars,
            objective: vec![0.0; n_vars],
            soc: Vec::new(),
            eq: Vec::new(),
            lower: vec![f64::NEG_INFINITY; n_vars],
            upper: vec![f64::INFINITY; n_vars],
        }
    }

    pub fn add_soc(&mut self, soc: SocConstraint) {
        self.soc.push(soc);
    }

    pub fn add_eq(&mut self, row: SparseVec, rhs: f64) {
        self.eq.push(EqConstraint { row, rhs });
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    /// Checks dimensions, indices and finiteness.
    pub fn validate(&self) -> Result<(), ConicError> {
        let n = self.n_vars;
        if self.objective.len() != n {
            return Err(ConicError::ObjectiveLength {
                got: self.objective.len(),
                expected: n,
            });
        }
        for v in [&self.lower, &self.upper] {
            if v.len() != n {
                return Err(ConicError::BoundsLength {
                    got: v.len(),
                    expected: n,
                });
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(ConicError::NonFinite("objective"));
        }
        for i in 0..n {
            if self.lower[i].is_nan() || self.upper[i].is_nan() {
                return Err(ConicError::NonFinite("bounds"));
            }
            if self.lower[i] > self.upper[i] {
                return Err(ConicError::EmptyBox(i));
            }
        }
        let check_row = |row: &SparseVec, what: &'static str| -> Result<(), ConicError> {
            if let Some(index) = row.max_index().filter(|&i| i >= n) {
                return Err(ConicError::VariableIndex { index, n_vars: n });
            }
            if row.val.iter().any(|v| !v.is_finite()) || row.idx.len() != row.val.len() {
                return Err(ConicError::NonFinite(what));
            }
            Ok(())
        };
        for (index, soc) in self.soc.iter().enumerate() {
            if soc.a.len() != soc.b.len() {
                return Err(ConicError::SocShape {
                    index,
                    rows: soc.a.len(),
                    offsets: soc.b.len(),
                });
            }
            for row in &soc.a {
                check_row(row, "SOC matrix")?;
            }
            check_row(&soc.c, "SOC right-hand side")?;
            if !soc.d.is_finite() || soc.b.iter().any(|v| !v.is_finite()) {
                return Err(ConicError::NonFinite("SOC offsets"));
            }
        }
        for eq in &self.eq {
            check_row(&eq.row, "equality row")?;
            if !eq.rhs.is_finite() {
                return Err(ConicError::NonFinite("equality right-hand side"));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest absolute violation of an equality or a bound.
    pub fn max_primal_residual(&self, x: &[f64]) -> f64 {
        let mut r = 0.0f64;
        for eq in &self.eq {
            r = r.max((eq.row.dot(x) - eq.rhs).abs());
        }
        for i in 0..self.n_vars {
            r = r.max(self.lower[i] - x[i]).max(x[i] - self.upper[i]);
        }
        r
    }

    /// Largest `max(0, ||A x + b|| - c^T x - d)` over the SOC constraints.
    pub fn max_cone_violation(&self, x: &[f64]) -> f64 {
        self.soc.iter().map(|s| s.excess(x)).fold(0.0, f64::max)
    }
}

/// Solver with a cache of the last KKT ordering and symbolic factorization,
/// reused whenever the next problem has the same sparsity structure (as in a
/// bisection over one parameter).
#[derive(Debug, Clone, Default)]
pub struct ConicSolver {
    pub settings: SolverSettings,
    cache: Option<Analysis>,
}

impl ConicSolver {
    pub fn new(settings: SolverSettings) -> Self {
        ConicSolver {
            settings,
            cache: None,
        }
    }

    pub fn solve(&mut self, problem: &ConicProblem) -> Result<SolveReport, ConicError> {
        problem.validate()?;
        let settings = self.settings;
        let sf = standard::StandardForm::from_problem(problem, settings.equilibrate);
        let opts = ipm::IpmOptions {
            feastol: settings.tol_feas.min(1e-8),
            gaptol: settings.tol_gap,
            max_iter: settings.max_iter,
        };
        let unscale = |x: &[f64]| -> Vec<f64> { x.iter().zip(&sf.col_scale).map(|(v, d)| v * d).collect() };
        let mut accept = |xs: &[f64]| {
            let x = unscale(xs);
            problem.max_primal_residual(&x) <= settings.tol_feas
                && problem.max_cone_violation(&x) <= settings.tol_feas
        };
        let out = ipm::run(&sf, &opts, &mut self.cache, &mut accept);
        let x = unscale(&out.x);
        let finite = x.iter().all(|v| v.is_finite());
        let (res, viol, obj) = if finite {
            (
                problem.max_primal_residual(&x),
                problem.max_cone_violation(&x),
                problem.objective_value(&x),
            )
        } else {
            (f64::INFINITY, f64::INFINITY, f64::NAN)
        };
        Ok(SolveReport {
            status: out.status,
            objective_value: obj,
            max_primal_residual: res,
            max_cone_violation: viol,
            iterations: out.iterations,
            x,
        })
    }
}

/// One-off solve; see [`ConicSolver`] to reuse symbolic work.
pub fn solve(problem: &ConicProblem, settings: &SolverSettings) -> Result<SolveReport, ConicError> {
    ConicSolver::new(*settings).solve(problem)
}

/// Placement of a complex vector inside the real variable vector: entry `i`
/// has its real part at `offset + 2i` and imaginary part at `offset + 2i + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexEmbedding {
    pub offset: usize,
    pub len: usize,
}

/// Embedding of a length-`v_len` complex vector at the start of the
/// variables.
pub fn embed_complex(v_len: usize) -> ComplexEmbedding {
    ComplexEmbedding {
        offset: 0,
        len: v_len,
    }
}

impl ComplexEmbedding {
    pub fn at(offset: usize, len: usize) -> Self {
        ComplexEmbedding { offset, len }
    }

    pub fn n_real(&self) -> usize {
        2 * self.len
    }

    pub fn re(&self, i: usize) -> usize {
        self.offset + 2 * i
    }

    pub fn im(&self, i: usize) -> usize {
        self.offset + 2 * i + 1
    }

    /// End of the embedded range.
    pub fn end(&self) -> usize {
        self.offset + self.n_real()
    }

    /// Row computing `scale * Re(a^H x)`; zero entries of `a` are skipped.
    pub fn re_inner(&self, a: &[C64], scale: f64) -> SparseVec {
        let mut row = SparseVec::new();
        for (i, ai) in a.iter().enumerate() {
            if ai.re != 0.0 {
                row.push(self.re(i), scale * ai.re);
            }
            if ai.im != 0.0 {
                row.push(self.im(i), scale * ai.im);
            }
        }
        row
    }

    /// Row computing `scale * Im(a^H x)`.
    pub fn im_inner(&self, a: &[C64], scale: f64) -> SparseVec {
        let mut row = SparseVec::new();
        for (i, ai) in a.iter().enumerate() {
            if ai.im != 0.0 {
                row.push(self.re(i), -scale * ai.im);
            }
            if ai.re != 0.0 {
                row.push(self.im(i), scale * ai.re);
            }
        }
        row
    }

    /// `|x_i| <= r` as a 3-dimensional SOC.
    pub fn magnitude_cap(&self, i: usize, r: f64) -> SocConstraint {
        SocConstraint::new(
            vec![SparseVec::unit(self.re(i)), SparseVec::unit(self.im(i))],
            vec![0.0, 0.0],
            SparseVec::new(),
            r,
        )
    }

    pub fn read(&self, x: &[f64]) -> Vec<C64> {
        (0..self.len)
            .map(|i| C64::new(x[self.re(i)], x[self.im(i)]))
            .collect()
    }
}
