//! Group-sparse module selection.
//!
//! For a fixed SINR target `gamma` the relaxed problem
//!
//! ```text
//! minimize    alpha * sum_m ||Phi_bar^m||_F
//! subject to  ||[hbar_{j,k}^H phi_bar_j]_j ; sigma|| <= sqrt(1 + 1/gamma) Re(hbar_{k,k}^H phi_bar_k)
//!             Im(hbar_{k,k}^H phi_bar_k) = 0
//!             |phi_bar_{k,n}| <= sqrt(p_max_k)
//! ```
//!
//! is a second-order cone program over the columns `phi_bar_k` (one per
//! pair). The largest `gamma` whose optimal value stays within the budget
//! `delta` is found by bisection, and the modules carrying non-negligible
//! row-block energy at that point are the ones to switch on.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use thiserror::Error;

use crate::conic::{
    ComplexEmbedding, ConicError, ConicProblem, ConicSolver, SocConstraint, SolveStatus, SolverSettings, SparseVec,
};
use crate::metrics::AggregateH;
use crate::model::{ModuleMask, NetworkConfig, SparseSolution};
use crate::C64;

/// Upper end of the doubling search for an infeasible target.
pub const GAMMA_CAP: f64 = 1_099_511_627_776.0; // 2^40

/// Below this the bracket is treated as collapsed onto zero.
const GAMMA_FLOOR: f64 = 1e-12;

const MAX_BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SparsityError {
    #[error("budget delta must be positive, got {0}")]
    NonPositiveDelta(f64),
    #[error("weight alpha must be positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("SINR target must be positive, got {0}")]
    NonPositiveGamma(f64),
    #[error("bisection bracket: still feasible at gamma = {0}")]
    Bracket(f64),
    #[error("conic solver returned {0}")]
    Solver(SolveStatus),
    #[error(transparent)]
    Conic(#[from] ConicError),
    #[error("relaxed solution is identically zero, no module can be selected")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsityParams {
    /// Budget on the weighted mixed norm.
    pub delta: f64,
    /// Weight on the mixed norm.
    pub alpha: f64,
    /// Known-feasible lower end of the bracket (0 is always valid).
    pub gamma_lo: f64,
    /// First trial for the upper end; doubled until infeasible.
    pub gamma_hi: f64,
    /// Stop when `hi - lo <= gamma_tol * hi`.
    pub gamma_tol: f64,
    /// A module is active when its block norm exceeds this fraction of the
    /// largest one.
    pub block_threshold_rel: f64,
}

impl SparsityParams {
    /// Defaults for a budget: `alpha = 1/(delta + 0.01)`, bracket `[0, 1]`,
    /// relative tolerance `1e-3`, block threshold `1e-4`.
    pub fn for_delta(delta: f64) -> Result<Self, SparsityError> {
        Ok(SparsityParams {
            delta,
            alpha: alpha_from_delta(delta)?,
            gamma_lo: 0.0,
            gamma_hi: 1.0,
            gamma_tol: 1e-3,
            block_threshold_rel: 1e-4,
        })
    }

    pub fn validate(&self) -> Result<(), SparsityError> {
        if !(self.delta > 0.0) {
            return Err(SparsityError::NonPositiveDelta(self.delta));
        }
        if !(self.alpha > 0.0) {
            return Err(SparsityError::NonPositiveAlpha(self.alpha));
        }
        Ok(())
    }
}

pub fn alpha_from_delta(delta: f64) -> Result<f64, SparsityError> {
    if !(delta > 0.0) {
        return Err(SparsityError::NonPositiveDelta(delta));
    }
    Ok(1.0 / (delta + 0.01))
}

/// Largest budget worth sweeping:
/// `-0.005 + 0.5 sqrt(0.01^2 + sqrt(16 M K N max_k p_max_k))`.
pub fn delta_upper_bound(config: &NetworkConfig) -> f64 {
    let prod = 16.0 * (config.m * config.k * config.n) as f64 * config.max_p_max();
    -0.005 + 0.5 * Float::sqrt(1e-4 + Float::sqrt(prod))
}

/// Variable layout of [`build_p3`]: column `k` is embedded at `2 k N`, the
/// epigraph scalar of module `m` sits at `2 N K + m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct P3Layout {
    pub k: usize,
    pub n: usize,
    pub m: usize,
}

impl P3Layout {
    pub fn column(&self, k: usize) -> ComplexEmbedding {
        ComplexEmbedding::at(2 * k * self.n, self.n)
    }

    pub fn epigraph(&self, m: usize) -> usize {
        2 * self.n * self.k + m
    }

    pub fn n_vars(&self) -> usize {
        2 * self.n * self.k + self.m
    }

    pub fn columns(&self, x: &[f64]) -> Vec<Vec<C64>> {
        (0..self.k).map(|k| self.column(k).read(x)).collect()
    }
}

/// Rows of the SINR cones are divided by `sigma` so the constant entry is 1.
fn row_scale(aggregate: &AggregateH, sigma: f64) -> f64 {
    if sigma > 0.0 {
        return 1.0 / sigma;
    }
    let mx = aggregate
        .hbar
        .iter()
        .flat_map(|v| v.iter())
        .fold(0.0f64, |a, c| a.max(c.norm()));
    if mx > 0.0 {
        1.0 / mx
    } else {
        1.0
    }
}

/// Assembles the fixed-target cone program. Layout is given by [`P3Layout`].
pub fn build_p3(
    aggregate: &AggregateH,
    config: &NetworkConfig,
    gamma: f64,
    params: &SparsityParams,
) -> Result<(ConicProblem, P3Layout), SparsityError> {
    if !(gamma > 0.0) {
        return Err(SparsityError::NonPositiveGamma(gamma));
    }
    params.validate()?;
    let (kk, m, l) = (aggregate.k, aggregate.m, aggregate.l);
    let n = aggregate.n();
    let layout = P3Layout { k: kk, n, m };
    let mut p = ConicProblem::new(layout.n_vars());
    for b in 0..m {
        p.objective[layout.epigraph(b)] = params.alpha;
    }

    // Row-block Frobenius norms.
    for b in 0..m {
        let mut rows = Vec::with_capacity(2 * l * kk);
        for k in 0..kk {
            let col = layout.column(k);
            for i in b * l..(b + 1) * l {
                rows.push(SparseVec::unit(col.re(i)));
                rows.push(SparseVec::unit(col.im(i)));
            }
        }
        let zeros = vec![0.0; rows.len()];
        p.add_soc(SocConstraint::new(rows, zeros, SparseVec::unit(layout.epigraph(b)), 0.0));
    }

    // SINR targets.
    let sigma = Float::sqrt(config.sigma2);
    let s = row_scale(aggregate, sigma);
    let lift = Float::sqrt(1.0 + 1.0 / gamma);
    for k in 0..kk {
        let mut rows = Vec::with_capacity(2 * kk + 1);
        for j in 0..kk {
            let col = layout.column(j);
            rows.push(col.re_inner(aggregate.hbar(j, k), s));
            rows.push(col.im_inner(aggregate.hbar(j, k), s));
        }
        rows.push(SparseVec::new());
        let mut offsets = vec![0.0; 2 * kk];
        offsets.push(sigma * s);
        let own = layout.column(k);
        p.add_soc(SocConstraint::new(rows, offsets, own.re_inner(aggregate.hbar(k, k), s * lift), 0.0));
        p.add_eq(own.im_inner(aggregate.hbar(k, k), s), 0.0);
    }

    // Per-element power caps.
    for k in 0..kk {
        let col = layout.column(k);
        let cap = Float::sqrt(config.p_max[k]);
        for i in 0..n {
            p.add_soc(col.magnitude_cap(i, cap));
        }
    }
    Ok((p, layout))
}

/// One evaluation of the fixed-target problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BisectionStep {
    pub gamma: f64,
    /// Weighted optimal value; infinite when the target is unreachable.
    pub value: f64,
    pub feasible: bool,
    pub status: SolveStatus,
    pub block_norms: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Evaluation {
    gamma: f64,
    /// `sum_m ||Phi_bar^m||_F` at the optimum, without the weight.
    norm_sum: f64,
    status: SolveStatus,
    columns: Option<Vec<Vec<C64>>>,
}

/// Solves the fixed-target problem: returns the weighted optimal value and
/// the minimizer. An unreachable target gives `+inf` and a zero solution.
pub fn feasibility_value(
    aggregate: &AggregateH,
    config: &NetworkConfig,
    gamma: f64,
    params: &SparsityParams,
) -> Result<(f64, SparseSolution), SparsityError> {
    Bisector::new(aggregate, config).feasibility_value(gamma, params)
}

/// Repeated fixed-target solves on one channel realization.
///
/// The minimizer does not depend on `alpha` (it only scales the
/// objective), so evaluations are remembered by `gamma` and shared between
/// budgets. Monotonicity of the optimal value in `gamma` then lets earlier
/// evaluations tighten the starting bracket of a later bisection.
pub struct Bisector<'a> {
    aggregate: &'a AggregateH,
    config: &'a NetworkConfig,
    solver: ConicSolver,
    evals: Vec<Evaluation>,
}

/// Result of [`Bisector::run`].
#[derive(Debug, Clone, PartialEq)]
pub struct BisectionOutcome {
    pub solution: SparseSolution,
    pub trace: Vec<BisectionStep>,
}

impl<'a> Bisector<'a> {
    pub fn new(aggregate: &'a AggregateH, config: &'a NetworkConfig) -> Self {
        Self::with_settings(aggregate, config, SolverSettings::default())
    }

    pub fn with_settings(aggregate: &'a AggregateH, config: &'a NetworkConfig, settings: SolverSettings) -> Self {
        Bisector {
            aggregate,
            config,
            solver: ConicSolver::new(settings),
            evals: Vec::new(),
        }
    }

    fn evaluate(&mut self, gamma: f64) -> Result<&Evaluation, SparsityError> {
        if let Some(i) = self.evals.iter().position(|e| e.gamma == gamma) {
            return Ok(&self.evals[i]);
        }
        let unit = SparsityParams {
            alpha: 1.0,
            ..SparsityParams::for_delta(1.0)?
        };
        let (problem, layout) = build_p3(self.aggregate, self.config, gamma, &unit)?;
        let report = self.solver.solve(&problem)?;
        let eval = match report.status {
            SolveStatus::Optimal => Evaluation {
                gamma,
                norm_sum: report.objective_value,
                status: report.status,
                columns: Some(layout.columns(&report.x)),
            },
            status => Evaluation {
                gamma,
                norm_sum: f64::INFINITY,
                status,
                columns: None,
            },
        };
        self.evals.push(eval);
        Ok(self.evals.last().unwrap())
    }

    fn solution(&self, eval: &Evaluation, alpha: f64) -> SparseSolution {
        let a = self.aggregate;
        match &eval.columns {
            Some(cols) => SparseSolution::from_columns(cols.clone(), a.l, eval.gamma, alpha),
            None => {
                let mut s = SparseSolution::zero(a.k, a.m, a.l, alpha);
                s.gamma = eval.gamma;
                s.objective = f64::INFINITY;
                s
            }
        }
    }

    /// See [`feasibility_value`]. Solver breakdowns are errors here.
    pub fn feasibility_value(
        &mut self,
        gamma: f64,
        params: &SparsityParams,
    ) -> Result<(f64, SparseSolution), SparsityError> {
        params.validate()?;
        if !(gamma > 0.0) {
            return Err(SparsityError::NonPositiveGamma(gamma));
        }
        let eval = self.evaluate(gamma)?.clone();
        match eval.status {
            SolveStatus::Optimal | SolveStatus::Infeasible => {
                Ok((params.alpha * eval.norm_sum, self.solution(&eval, params.alpha)))
            }
            other => Err(SparsityError::Solver(other)),
        }
    }

    /// One traced feasibility test. Solver breakdowns count as infeasible.
    fn test(&mut self, gamma: f64, params: &SparsityParams, trace: &mut Vec<BisectionStep>) -> Result<bool, SparsityError> {
        let l = self.aggregate.l;
        let eval = self.evaluate(gamma)?;
        let value = params.alpha * eval.norm_sum;
        let feasible = eval.status == SolveStatus::Optimal && value <= params.delta;
        let block_norms = eval
            .columns
            .as_ref()
            .map(|c| crate::model::row_block_norms(c, l))
            .unwrap_or_default();
        trace.push(BisectionStep {
            gamma,
            value,
            feasible,
            status: eval.status,
            block_norms,
        });
        Ok(feasible)
    }

    fn feasible_cached(&self, e: &Evaluation, params: &SparsityParams) -> bool {
        e.status == SolveStatus::Optimal && params.alpha * e.norm_sum <= params.delta
    }

    /// Largest target within the budget, to relative width `gamma_tol`.
    pub fn run(&mut self, params: &SparsityParams) -> Result<BisectionOutcome, SparsityError> {
        params.validate()?;
        let mut trace = Vec::new();
        let mut lo = params.gamma_lo.max(0.0);
        let mut hi = params.gamma_hi.max(lo);

        // Earlier evaluations bound the answer from both sides.
        let mut known_hi = f64::INFINITY;
        for e in &self.evals {
            if self.feasible_cached(e, params) {
                lo = lo.max(e.gamma);
            } else {
                known_hi = known_hi.min(e.gamma);
            }
        }
        if known_hi.is_finite() && known_hi > lo {
            hi = known_hi;
        } else {
            if hi <= lo {
                hi = if lo > 0.0 { 2.0 * lo } else { 1.0 };
            }
            while self.test(hi, params, &mut trace)? {
                lo = hi;
                if hi >= GAMMA_CAP {
                    return Err(SparsityError::Bracket(hi));
                }
                hi *= 2.0;
            }
        }

        let mut steps = 0;
        while hi - lo > params.gamma_tol * hi && hi > GAMMA_FLOOR && steps < MAX_BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if self.test(mid, params, &mut trace)? {
                lo = mid;
            } else {
                hi = mid;
            }
            steps += 1;
        }

        let solution = if lo > 0.0 {
            let eval = self.evaluate(lo)?.clone();
            self.solution(&eval, params.alpha)
        } else {
            let a = self.aggregate;
            SparseSolution::zero(a.k, a.m, a.l, params.alpha)
        };
        Ok(BisectionOutcome { solution, trace })
    }
}

/// Largest SINR target reachable within the budget, with its relaxed
/// solution.
pub fn bisect_gamma(
    aggregate: &AggregateH,
    config: &NetworkConfig,
    params: &SparsityParams,
) -> Result<SparseSolution, SparsityError> {
    Ok(Bisector::new(aggregate, config).run(params)?.solution)
}

/// Modules whose block norm exceeds `block_threshold_rel` times the largest,
/// trimmed to the `config.q` largest (lower index wins ties).
pub fn identify_modules(
    sol: &SparseSolution,
    config: &NetworkConfig,
    params: &SparsityParams,
) -> Result<ModuleMask, SparsityError> {
    select_blocks(&sol.block_norms, params.block_threshold_rel, config.q)
}

/// Thresholding and budget rule behind [`identify_modules`].
pub fn select_blocks(norms: &[f64], threshold_rel: f64, q: Option<usize>) -> Result<ModuleMask, SparsityError> {
    let max = norms.iter().copied().fold(0.0f64, f64::max);
    if !(max > 0.0) {
        return Err(SparsityError::Degenerate);
    }
    let mut active: Vec<usize> = (0..norms.len())
        .filter(|&i| norms[i] > threshold_rel * max)
        .collect();
    if let Some(q) = q {
        if active.len() > q {
            active.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
            active.truncate(q);
        }
    }
    Ok(ModuleMask::from_indices(norms.len(), &active))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{precompute, sinr_quadratic};
    use crate::model::{mixed_norm, ChannelSet};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cgauss(rng: &mut ChaCha8Rng) -> C64 {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    /// Unit-scale channels with unit noise.
    fn instance(seed: u64, k: usize, m: usize, l: usize, p_max: f64) -> (ChannelSet, NetworkConfig) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = m * l;
        let ch = ChannelSet {
            k,
            m,
            l,
            h: (0..k).map(|_| (0..n).map(|_| cgauss(&mut rng)).collect()).collect(),
            g: (0..k).map(|_| (0..n).map(|_| cgauss(&mut rng)).collect()).collect(),
            direct: (0..k * k).map(|_| cgauss(&mut rng)).collect(),
        };
        let mut cfg = NetworkConfig::reference(k, m, l);
        cfg.sigma2 = 1.0;
        cfg.p_max = vec![p_max; k];
        (ch, cfg)
    }

    #[test]
    fn alpha_rule() {
        assert!((alpha_from_delta(4.99).unwrap() - 0.2).abs() < 1e-15);
        assert!((alpha_from_delta(0.99).unwrap() - 1.0).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for d in [0.1, 1.0, 10.0, 1e3, 1e9] {
            let a = alpha_from_delta(d).unwrap();
            assert!(a < prev && a > 0.0);
            prev = a;
        }
        assert!(alpha_from_delta(0.0).is_err());
        assert!(alpha_from_delta(-1.0).is_err());
    }

    #[test]
    fn delta_upper_bound_values() {
        let mut cfg = NetworkConfig::reference(5, 10, 20);
        cfg.p_max = vec![0.1; 5];
        assert!((delta_upper_bound(&cfg) - 5.6184154747523145).abs() < 1e-12);
        let mut one = NetworkConfig::reference(1, 1, 1);
        one.p_max = vec![1.0 / 16.0];
        assert!((delta_upper_bound(&one) - 0.4950249993750312).abs() < 1e-12);
        let lo = delta_upper_bound(&cfg);
        cfg.p_max = vec![1.6; 5];
        assert!(delta_upper_bound(&cfg) > lo);
    }

    #[test]
    fn single_pair_cone_is_the_sinr_target() {
        // K = N = 1: the cone holds iff |hbar phi|^2 / sigma^2 >= gamma.
        let (ch, cfg) = instance(3, 1, 1, 1, 100.0);
        let agg = precompute(&ch);
        let params = SparsityParams::for_delta(1.0).unwrap();
        let gamma = 2.0;
        let (p, layout) = build_p3(&agg, &cfg, gamma, &params).unwrap();
        assert_eq!(p.n_vars, 3);
        assert_eq!(p.eq.len(), 1);
        let hb = agg.hbar(0, 0)[0];
        for r in [0.5, 1.0, 1.5, 2.0, 3.0] {
            // phi_bar chosen so that hbar^H phi_bar = r, real.
            let phi = hb * (r / hb.norm_sqr());
            let mut x = vec![0.0; 3];
            x[layout.column(0).re(0)] = phi.re;
            x[layout.column(0).im(0)] = phi.im;
            x[layout.epigraph(0)] = phi.norm();
            let sinr = r * r / cfg.sigma2;
            let holds = p.max_cone_violation(&x) <= 1e-12;
            assert_eq!(holds, sinr >= gamma, "r = {r}");
            assert!(p.max_primal_residual(&x) < 1e-12);
        }
    }

    #[test]
    fn single_module_objective_is_weighted_frobenius() {
        let (ch, cfg) = instance(5, 2, 1, 3, 1.0);
        let agg = precompute(&ch);
        let params = SparsityParams::for_delta(2.0).unwrap();
        let (p, layout) = build_p3(&agg, &cfg, 0.5, &params).unwrap();
        let nz: Vec<_> = p.objective.iter().enumerate().filter(|(_, v)| **v != 0.0).collect();
        assert_eq!(nz, vec![(layout.epigraph(0), &params.alpha)]);
        assert!(build_p3(&agg, &cfg, 0.0, &params).is_err());
    }

    #[test]
    fn solved_point_meets_the_target() {
        for seed in 0..5 {
            let (ch, cfg) = instance(seed, 2, 2, 1, 4.0);
            let agg = precompute(&ch);
            let params = SparsityParams::for_delta(1.0).unwrap();
            for gamma in [0.05, 0.2] {
                let (value, sol) = feasibility_value(&agg, &cfg, gamma, &params).unwrap();
                if value.is_finite() {
                    let s = sinr_quadratic(&agg, &sol.phi_bar, cfg.sigma2);
                    for v in s {
                        assert!(v >= gamma * (1.0 - 1e-6), "seed {seed}: {v} < {gamma}");
                    }
                    assert!((sol.objective - value).abs() <= 1e-6 * value.max(1.0));
                }
            }
        }
    }

    #[test]
    fn value_is_monotone_in_gamma() {
        for seed in 10..14 {
            let (ch, cfg) = instance(seed, 2, 3, 2, 2.0);
            let agg = precompute(&ch);
            let params = SparsityParams::for_delta(1.0).unwrap();
            let mut b = Bisector::new(&agg, &cfg);
            let mut prev = 0.0;
            for gamma in [0.5, 1.0, 2.0, 4.0] {
                let (v, _) = b.feasibility_value(gamma, &params).unwrap();
                assert!(v >= prev - 1e-6, "seed {seed} gamma {gamma}: {v} < {prev}");
                prev = v;
            }
        }
    }

    #[test]
    fn small_target_needs_small_norm() {
        let (ch, cfg) = instance(1, 2, 2, 2, 1.0);
        let agg = precompute(&ch);
        let params = SparsityParams::for_delta(1.0).unwrap();
        let (v_small, _) = feasibility_value(&agg, &cfg, 1e-6, &params).unwrap();
        let (v_mid, _) = feasibility_value(&agg, &cfg, 1e-2, &params).unwrap();
        assert!(v_small < 1e-2 && v_small < v_mid);
    }

    #[test]
    fn zero_noise_single_pair_is_free() {
        let (ch, mut cfg) = instance(2, 1, 2, 2, 1.0);
        cfg.sigma2 = 0.0;
        let agg = precompute(&ch);
        let params = SparsityParams::for_delta(1.0).unwrap();
        for gamma in [1.0, 100.0] {
            let (v, _) = feasibility_value(&agg, &cfg, gamma, &params).unwrap();
            assert!(v.abs() < 1e-6, "{v}");
        }
    }

    /// Brute force for K = M = L = 1: sweep |phi_bar| and keep the best SINR
    /// whose weighted norm fits the budget.
    fn scalar_oracle(h: f64, sigma2: f64, p_max: f64, alpha: f64, delta: f64) -> f64 {
        let steps = 200_000;
        let rmax = p_max.sqrt();
        (0..=steps)
            .map(|i| rmax * i as f64 / steps as f64)
            .filter(|r| alpha * r <= delta)
            .map(|r| r * r * h * h / sigma2)
            .fold(0.0, f64::max)
    }

    #[test]
    fn bisection_matches_scalar_oracle() {
        let mut ch = instance(0, 1, 1, 1, 1.0).0;
        ch.h[0][0] = C64::new(0.6, 0.8);
        ch.g[0][0] = C64::new(1.0, 0.0);
        for (p_max, delta) in [(50.0, 100.0), (50.0, 2.0), (3.0, 0.7)] {
            let mut cfg = NetworkConfig::reference(1, 1, 1);
            cfg.sigma2 = 1.0;
            cfg.p_max = vec![p_max];
            let agg = precompute(&ch);
            let params = SparsityParams::for_delta(delta).unwrap();
            let sol = bisect_gamma(&agg, &cfg, &params).unwrap();
            let want = scalar_oracle(1.0, 1.0, p_max, params.alpha, delta);
            assert!(
                (sol.gamma - want).abs() <= 2e-3 * want,
                "p_max {p_max} delta {delta}: {} vs {want}",
                sol.gamma
            );
        }
    }

    #[test]
    fn bracket_shrinks_by_half() {
        let (ch, cfg) = instance(4, 2, 2, 1, 2.0);
        let agg = precompute(&ch);
        let params = SparsityParams::for_delta(1.0).unwrap();
        let out = Bisector::new(&agg, &cfg).run(&params).unwrap();
        let doubling = out.trace.iter().take_while(|s| s.feasible).count() + 1;
        let bisect = &out.trace[doubling..];
        let mut lo = if doubling > 1 { out.trace[doubling - 2].gamma } else { 0.0 };
        let mut hi = out.trace[doubling - 1].gamma;
        for s in bisect {
            assert!((s.gamma - 0.5 * (lo + hi)).abs() < 1e-12 * hi);
            if s.feasible {
                lo = s.gamma;
            } else {
                hi = s.gamma;
            }
        }
        assert!(hi - lo <= params.gamma_tol * hi);
        assert_eq!(out.solution.gamma, lo);
    }

    #[test]
    fn larger_budget_never_lowers_the_target() {
        for seed in 20..24 {
            let (ch, cfg) = instance(seed, 2, 3, 1, 2.0);
            let agg = precompute(&ch);
            let mut prev = 0.0;
            for delta in [0.3, 0.6, 1.2, 2.4] {
                let params = SparsityParams::for_delta(delta).unwrap();
                let g = bisect_gamma(&agg, &cfg, &params).unwrap().gamma;
                assert!(g >= prev * (1.0 - 2e-3), "seed {seed} delta {delta}: {g} < {prev}");
                prev = g;
            }
        }
    }

    #[test]
    fn shared_bisector_agrees_with_fresh_runs() {
        let (ch, cfg) = instance(31, 2, 3, 2, 2.0);
        let agg = precompute(&ch);
        let mut shared = Bisector::new(&agg, &cfg);
        for delta in [0.4, 0.8, 1.6] {
            let params = SparsityParams::for_delta(delta).unwrap();
            let a = shared.run(&params).unwrap().solution.gamma;
            let b = bisect_gamma(&agg, &cfg, &params).unwrap().gamma;
            assert!((a - b).abs() <= 2e-3 * b.max(a), "delta {delta}: {a} vs {b}");
        }
    }

    #[test]
    fn module_count_grows_with_budget() {
        let (ch, cfg) = instance(8, 2, 4, 2, 1.0);
        let agg = precompute(&ch);
        let mut b = Bisector::new(&agg, &cfg);
        let mut prev = 0;
        for delta in [0.1, 0.3, 0.6, 1.2, 2.4, 4.8] {
            let params = SparsityParams::for_delta(delta).unwrap();
            let sol = b.run(&params).unwrap().solution;
            let count = match identify_modules(&sol, &cfg, &params) {
                Ok(mask) => mask.cardinality(),
                Err(_) => 0,
            };
            assert!(count >= prev, "delta {delta}: {count} < {prev}");
            prev = count;
        }
    }

    #[test]
    fn thresholding_examples() {
        let mask = select_blocks(&[1.0, 1e-9, 0.8], 1e-4, None).unwrap();
        assert_eq!(mask.indices(), vec![0, 2]);
        let mask = select_blocks(&[0.5, 0.5], 1e-4, Some(1)).unwrap();
        assert_eq!(mask.indices(), vec![0]);
        let mask = select_blocks(&[0.1, 0.9, 0.5, 0.9], 1e-4, Some(2)).unwrap();
        assert_eq!(mask.indices(), vec![1, 3]);
        assert_eq!(select_blocks(&[0.0, 0.0], 1e-4, None), Err(SparsityError::Degenerate));
    }

    #[test]
    fn zero_solution_is_degenerate() {
        let cfg = NetworkConfig::reference(2, 3, 2);
        let params = SparsityParams::for_delta(1.0).unwrap();
        let sol = SparseSolution::zero(2, 3, 2, params.alpha);
        assert_eq!(identify_modules(&sol, &cfg, &params), Err(SparsityError::Degenerate));
    }

    fn matrix(k: usize, n: usize) -> impl Strategy<Value = Vec<Vec<C64>>> {
        prop::collection::vec(
            prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| C64::new(a, b)), n),
            k,
        )
    }

    proptest! {
        #[test]
        fn mixed_norm_axioms(x in matrix(3, 6), y in matrix(3, 6), s in -4.0..4.0f64) {
            let l = 2;
            let nx = mixed_norm(&x, l);
            prop_assert!(nx >= 0.0);
            let scaled: Vec<Vec<C64>> = x.iter().map(|c| c.iter().map(|v| v * s).collect()).collect();
            prop_assert!((mixed_norm(&scaled, l) - s.abs() * nx).abs() <= 1e-12 * (1.0 + nx * s.abs()));
            let sum: Vec<Vec<C64>> = x.iter().zip(&y).map(|(a, b)| a.iter().zip(b).map(|(u, v)| u + v).collect()).collect();
            prop_assert!(mixed_norm(&sum, l) <= nx + mixed_norm(&y, l) + 1e-12);
            let zero = vec![vec![C64::new(0.0, 0.0); 6]; 3];
            prop_assert_eq!(mixed_norm(&zero, l), 0.0);
            if x.iter().flatten().any(|v| v.norm() > 0.0) {
                prop_assert!(nx > 0.0);
            }
        }

        #[test]
        fn threshold_respects_budget(norms in prop::collection::vec(0.0..1.0f64, 1..8), q in 1usize..4) {
            if let Ok(mask) = select_blocks(&norms, 1e-4, Some(q)) {
                prop_assert!(mask.cardinality() <= q);
                prop_assert!(mask.cardinality() >= 1);
                let kept_min = mask.indices().iter().map(|&i| norms[i]).fold(f64::INFINITY, f64::min);
                for i in 0..norms.len() {
                    if !mask.active[i] && norms[i] > 1e-4 * norms.iter().copied().fold(0.0, f64::max) {
                        prop_assert!(norms[i] <= kept_min);
                    }
                }
            }
        }
    }
}
