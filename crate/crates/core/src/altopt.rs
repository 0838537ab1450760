//! Max-min SINR over powers and phases on a fixed set of active modules,
//! by alternating partial-linearization subproblems.
//!
//! Write `SINR_k = xi_k / eta_k`. At the current point `(x^t, g^t)` with
//! `g^t = min_k SINR_k`, the bilinear term `g * eta_k(x)` is linearized in
//! `g`, which gives the subproblem
//!
//! ```text
//! maximize  g
//! s.t.      xi_k(x) - g^t eta_k(x) >= (g - g^t) eta_k(x^t)   for all k
//! ```
//!
//! For powers `xi` and `eta` are linear, so this is a linear program. For
//! phases `xi_k = p_k |phi^H hbar_kk|^2` is replaced by its tangent (a
//! global under-estimator) and `eta_k` stays a convex quadratic, so the
//! subproblem is a second-order cone program. The current point is always
//! feasible with `g >= g^t`, and any optimum keeps every true SINR at or
//! above `g^t`, so the ascent only depends on solver accuracy; each step is
//! still checked against the true SINRs before it is accepted.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;
use rand::Rng;
use thiserror::Error;

use crate::conic::{ComplexEmbedding, ConicError, ConicProblem, ConicSolver, SocConstraint, SolveStatus, SparseVec};
use crate::metrics::{cdot, min_of, precompute, sinr_from_gains, AggregateH};
use crate::model::{ChannelSet, ModuleMask, NetworkConfig, PhaseProfile, PowerAllocation};
use crate::rng::{mix, substream, StreamTag};
use crate::C64;

/// Relative slack allowed when comparing the new and old min-SINR.
pub const ASCENT_SLACK: f64 = 1e-6;

/// Consecutive rejected steps after which [`algorithm1`] stops.
pub const MAX_REJECTIONS: usize = 3;

const POWER_ITERS: usize = 30;
const POWER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AltOptError {
    #[error("no module is active")]
    EmptyMask,
    #[error("mask has {got} modules, channels have {want}")]
    MaskLength { got: usize, want: usize },
    #[error(transparent)]
    Conic(#[from] ConicError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Init,
    Phase,
    Power,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::Init => "init",
            StepKind::Phase => "phase",
            StepKind::Power => "power",
        }
    }
}

/// One row of the per-run trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub step: StepKind,
    pub gamma_out: f64,
    /// Min-SINR of the candidate, whether or not it was accepted.
    pub min_sinr_true: f64,
    /// `None` for steps that did not call the cone solver.
    pub solver_status: Option<SolveStatus>,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AltOptState {
    /// Zero outside the active modules.
    pub phases: PhaseProfile,
    pub powers: PowerAllocation,
    /// True min-SINR of `(phases, powers)`.
    pub gamma_out: f64,
    /// Completed outer iterations.
    pub iteration: usize,
    /// `gamma_out` after initialization and after every outer iteration.
    pub history: Vec<f64>,
    /// Blend factor towards the subproblem solution; halved on rejection.
    pub trust: f64,
    pub consecutive_rejections: usize,
    /// Set when a subproblem solve did not reach optimality.
    pub solver_flagged: bool,
    pub trace: Vec<TraceRow>,
}

/// Outcome of one subproblem step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub accepted: bool,
    pub status: Option<SolveStatus>,
    pub candidate: f64,
}

fn true_min_sinr(aggregate: &AggregateH, phases: &PhaseProfile, powers: &[f64], sigma2: f64) -> f64 {
    min_of(&sinr_from_gains(&aggregate.effective_gains(phases), powers, sigma2))
}

fn check_mask(channels_m: usize, mask: &ModuleMask) -> Result<(), AltOptError> {
    if mask.active.len() != channels_m {
        return Err(AltOptError::MaskLength {
            got: mask.active.len(),
            want: channels_m,
        });
    }
    if mask.is_empty() {
        return Err(AltOptError::EmptyMask);
    }
    Ok(())
}

/// Half power everywhere, unit-modulus phases with seeded uniform angles on
/// the active modules.
pub fn init_state(
    channels: &ChannelSet,
    mask: &ModuleMask,
    config: &NetworkConfig,
    seed: u64,
) -> Result<AltOptState, AltOptError> {
    check_mask(channels.m, mask)?;
    let mut rng = substream(seed, StreamTag::PhaseInit, 0);
    let mut phases = PhaseProfile::zeros(channels.m, channels.l);
    for i in mask.element_indices(channels.l) {
        let theta: f64 = rng.gen::<f64>() * 2.0 * PI;
        phases.phi[i] = C64::from_polar(1.0, theta);
    }
    let powers = PowerAllocation::new(config.p_max.iter().map(|p| 0.5 * p).collect());
    let aggregate = precompute(channels);
    let gamma_out = true_min_sinr(&aggregate, &phases, &powers.p, config.sigma2);
    Ok(AltOptState {
        phases,
        powers,
        gamma_out,
        iteration: 0,
        history: vec![gamma_out],
        trust: 1.0,
        consecutive_rejections: 0,
        solver_flagged: false,
        trace: vec![TraceRow {
            iteration: 0,
            step: StepKind::Init,
            gamma_out,
            min_sinr_true: gamma_out,
            solver_status: None,
            accepted: true,
        }],
    })
}

/// Projects every entry onto the closed unit disc.
fn clamp_unit(phi: &mut [C64]) {
    for v in phi {
        let r = v.norm();
        if r > 1.0 {
            *v /= r;
        }
    }
}

/// Phase subproblem at the current point, over the active elements only.
fn phase_problem(
    state: &AltOptState,
    aggregate: &AggregateH,
    sigma2: f64,
    active: &[usize],
    g_ref: f64,
) -> (ConicProblem, ComplexEmbedding, usize) {
    let kk = aggregate.k;
    let emb = ComplexEmbedding::at(0, active.len());
    let g_var = emb.end();
    let mut prob = ConicProblem::new(g_var + 1);
    prob.objective[g_var] = -1.0;

    let restrict = |v: &[C64]| -> Vec<C64> { active.iter().map(|&i| v[i]).collect() };
    let p = &state.powers.p;
    let gains = aggregate.effective_gains(&state.phases);
    let sigma = Float::sqrt(sigma2);
    for k in 0..kk {
        // Noise-normalized eta_k at the current point.
        let eta_t = 1.0
            + (0..kk)
                .filter(|&j| j != k)
                .map(|j| p[j] * gains[j * kk + k])
                .sum::<f64>()
                / sigma2;
        // Tangent of xi_k / sigma^2: 2 p_k Re(c^* a^H phi) - p_k |c|^2, with
        // a = hbar_kk and c = a^H phi_t.
        let a = restrict(aggregate.hbar(k, k));
        let c = cdot(aggregate.hbar(k, k), &state.phases.phi);
        let tilted: Vec<C64> = a.iter().map(|v| c * v).collect();
        let mut w = emb.re_inner(&tilted, 2.0 * p[k] / (sigma2 * g_ref));
        w.push(g_var, -eta_t / g_ref);
        let w0 = -p[k] * c.norm_sqr() / (sigma2 * g_ref) + eta_t - 1.0;
        // ||y||^2 <= w  as  ||(y, (w - 1)/2)|| <= (w + 1)/2.
        let mut rows = Vec::with_capacity(2 * kk);
        let mut offsets = Vec::with_capacity(2 * kk);
        for j in (0..kk).filter(|&j| j != k) {
            if p[j] <= 0.0 {
                continue;
            }
            let hj = restrict(aggregate.hbar(j, k));
            let s = Float::sqrt(p[j]) / sigma;
            rows.push(emb.re_inner(&hj, s));
            rows.push(emb.im_inner(&hj, s));
            offsets.extend([0.0, 0.0]);
        }
        rows.push(w.scaled(0.5));
        offsets.push(0.5 * (w0 - 1.0));
        prob.add_soc(SocConstraint::new(rows, offsets, w.scaled(0.5), 0.5 * (w0 + 1.0)));
    }
    for i in 0..active.len() {
        prob.add_soc(emb.magnitude_cap(i, 1.0));
    }
    (prob, emb, g_var)
}

fn record(state: &mut AltOptState, step: StepKind, candidate: f64, status: Option<SolveStatus>, accepted: bool) {
    state.trace.push(TraceRow {
        iteration: state.iteration,
        step,
        gamma_out: state.gamma_out,
        min_sinr_true: candidate,
        solver_status: status,
        accepted,
    });
}

fn reject(state: &mut AltOptState) {
    state.trust *= 0.5;
    state.consecutive_rejections += 1;
}

fn accept(state: &mut AltOptState, gamma: f64) {
    state.gamma_out = gamma;
    state.trust = (2.0 * state.trust).min(1.0);
    state.consecutive_rejections = 0;
}

/// One phase update with powers held fixed.
pub fn phase_step(
    state: &mut AltOptState,
    aggregate: &AggregateH,
    config: &NetworkConfig,
    mask: &ModuleMask,
) -> Result<StepReport, AltOptError> {
    phase_step_with(state, aggregate, config, mask, &mut ConicSolver::default())
}

/// [`phase_step`] reusing a solver (and its cached symbolic analysis).
pub fn phase_step_with(
    state: &mut AltOptState,
    aggregate: &AggregateH,
    config: &NetworkConfig,
    mask: &ModuleMask,
    solver: &mut ConicSolver,
) -> Result<StepReport, AltOptError> {
    check_mask(aggregate.m, mask)?;
    let active = mask.element_indices(aggregate.l);
    let g_ref = if state.gamma_out > 0.0 { state.gamma_out } else { 1e-12 };
    let (prob, emb, _) = phase_problem(state, aggregate, config.sigma2, &active, g_ref);
    let report = solver.solve(&prob)?;
    if report.status != SolveStatus::Optimal {
        state.solver_flagged = true;
        reject(state);
        record(state, StepKind::Phase, state.gamma_out, Some(report.status), false);
        return Ok(StepReport {
            accepted: false,
            status: Some(report.status),
            candidate: state.gamma_out,
        });
    }
    let target = emb.read(&report.x);
    let mut cand = state.phases.clone();
    for (&i, v) in active.iter().zip(&target) {
        cand.phi[i] = cand.phi[i] + (v - cand.phi[i]) * state.trust;
    }
    clamp_unit(&mut cand.phi);
    let gamma = true_min_sinr(aggregate, &cand, &state.powers.p, config.sigma2);
    let ok = gamma >= state.gamma_out * (1.0 - ASCENT_SLACK);
    if ok {
        state.phases = cand;
        accept(state, gamma);
    } else {
        reject(state);
    }
    record(state, StepKind::Phase, gamma, Some(report.status), ok);
    Ok(StepReport {
        accepted: ok,
        status: Some(report.status),
        candidate: gamma,
    })
}

/// Max-min SINR power control for a fixed `K x K` gain matrix
/// (`gains[j * K + k]` is ST j to DT k), by repeated partial-linearization
/// linear programs started from `p0`. Returns the powers and their min-SINR.
pub fn optimize_powers(
    gains: &[f64],
    p_max: &[f64],
    sigma2: f64,
    p0: &[f64],
    solver: &mut ConicSolver,
) -> Result<(Vec<f64>, f64, SolveStatus), AltOptError> {
    let kk = p_max.len();
    let mut p = p0.to_vec();
    let mut best = min_of(&sinr_from_gains(gains, &p, sigma2));
    let mut status = SolveStatus::Optimal;
    for _ in 0..POWER_ITERS {
        // Variables: x_k = p_k / p_max_k in [0, 1], then g.
        let mut prob = ConicProblem::new(kk + 1);
        prob.objective[kk] = -1.0;
        for k in 0..kk {
            prob.set_bounds(k, 0.0, 1.0);
        }
        let g_ref = best.max(0.0);
        for k in 0..kk {
            let eta_t = sigma2
                + (0..kk)
                    .filter(|&j| j != k)
                    .map(|j| p[j] * gains[j * kk + k])
                    .sum::<f64>();
            // (xi_k(x) - g_ref eta_k(x) - (g - g_ref) eta_t) / eta_t >= 0
            let mut row = SparseVec::new();
            for j in 0..kk {
                let coef = if j == k {
                    p_max[k] * gains[k * kk + k]
                } else {
                    -g_ref * p_max[j] * gains[j * kk + k]
                };
                if coef != 0.0 {
                    row.push(j, coef / eta_t);
                }
            }
            row.push(kk, -1.0);
            prob.add_soc(SocConstraint::new(Vec::new(), Vec::new(), row, g_ref - g_ref * sigma2 / eta_t));
        }
        let report = solver.solve(&prob)?;
        status = report.status;
        if report.status != SolveStatus::Optimal {
            break;
        }
        let cand: Vec<f64> = (0..kk)
            .map(|k| (report.x[k] * p_max[k]).clamp(0.0, p_max[k]))
            .collect();
        let g = min_of(&sinr_from_gains(gains, &cand, sigma2));
        if g < best * (1.0 - ASCENT_SLACK) {
            break;
        }
        let gain = g - best;
        p = cand;
        best = g;
        if gain <= POWER_TOL * best.abs().max(1e-12) {
            break;
        }
    }
    Ok((p, best, status))
}

/// One power update with phases held fixed.
pub fn power_step(
    state: &mut AltOptState,
    aggregate: &AggregateH,
    config: &NetworkConfig,
) -> Result<StepReport, AltOptError> {
    power_step_with(state, aggregate, config, &mut ConicSolver::default())
}

pub fn power_step_with(
    state: &mut AltOptState,
    aggregate: &AggregateH,
    config: &NetworkConfig,
    solver: &mut ConicSolver,
) -> Result<StepReport, AltOptError> {
    let gains = aggregate.effective_gains(&state.phases);
    let (p, _, status) = optimize_powers(&gains, &config.p_max, config.sigma2, &state.powers.p, solver)?;
    if status != SolveStatus::Optimal {
        state.solver_flagged = true;
    }
    let gamma = true_min_sinr(aggregate, &state.phases, &p, config.sigma2);
    let ok = gamma >= state.gamma_out * (1.0 - ASCENT_SLACK);
    if ok {
        state.powers = PowerAllocation::new(p);
        accept(state, gamma);
    } else {
        reject(state);
    }
    record(state, StepKind::Power, gamma, Some(status), ok);
    Ok(StepReport {
        accepted: ok,
        status: Some(status),
        candidate: gamma,
    })
}

/// Settings of [`algorithm1`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AltOptSettings {
    /// Stop when `|delta gamma_out| / max(gamma_out, 1e-12) < tol`.
    pub tol: f64,
    pub max_outer: usize,
    /// Seed for the initial phases.
    pub seed: u64,
    /// Independent starts; the best final state is kept. Start 0 uses
    /// `seed`, start `r` uses `mix(seed, r)`.
    pub restarts: usize,
}

impl Default for AltOptSettings {
    fn default() -> Self {
        AltOptSettings {
            tol: 1e-4,
            max_outer: 100,
            seed: 0,
            restarts: 1,
        }
    }
}

/// Alternates [`phase_step`] and [`power_step`] from [`init_state`] until
/// `gamma_out` settles.
///
/// The problem is nonconvex and block ascent stops at coordinate-wise
/// optima, so different starts can end at different values; `restarts > 1`
/// keeps the best of several (earliest start wins ties).
pub fn algorithm1(
    channels: &ChannelSet,
    mask: &ModuleMask,
    config: &NetworkConfig,
    settings: &AltOptSettings,
) -> Result<AltOptState, AltOptError> {
    let aggregate = precompute(channels);
    let mut best: Option<AltOptState> = None;
    for r in 0..settings.restarts.max(1) {
        let seed = if r == 0 { settings.seed } else { mix(settings.seed, r as u64) };
        let state = single_start(channels, &aggregate, mask, config, settings, seed)?;
        if best.as_ref().map_or(true, |b| state.gamma_out > b.gamma_out) {
            best = Some(state);
        }
    }
    Ok(best.expect("at least one start"))
}

fn single_start(
    channels: &ChannelSet,
    aggregate: &AggregateH,
    mask: &ModuleMask,
    config: &NetworkConfig,
    settings: &AltOptSettings,
    seed: u64,
) -> Result<AltOptState, AltOptError> {
    let mut state = init_state(channels, mask, config, seed)?;
    let mut phase_solver = ConicSolver::default();
    let mut power_solver = ConicSolver::default();
    for _ in 0..settings.max_outer {
        let before = state.gamma_out;
        state.iteration += 1;
        phase_step_with(&mut state, aggregate, config, mask, &mut phase_solver)?;
        power_step_with(&mut state, aggregate, config, &mut power_solver)?;
        state.history.push(state.gamma_out);
        let change = (state.gamma_out - before).abs() / state.gamma_out.max(1e-12);
        if change < settings.tol || state.consecutive_rejections >= MAX_REJECTIONS {
            break;
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::sinr_direct_all;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cgauss(rng: &mut ChaCha8Rng) -> C64 {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    fn instance(seed: u64, k: usize, m: usize, l: usize) -> (ChannelSet, NetworkConfig) {
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
        cfg.sigma2 = 0.5;
        cfg.p_max = vec![2.0; k];
        (ch, cfg)
    }

    fn closed_form_single_pair(ch: &ChannelSet, mask: &ModuleMask, cfg: &NetworkConfig) -> f64 {
        let s: f64 = mask
            .element_indices(ch.l)
            .iter()
            .map(|&n| ch.g[0][n].norm() * ch.h[0][n].norm())
            .sum();
        cfg.p_max[0] * s * s / cfg.sigma2
    }

    #[test]
    fn empty_mask_is_rejected() {
        let (ch, cfg) = instance(0, 2, 3, 2);
        assert_eq!(
            init_state(&ch, &ModuleMask::none(3), &cfg, 1).unwrap_err(),
            AltOptError::EmptyMask
        );
        assert!(matches!(
            init_state(&ch, &ModuleMask::all(2), &cfg, 1),
            Err(AltOptError::MaskLength { .. })
        ));
    }

    #[test]
    fn initial_state() {
        let (ch, cfg) = instance(1, 1, 3, 2);
        let mask = ModuleMask::from_indices(3, &[0, 2]);
        let s = init_state(&ch, &mask, &cfg, 9).unwrap();
        assert_eq!(s, init_state(&ch, &mask, &cfg, 9).unwrap());
        assert_ne!(s.phases, init_state(&ch, &mask, &cfg, 10).unwrap().phases);
        assert_eq!(s.powers.p, vec![1.0]);
        for (i, v) in s.phases.phi.iter().enumerate() {
            if (2..4).contains(&i) {
                assert_eq!(*v, C64::new(0.0, 0.0));
            } else {
                assert!((v.norm() - 1.0).abs() < 1e-12);
            }
        }
        let agg = precompute(&ch);
        let direct = 1.0 * cdot(&s.phases.phi, agg.hbar(0, 0)).norm_sqr() / cfg.sigma2;
        assert!((s.gamma_out - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn single_pair_phase_step_aligns() {
        let (ch, cfg) = instance(2, 1, 3, 3);
        let mask = ModuleMask::from_indices(3, &[1, 2]);
        let mut s = init_state(&ch, &mask, &cfg, 3).unwrap();
        let agg = precompute(&ch);
        s.powers = PowerAllocation::new(cfg.p_max.clone());
        s.gamma_out = true_min_sinr(&agg, &s.phases, &s.powers.p, cfg.sigma2);
        for _ in 0..3 {
            phase_step(&mut s, &agg, &cfg, &mask).unwrap();
        }
        let want = closed_form_single_pair(&ch, &mask, &cfg);
        assert!((s.gamma_out - want).abs() <= 0.01 * want, "{} vs {want}", s.gamma_out);
    }

    #[test]
    fn converged_state_is_a_fixed_point() {
        let (ch, cfg) = instance(3, 1, 2, 2);
        let mask = ModuleMask::all(2);
        let mut s = algorithm1(&ch, &mask, &cfg, &AltOptSettings::default()).unwrap();
        let before = s.gamma_out;
        let agg = precompute(&ch);
        phase_step(&mut s, &agg, &cfg, &mask).unwrap();
        assert!((s.gamma_out - before).abs() <= 1e-6 * before);
    }

    #[test]
    fn phase_steps_ascend() {
        for seed in 0..4 {
            let (ch, cfg) = instance(10 + seed, 2, 3, 2);
            let mask = ModuleMask::all(3);
            let agg = precompute(&ch);
            let mut s = init_state(&ch, &mask, &cfg, seed).unwrap();
            let mut prev = s.gamma_out;
            for _ in 0..10 {
                phase_step(&mut s, &agg, &cfg, &mask).unwrap();
                assert!(s.gamma_out >= prev * (1.0 - ASCENT_SLACK));
                prev = s.gamma_out;
            }
        }
    }

    #[test]
    fn single_pair_power_is_full() {
        let gains = [3.0];
        let mut solver = ConicSolver::default();
        let (p, g, _) = optimize_powers(&gains, &[2.0], 0.5, &[1.0], &mut solver).unwrap();
        assert!((p[0] - 2.0).abs() < 1e-6);
        assert!((g - 12.0).abs() < 1e-5);
    }

    #[test]
    fn decoupled_pairs_use_full_power() {
        let mut solver = ConicSolver::default();
        let gains = [1.5, 0.0, 0.0, 1.5];
        let (p, g, _) = optimize_powers(&gains, &[1.0, 1.0], 1.0, &[0.5, 0.5], &mut solver).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-6 && (p[1] - 1.0).abs() < 1e-6, "{p:?}");
        assert!((g - 1.5).abs() < 1e-6);

        // Unequal pairs: only the weakest has to be at its cap.
        let gains = [1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.5];
        let (p, g, _) = optimize_powers(&gains, &[1.0, 2.0, 3.0], 1.0, &[0.5, 1.0, 1.5], &mut solver).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-6, "{p:?}");
        for (v, m) in p.iter().zip([1.0, 2.0, 3.0]) {
            assert!(*v >= 0.0 && *v <= m);
        }
        assert!((g - 1.0).abs() < 1e-6);
    }

    #[test]
    fn symmetric_pairs_share_power_equally() {
        let gains = [2.0, 0.4, 0.4, 2.0];
        let mut solver = ConicSolver::default();
        let (p, g, _) = optimize_powers(&gains, &[1.0, 1.0], 0.3, &[0.2, 0.9], &mut solver).unwrap();
        // Grid oracle at 1e-3 resolution.
        let mut best = (0.0, 0.0, 0.0);
        for i in 0..=1000 {
            for j in 0..=1000 {
                let q = [i as f64 / 1000.0, j as f64 / 1000.0];
                let v = min_of(&sinr_from_gains(&gains, &q, 0.3));
                if v > best.0 {
                    best = (v, q[0], q[1]);
                }
            }
        }
        assert!((p[0] - p[1]).abs() < 1e-3, "{p:?}");
        assert!(g >= best.0 - 1e-6, "{g} vs {}", best.0);
    }

    #[test]
    fn single_pair_algorithm_reaches_closed_form() {
        for seed in 0..5 {
            let (ch, cfg) = instance(20 + seed, 1, 4, 2);
            let mask = ModuleMask::from_indices(4, &[0, 3]);
            let s = algorithm1(&ch, &mask, &cfg, &AltOptSettings::default()).unwrap();
            let want = closed_form_single_pair(&ch, &mask, &cfg);
            assert!((s.gamma_out - want).abs() <= 0.01 * want, "seed {seed}: {} vs {want}", s.gamma_out);
        }
    }

    fn best_random_sample(agg: &AggregateH, cfg: &NetworkConfig, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = 0.0f64;
        for _ in 0..1000 {
            let phi: Vec<C64> = (0..agg.n()).map(|_| C64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI))).collect();
            let p: Vec<f64> = cfg.p_max.iter().map(|m| rng.gen_range(0.0..*m)).collect();
            best = best.max(true_min_sinr(agg, &PhaseProfile::new(phi, agg.l), &p, cfg.sigma2));
        }
        best
    }

    #[test]
    fn multi_start_beats_random_sampling() {
        // A single start stalls below the sampled optimum on roughly a third
        // of these instances; 32 starts must not.
        let settings = AltOptSettings {
            restarts: 32,
            ..Default::default()
        };
        for seed in 0..50 {
            let (ch, cfg) = instance(1000 + seed, 2, 2, 1);
            let s = algorithm1(&ch, &ModuleMask::all(2), &cfg, &settings).unwrap();
            let sampled = best_random_sample(&precompute(&ch), &cfg, 41);
            assert!(s.gamma_out >= sampled * (1.0 - 1e-6), "seed {seed}: {} < {sampled}", s.gamma_out);
        }
    }

    #[test]
    fn restarts_never_hurt() {
        for seed in 0..10 {
            let (ch, cfg) = instance(2000 + seed, 2, 2, 1);
            let mask = ModuleMask::all(2);
            let one = algorithm1(&ch, &mask, &cfg, &AltOptSettings::default()).unwrap();
            let many = algorithm1(&ch, &mask, &cfg, &AltOptSettings { restarts: 4, ..Default::default() }).unwrap();
            assert!(many.gamma_out >= one.gamma_out);
        }
    }

    #[test]
    fn final_state_invariants() {
        for seed in 0..6 {
            let (ch, cfg) = instance(60 + seed, 3, 4, 2);
            let mask = ModuleMask::from_indices(4, &[0, 2, 3]);
            let s = algorithm1(&ch, &mask, &cfg, &AltOptSettings { seed, ..Default::default() }).unwrap();
            for w in s.history.windows(2) {
                assert!(w[1] >= w[0] * (1.0 - ASCENT_SLACK), "{:?}", s.history);
            }
            let direct = min_of(&sinr_direct_all(&ch, &s.phases, &s.powers, cfg.sigma2));
            assert!((direct - s.gamma_out).abs() <= 1e-6 * s.gamma_out);
            assert!(s.phases.max_magnitude() <= 1.0 + 1e-8);
            assert!(s.powers.within(&cfg.p_max, 0.0));
            for i in 2..4 {
                assert_eq!(s.phases.phi[i], C64::new(0.0, 0.0));
            }
            let rot = s.phases.rotated(1.234);
            let g_rot = min_of(&sinr_direct_all(&ch, &rot, &s.powers, cfg.sigma2));
            assert!((g_rot - direct).abs() < 1e-10 * direct.max(1.0));
        }
    }
}
