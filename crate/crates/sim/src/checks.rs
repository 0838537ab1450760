//! Property and oracle batteries.
//!
//! Each battery measures something on seeded random instances and returns
//! the raw statistics; the thresholds live with the callers (`irs-sim
//! check` and the acceptance tests).

use std::time::{Duration, Instant};

use irs_core::altopt::{algorithm1, AltOptSettings, ASCENT_SLACK};
use irs_core::channel::{complex_gaussian, draw_realization};
use irs_core::conic::{solve, ConicProblem, SocConstraint, SolveStatus, SolverSettings, SparseVec};
use irs_core::metrics::{precompute, sinr_direct_all, sinr_quadratic, total_power};
use irs_core::model::{
    block_view, ChannelSet, ModuleMask, NetworkConfig, PhaseProfile, PowerAllocation,
};
use irs_core::sparsity::{delta_upper_bound, identify_modules, Bisector, SparsityParams};
use irs_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// i.i.d. `CN(0, 1)` channels.
pub fn gaussian_channels(rng: &mut ChaCha8Rng, k: usize, m: usize, l: usize) -> ChannelSet {
    let n = m * l;
    let mut vecs = |count: usize| -> Vec<Vec<C64>> {
        (0..count)
            .map(|_| (0..n).map(|_| complex_gaussian(rng, 1.0)).collect())
            .collect()
    };
    let h = vecs(k);
    let g = vecs(k);
    let direct = (0..k * k).map(|_| complex_gaussian(rng, 1.0)).collect();
    ChannelSet { k, m, l, h, g, direct }
}

fn random_mask(rng: &mut ChaCha8Rng, m: usize) -> ModuleMask {
    loop {
        let active: Vec<bool> = (0..m).map(|_| rng.gen_bool(0.5)).collect();
        if active.iter().any(|&a| a) {
            return ModuleMask { active };
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormEquivalence {
    pub instances: usize,
    /// Largest `|a - b| / max(|a|, |b|)` over all pairs and instances.
    pub max_rel_err: f64,
    pub elapsed: Duration,
}

/// Direct-channel SINRs against the quadratic form in the relaxed columns
/// `sqrt(p_k) phi`, on random `K <= 4`, `N <= 16` instances.
pub fn form_equivalence(instances: usize, seed: u64) -> FormEquivalence {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let k = rng.gen_range(1..=4);
        let l = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=16 / l);
        let ch = gaussian_channels(&mut rng, k, m, l);
        let phi: Vec<C64> = (0..m * l)
            .map(|_| C64::from_polar(rng.gen_range(0.0..=1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        let phases = PhaseProfile::new(phi, l);
        let p: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..2.0)).collect();
        let sigma2 = 10f64.powf(rng.gen_range(-3.0..1.0));
        let direct = sinr_direct_all(&ch, &phases, &PowerAllocation::new(p.clone()), sigma2);
        let cols: Vec<Vec<C64>> = p.iter().map(|&pk| phases.phi.iter().map(|f| f * pk.sqrt()).collect()).collect();
        let quad = sinr_quadratic(&precompute(&ch), &cols, sigma2);
        for (a, b) in direct.iter().zip(&quad) {
            let scale = a.abs().max(b.abs());
            if scale > 0.0 {
                worst = worst.max((a - b).abs() / scale);
            }
        }
    }
    FormEquivalence {
        instances,
        max_rel_err: worst,
        elapsed: start.elapsed(),
    }
}

/// Random problem in `n` variables boxed to `[-1, 1]`, strictly feasible at
/// a known interior point.
pub fn random_socp(rng: &mut ChaCha8Rng, n: usize, cones: usize) -> ConicProblem {
    let mut p = ConicProblem::new(n);
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
    for i in 0..n {
        p.objective[i] = rng.gen_range(-1.0..1.0);
        p.set_bounds(i, -1.0, 1.0);
    }
    for _ in 0..cones {
        let rows = rng.gen_range(1..=3);
        let a: Vec<SparseVec> = (0..rows)
            .map(|_| SparseVec::from_pairs((0..n).map(|j| (j, rng.gen_range(-1.0..1.0)))))
            .collect();
        let b: Vec<f64> = (0..rows).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let c = SparseVec::from_pairs((0..n).map(|j| (j, rng.gen_range(-0.3..0.3))));
        let mut soc = SocConstraint::new(a, b, c, 0.0);
        soc.d = soc.excess(&x0) + rng.gen_range(0.05..0.5);
        p.add_soc(soc);
    }
    p
}

/// Feasible interval of `t` in `||u + v t|| <= w + z t`, from the roots of
/// the squared form. The set is convex, so its finite ends are such roots.
fn soc_interval(u: &[f64], v: &[f64], w: f64, z: f64) -> Option<(f64, f64)> {
    let h = |t: f64| -> f64 {
        let s: f64 = u.iter().zip(v).map(|(a, b)| (a + b * t) * (a + b * t)).sum();
        s.sqrt() - (w + z * t)
    };
    let qa = v.iter().map(|b| b * b).sum::<f64>() - z * z;
    let qb = u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() - w * z;
    let qc = u.iter().map(|a| a * a).sum::<f64>() - w * w;
    let mut roots: Vec<f64> = Vec::with_capacity(2);
    if qa.abs() <= 1e-14 * (qb.abs() + qc.abs()) {
        if qb != 0.0 {
            roots.push(-qc / (2.0 * qb));
        }
    } else {
        let disc = qb * qb - qa * qc;
        if disc >= 0.0 {
            // Stable pairing of the two roots.
            let q = -(qb + qb.signum() * disc.sqrt());
            if q != 0.0 {
                roots.push(q / qa);
                roots.push(qc / q);
            } else {
                roots.push(-qb / qa);
            }
        }
    }
    // Roots of the squared form also include points of `-||u + v t|| = w + z t`.
    roots.retain(|&r| {
        let scale = 1.0 + w.abs() + (z * r).abs() + u.iter().map(|a| a.abs()).sum::<f64>();
        r.is_finite() && h(r).abs() <= 1e-9 * scale
    });
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + b.abs()));
    match roots[..] {
        [] => (h(0.0) <= 0.0).then_some((f64::NEG_INFINITY, f64::INFINITY)),
        [r] => {
            let step = 1.0 + r.abs();
            match (h(r - step) <= 0.0, h(r + step) <= 0.0) {
                (true, false) => Some((f64::NEG_INFINITY, r)),
                (false, true) => Some((r, f64::INFINITY)),
                (true, true) => Some((f64::NEG_INFINITY, f64::INFINITY)),
                (false, false) => Some((r, r)),
            }
        }
        [lo, .., hi] => {
            if h(0.5 * (lo + hi)) <= 0.0 {
                Some((lo, hi))
            } else if h(lo - 1.0 - lo.abs()) <= 0.0 {
                Some((f64::NEG_INFINITY, lo))
            } else {
                Some((hi, f64::INFINITY))
            }
        }
    }
}

/// Coefficients of the last variable in each cone.
struct LastVar {
    v: Vec<Vec<f64>>,
    z: Vec<f64>,
}

impl LastVar {
    fn new(p: &ConicProblem) -> Self {
        let j = p.n_vars - 1;
        let coeff = |row: &SparseVec| row.iter().filter(|&(i, _)| i == j).map(|(_, a)| a).sum::<f64>();
        LastVar {
            v: p.soc.iter().map(|s| s.a.iter().map(coeff).collect()).collect(),
            z: p.soc.iter().map(|s| coeff(&s.c)).collect(),
        }
    }
}

/// Exact minimum over the last variable with the others fixed.
fn last_coordinate_min(p: &ConicProblem, last: &LastVar, x: &mut [f64], u: &mut Vec<f64>) -> f64 {
    let j = p.n_vars - 1;
    let (mut lo, mut hi) = (p.lower[j], p.upper[j]);
    x[j] = 0.0;
    for (i, s) in p.soc.iter().enumerate() {
        u.clear();
        u.extend(s.a.iter().zip(&s.b).map(|(row, b)| row.dot(x) + b));
        match soc_interval(u, &last.v[i], s.c.dot(x) + s.d, last.z[i]) {
            Some((a, b)) => {
                lo = lo.max(a);
                hi = hi.min(b);
            }
            None => return f64::INFINITY,
        }
    }
    if lo > hi {
        return f64::INFINITY;
    }
    x[j] = if p.objective[j] >= 0.0 { lo } else { hi };
    if p.max_cone_violation(x) > 1e-9 {
        return f64::INFINITY;
    }
    p.objective_value(x)
}

/// Minimum of a convex (extended-valued) function on `[lo, hi]`: a grid
/// scan, then golden-section refinement of the bracket around the best
/// grid point. Returns the best value and where it was seen.
///
/// The grid is uniform plus, given a `hint`, geometrically spaced points on
/// both sides of it, so a narrow finite region near the hint is not missed.
fn scan_then_refine(
    lo: f64,
    hi: f64,
    points: usize,
    hint: Option<f64>,
    f: &mut dyn FnMut(f64) -> f64,
) -> (f64, f64) {
    const INV_PHI2: f64 = 0.381_966_011_250_105;
    let cell = (hi - lo) / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|i| lo + cell * i as f64).collect();
    if let Some(h) = hint {
        grid.push(h);
        for s in 0..24 {
            let d = cell * 0.5f64.powi(s);
            grid.extend([h - d, h + d].into_iter().filter(|t| (lo..=hi).contains(t)));
        }
        grid.sort_by(f64::total_cmp);
        grid.dedup();
    }
    let vals: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    let (i, &fm) = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    if !fm.is_finite() {
        return (f64::INFINITY, grid[i]);
    }
    let (mut a, mut m, mut b, mut fm) = (grid[i.saturating_sub(1)], grid[i], grid[(i + 1).min(grid.len() - 1)], fm);
    for _ in 0..200 {
        if b - a <= 1e-12 * (1.0 + m.abs()) {
            break;
        }
        let t = if m - a > b - m { m - INV_PHI2 * (m - a) } else { m + INV_PHI2 * (b - m) };
        let ft = f(t);
        if ft < fm {
            if t < m { b = m } else { a = m }
            m = t;
            fm = ft;
        } else if t < m {
            a = t;
        } else {
            b = t;
        }
    }
    (fm, m)
}

struct Nested<'a> {
    p: &'a ConicProblem,
    last: LastVar,
    x: Vec<f64>,
    u: Vec<f64>,
    /// Best coordinate found at each level on its previous visit.
    hints: Vec<Option<f64>>,
}

impl Nested<'_> {
    fn min_from(&mut self, k: usize) -> f64 {
        if k + 1 == self.p.n_vars {
            return last_coordinate_min(self.p, &self.last, &mut self.x, &mut self.u);
        }
        let (lo, hi, hint) = (self.p.lower[k], self.p.upper[k], self.hints[k]);
        let (value, at) = scan_then_refine(lo, hi, 17, hint, &mut |t| {
            self.x[k] = t;
            self.min_from(k + 1)
        });
        if value.is_finite() {
            self.hints[k] = Some(at);
        }
        value
    }
}

/// Optimal value of a small bounded SOCP (no equality rows) found without
/// the interior-point solver.
///
/// The outer variables are searched one at a time, each by a grid scan and
/// a golden-section refinement of the partial minimum over the remaining
/// variables (a convex function of the fixed ones). With all but the last
/// variable fixed, every cone cuts out an interval whose ends are roots of a
/// quadratic, so the innermost step is exact.
pub fn grid_oracle(p: &ConicProblem) -> f64 {
    assert!(p.eq.is_empty(), "oracle handles bounds and cones only");
    let mut search = Nested {
        p,
        last: LastVar::new(p),
        x: vec![0.0; p.n_vars],
        u: Vec::new(),
        hints: vec![None; p.n_vars],
    };
    let coarse = search.min_from(0);
    // A second pass starts every level from the first pass's best point.
    coarse.min(search.min_from(0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicOracle {
    pub instances: usize,
    /// Largest `|solver - oracle|` over instances solved to optimality.
    pub max_abs_gap: f64,
    /// Infeasible labels on problems built to be feasible.
    pub false_infeasible: usize,
    /// Any other non-optimal outcome, including errors.
    pub not_optimal: usize,
    pub elapsed: Duration,
}

/// Random SOCPs with `n <= 4` against [`grid_oracle`].
pub fn conic_oracle(instances: usize, seed: u64) -> ConicOracle {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let settings = SolverSettings::default();
    let mut out = ConicOracle {
        instances,
        max_abs_gap: 0.0,
        false_infeasible: 0,
        not_optimal: 0,
        elapsed: Duration::ZERO,
    };
    for i in 0..instances {
        let n = 1 + i % 4;
        let cones = rng.gen_range(1..=3);
        let p = random_socp(&mut rng, n, cones);
        match solve(&p, &settings).map(|r| (r.status, r.objective_value)) {
            Ok((SolveStatus::Optimal, v)) => {
                out.max_abs_gap = out.max_abs_gap.max((v - grid_oracle(&p)).abs());
            }
            Ok((SolveStatus::Infeasible, _)) => out.false_infeasible += 1,
            _ => out.not_optimal += 1,
        }
    }
    out.elapsed = start.elapsed();
    out
}

pub const BISECTION_GAMMAS: [f64; 6] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];

#[derive(Debug, Clone, PartialEq)]
pub struct BisectionSoundness {
    pub instances: usize,
    /// Grid steps where the value dropped by more than `1e-6`.
    pub monotone_violations: usize,
    /// Optimal points with some `SINR_k < gamma (1 - 1e-5)`.
    pub sinr_shortfalls: usize,
    /// Optimal (feasible) points that were checked.
    pub feasible_points: usize,
    /// Solver breakdowns (neither optimal nor infeasible).
    pub solver_errors: usize,
}

/// Fixed-target values over [`BISECTION_GAMMAS`] on `CN(0, 1)` instances
/// with `K = 2`, `M = 4`, `L = 2`, unit noise and power caps of 0.1, so the
/// upper targets are unreachable on part of the instances.
pub fn bisection_soundness(instances: usize, seed: u64) -> BisectionSoundness {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cfg = NetworkConfig::reference(2, 4, 2);
    cfg.sigma2 = 1.0;
    cfg.p_max = vec![0.1; 2];
    let params = SparsityParams::for_delta(1.0).expect("positive budget");
    let mut out = BisectionSoundness {
        instances,
        monotone_violations: 0,
        sinr_shortfalls: 0,
        feasible_points: 0,
        solver_errors: 0,
    };
    for _ in 0..instances {
        let ch = gaussian_channels(&mut rng, 2, 4, 2);
        let agg = precompute(&ch);
        let mut bisector = Bisector::new(&agg, &cfg);
        let mut prev = f64::NEG_INFINITY;
        for &gamma in &BISECTION_GAMMAS {
            let (value, sol) = match bisector.feasibility_value(gamma, &params) {
                Ok(v) => v,
                Err(_) => {
                    out.solver_errors += 1;
                    continue;
                }
            };
            if value < prev - 1e-6 {
                out.monotone_violations += 1;
            }
            prev = value;
            if value.is_finite() {
                out.feasible_points += 1;
                let sinrs = sinr_quadratic(&agg, &sol.phi_bar, cfg.sigma2);
                if sinrs.iter().any(|&s| s < gamma * (1.0 - 1e-5)) {
                    out.sinr_shortfalls += 1;
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionInstance {
    /// Min-SINR after alternating optimization on the selected modules.
    pub selected: f64,
    pub selected_cardinality: usize,
    /// Best over every subset of cardinality at least `Q`.
    pub best_any: f64,
    /// Best over the subsets of cardinality at most `Q`.
    pub best_within_budget: f64,
    /// Mean over all subsets with the selected cardinality.
    pub random_mean: f64,
}

/// Budget of [`brute_force_selection`] in the `check` CLI, as a fraction of
/// [`delta_upper_bound`]: the middle of the useful range.
pub const SELECTION_DELTA_FRACTION: f64 = 0.5;

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn subsets_of_size(m: usize, size: usize) -> Vec<ModuleMask> {
    (1u32..1 << m)
        .filter(|bits| bits.count_ones() as usize == size)
        .map(|bits| ModuleMask {
            active: (0..m).map(|i| bits >> i & 1 == 1).collect(),
        })
        .collect()
}

/// Pipeline selection (budget `delta_fraction` times [`delta_upper_bound`],
/// at most `Q = 2` modules) against exhaustive enumeration on
/// reference-scenario instances with `M = 3`, `L = 2`, `K = 2`.
pub fn brute_force_selection(instances: usize, seed: u64, delta_fraction: f64) -> Vec<SelectionInstance> {
    let mut cfg = NetworkConfig::reference(2, 3, 2);
    cfg.q = Some(2);
    let q = 2;
    let params = SparsityParams::for_delta(delta_fraction * delta_upper_bound(&cfg)).expect("positive budget");
    let settings = AltOptSettings {
        seed: seed ^ 0xA5A5,
        ..AltOptSettings::default()
    };
    let mut out = Vec::with_capacity(instances);
    for i in 0..instances {
        let (_, ch) = draw_realization(&cfg, irs_core::rng::mix(seed, i as u64)).expect("valid config");
        let agg = precompute(&ch);
        let run = |mask: &ModuleMask| algorithm1(&ch, mask, &cfg, &settings).map(|s| s.gamma_out).unwrap_or(0.0);
        let sol = Bisector::new(&agg, &cfg).run(&params).map(|o| o.solution);
        let mask = sol
            .ok()
            .and_then(|s| identify_modules(&s, &cfg, &params).ok())
            .unwrap_or_else(|| ModuleMask::none(cfg.m));
        let selected = if mask.is_empty() { 0.0 } else { run(&mask) };
        let by_size: Vec<Vec<f64>> = (0..=cfg.m)
            .map(|s| subsets_of_size(cfg.m, s).iter().map(&run).collect())
            .collect();
        let best = |sizes: &mut dyn Iterator<Item = usize>| {
            sizes.flat_map(|s| by_size[s].iter().copied()).fold(0.0, f64::max)
        };
        let card = mask.cardinality();
        let same = &by_size[card];
        out.push(SelectionInstance {
            selected,
            selected_cardinality: card,
            best_any: best(&mut (q..=cfg.m)),
            best_within_budget: best(&mut (1..=q)),
            random_mean: if same.is_empty() { 0.0 } else { same.iter().sum::<f64>() / same.len() as f64 },
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm {
    pub instances: usize,
    /// Largest `|achieved - closed form| / closed form`.
    pub max_rel_gap: f64,
}

/// Single pair on a random nonempty mask against
/// `p_max (sum |g_n| |h_n|)^2 / sigma^2`.
pub fn single_pair_closed_form(instances: usize, seed: u64) -> ClosedForm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for i in 0..instances {
        let m = rng.gen_range(1..=4);
        let l = rng.gen_range(1..=4);
        let cfg = NetworkConfig::reference(1, m, l);
        let (_, ch) = draw_realization(&cfg, rng.gen()).expect("valid config");
        let mask = random_mask(&mut rng, m);
        let s: f64 = mask
            .element_indices(l)
            .iter()
            .map(|&n| ch.g[0][n].norm() * ch.h[0][n].norm())
            .sum();
        let want = cfg.p_max[0] * s * s / cfg.sigma2;
        let settings = AltOptSettings {
            seed: i as u64,
            ..AltOptSettings::default()
        };
        let got = algorithm1(&ch, &mask, &cfg, &settings).map(|st| st.gamma_out).unwrap_or(0.0);
        worst = worst.max((got - want).abs() / want);
    }
    ClosedForm {
        instances,
        max_rel_gap: worst,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AscentCheck {
    pub runs: usize,
    /// Runs whose history drops below `previous * (1 - 1e-6)` somewhere.
    pub violating_runs: usize,
    pub errors: usize,
}

/// Alternating-optimization histories on reference-scenario instances with
/// `K <= 5`, `M <= 6` and random masks.
pub fn monotone_ascent(runs: usize, seed: u64) -> AscentCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = AscentCheck {
        runs,
        violating_runs: 0,
        errors: 0,
    };
    for i in 0..runs {
        let k = rng.gen_range(1..=5);
        let m = rng.gen_range(1..=6);
        let l = rng.gen_range(1..=3);
        let cfg = NetworkConfig::reference(k, m, l);
        let (_, ch) = draw_realization(&cfg, rng.gen()).expect("valid config");
        let mask = random_mask(&mut rng, m);
        let settings = AltOptSettings {
            seed: i as u64,
            ..AltOptSettings::default()
        };
        match algorithm1(&ch, &mask, &cfg, &settings) {
            Ok(st) => {
                if st.history.windows(2).any(|w| w[1] < w[0] * (1.0 - ASCENT_SLACK)) {
                    out.violating_runs += 1;
                }
            }
            Err(_) => out.errors += 1,
        }
    }
    out
}

/// Consumed power with `K = 5` STs at 0.1 W each, 10 dBm static power per
/// terminal, amplifier factor 1.2 and all ten 20-element modules on.
pub fn power_model_example() -> f64 {
    let cfg = NetworkConfig::reference(5, 10, 20);
    total_power(&PowerAllocation::new(vec![0.1; 5]), &ModuleMask::all(10), &cfg)
}

/// Concatenated module blocks reproduce random vectors.
pub fn block_round_trip(instances: usize, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..instances).all(|_| {
        let m = rng.gen_range(1..=8);
        let l = rng.gen_range(1..=8);
        let v: Vec<C64> = (0..m * l).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let joined: Vec<C64> = (0..m)
            .flat_map(|i| block_view(&v, l, i).expect("in range").to_vec())
            .collect();
        joined == v && block_view(&v, l, m).is_err()
    })
}

/// Relaxed solutions use fewer modules only when the budget shrinks: the
/// active count over an increasing budget grid never drops.
pub fn module_count_monotone(instances: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cfg = NetworkConfig::reference(2, 4, 1);
    cfg.sigma2 = 1.0;
    cfg.p_max = vec![1.0; 2];
    let grid = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0];
    let mut violations = 0;
    for _ in 0..instances {
        let ch = gaussian_channels(&mut rng, 2, 4, 1);
        let agg = precompute(&ch);
        let mut bisector = Bisector::new(&agg, &cfg);
        let mut prev = 0;
        for &d in &grid {
            let params = SparsityParams::for_delta(d).expect("positive budget");
            let count = bisector
                .run(&params)
                .ok()
                .and_then(|o| identify_modules(&o.solution, &cfg, &params).ok())
                .map_or(0, |m| m.cardinality());
            if count < prev {
                violations += 1;
            }
            prev = count;
        }
    }
    violations
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Invariants,
    Oracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

/// Runs a battery at `scale` instances per check (at least 1).
pub fn run_suite(suite: Suite, scale: usize, seed: u64) -> Vec<CheckResult> {
    let n = scale.max(1);
    match suite {
        Suite::Invariants => {
            let forms = form_equivalence(10 * n, seed);
            let bis = bisection_soundness(n, seed);
            let asc = monotone_ascent(n, seed);
            let power = power_model_example();
            let counts = module_count_monotone(n, seed);
            vec![
                check(
                    "sinr_forms_agree",
                    forms.max_rel_err <= 1e-10,
                    format!("{} instances, max rel err {:.3e}", forms.instances, forms.max_rel_err),
                ),
                check(
                    "block_round_trip",
                    block_round_trip(10 * n, seed),
                    format!("{} random vectors", 10 * n),
                ),
                check(
                    "feasibility_value_monotone",
                    bis.monotone_violations == 0 && bis.solver_errors == 0,
                    format!(
                        "{} instances, {} violations, {} solver errors",
                        bis.instances, bis.monotone_violations, bis.solver_errors
                    ),
                ),
                check(
                    "feasible_points_meet_target",
                    bis.sinr_shortfalls == 0,
                    format!("{} of {} points short", bis.sinr_shortfalls, bis.feasible_points),
                ),
                check(
                    "module_count_monotone_in_budget",
                    counts == 0,
                    format!("{n} instances, {counts} drops"),
                ),
                check(
                    "alternating_ascent",
                    asc.violating_runs == 0 && asc.errors == 0,
                    format!("{} runs, {} violating, {} errors", asc.runs, asc.violating_runs, asc.errors),
                ),
                check(
                    "power_model_example",
                    (power - 2.7).abs() <= 1e-12,
                    format!("{power} W"),
                ),
            ]
        }
        Suite::Oracle => {
            let conic = conic_oracle(4 * n, seed);
            let pair = single_pair_closed_form(n, seed);
            let sel = brute_force_selection(n.min(10), seed, SELECTION_DELTA_FRACTION);
            let mut ratios: Vec<f64> = sel
                .iter()
                .map(|s| if s.best_within_budget > 0.0 { s.selected / s.best_within_budget } else { 0.0 })
                .collect();
            let med = median(&mut ratios);
            vec![
                check(
                    "conic_vs_grid",
                    conic.max_abs_gap <= 1e-3 && conic.false_infeasible == 0 && conic.not_optimal == 0,
                    format!(
                        "{} problems, max gap {:.2e}, {} false infeasible, {} other",
                        conic.instances, conic.max_abs_gap, conic.false_infeasible, conic.not_optimal
                    ),
                ),
                check(
                    "single_pair_closed_form",
                    pair.max_rel_gap <= 0.01,
                    format!("{} instances, max rel gap {:.2e}", pair.instances, pair.max_rel_gap),
                ),
                check(
                    "selection_vs_enumeration",
                    med >= 0.9,
                    format!("{} instances, median ratio to best within budget {med:.4}", sel.len()),
                ),
            ]
        }
    }
}
