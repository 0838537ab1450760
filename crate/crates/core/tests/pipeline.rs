//! End-to-end runs through the public API: channels, budgeted relaxation,
//! module identification and alternating optimization.

use irs_core::altopt::{algorithm1, AltOptSettings};
use irs_core::channel::draw_realization;
use irs_core::conic::{solve, text, ConicProblem, SocConstraint, SolveStatus, SolverSettings, SparseVec};
use irs_core::metrics::{min_of, precompute, sinr_direct_all, sinr_quadratic, total_power};
use irs_core::model::NetworkConfig;
use irs_core::rng::mix;
use irs_core::sparsity::{delta_upper_bound, identify_modules, Bisector, SparsityParams};

#[test]
fn budgeted_selection_then_alternating_optimization() {
    let cfg = NetworkConfig::reference(3, 4, 2);
    let params = SparsityParams::for_delta(0.5 * delta_upper_bound(&cfg)).unwrap();
    for i in 0..5 {
        let seed = mix(9, i);
        let (_, ch) = draw_realization(&cfg, seed).unwrap();
        let agg = precompute(&ch);
        let outcome = Bisector::new(&agg, &cfg).run(&params).unwrap();
        let sol = &outcome.solution;
        assert!(sol.objective <= params.delta * (1.0 + 1e-6), "budget exceeded: {}", sol.objective);
        let relaxed = sinr_quadratic(&agg, &sol.phi_bar, cfg.sigma2);
        assert!(min_of(&relaxed) >= sol.gamma * (1.0 - 1e-5));

        let mask = identify_modules(sol, &cfg, &params).unwrap();
        if mask.is_empty() {
            continue;
        }
        let settings = AltOptSettings { seed, ..AltOptSettings::default() };
        let state = algorithm1(&ch, &mask, &cfg, &settings).unwrap();
        assert!(state.phases.within_unit_disc());
        assert!(state.powers.within(&cfg.p_max, 1e-9));
        for m in 0..cfg.m {
            if !mask.active[m] {
                assert!(state.phases.block(m).unwrap().iter().all(|c| c.norm() == 0.0));
            }
        }
        let direct = min_of(&sinr_direct_all(&ch, &state.phases, &state.powers, cfg.sigma2));
        assert!((direct - state.gamma_out).abs() <= 1e-9 * state.gamma_out);
        assert!(total_power(&state.powers, &mask, &cfg) > 0.0);
    }
}

#[test]
fn conic_text_round_trip_preserves_the_solution() {
    let mut p = ConicProblem::new(3);
    p.objective = vec![-1.0, -0.5, 0.25];
    for i in 0..3 {
        p.set_bounds(i, -2.0, 2.0);
    }
    p.add_soc(SocConstraint::new(
        vec![SparseVec::from_pairs([(0, 1.0)]), SparseVec::from_pairs([(1, 1.0), (2, 0.5)])],
        vec![0.1, -0.2],
        SparseVec::from_pairs([(2, 0.3)]),
        1.0,
    ));
    let dumped = text::to_string(&p);
    let parsed = text::parse_problem(&dumped).unwrap();
    assert_eq!(parsed, p);
    let a = solve(&p, &SolverSettings::default()).unwrap();
    let b = solve(&parsed, &SolverSettings::default()).unwrap();
    assert_eq!(a.status, SolveStatus::Optimal);
    assert_eq!(a.objective_value, b.objective_value);
}
