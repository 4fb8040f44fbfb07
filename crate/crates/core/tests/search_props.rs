mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{search_grid_oracle, search_sub_instance};
use robustsense::instances::{build_search_instance, SearchCase};
use robustsense::pipeline::table1_configs;
use robustsense::search::{
    inner_allocation, solve_search, solve_search_with, Enumeration, SearchInstance,
};

#[test]
fn inner_allocation_satisfies_kkt_and_beats_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for case in 0..100 {
        let (inst, u, selected) = search_sub_instance(&mut rng);
        let (z, value) = inner_allocation(&selected, &inst, &u).unwrap();
        let r = inst.rate_scale();
        let total: f64 = z.iter().sum();
        assert!((total - inst.budget).abs() <= 1e-9 * inst.budget);
        let marginal = |k: usize| inst.weights[k] * r * u[k] * (-r * u[k] * z[k]).exp();
        let active: Vec<usize> = selected.iter().copied().filter(|&k| z[k] > 0.0).collect();
        assert!(!active.is_empty());
        let lambda = marginal(active[0]);
        for &k in &active {
            assert!(
                (marginal(k) - lambda).abs() <= 1e-8 * lambda,
                "case {case}: square {k} marginal {} vs {lambda}",
                marginal(k)
            );
        }
        for &k in selected.iter().filter(|&&k| z[k] == 0.0) {
            assert!(marginal(k) <= lambda * (1.0 + 1e-8), "case {case}");
        }
        let oracle = search_grid_oracle(&inst, &u, &selected);
        assert!(
            value <= oracle + 1e-4,
            "case {case}: {value} vs grid {oracle}"
        );
        assert!(z
            .iter()
            .enumerate()
            .all(|(k, &v)| v >= 0.0 && (v == 0.0 || selected.contains(&k))));
    }
}

/// Equal sweep widths: search the `κ` squares with the largest priors and
/// water-fill the budget by explicit active-set shrinking.
fn uniform_sweep_oracle(inst: &SearchInstance, sweep: f64) -> f64 {
    let c = inst.rate_scale() * sweep;
    let mut order: Vec<usize> = (0..inst.weights.len()).collect();
    order.sort_by(|&a, &b| inst.weights[b].total_cmp(&inst.weights[a]));
    let chosen = &order[..inst.max_squares.min(order.len())];
    for m in (1..=chosen.len()).rev() {
        let act = &chosen[..m];
        let level =
            (act.iter().map(|&k| inst.weights[k].ln()).sum::<f64>() - c * inst.budget) / m as f64;
        let z: Vec<f64> = act
            .iter()
            .map(|&k| (inst.weights[k].ln() - level) / c)
            .collect();
        if z.iter().all(|&v| v >= 0.0) {
            let searched: f64 = act
                .iter()
                .zip(&z)
                .map(|(&k, &zk)| inst.weights[k] * (-c * zk).exp())
                .sum();
            let rest: f64 = order
                .iter()
                .filter(|k| !act.contains(k))
                .map(|&k| inst.weights[k])
                .sum();
            return searched + rest;
        }
    }
    unreachable!("a single square always takes the whole budget")
}

#[test]
fn uniform_sweep_values_match_closed_form() {
    for kappa in [1, 4, 8, 16, 20] {
        for delta in [0.0, 2.5, 5.0, 10.0] {
            let inst = build_search_instance(SearchCase::A, kappa, delta);
            let u = inst.worst_case_sweep(delta);
            let got = solve_search(&inst, &u).unwrap().value;
            let want = uniform_sweep_oracle(&inst, 20.0 - delta);
            assert!(
                (got - want).abs() <= 1e-12,
                "κ={kappa} δ={delta}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn pruned_enumeration_agrees_on_every_table_row() {
    for (case, delta, kappa) in table1_configs() {
        let inst = build_search_instance(case, kappa, delta);
        for u in [inst.sweep.clone(), inst.worst_case_sweep(delta)] {
            let a = solve_search_with(&inst, &u, Enumeration::Pruned).unwrap();
            let b = solve_search_with(&inst, &u, Enumeration::Exhaustive).unwrap();
            assert_eq!(a.value, b.value, "{case} δ={delta} κ={kappa}");
            assert_eq!(a.x, b.x, "{case} δ={delta} κ={kappa}");
            assert!(a.nodes <= b.nodes);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn more_squares_or_time_never_hurts(
        kappa in 1usize..12,
        budget in 1.0f64..30.0,
        extra in 0.0f64..10.0,
        delta in 0.0f64..10.0,
    ) {
        let mut inst = build_search_instance(SearchCase::A, kappa, delta);
        inst.budget = budget;
        let u = inst.worst_case_sweep(delta);
        let base = solve_search(&inst, &u).unwrap().value;

        let mut wider = inst.clone();
        wider.max_squares = kappa + 1;
        prop_assert!(solve_search(&wider, &u).unwrap().value <= base + 1e-15);

        let mut longer = inst.clone();
        longer.budget = budget + extra;
        prop_assert!(solve_search(&longer, &u).unwrap().value <= base + 1e-15);
    }
}
