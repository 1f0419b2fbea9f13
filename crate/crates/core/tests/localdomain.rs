mod common;

use std::collections::BTreeSet;

use tmas_core::compose::strip_clocks;
use tmas_core::localdomain::{
    over_approx_local_domain, over_approx_mas, OverApproxOptions, Priority,
};
use tmas_core::network::{tuple_name, Network};
use tmas_core::random::{random_mas, Bounds};
use tmas_core::semantics::{exact_local_domain, ExploreOptions};

fn qualified_vars(mg: &tmas_core::TmasGraph) -> Vec<String> {
    Network::from_mas(mg).unwrap().vars.iter().map(|v| v.name.clone()).collect()
}

#[test]
fn over_approximation_contains_direct_reach() {
    for seed in 0..300 {
        let mg = random_mas(&mut common::rng(seed), &Bounds::default()).unwrap();
        let w = qualified_vars(&mg);
        let (over, _) = over_approx_mas(&mg, &w, OverApproxOptions::default()).unwrap();
        for (locs, vals) in common::project(&common::naive_untimed_reach(&mg), &w) {
            let at = over.domain.get(&tuple_name(&locs)).cloned().unwrap_or_default();
            assert!(vals.is_subset(&at), "seed {seed} at {locs:?}");
        }
    }
}

#[test]
fn timed_exact_within_untimed_exact_within_over() {
    for seed in 0..300 {
        let mg = random_mas(&mut common::rng(seed), &Bounds::default()).unwrap();
        let w = qualified_vars(&mg);
        let net = Network::from_mas(&mg).unwrap();
        let timed = exact_local_domain(&net, &w, true, ExploreOptions::default()).unwrap();
        let untimed = exact_local_domain(&net, &w, false, ExploreOptions::default()).unwrap();
        let (over, _) = over_approx_mas(&mg, &w, OverApproxOptions::default()).unwrap();
        assert!(timed.is_subset(&untimed), "seed {seed}");
        assert!(untimed.is_subset(&over.domain), "seed {seed}");
    }
}

#[test]
fn work_order_does_not_change_fixpoint() {
    for seed in 0..300 {
        let mg = random_mas(&mut common::rng(seed), &Bounds::default()).unwrap();
        let w = qualified_vars(&mg);
        let run = |priority| {
            over_approx_mas(&mg, &w, OverApproxOptions { priority, coarse: false })
                .unwrap()
                .0
                .domain
        };
        let a = run(Priority::PendingCount);
        assert_eq!(a, run(Priority::Fifo), "seed {seed}");
        assert_eq!(a, run(Priority::Lifo), "seed {seed}");
    }
}

#[test]
fn unreachable_locations_are_empty_and_initial_is_present() {
    for seed in 0..200 {
        let g = common::clocked_graph(seed, 3);
        let w: Vec<String> = g.variables.iter().map(|v| v.name.clone()).collect();
        let d = over_approx_local_domain(&strip_clocks(&g), &w, OverApproxOptions::default())
            .unwrap()
            .domain;
        assert_eq!(d.map.len(), g.locations.len());
        let eta0 = g.initial_evaluation().unwrap();
        let init: Vec<i64> = w.iter().map(|v| eta0.get(v).unwrap()).collect();
        assert!(d.get(&g.initial_location).unwrap().contains(&init));
        let net = Network::from_graph(&strip_clocks(&g)).unwrap();
        let exact = exact_local_domain(&net, &w, false, ExploreOptions::default()).unwrap();
        for l in &g.locations {
            if exact.get(l).is_none() {
                continue;
            }
            assert!(!d.get(l).unwrap().is_empty(), "seed {seed} at {l}");
        }
    }
}

#[test]
fn coarse_mode_covers_local_variables() {
    for seed in 0..200 {
        let mg = random_mas(&mut common::rng(seed), &Bounds::default()).unwrap();
        let reach = common::naive_untimed_reach(&mg);
        for (i, g) in mg.agents.iter().enumerate() {
            let w: Vec<String> = mg.local_variables(i).iter().map(|v| v.name.clone()).collect();
            let coarse = over_approx_local_domain(
                &strip_clocks(g),
                &w,
                OverApproxOptions { priority: Priority::PendingCount, coarse: true },
            )
            .unwrap()
            .domain;
            for (locs, eta) in &reach {
                let vals: Vec<i64> = w.iter().map(|v| eta.get(&mg.qualify(i, v)).unwrap()).collect();
                let at: BTreeSet<Vec<i64>> = coarse.get(&locs[i]).cloned().unwrap_or_default();
                assert!(at.contains(&vals), "seed {seed} agent {i}");
            }
        }
    }
}

#[test]
fn projection_is_monotone() {
    for seed in 0..100 {
        let mg = random_mas(&mut common::rng(seed), &Bounds::default()).unwrap();
        let w = qualified_vars(&mg);
        let net = Network::from_mas(&mg).unwrap();
        let small = exact_local_domain(&net, &w, true, ExploreOptions::default()).unwrap();
        let (big, combined) = over_approx_mas(&mg, &w, OverApproxOptions::default()).unwrap();
        for i in 0..mg.agents.len() {
            let ps = tmas_core::localdomain::project_local_domain(&small, &combined, &mg, i).unwrap();
            let pb = tmas_core::localdomain::project_local_domain(&big.domain, &combined, &mg, i).unwrap();
            assert!(ps.is_subset(&pb), "seed {seed}");
        }
    }
}
