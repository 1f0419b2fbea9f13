//! Acceptance suite: one PASS/FAIL line per criterion, limits pinned below.
//! Runs without the libtest harness so the lines always show.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::Rng;
use tmas_core::abstraction::{abstract_mas, clock_frame_check, AbstractOptions, AbstractionSpec};
use tmas_core::analysis::{
    check_ag, metrics, preservation_test, simulation_between, Observation, Outcome, Prop, Verdict,
};
use tmas_core::io::{parse_system, print_system};
use tmas_core::localdomain::over_approx_mas;
use tmas_core::model::{Evaluation, TmasGraph};
use tmas_core::network::Network;
use tmas_core::random::{random_mas, random_prop, random_spec, Bounds};
use tmas_core::semantics::dbm::{le, lt, Dbm};
use tmas_core::semantics::{exact_local_domain, explore, zone_reach, ExploreOptions};
use tmas_core::voting::{abstraction_preset, generate, property, Preset, Property, VotingConfig};

const INCLUSION_CASES: u64 = 500;
const INCLUSION_LIMIT: Duration = Duration::from_secs(5 * 60);
const SIMULATION_CASES: u64 = 500;
const SIMULATION_LIMIT: Duration = Duration::from_secs(10 * 60);
const PRESERVATION_CASES: u64 = 1000;
const PRESERVATION_LIMIT: Duration = Duration::from_secs(10 * 60);
const REVOTE_CEX_LIMIT: Duration = Duration::from_secs(60);
/// Allowed relative gap between the first preset and the concrete model.
const A1_TOLERANCE: f64 = 0.05;
const ZONE_CASES: u64 = 200;
const ZONE_CONSTANT: i64 = 4;
const ZONE_LIMIT: Duration = Duration::from_secs(5 * 60);
const MICRO_LIMIT: Duration = Duration::from_secs(2 * 60);

struct Line {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn timed_line(name: &'static str, limit: Duration, f: impl FnOnce() -> (bool, String)) -> Line {
    let t = Instant::now();
    let (ok, detail) = f();
    let el = t.elapsed();
    let in_time = el <= limit;
    Line {
        name,
        pass: ok && in_time,
        detail: format!("{detail}; {:.1}s of {}s", el.as_secs_f64(), limit.as_secs()),
    }
}

/// Instance `seed` of the random family, with a removal spec.
fn instance(seed: u64) -> (TmasGraph, AbstractionSpec) {
    let mut rng = common::rng(seed);
    loop {
        let mg = random_mas(&mut rng, &Bounds::default()).unwrap();
        if let Some(spec) = random_spec(&mut rng, &mg) {
            return (mg, spec);
        }
    }
}

fn all_vars(mg: &TmasGraph) -> Vec<String> {
    Network::from_mas(mg).unwrap().vars.iter().map(|v| v.name.clone()).collect()
}

fn inclusion() -> (bool, String) {
    let mut violations = Vec::new();
    let mut locations = 0;
    for seed in 0..INCLUSION_CASES {
        let mg = random_mas(&mut common::rng(seed), &Bounds::default()).unwrap();
        let w = all_vars(&mg);
        let net = Network::from_mas(&mg).unwrap();
        let exact = exact_local_domain(&net, &w, true, ExploreOptions::default()).unwrap();
        let (over, _) = over_approx_mas(&mg, &w, Default::default()).unwrap();
        locations += exact.map.len();
        if let Some(x) = exact.first_excess(&over.domain) {
            violations.push((seed, x));
        }
    }
    (
        violations.is_empty(),
        format!(
            "{INCLUSION_CASES} systems, {locations} reachable locations, {} violations {:?}",
            violations.len(),
            violations.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn simulation() -> (bool, String) {
    let mut failures = Vec::new();
    let mut pairs = 0;
    for seed in 0..SIMULATION_CASES {
        let (mg, spec) = instance(seed);
        let a = abstract_mas(&mg, &spec, AbstractOptions::default()).unwrap();
        let obs = Observation::frame(&mg, &spec.removed(&mg)).unwrap();
        let (report, _) = simulation_between(&mg, &a.mg, &obs, ExploreOptions::default()).unwrap();
        pairs += report.related_pairs;
        let frame = clock_frame_check(&mg, &a.mg, Some(&a.provenance));
        if !report.exists || frame.is_err() {
            failures.push((seed, report.exists, frame.err()));
        }
    }
    (
        failures.is_empty(),
        format!(
            "{SIMULATION_CASES} instances, {pairs} related pairs, {} failures {:?}",
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn preservation() -> (bool, String) {
    let (mut agree, mut inconclusive, mut violations) = (0, 0, Vec::new());
    for seed in 0..PRESERVATION_CASES {
        let (mg, spec) = instance(seed);
        let mut rng = common::rng(seed ^ 0x5eed);
        let prop = random_prop(&mut rng, &mg, &spec.removed(&mg));
        let timed = rng.gen_bool(0.5);
        let r = preservation_test(
            &mg,
            &spec,
            &prop,
            timed,
            AbstractOptions::default(),
            ExploreOptions::default(),
        )
        .unwrap();
        match r.outcome {
            Outcome::Agree => agree += 1,
            Outcome::Inconclusive => inconclusive += 1,
            Outcome::Violation => violations.push((seed, prop.to_string())),
        }
    }
    (
        violations.is_empty(),
        format!(
            "{PRESERVATION_CASES} instances: {agree} agree, {inconclusive} inconclusive, {} violations {:?}",
            violations.len(),
            violations.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn verdict(mg: &TmasGraph, p: &Prop, timed: bool) -> Verdict {
    check_ag(mg, p, timed, ExploreOptions::default()).unwrap().verdict
}

fn voting() -> (bool, String) {
    let mut wrong = Vec::new();
    let mut checked = 0;
    for nv in 1..=2 {
        for nc in 1..=2 {
            for (cfg, which) in [
                (VotingConfig::faa(nv, nc, false), Property::Phi1),
                (VotingConfig::fpa(nv, nc, false), Property::Phi2),
            ] {
                let mg = generate(&cfg).unwrap();
                let p = property(&cfg, which);
                let mut models = vec![("concrete", mg.clone())];
                for preset in [Preset::A1, Preset::A2, Preset::A3] {
                    let spec = abstraction_preset(&cfg, preset);
                    let a = abstract_mas(&mg, &spec, AbstractOptions::default()).unwrap();
                    models.push((["A1", "A2", "A3"][preset as usize], a.mg));
                }
                for (name, m) in &models {
                    for timed in [false, true] {
                        checked += 1;
                        if !verdict(m, &p, timed).is_sat() {
                            wrong.push(format!("{which:?} nv={nv} nc={nc} {name} timed={timed}"));
                        }
                    }
                }
            }
            let cfg = VotingConfig::faa(nv, nc, true);
            let mg = generate(&cfg).unwrap();
            let t = Instant::now();
            let v = verdict(&mg, &property(&cfg, Property::Phi1), true);
            checked += 1;
            if v.is_sat() || t.elapsed() > REVOTE_CEX_LIMIT {
                wrong.push(format!("re-vote nv={nv} nc={nc} gave {v:?} in {:?}", t.elapsed()));
            }
        }
    }
    (wrong.is_empty(), format!("{checked} verdicts, wrong: {wrong:?}"))
}

fn reduction() -> (bool, String) {
    let cfg = VotingConfig::faa(2, 1, false);
    let mg = generate(&cfg).unwrap();
    let count = |m: &TmasGraph| metrics(m, false, ExploreOptions::default()).unwrap().states;
    let concrete = count(&mg);
    let presets: Vec<usize> = [Preset::A1, Preset::A2, Preset::A3]
        .into_iter()
        .map(|p| count(&abstract_mas(&mg, &abstraction_preset(&cfg, p), AbstractOptions::default()).unwrap().mg))
        .collect();
    let (a1, a2, a3) = (presets[0], presets[1], presets[2]);
    let gap = (a1 as f64 - concrete as f64).abs() / concrete as f64;
    (
        a3 <= a2 && a2 < concrete && gap <= A1_TOLERANCE,
        format!("concrete {concrete}, A1 {a1} (gap {:.1}%), A2 {a2}, A3 {a3}", gap * 100.0),
    )
}

fn zones() -> (bool, String) {
    let mut disagreements = Vec::new();
    for seed in 0..ZONE_CASES {
        let g = common::clocked_graph(seed, ZONE_CONSTANT);
        let zg = zone_reach(&g, ExploreOptions::default()).unwrap();
        let net = Network::from_graph(&g).unwrap();
        let zone_locs: BTreeSet<String> = zg.keys.iter().map(|s| net.location_name(s)).collect();
        let oracle = common::digitized_locations(&g, 2);
        if zone_locs != oracle {
            disagreements.push(seed);
        }
    }
    (
        disagreements.is_empty(),
        format!(
            "{ZONE_CASES} graphs, {} disagreements {:?}",
            disagreements.len(),
            disagreements.iter().take(5).collect::<Vec<_>>()
        ),
    )
}

/// Small exhaustive checks: round-trip parsing, effect composition,
/// substitution, canonical DBMs.
fn micro() -> (bool, String) {
    let mut failed = Vec::new();
    // round trip
    for seed in 0..300 {
        let mg = random_mas(&mut common::rng(seed), &Bounds::default()).unwrap();
        let text = print_system(&mg).unwrap();
        if parse_system(&text).ok().as_ref() != Some(&mg) {
            failed.push(format!("round trip {seed}"));
        }
    }
    // composition and substitution over every evaluation of each system
    for seed in 0..300 {
        let mg = random_mas(&mut common::rng(seed), &Bounds::default()).unwrap();
        for g in &mg.agents {
            let names: Vec<String> = g.variables.iter().map(|v| v.name.clone()).collect();
            let doms: Vec<Vec<i64>> = g.variables.iter().map(|v| v.domain.values()).collect();
            let mut evals = Vec::new();
            tmas_core::model::for_each_product(&doms, |vals| {
                evals.push(Evaluation(names.iter().cloned().zip(vals.iter().copied()).collect()));
                true
            });
            for (i, a) in g.edges.iter().enumerate() {
                let b = &g.edges[(i + 1) % g.edges.len()];
                let ab = a.action.after(&b.action);
                for eta in &evals {
                    let seq = g.apply_effect(&b.action, eta).and_then(|m| g.apply_effect(&a.action, &m));
                    if g.apply_effect(&ab, eta).ok() != seq.ok() {
                        failed.push(format!("composition {seed}"));
                    }
                    // pinning a prefix of the variables
                    let k = eta.restrict(names.iter().take(1));
                    let sub = a.guard.substitute(&k);
                    if sub.eval(eta).ok() != a.guard.eval(eta).ok() {
                        failed.push(format!("substitution {seed}"));
                    }
                }
            }
        }
    }
    // canonical form is idempotent and agrees with half-step samples
    let mut rng = common::rng(99);
    for _ in 0..2000 {
        let mut z = Dbm::zero(2);
        z.up();
        for _ in 0..rng.gen_range(0..4) {
            let (i, j) = (rng.gen_range(0..3), rng.gen_range(0..3));
            if i != j {
                let c = rng.gen_range(-3..=3);
                z.constrain(i, j, if rng.gen_bool(0.5) { le(c) } else { lt(c) });
            }
        }
        if z.is_empty() {
            continue;
        }
        let mut again = z.clone();
        again.canonicalize();
        if again != z {
            failed.push("canonicalize".into());
        }
    }
    let mut band = Dbm::zero(2);
    band.up();
    band.constrain(1, 0, le(3));
    for x in 0..10 {
        for y in 0..10 {
            let expect = x == y && x <= 6;
            if band.contains_scaled(&[x, y], 2) != expect {
                failed.push(format!("band ({x},{y})/2"));
            }
        }
    }
    failed.dedup();
    (failed.is_empty(), format!("failures: {:?}", failed.iter().take(5).collect::<Vec<_>>()))
}

fn identity() -> (bool, String) {
    let mut diffs = Vec::new();
    let empty = AbstractionSpec::default();
    let states = |m: &TmasGraph| -> BTreeSet<Box<[i64]>> {
        let net = Network::from_mas(m).unwrap();
        explore(&net, ExploreOptions::default(), |_| Ok(false)).unwrap().0.states.into_iter().collect()
    };
    let mut fixtures: Vec<(String, TmasGraph, Vec<Prop>)> = Vec::new();
    for (nv, nc) in [(1, 1), (2, 1)] {
        for revote in [false, true] {
            let cfg = VotingConfig::faa(nv, nc, revote);
            let props = vec![property(&cfg, Property::Phi1), property(&cfg, Property::Phi2)];
            fixtures.push((format!("voting {nv}/{nc}/{revote}"), generate(&cfg).unwrap(), props));
        }
    }
    for seed in 0..100 {
        let mut rng = common::rng(seed);
        let mg = random_mas(&mut rng, &Bounds::default()).unwrap();
        let p = random_prop(&mut rng, &mg, &BTreeSet::new());
        fixtures.push((format!("random {seed}"), mg, vec![p]));
    }
    for (name, mg, props) in &fixtures {
        let a = abstract_mas(mg, &empty, AbstractOptions::default()).unwrap().mg;
        if states(mg) != states(&a) {
            diffs.push(format!("{name}: state set"));
        }
        for p in props {
            for timed in [false, true] {
                if verdict(mg, p, timed).is_sat() != verdict(&a, p, timed).is_sat() {
                    diffs.push(format!("{name}: {p} timed={timed}"));
                }
            }
        }
    }
    (diffs.is_empty(), format!("{} fixtures, diffs: {diffs:?}", fixtures.len()))
}

fn main() {
    let lines = vec![
        timed_line("local-domain inclusion", INCLUSION_LIMIT, inclusion),
        timed_line("simulation and clock frame", SIMULATION_LIMIT, simulation),
        timed_line("property preservation", PRESERVATION_LIMIT, preservation),
        timed_line("voting verdicts", Duration::from_secs(10 * 60), voting),
        timed_line("reduction direction", Duration::from_secs(5 * 60), reduction),
        timed_line("zone reachability vs digitized oracle", ZONE_LIMIT, zones),
        timed_line("micro-suites", MICRO_LIMIT, micro),
        timed_line("identity abstraction", Duration::from_secs(5 * 60), identity),
    ];
    let mut all = true;
    for l in &lines {
        println!("{} {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.name, l.detail);
        all &= l.pass;
    }
    if !all {
        std::process::exit(1);
    }
}
