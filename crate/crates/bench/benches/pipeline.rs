use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tmas_bench::{abstracted, preset, voting};
use tmas_core::abstraction::{abstract_mas, AbstractOptions};
use tmas_core::analysis::check_ag;
use tmas_core::localdomain::{over_approx_mas, OverApproxOptions};
use tmas_core::network::Network;
use tmas_core::semantics::ExploreOptions;
use tmas_core::voting::{property, Preset, Property};

fn local_domains(c: &mut Criterion) {
    let mut g = c.benchmark_group("localdomain");
    for nv in [1, 2] {
        let (_, mg) = voting(nv, 2, false);
        let w: Vec<String> = Network::from_mas(&mg).unwrap().vars.iter().map(|v| v.name.clone()).collect();
        g.bench_with_input(BenchmarkId::new("all_vars", nv), &mg, |b, mg| {
            b.iter(|| over_approx_mas(mg, &w, OverApproxOptions::default()).unwrap())
        });
    }
    g.finish();
}

fn abstraction(c: &mut Criterion) {
    let mut g = c.benchmark_group("abstract");
    let (cfg, mg) = voting(2, 2, false);
    for p in [Preset::A1, Preset::A2, Preset::A3] {
        let spec = preset(&cfg, p);
        g.bench_function(format!("{p:?}"), |b| {
            b.iter(|| abstract_mas(&mg, &spec, AbstractOptions::default()).unwrap())
        });
    }
    g.finish();
}

fn checking(c: &mut Criterion) {
    let mut g = c.benchmark_group("check");
    g.sample_size(10);
    let (cfg, mg) = voting(2, 1, false);
    let phi = property(&cfg, Property::Phi1);
    let small = abstracted(&mg, &preset(&cfg, Preset::A3));
    for (name, m) in [("concrete", &mg), ("A3", &small)] {
        for timed in [false, true] {
            let id = format!("{name}/{}", if timed { "zones" } else { "untimed" });
            g.bench_function(id, |b| b.iter(|| check_ag(m, &phi, timed, ExploreOptions::default()).unwrap()));
        }
    }
    let (rcfg, rmg) = voting(1, 1, true);
    let rphi = property(&rcfg, Property::Phi1);
    g.bench_function("revote_cex", |b| {
        b.iter(|| check_ag(&rmg, &rphi, true, ExploreOptions::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, local_domains, abstraction, checking);
criterion_main!(benches);
