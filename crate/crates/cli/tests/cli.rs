use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use tmas_core::analysis::Observation;
use tmas_core::voting::{abstraction_preset, property, Preset, Property, VotingConfig};

fn tmas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmas")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const FIXTURE: &str = "system {
  shared {
    var s : 0..2 = 0
  }
  agent A {
    var a : 0..3 = 0
    var b : 0..1 = 0
    clock x
    location l0
    location l1
    init l0
    invariant l1 : x <= 2
    edge l0 -> l1 guard: s < 2 do: a := (a + 1) % 4; s := s + 1 reset: x
    edge l1 -> l0 clock: x >= 1 do: b := 1 - b
  }
  agent B {
    var c : 0..1 = 0
    location m0
    location m1
    init m0
    edge m0 -> m1 guard: s == 1 do: c := 1
    edge m1 -> m0 do: c := 0
  }
}
";

fn observation_for(model: &Path, hidden: &[&str]) -> String {
    let mg = tmas_core::io::parse_system(&fs::read_to_string(model).unwrap()).unwrap();
    let hidden = hidden.iter().map(|h| h.to_string()).collect();
    let obs = Observation::frame(&mg, &hidden).unwrap();
    format!("locations\nvalues {}\n", obs.values.join(", "))
}

#[test]
fn abstract_then_simcheck_succeeds() {
    let dir = TempDir::new().unwrap();
    let cases: Vec<(String, String, Vec<String>)> = {
        let mut v = vec![(
            FIXTURE.to_string(),
            r#"[{"agent": "A", "scope": "all", "remove": ["a"]}, {"agent": "B", "scope": ["m1"], "remove": ["c"]}]"#.to_string(),
            vec!["A.a".to_string(), "B.c".to_string()],
        )];
        for preset in [Preset::A1, Preset::A2, Preset::A3] {
            let cfg = VotingConfig::faa(2, 1, false);
            let mg = tmas_core::voting::generate(&cfg).unwrap();
            let spec = abstraction_preset(&cfg, preset);
            let hidden = spec.removed(&mg).into_iter().collect();
            v.push((tmas_core::io::print_system(&mg).unwrap(), spec.to_json().to_string(), hidden));
        }
        v
    };
    for (k, (model, spec, hidden)) in cases.iter().enumerate() {
        let (m, sp, out, ap) = (
            path(&dir, &format!("m{k}.tmas")),
            path(&dir, &format!("s{k}.json")),
            path(&dir, &format!("a{k}.tmas")),
            path(&dir, &format!("o{k}.ap")),
        );
        fs::write(&m, model).unwrap();
        fs::write(&sp, spec).unwrap();
        for prune in [false, true] {
            let mut args = vec!["abstract", s(&m), "--spec", s(&sp), "-o", s(&out)];
            if prune {
                args.push("--prune");
            }
            let r = tmas(&args);
            assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
            let h: Vec<&str> = hidden.iter().map(String::as_str).collect();
            fs::write(&ap, observation_for(&m, &h)).unwrap();
            let r = tmas(&["simcheck", s(&m), s(&out), "--ap", s(&ap), "--timed-frame", "--json"]);
            assert_eq!(code(&r), 0, "case {k}: {}", String::from_utf8_lossy(&r.stdout));
            assert_eq!(json(&r)["status"], "simulation");
        }
    }
}

#[test]
fn simulation_absent_exits_one() {
    let dir = TempDir::new().unwrap();
    let (m, a, ap) = (path(&dir, "m.tmas"), path(&dir, "a.tmas"), path(&dir, "o.ap"));
    fs::write(&m, FIXTURE).unwrap();
    // the abstract side can never leave m0
    fs::write(&a, FIXTURE.replace("edge m0 -> m1 guard: s == 1", "edge m0 -> m1 guard: s == 5")).unwrap();
    fs::write(&ap, "locations\n").unwrap();
    let r = tmas(&["simcheck", s(&m), s(&a), "--ap", s(&ap), "--json"]);
    assert_eq!(code(&r), 1);
    assert_eq!(json(&r)["status"], "no-simulation");
}

#[test]
fn revoting_counterexample_exits_one() {
    let dir = TempDir::new().unwrap();
    let m = path(&dir, "v.tmas");
    let r = tmas(&["gen-voting", "--nv", "1", "--nc", "1", "--revote", "--ctype", "2", "-o", s(&m)]);
    assert_eq!(code(&r), 0);
    let phi1 = property(&VotingConfig::faa(1, 1, true), Property::Phi1).to_string();
    let r = tmas(&["check", s(&m), "--prop", &phi1, "--timed", "--json"]);
    assert_eq!(code(&r), 1);
    let v = json(&r);
    assert_eq!(v["status"], "cex");
    assert!(v["verdict"]["trace"].as_array().unwrap().len() > 1);

    let r = tmas(&["check", s(&m), "--prop", &phi1]);
    assert_eq!(code(&r), 1);
    assert!(String::from_utf8_lossy(&r.stdout).contains("counterexample"));
}

#[test]
fn satisfied_property_exits_zero() {
    let dir = TempDir::new().unwrap();
    let m = path(&dir, "v.tmas");
    assert_eq!(code(&tmas(&["gen-voting", "--nv", "1", "--nc", "1", "--ctype", "2", "-o", s(&m)])), 0);
    let p = path(&dir, "phi.prop");
    fs::write(&p, property(&VotingConfig::faa(1, 1, false), Property::Phi1).to_string()).unwrap();
    let r = tmas(&["check", s(&m), "--prop", s(&p), "--json"]);
    assert_eq!(code(&r), 0);
    assert_eq!(json(&r)["status"], "sat");
}

#[test]
fn budget_overflow_is_an_error() {
    let dir = TempDir::new().unwrap();
    let m = path(&dir, "m.tmas");
    fs::write(&m, FIXTURE).unwrap();
    let r = tmas(&["check", s(&m), "--prop", "true", "--budget", "1", "--json"]);
    assert_eq!(code(&r), 2);
    assert_eq!(json(&r)["status"], "error");
}

#[test]
fn errors_exit_two() {
    assert_eq!(code(&tmas(&["check", "--frobnicate"])), 2);
    assert_eq!(code(&tmas(&["metrics", "/definitely/missing.tmas"])), 2);
    let dir = TempDir::new().unwrap();
    let m = path(&dir, "bad.tmas");
    fs::write(&m, "system {\n agent A {\n location l0\n edge l0 -> \n }\n}\n").unwrap();
    let r = tmas(&["metrics", s(&m)]);
    assert_eq!(code(&r), 2);
    assert!(String::from_utf8_lossy(&r.stderr).contains("bad.tmas: 4:"));
    let r = tmas(&["gen-voting", "--nv", "1", "--nc", "1", "--ctype", "3"]);
    assert_eq!(code(&r), 2);
}

#[test]
fn export_is_deterministic_and_writes_queries() {
    let dir = TempDir::new().unwrap();
    let m = path(&dir, "m.tmas");
    fs::write(&m, FIXTURE).unwrap();
    let (x1, x2, q) = (path(&dir, "1.xml"), path(&dir, "2.xml"), path(&dir, "q.q"));
    for x in [&x1, &x2] {
        let r = tmas(&["export-uppaal", s(&m), "-o", s(x), "--queries", s(&q), "--prop", "A@l1 => s >= 1", "--prop", "B.c <= 1"]);
        assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    }
    assert_eq!(fs::read(&x1).unwrap(), fs::read(&x2).unwrap());
    let queries = fs::read_to_string(&q).unwrap();
    assert_eq!(queries.lines().count(), 2);
    assert!(queries.lines().all(|l| l.starts_with("A[] (")));
}

#[test]
fn localdomain_and_metrics() {
    let dir = TempDir::new().unwrap();
    let m = path(&dir, "m.tmas");
    let out = path(&dir, "d.json");
    fs::write(&m, FIXTURE).unwrap();
    let r = tmas(&["localdomain", s(&m), "--vars", "A.a,s", "-o", s(&out)]);
    assert_eq!(code(&r), 0);
    let d: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let init = &d["(l0,m0)"][0];
    assert_eq!((init["A.a"].as_i64(), init["s"].as_i64()), (Some(0), Some(0)));

    let r = tmas(&["metrics", s(&m), "--csv"]);
    assert_eq!(code(&r), 0);
    let text = String::from_utf8(r.stdout).unwrap();
    assert!(text.starts_with("config,states,transitions,time_ms\nm,"));
    let r = tmas(&["metrics", s(&m), "--json"]);
    assert_eq!(json(&r)["status"], "ok");
}
