use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use tmas_core::abstraction::{abstract_mas, clock_frame_check, AbstractOptions, AbstractionSpec};
use tmas_core::analysis::{check_ag, metrics, simulation_between, Prop, Verdict, CSV_HEADER};
use tmas_core::io::{export_query, export_uppaal, parse_observation, parse_prop, parse_system, print_system};
use tmas_core::localdomain::{over_approx_mas, OverApproxOptions};
use tmas_core::semantics::ExploreOptions;
use tmas_core::voting::{generate, CoercerType, VotingConfig};
use tmas_core::{Error, TmasGraph};

#[derive(Parser)]
#[command(name = "tmas", version, about = "Abstraction and checking of timed multi-agent systems")]
struct Cli {
    /// Emit the report as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ctype {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check an invariant `AG prop`.
    Check {
        model: PathBuf,
        /// Proposition, or a file holding one.
        #[arg(long)]
        prop: String,
        /// Explore the zone graph instead of the untimed model.
        #[arg(long)]
        timed: bool,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Over-approximate the local domain of qualified variables.
    Localdomain {
        model: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        vars: Vec<String>,
        /// Ignore synchronisation.
        #[arg(long)]
        coarse: bool,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Apply an abstraction spec.
    Abstract {
        model: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(short)]
        o: Option<PathBuf>,
        /// Drop edges whose guard no evaluation in the domain satisfies.
        #[arg(long)]
        prune: bool,
    },
    /// Search for a simulation of the concrete model by the abstract one.
    Simcheck {
        concrete: PathBuf,
        #[arg(name = "abstract")]
        abs: PathBuf,
        /// Observation file.
        #[arg(long)]
        ap: PathBuf,
        /// Also require identical clocks, invariants and edge timing.
        #[arg(long)]
        timed_frame: bool,
    },
    /// Generate the voting benchmark.
    GenVoting {
        #[arg(long)]
        nv: usize,
        #[arg(long)]
        nc: usize,
        #[arg(long)]
        revote: bool,
        #[arg(long, value_enum)]
        ctype: Ctype,
        #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
        obey: i64,
        #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
        disobey: i64,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Export to UPPAAL XML.
    ExportUppaal {
        model: PathBuf,
        #[arg(short)]
        o: Option<PathBuf>,
        /// Write `A[]` queries for the given propositions here.
        #[arg(long, requires = "prop")]
        queries: Option<PathBuf>,
        /// Proposition or file; repeatable.
        #[arg(long)]
        prop: Vec<String>,
    },
    /// State-space size.
    Metrics {
        model: PathBuf,
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        timed: bool,
    },
}

enum Status {
    Ok,
    Negative,
}

struct Report {
    status: Status,
    text: String,
    json: Value,
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, content: &str) -> Result<(), String> {
    fs::write(path, content).map_err(|e| format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Result<TmasGraph, String> {
    parse_system(&read(path)?).map_err(|e| located(path, e))
}

fn located(path: &Path, e: Error) -> String {
    format!("{}: {e}", path.display())
}

fn inline_or_file(arg: &str) -> Result<String, String> {
    let p = Path::new(arg);
    if p.is_file() {
        read(p)
    } else {
        Ok(arg.to_string())
    }
}

fn load_prop(arg: &str) -> Result<Prop, String> {
    parse_prop(inline_or_file(arg)?.trim()).map_err(|e| e.to_string())
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<Option<String>, String> {
    match out {
        Some(p) => write(p, content).map(|_| None),
        None => Ok(Some(content.to_string())),
    }
}

fn run(cmd: Cmd) -> Result<Report, String> {
    let err = |e: Error| e.to_string();
    match cmd {
        Cmd::Check { model, prop, timed, budget } => {
            let mg = load(&model)?;
            let p = load_prop(&prop)?;
            let mut opts = ExploreOptions::default();
            if let Some(b) = budget {
                opts = opts.budget(b);
            }
            let r = check_ag(&mg, &p, timed, opts).map_err(err)?;
            let mut text = format!("AG {p}: ");
            let status = match &r.verdict {
                Verdict::Sat => {
                    text.push_str("satisfied\n");
                    Status::Ok
                }
                Verdict::Cex(trace) => {
                    text.push_str(&format!("violated, counterexample of {} steps\n", trace.len()));
                    for (k, s) in trace.iter().enumerate() {
                        let via = s.via.as_deref().unwrap_or("init");
                        let vals: Vec<String> = s.evaluation.iter().map(|(n, v)| format!("{n}={v}")).collect();
                        text.push_str(&format!("{k:>3} [{via}] ({}) {}", s.locations.join(","), vals.join(" ")));
                        if let Some(z) = &s.zone {
                            text.push_str(&format!(" {z}"));
                        }
                        text.push('\n');
                    }
                    Status::Negative
                }
            };
            text.push_str(&format!("states {} transitions {}\n", r.metrics.states, r.metrics.transitions));
            let mut json = serde_json::to_value(&r).map_err(|e| e.to_string())?;
            json["status"] = if r.verdict.is_sat() { "sat" } else { "cex" }.into();
            Ok(Report { status, text, json })
        }
        Cmd::Localdomain { model, vars, coarse, o } => {
            let mg = load(&model)?;
            let opts = OverApproxOptions { coarse, ..Default::default() };
            let (r, _) = over_approx_mas(&mg, &vars, opts).map_err(err)?;
            let domain = r.domain.to_json();
            let body = serde_json::to_string_pretty(&domain).map_err(|e| e.to_string())?;
            let printed = emit(&o, &body)?;
            let size: usize = r.domain.map.values().map(|s| s.len()).sum();
            let text = printed.map(|b| b + "\n").unwrap_or_else(|| {
                format!("{size} evaluations over {} locations\n", r.domain.map.len())
            });
            Ok(Report {
                status: Status::Ok,
                text,
                json: json!({"status": "ok", "vars": vars, "domain": domain, "visits": r.visits}),
            })
        }
        Cmd::Abstract { model, spec, o, prune } => {
            let mg = load(&model)?;
            let s = AbstractionSpec::parse(&read(&spec)?).map_err(|e| located(&spec, e))?;
            let opts = AbstractOptions { prune, ..Default::default() };
            let a = abstract_mas(&mg, &s, opts).map_err(err)?;
            let body = print_system(&a.mg).map_err(err)?;
            let printed = emit(&o, &body)?;
            let edges = |m: &TmasGraph| m.agents.iter().map(|g| g.edges.len()).sum::<usize>();
            let removed: Vec<String> = s.removed(&mg).into_iter().collect();
            let text = printed.unwrap_or_else(|| {
                format!("removed {} variables, {} -> {} edges\n", removed.len(), edges(&mg), edges(&a.mg))
            });
            Ok(Report {
                status: Status::Ok,
                text,
                json: json!({
                    "status": "ok",
                    "removed": removed,
                    "edges_before": edges(&mg),
                    "edges_after": edges(&a.mg),
                }),
            })
        }
        Cmd::Simcheck { concrete, abs, ap, timed_frame } => {
            let m1 = load(&concrete)?;
            let m2 = load(&abs)?;
            let obs = parse_observation(&read(&ap)?).map_err(|e| located(&ap, e))?;
            let frame = if timed_frame { Some(clock_frame_check(&m1, &m2, None)) } else { None };
            let (r, _) = simulation_between(&m1, &m2, &obs, ExploreOptions::default()).map_err(err)?;
            let frame_ok = frame.as_ref().is_none_or(|f| f.is_ok());
            let holds = r.exists && frame_ok;
            let mut text = format!(
                "simulation {}: {} concrete states, {} abstract states, {} related pairs\n",
                if r.exists { "found" } else { "absent" },
                r.concrete_states,
                r.abstract_states,
                r.related_pairs
            );
            if let Some(Err(m)) = &frame {
                text.push_str(&format!("timing frame differs: {m}\n"));
            }
            Ok(Report {
                status: if holds { Status::Ok } else { Status::Negative },
                text,
                json: json!({
                    "status": if holds { "simulation" } else { "no-simulation" },
                    "report": r,
                    "timed_frame": frame.map(|f| f.err().unwrap_or_else(|| "ok".into())),
                }),
            })
        }
        Cmd::GenVoting { nv, nc, revote, ctype, obey, disobey, o } => {
            let cfg = VotingConfig {
                nv,
                nc,
                revote,
                ctype: match ctype {
                    Ctype::One => CoercerType::Type1,
                    Ctype::Two => CoercerType::Type2,
                },
                obey,
                disobey,
            };
            let mg = generate(&cfg).map_err(err)?;
            let body = print_system(&mg).map_err(err)?;
            let text = emit(&o, &body)?.unwrap_or_default();
            Ok(Report {
                status: Status::Ok,
                text,
                json: json!({"status": "ok", "config": cfg, "agents": mg.agents.len()}),
            })
        }
        Cmd::ExportUppaal { model, o, queries, prop } => {
            let mg = load(&model)?;
            let xml = export_uppaal(&mg).map_err(err)?;
            let text = emit(&o, &xml)?.unwrap_or_default();
            let mut qs = Vec::new();
            for p in &prop {
                qs.push(export_query(&mg, &load_prop(p)?).map_err(err)?.trim_end().to_string());
            }
            if let Some(q) = &queries {
                write(q, &(qs.join("\n") + "\n"))?;
            }
            Ok(Report {
                status: Status::Ok,
                text,
                json: json!({"status": "ok", "templates": mg.agents.len(), "queries": qs}),
            })
        }
        Cmd::Metrics { model, csv, timed } => {
            let mg = load(&model)?;
            let m = metrics(&mg, timed, ExploreOptions::default()).map_err(err)?;
            let name = model.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let text = if csv {
                format!("{CSV_HEADER}\n{}\n", m.csv_row(&name))
            } else {
                format!("states {} transitions {} peak frontier {} time {} ms\n", m.states, m.transitions, m.peak_frontier, m.wall_ms)
            };
            let mut json = serde_json::to_value(m).map_err(|e| e.to_string())?;
            json["status"] = "ok".into();
            Ok(Report { status: Status::Ok, text, json })
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.cmd) {
        Ok(r) => {
            if cli.json {
                println!("{}", r.json);
            } else {
                print!("{}", r.text);
            }
            ExitCode::from(match r.status {
                Status::Ok => 0,
                Status::Negative => 1,
            })
        }
        Err(m) => {
            eprintln!("error: {m}");
            if cli.json {
                println!("{}", json!({"status": "error", "message": m}));
            }
            ExitCode::from(2)
        }
    }
}
