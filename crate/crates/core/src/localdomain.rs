//! Over-approximation of local domains by a priority-driven fixpoint over
//! the locations of a (combined, time-insensitive) graph.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use indexmap::IndexSet;

use crate::compose::{combine, strip_clocks, strip_clocks_mas, CombinedGraph};
use crate::error::{Error, Result};
use crate::model::{for_each_product, Lit, TimedAgentGraph, TmasGraph};
use crate::network::{CEdge, CSync, Network};
use crate::semantics::LocalDomain;

/// Extraction order of the work queue.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Priority {
    /// Most pending predecessor updates first, ties by location index.
    #[default]
    PendingCount,
    Fifo,
    Lifo,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OverApproxOptions {
    pub priority: Priority,
    /// Treat synchronised edges as unsynchronised.
    pub coarse: bool,
}

#[derive(Debug, Clone)]
pub struct OverApprox {
    pub domain: LocalDomain,
    /// Number of edge-processing steps that enlarged some `d(l)`.
    pub growth_events: usize,
    pub visits: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Color {
    White,
    Grey,
    Black,
}

enum Queue {
    Pending {
        set: BTreeSet<(usize, Reverse<usize>)>,
        key: HashMap<usize, usize>,
    },
    Fifo(VecDeque<usize>, Vec<bool>),
    Lifo(Vec<usize>, Vec<bool>),
}

impl Queue {
    fn new(p: Priority, n: usize) -> Self {
        match p {
            Priority::PendingCount => Queue::Pending {
                set: BTreeSet::new(),
                key: HashMap::new(),
            },
            Priority::Fifo => Queue::Fifo(VecDeque::new(), vec![false; n]),
            Priority::Lifo => Queue::Lifo(Vec::new(), vec![false; n]),
        }
    }

    /// Inserts `l` or refreshes its key.
    fn push(&mut self, l: usize, pending: usize) {
        match self {
            Queue::Pending { set, key } => {
                if let Some(old) = key.insert(l, pending) {
                    set.remove(&(old, Reverse(l)));
                }
                set.insert((pending, Reverse(l)));
            }
            Queue::Fifo(q, inq) => {
                if !inq[l] {
                    inq[l] = true;
                    q.push_back(l);
                }
            }
            Queue::Lifo(q, inq) => {
                if !inq[l] {
                    inq[l] = true;
                    q.push(l);
                }
            }
        }
    }

    fn pop(&mut self) -> Option<usize> {
        match self {
            Queue::Pending { set, key } => {
                let (_, Reverse(l)) = set.pop_last()?;
                key.remove(&l);
                Some(l)
            }
            Queue::Fifo(q, inq) => {
                let l = q.pop_front()?;
                inq[l] = false;
                Some(l)
            }
            Queue::Lifo(q, inq) => {
                let l = q.pop()?;
                inq[l] = false;
                Some(l)
            }
        }
    }
}

/// Image computation for one edge, with the variables it reads outside
/// `W` ranging over their full domains.
struct EdgeImage {
    free: Vec<usize>,
    free_domains: Vec<Vec<Lit>>,
    /// Satisfying free assignments, when the guard does not read `W`.
    cached: Option<Vec<Vec<Lit>>>,
}

struct Solver<'a> {
    net: &'a Network,
    w: Vec<usize>,
    base: Vec<Lit>,
}

impl<'a> Solver<'a> {
    fn prepare(&self, e: &CEdge) -> Result<EdgeImage> {
        let mut reads = Vec::new();
        e.guard.reads(&mut reads);
        let guard_reads_w = reads.iter().any(|r| self.w.contains(r));
        e.action.reads(&mut reads);
        reads.sort_unstable();
        reads.dedup();
        let free: Vec<usize> = reads.into_iter().filter(|r| !self.w.contains(r)).collect();
        let free_domains = free
            .iter()
            .map(|&i| self.net.domain(i).values())
            .collect();
        let mut img = EdgeImage {
            free,
            free_domains,
            cached: None,
        };
        if !guard_reads_w {
            let mut sat = Vec::new();
            let mut v = self.base.clone();
            for_each_product(&img.free_domains, |point| {
                for (&i, &x) in img.free.iter().zip(point) {
                    v[i] = x;
                }
                if e.guard.eval(&v).unwrap_or(false) {
                    sat.push(point.to_vec());
                }
                true
            });
            img.cached = Some(sat);
        }
        Ok(img)
    }

    fn image(&self, e: &CEdge, img: &EdgeImage, w_vals: &[Lit], out: &mut Vec<Vec<Lit>>) {
        let mut v = self.base.clone();
        for (&i, &x) in self.w.iter().zip(w_vals) {
            v[i] = x;
        }
        let mut step = |point: &[Lit], check: bool| {
            let mut u = v.clone();
            for (&i, &x) in img.free.iter().zip(point) {
                u[i] = x;
            }
            if check && !e.guard.eval(&u).unwrap_or(false) {
                return;
            }
            if e.action.apply(&mut u, &self.net.vars).is_ok() {
                out.push(self.w.iter().map(|&i| u[i]).collect());
            }
        };
        match &img.cached {
            Some(sat) => sat.iter().for_each(|p| step(p, false)),
            None => for_each_product(&img.free_domains, |p| {
                step(p, true);
                true
            }),
        }
    }
}

/// Over-approximates, for every location of `g`, the evaluations of `w`
/// reachable there; unreachable locations get an empty entry. Clocks are
/// ignored. Unless `coarse` is set, edges carrying a synchronisation label
/// are skipped, as they never fire on their own.
pub fn over_approx_local_domain(
    g: &TimedAgentGraph,
    w: &[String],
    opts: OverApproxOptions,
) -> Result<OverApprox> {
    run(g, w, opts, None)
}

/// Same fixpoint, started from `seed` in addition to the initial evaluation.
pub fn over_approx_seeded(
    g: &TimedAgentGraph,
    seed: &LocalDomain,
    opts: OverApproxOptions,
) -> Result<OverApprox> {
    run(g, &seed.vars, opts, Some(seed))
}

fn run(
    g: &TimedAgentGraph,
    w: &[String],
    opts: OverApproxOptions,
    seed: Option<&LocalDomain>,
) -> Result<OverApprox> {
    let net = Network::from_graph(&strip_clocks(g))?;
    let w_idx: Vec<usize> = w
        .iter()
        .map(|v| {
            net.var_index
                .get(v)
                .copied()
                .ok_or_else(|| Error::UndeclaredVariable(v.clone()))
        })
        .collect::<Result<_>>()?;
    let agent = &net.agents[0];
    let nloc = agent.locations.len();
    let base = net.values(&net.initial_state()).to_vec();
    let solver = Solver {
        net: &net,
        w: w_idx.clone(),
        base: base.clone(),
    };

    let live: Vec<bool> = agent
        .edges
        .iter()
        .map(|e| opts.coarse || e.sync == CSync::None)
        .collect();
    let mut incoming: Vec<BTreeMap<usize, Vec<usize>>> = vec![BTreeMap::new(); nloc];
    let mut self_loops: Vec<Vec<usize>> = vec![Vec::new(); nloc];
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nloc];
    for (i, e) in agent.edges.iter().enumerate() {
        if !live[i] {
            continue;
        }
        if e.source == e.target {
            self_loops[e.source].push(i);
        } else {
            incoming[e.target].entry(e.source).or_default().push(i);
            succ[e.source].insert(e.target);
        }
    }
    let mut images: Vec<Option<EdgeImage>> = (0..agent.edges.len()).map(|_| None).collect();
    let mut done = vec![0usize; agent.edges.len()];

    let mut d: Vec<IndexSet<Vec<Lit>>> = vec![IndexSet::new(); nloc];
    let mut pending: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nloc];
    let mut color = vec![Color::White; nloc];
    let mut queue = Queue::new(opts.priority, nloc);

    d[agent.initial].insert(w_idx.iter().map(|&i| base[i]).collect());
    queue.push(agent.initial, 0);
    if let Some(seed) = seed {
        for (l, set) in &seed.map {
            let li = agent
                .locations
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::UndeclaredLocation(l.clone()))?;
            d[li].extend(set.iter().cloned());
            if !set.is_empty() {
                queue.push(li, 0);
            }
        }
    }

    let mut growth = 0;
    let mut visits = 0;
    let mut buf = Vec::new();
    let mut process = |ei: usize,
                       d: &mut Vec<IndexSet<Vec<Lit>>>,
                       images: &mut Vec<Option<EdgeImage>>,
                       done: &mut Vec<usize>|
     -> Result<bool> {
        let e = &agent.edges[ei];
        if images[ei].is_none() {
            images[ei] = Some(solver.prepare(e)?);
        }
        let img = images[ei].as_ref().unwrap();
        buf.clear();
        while done[ei] < d[e.source].len() {
            let vals = d[e.source][done[ei]].clone();
            done[ei] += 1;
            solver.image(e, img, &vals, &mut buf);
        }
        let before = d[e.target].len();
        d[e.target].extend(buf.drain(..));
        Ok(d[e.target].len() > before)
    };

    while let Some(l) = queue.pop() {
        visits += 1;
        let kappa = d[l].len();
        let preds = std::mem::take(&mut pending[l]);
        for p in preds {
            for &ei in incoming[l].get(&p).into_iter().flatten() {
                if process(ei, &mut d, &mut images, &mut done)? {
                    growth += 1;
                }
            }
        }
        if d[l].len() != kappa {
            color[l] = Color::Grey;
        }
        loop {
            let lambda = d[l].len();
            for &ei in &self_loops[l] {
                if process(ei, &mut d, &mut images, &mut done)? {
                    growth += 1;
                }
            }
            if d[l].len() == lambda {
                break;
            }
            color[l] = Color::Grey;
        }
        if color[l] != Color::Black {
            for &s in &succ[l] {
                pending[s].insert(l);
                queue.push(s, pending[s].len());
            }
            color[l] = Color::Black;
        }
    }

    let mut domain = LocalDomain::new(w.to_vec());
    for (l, set) in d.into_iter().enumerate() {
        domain
            .map
            .insert(agent.locations[l].clone(), set.into_iter().collect());
    }
    Ok(OverApprox {
        domain,
        growth_events: growth,
        visits,
    })
}

/// Union of `d` over all product locations whose `agent` component is the
/// same location.
pub fn project_local_domain(
    d: &LocalDomain,
    combined: &CombinedGraph,
    mg: &TmasGraph,
    agent: usize,
) -> Result<LocalDomain> {
    let a = mg
        .agents
        .get(agent)
        .ok_or(Error::AgentIndexOutOfRange(agent))?;
    let mut out = LocalDomain::new(d.vars.clone());
    for (l, set) in &d.map {
        let t = combined
            .tuple_of(l)
            .ok_or_else(|| Error::UndeclaredLocation(l.clone()))?;
        out.map
            .entry(a.locations[t[agent]].clone())
            .or_default()
            .extend(set.iter().cloned());
    }
    Ok(out)
}

/// Over-approximation on `combine(strip_clocks_mas(mg))` for qualified
/// variable names.
pub fn over_approx_mas(
    mg: &TmasGraph,
    w: &[String],
    opts: OverApproxOptions,
) -> Result<(OverApprox, CombinedGraph)> {
    let combined = combine(&strip_clocks_mas(mg))?;
    let r = over_approx_local_domain(&combined.graph, w, opts)?;
    Ok((r, combined))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Action, Assign, BinOp, CmpOp, Condition, Domain, Edge, Expr, VariableDecl};

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn no_edges_keeps_only_initial() {
        let mut g = TimedAgentGraph::new("G", "l0");
        g.add_location("l1");
        g.add_var(VariableDecl::new("v", Domain::range(0, 2), 1));
        let r = over_approx_local_domain(&g, &vars(&["v"]), Default::default()).unwrap();
        assert_eq!(r.domain.get("l0").unwrap().len(), 1);
        assert!(r.domain.get("l1").unwrap().is_empty());
    }

    #[test]
    fn guarded_increment_saturates() {
        let mut g = TimedAgentGraph::new("G", "l0");
        g.add_var(VariableDecl::new("v", Domain::range(0, 2), 0));
        g.edges.push(
            Edge::new("l0", "l0")
                .guard(Condition::cmp(CmpOp::Lt, Expr::var("v"), Expr::Lit(2)))
                .action(Action(vec![Assign::new(
                    "v",
                    Expr::bin(BinOp::Add, Expr::var("v"), Expr::Lit(1)),
                )])),
        );
        let r = over_approx_local_domain(&g, &vars(&["v"]), Default::default()).unwrap();
        let got: Vec<_> = r.domain.get("l0").unwrap().iter().cloned().collect();
        assert_eq!(got, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn unconstrained_variables_range_over_full_domain() {
        let mut g = TimedAgentGraph::new("G", "l0");
        g.add_location("l1");
        g.add_var(VariableDecl::new("v", Domain::range(0, 1), 0));
        g.add_var(VariableDecl::new("w", Domain::range(0, 1), 0));
        g.edges.push(
            Edge::new("l0", "l1")
                .guard(Condition::var_eq("w", 1))
                .action(Action(vec![Assign::new("v", Expr::var("w"))])),
        );
        let r = over_approx_local_domain(&g, &vars(&["v"]), Default::default()).unwrap();
        assert!(r.domain.get("l1").unwrap().contains(&vec![1]));
    }

    #[test]
    fn unsatisfiable_guard_yields_nothing() {
        let mut g = TimedAgentGraph::new("G", "l0");
        g.add_location("l1");
        g.add_var(VariableDecl::new("v", Domain::range(0, 1), 0));
        g.edges
            .push(Edge::new("l0", "l1").guard(Condition::False));
        let r = over_approx_local_domain(&g, &vars(&["v"]), Default::default()).unwrap();
        assert!(r.domain.get("l1").unwrap().is_empty());
    }
}
