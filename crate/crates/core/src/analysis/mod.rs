//! Safety checking, simulation search, preservation testing and metrics.

mod check;
mod metrics;
mod preservation;
mod prop;
mod simulation;

pub use check::{check_ag, check_ag_net, CheckReport, TraceStep, Verdict};
pub use metrics::{metrics, metrics_net, Metrics, CSV_HEADER};
pub use preservation::{classify, ensure_observable, preservation_test, Outcome, PreservationReport};
pub use prop::{CProp, Prop};
pub use simulation::{
    greatest_simulation, labeled_system, simulation_between, LabelInterner, LabeledSystem,
    Observation, SimReport, Simulation,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        Action, Assign, BinOp, Condition, Domain, Edge, Expr, TimedAgentGraph, TmasGraph,
        VariableDecl,
    };
    use crate::semantics::ExploreOptions;

    fn counter() -> TmasGraph {
        let mut g = TimedAgentGraph::new("A", "l0");
        g.add_location("l1");
        g.add_var(VariableDecl::new("v", Domain::range(0, 2), 0));
        let inc = Expr::bin(
            BinOp::Min,
            Expr::bin(BinOp::Add, Expr::var("v"), Expr::Lit(1)),
            Expr::Lit(2),
        );
        g.edges
            .push(Edge::new("l0", "l1").action(Action(vec![Assign::new("v", inc.clone())])));
        g.edges
            .push(Edge::new("l1", "l0").action(Action(vec![Assign::new("v", inc)])));
        TmasGraph::single(g)
    }

    #[test]
    fn true_holds_and_initial_violation_has_one_step() {
        let mg = counter();
        let o = ExploreOptions::default();
        assert!(check_ag(&mg, &Prop::True, false, o).unwrap().verdict.is_sat());
        let r = check_ag(&mg, &Prop::not(Prop::at("A", "l0")), false, o).unwrap();
        match r.verdict {
            Verdict::Cex(t) => assert_eq!(t.len(), 1),
            Verdict::Sat => panic!("expected a counterexample"),
        }
    }

    #[test]
    fn counterexample_is_shortest() {
        let mg = counter();
        let p = Prop::Atom(Condition::cmp(
            crate::model::CmpOp::Lt,
            Expr::var("A.v"),
            Expr::Lit(2),
        ));
        match check_ag(&mg, &p, false, ExploreOptions::default()).unwrap().verdict {
            Verdict::Cex(t) => {
                assert_eq!(t.len(), 3);
                assert_eq!(t[2].evaluation.get("A.v"), Some(2));
                assert!(t[1].via.as_deref().unwrap().contains("l0 -> l1"));
            }
            Verdict::Sat => panic!("expected a counterexample"),
        }
    }

    #[test]
    fn empty_edge_graph_metrics() {
        let mg = TmasGraph::single(TimedAgentGraph::new("A", "l0"));
        let m = metrics(&mg, false, ExploreOptions::default()).unwrap();
        assert_eq!((m.states, m.transitions), (1, 0));
    }
}
