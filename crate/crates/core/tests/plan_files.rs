mod common;

use mqplan::exectree::{construct_tree, ExecDag};
use mqplan::mqo;
use mqplan::parser::parse_query;
use mqplan::planfiles::{self, emit_graph, emit_waypoint, GraphDoc, WaypointDoc};
use mqplan::planner::{self, JoinOrder};

use common::*;

fn sample_dag() -> ExecDag {
    let cat = catalog();
    let q = parse_query(SAMPLE, &cat).unwrap();
    let map = planner::optimize_single(&q, &cat).unwrap();
    construct_tree(&q, &map.full().unwrap().order, &cat).unwrap()
}

#[test]
fn graph_file_matches_fixture() {
    let text = emit_graph(&sample_dag()).unwrap();
    assert_eq!(tokens(&text), tokens(GRAPH_FIXTURE));
}

#[test]
fn waypoint_file_matches_fixture() {
    let text = emit_waypoint(&sample_dag(), &catalog()).unwrap();
    assert_eq!(planfiles::normalize(&text), planfiles::normalize(WAYPOINT_FIXTURE));
}

#[test]
fn fixtures_parse_back_to_emitted_docs() {
    let dag = sample_dag();
    assert_eq!(
        GraphDoc::parse(GRAPH_FIXTURE).unwrap(),
        planfiles::graph_doc(&dag).unwrap()
    );
    assert_eq!(
        WaypointDoc::parse(WAYPOINT_FIXTURE).unwrap(),
        planfiles::waypoint_doc(&dag, &catalog()).unwrap()
    );
}

#[test]
fn multi_exit_files_are_consistent() {
    for mq in [case1(), case2()] {
        let sp = mqo::plan_multiquery(&mq, &catalog(), 0).unwrap();
        let dag = ExecDag::from_shared(&sp, &mq).unwrap();
        let graph = planfiles::graph_doc(&dag).unwrap();
        assert_eq!(graph.queries, mq.names());
        assert!(graph.links_resolve());
        assert!(!graph.comments.is_empty());
        let prints: Vec<&String> = graph.waypoints.iter().filter(|w| w.starts_with("PRINT_")).collect();
        assert_eq!(prints.len(), mq.len());
        for table in &graph.scans {
            assert_eq!(graph.scans.iter().filter(|t| *t == table).count(), 1);
        }
        assert_eq!(GraphDoc::parse(&graph.render()).unwrap(), graph);

        let wp = planfiles::waypoint_doc(&dag, &catalog()).unwrap();
        assert_eq!(WaypointDoc::parse(&wp.render()).unwrap(), wp);
        // every scan line lists exactly the query's attributes of that table
        for block in &wp.scans {
            for line in &block.lines {
                let q = &mq.queries[mq.query_index(&line.query).unwrap()];
                let mut want: Vec<&str> = q
                    .attr_owner
                    .iter()
                    .filter(|(_, t)| *t == block.table)
                    .map(|(a, _)| a.as_str())
                    .collect();
                let mut got: Vec<&str> = line.attrs.iter().map(String::as_str).collect();
                want.sort();
                got.sort();
                assert_eq!(got, want);
            }
        }
    }
}

#[test]
fn explicit_order_gives_same_files() {
    let cat = catalog();
    let q = parse_query(SAMPLE, &cat).unwrap();
    let dag = construct_tree(&q, &JoinOrder::parse("((01)2)3").unwrap(), &cat).unwrap();
    assert_eq!(emit_graph(&dag).unwrap(), emit_graph(&sample_dag()).unwrap());
}
