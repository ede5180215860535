//! Writes the graph and waypoint files for a query and reads them back.
//!
//! cargo run --example plan_files [out-dir]

use std::path::PathBuf;

use mqplan::exectree::construct_tree;
use mqplan::parser::parse_query;
use mqplan::planfiles::{write_plan_files, GraphDoc, WaypointDoc};
use mqplan::planner::optimize_single;
use mqplan::Catalog;

const SQL: &str = "SELECT c_name, c_address, c_acctbal
FROM region, nation, customer, orders
WHERE o_custkey = c_custkey AND c_nationkey = n_nationkey
AND n_regionkey = r_regionkey AND r_regionkey < 5";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("mqplan-example"));
    let catalog = Catalog::load_default_tpch();
    let q = parse_query(SQL, &catalog)?;
    let order = optimize_single(&q, &catalog)?.full().expect("full plan").order.clone();
    let dag = construct_tree(&q, &order, &catalog)?;

    let (graph, waypoint) = write_plan_files(&dag, &catalog, &out, "sample")?;
    let g = GraphDoc::parse(&std::fs::read_to_string(&graph)?)?;
    let w = WaypointDoc::parse(&std::fs::read_to_string(&waypoint)?)?;
    println!(
        "{}: {} scans, {} waypoints",
        graph.display(),
        g.scans.len(),
        g.waypoints.len()
    );
    println!(
        "{}: {} scan blocks, {} waypoint blocks",
        waypoint.display(),
        w.scans.len(),
        w.waypoints.len()
    );
    print!("{}", std::fs::read_to_string(&waypoint)?);
    Ok(())
}
