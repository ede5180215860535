//! Plans one query: prints the subset map and the chosen join tree.
//!
//! cargo run --example single_query_cbo

use mqplan::exectree::construct_tree;
use mqplan::parser::parse_query;
use mqplan::planner::optimize_single;
use mqplan::Catalog;

const SQL: &str = "SELECT c_name, c_address, c_acctbal
FROM region, nation, customer, orders
WHERE o_custkey = c_custkey AND c_nationkey = n_nationkey
AND n_regionkey = r_regionkey AND r_regionkey < 5";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = Catalog::load_default_tpch();
    let q = parse_query(SQL, &catalog)?;
    let map = optimize_single(&q, &catalog)?;
    print!("{}", map.dump());

    let full = map.full().expect("a plan over every table");
    println!("\nbest order {} (cost {})", full.order, full.cost);
    print!("{}", construct_tree(&q, &full.order, &catalog)?.explain());
    Ok(())
}
