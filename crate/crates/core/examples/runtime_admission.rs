//! Admits a query into a batch that has already been planned; existing
//! exits stay where they are.
//!
//! cargo run --example runtime_admission

use mqplan::mqo::plan_multiquery;
use mqplan::parser::{build_multiquery, parse_multiquery, parse_named_query};
use mqplan::Catalog;

const BATCH: &str = "MULTIQUERY
Orders:
SELECT o_orderkey FROM orders, customer WHERE o_custkey = c_custkey AND c_acctbal < 0
Customers:
SELECT c_name FROM customer WHERE c_mktsegment = 'BUILDING'
END";

const LATE: &str = "SELECT n_name FROM nation, customer, orders
WHERE n_nationkey = c_nationkey AND c_custkey = o_custkey";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = Catalog::load_default_tpch();
    let mq = parse_multiquery(BATCH, &catalog, None)?;
    let mut plan = plan_multiquery(&mq, &catalog, 0)?;
    let before = plan.exits.clone();
    println!("planned {} queries, {} joins", plan.exits.len(), plan.dag.join_count());

    let mut queries = mq.queries.clone();
    queries.push(parse_named_query("Late", LATE, &catalog)?);
    let mut encoding = mq.encoding.clone();
    encoding.extend(["nation".to_string()]);
    let widened = build_multiquery(queries, Some(&encoding))?;
    plan.admit(&widened, &catalog, 0)?;

    let kept = before.iter().all(|(q, n)| plan.exits.get(q) == Some(n));
    println!(
        "admitted: {} exits, {} joins, old exits kept: {kept}",
        plan.exits.len(),
        plan.dag.join_count()
    );
    Ok(())
}
