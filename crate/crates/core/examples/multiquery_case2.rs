//! When the best plan misses a query's tables, it is wrapped as a view and
//! re-planned together with the missing tables.
//!
//! cargo run --example multiquery_case2

use mqplan::mqo::{plan_multiquery, Step};
use mqplan::parser::parse_multiquery;
use mqplan::Catalog;

const BATCH: &str = "MULTIQUERY
Query1:
SELECT l_orderkey FROM lineitem
WHERE l_returnflag = 'R' AND l_discount < 0.04 AND l_shipmode = 'MAIL'
Query2:
SELECT l_discount FROM lineitem, orders, customer, nation, region
WHERE l_orderkey = o_orderkey AND o_custkey = c_custkey AND
      c_nationkey = n_nationkey AND n_regionkey = r_regionkey AND
      r_regionkey = 1 AND o_orderkey < 10000
Query3:
SELECT l_discount FROM customer, orders, lineitem
WHERE c_custkey = o_custkey AND o_orderkey = l_orderkey AND
      c_name = 'Customer#000070919' AND l_quantity > 30 AND l_discount < 0.03
Query4:
SELECT c_name, c_address, c_acctbal FROM customer
WHERE c_name = 'Customer#000070919'
Query5:
SELECT c_name FROM customer, orders
WHERE c_custkey = o_custkey AND o_totalprice < 10000
END";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = Catalog::load_default_tpch();
    let encoding: Vec<String> = ["lineitem", "region", "nation", "customer", "orders"]
        .map(String::from)
        .to_vec();
    let mq = parse_multiquery(BATCH, &catalog, Some(&encoding))?;
    let plan = plan_multiquery(&mq, &catalog, 0)?;
    println!("best {} before widening", plan.initial_best.order);
    for step in &plan.steps {
        match step {
            Step::Tables {
                query,
                missing,
                fresh,
                entry,
                ..
            } => {
                println!("{} needs tables {}; view map:", mq.queries[*query].name, missing.key());
                print!("{}", fresh.dump());
                println!("replacement {} answers {}", entry.order, entry.satisfied_count());
            }
            Step::Joins { query, order, .. } => println!("{} grafted as {order}", mq.queries[*query].name),
        }
    }
    println!("{} exits", plan.exits.len());
    Ok(())
}
