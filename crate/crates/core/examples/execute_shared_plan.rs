//! Runs a shared plan on generated data across simulated workers and checks
//! each query against nested-loop evaluation.
//!
//! cargo run --example execute_shared_plan

use mqplan::datagen::{generate, Scale};
use mqplan::exectree::ExecDag;
use mqplan::executor::{run_plan, verify, RunConfig};
use mqplan::mqo::plan_multiquery;
use mqplan::parser::parse_multiquery;
use mqplan::Catalog;

const BATCH: &str = "MULTIQUERY
Revenue:
SELECT SUM(l_extendedprice), o_orderpriority FROM lineitem, orders, customer
WHERE l_orderkey = o_orderkey AND o_custkey = c_custkey AND l_discount < 0.02
GROUP BY o_orderpriority
Nations:
SELECT DISTINCT c_nationkey FROM customer, orders
WHERE c_custkey = o_custkey AND o_totalprice < 5000
Big:
SELECT o_orderkey, o_totalprice FROM orders WHERE o_totalprice > 29000
END";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = Catalog::load_default_tpch();
    let mq = parse_multiquery(BATCH, &catalog, None)?;
    let plan = plan_multiquery(&mq, &catalog, 0)?;
    let dag = ExecDag::from_shared(&plan, &mq)?;
    let data = generate(1, &Scale::default());

    let out = run_plan(&dag, &data, &RunConfig { workers: 4, chunk: 32 })?;
    for (name, result) in &out.results {
        println!("{name}: {} rows {:?}", result.rows.len(), result.schema);
    }
    for v in verify(&dag, &out, &data)? {
        println!("{} matches oracle: {}", v.query, v.matches);
    }
    Ok(())
}
