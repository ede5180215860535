//! Four queries share one plan: the best full join order answers three of
//! them and the fourth is grafted on with two extra joins.
//!
//! cargo run --example multiquery_case1

use mqplan::exectree::ExecDag;
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
END";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = Catalog::load_default_tpch();
    let encoding: Vec<String> = ["lineitem", "region", "nation", "customer", "orders"]
        .map(String::from)
        .to_vec();
    let mq = parse_multiquery(BATCH, &catalog, Some(&encoding))?;
    let plan = plan_multiquery(&mq, &catalog, 0)?;

    let best = &plan.initial_best;
    println!("best {} answers {:?}", best.order, plan.map.satisfied_names(best));
    for step in &plan.steps {
        if let Step::Joins {
            query,
            order,
            new_joins,
        } = step
        {
            println!("{} grafted as {order}, {new_joins} new joins", mq.queries[*query].name);
        }
    }
    print!("{}", ExecDag::from_shared(&plan, &mq)?.explain());
    Ok(())
}
