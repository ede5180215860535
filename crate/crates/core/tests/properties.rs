mod common;

use mqplan::datagen::{self, Scale};
use mqplan::exectree::ExecDag;
use mqplan::executor::{compare_results, naive_eval, run_plan, RunConfig};
use mqplan::mqo;
use mqplan::parser::{self, Aggregate};
use mqplan::planner;
use proptest::prelude::*;

use common::checks::*;
use common::*;

const AGGREGATES: &str = "MULTIQUERY
Query1:
SELECT DISTINCT c_nationkey FROM customer, orders
WHERE c_custkey = o_custkey AND o_totalprice < 10000
Query2:
SELECT SUM(o_totalprice), o_orderpriority FROM customer, orders
WHERE c_custkey = o_custkey GROUP BY o_orderpriority
Query3:
SELECT SUM(l_quantity) FROM lineitem, orders, customer
WHERE l_orderkey = o_orderkey AND o_custkey = c_custkey AND o_orderkey < 10000 AND l_discount < 0.05
END";

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn map_holds_every_subset_at_its_cheapest_split(s in star(2..=6)) {
        let problem = s.problem();
        let map = planner::optimize(&problem).unwrap();
        prop_assert_eq!(map.len(), (1 << s.tables()) - 1);
        if let Err(e) = audit_map(&map, &problem) {
            return Err(TestCaseError::fail(format!("{e}\n{}", s.sql())));
        }
    }

    #[test]
    fn planner_matches_exhaustive_search(s in star(2..=4)) {
        if let Err(e) = matches_brute_force(&s.problem()) {
            return Err(TestCaseError::fail(format!("{e}\n{}", s.sql())));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn gla_states_form_a_commutative_monoid(a in sided_rows(), b in sided_rows(), c in sided_rows()) {
        for t in templates() {
            if let Err(e) = gla_algebra(&t, [&a, &b, &c]) {
                return Err(TestCaseError::fail(e));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn results_do_not_depend_on_partitioning(seed in 0u64..1000, workers in 1usize..=8, chunk in 1usize..=40) {
        let cat = catalog();
        let data = datagen::generate(seed, &Scale::tiny());
        for text in [CASE1, AGGREGATES] {
            let mq = parser::parse_multiquery(text, &cat, None).unwrap();
            let sp = mqo::plan_multiquery(&mq, &cat, seed).unwrap();
            let dag = ExecDag::from_shared(&sp, &mq).unwrap();
            let out = run_plan(&dag, &data, &RunConfig { workers, chunk }).unwrap();
            for q in &mq.queries {
                let want = naive_eval(q, &data).unwrap();
                let dedup = q.select.aggregate == Aggregate::Distinct;
                prop_assert!(compare_results(&out.result(&q.name).unwrap().rows, &want.rows, dedup), "{}", q.name);
            }
        }
    }
}

#[test]
fn exhaustive_search_counts_trees() {
    // n! leaf orders times Catalan(n-1) shapes
    let counts: Vec<usize> = (1..=4)
        .map(|n| all_trees(mqplan::TableSet::from_indices(0..n)).len())
        .collect();
    assert_eq!(counts, [1, 2, 12, 120]);
}

#[test]
fn sample_query_passes_the_audits() {
    let cat = catalog();
    let q = parser::parse_query(SAMPLE, &cat).unwrap();
    let problem = planner::PlanProblem::from_query(&q, &cat).unwrap();
    let map = planner::optimize(&problem).unwrap();
    audit_map(&map, &problem).unwrap();
    matches_brute_force(&problem).unwrap();
}
