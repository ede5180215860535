#![allow(dead_code)]

use mqplan::parser::{self, MultiQuery};
use mqplan::Catalog;

pub const CASE1: &str = "MULTIQUERY
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

pub const QUERY5: &str = "Query5:
SELECT c_name FROM customer, orders
WHERE c_custkey = o_custkey AND o_totalprice < 10000";

pub const SAMPLE: &str = "SELECT c_name, c_address, c_acctbal
FROM region, nation, customer, orders
WHERE o_custkey = c_custkey AND c_nationkey = n_nationkey
AND n_regionkey = r_regionkey AND r_regionkey < 5";

/// Table indices used by the worked batch examples.
pub const ENCODING: [&str; 5] = ["lineitem", "region", "nation", "customer", "orders"];

pub fn catalog() -> Catalog {
    Catalog::load_default_tpch()
}

pub fn encoding() -> Vec<String> {
    ENCODING.iter().map(|s| s.to_string()).collect()
}

pub fn case1() -> MultiQuery {
    parser::parse_multiquery(CASE1, &catalog(), Some(&encoding())).unwrap()
}

pub fn case2() -> MultiQuery {
    let text = CASE1.replace("END", &format!("{QUERY5}\nEND"));
    parser::parse_multiquery(&text, &catalog(), Some(&encoding())).unwrap()
}

pub const GRAPH_FIXTURE: &str = "4 TableScans customer nation orders region 5 WayPoints PRINT JOIN1 JOIN2 JOIN3 SELECTregion 1 Queries Q1 4 Leaves customer 1 Queries Q1 JOIN3 0 TerminalLinks 1 RegularLinks JOIN2 nation 1 Queries Q1 JOIN2 0 TerminalLinks 1 RegularLinks JOIN1 orders 1 Queries Q1 PRINT 0 TerminalLinks 1 RegularLinks JOIN3 region 1 Queries Q1 JOIN1 0 TerminalLinks 1 RegularLinks SELECTregion 5 Nodes PRINT 0 TerminalLinks 0 RegularLinks JOIN1 1 TerminalLinks Q1 JOIN2 0 RegularLinks JOIN2 1 TerminalLinks Q1 JOIN3 0 RegularLinks JOIN3 1 TerminalLinks Q1 PRINT 0 RegularLinks SELECTregion 1 TerminalLinks Q1 JOIN1 0 RegularLinks";

pub const WAYPOINT_FIXTURE: &str = "4 TableScans
orders 1
Q1 PRINT 1 o_custkey 0
customer 1
Q1 JOIN3 5 c_custkey c_name c_address c_nationkey c_acctbal 0
nation 1
Q1 JOIN2 2 n_nationkey n_regionkey 0
region 1
Q1 JOIN1 1 r_regionkey 0
5 WayPoints
PRINT print 1
Q1 printList (val(c_name), val(c_address), val(c_acctbal))$
JOIN3 join 2
lefthash string o_custkey$
Q1 join (), ((c_custkey),(c_name, c_address, c_acctbal))$
JOIN2 join 2
lefthash string c_nationkey$
Q1 join (c_custkey, c_name, c_address, c_acctbal), ((n_nationkey),())$
JOIN1 join 2
lefthash string n_regionkey$
Q1 join (n_nationkey), ((r_regionkey),())$
SELECTregion selection 2
Drop string $
Q1 selection ((val(r_regionkey) < 5))$";

/// Whitespace-separated tokens, ignoring `#` comment lines.
pub fn tokens(text: &str) -> Vec<String> {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(str::split_whitespace)
        .map(str::to_string)
        .collect()
}
pub mod checks;
pub mod golden;
