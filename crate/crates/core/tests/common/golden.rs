//! Reference plan maps: `key size cost [count queries] order`.

use mqplan::planner::{JoinOrder, PlanMap};

pub const SAMPLE_MAP: &str = "\
0 1.66667 0 0
01 8.33333 0 01
012 50000 8.33333 (01)2
0123 500000 50008.3 ((01)2)3
013 1.25e7 8.33333 (01)3
02 250000 0 02
023 2.5e6 250000 (02)3
03 2.5e6 0 03
1 25 0 1
12 150000 0 12
123 1.5e6 150000 (12)3
13 3.75e7 0 13
2 150000 0 2
23 1.5e6 0 23
3 1.5e6 0 3";

pub const CASE1_MAP: &str = "\
0 6.00122e+06 0 1 Query1 0
01 6.00122e+06 0 1 Query1 01
012 3.00061e+07 5 1 Query1 0(12)
0123 1.80036e+11 30005 2 Query1,Query4 0((12)3)
01234 1.20024e+06 330005 3 Query1,Query2,Query4 0(((12)3)4)
0124 3.00061e+07 6.00122e+06 1 Query1 (12)(04)
013 9.00182e+11 150000 2 Query1,Query4 0(13)
0134 6.00122e+06 1.65e+06 2 Query1,Query4 0((13)4)
014 6.00122e+06 1.5e+06 1 Query1 0(14)
02 1.5003e+08 0 1 Query1 02
023 9.00182e+11 150000 2 Query1,Query4 (23)0
0234 6.00122e+06 1.65e+06 2 Query1,Query4 0(4(23))
024 1.5003e+08 6.00122e+06 1 Query1 2(04)
03 9.00182e+11 0 2 Query1,Query4 03
034 6.00122e+06 1.5e+06 3 Query1,Query3,Query4 0(34)
04 6.00122e+06 0 1 Query1 04
1 1 0 0 - 1
12 5 0 0 - 12
123 30000 5 1 Query4 (12)3
1234 300000 30005 1 Query4 ((12)3)4
124 7.5e+06 5 0 - 4(12)
13 150000 0 1 Query4 13
134 1.5e+06 150000 1 Query4 (13)4
14 1.5e+06 0 0 - 14
2 25 0 0 - 2
23 150000 0 1 Query4 23
234 1.5e+06 150000 1 Query4 4(23)
24 3.75e+07 0 0 - 24
3 150000 0 1 Query4 3
34 1.5e+06 0 1 Query4 34
4 1.5e+06 0 0 - 4";

/// How a map compares with a reference map.
#[derive(Debug, Default)]
pub struct MapDiff {
    pub rows: usize,
    pub exact_orders: usize,
    /// Same tree with some join's inputs swapped.
    pub mirrored: Vec<String>,
    /// Everything else: missing keys, numbers or query lists off, other trees.
    pub errors: Vec<String>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-3 * b.abs().max(1e-12)
}

/// Sizes and costs within 1e-3 relative; query counts and lists exact.
pub fn compare_map(map: &PlanMap, golden: &str, with_queries: bool) -> MapDiff {
    let mut d = MapDiff {
        rows: map.len(),
        ..MapDiff::default()
    };
    let lines: Vec<&str> = golden.lines().collect();
    if map.len() != lines.len() {
        d.errors.push(format!("{} rows, expected {}", map.len(), lines.len()));
    }
    for line in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        let (key, size, cost, order) = (f[0], f[1], f[2], f[f.len() - 1]);
        let Some(e) = map.get(key) else {
            d.errors.push(format!("{key}: missing"));
            continue;
        };
        let num = |s: &str| s.parse::<f64>().expect("golden number");
        if !close(e.size, num(size)) || !close(e.cost, num(cost)) {
            d.errors.push(format!(
                "{key}: size {} cost {}, expected {size} {cost}",
                e.size, e.cost
            ));
        }
        if with_queries {
            let names = map.satisfied_names(e);
            let want: Vec<&str> = if f[4] == "-" { vec![] } else { f[4].split(',').collect() };
            if f[3].parse::<usize>() != Ok(e.satisfied_count()) || names != want {
                d.errors.push(format!("{key}: queries {names:?}, expected {want:?}"));
            }
        }
        let got = e.order.render();
        if got == order {
            d.exact_orders += 1;
        } else if JoinOrder::parse(order).is_some_and(|o| o.equivalent(&e.order)) {
            d.mirrored.push(format!("{key}: {got} vs {order}"));
        } else {
            d.errors.push(format!("{key}: order {got}, expected {order}"));
        }
    }
    d
}
