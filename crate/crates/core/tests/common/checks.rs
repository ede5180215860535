//! Checks shared by the property tests and the acceptance runner. Each
//! returns `Err(reason)` instead of panicking so the runner can report it.

use std::collections::BTreeMap;

use mqplan::catalog::TableStats;
use mqplan::executor::{Check, Gla, Row, Side, Value};
use mqplan::parser::{self, CmpOp};
use mqplan::planner::{self, JoinOrder, PlanMap, PlanProblem};
use mqplan::{Catalog, TableSet};
use proptest::prelude::*;

/// (cardinality, distinct keys in the fact table, selection on the dim)
pub type Dim = (u64, u64, Option<(CmpOp, u64)>);

/// A star join: fact table `f` plus `dims.len()` dimension tables.
#[derive(Debug, Clone)]
pub struct Star {
    pub fact: u64,
    pub dims: Vec<Dim>,
}

impl Star {
    pub fn tables(&self) -> usize {
        self.dims.len() + 1
    }

    pub fn catalog(&self) -> Catalog {
        let mut fact = TableStats::new("f", self.fact as f64).with_attr("f_m", self.fact.min(1000));
        let mut tables = Vec::new();
        for (i, (card, fk, _)) in self.dims.iter().enumerate() {
            fact = fact.with_attr(format!("f_k{i}"), (*fk).min(self.fact));
            tables.push(
                TableStats::new(format!("d{i}"), *card as f64)
                    .with_attr(format!("d{i}_k"), *card)
                    .with_attr(format!("d{i}_a"), (*card).min(50)),
            );
        }
        tables.insert(0, fact);
        Catalog::from_tables(tables).expect("generated stats are consistent")
    }

    pub fn sql(&self) -> String {
        let from: Vec<String> = std::iter::once("f".to_string())
            .chain((0..self.dims.len()).map(|i| format!("d{i}")))
            .collect();
        let mut preds: Vec<String> = (0..self.dims.len()).map(|i| format!("f_k{i} = d{i}_k")).collect();
        for (i, (_, _, sel)) in self.dims.iter().enumerate() {
            if let Some((op, lit)) = sel {
                preds.push(format!("d{i}_a {} {lit}", op_text(*op)));
            }
        }
        let mut sql = format!("SELECT f_m FROM {}", from.join(", "));
        if !preds.is_empty() {
            sql.push_str(&format!(" WHERE {}", preds.join(" AND ")));
        }
        sql
    }

    pub fn problem(&self) -> PlanProblem {
        let catalog = self.catalog();
        let q = parser::parse_query(&self.sql(), &catalog).expect("generated query parses");
        PlanProblem::from_query(&q, &catalog).expect("generated query plans")
    }
}

fn op_text(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Eq => "=",
        CmpOp::Neq => "<>",
        CmpOp::Lt => "<",
        CmpOp::Gt => ">",
    }
}

pub fn star(tables: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Star> {
    let op = prop_oneof![Just(CmpOp::Eq), Just(CmpOp::Lt), Just(CmpOp::Gt), Just(CmpOp::Neq)];
    let dim = (1u64..100_000, 1u64..100_000, proptest::option::of((op, 0u64..100)));
    (tables, 1_000u64..10_000_000)
        .prop_flat_map(move |(n, fact)| (Just(fact), proptest::collection::vec(dim.clone(), n - 1)))
        .prop_map(|(fact, dims)| Star { fact, dims })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Every slot subset is present, and each entry's cost is the cheapest split
/// of its table set over the other entries; sizes follow the chosen order.
pub fn audit_map(map: &PlanMap, problem: &PlanProblem) -> Result<(), String> {
    let n = map.slots().len();
    if map.len() != (1 << n) - 1 {
        return Err(format!("{} entries for {n} slots", map.len()));
    }
    let by_tables: BTreeMap<u32, _> = map.iter().into_iter().map(|(_, e)| (e.tables.0, e)).collect();
    for (key, e) in map.iter() {
        if e.order.tables() != e.tables {
            return Err(format!("{key}: order {} covers other tables", e.order.render()));
        }
        if !close(e.size, problem.estimate(&e.order)) {
            return Err(format!(
                "{key}: size {} but the order estimates {}",
                e.size,
                problem.estimate(&e.order)
            ));
        }
        if e.tables.len() == 1 {
            if e.cost != 0.0 {
                return Err(format!("{key}: scan cost {}", e.cost));
            }
            continue;
        }
        let all = e.tables.0;
        let mut best = f64::INFINITY;
        let mut sub = (all - 1) & all;
        while sub != 0 {
            let (l, r) = (by_tables[&sub], by_tables[&(all & !sub)]);
            let mut c = l.cost + r.cost;
            if l.tables.len() > 1 {
                c += l.size;
            }
            if r.tables.len() > 1 {
                c += r.size;
            }
            best = best.min(c);
            sub = (sub - 1) & all;
        }
        if !close(e.cost, best) {
            return Err(format!("{key}: cost {} but the cheapest split costs {best}", e.cost));
        }
    }
    Ok(())
}

/// Sizes and cost of a join tree under the planner's cost model.
pub fn tree_cost(order: &JoinOrder, problem: &PlanProblem) -> f64 {
    match order {
        JoinOrder::Leaf(_) => 0.0,
        JoinOrder::Join(l, r) => {
            let inner = |o: &JoinOrder| if o.is_leaf() { 0.0 } else { problem.estimate(o) };
            tree_cost(l, problem) + tree_cost(r, problem) + inner(l) + inner(r)
        }
    }
}

/// Every binary join tree over `tables`, both orientations.
pub fn all_trees(tables: TableSet) -> Vec<JoinOrder> {
    if tables.len() == 1 {
        return vec![JoinOrder::Leaf(tables.iter().next().expect("one table"))];
    }
    let all = tables.0;
    let mut out = Vec::new();
    let mut sub = (all - 1) & all;
    while sub != 0 {
        for l in all_trees(TableSet(sub)) {
            for r in all_trees(TableSet(all & !sub)) {
                out.push(JoinOrder::join(l.clone(), r));
            }
        }
        sub = (sub - 1) & all;
    }
    out
}

/// The planner's full-set cost equals the exhaustive minimum.
pub fn matches_brute_force(problem: &PlanProblem) -> Result<(), String> {
    let map = planner::optimize(problem).map_err(|e| e.to_string())?;
    let full = map.full().ok_or("no full entry")?;
    let (best, tree) = all_trees(full.tables)
        .into_iter()
        .map(|t| (tree_cost(&t, problem), t))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or("no trees")?;
    if !close(full.cost, best) {
        return Err(format!(
            "planner picked {} at {} but {} costs {best}",
            full.order.render(),
            full.cost,
            tree.render()
        ));
    }
    if !close(tree_cost(&full.order, problem), full.cost) {
        return Err(format!("reported cost {} differs from the tree's own cost", full.cost));
    }
    Ok(())
}

/// Three-column rows: a narrow integer key, then ints mixed with quarter-step reals.
pub fn rows() -> impl Strategy<Value = Vec<Row>> {
    let cell = prop_oneof![
        (-4i64..4).prop_map(Value::Int),
        (-40i64..40).prop_map(|i| Value::Real(i as f64 / 4.0)),
    ];
    let row = ((0i64..4).prop_map(Value::Int), cell.clone(), cell).prop_map(|(a, b, c)| vec![a, b, c]);
    proptest::collection::vec(row, 0..12)
}

/// One template per GLA kind.
pub fn templates() -> Vec<Gla> {
    vec![
        Gla::selection(vec![Check::Const {
            col: 1,
            op: CmpOp::Lt,
            value: Value::Int(1),
        }]),
        Gla::join(vec![0], vec![0]),
        Gla::collect(vec![2, 0]),
        Gla::distinct(),
        Gla::sum(1),
        Gla::group_by(0, 2),
    ]
}

fn fold(template: &Gla, input: &[(Side, Row)]) -> Result<Gla, String> {
    let mut g = template.init();
    for (side, r) in input {
        g.accumulate(*side, r.clone()).map_err(|e| e.to_string())?;
    }
    Ok(g)
}

fn output(g: Gla) -> Vec<Row> {
    let mut rows = g.terminate();
    rows.sort();
    rows
}

fn merged(mut a: Gla, b: Gla) -> Result<Gla, String> {
    a.merge(b).map_err(|e| e.to_string())?;
    Ok(a)
}

/// Serialization is an identity on state; merge is associative and
/// commutative up to output order; merging partial states equals
/// accumulating everything into one.
pub fn gla_algebra(template: &Gla, parts: [&[(Side, Row)]; 3]) -> Result<(), String> {
    let kind = template.kind();
    let [a, b, c] = parts.map(|p| fold(template, p));
    let (a, b, c) = (a?, b?, c?);
    for g in [&a, &b, &c] {
        let back = template.deserialize(&g.serialize()).map_err(|e| e.to_string())?;
        if &back != g {
            return Err(format!("{kind}: state changed across serialize/deserialize"));
        }
    }
    let left = merged(merged(a.clone(), b.clone())?, c.clone())?;
    let right = merged(a.clone(), merged(b.clone(), c.clone())?)?;
    let (left, right) = (output(left), output(right));
    if left != right {
        return Err(format!("{kind}: (a+b)+c and a+(b+c) differ"));
    }
    if output(merged(a.clone(), b.clone())?) != output(merged(b.clone(), a.clone())?) {
        return Err(format!("{kind}: a+b and b+a differ"));
    }
    let all: Vec<(Side, Row)> = parts.iter().flat_map(|p| p.iter().cloned()).collect();
    if output(fold(template, &all)?) != left {
        return Err(format!("{kind}: merged partial states differ from a single pass"));
    }
    Ok(())
}

pub fn sided(rows: Vec<Row>, flip: Vec<bool>) -> Vec<(Side, Row)> {
    rows.into_iter()
        .zip(flip.into_iter().chain(std::iter::repeat(false)))
        .map(|(r, f)| (if f { Side::Right } else { Side::Left }, r))
        .collect()
}

pub fn sided_rows() -> impl Strategy<Value = Vec<(Side, Row)>> {
    (rows(), proptest::collection::vec(any::<bool>(), 12)).prop_map(|(r, f)| sided(r, f))
}
