//! Physical operator DAG.
//!
//! Each table is scanned once, with a `SELECT<table>` above the scan when the
//! table carries filters every consuming query agrees on. Joins take the
//! smaller estimated input on the right and are numbered `JOIN1..` in
//! post-order. Above each query's exit sit its leftover filters
//! (`EXITSEL`), `PROJECT`, an optional `DISTINCT`/`SUM`/`GROUPBY`, and
//! `PRINT`; with several exits these carry a `_<query>` suffix.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::catalog::Catalog;
use crate::fmt::g;
use crate::mqo::{JoinDag, NodeId, SharedPlan};
use crate::parser::{
    self, Aggregate, JoinPredicate, MultiQuery, ParsedQuery, SelectList, SelectionPredicate, SplitPredicates,
};
use crate::planner::{JoinOrder, PlanError, PlanProblem};
use crate::tableset::TableSet;

pub type ExecId = usize;

#[derive(Debug, Error)]
pub enum ExecTreeError {
    #[error("query {0} has no exit in the plan")]
    MissingExit(String),
    #[error("order covers {got:?} but the query needs {want:?}")]
    OrderMismatch { got: TableSet, want: TableSet },
    #[error(transparent)]
    Plan(#[from] PlanError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExecKind {
    Scan {
        table: String,
    },
    Select {
        table: String,
        preds: Vec<SelectionPredicate>,
    },
    /// `preds[i].left` comes from the left input.
    Join {
        seq: usize,
        preds: Vec<JoinPredicate>,
    },
    ExitSelect {
        query: String,
        selections: Vec<SelectionPredicate>,
        joins: Vec<JoinPredicate>,
    },
    Project {
        attrs: Vec<String>,
    },
    Distinct,
    Sum {
        attr: String,
    },
    GroupBy {
        group: String,
        sum: String,
    },
    Print {
        query: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecNode {
    pub name: String,
    pub kind: ExecKind,
    /// Scan: none. Join: left then right. Everything else: one.
    pub children: Vec<ExecId>,
    pub parents: Vec<ExecId>,
    pub tables: TableSet,
    pub est_size: f64,
    /// Batch indices of the queries whose results flow through this node.
    pub queries: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExitPoint {
    pub query: usize,
    pub name: String,
    /// Top shared node of the query: a scan, select or join.
    pub node: ExecId,
    pub residual_selections: Vec<SelectionPredicate>,
    pub residual_joins: Vec<JoinPredicate>,
    pub select: SelectList,
    /// Nodes above `node` up to and including the query's PRINT.
    pub chain: Vec<ExecId>,
}

impl ExitPoint {
    pub fn print(&self) -> ExecId {
        *self.chain.last().expect("chain ends in PRINT")
    }

    pub fn residual_text(&self) -> String {
        let mut parts: Vec<String> = self.residual_selections.iter().map(|p| p.to_string()).collect();
        parts.extend(self.residual_joins.iter().map(|p| p.to_string()));
        if parts.is_empty() {
            "-".into()
        } else {
            parts.join(" AND ")
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExecDag {
    pub nodes: Vec<ExecNode>,
    /// One per query, batch order.
    pub exits: Vec<ExitPoint>,
    /// Table names by index.
    pub tables: Vec<String>,
    pub queries: Vec<ParsedQuery>,
}

struct Builder<'a> {
    dag: &'a JoinDag,
    mq: &'a MultiQuery,
    splits: Vec<SplitPredicates>,
    members: HashMap<NodeId, Vec<usize>>,
    built: HashMap<NodeId, ExecId>,
    nodes: Vec<ExecNode>,
    applied: Vec<Vec<JoinPredicate>>,
    shared_sel: HashMap<String, Vec<SelectionPredicate>>,
}

impl<'a> Builder<'a> {
    fn push(
        &mut self,
        name: String,
        kind: ExecKind,
        children: Vec<ExecId>,
        tables: TableSet,
        est: f64,
        queries: Vec<usize>,
    ) -> ExecId {
        let id = self.nodes.len();
        for c in &children {
            self.nodes[*c].parents.push(id);
        }
        self.nodes.push(ExecNode {
            name,
            kind,
            children,
            parents: Vec::new(),
            tables,
            est_size: est,
            queries,
        });
        id
    }

    fn table_index(&self, q: usize, attr: &str) -> usize {
        let owner = self.mq.queries[q].owner_of(attr).expect("validated attribute");
        self.mq.table_index(owner).expect("encoded table")
    }

    fn build(&mut self, n: NodeId) -> ExecId {
        if let Some(id) = self.built.get(&n) {
            return *id;
        }
        let dn = self.dag.node(n);
        let members = self.members[&n].clone();
        let id = match dn.inputs {
            None => {
                let t = dn.tables.iter().next().expect("leaf table");
                let table = self.mq.encoding[t].clone();
                let scan = self.push(
                    table.clone(),
                    ExecKind::Scan { table: table.clone() },
                    vec![],
                    dn.tables,
                    dn.est_size,
                    members.clone(),
                );
                let mut shared: Option<Vec<SelectionPredicate>> = None;
                for q in &members {
                    let mine = self.splits[*q].selections.get(&table).cloned().unwrap_or_default();
                    shared = Some(match shared {
                        None => mine,
                        Some(s) => s.into_iter().filter(|p| mine.contains(p)).collect(),
                    });
                }
                let shared = shared.unwrap_or_default();
                self.shared_sel.insert(table.clone(), shared.clone());
                if shared.is_empty() {
                    scan
                } else {
                    self.push(
                        format!("SELECT{table}"),
                        ExecKind::Select { table, preds: shared },
                        vec![scan],
                        dn.tables,
                        dn.est_size,
                        members,
                    )
                }
            }
            Some((a, b)) => {
                let (a, b) = if self.dag.node(a).est_size < self.dag.node(b).est_size {
                    (b, a)
                } else {
                    (a, b)
                };
                let (lt, rt) = (self.dag.node(a).tables, self.dag.node(b).tables);
                let left = self.build(a);
                let right = self.build(b);
                let mut shared: Option<Vec<JoinPredicate>> = None;
                for q in &members {
                    let mine: Vec<JoinPredicate> = self.splits[*q]
                        .joins
                        .iter()
                        .filter_map(|p| {
                            let (ta, tb) = (self.table_index(*q, &p.left), self.table_index(*q, &p.right));
                            if lt.contains(ta) && rt.contains(tb) {
                                Some(p.clone())
                            } else if lt.contains(tb) && rt.contains(ta) {
                                Some(JoinPredicate::new(&p.right, &p.left))
                            } else {
                                None
                            }
                        })
                        .collect();
                    shared = Some(match shared {
                        None => mine,
                        Some(s) => s.into_iter().filter(|p| mine.iter().any(|m| m.same_as(p))).collect(),
                    });
                }
                let preds = shared.unwrap_or_default();
                for q in &members {
                    self.applied[*q].extend(preds.iter().cloned());
                }
                self.push(
                    String::new(),
                    ExecKind::Join { seq: 0, preds },
                    vec![left, right],
                    dn.tables,
                    dn.est_size,
                    members,
                )
            }
        };
        self.built.insert(n, id);
        id
    }
}

impl ExecDag {
    /// Operator DAG for a planned batch.
    pub fn from_shared(sp: &SharedPlan, mq: &MultiQuery) -> Result<Self, ExecTreeError> {
        Self::build(&sp.dag, &sp.exits, mq)
    }

    pub fn build(dag: &JoinDag, exits: &BTreeMap<usize, NodeId>, mq: &MultiQuery) -> Result<Self, ExecTreeError> {
        for (qi, q) in mq.queries.iter().enumerate() {
            if !exits.contains_key(&qi) {
                return Err(ExecTreeError::MissingExit(q.name.clone()));
            }
        }
        let mut members: HashMap<NodeId, Vec<usize>> = HashMap::new();
        for (q, n) in exits {
            for d in dag.descendants(*n) {
                members.entry(d).or_default().push(*q);
            }
        }
        let mut b = Builder {
            dag,
            mq,
            splits: mq.queries.iter().map(parser::split_predicates).collect(),
            members,
            built: HashMap::new(),
            nodes: Vec::new(),
            applied: vec![Vec::new(); mq.len()],
            shared_sel: HashMap::new(),
        };
        let multi = mq.len() > 1;
        let mut out_exits = Vec::new();
        for (q, n) in exits {
            let top = b.build(*n);
            let query = &mq.queries[*q];
            let split = &b.splits[*q];
            let mut residual_selections = Vec::new();
            for (table, preds) in &split.selections {
                let shared = b.shared_sel.get(table).cloned().unwrap_or_default();
                residual_selections.extend(preds.iter().filter(|p| !shared.contains(p)).cloned());
            }
            let residual_joins: Vec<JoinPredicate> = split
                .joins
                .iter()
                .filter(|p| !b.applied[*q].iter().any(|a| a.same_as(p)))
                .cloned()
                .collect();
            let name = |base: &str| {
                if multi {
                    format!("{base}_{}", query.name)
                } else {
                    base.to_string()
                }
            };
            let (tables, est) = (b.nodes[top].tables, b.nodes[top].est_size);
            let mut chain = Vec::new();
            let mut cur = top;
            let mut add = |b: &mut Builder, base: &str, kind: ExecKind, cur: &mut ExecId| {
                *cur = b.push(name(base), kind, vec![*cur], tables, est, vec![*q]);
                chain.push(*cur);
            };
            if !residual_selections.is_empty() || !residual_joins.is_empty() {
                let kind = ExecKind::ExitSelect {
                    query: query.name.clone(),
                    selections: residual_selections.clone(),
                    joins: residual_joins.clone(),
                };
                add(&mut b, "EXITSEL", kind, &mut cur);
            }
            add(
                &mut b,
                "PROJECT",
                ExecKind::Project {
                    attrs: query.select.projection(),
                },
                &mut cur,
            );
            match &query.select.aggregate {
                Aggregate::None => {}
                Aggregate::Distinct => add(&mut b, "DISTINCT", ExecKind::Distinct, &mut cur),
                Aggregate::Sum { attr, group_by: None } => {
                    add(&mut b, "SUM", ExecKind::Sum { attr: attr.clone() }, &mut cur)
                }
                Aggregate::Sum {
                    attr,
                    group_by: Some(g),
                } => add(
                    &mut b,
                    "GROUPBY",
                    ExecKind::GroupBy {
                        group: g.clone(),
                        sum: attr.clone(),
                    },
                    &mut cur,
                ),
            }
            add(
                &mut b,
                "PRINT",
                ExecKind::Print {
                    query: query.name.clone(),
                },
                &mut cur,
            );
            out_exits.push(ExitPoint {
                query: *q,
                name: query.name.clone(),
                node: top,
                residual_selections,
                residual_joins,
                select: query.select.clone(),
                chain,
            });
        }
        let mut dag = ExecDag {
            nodes: b.nodes,
            exits: out_exits,
            tables: mq.encoding.clone(),
            queries: mq.queries.clone(),
        };
        dag.number_joins();
        Ok(dag)
    }

    fn number_joins(&mut self) {
        let mut seen = vec![false; self.nodes.len()];
        let mut seq = 0;
        let roots: Vec<ExecId> = self.exits.iter().map(|e| e.print()).collect();
        for r in roots {
            self.post_order(r, &mut seen, &mut seq);
        }
    }

    fn post_order(&mut self, n: ExecId, seen: &mut [bool], seq: &mut usize) {
        if seen[n] {
            return;
        }
        seen[n] = true;
        for c in self.nodes[n].children.clone() {
            self.post_order(c, seen, seq);
        }
        if let ExecKind::Join { seq: s, .. } = &mut self.nodes[n].kind {
            *seq += 1;
            *s = *seq;
            self.nodes[n].name = format!("JOIN{seq}");
        }
    }

    pub fn node(&self, id: ExecId) -> &ExecNode {
        &self.nodes[id]
    }

    pub fn by_name(&self, name: &str) -> Option<ExecId> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn exit(&self, query: &str) -> Option<&ExitPoint> {
        self.exits.iter().find(|e| e.name == query)
    }

    pub fn is_multi_exit(&self) -> bool {
        self.exits.len() > 1
    }

    pub fn join_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, ExecKind::Join { .. }))
            .count()
    }

    /// Post-order from every PRINT, children before parents, each node once.
    pub fn topological(&self) -> Vec<ExecId> {
        fn go(d: &ExecDag, n: ExecId, seen: &mut [bool], out: &mut Vec<ExecId>) {
            if seen[n] {
                return;
            }
            seen[n] = true;
            for c in &d.nodes[n].children {
                go(d, *c, seen, out);
            }
            out.push(n);
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut out = Vec::new();
        for e in &self.exits {
            go(self, e.print(), &mut seen, &mut out);
        }
        out
    }

    /// Pre-order from every PRINT, left input first, each node once.
    pub fn pre_order(&self) -> Vec<ExecId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut out = Vec::new();
        for e in &self.exits {
            let mut stack = vec![e.print()];
            while let Some(n) = stack.pop() {
                if seen[n] {
                    continue;
                }
                seen[n] = true;
                out.push(n);
                for c in self.nodes[n].children.iter().rev() {
                    stack.push(*c);
                }
            }
        }
        out
    }

    /// The parent of `n` on query `q`'s path to its PRINT.
    pub fn parent_for(&self, n: ExecId, q: usize) -> Option<ExecId> {
        self.nodes[n]
            .parents
            .iter()
            .copied()
            .find(|p| self.nodes[*p].queries.contains(&q))
    }

    /// Checks the structural rules every built DAG must satisfy.
    pub fn check(&self) -> Result<(), String> {
        let mut names = std::collections::BTreeSet::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if !names.insert(n.name.as_str()) {
                return Err(format!("duplicate node name {}", n.name));
            }
            let arity = match n.kind {
                ExecKind::Scan { .. } => 0,
                ExecKind::Join { .. } => 2,
                _ => 1,
            };
            if n.children.len() != arity {
                return Err(format!("{} has {} inputs", n.name, n.children.len()));
            }
            for c in &n.children {
                if *c >= i {
                    return Err(format!("{} consumes a later node", n.name));
                }
                if !self.nodes[*c].parents.contains(&i) {
                    return Err(format!("{} missing parent link", self.nodes[*c].name));
                }
            }
            match &n.kind {
                ExecKind::Select { table, .. } => match &self.nodes[n.children[0]].kind {
                    ExecKind::Scan { table: t } if t == table => {}
                    _ => return Err(format!("{} is not above a scan of {table}", n.name)),
                },
                ExecKind::Join { .. } => {
                    let (l, r) = (&self.nodes[n.children[0]], &self.nodes[n.children[1]]);
                    if r.est_size > l.est_size {
                        return Err(format!("{} has the larger input on the right", n.name));
                    }
                }
                _ => {}
            }
        }
        let topo = self.topological();
        if topo.len() != self.nodes.len() {
            return Err("unreachable nodes".into());
        }
        Ok(())
    }

    /// Indented rendering from each PRINT; nodes already shown are marked
    /// `(shared)` instead of being expanded again.
    pub fn explain(&self) -> String {
        let mut out = String::new();
        let mut seen = vec![false; self.nodes.len()];
        for e in &self.exits {
            self.explain_node(e.print(), 0, &mut seen, &mut out);
        }
        out
    }

    fn explain_node(&self, n: ExecId, depth: usize, seen: &mut [bool], out: &mut String) {
        let node = &self.nodes[n];
        let pad = "  ".repeat(depth);
        if seen[n] {
            let _ = writeln!(out, "{pad}{} (shared)", label(node));
            return;
        }
        seen[n] = true;
        let detail = match &node.kind {
            ExecKind::Scan { .. } => String::new(),
            ExecKind::Select { preds, .. } => format!(" [{}]", join_display(preds)),
            ExecKind::Join { preds, .. } if preds.is_empty() => " [cross]".into(),
            ExecKind::Join { preds, .. } => format!(" [{}]", join_display(preds)),
            ExecKind::ExitSelect { selections, joins, .. } => {
                let mut parts: Vec<String> = selections.iter().map(|p| p.to_string()).collect();
                parts.extend(joins.iter().map(|p| p.to_string()));
                format!(" [{}]", parts.join(" AND "))
            }
            ExecKind::Project { attrs } => format!(" ({})", attrs.join(", ")),
            ExecKind::Distinct | ExecKind::Print { .. } => String::new(),
            ExecKind::Sum { attr } => format!(" ({attr})"),
            ExecKind::GroupBy { group, sum } => format!(" ({group}, {sum})"),
        };
        let est = match node.kind {
            ExecKind::Scan { .. } | ExecKind::Select { .. } | ExecKind::Join { .. } => {
                format!(" ~{}", g(node.est_size))
            }
            _ => String::new(),
        };
        let _ = writeln!(out, "{pad}{}{detail}{est}", label(node));
        for c in &node.children {
            self.explain_node(*c, depth + 1, seen, out);
        }
    }
}

fn label(n: &ExecNode) -> String {
    match &n.kind {
        ExecKind::Scan { table } => format!("SCAN {table}"),
        _ => n.name.clone(),
    }
}

fn join_display<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" AND ")
}

/// Execution tree for one query along `order` (indices in FROM order).
pub fn construct_tree(q: &ParsedQuery, order: &JoinOrder, catalog: &Catalog) -> Result<ExecDag, ExecTreeError> {
    let mq = parser::build_multiquery(vec![q.clone()], None).expect("single query batch");
    let problem = PlanProblem::from_multiquery(&mq, catalog)?;
    let want = problem.queries[0].tables;
    if order.tables() != want {
        return Err(ExecTreeError::OrderMismatch {
            got: order.tables(),
            want,
        });
    }
    let mut dag = JoinDag::new();
    let (root, _) = dag.graft(order, &problem);
    let exits = BTreeMap::from([(0, root)]);
    ExecDag::build(&dag, &exits, &mq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_query;

    const SIMPLE: &str = "SELECT c_name, c_address, c_acctbal
        FROM region, nation, customer, orders
        WHERE o_custkey = c_custkey AND c_nationkey = n_nationkey
        AND n_regionkey = r_regionkey AND r_regionkey < 5";

    fn tree(sql: &str, order: &str) -> ExecDag {
        let cat = Catalog::load_default_tpch();
        let q = parse_query(sql, &cat).unwrap();
        construct_tree(&q, &JoinOrder::parse(order).unwrap(), &cat).unwrap()
    }

    fn child_names(d: &ExecDag, name: &str) -> Vec<String> {
        let n = d.by_name(name).unwrap();
        d.node(n).children.iter().map(|c| d.node(*c).name.clone()).collect()
    }

    #[test]
    fn sample_tree_shape() {
        let d = tree(SIMPLE, "((01)2)3");
        d.check().unwrap();
        assert_eq!(d.join_count(), 3);
        assert_eq!(child_names(&d, "JOIN1"), ["nation", "SELECTregion"]);
        assert_eq!(child_names(&d, "JOIN2"), ["customer", "JOIN1"]);
        assert_eq!(child_names(&d, "JOIN3"), ["orders", "JOIN2"]);
        assert_eq!(child_names(&d, "PROJECT"), ["JOIN3"]);
        assert_eq!(child_names(&d, "PRINT"), ["PROJECT"]);
        assert_eq!(child_names(&d, "SELECTregion"), ["region"]);
        let e = &d.exits[0];
        assert!(e.residual_selections.is_empty() && e.residual_joins.is_empty());
        match &d.node(d.by_name("JOIN3").unwrap()).kind {
            ExecKind::Join { preds, .. } => assert_eq!(preds, &[JoinPredicate::new("o_custkey", "c_custkey")]),
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn single_leaf_with_selection() {
        let d = tree("SELECT c_name FROM customer WHERE c_acctbal > 0", "0");
        d.check().unwrap();
        assert_eq!(child_names(&d, "SELECTcustomer"), ["customer"]);
        assert_eq!(child_names(&d, "PROJECT"), ["SELECTcustomer"]);
    }

    #[test]
    fn top_operators() {
        let d = tree(&SIMPLE.replace("SELECT ", "SELECT DISTINCT "), "((01)2)3");
        assert_eq!(child_names(&d, "PRINT"), ["DISTINCT"]);
        assert_eq!(child_names(&d, "DISTINCT"), ["PROJECT"]);
        let grouped = "SELECT SUM (c_acctbal), c_name FROM region, nation, customer, orders
            WHERE o_custkey = c_custkey AND c_nationkey = n_nationkey
            AND n_regionkey = r_regionkey AND r_regionkey < 5 GROUP BY c_name";
        let d = tree(grouped, "((01)2)3");
        assert_eq!(child_names(&d, "PRINT"), ["GROUPBY"]);
        assert_eq!(child_names(&d, "GROUPBY"), ["PROJECT"]);
        assert!(d.by_name("SUM").is_none());
        let d = tree("SELECT SUM(c_acctbal) FROM customer", "0");
        assert_eq!(child_names(&d, "PRINT"), ["SUM"]);
    }

    #[test]
    fn explain_is_indented() {
        let d = tree(SIMPLE, "((01)2)3");
        let text = d.explain();
        let first: Vec<&str> = text.lines().take(3).collect();
        assert_eq!(first[0], "PRINT");
        assert_eq!(first[1], "  PROJECT (c_name, c_address, c_acctbal)");
        assert!(first[2].starts_with("    JOIN3 [o_custkey = c_custkey] ~500000"));
        assert!(text.contains("SELECTregion [r_regionkey < 5] ~1.66667"));
    }

    #[test]
    fn order_must_cover_query() {
        let cat = Catalog::load_default_tpch();
        let q = parse_query(SIMPLE, &cat).unwrap();
        let err = construct_tree(&q, &JoinOrder::parse("01").unwrap(), &cat).unwrap_err();
        assert!(matches!(err, ExecTreeError::OrderMismatch { .. }));
    }
}
