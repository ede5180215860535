//! Folding a whole batch into one join DAG.
//!
//! Planning starts from the map entry that answers the most queries (cheapest
//! on ties). Queries it leaves unanswered are then added one at a time:
//!
//! * if the DAG already scans every table the query needs, the query is
//!   planned alone and its join tree grafted on, reusing every existing node
//!   with the same table set and order;
//! * otherwise the current plan is wrapped as a single relation `v`, joined
//!   with the missing tables in a fresh map, and the result replaces the old
//!   map entry for that table set.
//!
//! Each query ends up with one exit: the node whose table set equals its own.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::catalog::Catalog;
use crate::parser::{self, MultiQuery, ParseError};
use crate::planner::{self, JoinOrder, PlanEntry, PlanError, PlanMap, PlanProblem, Planner};
use crate::tableset::TableSet;

pub type NodeId = usize;

#[derive(Debug, Error)]
pub enum MqoError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("admitted batch must extend the running one: {0}")]
    Admission(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DagNode {
    pub tables: TableSet,
    pub order: JoinOrder,
    /// `None` for a base table, otherwise the two inputs in order orientation.
    pub inputs: Option<(NodeId, NodeId)>,
    pub parents: Vec<NodeId>,
    pub est_size: f64,
}

impl DagNode {
    pub fn is_leaf(&self) -> bool {
        self.inputs.is_none()
    }
}

/// Logical join DAG. A node's identity is its table set plus order rendering.
#[derive(Debug, Clone, Default)]
pub struct JoinDag {
    nodes: Vec<DagNode>,
    index: HashMap<(TableSet, String), NodeId>,
}

impl JoinDag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn nodes(&self) -> &[DagNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &DagNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn join_count(&self) -> usize {
        self.nodes.iter().filter(|n| !n.is_leaf()).count()
    }

    pub fn tables(&self) -> TableSet {
        self.nodes.iter().fold(TableSet::EMPTY, |s, n| s.union(n.tables))
    }

    pub fn find(&self, order: &JoinOrder) -> Option<NodeId> {
        self.index.get(&(order.tables(), order.render())).copied()
    }

    /// Adds `order`, reusing every matching subtree. Returns the node for the
    /// whole order and the nodes created.
    pub fn graft(&mut self, order: &JoinOrder, problem: &PlanProblem) -> (NodeId, Vec<NodeId>) {
        let mut created = Vec::new();
        let id = self.graft_rec(order, problem, &mut created);
        (id, created)
    }

    fn graft_rec(&mut self, order: &JoinOrder, problem: &PlanProblem, created: &mut Vec<NodeId>) -> NodeId {
        if let Some(id) = self.find(order) {
            return id;
        }
        let inputs = match order {
            JoinOrder::Leaf(_) => None,
            JoinOrder::Join(l, r) => {
                let a = self.graft_rec(l, problem, created);
                let b = self.graft_rec(r, problem, created);
                Some((a, b))
            }
        };
        let id = self.nodes.len();
        if let Some((a, b)) = inputs {
            self.nodes[a].parents.push(id);
            self.nodes[b].parents.push(id);
        }
        self.nodes.push(DagNode {
            tables: order.tables(),
            order: order.clone(),
            inputs,
            parents: Vec::new(),
            est_size: problem.estimate(order),
        });
        self.index.insert((order.tables(), order.render()), id);
        created.push(id);
        id
    }

    /// `root` and everything below it, each node once, in pre-order.
    pub fn descendants(&self, root: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(n) = stack.pop() {
            if out.contains(&n) {
                continue;
            }
            out.push(n);
            if let Some((a, b)) = self.nodes[n].inputs {
                stack.push(b);
                stack.push(a);
            }
        }
        out
    }

    /// Whether `small` occurs at or below `big` with the same table set and
    /// order. An absent tree always occurs.
    pub fn sub_tree(&self, big: NodeId, small: Option<&JoinOrder>) -> bool {
        let Some(small) = small else { return true };
        let (tables, rendering) = (small.tables(), small.render());
        self.descendants(big)
            .into_iter()
            .any(|n| self.nodes[n].tables == tables && self.nodes[n].order.render() == rendering)
    }
}

/// Most queries answered, then least cost, then smallest key.
pub fn select_best(map: &PlanMap) -> Option<&PlanEntry> {
    map.iter()
        .into_iter()
        .min_by(|(ka, a), (kb, b)| {
            b.satisfied_count()
                .cmp(&a.satisfied_count())
                .then(a.cost.total_cmp(&b.cost))
                .then(ka.cmp(kb))
        })
        .map(|(_, e)| e)
}

#[derive(Debug, Clone)]
pub enum Step {
    /// The query was planned alone and grafted onto the DAG.
    Joins {
        query: usize,
        order: JoinOrder,
        new_joins: usize,
    },
    /// Missing tables were joined on top of the current plan.
    Tables {
        query: usize,
        missing: TableSet,
        fresh: PlanMap,
        replaced: Option<PlanEntry>,
        entry: PlanEntry,
    },
}

/// Planning state for a batch: the map, the current best entry, the DAG and
/// its exits.
#[derive(Debug, Clone)]
pub struct SharedPlan {
    pub problem: PlanProblem,
    pub map: PlanMap,
    pub initial_best: PlanEntry,
    pub best: PlanEntry,
    pub dag: JoinDag,
    /// Batch index → exit node.
    pub exits: BTreeMap<usize, NodeId>,
    pub steps: Vec<Step>,
}

impl SharedPlan {
    /// DAG for `best.order`, with an exit for every query it answers.
    pub fn start(problem: PlanProblem, map: PlanMap, best: PlanEntry) -> Self {
        let mut dag = JoinDag::new();
        let (root, _) = dag.graft(&best.order, &problem);
        let mut sp = SharedPlan {
            problem,
            map,
            initial_best: best.clone(),
            best: best.clone(),
            dag,
            exits: BTreeMap::new(),
            steps: Vec::new(),
        };
        sp.register_within(root);
        sp
    }

    fn query_tables(&self, q: usize) -> TableSet {
        self.problem.query(q).map(|m| m.tables).unwrap_or_default()
    }

    /// Registers an exit for every unanswered query with a node at or below `root`.
    fn register_within(&mut self, root: NodeId) {
        let below = self.dag.descendants(root);
        self.register_among(&below);
    }

    fn register_among(&mut self, nodes: &[NodeId]) {
        for m in self.problem.queries.clone() {
            if self.exits.contains_key(&m.index) {
                continue;
            }
            if let Some(n) = nodes.iter().find(|n| self.dag.node(**n).tables == m.tables) {
                self.exits.insert(m.index, *n);
            }
        }
    }

    pub fn unsatisfied(&self) -> Vec<usize> {
        self.problem
            .queries
            .iter()
            .map(|q| q.index)
            .filter(|i| !self.exits.contains_key(i))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.unsatisfied().is_empty()
    }

    /// Adds queries until every one has an exit. Seed 0 takes pending queries
    /// in batch order; any other seed picks them pseudo-randomly.
    pub fn shared_optimized_plan(&mut self, seed: u64) -> Result<(), MqoError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let pending = self.unsatisfied();
            if pending.is_empty() {
                return Ok(());
            }
            let q = if seed == 0 {
                pending[0]
            } else {
                pending[rng.gen_range(0..pending.len())]
            };
            if self.query_tables(q).is_subset(self.dag.tables()) {
                self.add_more_joins(q)?;
            } else {
                self.add_more_tables(q)?;
            }
        }
    }

    /// Plans `q` by itself and grafts the result, sharing matching nodes.
    pub fn add_more_joins(&mut self, q: usize) -> Result<usize, MqoError> {
        let alone = planner::optimize_alone(&self.problem, q)?;
        let order = alone.full().ok_or(PlanError::Empty)?.order.clone();
        let (root, created) = self.dag.graft(&order, &self.problem);
        self.exits.insert(q, root);
        self.register_among(&created);
        let new_joins = created.iter().filter(|n| !self.dag.node(**n).is_leaf()).count();
        self.steps.push(Step::Joins {
            query: q,
            order,
            new_joins,
        });
        Ok(new_joins)
    }

    /// Joins the tables `q` needs but the plan lacks on top of the current
    /// plan, treated as one relation.
    pub fn add_more_tables(&mut self, q: usize) -> Result<PlanEntry, MqoError> {
        let missing = self.query_tables(q).minus(self.dag.tables());
        let fresh = Planner::with_view(&self.problem, missing, self.best.clone())?.run();
        let entry = fresh.full().ok_or(PlanError::Empty)?.clone();
        let replaced = self.map.replace(entry.clone());
        self.best = entry.clone();
        let (root, created) = self.dag.graft(&entry.order, &self.problem);
        self.register_among(&created);
        self.register_within(root);
        self.steps.push(Step::Tables {
            query: q,
            missing,
            fresh,
            replaced,
            entry: entry.clone(),
        });
        if !self.exits.contains_key(&q) {
            // no node of the widened plan spans exactly q's tables
            self.add_more_joins(q)?;
        }
        Ok(entry)
    }

    /// Adds queries arriving while the plan runs. `mq` is the running batch
    /// with the new queries appended; already-answered queries keep their exits.
    pub fn admit(&mut self, mq: &MultiQuery, catalog: &Catalog, seed: u64) -> Result<(), MqoError> {
        let old = &self.problem;
        if mq.queries.len() < old.query_names.len()
            || mq.queries.iter().zip(&old.query_names).any(|(q, n)| &q.name != n)
        {
            return Err(MqoError::Admission(
                "existing queries must come first, unchanged".into(),
            ));
        }
        if mq.encoding.len() < old.tables.len() || mq.encoding[..old.tables.len()] != old.tables[..] {
            return Err(MqoError::Admission("existing table indices must be kept".into()));
        }
        parser::validate_boundary(mq)?;
        self.problem = PlanProblem::from_multiquery(mq, catalog)?;
        self.map.query_names = self.problem.query_names.clone();
        self.shared_optimized_plan(seed)
    }

    pub fn exit_of(&self, q: usize) -> Option<NodeId> {
        self.exits.get(&q).copied()
    }
}

/// Plans a batch end to end.
pub fn plan_multiquery(mq: &MultiQuery, catalog: &Catalog, seed: u64) -> Result<SharedPlan, MqoError> {
    parser::validate_boundary(mq)?;
    let problem = PlanProblem::from_multiquery(mq, catalog)?;
    let map = planner::optimize(&problem)?;
    let best = select_best(&map).ok_or(PlanError::Empty)?.clone();
    let mut sp = SharedPlan::start(problem, map, best);
    sp.shared_optimized_plan(seed)?;
    Ok(sp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_multiquery;

    fn cat() -> Catalog {
        Catalog::load_default_tpch()
    }

    fn order(s: &str) -> JoinOrder {
        JoinOrder::parse(s).unwrap()
    }

    const TRIO: &str = "MULTIQUERY
        A: SELECT c_name FROM customer, orders, nation
           WHERE c_custkey = o_custkey AND c_nationkey = n_nationkey
        B: SELECT o_orderkey FROM orders, customer WHERE o_custkey = c_custkey
        C: SELECT n_name FROM nation, customer WHERE n_nationkey = c_nationkey
        END";

    #[test]
    fn graft_reuses_nodes() {
        let mq = parse_multiquery(TRIO, &cat(), None).unwrap();
        let problem = PlanProblem::from_multiquery(&mq, &cat()).unwrap();
        let mut dag = JoinDag::new();
        let (root, created) = dag.graft(&order("(01)2"), &problem);
        assert_eq!(created.len(), 5);
        assert!(dag.sub_tree(root, Some(&order("01"))));
        assert!(!dag.sub_tree(root, Some(&order("02"))));
        assert!(dag.sub_tree(root, None));
        let (_, created) = dag.graft(&order("02"), &problem);
        assert_eq!(created.len(), 1);
        let leaf0 = dag.find(&order("0")).unwrap();
        assert_eq!(dag.node(leaf0).parents.len(), 2);
        let (_, created) = dag.graft(&order("(01)2"), &problem);
        assert!(created.is_empty());
    }

    #[test]
    fn trio_plans_every_query() {
        let mq = parse_multiquery(TRIO, &cat(), None).unwrap();
        let sp = plan_multiquery(&mq, &cat(), 0).unwrap();
        assert!(sp.is_complete());
        assert_eq!(sp.exits.len(), 3);
        for (q, n) in &sp.exits {
            assert_eq!(sp.dag.node(*n).tables, sp.problem.query(*q).unwrap().tables);
        }
    }

    #[test]
    fn all_satisfied_needs_no_steps() {
        let mq = parse_multiquery(
            "MULTIQUERY A: SELECT c_name FROM customer, orders WHERE c_custkey = o_custkey
             B: SELECT o_orderkey FROM orders, customer WHERE o_custkey = c_custkey END",
            &cat(),
            None,
        )
        .unwrap();
        let sp = plan_multiquery(&mq, &cat(), 0).unwrap();
        assert!(sp.steps.is_empty());
        assert_eq!(sp.exits[&0], sp.exits[&1]);
    }

    #[test]
    fn seeds_only_change_visit_order() {
        let mq = parse_multiquery(TRIO, &cat(), None).unwrap();
        for seed in [0, 1, 7, 42] {
            let sp = plan_multiquery(&mq, &cat(), seed).unwrap();
            assert!(sp.is_complete(), "seed {seed}");
        }
    }

    #[test]
    fn boundary_violation_is_rejected() {
        let mq = parse_multiquery(
            "MULTIQUERY A: SELECT r_name FROM region B: SELECT n_name FROM nation END",
            &cat(),
            None,
        )
        .unwrap();
        assert!(matches!(plan_multiquery(&mq, &cat(), 0), Err(MqoError::Parse(_))));
    }
}
