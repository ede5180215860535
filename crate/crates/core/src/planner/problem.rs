use crate::catalog::Catalog;
use crate::estimator::{self, JoinEdge};
use crate::parser::{self, MultiQuery, ParsedQuery};
use crate::tableset::TableSet;

use super::{JoinOrder, PlanError};

/// One query reduced to what the cost model needs.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryModel {
    /// Position in the batch.
    pub index: usize,
    pub tables: TableSet,
    /// Estimated size of each of the query's tables after its own selections.
    pub pushdown: Vec<(usize, f64)>,
    pub edges: Vec<JoinEdge>,
}

/// The estimation context for a batch: table encoding, catalog sizes, and
/// the queries whose predicates drive the estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanProblem {
    pub tables: Vec<String>,
    pub cardinality: Vec<f64>,
    /// Names of every query in the batch, by batch index.
    pub query_names: Vec<String>,
    pub queries: Vec<QueryModel>,
}

impl PlanProblem {
    pub fn from_multiquery(mq: &MultiQuery, catalog: &Catalog) -> Result<Self, PlanError> {
        let tables = mq.encoding.clone();
        let cardinality = tables
            .iter()
            .map(|t| catalog.cardinality(t))
            .collect::<Result<Vec<_>, _>>()?;
        let index_of = |t: &str| tables.iter().position(|x| x == t);
        let mut queries = Vec::new();
        for (qi, q) in mq.queries.iter().enumerate() {
            let split = parser::split_predicates(q);
            let ts = TableSet::from_indices(q.tables.iter().map(|t| index_of(t).expect("encoded")));
            let mut pushdown = Vec::new();
            for t in ts.iter() {
                let preds = split.selections.get(&tables[t]).map(Vec::as_slice).unwrap_or(&[]);
                pushdown.push((t, estimator::pushdown_size(cardinality[t], preds, catalog)?));
            }
            let mut edges = Vec::new();
            for j in &split.joins {
                if let Some(e) = JoinEdge::resolve(j, index_of, catalog)? {
                    edges.push(e);
                }
            }
            queries.push(QueryModel {
                index: qi,
                tables: ts,
                pushdown,
                edges,
            });
        }
        Ok(PlanProblem {
            query_names: mq.names(),
            tables,
            cardinality,
            queries,
        })
    }

    /// Problem for a standalone query, tables encoded in FROM order.
    pub fn from_query(q: &ParsedQuery, catalog: &Catalog) -> Result<Self, PlanError> {
        let mq = parser::build_multiquery(vec![q.clone()], None).expect("a single query is a valid batch");
        Self::from_multiquery(&mq, catalog)
    }

    /// Same encoding, but only query `index` contributes to estimates.
    pub fn restricted_to(&self, index: usize) -> PlanProblem {
        PlanProblem {
            queries: self.queries.iter().filter(|q| q.index == index).cloned().collect(),
            ..self.clone()
        }
    }

    pub fn query(&self, index: usize) -> Option<&QueryModel> {
        self.queries.iter().find(|q| q.index == index)
    }

    /// Tables referenced by any query.
    pub fn used_tables(&self) -> TableSet {
        self.queries.iter().fold(TableSet::EMPTY, |s, q| s.union(q.tables))
    }

    /// The largest per-query push-down estimate for `t`: a shared scan must
    /// produce enough tuples for its least selective consumer.
    pub fn pushdown_size(&self, t: usize) -> f64 {
        self.queries
            .iter()
            .flat_map(|q| q.pushdown.iter())
            .filter(|(tt, _)| *tt == t)
            .map(|(_, s)| *s)
            .fold(None, |m: Option<f64>, s| Some(m.map_or(s, |m| m.max(s))))
            .unwrap_or(self.cardinality[t])
    }

    /// Smallest divisor over the queries whose predicates link the two sides
    /// (largest estimated result); 1 when none does.
    pub fn divisor(&self, left: TableSet, right: TableSet) -> f64 {
        self.queries
            .iter()
            .filter_map(|q| estimator::edge_divisor(&q.edges, left, right))
            .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.min(d))))
            .unwrap_or(1.0)
    }

    /// Batch indices of queries over exactly `tables`.
    pub fn exact_queries(&self, tables: TableSet) -> impl Iterator<Item = usize> + '_ {
        self.queries.iter().filter(move |q| q.tables == tables).map(|q| q.index)
    }

    pub fn estimate(&self, order: &JoinOrder) -> f64 {
        match order {
            JoinOrder::Leaf(t) => self.pushdown_size(*t),
            JoinOrder::Join(l, r) => {
                estimator::join_size(self.estimate(l), self.estimate(r), self.divisor(l.tables(), r.tables()))
            }
        }
    }
}
