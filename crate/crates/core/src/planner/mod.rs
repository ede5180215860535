//! Join-order dynamic program over subsets of tables.
//!
//! Every subset gets one entry: its estimated size, its cost (the summed sizes
//! of the intermediate results it materializes), the cheapest order found, and
//! the set of batch queries that order answers. Subsets of three or more are
//! filled by trying every permutation of their members and every split point,
//! recursing (memoized) into the two halves.

mod map;
mod order;
mod permutation;
mod problem;

use std::collections::BTreeMap;

use thiserror::Error;

pub use map::{PlanEntry, PlanMap, Slot};
pub use order::JoinOrder;
pub use permutation::next_permutation;
pub use problem::{PlanProblem, QueryModel};

use crate::catalog::{Catalog, CatalogError};
use crate::estimator::join_size;
use crate::parser::{MultiQuery, ParsedQuery};
use crate::tableset::TableSet;

/// Largest number of relations one plan may join; beyond it order strings
/// stop being single digits and enumeration time explodes.
pub const MAX_TABLES: usize = 10;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("{tables} tables exceed the supported maximum of {MAX_TABLES}")]
    Arity { tables: usize },
    #[error("nothing to plan")]
    Empty,
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// The dynamic program over one set of slots.
pub struct Planner<'p> {
    problem: &'p PlanProblem,
    slots: Vec<Slot>,
    seeds: Vec<PlanEntry>,
    view_slots: Vec<bool>,
    entries: Vec<Option<PlanEntry>>,
}

impl<'p> Planner<'p> {
    /// One slot per table in `tables`, ascending.
    pub fn new(problem: &'p PlanProblem, tables: TableSet) -> Result<Self, PlanError> {
        let mut p = Self::empty(problem, tables.len())?;
        for t in tables.iter() {
            p.push_table(t);
        }
        Ok(p)
    }

    /// Slots for each table in `missing` followed by `view`, a finished entry
    /// joined as if it were a single relation and labelled `v`.
    pub fn with_view(problem: &'p PlanProblem, missing: TableSet, view: PlanEntry) -> Result<Self, PlanError> {
        let mut p = Self::empty(problem, missing.len() + 1)?;
        for t in missing.iter() {
            p.push_table(t);
        }
        p.slots.push(Slot {
            label: "v".into(),
            tables: view.tables,
        });
        p.seeds.push(view);
        p.view_slots.push(true);
        Ok(p)
    }

    fn empty(problem: &'p PlanProblem, n: usize) -> Result<Self, PlanError> {
        if n == 0 {
            return Err(PlanError::Empty);
        }
        if n > MAX_TABLES {
            return Err(PlanError::Arity { tables: n });
        }
        Ok(Planner {
            problem,
            slots: Vec::new(),
            seeds: Vec::new(),
            view_slots: Vec::new(),
            entries: vec![None; 1 << n],
        })
    }

    fn push_table(&mut self, t: usize) {
        self.slots.push(Slot {
            label: t.to_string(),
            tables: TableSet::single(t),
        });
        self.seeds.push(PlanEntry {
            tables: TableSet::single(t),
            size: self.problem.cardinality[t],
            cost: 0.0,
            order: JoinOrder::Leaf(t),
            satisfied: Default::default(),
        });
        self.view_slots.push(false);
    }

    fn full_mask(&self) -> u32 {
        ((1u64 << self.slots.len()) - 1) as u32
    }

    fn tables_of(&self, mask: u32) -> TableSet {
        self.slots
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .fold(TableSet::EMPTY, |s, (_, slot)| s.union(slot.tables))
    }

    fn entry(&self, mask: u32) -> &PlanEntry {
        self.entries[mask as usize]
            .as_ref()
            .expect("sub-plan computed before use")
    }

    /// Catalog sizes for tables; the view keeps its own entry. A table is
    /// marked as satisfying every query over just that table.
    pub fn seed_scans(&mut self) {
        for (i, seed) in self.seeds.iter().enumerate() {
            let mut e = seed.clone();
            if !self.view_slots[i] {
                e.satisfied = self.problem.exact_queries(e.tables).collect();
            }
            self.entries[1 << i] = Some(e);
        }
    }

    /// Shrinks each table to the largest of its per-query push-down estimates.
    pub fn apply_pushdowns(&mut self) {
        for i in 0..self.slots.len() {
            if self.view_slots[i] {
                continue;
            }
            let t = self.slots[i].tables.iter().next().expect("one table");
            if let Some(e) = self.entries[1 << i].as_mut() {
                e.size = self.problem.pushdown_size(t);
            }
        }
    }

    pub fn build_pairs(&mut self) {
        let n = self.slots.len();
        for i in 0..n {
            for j in i + 1..n {
                let e = self.combine(1 << i, 1 << j, self.entry(1 << i).cost + self.entry(1 << j).cost);
                self.entries[((1 << i) | (1 << j)) as usize] = Some(e);
            }
        }
    }

    fn combine(&self, lm: u32, rm: u32, cost: f64) -> PlanEntry {
        let (l, r) = (self.entry(lm), self.entry(rm));
        let tables = l.tables.union(r.tables);
        let mut satisfied = l.satisfied.clone();
        satisfied.extend(r.satisfied.iter().copied());
        satisfied.extend(self.problem.exact_queries(tables));
        PlanEntry {
            tables,
            size: join_size(l.size, r.size, self.problem.divisor(l.tables, r.tables)),
            cost,
            order: JoinOrder::join(l.order.clone(), r.order.clone()),
            satisfied,
        }
    }

    /// Fills the entry for slot subset `mask`, recursing into missing halves.
    /// Candidates come from every permutation (ascending start) and split
    /// point; the first strictly cheapest one wins.
    pub fn partition(&mut self, mask: u32) {
        if self.entries[mask as usize].is_some() {
            return;
        }
        let mut perm: Vec<usize> = (0..self.slots.len()).filter(|i| mask & (1 << i) != 0).collect();
        let n = perm.len();
        let mut best: Option<(f64, u32, u32)> = None;
        loop {
            let mut lm = 0u32;
            for j in 1..n {
                lm |= 1 << perm[j - 1];
                let rm = mask & !lm;
                self.partition(lm);
                self.partition(rm);
                let (l, r) = (self.entry(lm), self.entry(rm));
                let mut cost = l.cost + r.cost;
                if j != 1 {
                    cost += l.size;
                }
                if j != n - 1 {
                    cost += r.size;
                }
                if best.is_none_or(|(c, _, _)| cost < c) {
                    best = Some((cost, lm, rm));
                }
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        let (cost, lm, rm) = best.expect("at least one split");
        let e = self.combine(lm, rm, cost);
        self.entries[mask as usize] = Some(e);
    }

    pub fn run(mut self) -> PlanMap {
        self.seed_scans();
        self.apply_pushdowns();
        self.build_pairs();
        let full = self.full_mask();
        self.partition(full);
        self.into_map()
    }

    /// Current state as a map (entries filled so far).
    pub fn snapshot(&self) -> PlanMap {
        PlanMap {
            slots: self.slots.clone(),
            entries: self
                .entries
                .iter()
                .enumerate()
                .filter_map(|(m, e)| e.clone().map(|e| (m as u32, e)))
                .collect::<BTreeMap<_, _>>(),
            query_names: self.problem.query_names.clone(),
        }
    }

    pub fn into_map(self) -> PlanMap {
        self.snapshot()
    }

    pub fn tables(&self) -> TableSet {
        self.tables_of(self.full_mask())
    }
}

/// Plans every table of the batch against all of its queries.
pub fn optimize(problem: &PlanProblem) -> Result<PlanMap, PlanError> {
    let tables = TableSet::from_indices(0..problem.tables.len());
    Ok(Planner::new(problem, tables)?.run())
}

pub fn optimize_single(q: &ParsedQuery, catalog: &Catalog) -> Result<PlanMap, PlanError> {
    optimize(&PlanProblem::from_query(q, catalog)?)
}

pub fn optimize_multiquery(mq: &MultiQuery, catalog: &Catalog) -> Result<PlanMap, PlanError> {
    optimize(&PlanProblem::from_multiquery(mq, catalog)?)
}

/// Plans batch query `index` by itself: only its tables and its own
/// predicates, table indices still in the batch encoding.
pub fn optimize_alone(problem: &PlanProblem, index: usize) -> Result<PlanMap, PlanError> {
    let alone = problem.restricted_to(index);
    let tables = alone.query(index).ok_or(PlanError::Empty)?.tables;
    Ok(Planner::new(&alone, tables)?.run())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmt::g;
    use crate::parser::parse_query;

    const SAMPLE: &str = "SELECT c_name, c_address, c_acctbal
        FROM region, nation, customer, orders
        WHERE o_custkey = c_custkey AND c_nationkey = n_nationkey
        AND n_regionkey = r_regionkey AND r_regionkey < 5";

    #[test]
    fn sample_full_entry() {
        let cat = Catalog::load_default_tpch();
        let q = parse_query(SAMPLE, &cat).unwrap();
        let map = optimize_single(&q, &cat).unwrap();
        assert_eq!(map.len(), 15);
        let e = map.get("0123").unwrap();
        assert_eq!((g(e.size).as_str(), g(e.cost).as_str()), ("500000", "50008.3"));
        assert_eq!(e.order.render(), "((01)2)3");
        assert_eq!(map.satisfied_names(e), ["Q1"]);
        assert_eq!(map.dump_line("0123", e), "0123 500000 50008.3 1 Q1 ((01)2)3");
    }

    #[test]
    fn two_tables() {
        let cat = Catalog::load_default_tpch();
        let q = parse_query(
            "SELECT n_name FROM region, nation WHERE n_regionkey = r_regionkey",
            &cat,
        )
        .unwrap();
        let map = optimize_single(&q, &cat).unwrap();
        assert_eq!(map.len(), 3);
        let e = map.get("01").unwrap();
        assert_eq!((e.size, e.cost), (25.0, 0.0));
    }

    #[test]
    fn single_table() {
        let cat = Catalog::load_default_tpch();
        let q = parse_query("SELECT r_name FROM region WHERE r_regionkey = 1", &cat).unwrap();
        let map = optimize_single(&q, &cat).unwrap();
        assert_eq!(map.len(), 1);
        assert_eq!(map.full().unwrap().size, 1.0);
        assert_eq!(map.full().unwrap().satisfied.len(), 1);
    }

    #[test]
    fn arity_cap() {
        let problem = PlanProblem {
            tables: (0..11).map(|i| format!("t{i}")).collect(),
            cardinality: vec![10.0; 11],
            query_names: vec![],
            queries: vec![],
        };
        assert!(matches!(optimize(&problem), Err(PlanError::Arity { tables: 11 })));
    }

    #[test]
    fn stepwise_seed_then_pushdown() {
        let cat = Catalog::load_default_tpch();
        let q = parse_query(SAMPLE, &cat).unwrap();
        let problem = PlanProblem::from_query(&q, &cat).unwrap();
        let mut p = Planner::new(&problem, TableSet::from_indices(0..4)).unwrap();
        p.seed_scans();
        assert_eq!(p.snapshot().get("0").unwrap().size, 5.0);
        assert!(p.snapshot().get("0").unwrap().satisfied.is_empty());
        p.apply_pushdowns();
        assert_eq!(g(p.snapshot().get("0").unwrap().size), "1.66667");
        p.build_pairs();
        assert_eq!(g(p.snapshot().get("01").unwrap().size), "8.33333");
        assert_eq!(p.snapshot().len(), 10);
    }
}
