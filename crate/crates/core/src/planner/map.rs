use std::collections::{BTreeMap, BTreeSet};

use crate::fmt::g;
use crate::tableset::TableSet;

use super::JoinOrder;

#[derive(Debug, Clone, PartialEq)]
pub struct PlanEntry {
    pub tables: TableSet,
    pub size: f64,
    /// Sum of intermediate result sizes below the top join.
    pub cost: f64,
    pub order: JoinOrder,
    /// Batch indices of the queries answered somewhere inside this order.
    pub satisfied: BTreeSet<usize>,
}

impl PlanEntry {
    pub fn satisfied_count(&self) -> usize {
        self.satisfied.len()
    }
}

/// A unit the planner joins: a base table, or a planned order treated as one
/// relation.
#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub label: String,
    pub tables: TableSet,
}

/// Plan entries keyed by subsets of slots.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanMap {
    pub(crate) slots: Vec<Slot>,
    pub(crate) entries: BTreeMap<u32, PlanEntry>,
    pub(crate) query_names: Vec<String>,
}

impl PlanMap {
    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn query_names(&self) -> &[String] {
        &self.query_names
    }

    fn key_of(&self, mask: u32) -> String {
        self.slots
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, s)| s.label.as_str())
            .collect()
    }

    /// Entries in ascending key order.
    pub fn iter(&self) -> Vec<(String, &PlanEntry)> {
        let mut v: Vec<(String, &PlanEntry)> = self.entries.iter().map(|(m, e)| (self.key_of(*m), e)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn get(&self, key: &str) -> Option<&PlanEntry> {
        self.entries
            .iter()
            .find(|(m, _)| self.key_of(**m) == key)
            .map(|(_, e)| e)
    }

    pub fn find_tables(&self, tables: TableSet) -> Option<&PlanEntry> {
        self.entries.values().find(|e| e.tables == tables)
    }

    /// Entry over every slot.
    pub fn full(&self) -> Option<&PlanEntry> {
        let all = if self.slots.len() >= 32 {
            u32::MAX
        } else {
            (1u32 << self.slots.len()) - 1
        };
        self.entries.get(&all)
    }

    /// Replaces the entry covering `entry.tables`, or inserts one when that
    /// table set is new to the map. Returns the previous entry.
    pub fn replace(&mut self, entry: PlanEntry) -> Option<PlanEntry> {
        let mask = self
            .entries
            .iter()
            .find(|(_, e)| e.tables == entry.tables)
            .map(|(m, _)| *m)
            .or_else(|| self.mask_for(entry.tables))?;
        self.entries.insert(mask, entry)
    }

    fn mask_for(&mut self, tables: TableSet) -> Option<u32> {
        let mut mask = 0u32;
        let mut covered = TableSet::EMPTY;
        for t in tables.iter() {
            let i = match self.slots.iter().position(|s| s.tables == TableSet::single(t)) {
                Some(i) => i,
                None => {
                    self.slots.push(Slot {
                        label: t.to_string(),
                        tables: TableSet::single(t),
                    });
                    self.slots.len() - 1
                }
            };
            mask |= 1 << i;
            covered = covered.union(TableSet::single(t));
        }
        (covered == tables).then_some(mask)
    }

    pub fn satisfied_names(&self, e: &PlanEntry) -> Vec<&str> {
        e.satisfied.iter().map(|i| self.query_names[*i].as_str()).collect()
    }

    pub fn dump_line(&self, key: &str, e: &PlanEntry) -> String {
        let names = self.satisfied_names(e);
        format!(
            "{} {} {} {} {} {}",
            key,
            g(e.size),
            g(e.cost),
            names.len(),
            if names.is_empty() {
                "-".to_string()
            } else {
                names.join(",")
            },
            e.order.render()
        )
    }

    /// `<key> <size> <cost> <count> <names|-> <order>` per entry, ascending key.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (k, e) in self.iter() {
            out.push_str(&self.dump_line(&k, e));
            out.push('\n');
        }
        out
    }
}
