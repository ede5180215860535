//! Cardinality arithmetic.
//!
//! Selections: `attr = c` keeps `1/V(R, attr)` of the tuples, `<` and `>` keep a
//! third, `<>` keeps everything. Several predicates on one table multiply, i.e.
//! they are treated as independent.
//!
//! Joins: each equality predicate linking the two inputs divides the Cartesian
//! product by `max(V(R, a), V(S, b))`; several linking predicates multiply
//! their divisors.

use std::collections::BTreeSet;

use crate::catalog::{Catalog, CatalogError};
use crate::parser::{CmpOp, JoinPredicate, SelectionPredicate};
use crate::tableset::TableSet;

pub fn selection_factor(pred: &SelectionPredicate, catalog: &Catalog) -> Result<f64, CatalogError> {
    let v = catalog.distinct(&pred.attr)?;
    Ok(match pred.op {
        // an empty column has nothing left to filter
        CmpOp::Eq if v == 0 => 1.0,
        CmpOp::Eq => 1.0 / v as f64,
        CmpOp::Lt | CmpOp::Gt => 1.0 / 3.0,
        CmpOp::Neq => 1.0,
    })
}

pub fn pushdown_size(base: f64, preds: &[SelectionPredicate], catalog: &Catalog) -> Result<f64, CatalogError> {
    preds
        .iter()
        .try_fold(base, |size, p| Ok(size * selection_factor(p, catalog)?))
}

/// Divisor for joining the tables in `left` with those in `right`; 1 when no
/// predicate links them.
pub fn join_divisor(
    left: &[&str],
    right: &[&str],
    joins: &[JoinPredicate],
    catalog: &Catalog,
) -> Result<f64, CatalogError> {
    let left: BTreeSet<&str> = left.iter().copied().collect();
    let right: BTreeSet<&str> = right.iter().copied().collect();
    let mut divisor = 1.0;
    for j in joins {
        let (ta, va) = catalog.resolve(&j.left)?;
        let (tb, vb) = catalog.resolve(&j.right)?;
        let links = (left.contains(ta) && right.contains(tb)) || (left.contains(tb) && right.contains(ta));
        if links {
            divisor *= (va.max(vb) as f64).max(1.0);
        }
    }
    Ok(divisor)
}

pub fn join_size(left: f64, right: f64, divisor: f64) -> f64 {
    left * right / divisor
}

/// A join predicate resolved to table indices, with its divisor precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinEdge {
    pub a: usize,
    pub b: usize,
    pub factor: f64,
}

impl JoinEdge {
    pub fn resolve(
        pred: &JoinPredicate,
        index_of: impl Fn(&str) -> Option<usize>,
        catalog: &Catalog,
    ) -> Result<Option<JoinEdge>, CatalogError> {
        let (ta, va) = catalog.resolve(&pred.left)?;
        let (tb, vb) = catalog.resolve(&pred.right)?;
        Ok(match (index_of(ta), index_of(tb)) {
            (Some(a), Some(b)) => Some(JoinEdge {
                a,
                b,
                factor: (va.max(vb) as f64).max(1.0),
            }),
            _ => None,
        })
    }

    pub fn links(&self, left: TableSet, right: TableSet) -> bool {
        (left.contains(self.a) && right.contains(self.b)) || (left.contains(self.b) && right.contains(self.a))
    }
}

/// Divisor from one query's edges, or `None` if none of them links the sides.
pub fn edge_divisor(edges: &[JoinEdge], left: TableSet, right: TableSet) -> Option<f64> {
    let mut d = None;
    for e in edges {
        if e.links(left, right) {
            d = Some(d.unwrap_or(1.0) * e.factor);
        }
    }
    d
}
