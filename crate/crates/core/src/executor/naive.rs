//! Reference evaluator: nested loops over the FROM list, each predicate
//! checked as soon as every table it mentions is bound.

use std::collections::BTreeMap;

use crate::parser::{split_predicates, Aggregate, CmpOp, ParsedQuery};

use super::gla::{Check, ExactSum};
use super::value::{Row, Value};
use super::{Chunk, Dataset, ExecError, QueryResult};

pub fn naive_eval(q: &ParsedQuery, data: &Dataset) -> Result<QueryResult, ExecError> {
    let mut chunks: Vec<&Chunk> = Vec::new();
    let mut columns: BTreeMap<&str, usize> = BTreeMap::new();
    let mut width = 0;
    for t in &q.tables {
        let c = data.get(t).ok_or_else(|| ExecError::MissingTable(t.clone()))?;
        for (i, a) in c.schema.iter().enumerate() {
            columns.insert(a, width + i);
        }
        width += c.schema.len();
        chunks.push(c);
    }
    let col = |a: &str| {
        columns
            .get(a)
            .copied()
            .ok_or_else(|| ExecError::Schema(format!("no column {a} in the data for {}", q.name)))
    };
    // checks[k]: predicates that become decidable once table k is bound
    let starts: Vec<usize> = chunks
        .iter()
        .scan(0, |w, c| {
            let s = *w;
            *w += c.schema.len();
            Some(s)
        })
        .collect();
    let depth_of = |c: usize| starts.iter().rposition(|s| *s <= c).expect("column in range");
    let mut checks: Vec<Vec<Check>> = vec![Vec::new(); chunks.len()];
    let split = split_predicates(q);
    for preds in split.selections.values() {
        for p in preds {
            let c = col(&p.attr)?;
            checks[depth_of(c)].push(Check::Const {
                col: c,
                op: p.op,
                value: Value::from_literal(&p.literal),
            });
        }
    }
    for j in &split.joins {
        let (a, b) = (col(&j.left)?, col(&j.right)?);
        checks[depth_of(a).max(depth_of(b))].push(Check::SameAs { a, b });
    }

    let mut matches: Vec<Row> = Vec::new();
    let mut bound: Vec<&Row> = Vec::with_capacity(chunks.len());
    let locate: Vec<(usize, usize)> = (0..width)
        .map(|c| {
            let d = depth_of(c);
            (d, c - starts[d])
        })
        .collect();
    descend(&chunks, &checks, &locate, &mut bound, &mut matches)?;

    let projection = q.select.projection();
    let idx: Vec<usize> = projection.iter().map(|a| col(a)).collect::<Result<_, _>>()?;
    let projected: Vec<Row> = matches
        .iter()
        .map(|r| idx.iter().map(|i| r[*i].clone()).collect())
        .collect();
    let (schema, rows) = match &q.select.aggregate {
        Aggregate::None => (projection, projected),
        Aggregate::Distinct => {
            let mut rows = projected;
            rows.sort();
            rows.dedup();
            (projection, rows)
        }
        Aggregate::Sum { attr, group_by: None } => {
            let mut s = ExactSum::default();
            for r in &projected {
                s.add(&r[0])?;
            }
            let rows = if s.is_empty() { vec![] } else { vec![vec![s.value()]] };
            (vec![format!("SUM({attr})")], rows)
        }
        Aggregate::Sum {
            attr,
            group_by: Some(g),
        } => {
            let mut groups: BTreeMap<Value, ExactSum> = BTreeMap::new();
            for r in &projected {
                groups.entry(r[0].clone()).or_default().add(&r[1])?;
            }
            let rows = groups.into_iter().map(|(k, s)| vec![k, s.value()]).collect();
            (vec![g.clone(), format!("SUM({attr})")], rows)
        }
    };
    Ok(QueryResult { schema, rows })
}

fn descend<'a>(
    chunks: &[&'a Chunk],
    checks: &[Vec<Check>],
    locate: &[(usize, usize)],
    bound: &mut Vec<&'a Row>,
    out: &mut Vec<Row>,
) -> Result<(), ExecError> {
    let depth = bound.len();
    if depth == chunks.len() {
        out.push(bound.iter().flat_map(|r| r.iter().cloned()).collect());
        return Ok(());
    }
    'rows: for row in &chunks[depth].rows {
        bound.push(row);
        for c in &checks[depth] {
            let at = |col: usize| {
                let (d, i) = locate[col];
                &bound[d][i]
            };
            let pass = match c {
                Check::Const { col, op, value } => at(*col).test(*op, value)?,
                Check::SameAs { a, b } => at(*a).test(CmpOp::Eq, at(*b))?,
            };
            if !pass {
                bound.pop();
                continue 'rows;
            }
        }
        descend(chunks, checks, locate, bound, out)?;
        bound.pop();
    }
    Ok(())
}
