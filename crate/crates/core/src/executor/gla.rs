//! Aggregate states with the init / accumulate / merge / terminate lifecycle.
//!
//! Every operator above the scans runs as one of these. Each worker
//! accumulates its share of the input into a fresh state, states travel up
//! the worker tree as bytes and are merged, and the coordinator terminates
//! the last one into output rows.

use std::collections::{BTreeMap, BTreeSet};

use crate::parser::CmpOp;

use super::codec::{Reader, Writer};
use super::value::{Row, Value};
use super::ExecError;

/// Exactly rounded sum: integers in an `i128`, reals as non-overlapping
/// partials, so the result does not depend on the order of additions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExactSum {
    ints: i128,
    partials: Vec<f64>,
    reals: bool,
    count: u64,
}

impl ExactSum {
    pub fn add(&mut self, v: &Value) -> Result<(), ExecError> {
        match v {
            Value::Int(i) => self.ints += *i as i128,
            Value::Real(r) => {
                self.reals = true;
                self.add_f64(*r);
            }
            Value::Text(t) => return Err(ExecError::Type(format!("cannot sum text `{t}`"))),
        }
        self.count += 1;
        Ok(())
    }

    fn add_f64(&mut self, mut x: f64) {
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    pub fn merge(&mut self, other: &ExactSum) {
        self.ints += other.ints;
        for p in &other.partials {
            self.add_f64(*p);
        }
        self.reals |= other.reals;
        self.count += other.count;
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn value(&self) -> Value {
        if !self.reals {
            if let Ok(i) = i64::try_from(self.ints) {
                return Value::Int(i);
            }
        }
        let mut all = self.clone();
        let mut rest = self.ints;
        while rest != 0 {
            let f = rest as f64;
            all.add_f64(f);
            rest -= f as i128;
        }
        Value::Real(round_partials(&all.partials))
    }

    fn write(&self, w: &mut Writer) {
        w.i128(self.ints);
        w.count(self.partials.len());
        for p in &self.partials {
            w.f64(*p);
        }
        w.u8(self.reals as u8);
        w.u64(self.count);
    }

    fn read(r: &mut Reader) -> Result<Self, ExecError> {
        let ints = r.i128()?;
        let n = r.count()?;
        let partials = (0..n).map(|_| r.f64()).collect::<Result<_, _>>()?;
        Ok(ExactSum {
            ints,
            partials,
            reals: r.u8()? != 0,
            count: r.u64()?,
        })
    }
}

/// Correctly rounded total of non-overlapping partials (ascending magnitude).
fn round_partials(p: &[f64]) -> f64 {
    let mut n = p.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = p[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = p[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    // half-way case: the remaining partials decide the direction
    if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

#[derive(Debug, Clone, PartialEq)]
pub enum Check {
    Const { col: usize, op: CmpOp, value: Value },
    SameAs { a: usize, b: usize },
}

impl Check {
    pub fn eval(&self, row: &[Value]) -> Result<bool, ExecError> {
        match self {
            Check::Const { col, op, value } => row[*col].test(*op, value),
            Check::SameAs { a, b } => row[*a].test(CmpOp::Eq, &row[*b]),
        }
    }
}

/// Which input of a join a row arrives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gla {
    /// Keeps rows passing every check.
    Selection {
        checks: Vec<Check>,
        rows: Vec<Row>,
    },
    /// Left rows are hashed on `left_keys`; right rows probe at terminate.
    Join {
        left_keys: Vec<usize>,
        right_keys: Vec<usize>,
        left: BTreeMap<Vec<Value>, Vec<Row>>,
        right: Vec<Row>,
    },
    /// Keeps the listed columns of every row.
    Collect {
        columns: Vec<usize>,
        rows: Vec<Row>,
    },
    Distinct {
        rows: BTreeSet<Row>,
    },
    Sum {
        column: usize,
        sum: ExactSum,
    },
    GroupBy {
        group: usize,
        column: usize,
        groups: BTreeMap<Value, ExactSum>,
    },
}

impl Gla {
    pub fn selection(checks: Vec<Check>) -> Self {
        Gla::Selection { checks, rows: vec![] }
    }

    pub fn join(left_keys: Vec<usize>, right_keys: Vec<usize>) -> Self {
        Gla::Join {
            left_keys,
            right_keys,
            left: BTreeMap::new(),
            right: vec![],
        }
    }

    pub fn collect(columns: Vec<usize>) -> Self {
        Gla::Collect { columns, rows: vec![] }
    }

    pub fn distinct() -> Self {
        Gla::Distinct { rows: BTreeSet::new() }
    }

    pub fn sum(column: usize) -> Self {
        Gla::Sum {
            column,
            sum: ExactSum::default(),
        }
    }

    pub fn group_by(group: usize, column: usize) -> Self {
        Gla::GroupBy {
            group,
            column,
            groups: BTreeMap::new(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Gla::Selection { .. } => "selection",
            Gla::Join { .. } => "join",
            Gla::Collect { .. } => "collect",
            Gla::Distinct { .. } => "distinct",
            Gla::Sum { .. } => "sum",
            Gla::GroupBy { .. } => "groupby",
        }
    }

    fn tag(&self) -> u8 {
        match self {
            Gla::Selection { .. } => 0,
            Gla::Join { .. } => 1,
            Gla::Collect { .. } => 2,
            Gla::Distinct { .. } => 3,
            Gla::Sum { .. } => 4,
            Gla::GroupBy { .. } => 5,
        }
    }

    /// Same configuration, empty state.
    pub fn init(&self) -> Self {
        match self {
            Gla::Selection { checks, .. } => Gla::selection(checks.clone()),
            Gla::Join {
                left_keys, right_keys, ..
            } => Gla::join(left_keys.clone(), right_keys.clone()),
            Gla::Collect { columns, .. } => Gla::collect(columns.clone()),
            Gla::Distinct { .. } => Gla::distinct(),
            Gla::Sum { column, .. } => Gla::sum(*column),
            Gla::GroupBy { group, column, .. } => Gla::group_by(*group, *column),
        }
    }

    pub fn accumulate(&mut self, side: Side, row: Row) -> Result<(), ExecError> {
        match self {
            Gla::Selection { checks, rows } => {
                for c in checks.iter() {
                    if !c.eval(&row)? {
                        return Ok(());
                    }
                }
                rows.push(row);
            }
            Gla::Join {
                left_keys, left, right, ..
            } => match side {
                Side::Left => {
                    let key = left_keys.iter().map(|k| row[*k].clone()).collect();
                    left.entry(key).or_default().push(row);
                }
                Side::Right => right.push(row),
            },
            Gla::Collect { columns, rows } => rows.push(columns.iter().map(|c| row[*c].clone()).collect()),
            Gla::Distinct { rows } => {
                rows.insert(row);
            }
            Gla::Sum { column, sum } => sum.add(&row[*column])?,
            Gla::GroupBy { group, column, groups } => {
                groups.entry(row[*group].clone()).or_default().add(&row[*column])?
            }
        }
        Ok(())
    }

    pub fn merge(&mut self, other: Gla) -> Result<(), ExecError> {
        match (self, other) {
            (Gla::Selection { rows, .. }, Gla::Selection { rows: o, .. })
            | (Gla::Collect { rows, .. }, Gla::Collect { rows: o, .. }) => rows.extend(o),
            (
                Gla::Join { left, right, .. },
                Gla::Join {
                    left: ol, right: or, ..
                },
            ) => {
                for (k, rows) in ol {
                    left.entry(k).or_default().extend(rows);
                }
                right.extend(or);
            }
            (Gla::Distinct { rows }, Gla::Distinct { rows: o }) => rows.extend(o),
            (Gla::Sum { sum, .. }, Gla::Sum { sum: o, .. }) => sum.merge(&o),
            (Gla::GroupBy { groups, .. }, Gla::GroupBy { groups: o, .. }) => {
                for (k, s) in o {
                    groups.entry(k).or_default().merge(&s);
                }
            }
            (a, b) => {
                return Err(ExecError::Codec(format!("cannot merge {} into {}", b.kind(), a.kind())));
            }
        }
        Ok(())
    }

    pub fn terminate(self) -> Vec<Row> {
        match self {
            Gla::Selection { rows, .. } | Gla::Collect { rows, .. } => rows,
            Gla::Join {
                right_keys,
                left,
                right,
                ..
            } => {
                let mut out = Vec::new();
                for r in right {
                    let key: Vec<Value> = right_keys.iter().map(|k| r[*k].clone()).collect();
                    if let Some(ls) = left.get(&key) {
                        for l in ls {
                            let mut row = l.clone();
                            row.extend(r.iter().cloned());
                            out.push(row);
                        }
                    }
                }
                out
            }
            Gla::Distinct { rows } => rows.into_iter().collect(),
            Gla::Sum { sum, .. } => {
                if sum.is_empty() {
                    vec![]
                } else {
                    vec![vec![sum.value()]]
                }
            }
            Gla::GroupBy { groups, .. } => groups.into_iter().map(|(g, s)| vec![g, s.value()]).collect(),
        }
    }

    /// State only; the configuration comes from the template on the way back.
    pub fn serialize(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u8(self.tag());
        match self {
            Gla::Selection { rows, .. } | Gla::Collect { rows, .. } => w.rows(rows.iter()),
            Gla::Join { left, right, .. } => {
                w.count(left.len());
                for (k, rows) in left {
                    w.row(k);
                    w.rows(rows.iter());
                }
                w.rows(right.iter());
            }
            Gla::Distinct { rows } => w.rows(rows.iter()),
            Gla::Sum { sum, .. } => sum.write(&mut w),
            Gla::GroupBy { groups, .. } => {
                w.count(groups.len());
                for (g, s) in groups {
                    w.value(g);
                    s.write(&mut w);
                }
            }
        }
        w.finish()
    }

    /// Rebuilds a state serialized from a GLA configured like `self`.
    pub fn deserialize(&self, bytes: &[u8]) -> Result<Gla, ExecError> {
        let mut r = Reader::new(bytes);
        let tag = r.u8()?;
        if tag != self.tag() {
            return Err(ExecError::Codec(format!(
                "expected a {} state, got tag {tag}",
                self.kind()
            )));
        }
        let mut out = self.init();
        match &mut out {
            Gla::Selection { rows, .. } | Gla::Collect { rows, .. } => *rows = r.rows()?,
            Gla::Join { left, right, .. } => {
                let n = r.count()?;
                for _ in 0..n {
                    let k = r.row()?;
                    left.insert(k, r.rows()?);
                }
                *right = r.rows()?;
            }
            Gla::Distinct { rows } => *rows = r.rows()?.into_iter().collect(),
            Gla::Sum { sum, .. } => *sum = ExactSum::read(&mut r)?,
            Gla::GroupBy { groups, .. } => {
                let n = r.count()?;
                for _ in 0..n {
                    let g = r.value()?;
                    groups.insert(g, ExactSum::read(&mut r)?);
                }
            }
        }
        r.finish()?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Row {
        v.iter().map(|i| Value::Int(*i)).collect()
    }

    #[test]
    fn exact_sum_is_order_free() {
        let xs = [1e16, 1.0, -1e16, 0.1, 0.2, 0.3];
        let mut a = ExactSum::default();
        for x in xs {
            a.add(&Value::Real(x)).unwrap();
        }
        let mut b = ExactSum::default();
        for x in xs.iter().rev() {
            b.add(&Value::Real(*x)).unwrap();
        }
        assert_eq!(a.value(), b.value());
        assert_eq!(a.value(), Value::Real(1.6));
    }

    #[test]
    fn exact_sum_mixes_ints_and_reals() {
        let mut s = ExactSum::default();
        s.add(&Value::Int(i64::MAX)).unwrap();
        s.add(&Value::Int(i64::MAX)).unwrap();
        assert_eq!(s.value(), Value::Real(2.0 * i64::MAX as f64));
        let mut s = ExactSum::default();
        s.add(&Value::Int(2)).unwrap();
        s.add(&Value::Real(0.5)).unwrap();
        assert_eq!(s.value(), Value::Real(2.5));
        assert!(s.add(&Value::Text("x".into())).is_err());
    }

    #[test]
    fn join_probes_at_terminate() {
        let mut j = Gla::join(vec![1], vec![0]);
        j.accumulate(Side::Left, ints(&[10, 1])).unwrap();
        j.accumulate(Side::Left, ints(&[11, 1])).unwrap();
        j.accumulate(Side::Right, ints(&[1, 7])).unwrap();
        j.accumulate(Side::Right, ints(&[2, 8])).unwrap();
        let mut out = j.terminate();
        out.sort();
        assert_eq!(out, [ints(&[10, 1, 1, 7]), ints(&[11, 1, 1, 7])]);
    }

    #[test]
    fn empty_sum_has_no_rows() {
        assert!(Gla::sum(0).terminate().is_empty());
        assert!(Gla::group_by(0, 1).terminate().is_empty());
    }

    #[test]
    fn deserialize_checks_kind() {
        let bytes = Gla::distinct().serialize();
        assert!(Gla::sum(0).deserialize(&bytes).is_err());
        assert!(Gla::distinct().deserialize(&bytes).is_ok());
    }
}
