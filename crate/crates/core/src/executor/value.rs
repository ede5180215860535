use std::cmp::Ordering;
use std::fmt;

use crate::parser::{CmpOp, Literal};

use super::ExecError;

/// A cell. Numbers compare exactly across Int/Real; every number sorts
/// before every text value.
#[derive(Debug, Clone)]
pub enum Value {
    Int(i64),
    Real(f64),
    Text(String),
}

pub type Row = Vec<Value>;

impl Value {
    /// Integers first, then finite reals, otherwise text.
    pub fn parse_field(s: &str) -> Value {
        if let Ok(i) = s.parse::<i64>() {
            return Value::Int(i);
        }
        match s.parse::<f64>() {
            Ok(f) if f.is_finite() && s.bytes().any(|b| b.is_ascii_digit()) => Value::Real(f),
            _ => Value::Text(s.to_string()),
        }
    }

    pub fn from_literal(l: &Literal) -> Value {
        match l {
            Literal::Num(n) => Value::parse_field(n),
            Literal::Str(s) => Value::Text(s.clone()),
        }
    }

    pub fn is_text(&self) -> bool {
        matches!(self, Value::Text(_))
    }

    /// Ordering for predicates: comparing text with a number is an error.
    pub fn compare(&self, other: &Value) -> Result<Ordering, ExecError> {
        if self.is_text() != other.is_text() {
            return Err(ExecError::Type(format!("cannot compare {self} with {other}")));
        }
        Ok(self.cmp(other))
    }

    pub fn test(&self, op: CmpOp, other: &Value) -> Result<bool, ExecError> {
        let o = self.compare(other)?;
        Ok(match op {
            CmpOp::Eq => o == Ordering::Equal,
            CmpOp::Neq => o != Ordering::Equal,
            CmpOp::Lt => o == Ordering::Less,
            CmpOp::Gt => o == Ordering::Greater,
        })
    }
}

/// Exact comparison of an integer with a finite real.
fn cmp_int_real(i: i64, r: f64) -> Ordering {
    const TWO63: f64 = 9_223_372_036_854_775_808.0;
    if r.is_nan() {
        return Ordering::Less;
    }
    if r >= TWO63 {
        return Ordering::Less;
    }
    if r < -TWO63 {
        return Ordering::Greater;
    }
    let floor = r.floor();
    match i.cmp(&(floor as i64)) {
        Ordering::Equal if r > floor => Ordering::Less,
        o => o,
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        use Value::*;
        match (self, other) {
            (Int(a), Int(b)) => a.cmp(b),
            (Real(a), Real(b)) => a.partial_cmp(b).unwrap_or_else(|| a.total_cmp(b)),
            (Int(a), Real(b)) => cmp_int_real(*a, *b),
            (Real(a), Int(b)) => cmp_int_real(*b, *a).reverse(),
            (Text(a), Text(b)) => a.cmp(b),
            (Text(_), _) => Ordering::Greater,
            (_, Text(_)) => Ordering::Less,
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => write!(f, "{r}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

pub fn format_row(row: &[Value]) -> String {
    row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("|")
}
