use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Neq,
    Lt,
    Gt,
}

impl CmpOp {
    /// Operator with its operands swapped: `5 > a` ⇔ `a < 5`.
    pub fn flipped(self) -> Self {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Lt,
            other => other,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Neq => "<>",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    /// Numeric text as written.
    Num(String),
    Str(String),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Num(n) => f.write_str(n),
            Literal::Str(s) => write!(f, "'{s}'"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operand {
    Attr(String),
    Lit(Literal),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Attr(a) => f.write_str(a),
            Operand::Lit(l) => l.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Comparison {
    pub op: CmpOp,
    pub left: Operand,
    pub right: Operand,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.left, self.op, self.right)
    }
}

/// The WHERE clause as a binary tree of ANDs over comparison leaves.
#[derive(Debug, Clone, PartialEq)]
pub enum AndList {
    Leaf(Comparison),
    And(Box<AndList>, Box<AndList>),
}

impl AndList {
    /// Right-leaning tree over `leaves`; `None` when empty.
    pub fn from_leaves(mut leaves: Vec<Comparison>) -> Option<AndList> {
        let last = leaves.pop()?;
        let mut tree = AndList::Leaf(last);
        while let Some(c) = leaves.pop() {
            tree = AndList::And(Box::new(AndList::Leaf(c)), Box::new(tree));
        }
        Some(tree)
    }

    pub fn leaves(&self) -> Vec<&Comparison> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            match n {
                AndList::Leaf(c) => out.push(c),
                AndList::And(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Aggregate {
    None,
    Distinct,
    Sum { attr: String, group_by: Option<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectList {
    /// Plain attributes in the order written. For `SUM(x), g ... GROUP BY g`
    /// this is `[g]`.
    pub attributes: Vec<String>,
    pub aggregate: Aggregate,
}

impl SelectList {
    /// Columns the query's projection must carry, in output order.
    pub fn projection(&self) -> Vec<String> {
        match &self.aggregate {
            Aggregate::Sum {
                attr,
                group_by: Some(g),
            } => vec![g.clone(), attr.clone()],
            Aggregate::Sum { attr, group_by: None } => vec![attr.clone()],
            _ => self.attributes.clone(),
        }
    }
}

/// Single-table filter `attr op literal`, attribute always on the left.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SelectionPredicate {
    pub attr: String,
    pub op: CmpOp,
    pub literal: Literal,
}

impl fmt::Display for SelectionPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.attr, self.op, self.literal)
    }
}

/// Equality between two attributes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JoinPredicate {
    pub left: String,
    pub right: String,
}

impl JoinPredicate {
    pub fn new(left: impl Into<String>, right: impl Into<String>) -> Self {
        JoinPredicate {
            left: left.into(),
            right: right.into(),
        }
    }

    /// Equality is symmetric, so `a = b` and `b = a` are the same predicate.
    pub fn same_as(&self, other: &JoinPredicate) -> bool {
        (self.left == other.left && self.right == other.right) || (self.left == other.right && self.right == other.left)
    }

    pub fn mentions(&self, attr: &str) -> bool {
        self.left == attr || self.right == attr
    }
}

impl fmt::Display for JoinPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.left, self.right)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedQuery {
    pub name: String,
    pub select: SelectList,
    pub tables: Vec<String>,
    pub predicates: Option<AndList>,
    /// Owning table of each attribute the query mentions, first appearance order.
    pub attr_owner: Vec<(String, String)>,
}

impl ParsedQuery {
    pub fn comparisons(&self) -> Vec<&Comparison> {
        self.predicates.as_ref().map(|p| p.leaves()).unwrap_or_default()
    }

    pub fn owner_of(&self, attr: &str) -> Option<&str> {
        self.attr_owner.iter().find(|(a, _)| a == attr).map(|(_, t)| t.as_str())
    }

    /// Every attribute mentioned, select list first, then WHERE leaves.
    pub fn attributes(&self) -> Vec<&str> {
        self.attr_owner.iter().map(|(a, _)| a.as_str()).collect()
    }

    pub fn is_aggregate(&self) -> bool {
        matches!(self.select.aggregate, Aggregate::Sum { .. })
    }
}

impl fmt::Display for ParsedQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT ")?;
        match &self.select.aggregate {
            Aggregate::Sum { attr, .. } => {
                write!(f, "SUM({attr})")?;
                for a in &self.select.attributes {
                    write!(f, ", {a}")?;
                }
            }
            agg => {
                if *agg == Aggregate::Distinct {
                    f.write_str("DISTINCT ")?;
                }
                f.write_str(&self.select.attributes.join(", "))?;
            }
        }
        write!(f, " FROM {}", self.tables.join(", "))?;
        let leaves = self.comparisons();
        if !leaves.is_empty() {
            let parts: Vec<String> = leaves.iter().map(|c| c.to_string()).collect();
            write!(f, " WHERE {}", parts.join(" AND "))?;
        }
        if let Aggregate::Sum { group_by: Some(g), .. } = &self.select.aggregate {
            write!(f, " GROUP BY {g}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiQuery {
    pub queries: Vec<ParsedQuery>,
    /// Deduplicated tables in first-appearance order.
    pub all_tables: Vec<String>,
    pub all_attributes: Vec<String>,
    /// `encoding[i]` is the table with index `i`.
    pub encoding: Vec<String>,
}

impl MultiQuery {
    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn table_index(&self, table: &str) -> Option<usize> {
        self.encoding.iter().position(|t| t == table)
    }

    pub fn query_index(&self, name: &str) -> Option<usize> {
        self.queries.iter().position(|q| q.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.queries.iter().map(|q| q.name.clone()).collect()
    }
}

impl fmt::Display for MultiQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MULTIQUERY")?;
        for q in &self.queries {
            writeln!(f, "{}:", q.name)?;
            writeln!(f, "{q}")?;
        }
        write!(f, "END")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cmp(a: &str, n: &str) -> Comparison {
        Comparison {
            op: CmpOp::Lt,
            left: Operand::Attr(a.into()),
            right: Operand::Lit(Literal::Num(n.into())),
        }
    }

    #[test]
    fn and_list_preserves_leaf_order() {
        let t = AndList::from_leaves(vec![cmp("a", "1"), cmp("b", "2"), cmp("c", "3")]).unwrap();
        let names: Vec<String> = t.leaves().iter().map(|c| c.left.to_string()).collect();
        assert_eq!(names, ["a", "b", "c"]);
        assert!(AndList::from_leaves(vec![]).is_none());
    }

    #[test]
    fn join_predicate_symmetry() {
        let p = JoinPredicate::new("a", "b");
        assert!(p.same_as(&JoinPredicate::new("b", "a")));
        assert!(!p.same_as(&JoinPredicate::new("a", "c")));
    }

    #[test]
    fn projection_for_aggregates() {
        let s = SelectList {
            attributes: vec!["c_name".into()],
            aggregate: Aggregate::Sum {
                attr: "c_acctbal".into(),
                group_by: Some("c_name".into()),
            },
        };
        assert_eq!(s.projection(), ["c_name", "c_acctbal"]);
    }
}
