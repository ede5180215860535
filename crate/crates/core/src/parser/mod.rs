//! SQL subset: `SELECT [DISTINCT] a, ... | SELECT SUM(a)[, g]`, `FROM t, ...`,
//! optional `WHERE` conjunction of binary comparisons, optional `GROUP BY g`.
//! Batches are wrapped in `MULTIQUERY <Name>: <query> ... END`.

pub mod ast;
pub mod lexer;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use ast::*;
use lexer::{Pos, Tok, Token};

use crate::catalog::Catalog;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}, column {col}: illegal character `{ch}`")]
    IllegalChar { ch: char, line: usize, col: usize },
    #[error("line {line}, column {col}: unterminated string literal")]
    UnterminatedString { line: usize, col: usize },
    #[error("line {line}, column {col}: expected {expected}, found {found}")]
    Syntax {
        expected: String,
        found: String,
        line: usize,
        col: usize,
    },
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("attribute `{attr}` belongs to `{table}`, which is not in the FROM list")]
    TableNotListed { attr: String, table: String },
    #[error("table `{0}` appears twice in the FROM list")]
    DuplicateTable(String),
    #[error("DISTINCT cannot be combined with SUM")]
    DistinctWithSum,
    #[error("GROUP BY requires SUM")]
    GroupWithoutSum,
    #[error("with SUM, the only other select attribute allowed is the GROUP BY attribute")]
    BadAggregateList,
    #[error("comparison `{0}` has no attribute")]
    LiteralComparison(String),
    #[error("only equality joins are supported: `{0}`")]
    NonEqualityJoin(String),
    #[error("query name `{0}` is used twice")]
    DuplicateQueryName(String),
    #[error("in {name}: {source}")]
    InQuery {
        name: String,
        #[source]
        source: Box<ParseError>,
    },
    #[error("no query covers every table; the widest query lacks {}", uncovered.join(", "))]
    Boundary { uncovered: Vec<String> },
    #[error("bad table encoding: {0}")]
    BadEncoding(String),
}

impl ParseError {
    /// Lexical and grammatical failures, as opposed to semantic ones.
    pub fn is_syntax(&self) -> bool {
        match self {
            ParseError::IllegalChar { .. } | ParseError::UnterminatedString { .. } | ParseError::Syntax { .. } => true,
            ParseError::InQuery { source, .. } => source.is_syntax(),
            _ => false,
        }
    }
}

pub use lexer::tokenize;

struct Parser {
    toks: Vec<Token>,
    at: usize,
    end: Pos,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        let toks = lexer::tokenize(text)?;
        let lines = text.lines().count().max(1);
        let last = text.lines().last().map(|l| l.chars().count()).unwrap_or(0);
        Ok(Parser {
            toks,
            at: 0,
            end: Pos {
                line: lines,
                col: last + 1,
            },
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.at + 1).map(|t| &t.tok)
    }

    fn err(&self, expected: &str) -> ParseError {
        let (found, pos) = match self.toks.get(self.at) {
            Some(t) => (t.tok.to_string(), t.pos),
            None => ("end of input".to_string(), self.end),
        };
        ParseError::Syntax {
            expected: expected.to_string(),
            found,
            line: pos.line,
            col: pos.col,
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.err(&t.to_string()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            _ => Err(self.err(what)),
        }
    }

    fn query(&mut self) -> Result<(SelectList, Vec<String>, Vec<Comparison>), ParseError> {
        self.expect(Tok::Select)?;
        let distinct = self.eat(&Tok::Distinct);
        let mut attributes = Vec::new();
        let mut sum = None;
        if self.peek() == Some(&Tok::Sum) {
            if distinct {
                return Err(ParseError::DistinctWithSum);
            }
            self.at += 1;
            self.expect(Tok::LParen)?;
            sum = Some(self.ident("attribute")?);
            self.expect(Tok::RParen)?;
            while self.eat(&Tok::Comma) {
                if self.peek() == Some(&Tok::Sum) {
                    return Err(ParseError::BadAggregateList);
                }
                attributes.push(self.ident("attribute")?);
            }
        } else {
            attributes.push(self.ident("attribute")?);
            while self.eat(&Tok::Comma) {
                if self.peek() == Some(&Tok::Sum) {
                    return Err(if distinct {
                        ParseError::DistinctWithSum
                    } else {
                        ParseError::BadAggregateList
                    });
                }
                attributes.push(self.ident("attribute")?);
            }
        }
        self.expect(Tok::From)?;
        let mut tables = vec![self.ident("table name")?];
        while self.eat(&Tok::Comma) {
            tables.push(self.ident("table name")?);
        }
        let mut leaves = Vec::new();
        if self.eat(&Tok::Where) {
            leaves.push(self.comparison()?);
            while self.eat(&Tok::And) {
                leaves.push(self.comparison()?);
            }
        }
        let mut group_by = None;
        if self.eat(&Tok::Group) {
            self.expect(Tok::By)?;
            group_by = Some(self.ident("attribute")?);
        }
        self.eat(&Tok::Semi);

        let aggregate = match (sum, group_by) {
            (Some(attr), group_by) => {
                let ok = match &group_by {
                    None => attributes.is_empty(),
                    Some(g) => attributes.is_empty() || attributes == [g.clone()],
                };
                if !ok {
                    return Err(ParseError::BadAggregateList);
                }
                if let Some(g) = &group_by {
                    if attributes.is_empty() {
                        attributes.push(g.clone());
                    }
                }
                Aggregate::Sum { attr, group_by }
            }
            (None, Some(_)) => return Err(ParseError::GroupWithoutSum),
            (None, None) if distinct => Aggregate::Distinct,
            (None, None) => Aggregate::None,
        };
        Ok((SelectList { attributes, aggregate }, tables, leaves))
    }

    fn operand(&mut self) -> Result<Operand, ParseError> {
        let op = match self.peek() {
            Some(Tok::Ident(s)) => Operand::Attr(s.clone()),
            Some(Tok::Number(n)) => Operand::Lit(Literal::Num(n.clone())),
            Some(Tok::Str(s)) => Operand::Lit(Literal::Str(s.clone())),
            _ => return Err(self.err("attribute or literal")),
        };
        self.at += 1;
        Ok(op)
    }

    fn comparison(&mut self) -> Result<Comparison, ParseError> {
        let left = self.operand()?;
        let op = match self.peek() {
            Some(Tok::Eq) => CmpOp::Eq,
            Some(Tok::Neq) => CmpOp::Neq,
            Some(Tok::Lt) => CmpOp::Lt,
            Some(Tok::Gt) => CmpOp::Gt,
            _ => return Err(self.err("comparison operator")),
        };
        self.at += 1;
        let right = self.operand()?;
        Ok(Comparison { op, left, right })
    }
}

fn validate(
    name: String,
    select: SelectList,
    tables: Vec<String>,
    leaves: Vec<Comparison>,
    catalog: &Catalog,
) -> Result<ParsedQuery, ParseError> {
    let mut seen = BTreeSet::new();
    for t in &tables {
        if catalog.table(t).is_none() {
            return Err(ParseError::UnknownTable(t.clone()));
        }
        if !seen.insert(t.as_str()) {
            return Err(ParseError::DuplicateTable(t.clone()));
        }
    }
    let mut attr_owner: Vec<(String, String)> = Vec::new();
    let mut note = |attr: &str| -> Result<(), ParseError> {
        let owner = catalog
            .owner(attr)
            .map_err(|_| ParseError::UnknownAttribute(attr.to_string()))?;
        if !tables.iter().any(|t| t == owner) {
            return Err(ParseError::TableNotListed {
                attr: attr.to_string(),
                table: owner.to_string(),
            });
        }
        if !attr_owner.iter().any(|(a, _)| a == attr) {
            attr_owner.push((attr.to_string(), owner.to_string()));
        }
        Ok(())
    };
    if let Aggregate::Sum { attr, .. } = &select.aggregate {
        note(attr)?;
    }
    for a in &select.attributes {
        note(a)?;
    }
    for c in &leaves {
        match (&c.left, &c.right) {
            (Operand::Lit(_), Operand::Lit(_)) => return Err(ParseError::LiteralComparison(c.to_string())),
            (Operand::Attr(a), Operand::Attr(b)) => {
                if c.op != CmpOp::Eq {
                    return Err(ParseError::NonEqualityJoin(c.to_string()));
                }
                note(a)?;
                note(b)?;
            }
            (Operand::Attr(a), _) | (_, Operand::Attr(a)) => note(a)?,
        }
    }
    Ok(ParsedQuery {
        name,
        select,
        tables,
        predicates: AndList::from_leaves(leaves),
        attr_owner,
    })
}

/// Parses one standalone query, named `Q1`.
pub fn parse_query(text: &str, catalog: &Catalog) -> Result<ParsedQuery, ParseError> {
    parse_named_query("Q1", text, catalog)
}

pub fn parse_named_query(name: &str, text: &str, catalog: &Catalog) -> Result<ParsedQuery, ParseError> {
    let mut p = Parser::new(text)?;
    let (select, tables, leaves) = p.query()?;
    if p.peek().is_some() {
        return Err(p.err("end of query"));
    }
    validate(name.to_string(), select, tables, leaves, catalog)
}

/// True when the text starts with the `MULTIQUERY` keyword.
pub fn is_multiquery(text: &str) -> bool {
    matches!(
        lexer::tokenize(text).ok().and_then(|t| t.into_iter().next()),
        Some(Token {
            tok: Tok::MultiQuery,
            ..
        })
    )
}

/// Parses a `MULTIQUERY ... END` block. `encoding` optionally fixes the table
/// → index assignment; it must be a permutation of the batch's tables.
pub fn parse_multiquery(text: &str, catalog: &Catalog, encoding: Option<&[String]>) -> Result<MultiQuery, ParseError> {
    let mut p = Parser::new(text)?;
    p.expect(Tok::MultiQuery)?;
    let mut raw = Vec::new();
    loop {
        match (p.peek(), p.peek2()) {
            (Some(Tok::End), _) => {
                p.at += 1;
                break;
            }
            (Some(Tok::Ident(_)), Some(Tok::Colon)) => {
                let name = p.ident("query name")?;
                p.at += 1;
                let q = p.query().map_err(|e| ParseError::InQuery {
                    name: name.clone(),
                    source: Box::new(e),
                })?;
                raw.push((name, q));
            }
            _ => return Err(p.err("query name followed by `:`, or END")),
        }
    }
    if p.peek().is_some() {
        return Err(p.err("end of input after END"));
    }
    if raw.is_empty() {
        return Err(ParseError::Syntax {
            expected: "at least one query".into(),
            found: "END".into(),
            line: p.end.line,
            col: p.end.col,
        });
    }
    let mut queries = Vec::new();
    for (name, (select, tables, leaves)) in raw {
        if queries.iter().any(|q: &ParsedQuery| q.name == name) {
            return Err(ParseError::DuplicateQueryName(name));
        }
        let q = validate(name.clone(), select, tables, leaves, catalog).map_err(|e| ParseError::InQuery {
            name,
            source: Box::new(e),
        })?;
        queries.push(q);
    }
    build_multiquery(queries, encoding)
}

/// Assembles already-parsed queries into a batch.
pub fn build_multiquery(queries: Vec<ParsedQuery>, encoding: Option<&[String]>) -> Result<MultiQuery, ParseError> {
    let mut all_tables: Vec<String> = Vec::new();
    let mut all_attributes: Vec<String> = Vec::new();
    let mut names = BTreeSet::new();
    for q in &queries {
        if !names.insert(q.name.as_str()) {
            return Err(ParseError::DuplicateQueryName(q.name.clone()));
        }
        for t in &q.tables {
            if !all_tables.contains(t) {
                all_tables.push(t.clone());
            }
        }
        for a in q.attributes() {
            if !all_attributes.iter().any(|x| x == a) {
                all_attributes.push(a.to_string());
            }
        }
    }
    let encoding = match encoding {
        None => all_tables.clone(),
        Some(enc) => {
            let given: BTreeSet<&String> = enc.iter().collect();
            let want: BTreeSet<&String> = all_tables.iter().collect();
            if given.len() != enc.len() {
                return Err(ParseError::BadEncoding("a table is listed twice".into()));
            }
            if given != want {
                return Err(ParseError::BadEncoding(format!(
                    "expected a permutation of {}",
                    all_tables.join(",")
                )));
            }
            enc.to_vec()
        }
    };
    if encoding.len() > 32 {
        return Err(ParseError::BadEncoding("more than 32 tables".into()));
    }
    Ok(MultiQuery {
        queries,
        all_tables,
        all_attributes,
        encoding,
    })
}

/// Name of the first query whose tables include every other query's tables.
pub fn validate_boundary(mq: &MultiQuery) -> Result<String, ParseError> {
    let sets: Vec<BTreeSet<&String>> = mq.queries.iter().map(|q| q.tables.iter().collect()).collect();
    for (q, s) in mq.queries.iter().zip(&sets) {
        if sets.iter().all(|o| o.is_subset(s)) {
            return Ok(q.name.clone());
        }
    }
    let widest = sets
        .iter()
        .enumerate()
        .max_by_key(|(i, s)| (s.len(), std::cmp::Reverse(*i)))
        .map(|(_, s)| s.clone())
        .unwrap_or_default();
    let uncovered = mq.all_tables.iter().filter(|t| !widest.contains(t)).cloned().collect();
    Err(ParseError::Boundary { uncovered })
}

/// Per-table selection predicates and attribute-equality predicates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SplitPredicates {
    pub selections: BTreeMap<String, Vec<SelectionPredicate>>,
    pub joins: Vec<JoinPredicate>,
}

/// Partitions the WHERE leaves. Literal-first comparisons are normalized to
/// attribute-first with the operator flipped.
pub fn split_predicates(q: &ParsedQuery) -> SplitPredicates {
    let mut out = SplitPredicates::default();
    for c in q.comparisons() {
        match (&c.left, &c.right) {
            (Operand::Attr(a), Operand::Attr(b)) => out.joins.push(JoinPredicate::new(a, b)),
            (Operand::Attr(a), Operand::Lit(l)) | (Operand::Lit(l), Operand::Attr(a)) => {
                let op = if matches!(c.left, Operand::Lit(_)) {
                    c.op.flipped()
                } else {
                    c.op
                };
                let table = q.owner_of(a).expect("validated attribute").to_string();
                out.selections.entry(table).or_default().push(SelectionPredicate {
                    attr: a.clone(),
                    op,
                    literal: l.clone(),
                });
            }
            (Operand::Lit(_), Operand::Lit(_)) => unreachable!("rejected during parsing"),
        }
    }
    out
}
