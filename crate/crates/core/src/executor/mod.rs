//! Simulated shared-nothing execution.
//!
//! A coordinator drives `w` workers arranged as a binary tree (worker `i`
//! reports to `(i - 1) / 2`, worker 0 to the coordinator). Base rows are dealt
//! to workers chunk by chunk. Operators run one at a time in dependency
//! order: every worker accumulates its share of the inputs into a fresh
//! [`Gla`], states are serialized up the tree and merged, and the coordinator
//! terminates the final state and deals the output rows back out as input
//! for the next operator.

pub mod codec;
pub mod gla;
mod naive;
pub mod value;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use thiserror::Error;

use crate::catalog::{split_tbl_line, Catalog};
use crate::exectree::{ExecDag, ExecId, ExecKind};
use crate::parser::Aggregate;

pub use gla::{Check, ExactSum, Gla, Side};
pub use naive::naive_eval;
pub use value::{format_row, Row, Value};

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("no data for table {0}")]
    MissingTable(String),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("corrupt state: {0}")]
    Codec(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{table} line {line}: expected {expected} fields, found {found}")]
    BadRow {
        table: String,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid run configuration: {0}")]
    Config(String),
}

/// Rows under a fixed list of attribute names.
#[derive(Debug, Clone, PartialEq)]
pub struct Chunk {
    pub schema: Vec<String>,
    pub rows: Vec<Row>,
}

impl Chunk {
    pub fn new(schema: Vec<String>, rows: Vec<Row>) -> Result<Self, ExecError> {
        if let Some(r) = rows.iter().find(|r| r.len() != schema.len()) {
            return Err(ExecError::Schema(format!(
                "row of {} values under {} columns",
                r.len(),
                schema.len()
            )));
        }
        Ok(Chunk { schema, rows })
    }

    pub fn column(&self, attr: &str) -> Option<usize> {
        self.schema.iter().position(|a| a == attr)
    }

    /// Parses `.tbl` text; columns beyond `schema` are ignored.
    pub fn parse_tbl(table: &str, schema: Vec<String>, text: &str) -> Result<Self, ExecError> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields = split_tbl_line(line);
            if fields.len() < schema.len() {
                return Err(ExecError::BadRow {
                    table: table.to_string(),
                    line: i + 1,
                    expected: schema.len(),
                    found: fields.len(),
                });
            }
            rows.push(fields[..schema.len()].iter().map(|f| Value::parse_field(f)).collect());
        }
        Ok(Chunk { schema, rows })
    }

    pub fn to_tbl(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out += &format_row(r);
            out += "|\n";
        }
        out
    }
}

/// Table name → rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    tables: BTreeMap<String, Chunk>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, table: impl Into<String>, chunk: Chunk) {
        self.tables.insert(table.into(), chunk);
    }

    pub fn get(&self, table: &str) -> Option<&Chunk> {
        self.tables.get(table)
    }

    pub fn tables(&self) -> impl Iterator<Item = (&str, &Chunk)> {
        self.tables.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Reads `<dir>/<table>.tbl` for each table, columns as in the catalog.
    pub fn load_dir(dir: &Path, catalog: &Catalog, tables: &[String]) -> Result<Self, ExecError> {
        let mut ds = Dataset::new();
        for t in tables {
            let schema: Vec<String> = catalog
                .columns(t)
                .map_err(|_| ExecError::MissingTable(t.clone()))?
                .into_iter()
                .map(str::to_string)
                .collect();
            let path = dir.join(format!("{t}.tbl"));
            let text = match fs::read_to_string(&path) {
                Ok(text) => text,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(ExecError::MissingTable(t.clone())),
                Err(source) => return Err(ExecError::Io { path, source }),
            };
            ds.insert(t.clone(), Chunk::parse_tbl(t, schema, &text)?);
        }
        Ok(ds)
    }

    pub fn write_dir(&self, dir: &Path) -> Result<(), ExecError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| ExecError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        for (t, c) in &self.tables {
            let path = dir.join(format!("{t}.tbl"));
            fs::write(&path, c.to_tbl()).map_err(io(&path))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub workers: usize,
    pub chunk: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { workers: 8, chunk: 64 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub schema: Vec<String>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScanStats {
    /// (worker, table) → times the worker opened its partition of the table.
    pub opened: BTreeMap<(usize, String), usize>,
    /// (worker, table) → base rows the worker read.
    pub rows_read: BTreeMap<(usize, String), usize>,
}

impl ScanStats {
    pub fn total_read(&self, table: &str) -> usize {
        self.rows_read
            .iter()
            .filter(|((_, t), _)| t == table)
            .map(|(_, n)| n)
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Per query, batch order.
    pub results: Vec<(String, QueryResult)>,
    pub scans: ScanStats,
}

impl RunOutput {
    pub fn result(&self, query: &str) -> Option<&QueryResult> {
        self.results.iter().find(|(n, _)| n == query).map(|(_, r)| r)
    }
}

/// Deals `rows` to `workers` in runs of `chunk`.
fn deal(rows: Vec<Row>, workers: usize, chunk: usize) -> Vec<Vec<Row>> {
    let mut out = vec![Vec::new(); workers];
    for (k, c) in rows.chunks(chunk).enumerate() {
        out[k % workers].extend(c.iter().cloned());
    }
    out
}

fn index_of(schema: &[String], attr: &str, node: &str) -> Result<usize, ExecError> {
    schema
        .iter()
        .position(|a| a == attr)
        .ok_or_else(|| ExecError::Schema(format!("{node} needs {attr}, which its input lacks")))
}

/// Template GLA and output schema for a non-scan node.
fn operator(dag: &ExecDag, n: ExecId, schemas: &[Vec<String>]) -> Result<(Gla, Vec<String>), ExecError> {
    let node = dag.node(n);
    let input = |i: usize| &schemas[node.children[i]];
    let at = |attr: &str| index_of(input(0), attr, &node.name);
    let consts = |preds: &[crate::parser::SelectionPredicate]| -> Result<Vec<Check>, ExecError> {
        preds
            .iter()
            .map(|p| {
                Ok(Check::Const {
                    col: at(&p.attr)?,
                    op: p.op,
                    value: Value::from_literal(&p.literal),
                })
            })
            .collect()
    };
    Ok(match &node.kind {
        ExecKind::Scan { .. } => unreachable!("scans are read, not aggregated"),
        ExecKind::Select { preds, .. } => (Gla::selection(consts(preds)?), input(0).clone()),
        ExecKind::ExitSelect { selections, joins, .. } => {
            let mut checks = consts(selections)?;
            for j in joins {
                checks.push(Check::SameAs {
                    a: at(&j.left)?,
                    b: at(&j.right)?,
                });
            }
            (Gla::selection(checks), input(0).clone())
        }
        ExecKind::Join { preds, .. } => {
            let left_keys = preds
                .iter()
                .map(|p| index_of(input(0), &p.left, &node.name))
                .collect::<Result<_, _>>()?;
            let right_keys = preds
                .iter()
                .map(|p| index_of(input(1), &p.right, &node.name))
                .collect::<Result<_, _>>()?;
            let mut schema = input(0).clone();
            schema.extend(input(1).iter().cloned());
            (Gla::join(left_keys, right_keys), schema)
        }
        ExecKind::Project { attrs } => {
            let cols = attrs.iter().map(|a| at(a)).collect::<Result<_, _>>()?;
            (Gla::collect(cols), attrs.clone())
        }
        ExecKind::Distinct => (Gla::distinct(), input(0).clone()),
        ExecKind::Sum { attr } => (Gla::sum(at(attr)?), vec![format!("SUM({attr})")]),
        ExecKind::GroupBy { group, sum } => (
            Gla::group_by(at(group)?, at(sum)?),
            vec![group.clone(), format!("SUM({sum})")],
        ),
        ExecKind::Print { .. } => (Gla::collect((0..input(0).len()).collect()), input(0).clone()),
    })
}

/// Runs every worker over its inputs, merges up the tree, and returns the
/// coordinator's terminated rows.
fn run_operator(template: &Gla, inputs: &[(Side, &Vec<Vec<Row>>)], workers: usize) -> Result<Vec<Row>, ExecError> {
    let states: Vec<Result<Gla, ExecError>> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || {
                    let mut state = template.init();
                    for (side, rows) in inputs {
                        for row in &rows[w] {
                            state.accumulate(*side, row.clone())?;
                        }
                    }
                    Ok(state)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker thread")).collect()
    });
    let mut states: Vec<Option<Gla>> = states.into_iter().map(|s| s.map(Some)).collect::<Result<_, _>>()?;
    for i in (1..workers).rev() {
        let bytes = states[i].take().expect("merged once").serialize();
        let child = template.deserialize(&bytes)?;
        states[(i - 1) / 2].as_mut().expect("parent still live").merge(child)?;
    }
    let root = template.deserialize(&states[0].take().expect("root").serialize())?;
    Ok(root.terminate())
}

/// Executes the DAG and returns each query's rows.
pub fn run_plan(dag: &ExecDag, data: &Dataset, cfg: &RunConfig) -> Result<RunOutput, ExecError> {
    if cfg.workers == 0 || cfg.chunk == 0 {
        return Err(ExecError::Config("workers and chunk size must be at least 1".into()));
    }
    let w = cfg.workers;
    let mut schemas: Vec<Vec<String>> = vec![Vec::new(); dag.nodes.len()];
    let mut dealt: BTreeMap<ExecId, Vec<Vec<Row>>> = BTreeMap::new();
    let mut stats = ScanStats::default();
    let mut results: BTreeMap<usize, QueryResult> = BTreeMap::new();
    for n in dag.topological() {
        let node = dag.node(n);
        if let ExecKind::Scan { table } = &node.kind {
            let chunk = data.get(table).ok_or_else(|| ExecError::MissingTable(table.clone()))?;
            let mut wanted: Vec<usize> = Vec::new();
            for q in &node.queries {
                for (attr, owner) in &dag.queries[*q].attr_owner {
                    if owner == table {
                        let c = chunk
                            .column(attr)
                            .ok_or_else(|| ExecError::Schema(format!("data for {table} has no column {attr}")))?;
                        if !wanted.contains(&c) {
                            wanted.push(c);
                        }
                    }
                }
            }
            wanted.sort();
            schemas[n] = wanted.iter().map(|c| chunk.schema[*c].clone()).collect();
            let parts = deal(
                chunk
                    .rows
                    .iter()
                    .map(|r| wanted.iter().map(|c| r[*c].clone()).collect())
                    .collect(),
                w,
                cfg.chunk,
            );
            for (worker, part) in parts.iter().enumerate() {
                *stats.opened.entry((worker, table.clone())).or_default() += 1;
                *stats.rows_read.entry((worker, table.clone())).or_default() += part.len();
            }
            dealt.insert(n, parts);
            continue;
        }
        let (template, schema) = operator(dag, n, &schemas)?;
        schemas[n] = schema;
        let sides = [Side::Left, Side::Right];
        let inputs: Vec<(Side, &Vec<Vec<Row>>)> = node
            .children
            .iter()
            .enumerate()
            .map(|(i, c)| (sides[i.min(1)], &dealt[c]))
            .collect();
        let rows = run_operator(&template, &inputs, w)?;
        if let ExecKind::Print { .. } = node.kind {
            let q = node.queries[0];
            results.insert(
                q,
                QueryResult {
                    schema: schemas[n].clone(),
                    rows,
                },
            );
        } else {
            dealt.insert(n, deal(rows, w, cfg.chunk));
        }
    }
    Ok(RunOutput {
        results: results
            .into_iter()
            .map(|(q, r)| (dag.queries[q].name.clone(), r))
            .collect(),
        scans: stats,
    })
}

/// Multiset equality, or set equality when `dedup`.
pub fn compare_results(a: &[Row], b: &[Row], dedup: bool) -> bool {
    let norm = |rows: &[Row]| {
        let mut v = rows.to_vec();
        v.sort();
        if dedup {
            v.dedup();
        }
        v
    };
    norm(a) == norm(b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub query: String,
    pub plan_rows: usize,
    pub oracle_rows: usize,
    pub matches: bool,
}

/// Checks each query's plan output against the naive evaluator.
pub fn verify(dag: &ExecDag, out: &RunOutput, data: &Dataset) -> Result<Vec<Verdict>, ExecError> {
    let mut verdicts = Vec::new();
    for q in &dag.queries {
        let oracle = naive_eval(q, data)?;
        let got = out.result(&q.name).map(|r| r.rows.as_slice()).unwrap_or(&[]);
        let dedup = q.select.aggregate == Aggregate::Distinct;
        verdicts.push(Verdict {
            query: q.name.clone(),
            plan_rows: got.len(),
            oracle_rows: oracle.rows.len(),
            matches: compare_results(got, &oracle.rows, dedup),
        });
    }
    Ok(verdicts)
}

/// `-- <query>` headers followed by pipe-delimited rows.
pub fn render_results(out: &RunOutput) -> String {
    let mut s = String::new();
    for (name, r) in &out.results {
        s += &format!("-- {name}\n");
        for row in &r.rows {
            s += &format_row(row);
            s.push('\n');
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exectree::construct_tree;
    use crate::parser::parse_query;
    use crate::planner::JoinOrder;

    fn ints(v: &[i64]) -> Row {
        v.iter().map(|i| Value::Int(*i)).collect()
    }

    fn regions() -> Dataset {
        let mut ds = Dataset::new();
        let text = "0|AFRICA|x|\n1|AMERICA|x|\n2|ASIA|x|\n3|EUROPE|x|\n4|MIDDLE EAST|x|\n";
        let schema = ["r_regionkey", "r_name", "r_comment"].map(String::from).to_vec();
        ds.insert("region", Chunk::parse_tbl("region", schema, text).unwrap());
        ds
    }

    #[test]
    fn compare_results_semantics() {
        let a = vec![ints(&[1]), ints(&[2])];
        let b = vec![ints(&[2]), ints(&[1])];
        assert!(compare_results(&a, &b, false));
        let c = vec![ints(&[2]), ints(&[1]), ints(&[1])];
        assert!(!compare_results(&a, &c, false));
        assert!(compare_results(&a, &c, true));
    }

    #[test]
    fn filter_query_on_region() {
        let cat = Catalog::load_default_tpch();
        let q = parse_query("SELECT r_name FROM region WHERE r_regionkey < 5", &cat).unwrap();
        let ds = regions();
        assert_eq!(naive_eval(&q, &ds).unwrap().rows.len(), 5);
        let dag = construct_tree(&q, &JoinOrder::Leaf(0), &cat).unwrap();
        let out = run_plan(&dag, &ds, &RunConfig { workers: 3, chunk: 2 }).unwrap();
        assert_eq!(out.result("Q1").unwrap().rows.len(), 5);
        assert_eq!(out.scans.total_read("region"), 5);
    }

    #[test]
    fn bad_config_and_missing_data() {
        let cat = Catalog::load_default_tpch();
        let q = parse_query("SELECT n_name FROM nation", &cat).unwrap();
        let dag = construct_tree(&q, &JoinOrder::Leaf(0), &cat).unwrap();
        let cfg = RunConfig { workers: 0, chunk: 1 };
        assert!(matches!(run_plan(&dag, &regions(), &cfg), Err(ExecError::Config(_))));
        let cfg = RunConfig::default();
        assert!(matches!(
            run_plan(&dag, &regions(), &cfg),
            Err(ExecError::MissingTable(_))
        ));
    }

    #[test]
    fn type_errors_surface() {
        let cat = Catalog::load_default_tpch();
        let q = parse_query("SELECT r_name FROM region WHERE r_name < 5", &cat).unwrap();
        assert!(matches!(naive_eval(&q, &regions()), Err(ExecError::Type(_))));
        let dag = construct_tree(&q, &JoinOrder::Leaf(0), &cat).unwrap();
        assert!(matches!(
            run_plan(&dag, &regions(), &RunConfig::default()),
            Err(ExecError::Type(_))
        ));
    }

    #[test]
    fn short_rows_are_rejected() {
        let schema = ["a", "b"].map(String::from).to_vec();
        assert!(matches!(
            Chunk::parse_tbl("t", schema.clone(), "1|\n"),
            Err(ExecError::BadRow { line: 1, .. })
        ));
        assert!(Chunk::new(schema, vec![ints(&[1])]).is_err());
    }
}
