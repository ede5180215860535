//! Table statistics: tuple counts `T(R)` and per-attribute distinct counts `V(R, A)`.
//!
//! The catalog is immutable once built. Attribute names resolve to their owning
//! table through an index built at construction time, so any schema works as long
//! as attribute names are globally unique.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("catalog line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("table `{0}` is defined more than once")]
    DuplicateTable(String),
    #[error("attribute `{0}` is defined more than once")]
    DuplicateAttribute(String),
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("attribute `{attr}` of `{table}` has {distinct} distinct values but the table holds {cardinality} tuples")]
    DistinctExceedsCardinality {
        table: String,
        attr: String,
        distinct: u64,
        cardinality: f64,
    },
    #[error("{path}:{line}: expected at least {expected} columns, found {found}")]
    ShortRow {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
}

/// Statistics for one relation. Attributes keep their declaration order, which
/// doubles as the column order of the relation's data files.
#[derive(Debug, Clone, PartialEq)]
pub struct TableStats {
    pub name: String,
    pub cardinality: f64,
    pub attributes: Vec<(String, u64)>,
}

impl TableStats {
    pub fn new(name: impl Into<String>, cardinality: f64) -> Self {
        TableStats {
            name: name.into(),
            cardinality,
            attributes: Vec::new(),
        }
    }

    pub fn with_attr(mut self, attr: impl Into<String>, distinct: u64) -> Self {
        self.attributes.push((attr.into(), distinct));
        self
    }

    pub fn distinct(&self, attr: &str) -> Option<u64> {
        self.attributes.iter().find(|(a, _)| a == attr).map(|(_, v)| *v)
    }

    fn validate(&self) -> Result<(), CatalogError> {
        let mut seen = BTreeSet::new();
        for (attr, distinct) in &self.attributes {
            if !seen.insert(attr.as_str()) {
                return Err(CatalogError::DuplicateAttribute(attr.clone()));
            }
            if self.cardinality > 0.0 && (*distinct as f64) > self.cardinality.ceil() {
                return Err(CatalogError::DistinctExceedsCardinality {
                    table: self.name.clone(),
                    attr: attr.clone(),
                    distinct: *distinct,
                    cardinality: self.cardinality,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    tables: Vec<TableStats>,
    attr_index: BTreeMap<String, (usize, usize)>,
}

impl Catalog {
    pub fn from_tables(tables: Vec<TableStats>) -> Result<Self, CatalogError> {
        let mut attr_index = BTreeMap::new();
        let mut names = BTreeSet::new();
        for (ti, table) in tables.iter().enumerate() {
            if !names.insert(table.name.as_str()) {
                return Err(CatalogError::DuplicateTable(table.name.clone()));
            }
            table.validate()?;
            for (ai, (attr, _)) in table.attributes.iter().enumerate() {
                if attr_index.insert(attr.clone(), (ti, ai)).is_some() {
                    return Err(CatalogError::DuplicateAttribute(attr.clone()));
                }
            }
        }
        Ok(Catalog { tables, attr_index })
    }

    /// TPC-H scale factor 1 profile for region, nation, customer, orders and
    /// lineitem.
    ///
    /// `V(orders, o_custkey)` is pinned to 150000 rather than the ~100000
    /// customers that actually place orders at SF1; only the max against
    /// `V(customer, c_custkey)` ever enters a join estimate.
    pub fn load_default_tpch() -> Self {
        let tables = vec![
            TableStats::new("region", 5.0)
                .with_attr("r_regionkey", 5)
                .with_attr("r_name", 5)
                .with_attr("r_comment", 5),
            TableStats::new("nation", 25.0)
                .with_attr("n_nationkey", 25)
                .with_attr("n_name", 25)
                .with_attr("n_regionkey", 5)
                .with_attr("n_comment", 25),
            TableStats::new("customer", 150_000.0)
                .with_attr("c_custkey", 150_000)
                .with_attr("c_name", 150_000)
                .with_attr("c_address", 150_000)
                .with_attr("c_nationkey", 25)
                .with_attr("c_phone", 150_000)
                .with_attr("c_acctbal", 140_187)
                .with_attr("c_mktsegment", 5)
                .with_attr("c_comment", 149_968),
            TableStats::new("orders", 1_500_000.0)
                .with_attr("o_orderkey", 1_500_000)
                .with_attr("o_custkey", 150_000)
                .with_attr("o_orderstatus", 3)
                .with_attr("o_totalprice", 1_464_556)
                .with_attr("o_orderdate", 2_406)
                .with_attr("o_orderpriority", 5)
                .with_attr("o_clerk", 1_000)
                .with_attr("o_shippriority", 1)
                .with_attr("o_comment", 1_482_071),
            TableStats::new("lineitem", 6_001_215.0)
                .with_attr("l_orderkey", 1_500_000)
                .with_attr("l_partkey", 200_000)
                .with_attr("l_suppkey", 10_000)
                .with_attr("l_linenumber", 7)
                .with_attr("l_quantity", 50)
                .with_attr("l_extendedprice", 933_900)
                .with_attr("l_discount", 11)
                .with_attr("l_tax", 9)
                .with_attr("l_returnflag", 3)
                .with_attr("l_linestatus", 2)
                .with_attr("l_shipdate", 2_526)
                .with_attr("l_commitdate", 2_466)
                .with_attr("l_receiptdate", 2_554)
                .with_attr("l_shipinstruct", 4)
                .with_attr("l_shipmode", 7)
                .with_attr("l_comment", 4_580_667),
        ];
        Catalog::from_tables(tables).expect("built-in TPC-H profile is consistent")
    }

    pub fn load_catalog_file(path: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| CatalogError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_text(&text)
    }

    /// Parses the line-oriented catalog format:
    ///
    /// ```text
    /// # comment
    /// table <name> <cardinality>
    /// attr <name> <table> <distinct-count>
    /// ```
    pub fn parse_text(text: &str) -> Result<Self, CatalogError> {
        let mut tables: Vec<TableStats> = Vec::new();
        let mut pending: Vec<(usize, String, String, u64)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let parse_err = |msg: String| CatalogError::Parse { line, msg };
            match fields.as_slice() {
                ["table", name, card] => {
                    let cardinality: f64 = card
                        .parse()
                        .map_err(|_| parse_err(format!("bad cardinality `{card}`")))?;
                    if cardinality.is_nan() || cardinality < 0.0 || !cardinality.is_finite() {
                        return Err(parse_err(format!("bad cardinality `{card}`")));
                    }
                    if tables.iter().any(|t| t.name == *name) {
                        return Err(CatalogError::DuplicateTable(name.to_string()));
                    }
                    tables.push(TableStats::new(*name, cardinality));
                }
                ["attr", name, table, distinct] => {
                    let distinct: u64 = distinct
                        .parse()
                        .map_err(|_| parse_err(format!("bad distinct count `{distinct}`")))?;
                    pending.push((line, name.to_string(), table.to_string(), distinct));
                }
                _ => return Err(parse_err(format!("unrecognised record `{content}`"))),
            }
        }
        for (line, attr, table, distinct) in pending {
            let owner = tables
                .iter_mut()
                .find(|t| t.name == table)
                .ok_or_else(|| CatalogError::Parse {
                    line,
                    msg: format!("attribute `{attr}` names undefined table `{table}`"),
                })?;
            owner.attributes.push((attr, distinct));
        }
        Self::from_tables(tables)
    }

    /// Renders the catalog in the text format accepted by [`Catalog::parse_text`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.tables {
            out.push_str(&format!("table {} {}\n", t.name, t.cardinality));
            for (attr, v) in &t.attributes {
                out.push_str(&format!("attr {} {} {}\n", attr, t.name, v));
            }
        }
        out
    }

    pub fn tables(&self) -> &[TableStats] {
        &self.tables
    }

    pub fn table(&self, name: &str) -> Option<&TableStats> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn cardinality(&self, table: &str) -> Result<f64, CatalogError> {
        self.table(table)
            .map(|t| t.cardinality)
            .ok_or_else(|| CatalogError::UnknownTable(table.to_string()))
    }

    /// Owning table and distinct count of an attribute.
    pub fn resolve(&self, attr: &str) -> Result<(&str, u64), CatalogError> {
        let (ti, ai) = self
            .attr_index
            .get(attr)
            .ok_or_else(|| CatalogError::UnknownAttribute(attr.to_string()))?;
        let table = &self.tables[*ti];
        Ok((table.name.as_str(), table.attributes[*ai].1))
    }

    pub fn owner(&self, attr: &str) -> Result<&str, CatalogError> {
        self.resolve(attr).map(|(t, _)| t)
    }

    pub fn distinct(&self, attr: &str) -> Result<u64, CatalogError> {
        self.resolve(attr).map(|(_, v)| v)
    }

    /// Declaration position of an attribute within its table.
    pub fn column_position(&self, attr: &str) -> Option<usize> {
        self.attr_index.get(attr).map(|(_, ai)| *ai)
    }

    /// Attribute names of a table in declaration order.
    pub fn columns(&self, table: &str) -> Result<Vec<&str>, CatalogError> {
        self.table(table)
            .map(|t| t.attributes.iter().map(|(a, _)| a.as_str()).collect())
            .ok_or_else(|| CatalogError::UnknownTable(table.to_string()))
    }

    /// Returns a copy with `stats` added, or replacing the table of the same name.
    pub fn with_table(&self, stats: TableStats) -> Result<Self, CatalogError> {
        let mut tables = self.tables.clone();
        match tables.iter_mut().find(|t| t.name == stats.name) {
            Some(slot) => *slot = stats,
            None => tables.push(stats),
        }
        Self::from_tables(tables)
    }
}

/// Computes exact statistics from a pipe-delimited `.tbl` file. A trailing `|`
/// on each row is tolerated; extra columns beyond `attributes` are ignored.
pub fn ingest_tbl(path: impl AsRef<Path>, table: &str, attributes: &[&str]) -> Result<TableStats, CatalogError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CatalogError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut distinct: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); attributes.len()];
    let mut rows = 0usize;
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields = split_tbl_line(line);
        if fields.len() < attributes.len() {
            return Err(CatalogError::ShortRow {
                path: path.to_path_buf(),
                line: i + 1,
                expected: attributes.len(),
                found: fields.len(),
            });
        }
        for (set, field) in distinct.iter_mut().zip(fields) {
            set.insert(field);
        }
        rows += 1;
    }
    let mut stats = TableStats::new(table, rows as f64);
    for (attr, set) in attributes.iter().zip(distinct) {
        stats.attributes.push((attr.to_string(), set.len() as u64));
    }
    stats.validate()?;
    Ok(stats)
}

/// Splits one `.tbl` row, dropping the optional trailing delimiter.
pub fn split_tbl_line(line: &str) -> Vec<&str> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    let line = line.strip_suffix('|').unwrap_or(line);
    line.split('|').collect()
}
