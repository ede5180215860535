//! Graph and waypoint plan files.
//!
//! The graph file describes topology: scanned tables, waypoints (every
//! non-scan operator), and for each of them where each query's tuples go
//! next. The waypoint file describes what each waypoint does per query:
//! which attributes a scan produces, the hash key and pass-through columns
//! of a join, the filter of a selection, the list a PRINT emits.
//!
//! `PROJECT` has no waypoint of its own; it is folded into `PRINT`. DISTINCT
//! and aggregate queries have no file representation and are rejected.
//! Plans with several exits get a `#` header line, one `PRINT_<query>` per
//! exit, and `EXITSEL_<query>` selections for predicates left to the exit.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::catalog::Catalog;
use crate::exectree::{ExecDag, ExecId, ExecKind};

#[derive(Debug, Error)]
pub enum PlanFileError {
    #[error("query {0} uses DISTINCT or an aggregate, which plan files cannot express")]
    Unsupported(String),
    #[error("malformed plan file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const MULTI_EXIT_HEADER: &str =
    "# multi-exit extension: one PRINT_<query> per exit, EXITSEL_<query> holds per-query residual filters";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphLeaf {
    pub table: String,
    /// (query, terminal waypoint)
    pub queries: Vec<(String, String)>,
    pub terminal_links: Vec<(String, String)>,
    pub regular_links: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphNode {
    pub name: String,
    pub terminal_links: Vec<(String, String)>,
    pub regular_links: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphDoc {
    pub comments: Vec<String>,
    pub scans: Vec<String>,
    pub waypoints: Vec<String>,
    pub queries: Vec<String>,
    pub leaves: Vec<GraphLeaf>,
    pub nodes: Vec<GraphNode>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanLine {
    pub query: String,
    pub terminal: String,
    pub attrs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanBlock {
    pub table: String,
    pub lines: Vec<ScanLine>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WaypointLine {
    PrintList {
        query: String,
        attrs: Vec<String>,
    },
    LeftHash {
        keys: Vec<String>,
    },
    Join {
        query: String,
        left_pass: Vec<String>,
        right_keys: Vec<String>,
        right_pass: Vec<String>,
    },
    Drop,
    /// Each predicate as written between its parentheses, e.g. `val(a) < 5`.
    Selection {
        query: String,
        preds: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaypointBlock {
    pub name: String,
    pub kind: String,
    pub lines: Vec<WaypointLine>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaypointDoc {
    pub comments: Vec<String>,
    pub scans: Vec<ScanBlock>,
    pub waypoints: Vec<WaypointBlock>,
}

struct View<'a> {
    dag: &'a ExecDag,
}

impl<'a> View<'a> {
    fn new(dag: &'a ExecDag) -> Result<Self, PlanFileError> {
        for e in &dag.exits {
            let below_print = dag.node(e.chain[e.chain.len() - 2]);
            if !matches!(below_print.kind, ExecKind::Project { .. }) {
                return Err(PlanFileError::Unsupported(e.name.clone()));
            }
        }
        Ok(View { dag })
    }

    fn is_waypoint(&self, n: ExecId) -> bool {
        !matches!(self.dag.node(n).kind, ExecKind::Scan { .. } | ExecKind::Project { .. })
    }

    /// Next waypoint above `n` on query `q`'s path.
    fn up(&self, n: ExecId, q: usize) -> Option<ExecId> {
        let mut p = self.dag.parent_for(n, q)?;
        while !self.is_waypoint(p) {
            p = self.dag.parent_for(p, q)?;
        }
        Some(p)
    }

    fn name(&self, n: ExecId) -> String {
        self.dag.node(n).name.clone()
    }

    fn qname(&self, q: usize) -> String {
        self.dag.queries[q].name.clone()
    }

    fn leaf_terminal(&self, scan: ExecId, q: usize) -> (ExecId, ExecId) {
        let consumer = self.up(scan, q).expect("scans feed a waypoint");
        (consumer, self.up(consumer, q).unwrap_or(consumer))
    }

    fn scans(&self, order: &[ExecId]) -> Vec<ExecId> {
        order
            .iter()
            .copied()
            .filter(|n| matches!(self.dag.node(*n).kind, ExecKind::Scan { .. }))
            .collect()
    }

    /// PRINTs in exit order, joins by number, the rest by name.
    fn graph_waypoints(&self) -> Vec<ExecId> {
        let mut prints: Vec<ExecId> = self.dag.exits.iter().map(|e| e.print()).collect();
        let mut joins = Vec::new();
        let mut rest = Vec::new();
        for (i, n) in self.dag.nodes.iter().enumerate() {
            match n.kind {
                ExecKind::Join { seq, .. } => joins.push((seq, i)),
                ExecKind::Print { .. } | ExecKind::Scan { .. } | ExecKind::Project { .. } => {}
                _ => rest.push((n.name.clone(), i)),
            }
        }
        joins.sort();
        rest.sort();
        prints.extend(joins.into_iter().map(|(_, i)| i));
        prints.extend(rest.into_iter().map(|(_, i)| i));
        prints
    }

    fn sort_attrs(&self, q: usize, attrs: impl IntoIterator<Item = String>, catalog: &Catalog) -> Vec<String> {
        let query = &self.dag.queries[q];
        let mut v: Vec<(usize, usize, String)> = attrs
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(|a| {
                let t = query
                    .owner_of(&a)
                    .and_then(|o| self.dag.tables.iter().position(|x| x == o))
                    .unwrap_or(usize::MAX);
                (t, catalog.column_position(&a).unwrap_or(usize::MAX), a)
            })
            .collect();
        v.sort();
        v.into_iter().map(|(_, _, a)| a).collect()
    }

    fn owned_by(&self, q: usize, attr: &str, n: ExecId) -> bool {
        let query = &self.dag.queries[q];
        query
            .owner_of(attr)
            .and_then(|o| self.dag.tables.iter().position(|x| x == o))
            .is_some_and(|t| self.dag.node(n).tables.contains(t))
    }

    /// Attributes of query `q` used strictly above `n`: its output list,
    /// residual filters, and the keys of every join further up its path.
    fn needed_above(&self, n: ExecId, q: usize) -> BTreeSet<String> {
        let exit = self.dag.exits.iter().find(|e| e.query == q).expect("exit per query");
        let mut out: BTreeSet<String> = exit.select.projection().into_iter().collect();
        out.extend(exit.residual_selections.iter().map(|p| p.attr.clone()));
        for j in &exit.residual_joins {
            out.insert(j.left.clone());
            out.insert(j.right.clone());
        }
        let mut cur = self.dag.parent_for(n, q);
        while let Some(p) = cur {
            if let ExecKind::Join { preds, .. } = &self.dag.node(p).kind {
                for j in preds {
                    out.insert(j.left.clone());
                    out.insert(j.right.clone());
                }
            }
            cur = self.dag.parent_for(p, q);
        }
        out
    }

    fn pass_through(&self, n: ExecId, from: ExecId, q: usize, catalog: &Catalog) -> Vec<String> {
        let needed = self.needed_above(n, q);
        let attrs = needed.into_iter().filter(|a| self.owned_by(q, a, from));
        self.sort_attrs(q, attrs, catalog)
    }
}

pub fn graph_doc(dag: &ExecDag) -> Result<GraphDoc, PlanFileError> {
    let v = View::new(dag)?;
    let comments = if dag.is_multi_exit() {
        vec![MULTI_EXIT_HEADER.to_string()]
    } else {
        vec![]
    };
    let mut scans = v.scans(&dag.pre_order());
    scans.sort_by_key(|s| v.name(*s));
    let waypoints = v.graph_waypoints();
    let rank = |n: ExecId| waypoints.iter().position(|w| *w == n).unwrap_or(usize::MAX);
    let leaves = scans
        .iter()
        .map(|s| {
            let node = dag.node(*s);
            let mut consumers = Vec::new();
            let mut queries = Vec::new();
            for q in &node.queries {
                let (consumer, terminal) = v.leaf_terminal(*s, *q);
                queries.push((v.qname(*q), v.name(terminal)));
                if !consumers.contains(&consumer) {
                    consumers.push(consumer);
                }
            }
            consumers.sort_by_key(|c| rank(*c));
            GraphLeaf {
                table: node.name.clone(),
                queries,
                terminal_links: vec![],
                regular_links: consumers.into_iter().map(|c| v.name(c)).collect(),
            }
        })
        .collect();
    let nodes = waypoints
        .iter()
        .map(|n| GraphNode {
            name: v.name(*n),
            terminal_links: dag
                .node(*n)
                .queries
                .iter()
                .filter_map(|q| v.up(*n, *q).map(|p| (v.qname(*q), v.name(p))))
                .collect(),
            regular_links: vec![],
        })
        .collect();
    Ok(GraphDoc {
        comments,
        scans: scans.iter().map(|s| v.name(*s)).collect(),
        waypoints: waypoints.iter().map(|w| v.name(*w)).collect(),
        queries: dag.exits.iter().map(|e| e.name.clone()).collect(),
        leaves,
        nodes,
    })
}

pub fn waypoint_doc(dag: &ExecDag, catalog: &Catalog) -> Result<WaypointDoc, PlanFileError> {
    let v = View::new(dag)?;
    let comments = if dag.is_multi_exit() {
        vec![MULTI_EXIT_HEADER.to_string()]
    } else {
        vec![]
    };
    let order = dag.pre_order();
    let scans = v
        .scans(&order)
        .into_iter()
        .map(|s| {
            let node = dag.node(s);
            let lines = node
                .queries
                .iter()
                .map(|q| {
                    let query = &dag.queries[*q];
                    let attrs = query
                        .attr_owner
                        .iter()
                        .filter(|(_, t)| *t == node.name)
                        .map(|(a, _)| a.clone());
                    ScanLine {
                        query: query.name.clone(),
                        terminal: v.name(v.leaf_terminal(s, *q).1),
                        attrs: v.sort_attrs(*q, attrs, catalog),
                    }
                })
                .collect();
            ScanBlock {
                table: node.name.clone(),
                lines,
            }
        })
        .collect();
    let mut waypoints = Vec::new();
    for n in order.into_iter().filter(|n| v.is_waypoint(*n)) {
        let node = dag.node(n);
        let block = match &node.kind {
            ExecKind::Print { .. } => {
                let q = node.queries[0];
                WaypointBlock {
                    name: node.name.clone(),
                    kind: "print".into(),
                    lines: vec![WaypointLine::PrintList {
                        query: v.qname(q),
                        attrs: dag.queries[q].select.projection(),
                    }],
                }
            }
            ExecKind::Join { preds, .. } => {
                let (l, r) = (node.children[0], node.children[1]);
                let mut lines = vec![WaypointLine::LeftHash {
                    keys: preds.iter().map(|p| p.left.clone()).collect(),
                }];
                for q in &node.queries {
                    lines.push(WaypointLine::Join {
                        query: v.qname(*q),
                        left_pass: v.pass_through(n, l, *q, catalog),
                        right_keys: preds.iter().map(|p| p.right.clone()).collect(),
                        right_pass: v.pass_through(n, r, *q, catalog),
                    });
                }
                WaypointBlock {
                    name: node.name.clone(),
                    kind: "join".into(),
                    lines,
                }
            }
            ExecKind::Select { preds, .. } => {
                let text: Vec<String> = preds
                    .iter()
                    .map(|p| format!("val({}) {} {}", p.attr, p.op, p.literal))
                    .collect();
                selection_block(&v, n, |_| text.clone())
            }
            ExecKind::ExitSelect { selections, joins, .. } => {
                let mut text: Vec<String> = selections
                    .iter()
                    .map(|p| format!("val({}) {} {}", p.attr, p.op, p.literal))
                    .collect();
                text.extend(joins.iter().map(|j| format!("val({}) = val({})", j.left, j.right)));
                selection_block(&v, n, |_| text.clone())
            }
            ExecKind::Distinct | ExecKind::Sum { .. } | ExecKind::GroupBy { .. } => {
                return Err(PlanFileError::Unsupported(v.qname(node.queries[0])));
            }
            ExecKind::Scan { .. } | ExecKind::Project { .. } => unreachable!("not a waypoint"),
        };
        waypoints.push(block);
    }
    Ok(WaypointDoc {
        comments,
        scans,
        waypoints,
    })
}

fn selection_block(v: &View, n: ExecId, preds: impl Fn(usize) -> Vec<String>) -> WaypointBlock {
    let node = v.dag.node(n);
    let mut lines = vec![WaypointLine::Drop];
    for q in &node.queries {
        lines.push(WaypointLine::Selection {
            query: v.qname(*q),
            preds: preds(*q),
        });
    }
    WaypointBlock {
        name: node.name.clone(),
        kind: "selection".into(),
        lines,
    }
}

pub fn emit_graph(dag: &ExecDag) -> Result<String, PlanFileError> {
    Ok(graph_doc(dag)?.render())
}

pub fn emit_waypoint(dag: &ExecDag, catalog: &Catalog) -> Result<String, PlanFileError> {
    Ok(waypoint_doc(dag, catalog)?.render())
}

/// Writes `<name>.graph` and `<name>.waypoint` under `dir`.
pub fn write_plan_files(
    dag: &ExecDag,
    catalog: &Catalog,
    dir: &Path,
    name: &str,
) -> Result<(PathBuf, PathBuf), PlanFileError> {
    let graph = emit_graph(dag)?;
    let waypoint = emit_waypoint(dag, catalog)?;
    fs::create_dir_all(dir)?;
    let gp = dir.join(format!("{name}.graph"));
    let wp = dir.join(format!("{name}.waypoint"));
    fs::write(&gp, graph)?;
    fs::write(&wp, waypoint)?;
    Ok((gp, wp))
}

fn pairs(v: &[(String, String)]) -> String {
    v.iter().map(|(a, b)| format!(" {a} {b}")).collect()
}

fn words(v: &[String]) -> String {
    v.iter().map(|a| format!(" {a}")).collect()
}

fn list(v: &[String]) -> String {
    format!("({})", v.join(", "))
}

impl GraphDoc {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out += &format!("{c}\n");
        }
        out += &format!("{} TableScans{}\n", self.scans.len(), words(&self.scans));
        out += &format!("{} WayPoints{}\n", self.waypoints.len(), words(&self.waypoints));
        out += &format!("{} Queries{}\n", self.queries.len(), words(&self.queries));
        out += &format!("{} Leaves\n", self.leaves.len());
        for l in &self.leaves {
            out += &format!(
                "{} {} Queries{} {} TerminalLinks{} {} RegularLinks{}\n",
                l.table,
                l.queries.len(),
                pairs(&l.queries),
                l.terminal_links.len(),
                pairs(&l.terminal_links),
                l.regular_links.len(),
                words(&l.regular_links)
            );
        }
        out += &format!("{} Nodes\n", self.nodes.len());
        for n in &self.nodes {
            out += &format!(
                "{} {} TerminalLinks{} {} RegularLinks{}\n",
                n.name,
                n.terminal_links.len(),
                pairs(&n.terminal_links),
                n.regular_links.len(),
                words(&n.regular_links)
            );
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, PlanFileError> {
        let comments = comment_lines(text);
        let mut t = Tokens::new(text);
        let scans = t.counted("TableScans")?;
        let waypoints = t.counted("WayPoints")?;
        let queries = t.counted("Queries")?;
        let n = t.count("Leaves")?;
        let mut leaves = Vec::new();
        for _ in 0..n {
            let table = t.word()?;
            let queries = t.counted_pairs("Queries")?;
            let terminal_links = t.counted_pairs("TerminalLinks")?;
            let regular_links = t.counted("RegularLinks")?;
            leaves.push(GraphLeaf {
                table,
                queries,
                terminal_links,
                regular_links,
            });
        }
        let n = t.count("Nodes")?;
        let mut nodes = Vec::new();
        for _ in 0..n {
            let name = t.word()?;
            let terminal_links = t.counted_pairs("TerminalLinks")?;
            let regular_links = t.counted("RegularLinks")?;
            nodes.push(GraphNode {
                name,
                terminal_links,
                regular_links,
            });
        }
        t.end()?;
        Ok(GraphDoc {
            comments,
            scans,
            waypoints,
            queries,
            leaves,
            nodes,
        })
    }

    /// Every link target names a declared waypoint.
    pub fn links_resolve(&self) -> bool {
        let known: BTreeSet<&str> = self.waypoints.iter().map(String::as_str).collect();
        let leaf_ok = self.leaves.iter().all(|l| {
            l.queries.iter().all(|(_, w)| known.contains(w.as_str()))
                && l.regular_links.iter().all(|w| known.contains(w.as_str()))
        });
        let node_ok = self.nodes.iter().all(|n| {
            known.contains(n.name.as_str()) && n.terminal_links.iter().all(|(_, w)| known.contains(w.as_str()))
        });
        leaf_ok && node_ok
    }
}

impl WaypointLine {
    fn render(&self) -> String {
        match self {
            WaypointLine::PrintList { query, attrs } => {
                let vals: Vec<String> = attrs.iter().map(|a| format!("val({a})")).collect();
                format!("{query} printList {}$", list(&vals))
            }
            WaypointLine::LeftHash { keys } => format!("lefthash string {}$", keys.join(", ")),
            WaypointLine::Join {
                query,
                left_pass,
                right_keys,
                right_pass,
            } => format!(
                "{query} join {}, ({},{})$",
                list(left_pass),
                list(right_keys),
                list(right_pass)
            ),
            WaypointLine::Drop => "Drop string $".into(),
            WaypointLine::Selection { query, preds } => {
                let inner: Vec<String> = preds.iter().map(|p| format!("({p})")).collect();
                format!("{query} selection ({})$", inner.join(" && "))
            }
        }
    }

    fn parse(line: &str) -> Result<Self, PlanFileError> {
        let bad = || PlanFileError::Malformed(format!("waypoint line `{line}`"));
        let body = line.strip_suffix('$').ok_or_else(bad)?;
        if body == "Drop string " || body == "Drop string" {
            return Ok(WaypointLine::Drop);
        }
        if let Some(keys) = body.strip_prefix("lefthash string") {
            return Ok(WaypointLine::LeftHash {
                keys: split_list(keys.trim()),
            });
        }
        let (query, rest) = body.split_once(' ').ok_or_else(bad)?;
        let (kind, rest) = rest.split_once(' ').ok_or_else(bad)?;
        let query = query.to_string();
        match kind {
            "printList" => {
                let inner = unwrap_parens(rest).ok_or_else(bad)?;
                let attrs = split_list(inner)
                    .into_iter()
                    .map(|v| {
                        v.strip_prefix("val(")
                            .and_then(|s| s.strip_suffix(')'))
                            .map(str::to_string)
                            .ok_or_else(bad)
                    })
                    .collect::<Result<_, _>>()?;
                Ok(WaypointLine::PrintList { query, attrs })
            }
            "join" => {
                let (left, right) = rest.split_once(", ((").ok_or_else(bad)?;
                let left_pass = split_list(unwrap_parens(left).ok_or_else(bad)?);
                let right = right.strip_suffix("))").ok_or_else(bad)?;
                let (keys, pass) = right.split_once("),(").ok_or_else(bad)?;
                Ok(WaypointLine::Join {
                    query,
                    left_pass,
                    right_keys: split_list(keys),
                    right_pass: split_list(pass),
                })
            }
            "selection" => {
                let inner = unwrap_parens(rest).ok_or_else(bad)?;
                let preds = inner
                    .split(" && ")
                    .filter(|s| !s.is_empty())
                    .map(|p| unwrap_parens(p).map(str::to_string).ok_or_else(bad))
                    .collect::<Result<_, _>>()?;
                Ok(WaypointLine::Selection { query, preds })
            }
            _ => Err(bad()),
        }
    }
}

impl WaypointDoc {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out += &format!("{c}\n");
        }
        out += &format!("{} TableScans\n", self.scans.len());
        for s in &self.scans {
            out += &format!("{} {}\n", s.table, s.lines.len());
            for l in &s.lines {
                out += &format!("{} {} {}{} 0\n", l.query, l.terminal, l.attrs.len(), words(&l.attrs));
            }
        }
        out += &format!("{} WayPoints\n", self.waypoints.len());
        for w in &self.waypoints {
            out += &format!("{} {} {}\n", w.name, w.kind, w.lines.len());
            for l in &w.lines {
                out += &l.render();
                out.push('\n');
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, PlanFileError> {
        let comments = comment_lines(text);
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| PlanFileError::Malformed(format!("missing {what}")))
        };
        let header = |line: &str, what: &str| -> Result<(String, usize), PlanFileError> {
            let bad = || PlanFileError::Malformed(format!("bad {what} header `{line}`"));
            let (head, n) = line.rsplit_once(' ').ok_or_else(bad)?;
            Ok((head.to_string(), n.parse().map_err(|_| bad())?))
        };
        let first = next("TableScans")?;
        let n = first
            .strip_suffix(" TableScans")
            .and_then(|n| n.parse::<usize>().ok())
            .ok_or_else(|| PlanFileError::Malformed(format!("bad TableScans line `{first}`")))?;
        let mut scans = Vec::new();
        for _ in 0..n {
            let (table, k) = header(next("scan")?, "scan")?;
            let mut block = ScanBlock { table, lines: vec![] };
            for _ in 0..k {
                let line = next("scan line")?;
                let bad = || PlanFileError::Malformed(format!("scan line `{line}`"));
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() < 4 || toks.last() != Some(&"0") {
                    return Err(bad());
                }
                let count: usize = toks[2].parse().map_err(|_| bad())?;
                if toks.len() != count + 4 {
                    return Err(bad());
                }
                block.lines.push(ScanLine {
                    query: toks[0].into(),
                    terminal: toks[1].into(),
                    attrs: toks[3..3 + count].iter().map(|s| s.to_string()).collect(),
                });
            }
            scans.push(block);
        }
        let line = next("WayPoints")?;
        let n = line
            .strip_suffix(" WayPoints")
            .and_then(|n| n.parse::<usize>().ok())
            .ok_or_else(|| PlanFileError::Malformed(format!("bad WayPoints line `{line}`")))?;
        let mut waypoints = Vec::new();
        for _ in 0..n {
            let (head, k) = header(next("waypoint")?, "waypoint")?;
            let (name, kind) = head
                .split_once(' ')
                .ok_or_else(|| PlanFileError::Malformed(format!("waypoint header `{head}`")))?;
            let mut block = WaypointBlock {
                name: name.into(),
                kind: kind.into(),
                lines: vec![],
            };
            for _ in 0..k {
                block.lines.push(WaypointLine::parse(next("waypoint line")?)?);
            }
            waypoints.push(block);
        }
        if let Some(extra) = lines.next() {
            return Err(PlanFileError::Malformed(format!("trailing `{extra}`")));
        }
        Ok(WaypointDoc {
            comments,
            scans,
            waypoints,
        })
    }
}

fn comment_lines(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

fn unwrap_parens(s: &str) -> Option<&str> {
    s.trim().strip_prefix('(')?.strip_suffix(')')
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(str::to_string)
        .collect()
}

struct Tokens<'a> {
    toks: Vec<&'a str>,
    at: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let toks = text
            .lines()
            .filter(|l| !l.trim_start().starts_with('#'))
            .flat_map(str::split_whitespace)
            .collect();
        Tokens { toks, at: 0 }
    }

    fn word(&mut self) -> Result<String, PlanFileError> {
        let w = self
            .toks
            .get(self.at)
            .ok_or_else(|| PlanFileError::Malformed("unexpected end of file".into()))?;
        self.at += 1;
        Ok(w.to_string())
    }

    fn count(&mut self, keyword: &str) -> Result<usize, PlanFileError> {
        let n = self.word()?;
        let k = self.word()?;
        if k != keyword {
            return Err(PlanFileError::Malformed(format!("expected {keyword}, found {k}")));
        }
        n.parse()
            .map_err(|_| PlanFileError::Malformed(format!("bad count `{n}` for {keyword}")))
    }

    fn counted(&mut self, keyword: &str) -> Result<Vec<String>, PlanFileError> {
        let n = self.count(keyword)?;
        (0..n).map(|_| self.word()).collect()
    }

    fn counted_pairs(&mut self, keyword: &str) -> Result<Vec<(String, String)>, PlanFileError> {
        let n = self.count(keyword)?;
        (0..n).map(|_| Ok((self.word()?, self.word()?))).collect()
    }

    fn end(&self) -> Result<(), PlanFileError> {
        match self.toks.get(self.at) {
            None => Ok(()),
            Some(t) => Err(PlanFileError::Malformed(format!("trailing `{t}`"))),
        }
    }
}

/// Single spaces, one record per non-empty line, comments dropped.
pub fn normalize(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exectree::construct_tree;
    use crate::parser::parse_query;
    use crate::planner::JoinOrder;

    const SAMPLE: &str = "SELECT c_name, c_address, c_acctbal
        FROM region, nation, customer, orders
        WHERE o_custkey = c_custkey AND c_nationkey = n_nationkey
        AND n_regionkey = r_regionkey AND r_regionkey < 5";

    fn dag(sql: &str, order: &str) -> ExecDag {
        let cat = Catalog::load_default_tpch();
        let q = parse_query(sql, &cat).unwrap();
        construct_tree(&q, &JoinOrder::parse(order).unwrap(), &cat).unwrap()
    }

    #[test]
    fn sample_leaf_lines() {
        let text = emit_graph(&dag(SAMPLE, "((01)2)3")).unwrap();
        assert!(text.contains("region 1 Queries Q1 JOIN1 0 TerminalLinks 1 RegularLinks SELECTregion\n"));
        assert!(text.contains("orders 1 Queries Q1 PRINT 0 TerminalLinks 1 RegularLinks JOIN3\n"));
        assert!(text.starts_with(
            "4 TableScans customer nation orders region\n5 WayPoints PRINT JOIN1 JOIN2 JOIN3 SELECTregion\n"
        ));
    }

    #[test]
    fn sample_join_lines() {
        let text = emit_waypoint(&dag(SAMPLE, "((01)2)3"), &Catalog::load_default_tpch()).unwrap();
        assert!(text.contains("lefthash string o_custkey$"));
        assert!(text.contains("Q1 join (), ((c_custkey),(c_name, c_address, c_acctbal))$"));
        assert!(text.contains("Q1 selection ((val(r_regionkey) < 5))$"));
        assert!(text.contains("Q1 JOIN3 5 c_custkey c_name c_address c_nationkey c_acctbal 0"));
    }

    #[test]
    fn single_table_files() {
        let d = dag("SELECT r_name FROM region WHERE r_regionkey < 5", "0");
        let g = graph_doc(&d).unwrap();
        assert_eq!(g.scans, ["region"]);
        assert_eq!(g.waypoints, ["PRINT", "SELECTregion"]);
        assert_eq!(g.leaves[0].queries, [("Q1".to_string(), "PRINT".to_string())]);
        let d = dag("SELECT r_name FROM region", "0");
        let g = graph_doc(&d).unwrap();
        assert_eq!(g.waypoints, ["PRINT"]);
        // the consumer is the root, so it is also the terminal
        assert_eq!(g.leaves[0].queries[0].1, "PRINT");
        assert!(g.links_resolve());
    }

    #[test]
    fn aggregates_are_rejected() {
        let d = dag("SELECT SUM(c_acctbal) FROM customer", "0");
        assert!(matches!(emit_graph(&d), Err(PlanFileError::Unsupported(_))));
        let d = dag("SELECT DISTINCT c_name FROM customer", "0");
        assert!(matches!(
            emit_waypoint(&d, &Catalog::load_default_tpch()),
            Err(PlanFileError::Unsupported(_))
        ));
    }

    #[test]
    fn round_trip() {
        let cat = Catalog::load_default_tpch();
        let d = dag(SAMPLE, "((01)2)3");
        let g = graph_doc(&d).unwrap();
        assert_eq!(GraphDoc::parse(&g.render()).unwrap(), g);
        let w = waypoint_doc(&d, &cat).unwrap();
        assert_eq!(WaypointDoc::parse(&w.render()).unwrap(), w);
    }

    #[test]
    fn malformed_input() {
        assert!(GraphDoc::parse("4 TableScans a b").is_err());
        assert!(GraphDoc::parse("0 TableScans 0 WayPoints 0 Queries 0 Leaves 0 Nodes extra").is_err());
        assert!(WaypointDoc::parse("1 TableScans\nregion 1\nQ1 PRINT 2 r_regionkey 0\n0 WayPoints").is_err());
        assert!(WaypointLine::parse("Q1 bogus ()$").is_err());
    }
}
