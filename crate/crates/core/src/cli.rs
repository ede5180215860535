//! Command-line front end.
//!
//! Exit codes: 0 success, 1 lexical/syntax error, 2 semantic error (unknown
//! names, boundary violation, bad arguments), 3 planning error, 4 execution
//! or data error, including a failed `--verify`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::catalog::{self, Catalog, CatalogError};
use crate::datagen::{self, Scale};
use crate::exectree::{ExecDag, ExecTreeError};
use crate::executor::{self, Dataset, ExecError, RunConfig};
use crate::mqo::{self, JoinDag, MqoError, SharedPlan, Step};
use crate::parser::{self, MultiQuery, ParseError};
use crate::planfiles::{self, PlanFileError};
use crate::planner::{self, PlanError, PlanMap, PlanProblem};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Mqo(#[from] MqoError),
    #[error(transparent)]
    Tree(#[from] ExecTreeError),
    #[error(transparent)]
    PlanFile(#[from] PlanFileError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0} of the batch's queries differ from the reference evaluator")]
    VerifyFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(e) | CliError::Mqo(MqoError::Parse(e)) => {
                if e.is_syntax() {
                    1
                } else {
                    2
                }
            }
            CliError::Catalog(_) | CliError::Usage(_) | CliError::Mqo(MqoError::Admission(_)) => 2,
            CliError::Plan(_)
            | CliError::Mqo(MqoError::Plan(_))
            | CliError::Tree(_)
            | CliError::PlanFile(PlanFileError::Unsupported(_)) => 3,
            CliError::PlanFile(_) | CliError::Exec(_) | CliError::Io { .. } | CliError::VerifyFailed(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mqplan", version, about = "Multi-query SQL planner and simulated executor")]
pub struct Cli {
    /// Catalog file (default: built-in TPC-H SF1 profile)
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    /// Seed for the order in which unanswered queries are added (0 = batch order)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Table index assignment, e.g. lineitem,region,nation,customer,orders
    #[arg(long, global = true, value_delimiter = ',')]
    encoding: Option<Vec<String>>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Input {
    /// SQL file: one query or a MULTIQUERY ... END batch
    file: Option<PathBuf>,
    /// Inline SQL instead of a file
    #[arg(short = 'e', long = "expr")]
    expr: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Plan one query: map dump, chosen order, operator tree
    Plan(Input),
    /// Plan a batch: map dump, best entry, steps, exits, shared DAG
    Mqplan(Input),
    /// Write <name>.graph and <name>.waypoint
    Emit {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out: PathBuf,
        /// Base name of the files (default: input file stem, or "plan")
        #[arg(long)]
        name: Option<String>,
    },
    /// Execute against .tbl files and print each query's rows
    Run {
        #[command(flatten)]
        input: Input,
        /// Directory holding <table>.tbl files
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 8)]
        workers: usize,
        #[arg(long, default_value_t = 64)]
        chunk: usize,
        /// Compare every query with the naive evaluator
        #[arg(long)]
        verify: bool,
    },
    /// Print the operator DAG
    Explain(Input),
    /// Show or extend the catalog
    #[command(subcommand)]
    Catalog(CatalogCommand),
    /// Write generated .tbl files for region, nation, customer, orders, lineitem
    Datagen {
        #[arg(long)]
        out: PathBuf,
        /// Use a few dozen rows per table instead of the desk-scale default
        #[arg(long)]
        tiny: bool,
    },
}

#[derive(Debug, Subcommand)]
enum CatalogCommand {
    /// Print the catalog in its text format
    Show,
    /// Compute a table's statistics from a .tbl file and print the updated catalog
    Ingest {
        #[arg(long)]
        table: String,
        #[arg(long)]
        file: PathBuf,
        /// Column names (default: the table's columns in the current catalog)
        #[arg(long, value_delimiter = ',')]
        columns: Option<Vec<String>>,
        /// Write the catalog here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A planned input: one query or a batch.
enum Planned {
    Single {
        mq: MultiQuery,
        map: PlanMap,
        dag: ExecDag,
    },
    Batch {
        mq: MultiQuery,
        plan: Box<SharedPlan>,
        dag: ExecDag,
    },
}

impl Planned {
    fn dag(&self) -> &ExecDag {
        match self {
            Planned::Single { dag, .. } | Planned::Batch { dag, .. } => dag,
        }
    }
}

struct Ctx {
    catalog: Catalog,
    seed: u64,
    encoding: Option<Vec<String>>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_input(input: &Input) -> Result<String, CliError> {
    match (&input.file, &input.expr) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either a file or -e, not both".into())),
        (None, None) => Err(CliError::Usage("no SQL given: pass a file or -e".into())),
        (None, Some(e)) => Ok(e.clone()),
        (Some(f), None) => std::fs::read_to_string(f).map_err(io_err(f)),
    }
}

impl Ctx {
    fn single(&self, text: &str) -> Result<Planned, CliError> {
        let q = parser::parse_query(text, &self.catalog)?;
        let mq = parser::build_multiquery(vec![q], self.encoding.as_deref())?;
        let problem = PlanProblem::from_multiquery(&mq, &self.catalog)?;
        let map = planner::optimize(&problem)?;
        let order = map.full().ok_or(PlanError::Empty)?.order.clone();
        let mut join_dag = JoinDag::new();
        let (root, _) = join_dag.graft(&order, &problem);
        let dag = ExecDag::build(&join_dag, &BTreeMap::from([(0, root)]), &mq)?;
        Ok(Planned::Single { mq, map, dag })
    }

    fn batch(&self, text: &str) -> Result<Planned, CliError> {
        let mq = parser::parse_multiquery(text, &self.catalog, self.encoding.as_deref())?;
        let plan = mqo::plan_multiquery(&mq, &self.catalog, self.seed)?;
        let dag = ExecDag::from_shared(&plan, &mq)?;
        Ok(Planned::Batch {
            mq,
            plan: Box::new(plan),
            dag,
        })
    }

    fn any(&self, text: &str) -> Result<Planned, CliError> {
        if parser::is_multiquery(text) {
            self.batch(text)
        } else {
            self.single(text)
        }
    }
}

fn encoding_lines(mq: &MultiQuery) -> String {
    mq.encoding
        .iter()
        .enumerate()
        .map(|(i, t)| format!("{i} {t}\n"))
        .collect()
}

fn batch_report(mq: &MultiQuery, plan: &SharedPlan, dag: &ExecDag) -> String {
    let mut s = String::new();
    s += "-- encoding\n";
    s += &encoding_lines(mq);
    s += "-- map\n";
    s += &plan.map.dump();
    s += "-- best\n";
    let best = &plan.initial_best;
    s += &plan.map.dump_line(&best.tables.key(), best);
    s.push('\n');
    s += "-- steps\n";
    for step in &plan.steps {
        match step {
            Step::Joins {
                query,
                order,
                new_joins,
            } => {
                s += &format!(
                    "{} joins {} new-joins {}\n",
                    mq.queries[*query].name,
                    order.render(),
                    new_joins
                )
            }
            Step::Tables {
                query,
                missing,
                fresh,
                entry,
                ..
            } => {
                s += &format!(
                    "{} tables missing {} order {}\n",
                    mq.queries[*query].name,
                    missing.key(),
                    entry.order.render()
                );
                for line in fresh.dump().lines() {
                    s += &format!("  {line}\n");
                }
            }
        }
    }
    s += "-- exits\n";
    for e in &dag.exits {
        let node = plan.exits[&e.query];
        let dn = plan.dag.node(node);
        s += &format!(
            "{} {} {} {}\n",
            e.name,
            dn.tables.key(),
            dn.order.render(),
            e.residual_text()
        );
    }
    s += "-- dag\n";
    s += &dag.explain();
    s
}

fn single_report(mq: &MultiQuery, map: &PlanMap, dag: &ExecDag) -> String {
    let mut s = String::new();
    s += "-- encoding\n";
    s += &encoding_lines(mq);
    s += "-- map\n";
    s += &map.dump();
    s += "-- order\n";
    if let Some(full) = map.full() {
        s += &full.order.render();
        s.push('\n');
    }
    s += "-- tree\n";
    s += &dag.explain();
    s
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let catalog = match &cli.catalog {
        Some(p) => Catalog::load_catalog_file(p)?,
        None => Catalog::load_default_tpch(),
    };
    let ctx = Ctx {
        catalog,
        seed: cli.seed,
        encoding: cli.encoding,
    };
    let mut text = String::new();
    match cli.command {
        Command::Plan(input) => {
            let sql = read_input(&input)?;
            if parser::is_multiquery(&sql) {
                return Err(CliError::Usage(
                    "`plan` takes one query; use `mqplan` for batches".into(),
                ));
            }
            if let Planned::Single { mq, map, dag } = ctx.single(&sql)? {
                text = single_report(&mq, &map, &dag);
            }
        }
        Command::Mqplan(input) => {
            if let Planned::Batch { mq, plan, dag } = ctx.batch(&read_input(&input)?)? {
                text = batch_report(&mq, &plan, &dag);
            }
        }
        Command::Explain(input) => text = ctx.any(&read_input(&input)?)?.dag().explain(),
        Command::Emit { input, out: dir, name } => {
            let planned = ctx.any(&read_input(&input)?)?;
            let name = name
                .or_else(|| {
                    input
                        .file
                        .as_ref()
                        .and_then(|f| f.file_stem())
                        .map(|s| s.to_string_lossy().into_owned())
                })
                .unwrap_or_else(|| "plan".into());
            let (g, w) = planfiles::write_plan_files(planned.dag(), &ctx.catalog, &dir, &name)?;
            text = format!("{}\n{}\n", g.display(), w.display());
        }
        Command::Run {
            input,
            data,
            workers,
            chunk,
            verify,
        } => {
            if workers == 0 || chunk == 0 {
                return Err(CliError::Usage("--workers and --chunk must be at least 1".into()));
            }
            let planned = ctx.any(&read_input(&input)?)?;
            let dag = planned.dag();
            let mut tables: Vec<String> = dag.tables.clone();
            tables.sort();
            let ds = Dataset::load_dir(&data, &ctx.catalog, &tables)?;
            let result = executor::run_plan(dag, &ds, &RunConfig { workers, chunk })?;
            text = executor::render_results(&result);
            if verify {
                text += "-- verify\n";
                let verdicts = executor::verify(dag, &result, &ds)?;
                for v in &verdicts {
                    text += &format!(
                        "{} {} plan={} oracle={}\n",
                        v.query,
                        if v.matches { "ok" } else { "MISMATCH" },
                        v.plan_rows,
                        v.oracle_rows
                    );
                }
                let bad = verdicts.iter().filter(|v| !v.matches).count();
                if bad > 0 {
                    out.write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>")))?;
                    return Err(CliError::VerifyFailed(bad));
                }
            }
        }
        Command::Catalog(CatalogCommand::Show) => text = ctx.catalog.to_text(),
        Command::Catalog(CatalogCommand::Ingest {
            table,
            file,
            columns,
            out: dest,
        }) => {
            let columns: Vec<String> = match columns {
                Some(c) => c,
                None => ctx.catalog.columns(&table)?.into_iter().map(str::to_string).collect(),
            };
            let refs: Vec<&str> = columns.iter().map(String::as_str).collect();
            let stats = catalog::ingest_tbl(&file, &table, &refs)?;
            let updated = ctx.catalog.with_table(stats)?;
            match dest {
                Some(p) => {
                    std::fs::write(&p, updated.to_text()).map_err(io_err(&p))?;
                    text = format!("{}\n", p.display());
                }
                None => text = updated.to_text(),
            }
        }
        Command::Datagen { out: dir, tiny } => {
            let scale = if tiny { Scale::tiny() } else { Scale::default() };
            let ds = datagen::generate(ctx.seed, &scale);
            ds.write_dir(&dir)?;
            for (t, c) in ds.tables() {
                text += &format!("{t} {}\n", c.rows.len());
            }
        }
    }
    out.write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>")))
}

/// Parses `args` (program name first) and runs the command.
pub fn run_cli<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
