//! Multi-query SQL planning.
//!
//! A batch of SELECT-FROM-WHERE queries is parsed into a [`parser::MultiQuery`],
//! optimized into one shared join DAG with an exit per query, rendered as
//! graph/waypoint plan files, and executed on a simulated coordinator/worker
//! cluster whose results can be checked against a naive evaluator.
//!
//! ```
//! use mqplan::{catalog::Catalog, parser, planner};
//!
//! let cat = Catalog::load_default_tpch();
//! let q = parser::parse_query(
//!     "SELECT c_name FROM region, nation, customer \
//!      WHERE c_nationkey = n_nationkey AND n_regionkey = r_regionkey",
//!     &cat,
//! ).unwrap();
//! let map = planner::optimize_single(&q, &cat).unwrap();
//! assert_eq!(map.len(), 7);
//! ```

pub mod catalog;
pub mod cli;
pub mod datagen;
pub mod estimator;
pub mod exectree;
pub mod executor;
pub mod fmt;
pub mod mqo;
pub mod parser;
pub mod planfiles;
pub mod planner;
pub mod tableset;

pub use catalog::Catalog;
pub use tableset::TableSet;
