//! Replaces a table's statistics with counts measured from a `.tbl` file.
//!
//! cargo run --example catalog_ingest

use mqplan::catalog::ingest_tbl;
use mqplan::datagen::{generate, Scale};
use mqplan::Catalog;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("mqplan-ingest");
    generate(2, &Scale::tiny()).write_dir(&dir)?;

    let catalog = Catalog::load_default_tpch();
    let columns = catalog.columns("customer")?;
    let stats = ingest_tbl(dir.join("customer.tbl"), "customer", &columns)?;
    let measured = catalog.with_table(stats)?;
    for attr in ["c_custkey", "c_nationkey", "c_mktsegment"] {
        println!("{attr}: {} -> {}", catalog.distinct(attr)?, measured.distinct(attr)?);
    }
    println!(
        "customer: {} -> {}",
        catalog.cardinality("customer")?,
        measured.cardinality("customer")?
    );
    Ok(())
}
