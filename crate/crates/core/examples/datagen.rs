//! Generates a small consistent TPC-H-shaped dataset as `.tbl` files.
//!
//! cargo run --example datagen [out-dir]

use std::path::PathBuf;

use mqplan::datagen::{generate, Scale};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("mqplan-data"));
    let data = generate(7, &Scale::default());
    data.write_dir(&out)?;
    for (table, chunk) in data.tables() {
        println!("{table}: {} rows", chunk.rows.len());
    }
    println!("written to {}", out.display());
    Ok(())
}
