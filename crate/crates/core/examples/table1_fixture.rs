//! Prints the prevalence of every finding in the bundled label fixture, or
//! regenerates the fixture file when given an output path.
//!
//! ```text
//! cargo run --example table1_fixture [-- <output.csv>]
//! ```

use cxrpipe::dataset::{parse_labels, prevalence, write_labels, Finding};
use cxrpipe::synthetic::{table1_labels, BUNDLED_TABLE1_LABELS};

fn main() -> cxrpipe::Result<()> {
    if let Some(out) = std::env::args().nth(1) {
        write_labels(&table1_labels(), &out)?;
        println!("wrote {out}");
        return Ok(());
    }
    let table = parse_labels(BUNDLED_TABLE1_LABELS)?;
    println!("{:<18} {:>5} {:>5} {:>8}", "finding", "true", "false", "prev %");
    for f in Finding::ALL {
        let pos = table.positives(f);
        println!(
            "{:<18} {:>5} {:>5} {:>8.1}",
            f.name(),
            pos,
            table.len() - pos,
            100.0 * prevalence(&table, f)?
        );
    }
    Ok(())
}
