//! Writes a labelled synthetic chest corpus (16-bit PGMs plus labels.csv).
//!
//! ```text
//! cargo run --release --example synthetic_corpus -- <out-dir> [n] [seed]
//! ```

use cxrpipe::dataset::Finding;
use cxrpipe::synthetic::{generate_corpus, write_corpus, ChestConfig};

fn main() -> cxrpipe::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "synthetic-corpus".into());
    let n: usize = args.next().map_or(600, |s| s.parse().expect("n must be an integer"));
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed must be an integer"));

    let corpus = generate_corpus(n, &ChestConfig::default(), seed)?;
    write_corpus(&corpus, &out)?;
    println!("wrote {n} images to {out}/images and labels to {out}/labels.csv");
    for f in Finding::ALL {
        println!("  {:<18} {:>4} positives", f.name(), corpus.labels.positives(f));
    }
    Ok(())
}
