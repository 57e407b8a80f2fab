//! Seeded resampling split plans: builds the five 70/30 resamples for the
//! bundled label table, checks them and writes the plan as JSON.
//!
//! ```text
//! cargo run --release --example split_plan -- [plan.json] [seed]
//! ```

use std::collections::HashSet;

use cxrpipe::dataset::{make_splits, parse_labels, Finding, SplitPlan};
use cxrpipe::synthetic::BUNDLED_TABLE1_LABELS;

fn main() -> cxrpipe::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "split_plan.json".into());
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed must be an integer"));

    let table = parse_labels(BUNDLED_TABLE1_LABELS)?;
    let plan = make_splits(table.ids(), 5, 0.7, seed)?;
    let index = table.index_of();
    for (r, res) in plan.resamples.iter().enumerate() {
        let train: HashSet<&str> = res.train.iter().map(String::as_str).collect();
        assert!(res.test.iter().all(|id| !train.contains(id.as_str())));
        let test_pos = |f: Finding| res.test.iter().filter(|id| table.rows()[index[id.as_str()]][f.index()]).count();
        println!(
            "resample {r}: train {}, test {}, test positives: mass {}, pneumothorax {}, effusion {}",
            res.train.len(),
            res.test.len(),
            test_pos(Finding::Mass),
            test_pos(Finding::Pneumothorax),
            test_pos(Finding::PleuralEffusion),
        );
    }
    plan.save(&path)?;
    let reloaded = SplitPlan::load(&path)?;
    assert_eq!(reloaded, plan);
    assert_eq!(make_splits(table.ids(), 5, 0.7, seed)?.to_json(), plan.to_json());
    println!("wrote {path}; regenerating with seed {seed} reproduces it byte for byte");
    Ok(())
}
